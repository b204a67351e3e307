//! Run configuration: defaults, the flat key-value config file, and CLI
//! overrides. Every file key has the same name as the struct field; every
//! CLI flag mirrors a key (kebab-case) and wins over the file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use abuselens::classifiers::Hyperparameters;
use abuselens::corpus::StudyWindow;
use abuselens::deterrence::{SelectionMode, WeekRule};
use chrono::NaiveDate;

use crate::errors::{CliError, CliResult};

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub posts: Option<PathBuf>,
    pub roster: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub window_start: NaiveDate,
    pub window_end: NaiveDate,
    pub min_mentions: usize,
    pub keyness_p: f64,
    pub test_fraction: f64,
    pub min_weekly_miso: u32,
    pub cluster_k: usize,
    pub sample_n: usize,
    pub sample_min_chars: usize,
    pub sample_cap_factor: f64,
    pub binary_features: bool,
    pub fold_accents: bool,
    pub week_rule: WeekRule,
    pub selection_mode: SelectionMode,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub deterministic: bool,
    pub hyper: Hyperparameters,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            posts: None,
            roster: None,
            labels: None,
            out_dir: PathBuf::from("out"),
            window_start: NaiveDate::from_ymd_opt(2022, 1, 1).expect("valid date"),
            window_end: NaiveDate::from_ymd_opt(2022, 11, 30).expect("valid date"),
            min_mentions: 100,
            keyness_p: 0.20,
            test_fraction: 0.2,
            min_weekly_miso: 5,
            cluster_k: 3,
            sample_n: 1000,
            sample_min_chars: 100,
            sample_cap_factor: 2.0,
            binary_features: false,
            fold_accents: false,
            week_rule: WeekRule::AnchoredToWindowStart,
            selection_mode: SelectionMode::AnyWeek,
            seed: None,
            jobs: None,
            deterministic: false,
            hyper: Hyperparameters::default(),
        }
    }
}

impl RunConfig {
    pub fn window(&self) -> CliResult<StudyWindow> {
        StudyWindow::new(self.window_start, self.window_end)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    /// Seed for a stochastic step; absent seed is a config error.
    pub fn require_seed(&self) -> CliResult<u64> {
        self.seed
            .ok_or_else(|| CliError::Config("a --seed is required for this subcommand".into()))
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if !(0.0 < self.keyness_p && self.keyness_p < 1.0) {
            return bad(format!("keyness_p {} outside (0, 1)", self.keyness_p));
        }
        if !(0.0 < self.test_fraction && self.test_fraction < 1.0) {
            return bad(format!(
                "test_fraction {} outside (0, 1)",
                self.test_fraction
            ));
        }
        if self.cluster_k < 2 {
            return bad(format!("cluster_k {} must be at least 2", self.cluster_k));
        }
        if self.sample_cap_factor <= 0.0 {
            return bad(format!(
                "sample_cap_factor {} must be positive",
                self.sample_cap_factor
            ));
        }
        if self.window_start > self.window_end {
            return bad(format!(
                "window_start {} after window_end {}",
                self.window_start, self.window_end
            ));
        }
        Ok(())
    }

    /// Flattened key-value view, echoed into run manifests.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let path = |p: &Option<PathBuf>| {
            p.as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_default()
        };
        m.insert("posts".into(), path(&self.posts));
        m.insert("roster".into(), path(&self.roster));
        m.insert("labels".into(), path(&self.labels));
        m.insert("out_dir".into(), self.out_dir.display().to_string());
        m.insert("window_start".into(), self.window_start.to_string());
        m.insert("window_end".into(), self.window_end.to_string());
        m.insert("min_mentions".into(), self.min_mentions.to_string());
        m.insert("keyness_p".into(), self.keyness_p.to_string());
        m.insert("test_fraction".into(), self.test_fraction.to_string());
        m.insert("min_weekly_miso".into(), self.min_weekly_miso.to_string());
        m.insert("cluster_k".into(), self.cluster_k.to_string());
        m.insert("sample_n".into(), self.sample_n.to_string());
        m.insert("sample_min_chars".into(), self.sample_min_chars.to_string());
        m.insert(
            "sample_cap_factor".into(),
            self.sample_cap_factor.to_string(),
        );
        m.insert("binary_features".into(), self.binary_features.to_string());
        m.insert("fold_accents".into(), self.fold_accents.to_string());
        m.insert("week_rule".into(), week_rule_name(self.week_rule).into());
        m.insert(
            "selection_mode".into(),
            selection_mode_name(self.selection_mode).into(),
        );
        m.insert(
            "seed".into(),
            self.seed.map(|s| s.to_string()).unwrap_or_default(),
        );
        m.insert("deterministic".into(), self.deterministic.to_string());
        m.insert("nb_alpha".into(), self.hyper.nb_alpha.to_string());
        m.insert("nbg_var_floor".into(), self.hyper.nbg_var_floor.to_string());
        m.insert("lr_l2".into(), self.hyper.lr_l2.to_string());
        m.insert("lr_tol".into(), self.hyper.lr_tol.to_string());
        m.insert("lr_max_iter".into(), self.hyper.lr_max_iter.to_string());
        m.insert("svm_c".into(), self.hyper.svm_c.to_string());
        m.insert("svm_tol".into(), self.hyper.svm_tol.to_string());
        m.insert("svm_max_passes".into(), self.hyper.svm_max_passes.to_string());
        m.insert("rf_trees".into(), self.hyper.rf_trees.to_string());
        m.insert("knn_k".into(), self.hyper.knn_k.to_string());
        m.insert("stack_folds".into(), self.hyper.stack_folds.to_string());
        m
    }
}

fn week_rule_name(rule: WeekRule) -> &'static str {
    match rule {
        WeekRule::AnchoredToWindowStart => "anchored",
        WeekRule::IsoCalendar => "iso",
    }
}

fn selection_mode_name(mode: SelectionMode) -> &'static str {
    match mode {
        SelectionMode::AnyWeek => "any_week",
        SelectionMode::EveryWeek => "every_week",
        SelectionMode::MeanAtLeast => "mean",
    }
}

pub fn parse_week_rule(s: &str) -> CliResult<WeekRule> {
    match s {
        "anchored" => Ok(WeekRule::AnchoredToWindowStart),
        "iso" => Ok(WeekRule::IsoCalendar),
        other => Err(CliError::Config(format!(
            "week_rule must be anchored or iso, got {other:?}"
        ))),
    }
}

pub fn parse_selection_mode(s: &str) -> CliResult<SelectionMode> {
    match s {
        "any_week" => Ok(SelectionMode::AnyWeek),
        "every_week" => Ok(SelectionMode::EveryWeek),
        "mean" => Ok(SelectionMode::MeanAtLeast),
        other => Err(CliError::Config(format!(
            "selection_mode must be any_week, every_week or mean, got {other:?}"
        ))),
    }
}

/// Apply a flat TOML config file onto `config`. Unknown keys are rejected so
/// typos do not silently fall back to defaults.
pub fn apply_config_file(config: &mut RunConfig, path: &Path) -> CliResult<()> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let table: toml::Table = text
        .parse()
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    for (key, value) in table {
        apply_key(config, &key, &value)
            .map_err(|e| CliError::Config(format!("{}: key {key}: {e}", path.display())))?;
    }
    Ok(())
}

fn apply_key(config: &mut RunConfig, key: &str, value: &toml::Value) -> Result<(), String> {
    use toml::Value;
    let as_str = |v: &Value| -> Result<String, String> {
        v.as_str()
            .map(String::from)
            .ok_or_else(|| "expected a string".into())
    };
    let as_usize = |v: &Value| -> Result<usize, String> {
        v.as_integer()
            .and_then(|i| usize::try_from(i).ok())
            .ok_or_else(|| "expected a nonnegative integer".into())
    };
    let as_f64 = |v: &Value| -> Result<f64, String> {
        v.as_float()
            .or_else(|| v.as_integer().map(|i| i as f64))
            .ok_or_else(|| "expected a number".into())
    };
    let as_bool = |v: &Value| -> Result<bool, String> {
        v.as_bool().ok_or_else(|| "expected a boolean".into())
    };
    let as_date = |v: &Value| -> Result<NaiveDate, String> {
        let s = as_str(v)?;
        s.parse().map_err(|e| format!("bad date {s:?}: {e}"))
    };
    match key {
        "posts" => config.posts = Some(PathBuf::from(as_str(value)?)),
        "roster" => config.roster = Some(PathBuf::from(as_str(value)?)),
        "labels" => config.labels = Some(PathBuf::from(as_str(value)?)),
        "out_dir" => config.out_dir = PathBuf::from(as_str(value)?),
        "window_start" => config.window_start = as_date(value)?,
        "window_end" => config.window_end = as_date(value)?,
        "min_mentions" => config.min_mentions = as_usize(value)?,
        "keyness_p" => config.keyness_p = as_f64(value)?,
        "test_fraction" => config.test_fraction = as_f64(value)?,
        "min_weekly_miso" => config.min_weekly_miso = as_usize(value)? as u32,
        "cluster_k" => config.cluster_k = as_usize(value)?,
        "sample_n" => config.sample_n = as_usize(value)?,
        "sample_min_chars" => config.sample_min_chars = as_usize(value)?,
        "sample_cap_factor" => config.sample_cap_factor = as_f64(value)?,
        "binary_features" => config.binary_features = as_bool(value)?,
        "fold_accents" => config.fold_accents = as_bool(value)?,
        "week_rule" => {
            config.week_rule = parse_week_rule(&as_str(value)?).map_err(|e| e.to_string())?
        }
        "selection_mode" => {
            config.selection_mode =
                parse_selection_mode(&as_str(value)?).map_err(|e| e.to_string())?
        }
        "seed" => {
            config.seed = Some(
                value
                    .as_integer()
                    .and_then(|i| u64::try_from(i).ok())
                    .ok_or("expected a nonnegative integer")?,
            )
        }
        "jobs" => config.jobs = Some(as_usize(value)?),
        "deterministic" => config.deterministic = as_bool(value)?,
        "nb_alpha" => config.hyper.nb_alpha = as_f64(value)?,
        "nbg_var_floor" => config.hyper.nbg_var_floor = as_f64(value)?,
        "lr_l2" => config.hyper.lr_l2 = as_f64(value)?,
        "lr_tol" => config.hyper.lr_tol = as_f64(value)?,
        "lr_max_iter" => config.hyper.lr_max_iter = as_usize(value)?,
        "svm_c" => config.hyper.svm_c = as_f64(value)?,
        "svm_tol" => config.hyper.svm_tol = as_f64(value)?,
        "svm_max_passes" => config.hyper.svm_max_passes = as_usize(value)?,
        "rf_trees" => config.hyper.rf_trees = as_usize(value)?,
        "knn_k" => config.hyper.knn_k = as_usize(value)?,
        "stack_folds" => config.hyper.stack_folds = as_usize(value)?,
        other => return Err(format!("unknown config key {other:?}")),
    }
    Ok(())
}
