//! `report`: monthly series table, and the SVG figures (monthly series,
//! pooled scatter with fit, per-target mention histogram, ratio boxplots).

use std::collections::BTreeMap;
use std::fs;

use abuselens::heterogeneity::misogyny_ratio;
use chrono::Datelike;

use super::{load_flags, load_ingested_posts, load_ingested_roster, mention_counts, require_file, Artifacts};
use crate::config::RunConfig;
use crate::errors::{CliError, CliResult};
use crate::figures::{box_stats, render_svg, FigureKind, FigurePayload, FigureSpec};
use crate::manifest::Manifest;

fn month_labels(config: &RunConfig) -> Vec<(i32, u32)> {
    let mut months = Vec::new();
    let (mut year, mut month) = (config.window_start.year(), config.window_start.month());
    let (end_year, end_month) = (config.window_end.year(), config.window_end.month());
    while (year, month) <= (end_year, end_month) {
        months.push((year, month));
        month += 1;
        if month == 13 {
            month = 1;
            year += 1;
        }
    }
    months
}

/// Parse deterrence/outliers.tsv back into standardized points.
fn read_outlier_points(
    config: &RunConfig,
    manifest: &mut Manifest,
) -> CliResult<(Vec<(f64, f64)>, Vec<(f64, f64)>)> {
    let path = Artifacts::new(config).outliers();
    require_file(&path)?;
    manifest.record_input(&path)?;
    let text = fs::read_to_string(&path)?;
    let mut inliers = Vec::new();
    let mut outliers = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 7 {
            return Err(CliError::Data(format!(
                "{} line {}: expected 7 fields",
                path.display(),
                i + 1
            )));
        }
        let parse = |s: &str| -> CliResult<f64> {
            s.parse()
                .map_err(|e| CliError::Data(format!("{} line {}: {e}", path.display(), i + 1)))
        };
        let point = (parse(fields[4])?, parse(fields[5])?);
        if fields[6] == "1" {
            outliers.push(point);
        } else {
            inliers.push(point);
        }
    }
    Ok((inliers, outliers))
}

fn read_pooled_fit(config: &RunConfig, manifest: &mut Manifest) -> CliResult<(f64, f64)> {
    let path = Artifacts::new(config).pooled_fit();
    require_file(&path)?;
    manifest.record_input(&path)?;
    let text = fs::read_to_string(&path)?;
    let line = text
        .lines()
        .nth(1)
        .ok_or_else(|| CliError::Data(format!("{} has no data row", path.display())))?;
    let fields: Vec<&str> = line.split('\t').collect();
    let parse = |s: &str| -> CliResult<f64> {
        s.parse()
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
    };
    Ok((parse(fields[0])?, parse(fields[1])?))
}

pub fn run(config: &RunConfig) -> CliResult<()> {
    let mut manifest = Manifest::new("report", config);
    let posts = load_ingested_posts(config, &mut manifest)?;
    if posts.is_empty() {
        return Err(CliError::Data("ingested corpus is empty".into()));
    }
    let roster = load_ingested_roster(config, &mut manifest)?;
    let flags = load_flags(config, &posts, &mut manifest)?;
    let artifacts = Artifacts::new(config);
    let dir = artifacts.dir("report");

    // Monthly series: mention volume, own volume, misogynistic share.
    let months = month_labels(config);
    let index: BTreeMap<(i32, u32), usize> = months
        .iter()
        .enumerate()
        .map(|(i, &m)| (m, i))
        .collect();
    let mut mention_counts_m = vec![0u64; months.len()];
    let mut own_counts_m = vec![0u64; months.len()];
    let mut miso_counts_m = vec![0u64; months.len()];
    for (post, &flag) in posts.iter().zip(&flags) {
        let key = (post.timestamp.year(), post.timestamp.month());
        let Some(&i) = index.get(&key) else { continue };
        if post.is_own {
            own_counts_m[i] += 1;
        } else {
            mention_counts_m[i] += 1;
            if flag {
                miso_counts_m[i] += 1;
            }
        }
    }
    let shares: Vec<Option<f64>> = mention_counts_m
        .iter()
        .zip(&miso_counts_m)
        .map(|(&all, &miso)| {
            (all > 0).then(|| misogyny_ratio(miso, all).expect("miso <= all"))
        })
        .collect();
    let labels: Vec<String> = months
        .iter()
        .map(|(y, m)| format!("{y}-{m:02}"))
        .collect();

    let mut monthly_tsv = String::from("month\tmentions\town\tmisogynistic\tshare\n");
    for (i, label) in labels.iter().enumerate() {
        let share = shares[i].map(|s| format!("{s:.6}")).unwrap_or_default();
        monthly_tsv.push_str(&format!(
            "{label}\t{}\t{}\t{}\t{share}\n",
            mention_counts_m[i], own_counts_m[i], miso_counts_m[i]
        ));
    }
    manifest.write_output(&dir.join("monthly.tsv"), monthly_tsv.as_bytes())?;

    let monthly_fig = FigureSpec {
        kind: FigureKind::MonthlySeries,
        payload: FigurePayload::MonthlySeries {
            months: labels,
            mention_counts: mention_counts_m,
            own_counts: own_counts_m,
            shares,
        },
        output: dir.join("monthly_series.svg"),
    };
    let svg = render_svg(&monthly_fig, config.deterministic)?;
    manifest.write_output(&monthly_fig.output, svg.as_bytes())?;

    // Pooled standardized scatter with the fitted deterrence line.
    let (inliers, outliers) = read_outlier_points(config, &mut manifest)?;
    let fit = if outliers.len() >= 3 {
        Some(read_pooled_fit(config, &mut manifest)?)
    } else {
        None
    };
    let scatter = FigureSpec {
        kind: FigureKind::ScatterFit,
        payload: FigurePayload::ScatterFit {
            inliers,
            outliers,
            fit,
        },
        output: dir.join("scatter_fit.svg"),
    };
    let svg = render_svg(&scatter, config.deterministic)?;
    manifest.write_output(&scatter.output, svg.as_bytes())?;

    // Histogram of misogynistic mentions per target.
    let (mentions, miso) = mention_counts(&posts, &flags, &roster);
    let per_target: Vec<f64> = roster.handles().map(|h| miso[h] as f64).collect();
    let max = per_target.iter().fold(0.0f64, |m, &v| m.max(v)).max(1.0);
    let bins = 10usize;
    let width = (max + 1.0) / bins as f64;
    let bin_edges: Vec<f64> = (0..=bins).map(|i| i as f64 * width).collect();
    let mut counts = vec![0u64; bins];
    for &v in &per_target {
        let slot = ((v / width) as usize).min(bins - 1);
        counts[slot] += 1;
    }
    let histogram = FigureSpec {
        kind: FigureKind::HistogramMentions,
        payload: FigurePayload::HistogramMentions { bin_edges, counts },
        output: dir.join("histogram_mentions.svg"),
    };
    let svg = render_svg(&histogram, config.deterministic)?;
    manifest.write_output(&histogram.output, svg.as_bytes())?;

    // Ratio boxplots grouped by political orientation.
    let mut groups: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for t in &roster.targets {
        let m = mentions[&t.handle];
        if m == 0 {
            continue;
        }
        groups
            .entry(t.political_orientation.code())
            .or_default()
            .push(misogyny_ratio(miso[&t.handle], m).expect("miso <= mentions"));
    }
    let boxes: Vec<(String, crate::figures::BoxStats)> = groups
        .into_iter()
        .filter_map(|(name, mut values)| {
            values.sort_by(|a, b| a.partial_cmp(b).expect("ratios are finite"));
            box_stats(&values).map(|b| (name.to_string(), b))
        })
        .collect();
    if !boxes.is_empty() {
        let boxplot = FigureSpec {
            kind: FigureKind::BoxplotRatio,
            payload: FigurePayload::BoxplotRatio { groups: boxes },
            output: dir.join("boxplot_ratio.svg"),
        };
        let svg = render_svg(&boxplot, config.deterministic)?;
        manifest.write_output(&boxplot.output, svg.as_bytes())?;
    }

    manifest.finish(&dir)?;
    println!("report: wrote monthly.tsv and figures to {}", dir.display());
    Ok(())
}
