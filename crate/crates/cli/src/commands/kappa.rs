//! `kappa`: inter-coder agreement. Accepts either two label files (one coder
//! each, aligned on shared post ids) or the configured labels file holding
//! exactly two coders.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use abuselens::corpus::{cohen_kappa, load_labels, LabeledExample};

use super::{require_file, Artifacts};
use crate::config::RunConfig;
use crate::errors::{CliError, CliResult};
use crate::manifest::Manifest;

fn first_label_per_post(labels: &[LabeledExample]) -> BTreeMap<&str, u8> {
    let mut out = BTreeMap::new();
    for l in labels {
        out.entry(l.post_id.as_str()).or_insert(l.label);
    }
    out
}

fn aligned(a: &BTreeMap<&str, u8>, b: &BTreeMap<&str, u8>) -> (Vec<u8>, Vec<u8>) {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (id, &la) in a {
        if let Some(&lb) = b.get(id) {
            xs.push(la);
            ys.push(lb);
        }
    }
    (xs, ys)
}

pub fn run(
    config: &RunConfig,
    file_a: Option<&Path>,
    file_b: Option<&Path>,
) -> CliResult<()> {
    let mut manifest = Manifest::new("kappa", config);
    let load = |p: &Path, manifest: &mut Manifest| -> CliResult<Vec<LabeledExample>> {
        require_file(p)?;
        manifest.record_input(p)?;
        load_labels(p).map_err(|e| CliError::Data(e.to_string()))
    };
    let (seq_a, seq_b, n) = match (file_a, file_b) {
        (Some(a), Some(b)) => {
            let la = load(a, &mut manifest)?;
            let lb = load(b, &mut manifest)?;
            let (xs, ys) = aligned(&first_label_per_post(&la), &first_label_per_post(&lb));
            let n = xs.len();
            (xs, ys, n)
        }
        (None, None) => {
            let path: PathBuf = config.labels.clone().ok_or_else(|| {
                CliError::Config("labels path is required (set labels=... or pass two files)".into())
            })?;
            let labels = load(&path, &mut manifest)?;
            let mut coders: Vec<&str> = labels.iter().map(|l| l.coder.as_str()).collect();
            coders.sort_unstable();
            coders.dedup();
            if coders.len() != 2 {
                return Err(CliError::Data(format!(
                    "kappa needs exactly two coders, found {}: {}",
                    coders.len(),
                    coders.join(", ")
                )));
            }
            let split = |coder: &str| -> Vec<LabeledExample> {
                labels.iter().filter(|l| l.coder == coder).cloned().collect()
            };
            let la = split(coders[0]);
            let lb = split(coders[1]);
            let (xs, ys) = aligned(&first_label_per_post(&la), &first_label_per_post(&lb));
            let n = xs.len();
            (xs, ys, n)
        }
        _ => {
            return Err(CliError::Config(
                "pass either two label files or none (configured labels file)".into(),
            ))
        }
    };
    if n == 0 {
        return Err(CliError::Data(
            "no post ids shared between the two coders".into(),
        ));
    }
    let kappa = cohen_kappa(&seq_a, &seq_b).map_err(|e| CliError::Data(e.to_string()))?;
    let line = format!("kappa\t{kappa:.4}\nitems\t{n}\n");
    print!("{line}");
    let artifacts = Artifacts::new(config);
    let dir = artifacts.dir("kappa");
    manifest.write_output(&dir.join("kappa.txt"), line.as_bytes())?;
    manifest.finish(&dir)?;
    Ok(())
}
