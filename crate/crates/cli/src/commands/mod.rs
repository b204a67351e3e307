//! Subcommand implementations. Every subcommand reads its prerequisites from
//! the output directory (or the configured input paths), writes its artifacts
//! atomically, and finishes with a manifest of input/output content hashes.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use abuselens::corpus::{load_posts, Post, TargetRoster};
use abuselens::textprep::TokenizeOptions;

use crate::config::RunConfig;
use crate::errors::{CliError, CliResult};
use crate::manifest::Manifest;

pub mod classify;
pub mod deterrence;
pub mod evaluate;
pub mod heterogeneity;
pub mod ingest;
pub mod kappa;
pub mod report;
pub mod sample;
pub mod train;

/// Artifact locations under the output directory.
pub struct Artifacts<'a> {
    out_dir: &'a Path,
}

impl<'a> Artifacts<'a> {
    pub fn new(config: &'a RunConfig) -> Artifacts<'a> {
        Artifacts {
            out_dir: &config.out_dir,
        }
    }

    pub fn dir(&self, sub: &str) -> PathBuf {
        self.out_dir.join(sub)
    }

    pub fn ingest_posts(&self) -> PathBuf {
        self.dir("ingest").join("posts.jsonl")
    }

    pub fn ingest_roster(&self) -> PathBuf {
        self.dir("ingest").join("roster.csv")
    }

    pub fn sample_posts(&self) -> PathBuf {
        self.dir("sample").join("annotation_sample.jsonl")
    }

    pub fn model(&self) -> PathBuf {
        self.dir("train").join("model.json")
    }

    pub fn vocabulary(&self) -> PathBuf {
        self.dir("train").join("vocabulary.tsv")
    }

    pub fn train_report(&self) -> PathBuf {
        self.dir("train").join("report.tsv")
    }

    pub fn flags(&self) -> PathBuf {
        self.dir("classify").join("flags.csv")
    }

    pub fn outliers(&self) -> PathBuf {
        self.dir("deterrence").join("outliers.tsv")
    }

    pub fn pooled_fit(&self) -> PathBuf {
        self.dir("deterrence").join("pooled_fit.tsv")
    }
}

pub fn require_file(path: &Path) -> CliResult<&Path> {
    if !path.is_file() {
        return Err(CliError::missing(path));
    }
    Ok(path)
}

pub fn tokenize_options(config: &RunConfig) -> TokenizeOptions {
    TokenizeOptions {
        fold_accents: config.fold_accents,
    }
}

/// Load the ingested (validated, deduplicated, window-restricted) corpus.
pub fn load_ingested_posts(config: &RunConfig, manifest: &mut Manifest) -> CliResult<Vec<Post>> {
    let path = Artifacts::new(config).ingest_posts();
    require_file(&path)?;
    manifest.record_input(&path)?;
    let loaded = load_posts(&path).map_err(|e| CliError::Data(e.to_string()))?;
    if !loaded.rejects.is_empty() {
        return Err(CliError::Data(format!(
            "{} malformed rows in {} (first at line {})",
            loaded.rejects.len(),
            path.display(),
            loaded.rejects[0].line
        )));
    }
    Ok(loaded.collection.posts)
}

pub fn load_ingested_roster(
    config: &RunConfig,
    manifest: &mut Manifest,
) -> CliResult<TargetRoster> {
    let path = Artifacts::new(config).ingest_roster();
    require_file(&path)?;
    manifest.record_input(&path)?;
    abuselens::corpus::load_roster(&path).map_err(|e| CliError::Data(e.to_string()))
}

/// Read flags.csv and align it with the given post order.
pub fn load_flags(
    config: &RunConfig,
    posts: &[Post],
    manifest: &mut Manifest,
) -> CliResult<Vec<bool>> {
    let path = Artifacts::new(config).flags();
    require_file(&path)?;
    manifest.record_input(&path)?;
    let mut by_id: BTreeMap<String, bool> = BTreeMap::new();
    let mut reader = csv::Reader::from_path(&path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let id = record.get(0).unwrap_or("").to_string();
        let flag = match record.get(1).map(str::trim) {
            Some("0") => false,
            Some("1") => true,
            other => {
                return Err(CliError::Data(format!(
                    "{} row {}: flag must be 0 or 1, got {:?}",
                    path.display(),
                    i + 2,
                    other
                )))
            }
        };
        by_id.insert(id, flag);
    }
    posts
        .iter()
        .map(|p| {
            by_id.get(&p.id).copied().ok_or_else(|| {
                CliError::Data(format!("{} lacks a flag for post {}", path.display(), p.id))
            })
        })
        .collect()
}

/// Gold label per post (first label wins on double-coded posts), with texts
/// aligned from the ingested corpus.
pub fn labeled_texts(
    config: &RunConfig,
    posts: &[Post],
    manifest: &mut Manifest,
) -> CliResult<(Vec<String>, Vec<String>, Vec<u8>)> {
    let labels_path = config
        .labels
        .as_ref()
        .ok_or_else(|| CliError::Config("labels path is required (set labels=...)".into()))?;
    require_file(labels_path)?;
    manifest.record_input(labels_path)?;
    let labels =
        abuselens::corpus::load_labels(labels_path).map_err(|e| CliError::Data(e.to_string()))?;
    let text_by_id: BTreeMap<&str, &str> = posts
        .iter()
        .map(|p| (p.id.as_str(), p.text.as_str()))
        .collect();
    let mut seen = BTreeMap::new();
    for l in &labels {
        seen.entry(l.post_id.as_str()).or_insert(l.label);
    }
    let mut ids = Vec::new();
    let mut texts = Vec::new();
    let mut y = Vec::new();
    let mut unresolved = 0usize;
    for (id, label) in seen {
        match text_by_id.get(id) {
            Some(text) => {
                ids.push(id.to_string());
                texts.push((*text).to_string());
                y.push(label);
            }
            None => unresolved += 1,
        }
    }
    if unresolved > 0 {
        return Err(CliError::Data(format!(
            "{unresolved} labeled post ids do not resolve to ingested posts"
        )));
    }
    if ids.is_empty() {
        return Err(CliError::Data("no usable labeled examples".into()));
    }
    Ok((ids, texts, y))
}

/// Per-target mention and flagged-mention counts over mention posts.
pub fn mention_counts(
    posts: &[Post],
    flags: &[bool],
    roster: &TargetRoster,
) -> (BTreeMap<String, u64>, BTreeMap<String, u64>) {
    let mut mentions: BTreeMap<String, u64> =
        roster.handles().map(|h| (h.to_string(), 0)).collect();
    let mut miso = mentions.clone();
    for (post, &flagged) in posts.iter().zip(flags) {
        if post.is_own {
            continue;
        }
        for m in &post.mentions {
            if let Some(c) = mentions.get_mut(m) {
                *c += 1;
                if flagged {
                    *miso.get_mut(m).expect("same keys") += 1;
                }
            }
        }
    }
    (mentions, miso)
}

pub fn posts_to_jsonl(posts: &[Post]) -> CliResult<Vec<u8>> {
    let mut out = Vec::new();
    for p in posts {
        let line =
            serde_json::to_string(p).map_err(|e| CliError::Data(format!("serialize post: {e}")))?;
        out.extend_from_slice(line.as_bytes());
        out.push(b'\n');
    }
    Ok(out)
}
