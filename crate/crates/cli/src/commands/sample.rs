//! `sample`: draw the stratified, target-capped annotation subsample.

use abuselens::corpus::{sample_for_annotation, CorpusError, PostCollection};
use chrono::Datelike;

use super::{load_ingested_posts, posts_to_jsonl, Artifacts};
use crate::config::RunConfig;
use crate::errors::{CliError, CliResult};
use crate::manifest::Manifest;

pub fn run(config: &RunConfig) -> CliResult<()> {
    let seed = config.require_seed()?;
    let mut manifest = Manifest::new("sample", config);
    let posts = load_ingested_posts(config, &mut manifest)?;
    let collection = PostCollection { posts };
    let sample = sample_for_annotation(
        &collection,
        config.sample_n,
        config.sample_min_chars,
        config.sample_cap_factor,
        seed,
    )
    .map_err(|e| match e {
        CorpusError::NotEnoughEligible { .. } => CliError::Data(e.to_string()),
        other => CliError::Data(other.to_string()),
    })?;

    let artifacts = Artifacts::new(config);
    let dir = artifacts.dir("sample");
    manifest.write_output(&artifacts.sample_posts(), &posts_to_jsonl(&sample.posts)?)?;

    let mut by_month = std::collections::BTreeMap::new();
    for p in &sample.posts {
        *by_month
            .entry((p.timestamp.year(), p.timestamp.month()))
            .or_insert(0usize) += 1;
    }
    let mut summary = format!("sampled\t{}\n", sample.len());
    for ((year, month), count) in by_month {
        summary.push_str(&format!("{year}-{month:02}\t{count}\n"));
    }
    manifest.write_output(&dir.join("summary.txt"), summary.as_bytes())?;
    manifest.finish(&dir)?;
    println!("sample: {} posts drawn with seed {seed}", sample.len());
    Ok(())
}
