//! `ingest`: validate, deduplicate, window-restrict the raw corpus and
//! mention-filter the roster.

use abuselens::corpus::{filter_targets, load_posts, load_roster, write_roster};

use super::{posts_to_jsonl, require_file, Artifacts};
use crate::config::RunConfig;
use crate::errors::{CliError, CliResult};
use crate::manifest::Manifest;

pub fn run(config: &RunConfig) -> CliResult<()> {
    let posts_path = config
        .posts
        .as_ref()
        .ok_or_else(|| CliError::Config("posts path is required (set posts=...)".into()))?;
    let roster_path = config
        .roster
        .as_ref()
        .ok_or_else(|| CliError::Config("roster path is required (set roster=...)".into()))?;
    require_file(posts_path)?;
    require_file(roster_path)?;

    let mut manifest = Manifest::new("ingest", config);
    manifest.record_input(posts_path)?;
    manifest.record_input(roster_path)?;

    let loaded = load_posts(posts_path).map_err(|e| CliError::Data(e.to_string()))?;
    let read_rows = loaded.collection.len() + loaded.rejects.len() + loaded.retweets_dropped;
    let before_dedup = loaded.collection.len();
    let deduped = loaded.collection.dedup();
    let after_dedup = deduped.len();
    let window = config.window()?;
    let (in_window, out_of_window) = deduped.restrict_window(&window);

    let roster = load_roster(roster_path).map_err(|e| CliError::Data(e.to_string()))?;
    let kept = filter_targets(&roster, &in_window, config.min_mentions);

    let artifacts = Artifacts::new(config);
    let dir = artifacts.dir("ingest");
    manifest.write_output(&artifacts.ingest_posts(), &posts_to_jsonl(&in_window.posts)?)?;
    let mut roster_bytes = Vec::new();
    write_roster(&kept, &mut roster_bytes).map_err(|e| CliError::Data(e.to_string()))?;
    manifest.write_output(&artifacts.ingest_roster(), &roster_bytes)?;

    let mut summary = String::new();
    summary.push_str(&format!("rows read\t{read_rows}\n"));
    summary.push_str(&format!("rejected rows\t{}\n", loaded.rejects.len()));
    for reject in loaded.rejects.iter().take(20) {
        summary.push_str(&format!("  line {}\t{}\n", reject.line, reject.reason));
    }
    summary.push_str(&format!("retweets dropped\t{}\n", loaded.retweets_dropped));
    summary.push_str(&format!(
        "duplicates removed\t{}\n",
        before_dedup - after_dedup
    ));
    summary.push_str(&format!("outside window\t{}\n", out_of_window.len()));
    summary.push_str(&format!("posts kept\t{}\n", in_window.len()));
    summary.push_str(&format!(
        "targets kept\t{} of {} (min {} mentions)\n",
        kept.len(),
        roster.len(),
        config.min_mentions
    ));
    manifest.write_output(&dir.join("summary.txt"), summary.as_bytes())?;
    manifest.finish(&dir)?;
    println!(
        "ingest: {} posts kept, {} targets kept, {} rows rejected",
        in_window.len(),
        kept.len(),
        loaded.rejects.len()
    );
    Ok(())
}
