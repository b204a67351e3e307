//! `classify`: flag every ingested post with the saved model. Own posts are
//! never scored as misogynistic mentions.

use std::fs;
use std::io::BufReader;

use abuselens::classifiers::{classify_corpus, TrainedModel};
use abuselens::heterogeneity::misogyny_ratio;
use abuselens::textprep::Vocabulary;

use super::{load_ingested_posts, require_file, tokenize_options, Artifacts};
use crate::config::RunConfig;
use crate::errors::{CliError, CliResult};
use crate::manifest::Manifest;

pub fn run(config: &RunConfig) -> CliResult<()> {
    let artifacts = Artifacts::new(config);
    let model_path = artifacts.model();
    let vocab_path = artifacts.vocabulary();
    require_file(&model_path)?;
    require_file(&vocab_path)?;

    let mut manifest = Manifest::new("classify", config);
    manifest.record_input(&model_path)?;
    manifest.record_input(&vocab_path)?;
    let model = TrainedModel::from_json(&fs::read_to_string(&model_path)?)
        .map_err(|e| CliError::Data(e.to_string()))?;
    let vocab = Vocabulary::read_tsv(BufReader::new(fs::File::open(&vocab_path)?))
        .map_err(|e| CliError::Data(e.to_string()))?;
    let posts = load_ingested_posts(config, &mut manifest)?;

    let flags = classify_corpus(
        &model,
        &posts,
        &vocab,
        tokenize_options(config),
        config.binary_features,
    )
    .map_err(|e| CliError::Data(e.to_string()))?;

    let mut csv_text = String::from("post_id,flag\n");
    for (post, &flag) in posts.iter().zip(&flags) {
        csv_text.push_str(&format!("{},{}\n", post.id, u8::from(flag)));
    }
    let dir = artifacts.dir("classify");
    manifest.write_output(&artifacts.flags(), csv_text.as_bytes())?;

    let mention_posts = posts.iter().filter(|p| !p.is_own).count();
    let flagged = flags.iter().filter(|&&f| f).count();
    let mut summary = format!(
        "posts\t{}\nmention posts\t{}\nflagged\t{}\n",
        posts.len(),
        mention_posts,
        flagged
    );
    if mention_posts > 0 {
        let prevalence = misogyny_ratio(flagged as u64, mention_posts as u64)
            .map_err(|e| CliError::Data(e.to_string()))?;
        summary.push_str(&format!("prevalence\t{prevalence:.6}\n"));
    }
    manifest.write_output(&dir.join("summary.txt"), summary.as_bytes())?;
    manifest.finish(&dir)?;
    println!("classify: {flagged} of {mention_posts} mention posts flagged");
    Ok(())
}
