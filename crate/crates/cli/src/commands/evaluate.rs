//! `evaluate`: re-score the saved model on the stratified test split. Run
//! with the same seed as `train` to reproduce the training-time split.

use std::fs;
use std::io::BufReader;

use abuselens::classifiers::{evaluate, stratified_split, TrainedModel};
use abuselens::seeding;
use abuselens::textprep::{vectorize, Vocabulary};

use super::{labeled_texts, load_ingested_posts, require_file, tokenize_options, Artifacts};
use crate::config::RunConfig;
use crate::errors::{CliError, CliResult};
use crate::manifest::Manifest;

pub fn run(config: &RunConfig) -> CliResult<()> {
    let seed = config.require_seed()?;
    let artifacts = Artifacts::new(config);
    let model_path = artifacts.model();
    let vocab_path = artifacts.vocabulary();
    require_file(&model_path)?;
    require_file(&vocab_path)?;

    let mut manifest = Manifest::new("evaluate", config);
    manifest.record_input(&model_path)?;
    manifest.record_input(&vocab_path)?;
    let model = TrainedModel::from_json(&fs::read_to_string(&model_path)?)
        .map_err(|e| CliError::Data(e.to_string()))?;
    let vocab = Vocabulary::read_tsv(BufReader::new(fs::File::open(&vocab_path)?))
        .map_err(|e| CliError::Data(e.to_string()))?;

    let posts = load_ingested_posts(config, &mut manifest)?;
    let (ids, texts, y) = labeled_texts(config, &posts, &mut manifest)?;
    let opts = tokenize_options(config);
    let x = vectorize(ids, &texts, &vocab, opts, config.binary_features)
        .map_err(|e| CliError::Data(e.to_string()))?;
    let split = stratified_split(&y, config.test_fraction, seeding::derive(seed, &[0x5811]))
        .map_err(|e| CliError::Data(e.to_string()))?;
    let x_test = x.select_rows(&split.test);
    let y_test: Vec<u8> = split.test.iter().map(|&i| y[i]).collect();
    let report = evaluate(&model, &x_test, &y_test).map_err(|e| CliError::Data(e.to_string()))?;

    let mut text = super::train::report_header();
    text.push_str(&super::train::report_row(model.spec.kind.label(), &report));
    let dir = artifacts.dir("evaluate");
    manifest.write_output(&dir.join("report.tsv"), text.as_bytes())?;
    manifest.finish(&dir)?;
    print!("{text}");
    Ok(())
}
