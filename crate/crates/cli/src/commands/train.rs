//! `train`: build the keyness-filtered vocabulary, train all seven
//! classifier kinds on the stratified split, report their test metrics, and
//! persist the stacking model.

use abuselens::classifiers::{
    evaluate, stratified_split, train, ClassifierReport, ModelKind, ModelSpec,
};
use abuselens::seeding;
use abuselens::textprep::{build_vocabulary, keyness_filter, vectorize};

use super::{load_ingested_posts, labeled_texts, tokenize_options, Artifacts};
use crate::config::RunConfig;
use crate::errors::{CliError, CliResult};
use crate::manifest::Manifest;

/// All trained kinds, in the order they are reported.
pub const REPORTED_KINDS: [ModelKind; 7] = [
    ModelKind::Stack,
    ModelKind::LinearSvm,
    ModelKind::NbMultinomial,
    ModelKind::LogisticRegression,
    ModelKind::NbGaussian,
    ModelKind::RandomForest,
    ModelKind::Knn,
];

pub fn report_header() -> String {
    "Classifier\tTrueNegatives\tTruePositives\tFalseNegatives\tFalsePositives\tAccuracy\tF1_class0\tF1_class1\tF1_weighted\n".to_string()
}

pub fn report_row(label: &str, r: &ClassifierReport) -> String {
    format!(
        "{label}\t{}\t{}\t{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\n",
        r.true_negatives,
        r.true_positives,
        r.false_negatives,
        r.false_positives,
        r.accuracy,
        r.f1_class0,
        r.f1_class1,
        r.f1_weighted
    )
}

pub fn run(config: &RunConfig) -> CliResult<()> {
    let seed = config.require_seed()?;
    let mut manifest = Manifest::new("train", config);
    let posts = load_ingested_posts(config, &mut manifest)?;
    let (ids, texts, y) = labeled_texts(config, &posts, &mut manifest)?;

    let opts = tokenize_options(config);
    let vocab_full =
        build_vocabulary(&texts, &y, opts).map_err(|e| CliError::Data(e.to_string()))?;
    let vocab = keyness_filter(&vocab_full, config.keyness_p)
        .map_err(|e| CliError::Data(e.to_string()))?;
    if vocab.is_empty() {
        return Err(CliError::Data(
            "keyness filter removed every word; relax keyness_p".into(),
        ));
    }
    let x = vectorize(ids, &texts, &vocab, opts, config.binary_features)
        .map_err(|e| CliError::Data(e.to_string()))?;

    let split = stratified_split(&y, config.test_fraction, seeding::derive(seed, &[0x5811]))
        .map_err(|e| CliError::Data(e.to_string()))?;
    let x_train = x.select_rows(&split.train);
    let y_train: Vec<u8> = split.train.iter().map(|&i| y[i]).collect();
    let x_test = x.select_rows(&split.test);
    let y_test: Vec<u8> = split.test.iter().map(|&i| y[i]).collect();

    let mut rows: Vec<(ModelKind, ClassifierReport)> = Vec::new();
    let mut stack_model = None;
    for (ki, &kind) in REPORTED_KINDS.iter().enumerate() {
        let spec = ModelSpec {
            kind,
            seed: seeding::derive(seed, &[0x5ead, ki as u64]),
            hyper: config.hyper.clone(),
        };
        let model = train(&spec, &x_train, &y_train).map_err(|e| CliError::Data(e.to_string()))?;
        if !model.converged {
            eprintln!("warning: {} did not fully converge", kind.label());
        }
        let report = evaluate(&model, &x_test, &y_test).map_err(|e| CliError::Data(e.to_string()))?;
        rows.push((kind, report));
        if kind == ModelKind::Stack {
            stack_model = Some(model);
        }
    }
    rows.sort_by(|a, b| {
        b.1.f1_weighted
            .partial_cmp(&a.1.f1_weighted)
            .expect("metrics are finite")
            .then(a.0.label().cmp(b.0.label()))
    });

    let mut report_text = report_header();
    for (kind, r) in &rows {
        report_text.push_str(&report_row(kind.label(), r));
    }

    let artifacts = Artifacts::new(config);
    let dir = artifacts.dir("train");
    let model = stack_model.expect("stack kind is in REPORTED_KINDS");
    manifest.write_output(
        &artifacts.model(),
        model
            .to_json()
            .map_err(|e| CliError::Data(e.to_string()))?
            .as_bytes(),
    )?;
    let mut vocab_bytes = Vec::new();
    vocab
        .write_tsv(&mut vocab_bytes)
        .map_err(|e| CliError::Data(e.to_string()))?;
    manifest.write_output(&artifacts.vocabulary(), &vocab_bytes)?;
    manifest.write_output(&artifacts.train_report(), report_text.as_bytes())?;

    let summary = format!(
        "labeled examples\t{}\npositives\t{}\nvocabulary\t{} words ({} before keyness, p < {})\ntrain rows\t{}\ntest rows\t{}\ntest positives\t{}\n",
        y.len(),
        y.iter().filter(|&&l| l == 1).count(),
        vocab.len(),
        vocab_full.len(),
        config.keyness_p,
        split.train.len(),
        split.test.len(),
        y_test.iter().filter(|&&l| l == 1).count(),
    );
    manifest.write_output(&dir.join("summary.txt"), summary.as_bytes())?;
    manifest.finish(&dir)?;
    print!("{report_text}");
    Ok(())
}
