//! `heterogeneity`: encode the roster into the covariate matrix and fit the
//! Poisson GLM on per-target misogynistic mention counts.

use abuselens::heterogeneity::{
    build_design_matrix, fit_poisson_glm, format_regression_table, misogyny_ratio,
};

use super::{load_flags, load_ingested_posts, load_ingested_roster, mention_counts, Artifacts};
use crate::config::RunConfig;
use crate::errors::{CliError, CliResult};
use crate::manifest::Manifest;

const TOP_CATEGORIES: usize = 10;

pub fn run(config: &RunConfig) -> CliResult<()> {
    let mut manifest = Manifest::new("heterogeneity", config);
    let posts = load_ingested_posts(config, &mut manifest)?;
    let roster = load_ingested_roster(config, &mut manifest)?;
    let flags = load_flags(config, &posts, &mut manifest)?;

    let (mentions, miso) = mention_counts(&posts, &flags, &roster);
    let (design, y) = build_design_matrix(&roster, &mentions, &miso, TOP_CATEGORIES)
        .map_err(|e| CliError::Data(e.to_string()))?;
    let result = fit_poisson_glm(&design, &y).map_err(|e| CliError::Data(e.to_string()))?;
    if !result.converged {
        eprintln!(
            "warning: GLM stopped after {} iterations with score max-norm {:.3e}",
            result.iterations, result.score_max_norm
        );
    }

    let mut table = format_regression_table(&result, design.n_rows());
    for (block, reference) in &design.references {
        table.push_str(&format!("# reference {block}: {reference}\n"));
    }

    let mut counts = String::from("target\tmentions\tmisogynistic\tratio\n");
    for t in roster.handles() {
        let m = mentions[t];
        let k = miso[t];
        let ratio = if m > 0 {
            format!(
                "{:.6}",
                misogyny_ratio(k, m).map_err(|e| CliError::Data(e.to_string()))?
            )
        } else {
            String::new()
        };
        counts.push_str(&format!("{t}\t{m}\t{k}\t{ratio}\n"));
    }

    let artifacts = Artifacts::new(config);
    let dir = artifacts.dir("heterogeneity");
    manifest.write_output(&dir.join("regression.tsv"), table.as_bytes())?;
    manifest.write_output(&dir.join("counts.tsv"), counts.as_bytes())?;
    manifest.finish(&dir)?;
    print!("{table}");
    Ok(())
}
