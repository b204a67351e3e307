//! `deterrence`: weekly aggregation, target selection, outlier detection,
//! per-target standardization, the pooled silencing regression, and the
//! cluster-count stability sweep.

use abuselens::deterrence::{
    build_lag_pairs, detect_outliers, fit_deterrence, inlier_stability, per_target_slopes,
    pool_points, select_targets, weekly_aggregate, LagPoint, SelectionOutcome, Standardizer,
};

use super::{load_flags, load_ingested_posts, load_ingested_roster, Artifacts};
use crate::config::RunConfig;
use crate::errors::{CliError, CliResult};
use crate::manifest::Manifest;

pub fn run(config: &RunConfig) -> CliResult<()> {
    let mut manifest = Manifest::new("deterrence", config);
    let posts = load_ingested_posts(config, &mut manifest)?;
    let roster = load_ingested_roster(config, &mut manifest)?;
    let flags = load_flags(config, &posts, &mut manifest)?;
    let window = config.window()?;

    let series = weekly_aggregate(&posts, &flags, &roster, &window, config.week_rule)
        .map_err(|e| CliError::Data(e.to_string()))?;
    let total_pairs: usize = series
        .iter()
        .map(|s| s.n_weeks().saturating_sub(1))
        .sum();
    let selected = select_targets(&series, config.min_weekly_miso, config.selection_mode);
    let selected_pairs: usize = selected
        .iter()
        .map(|s| s.n_weeks().saturating_sub(1))
        .sum();

    let mut outliers_tsv =
        String::from("target\tweek\tx_raw\ty_raw\tx_std\ty_std\toutlier\n");
    let mut pooled_outliers: Vec<LagPoint> = Vec::new();
    let mut per_target_std_outliers: Vec<(String, Vec<LagPoint>)> = Vec::new();
    let mut skipped: Vec<(String, String)> = Vec::new();
    let mut fallback_targets = 0usize;
    let mut outlier_pairs = 0usize;
    let mut stability_sums: std::collections::BTreeMap<usize, (f64, usize)> =
        std::collections::BTreeMap::new();

    for s in &selected {
        let points = build_lag_pairs(s).map_err(|e| CliError::Data(e.to_string()))?;
        let partition = match detect_outliers(&points, config.cluster_k) {
            Ok(p) => p,
            Err(e) => {
                skipped.push((s.target.clone(), e.to_string()));
                continue;
            }
        };
        if partition.outcome == SelectionOutcome::FallbackCentroidSum {
            fallback_targets += 1;
        }
        let standardizer = match Standardizer::fit(&points) {
            Ok(st) => st,
            Err(e) => {
                skipped.push((s.target.clone(), e.to_string()));
                continue;
            }
        };
        for (k, overlap) in inlier_stability(&points, config.cluster_k, 2..=6) {
            let e = stability_sums.entry(k).or_insert((0.0, 0));
            e.0 += overlap;
            e.1 += 1;
        }
        let std_inliers = standardizer.apply(&partition.inliers);
        let std_outliers = standardizer.apply(&partition.outliers);
        outlier_pairs += partition.outliers.len();
        let mut rows: Vec<(usize, String)> = Vec::with_capacity(points.len());
        for (is_outlier, raw, std) in partition
            .inliers
            .iter()
            .zip(&std_inliers)
            .map(|(r, s)| (0u8, r, s))
            .chain(
                partition
                    .outliers
                    .iter()
                    .zip(&std_outliers)
                    .map(|(r, s)| (1u8, r, s)),
            )
        {
            rows.push((
                raw.week_index,
                format!(
                    "{}\t{}\t{}\t{}\t{:.9}\t{:.9}\t{}\n",
                    raw.target, raw.week_index, raw.x, raw.y, std.x, std.y, is_outlier
                ),
            ));
        }
        rows.sort_by_key(|(week, _)| *week);
        for (_, line) in rows {
            outliers_tsv.push_str(&line);
        }
        pooled_outliers.extend(std_outliers.clone());
        per_target_std_outliers.push((s.target.clone(), std_outliers));
    }

    let pooled = pool_points(pooled_outliers);
    let pooled_fit = fit_deterrence(&pooled).map_err(|e| {
        CliError::Data(format!(
            "pooled outlier regression failed over {} points: {e}",
            pooled.len()
        ))
    })?;
    let slopes = per_target_slopes(&per_target_std_outliers);

    let mut pooled_tsv = String::from(
        "beta0\tbeta1\tse_beta1\tci95_low\tci95_high\tr2\tn_points\tn_targets\n",
    );
    pooled_tsv.push_str(&format!(
        "{:.9}\t{:.9}\t{:.9}\t{:.9}\t{:.9}\t{:.9}\t{}\t{}\n",
        pooled_fit.beta0,
        pooled_fit.beta1,
        pooled_fit.se_beta1,
        pooled_fit.ci95_beta1.0,
        pooled_fit.ci95_beta1.1,
        pooled_fit.r2,
        pooled_fit.n_points,
        per_target_std_outliers.len()
    ));

    let mut slopes_tsv = String::from("target\tn_points\tslope\tse\texcluded\n");
    for row in &slopes.per_target {
        match (&row.fit, &row.excluded) {
            (Some(fit), _) => slopes_tsv.push_str(&format!(
                "{}\t{}\t{:.9}\t{:.9}\t\n",
                row.target, row.n_points, fit.beta1, fit.se_beta1
            )),
            (None, Some(reason)) => slopes_tsv.push_str(&format!(
                "{}\t{}\t\t\t{}\n",
                row.target, row.n_points, reason
            )),
            (None, None) => unreachable!("unfitted rows carry a reason"),
        }
    }
    slopes_tsv.push_str(&format!(
        "# negative slope fraction\t{:.6} over {} fitted targets ({} excluded)\n",
        slopes.negative_fraction, slopes.fitted, slopes.excluded
    ));

    let mut stability_tsv = String::from("k\tmean_inlier_jaccard_vs_default\ttargets\n");
    for (k, (sum, count)) in &stability_sums {
        stability_tsv.push_str(&format!(
            "{k}\t{:.6}\t{count}\n",
            sum / (*count).max(1) as f64
        ));
    }

    let mut summary = String::new();
    summary.push_str(&format!("targets\t{}\n", series.len()));
    summary.push_str(&format!("candidate-week pairs\t{total_pairs}\n"));
    summary.push_str(&format!(
        "selected targets\t{} ({} pairs)\n",
        selected.len(),
        selected_pairs
    ));
    summary.push_str(&format!(
        "outlier pairs\t{outlier_pairs} ({:.4} of selected pairs)\n",
        outlier_pairs as f64 / selected_pairs.max(1) as f64
    ));
    summary.push_str(&format!(
        "mean outliers per target\t{:.4}\n",
        outlier_pairs as f64 / selected.len().max(1) as f64
    ));
    summary.push_str(&format!(
        "fallback inlier selections\t{fallback_targets}\n"
    ));
    for (target, reason) in &skipped {
        summary.push_str(&format!("skipped\t{target}\t{reason}\n"));
    }
    summary.push_str(&format!(
        "pooled slope\t{:.6} (se {:.6}, r2 {:.6})\n",
        pooled_fit.beta1, pooled_fit.se_beta1, pooled_fit.r2
    ));
    summary.push_str(&format!(
        "negative slope fraction\t{:.6}\n",
        slopes.negative_fraction
    ));

    let artifacts = Artifacts::new(config);
    let dir = artifacts.dir("deterrence");
    manifest.write_output(&artifacts.outliers(), outliers_tsv.as_bytes())?;
    manifest.write_output(&artifacts.pooled_fit(), pooled_tsv.as_bytes())?;
    manifest.write_output(&dir.join("slopes.tsv"), slopes_tsv.as_bytes())?;
    manifest.write_output(&dir.join("stability.tsv"), stability_tsv.as_bytes())?;
    manifest.write_output(&dir.join("summary.txt"), summary.as_bytes())?;
    manifest.finish(&dir)?;
    print!("{summary}");
    Ok(())
}
