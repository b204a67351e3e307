//! Figure payloads and the SVG renderer behind the `report` subcommand.
//! Output is plain hand-assembled SVG, formatted deterministically.

use std::path::PathBuf;

use crate::errors::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureKind {
    MonthlySeries,
    ScatterFit,
    BoxplotRatio,
    HistogramMentions,
}

/// Five-number summary for one box.
#[derive(Debug, Clone, Copy)]
pub struct BoxStats {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Quartiles by linear interpolation; requires a non-empty sorted slice.
pub fn box_stats(sorted: &[f64]) -> Option<BoxStats> {
    if sorted.is_empty() {
        return None;
    }
    let q = |p: f64| -> f64 {
        let pos = p * (sorted.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        if lo == hi {
            sorted[lo]
        } else {
            sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
        }
    };
    Some(BoxStats {
        min: sorted[0],
        q1: q(0.25),
        median: q(0.5),
        q3: q(0.75),
        max: sorted[sorted.len() - 1],
    })
}

#[derive(Debug, Clone)]
pub enum FigurePayload {
    MonthlySeries {
        /// `YYYY-MM` labels, one per month.
        months: Vec<String>,
        mention_counts: Vec<u64>,
        own_counts: Vec<u64>,
        /// Misogynistic share of mentions; `None` for months without
        /// mentions (plotted as a gap, not zero).
        shares: Vec<Option<f64>>,
    },
    ScatterFit {
        inliers: Vec<(f64, f64)>,
        outliers: Vec<(f64, f64)>,
        /// (intercept, slope) of the fitted line over the outliers.
        fit: Option<(f64, f64)>,
    },
    BoxplotRatio {
        groups: Vec<(String, BoxStats)>,
    },
    HistogramMentions {
        /// `counts.len() + 1` edges.
        bin_edges: Vec<f64>,
        counts: Vec<u64>,
    },
}

#[derive(Debug, Clone)]
pub struct FigureSpec {
    pub kind: FigureKind,
    pub payload: FigurePayload,
    pub output: PathBuf,
}

impl FigureSpec {
    /// Payload dimensions must be consistent with the kind.
    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Data(m));
        match (&self.kind, &self.payload) {
            (
                FigureKind::MonthlySeries,
                FigurePayload::MonthlySeries {
                    months,
                    mention_counts,
                    own_counts,
                    shares,
                },
            ) => {
                if months.is_empty()
                    || months.len() != mention_counts.len()
                    || months.len() != own_counts.len()
                    || months.len() != shares.len()
                {
                    return bad(format!(
                        "monthly series arrays disagree: {} months, {} mentions, {} own, {} shares",
                        months.len(),
                        mention_counts.len(),
                        own_counts.len(),
                        shares.len()
                    ));
                }
                Ok(())
            }
            (FigureKind::ScatterFit, FigurePayload::ScatterFit { .. }) => Ok(()),
            (FigureKind::BoxplotRatio, FigurePayload::BoxplotRatio { groups }) => {
                if groups.is_empty() {
                    return bad("boxplot needs at least one group".into());
                }
                Ok(())
            }
            (
                FigureKind::HistogramMentions,
                FigurePayload::HistogramMentions { bin_edges, counts },
            ) => {
                if counts.is_empty() || bin_edges.len() != counts.len() + 1 {
                    return bad(format!(
                        "histogram needs counts+1 edges, got {} edges for {} counts",
                        bin_edges.len(),
                        counts.len()
                    ));
                }
                Ok(())
            }
            (kind, _) => bad(format!("payload does not match figure kind {kind:?}")),
        }
    }
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 32.0;
const MARGIN_BOTTOM: f64 = 48.0;

/// Linear data-to-pixel mapping for one axis.
#[derive(Debug, Clone, Copy)]
pub struct LinearScale {
    pub domain: (f64, f64),
    pub range: (f64, f64),
}

impl LinearScale {
    pub fn new(domain: (f64, f64), range: (f64, f64)) -> LinearScale {
        let domain = if domain.0 == domain.1 {
            (domain.0 - 1.0, domain.1 + 1.0)
        } else {
            domain
        };
        LinearScale { domain, range }
    }

    pub fn map(&self, v: f64) -> f64 {
        let t = (v - self.domain.0) / (self.domain.1 - self.domain.0);
        self.range.0 + t * (self.range.1 - self.range.0)
    }
}

fn fmt(v: f64) -> String {
    format!("{v:.2}")
}

fn svg_open(out: &mut String, title: &str, deterministic: bool) {
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    if !deterministic {
        out.push_str(&format!(
            "<!-- rendered {} -->\n",
            chrono::Utc::now().to_rfc3339()
        ));
    }
    out.push_str(&format!(
        "<text x=\"{}\" y=\"20\" font-size=\"14\" text-anchor=\"middle\">{}</text>\n",
        WIDTH / 2.0,
        title
    ));
}

fn axes(out: &mut String, x: &LinearScale, y: &LinearScale, x_label: &str, y_label: &str) {
    let x0 = x.range.0;
    let x1 = x.range.1;
    let y0 = y.range.0;
    let y1 = y.range.1;
    out.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        fmt(x0),
        fmt(y0),
        fmt(x1),
        fmt(y0)
    ));
    out.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        fmt(x0),
        fmt(y0),
        fmt(x0),
        fmt(y1)
    ));
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let vx = x.domain.0 + t * (x.domain.1 - x.domain.0);
        let vy = y.domain.0 + t * (y.domain.1 - y.domain.0);
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"middle\">{}</text>\n",
            fmt(x.map(vx)),
            fmt(y0 + 16.0),
            fmt(vx)
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"end\">{}</text>\n",
            fmt(x0 - 6.0),
            fmt(y.map(vy) + 3.0),
            fmt(vy)
        ));
    }
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
        fmt((x0 + x1) / 2.0),
        fmt(HEIGHT - 8.0),
        x_label
    ));
    out.push_str(&format!(
        "<text x=\"14\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 {})\">{}</text>\n",
        fmt((y0 + y1) / 2.0),
        fmt((y0 + y1) / 2.0),
        y_label
    ));
}

fn plot_area() -> ((f64, f64), (f64, f64)) {
    (
        (MARGIN_LEFT, WIDTH - MARGIN_RIGHT),
        (HEIGHT - MARGIN_BOTTOM, MARGIN_TOP),
    )
}

/// Render a validated spec to SVG text.
pub fn render_svg(spec: &FigureSpec, deterministic: bool) -> CliResult<String> {
    spec.validate()?;
    let mut out = String::new();
    match &spec.payload {
        FigurePayload::MonthlySeries {
            months,
            mention_counts,
            own_counts,
            shares,
        } => {
            svg_open(&mut out, "Mentions, own posts and misogynistic share by month", deterministic);
            let (xr, yr) = plot_area();
            let max_count = mention_counts
                .iter()
                .chain(own_counts)
                .copied()
                .max()
                .unwrap_or(1)
                .max(1) as f64;
            let x = LinearScale::new((0.0, (months.len() - 1).max(1) as f64), xr);
            let y = LinearScale::new((0.0, max_count), yr);
            axes(&mut out, &x, &y, "month", "posts");
            for (series, color) in [(mention_counts, "steelblue"), (own_counts, "darkorange")] {
                let pts: Vec<String> = series
                    .iter()
                    .enumerate()
                    .map(|(i, &c)| format!("{},{}", fmt(x.map(i as f64)), fmt(y.map(c as f64))))
                    .collect();
                out.push_str(&format!(
                    "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
                    color,
                    pts.join(" ")
                ));
            }
            // share on a secondary 0..max scale, drawn with gaps where absent
            let max_share = shares.iter().flatten().fold(0.01f64, |m, &s| m.max(s));
            let ys = LinearScale::new((0.0, max_share), yr);
            let mut segment: Vec<String> = Vec::new();
            for (i, share) in shares.iter().enumerate() {
                match share {
                    Some(s) => segment.push(format!(
                        "{},{}",
                        fmt(x.map(i as f64)),
                        fmt(ys.map(*s))
                    )),
                    None => {
                        if segment.len() > 1 {
                            out.push_str(&format!(
                                "<polyline fill=\"none\" stroke=\"crimson\" stroke-dasharray=\"4 2\" points=\"{}\"/>\n",
                                segment.join(" ")
                            ));
                        }
                        segment.clear();
                    }
                }
            }
            if segment.len() > 1 {
                out.push_str(&format!(
                    "<polyline fill=\"none\" stroke=\"crimson\" stroke-dasharray=\"4 2\" points=\"{}\"/>\n",
                    segment.join(" ")
                ));
            }
            for (i, m) in months.iter().enumerate() {
                out.push_str(&format!(
                    "<text x=\"{}\" y=\"{}\" font-size=\"9\" text-anchor=\"middle\">{}</text>\n",
                    fmt(x.map(i as f64)),
                    fmt(yr.0 + 28.0),
                    m
                ));
            }
        }
        FigurePayload::ScatterFit {
            inliers,
            outliers,
            fit,
        } => {
            svg_open(&mut out, "Lag pairs: previous-week mentions vs own posts", deterministic);
            let (xr, yr) = plot_area();
            let all: Vec<(f64, f64)> = inliers.iter().chain(outliers).copied().collect();
            let (mut min_x, mut max_x, mut min_y, mut max_y) = (0.0f64, 1.0f64, 0.0f64, 1.0f64);
            if !all.is_empty() {
                min_x = all.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
                max_x = all.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
                min_y = all.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
                max_y = all.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
            }
            let x = LinearScale::new((min_x, max_x), xr);
            let y = LinearScale::new((min_y, max_y), yr);
            axes(&mut out, &x, &y, "misogynistic mentions (week t-1)", "own posts (week t)");
            for (points, color, label) in
                [(inliers, "darkorange", "inlier"), (outliers, "steelblue", "outlier")]
            {
                for &(px, py) in points {
                    out.push_str(&format!(
                        "<circle cx=\"{}\" cy=\"{}\" r=\"2.5\" fill=\"{}\" fill-opacity=\"0.7\" class=\"{}\"/>\n",
                        fmt(x.map(px)),
                        fmt(y.map(py)),
                        color,
                        label
                    ));
                }
                // dotted guides through the group means
                if !points.is_empty() {
                    let n = points.len() as f64;
                    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
                    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
                    out.push_str(&format!(
                        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"green\" stroke-dasharray=\"2 3\"/>\n",
                        fmt(x.map(mx)),
                        fmt(yr.0),
                        fmt(x.map(mx)),
                        fmt(yr.1)
                    ));
                    out.push_str(&format!(
                        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"green\" stroke-dasharray=\"2 3\"/>\n",
                        fmt(xr.0),
                        fmt(y.map(my)),
                        fmt(xr.1),
                        fmt(y.map(my))
                    ));
                }
            }
            if let Some((intercept, slope)) = fit {
                let y_at = |vx: f64| intercept + slope * vx;
                out.push_str(&format!(
                    "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\" stroke-width=\"1.5\" class=\"fit\"/>\n",
                    fmt(x.map(x.domain.0)),
                    fmt(y.map(y_at(x.domain.0))),
                    fmt(x.map(x.domain.1)),
                    fmt(y.map(y_at(x.domain.1)))
                ));
            }
        }
        FigurePayload::BoxplotRatio { groups } => {
            svg_open(&mut out, "Misogyny ratio by group", deterministic);
            let (xr, yr) = plot_area();
            let max_v = groups
                .iter()
                .map(|(_, b)| b.max)
                .fold(0.01f64, f64::max);
            let x = LinearScale::new((0.0, groups.len() as f64), xr);
            let y = LinearScale::new((0.0, max_v), yr);
            axes(&mut out, &x, &y, "group", "ratio");
            for (i, (label, b)) in groups.iter().enumerate() {
                let cx = i as f64 + 0.5;
                let half = 0.3;
                out.push_str(&format!(
                    "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n",
                    fmt(x.map(cx)),
                    fmt(y.map(b.min)),
                    fmt(y.map(b.max))
                ));
                out.push_str(&format!(
                    "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"lightsteelblue\" stroke=\"black\"/>\n",
                    fmt(x.map(cx - half)),
                    fmt(y.map(b.q3)),
                    fmt(x.map(cx + half) - x.map(cx - half)),
                    fmt(y.map(b.q1) - y.map(b.q3))
                ));
                out.push_str(&format!(
                    "<line x1=\"{}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\" stroke-width=\"1.5\"/>\n",
                    fmt(x.map(cx - half)),
                    fmt(y.map(b.median)),
                    fmt(x.map(cx + half))
                ));
                out.push_str(&format!(
                    "<text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"middle\">{}</text>\n",
                    fmt(x.map(cx)),
                    fmt(yr.0 + 28.0),
                    label
                ));
            }
        }
        FigurePayload::HistogramMentions { bin_edges, counts } => {
            svg_open(&mut out, "Misogynistic mentions per target", deterministic);
            let (xr, yr) = plot_area();
            let x = LinearScale::new((bin_edges[0], *bin_edges.last().expect("non-empty")), xr);
            let y = LinearScale::new((0.0, *counts.iter().max().unwrap_or(&1) as f64), yr);
            axes(&mut out, &x, &y, "misogynistic mentions", "targets");
            for (i, &c) in counts.iter().enumerate() {
                let x0 = x.map(bin_edges[i]);
                let x1 = x.map(bin_edges[i + 1]);
                out.push_str(&format!(
                    "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"steelblue\" stroke=\"white\"/>\n",
                    fmt(x0),
                    fmt(y.map(c as f64)),
                    fmt(x1 - x0),
                    fmt(yr.0 - y.map(c as f64))
                ));
            }
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_catches_dimension_mismatch() {
        let spec = FigureSpec {
            kind: FigureKind::MonthlySeries,
            payload: FigurePayload::MonthlySeries {
                months: vec!["2022-01".into()],
                mention_counts: vec![1, 2],
                own_counts: vec![1],
                shares: vec![Some(0.1)],
            },
            output: PathBuf::from("x.svg"),
        };
        assert!(spec.validate().is_err());

        let mismatch = FigureSpec {
            kind: FigureKind::ScatterFit,
            payload: FigurePayload::HistogramMentions {
                bin_edges: vec![0.0, 1.0],
                counts: vec![1],
            },
            output: PathBuf::from("x.svg"),
        };
        assert!(mismatch.validate().is_err());
    }

    #[test]
    fn collinear_points_land_on_the_rendered_line() {
        // y = 2x + 1 through three points; the circles and the fit line share
        // one affine transform, so pixel coordinates must be collinear too.
        let pts = vec![(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)];
        let spec = FigureSpec {
            kind: FigureKind::ScatterFit,
            payload: FigurePayload::ScatterFit {
                inliers: vec![],
                outliers: pts.clone(),
                fit: Some((1.0, 2.0)),
            },
            output: PathBuf::from("x.svg"),
        };
        let svg = render_svg(&spec, true).unwrap();
        let grab = |attr: &str, chunk: &str| -> f64 {
            let key = format!("{attr}=\"");
            let start = chunk.find(&key).unwrap() + key.len();
            let end = chunk[start..].find('"').unwrap();
            chunk[start..start + end].parse().unwrap()
        };
        let line_chunk = svg
            .lines()
            .find(|l| l.contains("class=\"fit\""))
            .expect("fit line present");
        let (x1, y1) = (grab("x1", line_chunk), grab("y1", line_chunk));
        let (x2, y2) = (grab("x2", line_chunk), grab("y2", line_chunk));
        let slope = (y2 - y1) / (x2 - x1);
        for chunk in svg.lines().filter(|l| l.contains("<circle")) {
            let (cx, cy) = (grab("cx", chunk), grab("cy", chunk));
            let expected = y1 + slope * (cx - x1);
            assert!(
                (cy - expected).abs() <= 0.011,
                "circle at ({cx},{cy}) off rendered line (expected y {expected})"
            );
        }
    }

    #[test]
    fn empty_outlier_set_omits_fit_layer() {
        let spec = FigureSpec {
            kind: FigureKind::ScatterFit,
            payload: FigurePayload::ScatterFit {
                inliers: vec![(0.0, 0.0), (1.0, 1.0)],
                outliers: vec![],
                fit: None,
            },
            output: PathBuf::from("x.svg"),
        };
        let svg = render_svg(&spec, true).unwrap();
        assert!(!svg.contains("class=\"fit\""));
    }

    #[test]
    fn deterministic_mode_suppresses_timestamp() {
        let spec = FigureSpec {
            kind: FigureKind::HistogramMentions,
            payload: FigurePayload::HistogramMentions {
                bin_edges: vec![0.0, 1.0, 2.0],
                counts: vec![3, 4],
            },
            output: PathBuf::from("x.svg"),
        };
        let a = render_svg(&spec, true).unwrap();
        let b = render_svg(&spec, true).unwrap();
        assert_eq!(a, b);
        assert!(!a.contains("rendered"));
        let stamped = render_svg(&spec, false).unwrap();
        assert!(stamped.contains("rendered"));
    }

    #[test]
    fn quartiles_by_interpolation() {
        let b = box_stats(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(b.min, 1.0);
        assert_eq!(b.max, 4.0);
        assert!((b.median - 2.5).abs() < 1e-12);
        assert!((b.q1 - 1.75).abs() < 1e-12);
        assert!((b.q3 - 3.25).abs() < 1e-12);
        assert!(box_stats(&[]).is_none());
    }
}
