//! Markdown summary of a results file.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::clr::{theorem1_bound, BoundConstants};
use crate::eigensolve::CountResult;
use crate::experiments::fit::{fit_growth, FitModel};
use crate::experiments::plan::{ExperimentKind, Record, Status};

/// Shape of the `lambda` bound used for comparison: `C(alpha) = 0`,
/// `eps(alpha) = (alpha - 2) / 4`.
pub fn bound_shape(lambda: f64, alpha: f64, consts: &BoundConstants) -> Option<f64> {
    if alpha <= 2.0 {
        return None;
    }
    theorem1_bound(lambda, alpha, consts, 0.0, 0.25 * (alpha - 2.0)).ok()
}

fn key(x: f64) -> i64 {
    (x * 1e9).round() as i64
}

pub fn render_report(records: &[Record], consts: &BoundConstants) -> String {
    let mut s = String::new();
    let ok = records.iter().filter(|r| r.status == Status::Ok).count();
    let _ = writeln!(s, "# Sweep report\n\n{} records, {} ok, {} failed.\n", records.len(), ok, records.len() - ok);

    let counts: Vec<(&Record, CountResult)> = records
        .iter()
        .filter(|r| r.status == Status::Ok)
        .filter(|r| matches!(r.cell.kind, ExperimentKind::Transition | ExperimentKind::Growth))
        .filter_map(|r| Some((r, serde_json::from_value(r.result.clone()?).ok()?)))
        .collect();
    if !counts.is_empty() {
        let _ = writeln!(s, "## N(H - lambda rho) against the bound shape\n");
        let _ = writeln!(s, "| alpha | lambda | L | N | bound shape | N / shape |");
        let _ = writeln!(s, "|---|---|---|---|---|---|");
        let mut series: BTreeMap<(i64, i64), Vec<(f64, f64)>> = BTreeMap::new();
        for (r, c) in &counts {
            let (a, l, w) = (r.cell.alpha.unwrap_or(f64::NAN), r.cell.lambda.unwrap_or(f64::NAN), r.cell.half_width.unwrap_or(f64::NAN));
            let (shape, ratio) = match bound_shape(l, a, consts) {
                Some(b) => (format!("{b:.4e}"), format!("{:.3e}", c.n_negative as f64 / b)),
                None => ("n/a".into(), "n/a".into()),
            };
            let _ = writeln!(s, "| {a} | {l} | {w} | {} | {shape} | {ratio} |", c.n_negative);
            if c.n_negative > 0 {
                series.entry((key(a), key(w))).or_default().push((l, c.n_negative as f64));
            }
        }
        let mut fits = String::new();
        for ((a, w), mut pts) in series {
            pts.sort_by(|x, y| x.0.total_cmp(&y.0));
            if let Ok(f) = fit_growth(&pts, FitModel::Power) {
                let _ = writeln!(
                    fits,
                    "| {} | {} | {:.3} | {:.4} | {} |",
                    a as f64 * 1e-9,
                    w as f64 * 1e-9,
                    f.exponent,
                    f.r_squared,
                    f.window.points
                );
            }
        }
        if !fits.is_empty() {
            let _ = writeln!(s, "\n### Growth fits\n\n| alpha | L | exponent | r^2 | points |\n|---|---|---|---|---|\n{fits}");
        }
        s.push('\n');
    }

    let bos: Vec<(&Record, CountResult)> = records
        .iter()
        .filter(|r| r.status == Status::Ok && r.cell.kind == ExperimentKind::Bosonic)
        .filter_map(|r| Some((r, serde_json::from_value(r.result.clone()?).ok()?)))
        .collect();
    if !bos.is_empty() {
        let _ = writeln!(s, "## N(H_B - lambda)\n\n| lambda | L | N |\n|---|---|---|");
        for (r, c) in &bos {
            let _ = writeln!(s, "| {} | {} | {} |", c.shift, r.cell.half_width.unwrap_or(f64::NAN), c.n_negative);
        }
        s.push('\n');
    }

    let mut other: BTreeMap<String, usize> = BTreeMap::new();
    for r in records.iter().filter(|r| {
        r.status == Status::Ok
            && matches!(r.cell.kind, ExperimentKind::Weyl | ExperimentKind::Fiber | ExperimentKind::Clr)
    }) {
        *other.entry(format!("{:?}", r.cell.kind).to_lowercase()).or_default() += 1;
    }
    for (k, n) in other {
        let _ = writeln!(s, "- {k}: {n} records (see the CSV outputs)");
    }

    let failures: Vec<&Record> = records.iter().filter(|r| r.status == Status::Failed).collect();
    if !failures.is_empty() {
        let _ = writeln!(s, "\n## Failures\n");
        for r in failures {
            let _ = writeln!(
                s,
                "- {} `{}`: {}",
                serde_json::to_string(&r.cell).unwrap_or_default(),
                &r.hash[..12],
                r.error.as_deref().unwrap_or("")
            );
        }
    }
    s
}
