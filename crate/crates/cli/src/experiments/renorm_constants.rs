//! ε-sweep of the renormalisation constants.

use rayon::prelude::*;
use symlab_core::noise::{renorm_constants, Mollifier, MollifierProfile, QuadConfig, RenormConstants, TruncatedHeatKernel};
use symlab_core::stats::loglog_slope;

use crate::artifacts::{num, Chart, Check, Outcome, Series, Table};
use crate::config::Settings;
use crate::error::{Context, Result};

const PROFILES: [&str; 3] = ["symmetric", "causal", "causal-sharp"];

fn sweep(d: usize, profile: &str, eps: &[f64], r_k: f64, quad: &QuadConfig) -> Result<Vec<RenormConstants>> {
    let kernel = TruncatedHeatKernel::new(d, r_k)?;
    eps.par_iter()
        .map(|&e| {
            let chi = Mollifier::new(MollifierProfile::by_id(profile)?, e, d)?;
            renorm_constants(&kernel, &chi, quad).context(format!("constants for {profile} at ε = {e} in {d}D"))
        })
        .collect()
}

/// `R²` of the least-squares line through `(x, y)`.
fn r_squared(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy * sxy / (sxx * syy)
}

/// Smallest ratio of consecutive Cauchy differences.
fn cauchy_contraction(v: &[f64]) -> f64 {
    let diffs: Vec<f64> = v.windows(2).map(|w| (w[0] - w[1]).abs()).collect();
    diffs.windows(2).map(|w| w[0] / w[1]).fold(f64::INFINITY, f64::min)
}

pub fn run(s: &Settings) -> Result<Outcome> {
    let r_k = s.kernel_radius;
    let eps: Vec<f64> = (s.eps_levels.0..=s.eps_levels.1).map(|k| r_k * (-(k as f64)).exp2()).collect();
    let quad = QuadConfig { tol: s.quad_tol, ..QuadConfig::default() };
    let mut table = Table::new("constants", &["d", "mollifier", "eps", "c_hat", "c_bar", "c_sym", "c_tilde", "c_tilde0", "check_c", "refinement_change"])
        .meta("experiment", "renorm-constants")
        .meta("r_k", r_k)
        .meta("quad_tol", s.quad_tol);
    let mut out = Outcome::default();
    let mut by_profile = Vec::new();
    let mut series = Vec::new();
    for p in PROFILES {
        let cs = sweep(2, p, &eps, r_k, &quad)?;
        for c in &cs {
            table.push(vec![
                "2".into(),
                p.into(),
                num(c.eps),
                num(c.c_hat),
                num(c.c_bar),
                num(c.c_sym),
                num(c.c_tilde),
                num(c.c_tilde0),
                num(c.check_scalar()),
                num(c.refinement_change),
            ]);
        }
        series.push(Series { label: format!("c̄ {p}"), points: cs.iter().map(|c| (c.eps, c.c_bar)).collect() });
        by_profile.push((p, cs));
    }
    let log_inv: Vec<f64> = eps.iter().map(|e| (1.0 / e).ln()).collect();
    let mut worst_r2 = f64::INFINITY;
    let mut worst_contraction = f64::INFINITY;
    let mut worst_tilde0: f64 = 0.0;
    for (p, cs) in &by_profile {
        let bar: Vec<f64> = cs.iter().map(|c| c.c_bar).collect();
        worst_r2 = worst_r2.min(r_squared(&log_inv, &bar));
        let sym: Vec<f64> = cs.iter().map(|c| c.c_sym).collect();
        worst_contraction = worst_contraction.min(cauchy_contraction(&sym));
        if MollifierProfile::by_id(p)?.non_anticipative() {
            worst_tilde0 = cs.iter().map(|c| c.c_tilde0.abs()).fold(worst_tilde0, f64::max);
        }
    }
    out.checks.push(Check::new("c_bar_log_fit_r2", worst_r2, worst_r2 >= 0.99, "≥ 0.99"));
    out.checks.push(Check::new("c_sym_cauchy_contraction", worst_contraction, worst_contraction >= 1.5, "≥ 1.5"));
    out.checks.push(Check::new("c_tilde0_non_anticipative", worst_tilde0, worst_tilde0 == 0.0, "= 0"));
    let check_at_smallest = |p: &str| {
        by_profile.iter().find(|(q, _)| *q == p).map(|(_, cs)| cs.last().expect("levels").check_scalar()).unwrap_or(f64::NAN)
    };
    let (c1, c2) = (check_at_smallest("causal"), check_at_smallest("causal-sharp"));
    let rel = (c1 - c2).abs() / c1.abs().max(c2.abs());
    out.checks.push(Check::new("check_c_mollifier_agreement", rel, rel <= 0.05, "≤ 0.05"));

    let cs3 = sweep(3, &s.mollifier, &eps, r_k, &quad)?;
    for c in &cs3 {
        table.push(vec![
            "3".into(),
            s.mollifier.clone(),
            num(c.eps),
            num(c.c_hat),
            num(c.c_bar),
            num(c.c_sym),
            num(c.c_tilde),
            num(c.c_tilde0),
            "".into(),
            num(c.refinement_change),
        ]);
    }
    let bar3: Vec<f64> = cs3.iter().map(|c| c.c_bar).collect();
    let (slope3, _) = loglog_slope(&eps, &bar3)?;
    out.checks.push(Check::new("c_bar_3d_exponent", slope3, (slope3 + 1.0).abs() <= 0.15, "−1 ± 0.15"));
    series.push(Series { label: format!("c̄ 3D {}", s.mollifier), points: cs3.iter().map(|c| (c.eps, c.c_bar)).collect() });
    out.charts.push(Chart {
        name: "c_bar".into(),
        title: "c̄^ε vs ε".into(),
        x_label: "ε".into(),
        y_label: "c̄".into(),
        log_x: true,
        log_y: true,
        series,
    });
    out.tables.push(table);
    Ok(out)
}
