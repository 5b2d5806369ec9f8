//! Scaling of GFF line and triangle integrals, and the 3D heat-regularised
//! variants.

use symlab_core::dynamics::sample_gff;
use symlab_core::lattice::{heat_semigroup, line_integral, triangle_boundary_integral, GaugeField, LineSegment, TorusGrid, Triangle};
use symlab_core::stats::loglog_slope;

use crate::artifacts::{num, Chart, Check, Outcome, Series, Table};
use crate::config::Settings;
use crate::error::{CliError, Result};

use super::per_seed;

const PLACEMENTS: usize = 8;

fn placement(j: usize, d: usize) -> [f64; 3] {
    let f = |a: f64| (a * j as f64 + 0.05).fract();
    [f(0.11), f(0.37), if d == 3 { f(0.23) } else { 0.0 }]
}

fn quad_points(grid: TorusGrid, len: f64) -> usize {
    (8.0 * len * grid.n() as f64).ceil() as usize + 1
}

/// Mean of `|A(ℓ)|²` over axis-aligned segments of length `len`.
fn segment_second_moment(a: &GaugeField, len: f64) -> Result<f64> {
    let grid = a.grid();
    let d = grid.d();
    let m = quad_points(grid, len);
    let mut acc = 0.0;
    for j in 0..PLACEMENTS {
        for axis in 0..d {
            let mut v = [0.0; 3];
            v[axis] = len;
            acc += line_integral(a, &LineSegment::new(d, placement(j, d), v)?, m)?.norm().powi(2);
        }
    }
    Ok(acc / (PLACEMENTS * d) as f64)
}

fn triangle_second_moment(a: &GaugeField, area: f64) -> Result<f64> {
    let grid = a.grid();
    let l = (2.0 * area).sqrt() * (1.0 - 1e-9);
    let m = quad_points(grid, 2.0 * l);
    let mut acc = 0.0;
    for j in 0..PLACEMENTS {
        let tri = Triangle::from_vertices(2, placement(j, 2), [l, 0.0, 0.0], [0.0, l, 0.0])?;
        acc += triangle_boundary_integral(a, &tri, m)?.norm().powi(2);
    }
    Ok(acc / PLACEMENTS as f64)
}

fn mean_over(rows: &[Vec<f64>], k: usize) -> f64 {
    rows.iter().map(|r| r[k]).sum::<f64>() / rows.len() as f64
}

pub fn run(s: &Settings) -> Result<Outcome> {
    let mut out = Outcome::default();
    let grid = TorusGrid::new(2, s.n)?;
    let h = grid.h();
    // Triangle legs of at least 8h, lengths of at least 4h.
    let k_max = ((s.n * s.n) as f64 / 32.0).log2().floor() as i32;
    let areas: Vec<f64> = (6..=k_max).map(|k| (-(k as f64)).exp2()).collect();
    let lengths: Vec<f64> = (2..).map(|k| (-(k as f64)).exp2()).take_while(|&l| l >= 4.0 * h).collect();
    if areas.len() < 3 || lengths.len() < 3 {
        return Err(CliError::Config(format!("n = {} is too coarse for norm-scaling; use n ≥ 128", s.n)));
    }
    let per: Vec<(Vec<f64>, Vec<f64>)> = per_seed(s, |seed| {
        let a = sample_gff(seed, grid, s.group);
        let tri = areas.iter().map(|&p| triangle_second_moment(&a, p)).collect::<Result<_>>()?;
        let seg = lengths.iter().map(|&l| segment_second_moment(&a, l)).collect::<Result<_>>()?;
        Ok((tri, seg))
    })?;
    let tri_rows: Vec<Vec<f64>> = per.iter().map(|p| p.0.clone()).collect();
    let seg_rows: Vec<Vec<f64>> = per.iter().map(|p| p.1.clone()).collect();
    let tri_mean: Vec<f64> = (0..areas.len()).map(|k| mean_over(&tri_rows, k)).collect();
    let seg_mean: Vec<f64> = (0..lengths.len()).map(|k| mean_over(&seg_rows, k)).collect();
    let (slope, slope_se) = loglog_slope(&areas, &tri_mean)?;
    let ratios: Vec<f64> = lengths.iter().zip(&seg_mean).map(|(l, e)| e / l.powf(2.0 * s.norm.alpha)).collect();
    let spread = ratios.iter().copied().fold(f64::MIN, f64::max) / ratios.iter().copied().fold(f64::MAX, f64::min);

    let mut t2 = Table::new("gff_2d", &["kind", "size", "second_moment", "normalised"])
        .meta("experiment", "norm-scaling")
        .meta("n", s.n)
        .meta("group", s.group)
        .meta("samples", s.samples())
        .meta("alpha", s.norm.alpha)
        .meta("triangle_slope", slope)
        .meta("triangle_slope_stderr", slope_se);
    for (p, e) in areas.iter().zip(&tri_mean) {
        t2.push(vec!["triangle".into(), num(*p), num(*e), num(e / p)]);
    }
    for ((l, e), r) in lengths.iter().zip(&seg_mean).zip(&ratios) {
        t2.push(vec!["segment".into(), num(*l), num(*e), num(*r)]);
    }
    out.checks.push(Check::new("triangle_slope", slope, (slope - 1.0).abs() <= 0.1, "1 ± 0.1"));
    out.checks.push(Check::new("segment_ratio_spread", spread, spread <= 10.0, "≤ 10"));
    out.charts.push(Chart {
        name: "gff_2d".into(),
        title: "E|A(∂P)|² vs |P|".into(),
        x_label: "|P|".into(),
        y_label: "E|A(∂P)|²".into(),
        log_x: true,
        log_y: true,
        series: vec![
            Series { label: "empirical".into(), points: areas.iter().copied().zip(tri_mean.iter().copied()).collect() },
            Series { label: "∝ |P|".into(), points: areas.iter().map(|&p| (p, p * tri_mean[0] / areas[0])).collect() },
        ],
    });
    out.tables.push(t2);

    // 3D: raw and heat-regularised segment moments under refinement.
    let t = s.flow_time;
    let len = 0.125f64.min(t.powf(s.norm.theta) * (1.0 - 1e-9));
    let mut t3 = Table::new("gff_3d", &["n", "raw", "regularised"])
        .meta("segment_length", len)
        .meta("flow_time", t)
        .meta("theta", s.norm.theta);
    let mut raw = Vec::new();
    let mut reg = Vec::new();
    for &n in &s.sizes_3d {
        let g3 = TorusGrid::new(3, n)?;
        let per: Vec<(f64, f64)> = per_seed(s, |seed| {
            let a = sample_gff(seed, g3, s.group);
            let r = segment_second_moment(&a, len)?;
            let comps = a.comps().iter().map(|c| heat_semigroup(c, t)).collect::<symlab_core::Result<Vec<_>>>()?;
            let pa = GaugeField::from_components(a.group(), comps)?;
            Ok((r, segment_second_moment(&pa, len)?))
        })?;
        let (r, g) = (per.iter().map(|p| p.0).sum::<f64>() / per.len() as f64, per.iter().map(|p| p.1).sum::<f64>() / per.len() as f64);
        t3.push(vec![n.to_string(), num(r), num(g)]);
        raw.push(r);
        reg.push(g);
    }
    let growth = raw.windows(2).map(|w| w[1] / w[0]).fold(f64::INFINITY, f64::min);
    let (lo, hi) = (reg.iter().copied().fold(f64::MAX, f64::min), reg.iter().copied().fold(f64::MIN, f64::max));
    let stability = (hi - lo) / hi;
    out.checks.push(Check::new("raw_3d_growth_per_doubling", growth, growth >= 1.25, "≥ 1.25"));
    out.checks.push(Check::new("regularised_3d_spread", stability, stability <= 0.1, "≤ 0.1"));
    out.tables.push(t3);
    Ok(out)
}
