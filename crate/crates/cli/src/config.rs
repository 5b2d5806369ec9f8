//! Layered `key = value` configuration: built-in defaults, then
//! experiment defaults, then a config file, then `--set` flags.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;
use std::path::PathBuf;

use serde::Serialize;
use symlab_core::dynamics::{CountertermSource, NoiseKind, SimConfig};
use symlab_core::lattice::TorusGrid;
use symlab_core::lie::{AlgebraMap, GroupKind};
use symlab_core::noise::{MollifierProfile, QuadConfig, TruncatedHeatKernel};
use symlab_core::observables::NormParams;

use crate::error::{CliError, Result};

/// Every recognised key with its built-in default and a one-line description.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("d", "2", "spatial dimension (2 or 3)"),
    ("n", "64", "sites per side"),
    ("group", "su2", "structure group: u<N> or su<N>"),
    ("dt", "auto", "time step; auto = cfl·h²"),
    ("cfl", "0.25", "stability factor, dt ≤ cfl·h², in (0, 1/4]"),
    ("horizon", "0.1", "final time"),
    ("noise", "mollified", "none, white or mollified"),
    ("eps", "0.125", "mollification scale"),
    ("mollifier", "causal", "symmetric, causal or causal-sharp"),
    ("kernel_radius", "auto", "cutoff radius of the heat kernel"),
    ("bare_mass", "0", "C̊: a multiple of the identity or all dim² entries, comma separated"),
    ("bare_mass_2", "none", "C̊₂ of the coupled system, same format as bare_mass"),
    ("counterterm", "computed", "computed, user or divergent"),
    ("counterterm_value", "0", "user counterterm, same format as bare_mass"),
    ("c_div", "0", "coefficient of 1/ε in the divergent counterterm"),
    ("c_fin", "0", "finite part of the divergent counterterm"),
    ("check_c", "auto", "override of Č, same format as bare_mass"),
    ("r_max", "1e4", "blow-up threshold on the sup norm"),
    ("sample_every", "1", "record every this many steps"),
    ("noise_base_n", "auto", "resolution the white noise is drawn on"),
    ("reunitarise_every", "100", "re-unitarisation period of gauge fields"),
    ("quad_tol", "1e-4", "tolerance of the renormalisation quadrature"),
    ("seeds", "0..8", "seed range a..b (b exclusive)"),
    ("alpha", "0.75", "2D Hölder exponent, in (2/3, 1)"),
    ("eta", "-0.55", "3D exponent η < -1/2"),
    ("beta", "-0.25", "3D exponent β < 0"),
    ("delta", "0.9", "3D exponent δ in (1 + β/2, 1)"),
    ("alpha3", "0.45", "3D exponent α₃ in (0, 1/2)"),
    ("theta", "0.3", "heat-flow window exponent θ > 0"),
    ("segments", "64", "segments sampled per dyadic length"),
    ("triangles", "64", "triangles sampled per dyadic size"),
    ("t_per_octave", "2", "heat-flow times per octave"),
    ("norm_seed", "0", "seed of the norm sample positions"),
    ("slack", "0", "restart trigger slack"),
    ("trigger", "zero-mode", "restart trigger norm: sup or zero-mode"),
    ("sizes", "32,64,128", "grid sizes of refinement studies"),
    ("sizes_3d", "24,48,96", "grid sizes of 3D refinement studies"),
    ("eps_levels", "3..7", "ε = 2^-k·r_K for k in the inclusive range"),
    ("substeps", "auto", "holonomy substeps per path piece; auto = n"),
    ("flow_time", "0.1", "heat-flow time of regularised observables"),
];

/// Where a value came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Layer {
    Default,
    Experiment,
    File,
    Flag,
}

/// All four layers and the merged result.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Layers {
    pub experiment: BTreeMap<String, String>,
    pub file: BTreeMap<String, String>,
    pub flags: BTreeMap<String, String>,
    pub file_path: Option<PathBuf>,
}

impl Layers {
    /// Merged `key → (value, layer)` over every known key.
    pub fn resolve(&self) -> BTreeMap<String, (String, Layer)> {
        let mut out = BTreeMap::new();
        for (k, v, _) in KEYS {
            out.insert(k.to_string(), (v.to_string(), Layer::Default));
        }
        for (layer, map) in [(Layer::Experiment, &self.experiment), (Layer::File, &self.file), (Layer::Flag, &self.flags)] {
            for (k, v) in map {
                out.insert(k.clone(), (v.clone(), layer));
            }
        }
        out
    }
}

fn known(key: &str) -> Result<()> {
    if KEYS.iter().any(|(k, _, _)| *k == key) {
        Ok(())
    } else {
        Err(CliError::Config(format!("unknown key '{key}'")))
    }
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = parse_assignment(line).map_err(|e| CliError::Config(format!("line {}: {e}", no + 1)))?;
        if out.insert(k.clone(), v).is_some() {
            return Err(CliError::Config(format!("line {}: key '{k}' given twice", no + 1)));
        }
    }
    Ok(out)
}

/// Parses one `key=value` assignment and checks the key.
pub fn parse_assignment(s: &str) -> Result<(String, String)> {
    let (k, v) = s.split_once('=').ok_or_else(|| CliError::Config(format!("expected key = value, got '{s}'")))?;
    let (k, v) = (k.trim(), v.trim());
    known(k)?;
    if v.is_empty() {
        return Err(CliError::Config(format!("empty value for '{k}'")));
    }
    Ok((k.to_string(), v.to_string()))
}

/// Typed view of a resolved configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Settings {
    pub d: usize,
    pub n: usize,
    pub group: GroupKind,
    pub dt: Option<f64>,
    pub cfl: f64,
    pub horizon: f64,
    pub noise: String,
    pub eps: f64,
    pub mollifier: String,
    pub kernel_radius: f64,
    pub bare_mass: Vec<f64>,
    pub bare_mass_2: Option<Vec<f64>>,
    pub counterterm: String,
    pub counterterm_value: Vec<f64>,
    pub c_div: f64,
    pub c_fin: f64,
    pub check_c: Option<Vec<f64>>,
    pub r_max: f64,
    pub sample_every: usize,
    pub noise_base_n: Option<usize>,
    pub reunitarise_every: usize,
    pub quad_tol: f64,
    pub seeds: Range<u64>,
    pub norm: NormParams,
    pub slack: f64,
    pub trigger: String,
    pub sizes: Vec<usize>,
    pub sizes_3d: Vec<usize>,
    pub eps_levels: (u32, u32),
    pub substeps: Option<usize>,
    pub flow_time: f64,
}

struct Reader<'a>(&'a BTreeMap<String, (String, Layer)>);

impl Reader<'_> {
    fn raw(&self, k: &str) -> &str {
        &self.0[k].0
    }

    fn num<T: std::str::FromStr>(&self, k: &str) -> Result<T> {
        self.raw(k).parse().map_err(|_| CliError::Config(format!("{k} = '{}' is not a valid number", self.raw(k))))
    }

    fn auto<T: std::str::FromStr>(&self, k: &str) -> Result<Option<T>> {
        if matches!(self.raw(k), "auto" | "none") {
            Ok(None)
        } else {
            self.num(k).map(Some)
        }
    }

    fn list<T: std::str::FromStr>(&self, k: &str) -> Result<Vec<T>> {
        self.raw(k)
            .split(',')
            .map(|s| s.trim().parse().map_err(|_| CliError::Config(format!("{k} = '{}' is not a number list", self.raw(k)))))
            .collect()
    }

    fn opt_list(&self, k: &str) -> Result<Option<Vec<f64>>> {
        if matches!(self.raw(k), "auto" | "none") {
            Ok(None)
        } else {
            self.list(k).map(Some)
        }
    }
}

/// Parses `a..b` (exclusive end).
pub fn parse_range(s: &str) -> Result<Range<u64>> {
    let bad = || CliError::Config(format!("expected a range a..b, got '{s}'"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
    if b <= a {
        return Err(CliError::Config(format!("seed range {s} is empty")));
    }
    Ok(a..b)
}

fn range_err(key: &str, value: impl fmt::Display, range: &str) -> CliError {
    CliError::Config(format!("{key} = {value} is out of range: must lie in {range}"))
}

impl Settings {
    /// Parses and range-checks every value.
    pub fn from_resolved(m: &BTreeMap<String, (String, Layer)>) -> Result<Settings> {
        let r = Reader(m);
        let d: usize = r.num("d")?;
        if !(2..=3).contains(&d) {
            return Err(range_err("d", d, "{2, 3}"));
        }
        let n: usize = r.num("n")?;
        TorusGrid::new(d, n).map_err(|e| CliError::Config(format!("n = {n}: {e}")))?;
        let group: GroupKind = r.raw("group").parse().map_err(|e| CliError::Config(format!("{e}")))?;
        let cfl: f64 = r.num("cfl")?;
        if !(cfl > 0.0 && cfl <= 0.25) {
            return Err(range_err("cfl", cfl, "(0, 1/4]"));
        }
        let dt = r.auto::<f64>("dt")?;
        if let Some(dt) = dt {
            if !(dt > 0.0) {
                return Err(range_err("dt", dt, "(0, ∞)"));
            }
        }
        let horizon: f64 = r.num("horizon")?;
        if !(horizon >= 0.0) {
            return Err(range_err("horizon", horizon, "[0, ∞)"));
        }
        let noise = r.raw("noise").to_string();
        if !["none", "white", "mollified"].contains(&noise.as_str()) {
            return Err(CliError::Config(format!("noise = {noise}: expected none, white or mollified")));
        }
        let eps: f64 = r.num("eps")?;
        if !(eps > 0.0) {
            return Err(range_err("eps", eps, "(0, ∞)"));
        }
        let mollifier = r.raw("mollifier").to_string();
        MollifierProfile::by_id(&mollifier).map_err(|e| CliError::Config(e.to_string()))?;
        let kernel_radius = r.auto::<f64>("kernel_radius")?.unwrap_or(TruncatedHeatKernel::DEFAULT_RADIUS);
        let counterterm = r.raw("counterterm").to_string();
        if !["computed", "user", "divergent"].contains(&counterterm.as_str()) {
            return Err(CliError::Config(format!("counterterm = {counterterm}: expected computed, user or divergent")));
        }
        let seeds = parse_range(r.raw("seeds"))?;
        let norm = NormParams {
            alpha: r.num("alpha")?,
            eta: r.num("eta")?,
            beta: r.num("beta")?,
            delta: r.num("delta")?,
            alpha3: r.num("alpha3")?,
            theta: r.num("theta")?,
            segments: r.num("segments")?,
            triangles: r.num("triangles")?,
            t_per_octave: r.num("t_per_octave")?,
            seed: r.num("norm_seed")?,
        };
        norm.validate().map_err(|e| CliError::Config(e.to_string()))?;
        let trigger = r.raw("trigger").to_string();
        if !["sup", "zero-mode"].contains(&trigger.as_str()) {
            return Err(CliError::Config(format!("trigger = {trigger}: expected sup or zero-mode")));
        }
        let slack: f64 = r.num("slack")?;
        if !(slack >= 0.0) {
            return Err(range_err("slack", slack, "[0, ∞)"));
        }
        let levels = r.raw("eps_levels");
        let (lo, hi) = levels
            .split_once("..")
            .and_then(|(a, b)| Some((a.trim().parse::<u32>().ok()?, b.trim().parse::<u32>().ok()?)))
            .ok_or_else(|| CliError::Config(format!("eps_levels = '{levels}': expected k0..k1")))?;
        if hi < lo + 2 {
            return Err(CliError::Config("eps_levels needs at least three levels".into()));
        }
        let sample_every: usize = r.num("sample_every")?;
        let reunitarise_every: usize = r.num("reunitarise_every")?;
        if sample_every == 0 || reunitarise_every == 0 {
            return Err(CliError::Config("sample_every and reunitarise_every must be ≥ 1".into()));
        }
        let s = Settings {
            d,
            n,
            group,
            dt,
            cfl,
            horizon,
            noise,
            eps,
            mollifier,
            kernel_radius,
            bare_mass: r.list("bare_mass")?,
            bare_mass_2: r.opt_list("bare_mass_2")?,
            counterterm,
            counterterm_value: r.list("counterterm_value")?,
            c_div: r.num("c_div")?,
            c_fin: r.num("c_fin")?,
            check_c: r.opt_list("check_c")?,
            r_max: r.num("r_max")?,
            sample_every,
            noise_base_n: r.auto("noise_base_n")?,
            reunitarise_every,
            quad_tol: r.num("quad_tol")?,
            seeds,
            norm,
            slack,
            trigger,
            sizes: r.list("sizes")?,
            sizes_3d: r.list("sizes_3d")?,
            eps_levels: (lo, hi),
            substeps: r.auto("substeps")?,
            flow_time: r.num("flow_time")?,
        };
        for m in [Some(&s.bare_mass), s.bare_mass_2.as_ref(), Some(&s.counterterm_value), s.check_c.as_ref()].into_iter().flatten() {
            algebra_map(s.group, m)?;
        }
        Ok(s)
    }

    /// Number of ensemble members.
    pub fn samples(&self) -> usize {
        (self.seeds.end - self.seeds.start) as usize
    }

    /// Simulation config at grid size `n` with noise seed `seed`.
    pub fn sim_config(&self, d: usize, n: usize, seed: u64) -> Result<SimConfig> {
        let grid = TorusGrid::new(d, n)?;
        let h = grid.h();
        let dt = self.dt.unwrap_or(self.cfl * h * h);
        let mut cfg = SimConfig::new(grid, self.group, dt);
        cfg.cfl = self.cfl;
        cfg.horizon = self.horizon;
        cfg.noise = match self.noise.as_str() {
            "none" => NoiseKind::None,
            "white" => NoiseKind::White,
            _ => NoiseKind::Mollified { eps: self.eps, profile: MollifierProfile::by_id(&self.mollifier)? },
        };
        cfg.kernel_radius = self.kernel_radius;
        cfg.bare_mass = algebra_map(self.group, &self.bare_mass)?;
        cfg.bare_mass_2 = self.bare_mass_2.as_ref().map(|m| algebra_map(self.group, m)).transpose()?;
        cfg.counterterm = match self.counterterm.as_str() {
            "user" => CountertermSource::User(algebra_map(self.group, &self.counterterm_value)?),
            "divergent" => CountertermSource::Divergent { c_div: self.c_div, c_fin: self.c_fin },
            _ => CountertermSource::Computed,
        };
        cfg.check_c = self.check_c.as_ref().map(|m| algebra_map(self.group, m)).transpose()?;
        cfg.r_max = self.r_max;
        cfg.seed = seed;
        cfg.noise_base_n = self.noise_base_n;
        cfg.sample_every = self.sample_every;
        cfg.reunitarise_every = self.reunitarise_every;
        cfg.quad = QuadConfig { tol: self.quad_tol, ..QuadConfig::default() };
        Ok(cfg)
    }
}

/// A single number is a multiple of the identity; otherwise all `dim²`
/// entries in row-major order.
pub fn algebra_map(group: GroupKind, v: &[f64]) -> Result<AlgebraMap> {
    let dim = group.algebra_dim();
    match v.len() {
        1 => Ok(AlgebraMap::scalar(dim, v[0])),
        k if k == dim * dim => Ok(AlgebraMap::from_row_major(dim, v.to_vec())?),
        k => Err(CliError::Config(format!("mass matrix has {k} entries; {group} needs 1 or {}", dim * dim))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings(pairs: &[(&str, &str)]) -> Result<Settings> {
        let layers = Layers { flags: pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(), ..Default::default() };
        Settings::from_resolved(&layers.resolve())
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let m = parse_text("# header\n\nn = 32  # side\ngroup=u1\n").unwrap();
        assert_eq!(m["n"], "32");
        assert_eq!(m["group"], "u1");
        assert!(parse_text("n = 1\nn = 2").is_err());
        assert!(parse_text("colour = red").is_err());
        assert!(parse_text("n 32").is_err());
    }

    #[test]
    fn masses_accept_scalars_and_full_matrices() {
        let s = settings(&[("bare_mass", "1,0,0,0,2,0,0,0,3")]).unwrap();
        let cfg = s.sim_config(2, 16, 0).unwrap();
        assert_eq!(cfg.bare_mass.get(1, 1), 2.0);
        assert!(settings(&[("bare_mass", "1,2")]).is_err());
    }

    #[test]
    fn ranges_are_checked() {
        assert!(settings(&[("d", "4")]).is_err());
        assert!(settings(&[("n", "7")]).is_err());
        assert!(settings(&[("seeds", "5..5")]).is_err());
        assert!(settings(&[("cfl", "0.5")]).is_err());
        assert_eq!(settings(&[("seeds", "3..7")]).unwrap().samples(), 4);
    }
}
