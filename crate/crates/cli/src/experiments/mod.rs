//! The canned experiment catalogue.

mod abelian_uniqueness;
mod det_ym_flow;
mod gauge_covariance;
mod generative_abelian;
mod norm_scaling;
mod renorm_constants;
mod she_exact;

use std::f64::consts::PI;

use rayon::prelude::*;
use symlab_core::lattice::{GaugeField, GroupField, TorusGrid};
use symlab_core::lie::GroupKind;

use crate::artifacts::Outcome;
use crate::config::Settings;
use crate::error::Result;

/// A catalogue entry.
pub struct Experiment {
    pub name: &'static str,
    pub summary: &'static str,
    /// Values layered over the built-in defaults.
    pub defaults: &'static [(&'static str, &'static str)],
    pub run: fn(&Settings) -> Result<Outcome>,
}

pub const CATALOGUE: &[Experiment] = &[
    Experiment {
        name: "she-exact",
        summary: "Fourier-mode variances of the exact stochastic heat equation sampler vs the Ornstein-Uhlenbeck law",
        defaults: &[("n", "32"), ("group", "u1"), ("dt", "1e-4"), ("horizon", "0.5"), ("sample_every", "10"), ("noise", "white"), ("seeds", "0..4")],
        run: she_exact::run,
    },
    Experiment {
        name: "abelian-uniqueness",
        summary: "I[A] vs I[B] for U(1) data differing by a full turn of the zero mode",
        defaults: &[("n", "16"), ("group", "u1"), ("noise", "white"), ("bare_mass", "0.5"), ("horizon", "1"), ("seeds", "0..2")],
        run: abelian_uniqueness::run,
    },
    Experiment {
        name: "gauge-covariance-2d",
        summary: "pathwise residual of A^g = B for the coupled system across grid sizes",
        defaults: &[("seeds", "0..1")],
        run: gauge_covariance::run,
    },
    Experiment {
        name: "renorm-constants",
        summary: "ε-sweep of the renormalisation constants and their fitted rates",
        defaults: &[],
        run: renorm_constants::run,
    },
    Experiment {
        name: "norm-scaling",
        summary: "GFF scaling of E|A(∂P)|², E|A(ℓ)|² and their 3D heat-regularised variants",
        defaults: &[("n", "128"), ("alpha", "0.9"), ("seeds", "0..32")],
        run: norm_scaling::run,
    },
    Experiment {
        name: "det-ym-flow",
        summary: "energy monotonicity and gauge covariance of the deterministic flow",
        defaults: &[("noise", "none"), ("horizon", "0.01")],
        run: det_ym_flow::run,
    },
    Experiment {
        name: "generative-abelian",
        summary: "invariant law of the orbit-restarted U(1) zero mode vs the wrapped Gaussian",
        defaults: &[("n", "8"), ("group", "u1"), ("noise", "white"), ("horizon", "5"), ("seeds", "0..400"), ("sample_every", "1000000")],
        run: generative_abelian::run,
    },
];

/// Looks an experiment up by name.
pub fn find(name: &str) -> Option<&'static Experiment> {
    CATALOGUE.iter().find(|e| e.name == name)
}

/// Runs `f` for every seed, in parallel, keeping seed order.
pub(crate) fn per_seed<T: Send>(s: &Settings, f: impl Fn(u64) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    s.seeds.clone().into_par_iter().map(&f).collect()
}

/// Smooth connection of sup norm about `amp`.
pub(crate) fn smooth_connection(grid: TorusGrid, group: GroupKind, amp: f64) -> GaugeField {
    let dim = group.algebra_dim();
    GaugeField::from_coords_fn(grid, group, |i, x| {
        (0..dim)
            .map(|a| {
                let (s, t) = (i as f64, a as f64);
                let phase: f64 = (0..grid.d()).map(|k| 2.0 * PI * x[k] * ((a + k + i) % 2) as f64).sum();
                amp * (phase + 0.7 * s + 1.3 * t).sin() / (1.0 + t)
            })
            .collect()
    })
}

/// Smooth gauge transformation `exp(amp·X(x))`.
pub(crate) fn smooth_gauge(grid: TorusGrid, group: GroupKind, amp: f64) -> GroupField {
    let alg = group.algebra();
    let dim = group.algebra_dim();
    GroupField::from_exp_fn(grid, group, |x| {
        let c: Vec<f64> = (0..dim)
            .map(|a| {
                let phase: f64 = (0..grid.d()).map(|k| 2.0 * PI * x[k] * (1 + (a + k) % 2) as f64).sum();
                amp * (phase + 0.4 * a as f64).cos()
            })
            .collect();
        alg.from_coords(&c)
    })
}
