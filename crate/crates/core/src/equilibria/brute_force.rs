//! Multi-start oracle: Newton restricted to every face of the orthant.

use rayon::prelude::*;

use super::{EqLabel, EquilibriumRecord, DEDUP_DIST, EMIT_RESIDUAL};
use crate::model::{distance, ModelParams, Vec3};
use crate::qmc::Halton3;
use crate::solve;

pub const DEFAULT_STARTS: usize = 24;

/// Supports as free-component masks: the interior, three faces, three axes.
const SUPPORTS: [[bool; 3]; 7] = [
    [true, true, true],
    [true, true, false],
    [true, false, true],
    [false, true, true],
    [true, false, false],
    [false, true, false],
    [false, false, true],
];

/// Equilibria found by damped Newton from `n_starts` quasi-random starts in
/// `(0, 2 max k]^3` plus the eight box corners, run once per support. Points
/// within [`DEDUP_DIST`] are merged. Labels are `ORIGIN` for the origin and
/// `NUMERICAL` otherwise.
pub fn brute_force_equilibria(params: &ModelParams, n_starts: usize, seed: u64, tol: f64) -> Vec<EquilibriumRecord> {
    let top = 2.0 * params.max_k();
    let low = 1e-3 * top;
    let mut starts: Vec<Vec3> = Halton3::new(seed)
        .take(n_starts.max(1))
        .map(|u| [top * (1.0 - u[0]), top * (1.0 - u[1]), top * (1.0 - u[2])])
        .collect();
    for corner in 0..8 {
        let pick = |bit: usize| if corner & (1 << bit) != 0 { top } else { low };
        starts.push([pick(0), pick(1), pick(2)]);
    }

    let jobs: Vec<([bool; 3], Vec3)> = SUPPORTS
        .iter()
        .flat_map(|&s| starts.iter().map(move |&x| (s, x)))
        .collect();
    let mut found: Vec<Vec3> = jobs
        .par_iter()
        .filter_map(|(support, x0)| {
            let out = solve::newton(params, x0, *support, tol, 100).ok()?;
            let on_support = (0..3).all(|i| !support[i] || out.point[i] > 1e-9);
            (on_support && out.residual <= EMIT_RESIDUAL).then_some(out.point)
        })
        .collect();
    found.push([0.0; 3]);
    found.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut clusters: Vec<Vec3> = Vec::new();
    for p in found {
        if !clusters.iter().any(|c| distance(c, &p) < DEDUP_DIST) {
            clusters.push(p);
        }
    }
    clusters
        .into_iter()
        .map(|point| {
            let label = if point == [0.0; 3] { EqLabel::Origin } else { EqLabel::Numerical };
            EquilibriumRecord::new(params, label, point, true)
        })
        .collect()
}
