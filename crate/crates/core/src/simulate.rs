//! Adaptive time integration and basin-of-attraction sampling.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibria::{find_all_equilibria, EquilibriumRecord};
use crate::error::{Error, Result};
use crate::model::{distance, max_norm, ModelParams, ModelState, Vec3};
use crate::qmc::Halton3;
use crate::topology::{apply_topology, TopologyId};

/// Relative size of the right-hand side below which the state is at rest.
pub const STEADY_RHS: f64 = 1e-9;
/// Consecutive accepted steps the rest test must hold for.
pub const STEADY_STEPS: usize = 10;
/// Termini farther than this from every equilibrium are unmatched.
pub const MATCH_DIST: f64 = 1e-4;
pub const UNMATCHED: &str = "UNMATCHED";
pub const NOT_STEADY: &str = "NOT_STEADY";
/// Integration tolerances for basin runs; well below the rest threshold so
/// step-size noise near an equilibrium cannot mask it.
pub const BASIN_TOL: (f64, f64) = (1e-11, 1e-13);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Terminal {
    Steady,
    MaxTime,
    Diverged,
}

impl Terminal {
    pub fn token(&self) -> &'static str {
        match self {
            Terminal::Steady => "STEADY",
            Terminal::MaxTime => "MAX_TIME",
            Terminal::Diverged => "DIVERGED",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec3>,
    pub terminal: Terminal,
}

impl Trajectory {
    pub fn last(&self) -> (f64, Vec3) {
        (*self.times.last().unwrap(), *self.states.last().unwrap())
    }
}

// Dormand-Prince 5(4) tableau; the field is autonomous so the nodes are unused
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights (equal to the last row of `A`).
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn axpy(x: &Vec3, h: f64, k: &[Vec3], w: &[f64]) -> Vec3 {
    let mut out = *x;
    for (kj, &wj) in k.iter().zip(w) {
        if wj != 0.0 {
            for i in 0..3 {
                out[i] += h * wj * kj[i];
            }
        }
    }
    out
}

/// Integrates the model from `x0` up to `t_end`.
pub fn integrate(params: &ModelParams, x0: &ModelState, t_end: f64, rel_tol: f64, abs_tol: f64) -> Result<Trajectory> {
    integrate_field(|x| params.field(x), x0, t_end, rel_tol, abs_tol)
}

/// Dormand-Prince 5(4) on an arbitrary vector field on the orthant.
///
/// Components pushed below zero by a step are clamped to zero when within
/// `abs_tol`; larger excursions reject the step.
pub fn integrate_field<F>(field: F, x0: &ModelState, t_end: f64, rel_tol: f64, abs_tol: f64) -> Result<Trajectory>
where
    F: Fn(&Vec3) -> Vec3,
{
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::Precondition("t_end must be positive and finite".into()));
    }
    if !(rel_tol > 0.0 && abs_tol > 0.0) {
        return Err(Error::Precondition("tolerances must be positive".into()));
    }
    let mut x = x0.0.map(|v| v.max(0.0));
    let mut times = vec![0.0];
    let mut states = vec![x];
    let mut f = field(&x);
    if f.iter().all(|&v| v == 0.0) {
        return Ok(Trajectory {
            times,
            states,
            terminal: Terminal::Steady,
        });
    }
    let scale0 = max_norm(&x).max(1.0);
    let blowup = 1e8 * scale0;

    let sc = |a: &Vec3, b: &Vec3, i: usize| abs_tol + rel_tol * a[i].abs().max(b[i].abs());
    // starting step from the size of the field
    let d0 = (0..3).map(|i| (x[i] / sc(&x, &x, i)).powi(2)).sum::<f64>().sqrt();
    let d1 = (0..3).map(|i| (f[i] / sc(&x, &x, i)).powi(2)).sum::<f64>().sqrt();
    let mut h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h = h.min(t_end);
    let h_min = 1e-14 * t_end;

    let mut t = 0.0;
    let mut rest = 0;
    let mut k = [[0.0; 3]; 7];
    while t < t_end {
        if h < h_min {
            return Err(Error::StepUnderflow { t, h });
        }
        let last = t + h >= t_end;
        let step = if last { t_end - t } else { h };
        k[0] = f;
        for s in 1..7 {
            let xs = axpy(&x, step, &k[..s], &A[s][..s]);
            k[s] = field(&xs);
        }
        let mut next = axpy(&x, step, &k, &B5);
        let low = axpy(&x, step, &k, &B4);
        let err = ((0..3).map(|i| ((next[i] - low[i]) / sc(&x, &next, i)).powi(2)).sum::<f64>() / 3.0).sqrt();

        if !err.is_finite() || next.iter().any(|v| !v.is_finite()) {
            h *= 0.25;
            continue;
        }
        if err > 1.0 {
            h = step * (0.9 * err.powf(-0.2)).max(0.2);
            continue;
        }
        if next.iter().any(|&v| v < -abs_tol) {
            h = 0.5 * step;
            continue;
        }
        for v in next.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }

        t = if last { t_end } else { t + step };
        x = next;
        f = field(&x);
        times.push(t);
        states.push(x);

        if max_norm(&x) > blowup {
            return Ok(Trajectory {
                times,
                states,
                terminal: Terminal::Diverged,
            });
        }
        if max_norm(&f) < STEADY_RHS * (1.0 + max_norm(&x)) {
            rest += 1;
            if rest >= STEADY_STEPS {
                return Ok(Trajectory {
                    times,
                    states,
                    terminal: Terminal::Steady,
                });
            }
        } else {
            rest = 0;
        }
        let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h = step * grow;
    }
    Ok(Trajectory {
        times,
        states,
        terminal: Terminal::MaxTime,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasinSample {
    pub n: usize,
    pub seed: u64,
    /// Label token (or `UNMATCHED` / `NOT_STEADY`) to fraction of starts.
    pub fractions: BTreeMap<String, f64>,
    pub equilibria: Vec<EquilibriumRecord>,
}

impl BasinSample {
    pub fn fraction(&self, token: &str) -> f64 {
        self.fractions.get(token).copied().unwrap_or(0.0)
    }
}

/// Fate of `n` quasi-random positive starts in `(0, 2 max k]^3`.
pub fn basin_sample(topo: TopologyId, params: &ModelParams, n: usize, seed: u64) -> Result<BasinSample> {
    basin_sample_with(topo, params, n, seed, 1e4)
}

pub fn basin_sample_with(topo: TopologyId, params: &ModelParams, n: usize, seed: u64, t_end: f64) -> Result<BasinSample> {
    let n = n.max(1);
    let p = apply_topology(params, topo);
    let equilibria = find_all_equilibria(topo, &p)?;
    let known: Vec<&EquilibriumRecord> = equilibria.iter().filter(|e| e.feasible).collect();
    let top = 2.0 * p.max_k();
    let starts: Vec<Vec3> = Halton3::new(seed)
        .take(n)
        .map(|u| u.map(|v| top * (1.0 - v)))
        .collect();
    let fates: Vec<String> = starts
        .par_iter()
        .map(|x0| {
            let traj = match integrate(&p, &ModelState(*x0), t_end, BASIN_TOL.0, BASIN_TOL.1) {
                Ok(t) if t.terminal == Terminal::Steady => t,
                _ => return NOT_STEADY.to_string(),
            };
            let (_, end) = traj.last();
            known
                .iter()
                .map(|e| (distance(&e.point, &end), e.label))
                .filter(|(d, _)| *d < MATCH_DIST)
                .min_by(|a, b| a.0.total_cmp(&b.0))
                .map_or(UNMATCHED.to_string(), |(_, l)| l.token().to_string())
        })
        .collect();
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for fate in fates {
        *counts.entry(fate).or_default() += 1;
    }
    let fractions = counts.into_iter().map(|(k, c)| (k, c as f64 / n as f64)).collect();
    Ok(BasinSample {
        n,
        seed,
        fractions,
        equilibria,
    })
}
