//! Equilibria of every topology: the closed-form catalog, a damped Newton
//! solver, the geometric existence construction for the fully connected
//! model, and a multi-start brute-force oracle.

mod brute_force;
mod closed_form;
mod construction;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{distance, ModelParams, ModelState, Vec3};
use crate::solve;
use crate::topology::TopologyId;

pub use brute_force::{brute_force_equilibria, DEFAULT_STARTS};
pub use closed_form::closed_form_equilibria;
pub use construction::{coexistence_by_construction, construction_point};

/// Components above this are counted as feasible.
pub const FEASIBLE_TOL: f64 = 1e-10;
/// Residual ceiling for an emitted equilibrium.
pub const EMIT_RESIDUAL: f64 = 1e-8;
/// Residual reached by the final Newton polish.
pub const POLISH_RESIDUAL: f64 = 1e-10;
/// Distance under which two equilibria are the same point.
pub const DEDUP_DIST: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EqLabel {
    Origin,
    Coex,
    XEx2n,
    Q1,
    M2Ex8,
    I2,
    I3,
    W2,
    W3,
    X1,
    X2,
    Y3,
    Z1,
    Z2,
    Z3,
    Numerical,
}

impl EqLabel {
    pub const ALL: [EqLabel; 16] = [
        EqLabel::Origin,
        EqLabel::Coex,
        EqLabel::XEx2n,
        EqLabel::Q1,
        EqLabel::M2Ex8,
        EqLabel::I2,
        EqLabel::I3,
        EqLabel::W2,
        EqLabel::W3,
        EqLabel::X1,
        EqLabel::X2,
        EqLabel::Y3,
        EqLabel::Z1,
        EqLabel::Z2,
        EqLabel::Z3,
        EqLabel::Numerical,
    ];

    pub fn token(&self) -> &'static str {
        match self {
            EqLabel::Origin => "ORIGIN",
            EqLabel::Coex => "COEX",
            EqLabel::XEx2n => "X_EX2N",
            EqLabel::Q1 => "Q1",
            EqLabel::M2Ex8 => "M2_EX8",
            EqLabel::I2 => "I2",
            EqLabel::I3 => "I3",
            EqLabel::W2 => "W2",
            EqLabel::W3 => "W3",
            EqLabel::X1 => "X1",
            EqLabel::X2 => "X2",
            EqLabel::Y3 => "Y3",
            EqLabel::Z1 => "Z1",
            EqLabel::Z2 => "Z2",
            EqLabel::Z3 => "Z3",
            EqLabel::Numerical => "NUMERICAL",
        }
    }
}

impl fmt::Display for EqLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for EqLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EqLabel::ALL
            .iter()
            .find(|l| l.token() == s)
            .copied()
            .ok_or_else(|| Error::UnknownToken(s.to_string()))
    }
}

impl Serialize for EqLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.token())
    }
}

impl<'de> Deserialize<'de> for EqLabel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Equilibrium labels each topology admits besides the numerical fallback.
pub fn admitted_labels(topo: TopologyId) -> &'static [EqLabel] {
    use EqLabel::*;
    match topo {
        TopologyId::Full | TopologyId::Ex2 | TopologyId::Hub0 | TopologyId::Ex3 | TopologyId::Ex1 => &[Origin, Coex],
        TopologyId::Ex2New => &[Origin, XEx2n, Coex],
        TopologyId::Ex7 | TopologyId::Ex7New => &[Origin, Q1, Coex],
        TopologyId::Ex8 => &[Origin, M2Ex8, Coex],
        TopologyId::Ex6 => &[Origin, I2, I3, Coex],
        TopologyId::Chain => &[Origin, W2, W3, Coex],
        TopologyId::Converge => &[Origin, X1, X2, Y3, Coex],
        TopologyId::Diverge => &[Origin, Z1, Z2, Z3, Coex],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumRecord {
    /// NaN components mark a closed form whose value is not real.
    pub point: Vec3,
    pub label: EqLabel,
    pub feasible: bool,
    pub residual: f64,
}

impl EquilibriumRecord {
    pub fn new(params: &ModelParams, label: EqLabel, point: Vec3, conditions_hold: bool) -> Self {
        let real = point.iter().all(|v| v.is_finite());
        let residual = if real { params.residual(&point) } else { f64::INFINITY };
        let signs = real && point.iter().all(|&v| v >= -FEASIBLE_TOL);
        EquilibriumRecord {
            point,
            label,
            feasible: signs && conditions_hold,
            residual,
        }
    }

    pub fn is_interior(&self) -> bool {
        self.point.iter().all(|&v| v > FEASIBLE_TOL)
    }
}

/// Damped Newton towards an interior equilibrium.
pub fn newton_coexistence(params: &ModelParams, start: &ModelState, tol: f64, max_iter: usize) -> Result<EquilibriumRecord> {
    if !(tol > 0.0) {
        return Err(Error::Precondition("tol must be positive".into()));
    }
    if start.0.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::Precondition("start must be strictly positive".into()));
    }
    let out = solve::newton(params, &start.0, [true; 3], tol, max_iter)?;
    if out.residual > tol || out.point.iter().any(|&v| v <= 1e-8 * params.max_k()) {
        return Err(Error::NonConvergence {
            iterations: out.iterations,
            residual: out.residual,
        });
    }
    Ok(EquilibriumRecord {
        point: out.point,
        label: EqLabel::Coex,
        feasible: true,
        residual: out.residual,
    })
}

/// Newton restricted to the support of `point` (exact zeros stay zero).
pub fn polish(params: &ModelParams, point: &Vec3, tol: f64) -> Option<Vec3> {
    let free = [point[0] > 0.0, point[1] > 0.0, point[2] > 0.0];
    if !free.iter().any(|&f| f) {
        return Some([0.0; 3]);
    }
    if params.residual(point) <= tol {
        return Some(*point);
    }
    solve::newton(params, point, free, tol, 100)
        .ok()
        .filter(|o| o.residual <= tol.max(EMIT_RESIDUAL))
        .map(|o| o.point)
}

/// Closed-form catalog merged with the brute-force oracle.
///
/// Feasible closed-form records are polished and must reappear in the
/// brute-force set. Brute-force points that no closed form explains are
/// appended: interior ones as `COEX` when the catalog has no feasible
/// coexistence point, everything else as `NUMERICAL`.
pub fn find_all_equilibria(topo: TopologyId, params: &ModelParams) -> Result<Vec<EquilibriumRecord>> {
    find_all_with(topo, params, DEFAULT_STARTS, 0)
}

pub fn find_all_with(topo: TopologyId, params: &ModelParams, n_starts: usize, seed: u64) -> Result<Vec<EquilibriumRecord>> {
    let closed = closed_form_equilibria(topo, params)?;
    let brute = brute_force_equilibria(params, n_starts, seed, 1e-12);
    let mut claimed = vec![false; brute.len()];
    let mut out = Vec::with_capacity(closed.len() + brute.len());

    for mut rec in closed {
        if rec.feasible {
            if let Some(p) = polish(params, &rec.point, 1e-12) {
                rec.point = p;
            }
            rec.residual = params.residual(&rec.point);
            let hit = brute
                .iter()
                .enumerate()
                .filter(|(_, b)| distance(&b.point, &rec.point) < DEDUP_DIST)
                .min_by(|a, b| {
                    distance(&a.1.point, &rec.point)
                        .partial_cmp(&distance(&b.1.point, &rec.point))
                        .unwrap()
                });
            match hit {
                Some((i, _)) => claimed[i] = true,
                None => {
                    return Err(Error::Consistency {
                        label: rec.label.to_string(),
                        point: rec.point,
                    })
                }
            }
        }
        out.push(rec);
    }

    let has_coex = out.iter().any(|r| r.label == EqLabel::Coex && r.feasible);
    for (i, b) in brute.iter().enumerate() {
        if claimed[i] {
            continue;
        }
        if out.iter().any(|r| r.feasible && distance(&r.point, &b.point) < DEDUP_DIST) {
            continue;
        }
        let mut rec = *b;
        if rec.is_interior() && !has_coex {
            rec.label = EqLabel::Coex;
        }
        out.push(rec);
    }
    Ok(out)
}
