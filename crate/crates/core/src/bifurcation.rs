//! Transcritical thresholds, the Hopf candidate of the receiving-hub
//! topology, and one-parameter sweeps with eigenvalue-crossing detection.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibria::{closed_form_equilibria, find_all_equilibria, polish, EqLabel, EquilibriumRecord, EMIT_RESIDUAL};
use crate::error::{Error, Result};
use crate::model::{distance, ModelParams, ParamName, Vec3};
use crate::stability::{classify, eigenvalues_3x3, StabilityReport};
use crate::topology::{apply_topology, TopologyId};

/// Bisection stops once the bracket is this narrow.
pub const CROSSING_TOL: f64 = 1e-10;
/// Imaginary parts below this make a crossing `REAL_ZERO`.
pub const REAL_CROSSING_IM: f64 = 1e-8;
/// Two equilibria closer than this at a crossing are exchanging.
pub const COINCIDENCE_DIST: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub param: ParamName,
    pub value: f64,
    pub pair: (EqLabel, EqLabel),
}

/// Zero-eigenvalue loci where two equilibria exchange stability or
/// feasibility. Strongly connected topologies have none.
pub fn transcritical_thresholds(topo: TopologyId, params: &ModelParams) -> Vec<Threshold> {
    use EqLabel::*;
    use ParamName::R;
    let p = apply_topology(params, topo);
    let m = |i, j| p.rate(i, j);
    let r = *p.r();
    let t = |param, value, pair| Threshold { param, value, pair };
    match topo {
        TopologyId::Ex6 => {
            let r2 = m(0, 1) + m(2, 1);
            vec![t(R(1), r2, (I2, Coex)), t(R(1), r2, (I3, Coex)), t(R(2), m(0, 2), (I2, I3))]
        }
        TopologyId::Ex7 | TopologyId::Ex7New => vec![t(R(1), m(0, 1) + m(2, 1), (Q1, Coex))],
        TopologyId::Diverge => vec![t(R(1), m(0, 1) + m(2, 1), (Z3, Coex))],
        TopologyId::Chain => vec![t(R(0), m(1, 0), (W3, Coex)), t(R(1), m(2, 1), (W2, W3))],
        TopologyId::Converge => vec![
            t(R(0), m(1, 0), (X1, X2)),
            t(R(0), m(1, 0), (Y3, Coex)),
            t(R(2), m(1, 2), (X1, Y3)),
            t(R(2), m(1, 2), (X2, Coex)),
        ],
        TopologyId::Ex8 => {
            // det = 0 of the {2,3} block at the origin, solved for r2
            let b = r[2] - m(0, 2) - m(1, 2);
            if b < 0.0 {
                vec![t(R(1), m(0, 1) + m(2, 1) + m(1, 2) * m(2, 1) / b, (M2Ex8, Coex))]
            } else {
                Vec::new()
            }
        }
        TopologyId::Ex2New => {
            // det = 0 of the {1,3} block at the origin, solved for r1
            let b = r[2] - m(0, 2) - m(1, 2);
            if b < 0.0 {
                vec![t(R(0), m(2, 0) + m(0, 2) * m(2, 0) / b, (XEx2n, Coex))]
            } else {
                Vec::new()
            }
        }
        TopologyId::Full | TopologyId::Ex2 | TopologyId::Hub0 | TopologyId::Ex3 | TopologyId::Ex1 => Vec::new(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum HopfValidity {
    Genuine,
    Degenerate,
}

impl HopfValidity {
    pub fn token(&self) -> &'static str {
        match self {
            HopfValidity::Genuine => "GENUINE",
            HopfValidity::Degenerate => "DEGENERATE",
        }
    }
}

/// Trace-zero value `r2‡ = m13 + m23 + m32 + m12 − r3` of the {2,3} block
/// at `(k1, 0, 0)`, and whether the block determinant is positive there
/// (a complex pair actually crosses).
pub fn hopf_candidate(params: &ModelParams) -> (f64, HopfValidity) {
    let p = apply_topology(params, TopologyId::Ex8);
    let r2 = p.rate(0, 2) + p.rate(1, 2) + p.rate(2, 1) + p.rate(0, 1) - p.r()[2];
    if !(r2 > 0.0) {
        return (r2, HopfValidity::Degenerate);
    }
    let at = p.with(ParamName::R(1), r2);
    let j = at.field_jacobian(&[at.k()[0], 0.0, 0.0]);
    let det = j[1][1] * j[2][2] - j[1][2] * j[2][1];
    let validity = if det > 0.0 {
        HopfValidity::Genuine
    } else {
        HopfValidity::Degenerate
    };
    (r2, validity)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CrossingKind {
    RealZero,
    ComplexPair,
}

impl CrossingKind {
    pub fn token(&self) -> &'static str {
        match self {
            CrossingKind::RealZero => "REAL_ZERO",
            CrossingKind::ComplexPair => "COMPLEX_PAIR",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub label: EqLabel,
    /// Index into the eigenvalues sorted by real part, largest first.
    pub eigen_index: usize,
    pub kind: CrossingKind,
    pub param_value: f64,
    pub point: Vec3,
    /// The crossing eigenvalue at `param_value`.
    pub eigenvalue: Complex64,
    /// Another equilibrium within `COINCIDENCE_DIST` at the crossing.
    pub partner: Option<EqLabel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub param_name: ParamName,
    pub param_value: f64,
    pub equilibria: Vec<EquilibriumRecord>,
    /// Aligned with `equilibria`; `None` where the point is not an
    /// equilibrium to classification accuracy.
    pub reports: Vec<Option<StabilityReport>>,
    /// Crossings refined inside `[param_value, next grid value]`.
    pub crossings: Vec<Crossing>,
}

struct Sweeper<'a> {
    topo: TopologyId,
    base: &'a ModelParams,
    param: ParamName,
}

impl Sweeper<'_> {
    fn at(&self, v: f64) -> ModelParams {
        apply_topology(&self.base.with(self.param, v), self.topo)
    }

    fn grid_point(&self, v: f64) -> Result<SweepRecord> {
        let p = self.at(v);
        let equilibria = find_all_equilibria(self.topo, &p)?;
        let reports = equilibria
            .iter()
            .map(|e| classify(self.topo, e, &p).ok())
            .collect();
        Ok(SweepRecord {
            param_name: self.param,
            param_value: v,
            equilibria,
            reports,
            crossings: Vec::new(),
        })
    }

    /// Equilibrium `label` continued to parameter `v` from `guess`.
    fn continue_to(&self, v: f64, label: EqLabel, guess: &Vec3) -> Option<Vec3> {
        let p = self.at(v);
        if label != EqLabel::Numerical {
            let closed = closed_form_equilibria(self.topo, &p).ok()?;
            if let Some(rec) = closed.iter().find(|r| r.label == label && r.point.iter().all(|x| x.is_finite())) {
                let point = polish(&p, &rec.point, 1e-13).unwrap_or(rec.point);
                if p.residual(&point) <= EMIT_RESIDUAL {
                    return Some(point);
                }
            }
        }
        polish(&p, guess, 1e-13)
    }

    fn eig_re(&self, v: f64, label: EqLabel, guess: &Vec3, index: usize) -> Option<(f64, Vec3)> {
        let point = self.continue_to(v, label, guess)?;
        let eig = eigenvalues_3x3(&self.at(v).field_jacobian(&point));
        Some((eig[index].re, point))
    }

    fn refine(&self, lo: (f64, &Vec3), hi: (f64, &Vec3), label: EqLabel, index: usize, lo_positive: bool) -> Option<Crossing> {
        let (mut a, mut b) = (lo.0, hi.0);
        let (pa, pb) = (*lo.1, *hi.1);
        let interp = |v: f64| -> Vec3 {
            let s = (v - lo.0) / (hi.0 - lo.0);
            [0, 1, 2].map(|i| pa[i] + s * (pb[i] - pa[i]))
        };
        for _ in 0..200 {
            if b - a <= CROSSING_TOL {
                break;
            }
            let mid = 0.5 * (a + b);
            let (re, _) = self.eig_re(mid, label, &interp(mid), index)?;
            if (re >= 0.0) == lo_positive {
                a = mid;
            } else {
                b = mid;
            }
        }
        let v = 0.5 * (a + b);
        let point = self.continue_to(v, label, &interp(v))?;
        let p = self.at(v);
        let eig = eigenvalues_3x3(&p.field_jacobian(&point));
        let kind = if eig[index].im.abs() < REAL_CROSSING_IM {
            CrossingKind::RealZero
        } else {
            CrossingKind::ComplexPair
        };
        let partner = closed_form_equilibria(self.topo, &p)
            .ok()
            .and_then(|recs| {
                recs.into_iter()
                    .filter(|r| r.label != label && r.point.iter().all(|x| x.is_finite()))
                    .map(|r| (distance(&r.point, &point), r.label))
                    .filter(|(d, _)| *d < COINCIDENCE_DIST)
                    .min_by(|x, y| x.0.total_cmp(&y.0))
            })
            .map(|(_, l)| l);
        Some(Crossing {
            label,
            eigen_index: index,
            kind,
            param_value: v,
            point,
            eigenvalue: eig[index],
            partner,
        })
    }

    fn crossings_between(&self, left: &SweepRecord, right: &SweepRecord) -> Vec<Crossing> {
        let mut out = Vec::new();
        let tracked: Vec<usize> = (0..left.equilibria.len())
            .filter(|&i| left.equilibria[i].feasible && left.reports[i].is_some())
            .collect();
        for &i in &tracked {
            let e = &left.equilibria[i];
            let Some(j) = match_next(left, i, right) else {
                continue;
            };
            let (Some(ra), Some(rb)) = (&left.reports[i], &right.reports[j]) else {
                continue;
            };
            for index in 0..3 {
                let (a, b) = (ra.eigenvalues[index].re, rb.eigenvalues[index].re);
                if (a >= 0.0) != (b >= 0.0) {
                    let lo = (left.param_value, &e.point);
                    let hi = (right.param_value, &right.equilibria[j].point);
                    if let Some(c) = self.refine(lo, hi, e.label, index, a >= 0.0) {
                        out.push(c);
                    }
                }
            }
        }
        out
    }
}

/// Index in `right` continuing equilibrium `i` of `left`.
fn match_next(left: &SweepRecord, i: usize, right: &SweepRecord) -> Option<usize> {
    let e = &left.equilibria[i];
    let usable = |j: &usize| right.equilibria[*j].feasible && right.reports[*j].is_some();
    if e.label != EqLabel::Numerical {
        return (0..right.equilibria.len()).filter(usable).find(|&j| right.equilibria[j].label == e.label);
    }
    let spacing = left
        .equilibria
        .iter()
        .enumerate()
        .filter(|(k, o)| *k != i && o.feasible)
        .map(|(_, o)| distance(&o.point, &e.point))
        .fold(f64::INFINITY, f64::min);
    let cap = 0.5 * spacing;
    (0..right.equilibria.len())
        .filter(usable)
        .filter(|&j| right.equilibria[j].label == EqLabel::Numerical)
        .map(|j| (distance(&right.equilibria[j].point, &e.point), j))
        .filter(|(d, _)| *d < cap)
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, j)| j)
}

/// Grid sweep of one parameter over `[lo, hi]` with `steps` values.
pub fn sweep(
    topo: TopologyId,
    params: &ModelParams,
    param: ParamName,
    lo: f64,
    hi: f64,
    steps: usize,
) -> Result<Vec<SweepRecord>> {
    if !(lo < hi) || !param.admits(lo) || !param.admits(hi) || !hi.is_finite() {
        return Err(Error::SweepRange { param, lo, hi });
    }
    if steps < 2 {
        return Err(Error::Precondition("steps must be at least 2".into()));
    }
    if let ParamName::M(i, j) = param {
        if !topo.arcs().has_rate(i, j) {
            return Err(Error::Precondition(format!("{param} is fixed at zero by {topo}")));
        }
    }
    let sweeper = Sweeper { topo, base: params, param };
    let grid: Vec<f64> = (0..steps)
        .map(|i| if i + 1 == steps { hi } else { lo + (hi - lo) * i as f64 / (steps - 1) as f64 })
        .collect();
    let mut records = grid
        .par_iter()
        .map(|&v| sweeper.grid_point(v))
        .collect::<Result<Vec<_>>>()?;
    for i in 0..records.len() - 1 {
        let found = sweeper.crossings_between(&records[i], &records[i + 1]);
        records[i].crossings = found;
    }
    Ok(records)
}
