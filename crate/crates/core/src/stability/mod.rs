//! Local stability of equilibria.
//!
//! Eigenvalues of the 3x3 Jacobian are the ground truth. Next to them every
//! report carries the coefficient sign test (`tr < 0, M_J > 0, det < 0`),
//! the full Routh-Hurwitz test, and the closed-form criteria that apply to
//! the equilibrium, so disagreements are visible.

mod cubic;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use cubic::cubic_roots;

use crate::conditions::{topology_conditions, stability_conjunction, ConditionRow};
use crate::equilibria::{EquilibriumRecord, EMIT_RESIDUAL};
use crate::error::{Error, Result};
use crate::model::{Mat3, ModelParams};
use crate::sampling::ParamSampler;
use crate::topology::TopologyId;

/// Characteristic polynomial `λ³ − trace·λ² + m_j·λ − det`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicCoefficients {
    pub trace: f64,
    /// Sum of the three principal 2x2 minors.
    pub m_j: f64,
    pub det: f64,
}

impl CharacteristicCoefficients {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        ((z - self.trace) * z + self.m_j) * z - self.det
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Classification {
    Stable,
    Unstable,
    Marginal,
}

impl Classification {
    pub fn token(&self) -> &'static str {
        match self {
            Classification::Stable => "STABLE",
            Classification::Unstable => "UNSTABLE",
            Classification::Marginal => "MARGINAL",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignTest {
    pub trace_negative: bool,
    pub minors_positive: bool,
    pub det_negative: bool,
}

impl SignTest {
    pub fn all(&self) -> bool {
        self.trace_negative && self.minors_positive && self.det_negative
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    /// Sorted by real part, largest first.
    pub eigenvalues: [Complex64; 3],
    pub coefficients: CharacteristicCoefficients,
    pub classification: Classification,
    pub sign_test: SignTest,
    pub routh_hurwitz: bool,
    pub conditions: Vec<ConditionRow>,
    /// Conjunction of the stability rows, if any apply.
    pub conditions_verdict: Option<bool>,
}

impl StabilityReport {
    pub fn leading(&self) -> Complex64 {
        self.eigenvalues[0]
    }
}

pub fn characteristic(j: &Mat3) -> CharacteristicCoefficients {
    let trace = j[0][0] + j[1][1] + j[2][2];
    let m_j = (j[0][0] * j[1][1] - j[0][1] * j[1][0])
        + (j[0][0] * j[2][2] - j[0][2] * j[2][0])
        + (j[1][1] * j[2][2] - j[1][2] * j[2][1]);
    let det = j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1]) - j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0])
        + j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0]);
    CharacteristicCoefficients { trace, m_j, det }
}

pub fn eigenvalues_3x3(j: &Mat3) -> [Complex64; 3] {
    let c = characteristic(j);
    let mut roots = cubic_roots(-c.trace, c.m_j, -c.det);
    roots.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    roots
}

pub fn sign_conditions(c: &CharacteristicCoefficients) -> SignTest {
    SignTest {
        trace_negative: c.trace < 0.0,
        minors_positive: c.m_j > 0.0,
        det_negative: c.det < 0.0,
    }
}

/// All roots in the open left half-plane: `-tr > 0`, `-det > 0` and
/// `(-tr)·m_j > -det`.
pub fn routh_hurwitz(c: &CharacteristicCoefficients) -> bool {
    -c.trace > 0.0 && -c.det > 0.0 && (-c.trace) * c.m_j > -c.det
}

/// Half-width of the band around the imaginary axis treated as marginal.
pub fn marginal_band(eigs: &[Complex64; 3]) -> f64 {
    let scale = eigs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    (1e-9 * scale).max(1e-12)
}

pub fn classify_eigenvalues(eigs: &[Complex64; 3]) -> Classification {
    let band = marginal_band(eigs);
    if eigs.iter().all(|z| z.re < -band) {
        Classification::Stable
    } else if eigs.iter().any(|z| z.re > band) {
        Classification::Unstable
    } else {
        Classification::Marginal
    }
}

pub fn classify(topo: TopologyId, eq: &EquilibriumRecord, params: &ModelParams) -> Result<StabilityReport> {
    if !(eq.residual <= EMIT_RESIDUAL) {
        return Err(Error::StaleEquilibrium(eq.residual));
    }
    let jac = params.field_jacobian(&eq.point);
    let coefficients = characteristic(&jac);
    let eigenvalues = eigenvalues_3x3(&jac);
    let rows = topology_conditions(topo, eq.label, params, &eq.point);
    let conditions_verdict = stability_conjunction(&rows);
    Ok(StabilityReport {
        eigenvalues,
        coefficients,
        classification: classify_eigenvalues(&eigenvalues),
        sign_test: sign_conditions(&coefficients),
        routh_hurwitz: routh_hurwitz(&coefficients),
        conditions: rows.unwrap_or_default(),
        conditions_verdict,
    })
}

/// Random search for parameters that make the origin STABLE under `topo`.
pub fn origin_never_stable_scan(topo: TopologyId, n_draws: usize, seed: u64) -> Option<ModelParams> {
    let mut sampler = ParamSampler::new(seed);
    (0..n_draws.max(1)).map(|_| sampler.draw_for(topo)).find(|p| {
        let eigs = eigenvalues_3x3(&p.field_jacobian(&[0.0; 3]));
        classify_eigenvalues(&eigs) == Classification::Stable
    })
}
