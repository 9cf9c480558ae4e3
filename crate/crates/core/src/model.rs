//! The three-patch logistic model with inter-patch migration.
//!
//! Each patch grows logistically with rate `r[i]` and capacity `k[i]`.
//! Migration is linear in the population of the patch being left:
//! `m[i][j]` is the per-capita rate from patch `j` INTO patch `i`, so the
//! same term appears with a plus sign in equation `i` and a minus sign in
//! equation `j`. Indices are zero-based here; the parameter tokens
//! (`m12`, `r3`, ...) are one-based.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Most negative component a state may have before it is rejected.
pub const STATE_NEG_TOL: f64 = 1e-12;

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    r: Vec3,
    k: Vec3,
    m: Mat3,
}

impl ModelParams {
    /// Validated constructor. Every violated invariant is listed in the error.
    pub fn new(r: Vec3, k: Vec3, m: Mat3) -> Result<Self> {
        let mut problems = Vec::new();
        for i in 0..3 {
            if !(r[i] > 0.0) || !r[i].is_finite() {
                problems.push(format!("r{} must be positive and finite (got {})", i + 1, r[i]));
            }
            if !(k[i] > 0.0) || !k[i].is_finite() {
                problems.push(format!("k{} must be positive and finite (got {})", i + 1, k[i]));
            }
            for j in 0..3 {
                if i == j {
                    if m[i][i] != 0.0 {
                        problems.push(format!("m{}{} must be zero (got {})", i + 1, i + 1, m[i][i]));
                    }
                } else if !(m[i][j] >= 0.0) || !m[i][j].is_finite() {
                    problems.push(format!(
                        "m{}{} must be nonnegative and finite (got {})",
                        i + 1,
                        j + 1,
                        m[i][j]
                    ));
                }
            }
        }
        if problems.is_empty() {
            Ok(Self { r, k, m })
        } else {
            Err(Error::InvalidParams(problems))
        }
    }

    /// Skips validation. Only meant for probing the vector field outside the
    /// biological domain (e.g. `r = 0` to isolate the migration terms).
    pub fn new_unchecked(r: Vec3, k: Vec3, m: Mat3) -> Self {
        Self { r, k, m }
    }

    /// Decoupled patches (no migration).
    pub fn decoupled(r: Vec3, k: Vec3) -> Result<Self> {
        Self::new(r, k, [[0.0; 3]; 3])
    }

    pub fn r(&self) -> &Vec3 {
        &self.r
    }

    pub fn k(&self) -> &Vec3 {
        &self.k
    }

    pub fn m(&self) -> &Mat3 {
        &self.m
    }

    /// Rate into patch `into` from patch `from` (zero-based).
    pub fn rate(&self, into: usize, from: usize) -> f64 {
        self.m[into][from]
    }

    /// Total per-capita outflow from patch `j`.
    pub fn outflow(&self, j: usize) -> f64 {
        (0..3).filter(|&i| i != j).map(|i| self.m[i][j]).sum()
    }

    pub fn get(&self, p: ParamName) -> f64 {
        match p {
            ParamName::R(i) => self.r[i],
            ParamName::K(i) => self.k[i],
            ParamName::M(i, j) => self.m[i][j],
        }
    }

    /// Copy with one parameter replaced. No validation.
    pub fn with(&self, p: ParamName, value: f64) -> Self {
        let mut out = *self;
        match p {
            ParamName::R(i) => out.r[i] = value,
            ParamName::K(i) => out.k[i] = value,
            ParamName::M(i, j) => out.m[i][j] = value,
        }
        out
    }

    pub fn with_rate(&self, into: usize, from: usize, value: f64) -> Self {
        self.with(ParamName::M(into, from), value)
    }

    /// Relabel patches: patch `i` of `self` becomes patch `perm[i]` of the result.
    pub fn permuted(&self, perm: [usize; 3]) -> Self {
        let mut out = *self;
        for i in 0..3 {
            out.r[perm[i]] = self.r[i];
            out.k[perm[i]] = self.k[i];
            for j in 0..3 {
                out.m[perm[i]][perm[j]] = self.m[i][j];
            }
        }
        out
    }

    pub fn max_k(&self) -> f64 {
        self.k.iter().cloned().fold(f64::MIN, f64::max)
    }

    /// Right-hand side without any checks; the hot path for the solvers.
    #[inline]
    pub fn field(&self, p: &Vec3) -> Vec3 {
        let mut out = [0.0; 3];
        for i in 0..3 {
            let mut v = self.r[i] * p[i] * (1.0 - p[i] / self.k[i]);
            for j in 0..3 {
                if j != i {
                    v += self.m[i][j] * p[j] - self.m[j][i] * p[i];
                }
            }
            out[i] = v;
        }
        out
    }

    #[inline]
    pub fn field_jacobian(&self, p: &Vec3) -> Mat3 {
        let mut jac = self.m;
        for i in 0..3 {
            jac[i][i] = self.r[i] - 2.0 * self.r[i] * p[i] / self.k[i] - self.outflow(i);
        }
        jac
    }

    pub fn residual(&self, p: &Vec3) -> f64 {
        max_norm(&self.field(p))
    }
}

/// Tokens r1..r3, k1..k3, m12, m13, m21, m23, m31, m32.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ParamName {
    R(usize),
    K(usize),
    M(usize, usize),
}

impl ParamName {
    pub const ALL: [ParamName; 12] = [
        ParamName::R(0),
        ParamName::R(1),
        ParamName::R(2),
        ParamName::K(0),
        ParamName::K(1),
        ParamName::K(2),
        ParamName::M(0, 1),
        ParamName::M(0, 2),
        ParamName::M(1, 0),
        ParamName::M(1, 2),
        ParamName::M(2, 0),
        ParamName::M(2, 1),
    ];

    /// Whether `value` is inside the domain of this parameter.
    pub fn admits(&self, value: f64) -> bool {
        match self {
            ParamName::R(_) | ParamName::K(_) => value > 0.0 && value.is_finite(),
            ParamName::M(..) => value >= 0.0 && value.is_finite(),
        }
    }
}

impl fmt::Display for ParamName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamName::R(i) => write!(f, "r{}", i + 1),
            ParamName::K(i) => write!(f, "k{}", i + 1),
            ParamName::M(i, j) => write!(f, "m{}{}", i + 1, j + 1),
        }
    }
}

impl FromStr for ParamName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ParamName::ALL
            .iter()
            .find(|p| p.to_string() == s)
            .copied()
            .ok_or_else(|| Error::UnknownToken(s.to_string()))
    }
}

impl Serialize for ParamName {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ParamName {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Populations of the three patches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelState(pub Vec3);

impl ModelState {
    pub fn new(p: Vec3) -> Result<Self> {
        let s = Self(p);
        s.check()?;
        Ok(s)
    }

    fn check(&self) -> Result<()> {
        for (i, &v) in self.0.iter().enumerate() {
            if !v.is_finite() || v < -STATE_NEG_TOL {
                return Err(Error::Domain(format!("P{} = {v} is outside the nonnegative orthant", i + 1)));
            }
        }
        Ok(())
    }
}

impl From<Vec3> for ModelState {
    fn from(p: Vec3) -> Self {
        Self(p)
    }
}

/// `Π_i = r_i (1 - 2 P_i / k_i)`, the linearised logistic term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthTerm {
    pub pi: Vec3,
}

fn check_inputs(params: &ModelParams, state: &ModelState) -> Result<()> {
    for (i, &k) in params.k.iter().enumerate() {
        if !(k > 0.0) {
            return Err(Error::Domain(format!("k{} = {k} must be positive", i + 1)));
        }
    }
    state.check()
}

pub fn rhs(params: &ModelParams, state: &ModelState) -> Result<Vec3> {
    check_inputs(params, state)?;
    Ok(params.field(&state.0))
}

pub fn jacobian(params: &ModelParams, state: &ModelState) -> Result<Mat3> {
    check_inputs(params, state)?;
    Ok(params.field_jacobian(&state.0))
}

pub fn growth_terms(params: &ModelParams, state: &ModelState) -> Result<GrowthTerm> {
    check_inputs(params, state)?;
    let p = &state.0;
    let mut pi = [0.0; 3];
    for i in 0..3 {
        pi[i] = params.r[i] * (1.0 - 2.0 * p[i] / params.k[i]);
    }
    Ok(GrowthTerm { pi })
}

pub fn max_norm(v: &Vec3) -> f64 {
    v.iter().fold(0.0_f64, |a, x| a.max(x.abs()))
}

pub fn distance(a: &Vec3, b: &Vec3) -> f64 {
    (0..3).map(|i| (a[i] - b[i]).powi(2)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(rate: f64) -> ModelParams {
        let mut m = [[rate; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 0.0;
        }
        ModelParams::new([1.0; 3], [1.0; 3], m).unwrap()
    }

    #[test]
    fn origin_is_fixed() {
        let p = sym(0.3);
        assert_eq!(rhs(&p, &ModelState([0.0; 3])).unwrap(), [0.0; 3]);
    }

    #[test]
    fn decoupled_capacity_is_fixed() {
        let p = ModelParams::decoupled([1.0; 3], [1.0; 3]).unwrap();
        assert_eq!(rhs(&p, &ModelState([1.0; 3])).unwrap(), [0.0; 3]);
    }

    #[test]
    fn index_convention_into_from() {
        // m21 = rate into patch 2 from patch 1.
        let mut m = [[0.0; 3]; 3];
        m[1][0] = 1.0;
        let p = ModelParams::new_unchecked([0.0; 3], [1.0; 3], m);
        let f = rhs(&p, &ModelState([2.0, 0.0, 0.0])).unwrap();
        assert_eq!(f, [-2.0, 2.0, 0.0]);
        assert_eq!(f.iter().sum::<f64>(), 0.0);
    }

    #[test]
    fn jacobian_at_origin_without_migration() {
        let p = ModelParams::decoupled([0.5, 1.5, 2.5], [1.0, 2.0, 3.0]).unwrap();
        let j = jacobian(&p, &ModelState([0.0; 3])).unwrap();
        assert_eq!(j, [[0.5, 0.0, 0.0], [0.0, 1.5, 0.0], [0.0, 0.0, 2.5]]);
    }

    #[test]
    fn jacobian_symmetric_hand_value() {
        let j = jacobian(&sym(0.1), &ModelState([1.0; 3])).unwrap();
        for (i, row) in j.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                let want = if i == c { -1.2 } else { 0.1 };
                assert!((v - want).abs() < 1e-15, "J[{i}][{c}] = {v}");
            }
        }
    }

    #[test]
    fn growth_terms_cases() {
        let p = ModelParams::decoupled([2.0, 1.0, 3.0], [1.0, 1.0, 1.0]).unwrap();
        assert_eq!(growth_terms(&p, &ModelState([0.0; 3])).unwrap().pi, [2.0, 1.0, 3.0]);
        assert_eq!(growth_terms(&p, &ModelState([1.0; 3])).unwrap().pi, [-2.0, -1.0, -3.0]);
        assert_eq!(growth_terms(&p, &ModelState([0.5; 3])).unwrap().pi, [0.0; 3]);
    }

    #[test]
    fn validation_lists_every_problem() {
        let mut m = [[0.0; 3]; 3];
        m[0][1] = -1.0;
        m[2][2] = 1.0;
        match ModelParams::new([0.0, 1.0, 1.0], [1.0, -2.0, 1.0], m) {
            Err(Error::InvalidParams(v)) => assert_eq!(v.len(), 4, "{v:?}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn nonpositive_capacity_is_a_domain_error() {
        let p = ModelParams::new_unchecked([1.0; 3], [1.0, 0.0, 1.0], [[0.0; 3]; 3]);
        assert!(matches!(rhs(&p, &ModelState([0.1; 3])), Err(Error::Domain(_))));
    }

    #[test]
    fn slightly_negative_states() {
        assert!(ModelState::new([-1e-13, 0.0, 1.0]).is_ok());
        assert!(ModelState::new([-1e-9, 0.0, 1.0]).is_err());
    }

    #[test]
    fn param_tokens_round_trip() {
        for p in ParamName::ALL {
            assert_eq!(p.to_string().parse::<ParamName>().unwrap(), p);
        }
        assert_eq!(ParamName::M(0, 1).to_string(), "m12");
        assert!("m11".parse::<ParamName>().is_err());
    }

    #[test]
    fn permutation_relabels_rates() {
        let mut m = [[0.0; 3]; 3];
        m[1][0] = 0.7; // 1 -> 2
        let p = ModelParams::new([1.0, 2.0, 3.0], [4.0, 5.0, 6.0], m).unwrap();
        // 0 -> 2, 1 -> 0, 2 -> 1
        let q = p.permuted([2, 0, 1]);
        assert_eq!(q.r(), &[2.0, 3.0, 1.0]);
        assert_eq!(q.rate(0, 2), 0.7);
    }
}
