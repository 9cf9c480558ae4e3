//! Geometric construction of the coexistence point of the fully connected
//! model.
//!
//! Fixing `P3 = h`, the first two balances become two parabolae in the
//! `(P1, P2)` plane whose feasible branches cross exactly once, at `Q_h`.
//! As `h` varies, `Q_h` traces a curve; the equilibrium is where that curve
//! meets the nonnegative root surface `P3 = S(P1, P2)` of the third balance,
//! i.e. the zero of `g(h) = S(Q_h) - h`.

use super::{EqLabel, EquilibriumRecord};
use crate::error::{Error, Result};
use crate::model::{ModelParams, Vec3};
use crate::solve::{logistic_root, TwoPatch};

/// `Q_h`: crossing of the feasible branches at height `h`, origin if none.
pub fn crossing_at_height(params: &ModelParams, h: f64) -> (f64, f64) {
    TwoPatch::from_params(params, 0, 1, params.rate(0, 2) * h, params.rate(1, 2) * h)
        .solve()
        .unwrap_or((0.0, 0.0))
}

/// Nonnegative branch of the third balance solved for `P3`.
pub fn upper_surface(params: &ModelParams, p1: f64, p2: f64) -> f64 {
    let (r3, k3) = (params.r()[2], params.k()[2]);
    logistic_root(
        r3 / k3,
        r3 - params.outflow(2),
        params.rate(2, 1) * p2 + params.rate(2, 0) * p1,
    )
}

fn gap(params: &ModelParams, h: f64) -> (f64, (f64, f64)) {
    let q = crossing_at_height(params, h);
    (upper_surface(params, q.0, q.1) - h, q)
}

/// Returns the equilibrium and the height `h*` at which it was found.
pub fn coexistence_by_construction(params: &ModelParams, h_tol: f64) -> Result<(EquilibriumRecord, f64)> {
    for (name, (i, j)) in [("m13", (0, 2)), ("m23", (1, 2)), ("m12", (0, 1)), ("m21", (1, 0))] {
        if !(params.rate(i, j) > 0.0) {
            return Err(Error::Precondition(format!("{name} must be positive for the construction")));
        }
    }
    if !(h_tol > 0.0) {
        return Err(Error::Precondition("h_tol must be positive".into()));
    }
    let top = 10.0 * params.max_k();
    let (g_top, _) = gap(params, top);
    if !(g_top < 0.0) {
        return Err(Error::BracketFailure(top));
    }
    let mut lo = 0.0;
    let (g0, _) = gap(params, 0.0);
    if !(g0 > 0.0) {
        // g(0) = 0 at the origin; look for the positive side just above it
        lo = f64::NAN;
        let mut h = top;
        for _ in 0..1100 {
            h *= 0.5;
            if h == 0.0 {
                break;
            }
            if gap(params, h).0 > 0.0 {
                lo = h;
                break;
            }
        }
        if lo.is_nan() {
            return Err(Error::BracketFailure(top));
        }
    }
    let mut hi = top;
    while hi - lo > h_tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if gap(params, mid).0 > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let h = 0.5 * (lo + hi);
    let (_, (p1, p2)) = gap(params, h);
    let point: Vec3 = [p1, p2, upper_surface(params, p1, p2)];
    let rec = EquilibriumRecord::new(params, EqLabel::Coex, point, true);
    Ok((rec, h))
}

/// The construction's point alone.
pub fn construction_point(params: &ModelParams, h_tol: f64) -> Result<EquilibriumRecord> {
    coexistence_by_construction(params, h_tol).map(|(rec, _)| rec)
}
