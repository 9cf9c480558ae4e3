//! Scalar and small-system solvers shared by the equilibrium routines.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{max_norm, ModelParams, Vec3};

/// Condition-number estimate above which the Newton system counts as singular.
pub const MAX_CONDITION: f64 = 1e14;

/// Nonnegative root of `a y^2 - b y - c = 0` with `a > 0`, `c >= 0`.
///
/// This is the feasible branch of a logistic balance `r y (1 - y/k) - L y + c = 0`
/// written with `a = r/k`, `b = r - L`. Returns NaN when `c < 0` makes the
/// roots complex.
pub fn logistic_root(a: f64, b: f64, c: f64) -> f64 {
    let disc = b * b + 4.0 * a * c;
    if disc < 0.0 {
        return f64::NAN;
    }
    let s = disc.sqrt();
    if b >= 0.0 {
        (b + s) / (2.0 * a)
    } else if s - b > 0.0 {
        2.0 * c / (s - b)
    } else {
        0.0
    }
}

/// Two coupled logistic patches `x`, `y` with constant external inflows:
///
/// ```text
/// rx x (1 - x/kx) - lx x + ixy y + cx = 0
/// ry y (1 - y/ky) - ly y + iyx x + cy = 0
/// ```
///
/// All rates, losses, couplings and inflows are nonnegative.
#[derive(Debug, Clone, Copy)]
pub struct TwoPatch {
    pub rx: f64,
    pub kx: f64,
    pub lx: f64,
    pub ixy: f64,
    pub cx: f64,
    pub ry: f64,
    pub ky: f64,
    pub ly: f64,
    pub iyx: f64,
    pub cy: f64,
}

impl TwoPatch {
    /// Patches `a` and `b` of the full model with `inflow_*` standing in for
    /// the contribution of the third patch.
    pub fn from_params(params: &ModelParams, a: usize, b: usize, inflow_a: f64, inflow_b: f64) -> Self {
        TwoPatch {
            rx: params.r()[a],
            kx: params.k()[a],
            lx: params.outflow(a),
            ixy: params.rate(a, b),
            cx: inflow_a,
            ry: params.r()[b],
            ky: params.k()[b],
            ly: params.outflow(b),
            iyx: params.rate(b, a),
            cy: inflow_b,
        }
    }

    /// `y` on the feasible branch of the second balance, as a function of `x`.
    pub fn y_of_x(&self, x: f64) -> f64 {
        logistic_root(self.ry / self.ky, self.ry - self.ly, self.iyx * x + self.cy)
    }

    fn h(&self, x: f64) -> f64 {
        self.rx * x * (1.0 - x / self.kx) - self.lx * x + self.ixy * self.y_of_x(x) + self.cx
    }

    /// Whether a solution with `x > 0` exists. `h(x)/x` is strictly
    /// decreasing, so this is the sign of its limit at `0+`.
    fn has_positive_root(&self) -> bool {
        if self.cx > 0.0 {
            return true;
        }
        let y0 = self.y_of_x(0.0);
        if self.ixy > 0.0 && y0 > 0.0 {
            return true;
        }
        let b = self.ry - self.ly;
        let coupling = if self.ixy == 0.0 || self.iyx == 0.0 {
            0.0
        } else if b < 0.0 {
            self.ixy * self.iyx / (-b)
        } else {
            // y grows like sqrt(x): infinite slope at the origin
            f64::INFINITY
        };
        self.rx - self.lx + coupling > 0.0
    }

    /// The unique solution with `x > 0`, if any, by bisection on `h`.
    pub fn solve(&self) -> Option<(f64, f64)> {
        if !self.has_positive_root() {
            return None;
        }
        let mut hi = self.kx.max(1.0);
        let mut guard = 0;
        while self.h(hi) >= 0.0 {
            hi *= 2.0;
            guard += 1;
            if guard > 200 {
                return None;
            }
        }
        let mut lo = 0.0_f64;
        for _ in 0..2000 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.h(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let x = 0.5 * (lo + hi);
        if x <= 0.0 {
            return None;
        }
        Some((x, self.y_of_x(x)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOutcome {
    pub point: Vec3,
    /// Max-norm of the full right-hand side at `point`.
    pub residual: f64,
    pub iterations: usize,
}

/// Damped Newton on the components flagged in `free`; the others are held at
/// zero. Steps that would leave the open positive orthant (on the free
/// components) are halved until they stay inside, then backtracked on the
/// residual norm.
pub fn newton(params: &ModelParams, start: &Vec3, free: [bool; 3], tol: f64, max_iter: usize) -> Result<NewtonOutcome> {
    let idx: Vec<usize> = (0..3).filter(|&i| free[i]).collect();
    let n = idx.len();
    let mut x = [0.0; 3];
    for &i in &idx {
        x[i] = start[i];
    }
    let sub_residual = |p: &Vec3| -> (DVector<f64>, f64) {
        let f = params.field(p);
        let v = DVector::from_iterator(n, idx.iter().map(|&i| f[i]));
        let norm = v.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
        (v, norm)
    };
    let (mut f, mut norm) = sub_residual(&x);
    for it in 0..=max_iter {
        if !norm.is_finite() {
            break;
        }
        if norm <= tol {
            return Ok(NewtonOutcome {
                point: x,
                residual: max_norm(&params.field(&x)),
                iterations: it,
            });
        }
        if it == max_iter {
            break;
        }
        let jfull = params.field_jacobian(&x);
        let jac = DMatrix::from_fn(n, n, |a, b| jfull[idx[a]][idx[b]]);
        let inv = match jac.clone().try_inverse() {
            Some(inv) => inv,
            None => return Err(Error::SingularJacobian(f64::INFINITY)),
        };
        let cond = one_norm(&jac) * one_norm(&inv);
        if !(cond <= MAX_CONDITION) {
            return Err(Error::SingularJacobian(cond));
        }
        let dx = -(&inv * &f);
        let mut lambda = 1.0;
        let mut halvings = 0;
        while idx.iter().enumerate().any(|(a, &i)| x[i] + lambda * dx[a] <= 0.0) {
            lambda *= 0.5;
            halvings += 1;
            if halvings > 80 {
                break;
            }
        }
        let l2 = |v: &DVector<f64>| v.norm();
        let base = l2(&f);
        let mut trial;
        loop {
            trial = x;
            for (a, &i) in idx.iter().enumerate() {
                trial[i] = x[i] + lambda * dx[a];
            }
            let (ft, _) = sub_residual(&trial);
            if l2(&ft) <= (1.0 - 1e-4 * lambda) * base || lambda < 1e-8 {
                break;
            }
            lambda *= 0.5;
        }
        x = trial;
        let next = sub_residual(&x);
        f = next.0;
        norm = next.1;
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        residual: norm,
    })
}

fn one_norm(m: &DMatrix<f64>) -> f64 {
    (0..m.ncols())
        .map(|c| m.column(c).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}
