//! Property battery behind the `verify` command.
//!
//! Every property that evaluates the vector field takes it as an argument,
//! so a deliberately broken field can be run through the same checks.

use serde::{Deserialize, Serialize};

use crate::conditions::{topology_conditions, ConditionKind};
use crate::equilibria::{
    closed_form_equilibria, coexistence_by_construction, find_all_equilibria, newton_coexistence, EqLabel,
};
use crate::model::{distance, max_norm, ModelParams, ModelState, Vec3};
use crate::qmc::Halton3;
use crate::sampling::ParamSampler;
use crate::stability::{classify, origin_never_stable_scan, Classification};
use crate::topology::{canonical_form, enumerate_canonical, ArcSet, TopologyId};

pub type Field = dyn Fn(&ModelParams, &Vec3) -> Vec3 + Sync;

/// Minimum margin for a condition row to count as decided.
pub const DECIDED_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyResult {
    pub name: String,
    pub passed: bool,
    pub checked: usize,
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub n: usize,
    pub results: Vec<PropertyResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }
}

struct Check {
    name: &'static str,
    checked: usize,
    witness: Option<String>,
}

impl Check {
    fn new(name: &'static str) -> Self {
        Check {
            name,
            checked: 0,
            witness: None,
        }
    }

    /// Counts one case; records the first failure.
    fn case(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok && self.witness.is_none() {
            self.witness = Some(witness());
        }
    }

    fn done(self) -> PropertyResult {
        PropertyResult {
            name: self.name.to_string(),
            passed: self.witness.is_none(),
            checked: self.checked,
            witness: self.witness,
        }
    }
}

fn model_field(p: &ModelParams, x: &Vec3) -> Vec3 {
    p.field(x)
}

/// Runs the battery against the model's own vector field.
pub fn run_battery(seed: u64, n: usize) -> VerifyReport {
    run_battery_with(&model_field, seed, n)
}

pub fn run_battery_with(field: &Field, seed: u64, n: usize) -> VerifyReport {
    let n = n.max(1);
    let results = vec![
        topology_count(),
        migration_conservation(field, seed, n),
        jacobian_matches_differences(field, seed, n),
        existence_theorem(field, seed, n),
        oracle_equivalence(field, seed, n),
        classifier_consistency(seed, n),
        origin_conditions_unsatisfiable(seed, 1000 * n),
        origin_never_stable(seed, 100 * n),
    ];
    VerifyReport { seed, n, results }
}

pub fn topology_count() -> PropertyResult {
    let mut c = Check::new("topology_count");
    let mut classes: Vec<TopologyId> = (0u8..64)
        .filter_map(|b| canonical_form(ArcSet::from_bits(b)).ok().map(|(t, _)| t))
        .collect();
    classes.sort();
    classes.dedup();
    c.case(classes.len() == 13, || format!("{} classes from brute force", classes.len()));
    c.case(enumerate_canonical().len() == 13, || "enumerate_canonical is not 13".into());
    let sc: Vec<_> = classes.iter().filter(|t| t.is_strongly_connected()).collect();
    let expected = [TopologyId::Full, TopologyId::Ex2, TopologyId::Hub0, TopologyId::Ex3, TopologyId::Ex1];
    c.case(sc.len() == 5 && expected.iter().all(|t| sc.contains(&t)), || format!("strongly connected: {sc:?}"));
    c.done()
}

/// With all growth rates zero, migration only moves mass around.
pub fn migration_conservation(field: &Field, seed: u64, n: usize) -> PropertyResult {
    let mut c = Check::new("migration_conservation");
    let mut s = ParamSampler::new(seed ^ 0x11);
    for _ in 0..n {
        let d = s.draw();
        let p = ModelParams::new_unchecked([0.0; 3], *d.k(), *d.m());
        let x = [s.uniform(0.0, 10.0), s.uniform(0.0, 10.0), s.uniform(0.0, 10.0)];
        let total: f64 = field(&p, &x).iter().sum();
        c.case(total.abs() <= 1e-12, || format!("sum of rhs {total:e} at {x:?} with {p:?}"));
    }
    c.done()
}

/// Analytic Jacobian against central differences of `field`.
pub fn jacobian_matches_differences(field: &Field, seed: u64, n: usize) -> PropertyResult {
    let mut c = Check::new("jacobian_vs_finite_differences");
    let mut s = ParamSampler::new(seed ^ 0x22);
    for _ in 0..n {
        let p = s.draw();
        let x = [s.uniform(0.0, 10.0), s.uniform(0.0, 10.0), s.uniform(0.0, 10.0)];
        let err = fd_relative_error(field, &p, &x);
        c.case(err <= 1e-5, || format!("relative error {err:e} at {x:?} with {p:?}"));
    }
    c.done()
}

pub fn fd_relative_error(field: &Field, p: &ModelParams, x: &Vec3) -> f64 {
    let jac = p.field_jacobian(x);
    let mut worst: f64 = 0.0;
    for j in 0..3 {
        let h = 1e-6 * (1.0 + x[j].abs());
        let (mut up, mut dn) = (*x, *x);
        up[j] += h;
        dn[j] -= h;
        let (fu, fd) = (field(p, &up), field(p, &dn));
        for i in 0..3 {
            let approx = (fu[i] - fd[i]) / (2.0 * h);
            worst = worst.max((approx - jac[i][j]).abs() / (1.0 + jac[i][j].abs()));
        }
    }
    worst
}

/// Interior equilibrium of the fully connected model by Newton from
/// several starts.
pub fn newton_interior(p: &ModelParams) -> Option<Vec3> {
    let k = *p.k();
    let top = 2.0 * p.max_k();
    let mut starts = vec![k, k.map(|v| 0.5 * v), k.map(|v| 2.0 * v)];
    starts.extend(Halton3::new(0).take(16).map(|u| u.map(|v| top * (1.0 - v))));
    starts
        .iter()
        .find_map(|s| newton_coexistence(p, &ModelState(*s), 1e-13, 200).ok())
        .map(|r| r.point)
}

pub fn existence_theorem(field: &Field, seed: u64, n: usize) -> PropertyResult {
    let mut c = Check::new("existence_theorem");
    let mut s = ParamSampler::new(seed ^ 0x33);
    for _ in 0..n {
        let p = s.draw();
        let by_newton = newton_interior(&p);
        let by_construction = coexistence_by_construction(&p, 1e-14).map(|(r, _)| r.point);
        let ok = match (by_newton, &by_construction) {
            (Some(a), Ok(b)) => {
                let res = max_norm(&field(&p, b));
                a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-6) && res <= 1e-10 && b.iter().all(|&v| v > 0.0)
            }
            _ => false,
        };
        c.case(ok, || format!("newton {by_newton:?}, construction {by_construction:?} for {p:?}"));
    }
    c.done()
}

/// Every feasible closed-form equilibrium solves the field and survives the
/// merge with the brute-force set.
pub fn oracle_equivalence(field: &Field, seed: u64, n: usize) -> PropertyResult {
    let mut c = Check::new("oracle_equivalence");
    let mut s = ParamSampler::new(seed ^ 0x44);
    for _ in 0..n {
        let base = s.draw();
        for topo in TopologyId::ALL {
            let p = crate::topology::apply_topology(&base, topo);
            let closed = match closed_form_equilibria(topo, &p) {
                Ok(v) => v,
                Err(e) => {
                    c.case(false, || format!("{topo}: {e}"));
                    continue;
                }
            };
            let all = find_all_equilibria(topo, &p);
            for rec in closed.iter().filter(|r| r.feasible) {
                let res = max_norm(&field(&p, &rec.point));
                let found = all
                    .as_ref()
                    .map(|v| v.iter().any(|e| distance(&e.point, &rec.point) < 1e-6))
                    .unwrap_or(false);
                c.case(res <= 1e-8 && found, || {
                    format!("{topo} {} at {:?}: residual {res:e}, in brute-force set {found}, {p:?}", rec.label, rec.point)
                });
            }
        }
    }
    c.done()
}

/// Where every applicable condition is decided by a clear margin, the
/// closed-form verdict matches the eigenvalues.
pub fn classifier_consistency(seed: u64, n: usize) -> PropertyResult {
    let mut c = Check::new("classifier_consistency");
    let mut s = ParamSampler::new(seed ^ 0x55);
    for _ in 0..n {
        let base = s.draw();
        for topo in TopologyId::ALL {
            let p = crate::topology::apply_topology(&base, topo);
            let Ok(eqs) = closed_form_equilibria(topo, &p) else {
                continue;
            };
            for e in eqs.iter().filter(|e| e.feasible) {
                let Some(rows) = topology_conditions(topo, e.label, &p, &e.point) else {
                    continue;
                };
                if rows.iter().any(|r| r.kind != ConditionKind::Info && r.margin() <= DECIDED_MARGIN) {
                    continue;
                }
                let Ok(rep) = classify(topo, e, &p) else {
                    continue;
                };
                let Some(verdict) = rep.conditions_verdict else {
                    continue;
                };
                let stable = rep.classification == Classification::Stable;
                c.case(verdict == stable, || {
                    format!("{topo} {} at {:?}: conditions say {verdict}, eigenvalues {:?}", e.label, e.point, rep.eigenvalues)
                });
            }
        }
    }
    c.done()
}

/// The three origin conditions of the one-way-into-patch-2 topology never
/// hold together: the product condition forces `m13 < r3` and `m31 < r1`,
/// which contradicts the sum condition.
pub fn origin_conditions_unsatisfiable(seed: u64, draws: usize) -> PropertyResult {
    let mut c = Check::new("ex7_origin_conditions_unsatisfiable");
    let mut s = ParamSampler::new(seed ^ 0x66);
    for _ in 0..draws {
        let p = s.draw_for(TopologyId::Ex7);
        let rows = topology_conditions(TopologyId::Ex7, EqLabel::Origin, &p, &[0.0; 3]).expect("EX7 origin rows");
        let all = rows.iter().all(|r| r.holds);
        let (r, m13, m31) = (p.r(), p.rate(0, 2), p.rate(2, 0));
        let chain = !rows[2].holds || (m13 < r[2] && m31 < r[0] && !rows[1].holds);
        c.case(!all && chain, || format!("all three hold or chain broken for {p:?}"));
    }
    c.done()
}

pub fn origin_never_stable(seed: u64, draws: usize) -> PropertyResult {
    let mut c = Check::new("origin_never_stable");
    for topo in TopologyId::ALL {
        let hit = origin_never_stable_scan(topo, draws, seed ^ 0x77);
        c.case(hit.is_none(), || format!("{topo}: stable origin for {hit:?}"));
    }
    c.done()
}
