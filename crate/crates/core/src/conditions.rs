//! Closed-form feasibility and stability criteria for each (topology,
//! equilibrium) pair.
//!
//! Every row is normalised to the strict inequality `left < right`. Ids are
//! the stable tokens printed in reports; numbered criteria keep their
//! established names (`stab_82`, `feas_I3`, ...) with `.1`, `.2` suffixes
//! for multi-part conditions. Rows named `eig_Jii` assert the sign of a
//! diagonal Jacobian entry that is an eigenvalue because its row or column
//! is otherwise zero; `rh_block_ab.*` rows are the trace and determinant of
//! the 2x2 block on patches `a`, `b`.

use serde::{Deserialize, Serialize};

use crate::equilibria::EqLabel;
use crate::model::{ModelParams, Vec3};
use crate::topology::TopologyId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ConditionKind {
    /// Required for the equilibrium to exist in the nonnegative orthant.
    Feasibility,
    /// Part of the conjunction that decides local stability.
    Stability,
    /// Reported for context only.
    Info,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionRow {
    pub id: String,
    pub kind: ConditionKind,
    pub holds: bool,
    pub left: f64,
    pub right: f64,
}

impl ConditionRow {
    fn new(id: &str, kind: ConditionKind, left: f64, right: f64) -> Self {
        ConditionRow {
            id: id.to_string(),
            kind,
            holds: left < right,
            left,
            right,
        }
    }

    pub fn margin(&self) -> f64 {
        (self.right - self.left).abs()
    }
}

struct Rows<'a> {
    p: &'a ModelParams,
    jac: [[f64; 3]; 3],
    rows: Vec<ConditionRow>,
}

impl<'a> Rows<'a> {
    fn stab(&mut self, id: &str, left: f64, right: f64) -> &mut Self {
        self.rows.push(ConditionRow::new(id, ConditionKind::Stability, left, right));
        self
    }

    fn feas(&mut self, id: &str, left: f64, right: f64) -> &mut Self {
        self.rows.push(ConditionRow::new(id, ConditionKind::Feasibility, left, right));
        self
    }

    fn info(&mut self, id: &str, left: f64, right: f64) -> &mut Self {
        self.rows.push(ConditionRow::new(id, ConditionKind::Info, left, right));
        self
    }

    /// Diagonal entry `J_ii < 0`.
    fn eig(&mut self, i: usize) -> &mut Self {
        let id = format!("eig_J{}{}", i + 1, i + 1);
        let v = self.jac[i][i];
        self.stab(&id, v, 0.0)
    }

    /// 2x2 block on patches `a`, `b`: trace < 0 and det > 0.
    fn block(&mut self, a: usize, b: usize) -> &mut Self {
        let j = &self.jac;
        let tr = j[a][a] + j[b][b];
        let det = j[a][a] * j[b][b] - j[a][b] * j[b][a];
        let base = format!("rh_block_{}{}", a + 1, b + 1);
        self.stab(&format!("{base}.trace"), tr, 0.0);
        self.stab(&format!("{base}.det"), 0.0, det)
    }

    fn m(&self, into: usize, from: usize) -> f64 {
        self.p.rate(into, from)
    }
}

/// Rows applicable to `label` under `topo`, evaluated at `point`. `None`
/// when no closed-form criterion is known for the pair.
pub fn topology_conditions(topo: TopologyId, label: EqLabel, params: &ModelParams, point: &Vec3) -> Option<Vec<ConditionRow>> {
    use EqLabel::*;
    use TopologyId::*;

    let r = *params.r();
    let k = *params.k();
    let mut c = Rows {
        p: params,
        jac: params.field_jacobian(point),
        rows: Vec::new(),
    };
    let (m12, m13, m21, m23, m31, m32) = (c.m(0, 1), c.m(0, 2), c.m(1, 0), c.m(1, 2), c.m(2, 0), c.m(2, 1));

    match (topo, label) {
        (Ex2New, Origin) => {
            c.eig(1);
        }
        (Ex2New, XEx2n) => {
            c.eig(1)
                .stab("X_stab_mod7bis.1", r[0] + r[2], m31 + m23 + m13)
                .stab("X_stab_mod7bis.2", m13 * m31, (m31 - r[0]) * (m23 + m13 - r[2]));
        }

        (Ex7 | Ex7New, Origin) => {
            c.stab("stab_orig_mod7bis.1", r[1], m12 + m32)
                .stab("stab_orig_mod7bis.2", r[0] + r[2], m13 + m31)
                .stab("stab_orig_mod7bis.3", r[0] * m13 + r[2] * m31, r[0] * r[2]);
        }
        (Ex7 | Ex7New, Coex) => {
            c.stab("stab_1_mod7bis", r[1], m12 + m32 + 2.0 * r[1] / k[1] * point[1])
                .block(0, 2);
        }
        (Ex7 | Ex7New, Q1) => {
            c.stab("Q1_stab_mod7bis", r[1], m12 + m32)
                .block(0, 2)
                .info("zeros_restr_2.1", r[0], m31)
                .info("zeros_restr_2.2", r[2], m13);
        }

        (Ex8, Origin) => {
            c.stab("Stab_8_coex", k[0], 2.0 * point[0]);
        }
        (Ex8, Coex) => {
            c.stab("Stab_8_coex", k[0], 2.0 * point[0]).block(1, 2);
        }
        (Ex8, M2Ex8) => {
            let a = r[1] - m12;
            let b = r[2] - m13;
            c.eig(0)
                .stab("stab_82.1", r[1] + r[2], m12 + m32 + m13 + m23)
                .stab("stab_82.2", a * m23 + b * m32, a * b)
                .info("hopf82", r[1], m13 + m23 + m32 + m12 - r[2]);
        }

        (Ex6, Origin) => {
            c.eig(0);
        }
        (Ex6, Coex) => {
            c.feas("ce4", m12 + m32, r[1]).eig(0).eig(1).eig(2);
        }
        (Ex6, I2) => {
            c.eig(0)
                .stab("stab_I2.1", r[1], m12 + m32)
                .stab("stab_I2.2", r[2], m13);
        }
        (Ex6, I3) => {
            c.feas("feas_I3", m13, r[2])
                .eig(0)
                .stab("stab_I2.1", r[1], m12 + m32)
                .eig(2);
        }

        (Chain, Origin) => {
            c.eig(2);
        }
        (Chain, W2) => {
            c.stab("stab_Q2.1", r[0], m21).stab("stab_Q2.2", r[1], m32).eig(2);
        }
        (Chain, W3) => {
            c.feas("feas_W3", m32, r[1]).stab("stab_Q2.1", r[0], m21).eig(1).eig(2);
        }
        (Chain, Coex) => {
            c.feas("feas_coex_chain", m21, r[0]).eig(0).eig(1).eig(2);
        }

        (Converge, Origin) => {
            c.eig(1);
        }
        (Converge, X1) => {
            c.stab("stab_X1.1", r[0], m21).stab("stab_X1.2", r[2], m23).eig(1);
        }
        (Converge, X2) => {
            c.feas("feas_P*_n2.1", m21, r[0]).stab("feas_X2", r[2], m23).eig(0).eig(1);
        }
        (Converge, Y3) => {
            c.feas("feas_P*_n2.2", m23, r[2]).stab("feas_Y3", r[0], m21).eig(1).eig(2);
        }
        (Converge, Coex) => {
            c.feas("feas_P*_n2.1", m21, r[0])
                .feas("feas_P*_n2.2", m23, r[2])
                .eig(0)
                .eig(1)
                .eig(2);
        }

        (Diverge, Origin) => {
            c.eig(0);
        }
        (Diverge, Z1) => {
            c.eig(2);
        }
        (Diverge, Z2) => {
            c.eig(0);
        }
        (Diverge, Z3) => {
            c.eig(0).stab("stab_Z3", r[1], m12 + m32).eig(2);
        }
        (Diverge, Coex) => {
            c.feas("feas_P*_16", m32 + m12, r[1]).eig(0).eig(1).eig(2);
        }

        _ => return None,
    }
    Some(c.rows)
}

/// Whether every feasibility row holds.
pub fn feasibility_holds(rows: &Option<Vec<ConditionRow>>) -> bool {
    rows.as_ref().map_or(true, |rows| {
        rows.iter()
            .filter(|r| r.kind == ConditionKind::Feasibility)
            .all(|r| r.holds)
    })
}

/// Conjunction of the stability rows, `None` when there are none.
pub fn stability_conjunction(rows: &Option<Vec<ConditionRow>>) -> Option<bool> {
    let rows = rows.as_ref()?;
    let mut any = false;
    let mut all = true;
    for r in rows.iter().filter(|r| r.kind == ConditionKind::Stability) {
        any = true;
        all &= r.holds;
    }
    any.then_some(all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::apply_topology;

    fn params(r: [f64; 3], m: [[f64; 3]; 3], topo: TopologyId) -> ModelParams {
        apply_topology(&ModelParams::new(r, [1.0, 2.0, 3.0], m).unwrap(), topo)
    }

    fn mm(v: [f64; 6]) -> [[f64; 3]; 3] {
        // m12, m13, m21, m23, m31, m32
        [[0.0, v[0], v[1]], [v[2], 0.0, v[3]], [v[4], v[5], 0.0]]
    }

    #[test]
    fn ex6_i2_stable_region() {
        let p = params([1.0, 0.3, 0.4], mm([0.3, 0.7, 0.0, 0.0, 0.0, 0.2]), TopologyId::Ex6);
        let rows = topology_conditions(TopologyId::Ex6, EqLabel::I2, &p, &[1.0, 0.0, 0.0]);
        assert_eq!(stability_conjunction(&rows), Some(true));
        let ids: Vec<_> = rows.unwrap().iter().map(|r| r.id.clone()).collect();
        assert_eq!(ids, vec!["eig_J11", "stab_I2.1", "stab_I2.2"]);
    }

    #[test]
    fn ex7_origin_conditions_clash() {
        let p = params([1.0, 0.2, 1.0], mm([0.5, 3.0, 0.0, 0.0, 3.0, 0.5]), TopologyId::Ex7);
        let rows = topology_conditions(TopologyId::Ex7, EqLabel::Origin, &p, &[0.0; 3]).unwrap();
        assert!(rows[0].holds && rows[1].holds);
        assert!(!rows[2].holds);
    }

    #[test]
    fn unknown_pairs_have_no_criterion() {
        let p = params([1.0; 3], mm([0.1; 6]), TopologyId::Full);
        assert!(topology_conditions(TopologyId::Full, EqLabel::Coex, &p, &[1.0; 3]).is_none());
        assert_eq!(stability_conjunction(&None), None);
        assert!(feasibility_holds(&None));
    }

    #[test]
    fn diverge_z1_has_positive_r3_eigenvalue() {
        let p = params([1.0, 1.0, 0.7], mm([0.5, 0.0, 0.0, 0.0, 0.0, 0.5]), TopologyId::Diverge);
        let rows = topology_conditions(TopologyId::Diverge, EqLabel::Z1, &p, &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].left, 0.7);
        assert!(!rows[0].holds);
    }
}
