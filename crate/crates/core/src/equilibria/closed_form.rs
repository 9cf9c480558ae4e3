use log::warn;

use super::{construction, newton_coexistence, EqLabel, EquilibriumRecord, FEASIBLE_TOL};
use crate::conditions::{feasibility_holds, topology_conditions};
use crate::error::Result;
use crate::model::{ModelParams, ModelState, Vec3};
use crate::solve::{logistic_root, TwoPatch};
use crate::topology::TopologyId;

const NAN3: Vec3 = [f64::NAN; 3];

/// Every equilibrium the catalog knows for `topo`, feasible or not.
///
/// `params` must already be projected onto `topo`. The origin is always
/// first. Records whose defining expressions are not real carry NaN
/// components and are infeasible.
pub fn closed_form_equilibria(topo: TopologyId, params: &ModelParams) -> Result<Vec<EquilibriumRecord>> {
    use EqLabel::*;
    let p = params;
    let r = *p.r();
    let k = *p.k();
    let m = |i: usize, j: usize| p.rate(i, j);
    // m12 is rate(0, 1) and so on
    let (m12, m13, m21, m23, _m31, m32) = (m(0, 1), m(0, 2), m(1, 0), m(1, 2), m(2, 0), m(2, 1));

    let mut points: Vec<(EqLabel, Vec3)> = vec![(Origin, [0.0; 3])];
    match topo {
        TopologyId::Full => points.push((Coex, full_coexistence(p))),
        TopologyId::Ex2 | TopologyId::Hub0 | TopologyId::Ex3 | TopologyId::Ex1 => {
            points.push((Coex, newton_interior(p)))
        }
        TopologyId::Ex2New => {
            points.push((XEx2n, [0.0, k[1], 0.0]));
            // {1,3} block first, then patch 2 fed by m23 P3
            let coex = match TwoPatch::from_params(p, 0, 2, 0.0, 0.0).solve() {
                Some((p1, p3)) => [p1, logistic_root(r[1] / k[1], r[1] - p.outflow(1), m23 * p3), p3],
                None => NAN3,
            };
            points.push((Coex, coex));
        }
        TopologyId::Ex7 | TopologyId::Ex7New => {
            let q1 = TwoPatch::from_params(p, 0, 2, 0.0, 0.0)
                .solve()
                .map_or(NAN3, |(p1, p3)| [p1, 0.0, p3]);
            points.push((Q1, q1));
            let p2 = k[1] / r[1] * (r[1] - m12 - m32);
            let coex = if p2 > 0.0 {
                TwoPatch::from_params(p, 0, 2, m12 * p2, m32 * p2)
                    .solve()
                    .map_or(NAN3, |(p1, p3)| [p1, p2, p3])
            } else {
                [f64::NAN, p2, f64::NAN]
            };
            points.push((Coex, coex));
        }
        TopologyId::Ex8 => {
            points.push((M2Ex8, [k[0], 0.0, 0.0]));
            // {2,3} does not see patch 1; patch 1 then absorbs both inflows
            let coex = match TwoPatch::from_params(p, 1, 2, 0.0, 0.0).solve() {
                Some((p2, p3)) => [logistic_root(r[0] / k[0], r[0] - p.outflow(0), m12 * p2 + m13 * p3), p2, p3],
                None => NAN3,
            };
            points.push((Coex, coex));
        }
        TopologyId::Ex6 => {
            points.push((I2, [k[0], 0.0, 0.0]));
            let beta = k[2] / r[2] * (r[2] - m13);
            let alpha = k[0] / 2.0 * (1.0 + (1.0 + 4.0 * m13 * k[2] * (r[2] - m13) / (r[0] * r[2] * k[0])).sqrt());
            points.push((I3, [alpha, 0.0, beta]));
            let p2 = k[1] / r[1] * (r[1] - m32 - m12);
            let p3 = k[2] / (2.0 * r[2]) * (r[2] - m13 + ((r[2] - m13).powi(2) + 4.0 / k[2] * r[2] * m32 * p2).sqrt());
            let p1 = k[0] / 2.0 * (1.0 + (1.0 + 4.0 / (k[0] * r[0]) * (m12 * p2 + m13 * p3)).sqrt());
            points.push((Coex, [p1, p2, p3]));
        }
        TopologyId::Chain => {
            points.push((W2, [0.0, 0.0, k[2]]));
            let p2p = k[1] / r[1] * (r[1] - m32);
            let p3p = k[2] / (2.0 * r[2]) * (r[2] + (r[2] * r[2] + 4.0 / k[2] * r[2] * m32 * p2p).sqrt());
            points.push((W3, [0.0, p2p, p3p]));
            let p1 = k[0] / r[0] * (r[0] - m21);
            let p2 = k[1] / (2.0 * r[1]) * (r[1] - m32 + ((r[1] - m32).powi(2) + 4.0 / k[1] * r[1] * m21 * p1).sqrt());
            let p3 = k[2] / (2.0 * r[2]) * (r[2] + (r[2] * r[2] + 4.0 / k[2] * r[2] * m32 * p2).sqrt());
            points.push((Coex, [p1, p2, p3]));
        }
        TopologyId::Converge => {
            points.push((X1, [0.0, k[1], 0.0]));
            let p1 = k[0] / r[0] * (r[0] - m21);
            let p3 = k[2] / r[2] * (r[2] - m23);
            let p2_of = |inflow: f64| k[1] / (2.0 * r[1]) * (r[1] + (r[1] * r[1] + 4.0 / k[1] * r[1] * inflow).sqrt());
            points.push((X2, [p1, p2_of(m21 * p1), 0.0]));
            points.push((Y3, [0.0, p2_of(m23 * p3), p3]));
            points.push((Coex, [p1, p2_of(m21 * p1 + m23 * p3), p3]));
        }
        TopologyId::Diverge => {
            points.push((Z1, [k[0], 0.0, 0.0]));
            points.push((Z2, [0.0, 0.0, k[2]]));
            points.push((Z3, [k[0], 0.0, k[2]]));
            let p2 = k[1] / r[1] * (r[1] - m12 - m32);
            let p1 = k[0] / (2.0 * r[0]) * (r[0] + (r[0] * r[0] + 4.0 / k[0] * r[0] * m12 * p2).sqrt());
            // the square root takes m32 P2*, the inflow patch 3 actually receives
            let p3 = k[2] / (2.0 * r[2]) * (r[2] + (r[2] * r[2] + 4.0 / k[2] * r[2] * m32 * p2).sqrt());
            points.push((Coex, [p1, p2, p3]));
        }
    }

    Ok(points
        .into_iter()
        .map(|(label, point)| {
            let rows = topology_conditions(topo, label, p, &point);
            let cond_ok = feasibility_holds(&rows);
            let rec = EquilibriumRecord::new(p, label, point, cond_ok);
            let signs_ok = point.iter().all(|&v| v.is_finite() && v >= -FEASIBLE_TOL);
            if signs_ok != cond_ok && rows.is_some() {
                let margin = rows
                    .iter()
                    .flatten()
                    .map(|r| r.margin())
                    .fold(f64::INFINITY, f64::min);
                if margin > 1e-9 {
                    warn!(
                        "{topo} {label}: component signs ({signs_ok}) disagree with stated feasibility ({cond_ok}) at {point:?}"
                    );
                }
            }
            rec
        })
        .collect())
}

/// FULL coexistence: the geometric construction when its divisions are
/// defined, Newton otherwise.
fn full_coexistence(p: &ModelParams) -> Vec3 {
    match construction::construction_point(p, 1e-14) {
        Ok(rec) => rec.point,
        Err(_) => newton_interior(p),
    }
}

fn newton_interior(p: &ModelParams) -> Vec3 {
    let k = *p.k();
    let starts = [k, [0.5 * k[0], 0.5 * k[1], 0.5 * k[2]], [2.0 * k[0], 2.0 * k[1], 2.0 * k[2]], [1.0; 3]];
    for s in starts {
        if let Ok(rec) = newton_coexistence(p, &ModelState(s), 1e-12, 200) {
            return rec.point;
        }
    }
    NAN3
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::apply_topology;

    fn mm(v: [f64; 6]) -> [[f64; 3]; 3] {
        [[0.0, v[0], v[1]], [v[2], 0.0, v[3]], [v[4], v[5], 0.0]]
    }

    fn find(recs: &[EquilibriumRecord], l: EqLabel) -> EquilibriumRecord {
        *recs.iter().find(|r| r.label == l).unwrap()
    }

    #[test]
    fn ex7_coexistence_second_component() {
        let p = apply_topology(
            &ModelParams::new([1.0, 2.0, 1.5], [3.0, 10.0, 2.0], mm([0.5, 0.8, 0.4, 0.3, 0.6, 0.5])).unwrap(),
            TopologyId::Ex7,
        );
        let recs = closed_form_equilibria(TopologyId::Ex7, &p).unwrap();
        let coex = find(&recs, EqLabel::Coex);
        assert!((coex.point[1] - 5.0).abs() < 1e-12);
        assert!(coex.feasible && coex.residual < 1e-10);
    }

    #[test]
    fn q1_exists_where_both_patches_lose_more_than_they_grow() {
        // r1 < m31 and r3 < m13: still a positive (P1, 0, P3)
        let p = apply_topology(
            &ModelParams::new([1.0, 1.0, 1.0], [1.0, 1.0, 1.0], mm([0.5, 2.0, 0.0, 0.0, 2.0, 0.5])).unwrap(),
            TopologyId::Ex7,
        );
        let q1 = find(&closed_form_equilibria(TopologyId::Ex7, &p).unwrap(), EqLabel::Q1);
        assert!(q1.feasible);
        assert!((q1.point[0] - 1.0).abs() < 1e-12 && (q1.point[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diverge_coex_infeasible_below_threshold() {
        let p = apply_topology(
            &ModelParams::new([1.0, 0.5, 1.0], [2.0, 2.0, 3.0], mm([0.3, 0.0, 0.0, 0.0, 0.0, 0.4])).unwrap(),
            TopologyId::Diverge,
        );
        let recs = closed_form_equilibria(TopologyId::Diverge, &p).unwrap();
        assert!(!find(&recs, EqLabel::Coex).feasible);
        let z3 = find(&recs, EqLabel::Z3);
        assert!(z3.feasible && z3.point == [2.0, 0.0, 3.0]);
    }

    #[test]
    fn explicit_coexistence_forms_solve_the_system() {
        let base = ModelParams::new([2.0, 3.0, 1.5], [1.5, 2.0, 2.5], mm([0.3, 0.2, 0.4, 0.1, 0.3, 0.5])).unwrap();
        for topo in [TopologyId::Ex6, TopologyId::Chain, TopologyId::Converge, TopologyId::Diverge] {
            let p = apply_topology(&base, topo);
            let coex = find(&closed_form_equilibria(topo, &p).unwrap(), EqLabel::Coex);
            assert!(coex.feasible, "{topo}");
            assert!(coex.residual <= 1e-10, "{topo}: {}", coex.residual);
        }
    }

    #[test]
    fn origin_always_first_with_zero_residual() {
        let base = ModelParams::new([2.0, 3.0, 1.5], [1.5, 2.0, 2.5], mm([0.3, 0.2, 0.4, 0.1, 0.3, 0.5])).unwrap();
        for topo in TopologyId::ALL {
            let recs = closed_form_equilibria(topo, &apply_topology(&base, topo)).unwrap();
            assert_eq!(recs[0].label, EqLabel::Origin);
            assert_eq!(recs[0].residual, 0.0);
        }
    }

    #[test]
    fn ex2n_x_always_feasible() {
        let base = ModelParams::new([0.2, 3.0, 0.1], [1.5, 2.0, 2.5], mm([0.3, 2.0, 0.4, 1.0, 2.0, 0.5])).unwrap();
        let p = apply_topology(&base, TopologyId::Ex2New);
        let recs = closed_form_equilibria(TopologyId::Ex2New, &p).unwrap();
        let x = find(&recs, EqLabel::XEx2n);
        assert!(x.feasible && x.point == [0.0, 2.0, 0.0] && x.residual == 0.0);
        // (15) holds here, so the {1,3} block cannot sustain a population
        assert!(!find(&recs, EqLabel::Coex).feasible);
    }
}
