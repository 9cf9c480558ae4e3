//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails.

use std::time::{Duration, Instant};

use nalgebra::Matrix3;
use num_complex::Complex64;

use tripatch::bifurcation::{hopf_candidate, sweep, CrossingKind, HopfValidity, COINCIDENCE_DIST};
use tripatch::conditions::{topology_conditions, ConditionKind};
use tripatch::equilibria::{
    brute_force_equilibria, closed_form_equilibria, coexistence_by_construction, find_all_equilibria, EqLabel,
    DEFAULT_STARTS,
};
use tripatch::model::{distance, max_norm, ModelParams, ModelState, ParamName, Vec3};
use tripatch::sampling::ParamSampler;
use tripatch::simulate::{basin_sample, integrate, Terminal};
use tripatch::stability::{classify, routh_hurwitz, CharacteristicCoefficients, Classification};
use tripatch::topology::{apply_topology, canonical_form, enumerate_canonical, ArcSet, TopologyId};
use tripatch::verify::{
    fd_relative_error, migration_conservation, newton_interior, origin_conditions_unsatisfiable,
};

const SEED: u64 = 20240917;

// criterion 1
const CENSUS_CLASSES: usize = 13;
const CENSUS_BUDGET: Duration = Duration::from_secs(1);
// criterion 2
const EXISTENCE_DRAWS: usize = 1000;
const EXISTENCE_AGREE: f64 = 1e-6;
const EXISTENCE_RESIDUAL: f64 = 1e-10;
const EXISTENCE_BUDGET: Duration = Duration::from_secs(30);
// criterion 3
const CATALOG_DRAWS: usize = 200;
const CATALOG_RESIDUAL: f64 = 1e-8;
const CATALOG_MATCH: f64 = 1e-6;
const CATALOG_BUDGET: Duration = Duration::from_secs(120);
// criterion 4
const EQUIV_DRAWS: usize = 200;
const EQUIV_MARGIN: f64 = 1e-6;
// criterion 5
const SC_DRAWS: usize = 200;
// criterion 6
const TRANS_DRAWS: usize = 20;
const TRANS_LOCATE: f64 = 1e-6;
const TRANS_COINCIDE: f64 = 1e-5;
// criterion 7
const HOPF_DRAWS: usize = 20;
const HOPF_LOCATE: f64 = 1e-6;
const HOPF_SEARCH: usize = 100_000;
// criterion 8
const UNSAT_DRAWS: usize = 100_000;
const UNSAT_BUDGET: Duration = Duration::from_secs(10);
// criterion 9
const FD_DRAWS: usize = 1000;
const FD_REL: f64 = 1e-5;
const CONSERVATION_DRAWS: usize = 1000;
const INTEGRATOR_MATCH: f64 = 1e-6;
// criterion 10
const GLOBAL_DRAWS: usize = 50;
const GLOBAL_STARTS: usize = 200;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// Eigenvalues from nalgebra's Schur decomposition, independent of the
/// crate's cubic solver.
fn oracle_eigenvalues(p: &ModelParams, x: &Vec3) -> Vec<Complex64> {
    let j = p.field_jacobian(x);
    let m = Matrix3::from_fn(|r, c| j[r][c]);
    m.complex_eigenvalues().iter().copied().collect()
}

fn oracle_class(eigs: &[Complex64]) -> Classification {
    let scale = eigs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let band = (1e-9 * scale).max(1e-12);
    if eigs.iter().all(|z| z.re < -band) {
        Classification::Stable
    } else if eigs.iter().any(|z| z.re > band) {
        Classification::Unstable
    } else {
        Classification::Marginal
    }
}

fn census() -> Outcome {
    let start = Instant::now();
    let listed = enumerate_canonical();
    let mut classes: Vec<TopologyId> = (0u8..64)
        .filter_map(|b| canonical_form(ArcSet::from_bits(b)).ok().map(|(t, _)| t))
        .collect();
    classes.sort();
    classes.dedup();
    // independent orbit count: admissible arc sets modulo relabeling
    let mut orbits: Vec<u8> = Vec::new();
    for b in 0u8..64 {
        let a = ArcSet::from_bits(b);
        if a.is_empty() || !a.is_admissible() {
            continue;
        }
        let rep = tripatch::topology::PERMUTATIONS
            .iter()
            .map(|&p| a.permuted(p).bits())
            .min()
            .unwrap();
        if !orbits.contains(&rep) {
            orbits.push(rep);
        }
    }
    let sc: Vec<TopologyId> = listed.iter().filter(|(_, a)| a.is_strongly_connected()).map(|(t, _)| *t).collect();
    let want_sc = [TopologyId::Full, TopologyId::Ex2, TopologyId::Hub0, TopologyId::Ex3, TopologyId::Ex1];
    let elapsed = start.elapsed();
    let pass = listed.len() == CENSUS_CLASSES
        && classes.len() == CENSUS_CLASSES
        && orbits.len() == CENSUS_CLASSES
        && sc.len() == 5
        && want_sc.iter().all(|t| sc.contains(t))
        && elapsed < CENSUS_BUDGET;
    outcome(
        pass,
        format!(
            "{} listed, {} by canonical form, {} orbits, strongly connected {:?}, {:?}",
            listed.len(),
            classes.len(),
            orbits.len(),
            sc,
            elapsed
        ),
    )
}

fn existence() -> Outcome {
    let start = Instant::now();
    let mut s = ParamSampler::new(SEED);
    let mut worst_gap: f64 = 0.0;
    let mut worst_res: f64 = 0.0;
    let mut failures = Vec::new();
    for i in 0..EXISTENCE_DRAWS {
        let p = s.draw();
        let newton = newton_interior(&p);
        let built = coexistence_by_construction(&p, 1e-14);
        match (newton, built) {
            (Some(a), Ok((rec, _))) => {
                let gap = a.iter().zip(rec.point).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                let res = max_norm(&p.field(&rec.point));
                worst_gap = worst_gap.max(gap);
                worst_res = worst_res.max(res);
                if gap > EXISTENCE_AGREE || res > EXISTENCE_RESIDUAL || !rec.point.iter().all(|&v| v > 0.0) {
                    failures.push(i);
                }
            }
            _ => failures.push(i),
        }
    }
    let elapsed = start.elapsed();
    outcome(
        failures.is_empty() && elapsed < EXISTENCE_BUDGET,
        format!(
            "{} draws, max gap {worst_gap:.2e}, max residual {worst_res:.2e}, failures {:?}, {elapsed:?}",
            EXISTENCE_DRAWS,
            &failures[..failures.len().min(5)]
        ),
    )
}

fn catalog() -> Outcome {
    let start = Instant::now();
    let mut s = ParamSampler::new(SEED + 1);
    let mut checked = 0;
    let mut failures = Vec::new();
    for _ in 0..CATALOG_DRAWS {
        let base = s.draw();
        for topo in TopologyId::ALL {
            let p = apply_topology(&base, topo);
            let closed = match closed_form_equilibria(topo, &p) {
                Ok(c) => c,
                Err(e) => {
                    failures.push(format!("{topo}: {e}"));
                    continue;
                }
            };
            let brute = brute_force_equilibria(&p, DEFAULT_STARTS, 0, 1e-12);
            if let Err(e) = find_all_equilibria(topo, &p) {
                failures.push(format!("{topo}: {e}"));
            }
            for rec in closed.iter().filter(|r| r.feasible) {
                checked += 1;
                let res = max_norm(&p.field(&rec.point));
                let hit = brute.iter().any(|b| distance(&b.point, &rec.point) < CATALOG_MATCH);
                if res > CATALOG_RESIDUAL || !hit {
                    failures.push(format!("{topo} {} {:?} res {res:.1e} hit {hit}", rec.label, rec.point));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        failures.is_empty() && elapsed < CATALOG_BUDGET,
        format!("{checked} feasible records, {} failures {:?}, {elapsed:?}", failures.len(), failures.first()),
    )
}

fn equivalence() -> Outcome {
    let mut s = ParamSampler::new(SEED + 2);
    let mut compared = 0;
    let mut disagreements = Vec::new();
    for _ in 0..EQUIV_DRAWS {
        let base = s.draw();
        for topo in TopologyId::ALL {
            let p = apply_topology(&base, topo);
            let Ok(eqs) = closed_form_equilibria(topo, &p) else {
                continue;
            };
            for e in eqs.iter().filter(|e| e.feasible) {
                let Some(rows) = topology_conditions(topo, e.label, &p, &e.point) else {
                    continue;
                };
                let decided = rows.iter().filter(|r| r.kind != ConditionKind::Info).all(|r| r.margin() > EQUIV_MARGIN);
                let stab: Vec<_> = rows.iter().filter(|r| r.kind == ConditionKind::Stability).collect();
                if !decided || stab.is_empty() {
                    continue;
                }
                let verdict = stab.iter().all(|r| r.holds);
                let class = oracle_class(&oracle_eigenvalues(&p, &e.point));
                let crate_class = classify(topo, e, &p).map(|r| r.classification).ok();
                compared += 1;
                if verdict != (class == Classification::Stable) || crate_class != Some(class) {
                    disagreements.push(format!("{topo} {} at {:?}: conditions {verdict}, eigenvalues {class:?}", e.label, e.point));
                }
            }
        }
    }
    outcome(
        disagreements.is_empty() && compared > 0,
        format!("{compared} decided cases, {} disagreements {:?}", disagreements.len(), disagreements.first()),
    )
}

fn strongly_connected() -> Outcome {
    let mut s = ParamSampler::new(SEED + 3);
    let mut failures = Vec::new();
    let sc = [TopologyId::Full, TopologyId::Ex2, TopologyId::Hub0, TopologyId::Ex3, TopologyId::Ex1];
    for _ in 0..SC_DRAWS {
        let base = s.draw();
        for topo in sc {
            let p = apply_topology(&base, topo);
            match find_all_equilibria(topo, &p) {
                Ok(eqs) => {
                    let feasible: Vec<EqLabel> = eqs.iter().filter(|e| e.feasible).map(|e| e.label).collect();
                    let brute = brute_force_equilibria(&p, DEFAULT_STARTS, 0, 1e-12);
                    if feasible != [EqLabel::Origin, EqLabel::Coex] || brute.len() != 2 {
                        failures.push(format!("{topo}: {feasible:?}, {} brute-force points", brute.len()));
                    }
                }
                Err(e) => failures.push(format!("{topo}: {e}")),
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!("{} checks, {} failures {:?}", SC_DRAWS * sc.len(), failures.len(), failures.first()),
    )
}

fn transcritical() -> Outcome {
    let mut s = ParamSampler::new(SEED + 4);
    let mut done = 0;
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    while done < TRANS_DRAWS {
        let p = s.draw_for(TopologyId::Ex6);
        let r2_dag = p.rate(0, 1) + p.rate(2, 1);
        let r3_dag = p.rate(0, 2);
        if r2_dag < 0.1 || r3_dag < 0.1 {
            continue;
        }
        done += 1;
        for (param, dag) in [(ParamName::R(1), r2_dag), (ParamName::R(2), r3_dag)] {
            let recs = match sweep(TopologyId::Ex6, &p, param, 0.5 * dag, 1.5 * dag + 0.1, 12) {
                Ok(r) => r,
                Err(e) => {
                    failures.push(format!("{param}: {e}"));
                    continue;
                }
            };
            let hits: Vec<_> = recs
                .iter()
                .flat_map(|r| r.crossings.iter())
                .filter(|c| c.kind == CrossingKind::RealZero && (c.param_value - dag).abs() <= TRANS_LOCATE)
                .collect();
            let exchanged = hits.iter().any(|c| {
                let at = apply_topology(&p.with(param, c.param_value), TopologyId::Ex6);
                closed_form_equilibria(TopologyId::Ex6, &at).unwrap().iter().any(|o| {
                    o.label != c.label
                        && o.point.iter().all(|v| v.is_finite())
                        && distance(&o.point, &c.point) <= TRANS_COINCIDE
                })
            });
            for c in &hits {
                worst = worst.max((c.param_value - dag).abs());
            }
            if hits.is_empty() || !exchanged || COINCIDENCE_DIST > TRANS_COINCIDE {
                failures.push(format!("{param}† = {dag}: {} crossings, exchange {exchanged}", hits.len()));
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!("{TRANS_DRAWS} draws x 2 thresholds, worst offset {worst:.1e}, failures {:?}", failures.first()),
    )
}

fn hopf() -> Outcome {
    // rejection sampling for draws where the second M2 condition holds at r2‡
    let mut s = ParamSampler::new(SEED + 5);
    let mut accepted = Vec::new();
    let mut best_margin = f64::NEG_INFINITY;
    for _ in 0..HOPF_SEARCH {
        let p = s.draw_for(TopologyId::Ex8);
        let (r2, _) = hopf_candidate(&p);
        if !(r2 > 0.0) {
            continue;
        }
        let at = p.with(ParamName::R(1), r2);
        let m2 = [at.k()[0], 0.0, 0.0];
        let rows = topology_conditions(TopologyId::Ex8, EqLabel::M2Ex8, &at, &m2).unwrap();
        let row = rows.iter().find(|r| r.id == "stab_82.2").unwrap();
        best_margin = best_margin.max(row.right - row.left);
        if row.holds {
            accepted.push(p);
            if accepted.len() == HOPF_DRAWS {
                break;
            }
        }
    }
    let mut located = 0;
    let mut genuine = 0;
    for p in &accepted {
        let (r2, validity) = hopf_candidate(p);
        if validity != HopfValidity::Genuine {
            continue;
        }
        genuine += 1;
        let Ok(recs) = sweep(TopologyId::Ex8, p, ParamName::R(1), 0.5 * r2, 1.5 * r2, 12) else {
            continue;
        };
        if recs.iter().flat_map(|r| r.crossings.iter()).any(|c| {
            c.label == EqLabel::M2Ex8 && c.kind == CrossingKind::ComplexPair && (c.param_value - r2).abs() <= HOPF_LOCATE
        }) {
            located += 1;
        }
    }
    outcome(
        accepted.len() == HOPF_DRAWS && located == genuine,
        format!(
            "{} of {HOPF_SEARCH} EX8 draws satisfy the second M2 condition at r2‡ (need {HOPF_DRAWS}; best right-left {best_margin:.3e}); {genuine} GENUINE, {located} located",
            accepted.len()
        ),
    )
}

fn unsatisfiable() -> Outcome {
    let start = Instant::now();
    let res = origin_conditions_unsatisfiable(SEED + 6, UNSAT_DRAWS);
    let elapsed = start.elapsed();
    outcome(
        res.passed && res.checked == UNSAT_DRAWS && elapsed < UNSAT_BUDGET,
        format!("{} draws, witness {:?}, {elapsed:?}", res.checked, res.witness),
    )
}

fn hygiene() -> Outcome {
    let mut s = ParamSampler::new(SEED + 7);
    let field = |p: &ModelParams, x: &Vec3| p.field(x);
    let mut worst_fd: f64 = 0.0;
    for _ in 0..FD_DRAWS {
        let p = s.draw();
        let x = [s.uniform(0.0, 10.0), s.uniform(0.0, 10.0), s.uniform(0.0, 10.0)];
        worst_fd = worst_fd.max(fd_relative_error(&field, &p, &x));
    }
    let conservation = migration_conservation(&field, SEED + 8, CONSERVATION_DRAWS);

    let m = [[0.0, 0.1, 0.1], [0.1, 0.0, 0.1], [0.1, 0.1, 0.0]];
    let sym = ModelParams::new([1.0; 3], [1.0; 3], m).unwrap();
    let dec = ModelParams::decoupled([1.0, 2.0, 0.5], [2.0, 3.0, 4.0]).unwrap();
    let mut integ_gap: f64 = 0.0;
    let mut integ_ok = true;
    for (p, x0, target) in [
        (sym, [0.5, 0.7, 0.9], [1.0; 3]),
        (dec, [0.1; 3], [2.0, 3.0, 4.0]),
    ] {
        match integrate(&p, &ModelState(x0), 1e4, 1e-11, 1e-13) {
            Ok(t) if t.terminal == Terminal::Steady => integ_gap = integ_gap.max(max_norm(&[0, 1, 2].map(|i| t.last().1[i] - target[i]))),
            _ => integ_ok = false,
        }
    }

    // roots -1, ±i: every coefficient sign is right, yet not asymptotically stable
    let c = CharacteristicCoefficients {
        trace: -1.0,
        m_j: 1.0,
        det: -1.0,
    };
    let signs = tripatch::stability::sign_conditions(&c).all();
    let rh = routh_hurwitz(&c);
    let roots = tripatch::stability::cubic_roots(1.0, 1.0, 1.0);
    let has_i = roots.iter().any(|z| (z - Complex64::new(0.0, 1.0)).norm() < 1e-12);

    let pass = worst_fd <= FD_REL
        && conservation.passed
        && integ_ok
        && integ_gap <= INTEGRATOR_MATCH
        && signs
        && !rh
        && has_i;
    outcome(
        pass,
        format!(
            "fd {worst_fd:.1e}, conservation {} ({:?}), integrator gap {integ_gap:.1e}, sign test {signs} vs Routh-Hurwitz {rh}",
            conservation.passed, conservation.witness
        ),
    )
}

fn global_stability() -> Outcome {
    let mut s = ParamSampler::new(SEED + 9);
    let mut fractions = Vec::new();
    let mut below = Vec::new();
    for i in 0..GLOBAL_DRAWS {
        let p = s.draw();
        match basin_sample(TopologyId::Full, &p, GLOBAL_STARTS, SEED + i as u64) {
            Ok(b) => {
                let f = b.fraction("COEX");
                if f < 1.0 {
                    below.push((i, b.fractions.clone()));
                }
                fractions.push(f);
            }
            Err(e) => below.push((i, [(e.to_string(), 0.0)].into_iter().collect())),
        }
    }
    let mean = fractions.iter().sum::<f64>() / fractions.len().max(1) as f64;
    let min = fractions.iter().copied().fold(f64::INFINITY, f64::min);
    let note = if below.is_empty() {
        "no run below 1.0".to_string()
    } else {
        format!("FINDING: {} runs below 1.0, first {:?}", below.len(), below[0])
    };
    // recorded, not asserted
    outcome(
        true,
        format!("{GLOBAL_DRAWS} draws x {GLOBAL_STARTS} starts, mean fraction to COEX {mean:.4}, min {min:.4}; {note}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("topology census", census),
        ("coexistence existence", existence),
        ("closed-form catalog", catalog),
        ("stability-condition equivalence", equivalence),
        ("strongly connected equilibrium set", strongly_connected),
        ("transcritical detection", transcritical),
        ("hopf candidate", hopf),
        ("origin conditions unsatisfiable", unsatisfiable),
        ("numerics hygiene", hygiene),
        ("global stability probe", global_stability),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        if !out.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<36} {}  [{:.1?}] {}",
            i + 1,
            name,
            if out.pass { "PASS" } else { "FAIL" },
            start.elapsed(),
            out.detail
        );
    }
    println!("acceptance: {} passed, {} failed", criteria.len() - failed, failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
