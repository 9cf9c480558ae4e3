use std::io::Write;

use serde_json::{json, Value};

use tripatch::bifurcation::{hopf_candidate, sweep as run_sweep, transcritical_thresholds};
use tripatch::equilibria::{admitted_labels, find_all_equilibria};
use tripatch::model::{ModelState, Vec3};
use tripatch::simulate::{basin_sample, integrate};
use tripatch::stability::classify;
use tripatch::topology::{apply_topology, enumerate_canonical};
use tripatch::verify::run_battery_with;
use tripatch::{ModelParams, TopologyId};

use crate::config::RunConfig;
use crate::Failure;

fn params(cfg: &RunConfig) -> Result<ModelParams, Failure> {
    let p = cfg.params().map_err(|e| Failure::usage(e.0))?;
    Ok(apply_topology(&p, cfg.topology))
}

fn fmt(x: f64) -> String {
    format!("{x}")
}

pub fn enumerate(out: Box<dyn Write>) -> Result<(), Failure> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["topology", "arcs", "zeroed", "strongly_connected", "equilibria"])?;
    for (topo, arcs) in enumerate_canonical() {
        let zeroed: Vec<String> = topo.zeroed_names().iter().map(|p| p.to_string()).collect();
        let labels: Vec<&str> = admitted_labels(topo).iter().map(|l| l.token()).collect();
        w.write_record([
            topo.token().to_string(),
            arcs.to_string(),
            zeroed.join(";"),
            topo.is_strongly_connected().to_string(),
            labels.join(";"),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn analyze(cfg: &RunConfig, mut out: Box<dyn Write>) -> Result<(), Failure> {
    let p = params(cfg)?;
    let topo = cfg.topology;
    let eqs = find_all_equilibria(topo, &p)?;
    let mut rows = Vec::new();
    for e in &eqs {
        let mut entry = json!({
            "label": e.label,
            "point": e.point.iter().map(|v| if v.is_finite() { json!(v) } else { Value::Null }).collect::<Vec<_>>(),
            "feasible": e.feasible,
            "residual": if e.residual.is_finite() { json!(e.residual) } else { Value::Null },
        });
        if let Ok(rep) = classify(topo, e, &p) {
            entry["eigenvalues"] = json!(rep.eigenvalues);
            entry["classification"] = json!(rep.classification);
            entry["coefficients"] = json!(rep.coefficients);
            entry["sign_test"] = json!(rep.sign_test);
            entry["routh_hurwitz"] = json!(rep.routh_hurwitz);
            entry["conditions"] = json!(rep.conditions);
            entry["conditions_verdict"] = json!(rep.conditions_verdict);
        }
        rows.push(entry);
    }
    let mut doc = json!({
        "topology": topo,
        "config": serde_json::from_str::<Value>(&cfg.to_canonical_json()).expect("canonical config is JSON"),
        "equilibria": rows,
        "thresholds": transcritical_thresholds(topo, &p),
    });
    if topo == TopologyId::Ex8 {
        let (r2, validity) = hopf_candidate(&p);
        doc["hopf_candidate"] = json!({ "r2": r2, "validity": validity });
    }
    serde_json::to_writer_pretty(&mut out, &doc).map_err(|e| Failure::runtime(e.to_string()))?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

pub const SWEEP_HEADER: [&str; 11] = [
    "param_name",
    "param_value",
    "eq_label",
    "p1",
    "p2",
    "p3",
    "feasible",
    "class",
    "lead_re",
    "lead_im",
    "crossing",
];

pub fn sweep(cfg: &RunConfig, out: Box<dyn Write>) -> Result<(), Failure> {
    let p = params(cfg)?;
    let opts = cfg.sweep.as_ref().expect("sweep options resolved by the caller");
    let records = run_sweep(cfg.topology, &p, opts.param, opts.lo, opts.hi, opts.steps)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    let point = |x: &Vec3| x.map(fmt);
    for rec in &records {
        for (e, rep) in rec.equilibria.iter().zip(&rec.reports) {
            // closed forms that are not real at this value have no row
            let Some(rep) = rep else { continue };
            let [p1, p2, p3] = point(&e.point);
            let lead = rep.leading();
            w.write_record([
                rec.param_name.to_string(),
                fmt(rec.param_value),
                e.label.token().to_string(),
                p1,
                p2,
                p3,
                e.feasible.to_string(),
                rep.classification.token().to_string(),
                fmt(lead.re),
                fmt(lead.im),
                String::new(),
            ])?;
        }
    }
    for rec in &records {
        for c in &rec.crossings {
            let [p1, p2, p3] = point(&c.point);
            w.write_record([
                rec.param_name.to_string(),
                fmt(c.param_value),
                c.label.token().to_string(),
                p1,
                p2,
                p3,
                "true".to_string(),
                "CROSSING".to_string(),
                fmt(c.eigenvalue.re),
                fmt(c.eigenvalue.im),
                c.kind.token().to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn simulate(cfg: &RunConfig, out: Box<dyn Write>) -> Result<(), Failure> {
    let p = params(cfg)?;
    let s = &cfg.simulate;
    let x0 = s.x0.unwrap_or(p.k().map(|k| 0.5 * k));
    let state = ModelState::new(x0).map_err(|e| Failure::usage(format!("simulate.x0: {e}")))?;
    let traj = integrate(&p, &state, s.t_end, s.rel_tol, s.abs_tol)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "p1", "p2", "p3"])?;
    for (t, x) in traj.times.iter().zip(&traj.states) {
        w.write_record([fmt(*t), fmt(x[0]), fmt(x[1]), fmt(x[2])])?;
    }
    w.flush()?;
    eprintln!("terminal: {}", traj.terminal.token());
    Ok(())
}

pub fn basin(cfg: &RunConfig, n: usize, out: Box<dyn Write>) -> Result<(), Failure> {
    let p = params(cfg)?;
    let b = basin_sample(cfg.topology, &p, n, cfg.seed)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["seed", "samples", "label", "fraction"])?;
    for (label, f) in &b.fractions {
        w.write_record([cfg.seed.to_string(), b.n.to_string(), label.clone(), fmt(*f)])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(not(feature = "inject-sign-flip"))]
fn field(p: &ModelParams, x: &Vec3) -> Vec3 {
    p.field(x)
}

#[cfg(feature = "inject-sign-flip")]
fn field(p: &ModelParams, x: &Vec3) -> Vec3 {
    let mut f = p.field(x);
    for j in 1..3 {
        f[0] -= 2.0 * p.rate(0, j) * x[j];
    }
    f
}

pub fn verify(seed: u64, n: usize, mut out: Box<dyn Write>) -> Result<(), Failure> {
    let report = run_battery_with(&field, seed, n);
    writeln!(out, "# verify seed={seed} samples={n}")?;
    for r in &report.results {
        let status = if r.passed { "PASS" } else { "FAIL" };
        match &r.witness {
            Some(w) => writeln!(out, "{status} {} ({} cases): {w}", r.name, r.checked)?,
            None => writeln!(out, "{status} {} ({} cases)", r.name, r.checked)?,
        }
    }
    let failed = report.results.iter().filter(|r| !r.passed).count();
    writeln!(out, "{} properties, {failed} failed", report.results.len())?;
    out.flush()?;
    if failed > 0 {
        return Err(Failure::runtime(format!("{failed} properties failed")));
    }
    Ok(())
}
