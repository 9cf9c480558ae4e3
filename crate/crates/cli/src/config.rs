//! Run configuration: a single JSON document.
//!
//! `r` and `k` are either 3-arrays or objects keyed `r1..r3` / `k1..k3`;
//! `m` is either a 3x3 array (diagonal must be zero) or an object
//! keyed `m12, m13, m21, m23, m31, m32`. Everything else is optional.

use std::fmt;

use serde::Serialize;
use serde_json::{Map, Value};

use tripatch::{ModelParams, ParamName, TopologyId};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepOptions {
    pub param: ParamName,
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulateOptions {
    pub x0: Option<[f64; 3]>,
    pub t_end: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for SimulateOptions {
    fn default() -> Self {
        SimulateOptions {
            x0: None,
            t_end: 100.0,
            rel_tol: 1e-9,
            abs_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub topology: TopologyId,
    pub r: [f64; 3],
    pub k: [f64; 3],
    pub m: [[f64; 3]; 3],
    pub seed: u64,
    pub samples: Option<usize>,
    pub sweep: Option<SweepOptions>,
    pub simulate: SimulateOptions,
}

impl RunConfig {
    pub fn params(&self) -> Result<ModelParams, ConfigError> {
        ModelParams::new(self.r, self.k, self.m).map_err(|e| ConfigError(e.to_string()))
    }

    /// Canonical form: arrays for the model, fixed key order, every option
    /// written out.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

fn number(v: &Value, field: &str) -> Result<f64, ConfigError> {
    match v.as_f64() {
        Some(x) => Ok(x),
        None => err(format!("field \"{field}\": expected a number, found {v}")),
    }
}

fn vector(root: &Map<String, Value>, name: &str) -> Result<[f64; 3], ConfigError> {
    let Some(v) = root.get(name) else {
        return err(format!("missing field \"{name}\""));
    };
    match v {
        Value::Array(a) => {
            if a.len() != 3 {
                return err(format!("field \"{name}\": expected 3 entries, found {}", a.len()));
            }
            let mut out = [0.0; 3];
            for (i, x) in a.iter().enumerate() {
                out[i] = number(x, &format!("{name}{}", i + 1))?;
            }
            Ok(out)
        }
        Value::Object(o) => {
            let mut out = [0.0; 3];
            for (i, slot) in out.iter_mut().enumerate() {
                let key = format!("{name}{}", i + 1);
                match o.get(&key) {
                    Some(x) => *slot = number(x, &key)?,
                    None => return err(format!("missing field \"{key}\"")),
                }
            }
            unknown_keys(o, name, &["1", "2", "3"].map(|s| format!("{name}{s}")))?;
            Ok(out)
        }
        _ => err(format!("field \"{name}\": expected an array or an object")),
    }
}

fn matrix(root: &Map<String, Value>) -> Result<[[f64; 3]; 3], ConfigError> {
    let Some(v) = root.get("m") else {
        return err("missing field \"m\"");
    };
    let mut out = [[0.0; 3]; 3];
    match v {
        Value::Array(rows) => {
            if rows.len() != 3 {
                return err(format!("field \"m\": expected 3 rows, found {}", rows.len()));
            }
            for (i, row) in rows.iter().enumerate() {
                let Some(row) = row.as_array().filter(|r| r.len() == 3) else {
                    return err(format!("field \"m\": row {} must have 3 entries", i + 1));
                };
                for (j, x) in row.iter().enumerate() {
                    out[i][j] = number(x, &format!("m{}{}", i + 1, j + 1))?;
                }
            }
        }
        Value::Object(o) => {
            let mut keys = Vec::new();
            for i in 0..3 {
                for j in 0..3 {
                    if i == j {
                        continue;
                    }
                    let key = format!("m{}{}", i + 1, j + 1);
                    match o.get(&key) {
                        Some(x) => out[i][j] = number(x, &key)?,
                        None => return err(format!("missing field \"{key}\"")),
                    }
                    keys.push(key);
                }
            }
            unknown_keys(o, "m", &keys)?;
        }
        _ => return err("field \"m\": expected a 3x3 array or an object"),
    }
    Ok(out)
}

fn unknown_keys(o: &Map<String, Value>, ctx: &str, allowed: &[String]) -> Result<(), ConfigError> {
    match o.keys().find(|k| !allowed.contains(k)) {
        Some(k) => err(format!("field \"{ctx}\": unknown key \"{k}\"")),
        None => Ok(()),
    }
}

fn opt_f64(o: &Map<String, Value>, key: &str, ctx: &str) -> Result<Option<f64>, ConfigError> {
    o.get(key)
        .filter(|v| !v.is_null())
        .map(|v| number(v, &format!("{ctx}.{key}")))
        .transpose()
}

fn opt_usize(o: &Map<String, Value>, key: &str, ctx: &str) -> Result<Option<usize>, ConfigError> {
    o.get(key)
        .filter(|v| !v.is_null())
        .map(|v| match v.as_u64() {
            Some(n) => Ok(n as usize),
            None => err(format!("field \"{ctx}{key}\": expected a nonnegative integer, found {v}")),
        })
        .transpose()
}

fn object<'a>(root: &'a Map<String, Value>, key: &str) -> Result<Option<&'a Map<String, Value>>, ConfigError> {
    match root.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::Object(o)) => Ok(Some(o)),
        Some(_) => err(format!("field \"{key}\": expected an object")),
    }
}

pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| ConfigError(format!("config parse error at line {}, column {}: {e}", e.line(), e.column())))?;
    let Value::Object(root) = value else {
        return err("config must be a JSON object");
    };
    let allowed = ["topology", "r", "k", "m", "seed", "samples", "sweep", "simulate"].map(String::from);
    unknown_keys(&root, "config", &allowed)?;

    let topology = match root.get("topology") {
        None => TopologyId::Full,
        Some(Value::String(s)) => s
            .parse()
            .map_err(|_| ConfigError(format!("field \"topology\": unknown topology \"{s}\"")))?,
        Some(v) => return err(format!("field \"topology\": expected a string, found {v}")),
    };
    let r = vector(&root, "r")?;
    let k = vector(&root, "k")?;
    let m = matrix(&root)?;
    let seed = match root.get("seed") {
        None => 0,
        Some(v) => match v.as_u64() {
            Some(s) => s,
            None => return err(format!("field \"seed\": expected a nonnegative integer, found {v}")),
        },
    };
    let samples = opt_usize(&root, "samples", "")?;

    let sweep = match object(&root, "sweep")? {
        None => None,
        Some(o) => {
            unknown_keys(o, "sweep", &["param", "lo", "hi", "steps"].map(String::from))?;
            let param = match o.get("param") {
                Some(Value::String(s)) => s
                    .parse()
                    .map_err(|_| ConfigError(format!("field \"sweep.param\": unknown parameter \"{s}\"")))?,
                Some(v) => return err(format!("field \"sweep.param\": expected a string, found {v}")),
                None => return err("missing field \"sweep.param\""),
            };
            let lo = opt_f64(o, "lo", "sweep")?.ok_or_else(|| ConfigError("missing field \"sweep.lo\"".into()))?;
            let hi = opt_f64(o, "hi", "sweep")?.ok_or_else(|| ConfigError("missing field \"sweep.hi\"".into()))?;
            let steps = opt_usize(o, "steps", "sweep.")?.unwrap_or(50);
            Some(SweepOptions { param, lo, hi, steps })
        }
    };

    let mut simulate = SimulateOptions::default();
    if let Some(o) = object(&root, "simulate")? {
        unknown_keys(o, "simulate", &["x0", "t_end", "rel_tol", "abs_tol"].map(String::from))?;
        if let Some(x0) = o.get("x0") {
            if !x0.is_null() {
                let mut wrap = Map::new();
                wrap.insert("x0".into(), x0.clone());
                let v = vector(&wrap, "x0")?;
                simulate.x0 = Some(v);
            }
        }
        if let Some(t) = opt_f64(o, "t_end", "simulate")? {
            simulate.t_end = t;
        }
        if let Some(t) = opt_f64(o, "rel_tol", "simulate")? {
            simulate.rel_tol = t;
        }
        if let Some(t) = opt_f64(o, "abs_tol", "simulate")? {
            simulate.abs_tol = t;
        }
    }

    let cfg = RunConfig {
        topology,
        r,
        k,
        m,
        seed,
        samples,
        sweep,
        simulate,
    };
    cfg.params()?;
    Ok(cfg)
}
