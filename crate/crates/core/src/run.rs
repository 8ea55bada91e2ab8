//! Executes a [`RunConfig`] and streams report records.
//!
//! JSON output is one object per line, written as soon as each record is ready
//! (sweep points in sweep order regardless of which worker finishes first).
//! CSV output is buffered so the header can cover every column.

use serde::Serialize;
use serde_json::{Map, Value};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use crate::config::{Format, Quantity, RunConfig, Task};
use crate::error::{Error, Result};
use crate::model::{CurvatureMode, WarpedProduct};
use crate::oracle::{self, TestFunction};
use crate::spectra::{
    dirac_first_eigenvalue, eigen_summary, lambda1_base, lambda1_m, model_perelman_lambda,
    perelman_lambda, verify_inequalities, Estimate, PerelmanTarget, SolverOptions, Verdict,
    VerifyTarget,
};
use crate::sturm::observed_order;

/// Counts reported back to the caller once the run completes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunSummary {
    pub records: usize,
    pub violations: usize,
}

/// Record sink for one output format.
pub struct Emitter<'w> {
    out: &'w mut dyn Write,
    format: Format,
    rows: Vec<Vec<(String, String)>>,
    count: usize,
}

impl<'w> Emitter<'w> {
    pub fn new(out: &'w mut dyn Write, format: Format) -> Self {
        Self {
            out,
            format,
            rows: Vec::new(),
            count: 0,
        }
    }

    pub fn emit_value(&mut self, record: Value) -> Result<()> {
        self.count += 1;
        match self.format {
            Format::Json => {
                writeln!(self.out, "{record}").map_err(io_error)?;
                self.out.flush().map_err(io_error)
            }
            Format::Csv => {
                let mut row = Vec::new();
                flatten("", &record, &mut row);
                self.rows.push(row);
                Ok(())
            }
        }
    }

    pub fn emit<T: Serialize>(&mut self, record: &T) -> Result<()> {
        self.emit_value(serde_json::to_value(record).map_err(|e| Error::invariant(e.to_string()))?)
    }

    pub fn finish(self) -> Result<usize> {
        if self.format == Format::Csv && !self.rows.is_empty() {
            let mut header: Vec<String> = Vec::new();
            for row in &self.rows {
                for (k, _) in row {
                    if !header.contains(k) {
                        header.push(k.clone());
                    }
                }
            }
            let mut w = csv::Writer::from_writer(&mut *self.out);
            w.write_record(&header).map_err(csv_error)?;
            for row in &self.rows {
                let map: BTreeMap<&str, &str> =
                    row.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
                w.write_record(
                    header
                        .iter()
                        .map(|h| map.get(h.as_str()).copied().unwrap_or("")),
                )
                .map_err(csv_error)?;
            }
            w.flush().map_err(io_error)?;
        }
        Ok(self.count)
    }
}

fn io_error(e: std::io::Error) -> Error {
    Error::config(format!("cannot write output: {e}"))
}

fn csv_error(e: csv::Error) -> Error {
    Error::config(format!("cannot write CSV: {e}"))
}

// nested objects become dotted columns, arrays stay JSON text
fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, x, out);
            }
        }
        Value::Null => out.push((prefix.to_string(), String::new())),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

fn with_header(task: &str, hash: &str, body: Value) -> Value {
    let mut map = Map::new();
    map.insert("task".into(), Value::String(task.into()));
    map.insert("config_hash".into(), Value::String(hash.into()));
    if let Value::Object(b) = body {
        map.extend(b);
    }
    Value::Object(map)
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

/// Runs the task, writing records to `out`. `workers` bounds sweep concurrency.
pub fn run(
    config: &RunConfig,
    dir: &Path,
    workers: usize,
    out: &mut dyn Write,
    format: Format,
) -> Result<RunSummary> {
    config.validate(dir)?;
    let hash = config.hash();
    let mut em = Emitter::new(out, format);
    let mut violations = 0;
    match config.task {
        Task::Spectrum | Task::Verify => {
            for rec in single(config, dir, &hash)? {
                violations += count_violations(&rec);
                em.emit_value(rec)?;
            }
        }
        Task::Sweep => violations += sweep(config, dir, &hash, workers.max(1), &mut em)?,
        Task::Converge => {
            for rec in converge(config, dir, &hash)? {
                em.emit_value(rec)?;
            }
        }
        Task::Oracle => {
            for rec in oracle_task(config, dir, &hash)? {
                em.emit_value(rec)?;
            }
        }
    }
    let records = em.finish()?;
    Ok(RunSummary {
        records,
        violations,
    })
}

fn count_violations(rec: &Value) -> usize {
    let violated = Value::String(Verdict::Violated.as_str().into());
    let mut n = usize::from(rec.get("verdict") == Some(&violated));
    if let Some(Value::Array(reports)) = rec.get("reports") {
        n += reports
            .iter()
            .filter(|r| r.get("verdict") == Some(&violated))
            .count();
    }
    n
}

/// Records of a `spectrum` or `verify` run.
fn single(config: &RunConfig, dir: &Path, hash: &str) -> Result<Vec<Value>> {
    let task = config.task.as_str();
    let opts = &config.solver;
    let target = match (config.product(dir)?, config.model()?) {
        (Some(wp), _) => VerifyTarget::Product(wp),
        (None, Some(m)) => VerifyTarget::Model(m),
        (None, None) => return Err(Error::config("nothing to compute")),
    };
    match config.task {
        Task::Verify => Ok(verify_inequalities(&target, opts)?
            .iter()
            .map(|r| with_header(task, hash, to_value(r)))
            .collect()),
        _ => Ok(vec![with_header(task, hash, spectrum_body(&target, opts)?)]),
    }
}

fn spectrum_body(target: &VerifyTarget, opts: &SolverOptions) -> Result<Value> {
    let mut v = match target {
        VerifyTarget::Product(wp) => {
            let mut v = to_value(&eigen_summary(wp, opts)?);
            v.as_object_mut()
                .unwrap()
                .insert("space".into(), Value::String(wp.describe()));
            v
        }
        VerifyTarget::Model(m) => {
            let lambda = model_perelman_lambda(m, opts)?;
            serde_json::json!({
                "space": m.describe(),
                "dirac_lambda1": dirac_first_eigenvalue(m)?,
                "perelman": { "value": lambda.value, "error": lambda.error },
            })
        }
    };
    let m = v.as_object_mut().unwrap();
    m.insert("n".into(), Value::from(opts.n));
    m.insert("tol".into(), Value::from(opts.tol));
    Ok(v)
}

fn sweep(
    config: &RunConfig,
    dir: &Path,
    hash: &str,
    workers: usize,
    em: &mut Emitter<'_>,
) -> Result<usize> {
    let points = config.sweep_points()?;
    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<(usize, Result<Value>)>();
    let mut violations = 0;
    let mut first_error = None;
    std::thread::scope(|scope| {
        for _ in 0..workers.min(points.len()) {
            let tx = tx.clone();
            let (points, next) = (&points, &next);
            scope.spawn(move || loop {
                let k = next.fetch_add(1, Ordering::SeqCst);
                if k >= points.len() {
                    break;
                }
                let p = &points[k];
                let body = single(&p.config, dir, hash).map(|recs| {
                    let mut map = Map::new();
                    map.insert("task".into(), Value::String("sweep".into()));
                    map.insert("config_hash".into(), Value::String(hash.into()));
                    map.insert("index".into(), Value::from(p.index));
                    let point: Map<String, Value> = p
                        .point
                        .iter()
                        .map(|(k, v)| (k.clone(), to_value(v)))
                        .collect();
                    map.insert("point".into(), Value::Object(point));
                    map.insert("n".into(), Value::from(p.config.solver.n));
                    match p.config.task {
                        Task::Verify => {
                            let tol = recs
                                .iter()
                                .filter_map(|r| r.get("tol")?.as_f64())
                                .fold(0.0, f64::max);
                            map.insert("tol".into(), Value::from(tol));
                            let reports = recs
                                .into_iter()
                                .map(|mut r| {
                                    let o = r.as_object_mut().unwrap();
                                    o.remove("task");
                                    o.remove("config_hash");
                                    r
                                })
                                .collect();
                            map.insert("reports".into(), Value::Array(reports));
                        }
                        _ => {
                            let mut r = recs.into_iter().next().unwrap();
                            let o = r.as_object_mut().unwrap();
                            o.remove("task");
                            o.remove("config_hash");
                            map.insert("tol".into(), o.remove("tol").unwrap_or(Value::Null));
                            map.insert("summary".into(), r);
                        }
                    }
                    Value::Object(map)
                });
                if tx.send((k, body)).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        // emit in sweep order as soon as the next index is available
        let mut pending = BTreeMap::new();
        let mut expect = 0;
        for (k, res) in rx {
            pending.insert(k, res);
            while let Some(res) = pending.remove(&expect) {
                expect += 1;
                if first_error.is_some() {
                    continue;
                }
                match res.and_then(|rec| {
                    violations += count_violations(&rec);
                    em.emit_value(rec)
                }) {
                    Ok(()) => {}
                    Err(e) => {
                        first_error = Some(e);
                        // stop handing out new points
                        next.store(usize::MAX / 2, Ordering::SeqCst);
                    }
                }
            }
        }
    });
    match first_error {
        Some(e) => Err(e),
        None => Ok(violations),
    }
}

fn quantity_at(wp: &WarpedProduct, q: Quantity, n: usize) -> Result<f64> {
    let opts = SolverOptions {
        n,
        richardson: false,
        tol: 1e-6,
    };
    Ok(match q {
        Quantity::Lambda1Base => lambda1_base(wp.base(), &opts)?.value,
        Quantity::Lambda1M => lambda1_m(wp, &opts)?.value,
        Quantity::PerelmanBase => {
            perelman_lambda(
                PerelmanTarget::Base(wp.base()),
                &opts,
                CurvatureMode::Standard,
            )?
            .grid_value
        }
        Quantity::PerelmanM => {
            perelman_lambda(PerelmanTarget::Product(wp), &opts, CurvatureMode::Standard)?.grid_value
        }
    })
}

#[derive(Serialize)]
struct ConvergeRecord {
    quantity: Quantity,
    n: usize,
    value: f64,
    order: Option<f64>,
    tol: f64,
}

fn converge(config: &RunConfig, dir: &Path, hash: &str) -> Result<Vec<Value>> {
    let c = config.converge.as_ref().expect("validated");
    let wp = config.product(dir)?.expect("validated");
    let values: Vec<f64> = c
        .levels
        .iter()
        .map(|&n| quantity_at(&wp, c.quantity, n))
        .collect::<Result<_>>()?;
    Ok(c.levels
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let order = (k >= 2)
                .then(|| observed_order(values[k - 2], values[k - 1], values[k]))
                .flatten();
            let rec = ConvergeRecord {
                quantity: c.quantity,
                n,
                value: values[k],
                order,
                tol: config.solver.tol,
            };
            with_header("converge", hash, to_value(&rec))
        })
        .collect())
}

#[derive(Serialize)]
struct OracleRecord {
    quantity: &'static str,
    separation: f64,
    full_grid: f64,
    full_grid_error: Option<f64>,
    relative_difference: f64,
    n: usize,
    n_b: usize,
    n_f: usize,
    tol: f64,
    agrees: bool,
}

#[derive(Serialize)]
struct LemmaRecord {
    quantity: &'static str,
    n: usize,
    n_f: usize,
    residual: f64,
    first_identity_residual: f64,
    flipped_sign_residual: f64,
    order: Option<f64>,
    tol: f64,
}

fn oracle_task(config: &RunConfig, dir: &Path, hash: &str) -> Result<Vec<Value>> {
    let oc = config.oracle.unwrap_or_default();
    let wp = config.product(dir)?.expect("validated");
    let opts = &config.solver;
    let mut out = Vec::new();
    let sep_l1 = lambda1_m(&wp, opts)?.value;
    let sep_p = perelman_lambda(PerelmanTarget::Product(&wp), opts, CurvatureMode::Standard)?.value;
    let (grid_l1, grid_p) = if oc.richardson {
        (
            oracle::extrapolated_lambda1(&wp, oc.n_b, oc.n_f)?,
            oracle::extrapolated_perelman(&wp, oc.n_b, oc.n_f, CurvatureMode::Standard)?,
        )
    } else {
        (
            Estimate {
                value: oracle::full_grid_lambda1(&wp, oc.n_b, oc.n_f)?,
                error: f64::NAN,
            },
            Estimate {
                value: oracle::full_grid_perelman(&wp, oc.n_b, oc.n_f, CurvatureMode::Standard)?,
                error: f64::NAN,
            },
        )
    };
    for (quantity, sep, grid) in [
        ("lambda1_m", sep_l1, grid_l1),
        ("perelman_m", sep_p, grid_p),
    ] {
        // relative to the grid value, absolute when that is ~0 (scalar-flat cases)
        let rel = (sep - grid.value).abs() / grid.value.abs().max(1e-3);
        let rec = OracleRecord {
            quantity,
            separation: sep,
            full_grid: grid.value,
            full_grid_error: grid.error.is_finite().then_some(grid.error),
            relative_difference: rel,
            n: opts.n,
            n_b: oc.n_b,
            n_f: oc.n_f,
            tol: oc.tol,
            agrees: rel <= oc.tol,
        };
        out.push(with_header("oracle", hash, to_value(&rec)));
    }
    if !matches!(wp.base(), crate::model::BaseSpec::SphereLatitude { .. }) {
        let levels = [opts.n / 4, opts.n / 2, opts.n];
        let res: Vec<_> = levels
            .iter()
            .map(|&n| oracle::lemma1_residual(&wp, TestFunction::cross(), n, 32))
            .collect::<Result<_>>()?;
        let last = res[2];
        let order = (res[1].warped > 0.0 && last.warped > 0.0)
            .then(|| (res[1].warped / last.warped).log2());
        let rec = LemmaRecord {
            quantity: "lemma1_residual",
            n: opts.n,
            n_f: 32,
            residual: last.warped,
            first_identity_residual: last.first_identity,
            flipped_sign_residual: last.flipped_sign,
            order,
            tol: opts.tol,
        };
        out.push(with_header("oracle", hash, to_value(&rec)));
    }
    Ok(out)
}
