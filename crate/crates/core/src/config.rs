//! Run configuration: a TOML file with one section per ingredient.
//!
//! ```toml
//! task = "verify"            # spectrum | verify | sweep | converge | oracle
//!
//! [base]
//! type = "circle"            # circle | interval | sphere
//! length = 6.283185307179586 # sphere: radius = .., dim = ..
//!
//! [fiber]
//! type = "round_sphere"      # circle (length) | round_sphere (dim) | flat_torus (sides)
//! dim = 2
//!
//! [warp]
//! family = "cosine_bump"     # constant (a) | cosine_bump (a, b, m) | tabulated (samples or samples_path)
//! a = 1.0
//! b = 0.2
//! m = 1
//!
//! [solver]
//! n = 512
//! richardson = true
//! tol = 1e-6
//! ```
//!
//! `[model]` (round_sphere with dim/radius, or flat_torus with sides/spin) replaces
//! base/fiber/warp for the Dirac comparison. `[sweep]`, `[converge]`, `[oracle]` and
//! `[output]` configure the corresponding tasks. Unknown keys are rejected.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::model::{BaseSpec, FiberSpec, WarpSpec, WarpedProduct};
use crate::spectra::{ModelSpace, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Spectrum,
    Verify,
    Sweep,
    Converge,
    Oracle,
}

impl Task {
    pub fn as_str(&self) -> &'static str {
        match self {
            Task::Spectrum => "spectrum",
            Task::Verify => "verify",
            Task::Sweep => "sweep",
            Task::Converge => "converge",
            Task::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseConfig {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberConfig {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sides: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WarpConfig {
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<f64>>,
    /// CSV of samples, resolved against the config file's directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples_path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sides: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spin: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    /// Dotted key into this config, e.g. `warp.b` or `fiber`.
    pub name: String,
    pub values: Vec<toml::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// What to run at each grid point: `verify` or `spectrum`.
    #[serde(default = "default_sweep_task")]
    pub task: Task,
    pub axes: Vec<SweepAxis>,
}

fn default_sweep_task() -> Task {
    Task::Verify
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Lambda1Base,
    Lambda1M,
    PerelmanBase,
    PerelmanM,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeConfig {
    pub quantity: Quantity,
    /// Grid sizes, each twice the previous.
    #[serde(default = "default_levels")]
    pub levels: Vec<usize>,
}

fn default_levels() -> Vec<usize> {
    vec![64, 128, 256, 512]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    pub n_b: usize,
    pub n_f: usize,
    /// Combine `n_b x n_f` with `2n_b x 2n_f`.
    pub richardson: bool,
    /// Relative agreement expected between the two code paths.
    pub tol: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            n_b: 64,
            n_f: 64,
            richardson: true,
            tol: 5e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub format: Format,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub task: Task,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<BaseConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fiber: Option<FiberConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warp: Option<WarpConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelConfig>,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub converge: Option<ConvergeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

fn need<T: Copy>(v: Option<T>, key: &str) -> Result<T> {
    v.ok_or_else(|| Error::config(format!("missing key `{key}`")))
}

// model-level failures in a config are the user's input, not solver faults
fn as_config(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

impl BaseConfig {
    pub fn to_spec(&self) -> Result<BaseSpec> {
        match self.kind.as_str() {
            "circle" => BaseSpec::circle(need(self.length, "base.length")?),
            "interval" => BaseSpec::interval(need(self.length, "base.length")?),
            "sphere" => BaseSpec::sphere(
                need(self.dim, "base.dim")?,
                need(self.radius, "base.radius")?,
            ),
            other => Err(Error::config(format!(
                "unknown base.type `{other}` (circle | interval | sphere)"
            ))),
        }
    }
}

impl FiberConfig {
    pub fn to_spec(&self) -> Result<FiberSpec> {
        let spec = match self.kind.as_str() {
            "circle" => FiberSpec::Circle {
                length: need(self.length, "fiber.length")?,
            },
            "round_sphere" => FiberSpec::RoundSphere {
                dim: need(self.dim, "fiber.dim")?,
            },
            "flat_torus" => FiberSpec::FlatTorus {
                sides: self
                    .sides
                    .clone()
                    .ok_or_else(|| Error::config("missing key `fiber.sides`"))?,
            },
            other => {
                return Err(Error::config(format!(
                    "unknown fiber.type `{other}` (circle | round_sphere | flat_torus)"
                )))
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl WarpConfig {
    pub fn to_spec(&self, dir: &Path) -> Result<WarpSpec> {
        match self.family.as_str() {
            "constant" => Ok(WarpSpec::Constant {
                a: need(self.a, "warp.a")?,
            }),
            "cosine_bump" => Ok(WarpSpec::CosineBump {
                a: need(self.a, "warp.a")?,
                b: need(self.b, "warp.b")?,
                m: self.m.unwrap_or(1),
            }),
            "tabulated" => {
                let samples = match (&self.samples, &self.samples_path) {
                    (Some(s), None) => s.clone(),
                    (None, Some(p)) => read_samples(&dir.join(p))?,
                    _ => {
                        return Err(Error::config(
                            "tabulated warp needs exactly one of `samples`, `samples_path`",
                        ))
                    }
                };
                Ok(WarpSpec::Tabulated { samples })
            }
            other => Err(Error::config(format!(
                "unknown warp.family `{other}` (constant | cosine_bump | tabulated)"
            ))),
        }
    }
}

fn read_samples(path: &Path) -> Result<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Error::config(format!("cannot read warp samples {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
        for field in rec.iter().filter(|f| !f.is_empty()) {
            out.push(field.parse::<f64>().map_err(|_| {
                Error::config(format!("{}: `{field}` is not a number", path.display()))
            })?);
        }
    }
    Ok(out)
}

impl ModelConfig {
    pub fn to_space(&self) -> Result<ModelSpace> {
        let m = match self.kind.as_str() {
            "round_sphere" => ModelSpace::RoundSphere {
                dim: need(self.dim, "model.dim")?,
                radius: need(self.radius, "model.radius")?,
            },
            "flat_torus" => {
                let sides = self
                    .sides
                    .clone()
                    .ok_or_else(|| Error::config("missing key `model.sides`"))?;
                let spin = self.spin.clone().unwrap_or_else(|| vec![0.0; sides.len()]);
                ModelSpace::FlatTorus { sides, spin }
            }
            other => {
                return Err(Error::config(format!(
                    "unknown model.type `{other}` (round_sphere | flat_torus)"
                )))
            }
        };
        m.validate()?;
        Ok(m)
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(e.to_string().trim_end().to_string()))
    }

    /// Reads a config file; also returns the directory relative paths resolve against.
    pub fn load(path: &Path) -> Result<(Self, PathBuf)> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        let cfg = Self::from_toml_str(&text)?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((cfg, dir))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    /// SHA-256 of the canonical serialization, hex encoded.
    pub fn hash(&self) -> String {
        Sha256::digest(self.to_toml_string().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    /// The warped product described by `[base]`, `[fiber]`, `[warp]`, if any.
    ///
    /// A base without fiber or warp still yields a product (unit circle fiber,
    /// `f = 1`) so base-only quantities can be computed.
    pub fn product(&self, dir: &Path) -> Result<Option<WarpedProduct>> {
        let Some(base) = &self.base else {
            if self.fiber.is_some() || self.warp.is_some() {
                return Err(Error::config("missing section `[base]`"));
            }
            return Ok(None);
        };
        let base = base.to_spec()?;
        let fiber = match &self.fiber {
            Some(f) => f.to_spec()?,
            None => FiberSpec::Circle { length: 1.0 },
        };
        let warp = match &self.warp {
            Some(w) => w.to_spec(dir)?,
            None => WarpSpec::Constant { a: 1.0 },
        };
        WarpedProduct::new(base, fiber, warp)
            .map(Some)
            .map_err(as_config)
    }

    pub fn model(&self) -> Result<Option<ModelSpace>> {
        self.model.as_ref().map(ModelConfig::to_space).transpose()
    }

    /// Checks everything the selected task needs, without solving anything.
    pub fn validate(&self, dir: &Path) -> Result<()> {
        self.solver.validate()?;
        let product = self.product(dir)?;
        let model = self.model()?;
        if product.is_some() && model.is_some() {
            return Err(Error::config(
                "give either [base]/[fiber]/[warp] or [model], not both",
            ));
        }
        match self.task {
            Task::Spectrum | Task::Verify => {
                if product.is_none() && model.is_none() {
                    return Err(Error::config(
                        "task needs [base] (with [fiber], [warp]) or [model]",
                    ));
                }
            }
            Task::Sweep => {
                let sweep = self
                    .sweep
                    .as_ref()
                    .ok_or_else(|| Error::config("task `sweep` needs a [sweep] section"))?;
                if !matches!(sweep.task, Task::Spectrum | Task::Verify) {
                    return Err(Error::config("sweep.task must be `spectrum` or `verify`"));
                }
                if sweep.axes.is_empty() || sweep.axes.iter().any(|a| a.values.is_empty()) {
                    return Err(Error::config(
                        "sweep needs at least one axis, each with values",
                    ));
                }
                for point in self.sweep_points()? {
                    point.config.validate(dir)?;
                }
            }
            Task::Converge => {
                let c = self
                    .converge
                    .as_ref()
                    .ok_or_else(|| Error::config("task `converge` needs a [converge] section"))?;
                if product.is_none() {
                    return Err(Error::config("task `converge` needs [base]"));
                }
                if c.levels.len() < 3
                    || c.levels[0] < 32
                    || c.levels.windows(2).any(|w| w[1] != 2 * w[0])
                {
                    return Err(Error::config(
                        "converge.levels needs >= 3 sizes, each twice the previous, from >= 32",
                    ));
                }
            }
            Task::Oracle => {
                if product.is_none() {
                    return Err(Error::config(
                        "task `oracle` needs [base], [fiber] and [warp]",
                    ));
                }
            }
        }
        Ok(())
    }

    /// The configs of every sweep grid point, in row-major order over the axes
    /// (last axis fastest).
    pub fn sweep_points(&self) -> Result<Vec<SweepPoint>> {
        let sweep = self
            .sweep
            .as_ref()
            .ok_or_else(|| Error::config("missing [sweep]"))?;
        let mut raw = toml::Value::try_from(self).map_err(|e| Error::config(e.to_string()))?;
        let table = raw.as_table_mut().expect("config serializes to a table");
        table.remove("sweep");
        table.insert(
            "task".into(),
            toml::Value::String(sweep.task.as_str().into()),
        );

        let sizes: Vec<usize> = sweep.axes.iter().map(|a| a.values.len()).collect();
        let total: usize = sizes.iter().product();
        let mut out = Vec::with_capacity(total);
        for index in 0..total {
            let mut rem = index;
            let mut picks = vec![0; sizes.len()];
            for k in (0..sizes.len()).rev() {
                picks[k] = rem % sizes[k];
                rem /= sizes[k];
            }
            let mut value = raw.clone();
            let mut point = Vec::new();
            for (axis, &pick) in sweep.axes.iter().zip(&picks) {
                let v = axis.values[pick].clone();
                set_path(&mut value, &axis.name, v.clone())?;
                point.push((axis.name.clone(), v));
            }
            let config: RunConfig = value.try_into().map_err(|e: toml::de::Error| {
                Error::config(format!("sweep axis produced an invalid config: {e}"))
            })?;
            out.push(SweepPoint {
                index,
                point,
                config,
            });
        }
        Ok(out)
    }
}

/// One grid point of a sweep.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub index: usize,
    pub point: Vec<(String, toml::Value)>,
    pub config: RunConfig,
}

fn set_path(root: &mut toml::Value, path: &str, value: toml::Value) -> Result<()> {
    let mut cur = root;
    let parts: Vec<&str> = path.split('.').collect();
    for (k, part) in parts.iter().enumerate() {
        let table = cur.as_table_mut().ok_or_else(|| {
            Error::config(format!(
                "sweep axis `{path}`: `{part}` is not inside a section"
            ))
        })?;
        if k + 1 == parts.len() {
            table.insert(part.to_string(), value);
            return Ok(());
        }
        cur = table
            .get_mut(*part)
            .ok_or_else(|| Error::config(format!("sweep axis `{path}`: no section `{part}`")))?;
    }
    Err(Error::config("empty sweep axis name"))
}
