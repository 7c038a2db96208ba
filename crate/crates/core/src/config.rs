//! Flat `key = value` run configuration with dotted section keys.
//!
//! ```text
//! # example-1 at the published spacing
//! model = multiplicative
//! model.k_left = 3
//! model.k_right = 1
//! domain.x_min = -1
//! domain.x_max = 1
//! dx = 0.04
//! dt = 0.0013333333333333333
//! scheme = nt
//! limiter = minmod
//! cfl_level = max-principle
//! initial = constant
//! initial.value = 0.15
//! t_end = 0.8, 1.6
//! output_dir = out
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{DfluxError, Result};
use crate::experiments::ExperimentSpec;
use crate::flux::ModelSelector;
use crate::grid::InitialData;
use crate::limiter::{LimiterConfig, DEFAULT_ALPHA};
use crate::scheme::{CflLevel, Scheme};

const KNOWN_KEYS: &[&str] = &[
    "model",
    "model.k_left",
    "model.k_right",
    "model.k",
    "domain.x_min",
    "domain.x_max",
    "dx",
    "lambda",
    "dt",
    "scheme",
    "limiter",
    "limiter.k_tilde",
    "limiter.alpha",
    "cfl_level",
    "t_end",
    "initial",
    "initial.value",
    "initial.at",
    "initial.left",
    "initial.right",
    "initial.breaks",
    "initial.values",
    "diagnostics",
    "diagnostics.window_x",
    "output_dir",
    "reference.dx",
];

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: ModelSelector,
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    pub lambda: f64,
    pub scheme: Scheme,
    pub limiter: LimiterConfig,
    pub cfl_level: CflLevel,
    pub t_end: Vec<f64>,
    pub initial: InitialData,
    pub diagnostics: bool,
    /// Half-width of the cubic accumulator window; `None` covers the mesh.
    pub window_x: Option<f64>,
    pub output_dir: PathBuf,
    pub reference_dx: Option<f64>,
}

fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| DfluxError::Config(format!("line {}: expected key = value", lineno + 1)))?;
        let key = key.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(DfluxError::Config(format!("line {}: unknown key '{key}'", lineno + 1)));
        }
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(DfluxError::Config(format!("line {}: duplicate key '{key}'", lineno + 1)));
        }
    }
    Ok(map)
}

struct Keys(BTreeMap<String, String>);

impl Keys {
    fn str(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn required(&self, key: &str) -> Result<&str> {
        self.str(key)
            .ok_or_else(|| DfluxError::Config(format!("missing required key '{key}'")))
    }

    fn num(&self, key: &str) -> Result<Option<f64>> {
        self.str(key)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| DfluxError::Config(format!("key '{key}': '{v}' is not a number")))
            })
            .transpose()
    }

    fn required_num(&self, key: &str) -> Result<f64> {
        self.num(key)?
            .ok_or_else(|| DfluxError::Config(format!("missing required key '{key}'")))
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.str(key)
            .map(|v| {
                v.split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<f64>()
                            .map_err(|_| DfluxError::Config(format!("key '{key}': '{s}' is not a number")))
                    })
                    .collect()
            })
            .transpose()
    }

    fn bool(&self, key: &str, default: bool) -> Result<bool> {
        match self.str(key) {
            None => Ok(default),
            Some("true" | "on" | "yes" | "1") => Ok(true),
            Some("false" | "off" | "no" | "0") => Ok(false),
            Some(v) => Err(DfluxError::Config(format!("key '{key}': '{v}' is not a boolean"))),
        }
    }
}

pub fn parse_scheme(s: &str) -> Result<Scheme> {
    match s.to_ascii_lowercase().as_str() {
        "lf" | "lax-friedrichs" => Ok(Scheme::LaxFriedrichs),
        "nt" | "nessyahu-tadmor" => Ok(Scheme::NessyahuTadmor),
        _ => Err(DfluxError::Config(format!("unknown scheme '{s}'"))),
    }
}

pub fn parse_cfl_level(s: &str) -> Result<CflLevel> {
    match s.to_ascii_lowercase().as_str() {
        "max-principle" | "maxprinciple" => Ok(CflLevel::MaxPrinciple),
        "one-sided" | "onesided" => Ok(CflLevel::OneSided),
        "cubic-estimate" | "cubicestimate" => Ok(CflLevel::CubicEstimate),
        "manual" => Ok(CflLevel::Manual),
        _ => Err(DfluxError::Config(format!("unknown cfl_level '{s}'"))),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let k = Keys(parse_pairs(text)?);

        let model_name = k.required("model")?;
        let params: Vec<f64> = match model_name {
            "multiplicative" => vec![
                k.num("model.k_left")?.unwrap_or(3.0),
                k.num("model.k_right")?.unwrap_or(1.0),
            ],
            "burgers-const-k" => vec![k.num("model.k")?.unwrap_or(1.0)],
            _ => Vec::new(),
        };
        let model = ModelSelector::from_name(model_name, &params)?;

        let x_min = k.required_num("domain.x_min")?;
        let x_max = k.required_num("domain.x_max")?;
        let dx = k.required_num("dx")?;
        if dx.is_nan() || dx <= 0.0 {
            return Err(DfluxError::Config(format!("dx must be positive, got {dx}")));
        }
        let lambda = match (k.num("lambda")?, k.num("dt")?) {
            (Some(l), None) => l,
            (None, Some(dt)) => dt / dx,
            _ => return Err(DfluxError::Config("exactly one of 'lambda' and 'dt' must be given".to_string())),
        };
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(DfluxError::Config(format!("lambda must be positive, got {lambda}")));
        }

        let scheme = parse_scheme(k.str("scheme").unwrap_or("nt"))?;
        let alpha = k.num("limiter.alpha")?.unwrap_or(DEFAULT_ALPHA);
        let limiter = match k.str("limiter").unwrap_or("minmod") {
            "zero" => LimiterConfig::zero(),
            "minmod" => LimiterConfig::minmod(),
            "modified" | "minmod-modified" => {
                LimiterConfig::modified(k.num("limiter.k_tilde")?.unwrap_or(1.0), alpha)
                    .map_err(|e| DfluxError::Config(e.to_string()))?
            }
            other => return Err(DfluxError::Config(format!("unknown limiter '{other}'"))),
        };
        let cfl_level = parse_cfl_level(k.str("cfl_level").unwrap_or("max-principle"))?;

        let t_end = k
            .list("t_end")?
            .ok_or_else(|| DfluxError::Config("missing required key 't_end'".to_string()))?;
        if t_end.is_empty() || t_end.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(DfluxError::Config("t_end entries must be >= 0".to_string()));
        }

        let initial = match k.required("initial")? {
            "constant" => InitialData::Constant(k.required_num("initial.value")?),
            "step" => InitialData::step(
                k.num("initial.at")?.unwrap_or(0.0),
                k.required_num("initial.left")?,
                k.required_num("initial.right")?,
            ),
            "piecewise" => {
                let breaks = k
                    .list("initial.breaks")?
                    .ok_or_else(|| DfluxError::Config("missing 'initial.breaks'".to_string()))?;
                let values = k
                    .list("initial.values")?
                    .ok_or_else(|| DfluxError::Config("missing 'initial.values'".to_string()))?;
                if values.len() != breaks.len() + 1 {
                    return Err(DfluxError::Config(
                        "'initial.values' needs one more entry than 'initial.breaks'".to_string(),
                    ));
                }
                InitialData::Piecewise { breaks, values }
            }
            other => return Err(DfluxError::Config(format!("unknown initial data '{other}'"))),
        };

        Ok(RunConfig {
            model,
            x_min,
            x_max,
            dx,
            lambda,
            scheme,
            limiter,
            cfl_level,
            t_end,
            initial,
            diagnostics: k.bool("diagnostics", true)?,
            window_x: k.num("diagnostics.window_x")?,
            output_dir: PathBuf::from(k.str("output_dir").unwrap_or("out")),
            reference_dx: k.num("reference.dx")?,
        })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| DfluxError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// The experiment this config describes. Without `reference.dx` the
    /// reference spacing is a quarter of the finest spacing of a study with
    /// `halvings` levels.
    pub fn to_spec(&self, halvings: usize) -> ExperimentSpec {
        let finest = self.dx / (1u64 << halvings.saturating_sub(1)) as f64;
        ExperimentSpec {
            name: self.model.name().to_string(),
            model: self.model,
            x_min: self.x_min,
            x_max: self.x_max,
            dx: self.dx,
            lambda: self.lambda,
            initial: self.initial.clone(),
            times: self.t_end.clone(),
            reference_dx: self.reference_dx.unwrap_or(finest / 4.0),
            limiter: self.limiter,
            cfl_level: self.cfl_level,
            window_x: self.window_x,
        }
    }
}
