//! Experiment documents: TOML text plus command-line overrides.
//!
//! A document is parsed into a table, `--set` and `--seed` overrides are
//! merged in, and the result is deserialized into one of the typed configs
//! below. Unknown keys are rejected. Error messages carry the line of the
//! offending key when the key appears in the file.

use std::path::Path;

use cast_core::analysis::Param;
use cast_core::exchange::CastParams;
use cast_core::sweep::{SweepAxes, SweepPlan, ValueSpec};
use cast_core::{Mode, ObjectiveId, ObjectiveSpec, ProposalKind, RecordOptions, RunConfig, Schedule};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::CliError;

// Defaults for the temperature-exchange parameters: the best 5D setting.
pub const DEFAULT_MU: f64 = 0.5;
pub const DEFAULT_LAMBDA: f64 = 0.7;
pub const DEFAULT_KAPPA: f64 = 0.35;
pub const DEFAULT_GAMMA: f64 = 2.0;
pub const DEFAULT_T_VAR: f64 = 0.005;
pub const DEFAULT_T_BAR: f64 = 0.05;
pub const DEFAULT_REF_ALPHA: f64 = 0.999;

fn d_mu() -> f64 {
    DEFAULT_MU
}
fn d_lambda() -> f64 {
    DEFAULT_LAMBDA
}
fn d_kappa() -> f64 {
    DEFAULT_KAPPA
}
fn d_gamma() -> f64 {
    DEFAULT_GAMMA
}
fn d_t_var() -> f64 {
    DEFAULT_T_VAR
}
fn d_t_bar() -> f64 {
    DEFAULT_T_BAR
}
fn d_ref_alpha() -> f64 {
    DEFAULT_REF_ALPHA
}
fn d_proposal() -> String {
    "cauchy".into()
}
fn d_cooling() -> String {
    "cast".into()
}
fn d_one() -> usize {
    1
}
fn d_stride() -> u64 {
    1
}
fn d_bins() -> usize {
    50
}
fn d_shrink() -> f64 {
    cast_core::analysis::DEFAULT_SHRINK
}
fn d_runs_per_cell() -> usize {
    20
}

/// Command-line overrides applied on top of a document.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub set: Vec<(String, Value)>,
}

impl Overrides {
    /// Parses `key=value`; the value is read as a TOML value, falling back
    /// to a bare string.
    pub fn push_set(&mut self, raw: &str) -> Result<(), CliError> {
        let (key, value) = raw
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("--set expects key=value, got `{raw}`")))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(CliError::Config(format!("--set has an empty key in `{raw}`")));
        }
        let value = value.trim();
        let parsed = toml::from_str::<Table>(&format!("v = {value}"))
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| Value::String(value.to_string()));
        self.set.push((key.to_string(), parsed));
        Ok(())
    }
}

/// A parsed document together with its source text, for error locations.
#[derive(Debug, Clone)]
pub struct Document {
    pub origin: String,
    pub text: String,
    pub table: Table,
}

impl Document {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&path.display().to_string(), &text)
    }

    pub fn parse(origin: &str, text: &str) -> Result<Self, CliError> {
        let table: Table = toml::from_str(text).map_err(|e| CliError::Config(format!("{origin}: {e}")))?;
        Ok(Self { origin: origin.to_string(), text: text.to_string(), table })
    }

    /// Merges overrides; dotted keys (`params.mu`) address nested tables.
    pub fn apply(&mut self, overrides: &Overrides) -> Result<(), CliError> {
        if let Some(seed) = overrides.seed {
            let seed = i64::try_from(seed)
                .map_err(|_| CliError::Config(format!("--seed {seed} exceeds the TOML integer range")))?;
            self.table.insert("seed".into(), Value::Integer(seed));
        }
        for (key, value) in &overrides.set {
            let mut parts: Vec<&str> = key.split('.').collect();
            let last = parts.pop().expect("split yields at least one part");
            let mut table = &mut self.table;
            for part in parts {
                table = table
                    .entry(part.to_string())
                    .or_insert_with(|| Value::Table(Table::new()))
                    .as_table_mut()
                    .ok_or_else(|| CliError::Config(format!("--set {key}: `{part}` is not a table")))?;
            }
            table.insert(last.to_string(), value.clone());
        }
        Ok(())
    }

    pub fn decode<T: DeserializeOwned>(&self) -> Result<T, CliError> {
        Value::Table(self.table.clone()).try_into().map_err(|e: toml::de::Error| {
            // Decoding the raw text again yields a span when the file itself
            // is at fault; otherwise the problem came from an override.
            match toml::from_str::<T>(&self.text) {
                Err(raw) if raw.span().is_some_and(|s| s.start > 0) => {
                    CliError::Config(format!("{}: {}", self.origin, raw.to_string().trim_end()))
                }
                _ => self.error(e.message().trim()),
            }
        })
    }

    /// A config error, located at the first backquoted key of `message`
    /// that appears in the source text.
    pub fn error(&self, message: &str) -> CliError {
        let location = backquoted(message)
            .into_iter()
            .find_map(|k| key_line(&self.text, &k))
            .map(|line| format!(":{line}"))
            .unwrap_or_default();
        CliError::Config(format!("{}{location}: {message}", self.origin))
    }

    fn core_error(&self, e: cast_core::Error) -> CliError {
        match &e {
            cast_core::Error::InvalidParameter { name, .. } => {
                let location = key_line(&self.text, name).map(|l| format!(":{l}")).unwrap_or_default();
                CliError::Config(format!("{}{location}: {e}", self.origin))
            }
            _ => CliError::Config(format!("{}: {e}", self.origin)),
        }
    }
}

fn backquoted(message: &str) -> Vec<String> {
    message.split('`').skip(1).step_by(2).map(|k| k.rsplit('.').next().unwrap_or(k).to_string()).collect()
}

/// 1-based line on which `key` is assigned, if any.
pub fn key_line(text: &str, key: &str) -> Option<usize> {
    text.lines().position(|line| {
        let line = line.trim_start();
        line.strip_prefix(key)
            .is_some_and(|rest| rest.trim_start().starts_with('='))
    })
    .map(|i| i + 1)
}

/// Settings for `run` and `decay-study`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunFile {
    pub objective: String,
    pub dimension: usize,
    pub particles: usize,
    pub steps: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "d_proposal")]
    pub proposal: String,
    /// `cast`, `log`, `geometric:<alpha>` or `fixed`.
    #[serde(default = "d_cooling")]
    pub cooling: String,
    #[serde(default = "d_t_bar")]
    pub t_bar: f64,
    #[serde(default = "d_mu")]
    pub mu: f64,
    #[serde(default = "d_lambda")]
    pub lambda: f64,
    #[serde(default = "d_kappa")]
    pub kappa: f64,
    #[serde(default = "d_gamma")]
    pub gamma: f64,
    #[serde(default = "d_t_var")]
    pub t_var: f64,
    #[serde(default)]
    pub noise_gated: bool,
    #[serde(default = "d_one")]
    pub repeats: usize,
    #[serde(default = "d_stride")]
    pub stride: u64,
    #[serde(default = "d_bins")]
    pub bins: usize,
    #[serde(default = "d_shrink")]
    pub shrink: f64,
    /// Decay rate of the geometric reference curve in `decay-study`.
    #[serde(default = "d_ref_alpha")]
    pub ref_alpha: f64,
}

/// A fully checked run.
#[derive(Debug, Clone)]
pub struct RunSetup {
    pub file: RunFile,
    pub config: RunConfig,
}

impl RunFile {
    pub fn from_document(doc: &Document) -> Result<RunSetup, CliError> {
        let file: RunFile = doc.decode()?;
        let objective = parse_objective(doc, &file.objective, file.dimension)?;
        let proposal = parse_proposal(doc, &file.proposal)?;
        let cast = CastLike {
            mu: file.mu,
            lambda: file.lambda,
            kappa: file.kappa,
            gamma: file.gamma,
            t_var: file.t_var,
            noise_gated: file.noise_gated,
        };
        let mode = parse_mode(doc, &file.cooling, file.t_bar, &cast)?;
        if file.repeats == 0 {
            return Err(doc.error("`repeats` must be at least 1"));
        }
        if !(file.shrink > 0.0 && file.shrink <= 1.0) {
            return Err(doc.error(&format!("`shrink` must lie in (0, 1], got {}", file.shrink)));
        }
        if !(file.ref_alpha > 0.0 && file.ref_alpha.is_finite()) {
            return Err(doc.error(&format!("`ref_alpha` must be positive, got {}", file.ref_alpha)));
        }
        let mut config = RunConfig::new(objective, file.particles, file.steps, mode);
        config.proposal = proposal;
        config.seed = file.seed;
        config.record = RecordOptions { stride: file.stride, histogram_bins: file.bins };
        config.validate().map_err(|e| doc.core_error(e))?;
        Ok(RunSetup { file, config })
    }
}

/// One arm of a comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmFile {
    pub name: String,
    #[serde(default = "d_cooling")]
    pub cooling: String,
    #[serde(default = "d_mu")]
    pub mu: f64,
    #[serde(default = "d_lambda")]
    pub lambda: f64,
    #[serde(default = "d_kappa")]
    pub kappa: f64,
    #[serde(default = "d_gamma")]
    pub gamma: f64,
    #[serde(default = "d_t_var")]
    pub t_var: f64,
    #[serde(default)]
    pub noise_gated: bool,
    /// Defaults to the shared step count; arms must agree.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<u64>,
}

/// Settings for `compare`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareFile {
    pub objective: String,
    pub dimension: usize,
    pub particles: usize,
    pub steps: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "d_proposal")]
    pub proposal: String,
    #[serde(default = "d_t_bar")]
    pub t_bar: f64,
    #[serde(default = "d_one")]
    pub repeats: usize,
    #[serde(default = "d_stride")]
    pub stride: u64,
    #[serde(default = "d_shrink")]
    pub shrink: f64,
    #[serde(default)]
    pub arm: Vec<ArmFile>,
}

#[derive(Debug, Clone)]
pub struct CompareSetup {
    pub file: CompareFile,
    /// `(name, config)` per arm, in document order.
    pub arms: Vec<(String, RunConfig)>,
}

impl CompareFile {
    pub fn from_document(doc: &Document) -> Result<CompareSetup, CliError> {
        let file: CompareFile = doc.decode()?;
        if file.arm.len() < 2 {
            return Err(doc.error(&format!("`arm`: a comparison needs at least 2 arms, got {}", file.arm.len())));
        }
        if file.repeats == 0 {
            return Err(doc.error("`repeats` must be at least 1"));
        }
        if !(file.shrink > 0.0 && file.shrink <= 1.0) {
            return Err(doc.error(&format!("`shrink` must lie in (0, 1], got {}", file.shrink)));
        }
        let objective = parse_objective(doc, &file.objective, file.dimension)?;
        let proposal = parse_proposal(doc, &file.proposal)?;
        let mut arms = Vec::with_capacity(file.arm.len());
        for arm in &file.arm {
            if arm.name.is_empty() || arm.name.contains([',', '\n', '"']) {
                return Err(doc.error(&format!("`name`: arm name {:?} must be non-empty without commas or quotes", arm.name)));
            }
            if arms.iter().any(|(n, _): &(String, RunConfig)| *n == arm.name) {
                return Err(doc.error(&format!("`name`: duplicate arm name {:?}", arm.name)));
            }
            let steps = arm.steps.unwrap_or(file.steps);
            if steps != file.steps {
                return Err(doc.error(&format!(
                    "`steps`: arm {:?} runs {steps} steps but the comparison uses {}",
                    arm.name, file.steps
                )));
            }
            let cast = CastLike {
                mu: arm.mu,
                lambda: arm.lambda,
                kappa: arm.kappa,
                gamma: arm.gamma,
                t_var: arm.t_var,
                noise_gated: arm.noise_gated,
            };
            let mode = parse_mode(doc, &arm.cooling, file.t_bar, &cast)?;
            let mut config = RunConfig::new(objective.clone(), file.particles, steps, mode);
            config.proposal = proposal;
            config.seed = file.seed;
            config.record = RecordOptions { stride: file.stride, histogram_bins: 0 };
            config.validate().map_err(|e| doc.core_error(e))?;
            arms.push((arm.name.clone(), config));
        }
        Ok(CompareSetup { file, arms })
    }
}

/// Settings for `sweep`. Axis values live in the `[params]` table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub objective: String,
    pub dimension: usize,
    pub particles: usize,
    pub max_steps: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "d_proposal")]
    pub proposal: String,
    #[serde(default = "d_t_bar")]
    pub t_bar: f64,
    #[serde(default)]
    pub noise_gated: bool,
    #[serde(default = "d_runs_per_cell")]
    pub runs_per_cell: usize,
    #[serde(default = "d_shrink")]
    pub shrink: f64,
    #[serde(default)]
    pub params: Table,
}

#[derive(Debug, Clone)]
pub struct SweepSetup {
    pub file: SweepFile,
    pub plan: SweepPlan,
    /// Axes with more than one value, in canonical order.
    pub swept: Vec<Param>,
}

impl SweepFile {
    pub fn from_document(doc: &Document) -> Result<SweepSetup, CliError> {
        let file: SweepFile = doc.decode()?;
        if let Some(key) = file.params.keys().find(|k| k.parse::<Param>().is_err()) {
            return Err(doc.error(&format!(
                "unknown parameter `{key}` in [params], expected one of mu, lambda, kappa, gamma, t_var"
            )));
        }
        let axis = |p: Param, default: f64| -> Result<ValueSpec, CliError> {
            match file.params.get(p.name()) {
                None => Ok(ValueSpec::List(vec![default])),
                Some(v) => axis_value(doc, p.name(), v),
            }
        };
        let axes = SweepAxes {
            mu: axis(Param::Mu, DEFAULT_MU)?,
            lambda: axis(Param::Lambda, DEFAULT_LAMBDA)?,
            kappa: axis(Param::Kappa, DEFAULT_KAPPA)?,
            gamma: axis(Param::Gamma, DEFAULT_GAMMA)?,
            t_var: axis(Param::TVar, DEFAULT_T_VAR)?,
        };
        let mut swept = Vec::new();
        for p in Param::ALL {
            let values = axes.get(p).values(p.name()).map_err(|e| doc.core_error(e))?;
            if values.len() > 1 {
                swept.push(p);
            }
        }
        if file.runs_per_cell == 0 {
            return Err(doc.error("`runs_per_cell` must be at least 1"));
        }
        if !(file.shrink > 0.0 && file.shrink <= 1.0) {
            return Err(doc.error(&format!("`shrink` must lie in (0, 1], got {}", file.shrink)));
        }
        if file.particles < 2 {
            return Err(doc.error(&format!("`particles` must be at least 2, got {}", file.particles)));
        }
        if !(file.t_bar > 0.0 && file.t_bar.is_finite()) {
            return Err(doc.error(&format!("`t_bar` must be positive, got {}", file.t_bar)));
        }
        let objective = parse_objective(doc, &file.objective, file.dimension)?;
        let mut plan = SweepPlan::new(objective, file.particles, file.max_steps, axes);
        plan.proposal = parse_proposal(doc, &file.proposal)?;
        plan.t_bar = file.t_bar;
        plan.noise_gated = file.noise_gated;
        plan.runs_per_cell = file.runs_per_cell;
        plan.shrink = file.shrink;
        plan.seed = file.seed;
        Ok(SweepSetup { file, plan, swept })
    }
}

fn axis_value(doc: &Document, name: &str, v: &Value) -> Result<ValueSpec, CliError> {
    let bad = || {
        doc.error(&format!(
            "`{name}`: expected a number, a list of numbers, {{lin = [a, b, n]}} or {{log = [a, b, n]}}"
        ))
    };
    let number = |v: &Value| match v {
        Value::Float(x) => Some(*x),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    };
    match v {
        Value::Float(_) | Value::Integer(_) => Ok(ValueSpec::List(vec![number(v).expect("numeric")])),
        Value::Array(items) => items.iter().map(number).collect::<Option<Vec<_>>>().map(ValueSpec::List).ok_or_else(bad),
        Value::Table(t) if t.len() == 1 => {
            let (kind, range) = t.iter().next().expect("one entry");
            let items = range.as_array().filter(|a| a.len() == 3).ok_or_else(bad)?;
            let (start, end) = (number(&items[0]).ok_or_else(bad)?, number(&items[1]).ok_or_else(bad)?);
            let count = items[2].as_integer().and_then(|c| usize::try_from(c).ok()).ok_or_else(bad)?;
            match kind.as_str() {
                "lin" => Ok(ValueSpec::Lin { start, end, count }),
                "log" => Ok(ValueSpec::Log { start, end, count }),
                _ => Err(bad()),
            }
        }
        _ => Err(bad()),
    }
}

struct CastLike {
    mu: f64,
    lambda: f64,
    kappa: f64,
    gamma: f64,
    t_var: f64,
    noise_gated: bool,
}

fn parse_mode(doc: &Document, cooling: &str, t_bar: f64, p: &CastLike) -> Result<Mode, CliError> {
    let schedule = |r: cast_core::Result<Schedule>| r.map(Mode::Baseline).map_err(|e| doc.core_error(e));
    match cooling {
        "cast" => {
            let mut params =
                CastParams::new(p.mu, p.lambda, p.kappa, p.gamma, p.t_var, t_bar).map_err(|e| doc.core_error(e))?;
            params.noise_gated = p.noise_gated;
            Ok(Mode::Cast(params))
        }
        "log" => schedule(Schedule::logarithmic(t_bar)),
        "fixed" => schedule(Schedule::fixed(t_bar)),
        other => match other.strip_prefix("geometric:").map(str::parse::<f64>) {
            Some(Ok(alpha)) => schedule(Schedule::geometric(alpha, t_bar)),
            _ => Err(doc.error(&format!(
                "`cooling`: unknown schedule {other:?}, expected cast, log, geometric:<alpha> or fixed"
            ))),
        },
    }
}

fn parse_objective(doc: &Document, name: &str, dimension: usize) -> Result<ObjectiveSpec, CliError> {
    let id: ObjectiveId = name.parse().map_err(|e: cast_core::Error| doc.error(&format!("`objective`: {e}")))?;
    ObjectiveSpec::new(id, dimension).map_err(|e| doc.error(&format!("`dimension`: {e}")))
}

fn parse_proposal(doc: &Document, name: &str) -> Result<ProposalKind, CliError> {
    name.parse().map_err(|e: cast_core::Error| doc.error(&format!("`proposal`: {e}")))
}

/// The resolved document as TOML, for output headers.
pub fn resolved<T: Serialize>(file: &T) -> String {
    toml::to_string(file).expect("config types serialize to TOML")
}
