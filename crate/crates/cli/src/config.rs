//! JSON system configuration: raw schema plus validation into core types.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use fragile_core::bell::{AngleGrid, BipartiteModel, ChshSettings, LocalModel, SingletModel};
use fragile_core::kernels::{build_birkhoff_kernel, build_scrambling_kernel, identity_kernel};
use fragile_core::kernels::{DynamicsKernel, MeasurementKernel};
use fragile_core::space::{uniform_prior, HiddenVariableSpace, KnowledgeState, Observable};
use fragile_core::random::seeded_rng;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;
const DEFAULT_NUM_PERMS: usize = 3;
const DEFAULT_LOCAL_SIZE: usize = 8;
const DEFAULT_GRID_TOP: usize = 8;

/// A config problem, located by its JSON path (`state.probs`, `kernels[1].matrix`).
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("`{field}`: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl ToString) -> Self {
        Self {
            field: field.into(),
            message: message.to_string(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub schema_version: u32,
    pub space: SpaceConfig,
    pub observables: Vec<ObservableConfig>,
    #[serde(default)]
    pub kernels: Vec<KernelConfig>,
    #[serde(default)]
    pub dynamics: Option<DynamicsConfig>,
    #[serde(default)]
    pub state: Option<StateConfig>,
    #[serde(default)]
    pub bell: Option<BellConfig>,
    #[serde(default)]
    pub tolerances: ToleranceConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    pub size: usize,
    #[serde(default)]
    pub labels: Option<Vec<String>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableConfig {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelType {
    Scramble,
    Birkhoff,
    Identity,
    Custom,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub observable: String,
    #[serde(rename = "type")]
    pub kind: KernelType,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub num_perms: Option<usize>,
    /// `matrix[λ'][λ] = P(λ'|λ)`; columns sum to one.
    #[serde(default)]
    pub matrix: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DynamicsType {
    Permutation,
    Custom,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsConfig {
    #[serde(rename = "type")]
    pub kind: DynamicsType,
    /// `map[λ]` is the state `λ` moves to.
    #[serde(default)]
    pub map: Option<Vec<usize>>,
    #[serde(default)]
    pub matrix: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub dt: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateConfig {
    pub probs: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BellModelType {
    Singlet,
    LocalRandom,
    Custom,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BellConfig {
    pub model: BellModelType,
    /// `[a, a′, b, b′]` in radians.
    #[serde(default)]
    pub settings: Option<[f64; 4]>,
    #[serde(default)]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub size: Option<usize>,
    #[serde(default)]
    pub probs: Option<Vec<f64>>,
    #[serde(default)]
    pub angles_a: Option<Vec<f64>>,
    #[serde(default)]
    pub angles_b: Option<Vec<f64>>,
}

/// Either explicit `angles` or `steps` points spaced over `[start, stop)`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default)]
    pub angles: Option<Vec<f64>>,
    #[serde(default)]
    pub start: Option<f64>,
    #[serde(default)]
    pub stop: Option<f64>,
    #[serde(default)]
    pub steps: Option<usize>,
    /// How many of the best grid points to keep in the report.
    #[serde(default)]
    pub top: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    #[serde(default)]
    pub fixed_point: Option<f64>,
    #[serde(default)]
    pub unitarity: Option<f64>,
    #[serde(default)]
    pub trace: Option<f64>,
    #[serde(default)]
    pub equality: Option<f64>,
    #[serde(default)]
    pub generator: Option<f64>,
    #[serde(default)]
    pub spectrum: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub fixed_point: f64,
    pub unitarity: f64,
    pub trace: f64,
    pub equality: f64,
    pub generator: f64,
    pub spectrum: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            fixed_point: 1e-12,
            unitarity: 1e-12,
            trace: 1e-12,
            equality: 1e-12,
            generator: 1e-10,
            spectrum: 1e-10,
        }
    }
}

impl Tolerances {
    pub fn uniform(tol: f64) -> Self {
        Self {
            fixed_point: tol,
            unitarity: tol,
            trace: tol,
            equality: tol,
            generator: tol,
            spectrum: tol,
        }
    }
}

/// Command-line values that take part in resolving a config.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    /// Base seed for entries that carry no seed of their own.
    pub seed: Option<u64>,
    /// Replaces every tolerance.
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    Config,
    Default,
}

#[derive(Debug, Clone)]
pub struct KernelEntry {
    pub observable: usize,
    pub kind: KernelType,
    pub seed: Option<u64>,
    pub num_perms: Option<usize>,
    pub kernel: MeasurementKernel,
    pub source: Source,
}

#[derive(Debug, Clone)]
pub struct DynamicsEntry {
    pub kind: DynamicsType,
    pub kernel: DynamicsKernel,
    pub dt: f64,
}

pub struct BellEntry {
    pub kind: BellModelType,
    pub model: Box<dyn BipartiteModel>,
    pub seed: Option<u64>,
    pub settings: ChshSettings,
    pub grid: Option<AngleGrid>,
    pub top: usize,
}

/// A validated system, ready for the experiments.
pub struct System {
    pub space: HiddenVariableSpace,
    pub observables: Vec<Observable>,
    /// Configured kernels in file order, then scramble defaults for
    /// observables that have none.
    pub kernels: Vec<KernelEntry>,
    pub dynamics: Option<DynamicsEntry>,
    pub state: KnowledgeState,
    pub state_source: Source,
    pub bell: Option<BellEntry>,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub warnings: Vec<String>,
}

impl System {
    /// The kernel used for observable `i` in the operator and sequential experiments.
    pub fn primary_kernel(&self, i: usize) -> &KernelEntry {
        self.kernels
            .iter()
            .find(|k| k.observable == i)
            .expect("every observable has a kernel")
    }
}

pub fn parse(text: &str) -> Result<SystemConfig, ConfigError> {
    let mut de = serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let message = e.into_inner().to_string();
        let mut field = if path == "." || path == "?" { String::new() } else { path };
        // A missing key is reported against its parent object.
        if let Some(rest) = message.strip_prefix("missing field `") {
            if !field.is_empty() {
                field.push('.');
            }
            field.push_str(rest.split('`').next().unwrap_or_default());
        }
        if field.is_empty() {
            field = "config".to_string();
        }
        ConfigError::new(field, message)
    })
}

pub fn load(path: &Path, overrides: Overrides) -> Result<System, ConfigError> {
    let text = fs::read_to_string(path)
        .map_err(|e| ConfigError::new("--config", format!("cannot read {}: {e}", path.display())))?;
    resolve(parse(&text)?, overrides)
}

fn finite(field: &str, values: &[f64]) -> Result<(), ConfigError> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(ConfigError::new(format!("{field}[{i}]"), "must be finite")),
        None => Ok(()),
    }
}

fn positive(field: &str, value: f64) -> Result<f64, ConfigError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(ConfigError::new(field, format!("must be a positive finite number, got {value}")))
    }
}

fn square(field: &str, rows: &[Vec<f64>], size: usize) -> Result<DMatrix<f64>, ConfigError> {
    if rows.len() != size {
        return Err(ConfigError::new(field, format!("expected {size} rows, found {}", rows.len())));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != size {
            return Err(ConfigError::new(
                format!("{field}[{i}]"),
                format!("expected {size} entries, found {}", row.len()),
            ));
        }
        finite(&format!("{field}[{i}]"), row)?;
    }
    Ok(DMatrix::from_fn(size, size, |i, j| rows[i][j]))
}

fn forbid<T>(field: String, value: &Option<T>, why: &str) -> Result<(), ConfigError> {
    match value {
        Some(_) => Err(ConfigError::new(field, why)),
        None => Ok(()),
    }
}

fn check_probs(field: &str, probs: &[f64], size: usize) -> Result<KnowledgeState, ConfigError> {
    if probs.len() != size {
        return Err(ConfigError::new(field, format!("expected {size} entries, found {}", probs.len())));
    }
    finite(field, probs)?;
    KnowledgeState::new(probs.to_vec()).map_err(|e| ConfigError::new(field, e))
}

pub fn resolve(cfg: SystemConfig, overrides: Overrides) -> Result<System, ConfigError> {
    if cfg.schema_version != SCHEMA_VERSION {
        return Err(ConfigError::new(
            "schema_version",
            format!("unsupported version {}, expected {SCHEMA_VERSION}", cfg.schema_version),
        ));
    }
    let tolerances = resolve_tolerances(&cfg.tolerances, overrides.tol)?;
    let base_seed = overrides.seed.unwrap_or(0);
    let mut warnings = Vec::new();

    let size = cfg.space.size;
    let space = match &cfg.space.labels {
        Some(labels) => {
            if labels.len() != size {
                return Err(ConfigError::new(
                    "space.labels",
                    format!("expected {size} labels, found {}", labels.len()),
                ));
            }
            HiddenVariableSpace::with_labels(labels.clone()).map_err(|e| ConfigError::new("space.labels", e))?
        }
        None => HiddenVariableSpace::new(size).map_err(|e| ConfigError::new("space.size", e))?,
    };

    if cfg.observables.is_empty() {
        return Err(ConfigError::new("observables", "at least one observable is required"));
    }
    let mut observables: Vec<Observable> = Vec::with_capacity(cfg.observables.len());
    for (i, o) in cfg.observables.iter().enumerate() {
        if o.name.is_empty() {
            return Err(ConfigError::new(format!("observables[{i}].name"), "must not be empty"));
        }
        if observables.iter().any(|p| p.name() == o.name) {
            return Err(ConfigError::new(format!("observables[{i}].name"), format!("duplicate name {:?}", o.name)));
        }
        let field = format!("observables[{i}].values");
        if o.values.len() != size {
            return Err(ConfigError::new(field, format!("expected {size} values, found {}", o.values.len())));
        }
        finite(&field, &o.values)?;
        observables.push(space.observable(o.name.clone(), o.values.clone()).map_err(|e| ConfigError::new(field, e))?);
    }

    let mut kernels = Vec::new();
    for (i, k) in cfg.kernels.iter().enumerate() {
        let field = |name: &str| format!("kernels[{i}].{name}");
        let index = observables
            .iter()
            .position(|o| o.name() == k.observable)
            .ok_or_else(|| ConfigError::new(field("observable"), format!("no observable named {:?}", k.observable)))?;
        let obs = &observables[index];
        if k.kind != KernelType::Birkhoff {
            forbid(field("seed"), &k.seed, "only birkhoff kernels take a seed")?;
            forbid(field("num_perms"), &k.num_perms, "only birkhoff kernels take num_perms")?;
        }
        if k.kind != KernelType::Custom {
            forbid(field("matrix"), &k.matrix, "only custom kernels take an explicit matrix")?;
        }
        let (kernel, seed, num_perms) = match k.kind {
            KernelType::Scramble => (build_scrambling_kernel(obs), None, None),
            KernelType::Identity => (identity_kernel(&space), None, None),
            KernelType::Birkhoff => {
                let seed = k.seed.unwrap_or_else(|| base_seed.wrapping_add(i as u64));
                let num_perms = k.num_perms.unwrap_or(DEFAULT_NUM_PERMS);
                if num_perms == 0 {
                    return Err(ConfigError::new(field("num_perms"), "must be at least 1"));
                }
                let kernel = build_birkhoff_kernel(obs, seed, num_perms).map_err(|e| ConfigError::new(field("num_perms"), e))?;
                (kernel, Some(seed), Some(num_perms))
            }
            KernelType::Custom => {
                let rows = k
                    .matrix
                    .as_ref()
                    .ok_or_else(|| ConfigError::new(field("matrix"), "custom kernels need a matrix"))?;
                let m = square(&field("matrix"), rows, size)?;
                let kernel = MeasurementKernel::custom(obs, m).map_err(|e| ConfigError::new(field("matrix"), e))?;
                (kernel, None, None)
            }
        };
        kernels.push(KernelEntry {
            observable: index,
            kind: k.kind,
            seed,
            num_perms,
            kernel,
            source: Source::Config,
        });
    }
    for (index, obs) in observables.iter().enumerate() {
        if !kernels.iter().any(|k| k.observable == index) {
            kernels.push(KernelEntry {
                observable: index,
                kind: KernelType::Scramble,
                seed: None,
                num_perms: None,
                kernel: build_scrambling_kernel(obs),
                source: Source::Default,
            });
        }
    }

    let dynamics = cfg.dynamics.as_ref().map(|d| resolve_dynamics(d, size)).transpose()?;

    let (state, state_source) = match &cfg.state {
        Some(s) => (check_probs("state.probs", &s.probs, size)?, Source::Config),
        None => (uniform_prior(&space), Source::Default),
    };
    if state.is_sharp() {
        warnings.push("state.probs: sharp (delta) state; fragile systems admit no sharp states".to_string());
    }

    let bell = cfg.bell.as_ref().map(|b| resolve_bell(b, base_seed)).transpose()?;

    Ok(System {
        space,
        observables,
        kernels,
        dynamics,
        state,
        state_source,
        bell,
        tolerances,
        seed: base_seed,
        warnings,
    })
}

fn resolve_tolerances(cfg: &ToleranceConfig, tol: Option<f64>) -> Result<Tolerances, ConfigError> {
    if let Some(t) = tol {
        return Ok(Tolerances::uniform(positive("--tol", t)?));
    }
    let d = Tolerances::default();
    let pick = |name: &str, v: Option<f64>, default: f64| match v {
        Some(v) => positive(&format!("tolerances.{name}"), v),
        None => Ok(default),
    };
    Ok(Tolerances {
        fixed_point: pick("fixed_point", cfg.fixed_point, d.fixed_point)?,
        unitarity: pick("unitarity", cfg.unitarity, d.unitarity)?,
        trace: pick("trace", cfg.trace, d.trace)?,
        equality: pick("equality", cfg.equality, d.equality)?,
        generator: pick("generator", cfg.generator, d.generator)?,
        spectrum: pick("spectrum", cfg.spectrum, d.spectrum)?,
    })
}

fn resolve_dynamics(d: &DynamicsConfig, size: usize) -> Result<DynamicsEntry, ConfigError> {
    let dt = positive("dynamics.dt", d.dt.unwrap_or(1.0))?;
    let kernel = match d.kind {
        DynamicsType::Permutation => {
            forbid("dynamics.matrix".into(), &d.matrix, "permutation dynamics take a map, not a matrix")?;
            let map = d
                .map
                .as_ref()
                .ok_or_else(|| ConfigError::new("dynamics.map", "permutation dynamics need a map"))?;
            if map.len() != size {
                return Err(ConfigError::new("dynamics.map", format!("expected {size} entries, found {}", map.len())));
            }
            DynamicsKernel::permutation(map.clone()).map_err(|e| ConfigError::new("dynamics.map", e))?
        }
        DynamicsType::Custom => {
            forbid("dynamics.map".into(), &d.map, "custom dynamics take a matrix, not a map")?;
            let rows = d
                .matrix
                .as_ref()
                .ok_or_else(|| ConfigError::new("dynamics.matrix", "custom dynamics need a matrix"))?;
            DynamicsKernel::custom(square("dynamics.matrix", rows, size)?)
                .map_err(|e| ConfigError::new("dynamics.matrix", e))?
        }
    };
    Ok(DynamicsEntry { kind: d.kind, kernel, dt })
}

fn resolve_bell(b: &BellConfig, base_seed: u64) -> Result<BellEntry, ConfigError> {
    let settings = match b.settings {
        Some(s) => {
            finite("bell.settings", &s)?;
            ChshSettings::new(s[0], s[1], s[2], s[3])
        }
        None => ChshSettings::canonical(),
    };
    let (grid, top) = match &b.grid {
        Some(g) => (Some(resolve_grid(g)?), g.top.unwrap_or(DEFAULT_GRID_TOP)),
        None => (None, DEFAULT_GRID_TOP),
    };
    if b.model != BellModelType::LocalRandom {
        forbid("bell.seed".into(), &b.seed, "only local-random models take a seed")?;
        forbid("bell.size".into(), &b.size, "only local-random models take a size")?;
    }
    if b.model != BellModelType::Custom {
        forbid("bell.probs".into(), &b.probs, "only custom models take probs")?;
        forbid("bell.angles_a".into(), &b.angles_a, "only custom models take angles_a")?;
        forbid("bell.angles_b".into(), &b.angles_b, "only custom models take angles_b")?;
    }
    let (model, seed): (Box<dyn BipartiteModel>, _) = match b.model {
        BellModelType::Singlet => (Box::new(SingletModel), None),
        BellModelType::LocalRandom => {
            let seed = b.seed.unwrap_or(base_seed);
            let size = b.size.unwrap_or(DEFAULT_LOCAL_SIZE);
            if size == 0 {
                return Err(ConfigError::new("bell.size", "must be at least 1"));
            }
            (Box::new(LocalModel::random(&mut seeded_rng(seed), size)), Some(seed))
        }
        BellModelType::Custom => {
            let need = |name: &str, v: &Option<Vec<f64>>| {
                v.clone()
                    .ok_or_else(|| ConfigError::new(format!("bell.{name}"), "required for custom models"))
            };
            let probs = need("probs", &b.probs)?;
            let angles_a = need("angles_a", &b.angles_a)?;
            let angles_b = need("angles_b", &b.angles_b)?;
            let weights = check_probs("bell.probs", &probs, probs.len())?;
            for (name, angles) in [("bell.angles_a", &angles_a), ("bell.angles_b", &angles_b)] {
                if angles.len() != probs.len() {
                    return Err(ConfigError::new(
                        name,
                        format!("expected {} angles, found {}", probs.len(), angles.len()),
                    ));
                }
                finite(name, angles)?;
            }
            let model = LocalModel::hidden_angles(weights, angles_a, angles_b).map_err(|e| ConfigError::new("bell", e))?;
            (Box::new(model), None)
        }
    };
    Ok(BellEntry {
        kind: b.model,
        model,
        seed,
        settings,
        grid,
        top,
    })
}

fn resolve_grid(g: &GridConfig) -> Result<AngleGrid, ConfigError> {
    match (&g.angles, g.steps) {
        (Some(angles), None) => {
            forbid("bell.grid.start".into(), &g.start, "start/stop only apply with steps")?;
            forbid("bell.grid.stop".into(), &g.stop, "start/stop only apply with steps")?;
            if angles.is_empty() {
                return Err(ConfigError::new("bell.grid.angles", "must not be empty"));
            }
            finite("bell.grid.angles", angles)?;
            Ok(AngleGrid::shared(angles.clone()))
        }
        (None, Some(steps)) => {
            if steps == 0 {
                return Err(ConfigError::new("bell.grid.steps", "must be at least 1"));
            }
            let start = g.start.unwrap_or(0.0);
            let stop = g.stop.unwrap_or(PI);
            if !start.is_finite() || !stop.is_finite() || stop <= start {
                return Err(ConfigError::new("bell.grid", "need finite start < stop"));
            }
            Ok(AngleGrid::uniform(start, stop, steps))
        }
        (Some(_), Some(_)) => Err(ConfigError::new("bell.grid", "give either angles or steps, not both")),
        (None, None) => Err(ConfigError::new("bell.grid", "give either angles or steps")),
    }
}
