use std::fmt;
use std::path::{Path, PathBuf};

use qsfrac_core::{
    build_rect_mesh, BoundaryProgram, CrackSet, Evolution, ExtensionPolicy, Mesh, Mode, PenaltyWeight, Schedule, Side,
    TimeProfile,
};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// Schema violation, located by a dotted field path.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            f.write_str(&self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

impl ConfigError {
    fn new(path: impl Into<String>, message: impl fmt::Display) -> Self {
        Self { path: path.into(), message: message.to_string() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema: u32,
    pub geometry: Geometry,
    #[serde(default)]
    pub initial_crack: InitialCrack,
    #[serde(default)]
    pub program: Vec<ModeConfig>,
    pub lambda: f64,
    #[serde(default = "default_m")]
    pub m: usize,
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub policy: PolicyConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

fn default_m() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometry {
    pub width: f64,
    pub height: f64,
    pub nx: usize,
    pub ny: usize,
    pub dirichlet_sides: Vec<String>,
}

/// `"none"`, `"edge_slit(side, position, depth)"` or a list of edge ids.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialCrack {
    Preset(String),
    Edges(Vec<usize>),
}

impl Default for InitialCrack {
    fn default() -> Self {
        Self::Preset("none".into())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeConfig {
    pub profile: Vec<(f64, f64)>,
    pub spatial: Spatial,
}

/// `"affine(a, b, c)"` for `a·x + b·y + c`, `"mode_antisym"` for
/// `sign(y − H/2)`, or one value per mesh vertex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Spatial {
    Named(String),
    Nodal(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    #[serde(rename = "T")]
    pub end: f64,
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    #[serde(default = "default_kind")]
    pub kind: String,
    #[serde(default = "default_budget")]
    pub budget: usize,
}

fn default_kind() -> String {
    "TIP+NUCLEATE".into()
}

fn default_budget() -> usize {
    3
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self { kind: default_kind(), budget: default_budget() }
    }
}

/// A configuration turned into solver inputs.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub mesh: Mesh,
    pub initial_crack: CrackSet,
    pub program: BoundaryProgram,
    pub schedule: Schedule,
    pub evolution: Evolution,
}

pub fn parse_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new("", format!("cannot read {}: {e}", path.display())))?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ConfigError::new(if path == "." { String::new() } else { path }, e.into_inner())
    })?;
    config.build()?;
    Ok(config)
}

impl ScenarioConfig {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Validates every field and builds the mesh, crack, program and
    /// evolution parameters.
    pub fn build(&self) -> Result<Scenario, ConfigError> {
        if self.schema != SCHEMA_VERSION {
            return Err(ConfigError::new(
                "schema",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema),
            ));
        }
        let lambda = PenaltyWeight::new(self.lambda).map_err(|e| ConfigError::new("lambda", e))?;
        if self.m < 1 {
            return Err(ConfigError::new("m", "component budget must be at least 1"));
        }
        let schedule = Schedule::new(self.schedule.end, self.schedule.delta).map_err(|e| {
            let field =
                if self.schedule.end.is_finite() && self.schedule.end > 0.0 { "schedule.delta" } else { "schedule.T" };
            ConfigError::new(field, e)
        })?;
        let policy = ExtensionPolicy::parse(&self.policy.kind, self.policy.budget)
            .map_err(|e| ConfigError::new("policy.kind", e))?;

        let g = &self.geometry;
        let sides = g
            .dirichlet_sides
            .iter()
            .enumerate()
            .map(|(i, s)| s.parse::<Side>().map_err(|e| ConfigError::new(format!("geometry.dirichlet_sides[{i}]"), e)))
            .collect::<Result<Vec<_>, _>>()?;
        let mesh =
            build_rect_mesh(g.width, g.height, g.nx, g.ny, &sides).map_err(|e| ConfigError::new("geometry", e))?;

        let initial_crack = self.initial_crack(&mesh)?;
        if initial_crack.n_components() > self.m {
            return Err(ConfigError::new(
                "initial_crack",
                format!("{} components exceed the budget m = {}", initial_crack.n_components(), self.m),
            ));
        }

        let mut modes = Vec::with_capacity(self.program.len());
        for (k, mc) in self.program.iter().enumerate() {
            let profile = TimeProfile::new(mc.profile.clone())
                .map_err(|e| ConfigError::new(format!("program[{k}].profile"), e))?;
            let spatial =
                spatial_field(&mesh, &mc.spatial).map_err(|m| ConfigError::new(format!("program[{k}].spatial"), m))?;
            modes.push(Mode { profile, spatial });
        }
        let program = BoundaryProgram::new(&mesh, modes).map_err(|e| ConfigError::new("program", e))?;

        let evolution = Evolution::new(lambda, self.m, policy);
        Ok(Scenario { mesh, initial_crack, program, schedule, evolution })
    }

    fn initial_crack(&self, mesh: &Mesh) -> Result<CrackSet, ConfigError> {
        let err = |m: String| ConfigError::new("initial_crack", m);
        match &self.initial_crack {
            InitialCrack::Edges(ids) => CrackSet::new(mesh, ids.iter().copied()).map_err(|e| err(e.to_string())),
            InitialCrack::Preset(name) => {
                let name = name.trim();
                if name == "none" {
                    return Ok(CrackSet::empty());
                }
                let args = call_args(name, "edge_slit").ok_or_else(|| err(format!("unknown preset {name:?}")))?;
                let [side, pos, depth] = args.as_slice() else {
                    return Err(err("edge_slit takes (side, position, depth)".into()));
                };
                let side: Side = side.parse().map_err(|e: qsfrac_core::Error| err(e.to_string()))?;
                let pos: f64 = pos.parse().map_err(|_| err(format!("bad position {pos:?}")))?;
                let depth: f64 = depth.parse().map_err(|_| err(format!("bad depth {depth:?}")))?;
                edge_slit(mesh, &self.geometry, side, pos, depth).map_err(err)
            }
        }
    }
}

/// Arguments of `name(a, b, ...)`, trimmed.
fn call_args<'a>(text: &'a str, name: &str) -> Option<Vec<&'a str>> {
    let inner = text.strip_prefix(name)?.trim_start().strip_prefix('(')?.strip_suffix(')')?;
    Some(inner.split(',').map(str::trim).collect())
}

/// Straight slit of grid edges entering from `side`. `position` is the
/// fraction along the side, `depth` the fraction of the domain crossed.
fn edge_slit(mesh: &Mesh, g: &Geometry, side: Side, position: f64, depth: f64) -> Result<CrackSet, String> {
    if !(0.0..=1.0).contains(&position) || !(depth > 0.0 && depth < 1.0) {
        return Err(format!("edge_slit needs position in [0, 1] and depth in (0, 1), got {position}, {depth}"));
    }
    let (along, across) = match side {
        Side::Left | Side::Right => (g.ny, g.nx),
        Side::Bottom | Side::Top => (g.nx, g.ny),
    };
    let line = (position * along as f64).round() as usize;
    if line == 0 || line >= along {
        return Err(format!("edge_slit position {position} falls on a corner grid line"));
    }
    let n_edges = (depth * across as f64).round() as usize;
    if n_edges == 0 {
        return Err(format!("edge_slit depth {depth} is shorter than one cell"));
    }
    let vid = |i: usize, j: usize| j * (g.nx + 1) + i;
    let mut edges = Vec::with_capacity(n_edges);
    for k in 0..n_edges {
        let (a, b) = match side {
            Side::Left => (vid(k, line), vid(k + 1, line)),
            Side::Right => (vid(g.nx - k, line), vid(g.nx - k - 1, line)),
            Side::Bottom => (vid(line, k), vid(line, k + 1)),
            Side::Top => (vid(line, g.ny - k), vid(line, g.ny - k - 1)),
        };
        edges.push(mesh.find_edge(a, b).ok_or_else(|| format!("no mesh edge between vertices {a} and {b}"))?);
    }
    CrackSet::new(mesh, edges).map_err(|e| e.to_string())
}

fn spatial_field(mesh: &Mesh, spatial: &Spatial) -> Result<Vec<f64>, String> {
    match spatial {
        Spatial::Nodal(v) => {
            if v.len() != mesh.n_vertices() {
                return Err(format!("nodal field has {} values, mesh has {} vertices", v.len(), mesh.n_vertices()));
            }
            Ok(v.clone())
        }
        Spatial::Named(name) => {
            let name = name.trim();
            if name == "mode_antisym" {
                let ymax = mesh.vertices().iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max);
                let ymin = mesh.vertices().iter().map(|p| p[1]).fold(f64::INFINITY, f64::min);
                let mid = 0.5 * (ymin + ymax);
                let tol = 1e-12 * (ymax - ymin);
                return Ok(mesh.nodal(|p| if (p[1] - mid).abs() <= tol { 0.0 } else { (p[1] - mid).signum() }));
            }
            let args = call_args(name, "affine").ok_or_else(|| format!("unknown field {name:?}"))?;
            let coef = args
                .iter()
                .map(|a| a.parse::<f64>().map_err(|_| format!("bad affine coefficient {a:?}")))
                .collect::<Result<Vec<_>, _>>()?;
            let [a, b, c] = coef.as_slice() else {
                return Err("affine takes (a, b, c)".into());
            };
            let (a, b, c) = (*a, *b, *c);
            Ok(mesh.nodal(|p| a * p[0] + b * p[1] + c))
        }
    }
}
