use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::Value;

use crate::ambient::{MetricModel, Vec3};
use crate::error::{Error, Result};
use crate::flow::FlowConfig;
use crate::surface::GraphSurface;

const DEFAULT_L_MAX: usize = 16;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SphereShorthand {
    #[serde(default)]
    center: Vec3,
    radius: f64,
    #[serde(default)]
    perturb: Vec<(usize, i64, f64)>,
    #[serde(default = "default_l_max", rename = "L_max")]
    l_max: usize,
}

fn default_l_max() -> usize {
    DEFAULT_L_MAX
}

/// Either `{"sphere": {...}}` or a full `{"center", "L_max", "coeffs"}` object.
pub fn parse_surface(value: &Value) -> Result<GraphSurface> {
    if let Some(sphere) = value.get("sphere") {
        let s: SphereShorthand =
            serde_json::from_value(sphere.clone()).map_err(|e| Error::Config(format!("surface.sphere: {e}")))?;
        if !(s.radius > 0.0) {
            return Err(Error::Config("surface.sphere.radius must be positive".into()));
        }
        let mut surface = GraphSurface::sphere(s.center, s.radius, s.l_max);
        for (l, m, amp) in s.perturb {
            if l > s.l_max || m.unsigned_abs() as usize > l {
                return Err(Error::Config(format!("surface.sphere.perturb: invalid mode ({l}, {m}) for L_max {}", s.l_max)));
            }
            surface = surface.with_mode(l, m, amp);
        }
        return Ok(surface);
    }
    GraphSurface::from_json(&value.to_string()).map_err(|e| Error::Config(format!("surface: {e}")))
}

pub fn parse_model(value: &Value) -> Result<MetricModel> {
    MetricModel::from_json(&value.to_string()).map_err(|e| Error::Config(format!("model: {e}")))
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn field<'a>(root: &'a Value, key: &str) -> Result<&'a Value> {
    root.get(key).ok_or_else(|| Error::Config(format!("missing field `{key}`")))
}

fn optional<T: for<'de> Deserialize<'de>>(root: &Value, key: &str) -> Result<Option<T>> {
    match root.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => serde_json::from_value(v.clone()).map(Some).map_err(|e| Error::Config(format!("{key}: {e}"))),
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub history_csv: Option<PathBuf>,
    pub summary_json: Option<PathBuf>,
    pub checkpoint_dir: Option<PathBuf>,
    /// Steps between checkpoints (default 1000).
    pub checkpoint_every: Option<usize>,
    /// Foliation report destination.
    pub report_json: Option<PathBuf>,
    /// Directory for converged leaf surfaces.
    pub leaf_dir: Option<PathBuf>,
    /// Eigenfunction node samples.
    pub eigenfunctions_csv: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: MetricModel,
    pub surface: GraphSurface,
    pub flow: FlowConfig,
    pub outputs: Outputs,
}

impl RunConfig {
    pub fn from_value(root: &Value) -> Result<Self> {
        let model = parse_model(field(root, "model")?)?;
        let surface = parse_surface(field(root, "surface")?)?;
        let flow: FlowConfig = optional(root, "flow")?.unwrap_or_default();
        flow.validate()?;
        let outputs = optional(root, "outputs")?.unwrap_or_default();
        Ok(Self { model, surface, flow, outputs })
    }
}

#[derive(Debug, Clone)]
pub struct SpectrumConfig {
    pub model: MetricModel,
    pub surface: GraphSurface,
    pub l_basis: usize,
    pub count: usize,
    pub outputs: Outputs,
}

impl SpectrumConfig {
    pub fn from_value(root: &Value) -> Result<Self> {
        let model = parse_model(field(root, "model")?)?;
        let surface = parse_surface(field(root, "surface")?)?;
        let l_basis = optional(root, "L_basis")?.unwrap_or(surface.l_max.min(DEFAULT_L_MAX));
        let count = optional(root, "k")?.unwrap_or(9);
        let outputs = optional(root, "outputs")?.unwrap_or_default();
        Ok(Self { model, surface, l_basis, count, outputs })
    }
}

/// Model for `ambient`: either the model object itself or `{"model": ...}`.
pub fn ambient_model(root: &Value) -> Result<MetricModel> {
    parse_model(root.get("model").unwrap_or(root))
}

/// `CMCFLOW_SEED`, defaulting to 0.
pub fn seed_from_env() -> Result<u64> {
    match std::env::var("CMCFLOW_SEED") {
        Ok(s) => s.trim().parse().map_err(|_| Error::Config(format!("CMCFLOW_SEED is not an unsigned integer: {s:?}"))),
        Err(_) => Ok(0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::sh_index;
    use serde_json::json;

    #[test]
    fn sphere_shorthand() {
        let v = json!({"sphere": {"center": [0.5, 0, 0], "radius": 20, "perturb": [[1, 0, 0.2], [2, -1, 0.1]], "L_max": 8}});
        let s = parse_surface(&v).unwrap();
        assert_eq!(s.l_max, 8);
        assert_eq!(s.center, [0.5, 0.0, 0.0]);
        assert!((s.mean_radius() - 20.0).abs() < 1e-14);
        assert!((s.coeffs[sh_index(1, 0)] - 0.2).abs() < 1e-15);
        assert!((s.coeffs[sh_index(2, -1)] - 0.1).abs() < 1e-15);
        assert!(parse_surface(&json!({"sphere": {"radius": 5, "perturb": [[3, 4, 0.1]]}})).is_err());
        assert!(parse_surface(&json!({"sphere": {"radius": -1}})).is_err());
    }

    #[test]
    fn run_config_defaults() {
        let v = json!({"model": {"kind": "euclidean"}, "surface": {"sphere": {"radius": 10}}});
        let c = RunConfig::from_value(&v).unwrap();
        assert_eq!(c.surface.l_max, DEFAULT_L_MAX);
        assert_eq!(c.flow.cfl, 0.5);
        assert!(RunConfig::from_value(&json!({"model": {"kind": "euclidean"}})).is_err());
        let bad = json!({"model": {"kind": "euclidean"}, "surface": {"sphere": {"radius": 10}}, "flow": {"cfl": 2}});
        assert!(RunConfig::from_value(&bad).is_err());
    }
}
