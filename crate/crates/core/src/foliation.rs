//! CMC leaves obtained by flowing coordinate spheres of increasing radius,
//! with nesting and mass-asymptotics checks across the family.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ambient::{decay_check, regge_teitelboim_check, MetricModel, Vec3, DEFAULT_RT_THRESHOLD};
use crate::error::{Error, Result};
use crate::flow::{default_class_params, run, FlowConfig, FlowStatus};
use crate::harmonics::QuadratureGrid;
use crate::spectral::{assemble_operators, stability_spectrum_zero_mean};
use crate::surface::{
    barycenter, fundamental_forms, hawking_mass, lp_norm, measures_and_radii, roundness_classify, GradientField,
    GraphSurface, RoundnessParams,
};

/// Radii sampled by the ambient pre-checks.
const CHECK_RADII: [f64; 5] = [10.0, 20.0, 40.0, 80.0, 160.0];
const CHECK_SAMPLES: usize = 64;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FoliationSpec {
    pub radii: Vec<f64>,
    #[serde(default)]
    pub flow: FlowConfig,
    pub model: MetricModel,
    #[serde(default = "default_l_max", rename = "L_max")]
    pub l_max: usize,
    /// Also require the Regge–Teitelboim check to pass.
    #[serde(default)]
    pub verify_rt: bool,
    #[serde(default)]
    pub seed: u64,
}

fn default_l_max() -> usize {
    16
}

impl FoliationSpec {
    pub fn new(model: MetricModel, radii: Vec<f64>, flow: FlowConfig) -> Self {
        Self { radii, flow, model, l_max: default_l_max(), verify_rt: false, seed: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.radii.is_empty() {
            return Err(Error::Config("no initial radii".into()));
        }
        if !(self.radii[0] > 4.0) {
            return Err(Error::Config(format!("initial radii must exceed 4, got {}", self.radii[0])));
        }
        if self.radii.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("initial radii must be strictly increasing".into()));
        }
        self.model.validate()?;
        self.flow.validate()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Leaf {
    pub initial_radius: f64,
    pub surface: GraphSurface,
    pub h_value: f64,
    pub sigma: f64,
    pub hawking_mass: f64,
    /// Smallest eigenvalue of `L` on zero-mean functions.
    pub stability_eig: f64,
    pub deviation_linf: f64,
    pub barycenter: Vec3,
    /// Def. 2.5 with the run's class parameters.
    pub round: bool,
    pub well_centered: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LeafOutcome {
    pub initial_radius: f64,
    pub status: FlowStatus,
    pub steps: usize,
    pub leaf: Option<Leaf>,
    pub error: Option<String>,
}

fn analyze_leaf(
    model: &MetricModel,
    surface: &GraphSurface,
    initial_radius: f64,
    params: &RoundnessParams,
    l_basis: usize,
) -> Result<Leaf> {
    let fields = fundamental_forms(model, surface)?;
    let radii = measures_and_radii(&fields);
    let mats = assemble_operators(&fields, l_basis.min(surface.l_max))?;
    let hs = fields.mean_curvature();
    let grad = lp_norm(&fields, &GradientField::new(&fields, &hs).gradient, 4.0);
    let z = barycenter(&fields);
    let class = roundness_classify(&fields, &radii, params, grad, &z);
    Ok(Leaf {
        initial_radius,
        surface: surface.clone(),
        h_value: fields.h_average(),
        sigma: radii.sigma_area,
        hawking_mass: hawking_mass(&fields),
        stability_eig: stability_spectrum_zero_mean(&mats)?,
        deviation_linf: lp_norm(&fields, &fields.mean_curvature_deviation(), f64::INFINITY),
        barycenter: z,
        round: class.round,
        well_centered: class.well_centered,
    })
}

fn flow_leaf(spec: &FoliationSpec, radius: f64) -> LeafOutcome {
    let initial = GraphSurface::sphere([0.0; 3], radius, spec.l_max);
    let result = run(initial, &spec.model, &spec.flow);
    let steps = result.state.as_ref().map_or(0, |s| s.steps);
    let params = result.history.class_params;
    let mut outcome = LeafOutcome { initial_radius: radius, status: result.status, steps, leaf: None, error: result.error };
    if result.status == FlowStatus::Converged {
        match analyze_leaf(&spec.model, &result.surface, radius, &params, spec.flow.diag_basis_degree) {
            Ok(leaf) => outcome.leaf = Some(leaf),
            Err(e) => outcome.error = Some(e.to_string()),
        }
    }
    outcome
}

/// Flows one coordinate sphere per radius, `jobs` at a time. Individual
/// failures are recorded per leaf.
pub fn construct_foliation(spec: &FoliationSpec, jobs: usize) -> Result<Vec<LeafOutcome>> {
    spec.validate()?;
    let decay = decay_check(&spec.model, &CHECK_RADII, CHECK_SAMPLES, spec.seed)?;
    if decay.violation {
        return Err(Error::InvalidModel(format!("metric fails the decay check (growth exponent {:.3})", decay.growth_exponent)));
    }
    if spec.verify_rt {
        let rt = regge_teitelboim_check(&spec.model, &CHECK_RADII, CHECK_SAMPLES, spec.seed, DEFAULT_RT_THRESHOLD)?;
        if !rt.pass {
            return Err(Error::InvalidModel("metric fails the Regge-Teitelboim check".into()));
        }
    }
    // build the shared grid once before fanning out
    let _ = QuadratureGrid::default_for(spec.l_max);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    Ok(pool.install(|| spec.radii.par_iter().map(|&r| flow_leaf(spec, r)).collect()))
}

#[derive(Debug, Clone, Serialize)]
pub struct PairGap {
    pub inner: usize,
    pub outer: usize,
    pub center: Vec3,
    /// `min_u (r_outer(u) − r_inner(u))` about `center`.
    pub min_gap: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NestingReport {
    pub pairs: Vec<PairGap>,
    pub nested: bool,
}

/// Directions on the `n × 2n` Gauss–Legendre grid used to compare leaves.
fn sample_directions(n: usize) -> Vec<Vec3> {
    QuadratureGrid::new(0, n, 2 * n).nodes().iter().map(|node| node.direction()).collect()
}

/// Consecutive leaves (in the given order) are co-graphed about the midpoint
/// of their barycenters and compared ray by ray.
pub fn nesting_check(leaves: &[Leaf]) -> Result<NestingReport> {
    if leaves.len() < 2 {
        return Err(Error::InvalidInput(format!("nesting needs at least 2 leaves, got {}", leaves.len())));
    }
    let dirs = sample_directions(48);
    let pairs: Vec<PairGap> = leaves
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            let center = [0, 1, 2].map(|k| 0.5 * (w[0].barycenter[k] + w[1].barycenter[k]));
            let gap = dirs
                .par_iter()
                .map(|v| Ok(w[1].surface.ray_intersection(&center, v)? - w[0].surface.ray_intersection(&center, v)?))
                .collect::<Result<Vec<f64>>>()
                .map(|g| g.into_iter().fold(f64::INFINITY, f64::min));
            match gap {
                Ok(g) => PairGap { inner: i, outer: i + 1, center, min_gap: Some(g), error: None },
                Err(e) => PairGap { inner: i, outer: i + 1, center, min_gap: None, error: Some(e.to_string()) },
            }
        })
        .collect();
    let nested = pairs.iter().all(|p| p.min_gap.is_some_and(|g| g > 0.0));
    Ok(NestingReport { pairs, nested })
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticsRow {
    pub sigma: f64,
    pub h: f64,
    pub hawking_mass: f64,
    pub mass_error: f64,
    /// `|h − 2/σ_Σ| σ_Σ^{3/2+δ}`
    pub h_scaled: f64,
    /// `h σ_Σ / 2`
    pub h_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticsReport {
    pub rows: Vec<AsymptoticsRow>,
    /// Log-log slope of `|m_H − m_ADM|` against `σ`; `None` when every
    /// error sits below `1e−8`.
    pub mass_slope: Option<f64>,
    pub h_scaled_max: f64,
}

pub fn leaf_asymptotics(leaves: &[Leaf], adm_mass: f64, delta: f64) -> Result<AsymptoticsReport> {
    if leaves.len() < 3 {
        return Err(Error::DegenerateFit(format!("asymptotics need at least 3 leaves, got {}", leaves.len())));
    }
    let rows: Vec<AsymptoticsRow> = leaves
        .iter()
        .map(|l| AsymptoticsRow {
            sigma: l.sigma,
            h: l.h_value,
            hawking_mass: l.hawking_mass,
            mass_error: (l.hawking_mass - adm_mass).abs(),
            h_scaled: (l.h_value - 2.0 / l.sigma).abs() * l.sigma.powf(1.5 + delta),
            h_ratio: l.h_value * l.sigma / 2.0,
        })
        .collect();
    let mass_slope = if rows.iter().all(|r| r.mass_error < 1e-8) {
        None
    } else {
        let pts: Vec<(f64, f64)> =
            rows.iter().filter(|r| r.mass_error > 0.0).map(|r| (r.sigma.ln(), r.mass_error.ln())).collect();
        if pts.len() < 2 {
            return Err(Error::DegenerateFit("fewer than 2 nonzero mass errors".into()));
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        if !(sxx > 0.0) {
            return Err(Error::DegenerateFit("leaves share one area radius".into()));
        }
        Some(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
    };
    let h_scaled_max = rows.iter().map(|r| r.h_scaled).fold(0.0, f64::max);
    Ok(AsymptoticsReport { rows, mass_slope, h_scaled_max })
}

/// Leaves of all converged outcomes, in input order.
pub fn converged_leaves(outcomes: &[LeafOutcome]) -> Vec<Leaf> {
    outcomes.iter().filter_map(|o| o.leaf.clone()).collect()
}

/// Summary rows and pairwise gap matrix for a set of leaves.
#[derive(Debug, Clone, Serialize)]
pub struct FoliationReport {
    pub leaves: Vec<LeafSummary>,
    pub gaps: Vec<Vec<Option<f64>>>,
    pub nested: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LeafSummary {
    pub initial_radius: f64,
    pub status: FlowStatus,
    pub steps: usize,
    pub sigma: Option<f64>,
    pub h: Option<f64>,
    pub hawking_mass: Option<f64>,
    pub stability_eig: Option<f64>,
    pub barycenter: Option<Vec3>,
    pub round: Option<bool>,
    pub error: Option<String>,
}

/// Minimum radial gap between every pair of leaves, co-graphed as in
/// [`nesting_check`].
pub fn foliation_report(outcomes: &[LeafOutcome]) -> FoliationReport {
    let leaves = converged_leaves(outcomes);
    let n = leaves.len();
    let mut gaps = vec![vec![None; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            if let Ok(rep) = nesting_check(&[leaves[i].clone(), leaves[j].clone()]) {
                gaps[i][j] = rep.pairs[0].min_gap;
                gaps[j][i] = rep.pairs[0].min_gap.map(|g| -g);
            }
        }
    }
    let nested = n >= 2 && nesting_check(&leaves).is_ok_and(|r| r.nested);
    let summaries = outcomes
        .iter()
        .map(|o| LeafSummary {
            initial_radius: o.initial_radius,
            status: o.status,
            steps: o.steps,
            sigma: o.leaf.as_ref().map(|l| l.sigma),
            h: o.leaf.as_ref().map(|l| l.h_value),
            hawking_mass: o.leaf.as_ref().map(|l| l.hawking_mass),
            stability_eig: o.leaf.as_ref().map(|l| l.stability_eig),
            barycenter: o.leaf.as_ref().map(|l| l.barycenter),
            round: o.leaf.as_ref().map(|l| l.round),
            error: o.error.clone(),
        })
        .collect();
    FoliationReport { leaves: summaries, gaps, nested }
}

/// Leaf built directly from a surface, without flowing.
pub fn leaf_from_surface(model: &MetricModel, surface: &GraphSurface, l_basis: usize) -> Result<Leaf> {
    let fields = fundamental_forms(model, surface)?;
    let sigma = (fields.area() / (4.0 * PI)).sqrt();
    analyze_leaf(model, surface, surface.mean_radius(), &default_class_params(sigma), l_basis)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_leaves_are_coordinate_spheres() {
        let mut spec = FoliationSpec::new(MetricModel::euclidean(), vec![10.0, 20.0], FlowConfig::default());
        spec.l_max = 6;
        let out = construct_foliation(&spec, 2).unwrap();
        let leaves = converged_leaves(&out);
        assert_eq!(leaves.len(), 2);
        for (l, r) in leaves.iter().zip([10.0, 20.0]) {
            assert!((l.h_value - 2.0 / r).abs() < 1e-14);
            assert!(l.stability_eig.abs() < 1e-12);
        }
        let nest = nesting_check(&leaves).unwrap();
        assert!((nest.pairs[0].min_gap.unwrap() - 10.0).abs() < 1e-10);
        assert!(nest.nested);
        assert!(nesting_check(&leaves[..1]).is_err());
    }

    #[test]
    fn input_validation() {
        let bad = FoliationSpec::new(MetricModel::euclidean(), vec![3.0], FlowConfig::default());
        assert!(bad.validate().is_err());
        let bad = FoliationSpec::new(MetricModel::euclidean(), vec![10.0, 8.0], FlowConfig::default());
        assert!(bad.validate().is_err());
    }

    #[test]
    fn schwarzschild_spheres_asymptotics() {
        let model = MetricModel::schwarzschild(1.0);
        let leaves: Vec<Leaf> = [15.0, 20.0, 30.0]
            .iter()
            .map(|&r| leaf_from_surface(&model, &GraphSurface::sphere([0.0; 3], r, 6), 4).unwrap())
            .collect();
        let rep = leaf_asymptotics(&leaves, 1.0, 0.5).unwrap();
        assert!(rep.mass_slope.is_none());
        assert!(rep.rows.iter().all(|r| r.mass_error < 1e-8));
        assert!(leaves.iter().all(|l| l.stability_eig > 0.0 && l.round));
        assert!(nesting_check(&leaves).unwrap().nested);
        assert!(leaf_asymptotics(&leaves[..2], 1.0, 0.5).is_err());
    }

    #[test]
    fn crossing_leaves_are_not_nested() {
        let model = MetricModel::euclidean();
        let a = leaf_from_surface(&model, &GraphSurface::sphere([0.0; 3], 10.0, 4).with_mode(2, 0, 2.0), 2).unwrap();
        let b = leaf_from_surface(&model, &GraphSurface::sphere([0.0; 3], 10.5, 4), 2).unwrap();
        let rep = nesting_check(&[a, b]).unwrap();
        assert!(!rep.nested && rep.pairs[0].min_gap.unwrap() < 0.0);
    }
}
