//! Volume-preserving mean curvature flow `∂_t F = −(H − h) ν` in graph form.
//!
//! The radial function evolves by `ṙ = −(H − h)/ḡ(ν, u)`, which moves every
//! point with normal speed `−(H − h)` plus a tangential reparametrization.

mod diagnostics;
mod monitor;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::ambient::{norm, MetricModel};
use crate::error::{Error, Result};
use crate::surface::{
    barycenter, measures_and_radii, FieldOptions, GraphSurface, Radii, RoundnessParams, SurfaceFields,
    DEFAULT_RADIAL_ORDER,
};

pub use diagnostics::{diagnostics, DiagnosticsRow, CSV_HEADER};
pub use monitor::{
    class_invariance_check, decay_fit, identity_monitor, ClassInvarianceReport, DecayRates, IdentityRow,
    MonitorReport, MonitorTolerances, Prop49Row,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    Euler,
    Rk2,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct FlowConfig {
    pub cfl: f64,
    pub integrator: Integrator,
    pub volume_correction: bool,
    pub t_max: f64,
    pub tol_linf: f64,
    pub recenter: bool,
    /// Roundness class; `None` uses `σ = σ_Σ(0)`, `η = 1`, `B₁ = B₂ = B_cen = 10`.
    pub class_params: Option<RoundnessParams>,
    pub diag_every: usize,
    /// Harmonic degree of the basis used for spectral diagnostics.
    pub diag_basis_degree: usize,
    /// Radius of the inner sphere bounding the volume integral; chosen
    /// automatically when absent.
    pub inner_radius: Option<f64>,
    pub max_steps: Option<usize>,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            cfl: 0.5,
            integrator: Integrator::Rk2,
            volume_correction: true,
            t_max: 1e6,
            tol_linf: 1e-8,
            recenter: true,
            class_params: None,
            diag_every: 20,
            diag_basis_degree: 8,
            inner_radius: None,
            max_steps: None,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::Config(format!("cfl must lie in (0, 1], got {}", self.cfl)));
        }
        if !(self.tol_linf > 0.0) {
            return Err(Error::Config("tol_linf must be positive".into()));
        }
        if !(self.t_max > 0.0) {
            return Err(Error::Config("t_max must be positive".into()));
        }
        if self.diag_every == 0 {
            return Err(Error::Config("diag_every must be at least 1".into()));
        }
        if let Some(p) = &self.class_params {
            p.validate()?;
        }
        Ok(())
    }
}

/// Default time step `cfl σ_Σ² / (L (L+1))`.
pub fn time_step(cfl: f64, sigma: f64, l_max: usize) -> f64 {
    let l = l_max.max(1) as f64;
    cfl * sigma * sigma / (l * (l + 1.0))
}

/// Area-weighted mean of `H`.
pub fn h_average(fields: &SurfaceFields) -> f64 {
    fields.h_average()
}

/// `ṙ = −(H − h)/ḡ(ν, u)` at every node.
pub fn radial_velocity(fields: &SurfaceFields, h: f64) -> Result<Vec<f64>> {
    fields
        .nodes
        .iter()
        .enumerate()
        .map(|(k, n)| {
            if !(n.graph > 0.0) {
                return Err(Error::GraphConditionViolated { node: k, value: n.graph });
            }
            Ok(-(n.mean_curvature - h) / n.graph)
        })
        .collect()
}

fn light_fields(model: &MetricModel, surface: &GraphSurface) -> Result<SurfaceFields> {
    SurfaceFields::compute(model, surface, FieldOptions { curvature: false })
}

/// Spectral coefficients of `ṙ` for `surface`.
fn velocity_coeffs(fields: &SurfaceFields) -> Result<Vec<f64>> {
    let v = radial_velocity(fields, fields.h_average())?;
    Ok(fields.grid.analyze(&v))
}

fn auto_inner_radius(model: &MetricModel, surface: &GraphSurface) -> Result<f64> {
    let r = surface.synthesize()?.r;
    let r_min = r.iter().copied().fold(f64::INFINITY, f64::min);
    if model.is_flat() {
        return Ok(0.5 * r_min);
    }
    let floor = 1.0 + norm(&surface.center);
    if r_min <= floor {
        return Err(Error::InnerSphereNotEnclosed { inner: floor, r_min });
    }
    Ok(floor + 0.5 * (r_min - floor))
}

#[derive(Debug, Clone)]
pub struct FlowState {
    pub t: f64,
    pub steps: usize,
    pub surface: GraphSurface,
    /// Fields without ambient curvature, consistent with `surface`.
    pub fields: SurfaceFields,
    pub radii: Radii,
    pub volume: f64,
    pub volume_target: f64,
    pub inner_radius: f64,
    /// Uniform radial offset applied by the last volume correction.
    pub last_offset: f64,
    pub last_dt: f64,
    pub recentered: usize,
}

impl FlowState {
    pub fn new(model: &MetricModel, surface: GraphSurface, config: &FlowConfig) -> Result<Self> {
        let inner_radius = match config.inner_radius {
            Some(r) => r,
            None => auto_inner_radius(model, &surface)?,
        };
        let fields = light_fields(model, &surface)?;
        let radii = measures_and_radii(&fields);
        let volume = crate::surface::enclosed_volume(model, &surface, inner_radius, DEFAULT_RADIAL_ORDER)?;
        Ok(Self {
            t: 0.0,
            steps: 0,
            surface,
            fields,
            radii,
            volume,
            volume_target: volume,
            inner_radius,
            last_offset: 0.0,
            last_dt: 0.0,
            recentered: 0,
        })
    }

    pub fn sigma(&self) -> f64 {
        self.radii.sigma_area
    }
}

/// Uniform offset `c` with `V(r + c) = target` by Newton iteration.
fn restore_volume(
    model: &MetricModel,
    surface: &GraphSurface,
    target: f64,
    inner: f64,
) -> Result<(GraphSurface, f64, f64)> {
    let y00 = (4.0 * PI).sqrt();
    let mut offset = 0.0;
    let mut current = surface.clone();
    let mut residual = f64::INFINITY;
    for _ in 0..30 {
        let (v, rate) = crate::surface::volume_and_rate(model, &current, inner, DEFAULT_RADIAL_ORDER)?;
        residual = (v - target) / target;
        if residual.abs() <= 1e-12 {
            return Ok((current, offset, v));
        }
        if !(rate > 0.0) {
            break;
        }
        let dc = -(v - target) / rate;
        offset += dc;
        let mut coeffs = surface.coeffs.clone();
        coeffs[0] += offset * y00;
        current = surface.with_coeffs(coeffs);
    }
    Err(Error::VolumeSolveFailure(residual))
}

/// One time step of length `dt` (or the CFL step when `dt` is `None`).
pub fn step_with(state: &FlowState, config: &FlowConfig, model: &MetricModel, dt: Option<f64>) -> Result<FlowState> {
    let surface = &state.surface;
    let dt = dt.unwrap_or_else(|| time_step(config.cfl, state.sigma(), surface.l_max));
    let k1 = velocity_coeffs(&state.fields)?;
    let advance = |base: &[f64], k: &[f64], scale: f64| -> Vec<f64> {
        base.iter().zip(k.iter().chain(std::iter::repeat(&0.0))).map(|(a, b)| a + scale * b).collect()
    };
    let coeffs = match config.integrator {
        Integrator::Euler => advance(&surface.coeffs, &k1, dt),
        Integrator::Rk2 => {
            let trial = surface.with_coeffs(advance(&surface.coeffs, &k1, dt));
            let k2 = velocity_coeffs(&light_fields(model, &trial)?)?;
            let avg: Vec<f64> = k1.iter().zip(&k2).map(|(a, b)| 0.5 * (a + b)).collect();
            advance(&surface.coeffs, &avg, dt)
        }
    };
    let mut next = surface.with_coeffs(coeffs);
    next.synthesize()?;
    let mut offset = 0.0;
    let mut volume_target = state.volume_target;
    let mut inner = state.inner_radius;
    let mut volume;
    if config.volume_correction {
        let (s, c, v) = restore_volume(model, &next, volume_target, inner)?;
        next = s;
        offset = c;
        volume = v;
    } else {
        volume = crate::surface::enclosed_volume(model, &next, inner, DEFAULT_RADIAL_ORDER)?;
    }
    let mut fields = light_fields(model, &next)?;
    let mut recentered = state.recentered;
    if config.recenter {
        let z = barycenter(&fields);
        let drift = norm(&[0, 1, 2].map(|i| z[i] - next.center[i]));
        if drift > 0.1 * measures_and_radii(&fields).sigma_area {
            next = next.recenter(z)?;
            if config.inner_radius.is_none() {
                inner = auto_inner_radius(model, &next)?;
            }
            volume = crate::surface::enclosed_volume(model, &next, inner, DEFAULT_RADIAL_ORDER)?;
            if config.volume_correction {
                volume_target = volume;
            }
            fields = light_fields(model, &next)?;
            recentered += 1;
        }
    }
    let radii = measures_and_radii(&fields);
    Ok(FlowState {
        t: state.t + dt,
        steps: state.steps + 1,
        surface: next,
        fields,
        radii,
        volume,
        volume_target,
        inner_radius: inner,
        last_offset: offset,
        last_dt: dt,
        recentered,
    })
}

pub fn step(state: &FlowState, config: &FlowConfig, model: &MetricModel) -> Result<FlowState> {
    step_with(state, config, model, None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowStatus {
    Converged,
    HorizonReached,
    ClassExit,
    GraphFailure,
}

/// Diagnosed time series plus the data needed to evaluate monitors on it.
#[derive(Debug, Clone, Serialize)]
pub struct FlowHistory {
    pub rows: Vec<DiagnosticsRow>,
    pub delta: f64,
    pub adm_mass: f64,
    pub class_params: RoundnessParams,
}

impl FlowHistory {
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for r in &self.rows {
            writeln!(w, "{}", r.csv_line())?;
        }
        Ok(())
    }

    /// Rows carrying freshly computed spectral columns.
    pub fn fresh(&self) -> impl Iterator<Item = &DiagnosticsRow> {
        self.rows.iter().filter(|r| r.fresh)
    }
}

#[derive(Debug, Clone)]
pub struct FlowResult {
    pub status: FlowStatus,
    /// Roundness was lost at some diagnosed step.
    pub class_exit: bool,
    pub error: Option<String>,
    pub surface: GraphSurface,
    /// Final state; absent when the initial surface could not be set up.
    pub state: Option<FlowState>,
    pub history: FlowHistory,
    pub rates: Option<DecayRates>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassFlags {
    pub round_throughout: bool,
    pub well_centered_throughout: bool,
    pub final_round: bool,
    pub final_well_centered: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub status: FlowStatus,
    pub steps: usize,
    pub final_t: f64,
    pub final_sigma: f64,
    pub final_h: f64,
    pub final_deviation_linf: f64,
    pub fitted_rates: Option<DecayRates>,
    pub class_flags: ClassFlags,
    pub error: Option<String>,
}

impl FlowResult {
    pub fn summary(&self) -> RunSummary {
        let rows = &self.history.rows;
        let last = rows.last();
        let fresh: Vec<&DiagnosticsRow> = self.history.fresh().collect();
        RunSummary {
            status: self.status,
            steps: self.state.as_ref().map_or(0, |s| s.steps),
            final_t: self.state.as_ref().map_or(0.0, |s| s.t),
            final_sigma: self.state.as_ref().map_or(f64::NAN, |s| s.sigma()),
            final_h: self.state.as_ref().map_or(f64::NAN, |s| s.fields.h_average()),
            final_deviation_linf: last.map_or(f64::NAN, |r| r.deviation_linf),
            fitted_rates: self.rates.clone(),
            class_flags: ClassFlags {
                round_throughout: fresh.iter().all(|r| r.round),
                well_centered_throughout: fresh.iter().all(|r| r.well_centered),
                final_round: last.is_some_and(|r| r.round),
                final_well_centered: last.is_some_and(|r| r.well_centered),
            },
            error: self.error.clone(),
        }
    }
}

pub fn default_class_params(sigma: f64) -> RoundnessParams {
    RoundnessParams::new(sigma, 1.0, 10.0, 10.0, 10.0)
}

pub fn run(initial: GraphSurface, model: &MetricModel, config: &FlowConfig) -> FlowResult {
    run_with(initial, model, config, |_, _| {})
}

/// Like [`run`], calling `observe` after every recorded row.
pub fn run_with<F>(initial: GraphSurface, model: &MetricModel, config: &FlowConfig, mut observe: F) -> FlowResult
where
    F: FnMut(&FlowState, &DiagnosticsRow),
{
    let failed = |surface: GraphSurface, err: Error, params: RoundnessParams| -> FlowResult {
        FlowResult {
            status: FlowStatus::GraphFailure,
            class_exit: false,
            error: Some(err.to_string()),
            surface,
            state: None,
            history: FlowHistory { rows: Vec::new(), delta: model.delta, adm_mass: model.mass(), class_params: params },
            rates: None,
        }
    };
    let placeholder = default_class_params(2.0);
    if let Err(e) = config.validate() {
        return failed(initial, e, placeholder);
    }
    let mut state = match FlowState::new(model, initial.clone(), config) {
        Ok(s) => s,
        Err(e) => return failed(initial, e, placeholder),
    };
    let params = config.class_params.unwrap_or_else(|| default_class_params(state.sigma()));
    let mut history = FlowHistory { rows: Vec::new(), delta: model.delta, adm_mass: model.mass(), class_params: params };
    let mut last_fresh: Option<DiagnosticsRow> = None;
    let mut class_exit = false;
    let mut error = None;
    let status = loop {
        let fresh = state.steps % config.diag_every == 0;
        let row = match diagnostics(&state, model, config, &params, fresh, last_fresh.as_ref()) {
            Ok(r) => r,
            Err(e) => {
                error = Some(e.to_string());
                break FlowStatus::GraphFailure;
            }
        };
        class_exit |= !row.round;
        let converged = row.deviation_linf <= config.tol_linf;
        // the terminal row always carries spectral columns
        let row = if (converged || state.t >= config.t_max) && !row.fresh {
            match diagnostics(&state, model, config, &params, true, None) {
                Ok(r) => r,
                Err(e) => {
                    error = Some(e.to_string());
                    break FlowStatus::GraphFailure;
                }
            }
        } else {
            row
        };
        if row.fresh {
            last_fresh = Some(row.clone());
        }
        observe(&state, &row);
        history.rows.push(row);
        if converged {
            break FlowStatus::Converged;
        }
        if state.t >= config.t_max * (1.0 - 1e-14) || config.max_steps.is_some_and(|m| state.steps >= m) {
            break if class_exit { FlowStatus::ClassExit } else { FlowStatus::HorizonReached };
        }
        let dt = time_step(config.cfl, state.sigma(), state.surface.l_max).min(config.t_max - state.t);
        match step_with(&state, config, model, Some(dt)) {
            Ok(s) => state = s,
            Err(e) => {
                error = Some(e.to_string());
                break FlowStatus::GraphFailure;
            }
        }
    };
    let rates = monitor::default_window(&history).and_then(|w| decay_fit(&history, w).ok());
    FlowResult { status, class_exit, error, surface: state.surface.clone(), state: Some(state), history, rates }
}
