use serde::Serialize;

use super::{DiagnosticsRow, FlowHistory};
use crate::error::{Error, Result};
use crate::surface::RoundnessParams;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MonitorTolerances {
    /// Relative tolerance for `d/dt |Σ| = −‖H−h‖²`.
    pub area: f64,
    /// Relative tolerance for `d/dt ‖H−h‖² = −2⟨L(H−h),H−h⟩ − ∮H(H−h)³`.
    pub norm: f64,
    /// Leading fraction of the run excluded from the inequality count.
    pub transient: f64,
}

impl Default for MonitorTolerances {
    fn default() -> Self {
        Self { area: 0.02, norm: 0.05, transient: 0.1 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityRow {
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub rel_err: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Prop49Row {
    pub t: f64,
    pub lhs: f64,
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MonitorReport {
    pub tolerances: MonitorTolerances,
    pub area: Vec<IdentityRow>,
    pub norm: Vec<IdentityRow>,
    pub prop49: Vec<Prop49Row>,
    /// Diagnosed rows whose derivative sits below the rounding floor.
    pub skipped: usize,
    pub area_pass: bool,
    pub norm_pass: bool,
    /// Fraction of post-transient rows satisfying the Prop. 4.9 bound.
    pub prop49_fraction: f64,
    /// `max |ḣ| σ^{4+2δ}`
    pub hdot_scaled_max: f64,
    /// `max |ż| σ / ‖H−h‖₂`
    pub barycenter_speed_constant: f64,
}

/// Derivative at `t1` of the parabola through three samples.
fn three_point(t: [f64; 3], y: [f64; 3]) -> f64 {
    let (h0, h1) = (t[1] - t[0], t[2] - t[1]);
    -h1 / (h0 * (h0 + h1)) * y[0] + (h1 - h0) / (h0 * h1) * y[1] + h0 / (h1 * (h0 + h1)) * y[2]
}

fn rel(lhs: f64, rhs: f64) -> f64 {
    let scale = lhs.abs().max(rhs.abs());
    if scale == 0.0 {
        0.0
    } else {
        (lhs - rhs).abs() / scale
    }
}

pub fn identity_monitor(history: &FlowHistory, tol: MonitorTolerances) -> Result<MonitorReport> {
    let rows = &history.rows;
    let interior: Vec<usize> = (1..rows.len().saturating_sub(1))
        .filter(|&k| rows[k].fresh && rows[k - 1].step + 1 == rows[k].step && rows[k].step + 1 == rows[k + 1].step)
        .collect();
    if rows.len() < 3 || interior.is_empty() {
        return Err(Error::InsufficientHistory { needed: 3, have: rows.len() });
    }
    let eps = f64::EPSILON;
    let t_end = rows.last().map_or(0.0, |r| r.t);
    let sigma = history.class_params.sigma;
    let delta = history.delta;
    let mass = history.adm_mass;
    let mut report = MonitorReport {
        tolerances: tol,
        area: Vec::new(),
        norm: Vec::new(),
        prop49: Vec::new(),
        skipped: 0,
        area_pass: true,
        norm_pass: true,
        prop49_fraction: 1.0,
        hdot_scaled_max: 0.0,
        barycenter_speed_constant: 0.0,
    };
    let mut counted = 0usize;
    let mut held = 0usize;
    for &k in &interior {
        let (a, b, c) = (&rows[k - 1], &rows[k], &rows[k + 1]);
        let ts = [a.t, b.t, c.t];
        let dt = (c.t - a.t) / 2.0;
        let d2 = |r: &DiagnosticsRow| r.deviation_l2 * r.deviation_l2;
        let dev2 = d2(b);
        let area_noise = 8.0 * eps * b.area / dt;
        let h_noise = 1e3 * eps * b.h.abs();
        let norm_noise = 4.0 * b.deviation_l2 * h_noise * b.area.sqrt() / dt;
        let d_area = three_point(ts, [a.area, b.area, c.area]);
        let d_norm = three_point(ts, [d2(a), d2(b), d2(c)]);
        let area_ok = dev2 > 5.0 * area_noise / tol.area;
        let rhs = -2.0 * b.l_pairing - b.cubic;
        let norm_ok = d_norm.abs() > 5.0 * norm_noise / tol.norm;
        if area_ok {
            let e = rel(d_area, -dev2);
            report.area_pass &= e <= tol.area;
            report.area.push(IdentityRow { t: b.t, lhs: d_area, rhs: -dev2, rel_err: e, pass: e <= tol.area });
        }
        if norm_ok {
            let e = rel(d_norm, rhs);
            report.norm_pass &= e <= tol.norm;
            report.norm.push(IdentityRow { t: b.t, lhs: d_norm, rhs, rel_err: e, pass: e <= tol.norm });
            let s = b.sigma;
            let bound = -(4.0 * mass / s.powi(3)) * b.translational_l2.powi(2) - (2.0 / (s * s)) * b.difference_l2.powi(2);
            let holds = d_norm <= bound;
            if b.t >= tol.transient * t_end {
                counted += 1;
                held += usize::from(holds);
            }
            report.prop49.push(Prop49Row { t: b.t, lhs: d_norm, bound, holds });
        }
        if !area_ok || !norm_ok {
            report.skipped += 1;
        }
        let hdot = three_point(ts, [a.h, b.h, c.h]);
        if b.deviation_l2 > 1e3 * h_noise * b.area.sqrt() {
            report.hdot_scaled_max = report.hdot_scaled_max.max(hdot.abs() * sigma.powf(4.0 + 2.0 * delta));
        }
    }
    for w in rows.windows(2) {
        let dt = w[1].t - w[0].t;
        let dev = w[0].deviation_l2.max(w[1].deviation_l2);
        if dt > 0.0 && dev > 1e-10 {
            let dz = (0..3).map(|i| (w[1].barycenter[i] - w[0].barycenter[i]).powi(2)).sum::<f64>().sqrt();
            report.barycenter_speed_constant = report.barycenter_speed_constant.max(dz / dt * w[0].sigma / dev);
        }
    }
    if counted > 0 {
        report.prop49_fraction = held as f64 / counted as f64;
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayRates {
    pub window: (f64, f64),
    /// `−d/dt log ‖H−h‖₂²`
    pub total: f64,
    pub translational: Option<f64>,
    pub difference: Option<f64>,
    pub points: usize,
}

/// Least-squares slope of `y` against `x`.
fn slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if x.len() < 5 || !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    Some(sxy / sxx)
}

fn log_rate<'a, I>(rows: I, value: fn(&DiagnosticsRow) -> f64) -> Option<(f64, usize)>
where
    I: Iterator<Item = &'a DiagnosticsRow>,
{
    let (t, y): (Vec<f64>, Vec<f64>) =
        rows.map(|r| (r.t, value(r))).filter(|(_, v)| *v > 0.0 && v.is_finite()).map(|(t, v)| (t, v.ln())).unzip();
    slope(&t, &y).map(|s| (-s, t.len()))
}

pub fn decay_fit(history: &FlowHistory, window: (f64, f64)) -> Result<DecayRates> {
    let inside = |r: &&DiagnosticsRow| r.t >= window.0 && r.t <= window.1;
    let (total, points) = log_rate(history.rows.iter().filter(inside), |r| r.deviation_l2 * r.deviation_l2)
        .ok_or_else(|| Error::DegenerateFit(format!("fewer than 5 usable rows in [{}, {}]", window.0, window.1)))?;
    let fresh = || history.rows.iter().filter(inside).filter(|r| r.fresh);
    Ok(DecayRates {
        window,
        total,
        translational: log_rate(fresh(), |r| r.translational_l2 * r.translational_l2).map(|v| v.0),
        difference: log_rate(fresh(), |r| r.difference_l2 * r.difference_l2).map(|v| v.0),
        points,
    })
}

/// The run minus its first tenth.
pub(crate) fn default_window(history: &FlowHistory) -> Option<(f64, f64)> {
    let t_end = history.rows.last()?.t;
    (t_end > 0.0).then_some((0.1 * t_end, t_end))
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassInvarianceReport {
    pub traceless_preserved: bool,
    pub a_eta_preserved: bool,
    /// `|z| < 3 B_cen σ^{1−δ}` throughout.
    pub barycenter_within: bool,
    pub round_throughout: bool,
    pub well_centered_throughout: bool,
    /// `max (σ_{Σ₀} − σ_{Σ_t}) σ^{δ−½}`
    pub sigma_drop_scaled: f64,
    pub sigma_nonincreasing: bool,
    /// `‖(H−h)^t‖₂ σ^{1+δ}` at `t = 0`.
    pub effective_c_in: f64,
    /// First time `Π > (3c_in + 1) σ^{−1−δ}`.
    pub pi_crossing: Option<f64>,
    /// First diagnosed time with `‖(H−h)^d‖₂ ≤ ‖(H−h)^t‖₂`.
    pub difference_below_translational: Option<f64>,
    /// First time `|z| > 2 B_cen σ^{1−δ}`.
    pub barycenter_crossing: Option<f64>,
}

pub fn class_invariance_check(history: &FlowHistory, params: &RoundnessParams) -> ClassInvarianceReport {
    let rows = &history.rows;
    let s = params.sigma;
    let d = history.delta;
    let zn = |r: &DiagnosticsRow| r.barycenter.iter().map(|v| v * v).sum::<f64>().sqrt();
    let sigma0 = rows.first().map_or(s, |r| r.sigma);
    let c_in = rows.first().map_or(0.0, |r| r.translational_l2 * s.powf(1.0 + d));
    let pi_level = (3.0 * c_in + 1.0) * s.powf(-1.0 - d);
    ClassInvarianceReport {
        traceless_preserved: rows.iter().all(|r| r.traceless_l4 < params.b1 * s.powf(-1.0 - d)),
        a_eta_preserved: rows.iter().all(|r| r.a_eta < params.b2 * s.powf(-8.0 - 4.0 * d)),
        barycenter_within: rows.iter().all(|r| zn(r) < 3.0 * params.bcen * s.powf(1.0 - d)),
        round_throughout: rows.iter().all(|r| r.round),
        well_centered_throughout: rows.iter().all(|r| r.well_centered),
        sigma_drop_scaled: rows.iter().map(|r| (sigma0 - r.sigma) * s.powf(d - 0.5)).fold(0.0, f64::max),
        sigma_nonincreasing: rows.windows(2).all(|w| w[1].sigma <= w[0].sigma * (1.0 + 1e-13)),
        effective_c_in: c_in,
        pi_crossing: rows.iter().find(|r| r.pi > pi_level).map(|r| r.t),
        difference_below_translational: rows
            .iter()
            .find(|r| r.fresh && r.difference_l2 <= r.translational_l2)
            .map(|r| r.t),
        barycenter_crossing: rows.iter().find(|r| zn(r) > 2.0 * params.bcen * s.powf(1.0 - d)).map(|r| r.t),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::MetricModel;
    use crate::flow::{run, FlowConfig, FlowStatus};
    use crate::surface::GraphSurface;

    #[test]
    fn three_point_is_exact_on_quadratics() {
        let f = |t: f64| 3.0 * t * t - 2.0 * t + 1.0;
        let t = [0.3, 0.5, 0.9];
        assert!((three_point(t, t.map(f)) - (6.0 * 0.5 - 2.0)).abs() < 1e-12);
    }

    #[test]
    fn euclidean_relaxation_monitors() {
        let model = MetricModel::euclidean();
        let cfg = FlowConfig { diag_every: 5, tol_linf: 1e-6, ..FlowConfig::default() };
        let res = run(GraphSurface::sphere([0.0; 3], 10.0, 8).with_mode(2, 0, 0.3), &model, &cfg);
        assert_eq!(res.status, FlowStatus::Converged);
        let rep = identity_monitor(&res.history, MonitorTolerances::default()).unwrap();
        assert!(rep.area_pass && !rep.area.is_empty(), "{:?}", rep.area.iter().map(|r| r.rel_err).fold(0.0, f64::max));
        assert!(rep.norm_pass, "{:?}", rep.norm.iter().map(|r| r.rel_err).fold(0.0, f64::max));
        let rates = decay_fit(&res.history, (0.0, res.history.rows.last().unwrap().t)).unwrap();
        assert!((rates.total - 0.08).abs() < 0.05 * 0.08, "{}", rates.total);
        let class = class_invariance_check(&res.history, &res.history.class_params);
        assert!(class.sigma_nonincreasing && class.round_throughout);
    }

    #[test]
    fn short_history_is_rejected() {
        let model = MetricModel::euclidean();
        let res = run(GraphSurface::sphere([0.0; 3], 10.0, 4), &model, &FlowConfig::default());
        assert!(matches!(identity_monitor(&res.history, MonitorTolerances::default()), Err(Error::InsufficientHistory { .. })));
        let short = FlowHistory { rows: res.history.rows.clone(), ..res.history.clone() };
        assert!(matches!(decay_fit(&short, (0.0, 1.0)), Err(Error::DegenerateFit(_))));
    }
}
