use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{GraphSurface, SurfaceFields};
use crate::ambient::{det3, norm, MetricModel, Vec3};
use crate::error::{Error, Result};
use crate::harmonics::{gauss_legendre, Deriv};

pub const DEFAULT_RADIAL_ORDER: usize = 16;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Radii {
    /// `r_Σ = min |X|`
    pub r_min: f64,
    /// `R_Σ = max |X|`
    pub r_max: f64,
    /// `σ_Σ = √(|Σ|/4π)`
    pub sigma_area: f64,
    pub area: f64,
}

pub fn measures_and_radii(fields: &SurfaceFields) -> Radii {
    let d = fields.distances();
    let area = fields.area();
    Radii {
        r_min: d.iter().copied().fold(f64::INFINITY, f64::min),
        r_max: d.iter().copied().fold(0.0, f64::max),
        sigma_area: (area / (4.0 * PI)).sqrt(),
        area,
    }
}

/// Volume between the sphere `|x − z₀| = ρ₀` and the surface, together with
/// `∮ √det ḡ(X) r² dΩ`, the derivative under a uniform radial offset.
pub(crate) fn volume_and_rate(
    model: &MetricModel,
    surface: &GraphSurface,
    inner_radius: f64,
    order: usize,
) -> Result<(f64, f64)> {
    let r = surface.grid().synthesize(&surface.coeffs, Deriv::Val);
    let r_min = r.iter().copied().fold(f64::INFINITY, f64::min);
    if !(inner_radius > 0.0 && inner_radius < r_min) {
        return Err(Error::InnerSphereNotEnclosed { inner: inner_radius, r_min });
    }
    let (xs, ws) = gauss_legendre(order);
    let c = surface.center;
    let parts = surface
        .grid()
        .nodes()
        .par_iter()
        .zip(r.par_iter())
        .map(|(node, &rn)| {
            let u = node.direction();
            let at = |s: f64| -> Result<f64> {
                let x = [c[0] + s * u[0], c[1] + s * u[1], c[2] + s * u[2]];
                if !model.is_flat() && norm(&x) <= 1.0 {
                    return Err(Error::ChartViolation(x));
                }
                Ok(det3(&model.metric_at(&x)).sqrt() * s * s)
            };
            let half = 0.5 * (rn - inner_radius);
            let mid = 0.5 * (rn + inner_radius);
            let mut radial = 0.0;
            for (x, w) in xs.iter().zip(&ws) {
                radial += w * at(mid + half * x)?;
            }
            Ok((node.weight * half * radial, node.weight * at(rn)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(parts.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1)))
}

/// `V = ∮_{S²} ∫_{ρ₀}^{r(u)} √det ḡ(z₀ + s u) s² ds dΩ`.
pub fn enclosed_volume(model: &MetricModel, surface: &GraphSurface, inner_radius: f64, order: usize) -> Result<f64> {
    volume_and_rate(model, surface, inner_radius, order).map(|v| v.0)
}

/// `z_Σ = |Σ|⁻¹ ∮ X dμ`
pub fn barycenter(fields: &SurfaceFields) -> Vec3 {
    let area = fields.area();
    [0, 1, 2].map(|i| fields.integrate_with(|n| n.position[i]) / area)
}

/// `m_H = √(|Σ|/16π) (1 − (1/16π) ∮ H² dμ)`
pub fn hawking_mass(fields: &SurfaceFields) -> f64 {
    let area = fields.area();
    let willmore = fields.integrate_with(|n| n.mean_curvature * n.mean_curvature);
    (area / (16.0 * PI)).sqrt() * (1.0 - willmore / (16.0 * PI))
}

/// `(∮ |f|^p dμ)^{1/p}`, or `max |f|` for `p = ∞`.
pub fn lp_norm(fields: &SurfaceFields, values: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        values.iter().fold(0.0, |m, v| m.max(v.abs()))
    } else {
        values
            .iter()
            .zip(&fields.nodes)
            .map(|(v, n)| v.abs().powf(p) * n.measure)
            .sum::<f64>()
            .powf(1.0 / p)
    }
}

/// Spectral gradient and covariant Hessian of a node scalar.
#[derive(Debug, Clone)]
pub struct GradientField {
    /// `|∇f|_g` per node
    pub gradient: Vec<f64>,
    /// `|∇²f|_g` per node
    pub hessian: Vec<f64>,
}

impl GradientField {
    pub fn new(fields: &SurfaceFields, values: &[f64]) -> Self {
        let grid = &fields.grid;
        let coeffs = grid.analyze(values);
        let [ft, fp, ftt, ftp, fpp] =
            [Deriv::T, Deriv::P, Deriv::TT, Deriv::TP, Deriv::PP].map(|d| grid.synthesize(&coeffs, d));
        let mut gradient = Vec::with_capacity(values.len());
        let mut hessian = Vec::with_capacity(values.len());
        for (k, n) in fields.nodes.iter().enumerate() {
            let gi = &n.metric_inv;
            let d = [ft[k], fp[k]];
            gradient.push((gi[0][0] * d[0] * d[0] + 2.0 * gi[0][1] * d[0] * d[1] + gi[1][1] * d[1] * d[1]).sqrt());
            let dg = &n.metric_deriv;
            let low = |l: usize, i: usize, j: usize| 0.5 * (dg[l][j][i] + dg[l][i][j] - dg[i][j][l]);
            let second = [[ftt[k], ftp[k]], [ftp[k], fpp[k]]];
            let mut hess = [[0.0; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    let mut v = second[i][j];
                    for kk in 0..2 {
                        let gamma: f64 = (0..2).map(|l| gi[kk][l] * low(l, i, j)).sum();
                        v -= gamma * d[kk];
                    }
                    hess[i][j] = v;
                }
            }
            let mut s = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    for a in 0..2 {
                        for b in 0..2 {
                            s += gi[i][a] * gi[j][b] * hess[i][j] * hess[a][b];
                        }
                    }
                }
            }
            hessian.push(s.max(0.0).sqrt());
        }
        Self { gradient, hessian }
    }
}

/// Radius-weighted Sobolev norm of order `k ∈ {0, 1, 2}`:
/// `‖f‖_{W^{0,p}} = ‖f‖_p`, `‖f‖_{W^{k+1,p}} = ‖f‖_p + σ ‖∇f‖_{W^{k,p}}`.
pub fn sobolev_norm(fields: &SurfaceFields, values: &[f64], k: usize, p: f64, sigma: f64) -> Result<f64> {
    if k > 2 {
        return Err(Error::UnsupportedOrder(k));
    }
    let base = lp_norm(fields, values, p);
    if k == 0 {
        return Ok(base);
    }
    let grad = GradientField::new(fields, values);
    let first = lp_norm(fields, &grad.gradient, p);
    if k == 1 {
        return Ok(base + sigma * first);
    }
    Ok(base + sigma * (first + sigma * lp_norm(fields, &grad.hessian, p)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundnessParams {
    pub sigma: f64,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(rename = "B1")]
    pub b1: f64,
    #[serde(rename = "B2")]
    pub b2: f64,
    #[serde(rename = "Bcen")]
    pub bcen: f64,
}

fn default_eta() -> f64 {
    1.0
}

impl RoundnessParams {
    pub fn new(sigma: f64, eta: f64, b1: f64, b2: f64, bcen: f64) -> Self {
        Self { sigma, eta, b1, b2, bcen }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 1.0) || [self.eta, self.b1, self.b2, self.bcen].iter().any(|c| !(*c > 0.0)) {
            return Err(Error::Config("roundness parameters need sigma > 1 and positive constants".into()));
        }
        Ok(())
    }
}

/// Relative margins `(bound − attained)/bound` (sign-adjusted for lower bounds).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RoundnessMargins {
    pub a_bound: f64,
    pub kappa_bound: f64,
    pub area_lower: f64,
    pub area_upper: f64,
    pub radii_lower: f64,
    pub radii_upper: f64,
    pub traceless_l4: f64,
    pub a_eta: f64,
    pub barycenter: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RoundnessReport {
    pub margins: RoundnessMargins,
    pub traceless_l4: f64,
    pub a_eta: f64,
    pub barycenter_norm: f64,
    pub round: bool,
    pub well_centered: bool,
}

/// `a_η = η σ⁻⁴ ‖H−h‖₄⁴ + ‖∇H‖₄⁴`
pub fn a_eta(fields: &SurfaceFields, sigma: f64, eta: f64, grad_h_l4: f64) -> f64 {
    let dev = fields.mean_curvature_deviation();
    eta * sigma.powi(-4) * lp_norm(fields, &dev, 4.0).powi(4) + grad_h_l4.powi(4)
}

pub fn roundness_classify(
    fields: &SurfaceFields,
    radii: &Radii,
    params: &RoundnessParams,
    grad_h_l4: f64,
    z: &Vec3,
) -> RoundnessReport {
    let s = params.sigma;
    let d = fields.delta;
    let a_max = fields.nodes.iter().map(|n| n.a_sq.sqrt()).fold(0.0, f64::max);
    let k_min = fields.nodes.iter().map(|n| n.kappa[0]).fold(f64::INFINITY, f64::min);
    let ao: Vec<f64> = fields.nodes.iter().map(|n| n.traceless_sq.max(0.0).sqrt()).collect();
    let traceless_l4 = lp_norm(fields, &ao, 4.0);
    let a_eta = a_eta(fields, s, params.eta, grad_h_l4);
    let a_bound = 2.5f64.sqrt() / s;
    let kappa_bound = 0.5 / s;
    let (area_lo, area_hi) = (3.5 * PI * s * s, 5.0 * PI * s * s);
    let ao_bound = params.b1 * s.powf(-1.0 - d);
    let eta_bound = params.b2 * s.powf(-8.0 - 4.0 * d);
    let z_bound = params.bcen * s.powf(1.0 - d);
    let zn = norm(z);
    let margins = RoundnessMargins {
        a_bound: (a_bound - a_max) / a_bound,
        kappa_bound: (k_min - kappa_bound) / kappa_bound,
        area_lower: (radii.area - area_lo) / area_lo,
        area_upper: (area_hi - radii.area) / area_hi,
        radii_lower: (radii.r_min / s - 0.75) / 0.75,
        radii_upper: (1.25 - radii.r_max / s) / 1.25,
        traceless_l4: (ao_bound - traceless_l4) / ao_bound,
        a_eta: (eta_bound - a_eta) / eta_bound,
        barycenter: (z_bound - zn) / z_bound,
    };
    let m = &margins;
    let round = m.a_bound > 0.0
        && m.kappa_bound > 0.0
        && m.area_lower > 0.0
        && m.area_upper >= 0.0
        && m.radii_lower > 0.0
        && m.radii_upper >= 0.0
        && radii.r_min <= radii.r_max
        && m.traceless_l4 > 0.0
        && m.a_eta > 0.0;
    RoundnessReport {
        margins,
        traceless_l4,
        a_eta,
        barycenter_norm: zn,
        round,
        well_centered: round && m.barycenter > 0.0,
    }
}
