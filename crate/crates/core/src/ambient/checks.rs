use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{christoffel, curvature_from_jet, dot, inv3, MetricModel, Vec3};
use crate::error::{Error, Result};
use crate::harmonics::gauss_legendre;

pub const DEFAULT_RT_THRESHOLD: f64 = 100.0;

/// Growth exponents above this count as divergence of a decay ratio.
const GROWTH_LIMIT: f64 = 0.1;
/// Ratios below this are treated as exact zeros when fitting growth.
const NEGLIGIBLE: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct MassEstimate {
    pub value: f64,
    pub samples: Vec<(f64, f64)>,
    pub residual: f64,
    /// Fitted exponent `s` of `I(R) = m + a R^{-s}`.
    pub exponent: Option<f64>,
}

/// `(1/16π) ∮ (∂_α g_αβ − ∂_β g_αα) ν^β dμ` over the coordinate sphere `|x| = R`
/// with a Gauss–Legendre × uniform rule of `n_theta` latitudes.
pub fn adm_flux_integral(model: &MetricModel, radius: f64, n_theta: usize) -> f64 {
    let n_phi = 2 * n_theta;
    let (xs, ws) = gauss_legendre(n_theta);
    let dphi = 2.0 * PI / n_phi as f64;
    let mut total = 0.0;
    for (ct, w) in xs.iter().zip(&ws) {
        let st = (1.0 - ct * ct).sqrt();
        for j in 0..n_phi {
            let (sp, cp) = (j as f64 * dphi).sin_cos();
            let u = [st * cp, st * sp, *ct];
            let x = u.map(|c| radius * c);
            let jet = model.jet_unchecked(&x);
            let flux: Vec3 = [0, 1, 2].map(|b| {
                (0..3).map(|a| jet.dg[a][b][a]).sum::<f64>() - (0..3).map(|a| jet.dg[a][a][b]).sum::<f64>()
            });
            let ginv = inv3(&jet.g);
            let nu_up: Vec3 = [0, 1, 2].map(|a| dot(&ginv[a], &u));
            let nu_norm = dot(&nu_up, &u).sqrt();
            let xt = [ct * cp, ct * sp, -st].map(|c| radius * c);
            let xp = [-sp * st, cp * st, 0.0].map(|c| radius * c);
            let gij = |a: &Vec3, b: &Vec3| super::quad(&jet.g, a, b);
            let det = gij(&xt, &xt) * gij(&xp, &xp) - gij(&xt, &xp).powi(2);
            // round weights already carry sin θ; dμ = √det dθ dφ
            let area = det.sqrt() / st;
            total += w * dphi * area * dot(&flux, &nu_up) / nu_norm;
        }
    }
    total / (16.0 * PI)
}

fn refined_flux(model: &MetricModel, radius: f64) -> Result<f64> {
    let mut n = 8;
    let mut prev = adm_flux_integral(model, radius, n);
    let mut change = f64::INFINITY;
    while n < 128 {
        n *= 2;
        let next = adm_flux_integral(model, radius, n);
        change = (next - prev).abs();
        prev = next;
        if change < 1e-8 * prev.abs().max(1.0) {
            return Ok(prev);
        }
    }
    if change > 1e-6 * prev.abs().max(1.0) {
        return Err(Error::QuadratureUnderResolved { change });
    }
    Ok(prev)
}

/// ADM mass by flux integrals at the given radii and three-point
/// extrapolation `I(R) = m + a R^{-s}` through the largest three radii.
pub fn adm_mass(model: &MetricModel, radii: &[f64]) -> Result<MassEstimate> {
    if radii.len() < 3 {
        return Err(Error::InvalidInput("adm_mass needs at least 3 radii".into()));
    }
    if radii.iter().any(|r| !(*r > 2.0)) {
        return Err(Error::InvalidInput("adm_mass radii must exceed 2".into()));
    }
    let mut rs = radii.to_vec();
    rs.sort_by(f64::total_cmp);
    let samples = rs
        .iter()
        .map(|&r| refined_flux(model, r).map(|i| (r, i)))
        .collect::<Result<Vec<_>>>()?;
    let n = samples.len();
    let (r1, i1) = samples[n - 3];
    let (r2, i2) = samples[n - 2];
    let (r3, i3) = samples[n - 1];
    let (d1, d2) = (i1 - i2, i2 - i3);
    let fallback = MassEstimate { value: i3, samples: samples.clone(), residual: d2.abs(), exponent: None };
    if d1 == 0.0 || d2 == 0.0 || d1.signum() != d2.signum() {
        return Ok(fallback);
    }
    let q = d1 / d2;
    let ratio = |s: f64| (r1.powf(-s) - r2.powf(-s)) / (r2.powf(-s) - r3.powf(-s)) - q;
    let (mut lo, mut hi) = (1e-3, 20.0);
    if ratio(lo).signum() == ratio(hi).signum() {
        return Ok(fallback);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ratio(mid).signum() == ratio(lo).signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = 0.5 * (lo + hi);
    let a = d2 / (r2.powf(-s) - r3.powf(-s));
    let value = i3 - a * r3.powf(-s);
    Ok(MassEstimate { value, samples, residual: (value - i3).abs(), exponent: Some(s) })
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayRow {
    pub radius: f64,
    /// max of `(|g−δ| + |x||∂g| + |x|²|∂∂g|) / |x|^{-½-δ}`
    pub metric_ratio: f64,
    /// max of `|S̄| / |x|^{-3-δ}`
    pub scalar_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub rows: Vec<DecayRow>,
    pub cbar: f64,
    pub growth_exponent: f64,
    pub violation: bool,
}

fn random_direction(rng: &mut ChaCha8Rng) -> Vec3 {
    let z: f64 = rng.gen_range(-1.0..1.0);
    let p: f64 = rng.gen_range(0.0..2.0 * PI);
    let s = (1.0 - z * z).sqrt();
    [s * p.cos(), s * p.sin(), z]
}

fn frobenius<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    it.into_iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Least-squares slope of `log value` against `log radius` over non-negligible rows.
fn growth_exponent(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> =
        points.iter().filter(|(_, v)| *v > NEGLIGIBLE).map(|(r, v)| (r.ln(), v.ln())).collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

fn check_radii(radii: &[f64]) -> Result<()> {
    if radii.is_empty() || radii.iter().any(|r| !(*r > 1.0)) || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("sample radii must be increasing and exceed 1".into()));
    }
    Ok(())
}

pub fn decay_check(model: &MetricModel, radii: &[f64], samples_per_radius: usize, seed: u64) -> Result<DecayReport> {
    check_radii(radii)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = model.delta;
    let rows: Vec<DecayRow> = radii
        .iter()
        .map(|&radius| {
            let mut row = DecayRow { radius, metric_ratio: 0.0, scalar_ratio: 0.0 };
            for _ in 0..samples_per_radius.max(1) {
                let x = random_direction(&mut rng).map(|c| c * radius);
                let jet = model.jet_unchecked(&x);
                let g0 = frobenius((0..9).map(|k| jet.g[k / 3][k % 3] - if k / 3 == k % 3 { 1.0 } else { 0.0 }));
                let g1 = frobenius(jet.dg.iter().flatten().flatten().copied());
                let g2 = frobenius(jet.ddg.iter().flatten().flatten().flatten().copied());
                let metric = (g0 + radius * g1 + radius * radius * g2) * radius.powf(0.5 + d);
                let scalar = curvature_from_jet(&jet).scalar.abs() * radius.powf(3.0 + d);
                row.metric_ratio = row.metric_ratio.max(metric);
                row.scalar_ratio = row.scalar_ratio.max(scalar);
            }
            row
        })
        .collect();
    let combined: Vec<(f64, f64)> = rows.iter().map(|r| (r.radius, r.metric_ratio.max(r.scalar_ratio))).collect();
    let cbar = combined.iter().map(|p| p.1).fold(0.0, f64::max);
    let growth = growth_exponent(&combined);
    let violation = growth > GROWTH_LIMIT || model.cbar.is_some_and(|c| cbar > c);
    Ok(DecayReport { rows, cbar, growth_exponent: growth, violation })
}

#[derive(Debug, Clone, Serialize)]
pub struct RtRow {
    pub radius: f64,
    /// sup `|g(x) − g(−x)| |x|^{1+δ}`
    pub metric_odd: f64,
    /// sup `|Γ(x) + Γ(−x)| |x|^{2+δ}`
    pub christoffel_even: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RtReport {
    pub rows: Vec<RtRow>,
    pub constant: f64,
    pub growth_exponent: f64,
    pub threshold: f64,
    pub pass: bool,
}

pub fn regge_teitelboim_check(
    model: &MetricModel,
    radii: &[f64],
    samples_per_radius: usize,
    seed: u64,
    threshold: f64,
) -> Result<RtReport> {
    check_radii(radii)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = model.delta;
    let rows: Vec<RtRow> = radii
        .iter()
        .map(|&radius| {
            let mut row = RtRow { radius, metric_odd: 0.0, christoffel_even: 0.0 };
            for _ in 0..samples_per_radius.max(1) {
                let x = random_direction(&mut rng).map(|c| c * radius);
                let xm = x.map(|c| -c);
                let (jp, jm) = (model.jet_unchecked(&x), model.jet_unchecked(&xm));
                let (_, gp) = christoffel(&jp);
                let (_, gm) = christoffel(&jm);
                let dg = frobenius((0..9).map(|k| jp.g[k / 3][k % 3] - jm.g[k / 3][k % 3]));
                let dgam = frobenius((0..27).map(|k| gp[k / 9][(k / 3) % 3][k % 3] + gm[k / 9][(k / 3) % 3][k % 3]));
                row.metric_odd = row.metric_odd.max(dg * radius.powf(1.0 + d));
                row.christoffel_even = row.christoffel_even.max(dgam * radius.powf(2.0 + d));
            }
            row
        })
        .collect();
    let combined: Vec<(f64, f64)> = rows.iter().map(|r| (r.radius, r.metric_odd.max(r.christoffel_even))).collect();
    let constant = combined.iter().map(|p| p.1).fold(0.0, f64::max);
    let growth = growth_exponent(&combined);
    let pass = constant <= threshold && growth <= GROWTH_LIMIT;
    Ok(RtReport { rows, constant, growth_exponent: growth, threshold, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::{Parity, PerturbationSpec};

    fn perturbed(parity: Parity, decay: f64) -> MetricModel {
        let modes = match parity {
            Parity::Even => vec![(2, 0, 0), (2, 1, 4)],
            Parity::Odd => vec![(1, 0, 0), (3, 1, 4)],
        };
        MetricModel::perturbed_schwarzschild(1.0, 0.5, PerturbationSpec { amplitude: 0.1, decay, modes, parity })
    }

    #[test]
    fn flux_integral_closed_form() {
        // Schwarzschild flux at radius R equals m φ(R)^5
        for m in [0.5, 1.0, 2.0] {
            let r: f64 = 50.0;
            let i = adm_flux_integral(&MetricModel::schwarzschild(m), r, 8);
            let phi = 1.0 + m / (2.0 * r);
            assert!((i - m * phi.powi(5)).abs() < 1e-12 * m);
        }
    }

    #[test]
    fn adm_flat_is_zero() {
        let e = adm_mass(&MetricModel::euclidean(), &[100.0, 200.0, 400.0]).unwrap();
        assert_eq!(e.value, 0.0);
    }

    #[test]
    fn adm_schwarzschild() {
        for m in [1.0, 2.0] {
            let e = adm_mass(&MetricModel::schwarzschild(m), &[100.0, 200.0, 400.0]).unwrap();
            assert!((e.value - m).abs() < 1e-3 * m, "{} vs {m}", e.value);
            assert!(e.residual >= 0.0);
            assert!(e.samples.windows(2).all(|w| w[0].0 < w[1].0));
        }
    }

    #[test]
    fn adm_additive() {
        let radii = [100.0, 200.0, 400.0];
        let m = |v: f64| adm_mass(&MetricModel::schwarzschild(v), &radii).unwrap().value;
        for (a, b) in [(0.5, 1.5), (1.0, 1.0), (2.0, 0.3)] {
            assert!((m(a) + m(b) - m(a + b)).abs() <= 1e-2 * (a + b));
        }
    }

    #[test]
    fn adm_input_validation() {
        let s = MetricModel::schwarzschild(1.0);
        assert!(adm_mass(&s, &[100.0, 200.0]).is_err());
        assert!(adm_mass(&s, &[1.5, 200.0, 400.0]).is_err());
    }

    #[test]
    fn decay_reports() {
        let flat = decay_check(&MetricModel::euclidean(), &[10.0, 100.0], 8, 1).unwrap();
        assert_eq!(flat.cbar, 0.0);
        assert!(!flat.violation);

        let s = decay_check(&MetricModel::schwarzschild(1.0), &[10.0, 100.0, 1000.0], 16, 7).unwrap();
        assert!(!s.violation);
        assert!(s.cbar.is_finite() && s.cbar < 50.0);
        assert!(s.rows.windows(2).all(|w| w[1].metric_ratio <= w[0].metric_ratio * (1.0 + 1e-9)));

        let slow = decay_check(&perturbed(Parity::Even, 0.6), &[10.0, 100.0, 1000.0], 16, 7).unwrap();
        assert!(slow.violation);
        assert!(slow.growth_exponent > 0.3);
    }

    #[test]
    fn regge_teitelboim_discrimination() {
        let radii = [10.0, 100.0, 1000.0];
        let s = regge_teitelboim_check(&MetricModel::schwarzschild(1.0), &radii, 16, 3, DEFAULT_RT_THRESHOLD).unwrap();
        assert!(s.pass);
        assert!(s.constant < 1e-10);
        let even = regge_teitelboim_check(&perturbed(Parity::Even, 1.0), &radii, 16, 3, DEFAULT_RT_THRESHOLD).unwrap();
        assert!(even.pass);
        let odd = regge_teitelboim_check(&perturbed(Parity::Odd, 1.0), &radii, 400, 3, DEFAULT_RT_THRESHOLD).unwrap();
        assert!(!odd.pass);
        assert!((odd.growth_exponent - 0.5).abs() < 0.15, "{}", odd.growth_exponent);
    }

    #[test]
    fn seeded_sampling_is_deterministic() {
        let m = perturbed(Parity::Odd, 1.0);
        let a = regge_teitelboim_check(&m, &[10.0, 20.0], 5, 11, 1.0).unwrap();
        let b = regge_teitelboim_check(&m, &[10.0, 20.0], 5, 11, 1.0).unwrap();
        assert_eq!(a.constant.to_bits(), b.constant.to_bits());
    }
}
