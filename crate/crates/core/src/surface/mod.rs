//! Closed surfaces written as radial graphs `X(u) = z₀ + r(u) u` over the unit
//! sphere, with `r` a truncated real spherical-harmonic series.

mod fields;
mod measures;

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::ambient::{norm, Vec3};
use crate::error::{Error, Result};
use crate::harmonics::{basis_size, sh_index, Deriv, PointBasis, QuadratureGrid};

pub use fields::{
    euclidean_comparison, fundamental_forms, gauss_equation_defect, ComparisonReport, EuclideanNode,
    FieldOptions, NodeFields, SurfaceFields,
};
pub use measures::{
    barycenter, enclosed_volume, hawking_mass, lp_norm, measures_and_radii, roundness_classify,
    sobolev_norm, GradientField, Radii, RoundnessMargins, RoundnessParams, RoundnessReport,
    DEFAULT_RADIAL_ORDER,
};
pub(crate) use measures::volume_and_rate;

/// Radial function and its angular derivatives at every grid node.
#[derive(Debug, Clone)]
pub struct NodeGeometry {
    pub r: Vec<f64>,
    pub r_t: Vec<f64>,
    pub r_p: Vec<f64>,
    pub r_tt: Vec<f64>,
    pub r_tp: Vec<f64>,
    pub r_pp: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct GraphSurface {
    pub center: Vec3,
    pub l_max: usize,
    pub coeffs: Vec<f64>,
    grid: Arc<QuadratureGrid>,
}

#[derive(Serialize, Deserialize)]
struct GraphSurfaceJson {
    center: Vec3,
    #[serde(rename = "L_max")]
    l_max: usize,
    coeffs: Vec<f64>,
}

impl Serialize for GraphSurface {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GraphSurfaceJson { center: self.center, l_max: self.l_max, coeffs: self.coeffs.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for GraphSurface {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = GraphSurfaceJson::deserialize(d)?;
        GraphSurface::new(raw.center, raw.l_max, raw.coeffs).map_err(serde::de::Error::custom)
    }
}

/// `∂θ^a ∂φ^b` of the unit direction `u(θ, φ)`.
pub fn direction_derivative(theta: f64, phi: f64, a: usize, b: usize) -> Vec3 {
    let ta = theta + 0.5 * PI * a as f64;
    let pb = phi + 0.5 * PI * b as f64;
    let (st, ct) = ta.sin_cos();
    let (sp, cp) = pb.sin_cos();
    [st * cp, st * sp, if b == 0 { ct } else { 0.0 }]
}

pub fn direction(theta: f64, phi: f64) -> Vec3 {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [st * cp, st * sp, ct]
}

/// Polar angles of a nonzero vector.
pub fn angles(v: &Vec3) -> (f64, f64) {
    let r = norm(v);
    let theta = (v[2] / r).clamp(-1.0, 1.0).acos();
    let phi = v[1].atan2(v[0]);
    (theta, if phi < 0.0 { phi + 2.0 * PI } else { phi })
}

impl GraphSurface {
    pub fn new(center: Vec3, l_max: usize, mut coeffs: Vec<f64>) -> Result<Self> {
        let nb = basis_size(l_max);
        if coeffs.len() > nb {
            return Err(Error::InvalidInput(format!(
                "{} coefficients exceed the {} allowed at L_max = {l_max}",
                coeffs.len(),
                nb
            )));
        }
        if coeffs.iter().chain(center.iter()).any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("non-finite surface data".into()));
        }
        coeffs.resize(nb, 0.0);
        Ok(Self { center, l_max, coeffs, grid: QuadratureGrid::default_for(l_max) })
    }

    /// Coordinate sphere `|x − center| = radius`.
    pub fn sphere(center: Vec3, radius: f64, l_max: usize) -> Self {
        let mut coeffs = vec![0.0; basis_size(l_max)];
        coeffs[0] = (4.0 * PI).sqrt() * radius;
        Self { center, l_max, coeffs, grid: QuadratureGrid::default_for(l_max) }
    }

    /// Adds `amplitude · Y_lm` to the radial function.
    pub fn with_mode(mut self, l: usize, m: i64, amplitude: f64) -> Self {
        assert!(l <= self.l_max, "mode degree exceeds L_max");
        self.coeffs[sh_index(l, m)] += amplitude;
        self
    }

    /// Same surface evaluated on a custom quadrature resolution.
    pub fn with_resolution(mut self, n_theta: usize, n_phi: usize) -> Self {
        self.grid = QuadratureGrid::shared(self.l_max, n_theta, n_phi);
        self
    }

    pub fn with_coeffs(&self, coeffs: Vec<f64>) -> Self {
        debug_assert_eq!(coeffs.len(), self.coeffs.len());
        Self { center: self.center, l_max: self.l_max, coeffs, grid: Arc::clone(&self.grid) }
    }

    pub fn grid(&self) -> &Arc<QuadratureGrid> {
        &self.grid
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("surface serializes")
    }

    /// Mean radius `a₀₀ / √(4π)`.
    pub fn mean_radius(&self) -> f64 {
        self.coeffs[0] / (4.0 * PI).sqrt()
    }

    pub fn synthesize(&self) -> Result<NodeGeometry> {
        let g = &self.grid;
        let geom = NodeGeometry {
            r: g.synthesize(&self.coeffs, Deriv::Val),
            r_t: g.synthesize(&self.coeffs, Deriv::T),
            r_p: g.synthesize(&self.coeffs, Deriv::P),
            r_tt: g.synthesize(&self.coeffs, Deriv::TT),
            r_tp: g.synthesize(&self.coeffs, Deriv::TP),
            r_pp: g.synthesize(&self.coeffs, Deriv::PP),
        };
        if let Some((node, r)) = geom.r.iter().enumerate().find(|(_, r)| !(**r > 0.0)) {
            return Err(Error::NonPositiveRadius { node, r: *r });
        }
        Ok(geom)
    }

    /// `r` at an arbitrary direction.
    pub fn radius_at(&self, theta: f64, phi: f64) -> f64 {
        PointBasis::new(theta, phi, self.l_max, 0).combine(&self.coeffs, 0, 0)
    }

    pub fn point_at(&self, theta: f64, phi: f64) -> Vec3 {
        let u = direction(theta, phi);
        let r = self.radius_at(theta, phi);
        [0, 1, 2].map(|i| self.center[i] + r * u[i])
    }

    /// Distance `s` with `origin + s·v` on the surface, for a unit vector `v`.
    /// Fails if the ray meets the surface more than once (not star-shaped
    /// about `origin`) or not at all.
    pub fn ray_intersection(&self, origin: &Vec3, v: &Vec3) -> Result<f64> {
        let f = |s: f64| {
            let p = [0, 1, 2].map(|i| origin[i] + s * v[i] - self.center[i]);
            let d = norm(&p);
            if d == 0.0 {
                return -self.mean_radius().abs();
            }
            let (t, ph) = angles(&p);
            d - self.radius_at(t, ph)
        };
        let offset = norm(&[0, 1, 2].map(|i| origin[i] - self.center[i]));
        let s_max = 4.0 * self.mean_radius().abs() + 2.0 * offset + 1.0;
        let samples = 64;
        let mut crossing = None;
        let mut prev = f(0.0);
        if prev >= 0.0 {
            return Err(Error::CommonGraphFailure("origin is not enclosed by the surface".into()));
        }
        for k in 1..=samples {
            let s = s_max * k as f64 / samples as f64;
            let val = f(s);
            if (val >= 0.0) != (prev >= 0.0) {
                if crossing.is_some() {
                    return Err(Error::CommonGraphFailure("ray meets the surface more than once".into()));
                }
                crossing = Some((s_max * (k - 1) as f64 / samples as f64, s));
            }
            prev = val;
        }
        let (mut lo, mut hi) = crossing.ok_or_else(|| Error::CommonGraphFailure("ray misses the surface".into()))?;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 * hi {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Re-expands the same geometric surface as a graph about `new_center`.
    pub fn recenter(&self, new_center: Vec3) -> Result<Self> {
        let values = self
            .grid
            .nodes()
            .iter()
            .map(|n| self.ray_intersection(&new_center, &n.direction()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            center: new_center,
            l_max: self.l_max,
            coeffs: self.grid.analyze(&values),
            grid: Arc::clone(&self.grid),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::QuadratureGrid;

    #[test]
    fn constant_sphere_synthesis() {
        let s = GraphSurface::sphere([0.0; 3], 2.5, 6);
        let g = s.synthesize().unwrap();
        assert!(g.r.iter().all(|r| (r - 2.5).abs() < 1e-14));
        assert!(g.r_t.iter().chain(&g.r_p).all(|d| d.abs() < 1e-14));
    }

    #[test]
    fn dipole_synthesis() {
        let eps = 0.3;
        let s = GraphSurface::new([0.0; 3], 4, vec![0.0, 0.0, eps]).unwrap();
        let g = s.synthesize();
        assert!(matches!(g, Err(Error::NonPositiveRadius { .. })));
        let s = GraphSurface::sphere([0.0; 3], 1.0, 4).with_mode(1, 0, eps);
        let geo = s.synthesize().unwrap();
        let c = (3.0 / (4.0 * PI)).sqrt();
        for (n, node) in s.grid().nodes().iter().enumerate() {
            assert!((geo.r[n] - 1.0 - c * eps * node.cos_theta).abs() < 1e-14);
            let lap = geo.r_tt[n] + node.cos_theta / node.sin_theta * geo.r_t[n]
                + geo.r_pp[n] / node.sin_theta.powi(2);
            assert!((lap + 2.0 * (geo.r[n] - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn spectral_derivatives_match_finite_differences() {
        let coeffs: Vec<f64> = (0..81).map(|i| if i == 0 { 10.0 } else { ((i * 37 % 17) as f64 - 8.0) * 0.01 }).collect();
        let s = GraphSurface::new([0.0; 3], 8, coeffs).unwrap();
        let geo = s.synthesize().unwrap();
        let h = 1e-4;
        for (n, node) in s.grid().nodes().iter().enumerate().step_by(7) {
            let f = |t: f64, p: f64| s.radius_at(t, p);
            let (t, p) = (node.theta, node.phi);
            let rt = (f(t + h, p) - f(t - h, p)) / (2.0 * h);
            let rp = (f(t, p + h) - f(t, p - h)) / (2.0 * h);
            let rtt = (f(t + h, p) - 2.0 * f(t, p) + f(t - h, p)) / (h * h);
            let rtp = (f(t + h, p + h) - f(t + h, p - h) - f(t - h, p + h) + f(t - h, p - h)) / (4.0 * h * h);
            assert!((rt - geo.r_t[n]).abs() < 1e-7);
            assert!((rp - geo.r_p[n]).abs() < 1e-7);
            assert!((rtt - geo.r_tt[n]).abs() < 1e-5);
            assert!((rtp - geo.r_tp[n]).abs() < 1e-5);
        }
    }

    #[test]
    fn direction_derivatives() {
        let (t, p) = (0.9, 2.3);
        let h = 1e-5;
        for (a, b) in [(0, 0), (1, 0), (0, 1), (1, 1), (2, 0), (0, 2)] {
            let d = direction_derivative(t, p, a + 1, b);
            let fd = [0, 1, 2].map(|i| {
                (direction_derivative(t + h, p, a, b)[i] - direction_derivative(t - h, p, a, b)[i]) / (2.0 * h)
            });
            assert!((0..3).all(|i| (d[i] - fd[i]).abs() < 1e-8));
        }
        assert_eq!(direction_derivative(t, p, 0, 0), direction(t, p).map(|c| c + 0.0));
    }

    #[test]
    fn json_roundtrip() {
        let s = GraphSurface::sphere([1.0, 2.0, 3.0], 5.0, 3).with_mode(2, -1, 0.25);
        let text = s.to_json();
        assert!(text.contains("\"L_max\""));
        let back = GraphSurface::from_json(&text).unwrap();
        assert_eq!(back.coeffs, s.coeffs);
        assert_eq!(back.center, s.center);
        let short = GraphSurface::from_json(r#"{"center": [0,0,0], "L_max": 2, "coeffs": [3.0]}"#).unwrap();
        assert_eq!(short.coeffs.len(), 9);
        assert!(GraphSurface::from_json(r#"{"center": [0,0,0], "L_max": 0, "coeffs": [3.0, 1.0]}"#).is_err());
    }

    #[test]
    fn recentering_preserves_geometry() {
        let s = GraphSurface::sphere([0.0; 3], 10.0, 12);
        let moved = s.recenter([0.5, -0.25, 0.1]).unwrap();
        let p = moved.point_at(0.7, 1.9);
        assert!((norm(&p) - 10.0).abs() < 1e-8);
        let grid = QuadratureGrid::default_for(12);
        assert_eq!(moved.grid().len(), grid.len());
    }

    #[test]
    fn ray_intersection_rejects_outside_origin() {
        let s = GraphSurface::sphere([0.0; 3], 2.0, 2);
        assert!(s.ray_intersection(&[5.0, 0.0, 0.0], &[1.0, 0.0, 0.0]).is_err());
        let d = s.ray_intersection(&[1.0, 0.0, 0.0], &[1.0, 0.0, 0.0]).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
    }
}
