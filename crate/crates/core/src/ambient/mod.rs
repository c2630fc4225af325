//! Analytic asymptotically flat 3-metrics: pointwise jets, curvature, and
//! mass / decay / symmetry diagnostics.

mod checks;
pub mod solid;

use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use solid::{solid_harmonic, PolyJet};

pub use checks::{
    adm_flux_integral, adm_mass, decay_check, regge_teitelboim_check, DecayReport, DecayRow,
    MassEstimate, RtReport, RtRow, DEFAULT_RT_THRESHOLD,
};

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];
pub type Tensor3 = [[[f64; 3]; 3]; 3];
pub type Tensor4 = [[[[f64; 3]; 3]; 3]; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(alias = "euclidean")]
    Euclidean,
    #[serde(alias = "schwarzschild")]
    Schwarzschild,
    #[serde(alias = "perturbed_schwarzschild", alias = "perturbed")]
    PerturbedSchwarzschild,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

/// `p_αβ(x) = ε |x|^{-p} Σ Y_lm(x/|x|) E_comp` with `E_comp` the symmetric unit
/// tensor of component `comp ∈ {xx, xy, xz, yy, yz, zz}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub amplitude: f64,
    pub decay: f64,
    pub modes: Vec<(u32, i32, usize)>,
    pub parity: Parity,
}

/// Component index → tensor slot `(α, β)`, `α ≤ β`.
pub const COMPONENTS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

#[derive(Debug)]
struct CompiledMode {
    jet: PolyJet,
    slot: (usize, usize),
    power: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricModel {
    pub kind: ModelKind,
    #[serde(default)]
    pub m: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<PerturbationSpec>,
    /// Nominal decay constant; `None` leaves the decay check growth-based only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cbar: Option<f64>,
    #[serde(skip)]
    compiled: OnceLock<Arc<Vec<CompiledMode>>>,
}

fn default_delta() -> f64 {
    0.5
}

/// Metric and its first two partial derivatives at a point.
/// `dg[a][b][c] = ∂_c g_ab`, `ddg[a][b][c][d] = ∂_c ∂_d g_ab`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricJet {
    pub g: Mat3,
    pub dg: Tensor3,
    pub ddg: Tensor4,
}

/// `gamma[a][b][c] = Γ^a_bc`; `riemann[a][b][c][d] = R_abcd` (all lowered).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureData {
    pub gamma: Tensor3,
    pub riemann: Tensor4,
    pub ricci: Mat3,
    pub scalar: f64,
}

impl MetricModel {
    pub fn euclidean() -> Self {
        Self::build(ModelKind::Euclidean, 0.0, 0.5, None)
    }

    pub fn schwarzschild(m: f64) -> Self {
        Self::build(ModelKind::Schwarzschild, m, 0.5, None)
    }

    pub fn perturbed_schwarzschild(m: f64, delta: f64, perturbation: PerturbationSpec) -> Self {
        Self::build(ModelKind::PerturbedSchwarzschild, m, delta, Some(perturbation))
    }

    fn build(kind: ModelKind, m: f64, delta: f64, perturbation: Option<PerturbationSpec>) -> Self {
        Self { kind, m, delta, perturbation, cbar: None, compiled: OnceLock::new() }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_cbar(mut self, cbar: f64) -> Self {
        self.cbar = Some(cbar);
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(text)?;
        model.validate()?;
        Ok(model)
    }

    /// Mass parameter seen by the conformal factor (zero for the flat model).
    pub fn mass(&self) -> f64 {
        match self.kind {
            ModelKind::Euclidean => 0.0,
            _ => self.m,
        }
    }

    pub fn is_flat(&self) -> bool {
        self.kind == ModelKind::Euclidean
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |s: String| Err(Error::InvalidModel(s));
        if !(self.delta > 0.0 && self.delta <= 0.5) {
            return bad(format!("delta = {} must lie in (0, 1/2]", self.delta));
        }
        if !self.m.is_finite() {
            return bad("mass must be finite".into());
        }
        // φ = 1 + m/2|x| must stay positive on the chart |x| > 1
        if self.kind != ModelKind::Euclidean && self.m <= -2.0 {
            return bad(format!("m = {} makes the conformal factor vanish on the chart", self.m));
        }
        if let Some(c) = self.cbar {
            if !(c >= 0.0 && c.is_finite()) {
                return bad("cbar must be finite and non-negative".into());
            }
        }
        match (&self.kind, &self.perturbation) {
            (ModelKind::PerturbedSchwarzschild, None) => {
                bad("PerturbedSchwarzschild requires a perturbation".into())
            }
            (ModelKind::PerturbedSchwarzschild, Some(p)) => {
                if !(p.amplitude.is_finite() && p.amplitude >= 0.0) {
                    return bad("perturbation amplitude must be finite and non-negative".into());
                }
                if !(p.decay.is_finite() && p.decay > 0.0) {
                    return bad("perturbation decay must be positive".into());
                }
                for &(l, m, comp) in &p.modes {
                    if l > 4 || m.unsigned_abs() > l || comp >= 6 {
                        return bad(format!("invalid perturbation mode ({l}, {m}, {comp})"));
                    }
                    let even = l % 2 == 0;
                    if even != (p.parity == Parity::Even) {
                        return bad(format!("mode l = {l} contradicts declared parity {:?}", p.parity));
                    }
                }
                Ok(())
            }
            (_, Some(_)) => bad("perturbation only allowed for PerturbedSchwarzschild".into()),
            _ => Ok(()),
        }
    }

    fn compiled(&self) -> &[CompiledMode] {
        self.compiled.get_or_init(|| {
            let modes = match (&self.kind, &self.perturbation) {
                (ModelKind::PerturbedSchwarzschild, Some(p)) => p
                    .modes
                    .iter()
                    .map(|&(l, m, comp)| CompiledMode {
                        jet: PolyJet::new(solid_harmonic(l, m).scale(p.amplitude)),
                        slot: COMPONENTS[comp],
                        power: p.decay + l as f64,
                    })
                    .collect(),
                _ => Vec::new(),
            };
            Arc::new(modes)
        })
    }

    /// Exact analytic jet at `x`; `|x| > 1` required.
    pub fn metric_jet(&self, x: &Vec3) -> Result<MetricJet> {
        if norm(x) <= 1.0 {
            return Err(Error::ChartViolation(*x));
        }
        Ok(self.jet_unchecked(x))
    }

    /// Metric only, without derivatives; no chart check.
    pub fn metric_at(&self, x: &Vec3) -> Mat3 {
        if self.is_flat() {
            return IDENTITY;
        }
        let phi = 1.0 + 0.5 * self.m / norm(x);
        let g0 = phi.powi(4);
        let mut g = [[0.0; 3]; 3];
        for (a, row) in g.iter_mut().enumerate() {
            row[a] = g0;
        }
        for mode in self.compiled() {
            let k = mode.power;
            let f = mode.jet.p.eval(x) * norm(x).powf(-k);
            let (a, b) = mode.slot;
            g[a][b] += f;
            if a != b {
                g[b][a] += f;
            }
        }
        g
    }

    pub(crate) fn jet_unchecked(&self, x: &Vec3) -> MetricJet {
        let mut jet = MetricJet { g: IDENTITY, dg: [[[0.0; 3]; 3]; 3], ddg: [[[[0.0; 3]; 3]; 3]; 3] };
        if self.is_flat() {
            return jet;
        }
        let m = self.m;
        let r2 = dot(x, x);
        let r = r2.sqrt();
        let r3 = r2 * r;
        let r5 = r3 * r2;
        let phi = 1.0 + 0.5 * m / r;
        let dphi = x.map(|c| -0.5 * m * c / r3);
        let phi2 = phi * phi;
        let phi3 = phi2 * phi;
        let g0 = phi2 * phi2;
        for a in 0..3 {
            jet.g[a][a] = g0;
            for c in 0..3 {
                jet.dg[a][a][c] = 4.0 * phi3 * dphi[c];
                for d in 0..3 {
                    let delta = if c == d { 1.0 } else { 0.0 };
                    let ddphi = -0.5 * m * (delta / r3 - 3.0 * x[c] * x[d] / r5);
                    jet.ddg[a][a][c][d] = 12.0 * phi2 * dphi[c] * dphi[d] + 4.0 * phi3 * ddphi;
                }
            }
        }
        for mode in self.compiled() {
            let (f, df, ddf) = mode.jet.eval_scaled(x, mode.power);
            let (a, b) = mode.slot;
            let slots: &[(usize, usize)] = if a == b { &[(a, b)] } else { &[(a, b), (b, a)] };
            for &(p, q) in slots {
                jet.g[p][q] += f;
                for c in 0..3 {
                    jet.dg[p][q][c] += df[c];
                    for d in 0..3 {
                        jet.ddg[p][q][c][d] += ddf[c][d];
                    }
                }
            }
        }
        jet
    }

    pub fn curvature(&self, x: &Vec3) -> Result<CurvatureData> {
        Ok(curvature_from_jet(&self.metric_jet(x)?))
    }
}

pub const IDENTITY: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn det3(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

pub fn inv3(m: &Mat3) -> Mat3 {
    let d = det3(m);
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (i1, i2) = ((j + 1) % 3, (j + 2) % 3);
            let (j1, j2) = ((i + 1) % 3, (i + 2) % 3);
            out[i][j] = (m[i1][j1] * m[i2][j2] - m[i1][j2] * m[i2][j1]) / d;
        }
    }
    out
}

/// `g(a, b)` for vectors.
pub fn quad(g: &Mat3, a: &Vec3, b: &Vec3) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += g[i][j] * a[i] * b[j];
        }
    }
    s
}

pub fn mat_vec(m: &Mat3, v: &Vec3) -> Vec3 {
    [0, 1, 2].map(|i| dot(&m[i], v))
}

/// Christoffel symbols of the second kind, with the inverse metric.
pub fn christoffel(jet: &MetricJet) -> (Mat3, Tensor3) {
    let ginv = inv3(&jet.g);
    let mut lowered = [[[0.0; 3]; 3]; 3];
    for d in 0..3 {
        for b in 0..3 {
            for c in b..3 {
                let v = 0.5 * (jet.dg[d][c][b] + jet.dg[d][b][c] - jet.dg[b][c][d]);
                lowered[d][b][c] = v;
                lowered[d][c][b] = v;
            }
        }
    }
    let mut gamma = [[[0.0; 3]; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                gamma[a][b][c] = (0..3).map(|d| ginv[a][d] * lowered[d][b][c]).sum();
            }
        }
    }
    (ginv, gamma)
}

pub fn curvature_from_jet(jet: &MetricJet) -> CurvatureData {
    let (ginv, gamma) = christoffel(jet);
    // ∂_e Γ_dbc (first kind)
    let mut dlow = [[[[0.0; 3]; 3]; 3]; 3];
    for d in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                for e in 0..3 {
                    dlow[d][b][c][e] =
                        0.5 * (jet.ddg[d][c][b][e] + jet.ddg[d][b][c][e] - jet.ddg[b][c][d][e]);
                }
            }
        }
    }
    // ∂_e g^{ad} = -g^{ap} ∂_e g_pq g^{qd}
    let mut dginv = [[[0.0; 3]; 3]; 3];
    for a in 0..3 {
        for d in 0..3 {
            for e in 0..3 {
                let mut s = 0.0;
                for p in 0..3 {
                    for q in 0..3 {
                        s -= ginv[a][p] * jet.dg[p][q][e] * ginv[q][d];
                    }
                }
                dginv[a][d][e] = s;
            }
        }
    }
    let mut lowered = [[[0.0; 3]; 3]; 3];
    for d in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                lowered[d][b][c] = (0..3).map(|a| jet.g[d][a] * gamma[a][b][c]).sum();
            }
        }
    }
    // dgamma[a][b][c][e] = ∂_e Γ^a_bc
    let mut dgamma = [[[[0.0; 3]; 3]; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                for e in 0..3 {
                    dgamma[a][b][c][e] =
                        (0..3).map(|d| dginv[a][d][e] * lowered[d][b][c] + ginv[a][d] * dlow[d][b][c][e]).sum();
                }
            }
        }
    }
    // R^a_bcd = ∂_c Γ^a_bd − ∂_d Γ^a_bc + Γ^a_ce Γ^e_bd − Γ^a_de Γ^e_bc
    let mut up = [[[[0.0; 3]; 3]; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                for d in 0..3 {
                    let mut v = dgamma[a][b][d][c] - dgamma[a][b][c][d];
                    for e in 0..3 {
                        v += gamma[a][c][e] * gamma[e][b][d] - gamma[a][d][e] * gamma[e][b][c];
                    }
                    up[a][b][c][d] = v;
                }
            }
        }
    }
    let mut riemann = [[[[0.0; 3]; 3]; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                for d in 0..3 {
                    riemann[a][b][c][d] = (0..3).map(|e| jet.g[a][e] * up[e][b][c][d]).sum();
                }
            }
        }
    }
    let mut ricci = [[0.0; 3]; 3];
    for b in 0..3 {
        for d in 0..3 {
            ricci[b][d] = (0..3).map(|a| up[a][b][a][d]).sum();
        }
    }
    let mut scalar = 0.0;
    for b in 0..3 {
        for d in 0..3 {
            scalar += ginv[b][d] * ricci[b][d];
        }
    }
    CurvatureData { gamma, riemann, ricci, scalar }
}

impl CurvatureData {
    /// Euclidean Frobenius norm of the lowered Riemann tensor.
    pub fn riemann_norm(&self) -> f64 {
        let mut s = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    for d in 0..3 {
                        s += self.riemann[a][b][c][d].powi(2);
                    }
                }
            }
        }
        s.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn perturbed(parity: Parity) -> MetricModel {
        let modes = match parity {
            Parity::Even => vec![(2, 1, 0), (0, 0, 4), (4, -3, 1)],
            Parity::Odd => vec![(1, 0, 2), (3, 2, 5)],
        };
        MetricModel::perturbed_schwarzschild(
            1.0,
            0.5,
            PerturbationSpec { amplitude: 0.3, decay: 1.0, modes, parity },
        )
    }

    #[test]
    fn flat_jet_is_trivial() {
        let j = MetricModel::euclidean().metric_jet(&[3.0, -1.0, 2.0]).unwrap();
        assert_eq!(j.g, IDENTITY);
        assert!(j.dg.iter().flatten().flatten().all(|v| *v == 0.0));
        let c = curvature_from_jet(&j);
        assert_eq!(c.scalar, 0.0);
        assert_eq!(c.riemann_norm(), 0.0);
    }

    #[test]
    fn schwarzschild_conformal_factor() {
        let j = MetricModel::schwarzschild(1.0).metric_jet(&[10.0, 0.0, 0.0]).unwrap();
        assert!((j.g[0][0] - 1.21550625).abs() < 1e-14);
        assert_eq!(j.g[0][1], 0.0);
    }

    #[test]
    fn chart_violation() {
        let e = MetricModel::schwarzschild(1.0).metric_jet(&[0.5, 0.5, 0.5]);
        assert!(matches!(e, Err(Error::ChartViolation(_))));
    }

    #[test]
    fn far_field_decay() {
        let j = MetricModel::schwarzschild(1.0).metric_jet(&[1e6, 0.0, 0.0]).unwrap();
        assert!((j.g[0][0] - 1.0) * 1e6 <= 3.0);
    }

    #[test]
    fn schwarzschild_scalar_flat_and_cubic_falloff() {
        let model = MetricModel::schwarzschild(1.0);
        let c = model.curvature(&[10.0, 0.0, 0.0]).unwrap();
        assert!(c.scalar.abs() < 1e-10);
        assert!(c.scalar.abs() < 1e-10 * c.riemann_norm());
        let rm = |r: f64| model.curvature(&[r / 3f64.sqrt(); 3]).unwrap().riemann_norm();
        let ratios: Vec<f64> = [10.0, 20.0, 40.0].iter().map(|r| rm(2.0 * r) / rm(*r)).collect();
        assert!(ratios.iter().all(|q| (q - 0.125).abs() < 0.02));
        assert!((ratios[2] - 0.125).abs() < (ratios[0] - 0.125).abs());
    }

    /// Independent oracle: Ricci scalar of `φ⁴δ` from finite differences of the
    /// closed-form Christoffels.
    #[test]
    fn scalar_curvature_matches_finite_difference_oracle() {
        let m = 1.0;
        let gam = |x: &Vec3| {
            let (_, g) = christoffel(&MetricModel::schwarzschild(m).jet_unchecked(x));
            g
        };
        let x = [6.0, -3.0, 4.0];
        let h = 1e-4;
        let mut dgam = [[[[0.0; 3]; 3]; 3]; 3];
        for e in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[e] += h;
            xm[e] -= h;
            let (gp, gm) = (gam(&xp), gam(&xm));
            for a in 0..3 {
                for b in 0..3 {
                    for c in 0..3 {
                        dgam[a][b][c][e] = (gp[a][b][c] - gm[a][b][c]) / (2.0 * h);
                    }
                }
            }
        }
        let g0 = gam(&x);
        let jet = MetricModel::schwarzschild(m).jet_unchecked(&x);
        let ginv = inv3(&jet.g);
        let mut scalar = 0.0;
        let mut ric = [[0.0; 3]; 3];
        for b in 0..3 {
            for d in 0..3 {
                let mut v = 0.0;
                for a in 0..3 {
                    v += dgam[a][b][d][a] - dgam[a][b][a][d];
                    for e in 0..3 {
                        v += g0[a][a][e] * g0[e][b][d] - g0[a][d][e] * g0[e][b][a];
                    }
                }
                ric[b][d] = v;
                scalar += ginv[b][d] * v;
            }
        }
        let c = curvature_from_jet(&jet);
        assert!(scalar.abs() < 1e-8);
        for b in 0..3 {
            for d in 0..3 {
                assert!((ric[b][d] - c.ricci[b][d]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn model_json_roundtrip() {
        let text = r#"{"kind": "PerturbedSchwarzschild", "m": 1.0, "delta": 0.5,
            "perturbation": {"amplitude": 0.1, "decay": 1.0, "modes": [[2, 0, 0], [2, -1, 3]], "parity": "even"}}"#;
        let model = MetricModel::from_json(text).unwrap();
        assert_eq!(model.perturbation.as_ref().unwrap().modes[1], (2, -1, 3));
        let back = MetricModel::from_json(&serde_json::to_string(&model).unwrap()).unwrap();
        assert_eq!(back.perturbation, model.perturbation);
        assert!(MetricModel::from_json(r#"{"kind": "euclidean"}"#).is_ok());
        let wrong = r#"{"kind": "PerturbedSchwarzschild", "m": 1.0, "perturbation":
            {"amplitude": 0.1, "decay": 1.0, "modes": [[1, 0, 0]], "parity": "even"}}"#;
        assert!(matches!(MetricModel::from_json(wrong), Err(Error::InvalidModel(_))));
        assert!(MetricModel::from_json(r#"{"kind": "Schwarzschild", "m": 1, "delta": 0.7}"#).is_err());
    }

    fn point() -> impl Strategy<Value = Vec3> {
        (2.0f64..30.0, -1.0f64..1.0, 0.0f64..6.28).prop_map(|(r, z, p)| {
            let s = (1.0 - z * z).sqrt();
            [r * s * p.cos(), r * s * p.sin(), r * z]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn riemann_symmetries(x in point(), odd in any::<bool>()) {
            let model = perturbed(if odd { Parity::Odd } else { Parity::Even });
            let c = model.curvature(&x).unwrap();
            let scale = c.riemann_norm().max(1e-300);
            let r = &c.riemann;
            for a in 0..3 { for b in 0..3 { for p in 0..3 { for q in 0..3 {
                prop_assert!((r[a][b][p][q] + r[b][a][p][q]).abs() <= 1e-12 * scale);
                prop_assert!((r[a][b][p][q] + r[a][b][q][p]).abs() <= 1e-12 * scale);
                prop_assert!((r[a][b][p][q] - r[p][q][a][b]).abs() <= 1e-12 * scale);
            }}}}
            let trace: f64 = (0..3).flat_map(|i| (0..3).map(move |j| (i, j)))
                .map(|(i, j)| inv3(&model.metric_jet(&x).unwrap().g)[i][j] * c.ricci[i][j]).sum();
            prop_assert!((trace - c.scalar).abs() <= 1e-12 * scale.max(c.scalar.abs()));
        }

        #[test]
        fn jet_derivatives_consistent(x in point(), odd in any::<bool>()) {
            let model = perturbed(if odd { Parity::Odd } else { Parity::Even });
            let j = model.metric_jet(&x).unwrap();
            let h = 1e-4 * norm(&x);
            for e in 0..3 {
                let mut xp = x; let mut xm = x;
                xp[e] += h; xm[e] -= h;
                let (jp, jm) = (model.metric_jet(&xp).unwrap(), model.metric_jet(&xm).unwrap());
                for a in 0..3 { for b in 0..3 {
                    let fd = (jp.g[a][b] - jm.g[a][b]) / (2.0 * h);
                    prop_assert!((fd - j.dg[a][b][e]).abs() < 1e-6 * (1.0 + j.dg[a][b][e].abs()));
                    for c in 0..3 {
                        let fd2 = (jp.dg[a][b][c] - jm.dg[a][b][c]) / (2.0 * h);
                        prop_assert!((fd2 - j.ddg[a][b][c][e]).abs() < 1e-6 * (1.0 + j.ddg[a][b][c][e].abs()));
                        prop_assert!((j.ddg[a][b][c][e] - j.ddg[a][b][e][c]).abs() < 1e-15);
                        prop_assert!((j.ddg[a][b][c][e] - j.ddg[b][a][c][e]).abs() < 1e-15);
                    }
                }}
            }
        }
    }
}
