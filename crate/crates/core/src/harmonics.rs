//! Real spherical harmonics, their angular derivatives, and the
//! Gauss–Legendre × uniform quadrature grid used for every surface integral.
//!
//! Coefficient vectors are stored row-major in `(l, m)`: the harmonic of
//! degree `l` and order `m ∈ [-l, l]` lives at index `l² + l + m`. Orders
//! `m > 0` carry `cos(mφ)`, orders `m < 0` carry `sin(|m|φ)`, and the basis is
//! orthonormal on the unit sphere.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

/// Number of real harmonics of degree at most `lmax`.
pub fn basis_size(lmax: usize) -> usize {
    (lmax + 1) * (lmax + 1)
}

/// Row-major index of the harmonic `(l, m)`.
pub fn sh_index(l: usize, m: i64) -> usize {
    debug_assert!(m.unsigned_abs() as usize <= l);
    (l * l) as i64 as usize + (l as i64 + m) as usize
}

/// Inverse of [`sh_index`].
pub fn sh_degree_order(index: usize) -> (usize, i64) {
    let l = (index as f64).sqrt().floor() as usize;
    // guard against rounding of the square root
    let l = if (l + 1) * (l + 1) <= index { l + 1 } else { l };
    (l, index as i64 - (l * l) as i64 - l as i64)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes in decreasing order.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss-Legendre order must be positive");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d.is_finite() {
            dp = d;
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Normalized associated Legendre functions `p̄_lm(θ)` and their first three
/// θ-derivatives, without the `√2` factor of the real harmonics.
///
/// `p̄_lm(θ) = √((2l+1)/(4π) (l−m)!/(l+m)!) P_l^m(cos θ)` with no
/// Condon–Shortley phase.
#[derive(Debug, Clone)]
pub struct LegendreTable {
    lmax: usize,
    /// `values[d][tri(l, m)]` holds the `d`-th θ-derivative.
    values: [Vec<f64>; 4],
}

fn tri(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

impl LegendreTable {
    pub fn new(theta: f64, lmax: usize, order: usize) -> Self {
        let n = tri(lmax, lmax) + 1;
        let (s, c) = theta.sin_cos();
        let mut p = vec![0.0; n];
        p[0] = 0.5 / PI.sqrt();
        for m in 1..=lmax {
            let mf = m as f64;
            p[tri(m, m)] = ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s * p[tri(m - 1, m - 1)];
        }
        for m in 0..lmax {
            p[tri(m + 1, m)] = (2.0 * m as f64 + 3.0).sqrt() * c * p[tri(m, m)];
        }
        for m in 0..=lmax {
            for l in (m + 2)..=lmax {
                let (lf, mf) = (l as f64, m as f64);
                let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0))
                    .sqrt();
                p[tri(l, m)] = a * (c * p[tri(l - 1, m)] - b * p[tri(l - 2, m)]);
            }
        }
        let mut d1 = vec![0.0; if order >= 1 { n } else { 0 }];
        let mut d2 = vec![0.0; if order >= 2 { n } else { 0 }];
        let mut d3 = vec![0.0; if order >= 3 { n } else { 0 }];
        if order >= 1 {
            let cot = c / s;
            let csc2 = 1.0 / (s * s);
            for l in 0..=lmax {
                let lf = l as f64;
                let lam = lf * (lf + 1.0);
                for m in 0..=l {
                    let mf = m as f64;
                    let k = tri(l, m);
                    let prev = if l > m { p[tri(l - 1, m)] } else { 0.0 };
                    let clm = ((2.0 * lf + 1.0) * (lf * lf - mf * mf) / (2.0 * lf - 1.0)).sqrt();
                    let first = if l == 0 { 0.0 } else { (lf * c * p[k] - clm * prev) / s };
                    d1[k] = first;
                    if order >= 2 {
                        let q = lam - mf * mf * csc2;
                        d2[k] = -cot * first - q * p[k];
                        if order >= 3 {
                            d3[k] = csc2 * first - cot * d2[k] - q * first
                                - 2.0 * mf * mf * csc2 * cot * p[k];
                        }
                    }
                }
            }
        }
        Self { lmax, values: [p, d1, d2, d3] }
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    /// `d`-th θ-derivative of `p̄_lm`.
    pub fn get(&self, d: usize, l: usize, m: usize) -> f64 {
        self.values[d][tri(l, m)]
    }
}

/// Angular derivative selector `(∂θ)^a (∂φ)^b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Deriv {
    Val,
    T,
    P,
    TT,
    TP,
    PP,
}

impl Deriv {
    pub const ALL: [Deriv; 6] = [Deriv::Val, Deriv::T, Deriv::P, Deriv::TT, Deriv::TP, Deriv::PP];

    fn orders(self) -> (usize, usize) {
        match self {
            Deriv::Val => (0, 0),
            Deriv::T => (1, 0),
            Deriv::P => (0, 1),
            Deriv::TT => (2, 0),
            Deriv::TP => (1, 1),
            Deriv::PP => (0, 2),
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

/// `b`-th derivative of `cos(kφ)` (`sine = false`) or `sin(kφ)`.
fn trig_derivative(k: f64, phi: f64, b: usize, sine: bool) -> f64 {
    let shift = if sine { -0.5 * PI } else { 0.0 };
    k.powi(b as i32) * (k * phi + shift + 0.5 * PI * b as f64).cos()
}

/// All real harmonics of degree ≤ `lmax` at one direction, with angular
/// derivatives `(∂θ)^a (∂φ)^b`, `a + b ≤ order` (order at most 3).
#[derive(Debug, Clone)]
pub struct PointBasis {
    legendre: LegendreTable,
    phi: f64,
}

impl PointBasis {
    pub fn new(theta: f64, phi: f64, lmax: usize, order: usize) -> Self {
        assert!(order <= 3);
        Self { legendre: LegendreTable::new(theta, lmax, order), phi }
    }

    pub fn lmax(&self) -> usize {
        self.legendre.lmax()
    }

    /// `(∂θ)^a (∂φ)^b Y_index`.
    pub fn eval(&self, index: usize, a: usize, b: usize) -> f64 {
        let (l, m) = sh_degree_order(index);
        let k = m.unsigned_abs() as usize;
        let p = self.legendre.get(a, l, k);
        if m == 0 {
            if b == 0 {
                p
            } else {
                0.0
            }
        } else {
            std::f64::consts::SQRT_2 * p * trig_derivative(k as f64, self.phi, b, m < 0)
        }
    }

    /// `Σ_p coeffs[p] (∂θ)^a (∂φ)^b Y_p`.
    pub fn combine(&self, coeffs: &[f64], a: usize, b: usize) -> f64 {
        coeffs.iter().enumerate().map(|(i, c)| c * self.eval(i, a, b)).sum()
    }
}

/// One node of a [`QuadratureGrid`].
#[derive(Debug, Clone, Copy)]
pub struct GridNode {
    pub theta: f64,
    pub phi: f64,
    /// Round-sphere quadrature weight (includes the `sin θ` Jacobian).
    pub weight: f64,
    pub sin_theta: f64,
    pub cos_theta: f64,
}

impl GridNode {
    pub fn direction(&self) -> [f64; 3] {
        let (sp, cp) = self.phi.sin_cos();
        [self.sin_theta * cp, self.sin_theta * sp, self.cos_theta]
    }
}

/// Gauss–Legendre in `cos θ` × uniform in `φ`, with every basis function of
/// degree ≤ `lmax` and its first and second angular derivatives tabulated.
#[derive(Debug)]
pub struct QuadratureGrid {
    lmax: usize,
    n_theta: usize,
    n_phi: usize,
    nodes: Vec<GridNode>,
    /// Node-major tables `tables[d][n * nb + p]`.
    tables: [Vec<f64>; 6],
}

type GridKey = (usize, usize, usize);

fn grid_cache() -> &'static Mutex<HashMap<GridKey, Arc<QuadratureGrid>>> {
    static CACHE: OnceLock<Mutex<HashMap<GridKey, Arc<QuadratureGrid>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl QuadratureGrid {
    /// Default resolution: `n_theta = lmax + 2`, `n_phi = 2 lmax + 2`.
    pub fn default_resolution(lmax: usize) -> (usize, usize) {
        (lmax + 2, 2 * lmax + 2)
    }

    pub fn new(lmax: usize, n_theta: usize, n_phi: usize) -> Self {
        let (x, w) = gauss_legendre(n_theta);
        let dphi = 2.0 * PI / n_phi as f64;
        let nb = basis_size(lmax);
        let mut nodes = Vec::with_capacity(n_theta * n_phi);
        let mut tables: [Vec<f64>; 6] = Default::default();
        for t in tables.iter_mut() {
            t.reserve(n_theta * n_phi * nb);
        }
        for (xi, wi) in x.iter().zip(&w) {
            let theta = xi.acos();
            for j in 0..n_phi {
                let phi = j as f64 * dphi;
                nodes.push(GridNode {
                    theta,
                    phi,
                    weight: wi * dphi,
                    sin_theta: (1.0 - xi * xi).sqrt(),
                    cos_theta: *xi,
                });
                let basis = PointBasis::new(theta, phi, lmax, 2);
                for d in Deriv::ALL {
                    let (a, b) = d.orders();
                    let table = &mut tables[d.slot()];
                    for p in 0..nb {
                        table.push(basis.eval(p, a, b));
                    }
                }
            }
        }
        Self { lmax, n_theta, n_phi, nodes, tables }
    }

    /// Shared grid for the given resolution; tables are built once per process.
    pub fn shared(lmax: usize, n_theta: usize, n_phi: usize) -> Arc<Self> {
        let key = (lmax, n_theta, n_phi);
        if let Some(g) = grid_cache().lock().expect("grid cache poisoned").get(&key) {
            return Arc::clone(g);
        }
        let grid = Arc::new(Self::new(lmax, n_theta, n_phi));
        grid_cache()
            .lock()
            .expect("grid cache poisoned")
            .entry(key)
            .or_insert(grid)
            .clone()
    }

    pub fn default_for(lmax: usize) -> Arc<Self> {
        let (nt, np) = Self::default_resolution(lmax);
        Self::shared(lmax, nt, np)
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn nodes(&self) -> &[GridNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn basis_len(&self) -> usize {
        basis_size(self.lmax)
    }

    /// Tabulated `Y_p` derivative at node `n`.
    #[inline]
    pub fn basis(&self, d: Deriv, n: usize, p: usize) -> f64 {
        self.tables[d.slot()][n * self.basis_len() + p]
    }

    /// Row of tabulated basis values at node `n`.
    #[inline]
    pub fn basis_row(&self, d: Deriv, n: usize) -> &[f64] {
        let nb = self.basis_len();
        &self.tables[d.slot()][n * nb..(n + 1) * nb]
    }

    /// Round-sphere integral `∮ f dΩ`.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().zip(&self.nodes).map(|(v, n)| v * n.weight).sum()
    }

    /// L²(S²) projection onto harmonics of degree ≤ `lmax` (exact for
    /// band-limited input).
    pub fn analyze(&self, values: &[f64]) -> Vec<f64> {
        self.analyze_to(values, self.lmax)
    }

    pub fn analyze_to(&self, values: &[f64], lmax: usize) -> Vec<f64> {
        assert!(lmax <= self.lmax);
        assert_eq!(values.len(), self.nodes.len());
        let nb = basis_size(lmax);
        let mut out = vec![0.0; nb];
        for (n, (v, node)) in values.iter().zip(&self.nodes).enumerate() {
            let wv = v * node.weight;
            let row = &self.basis_row(Deriv::Val, n)[..nb];
            for (o, y) in out.iter_mut().zip(row) {
                *o += wv * y;
            }
        }
        out
    }

    /// Evaluate `Σ_p coeffs[p] D Y_p` at every node.
    pub fn synthesize(&self, coeffs: &[f64], d: Deriv) -> Vec<f64> {
        assert!(coeffs.len() <= self.basis_len());
        (0..self.nodes.len())
            .map(|n| {
                let row = self.basis_row(d, n);
                coeffs.iter().zip(row).map(|(c, y)| c * y).sum()
            })
            .collect()
    }
}
