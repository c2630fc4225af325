//! Laplace–Beltrami and stability-operator analysis on graph surfaces.
//!
//! Operators are assembled in weak form over real spherical harmonics pulled
//! back through the graph parametrization. The translational part of a
//! function is its projection onto the eigenspace of eigenpairs 1..3.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DMatrix, DVector, Matrix3, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harmonics::{basis_size, Deriv};
use crate::surface::SurfaceFields;

/// Galerkin matrices over `{Y_p : deg ≤ l_basis}`.
#[derive(Debug, Clone)]
pub struct OperatorMatrices {
    pub l_basis: usize,
    /// `∮ ⟨∇b_p, ∇b_q⟩ dμ`
    pub stiffness: DMatrix<f64>,
    /// `∮ b_p b_q dμ`
    pub mass: DMatrix<f64>,
    /// `∮ (|A|² + R̄ic(ν,ν)) b_p b_q dμ`
    pub potential: DMatrix<f64>,
    /// Node samples of the basis, `nodes × basis`.
    pub basis_values: DMatrix<f64>,
    /// Node measure `dμ` matching `basis_values` rows.
    pub measure: Vec<f64>,
}

impl OperatorMatrices {
    pub fn basis_len(&self) -> usize {
        self.mass.nrows()
    }

    /// Coefficient vector of the constant function 1.
    fn constant_coeffs(&self) -> DVector<f64> {
        let mut c = DVector::zeros(self.basis_len());
        c[0] = (4.0 * PI).sqrt();
        c
    }

    /// Node samples of `Σ_p v_p b_p`.
    pub fn samples(&self, coeffs: &DVector<f64>) -> Vec<f64> {
        (&self.basis_values * coeffs).iter().copied().collect()
    }

    /// Reorder the basis; used to test invariance of spectral subspaces.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let nb = self.basis_len();
        assert_eq!(perm.len(), nb);
        let sym = |a: &DMatrix<f64>| DMatrix::from_fn(nb, nb, |i, j| a[(perm[i], perm[j])]);
        let nodes = self.basis_values.nrows();
        Self {
            l_basis: self.l_basis,
            stiffness: sym(&self.stiffness),
            mass: sym(&self.mass),
            potential: sym(&self.potential),
            basis_values: DMatrix::from_fn(nodes, nb, |n, j| self.basis_values[(n, perm[j])]),
            measure: self.measure.clone(),
        }
    }
}

fn symmetrize(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
}

pub fn assemble_operators(fields: &SurfaceFields, l_basis: usize) -> Result<OperatorMatrices> {
    if l_basis > fields.l_max {
        return Err(Error::BasisTooLarge { requested: l_basis, available: fields.l_max });
    }
    let grid = &fields.grid;
    let nb = basis_size(l_basis);
    let nn = fields.len();
    // rows: √dμ b, √dμ L₀, √dμ L₁, dμ V b  where g⁻¹ = LLᵀ
    let rows: Vec<[Vec<f64>; 4]> = (0..nn)
        .into_par_iter()
        .map(|n| {
            let node = &fields.nodes[n];
            let w = node.measure;
            let sw = w.sqrt();
            let gi = &node.metric_inv;
            let l00 = gi[0][0].sqrt();
            let l10 = gi[0][1] / l00;
            let l11 = (gi[1][1] - l10 * l10).max(0.0).sqrt();
            let val = &grid.basis_row(Deriv::Val, n)[..nb];
            let bt = &grid.basis_row(Deriv::T, n)[..nb];
            let bp = &grid.basis_row(Deriv::P, n)[..nb];
            let pot = if fields.has_curvature { node.a_sq + node.ricci_nn } else { node.a_sq };
            let b: Vec<f64> = val.iter().map(|y| sw * y).collect();
            let d0: Vec<f64> = bt.iter().zip(bp).map(|(t, p)| sw * (l00 * t + l10 * p)).collect();
            let d1: Vec<f64> = bp.iter().map(|p| sw * l11 * p).collect();
            let v: Vec<f64> = val.iter().map(|y| w * pot * y).collect();
            [b, d0, d1, v]
        })
        .collect();
    let table = |k: usize| DMatrix::from_fn(nn, nb, |n, p| rows[n][k][p]);
    let b = table(0);
    let d0 = table(1);
    let d1 = table(2);
    let vb = table(3);
    let basis_values = DMatrix::from_fn(nn, nb, |n, p| grid.basis(Deriv::Val, n, p));
    let mut mass = b.tr_mul(&b);
    let mut stiffness = d0.tr_mul(&d0) + d1.tr_mul(&d1);
    let mut potential = basis_values.tr_mul(&vb);
    symmetrize(&mut mass);
    symmetrize(&mut stiffness);
    symmetrize(&mut potential);
    Ok(OperatorMatrices {
        l_basis,
        stiffness,
        mass,
        potential,
        basis_values,
        measure: fields.nodes.iter().map(|n| n.measure).collect(),
    })
}

/// Lowest eigenpairs of `stiffness v = λ mass v`.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    /// Mass-orthonormal coefficient vectors, one per column.
    pub vectors: DMatrix<f64>,
    /// Node samples `f_α`, L²(dμ)-orthonormal.
    pub eigenfunctions: Vec<Vec<f64>>,
    pub measure: Vec<f64>,
}

/// Translational eigenpair indices.
pub const TRANSLATIONAL: [usize; 3] = [1, 2, 3];

impl EigenSystem {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        u.iter().zip(v).zip(&self.measure).map(|((a, b), w)| a * b * w).sum()
    }

    pub fn norm(&self, u: &[f64]) -> f64 {
        self.inner(u, u).sqrt()
    }

    /// Node-space projector onto span{f₁, f₂, f₃}: `P[n][n'] = Σ_α f_α(n) f_α(n')`.
    pub fn translational_projector(&self) -> DMatrix<f64> {
        let nn = self.measure.len();
        DMatrix::from_fn(nn, nn, |i, j| TRANSLATIONAL.iter().map(|&a| self.eigenfunctions[a][i] * self.eigenfunctions[a][j]).sum())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let header: Vec<String> = (0..self.len()).map(|k| format!("f{k}")).collect();
        writeln!(w, "{}", header.join(","))?;
        for n in 0..self.measure.len() {
            let row: Vec<String> = self.eigenfunctions.iter().map(|f| format!("{:.16e}", f[n])).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Solve `a v = λ m v` for symmetric `a` and positive definite `m`, ascending.
fn generalized_eigen(a: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let chol = m
        .clone()
        .cholesky()
        .ok_or_else(|| Error::EigensolverFailure("mass matrix is not positive definite".into()))?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::EigensolverFailure("singular Cholesky factor".into()))?;
    let mut c = &linv * a * linv.transpose();
    symmetrize(&mut c);
    reduced_eigen(&c, &linv)
}

fn reduced_eigen(c: &DMatrix<f64>, linv: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    if c.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigensolverFailure("non-finite operator entries".into()));
    }
    let eig = SymmetricEigen::new(c.clone());
    let n = c.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        let mut v = linv.tr_mul(&eig.eigenvectors.column(i).into_owned());
        let pivot = v.iter().copied().fold(0.0f64, |p, x| if x.abs() > p.abs() + 1e-12 { x } else { p });
        if pivot < 0.0 {
            v = -v;
        }
        vectors.set_column(k, &v);
    }
    Ok((values, vectors))
}

pub fn laplace_eigensystem(matrices: &OperatorMatrices, k: usize) -> Result<EigenSystem> {
    let nb = matrices.basis_len();
    if k > nb {
        return Err(Error::BasisTooLarge { requested: k, available: nb });
    }
    let (values, vectors) = generalized_eigen(&matrices.stiffness, &matrices.mass)?;
    let vectors = vectors.columns(0, k).into_owned();
    let eigenfunctions = (0..k).map(|c| matrices.samples(&vectors.column(c).into_owned())).collect();
    Ok(EigenSystem {
        eigenvalues: values[..k].to_vec(),
        vectors,
        eigenfunctions,
        measure: matrices.measure.clone(),
    })
}

/// Decomposition `w = w_t + w_d`.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralSplit {
    pub w_t: Vec<f64>,
    pub w_d: Vec<f64>,
    /// `⟨w, f_α⟩₂`, α = 1..3
    pub coefficients: [f64; 3],
}

impl SpectralSplit {
    pub fn translational_norm(&self) -> f64 {
        self.coefficients.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

pub fn translational_split(w: &[f64], eig: &EigenSystem) -> SpectralSplit {
    assert!(eig.len() >= 4, "translational split needs eigenpairs 0..3");
    assert_eq!(w.len(), eig.measure.len());
    let coefficients = TRANSLATIONAL.map(|a| eig.inner(w, &eig.eigenfunctions[a]));
    let mut w_t = vec![0.0; w.len()];
    for (c, &a) in coefficients.iter().zip(&TRANSLATIONAL) {
        for (t, f) in w_t.iter_mut().zip(&eig.eigenfunctions[a]) {
            *t += c * f;
        }
    }
    let w_d = w.iter().zip(&w_t).map(|(a, b)| a - b).collect();
    SpectralSplit { w_t, w_d, coefficients }
}

/// Spectral `(∂_θ f, ∂_φ f)` at every node.
fn angular_gradient(fields: &SurfaceFields, u: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let c = fields.grid.analyze(u);
    (fields.grid.synthesize(&c, Deriv::T), fields.grid.synthesize(&c, Deriv::P))
}

/// Weak form `⟨Lu, v⟩₂ = ∮ (⟨∇u,∇v⟩ − (|A|² + R̄ic(ν,ν)) u v) dμ`.
pub fn stability_bilinear(u: &[f64], v: &[f64], fields: &SurfaceFields) -> f64 {
    let (ut, up) = angular_gradient(fields, u);
    let (vt, vp) = angular_gradient(fields, v);
    fields
        .nodes
        .iter()
        .enumerate()
        .map(|(k, n)| {
            let gi = &n.metric_inv;
            let grad = gi[0][0] * ut[k] * vt[k] + gi[0][1] * (ut[k] * vp[k] + up[k] * vt[k]) + gi[1][1] * up[k] * vp[k];
            let pot = if fields.has_curvature { n.a_sq + n.ricci_nn } else { n.a_sq };
            (grad - pot * u[k] * v[k]) * n.measure
        })
        .sum()
}

pub fn stability_form(u: &[f64], fields: &SurfaceFields) -> f64 {
    stability_bilinear(u, u, fields)
}

/// Smallest eigenvalue of `stiffness − potential` on the mass-orthogonal
/// complement of constants.
pub fn stability_spectrum_zero_mean(matrices: &OperatorMatrices) -> Result<f64> {
    let chol = matrices
        .mass
        .clone()
        .cholesky()
        .ok_or_else(|| Error::EigensolverFailure("mass matrix is not positive definite".into()))?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::EigensolverFailure("singular Cholesky factor".into()))?;
    let op = &matrices.stiffness - &matrices.potential;
    let mut c = &linv * op * linv.transpose();
    symmetrize(&mut c);
    let mut y = l.tr_mul(&matrices.constant_coeffs());
    y /= y.norm();
    let n = c.nrows();
    let proj = DMatrix::identity(n, n) - &y * y.transpose();
    let shift = 10.0 * c.norm().max(1.0);
    let mut deflated = &proj * c * &proj + shift * &y * y.transpose();
    symmetrize(&mut deflated);
    let (values, _) = reduced_eigen(&deflated, &linv)?;
    Ok(values[0])
}

/// `Π = √(Σ_α (∮ (H−h) ν_α/σ dμ)²)` with `ν_α = ḡ(ν, ē_α)`.
pub fn pi_functional(fields: &SurfaceFields, sigma: f64) -> f64 {
    let dev = fields.mean_curvature_deviation();
    let mut acc = [0.0; 3];
    for (d, n) in dev.iter().zip(&fields.nodes) {
        let nu_flat = crate::ambient::mat_vec(&n.ambient_metric, &n.normal);
        for a in 0..3 {
            acc[a] += d * nu_flat[a] / sigma * n.measure;
        }
    }
    acc.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Both sides of the Π approximation at `ε = 1`:
/// `|(4π/3)‖w_t‖² − (σ/σ_Σ)²Π²| ≤ 2cσ^{−1−2δ}‖w‖² + ‖w_t‖²` for `w = H − h`.
#[derive(Debug, Clone, Serialize)]
pub struct PiBridge {
    pub translational: f64,
    pub pi_scaled: f64,
    pub gap: f64,
    pub bound: f64,
    pub holds: bool,
}

pub fn pi_bridge(fields: &SurfaceFields, eig: &EigenSystem, sigma: f64, c: f64) -> PiBridge {
    let sigma_area = (fields.area() / (4.0 * PI)).sqrt();
    let dev = fields.mean_curvature_deviation();
    let split = translational_split(&dev, eig);
    let wt2 = split.translational_norm().powi(2);
    let translational = 4.0 * PI / 3.0 * wt2;
    let pi = pi_functional(fields, sigma);
    let pi_scaled = (sigma / sigma_area).powi(2) * pi * pi;
    let w2 = eig.inner(&dev, &dev);
    let gap = (translational - pi_scaled).abs();
    let bound = 2.0 * c * sigma.powf(-1.0 - 2.0 * fields.delta) * w2 + wt2;
    PiBridge { translational, pi_scaled, gap, bound, holds: gap <= bound }
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenEstimateRow {
    pub alpha: usize,
    pub lambda: f64,
    /// `σ_Σ³ (λ_α − h²/2 − 6m_H/σ_Σ³ − ∮(R̄ic(ν,ν) − (H²−h²)/4) f_α² dμ)`
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenEstimateReport {
    pub sigma: f64,
    pub h: f64,
    pub hawking_mass: f64,
    pub rows: Vec<EigenEstimateRow>,
    /// `(α, β, σ_Σ³ ∮(R̄ic(ν,ν) − (H²−h²)/4) f_α f_β dμ)`, α < β
    pub cross: Vec<(usize, usize, f64)>,
}

impl EigenEstimateReport {
    pub fn max_residual(&self) -> f64 {
        self.rows.iter().fold(0.0, |m, r| m.max(r.residual.abs()))
    }

    pub fn max_cross(&self) -> f64 {
        self.cross.iter().fold(0.0, |m, c| m.max(c.2.abs()))
    }
}

pub fn eigen_estimate_report(eig: &EigenSystem, fields: &SurfaceFields, m_h: f64) -> EigenEstimateReport {
    assert!(eig.len() >= 4, "eigen estimate needs eigenpairs 0..3");
    let sigma = (fields.area() / (4.0 * PI)).sqrt();
    let s3 = sigma.powi(3);
    let h = fields.h_average();
    let weight: Vec<f64> = fields.nodes.iter().map(|n| n.ricci_nn - (n.mean_curvature.powi(2) - h * h) / 4.0).collect();
    let pair = |a: usize, b: usize| -> f64 {
        let fa = &eig.eigenfunctions[a];
        let fb = &eig.eigenfunctions[b];
        (0..weight.len()).map(|k| weight[k] * fa[k] * fb[k] * eig.measure[k]).sum()
    };
    let rows = TRANSLATIONAL
        .iter()
        .map(|&a| {
            let lambda = eig.eigenvalues[a];
            EigenEstimateRow { alpha: a, lambda, residual: s3 * (lambda - h * h / 2.0 - 6.0 * m_h / s3 - pair(a, a)) }
        })
        .collect();
    let mut cross = Vec::new();
    for (i, &a) in TRANSLATIONAL.iter().enumerate() {
        for &b in &TRANSLATIONAL[i + 1..] {
            cross.push((a, b, s3 * pair(a, b)));
        }
    }
    EigenEstimateReport { sigma, h, hawking_mass: m_h, rows, cross }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct OddPower {
    /// `∮ u³ dμ`
    pub integral: f64,
    pub l2_norm: f64,
    /// `|∮ u³ dμ| / ‖u‖₂³`
    pub normalized: f64,
}

pub fn odd_power_check(u: &[f64], fields: &SurfaceFields) -> OddPower {
    let integral: f64 = u.iter().zip(&fields.nodes).map(|(v, n)| v.powi(3) * n.measure).sum();
    let l2_norm = u.iter().zip(&fields.nodes).map(|(v, n)| v * v * n.measure).sum::<f64>().sqrt();
    let normalized = if l2_norm > 0.0 { integral.abs() / l2_norm.powi(3) } else { 0.0 };
    OddPower { integral, l2_norm, normalized }
}

/// `‖f_α − R f^e_α‖₂` summed over α after the optimal rotation `R`, where
/// `f^e_α` are the normalized coordinate functions about the surface center.
pub fn translational_alignment(eig: &EigenSystem, fields: &SurfaceFields) -> f64 {
    let mut coords: Vec<Vec<f64>> = (0..3).map(|a| fields.nodes.iter().map(|n| n.direction[a]).collect()).collect();
    for c in coords.iter_mut() {
        let nrm = eig.norm(c);
        c.iter_mut().for_each(|v| *v /= nrm);
    }
    let mut overlap = Matrix3::zeros();
    for (i, &a) in TRANSLATIONAL.iter().enumerate() {
        for (j, c) in coords.iter().enumerate() {
            overlap[(i, j)] = eig.inner(&eig.eigenfunctions[a], c);
        }
    }
    let svd = overlap.svd(true, true);
    let rot = svd.u.expect("svd u") * svd.v_t.expect("svd v_t");
    let mut total = 0.0;
    for (i, &a) in TRANSLATIONAL.iter().enumerate() {
        let diff: Vec<f64> = (0..fields.len())
            .map(|k| eig.eigenfunctions[a][k] - (0..3).map(|j| rot[(i, j)] * coords[j][k]).sum::<f64>())
            .collect();
        total += eig.inner(&diff, &diff);
    }
    total.sqrt()
}

/// Eigenvalue list, Π and split norms of `H − h` for one surface.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub l_basis: usize,
    pub sigma_area: f64,
    pub eigenvalues: Vec<f64>,
    pub stability_zero_mean: f64,
    pub pi: f64,
    pub deviation_l2: f64,
    pub translational_l2: f64,
    pub difference_l2: f64,
    pub hawking_mass: f64,
    pub estimates: EigenEstimateReport,
}

pub fn spectrum_report(fields: &SurfaceFields, l_basis: usize, k: usize) -> Result<SpectrumReport> {
    let mats = assemble_operators(fields, l_basis)?;
    let eig = laplace_eigensystem(&mats, k.max(4))?;
    let sigma_area = (fields.area() / (4.0 * PI)).sqrt();
    let dev = fields.mean_curvature_deviation();
    let split = translational_split(&dev, &eig);
    let m_h = crate::surface::hawking_mass(fields);
    Ok(SpectrumReport {
        l_basis,
        sigma_area,
        eigenvalues: eig.eigenvalues.clone(),
        stability_zero_mean: stability_spectrum_zero_mean(&mats)?,
        pi: pi_functional(fields, sigma_area),
        deviation_l2: eig.norm(&dev),
        translational_l2: split.translational_norm(),
        difference_l2: eig.norm(&split.w_d),
        hawking_mass: m_h,
        estimates: eigen_estimate_report(&eig, fields, m_h),
    })
}
