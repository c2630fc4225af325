use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::{direction_derivative, GraphSurface};
use crate::ambient::{christoffel, cross, curvature_from_jet, dot, mat_vec, norm, quad, Mat3, MetricJet, MetricModel, Vec3};
use crate::error::{Error, Result};
use crate::harmonics::{PointBasis, QuadratureGrid};

pub type Sym2 = [[f64; 2]; 2];

#[derive(Debug, Clone, Copy)]
pub struct FieldOptions {
    /// Evaluate ambient curvature (R̄ic(ν,ν), S̄, |R̄m|) at every node.
    pub curvature: bool,
}

impl Default for FieldOptions {
    fn default() -> Self {
        Self { curvature: true }
    }
}

/// Flat-metric counterparts of the node geometry.
#[derive(Debug, Clone, Copy)]
pub struct EuclideanNode {
    pub metric: Sym2,
    pub normal: Vec3,
    pub second_form: Sym2,
    pub mean_curvature: f64,
    pub traceless_sq: f64,
    pub measure: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct NodeFields {
    pub position: Vec3,
    pub direction: Vec3,
    pub radius: f64,
    pub tangents: [Vec3; 2],
    pub ambient_metric: Mat3,
    pub metric: Sym2,
    pub metric_inv: Sym2,
    /// `metric_deriv[i][j][k] = ∂_k g_ij`
    pub metric_deriv: [[[f64; 2]; 2]; 2],
    pub normal: Vec3,
    pub normal_flat: Vec3,
    pub second_form: Sym2,
    pub mean_curvature: f64,
    pub a_sq: f64,
    pub traceless_sq: f64,
    pub kappa: [f64; 2],
    /// Integration weight `dμ` of this node (quadrature weight included).
    pub measure: f64,
    /// `ḡ(ν, u)`
    pub graph: f64,
    pub euclid: EuclideanNode,
    pub ricci_nn: f64,
    pub ambient_scalar: f64,
    pub riemann_norm: f64,
}

#[derive(Debug, Clone)]
pub struct SurfaceFields {
    pub nodes: Vec<NodeFields>,
    pub grid: Arc<QuadratureGrid>,
    pub center: Vec3,
    pub l_max: usize,
    pub delta: f64,
    pub has_curvature: bool,
}

fn inv2(m: &Sym2) -> (Sym2, f64) {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    ([[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]], det)
}

fn contract2(ginv: &Sym2, a: &Sym2, b: &Sym2) -> f64 {
    let mut s = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    s += ginv[i][k] * ginv[j][l] * a[i][j] * b[k][l];
                }
            }
        }
    }
    s
}

fn trace2(ginv: &Sym2, a: &Sym2) -> f64 {
    ginv[0][0] * a[0][0] + 2.0 * ginv[0][1] * a[0][1] + ginv[1][1] * a[1][1]
}

fn axpy(acc: &mut Vec3, s: f64, v: &Vec3) {
    for i in 0..3 {
        acc[i] += s * v[i];
    }
}

/// `∂_c ḡ_ab X^c Y^a Z^b`
fn dg_contract(jet: &MetricJet, x: &Vec3, y: &Vec3, z: &Vec3) -> f64 {
    let mut s = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            s += y[a] * z[b] * dot(&jet.dg[a][b], x);
        }
    }
    s
}

/// Position derivatives `X_(a,b)` for `a + b ≤ order` from radial derivatives.
fn position_derivatives(center: &Vec3, rd: &[[f64; 4]; 4], theta: f64, phi: f64, order: usize) -> [[Vec3; 4]; 4] {
    const BINOM: [[f64; 4]; 4] = [[1.0, 0.0, 0.0, 0.0], [1.0, 1.0, 0.0, 0.0], [1.0, 2.0, 1.0, 0.0], [1.0, 3.0, 3.0, 1.0]];
    let mut u = [[[0.0; 3]; 4]; 4];
    for a in 0..=order {
        for b in 0..=(order - a) {
            u[a][b] = direction_derivative(theta, phi, a, b);
        }
    }
    let mut x = [[[0.0; 3]; 4]; 4];
    for a in 0..=order {
        for b in 0..=(order - a) {
            let mut v = if a + b == 0 { *center } else { [0.0; 3] };
            for a1 in 0..=a {
                for b1 in 0..=b {
                    axpy(&mut v, BINOM[a][a1] * BINOM[b][b1] * rd[a1][b1], &u[a - a1][b - b1]);
                }
            }
            x[a][b] = v;
        }
    }
    x
}

const E: [(usize, usize); 2] = [(1, 0), (0, 1)];

fn node_fields(
    model: &MetricModel,
    grid: &QuadratureGrid,
    center: &Vec3,
    n: usize,
    rd: &[[f64; 4]; 4],
    opts: FieldOptions,
) -> Result<NodeFields> {
    let node = grid.nodes()[n];
    let xd = position_derivatives(center, rd, node.theta, node.phi, 2);
    let x = xd[0][0];
    if !model.is_flat() && norm(&x) <= 1.0 {
        return Err(Error::ChartViolation(x));
    }
    let u = direction_derivative(node.theta, node.phi, 0, 0);
    let t = [xd[1][0], xd[0][1]];
    let s = [[xd[2][0], xd[1][1]], [xd[1][1], xd[0][2]]];
    let jet = model.jet_unchecked(&x);
    let (ginv3, gamma) = christoffel(&jet);

    let mut metric = [[0.0; 2]; 2];
    let mut metric_e = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            metric[i][j] = quad(&jet.g, &t[i], &t[j]);
            metric_e[i][j] = dot(&t[i], &t[j]);
        }
    }
    let (metric_inv, det) = inv2(&metric);
    let (metric_e_inv, det_e) = inv2(&metric_e);
    let mut metric_deriv = [[[0.0; 2]; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                metric_deriv[i][j][k] = dg_contract(&jet, &t[k], &t[i], &t[j])
                    + quad(&jet.g, &s[i][k], &t[j])
                    + quad(&jet.g, &t[i], &s[j][k]);
            }
        }
    }

    let nc = cross(&t[0], &t[1]);
    let gn = mat_vec(&ginv3, &nc);
    let len = dot(&nc, &gn).sqrt();
    let normal = gn.map(|c| c / len);
    let normal_flat = nc.map(|c| c / len);
    let graph = dot(&normal_flat, &u);
    if !(graph > 0.0) {
        return Err(Error::GraphConditionViolated { node: n, value: graph });
    }
    let len_e = norm(&nc);
    let normal_e = nc.map(|c| c / len_e);

    let mut second_form = [[0.0; 2]; 2];
    let mut second_e = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in i..2 {
            let mut acc = s[i][j];
            for a in 0..3 {
                for b in 0..3 {
                    acc[a] += gamma[a][b].iter().zip(&t[j]).map(|(g, tj)| g * tj).sum::<f64>() * t[i][b];
                }
            }
            second_form[i][j] = -dot(&normal_flat, &acc);
            second_form[j][i] = second_form[i][j];
            second_e[i][j] = -dot(&normal_e, &s[i][j]);
            second_e[j][i] = second_e[i][j];
        }
    }
    let mean = trace2(&metric_inv, &second_form);
    let a_sq = contract2(&metric_inv, &second_form, &second_form);
    let traceless_sq = a_sq - 0.5 * mean * mean;
    let split = (0.5 * traceless_sq.max(0.0)).sqrt();
    let mean_e = trace2(&metric_e_inv, &second_e);
    let traceless_e = contract2(&metric_e_inv, &second_e, &second_e) - 0.5 * mean_e * mean_e;

    let (ricci_nn, ambient_scalar, riemann_norm) = if opts.curvature && !model.is_flat() {
        let c = curvature_from_jet(&jet);
        (quad(&c.ricci, &normal, &normal), c.scalar, c.riemann_norm())
    } else {
        (0.0, 0.0, 0.0)
    };

    Ok(NodeFields {
        position: x,
        direction: u,
        radius: rd[0][0],
        tangents: t,
        ambient_metric: jet.g,
        metric,
        metric_inv,
        metric_deriv,
        normal,
        normal_flat,
        second_form,
        mean_curvature: mean,
        a_sq,
        traceless_sq,
        kappa: [0.5 * mean - split, 0.5 * mean + split],
        measure: node.weight * det.sqrt() / node.sin_theta,
        graph,
        euclid: EuclideanNode {
            metric: metric_e,
            normal: normal_e,
            second_form: second_e,
            mean_curvature: mean_e,
            traceless_sq: traceless_e,
            measure: node.weight * det_e.sqrt() / node.sin_theta,
        },
        ricci_nn,
        ambient_scalar,
        riemann_norm,
    })
}

impl SurfaceFields {
    pub fn compute(model: &MetricModel, surface: &GraphSurface, opts: FieldOptions) -> Result<Self> {
        let geo = surface.synthesize()?;
        let grid = Arc::clone(surface.grid());
        let nodes = (0..grid.len())
            .into_par_iter()
            .map(|n| {
                let mut rd = [[0.0; 4]; 4];
                rd[0][0] = geo.r[n];
                rd[1][0] = geo.r_t[n];
                rd[0][1] = geo.r_p[n];
                rd[2][0] = geo.r_tt[n];
                rd[1][1] = geo.r_tp[n];
                rd[0][2] = geo.r_pp[n];
                node_fields(model, &grid, &surface.center, n, &rd, opts)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            nodes,
            grid,
            center: surface.center,
            l_max: surface.l_max,
            delta: model.delta,
            has_curvature: opts.curvature,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn area(&self) -> f64 {
        self.nodes.iter().map(|n| n.measure).sum()
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().zip(&self.nodes).map(|(v, n)| v * n.measure).sum()
    }

    pub fn integrate_with<F: Fn(&NodeFields) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().map(|n| f(n) * n.measure).sum()
    }

    pub fn mean_curvature(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.mean_curvature).collect()
    }

    /// `h = |Σ|⁻¹ ∮ H dμ`
    pub fn h_average(&self) -> f64 {
        self.integrate_with(|n| n.mean_curvature) / self.area()
    }

    /// `H − h` at every node.
    pub fn mean_curvature_deviation(&self) -> Vec<f64> {
        let h = self.h_average();
        self.nodes.iter().map(|n| n.mean_curvature - h).collect()
    }

    /// `|x|` at every node.
    pub fn distances(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| norm(&n.position)).collect()
    }

    /// One row per node, floats with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "theta,phi,x,y,z,r,H,H_e,A_sq,Ao_sq,Ao_sq_e,kappa1,kappa2,dmu,dmu_e,ric_nn,graph")?;
        for (node, f) in self.grid.nodes().iter().zip(&self.nodes) {
            let vals = [
                node.theta,
                node.phi,
                f.position[0],
                f.position[1],
                f.position[2],
                f.radius,
                f.mean_curvature,
                f.euclid.mean_curvature,
                f.a_sq,
                f.traceless_sq,
                f.euclid.traceless_sq,
                f.kappa[0],
                f.kappa[1],
                f.measure,
                f.euclid.measure,
                f.ricci_nn,
                f.graph,
            ];
            let line: Vec<String> = vals.iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }
}

/// Full physical and Euclidean extrinsic geometry, with ambient curvature.
pub fn fundamental_forms(model: &MetricModel, surface: &GraphSurface) -> Result<SurfaceFields> {
    SurfaceFields::compute(model, surface, FieldOptions::default())
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    /// sup `|g − g^e|_g |x|^{½+δ}`
    pub metric: f64,
    /// sup `|ν − ν^e|_ḡ |x|^{½+δ}`
    pub normal: f64,
    /// sup `|H − H^e| |x|^{3/2+δ}`, omitted when the curvature hypothesis fails
    pub mean_curvature: Option<f64>,
    /// sup `|Å − Å^e|_g |x|^{3/2+δ}`, omitted when the curvature hypothesis fails
    pub traceless: Option<f64>,
    /// sup `|dμ/dμ^e − 1| |x|^{½+δ}`
    pub measure: f64,
    /// `max |A| · r_min`; the hypothesis is `≤ 10`
    pub curvature_scale: f64,
    pub hypothesis_holds: bool,
}

impl ComparisonReport {
    pub fn require_hypothesis(&self) -> Result<&Self> {
        if self.hypothesis_holds {
            Ok(self)
        } else {
            Err(Error::CurvatureHypothesisViolated(self.curvature_scale))
        }
    }
}

pub fn euclidean_comparison(fields: &SurfaceFields) -> ComparisonReport {
    let d = fields.delta;
    let r_min = fields.distances().into_iter().fold(f64::INFINITY, f64::min);
    let a_max = fields.nodes.iter().map(|n| n.a_sq.sqrt()).fold(0.0, f64::max);
    let curvature_scale = a_max * r_min;
    let hypothesis_holds = curvature_scale <= 10.0;
    let (mut metric, mut normal, mut mean, mut traceless, mut measure) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for n in &fields.nodes {
        let x = norm(&n.position);
        let w1 = x.powf(0.5 + d);
        let w3 = x.powf(1.5 + d);
        let dg = [0, 1].map(|i| [0, 1].map(|j| n.metric[i][j] - n.euclid.metric[i][j]));
        metric = metric.max(contract2(&n.metric_inv, &dg, &dg).sqrt() * w1);
        let dn = [0, 1, 2].map(|i| n.normal[i] - n.euclid.normal[i]);
        normal = normal.max(quad(&n.ambient_metric, &dn, &dn).sqrt() * w1);
        mean = mean.max((n.mean_curvature - n.euclid.mean_curvature).abs() * w3);
        let ao = |h: &Sym2, g: &Sym2, hm: f64, i: usize, j: usize| h[i][j] - 0.5 * hm * g[i][j];
        let da = [0, 1].map(|i| {
            [0, 1].map(|j| {
                ao(&n.second_form, &n.metric, n.mean_curvature, i, j)
                    - ao(&n.euclid.second_form, &n.euclid.metric, n.euclid.mean_curvature, i, j)
            })
        });
        traceless = traceless.max(contract2(&n.metric_inv, &da, &da).max(0.0).sqrt() * w3);
        measure = measure.max((n.measure / n.euclid.measure - 1.0).abs() * w1);
    }
    ComparisonReport {
        metric,
        normal,
        mean_curvature: hypothesis_holds.then_some(mean),
        traceless: hypothesis_holds.then_some(traceless),
        measure,
        curvature_scale,
        hypothesis_holds,
    }
}

/// Intrinsic scalar curvature of `g_ij` (from third derivatives of the
/// embedding) paired with the Gauss-equation value `S̄ − 2R̄ic(ν,ν) + H² − |A|²`
/// at every node.
pub fn gauss_equation_defect(model: &MetricModel, surface: &GraphSurface) -> Result<Vec<[f64; 2]>> {
    let fields = fundamental_forms(model, surface)?;
    let grid = surface.grid();
    grid.nodes()
        .par_iter()
        .zip(fields.nodes.par_iter())
        .map(|(node, f)| {
            let pb = PointBasis::new(node.theta, node.phi, surface.l_max, 3);
            let mut rd = [[0.0; 4]; 4];
            for a in 0..=3 {
                for b in 0..=(3 - a) {
                    rd[a][b] = pb.combine(&surface.coeffs, a, b);
                }
            }
            let xd = position_derivatives(&surface.center, &rd, node.theta, node.phi, 3);
            let jet = model.jet_unchecked(&xd[0][0]);
            let x1 = |i: usize| xd[E[i].0][E[i].1];
            let x2 = |i: usize, j: usize| xd[E[i].0 + E[j].0][E[i].1 + E[j].1];
            let x3 = |i: usize, j: usize, k: usize| xd[E[i].0 + E[j].0 + E[k].0][E[i].1 + E[j].1 + E[k].1];
            let g = &f.metric;
            let ginv = &f.metric_inv;
            let dg = &f.metric_deriv;
            // ddg[i][j][k][l] = ∂_l ∂_k g_ij
            let mut ddg = [[[[0.0; 2]; 2]; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        for l in 0..2 {
                            let mut v = 0.0;
                            for a in 0..3 {
                                for b in 0..3 {
                                    for c in 0..3 {
                                        v += dot(&jet.ddg[a][b][c], &x1(l)) * x1(k)[c] * x1(i)[a] * x1(j)[b];
                                    }
                                }
                            }
                            v += dg_contract(&jet, &x2(k, l), &x1(i), &x1(j))
                                + dg_contract(&jet, &x1(k), &x2(i, l), &x1(j))
                                + dg_contract(&jet, &x1(k), &x1(i), &x2(j, l))
                                + dg_contract(&jet, &x1(l), &x2(i, k), &x1(j))
                                + dg_contract(&jet, &x1(l), &x1(i), &x2(j, k));
                            v += quad(&jet.g, &x3(i, k, l), &x1(j))
                                + quad(&jet.g, &x2(i, k), &x2(j, l))
                                + quad(&jet.g, &x2(i, l), &x2(j, k))
                                + quad(&jet.g, &x1(i), &x3(j, k, l));
                            ddg[i][j][k][l] = v;
                        }
                    }
                }
            }
            // first-kind symbols and derivatives
            let low = |l: usize, i: usize, j: usize| 0.5 * (dg[l][j][i] + dg[l][i][j] - dg[i][j][l]);
            let dlow = |l: usize, i: usize, j: usize, m: usize| {
                0.5 * (ddg[l][j][i][m] + ddg[l][i][j][m] - ddg[i][j][l][m])
            };
            let mut gam = [[[0.0; 2]; 2]; 2];
            let mut dgam = [[[[0.0; 2]; 2]; 2]; 2];
            for k in 0..2 {
                for i in 0..2 {
                    for j in 0..2 {
                        gam[k][i][j] = (0..2).map(|l| ginv[k][l] * low(l, i, j)).sum();
                        for m in 0..2 {
                            let mut v = 0.0;
                            for l in 0..2 {
                                let mut dinv = 0.0;
                                for p in 0..2 {
                                    for q in 0..2 {
                                        dinv -= ginv[k][p] * dg[p][q][m] * ginv[q][l];
                                    }
                                }
                                v += dinv * low(l, i, j) + ginv[k][l] * dlow(l, i, j, m);
                            }
                            dgam[k][i][j][m] = v;
                        }
                    }
                }
            }
            // R^k_l01 = ∂_0 Γ^k_1l − ∂_1 Γ^k_0l + Γ^k_0m Γ^m_1l − Γ^k_1m Γ^m_0l, with l = 1
            let r_up = |k: usize| {
                let mut v = dgam[k][1][1][0] - dgam[k][0][1][1];
                for m in 0..2 {
                    v += gam[k][0][m] * gam[m][1][1] - gam[k][1][m] * gam[m][0][1];
                }
                v
            };
            let r0101 = g[0][0] * r_up(0) + g[0][1] * r_up(1);
            let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
            let intrinsic = 2.0 * r0101 / det;
            let extrinsic = f.ambient_scalar - 2.0 * f.ricci_nn + f.mean_curvature.powi(2) - f.a_sq;
            Ok([intrinsic, extrinsic])
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::{Parity, PerturbationSpec};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn euclidean_sphere_radius_two() {
        let f = fundamental_forms(&MetricModel::euclidean(), &GraphSurface::sphere([0.0; 3], 2.0, 8)).unwrap();
        for n in &f.nodes {
            assert!(close(n.mean_curvature, 1.0, 1e-13));
            assert!(n.traceless_sq.abs() < 1e-13);
            assert!(close(n.kappa[0], 0.5, 1e-6) && close(n.kappa[1], 0.5, 1e-6));
        }
        assert!(close(f.area(), 16.0 * std::f64::consts::PI, 1e-11));
    }

    #[test]
    fn schwarzschild_conformal_sphere_mean_curvature() {
        let (m, r) = (1.0f64, 10.0f64);
        let phi = 1.0 + m / (2.0 * r);
        let dphi = -m / (2.0 * r * r);
        let oracle = (2.0 / r + 4.0 * dphi / phi) / (phi * phi);
        assert!(close(oracle, 0.164129, 1e-6));
        let f = fundamental_forms(&MetricModel::schwarzschild(m), &GraphSurface::sphere([0.0; 3], r, 10)).unwrap();
        for n in &f.nodes {
            assert!(close(n.mean_curvature, oracle, 1e-13));
            assert!(close(n.ricci_nn, -2.0 * m / (r * phi * phi).powi(3), 1e-15));
        }
        assert!(close(f.h_average(), oracle, 1e-13));
    }

    #[test]
    fn surface_field_invariants_on_perturbed_model() {
        let model = MetricModel::perturbed_schwarzschild(
            1.0,
            0.5,
            PerturbationSpec { amplitude: 0.5, decay: 1.0, modes: vec![(2, 1, 1), (0, 0, 5)], parity: Parity::Even },
        );
        let s = GraphSurface::sphere([0.3, -0.2, 0.5], 8.0, 8).with_mode(2, 1, 0.4).with_mode(3, -2, 0.3);
        let f = fundamental_forms(&model, &s).unwrap();
        for n in &f.nodes {
            assert!(close(n.kappa[0] + n.kappa[1], n.mean_curvature, 1e-12));
            assert!(close(n.traceless_sq, n.a_sq - 0.5 * n.mean_curvature.powi(2), 1e-12));
            assert!(n.kappa[0] <= n.kappa[1]);
            assert!(n.metric[0][0] > 0.0 && n.metric[0][0] * n.metric[1][1] > n.metric[0][1].powi(2));
            // ν is unit and orthogonal to the tangents
            assert!(close(quad(&n.ambient_metric, &n.normal, &n.normal), 1.0, 1e-12));
            for t in &n.tangents {
                assert!(quad(&n.ambient_metric, &n.normal, t).abs() < 1e-10);
            }
        }
        let hbar = f.h_average();
        let dev: Vec<f64> = f.mean_curvature().iter().map(|h| h - hbar).collect();
        assert!(f.integrate(&dev).abs() < 1e-12 * f.area() * hbar);
    }

    #[test]
    fn radial_graphs_satisfy_graph_condition() {
        // ν♭ ∝ X_θ × X_φ and (X_θ × X_φ)·u = r² sin θ, so positivity of r suffices
        let s = GraphSurface::sphere([0.0; 3], 3.0, 8).with_mode(8, 8, 2.2).with_mode(5, -3, 1.1);
        let f = fundamental_forms(&MetricModel::schwarzschild(0.5), &s).unwrap();
        assert!(f.nodes.iter().all(|n| n.graph > 0.0));
    }

    #[test]
    fn chart_violation_detected() {
        let s = GraphSurface::sphere([0.0; 3], 0.8, 4);
        assert!(matches!(fundamental_forms(&MetricModel::schwarzschild(1.0), &s), Err(Error::ChartViolation(_))));
    }

    #[test]
    fn gauss_equation_refinement() {
        let model = MetricModel::perturbed_schwarzschild(
            1.0,
            0.5,
            PerturbationSpec { amplitude: 0.5, decay: 1.0, modes: vec![(2, 1, 1), (2, -2, 3)], parity: Parity::Even },
        );
        let s = GraphSurface::sphere([0.2, 0.0, -0.1], 6.0, 10).with_mode(2, 0, 0.3).with_mode(3, 1, 0.2);
        let pairs = gauss_equation_defect(&model, &s).unwrap();
        let scale = pairs.iter().map(|p| p[1].abs()).fold(0.0, f64::max);
        let worst = pairs.iter().map(|p| (p[0] - p[1]).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-8 * scale, "{worst} vs {scale}");
    }

    #[test]
    fn comparison_rows() {
        let flat = fundamental_forms(&MetricModel::euclidean(), &GraphSurface::sphere([0.0; 3], 5.0, 6)).unwrap();
        let rep = euclidean_comparison(&flat);
        assert_eq!(rep.metric, 0.0);
        assert_eq!(rep.mean_curvature, Some(0.0));
        let rows: Vec<ComparisonReport> = [10.0, 20.0, 40.0]
            .iter()
            .map(|r| {
                euclidean_comparison(
                    &fundamental_forms(&MetricModel::schwarzschild(1.0), &GraphSurface::sphere([0.0; 3], *r, 6)).unwrap(),
                )
            })
            .collect();
        for w in rows.windows(2) {
            assert!(w[1].metric <= w[0].metric * 1.15);
            assert!(w[1].normal <= w[0].normal * 1.15 + 1e-12);
            assert!(w[1].mean_curvature.unwrap() <= w[0].mean_curvature.unwrap() * 1.15);
            assert!(w[1].traceless.unwrap() <= w[0].traceless.unwrap() * 1.15 + 1e-9);
            assert!(w[1].measure <= w[0].measure * 1.15);
        }
    }

    #[test]
    fn csv_export() {
        let f = fundamental_forms(&MetricModel::euclidean(), &GraphSurface::sphere([0.0; 3], 2.0, 2)).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), f.len() + 1);
    }
}
