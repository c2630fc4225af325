use serde::Serialize;

use super::{FlowConfig, FlowState};
use crate::ambient::MetricModel;
use crate::error::Result;
use crate::spectral::{
    assemble_operators, laplace_eigensystem, pi_functional, stability_form, stability_spectrum_zero_mean,
    translational_split,
};
use crate::surface::{
    barycenter, hawking_mass, lp_norm, roundness_classify, FieldOptions, GradientField, RoundnessParams,
    SurfaceFields,
};

/// Column order of the history CSV.
pub const CSV_HEADER: &str = "step,t,dt,area,sigma,volume,h,dev_l2,dev_linf,traceless_l4,grad_h_l4,a_eta,pi,\
dev_t_l2,dev_d_l2,bary_x,bary_y,bary_z,m_hawking,lambda1,lambda2,lambda3,lambda4,stab_min,round,well_centered,\
fresh,l_pairing,cubic,volume_offset";

#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsRow {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    pub area: f64,
    pub sigma: f64,
    pub volume: f64,
    pub h: f64,
    pub deviation_l2: f64,
    pub deviation_linf: f64,
    pub traceless_l4: f64,
    pub grad_h_l4: f64,
    pub a_eta: f64,
    pub pi: f64,
    pub translational_l2: f64,
    pub difference_l2: f64,
    pub barycenter: [f64; 3],
    pub hawking_mass: f64,
    /// `λ₁..λ₄`
    pub lambda: [f64; 4],
    /// Smallest eigenvalue of `L` on zero-mean functions.
    pub stability_min: f64,
    pub round: bool,
    pub well_centered: bool,
    /// Spectral columns computed at this row rather than carried forward.
    pub fresh: bool,
    /// `⟨L(H−h), H−h⟩₂`
    pub l_pairing: f64,
    /// `∮ H (H−h)³ dμ`
    pub cubic: f64,
    pub volume_offset: f64,
}

impl DiagnosticsRow {
    pub fn csv_line(&self) -> String {
        let f = |v: f64| format!("{v:.16e}");
        let mut cols = vec![self.step.to_string()];
        cols.extend(
            [
                self.t,
                self.dt,
                self.area,
                self.sigma,
                self.volume,
                self.h,
                self.deviation_l2,
                self.deviation_linf,
                self.traceless_l4,
                self.grad_h_l4,
                self.a_eta,
                self.pi,
                self.translational_l2,
                self.difference_l2,
                self.barycenter[0],
                self.barycenter[1],
                self.barycenter[2],
                self.hawking_mass,
                self.lambda[0],
                self.lambda[1],
                self.lambda[2],
                self.lambda[3],
                self.stability_min,
            ]
            .map(f),
        );
        cols.extend([self.round, self.well_centered, self.fresh].map(|b| u8::from(b).to_string()));
        cols.extend([self.l_pairing, self.cubic, self.volume_offset].map(f));
        cols.join(",")
    }
}

/// Full row for `state`. Spectral columns are recomputed when `fresh`,
/// otherwise copied from `carry` (NaN if there is none).
pub fn diagnostics(
    state: &FlowState,
    model: &MetricModel,
    config: &FlowConfig,
    params: &RoundnessParams,
    fresh: bool,
    carry: Option<&DiagnosticsRow>,
) -> Result<DiagnosticsRow> {
    let full;
    let fields: &SurfaceFields = if fresh {
        full = SurfaceFields::compute(model, &state.surface, FieldOptions { curvature: true })?;
        &full
    } else {
        &state.fields
    };
    let radii = &state.radii;
    let h = fields.h_average();
    let dev = fields.mean_curvature_deviation();
    let hs = fields.mean_curvature();
    let grad = GradientField::new(fields, &hs);
    let grad_h_l4 = lp_norm(fields, &grad.gradient, 4.0);
    let z = barycenter(fields);
    let class = roundness_classify(fields, radii, params, grad_h_l4, &z);
    let mut row = DiagnosticsRow {
        step: state.steps,
        t: state.t,
        dt: state.last_dt,
        area: radii.area,
        sigma: radii.sigma_area,
        volume: state.volume,
        h,
        deviation_l2: lp_norm(fields, &dev, 2.0),
        deviation_linf: lp_norm(fields, &dev, f64::INFINITY),
        traceless_l4: class.traceless_l4,
        grad_h_l4,
        a_eta: class.a_eta,
        pi: pi_functional(fields, params.sigma),
        translational_l2: f64::NAN,
        difference_l2: f64::NAN,
        barycenter: z,
        hawking_mass: hawking_mass(fields),
        lambda: [f64::NAN; 4],
        stability_min: f64::NAN,
        round: class.round,
        well_centered: class.well_centered,
        fresh,
        l_pairing: f64::NAN,
        cubic: fields.integrate_with(|n| n.mean_curvature * (n.mean_curvature - h).powi(3)),
        volume_offset: state.last_offset,
    };
    if fresh {
        let degree = config.diag_basis_degree.clamp(1, fields.l_max);
        let mats = assemble_operators(fields, degree)?;
        let eig = laplace_eigensystem(&mats, 5)?;
        let split = translational_split(&dev, &eig);
        row.translational_l2 = split.translational_norm();
        row.difference_l2 = eig.norm(&split.w_d);
        row.lambda = [1, 2, 3, 4].map(|k| eig.eigenvalues[k]);
        row.stability_min = stability_spectrum_zero_mean(&mats)?;
        row.l_pairing = stability_form(&dev, fields);
    } else if let Some(c) = carry {
        row.translational_l2 = c.translational_l2;
        row.difference_l2 = c.difference_l2;
        row.lambda = c.lambda;
        row.stability_min = c.stability_min;
        row.l_pairing = c.l_pairing;
    }
    Ok(row)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::default_class_params;
    use crate::surface::GraphSurface;

    #[test]
    fn euclidean_sphere_row() {
        let model = MetricModel::euclidean();
        let cfg = FlowConfig::default();
        let st = FlowState::new(&model, GraphSurface::sphere([0.0; 3], 10.0, 8), &cfg).unwrap();
        let row = diagnostics(&st, &model, &cfg, &default_class_params(10.0), true, None).unwrap();
        assert!(row.deviation_l2 < 1e-12 && row.hawking_mass.abs() < 1e-12);
        assert!(row.round && row.well_centered);
        assert!((row.lambda[0] - 0.02).abs() < 1e-12 && (row.lambda[3] - 0.06).abs() < 1e-12);
        assert_eq!(row.csv_line().split(',').count(), CSV_HEADER.split(',').count());
    }

    #[test]
    fn schwarzschild_sphere_row() {
        let model = MetricModel::schwarzschild(1.0);
        let cfg = FlowConfig::default();
        let st = FlowState::new(&model, GraphSurface::sphere([0.0; 3], 20.0, 8), &cfg).unwrap();
        let params = default_class_params(st.sigma());
        let row = diagnostics(&st, &model, &cfg, &params, true, None).unwrap();
        assert!((row.hawking_mass - 1.0).abs() < 1e-4);
        assert!(row.pi < 1e-10 && row.stability_min > 0.0);
        let stale = diagnostics(&st, &model, &cfg, &params, false, Some(&row)).unwrap();
        assert!(!stale.fresh && stale.lambda == row.lambda);
    }
}
