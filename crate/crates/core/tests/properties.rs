use cmcflow::ambient::MetricModel;
use cmcflow::flow::{step, FlowConfig, FlowState};
use cmcflow::harmonics::{basis_size, Deriv, QuadratureGrid};
use cmcflow::spectral::{assemble_operators, laplace_eigensystem, stability_form, translational_split};
use cmcflow::surface::{fundamental_forms, hawking_mass, GraphSurface};
use proptest::prelude::*;

fn small_coeffs(l_max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-0.05f64..0.05, basis_size(l_max) - 1)
}

fn bumpy(radius: f64, l_max: usize, extra: &[f64]) -> GraphSurface {
    let mut s = GraphSurface::sphere([0.0; 3], radius, l_max);
    for (c, e) in s.coeffs.iter_mut().skip(1).zip(extra) {
        *c += e;
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn transform_round_trip(coeffs in prop::collection::vec(-1.0f64..1.0, basis_size(6))) {
        let grid = QuadratureGrid::default_for(6);
        let back = grid.analyze(&grid.synthesize(&coeffs, Deriv::Val));
        for (a, b) in coeffs.iter().zip(&back) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn split_is_orthogonal_and_idempotent(extra in small_coeffs(4), w in prop::collection::vec(-1.0f64..1.0, basis_size(4))) {
        let fields = fundamental_forms(&MetricModel::schwarzschild(1.0), &bumpy(12.0, 4, &extra)).unwrap();
        let eig = laplace_eigensystem(&assemble_operators(&fields, 4).unwrap(), 5).unwrap();
        let samples = fields.grid.synthesize(&grid_pad(&w, fields.grid.lmax()), Deriv::Val);
        let split = translational_split(&samples, &eig);
        prop_assert!(eig.inner(&split.w_t, &split.w_d).abs() <= 1e-9 * eig.norm(&samples).powi(2).max(1e-30));
        let again = translational_split(&split.w_t, &eig);
        for (a, b) in again.w_t.iter().zip(&split.w_t) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn hawking_mass_is_translation_free_in_flat_space(r in 2.0f64..50.0, c in prop::array::uniform3(-5.0f64..5.0)) {
        let fields = fundamental_forms(&MetricModel::euclidean(), &GraphSurface::sphere(c, r, 8)).unwrap();
        prop_assert!(hawking_mass(&fields).abs() < 1e-10 * r);
    }

    #[test]
    fn flat_stability_form_is_nonnegative_on_spheres(r in 2.0f64..50.0, w in prop::collection::vec(-1.0f64..1.0, basis_size(6))) {
        let fields = fundamental_forms(&MetricModel::euclidean(), &GraphSurface::sphere([0.0; 3], r, 8)).unwrap();
        let grid = &fields.grid;
        let mut c = w.clone();
        c[0] = 0.0;
        let u = grid.synthesize(&grid_pad(&c, grid.lmax()), Deriv::Val);
        let scale = fields.integrate(&u.iter().map(|v| v * v).collect::<Vec<_>>()) / (r * r);
        prop_assert!(stability_form(&u, &fields) >= -1e-9 * scale.max(1e-30));
    }

    #[test]
    fn one_step_keeps_volume_and_lowers_area(extra in small_coeffs(4)) {
        let model = MetricModel::schwarzschild(1.0);
        let cfg = FlowConfig::default();
        let state = FlowState::new(&model, bumpy(15.0, 8, &extra), &cfg).unwrap();
        let next = step(&state, &cfg, &model).unwrap();
        prop_assert!(((next.volume - state.volume) / state.volume).abs() < 1e-11);
        prop_assert!(next.fields.area() <= state.fields.area() * (1.0 + 1e-13));
    }
}

fn grid_pad(c: &[f64], l_max: usize) -> Vec<f64> {
    let mut out = vec![0.0; basis_size(l_max)];
    out[..c.len()].copy_from_slice(c);
    out
}
