use cmcflow::ambient::{MetricModel, Parity, PerturbationSpec};
use cmcflow::flow::FlowConfig;
use cmcflow::foliation::{construct_foliation, converged_leaves, nesting_check, FoliationSpec};
use cmcflow::Error;

fn even_model(decay: f64) -> MetricModel {
    MetricModel::perturbed_schwarzschild(
        1.0,
        0.5,
        PerturbationSpec { amplitude: 0.5, decay, modes: vec![(2, 0, 0), (2, 1, 3)], parity: Parity::Even },
    )
}

#[test]
fn even_parity_leaves_converge_centered() {
    let mut spec = FoliationSpec::new(even_model(1.5), vec![20.0, 30.0], FlowConfig::default());
    spec.l_max = 8;
    spec.verify_rt = true;
    let outcomes = construct_foliation(&spec, 2).unwrap();
    let leaves = converged_leaves(&outcomes);
    assert_eq!(leaves.len(), 2, "{outcomes:?}");
    for leaf in &leaves {
        let z = leaf.barycenter.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(z < 10.0 * leaf.sigma.sqrt(), "barycenter {z}");
        assert!(leaf.round && leaf.well_centered);
        assert!(leaf.stability_eig > 0.0);
    }
    assert!(nesting_check(&leaves).unwrap().nested);
}

#[test]
fn slowly_decaying_scalar_curvature_is_refused() {
    // p = 1 leaves S̄ ~ |x|^{-3}, short of the |x|^{-3-δ} requirement
    let spec = FoliationSpec::new(even_model(1.0), vec![20.0, 30.0], FlowConfig::default());
    assert!(matches!(construct_foliation(&spec, 1), Err(Error::InvalidModel(_))));
}
