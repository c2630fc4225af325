//! Geometry of a single graph surface: curvature, masses, norms and the
//! roundness classification.
//!
//! `cargo run --release --example surface_geometry`

use cmcflow::ambient::MetricModel;
use cmcflow::flow::default_class_params;
use cmcflow::surface::{
    barycenter, euclidean_comparison, fundamental_forms, hawking_mass, lp_norm, measures_and_radii, roundness_classify,
    GradientField, GraphSurface,
};

fn main() -> cmcflow::Result<()> {
    let model = MetricModel::schwarzschild(1.0);
    for r in [5.0, 20.0, 100.0] {
        let fields = fundamental_forms(&model, &GraphSurface::sphere([0.0; 3], r, 16))?;
        let radii = measures_and_radii(&fields);
        println!("r = {r:>5}: σ = {:.6}, h = {:.6e}, m_H = {:.12}", radii.sigma_area, fields.h_average(), hawking_mass(&fields));
    }

    let surface = GraphSurface::sphere([1.0, 0.0, 0.0], 20.0, 16).with_mode(2, 1, 0.3).with_mode(3, -2, 0.1);
    let fields = fundamental_forms(&model, &surface)?;
    let radii = measures_and_radii(&fields);
    let dev = fields.mean_curvature_deviation();
    println!("\nperturbed sphere: area {:.4}, r_min {:.4}, r_max {:.4}", radii.area, radii.r_min, radii.r_max);
    println!("‖H−h‖₂ = {:.3e}, ‖H−h‖_∞ = {:.3e}", lp_norm(&fields, &dev, 2.0), lp_norm(&fields, &dev, f64::INFINITY));

    let cmp = euclidean_comparison(&fields);
    println!("Euclidean comparison: metric {:.3}, normal {:.3}, H {:?}", cmp.metric, cmp.normal, cmp.mean_curvature);

    let hs = fields.mean_curvature();
    let grad = lp_norm(&fields, &GradientField::new(&fields, &hs).gradient, 4.0);
    let z = barycenter(&fields);
    let class = roundness_classify(&fields, &radii, &default_class_params(radii.sigma_area), grad, &z);
    println!("barycenter {:?}", z.map(|v| (v * 1e4).round() / 1e4));
    println!("round {}, well centered {}", class.round, class.well_centered);
    println!("{:#?}", class.margins);
    Ok(())
}
