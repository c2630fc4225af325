//! In flat space a degree-l bump decays like exp(−(l−1)(l+2)t/σ²) while an
//! l = 1 bump is a pure translation and does not decay.
//!
//! `cargo run --release --example euclidean_relaxation`

use cmcflow::ambient::MetricModel;
use cmcflow::flow::{step, FlowConfig, FlowState};
use cmcflow::harmonics::sh_index;
use cmcflow::surface::GraphSurface;

fn main() -> cmcflow::Result<()> {
    let model = MetricModel::euclidean();
    let config = FlowConfig { recenter: false, ..FlowConfig::default() };
    let horizon = 25.0;
    for l in 1..=4usize {
        let idx = sh_index(l, 0);
        let mut state = FlowState::new(&model, GraphSurface::sphere([0.0; 3], 10.0, 16).with_mode(l, 0, 0.1), &config)?;
        let a0 = state.surface.coeffs[idx];
        while state.t < horizon {
            state = step(&state, &config, &model)?;
        }
        let a1 = state.surface.coeffs[idx];
        let rate = -(a1 / a0).ln() / state.t;
        let linear = ((l - 1) * (l + 2)) as f64 / 100.0;
        println!("l = {l}: amplitude {a0:.4} → {a1:.6} over t = {:.2}, rate {rate:.5} (linear {linear:.5})", state.t);
    }
    Ok(())
}
