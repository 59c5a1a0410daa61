//! Compares backpropagated gradients with central finite differences of the
//! model loss, tensor by tensor.
//!
//! Run with `cargo run --example gradient_check`.

use std::sync::Arc;

use medgnn::graph::{random, Direction, DEFAULT_TOL};
use medgnn::nn::{Activation, Architecture, GraphContext, Model, SignalBatch};

fn main() -> medgnn::Result<()> {
    let g = random::erdos_renyi(8, 0.4, false, 3);
    for activation in [
        Activation::Relu,
        Activation::StaticMedian { hops: 1 },
        Activation::DynamicMedian { reach: 2 },
    ] {
        let ctx = GraphContext::from_graph(&g, activation.max_hop(), Direction::In, DEFAULT_TOL)?;
        let arch = Architecture {
            nodes: 8,
            features_in: 1,
            filters: 3,
            taps: 3,
            classes: 2,
            activation,
        };
        let mut model = Model::new(arch, Arc::new(ctx), 7)?;
        let x = SignalBatch::from_values(2, 1, 8, (0..16).map(|k| ((k * 37 % 11) as f64 - 5.0) / 5.0).collect())?;
        let labels = [0, 1];
        let (_, grads) = model.loss_and_gradients(&x, &labels)?;
        let analytic: Vec<(&str, Vec<f64>)> =
            grads.tensors().into_iter().map(|(n, g)| (n, g.to_vec())).collect();

        let h = 1e-6;
        println!("{activation}");
        for (t, (name, want)) in analytic.iter().enumerate() {
            let mut worst = 0.0f64;
            for (k, want_k) in want.iter().enumerate() {
                let mut probe = |delta: f64| -> medgnn::Result<f64> {
                    model.params_mut().tensors_mut()[t].1[k] += delta;
                    let l = model.loss(&x, &labels);
                    model.params_mut().tensors_mut()[t].1[k] -= delta;
                    l
                };
                let fd = (probe(h)? - probe(-h)?) / (2.0 * h);
                worst = worst.max((fd - want_k).abs() / want_k.abs().max(1e-8));
            }
            println!("  {name:<15} {:>4} entries, worst relative error {worst:.1e}", want.len());
        }
    }
    Ok(())
}
