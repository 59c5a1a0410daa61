//! Saving a trained model to text and reloading it.
//!
//! Run with `cargo run --example checkpoint`.

use std::sync::Arc;

use medgnn::data::{generate_diffusion_dataset, top_degree_nodes, DiffusionGso, DiffusionParams};
use medgnn::graph::{random, Direction, DEFAULT_TOL};
use medgnn::nn::{checkpoint, Activation, Architecture, GraphContext, Model};
use medgnn::optim::{evaluate, train, AdamConfig, TrainConfig};

fn main() -> medgnn::Result<()> {
    let g = random::random_geometric(15, 0.45, 8);
    let sources = top_degree_nodes(&g, 3)?;
    let ds = generate_diffusion_dataset(
        &g,
        &sources,
        &DiffusionParams {
            samples: 200,
            t_min: 0,
            t_max: 3,
            gso: DiffusionGso::Normalized,
            seed: 5,
        },
    )?;
    let activation = Activation::DynamicMedian { reach: 1 };
    let ctx = GraphContext::from_graph(&g, activation.max_hop(), Direction::In, DEFAULT_TOL)?;
    let arch = Architecture {
        nodes: 15,
        features_in: 1,
        filters: 4,
        taps: 3,
        classes: 3,
        activation,
    };
    let mut model = Model::new(arch, Arc::new(ctx), 5)?;
    let cfg = TrainConfig {
        epochs: 5,
        batch_size: 25,
        adam: AdamConfig::default(),
        seed: 5,
        validation_fraction: None,
    };
    train(&mut model, &ds, &cfg)?;

    let text = checkpoint::to_string(&model);
    println!("checkpoint is {} bytes; first line: {}", text.len(), text.lines().next().unwrap_or(""));
    let restored = checkpoint::from_str(&text)?;

    let before = evaluate(&model, &ds)?;
    let after = evaluate(&restored, &ds)?;
    println!("loss before {:.12}, after {:.12}", before.loss, after.loss);
    assert_eq!(before, after);
    Ok(())
}
