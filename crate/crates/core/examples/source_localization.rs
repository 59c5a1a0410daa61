//! Locating the source of a diffusion on a stochastic block graph with a
//! ReLU network and a dynamic-median network.
//!
//! Run with `cargo run --release --example source_localization`.

use std::sync::Arc;

use medgnn::data::{generate_diffusion_dataset, split, top_degree_nodes, DiffusionGso, DiffusionParams};
use medgnn::graph::{random::GraphGenerator, Direction, DEFAULT_TOL};
use medgnn::nn::{Activation, Architecture, GraphContext, Model};
use medgnn::optim::{evaluate, train, AdamConfig, TrainConfig};

fn main() -> medgnn::Result<()> {
    let g = GraphGenerator::StochasticBlock {
        block_sizes: vec![8, 8, 8],
        p_in: 0.4,
        p_out: 0.05,
        seed: 2,
    }
    .generate_connected()?;
    let sources = top_degree_nodes(&g, 3)?;
    println!("sources {sources:?}");

    let ds = generate_diffusion_dataset(
        &g,
        &sources,
        &DiffusionParams {
            samples: 900,
            t_min: 0,
            t_max: 4,
            gso: DiffusionGso::Normalized,
            seed: 1,
        },
    )?;
    let (train_set, test_set) = split(&ds, 0.8, 1)?;

    for activation in [Activation::Relu, Activation::DynamicMedian { reach: 1 }] {
        let ctx = GraphContext::from_graph(&g, activation.max_hop(), Direction::In, DEFAULT_TOL)?;
        let arch = Architecture {
            nodes: g.n_nodes(),
            features_in: 1,
            filters: 16,
            taps: 5,
            classes: sources.len(),
            activation,
        };
        let mut model = Model::new(arch, Arc::new(ctx), 3)?;
        let cfg = TrainConfig {
            epochs: 15,
            batch_size: 50,
            adam: AdamConfig {
                learning_rate: 0.005,
                ..AdamConfig::default()
            },
            seed: 3,
            validation_fraction: None,
        };
        let report = train(&mut model, &train_set, &cfg)?;
        let test = evaluate(&model, &test_set)?;
        println!(
            "{:<10} {} conv params, train loss {:.3}, test accuracy {:.1}%",
            activation.to_string(),
            arch.conv_param_count(),
            report.final_train.loss,
            100.0 * test.accuracy
        );
    }
    Ok(())
}
