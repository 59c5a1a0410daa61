//! Authorship attribution from function-word frequencies on a word adjacency
//! network, using a generated two-author corpus.
//!
//! Run with `cargo run --release --example authorship`.

use std::sync::Arc;

use medgnn::data::wan::parse_function_words;
use medgnn::data::{
    authorship_round, synthetic_corpus, AuthorshipParams, Corpus, SyntheticCorpusParams, WanSpec,
    DEFAULT_FUNCTION_WORDS,
};
use medgnn::graph::{Direction, DEFAULT_TOL};
use medgnn::nn::{Activation, Architecture, GraphContext, Model};
use medgnn::optim::{evaluate, train, AdamConfig, TrainConfig};

fn main() -> medgnn::Result<()> {
    let words = parse_function_words(DEFAULT_FUNCTION_WORDS);
    let texts = synthetic_corpus(&words, &SyntheticCorpusParams {
        words_per_text: 10_000,
        seed: 4,
        ..SyntheticCorpusParams::default()
    });
    let mut corpus = Corpus::new();
    for (author, docs) in &texts {
        for doc in docs {
            corpus.add_text(author, doc);
        }
    }

    let spec = WanSpec::new(words, 10, false)?;
    let data = authorship_round(&corpus, &spec, &AuthorshipParams {
        target: "author_a".into(),
        excerpt_words: 1000,
        train_fraction: 0.8,
        seed: 0,
    })?;
    println!(
        "word adjacency network: {} nodes, {} arcs; {} train / {} test excerpts",
        data.wan.n_nodes(),
        data.wan.edges().len(),
        data.train.len(),
        data.test.len()
    );

    let activation = Activation::Relu;
    let ctx = GraphContext::from_graph(&data.wan, activation.max_hop(), Direction::In, DEFAULT_TOL)?;
    let arch = Architecture {
        nodes: data.wan.n_nodes(),
        features_in: 1,
        filters: 32,
        taps: 5,
        classes: 2,
        activation,
    };
    let mut model = Model::new(arch, Arc::new(ctx), 0)?;
    let cfg = TrainConfig {
        epochs: 10,
        batch_size: 20,
        adam: AdamConfig {
            learning_rate: 0.01,
            ..AdamConfig::default()
        },
        seed: 0,
        validation_fraction: None,
    };
    train(&mut model, &data.train, &cfg)?;
    let test = evaluate(&model, &data.test)?;
    println!("test accuracy {:.1}% (loss {:.4})", 100.0 * test.accuracy, test.loss);
    Ok(())
}
