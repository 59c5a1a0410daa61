//! Datasets: diffusion-based source localization and authorship attribution
//! over word adjacency networks.

pub mod corpus;
mod dataset;
pub mod diffusion;
pub mod wan;

pub use corpus::{
    authorship_round, load_corpus, synthetic_corpus, write_corpus, AuthorshipData,
    AuthorshipParams, Corpus, SyntheticCorpusParams,
};
pub use dataset::{split, stratified_partition, Dataset, Sample};
pub use diffusion::{
    diffuse, generate_diffusion_dataset, top_degree_nodes, DiffusionGso, DiffusionParams,
};
pub use wan::{build_wan, excerpt_features, tokenize, WanSpec, DEFAULT_FUNCTION_WORDS};
