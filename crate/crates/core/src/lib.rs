//! Motif convolution for attributed relational graphs (ARGs).
//!
//! The crate provides an approximate ARG matcher with a size-normalized
//! similarity score, unsupervised construction of a motif vocabulary,
//! per-node motif-similarity features, a logistic-regression head, and a
//! generator for a five-template synthetic classification benchmark.

pub mod bench;
pub mod classifier;
pub mod convolution;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod io;
pub mod kernel;
pub mod matching;
pub mod synthgen;
pub mod vocabulary;

pub use classifier::{evaluate, train_logreg, LogRegParams, LogisticModel};
pub use convolution::{
    convolve_dataset, motif_convolve_graph, motif_convolve_node, readout, FeatureMatrix, Readout,
    Standardizer,
};
pub use error::{Error, Result};
pub use experiment::{run_experiment, ExperimentConfig, ExperimentReport};
pub use graph::{k_hop_subgraph, ArgGraph, Edge};
pub use kernel::{CompatConfig, Kernel, KernelPreset};
pub use matching::{
    brute_force_match, graduated_assignment, greedy_hard_assignment, match_and_score,
    pairwise_similarity, similarity_score, HardAssignment, MatchParams, SoftAssignment,
};
pub use synthgen::{
    builtin_templates, generate_dataset, sample_graph, AttachPolicy, NoiseConfig, Template,
};
pub use vocabulary::{build_vocabulary, MotifVocabulary, VocabParams};
