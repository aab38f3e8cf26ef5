pub mod classifier;
pub mod config;
pub mod export;
pub mod graph;
pub mod ingest;
pub mod io;
pub mod metrics;
pub mod pipeline;
pub mod relevance;
pub mod stats;
pub mod synth;
pub mod tokenize;
pub mod validation;
