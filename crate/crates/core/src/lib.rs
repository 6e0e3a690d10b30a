//! Likedness centrality on social graphs, finite-difference stability of
//! random like-rate ensembles, and the analyses that relate stability to
//! network structure.

pub mod analysis;
pub mod ensemble;
pub mod error;
pub mod graph;
pub mod likedness;
pub mod rates;
pub mod stability;
pub mod stats;

pub use error::{Error, Result};
pub use graph::{generate_ba, generate_star, Graph, GraphMetrics};
pub use likedness::{
    eigenvector_centrality, likedness_centrality, CentralityVector, SolverOptions,
};
pub use rates::RateMatrix;
pub use stability::{
    classify_strategic, stability, GradientOptions, StabilityResult, StrategicTail,
};
