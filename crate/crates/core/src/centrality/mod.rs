//! Weighted kNN digraph and stationary-probability centrality.

pub mod digraph;
pub mod knn;
pub mod stationary;

pub use digraph::{build_digraph, build_digraph_from_knn, calibrate_sigma, edge_weight, Edge, WeightedDigraph};
pub use knn::{default_k, pairwise_knn, squared_distance, KnnTable};
pub use stationary::{stationary_centrality, CentralityRanking, ChainVariant, PowerIterationOptions, RankEntry};
