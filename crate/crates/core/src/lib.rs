//! Minimum controller counts for structural controllability via bipartite
//! matching, with random network models and asymptotic predictors.

pub mod asymptotics;
pub mod dynamics;
pub mod error;
pub mod gen;
pub mod graph;
pub mod ingest;
pub mod matching;
pub mod rng;

pub use error::{Error, Result};
pub use gen::{DegreeDist, GenSpec, Model};
pub use graph::{control_config, degree_histogram, validate_matching, BipartiteNet, ControlConfig, Matching, Side};
pub use matching::{
    brute_force_max, controllers, greedy, karp_sipser, max_matching, one_sided_karp_sipser, Algo, RunStats,
};
pub use dynamics::{integrate, OdeSpec, Trajectory};
pub use ingest::{parse_edge_list, EdgeListFile, Report};
