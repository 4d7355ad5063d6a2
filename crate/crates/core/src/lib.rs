//! Exact covering and matching invariants of d-interval hypergraphs, exact
//! partition predicates, and constructive covering pipelines that emit
//! verifiable certificates.

pub mod covering;
pub mod error;
pub mod families;
pub mod gallai1d;
pub mod geometry;
pub mod invariants;
pub mod io;
pub mod kkm;
pub mod lp;
pub mod partitions;
pub mod rational;

pub use error::{Error, Result};
pub use geometry::{
    cuts_from_point, point_from_cuts, CellBounds, CutSystem, DCellIndex, DEdge,
    DIntervalHypergraph, Interval, PredicateMode, ProductPoint,
};
pub use covering::{theorem4_pipeline, theorem5_pipeline, CoverCertificate, PipelineOptions};
pub use families::FamilySpec;
pub use invariants::{FiniteHypergraph, IntegerValue, SearchLimits};
pub use kkm::{balanced_point_search, BalanceConfig, BalancedPoint};
pub use partitions::{exhaustive_partition_search, premise_check, PartitionCertificate};
pub use rational::Rational;
