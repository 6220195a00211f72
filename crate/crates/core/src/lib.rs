//! Graph-based two-sample tests built on the cross-edge count.
//!
//! The statistic `T` counts directed edges of a geometric graph (K-NN or the
//! symmetrized Euclidean MST) that run from a sample-1 point to a sample-2
//! point of the pooled Poissonized sample. Small values indicate that the
//! two samples are separated. The crate provides the graphs, the statistic,
//! its asymptotic variances, Monte Carlo estimates of the graph constants
//! those variances need, and an experiment harness for power and CLT
//! studies.

// Negated comparisons below deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod error;
pub mod experiments;
pub mod functional;
pub mod geom;
pub mod mc;
pub mod sampling;
pub mod stats;

pub use constants::{estimate_constants, ConstantsConfig, FunctionalConstants, Symbol};
pub use error::{Error, Result};
pub use functional::{Functional, GraphFunctionalKind, LocalStats};
pub use geom::{DirectedGeometricGraph, Metric, PointCloud};
pub use mc::Estimate;
pub use sampling::{Density, LabeledSample, SeededRng};
pub use stats::{TestMethod, TestReport, VarianceBreakdown};
