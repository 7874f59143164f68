//! Causal structure estimation from pooled observational and interventional
//! data: perturbation graphs, transitive-reduction pruning and conditional
//! invariant causal prediction over linear Gaussian models.

pub mod data;
pub mod bench;
pub mod error;
pub mod graph;
pub mod icp;
pub mod io;
pub mod sem;
pub mod perturb;
pub mod stats;

pub use data::{DataContext, Dataset};
pub use error::{Error, Result};
pub use graph::{Dag, DiGraph, Node, NodeSet};
pub use sem::{ContextSpec, GaussianMoments, Intervention, InterventionKind, LinearSem};
