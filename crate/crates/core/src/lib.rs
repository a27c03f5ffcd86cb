//! Safe-route planning over road networks whose segment collision risk is
//! estimated by a discrete Bayesian network.
//!
//! The pipeline learns a network from categorical accident records
//! ([`learn`]), infers each road segment's collision probability from its
//! static attributes and current dynamic evidence ([`infer`]), and finds the
//! route whose product of segment safety probabilities is largest
//! ([`route`]).

pub mod bn;
pub mod infer;
pub mod ingest;
pub mod learn;
pub mod route;

pub use bn::{BayesianNetwork, BnError, Cpt, DagStructure, Dataset, Record, Schema, VariableSpec};
pub use infer::{Evidence, InferError, MarginalDistribution};
pub use route::{RoadGraph, Route, RouteError, SegmentState};
