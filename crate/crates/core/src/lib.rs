//! Provenance-driven reuse of simulation experiments.
//!
//! A provenance graph of a simulation study is watched for activities that
//! produce simulation models. Reuse rules match those activities against
//! structural patterns, pick earlier experiments worth repeating, adapt their
//! canonical specifications to the new model, execute them on a backend and
//! append the resulting activity and entities to the graph.

pub mod adapt;
pub mod backends;
pub mod canonical_exp;
pub mod fixtures;
pub mod patterns;
pub mod pipeline;
pub mod prov_graph;
pub mod rules;
