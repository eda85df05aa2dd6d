//! Declarative vision pipelines: a JSON list of filters wired by named
//! slots, layered into batches of mutually independent filters, executed
//! batch by batch on a thread pool with per-filter frequency dividers.

mod exec;
mod spec;

pub use exec::{audit_timings, sleep_registry, Executor, FilterFn, FilterInputs, FilterTiming, FrameReport, Payload, Registry};
pub use spec::{compute_batches, parse_pipeline, BatchPlan, FilterSpec, PipelineSpec};

use thiserror::Error;

/// Pipeline of the robot's vision loop; stereo runs on every second frame.
pub const DEMO_PIPELINE_JSON: &str = include_str!("../../data/demo_pipeline.json");

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PipelineError {
    #[error("malformed pipeline document: {0}")]
    Json(String),
    #[error("dependency cycle: {}", .0.join(" -> "))]
    Cycle(Vec<String>),
    #[error("filter {filter} consumes unknown slot {slot:?}")]
    UnknownSlot { filter: String, slot: String },
    #[error("slot {slot:?} is produced by both {first} and {second}")]
    DuplicateProducer { slot: String, first: String, second: String },
    #[error("filter name {0:?} is used twice")]
    DuplicateName(String),
    #[error("filter {filter} both produces and consumes slot {slot:?}")]
    SelfLoop { filter: String, slot: String },
    #[error("no implementation registered for filter {0}")]
    MissingFilter(String),
    #[error("{0:?} is not a source slot")]
    UnknownSource(String),
    #[error("filter {filter} failed: {message}")]
    Filter { filter: String, message: String },
    #[error("invalid pipeline: {0}")]
    Invalid(String),
}

/// The bundled demo pipeline.
pub fn demo_pipeline() -> PipelineSpec {
    parse_pipeline(DEMO_PIPELINE_JSON).expect("bundled pipeline is valid")
}
