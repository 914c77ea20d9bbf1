//! Discrete-event simulation of microservice chains scheduled across a
//! geo-distributed platform, either by a central optimizer or by per-replica
//! sidecars reading an eventually-consistent metrics store.
//!
//! The pieces compose bottom-up: a [`platform::Platform`] describes hosts,
//! links and carbon; [`workload`] places replicas and draws arrivals;
//! [`engine::run`] executes requests under one of the two [`sched`]
//! policies and returns one [`engine::ExecutionRecord`] per request;
//! [`bench`] turns records into summaries, CSV and plots.

pub mod bench;
pub mod engine;
pub mod error;
pub mod metadata;
pub mod platform;
pub mod sched;
pub mod workload;

pub use error::{Error, Result};
