//! Deterministic Hunt processes on the real line.
//!
//! A process is described by a [`structure::Structure`]: an ordered
//! decomposition of the line into domains on which trajectories increase,
//! decrease or stay put, each monotone domain carrying a generating path
//! `path` with `X_t^x = path(t + path^{-1}(x))`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod gallery;
pub mod par;
pub mod paths;
pub mod process;
pub mod report;
pub mod specdsl;
pub mod structure;

pub use par::Execution;
pub use report::{PropertyReport, Verdict, Witness};
