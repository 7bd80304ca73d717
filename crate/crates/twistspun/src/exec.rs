//! Execution strategy for the embarrassingly parallel stages of the
//! pipeline (triangle-pair intersection, per-frame slicing, candidate
//! projection search).
//!
//! Every parallel loop in the crate goes through [`ExecMode`], which maps
//! over inputs either with rayon or with a plain sequential iterator. Both
//! paths collect results in input order, so the output of a run is
//! identical regardless of mode — parallelism never becomes a source of
//! nondeterminism.
//!
//! When the crate is built without the `parallel` feature the rayon
//! dependency disappears entirely and [`ExecMode::Parallel`] quietly
//! degrades to the sequential path.

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// How data-parallel stages execute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecMode {
    /// Use a rayon thread pool when the `parallel` feature is enabled;
    /// otherwise identical to [`ExecMode::Sequential`].
    #[default]
    Parallel,
    /// Single-threaded reference path.
    Sequential,
}

impl ExecMode {
    /// Maps `f` over `items`, preserving input order in the output.
    pub fn map<T, U, F>(self, items: &[T], f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> U + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            ExecMode::Parallel => items.par_iter().map(f).collect(),
            #[cfg(not(feature = "parallel"))]
            ExecMode::Parallel => items.iter().map(f).collect(),
            ExecMode::Sequential => items.iter().map(f).collect(),
        }
    }

    /// Maps `f` over `items` and concatenates the per-item result vectors
    /// in input order.
    pub fn flat_map<T, U, F>(self, items: &[T], f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> Vec<U> + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            ExecMode::Parallel => items.par_iter().flat_map_iter(f).collect(),
            #[cfg(not(feature = "parallel"))]
            ExecMode::Parallel => items.iter().flat_map(f).collect(),
            ExecMode::Sequential => items.iter().flat_map(f).collect(),
        }
    }

    /// Maps `f` over the index range `0..n`, preserving order.
    pub fn map_range<U, F>(self, n: usize, f: F) -> Vec<U>
    where
        U: Send,
        F: Fn(usize) -> U + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            ExecMode::Parallel => (0..n).into_par_iter().map(f).collect(),
            #[cfg(not(feature = "parallel"))]
            ExecMode::Parallel => (0..n).map(f).collect(),
            ExecMode::Sequential => (0..n).map(f).collect(),
        }
    }
}
