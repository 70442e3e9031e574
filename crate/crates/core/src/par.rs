//! Deterministic parallel maps over node indices.

use rayon::prelude::*;

use crate::error::Result;

/// Evaluate `f` at every node in parallel; results keep node order and the
/// error reported is the one at the lowest failing node.
pub fn try_map_nodes<T: Send>(
    n: usize,
    f: impl Fn(usize) -> Result<T> + Sync + Send,
) -> Result<Vec<T>> {
    let results: Vec<Result<T>> = (0..n).into_par_iter().map(f).collect();
    results.into_iter().collect()
}

pub fn map_nodes<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    (0..n).into_par_iter().map(f).collect()
}
