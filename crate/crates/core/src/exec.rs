//! Serial / data-parallel execution switch.
//!
//! Every reduction goes through fixed-size chunks whose partial results are
//! combined in index order, so `Serial` and `Parallel` produce bit-identical
//! output. Without the `parallel` feature, `Parallel` runs serially.

use serde::{Deserialize, Serialize};

/// Chunk length for reductions and row-blocked kernels.
pub const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExecMode {
    Serial,
    #[default]
    Parallel,
}

impl ExecMode {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == ExecMode::Parallel
    }
}

/// Maps `f` over `0..n` and collects in index order.
pub fn map_indexed<T, F>(mode: ExecMode, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = mode;
    (0..n).map(f).collect()
}

/// Fills `out[i] = f(i)` for every index.
pub fn fill_indexed<T, F>(mode: ExecMode, out: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        use rayon::prelude::*;
        out.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
            let base = c * CHUNK;
            for (k, slot) in chunk.iter_mut().enumerate() {
                *slot = f(base + k);
            }
        });
        return;
    }
    let _ = mode;
    for (i, slot) in out.iter_mut().enumerate() {
        *slot = f(i);
    }
}

/// Sums `f(i)` over `0..n` with a chunked, order-fixed reduction.
pub fn sum_indexed<F>(mode: ExecMode, n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let chunks = n.div_ceil(CHUNK);
    let partial = |c: usize| {
        let end = ((c + 1) * CHUNK).min(n);
        let mut s = 0.0;
        for i in c * CHUNK..end {
            s += f(i);
        }
        s
    };
    map_indexed(mode, chunks, partial).into_iter().sum()
}

/// Chunked reduction returning several sums at once.
pub fn sum_indexed_n<const K: usize, F>(mode: ExecMode, n: usize, f: F) -> [f64; K]
where
    F: Fn(usize) -> [f64; K] + Sync + Send,
{
    let chunks = n.div_ceil(CHUNK);
    let partial = |c: usize| {
        let end = ((c + 1) * CHUNK).min(n);
        let mut s = [0.0; K];
        for i in c * CHUNK..end {
            let v = f(i);
            for k in 0..K {
                s[k] += v[k];
            }
        }
        s
    };
    let mut total = [0.0; K];
    for part in map_indexed(mode, chunks, partial) {
        for k in 0..K {
            total[k] += part[k];
        }
    }
    total
}

pub fn dot(mode: ExecMode, a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    sum_indexed(mode, a.len(), |i| a[i] * b[i])
}

pub fn norm2(mode: ExecMode, a: &[f64]) -> f64 {
    dot(mode, a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serial_and_parallel_sums_are_bit_identical() {
        let n = 3 * CHUNK + 17;
        let f = |i: usize| ((i as f64) * 0.37).sin() / (1.0 + i as f64);
        let s = sum_indexed(ExecMode::Serial, n, f);
        let p = sum_indexed(ExecMode::Parallel, n, f);
        assert_eq!(s.to_bits(), p.to_bits());
    }

    #[test]
    fn map_keeps_index_order() {
        let v = map_indexed(ExecMode::Parallel, 10_000, |i| i * 2);
        assert!(v.iter().enumerate().all(|(i, &x)| x == 2 * i));
    }
}
