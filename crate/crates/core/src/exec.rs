//! Execution strategy for the data-parallel inner loops (assignment
//! enumeration, error-pattern enumeration, solver restarts).
//!
//! Work is always cut into fixed-size chunks and partial results are returned
//! in chunk order, so reductions see the same sequence of partials whatever
//! the thread count. That keeps floating-point sums and tie-breaks
//! byte-identical between [`Exec::Sequential`] and [`Exec::Parallel`].

use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Default chunk length for range splitting.
pub const DEFAULT_CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    /// Uses rayon when the `parallel` feature is enabled, otherwise runs
    /// sequentially.
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    /// Maps `f` over `0..n`, preserving order.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Splits `0..n` into consecutive chunks of `chunk` items and maps `f`
    /// over the chunk ranges. Results come back in range order.
    pub fn map_chunks<T, F>(self, n: usize, chunk: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(Range<usize>) -> T + Sync + Send,
    {
        let chunk = chunk.max(1);
        let count = n.div_ceil(chunk);
        self.map(count, |i| f(i * chunk..((i + 1) * chunk).min(n)))
    }
}

/// Generator for one sample, iteration or restart: every index gets its own
/// ChaCha stream under the same seed, so results do not depend on which
/// thread draws them.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunks_cover_range_in_order() {
        for exec in [Exec::Sequential, Exec::Parallel] {
            let parts = exec.map_chunks(10, 3, |r| r);
            assert_eq!(parts, vec![0..3, 3..6, 6..9, 9..10]);
            assert!(exec.map_chunks(0, 3, |r| r).is_empty());
        }
    }

    #[test]
    fn float_sums_match_across_strategies() {
        let f = |r: Range<usize>| r.map(|i| 1.0 / (i as f64 + 1.0)).sum::<f64>();
        let a: f64 = Exec::Sequential.map_chunks(100_000, 1000, f).into_iter().sum();
        let b: f64 = Exec::Parallel.map_chunks(100_000, 1000, f).into_iter().sum();
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
