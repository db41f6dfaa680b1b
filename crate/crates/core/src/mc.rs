//! Block-summed Monte Carlo accumulators with delete-one-group jackknife
//! errors for smooth functions of means.

use crate::rng::{chunked, Rng, CHUNK};
use rayon::prelude::*;

/// Samples per accumulation block inside a chunk.
pub const BLOCK: usize = 128;
const _: () = assert!(CHUNK.is_multiple_of(BLOCK), "blocks tile chunks");
/// Jackknife groups (consecutive blocks are merged down to this many).
pub const GROUPS: usize = 32;

/// Per-block feature sums, in a thread-count independent order.
#[derive(Debug, Clone, PartialEq)]
pub struct Blocks {
    width: usize,
    sums: Vec<Vec<f64>>,
    counts: Vec<usize>,
    seed: u64,
}

/// Draws `total` samples; `add` adds one sample's `width` features into the
/// accumulator slice.
pub fn block_sums<F>(total: usize, seed: u64, width: usize, add: F) -> Blocks
where
    F: Fn(&mut Rng, &mut [f64]) + Sync,
{
    let per_chunk = chunked(total, seed, |rng, len, _| {
        let mut out = Vec::with_capacity(len.div_ceil(BLOCK));
        let mut done = 0;
        while done < len {
            let m = BLOCK.min(len - done);
            let mut acc = vec![0.0; width];
            for _ in 0..m {
                add(rng, &mut acc);
            }
            out.push((acc, m));
            done += m;
        }
        out
    });
    let mut sums = Vec::new();
    let mut counts = Vec::new();
    for chunk in per_chunk {
        for (s, c) in chunk {
            sums.push(s);
            counts.push(c);
        }
    }
    Blocks {
        width,
        sums,
        counts,
        seed,
    }
}

/// Block sums over an ordered list of precomputed samples.
pub fn block_map<T, F>(items: &[T], seed: u64, width: usize, add: F) -> Blocks
where
    T: Sync,
    F: Fn(&T, &mut [f64]) + Sync,
{
    let per_block: Vec<(Vec<f64>, usize)> = items
        .par_chunks(BLOCK)
        .map(|chunk| {
            let mut acc = vec![0.0; width];
            for it in chunk {
                add(it, &mut acc);
            }
            (acc, chunk.len())
        })
        .collect();
    let (sums, counts) = per_block.into_iter().unzip();
    Blocks {
        width,
        sums,
        counts,
        seed,
    }
}

impl Blocks {
    pub fn total_count(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Mean of every feature over all samples.
    pub fn means(&self) -> Vec<f64> {
        let n = self.total_count() as f64;
        let mut m = vec![0.0; self.width];
        for s in &self.sums {
            for (a, b) in m.iter_mut().zip(s) {
                *a += b;
            }
        }
        m.iter_mut().for_each(|v| *v /= n);
        m
    }

    fn groups(&self) -> Vec<(Vec<f64>, usize)> {
        let g = GROUPS.min(self.sums.len());
        let mut out: Vec<(Vec<f64>, usize)> = (0..g).map(|_| (vec![0.0; self.width], 0)).collect();
        let per = self.sums.len().div_ceil(g.max(1));
        for (i, (s, c)) in self.sums.iter().zip(&self.counts).enumerate() {
            let k = (i / per).min(g - 1);
            for (a, b) in out[k].0.iter_mut().zip(s) {
                *a += b;
            }
            out[k].1 += c;
        }
        out.retain(|(_, c)| *c > 0);
        out
    }

    /// `stat(means)` with a delete-one-group jackknife standard error.
    pub fn jackknife(&self, stat: impl Fn(&[f64]) -> f64) -> (f64, f64) {
        let full = stat(&self.means());
        let groups = self.groups();
        let g = groups.len();
        if g < 2 {
            return (full, f64::INFINITY);
        }
        let n = self.total_count() as f64;
        let mut total = vec![0.0; self.width];
        for (s, _) in &groups {
            for (a, b) in total.iter_mut().zip(s) {
                *a += b;
            }
        }
        let loo: Vec<f64> = groups
            .iter()
            .map(|(s, c)| {
                let m: Vec<f64> = total.iter().zip(s).map(|(t, x)| (t - x) / (n - *c as f64)).collect();
                stat(&m)
            })
            .collect();
        let mean = loo.iter().sum::<f64>() / g as f64;
        let var = loo.iter().map(|v| (v - mean).powi(2)).sum::<f64>() * (g - 1) as f64 / g as f64;
        (full, var.sqrt())
    }
}

/// Number of independent entries of a symmetric `n x n` matrix.
pub fn sym_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Adds `w · θθ^T` (upper triangle, row-major) into `out`.
pub fn add_outer(out: &mut [f64], theta: &[f64], w: f64) {
    let n = theta.len();
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            out[k] += w * theta[i] * theta[j];
            k += 1;
        }
    }
}

/// Rebuilds a symmetric matrix from its packed upper triangle times `scale`.
pub fn unpack_sym(packed: &[f64], n: usize, scale: f64) -> nalgebra::DMatrix<f64> {
    let mut m = nalgebra::DMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            m[(i, j)] = packed[k] * scale;
            m[(j, i)] = packed[k] * scale;
            k += 1;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    #[test]
    fn jackknife_of_a_mean_matches_the_standard_error() {
        let b = block_sums(50_000, 3, 1, |rng, acc| acc[0] += rng.random::<f64>());
        let (m, se) = b.jackknife(|m| m[0]);
        assert!((m - 0.5).abs() < 4.0 * se);
        let expect = (1.0f64 / 12.0 / 50_000.0).sqrt();
        assert!((se / expect - 1.0).abs() < 0.5, "{se} vs {expect}");
    }

    #[test]
    fn outer_packing_roundtrip() {
        let mut acc = vec![0.0; sym_len(3)];
        add_outer(&mut acc, &[1.0, 2.0, 3.0], 2.0);
        let m = unpack_sym(&acc, 3, 1.0);
        assert_eq!(m[(0, 2)], 6.0);
        assert_eq!(m[(2, 0)], 6.0);
        assert_eq!(m[(1, 1)], 8.0);
    }
}
