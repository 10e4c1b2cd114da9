//! Data-parallel building blocks with a sequential fallback.
//!
//! All helpers split work into fixed-size chunks and combine partial
//! results in chunk order, so floating-point reductions give the same
//! bits for any rayon worker count and for the sequential build.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Rows per work item for row-level loops.
pub const ROW_CHUNK: usize = 1024;

/// Map over items, preserving order.
#[cfg(feature = "parallel")]
pub fn map_ordered<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_ordered<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    items.iter().map(f).collect()
}

/// Map over index ranges `[k*chunk, min((k+1)*chunk, n))`, collecting
/// per-chunk results in chunk order. Callers fold the partials
/// sequentially, which pins the floating-point summation order.
#[cfg(feature = "parallel")]
pub fn map_index_chunks<R: Send>(
    n: usize,
    chunk: usize,
    f: impl Fn(std::ops::Range<usize>) -> R + Sync + Send,
) -> Vec<R> {
    let n_chunks = n.div_ceil(chunk);
    (0..n_chunks)
        .into_par_iter()
        .map(|k| f(k * chunk..((k + 1) * chunk).min(n)))
        .collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_index_chunks<R: Send>(
    n: usize,
    chunk: usize,
    f: impl Fn(std::ops::Range<usize>) -> R + Sync + Send,
) -> Vec<R> {
    let n_chunks = n.div_ceil(chunk);
    (0..n_chunks)
        .map(|k| f(k * chunk..((k + 1) * chunk).min(n)))
        .collect()
}

/// Split a flat row-major buffer into row chunks and fill each in
/// parallel. `f` receives the first row index of the chunk.
#[cfg(feature = "parallel")]
pub fn fill_row_chunks<T: Send>(
    data: &mut [T],
    row_width: usize,
    rows_per_chunk: usize,
    f: impl Fn(usize, &mut [T]) + Sync + Send,
) {
    data.par_chunks_mut(row_width * rows_per_chunk)
        .enumerate()
        .for_each(|(k, chunk)| f(k * rows_per_chunk, chunk));
}

#[cfg(not(feature = "parallel"))]
pub fn fill_row_chunks<T: Send>(
    data: &mut [T],
    row_width: usize,
    rows_per_chunk: usize,
    f: impl Fn(usize, &mut [T]) + Sync + Send,
) {
    data.chunks_mut(row_width * rows_per_chunk)
        .enumerate()
        .for_each(|(k, chunk)| f(k * rows_per_chunk, chunk));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunked_sum_matches_plain_loop_order() {
        let n = 10_000;
        let partials = map_index_chunks(n, 512, |range| {
            let mut s = 0.0f64;
            for i in range {
                s += (i as f64).sqrt();
            }
            s
        });
        let total: f64 = partials.iter().sum();
        let partials2 = map_index_chunks(n, 512, |range| {
            let mut s = 0.0f64;
            for i in range {
                s += (i as f64).sqrt();
            }
            s
        });
        let total2: f64 = partials2.iter().sum();
        assert_eq!(total.to_bits(), total2.to_bits());
    }
}
