//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) large index ranges are split across
//! the rayon pool; otherwise everything runs on the calling thread. Every
//! helper writes each output slot from exactly one closure call and leaves
//! reductions to the caller, so results are bit-identical either way.

/// Ranges shorter than this are always processed sequentially.
pub const MIN_PARALLEL_LEN: usize = 256;

/// Fills `out` in chunks of `chunk` elements: `f(i, &mut out[i*chunk..(i+1)*chunk])`.
pub fn fill_chunks<T, F>(out: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Send + Sync,
{
    assert!(chunk > 0 && out.len() % chunk == 0);
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if out.len() / chunk >= MIN_PARALLEL_LEN {
            out.par_chunks_mut(chunk)
                .enumerate()
                .for_each(|(i, c)| f(i, c));
            return;
        }
    }
    out.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
}

/// Maps `0..len` to a vector, in index order.
pub fn map_range<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if len >= MIN_PARALLEL_LEN {
            return (0..len).into_par_iter().map(f).collect();
        }
    }
    (0..len).map(f).collect()
}

/// Maps a small number of coarse-grained jobs (players, trials) to a vector.
pub fn map_jobs<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if len > 1 {
            return (0..len).into_par_iter().map(f).collect();
        }
    }
    (0..len).map(f).collect()
}

/// Number of worker threads the parallel helpers can use.
pub fn threads() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}
