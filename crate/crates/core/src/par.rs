//! Fixed-size chunking over independent trajectories.
//!
//! Results come back in chunk order, so reductions over them are bitwise
//! identical regardless of the number of worker threads.

pub(crate) const CHUNK: usize = 2048;

#[cfg(feature = "parallel")]
pub(crate) fn map_chunks_mut<T, R, F>(items: &mut [T], f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(&mut [T]) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.par_chunks_mut(CHUNK).map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_chunks_mut<T, R, F>(items: &mut [T], f: F) -> Vec<R>
where
    F: Fn(&mut [T]) -> R,
{
    items.chunks_mut(CHUNK).map(f).collect()
}

#[cfg(feature = "parallel")]
pub(crate) fn map_chunks<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&[T]) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.par_chunks(CHUNK).map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_chunks<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&[T]) -> R,
{
    items.chunks(CHUNK).map(f).collect()
}
