//! Data-parallel helpers. With the `parallel` feature the loops run on the
//! rayon pool; without it they fall back to plain sequential iteration.
//! Results never depend on the execution order: every helper here either
//! writes disjoint chunks or collects in input order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Apply `f` to consecutive chunks of length `len`, handing each worker its
/// own scratch value built by `init`.
pub fn for_each_chunk<T, S, I, F>(data: &mut [T], len: usize, init: I, f: F)
where
    T: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        data.par_chunks_mut(len).for_each_init(init, |s, c| f(s, c));
    }
    #[cfg(not(feature = "parallel"))]
    {
        let mut s = init();
        for c in data.chunks_mut(len) {
            f(&mut s, c);
        }
    }
}

/// Apply `f(index, &mut item)` to every element.
pub fn for_each_indexed<T, F>(data: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        data.par_iter_mut().enumerate().for_each(|(i, x)| f(i, x));
    }
    #[cfg(not(feature = "parallel"))]
    {
        for (i, x) in data.iter_mut().enumerate() {
            f(i, x);
        }
    }
}

/// Map over a slice, preserving order.
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Whether this build dispatches to the rayon pool.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
