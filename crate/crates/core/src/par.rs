//! Data-parallel helpers with a sequential fallback.
//!
//! Every helper preserves input order in its output, so callers can collect
//! results before serializing and get identical bytes in both modes.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Number of worker threads the helpers will use.
pub fn num_threads() -> usize {
    #[cfg(feature = "parallel")]
    return rayon::current_num_threads();

    #[cfg(not(feature = "parallel"))]
    return 1;
}

/// Order-preserving map over a slice.
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Send + Sync,
{
    #[cfg(feature = "parallel")]
    return items.par_iter().map(f).collect();

    #[cfg(not(feature = "parallel"))]
    return items.iter().map(f).collect();
}

/// Order-preserving fallible map; returns the first error in input order.
pub fn try_map<T, R, E, F>(items: &[T], f: F) -> Result<Vec<R>, E>
where
    T: Sync,
    R: Send,
    E: Send,
    F: Fn(&T) -> Result<R, E> + Send + Sync,
{
    map(items, f).into_iter().collect()
}

/// Maximum of `f` over the items, `init` for an empty slice.
///
/// `f64::max` is commutative and associative on non-NaN input, so the result
/// is independent of the reduction order.
pub fn max_f64<T, F>(items: &[T], init: f64, f: F) -> f64
where
    T: Sync,
    F: Fn(&T) -> f64 + Send + Sync,
{
    #[cfg(feature = "parallel")]
    return items.par_iter().map(f).reduce(|| init, f64::max);

    #[cfg(not(feature = "parallel"))]
    return items.iter().map(f).fold(init, f64::max);
}
