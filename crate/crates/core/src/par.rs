//! Data-parallel map with a sequential fallback.
//!
//! The expensive loops — exchange-relation checks over edge pairs, spectral
//! projectors over root tuples — are embarrassingly parallel over
//! independent exact computations.  With the `parallel` feature (default)
//! they fan out through rayon; without it, or when
//! [`Parallelism::Sequential`] is requested, they run in order.  Results
//! preserve input order either way, so outputs are bit-identical across
//! modes.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    /// Use all cores when the `parallel` feature is compiled in.
    #[default]
    Auto,
    /// Force single-threaded execution.
    Sequential,
}

#[cfg(feature = "parallel")]
pub fn map<T, U, F>(items: Vec<T>, mode: Parallelism, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    match mode {
        Parallelism::Auto => items.into_par_iter().map(f).collect(),
        Parallelism::Sequential => items.into_iter().map(f).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn map<T, U, F>(items: Vec<T>, _mode: Parallelism, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    items.into_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order_in_both_modes() {
        let squares = |mode| map((0..100i64).collect::<Vec<_>>(), mode, |x| x * x);
        let auto = squares(Parallelism::Auto);
        let seq = squares(Parallelism::Sequential);
        assert_eq!(auto, seq);
        assert_eq!(auto[7], 49);
    }
}
