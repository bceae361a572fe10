//! Data-parallel map facade.
//!
//! Heavy loops (parameter sweeps, randomized-benchmarking seeds, optimizer
//! multistarts) funnel through `par_map`. With the default `parallel`
//! feature this fans out over rayon; without it the same call is a plain
//! sequential map, so downstream code never branches on the feature.
//! `seq_map` is always available so benches can compare both paths inside
//! one binary. Both preserve input order, which keeps outputs identical
//! across thread counts.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub fn seq_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn par_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    items.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn par_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    seq_map(items, f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn par_and_seq_agree_and_preserve_order() {
        let items: Vec<u64> = (0..64).collect();
        let a = par_map(items.clone(), |x| x * x + 1);
        let b = seq_map(items, |x| x * x + 1);
        assert_eq!(a, b);
        assert_eq!(a[10], 101);
    }
}
