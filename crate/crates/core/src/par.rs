//! Order-preserving map over independent scenarios.
//!
//! With the `parallel` feature the work runs on a rayon pool sized by the
//! caller; without it, or with one worker, everything runs on the calling
//! thread. Results come back in input order either way, so output never
//! depends on scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Worker count meaning "one per available core".
pub const ALL_CORES: usize = 0;

pub fn map_ordered<T, R, F>(items: &[T], workers: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if workers != 1 && items.len() > 1 {
            let mut builder = rayon::ThreadPoolBuilder::new();
            if workers != ALL_CORES {
                builder = builder.num_threads(workers);
            }
            if let Ok(pool) = builder.build() {
                return pool.install(|| items.par_iter().map(&f).collect());
            }
        }
    }
    let _ = workers;
    items.iter().map(f).collect()
}

/// Whether this build can spread work over threads.
pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let items: Vec<u64> = (0..200).collect();
        let seq = map_ordered(&items, 1, |x| x * x);
        let par = map_ordered(&items, 4, |x| x * x);
        assert_eq!(seq, par);
        assert_eq!(seq[17], 289);
    }
}
