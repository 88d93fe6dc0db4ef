//! Data-parallel execution switch.
//!
//! Work items are indexed `0..n` and produce values collected in index order,
//! so the parallel and sequential paths return identical results as long as
//! each item draws from its own RNG stream.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Exec {
    Sequential,
    /// Uses rayon when the `parallel` feature is enabled, otherwise
    /// behaves exactly like `Sequential`.
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
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => (0..n).into_par_iter().map(f).collect(),
            _ => (0..n).map(f).collect(),
        }
    }

    /// Like [`Exec::map`] but with per-worker scratch state built by `init`.
    pub fn map_init<S, T, I, F>(self, n: usize, init: I, f: F) -> Vec<T>
    where
        T: Send,
        I: Fn() -> S + Sync + Send,
        F: Fn(&mut S, usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => (0..n).into_par_iter().map_init(init, f).collect(),
            _ => {
                let mut scratch = init();
                (0..n).map(|i| f(&mut scratch, i)).collect()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_paths_agree() {
        let f = |i: usize| (i * i) as u64 ^ 0xabc;
        assert_eq!(Exec::Sequential.map(1000, f), Exec::Parallel.map(1000, f));
        let g = |buf: &mut Vec<usize>, i: usize| {
            buf.clear();
            buf.extend(0..i % 7);
            buf.iter().sum::<usize>()
        };
        assert_eq!(
            Exec::Sequential.map_init(500, Vec::new, g),
            Exec::Parallel.map_init(500, Vec::new, g)
        );
    }
}
