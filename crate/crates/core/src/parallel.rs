//! Data-parallel map over independent work units.
//!
//! With the `parallel` feature the work is spread over a rayon pool;
//! without it every [`Execution`] runs sequentially. Results always come
//! back in index order, so output never depends on the worker count.

use std::ops::Range;

#[cfg(feature = "parallel")]
use crate::error::Error;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Rayon's global pool.
    #[default]
    Parallel,
    /// A dedicated pool with a fixed worker count.
    ParallelWith {
        threads: usize,
    },
}

impl Execution {
    pub fn from_threads(threads: Option<usize>) -> Self {
        match threads {
            Some(1) => Execution::Sequential,
            Some(n) => Execution::ParallelWith { threads: n },
            None => Execution::Parallel,
        }
    }
}

pub struct Executor {
    mode: Execution,
    #[cfg(feature = "parallel")]
    pool: Option<rayon::ThreadPool>,
}

impl Executor {
    pub fn new(mode: Execution) -> Result<Self> {
        #[cfg(feature = "parallel")]
        {
            let pool = match mode {
                Execution::ParallelWith { threads } => Some(
                    rayon::ThreadPoolBuilder::new()
                        .num_threads(threads)
                        .build()
                        .map_err(|e| Error::ThreadPool(e.to_string()))?,
                ),
                _ => None,
            };
            Ok(Self { mode, pool })
        }
        #[cfg(not(feature = "parallel"))]
        Ok(Self { mode })
    }

    pub fn sequential() -> Self {
        Self {
            mode: Execution::Sequential,
            #[cfg(feature = "parallel")]
            pool: None,
        }
    }

    pub fn mode(&self) -> Execution {
        self.mode
    }

    /// `f(k)` for every `k` in `range`, in order.
    pub fn map_range<T, F>(&self, range: Range<u64>, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            match (&self.mode, &self.pool) {
                (Execution::Sequential, _) => range.map(f).collect(),
                (_, Some(pool)) => pool.install(|| range.into_par_iter().map(&f).collect()),
                (_, None) => range.into_par_iter().map(f).collect(),
            }
        }
        #[cfg(not(feature = "parallel"))]
        {
            range.map(f).collect()
        }
    }

    /// `f(item)` for every item, in order.
    pub fn map_slice<I, T, F>(&self, items: &[I], f: F) -> Vec<T>
    where
        I: Sync,
        T: Send,
        F: Fn(&I) -> T + Sync + Send,
    {
        self.map_range(0..items.len() as u64, |k| f(&items[k as usize]))
    }
}

impl Default for Executor {
    fn default() -> Self {
        Self::new(Execution::Parallel).expect("global pool needs no construction")
    }
}
