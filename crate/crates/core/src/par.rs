//! Order-preserving data-parallel helpers.
//!
//! With the `parallel` feature (default) these run on rayon; without it they
//! are plain sequential loops. Results always come back in input order so
//! callers never observe scheduling.

/// How much parallelism a top-level run may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    Sequential,
    /// Use the ambient rayon pool.
    #[default]
    Ambient,
    /// Dedicated pool with this many worker threads.
    Threads(usize),
}

impl Parallelism {
    pub fn from_jobs(jobs: Option<usize>) -> Self {
        match jobs {
            None => Parallelism::Ambient,
            Some(0) | Some(1) => Parallelism::Sequential,
            Some(n) => Parallelism::Threads(n),
        }
    }

    /// Run `f` under this parallelism setting.
    pub fn install<R: Send>(self, f: impl FnOnce() -> R + Send) -> R {
        #[cfg(feature = "parallel")]
        {
            match self {
                Parallelism::Sequential => {
                    let pool = rayon::ThreadPoolBuilder::new()
                        .num_threads(1)
                        .build()
                        .expect("single-thread pool");
                    pool.install(f)
                }
                Parallelism::Ambient => f(),
                Parallelism::Threads(n) => {
                    let pool = rayon::ThreadPoolBuilder::new()
                        .num_threads(n)
                        .build()
                        .expect("thread pool");
                    pool.install(f)
                }
            }
        }
        #[cfg(not(feature = "parallel"))]
        {
            f()
        }
    }
}

pub fn map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

pub fn map_range<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// First index (in input order) whose item maps to `Some`.
pub fn find_first_map<T, U, F>(items: &[T], f: F) -> Option<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Option<U> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items
            .par_iter()
            .enumerate()
            .filter_map(|(i, t)| f(t).map(|u| (i, u)))
            .min_by_key(|(i, _)| *i)
            .map(|(_, u)| u)
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().find_map(f)
    }
}
