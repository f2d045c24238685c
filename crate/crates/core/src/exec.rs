//! Execution strategy for the data-parallel loops in this crate.
//!
//! With the `parallel` feature (on by default) [`ExecMode::Parallel`] runs the
//! loop on rayon; without it every mode falls back to a plain iterator. Output
//! order always follows input order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum ExecMode {
    Sequential,
    #[default]
    Parallel,
}

impl ExecMode {
    /// True when this mode will actually fan out across threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == ExecMode::Parallel
    }
}

pub(crate) fn map_slice<T, R, F>(items: &[T], mode: ExecMode, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = mode;
    items.iter().map(f).collect()
}

pub(crate) fn map_range<R, F>(n: usize, mode: ExecMode, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = mode;
    (0..n).map(f).collect()
}

/// Fill `out` in row-sized chunks, possibly in parallel.
pub(crate) fn fill_rows<F>(out: &mut [u8], row_len: usize, mode: ExecMode, f: F)
where
    F: Fn(usize, &mut [u8]) + Sync + Send,
{
    if row_len == 0 {
        return;
    }
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        out.par_chunks_mut(row_len)
            .enumerate()
            .for_each(|(row, buf)| f(row, buf));
        return;
    }
    let _ = mode;
    out.chunks_mut(row_len)
        .enumerate()
        .for_each(|(row, buf)| f(row, buf));
}

/// Run `f` over `items` with at most `limit` in flight. Results keep input order.
pub(crate) fn map_bounded<T, R, F>(items: &[T], limit: usize, mode: ExecMode, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() && limit > 1 && items.len() > 1 {
        match rayon::ThreadPoolBuilder::new()
            .num_threads(limit)
            .thread_name(|i| format!("uavsim-fetch-{i}"))
            .build()
        {
            Ok(pool) => return pool.install(|| items.par_iter().map(&f).collect()),
            Err(e) => log::warn!("could not build fetch pool ({e}), running sequentially"),
        }
    }
    let _ = (limit, mode);
    items.iter().map(f).collect()
}
