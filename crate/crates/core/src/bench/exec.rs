//! Execution of independent experiment cells.

/// How independent cells are scheduled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Execution {
    /// Rayon worker pool; sequential when the `parallel` feature is off.
    #[default]
    Parallel,
    Sequential,
}

/// `items.map(f)` with output order equal to input order regardless of
/// scheduling.
pub fn map_cells<T, R, F>(items: &[T], exec: Execution, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}
