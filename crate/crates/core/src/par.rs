//! Execution switch for the data-parallel loops.
//!
//! With the `parallel` feature (default) [`Execution::Parallel`] runs on the
//! rayon global pool. Without it, both variants run sequentially. Results
//! never depend on the choice.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if is_parallel_available() {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

#[inline]
pub fn is_parallel_available() -> bool {
    cfg!(feature = "parallel")
}

/// Maps `f` over `0..count`, preserving index order in the output.
pub fn map_indexed<U, F>(exec: Execution, count: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..count).into_par_iter().map(f).collect()
        }
        _ => (0..count).map(f).collect(),
    }
}

/// Maps `f` over a slice, preserving order.
pub fn map_slice<T, U, F>(exec: Execution, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
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

/// Fills consecutive `chunk_len` pieces of `out` with `f(chunk_index, chunk)`.
pub fn for_each_chunk_mut<T, F>(exec: Execution, out: &mut [T], chunk_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    if chunk_len == 0 {
        return;
    }
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            out.par_chunks_mut(chunk_len)
                .enumerate()
                .for_each(|(i, chunk)| f(i, chunk));
        }
        _ => out
            .chunks_mut(chunk_len)
            .enumerate()
            .for_each(|(i, chunk)| f(i, chunk)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedules_agree() {
        let a = map_indexed(Execution::Sequential, 1000, |i| i * i);
        let b = map_indexed(Execution::Parallel, 1000, |i| i * i);
        assert_eq!(a, b);

        let mut x = vec![0usize; 103];
        let mut y = vec![0usize; 103];
        for_each_chunk_mut(Execution::Sequential, &mut x, 10, |i, c| {
            c.iter_mut().enumerate().for_each(|(j, v)| *v = i * 10 + j)
        });
        for_each_chunk_mut(Execution::Parallel, &mut y, 10, |i, c| {
            c.iter_mut().enumerate().for_each(|(j, v)| *v = i * 10 + j)
        });
        assert_eq!(x, y);
        assert_eq!(x, (0..103).collect::<Vec<_>>());
    }
}
