//! Row-parallel execution helpers.
//!
//! With the `parallel` feature (default) work is split across the rayon pool;
//! without it every policy runs sequentially. Results are identical either way
//! because each output element is computed by exactly one closure call.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How row-wise work is scheduled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Exec {
    Sequential,
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
    /// Whether this policy actually runs on the thread pool in this build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

/// Evaluates `f(i)` for `i in 0..n`.
pub fn map_range<T, F>(exec: Exec, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec == Exec::Parallel {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Fills `out` row by row; row `i` is `out[i*width..(i+1)*width]`.
pub fn fill_rows<F>(exec: Exec, out: &mut [f64], width: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    assert!(width > 0 && out.len() % width == 0);
    #[cfg(feature = "parallel")]
    if exec == Exec::Parallel {
        out.par_chunks_mut(width)
            .enumerate()
            .for_each(|(i, row)| f(i, row));
        return;
    }
    let _ = exec;
    for (i, row) in out.chunks_mut(width).enumerate() {
        f(i, row);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policies_agree() {
        let a = map_range(Exec::Sequential, 100, |i| (i as f64).sin());
        let b = map_range(Exec::Parallel, 100, |i| (i as f64).sin());
        assert_eq!(a, b);
        let mut r1 = vec![0.0; 40];
        let mut r2 = vec![0.0; 40];
        fill_rows(Exec::Sequential, &mut r1, 8, |i, row| {
            row.iter_mut().enumerate().for_each(|(j, v)| *v = (i * 8 + j) as f64)
        });
        fill_rows(Exec::Parallel, &mut r2, 8, |i, row| {
            row.iter_mut().enumerate().for_each(|(j, v)| *v = (i * 8 + j) as f64)
        });
        assert_eq!(r1, r2);
        assert_eq!(r1[17], 17.0);
    }
}
