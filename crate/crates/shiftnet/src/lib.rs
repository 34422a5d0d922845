//! Versatile shifts, their Gödel-coded nonlinear dynamical automata and the
//! rational-weight networks that implement them.

pub mod automata;
pub mod godel;
pub mod interactive;
pub mod nda;
pub mod observables;
pub mod random;
pub mod rann;
pub mod symbolic;

/// How batch work is scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Parallel,
    Sequential,
}

/// Maps `f` over `items`, in parallel when requested and the `parallel`
/// feature is enabled. Output order follows input order.
pub fn par_map<T, U, F>(exec: Execution, items: &[T], f: F) -> Vec<U>
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
