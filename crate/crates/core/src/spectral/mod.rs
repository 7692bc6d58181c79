//! Pseudo-spectral solver on a periodic box.

mod evolve;
mod field;
mod gevrey;
mod grid;

pub use evolve::{
    linear_evolve, semilinear_solve, BlowUp, LinearPropagator, Nonlinearity, NormRow,
    SemilinearConfig, Snapshot, Trajectory,
};
pub use field::{Field, Space};
pub use gevrey::{cutoff_chi, cutoff_chi_complement, default_gevrey_constant, gevrey_energy};
pub use grid::TorusGrid;
