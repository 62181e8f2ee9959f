//! Phase-space quantum mechanics on a discrete lattice.
//!
//! Wavefunctions, Wigner functions, characteristic kernels and tomograms on a
//! shared [`PhaseGrid`], with three independent time-evolution routes that
//! are cross-checked against each other.
//!
//! With the default `parallel` feature, row-wise kernels run on the rayon
//! pool. Reductions are always performed in index order, so results do not
//! depend on the worker count.

pub mod dynamics;
pub mod error;
pub mod grid;
pub mod io;
pub mod observables;
mod par;
mod spectral;
pub mod states;
pub mod tomography;
pub mod wigner;

pub use dynamics::{cross_validate, EvolutionReport, Potential};
pub use error::{Error, ErrorKind, Result};
pub use grid::PhaseGrid;
pub use states::Wavefunction;
pub use tomography::Tomogram;
pub use wigner::{CharacteristicZ, WignerFunction};
