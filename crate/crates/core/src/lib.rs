//! Numerical laboratory for penalized three-phase segregation energies.
//!
//! * [`field`] grid fields, discrete Dirichlet energy, norms
//! * [`geometry`] region labels, interface coordinates, junctions
//! * [`profiles`] transition profiles and cutoffs
//! * [`recovery`] recovery-sequence assembly with an explicit partition of unity
//! * [`energy`] penalized, constrained and junction-ball energies
//! * [`solver`] Euler–Lagrange solver for the penalized energy
//! * [`presets`] boundary data and limit configurations with known geometry
//! * [`quadrature`] Gauss–Legendre rules
//! * [`gamma`] ε-sweeps, slope fits and the scaling report
//! * [`cli`] configuration, commands and output files

pub mod error;
pub mod field;
pub mod geometry;
pub mod profiles;
pub mod quadrature;
pub mod recovery;
pub mod energy;
pub mod solver;
pub mod presets;
pub mod gamma;
pub mod cli;

pub use error::{Result, SegError};
