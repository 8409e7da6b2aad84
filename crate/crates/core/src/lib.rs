//! Variational ground states across a family of molecular Hamiltonians:
//! a Hamiltonian-alternating ansatz, exact sector-restricted references, and
//! quadratic-spline interpolation of optimized circuit parameters.

pub mod ansatz;
pub mod chem;
pub mod error;
pub mod experiment;
pub mod format;
pub mod interp;
pub mod opt;
pub mod oracle;
pub mod pauli;
pub mod sim;

pub use ansatz::{build_ha, build_he, AnsatzCircuit, AnsatzKind, TrotterOrder};
pub use chem::{HamiltonianSource, MolecularHamiltonian};
pub use error::{Error, Result};
pub use interp::{QuadraticSpline, TrainedModel};
pub use opt::{OptResult, OptimizerConfig};
pub use oracle::{ground_state, SectorSpec};
pub use pauli::{expectation, split, Pauli, PauliTerm, QubitHamiltonian};
pub use sim::StateVector;
