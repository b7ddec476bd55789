//! Trotter error evaluation, interference diagnostics and bounds for
//! product-formula Hamiltonian simulation.

pub mod commutators;
pub mod dense;
pub mod error;
pub mod experiments;
pub mod interference;
pub mod models;
pub mod pauli;
pub mod product_formula;

pub use commutators::NormKind;
pub use error::{Error, Result};
pub use pauli::{PauliString, PauliSum, PauliTerm};
pub use product_formula::{GroupedHamiltonian, LeadingError, ProductFormula};
