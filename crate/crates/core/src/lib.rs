pub mod eigen;
pub mod entanglement;
pub mod error;
pub mod fock;
pub mod quadrature;
pub mod states;
pub mod statistics;
pub mod wigner;

pub use error::{DpaError, Result};
pub use fock::{ComplexMatrix, FockCutoff, PhasePoint, C64};
pub use states::{DpaParams, EnergyBudget, Family, Stage, StateSpec, TwoModeDensity};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
