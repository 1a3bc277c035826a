//! Koszul resultant matrices for square and overdetermined 2-bilinear systems.
//!
//! The crate builds the matrix of the first Weyman differential for systems of type
//! `(n_x, n_y, n_z; r, s)`, evaluates resultants as exact determinants and solves square
//! systems through the eigen-decomposition of a Schur complement of that matrix.
//!
//! ```
//! use koszul_core::{fixtures, koszul, weyman, SystemType};
//!
//! let t = SystemType::new(1, 1, 1, 2, 1).unwrap();
//! assert_eq!(weyman::mu(&t).unwrap(), 10);
//! let m = koszul::assemble_delta1(&t).unwrap();
//! assert_eq!(m.size(), 10);
//! let sys = fixtures::example_system();
//! let report = koszul_core::solver::solve_2bilinear(&sys.without_f0(), &Default::default()).unwrap();
//! assert_eq!(report.solutions.len(), 2);
//! ```

pub mod error;
pub mod field;
pub mod fixtures;
pub mod io;
pub mod koszul;
pub mod linalg;
pub mod multihomo;
pub mod oracle;
pub mod solver;
pub mod weyman;

pub use error::{Error, Result};
pub use field::{ComplexFloat, Field, FieldSpec, PrimeField, Rationals};
pub use koszul::{KoszulBasisElement, SymbolicEntry, SymbolicResultantMatrix, ThetaPartition};
pub use linalg::Matrix;
pub use multihomo::{
    BilinearSystem, Block, CoordinateChange, Exponent, MHPoly, MultiDegree, ProjectiveSolution, SystemType,
};
pub use solver::{EigenPair, SolveOptions, SolveReport};
pub use weyman::{DegreeVector, TermTable};

/// Crate version reported in serialized output.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
