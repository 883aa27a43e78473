//! Permutation-induced positive maps on matrix algebras, the entanglement
//! witnesses they define, bound entangled families built from permutation
//! cycles, and a handful of separability criteria.

pub mod criteria;
pub mod error;
pub mod io;
pub mod matops;
pub mod perm;
pub mod states;
pub mod sweep;
pub mod witness;

pub use criteria::{CriterionReport, Detection, Verdicts};
pub use error::{Error, Result};
pub use matops::{BipartiteMatrix, CMatrix, DensityMatrix, SquareComplexMatrix, Subsystem};
pub use num_complex::Complex64;
pub use perm::{CycleDecomposition, Permutation};
pub use states::FamilyWeights;
pub use sweep::SweepRow;
pub use witness::{Verdict, WitnessSpec};
