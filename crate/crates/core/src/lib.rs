//! Numerical laboratory for continued-fraction level sets.
//!
//! * [`cf`]: exact expansions, convergents, cylinders, digit statistics.
//! * [`growth`]: growth-sequence families, window exponents, and the
//!   necessary-condition classifier for full-dimensional level sets.
//! * [`dimension`]: pressure roots (cylinder sums and transfer-operator
//!   collocation), closed-form dimension evaluators, covering sums.
//! * [`constructions`]: pinned-word generators for the Cantor-type sets.
//! * [`verify`]: exact and randomized checkers for the interval inequalities.

pub mod cf;
pub mod constructions;
pub mod dimension;
pub mod error;
pub mod growth;
pub mod limit;
pub mod precise;
pub mod verify;

pub use cf::{convergents, cylinder, digit_stats, expand, gauss_step, ConvergentPair, Cylinder, DigitStats, Word};
pub use error::{Error, Gate, Result};
pub use limit::Limit;
