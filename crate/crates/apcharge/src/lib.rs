//! Finitely additive charge spaces and the harmonic analysis built on them.
//!
//! The crate has three layers:
//!
//! * set-level machinery: fields of sets, charges, simple functions,
//!   distribution functions and their closed-form Lorentz norms
//!   ([`charge`], [`lorentz`]);
//! * completion-level machinery: Cauchy sequences of simple functions with
//!   certified limit diagnostics, and the concrete measure-space model of the
//!   finite/co-finite charge space ([`tm`], [`fefferman`]);
//! * line-level machinery: the shift-invariant density charge on ℝ, almost
//!   periodic trigonometric polynomials and their Besicovitch and Lorentz
//!   norms, and randomized verification campaigns for the Fourier-coefficient
//!   inequalities ([`density`], [`trigpoly`], [`verify`]).
//!
//! All values are immutable after construction and all operations are pure,
//! so everything here is safe to use from multiple threads.

pub mod charge;
pub mod density;
pub mod fefferman;
pub mod lorentz;
pub mod tm;
pub mod trigpoly;
pub mod verify;

mod quad;
mod rational;

pub use charge::{Charge, FieldOfSets, SetExpr, SimpleFunction, StepDistribution};
pub use lorentz::LorentzParams;
pub use tm::{LimitDiagnostic, SimpleFunctionSequence};
pub use trigpoly::TrigPolynomial;
