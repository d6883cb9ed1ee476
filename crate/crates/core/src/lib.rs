//! Low-rank solvers for large-scale Lyapunov and Sylvester equations.
//!
//! The Lyapunov solver treats the time-dependent Gramian as the solution of the
//! system `P' = h hᴴ`, `h' = A h` and advances it with Runge-Kutta steps whose
//! Butcher tableaus keep the Lyapunov residual in the factored form
//! `A P_j + P_j Aᵀ + B Bᵀ = h_j h_jᴴ`. The residual norm is therefore available
//! for free at every step. One-stage tableaus reproduce the low-rank ADI
//! iteration, which is provided in [`adi_ref`] as an independent reference.
//!
//! Module map:
//! * [`tableau`]: Butcher tableaus, the residual-preservation condition, stability functions.
//! * [`operator`]: the matrix access abstraction (products and shifted solves).
//! * [`lyapunov`]: s-stage, one-stage and realified double-step iterations.
//! * [`sylvester`]: the one-stage Sylvester iteration with factors `Ẑ Γ Z̆ᴴ`.
//! * [`adi_ref`]: the residual-based low-rank ADI iteration.
//! * [`shifts`]: exact, heuristic and user shift sets.
//! * [`oracle`]: dense reference solvers used for verification.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adi_ref;
pub mod linalg;
pub mod lyapunov;
pub mod operator;
pub mod oracle;
pub mod problems;
pub mod shifts;
pub mod sylvester;
pub mod tableau;

pub use linalg::{CMat, RMat, C64};
pub use lyapunov::{GramianState, LyapunovError, SolverConfig};
pub use operator::{CsrMatrix, DenseOperator, Operator, OperatorError, SparseOperator};
pub use shifts::{ShiftSet, ShiftSource};
pub use sylvester::{SylvesterShiftPair, SylvesterState};
pub use tableau::{ButcherTableau, RealPairTransform, TableauDefect};
