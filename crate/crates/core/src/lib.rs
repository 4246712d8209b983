//! Levi-Civita field arithmetic with non-standard analysis on top: standard
//! parts, infinitesimal-probe calculus, monad topology, finite filters and the
//! star transform of bounded propositions.

pub mod calculus;
pub mod coeff;
pub mod context;
pub mod decimal;
pub mod error;
pub mod expr;
pub mod filters;
pub mod functions;
pub mod number;
pub mod topology;
pub mod transfer;
pub mod value;

pub use calculus::{Analyzer, DerivativeOutcome, LimitOutcome, LimitTarget, Mode, ProbeCatalog, Side, Verdict, Witness};
pub use coeff::{Backend, Coeff};
pub use context::Context;
pub use decimal::parse_rational;
pub use error::{Error, Result};
pub use expr::{Env, Expr, Var};
pub use functions::Func;
pub use number::{Bound, Exponent, ExtReal, LcNumber, NumberClass, Sign};
pub use topology::{star_member, IntervalSet, SetReport};
pub use value::{EscapeToken, LcValue, Magnitude, Scale};
