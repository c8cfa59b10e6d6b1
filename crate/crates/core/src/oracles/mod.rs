//! Reference solutions: the closed form of the second-order equation, the
//! semi-analytic solution of the third-order equation, and exact solutions of
//! the constant-coefficient Schwarzian equation.

pub mod implicit;
pub mod quadrature;
pub mod schwarz;
pub mod second_order;

pub use implicit::{solve_f, ImplicitBranch, ThirdOrderImplicit};
pub use schwarz::SchwarzExact;
pub use second_order::{exact_second_order, Branch, SecondOrderExact};
