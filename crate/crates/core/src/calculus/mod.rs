//! Numerical kernel: quadrature, root finding, monotone inversion and
//! tabulated antiderivatives.

pub mod cumulative;
pub mod quadrature;
pub mod roots;

pub use cumulative::{Anchor, Cumulative};
pub use quadrature::{integrate, integrate_with, QuadOptions, QuadratureError, QuadratureResult, DEFAULT_TOL};
pub use roots::{find_root, monotone_inverse, Direction, MonotoneInverse, RootError};
