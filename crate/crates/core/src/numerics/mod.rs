//! Deterministic numerical kernels: quadrature, root finding, Newton
//! maximization and Richardson extrapolation.

mod linalg;
mod newton;
mod quadrature;
mod richardson;
mod root;
mod sum;

pub use linalg::cholesky_solve;
pub use newton::{newton_maximize, NewtonReport, NewtonSettings};
pub use quadrature::{for_each_node, gauss_legendre, integrate, Axis, ProductRule, QuadratureSettings};
pub use richardson::{richardson_derivative, try_richardson_derivative};
pub use root::{find_root, scan_sign_changes, RootBracket, RootReport, SignScan};
pub use sum::NeumaierSum;
