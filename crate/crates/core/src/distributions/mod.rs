//! Dominated distributions on mixed product spaces.

mod bump;
mod factor;
mod family;
mod model;
mod sequential;

pub use bump::{make_bump, KernelBump};
pub use factor::{CondFactor, CustomFactor, Link, LinearPredictor, Term};
pub use family::Family;
pub use model::{density_eval, mix, mixture, rule_for, AxisHint, DensityModel, Descriptor};
pub use sequential::{sequential_joint, SequentialFactorization};

pub(crate) use model::{ratio_diff, ExpTilted, MeanTilted, Node};
