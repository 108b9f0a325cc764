//! Numerical efficient influence functions.
//!
//! A perturbation path `(1 - eps) P + eps H` toward a smoothed point mass is
//! projected onto a statistical model and the target functional is differenced
//! along the projected path. The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod diagnostics;
pub mod distributions;
pub mod engine;
pub mod error;
pub mod functionals;
pub mod longitudinal;
pub mod numerics;
pub mod oracles;
pub mod perturbation;
pub mod presets;
pub mod projection;
pub mod settings;
pub mod space;

mod math;

pub use distributions::{DensityModel, Family};
pub use engine::Engine;
pub use settings::Settings;
pub use error::{Error, Result};
pub use functionals::Functional;
pub use projection::ModelProjector;
pub use space::{ComponentSpec, SampleSpace};
