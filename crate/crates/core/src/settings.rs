//! Numerical settings shared by projections and the engine.

use crate::numerics::{NewtonSettings, QuadratureSettings};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub quadrature: QuadratureSettings,
    /// Relative tolerance for the mean-constraint multiplier.
    pub root_tol: f64,
    pub newton: NewtonSettings,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            quadrature: QuadratureSettings::default(),
            root_tol: 1e-13,
            newton: NewtonSettings::default(),
        }
    }
}

impl Settings {
    pub fn validate(&self) -> crate::Result<()> {
        self.quadrature.validate()?;
        if !(self.root_tol > 0.0 && self.root_tol < 1.0) {
            return Err(crate::Error::InvalidInput(alloc::format!(
                "root tolerance must lie in (0, 1), got {}",
                self.root_tol
            )));
        }
        if self.newton.max_iter == 0 || !(self.newton.tol > 0.0) {
            return Err(crate::Error::InvalidInput(alloc::string::String::from(
                "newton settings need max_iter >= 1 and a positive tolerance",
            )));
        }
        Ok(())
    }
}
