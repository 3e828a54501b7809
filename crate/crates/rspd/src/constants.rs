use crate::error::{Error, Result};

/// Problem constants the stage schedules are derived from.
///
/// The gradient bounds are worst-case norms over the operating region; the
/// theorem-derived iteration counts are only guarantees when they are true
/// bounds. [`crate::problem::estimate_grad_bounds`] provides probe-based
/// estimates when no analytic bound is available.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemConstants {
    /// Bound on the norm of primal stochastic subgradients (M).
    pub primal_grad_bound: f64,
    /// Bound on the norm of dual stochastic subgradients (B).
    pub dual_grad_bound: f64,
    /// Hölder constant of the smoothed loss aggregate's gradient (L).
    pub holder_constant: f64,
    /// Hölder exponent in [0, 1]; 1 means Lipschitz-gradient smoothness (v).
    pub holder_exponent: f64,
    /// Lipschitz constant of the per-example loss map (G).
    pub loss_lipschitz: f64,
    /// Strong-convexity modulus of the primal objective, when it has one (mu).
    pub strong_convexity: Option<f64>,
    /// Local-error-bound constant, when known (c).
    pub leb_constant: Option<f64>,
    /// Local-error-bound exponent in [0, 1] (theta).
    pub leb_exponent: f64,
}

impl ProblemConstants {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("primal_grad_bound", self.primal_grad_bound),
            ("dual_grad_bound", self.dual_grad_bound),
            ("holder_constant", self.holder_constant),
            ("loss_lipschitz", self.loss_lipschitz),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::Config(format!(
                    "{name} must be finite and > 0, got {value}"
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.holder_exponent) {
            return Err(Error::Config(format!(
                "holder_exponent must lie in [0, 1], got {}",
                self.holder_exponent
            )));
        }
        if !(0.0..=1.0).contains(&self.leb_exponent) {
            return Err(Error::Config(format!(
                "leb_exponent must lie in [0, 1], got {}",
                self.leb_exponent
            )));
        }
        if let Some(mu) = self.strong_convexity {
            if !(mu > 0.0 && mu.is_finite()) {
                return Err(Error::Config(format!(
                    "strong_convexity must be > 0, got {mu}"
                )));
            }
        }
        if let Some(c) = self.leb_constant {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::Config(format!("leb_constant must be > 0, got {c}")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ProblemConstants {
        ProblemConstants {
            primal_grad_bound: 3.0,
            dual_grad_bound: 3.0,
            holder_constant: 1.0,
            holder_exponent: 1.0,
            loss_lipschitz: 1.0,
            strong_convexity: Some(1.0),
            leb_constant: None,
            leb_exponent: 0.5,
        }
    }

    #[test]
    fn accepts_valid_constants() {
        assert!(base().validate().is_ok());
    }

    #[test]
    fn rejects_bad_fields() {
        let mut c = base();
        c.primal_grad_bound = 0.0;
        assert!(c.validate().is_err());

        let mut c = base();
        c.holder_exponent = 1.5;
        assert!(c.validate().is_err());

        let mut c = base();
        c.strong_convexity = Some(-1.0);
        assert!(c.validate().is_err());
    }
}
