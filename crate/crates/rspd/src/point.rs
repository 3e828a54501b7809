use crate::error::{Error, Result};

/// A primal iterate: a dense vector of model parameters.
///
/// Entries are finite and the dimension is fixed for the lifetime of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimalPoint {
    values: Vec<f64>,
}

/// A dual iterate.
///
/// Membership in the dual domain is re-established by projection after
/// every update, so the type itself only guarantees finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPoint {
    values: Vec<f64>,
}

macro_rules! point_impl {
    ($name:ident, $label:literal) => {
        impl $name {
            pub fn new(values: Vec<f64>) -> Result<Self> {
                if values.is_empty() {
                    return Err(Error::Config(format!(
                        "{} must have dimension >= 1",
                        $label
                    )));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Config(format!("{} entries must be finite", $label)));
                }
                Ok(Self { values })
            }

            pub fn zeros(dim: usize) -> Self {
                assert!(dim >= 1, "dimension must be >= 1");
                Self {
                    values: vec![0.0; dim],
                }
            }

            pub fn dim(&self) -> usize {
                self.values.len()
            }

            pub fn as_slice(&self) -> &[f64] {
                &self.values
            }

            pub fn into_values(self) -> Vec<f64> {
                self.values
            }
        }

        impl std::ops::Deref for $name {
            type Target = [f64];

            fn deref(&self) -> &[f64] {
                &self.values
            }
        }

        impl AsRef<[f64]> for $name {
            fn as_ref(&self) -> &[f64] {
                &self.values
            }
        }
    };
}

point_impl!(PrimalPoint, "primal point");
point_impl!(DualPoint, "dual point");
