use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Range `alpha_t` is clipped to before a quantile is taken.
pub const ALPHA_CLIP: (f64, f64) = (0.001, 0.999);

/// Adaptive conformal inference: the miscoverage level used for the next
/// interval moves against the running error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AciState {
    pub alpha_t: f64,
    pub step_size: f64,
    pub target_alpha: f64,
}

impl AciState {
    pub fn new(target_alpha: f64, step_size: f64) -> Result<Self> {
        if !(step_size > 0.0) {
            return Err(Error::param(format!("ACI step size {step_size} must be positive")));
        }
        super::check_alpha(target_alpha)?;
        Ok(Self {
            alpha_t: target_alpha,
            step_size,
            target_alpha,
        })
    }

    /// `alpha_{t+1} = alpha_t + step * (alpha - err_t)`.
    pub fn update(self, miscovered: bool) -> Self {
        let err = if miscovered { 1.0 } else { 0.0 };
        Self {
            alpha_t: self.alpha_t + self.step_size * (self.target_alpha - err),
            ..self
        }
    }

    /// Level handed to the quantile.
    pub fn effective_alpha(&self) -> f64 {
        self.alpha_t.clamp(ALPHA_CLIP.0, ALPHA_CLIP.1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_steps() {
        let s = AciState::new(0.1, 0.005).unwrap();
        assert!((s.update(true).alpha_t - 0.0955).abs() < 1e-15);
        assert!((s.update(false).alpha_t - 0.1005).abs() < 1e-15);
    }

    #[test]
    fn clipping() {
        let s = AciState {
            alpha_t: -0.4,
            step_size: 0.005,
            target_alpha: 0.1,
        };
        assert_eq!(s.effective_alpha(), 0.001);
        assert!(AciState::new(0.1, 0.0).is_err());
    }
}
