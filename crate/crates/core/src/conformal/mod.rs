//! Prediction sets: weighted split CP, full CP with the ridge closed form,
//! and the standard, one-step and ACI baselines.

mod aci;
mod full;
mod split;

pub use aci::{AciState, ALPHA_CLIP};
pub use full::{full_cp_membership, full_cp_set_ridge, FullCpSet};
pub use split::{
    mfcs_split_interval, one_step_fcs_interval, split_cp_interval, standard_split_interval,
    SplitCalibrationState,
};

use crate::error::{Error, Result};

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::param(format!("alpha {alpha} outside (0, 1)")))
    }
}
