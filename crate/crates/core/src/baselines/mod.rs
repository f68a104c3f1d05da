//! Comparison methods: neighborhood CF, soft-impute, blind regression.

pub mod blind;
pub mod cf;
pub mod soft_impute;

pub use blind::{blind_regression_predict, blind_regression_set, BlindRegSet};
pub use cf::{cf_predict, CfAxis, CfOptions, CfWeighting};
pub use soft_impute::{soft_impute, soft_threshold_svd, SoftImputeFit, SoftImputeOptions};
