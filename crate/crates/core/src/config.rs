//! Numerical thresholds shared by every stage of the pipeline.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceConfig {
    /// Smallest admissible singular value of the chart Jacobian.
    pub rank: f64,
    /// Band width around 1 for singular values of the tangential part of `J`.
    pub cr: f64,
    pub orthonormality: f64,
    /// Residual allowed in curvature symmetry identities.
    pub identity: f64,
    /// Residual allowed in `phi^2 = -I` on `D`.
    pub phi: f64,
    pub slack: f64,
    pub eq: f64,
    /// Threshold for equality-case diagnostics.
    pub diag: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            rank: 1e-8,
            cr: 0.1,
            orthonormality: 1e-10,
            identity: 1e-9,
            phi: 1e-8,
            slack: 1e-6,
            eq: 1e-6,
            diag: 1e-5,
        }
    }
}
