// SPDX-License-Identifier: Apache-2.0

//! Conversion of the dimensionless results to laboratory units.

use std::f64::consts::TAU;

use serde::Serialize;

use super::validate::Check;
use crate::error::{Error, Result};

/// Inputs of [`physical_units_report`]. Frequencies are cyclic (`ω / 2π`,
/// in Hz); rates and times are in the simulator's units of `μ₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnitsRequest {
    pub mu1_hz: f64,
    pub cavity_hz: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub mu: f64,
    pub gate_time: f64,
}

impl UnitsRequest {
    /// The transmon example: `μ₁ = 2π × 85 MHz`, `ω_c = 2π × 5.09 GHz`,
    /// `κ = 0.01`, `γ = 2e-4`, at the matched reference point.
    pub fn transmon(mu: f64, gate_time: f64) -> Self {
        Self { mu1_hz: 85e6, cavity_hz: 5.09e9, kappa: 0.01, gamma: 2e-4, mu, gate_time }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitsReport {
    pub request: UnitsRequest,
    /// `μ₁` in rad/s.
    pub mu1_angular: f64,
    pub gate_time_s: f64,
    /// `κ` in rad/s and as a cyclic frequency.
    pub kappa_angular: f64,
    pub kappa_hz: f64,
    pub quality_factor: f64,
    /// Target coupling `μ / 2π` in Hz.
    pub mu_hz: f64,
    /// `1 / γ` in seconds.
    pub coherence_time_s: f64,
    /// Relative deviations from the quoted laboratory figures.
    pub checks: Vec<Check>,
}

/// Quoted laboratory figures the report is compared against.
pub const QUOTED_QUALITY_FACTOR: f64 = 5.97e3;
pub const QUOTED_GATE_TIME_S: f64 = 126e-9;
pub const QUOTED_COHERENCE_TIME_S: f64 = 9.36e-6;
pub const QUOTED_MU_HZ: f64 = 261.8e6;

pub fn physical_units_report(req: UnitsRequest) -> Result<UnitsReport> {
    let named = [
        ("mu1_hz", req.mu1_hz),
        ("cavity_hz", req.cavity_hz),
        ("kappa", req.kappa),
        ("gamma", req.gamma),
        ("mu", req.mu),
        ("gate_time", req.gate_time),
    ];
    if let Some((name, v)) = named.iter().find(|(_, v)| !v.is_finite() || *v <= 0.0) {
        return Err(Error::InvalidParams(format!("{name} must be positive, got {v}")));
    }
    let mu1_angular = TAU * req.mu1_hz;
    let kappa_angular = req.kappa * mu1_angular;
    let quality_factor = TAU * req.cavity_hz / kappa_angular;
    let gate_time_s = req.gate_time / mu1_angular;
    let coherence_time_s = 1.0 / (req.gamma * mu1_angular);
    let mu_hz = req.mu * req.mu1_hz;
    let rel = |x: f64, quoted: f64| (x - quoted).abs() / quoted;
    let checks = vec![
        Check::at_most("quality_factor", rel(quality_factor, QUOTED_QUALITY_FACTOR), 0.01)
            .with_detail(format!("Q = {quality_factor:.1} vs {QUOTED_QUALITY_FACTOR}")),
        Check::at_most("gate_time", rel(gate_time_s, QUOTED_GATE_TIME_S), 0.01)
            .with_detail(format!("{gate_time_s:.4e} s vs {QUOTED_GATE_TIME_S:e} s")),
        Check::at_most("coherence_time", rel(coherence_time_s, QUOTED_COHERENCE_TIME_S), 0.01)
            .with_detail(format!("{coherence_time_s:.4e} s vs {QUOTED_COHERENCE_TIME_S:e} s")),
        Check::at_most("target_coupling", rel(mu_hz, QUOTED_MU_HZ), 0.01)
            .with_detail(format!("{:.2} MHz vs {:.1} MHz", mu_hz / 1e6, QUOTED_MU_HZ / 1e6)),
    ];
    Ok(UnitsReport {
        request: req,
        mu1_angular,
        gate_time_s,
        kappa_angular,
        kappa_hz: kappa_angular / TAU,
        quality_factor,
        mu_hz,
        coherence_time_s,
        checks,
    })
}
