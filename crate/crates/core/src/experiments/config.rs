// SPDX-License-Identifier: Apache-2.0

//! Run configuration: a flat TOML document whose keys mirror [`RunConfig`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gate::{encode, superposition_input, parse_bits};
use crate::model::{matched_mu, SystemParams, DEFAULT_FOCK_CUTOFF};
use crate::operators::QuantumState;
use crate::space::HilbertSpace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Single,
    Fig2Sweep,
    Fig3Curve,
    Validate,
    Converge,
}

pub const SUPERPOSITION_INPUT: &str = "paper-superposition";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub mode: Mode,
    pub n_qutrits: usize,
    pub mu1: f64,
    /// Target coupling; the matched value is used when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    pub delta1: f64,
    pub delta_cap: f64,
    pub kappa: f64,
    pub gamma_fe: f64,
    pub gamma_fg: f64,
    pub gamma_eg: f64,
    pub gamma_phi_f: f64,
    pub gamma_phi_e: f64,
    pub fock_cutoff: usize,
    pub delta1_grid: Vec<f64>,
    pub delta_small_grid: Vec<f64>,
    pub gamma_grid: Vec<f64>,
    /// `f -> g` rate as a fraction of `γ` along the decoherence curve.
    pub fg_ratio: f64,
    /// `paper-superposition` or a logical bitstring such as `101`.
    pub input: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix_out: Option<String>,
    pub jobs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Single,
            n_qutrits: 3,
            mu1: 1.0,
            mu: None,
            delta1: 10.7,
            delta_cap: 8.4,
            kappa: 0.0,
            gamma_fe: 0.0,
            gamma_fg: 0.0,
            gamma_eg: 0.0,
            gamma_phi_f: 0.0,
            gamma_phi_e: 0.0,
            fock_cutoff: DEFAULT_FOCK_CUTOFF,
            delta1_grid: Vec::new(),
            delta_small_grid: Vec::new(),
            gamma_grid: Vec::new(),
            fg_ratio: 0.01,
            input: SUPERPOSITION_INPUT.to_string(),
            out: None,
            matrix_out: None,
            jobs: 1,
        }
    }
}

impl RunConfig {
    /// Defaults for `mode`, with the grids of the published figures filled in.
    pub fn for_mode(mode: Mode) -> Self {
        let mut cfg = Self { mode, ..Self::default() };
        match mode {
            Mode::Fig2Sweep => {
                cfg.delta1_grid = (0..=40).map(|i| 5.0 + 0.5 * i as f64).collect();
                cfg.delta_small_grid = (0..=18).map(|i| 0.5 + 0.25 * i as f64).collect();
                cfg.delta1_grid.push(10.7);
                cfg.delta1_grid.sort_by(f64::total_cmp);
                cfg.delta_small_grid.push(2.3);
                cfg.delta_small_grid.sort_by(f64::total_cmp);
            }
            Mode::Fig3Curve => {
                cfg.kappa = 0.01;
                cfg.gamma_grid = vec![0.0, 5e-5, 1e-4, 2e-4, 5e-4, 1e-3];
            }
            _ => {}
        }
        cfg
    }

    /// Parses and validates.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg = Self::from_toml(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses without validating, for callers that adjust fields first.
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().trim_end().to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn emit(&self) -> String {
        toml::to_string(self).expect("flat config always serializes")
    }

    /// Checks the config independently of mode-specific physics: grids,
    /// rate signs, input selector and worker count. In `single`, `converge`
    /// and `validate` modes the parameter record must also be valid.
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        if self.jobs == 0 {
            return fail("jobs must be at least 1");
        }
        if self.n_qutrits < 2 {
            return Err(Error::TooFewQutrits(self.n_qutrits));
        }
        if self.fock_cutoff < 1 {
            return Err(Error::CutoffTooSmall);
        }
        let rates = [
            ("kappa", self.kappa),
            ("gamma_fe", self.gamma_fe),
            ("gamma_fg", self.gamma_fg),
            ("gamma_eg", self.gamma_eg),
            ("gamma_phi_f", self.gamma_phi_f),
            ("gamma_phi_e", self.gamma_phi_e),
            ("fg_ratio", self.fg_ratio),
        ];
        for (name, r) in rates {
            if !r.is_finite() || r < 0.0 {
                return Err(Error::Config(format!("{name} must be a finite non-negative number, got {r}")));
            }
        }
        if let Some(g) = self.gamma_grid.iter().find(|g| !g.is_finite() || **g < 0.0) {
            return Err(Error::Config(format!("gamma_grid entries must be non-negative, got {g}")));
        }
        if self.delta1_grid.iter().chain(&self.delta_small_grid).any(|x| !x.is_finite()) {
            return fail("grid entries must be finite");
        }
        if self.input != SUPERPOSITION_INPUT {
            let bits = parse_bits(&self.input).map_err(|e| Error::Config(e.to_string()))?;
            if bits.len() != self.n_qutrits {
                return Err(Error::Config(format!(
                    "input has {} bits for {} qutrits",
                    bits.len(),
                    self.n_qutrits
                )));
            }
        }
        match self.mode {
            Mode::Fig2Sweep => {
                if self.delta1_grid.is_empty() || self.delta_small_grid.is_empty() {
                    return fail("fig2-sweep needs delta1_grid and delta_small_grid");
                }
            }
            Mode::Fig3Curve => {
                if self.gamma_grid.is_empty() {
                    return fail("fig3-curve needs gamma_grid");
                }
                self.base_params()?.validate()?;
            }
            Mode::Single | Mode::Converge | Mode::Validate => self.params()?.validate()?,
        }
        Ok(())
    }

    /// Parameter record with the configured rates; `mu` resolved.
    pub fn params(&self) -> Result<SystemParams> {
        let mut p = self.base_params()?;
        p.kappa = self.kappa;
        p.gamma_fe = self.gamma_fe;
        p.gamma_fg = self.gamma_fg;
        p.gamma_eg = self.gamma_eg;
        p.gamma_phi_f = self.gamma_phi_f;
        p.gamma_phi_e = self.gamma_phi_e;
        Ok(p)
    }

    fn base_params(&self) -> Result<SystemParams> {
        let mu = match self.mu {
            Some(mu) => mu,
            None => resolve_mu(self.delta1, self.delta_cap, self.mu1)?,
        };
        let p = SystemParams::lossless(self.n_qutrits, self.mu1, mu, self.delta1, self.delta_cap);
        Ok(p.with_cutoff(self.fock_cutoff))
    }

    pub fn input_state(&self, space: &HilbertSpace) -> Result<QuantumState> {
        if self.input == SUPERPOSITION_INPUT {
            superposition_input(space)
        } else {
            encode(&self.input, space)
        }
    }
}

fn resolve_mu(delta1: f64, delta_cap: f64, mu1: f64) -> Result<f64> {
    if delta1 == delta_cap {
        return Err(Error::DegenerateDetunings);
    }
    matched_mu(delta1, delta_cap, mu1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_defaults() {
        for mode in [Mode::Single, Mode::Fig2Sweep, Mode::Fig3Curve, Mode::Validate, Mode::Converge] {
            let cfg = RunConfig::for_mode(mode);
            assert_eq!(RunConfig::parse(&cfg.emit()).unwrap(), cfg);
        }
    }

    #[test]
    fn round_trip_options() {
        let cfg = RunConfig {
            mu: Some(3.08),
            out: Some("a.csv".into()),
            matrix_out: Some("m.csv".into()),
            input: "110".into(),
            kappa: 1e-2,
            gamma_fe: 2e-4,
            jobs: 4,
            ..RunConfig::default()
        };
        assert_eq!(RunConfig::parse(&cfg.emit()).unwrap(), cfg);
    }

    #[test]
    fn unknown_key_rejected() {
        let err = RunConfig::parse("mode = \"single\"\ndelta_1 = 3.0\n").unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{err:?}");
    }

    #[test]
    fn scientific_notation_accepted() {
        let cfg = RunConfig::parse("mode = \"fig3-curve\"\ngamma_grid = [0.0, 2e-4, 1.0E-3]\nkappa = 1e-2\n").unwrap();
        assert_eq!(cfg.gamma_grid, vec![0.0, 2e-4, 1e-3]);
    }

    #[test]
    fn negative_gamma_rejected() {
        let err = RunConfig::parse("mode = \"fig3-curve\"\ngamma_grid = [0.0, -1e-4]\n").unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert!(RunConfig::parse("gamma_eg = -1.0\n").is_err());
    }

    #[test]
    fn degenerate_detunings_rejected() {
        let err = RunConfig::parse("delta1 = 8.4\ndelta_cap = 8.4\n").unwrap_err();
        assert_eq!(err, Error::DegenerateDetunings);
    }

    #[test]
    fn grids_required_in_sweep_modes() {
        assert!(RunConfig::parse("mode = \"fig2-sweep\"\n").is_err());
        assert!(RunConfig::parse("mode = \"fig3-curve\"\n").is_err());
    }

    #[test]
    fn input_selector() {
        assert!(RunConfig::parse("input = \"10\"\n").is_err());
        assert!(RunConfig::parse("input = \"1x1\"\n").is_err());
        let cfg = RunConfig::parse("input = \"101\"\nfock_cutoff = 1\n").unwrap();
        let space = cfg.params().unwrap().space().unwrap();
        let psi = cfg.input_state(&space).unwrap();
        // control 1 -> f, first target 0 -> g, second target 1 -> e
        let idx = space.index_of(&space.parse_levels("fge").unwrap(), 0).unwrap();
        assert_eq!(psi.amplitudes()[idx].re, 1.0);
    }

    #[test]
    fn matched_mu_is_default() {
        let p = RunConfig::default().params().unwrap();
        assert!((p.mu - 3.0854).abs() < 1e-4);
    }
}
