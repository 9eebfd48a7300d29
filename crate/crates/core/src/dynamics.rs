// SPDX-License-Identifier: Apache-2.0

//! Time evolution: Schrödinger for pure states, Lindblad for density
//! matrices, and the gate-fidelity pipelines built on them.
//!
//! Neither engine renormalizes. Norm and trace drift are reported and
//! checked against [`DRIFT_LIMIT`].

use std::f64::consts::TAU;

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gate::{closed_form_unitary, ideal_output_state};
use crate::integrator::{integrate, Stats, StepControl};
use crate::model::{derive, full_model, SystemParams, TimeDependentHamiltonian};
use crate::operators::{
    annihilation, embed, pure_state_fidelity, transition, ComplexMatrix, DensityMatrix, QuantumState,
    SparseMatrix, I, ZERO,
};
use crate::space::{HilbertSpace, Level, Site, MAX_DENSITY_DIM};

/// Norm or trace drift beyond which an evolution is rejected.
pub const DRIFT_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvolutionConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub initial_step: Option<f64>,
    pub max_steps: usize,
    /// Number of uniform observable samples, endpoints included.
    pub samples: usize,
}

impl EvolutionConfig {
    pub const DEFAULT_SAMPLES: usize = 200;

    /// Defaults for pure-state evolution. The step cap resolves the fastest
    /// interaction-picture phase, `2π / (20 Δ_max)`.
    pub fn for_state(params: &SystemParams) -> Self {
        let fastest = params.delta1.max(params.delta_cap);
        Self {
            rtol: 1e-8,
            atol: 1e-10,
            max_step: TAU / (20.0 * fastest),
            initial_step: None,
            max_steps: 5_000_000,
            samples: Self::DEFAULT_SAMPLES,
        }
    }

    pub fn for_density(params: &SystemParams) -> Self {
        Self { rtol: 1e-7, ..Self::for_state(params) }
    }

    pub fn with_rtol(mut self, rtol: f64) -> Self {
        self.rtol = rtol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0 && self.max_step > 0.0) {
            return Err(Error::InvalidParams("tolerances and max step must be positive".into()));
        }
        if self.samples < 2 {
            return Err(Error::InvalidParams("need at least 2 samples".into()));
        }
        Ok(())
    }

    fn step_control(&self) -> StepControl {
        StepControl {
            rtol: self.rtol,
            atol: self.atol,
            max_step: self.max_step,
            initial_step: self.initial_step,
            max_steps: self.max_steps,
        }
    }
}

/// Anything that can act as `H(t)`.
pub trait HamiltonianProvider {
    fn dim(&self) -> usize;

    /// `y += alpha H(t) x`
    fn apply_add(&self, t: f64, alpha: C64, x: &[C64], y: &mut [C64]);

    fn matrix(&self, t: f64) -> ComplexMatrix;
}

impl HamiltonianProvider for TimeDependentHamiltonian {
    fn dim(&self) -> usize {
        TimeDependentHamiltonian::dim(self)
    }

    fn apply_add(&self, t: f64, alpha: C64, x: &[C64], y: &mut [C64]) {
        TimeDependentHamiltonian::apply_add(self, t, alpha, x, y)
    }

    fn matrix(&self, t: f64) -> ComplexMatrix {
        TimeDependentHamiltonian::matrix(self, t)
    }
}

/// Wraps a closure producing dense matrices; the matrix is rebuilt at every
/// integrator stage.
pub struct DenseHamiltonian<F> {
    dim: usize,
    build: F,
}

impl<F: Fn(f64) -> ComplexMatrix> DenseHamiltonian<F> {
    pub fn new(dim: usize, build: F) -> Self {
        Self { dim, build }
    }
}

impl<F: Fn(f64) -> ComplexMatrix> HamiltonianProvider for DenseHamiltonian<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply_add(&self, t: f64, alpha: C64, x: &[C64], y: &mut [C64]) {
        let h = (self.build)(t);
        for (i, row) in h.outer_iter().enumerate() {
            let s: C64 = row.iter().zip(x).map(|(a, b)| a * b).sum();
            y[i] += alpha * s;
        }
    }

    fn matrix(&self, t: f64) -> ComplexMatrix {
        (self.build)(t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Observables {
    /// `‖ψ‖` for states, `Tr ρ` for density matrices.
    pub norm_or_trace: f64,
    pub photons: f64,
    /// `[P(g), P(e), P(f)]` per qutrit.
    pub populations: Vec<[f64; 3]>,
}

impl Observables {
    fn from_probabilities(space: &HilbertSpace, probs: impl Iterator<Item = f64>, is_state: bool) -> Self {
        let mut total = 0.0;
        let mut photons = 0.0;
        let mut populations = vec![[0.0; 3]; space.n_qutrits()];
        for (i, p) in probs.enumerate() {
            total += p;
            photons += p * space.photons_at(i) as f64;
            for (k, pop) in populations.iter_mut().enumerate() {
                pop[space.level_at(i, k + 1).index()] += p;
            }
        }
        let norm_or_trace = if is_state { total.sqrt() } else { total };
        Self { norm_or_trace, photons, populations }
    }

    pub fn of_state(psi: &QuantumState) -> Self {
        Self::from_probabilities(psi.space(), psi.amplitudes().iter().map(|z| z.norm_sqr()), true)
    }

    pub fn of_density(rho: &DensityMatrix) -> Self {
        Self::from_probabilities(rho.space(), rho.matrix().diag().iter().map(|z| z.re), false)
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub observables: Vec<Observables>,
    pub final_state: S,
    pub stats: Stats,
}

impl<S> Trajectory<S> {
    pub fn max_photons(&self) -> f64 {
        self.observables.iter().map(|o| o.photons).fold(0.0, f64::max)
    }

    /// Largest `|norm_or_trace - 1|` over the samples.
    pub fn max_drift(&self) -> f64 {
        self.observables.iter().map(|o| (o.norm_or_trace - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn final_drift(&self) -> f64 {
        self.observables.last().map(|o| (o.norm_or_trace - 1.0).abs()).unwrap_or(0.0)
    }
}

fn sample_times(t_final: f64, samples: usize) -> Result<Vec<f64>> {
    if !t_final.is_finite() || t_final < 0.0 {
        return Err(Error::InvalidParams(format!("final time must be finite and >= 0, got {t_final}")));
    }
    if t_final == 0.0 {
        return Ok(vec![0.0]);
    }
    let last = samples - 1;
    Ok((0..samples).map(|i| if i == last { t_final } else { t_final * i as f64 / last as f64 }).collect())
}

/// Integrates `dψ/dt = -i H(t) ψ` from 0 to `t_final`.
pub fn evolve_schrodinger<H: HamiltonianProvider + ?Sized>(
    h: &H,
    psi0: &QuantumState,
    t_final: f64,
    cfg: &EvolutionConfig,
) -> Result<Trajectory<QuantumState>> {
    cfg.validate()?;
    let space = *psi0.space();
    if h.dim() != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), got: h.dim() });
    }
    let dev = (psi0.norm() - 1.0).abs();
    if dev > crate::operators::STATE_NORM_TOL {
        return Err(Error::NumericalCorruption(format!("initial state norm deviates by {dev:.3e}")));
    }
    let times = sample_times(t_final, cfg.samples)?;
    let mut y: Vec<C64> = psi0.amplitudes().to_vec();
    let mut observables = Vec::with_capacity(times.len());
    let minus_i = -I;
    let stats = integrate(
        |t, x, dx| {
            dx.fill(ZERO);
            h.apply_add(t, minus_i, x, dx);
        },
        &mut y,
        0.0,
        &times,
        &cfg.step_control(),
        |_, _, x| {
            let probs = x.iter().map(|z| z.norm_sqr());
            observables.push(Observables::from_probabilities(&space, probs, true));
        },
    )?;
    let traj = Trajectory {
        times,
        observables,
        final_state: QuantumState::from_raw(space, Array1::from(y)),
        stats,
    };
    let drift = traj.max_drift();
    if drift > DRIFT_LIMIT {
        return Err(Error::IntegratorAccuracy(format!("norm drift {drift:.3e}")));
    }
    Ok(traj)
}

/// Lindblad generator in sparse form:
/// `dρ/dt = G ρ + ρ G† + Σ_k J_k ρ J_k†` with `G = -i H(t) - ½ Σ_k J_k† J_k`
/// and `J_k = √rate_k Λ_k`.
#[derive(Debug, Clone)]
pub struct LindbladModel {
    space: HilbertSpace,
    hamiltonian: TimeDependentHamiltonian,
    static_generator: Vec<(usize, usize, C64)>,
    jumps: Vec<SparseMatrix>,
}

impl LindbladModel {
    pub fn new(params: &SystemParams) -> Result<Self> {
        let space = params.space()?;
        if space.dim() > MAX_DENSITY_DIM {
            return Err(Error::DimensionLimit { requested: space.dim(), limit: MAX_DENSITY_DIM });
        }
        let hamiltonian = full_model(params, &space)?;
        let mut channels: Vec<(f64, ComplexMatrix)> = Vec::new();
        channels.push((params.kappa, embed(&annihilation(space.fock_cutoff())?, Site::Cavity, &space)?));
        for k in 1..=space.n_qutrits() {
            let site = Site::Qutrit(k);
            for (rate, to, from) in [
                (params.gamma_fe, Level::E, Level::F),
                (params.gamma_fg, Level::G, Level::F),
                (params.gamma_eg, Level::G, Level::E),
                (params.gamma_phi_f, Level::F, Level::F),
                (params.gamma_phi_e, Level::E, Level::E),
            ] {
                channels.push((rate, embed(&transition(to, from), site, &space)?));
            }
        }
        let d = space.dim();
        let mut decay = Array2::<C64>::zeros((d, d));
        let mut jumps = Vec::new();
        for (rate, op) in channels.into_iter().filter(|(r, _)| *r > 0.0) {
            let j = SparseMatrix::from_dense(&op).scaled(C64::new(rate.sqrt(), 0.0));
            let jd = j.adjoint().to_dense();
            decay = decay + jd.dot(&j.to_dense());
            jumps.push(j);
        }
        let mut generator = hamiltonian.static_part().scaled(-I).to_dense();
        generator = generator - decay.mapv(|z| z * 0.5);
        let static_generator = SparseMatrix::from_dense(&generator).entries().to_vec();
        Ok(Self { space, hamiltonian, static_generator, jumps })
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    /// `out = L(t)[rho]` on row-major flattened matrices.
    pub fn rhs(&self, t: f64, rho: &[C64], out: &mut [C64]) {
        let d = self.space.dim();
        out.fill(ZERO);
        let mut apply = |r: usize, c: usize, g: C64| {
            // G ρ: row r += g · row c
            let (src, dst) = (c * d, r * d);
            for a in 0..d {
                out[dst + a] += g * rho[src + a];
            }
            // ρ G†: column r += conj(g) · column c
            let gc = g.conj();
            for a in 0..d {
                out[a * d + r] += gc * rho[a * d + c];
            }
        };
        for &(r, c, g) in &self.static_generator {
            apply(r, c, g);
        }
        for (freq, op, op_dag) in self.hamiltonian.drive_terms() {
            let ph = C64::from_polar(1.0, freq * t);
            for &(r, c, v) in op.entries() {
                apply(r, c, -I * ph * v);
            }
            for &(r, c, v) in op_dag.entries() {
                apply(r, c, -I * ph.conj() * v);
            }
        }
        for j in &self.jumps {
            let e = j.entries();
            for &(i, k, v) in e {
                for &(jj, l, w) in e {
                    out[i * d + jj] += v * w.conj() * rho[k * d + l];
                }
            }
        }
    }
}

/// Integrates the master equation with the full interaction Hamiltonian and
/// every dissipation channel of `params`.
pub fn evolve_lindblad(
    params: &SystemParams,
    rho0: &DensityMatrix,
    t_final: f64,
    cfg: &EvolutionConfig,
) -> Result<Trajectory<DensityMatrix>> {
    cfg.validate()?;
    let model = LindbladModel::new(params)?;
    evolve_lindblad_model(&model, rho0, t_final, cfg)
}

pub fn evolve_lindblad_model(
    model: &LindbladModel,
    rho0: &DensityMatrix,
    t_final: f64,
    cfg: &EvolutionConfig,
) -> Result<Trajectory<DensityMatrix>> {
    let space = *model.space();
    if rho0.space() != &space {
        return Err(Error::SpaceMismatch);
    }
    let d = space.dim();
    let times = sample_times(t_final, cfg.samples)?;
    let mut y: Vec<C64> = rho0.matrix().iter().cloned().collect();
    let mut observables = Vec::with_capacity(times.len());
    let stats = integrate(
        |t, x, dx| model.rhs(t, x, dx),
        &mut y,
        0.0,
        &times,
        &cfg.step_control(),
        |_, _, x| {
            let probs = (0..d).map(|i| x[i * d + i].re);
            observables.push(Observables::from_probabilities(&space, probs, false));
        },
    )?;
    let matrix = Array2::from_shape_vec((d, d), y).expect("row-major d x d");
    let traj = Trajectory { times, observables, final_state: DensityMatrix::from_raw(space, matrix), stats };
    let drift = traj.max_drift();
    if drift > DRIFT_LIMIT {
        return Err(Error::IntegratorAccuracy(format!("trace drift {drift:.3e}")));
    }
    Ok(traj)
}

/// Result of simulating one gate operation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateOutcome {
    pub fidelity: f64,
    pub gate_time: f64,
    pub max_photons: f64,
    /// Largest norm (pure) or trace (mixed) deviation seen.
    pub drift: f64,
    pub steps: usize,
}

fn check_input(params: &SystemParams, input: &QuantumState) -> Result<()> {
    if *input.space() != params.space()? {
        return Err(Error::SpaceMismatch);
    }
    Ok(())
}

/// Gate time, or `None` when nothing couples so any duration is trivial.
fn gate_duration(params: &SystemParams) -> Result<Option<f64>> {
    let derived = derive(params)?;
    if derived.gate_time.is_finite() {
        return Ok(Some(derived.gate_time));
    }
    if params.mu == 0.0 && params.mu1 == 0.0 {
        return Ok(None);
    }
    Err(Error::InvalidParams("gate time is not finite (lambda = 0)".into()))
}

pub fn run_gate_ideal(params: &SystemParams, input: &QuantumState, cfg: &EvolutionConfig) -> Result<GateOutcome> {
    check_input(params, input)?;
    let target = ideal_output_state(input, params.n_qutrits)?;
    let model = full_model(params, input.space())?;
    let (tg, t_run) = match gate_duration(params)? {
        Some(tg) => (tg, tg),
        None => (f64::INFINITY, 0.0),
    };
    let traj = evolve_schrodinger(&model, input, t_run, cfg)?;
    let overlap = target.inner(&traj.final_state)?;
    Ok(GateOutcome {
        fidelity: overlap.norm_sqr(),
        gate_time: tg,
        max_photons: traj.max_photons(),
        drift: traj.max_drift(),
        steps: traj.stats.accepted,
    })
}

pub fn run_gate_lossy(params: &SystemParams, input: &QuantumState, cfg: &EvolutionConfig) -> Result<GateOutcome> {
    check_input(params, input)?;
    let target = ideal_output_state(input, params.n_qutrits)?;
    let (tg, t_run) = match gate_duration(params)? {
        Some(tg) => (tg, tg),
        None => (f64::INFINITY, 0.0),
    };
    let traj = evolve_lindblad(params, &DensityMatrix::from_pure(input), t_run, cfg)?;
    Ok(GateOutcome {
        fidelity: pure_state_fidelity(&target, &traj.final_state)?,
        gate_time: tg,
        max_photons: traj.max_photons(),
        drift: traj.max_drift(),
        steps: traj.stats.accepted,
    })
}

/// `|⟨ψ_id|ψ(t_g)⟩|²` under the full interaction Hamiltonian, no loss.
pub fn gate_fidelity_ideal(params: &SystemParams, input: &QuantumState) -> Result<f64> {
    Ok(run_gate_ideal(params, input, &EvolutionConfig::for_state(params))?.fidelity)
}

/// `⟨ψ_id|ρ(t_g)|ψ_id⟩` under the master equation.
pub fn gate_fidelity_lossy(params: &SystemParams, input: &QuantumState) -> Result<f64> {
    Ok(run_gate_lossy(params, input, &EvolutionConfig::for_density(params))?.fidelity)
}

/// Fidelity obtained by applying the closed-form diagonal propagator for one
/// gate time to the qutrit part of `input` (cavity in vacuum).
pub fn closed_form_fidelity(params: &SystemParams, input: &QuantumState) -> Result<f64> {
    check_input(params, input)?;
    let space = *input.space();
    let target = ideal_output_state(input, params.n_qutrits)?;
    let tg = derive(params)?.gate_time;
    let u = closed_form_unitary(params, params.n_qutrits, tg)?;
    let fd = space.fock_dim();
    let mut out = Array1::zeros(space.dim());
    for q in 0..space.qutrit_dim() {
        out[q * fd] = u[(q, q)] * input.amplitudes()[q * fd];
    }
    let evolved = QuantumState::from_raw(space, out);
    Ok(target.inner(&evolved)?.norm_sqr())
}

/// Change in fidelity below which successive refinements count as converged.
pub const CONVERGENCE_TOL: f64 = 1e-4;
pub const MAX_STUDY_CUTOFF: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub fock_cutoff: usize,
    pub rtol: f64,
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// First `(cutoff, rtol)` whose fidelity agrees with the next refinement.
    pub converged: Option<(usize, f64)>,
    /// `|F(rtol=1e-7) - F(rtol=1e-10)|` at the converged cutoff.
    pub tolerance_sensitivity: Option<f64>,
}

impl ConvergenceReport {
    pub fn is_converged(&self) -> bool {
        self.converged.is_some()
    }
}

/// Doubles the Fock cutoff (1, 2, 4, ...) while tightening the integrator
/// tolerance until consecutive lossless gate fidelities agree.
pub fn convergence_study(params: &SystemParams, input: &QuantumState) -> Result<ConvergenceReport> {
    let amps = vacuum_amplitudes(input);
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    let mut converged = None;
    let mut cutoff = 1;
    let mut rtol = 1e-7;
    while cutoff <= MAX_STUDY_CUTOFF {
        let p = params.with_cutoff(cutoff);
        let psi = rebuild_input(&amps, &p)?;
        let cfg = EvolutionConfig::for_state(&p).with_rtol(rtol);
        let fidelity = run_gate_ideal(&p, &psi, &cfg)?.fidelity;
        if let Some(prev) = rows.last() {
            if (fidelity - prev.fidelity).abs() < CONVERGENCE_TOL {
                converged = Some((prev.fock_cutoff, prev.rtol));
                rows.push(ConvergenceRow { fock_cutoff: cutoff, rtol, fidelity });
                break;
            }
        }
        rows.push(ConvergenceRow { fock_cutoff: cutoff, rtol, fidelity });
        cutoff *= 2;
        rtol = (rtol / 10.0).max(1e-10);
    }
    let tolerance_sensitivity = match converged {
        Some((c, _)) => {
            let p = params.with_cutoff(c);
            let psi = rebuild_input(&amps, &p)?;
            let loose = run_gate_ideal(&p, &psi, &EvolutionConfig::for_state(&p).with_rtol(1e-7))?.fidelity;
            let tight = run_gate_ideal(&p, &psi, &EvolutionConfig::for_state(&p).with_rtol(1e-10))?.fidelity;
            Some((loose - tight).abs())
        }
        None => None,
    };
    Ok(ConvergenceReport { rows, converged, tolerance_sensitivity })
}

/// Vacuum-sector amplitudes of `input`, indexed by qutrit configuration.
fn vacuum_amplitudes(input: &QuantumState) -> Vec<C64> {
    let fd = input.space().fock_dim();
    (0..input.space().qutrit_dim()).map(|q| input.amplitudes()[q * fd]).collect()
}

fn rebuild_input(qutrit_amps: &[C64], params: &SystemParams) -> Result<QuantumState> {
    let space = params.space()?;
    let mut amps = Array1::zeros(space.dim());
    for (q, a) in qutrit_amps.iter().enumerate() {
        amps[q * space.fock_dim()] = *a;
    }
    QuantumState::normalized(space, amps)
}
