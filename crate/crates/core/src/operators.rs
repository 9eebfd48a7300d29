// SPDX-License-Identifier: Apache-2.0

//! Dense complex operators, states and density matrices on a
//! [`HilbertSpace`], plus a small triplet-sparse form used inside the
//! integrators.

use nalgebra::DMatrix;
use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::space::{HilbertSpace, Level, Site, MAX_STATE_DIM};

pub type ComplexMatrix = Array2<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Kronecker product with the default dimension cap.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    kron_limited(a, b, MAX_STATE_DIM)
}

/// Kronecker product; errors if either output dimension exceeds `max_dim`.
///
/// `out[(i*br + k, j*bc + l)] = a[(i, j)] * b[(k, l)]`.
pub fn kron_limited(a: &ComplexMatrix, b: &ComplexMatrix, max_dim: usize) -> Result<ComplexMatrix> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let rows = ar.saturating_mul(br);
    let cols = ac.saturating_mul(bc);
    if rows.max(cols) > max_dim {
        return Err(Error::DimensionLimit { requested: rows.max(cols), limit: max_dim });
    }
    let mut out = Array2::zeros((rows, cols));
    for ((i, j), &x) in a.indexed_iter() {
        if x == ZERO {
            continue;
        }
        for ((k, l), &y) in b.indexed_iter() {
            out[(i * br + k, j * bc + l)] = x * y;
        }
    }
    Ok(out)
}

pub fn identity(n: usize) -> ComplexMatrix {
    Array2::from_diag_elem(n, ONE)
}

pub fn diag(values: &[C64]) -> ComplexMatrix {
    Array2::from_diag(&Array1::from(values.to_vec()))
}

/// Places `op` on `site` with identities elsewhere.
pub fn embed(op: &ComplexMatrix, site: Site, space: &HilbertSpace) -> Result<ComplexMatrix> {
    let local = space.site_dim(site)?;
    if op.dim() != (local, local) {
        return Err(Error::DimensionMismatch { expected: local, got: op.nrows() });
    }
    let pos = match site {
        Site::Qutrit(k) => k - 1,
        Site::Cavity => space.n_qutrits(),
    };
    let dims = space.factor_dims();
    let left: usize = dims[..pos].iter().product();
    let right: usize = dims[pos + 1..].iter().product();
    kron(&kron(&identity(left), op)?, &identity(right))
}

/// Truncated annihilation operator on `cutoff + 1` Fock states.
pub fn annihilation(cutoff: usize) -> Result<ComplexMatrix> {
    if cutoff == 0 {
        return Err(Error::CutoffTooSmall);
    }
    let mut a = Array2::zeros((cutoff + 1, cutoff + 1));
    for n in 1..=cutoff {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    Ok(a)
}

/// `|to⟩⟨from|` on a single qutrit.
pub fn transition(to: Level, from: Level) -> ComplexMatrix {
    let mut m = Array2::zeros((3, 3));
    m[(to.index(), from.index())] = ONE;
    m
}

pub fn dagger(m: &ComplexMatrix) -> ComplexMatrix {
    m.t().mapv(|z| z.conj())
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.dot(b) - b.dot(a)
}

pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

/// `max|A_ij - conj(A_ji)| / max|A|`, or 0 for the zero matrix.
pub fn hermiticity_deviation(m: &ComplexMatrix) -> f64 {
    let scale = max_abs(m);
    if scale == 0.0 {
        return 0.0;
    }
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev / scale
}

pub fn trace(m: &ComplexMatrix) -> C64 {
    m.diag().sum()
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    // Symmetrize to strip round-off before handing to the Hermitian solver.
    let h = DMatrix::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
    h.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Row-sorted triplet list. Used where the dense products would dominate
/// integrator cost.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    entries: Vec<(usize, usize, C64)>,
}

impl SparseMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: Vec::new() }
    }

    pub fn from_dense(m: &ComplexMatrix) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "sparse operators are square");
        let entries = m
            .indexed_iter()
            .filter(|(_, z)| **z != ZERO)
            .map(|((i, j), z)| (i, j, *z))
            .collect();
        Self { dim: m.nrows(), entries }
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        let mut m = Array2::zeros((self.dim, self.dim));
        for &(i, j, z) in &self.entries {
            m[(i, j)] += z;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, usize, C64)] {
        &self.entries
    }

    pub fn adjoint(&self) -> Self {
        let mut entries: Vec<_> = self.entries.iter().map(|&(i, j, z)| (j, i, z.conj())).collect();
        entries.sort_by_key(|&(i, j, _)| (i, j));
        Self { dim: self.dim, entries }
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self { dim: self.dim, entries: self.entries.iter().map(|&(i, j, z)| (i, j, z * s)).collect() }
    }

    /// `y += alpha * self * x`
    pub fn apply_add(&self, alpha: C64, x: &[C64], y: &mut [C64]) {
        for &(i, j, z) in &self.entries {
            y[i] += alpha * z * x[j];
        }
    }
}

/// Pure state on a [`HilbertSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    space: HilbertSpace,
    amplitudes: Array1<C64>,
}

/// Tolerance on `|‖ψ‖ - 1|` for constructed states.
pub const STATE_NORM_TOL: f64 = 1e-9;

impl QuantumState {
    pub fn new(space: HilbertSpace, amplitudes: Array1<C64>) -> Result<Self> {
        if amplitudes.len() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), got: amplitudes.len() });
        }
        let state = Self { space, amplitudes };
        let dev = (state.norm() - 1.0).abs();
        if dev > STATE_NORM_TOL {
            return Err(Error::NumericalCorruption(format!("state norm deviates from 1 by {dev:.3e}")));
        }
        Ok(state)
    }

    /// Builds a state without the norm check, for integrator outputs whose
    /// drift is reported separately.
    pub fn from_raw(space: HilbertSpace, amplitudes: Array1<C64>) -> Self {
        assert_eq!(amplitudes.len(), space.dim());
        Self { space, amplitudes }
    }

    pub fn normalized(space: HilbertSpace, amplitudes: Array1<C64>) -> Result<Self> {
        if amplitudes.len() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), got: amplitudes.len() });
        }
        let n = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n == 0.0 {
            return Err(Error::NumericalCorruption("zero vector cannot be normalized".into()));
        }
        Ok(Self { space, amplitudes: amplitudes.mapv(|z| z / n) })
    }

    pub fn basis(space: HilbertSpace, index: usize) -> Result<Self> {
        if index >= space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), got: index + 1 });
        }
        let mut amps = Array1::zeros(space.dim());
        amps[index] = ONE;
        Ok(Self { space, amplitudes: amps })
    }

    /// Product state of single-qutrit amplitude triples (g, e, f) with the
    /// cavity in Fock state `photons`.
    pub fn product(space: HilbertSpace, qutrits: &[[C64; 3]], photons: usize) -> Result<Self> {
        if qutrits.len() != space.n_qutrits() {
            return Err(Error::WrongLength { expected: space.n_qutrits(), got: qutrits.len() });
        }
        let mut amps = Array1::zeros(space.dim());
        for q in 0..space.qutrit_dim() {
            let levels = crate::space::qutrit_levels(q, space.n_qutrits());
            let amp = levels.iter().zip(qutrits).fold(ONE, |acc, (l, c)| acc * c[l.index()]);
            amps[space.index_of(&levels, photons)?] = amp;
        }
        Self::normalized(space, amps)
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &QuantumState) -> Result<C64> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch);
        }
        Ok(self.amplitudes.iter().zip(other.amplitudes.iter()).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn projector(&self) -> ComplexMatrix {
        let n = self.amplitudes.len();
        Array2::from_shape_fn((n, n), |(i, j)| self.amplitudes[i] * self.amplitudes[j].conj())
    }

    pub fn with_global_phase(&self, phi: f64) -> Self {
        let p = C64::from_polar(1.0, phi);
        Self { space: self.space, amplitudes: self.amplitudes.mapv(|z| z * p) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    space: HilbertSpace,
    matrix: ComplexMatrix,
}

/// Relative Hermiticity tolerance for density matrices.
pub const DENSITY_HERMITIAN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityDiagnostics {
    pub hermiticity: f64,
    pub trace_deviation: f64,
    pub min_eigenvalue: f64,
}

impl DensityMatrix {
    pub fn new(space: HilbertSpace, matrix: ComplexMatrix) -> Result<Self> {
        if matrix.dim() != (space.dim(), space.dim()) {
            return Err(Error::DimensionMismatch { expected: space.dim(), got: matrix.nrows() });
        }
        let h = hermiticity_deviation(&matrix);
        if h > DENSITY_HERMITIAN_TOL {
            return Err(Error::NumericalCorruption(format!("density matrix not Hermitian ({h:.3e})")));
        }
        Ok(Self { space, matrix })
    }

    pub fn from_raw(space: HilbertSpace, matrix: ComplexMatrix) -> Self {
        assert_eq!(matrix.dim(), (space.dim(), space.dim()));
        Self { space, matrix }
    }

    pub fn from_pure(psi: &QuantumState) -> Self {
        Self { space: *psi.space(), matrix: psi.projector() }
    }

    pub fn maximally_mixed(space: HilbertSpace) -> Self {
        let d = space.dim();
        Self { space, matrix: identity(d).mapv(|z| z / d as f64) }
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> C64 {
        trace(&self.matrix)
    }

    /// Full validation including an eigen-decomposition; not for per-step use.
    pub fn diagnostics(&self) -> DensityDiagnostics {
        DensityDiagnostics {
            hermiticity: hermiticity_deviation(&self.matrix),
            trace_deviation: (self.trace() - ONE).norm(),
            min_eigenvalue: min_eigenvalue(&self.matrix),
        }
    }
}

/// Imaginary residue above which a fidelity is treated as corrupted.
pub const FIDELITY_IMAG_TOL: f64 = 1e-9;

/// `Re ⟨ψ|ρ|ψ⟩`.
pub fn pure_state_fidelity(psi: &QuantumState, rho: &DensityMatrix) -> Result<f64> {
    if psi.space() != rho.space() {
        return Err(Error::SpaceMismatch);
    }
    let amps = psi.amplitudes();
    let rho_psi = rho.matrix().dot(amps);
    let f: C64 = amps.iter().zip(rho_psi.iter()).map(|(a, b)| a.conj() * b).sum();
    if f.im.abs() > FIDELITY_IMAG_TOL {
        return Err(Error::NumericalCorruption(format!("fidelity has imaginary part {:.3e}", f.im)));
    }
    Ok(f.re)
}
