// SPDX-License-Identifier: Apache-2.0

//! Analytic side of the gate: logical encoding, the target phase gate, and
//! the closed-form propagator of the diagonal effective Hamiltonian.
//!
//! Logical bitstrings put the control first (most significant bit) and the
//! targets after it in qutrit order.

use std::f64::consts::FRAC_1_SQRT_2;

use ndarray::Array1;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{derive, SystemParams};
use crate::operators::{ComplexMatrix, QuantumState, ONE, ZERO};
use crate::space::{qutrit_levels, HilbertSpace, Level};

/// Asymmetric encoding: `0 -> g` everywhere, `1 -> f` on the control and
/// `1 -> e` on targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncodingMap {
    n_qutrits: usize,
}

impl EncodingMap {
    pub fn new(n_qutrits: usize) -> Result<Self> {
        if n_qutrits < 2 {
            return Err(Error::TooFewQutrits(n_qutrits));
        }
        Ok(Self { n_qutrits })
    }

    pub fn n_qutrits(&self) -> usize {
        self.n_qutrits
    }

    /// Level carrying logical `bit` on qutrit `k` (1-based).
    pub fn level(&self, k: usize, bit: bool) -> Level {
        match (k, bit) {
            (_, false) => Level::G,
            (1, true) => Level::F,
            (_, true) => Level::E,
        }
    }

    pub fn levels(&self, bits: &[bool]) -> Result<Vec<Level>> {
        if bits.len() != self.n_qutrits {
            return Err(Error::WrongLength { expected: self.n_qutrits, got: bits.len() });
        }
        Ok(bits.iter().enumerate().map(|(i, &b)| self.level(i + 1, b)).collect())
    }

    /// Inverse map; `None` outside the encoded subspace.
    pub fn decode(&self, levels: &[Level]) -> Option<Vec<bool>> {
        if levels.len() != self.n_qutrits {
            return None;
        }
        levels
            .iter()
            .enumerate()
            .map(|(i, &l)| match l {
                Level::G => Some(false),
                l if l == self.level(i + 1, true) => Some(true),
                _ => None,
            })
            .collect()
    }

    /// Basis index (cavity vacuum) for each logical basis state, in
    /// lexicographic order of bitstrings.
    pub fn basis_indices(&self, space: &HilbertSpace) -> Result<Vec<usize>> {
        (0..1usize << self.n_qutrits)
            .map(|x| space.index_of(&self.levels(&int_to_bits(x, self.n_qutrits))?, 0))
            .collect()
    }
}

pub fn parse_bits(s: &str) -> Result<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(Error::InvalidBitstring(s.to_string())),
        })
        .collect()
}

pub fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// Big-endian: bit 0 of the result is the most significant bit of `x`.
pub fn int_to_bits(x: usize, n: usize) -> Vec<bool> {
    (0..n).map(|i| (x >> (n - 1 - i)) & 1 == 1).collect()
}

/// Diagonal signs of the one-control, multi-target phase gate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GateSpec {
    n_qubits: usize,
    signs: Vec<i8>,
}

impl GateSpec {
    pub fn new(n_qubits: usize) -> Result<Self> {
        if n_qubits < 2 {
            return Err(Error::TooFewQutrits(n_qubits));
        }
        let signs = (0..1usize << n_qubits).map(|x| sign_of(&int_to_bits(x, n_qubits))).collect();
        Ok(Self { n_qubits, signs })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn sign(&self, bits: &[bool]) -> i8 {
        sign_of(bits)
    }

    /// One `bitstring sign` line per basis state, lexicographic order.
    pub fn truth_table(&self) -> String {
        let mut out = String::new();
        for (x, s) in self.signs.iter().enumerate() {
            let bits = bits_to_string(&int_to_bits(x, self.n_qubits));
            out.push_str(&format!("{bits} {:+}\n", s));
        }
        out
    }
}

fn sign_of(bits: &[bool]) -> i8 {
    if !bits[0] {
        return 1;
    }
    let flips = bits[1..].iter().filter(|b| **b).count();
    if flips % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn ideal_gate_matrix(n: usize) -> Result<ComplexMatrix> {
    let spec = GateSpec::new(n)?;
    let signs: Vec<C64> = spec.signs().iter().map(|&s| C64::new(s as f64, 0.0)).collect();
    Ok(crate::operators::diag(&signs))
}

pub fn truth_table_text(n: usize) -> Result<String> {
    Ok(GateSpec::new(n)?.truth_table())
}

/// Encoded product ket with the cavity in vacuum.
pub fn encode(bits: &str, space: &HilbertSpace) -> Result<QuantumState> {
    let bits = parse_bits(bits)?;
    let map = EncodingMap::new(space.n_qutrits())?;
    let idx = space.index_of(&map.levels(&bits)?, 0)?;
    QuantumState::basis(*space, idx)
}

/// `(|g⟩+|f⟩)/√2` on the control, `(|g⟩+|e⟩)/√2` on every target, cavity
/// in vacuum.
pub fn superposition_input(space: &HilbertSpace) -> Result<QuantumState> {
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    let mut factors = vec![[h, ZERO, h]];
    factors.extend(std::iter::repeat_n([h, h, ZERO], space.n_qutrits() - 1));
    QuantumState::product(*space, &factors, 0)
}

/// `exp(-i H_enc t)` on the bare `3^n` qutrit space, assembled as the
/// control Stark factor times one controlled-phase factor per target.
pub fn closed_form_unitary(params: &SystemParams, n: usize, t: f64) -> Result<ComplexMatrix> {
    if n < 2 {
        return Err(Error::TooFewQutrits(n));
    }
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidParams(format!("evolution time must be finite and >= 0, got {t}")));
    }
    let derived = derive(&SystemParams { n_qutrits: n, ..*params })?;
    let control_phase = C64::from_polar(1.0, -derived.stark_f1 * t);
    let pair_phase = C64::from_polar(1.0, -derived.cross_shift * t);
    let dim = 3usize.pow(n as u32);
    let mut u = ComplexMatrix::zeros((dim, dim));
    for q in 0..dim {
        let levels = qutrit_levels(q, n);
        let mut phase = ONE;
        if levels[0] == Level::F {
            phase *= control_phase;
            for l in &levels[1..] {
                if *l == Level::E {
                    phase *= pair_phase;
                }
            }
        }
        u[(q, q)] = phase;
    }
    Ok(u)
}

/// Weight allowed outside the encoded subspace ⊗ vacuum.
pub const ENCODABLE_TOL: f64 = 1e-9;

/// Applies the ideal gate through the encoding; the cavity is untouched.
pub fn ideal_output_state(input: &QuantumState, n: usize) -> Result<QuantumState> {
    let space = *input.space();
    if space.n_qutrits() != n {
        return Err(Error::SpaceMismatch);
    }
    let map = EncodingMap::new(n)?;
    let amps = input.amplitudes();
    let mut out = Array1::zeros(space.dim());
    let mut outside = 0.0;
    for (i, &a) in amps.iter().enumerate() {
        if a == ZERO {
            continue;
        }
        let (levels, photons) = space.decompose(i);
        match map.decode(&levels) {
            Some(bits) if photons == 0 => out[i] = a * sign_of(&bits) as f64,
            _ => outside += a.norm_sqr(),
        }
    }
    if outside > ENCODABLE_TOL {
        return Err(Error::NotEncodable(outside));
    }
    Ok(QuantumState::from_raw(space, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::identity;

    /// Brute-force sign count, independent of `GateSpec`.
    fn count_negative(n: usize) -> usize {
        (0..1usize << n)
            .filter(|x| {
                let control = (x >> (n - 1)) & 1 == 1;
                let weight = (0..n - 1).filter(|b| (x >> b) & 1 == 1).count();
                control && weight % 2 == 1
            })
            .count()
    }

    #[test]
    fn ideal_gate_examples() {
        let cz = ideal_gate_matrix(2).unwrap();
        let d: Vec<f64> = cz.diag().iter().map(|z| z.re).collect();
        assert_eq!(d, vec![1.0, 1.0, 1.0, -1.0]);
        let spec = GateSpec::new(3).unwrap();
        assert_eq!(spec.signs(), &[1, 1, 1, 1, 1, -1, -1, 1]);
        for n in 2..=10 {
            let spec = GateSpec::new(n).unwrap();
            let neg = spec.signs().iter().filter(|s| **s < 0).count();
            assert_eq!(neg, 1 << (n - 2));
            assert_eq!(neg, count_negative(n));
        }
        assert_eq!(ideal_gate_matrix(1), Err(Error::TooFewQutrits(1)));
    }

    #[test]
    fn ideal_gate_involutory() {
        for n in 2..=6 {
            let u = ideal_gate_matrix(n).unwrap();
            assert_eq!(u.dot(&u), identity(1 << n));
        }
    }

    #[test]
    fn truth_table_format() {
        let t = truth_table_text(2).unwrap();
        assert_eq!(t, "00 +1\n01 +1\n10 +1\n11 -1\n");
    }

    #[test]
    fn encode_examples() {
        let space = HilbertSpace::new(3, 5).unwrap();
        assert_eq!(encode("000", &space).unwrap().amplitudes()[0], ONE);
        assert_eq!(encode("111", &space).unwrap().amplitudes()[132], ONE);
        assert!(matches!(encode("11", &space), Err(Error::WrongLength { .. })));
        assert!(matches!(encode("1x1", &space), Err(Error::InvalidBitstring(_))));
        let map = EncodingMap::new(3).unwrap();
        let mut idx = map.basis_indices(&space).unwrap();
        idx.sort();
        idx.dedup();
        assert_eq!(idx.len(), 8);
    }

    #[test]
    fn closed_form_examples() {
        let p = SystemParams::reference_point();
        assert_eq!(closed_form_unitary(&p, 3, 0.0).unwrap(), identity(27));
        let tg = derive(&p).unwrap().gate_time;
        let u = closed_form_unitary(&p, 3, tg).unwrap();
        let space = HilbertSpace::new(3, 1).unwrap();
        let idx = |s: &str| crate::space::qutrit_index(&space.parse_levels(s).unwrap());
        assert!((u[(idx("fee"), idx("fee"))] - ONE).norm() < 1e-10);
        assert!((u[(idx("fge"), idx("fge"))] + ONE).norm() < 1e-10);
        assert!(closed_form_unitary(&p, 3, -1.0).is_err());
    }

    #[test]
    fn gate_realized_at_gate_time() {
        for n in 2..=5 {
            let p = SystemParams { n_qutrits: n, ..SystemParams::reference_point() };
            let tg = derive(&p).unwrap().gate_time;
            let u = closed_form_unitary(&p, n, tg).unwrap();
            let map = EncodingMap::new(n).unwrap();
            let ideal = ideal_gate_matrix(n).unwrap();
            for x in 0..1usize << n {
                let q = crate::space::qutrit_index(&map.levels(&int_to_bits(x, n)).unwrap());
                assert!((u[(q, q)] - ideal[(x, x)]).norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn ideal_output_examples() {
        let space = HilbertSpace::new(3, 5).unwrap();
        let s = encode("101", &space).unwrap();
        let out = ideal_output_state(&s, 3).unwrap();
        assert_eq!(out.amplitudes()[space.index_of(&space.parse_levels("fge").unwrap(), 0).unwrap()], -ONE);
        for t in ["000", "001", "010", "011"] {
            let s = encode(t, &space).unwrap();
            assert_eq!(ideal_output_state(&s, 3).unwrap(), s);
        }
        let bad = QuantumState::basis(space, space.index_of(&space.parse_levels("egg").unwrap(), 0).unwrap()).unwrap();
        assert!(matches!(ideal_output_state(&bad, 3), Err(Error::NotEncodable(_))));
        let photon = QuantumState::basis(space, 1).unwrap();
        assert!(matches!(ideal_output_state(&photon, 3), Err(Error::NotEncodable(_))));
    }

    #[test]
    fn superposition_input_output() {
        let space = HilbertSpace::new(3, 5).unwrap();
        let out = ideal_output_state(&superposition_input(&space).unwrap(), 3).unwrap();
        // (1/√8)[|g⟩(|g⟩+|e⟩)(|g⟩+|e⟩) + |f⟩(|g⟩-|e⟩)(|g⟩-|e⟩)]
        let amp = 1.0 / 8f64.sqrt();
        let expected = [
            ("ggg", 1.0), ("gge", 1.0), ("geg", 1.0), ("gee", 1.0),
            ("fgg", 1.0), ("fge", -1.0), ("feg", -1.0), ("fee", 1.0),
        ];
        let mut total = 0.0;
        for (label, s) in expected {
            let i = space.index_of(&space.parse_levels(label).unwrap(), 0).unwrap();
            assert!((out.amplitudes()[i] - C64::new(s * amp, 0.0)).norm() < 1e-15, "{label}");
            total += out.amplitudes()[i].norm_sqr();
        }
        assert!((total - 1.0).abs() < 1e-12);
        assert!((out.norm() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn closed_form_is_identity_off_control() {
        let p = SystemParams::reference_point();
        let u = closed_form_unitary(&p, 2, 12.3).unwrap();
        // control in g or e: indices 0..6 of the 3x3 layout
        for q in 0..6 {
            assert_eq!(u[(q, q)], ONE);
        }
        assert_ne!(u[(6, 6)], ONE);
    }
}
