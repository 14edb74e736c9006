//! Gate-level circuit representation and exact simulation.
//!
//! Wire 0 is the most significant tensor factor. Gates are applied in list
//! order. `global_phase` multiplies the whole circuit by e^{i·phase}.

mod json;
mod qasm;

pub use json::{emit_json, parse_json};
pub use qasm::emit_qasm;

use crate::error::{Result, SynthError};
use crate::gates::{self, Mat2};
use crate::numerics::{cis, ComplexMatrix};
use num_complex::Complex64;

/// Largest register `to_unitary` will densify.
pub const DENSE_CAP: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    U { target: usize, m: Mat2 },
    Cnot { control: usize, target: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
    pub global_phase: f64,
}

/// Unit-modulus diagonal left behind by up-to-diagonal synthesis.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalPhases {
    pub values: Vec<Complex64>,
}

impl DiagonalPhases {
    pub fn identity(len: usize) -> Self {
        DiagonalPhases { values: vec![Complex64::new(1.0, 0.0); len] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn conj(&self) -> Self {
        DiagonalPhases { values: self.values.iter().map(|z| z.conj()).collect() }
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        crate::numerics::diag(&self.values)
    }

    pub fn max_modulus_error(&self) -> f64 {
        self.values.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max)
    }
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Circuit { n_qubits, gates: Vec::new(), global_phase: 0.0 }
    }

    pub fn u(&mut self, target: usize, m: Mat2) {
        debug_assert!(target < self.n_qubits);
        self.gates.push(Gate::U { target, m });
    }

    pub fn cx(&mut self, control: usize, target: usize) {
        debug_assert!(control < self.n_qubits && target < self.n_qubits && control != target);
        self.gates.push(Gate::Cnot { control, target });
    }

    pub fn cnot_count(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, Gate::Cnot { .. })).count()
    }

    /// Appends `other`, sending its wire `w` to `wires[w]`.
    pub fn append_mapped(&mut self, other: &Circuit, wires: &[usize]) {
        assert_eq!(wires.len(), other.n_qubits);
        for g in &other.gates {
            self.gates.push(match *g {
                Gate::U { target, m } => Gate::U { target: wires[target], m },
                Gate::Cnot { control, target } => Gate::Cnot { control: wires[control], target: wires[target] },
            });
        }
        self.global_phase += other.global_phase;
    }

    /// Appends `other` on the contiguous wires starting at `offset`.
    pub fn append_at(&mut self, other: &Circuit, offset: usize) {
        let wires: Vec<usize> = (offset..offset + other.n_qubits).collect();
        self.append_mapped(other, &wires);
    }

    pub fn invert(&self) -> Circuit {
        let gates = self
            .gates
            .iter()
            .rev()
            .map(|g| match *g {
                Gate::U { target, m } => Gate::U { target, m: gates::adjoint(&m) },
                c @ Gate::Cnot { .. } => c,
            })
            .collect();
        Circuit { n_qubits: self.n_qubits, gates, global_phase: -self.global_phase }
    }

    pub fn validate(&self) -> Result<()> {
        for (i, g) in self.gates.iter().enumerate() {
            match *g {
                Gate::U { target, m } => {
                    if target >= self.n_qubits {
                        return Err(SynthError::InvalidInput(format!("gate {i}: wire {target} out of range")));
                    }
                    let r = gates::unitarity_residual(&m);
                    if r > 1e-10 {
                        return Err(SynthError::NotUnitary { residual: r });
                    }
                }
                Gate::Cnot { control, target } => {
                    if control >= self.n_qubits || target >= self.n_qubits || control == target {
                        return Err(SynthError::InvalidInput(format!("gate {i}: bad cnot wires {control},{target}")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Applies every gate to each column of `m` (rows indexed by basis state).
    pub fn apply_to_columns(&self, m: &mut ComplexMatrix) {
        assert_eq!(m.nrows(), 1usize << self.n_qubits);
        let rows = m.nrows();
        let ph = cis(self.global_phase);
        let gates = fused(self);
        for col in m.as_mut_slice().chunks_mut(rows) {
            for g in &gates {
                apply_gate(self.n_qubits, g, col);
            }
            if self.global_phase != 0.0 {
                col.iter_mut().for_each(|z| *z *= ph);
            }
        }
    }

    pub fn to_unitary(&self) -> Result<ComplexMatrix> {
        if self.n_qubits > DENSE_CAP {
            return Err(SynthError::TooLarge { n: self.n_qubits, cap: DENSE_CAP });
        }
        let dim = 1usize << self.n_qubits;
        let mut m = ComplexMatrix::identity(dim, dim);
        self.apply_to_columns(&mut m);
        Ok(m)
    }

    pub fn apply(&self, state: &[Complex64]) -> Result<Vec<Complex64>> {
        let dim = 1usize << self.n_qubits;
        if state.len() != dim {
            return Err(SynthError::DimensionMismatch { expected: dim, got: state.len() });
        }
        let mut s = state.to_vec();
        for g in &fused(self) {
            apply_gate(self.n_qubits, g, &mut s);
        }
        let ph = cis(self.global_phase);
        s.iter_mut().for_each(|z| *z *= ph);
        Ok(s)
    }
}

const ZERO_C: Complex64 = Complex64::new(0.0, 0.0);

pub fn apply_gate(n: usize, g: &Gate, s: &mut [Complex64]) {
    match *g {
        Gate::U { target, m } => {
            let stride = 1usize << (n - 1 - target);
            if m[0][1] == ZERO_C && m[1][0] == ZERO_C {
                let (d0, d1) = (m[0][0], m[1][1]);
                for chunk in s.chunks_exact_mut(2 * stride) {
                    let (lo, hi) = chunk.split_at_mut(stride);
                    lo.iter_mut().for_each(|a| *a *= d0);
                    hi.iter_mut().for_each(|b| *b *= d1);
                }
                return;
            }
            for chunk in s.chunks_exact_mut(2 * stride) {
                let (lo, hi) = chunk.split_at_mut(stride);
                for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                    let (x, y) = (*a, *b);
                    *a = m[0][0] * x + m[0][1] * y;
                    *b = m[1][0] * x + m[1][1] * y;
                }
            }
        }
        Gate::Cnot { control, target } => {
            let cs = 1usize << (n - 1 - control);
            let ts = 1usize << (n - 1 - target);
            if ts < cs {
                // Inside each control=1 half, swap the target halves.
                for chunk in s.chunks_exact_mut(2 * cs) {
                    for pair in chunk[cs..].chunks_exact_mut(2 * ts) {
                        let (lo, hi) = pair.split_at_mut(ts);
                        lo.swap_with_slice(hi);
                    }
                }
            } else {
                for chunk in s.chunks_exact_mut(2 * ts) {
                    let (lo, hi) = chunk.split_at_mut(ts);
                    for (a, b) in lo.chunks_exact_mut(2 * cs).zip(hi.chunks_exact_mut(2 * cs)) {
                        a[cs..].swap_with_slice(&mut b[cs..]);
                    }
                }
            }
        }
    }
}

/// Merges runs of single-qubit gates on the same wire; the result has the
/// same action but is only used for simulation.
fn fused(c: &Circuit) -> Vec<Gate> {
    let mut out: Vec<Gate> = Vec::with_capacity(c.gates.len());
    let mut pending: Vec<Option<Mat2>> = vec![None; c.n_qubits];
    let flush = |out: &mut Vec<Gate>, pending: &mut Vec<Option<Mat2>>, w: usize| {
        if let Some(m) = pending[w].take() {
            out.push(Gate::U { target: w, m });
        }
    };
    for g in &c.gates {
        match *g {
            Gate::U { target, m } => {
                pending[target] = Some(match pending[target] {
                    Some(prev) => gates::mul(&m, &prev),
                    None => m,
                });
            }
            Gate::Cnot { control, target } => {
                flush(&mut out, &mut pending, control);
                flush(&mut out, &mut pending, target);
                out.push(*g);
            }
        }
    }
    for w in 0..c.n_qubits {
        flush(&mut out, &mut pending, w);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{h, X};
    use crate::numerics::{c64, identity, unitarity_residual, ONE, ZERO};
    use crate::random::{haar_unitary, random_state, rng, Rng};
    use proptest::prelude::*;
    use rand::Rng as _;

    pub(crate) fn random_circuit(g: &mut Rng, n: usize, len: usize) -> Circuit {
        let mut c = Circuit::new(n);
        c.global_phase = g.random_range(-3.0..3.0);
        for _ in 0..len {
            if n > 1 && g.random_bool(0.4) {
                let a = g.random_range(0..n);
                let mut b = g.random_range(0..n - 1);
                if b >= a {
                    b += 1;
                }
                c.cx(a, b);
            } else {
                let t = g.random_range(0..n);
                c.u(t, gates::from_matrix(&haar_unitary(g, 2)));
            }
        }
        c
    }

    #[test]
    fn empty_and_h() {
        assert_eq!(Circuit::new(3).cnot_count(), 0);
        let mut c = Circuit::new(1);
        c.u(0, h());
        assert!((c.to_unitary().unwrap() - gates::to_matrix(&h())).norm() < 1e-15);
    }

    #[test]
    fn cnot_msb_first() {
        // control on wire 1 (LSB), target wire 0 (MSB): |01> <-> |11>
        let mut c = Circuit::new(2);
        c.cx(1, 0);
        let u = c.to_unitary().unwrap();
        let mut p = ComplexMatrix::zeros(4, 4);
        for (i, j) in [(0, 0), (2, 2), (1, 3), (3, 1)] {
            p[(i, j)] = ONE;
        }
        assert_eq!(u, p);
    }

    #[test]
    fn h_on_msb_of_zero_state() {
        let mut c = Circuit::new(3);
        c.u(0, h());
        let mut s = vec![ZERO; 8];
        s[0] = ONE;
        let out = c.apply(&s).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((out[0] - c64(r, 0.0)).norm() < 1e-15 && (out[4] - c64(r, 0.0)).norm() < 1e-15);
        assert!(matches!(c.apply(&s[..4]), Err(SynthError::DimensionMismatch { .. })));
    }

    #[test]
    fn too_large() {
        assert!(matches!(Circuit::new(15).to_unitary(), Err(SynthError::TooLarge { .. })));
    }

    #[test]
    fn invert_cases() {
        let mut g = rng(12);
        let c = random_circuit(&mut g, 3, 40);
        let ci = c.invert();
        assert_eq!(ci.invert().gates.len(), c.gates.len());
        assert_eq!(ci.cnot_count(), c.cnot_count());
        let p = ci.to_unitary().unwrap() * c.to_unitary().unwrap();
        assert!((p - identity(8)).norm() < 1e-10);
        let mut hh = Circuit::new(2);
        hh.u(0, h());
        hh.u(1, h());
        assert!((hh.invert().to_unitary().unwrap() - hh.to_unitary().unwrap()).norm() < 1e-14);
    }

    #[test]
    fn apply_matches_dense_on_8_qubits() {
        let mut g = rng(13);
        let c = random_circuit(&mut g, 8, 300);
        let u = c.to_unitary().unwrap();
        assert!(unitarity_residual(&u) < 1e-9);
        let s = random_state(&mut g, 8);
        let out = c.apply(&s).unwrap();
        let dense = &u * nalgebra::DVector::from_vec(s);
        let err: f64 = out.iter().zip(dense.iter()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        assert!(err < 1e-10);
        // 12 qubits: norm preservation
        let c12 = random_circuit(&mut g, 12, 200);
        let s = random_state(&mut g, 12);
        let out = c12.apply(&s).unwrap();
        let nrm: f64 = out.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!((nrm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn append_mapped_places_wires() {
        let mut inner = Circuit::new(1);
        inner.u(0, X);
        let mut c = Circuit::new(3);
        c.append_at(&inner, 2);
        let mut s = vec![ZERO; 8];
        s[0] = ONE;
        assert!((c.apply(&s).unwrap()[1] - ONE).norm() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn prop_apply_agrees_with_dense(seed in any::<u64>(), n in 1usize..=6, len in 0usize..60) {
            let mut g = rng(seed);
            let c = random_circuit(&mut g, n, len);
            let u = c.to_unitary().unwrap();
            let s = random_state(&mut g, n);
            let out = c.apply(&s).unwrap();
            let dense = &u * nalgebra::DVector::from_vec(s);
            let err: f64 = out.iter().zip(dense.iter()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            prop_assert!(err < 1e-10);
            prop_assert_eq!(c.invert().cnot_count(), c.cnot_count());
            prop_assert_eq!(parse_json(&emit_json(&c)).unwrap().cnot_count(), c.cnot_count());
        }
    }
}

#[cfg(test)]
pub(crate) use tests::random_circuit;
