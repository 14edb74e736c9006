//! Multiplexor demultiplexing and uniformly controlled R_Z rotations.
//!
//! A UCRZ on k+1 wires rotates wire 0 and selects on wires 1..=k (wire 1 is
//! the most significant select bit). Its target matrix is
//! Σ_j R_Z(−2θ_j) ⊗ |j⟩⟨j|.

use crate::circuit::Circuit;
use crate::error::{Result, SynthError};
use crate::gates::{adjoint, det, h, mul, phase_diag, rz, unitarity_residual, Mat2};
use crate::numerics::{arg, cis, diag, direct_sum, kron, unitary_eig, ComplexMatrix, I, ONE};
use num_complex::Complex64;
use std::f64::consts::FRAC_PI_4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UcrzVariant {
    /// 2^k C-NOTs, exact.
    Full,
    /// Full without its trailing C-NOT: Full = CX(1→0)·RL.
    RL,
    /// Reversed Full without its leading C-NOT: Full = RR·CX(1→0).
    RR,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UcrzSpec {
    pub k: usize,
    pub thetas: Vec<f64>,
    pub variant: UcrzVariant,
}

impl UcrzSpec {
    pub fn new(thetas: Vec<f64>, variant: UcrzVariant) -> Result<Self> {
        let len = thetas.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(SynthError::InvalidInput(format!("UCRZ needs 2^k angles with k >= 1, got {len}")));
        }
        if thetas.iter().any(|t| !t.is_finite()) {
            return Err(SynthError::InvalidInput("non-finite UCRZ angle".into()));
        }
        Ok(UcrzSpec { k: len.trailing_zeros() as usize, thetas, variant })
    }
}

#[inline]
pub fn gray(i: usize) -> usize {
    i ^ (i >> 1)
}

/// In-place normalized Walsh–Hadamard transform.
fn fwht(v: &mut [f64]) {
    let n = v.len();
    let mut h = 1;
    while h < n {
        for i in (0..n).step_by(2 * h) {
            for j in i..i + h {
                let (a, b) = (v[j], v[j + h]);
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
        h *= 2;
    }
    let s = (n as f64).sqrt();
    v.iter_mut().for_each(|x| *x /= s);
}

/// Solves (H^{⊗k}·P_G)·x = θ, where H is the normalized Hadamard and
/// (P_G·x)_{gray(i)} = x_i.
pub fn ucrz_angles(thetas: &[f64]) -> Vec<f64> {
    let mut y = thetas.to_vec();
    fwht(&mut y);
    (0..y.len()).map(|i| y[gray(i)]).collect()
}

/// Wire (1-based within the select register) of the bit flipped between
/// gray(i) and gray(i+1), cyclically.
fn flip_wire(k: usize, i: usize) -> usize {
    let m = 1usize << k;
    let bit = (gray(i) ^ gray((i + 1) % m)).trailing_zeros() as usize;
    k - bit
}

/// The UCRZ circuit on k+1 wires.
pub fn synth_ucrz(spec: &UcrzSpec) -> Circuit {
    let k = spec.k;
    let m = 1usize << k;
    let x = ucrz_angles(&spec.thetas);
    let scale = -2.0 / (m as f64).sqrt();
    let mut c = Circuit::new(k + 1);
    match spec.variant {
        UcrzVariant::Full | UcrzVariant::RL => {
            for i in 0..m {
                c.u(0, rz(scale * x[i]));
                if i + 1 < m || spec.variant == UcrzVariant::Full {
                    c.cx(flip_wire(k, i), 0);
                }
            }
        }
        UcrzVariant::RR => {
            for i in (0..m).rev() {
                if i + 1 < m {
                    c.cx(flip_wire(k, i), 0);
                }
                c.u(0, rz(scale * x[i]));
            }
        }
    }
    c
}

/// Dense target Σ_j R_Z(−2θ_j) ⊗ |j⟩⟨j|.
pub fn ucrz_matrix(thetas: &[f64]) -> ComplexMatrix {
    let top: Vec<_> = thetas.iter().map(|t| cis(-t)).collect();
    let bot: Vec<_> = thetas.iter().map(|t| cis(*t)).collect();
    direct_sum(&diag(&top), &diag(&bot))
}

/// A1 ⊕ A2 = (I₂⊗W)·(D⊕D†)·(I₂⊗V†), D = diag(e^{i·d}). Returns (V, d, W).
pub fn demux(a1: &ComplexMatrix, a2: &ComplexMatrix) -> Result<(ComplexMatrix, Vec<f64>, ComplexMatrix)> {
    if a1.shape() != a2.shape() {
        return Err(SynthError::DimensionMismatch { expected: a1.nrows(), got: a2.nrows() });
    }
    crate::numerics::check_unitary(a1, 1e-8)?;
    crate::numerics::check_unitary(a2, 1e-8)?;
    let (w, phases) = unitary_eig(&(a1 * a2.adjoint()))?;
    let d: Vec<f64> = phases.iter().map(|p| p / 2.0).collect();
    let dm = diag(&d.iter().map(|&x| cis(x)).collect::<Vec<_>>());
    let vdag = dm * w.adjoint() * a2;
    Ok((vdag.adjoint(), d, w))
}

/// ‖(I₂⊗Δ)·R − R·(I₂⊗Δ)‖_F for the UCRZ variant R with the given angles.
pub fn diag_commutator(variant: UcrzVariant, thetas: &[f64], delta: &[Complex64]) -> Result<f64> {
    let spec = UcrzSpec::new(thetas.to_vec(), variant)?;
    let r = synth_ucrz(&spec).to_unitary()?;
    let dd = kron(&crate::numerics::identity(2), &diag(delta));
    Ok((&dd * &r - &r * &dd).norm())
}

/// Circuit for diag(e^{iφ_x}) on log2(len) wires, global phase included.
/// Uses 2^p − 2 C-NOTs for p ≥ 2 wires.
pub fn diagonal_gate(phases: &[f64]) -> Result<Circuit> {
    let len = phases.len();
    if len < 2 || !len.is_power_of_two() {
        return Err(SynthError::InvalidInput(format!("diagonal needs 2^p phases with p >= 1, got {len}")));
    }
    let p = len.trailing_zeros() as usize;
    let mut c = Circuit::new(p);
    if p == 1 {
        c.u(0, phase_diag(cis(phases[0]), cis(phases[1])));
        return Ok(c);
    }
    let half = len / 2;
    let (lo, hi) = phases.split_at(half);
    let thetas: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| -(a - b) / 2.0).collect();
    let rest: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| (a + b) / 2.0).collect();
    c.append_at(&diagonal_gate(&rest)?, 1);
    c.append_at(&synth_ucrz(&UcrzSpec::new(thetas, UcrzVariant::Full)?), 0);
    Ok(c)
}

/// Uniformly controlled single-qubit gate Σ_j |j⟩⟨j| ⊗ U_j realized up to a
/// diagonal: M = diag(diagonal)·C, where C alternates `gates` with CZs.
#[derive(Debug, Clone)]
pub struct UcgDecomposition {
    /// Target gates in time order; one more than `cz_controls`.
    pub gates: Vec<Mat2>,
    /// Control index (0 = most significant) of the CZ following each gate.
    pub cz_controls: Vec<usize>,
    /// Diagonal over (controls, target), target least significant.
    pub diagonal: Vec<Complex64>,
}

impl UcgDecomposition {
    pub fn cnot_count(&self) -> usize {
        self.cz_controls.len()
    }

    /// Appends the circuit C with each CZ written as H·CX·H, the Hadamards
    /// merged into the neighbouring target gates.
    pub fn emit(&self, c: &mut Circuit, target: usize, controls: &[usize]) {
        let hd = h();
        let last = self.gates.len() - 1;
        for (i, g) in self.gates.iter().enumerate() {
            let m = match (i == 0, i == last) {
                (true, true) => *g,
                (true, false) => mul(&hd, g),
                (false, true) => mul(g, &hd),
                (false, false) => mul(&hd, &mul(g, &hd)),
            };
            c.u(target, m);
            if i < last {
                c.cx(controls[self.cz_controls[i]], target);
            }
        }
    }
}

/// A ⊕ B = (r†⊕r)·(u⊕u)·(D⊕D†)·(w⊕w) with D = diag(e^{iπ/4}, e^{−iπ/4}).
fn demux_pair(a: &Mat2, b: &Mat2) -> (Mat2, Mat2, [Complex64; 2]) {
    let x = mul(a, &adjoint(b));
    let delta = det(&x);
    let rho = if x[1][1].norm() > 1e-150 {
        let q = -x[0][0] / x[1][1];
        q / q.norm()
    } else {
        ONE
    };
    let r1 = cis(arg(delta.conj() / rho) / 4.0);
    let r2 = cis(arg(rho) / 2.0) * r1;
    let rm = phase_diag(r1, r2);
    let ap = mul(&rm, a);
    let y = mul(&rm, &mul(&x, &rm));
    // Eigenvector of y for +i from the rank-one matrix y + i·I.
    let p = [[y[0][0] + I, y[0][1]], [y[1][0], y[1][1] + I]];
    let n0 = (p[0][0].norm_sqr() + p[1][0].norm_sqr()).sqrt();
    let n1 = (p[0][1].norm_sqr() + p[1][1].norm_sqr()).sqrt();
    let e1 = if n0 >= n1 { [p[0][0] / n0, p[1][0] / n0] } else { [p[0][1] / n1, p[1][1] / n1] };
    let u = [[e1[0], -e1[1].conj()], [e1[1], e1[0].conj()]];
    let omega = cis(FRAC_PI_4);
    let w = mul(&phase_diag(omega.conj(), omega), &mul(&adjoint(&u), &ap));
    (u, w, [r1, r2])
}

fn ucg_rec(gates: &[Mat2], first: usize) -> UcgDecomposition {
    if gates.len() == 1 {
        return UcgDecomposition { gates: vec![gates[0]], cz_controls: vec![], diagonal: vec![ONE, ONE] };
    }
    let half = gates.len() / 2;
    let parts: Vec<_> = (0..half).map(|j| demux_pair(&gates[j], &gates[half + j])).collect();
    let ws: Vec<Mat2> = parts.iter().map(|p| p.1).collect();
    let dw = ucg_rec(&ws, first + 1);
    let sdg = phase_diag(ONE, -I);
    let us: Vec<Mat2> = parts
        .iter()
        .enumerate()
        .map(|(j, p)| mul(&mul(&p.0, &sdg), &phase_diag(dw.diagonal[2 * j], dw.diagonal[2 * j + 1])))
        .collect();
    let du = ucg_rec(&us, first + 1);
    let omega = cis(FRAC_PI_4);
    let mut diagonal = vec![ONE; 4 * half];
    for c in 0..2 {
        for j in 0..half {
            for t in 0..2 {
                let r = if c == 0 { parts[j].2[t].conj() } else { parts[j].2[t] };
                let s = if c == 0 { omega } else { -I * omega };
                diagonal[((c * half + j) << 1) | t] = s * r * du.diagonal[(j << 1) | t];
            }
        }
    }
    let mut out = dw;
    out.gates.extend(du.gates);
    out.cz_controls.push(first);
    out.cz_controls.extend(du.cz_controls);
    out.diagonal = diagonal;
    out
}

/// Decomposes the UCG with 2^r target gates into 2^r − 1 C-NOTs up to a
/// diagonal applied after it.
pub fn ucg_up_to_diag(gates: &[Mat2]) -> Result<UcgDecomposition> {
    let len = gates.len();
    if len == 0 || !len.is_power_of_two() {
        return Err(SynthError::InvalidInput(format!("UCG needs 2^r gates, got {len}")));
    }
    if let Some(r) = gates.iter().map(unitarity_residual).find(|r| !(*r <= 1e-9)) {
        return Err(SynthError::NotUnitary { residual: r });
    }
    Ok(ucg_rec(gates, 0))
}

/// Dense Σ_j |j⟩⟨j| ⊗ U_j, target least significant.
pub fn ucg_matrix(gates: &[Mat2]) -> ComplexMatrix {
    let dim = 2 * gates.len();
    let mut m = ComplexMatrix::zeros(dim, dim);
    for (j, g) in gates.iter().enumerate() {
        for a in 0..2 {
            for b in 0..2 {
                m[(2 * j + a, 2 * j + b)] = g[a][b];
            }
        }
    }
    m
}
