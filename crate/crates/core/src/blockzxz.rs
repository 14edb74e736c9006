//! Recursive block-ZXZ synthesis of unitaries and isometries with residual
//! diagonal migration between recursion levels.
//!
//! Up-to-diagonal results use a right residual: circuit = U·diag(residual).

use crate::circuit::{Circuit, DiagonalPhases};
use crate::error::{Result, SynthError};
use crate::gates::{self, h};
use crate::multiplexor::{demux, synth_ucrz, UcrzSpec, UcrzVariant};
use crate::numerics::{
    c64, check_unitary, complete_to_unitary, diag, direct_sum, identity, kron, polar_left, unitarity_residual,
    ComplexMatrix, I, ONE,
};
use crate::su4::{decompose_su4_up_to_diagonal, decompose_u4_exact};
use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct BlockZxzParts {
    pub m1: ComplexMatrix,
    pub m2: ComplexMatrix,
    pub l: ComplexMatrix,
    pub n: ComplexMatrix,
}

impl BlockZxzParts {
    /// (M1⊕M2)·(H⊗I)·(I⊕L)·(H⊗I)·(I⊕N).
    pub fn reconstruct(&self) -> ComplexMatrix {
        let half = self.m1.nrows();
        let hh = kron(&gates::to_matrix(&h()), &identity(half));
        direct_sum(&self.m1, &self.m2) * &hh * direct_sum(&identity(half), &self.l) * &hh * direct_sum(&identity(half), &self.n)
    }
}

#[derive(Debug, Clone)]
pub struct SynthesisResult {
    pub circuit: Circuit,
    pub residual: DiagonalPhases,
    pub cnots: usize,
}

impl SynthesisResult {
    fn new(circuit: Circuit, residual: Vec<Complex64>) -> Self {
        let cnots = circuit.cnot_count();
        SynthesisResult { circuit, residual: DiagonalPhases { values: residual }, cnots }
    }
}

pub fn n_qubits_of(dim: usize) -> Result<usize> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(SynthError::InvalidInput(format!("dimension {dim} is not a power of two >= 2")));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// N_{u·Δ}(n) = (11/24)4^n − (3/2)2^n + 2/3 for n ≥ 2.
pub fn n_u_diag(n: usize) -> u64 {
    if n <= 1 {
        return 0;
    }
    (11 * 4u64.pow(n as u32) + 16 - 36 * 2u64.pow(n as u32)) / 24
}

/// N_u(n) = (11/24)4^n − (3/2)2^n + 5/3 for n ≥ 2.
pub fn n_u(n: usize) -> u64 {
    if n <= 1 {
        return 0;
    }
    (11 * 4u64.pow(n as u32) + 40 - 36 * 2u64.pow(n as u32)) / 24
}

/// N_{iso·Δ}(2^{n−1}, n) = (11/32)4^n − (5/4)2^n + 1 for n ≥ 3; 2 for n = 2.
pub fn n_iso_diag(n: usize) -> u64 {
    match n {
        0 | 1 => 0,
        2 => 2,
        _ => (11 * 4u64.pow(n as u32) + 32 - 40 * 2u64.pow(n as u32)) / 32,
    }
}

fn blocks(u: &ComplexMatrix) -> [ComplexMatrix; 4] {
    let h = u.nrows() / 2;
    [
        u.view((0, 0), (h, h)).into_owned(),
        u.view((0, h), (h, h)).into_owned(),
        u.view((h, 0), (h, h)).into_owned(),
        u.view((h, h), (h, h)).into_owned(),
    ]
}

pub fn block_zxz(u: &ComplexMatrix) -> Result<BlockZxzParts> {
    n_qubits_of(u.nrows())?;
    check_unitary(u, 1e-8)?;
    let [a, b, c, d] = blocks(u);
    let (sa, ua) = polar_left(&a)?;
    let (sb, ub) = polar_left(&b)?;
    let ubd = ub.adjoint();
    let m1 = (sa + sb * I) * &ua;
    let m2 = c + d * &ubd * &ua * I;
    let n = (&ubd * &ua * I).adjoint();
    let l = m1.adjoint() * &a * c64(2.0, 0.0) - identity(a.nrows());
    let parts = BlockZxzParts { m1, m2, l, n };
    for (name, m) in [("M1", &parts.m1), ("M2", &parts.m2), ("L", &parts.l), ("N", &parts.n)] {
        let r = unitarity_residual(m);
        if r > 1e-7 {
            return Err(SynthError::NumericalFailure { context: format!("block-ZXZ part {name}"), residual: r });
        }
    }
    Ok(parts)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Exact,
    UpToDiag,
}

fn single_qubit(u: &ComplexMatrix) -> Circuit {
    let mut c = Circuit::new(1);
    c.u(0, gates::from_matrix(u));
    c
}

fn ucrz_circuit(d: &[f64], variant: UcrzVariant) -> Circuit {
    let th: Vec<f64> = d.iter().map(|x| -x).collect();
    synth_ucrz(&UcrzSpec::new(th, variant).expect("demux yields 2^k phases"))
}

/// Z on the top wire of an m-qubit block.
fn z_top(dim: usize) -> ComplexMatrix {
    kron(&gates::to_matrix(&gates::Z), &identity(dim / 2))
}

fn left_diag(d: &[Complex64], m: &ComplexMatrix) -> ComplexMatrix {
    let mut out = m.clone();
    for (i, z) in d.iter().enumerate() {
        let mut row = out.row_mut(i);
        row *= *z;
    }
    out
}

fn conj_all(v: &[Complex64]) -> Vec<Complex64> {
    v.iter().map(|z| z.conj()).collect()
}

fn synth(u: &ComplexMatrix, mode: Mode) -> Result<(Circuit, Vec<Complex64>)> {
    let dim = u.nrows();
    let n = n_qubits_of(dim).or_else(|e| if dim == 1 { Ok(0) } else { Err(e) })?;
    match (n, mode) {
        (1, _) => return Ok((single_qubit(u), vec![ONE; 2])),
        (2, Mode::Exact) => return Ok((decompose_u4_exact(u)?, vec![ONE; 4])),
        (2, Mode::UpToDiag) => {
            // Δ·U† inverted gives U·Δ†.
            let (dec, c) = decompose_su4_up_to_diagonal(&u.adjoint())?;
            return Ok((c.invert(), conj_all(&dec.delta())));
        }
        _ => {}
    }
    let half = dim / 2;
    let parts = block_zxz(u)?;
    let (v_m, d_m, w_m) = demux(&parts.m1, &parts.m2)?;
    let (v_n, d_n, w_n) = demux(&identity(half), &parts.n)?;
    let zt = z_top(half);
    let vmd = v_m.adjoint();
    let l0 = &vmd * &w_n;
    let l1 = &zt * &vmd * &parts.l * &w_n * &zt;
    let (v_l, d_l, w_l) = demux(&l0, &l1)?;

    let (c_wm, r1) = synth(&w_m, Mode::UpToDiag)?;
    let (c_wl, r2) = synth(&left_diag(&conj_all(&r1), &w_l), Mode::UpToDiag)?;
    let (c_vl, r3) = synth(&left_diag(&conj_all(&r2), &v_l.adjoint()), Mode::UpToDiag)?;
    let (c_vn, r4) = synth(&left_diag(&conj_all(&r3), &v_n.adjoint()), mode)?;

    let mut c = Circuit::new(n);
    c.append_at(&c_vn, 1);
    c.append_at(&ucrz_circuit(&d_n, UcrzVariant::RL), 0);
    c.u(0, h());
    c.append_at(&c_vl, 1);
    c.append_at(&ucrz_circuit(&d_l, UcrzVariant::Full), 0);
    c.append_at(&c_wl, 1);
    c.u(0, h());
    c.append_at(&ucrz_circuit(&d_m, UcrzVariant::RR), 0);
    c.append_at(&c_wm, 1);
    let residual = [r4.clone(), r4].concat();
    Ok((c, residual))
}

/// Largest register checked densely after synthesis; larger ones get a
/// few statevector column checks.
const DENSE_CHECK_QUBITS: usize = 4;

fn check_end_to_end(c: &Circuit, target: &ComplexMatrix, residual: &[Complex64], context: &str) -> Result<()> {
    let cols = target.ncols();
    let r = if c.n_qubits <= DENSE_CHECK_QUBITS {
        let got = c.to_unitary()?;
        (got.columns(0, cols) - target * diag(&residual[..cols])).norm()
    } else {
        let dim = target.nrows();
        let mut worst: f64 = 0.0;
        for j in [0, cols / 2, cols - 1] {
            let mut e = vec![crate::numerics::ZERO; dim];
            e[j] = ONE;
            let out = c.apply(&e)?;
            let err: f64 = (0..dim).map(|i| (out[i] - target[(i, j)] * residual[j]).norm_sqr()).sum::<f64>().sqrt();
            worst = worst.max(err);
        }
        worst
    };
    if r > 1e-8 {
        return Err(SynthError::NumericalFailure { context: context.into(), residual: r });
    }
    Ok(())
}

/// Circuit equal to U·diag(residual).
pub fn synth_unitary_up_to_diag(u: &ComplexMatrix) -> Result<SynthesisResult> {
    let n = n_qubits_of(u.nrows())?;
    check_unitary(u, 1e-8)?;
    let (c, r) = synth(u, Mode::UpToDiag)?;
    debug_assert_eq!(c.cnot_count() as u64, n_u_diag(n));
    check_end_to_end(&c, u, &r, "unitary up to diagonal")?;
    Ok(SynthesisResult::new(c, r))
}

/// Circuit equal to U, global phase included.
pub fn synth_unitary_exact(u: &ComplexMatrix) -> Result<Circuit> {
    let n = n_qubits_of(u.nrows())?;
    check_unitary(u, 1e-8)?;
    let (c, r) = synth(u, Mode::Exact)?;
    debug_assert_eq!(c.cnot_count() as u64, n_u(n));
    check_end_to_end(&c, u, &r, "exact unitary")?;
    Ok(c)
}

pub fn check_isometry(v: &ComplexMatrix, tol: f64) -> Result<()> {
    if v.nrows() < v.ncols() || v.ncols() == 0 {
        return Err(SynthError::InvalidInput(format!("{}x{} is not an isometry shape", v.nrows(), v.ncols())));
    }
    let r = (v.adjoint() * v - identity(v.ncols())).norm();
    if !r.is_finite() || r > tol {
        return Err(SynthError::NotIsometry { residual: r });
    }
    Ok(())
}

/// Circuit whose first 2^{n−1} columns equal V·diag(residual).
pub fn synth_isometry_up_to_diag(v: &ComplexMatrix) -> Result<SynthesisResult> {
    let n = n_qubits_of(v.nrows())?;
    if v.ncols() * 2 != v.nrows() {
        return Err(SynthError::InvalidInput(format!("expected a {}x{} isometry", v.nrows(), v.nrows() / 2)));
    }
    check_isometry(v, 1e-9)?;
    let u = complete_to_unitary(v);
    let half = v.ncols();
    let (c, r) = match n {
        1 => {
            let mut c = Circuit::new(1);
            c.u(0, gates::from_matrix(&u));
            (c, vec![ONE])
        }
        2 => {
            let (c, r) = synth(&u, Mode::UpToDiag)?;
            (c, r[..2].to_vec())
        }
        _ => {
            let parts = block_zxz(&u)?;
            let (v_m, d_m, w_m) = demux(&parts.m1, &parts.m2)?;
            let zt = z_top(half);
            let vmd = v_m.adjoint();
            let l1 = &zt * &vmd * &parts.l;
            let (v_l, d_l, w_l) = demux(&vmd, &l1)?;
            let (c_wm, r1) = synth(&w_m, Mode::UpToDiag)?;
            let (c_wl, r2) = synth(&left_diag(&conj_all(&r1), &w_l), Mode::UpToDiag)?;
            let (c_vl, r3) = synth(&left_diag(&conj_all(&r2), &v_l.adjoint()), Mode::UpToDiag)?;
            let mut c = Circuit::new(n);
            c.u(0, h());
            c.append_at(&c_vl, 1);
            c.append_at(&ucrz_circuit(&d_l, UcrzVariant::Full), 0);
            c.append_at(&c_wl, 1);
            c.u(0, h());
            c.append_at(&ucrz_circuit(&d_m, UcrzVariant::RR), 0);
            c.append_at(&c_wm, 1);
            (c, r3)
        }
    };
    check_end_to_end(&c, v, &r, "isometry up to diagonal")?;
    Ok(SynthesisResult::new(c, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{haar_unitary, rng};

    #[test]
    fn count_formulas() {
        assert_eq!((2..=5).map(n_u_diag).collect::<Vec<_>>(), vec![2, 18, 94, 422]);
        assert_eq!((2..=7).map(n_u).collect::<Vec<_>>(), vec![3, 19, 95, 423, 1783, 7319]);
        assert_eq!((2..=5).map(n_iso_diag).collect::<Vec<_>>(), vec![2, 13, 69, 313]);
        for n in 3..=12 {
            assert_eq!(n_u_diag(n), 4 * n_u_diag(n - 1) + 3 * (1 << (n - 1)) - 2);
            assert_eq!(n_u(n), 3 * n_u_diag(n - 1) + n_u(n - 1) + 3 * (1 << (n - 1)) - 2);
            assert_eq!(n_iso_diag(n), 3 * n_u_diag(n - 1) + (1 << n) - 1);
        }
    }

    #[test]
    fn block_zxz_cases() {
        let mut g = rng(40);
        let u = haar_unitary(&mut g, 8);
        assert!((block_zxz(&u).unwrap().reconstruct() - &u).norm() < 1e-9);
        let x_top = kron(&gates::to_matrix(&gates::X), &identity(4));
        assert!((block_zxz(&x_top).unwrap().reconstruct() - &x_top).norm() < 1e-9);
        assert!((block_zxz(&identity(8)).unwrap().reconstruct() - identity(8)).norm() < 1e-9);
    }

    #[test]
    fn unitary_up_to_diag_counts_and_reconstruction() {
        let mut g = rng(41);
        for n in 1..=5 {
            let u = haar_unitary(&mut g, 1 << n);
            let r = synth_unitary_up_to_diag(&u).unwrap();
            assert_eq!(r.cnots as u64, n_u_diag(n), "n={n}");
            let rec = (r.circuit.to_unitary().unwrap() - &u * r.residual.to_matrix()).norm();
            assert!(rec < 1e-8, "n={n} rec={rec}");
            assert!(r.residual.max_modulus_error() < 1e-10);
        }
        let r = synth_unitary_up_to_diag(&identity(8)).unwrap();
        assert_eq!(r.cnots, 18);
    }

    #[test]
    fn unitary_exact_counts_and_reconstruction() {
        let mut g = rng(42);
        for n in 1..=5 {
            let u = haar_unitary(&mut g, 1 << n);
            let c = synth_unitary_exact(&u).unwrap();
            assert_eq!(c.cnot_count() as u64, n_u(n), "n={n}");
            assert!((c.to_unitary().unwrap() - &u).norm() < 1e-8);
        }
        for u in [identity(8), kron(&gates::to_matrix(&gates::X), &identity(4))] {
            let c = synth_unitary_exact(&u).unwrap();
            assert_eq!(c.cnot_count(), 19);
            assert!((c.to_unitary().unwrap() - &u).norm() < 1e-8);
        }
    }

    #[test]
    fn isometry_counts_and_reconstruction() {
        let mut g = rng(43);
        for n in 2..=5 {
            let dim = 1 << n;
            let v = haar_unitary(&mut g, dim).columns(0, dim / 2).into_owned();
            let r = synth_isometry_up_to_diag(&v).unwrap();
            assert_eq!(r.cnots as u64, n_iso_diag(n), "n={n}");
            let got = r.circuit.to_unitary().unwrap().columns(0, dim / 2).into_owned();
            assert!((got - &v * r.residual.to_matrix()).norm() < 1e-8);
        }
        let v = identity(8).columns(0, 4).into_owned();
        assert_eq!(synth_isometry_up_to_diag(&v).unwrap().cnots, 13);
        let bad = ComplexMatrix::from_element(8, 4, c64(1.0, 0.0));
        assert!(matches!(synth_isometry_up_to_diag(&bad), Err(SynthError::NotIsometry { .. })));
    }
}
