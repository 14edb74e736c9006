//! Single-ancilla block encoding with normalization α = ‖A‖₂.
//!
//! For A/α = W·cos(Θ)·V†, the encoding is (H⊗I)·((I⊗W)(D⊕D†)(I⊗V†))·(H⊗I)
//! with D = diag(e^{iθ_j}). Wire 0 is the ancilla; the register occupies
//! wires 1..n.

use crate::blockzxz::{check_isometry, n_qubits_of, synth_unitary_exact, synth_unitary_up_to_diag, SynthesisResult};
use crate::circuit::{Circuit, DiagonalPhases};
use crate::error::{Result, SynthError};
use crate::gates::{h, Mat2, ID2};
use crate::multiplexor::{diagonal_gate, synth_ucrz, ucg_up_to_diag, UcrzSpec, UcrzVariant};
use crate::numerics::{arg, diag, is_finite, svd, ComplexMatrix, SvdResult, ONE};
use crate::spdmm::{nstate_count, prepare_state};
use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;

/// Singular values below this fraction of σ_max count as zero.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankMode {
    Auto,
    Full,
    Rank(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EncodingPath {
    Full,
    LowRank,
}

impl EncodingPath {
    pub fn name(&self) -> &'static str {
        match self {
            EncodingPath::Full => "full",
            EncodingPath::LowRank => "low-rank",
        }
    }
}

#[derive(Debug, Clone)]
pub struct BlockEncodingResult {
    pub circuit: Circuit,
    pub alpha: f64,
    /// Rank the circuit was built for; the register dimension on the full path.
    pub declared_rank: usize,
    pub path: EncodingPath,
}

/// N_mat = (11/48)4^n − 2^n + 7/3 for n ≥ 2 total wires.
pub fn full_rank_count(n: usize) -> u64 {
    if n < 2 {
        return 0;
    }
    let (p4, p2) = (4u64.pow(n as u32), 2u64.pow(n as u32));
    (11 * p4 + 112 - 48 * p2) / 48
}

/// ⌈(1/8)·4^n − (3/4)·n⌉.
pub fn block_encoding_lower_bound(n: usize) -> u64 {
    let eight = 4i128.pow(n as u32) - 6 * n as i128;
    (eight.max(0) as u64).div_ceil(8)
}

/// ⌈(4^n − 3n − 1)/4⌉.
pub fn unitary_lower_bound(n: usize) -> u64 {
    let four = 4i128.pow(n as u32) - 3 * n as i128 - 1;
    (four.max(0) as u64).div_ceil(4)
}

/// Cost of the C-NOTs added by column k ≥ 1 of the column-by-column scheme.
fn column_cost(m: usize, k: usize) -> u64 {
    let mut total = 0u64;
    for s in 0..m {
        let ks = (k >> s) & 1;
        let low = k & ((1 << (s + 1)) - 1);
        if ks == 0 && low != 0 {
            total += (1u64 << k.count_ones()) - 1;
        }
        let count = 1usize << (m - 1 - s);
        let i_start = if low == 0 { k >> (s + 1) } else { (k >> (s + 1)) + 1 };
        if i_start < count {
            total += count as u64 - 1;
        }
    }
    total
}

/// C-NOT count of [`synth_isometry_columns`] for a 2^m × K isometry.
pub fn isometry_columns_count(m: usize, k: usize) -> u64 {
    if m == 0 || k == 0 {
        return 0;
    }
    let first = nstate_count(m).unwrap_or(0);
    first + (1..k).map(|j| column_cost(m, j)).sum::<u64>()
}

fn phase_fix_qubits(k: usize) -> usize {
    if k <= 1 {
        0
    } else {
        (usize::BITS - (k - 1).leading_zeros()) as usize
    }
}

/// C-NOT count of the low-rank path for rank K on n total wires.
pub fn low_rank_count(n: usize, k: usize) -> u64 {
    let m = n - 1;
    let p = phase_fix_qubits(k);
    let fix = if p >= 2 { (1u64 << p) - 2 } else { 0 };
    2 * isometry_columns_count(m, k) + fix + (1u64 << m)
}

/// Maps (a, b) to norm·|basis⟩.
fn reverse_state(a: Complex64, b: Complex64, basis: usize) -> Mat2 {
    let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
    if r < 1e-15 {
        return ID2;
    }
    let (a, b) = (a / r, b / r);
    if basis == 0 {
        [[a.conj(), b.conj()], [-b, a]]
    } else {
        [[-b, a], [a.conj(), b.conj()]]
    }
}

fn emit_ucg(m: usize, target: usize, controls: &[usize], gates: &[Mat2]) -> Result<Circuit> {
    let dec = ucg_up_to_diag(gates)?;
    let mut c = Circuit::new(m);
    dec.emit(&mut c, target, controls);
    Ok(c)
}

/// Appends gates mapping column k of `work` to a multiple of e_k while
/// leaving e_0..e_{k−1} fixed up to phases.
fn reduce_column(work: &mut ComplexMatrix, k: usize, m: usize, acc: &mut Circuit) -> Result<()> {
    for s in 0..m {
        let ks = (k >> s) & 1;
        let b = k & ((1 << s) - 1);
        let low = k & ((1 << (s + 1)) - 1);
        let a = k >> (s + 1);
        let target = m - 1 - s;

        if ks == 0 && low != 0 {
            let x0 = (a << (s + 1)) + b;
            let x1 = x0 + (1 << s);
            let gate = reverse_state(work[(x0, k)], work[(x1, k)], 0);
            let controls: Vec<usize> = (0..m).filter(|&w| w != target && (k >> (m - 1 - w)) & 1 == 1).collect();
            let mut gs = vec![ID2; 1 << controls.len()];
            *gs.last_mut().expect("nonempty") = gate;
            let step = emit_ucg(m, target, &controls, &gs)?;
            step.apply_to_columns(work);
            acc.append_at(&step, 0);
        }

        let count = 1usize << (m - 1 - s);
        let i_start = if low == 0 { a } else { a + 1 };
        if i_start < count {
            let gs: Vec<Mat2> = (0..count)
                .map(|i| {
                    if i < i_start {
                        ID2
                    } else {
                        let x0 = (i << (s + 1)) + b;
                        reverse_state(work[(x0, k)], work[(x0 + (1 << s), k)], ks)
                    }
                })
                .collect();
            let controls: Vec<usize> = (0..target).collect();
            let step = emit_ucg(m, target, &controls, &gs)?;
            step.apply_to_columns(work);
            acc.append_at(&step, 0);
        }
    }
    Ok(())
}

/// Column-by-column isometry synthesis: the first K columns of the circuit
/// equal V·diag(residual). The first column is prepared exactly; each later
/// column is disentangled one qubit at a time by uniformly controlled gates.
pub fn synth_isometry_columns(v: &ComplexMatrix) -> Result<SynthesisResult> {
    let m = n_qubits_of(v.nrows())?;
    let k = v.ncols();
    check_isometry(v, 1e-9)?;

    let v0: Vec<Complex64> = v.column(0).iter().copied().collect();
    let norm = v0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let v0: Vec<Complex64> = v0.into_iter().map(|z| z / norm).collect();
    let mut acc = prepare_state(&v0)?.invert();
    let mut work = v.clone();
    acc.apply_to_columns(&mut work);

    for j in 1..k {
        reduce_column(&mut work, j, m, &mut acc)?;
    }

    let phases: Vec<Complex64> = (0..k).map(|j| work[(j, j)]).collect();
    let mut expect = ComplexMatrix::zeros(v.nrows(), k);
    for (j, p) in phases.iter().enumerate() {
        expect[(j, j)] = *p;
    }
    let err = (&work - expect).norm();
    if !(err <= 1e-8) {
        return Err(SynthError::NumericalFailure { context: "column-by-column isometry".into(), residual: err });
    }
    let residual: Vec<Complex64> = phases.iter().map(|p| (p / p.norm()).conj()).collect();
    let circuit = acc.invert();
    debug_assert_eq!(circuit.cnot_count() as u64, isometry_columns_count(m, k));
    let cnots = circuit.cnot_count();
    Ok(SynthesisResult { circuit, residual: DiagonalPhases { values: residual }, cnots })
}

fn validate_matrix(a: &ComplexMatrix) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(SynthError::InvalidInput(format!("matrix is {}x{}, expected square", a.nrows(), a.ncols())));
    }
    if !is_finite(a) {
        return Err(SynthError::InvalidInput("non-finite matrix entry".into()));
    }
    Ok(n_qubits_of(a.nrows())? + 1)
}

/// SVD of A/‖A‖₂ together with α and the numerical rank.
fn normalized_svd(a: &ComplexMatrix) -> Result<(f64, SvdResult, usize)> {
    let s0 = svd(a)?;
    let alpha = s0.singular_values[0];
    if !(alpha > 0.0) {
        return Err(SynthError::ZeroMatrix);
    }
    let rank = s0.singular_values.iter().filter(|&&x| x > RANK_TOL * alpha).count();
    let s = SvdResult {
        w: s0.w,
        singular_values: s0.singular_values.iter().map(|x| (x / alpha).clamp(0.0, 1.0)).collect(),
        vdag: s0.vdag,
    };
    Ok((alpha, s, rank))
}

fn middle(n: usize, thetas: &[f64]) -> Result<Circuit> {
    let spec: Vec<f64> = thetas.iter().map(|t| -t).collect();
    let mut c = Circuit::new(n);
    c.u(0, h());
    c.append_at(&synth_ucrz(&UcrzSpec::new(spec, UcrzVariant::Full)?), 0);
    c.u(0, h());
    Ok(c)
}

/// ‖target − top-left block‖_F, computed from the listed columns only.
fn block_error_cols(c: &Circuit, target: &ComplexMatrix, cols: &[usize]) -> Result<f64> {
    let half = target.nrows();
    let mut basis = ComplexMatrix::zeros(2 * half, cols.len());
    for (i, &j) in cols.iter().enumerate() {
        basis[(j, i)] = ONE;
    }
    c.apply_to_columns(&mut basis);
    let mut err = 0.0;
    for (i, &j) in cols.iter().enumerate() {
        for r in 0..half {
            err += (basis[(r, i)] - target[(r, j)]).norm_sqr();
        }
    }
    Ok(err.sqrt())
}

/// ‖target − (⟨0|⊗I)·C·(|0⟩⊗I)‖_F over the whole block.
pub fn block_error(c: &Circuit, target: &ComplexMatrix) -> Result<f64> {
    if target.nrows() * 2 != 1usize << c.n_qubits || target.ncols() != target.nrows() {
        return Err(SynthError::DimensionMismatch { expected: 1 << (c.n_qubits - 1), got: target.nrows() });
    }
    let cols: Vec<usize> = (0..target.ncols()).collect();
    block_error_cols(c, target, &cols)
}

const FULL_BLOCK_CHECK_QUBITS: usize = 7;

fn self_check(c: &Circuit, target: &ComplexMatrix, context: &str) -> Result<()> {
    let dim = target.ncols();
    let err = if c.n_qubits <= FULL_BLOCK_CHECK_QUBITS {
        block_error(c, target)?
    } else {
        block_error_cols(c, target, &[0, dim / 2, dim - 1])?
    };
    if !(err <= 1e-8) {
        return Err(SynthError::NumericalFailure { context: context.into(), residual: err });
    }
    Ok(())
}

fn scaled(a: &ComplexMatrix, alpha: f64) -> ComplexMatrix {
    a.map(|z| z / alpha)
}

fn full_from_svd(n: usize, s: &SvdResult) -> Result<Circuit> {
    let thetas: Vec<f64> = s.singular_values.iter().map(|x| x.acos()).collect();
    // V·diag(r) inverted gives diag(r̄)·V†; r migrates through D⊕D† into W.
    let v_side = synth_unitary_up_to_diag(&s.vdag.adjoint())?;
    let w_target = &s.w * diag(&v_side.residual.values);
    let w_side = synth_unitary_exact(&w_target)?;

    let mut c = Circuit::new(n);
    c.append_at(&v_side.circuit.invert(), 1);
    c.append_at(&middle(n, &thetas)?, 0);
    c.append_at(&w_side, 1);
    Ok(c)
}

/// Full-rank encoding: (11/48)4^n − 2^n + 7/3 C-NOTs for every input.
pub fn block_encode_full(a: &ComplexMatrix) -> Result<BlockEncodingResult> {
    let n = validate_matrix(a)?;
    let (alpha, s, _) = normalized_svd(a)?;
    let circuit = full_from_svd(n, &s)?;
    debug_assert_eq!(circuit.cnot_count() as u64, full_rank_count(n));
    self_check(&circuit, &scaled(a, alpha), "full-rank block encoding")?;
    Ok(BlockEncodingResult { circuit, alpha, declared_rank: a.nrows(), path: EncodingPath::Full })
}

fn low_rank_from_svd(n: usize, s: &SvdResult, k: usize) -> Result<Circuit> {
    let m = n - 1;
    let dim = 1usize << m;
    let v_k = s.vdag.adjoint().columns(0, k).into_owned();
    let v_side = synth_isometry_columns(&v_k)?;
    let x = s.w.columns(0, k) * diag(&v_side.residual.values);
    let w_side = synth_isometry_columns(&x)?;

    let thetas: Vec<f64> = (0..dim).map(|j| if j < k { s.singular_values[j].acos() } else { FRAC_PI_2 }).collect();
    let mut c = Circuit::new(n);
    c.append_at(&v_side.circuit.invert(), 1);
    c.append_at(&middle(n, &thetas)?, 0);
    let p = phase_fix_qubits(k);
    if p == 0 {
        c.global_phase -= arg(w_side.residual.values[0]);
    } else {
        let mut phases = vec![0.0; 1 << p];
        for (j, z) in w_side.residual.values.iter().enumerate() {
            phases[j] = -arg(*z);
        }
        c.append_at(&diagonal_gate(&phases)?, 1 + m - p);
    }
    c.append_at(&w_side.circuit, 1);
    Ok(c)
}

/// Rank-K encoding from the first K singular vectors on each side.
pub fn block_encode_low_rank(a: &ComplexMatrix, k: usize) -> Result<BlockEncodingResult> {
    let n = validate_matrix(a)?;
    let (alpha, s, rank) = normalized_svd(a)?;
    if k == 0 {
        return Err(SynthError::InvalidInput("rank must be at least 1".into()));
    }
    if rank > k || k >= a.nrows() {
        return Err(SynthError::RankExceeded { rank: rank.max(k), k: k.min(a.nrows() - 1) });
    }
    let circuit = low_rank_from_svd(n, &s, k)?;
    debug_assert_eq!(circuit.cnot_count() as u64, low_rank_count(n, k));
    self_check(&circuit, &scaled(a, alpha), "low-rank block encoding")?;
    Ok(BlockEncodingResult { circuit, alpha, declared_rank: k, path: EncodingPath::LowRank })
}

/// Numerical rank at tolerance RANK_TOL·σ_max; zero for the zero matrix.
pub fn numerical_rank(a: &ComplexMatrix) -> Result<usize> {
    validate_matrix(a)?;
    match normalized_svd(a) {
        Ok((_, _, r)) => Ok(r),
        Err(SynthError::ZeroMatrix) => Ok(0),
        Err(e) => Err(e),
    }
}

/// Chooses the cheaper path under `Auto`.
pub fn block_encode(a: &ComplexMatrix, mode: RankMode) -> Result<BlockEncodingResult> {
    match mode {
        RankMode::Full => block_encode_full(a),
        RankMode::Rank(k) => block_encode_low_rank(a, k),
        RankMode::Auto => {
            let n = validate_matrix(a)?;
            let (_, _, rank) = normalized_svd(a)?;
            if rank < a.nrows() && low_rank_count(n, rank) < full_rank_count(n) {
                block_encode_low_rank(a, rank)
            } else {
                block_encode_full(a)
            }
        }
    }
}

/// Predicted C-NOT count for the path `block_encode` would take.
pub fn predicted_count(n: usize, rank: usize) -> (EncodingPath, u64) {
    let full = full_rank_count(n);
    if rank >= 1 && rank < 1 << (n - 1) {
        let low = low_rank_count(n, rank);
        if low < full {
            return (EncodingPath::LowRank, low);
        }
    }
    (EncodingPath::Full, full)
}
