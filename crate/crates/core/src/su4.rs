//! Two-qubit synthesis: U(4) up to a diagonal with 2 C-NOTs and exact U(4)
//! with 3 C-NOTs.

use crate::circuit::Circuit;
use crate::error::{Result, SynthError};
use crate::gates::{self, rx, ry, rz, Mat2};
use crate::numerics::{arg, c64, check_unitary, cis, diag, from_rows, kron_factor, ComplexMatrix, I, ONE, ZERO};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;

#[derive(Debug, Clone, PartialEq)]
pub struct Su4Decomposition {
    pub a: Mat2,
    pub b: Mat2,
    pub c: Mat2,
    pub d: Mat2,
    pub theta: f64,
    pub phi: f64,
    pub psi: f64,
    pub global_phase: f64,
}

impl Su4Decomposition {
    /// Δ = diag(e^{−iψ/2}, e^{iψ/2}, e^{iψ/2}, e^{−iψ/2}).
    pub fn delta(&self) -> Vec<Complex64> {
        delta_values(self.psi)
    }
}

pub fn delta_values(psi: f64) -> Vec<Complex64> {
    let (m, p) = (cis(-psi / 2.0), cis(psi / 2.0));
    vec![m, p, p, m]
}

/// Magic basis; E·SO(4)·E† = SU(2)⊗SU(2).
pub fn magic_basis() -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    #[rustfmt::skip]
    let e = from_rows(4, 4, &[
        ONE, I, ZERO, ZERO,
        ZERO, ZERO, I, ONE,
        ZERO, ZERO, I, -ONE,
        ONE, -I, ZERO, ZERO,
    ]);
    e * c64(s, 0.0)
}

fn yy() -> ComplexMatrix {
    let y = gates::to_matrix(&[[ZERO, -I], [I, ZERO]]);
    y.kronecker(&y)
}

/// γ(u) = u·(Y⊗Y)·uᵀ·(Y⊗Y).
pub fn gamma(u: &ComplexMatrix) -> Result<ComplexMatrix> {
    if u.shape() != (4, 4) {
        return Err(SynthError::InvalidInput("gamma needs a 4x4 matrix".into()));
    }
    check_unitary(u, 1e-8)?;
    let p = yy();
    Ok(u * &p * u.transpose() * &p)
}

fn det_phase(u: &ComplexMatrix) -> f64 {
    arg(u.clone().determinant())
}

fn eigenvalues4(m: &ComplexMatrix) -> Vec<Complex64> {
    let t = m.clone().schur().unpack().1;
    (0..m.nrows()).map(|i| t[(i, i)]).collect()
}

/// Real orthogonal O with det +1 such that Oᵀ·P·O is diagonal, for a complex
/// symmetric unitary P. Returns O and the diagonal.
fn real_orthogonal_diag(p: &ComplexMatrix) -> Result<(DMatrix<f64>, Vec<Complex64>)> {
    let n = p.nrows();
    let re = p.map(|z| z.re);
    let im = p.map(|z| z.im);
    let re = (&re + re.transpose()) * 0.5;
    let im = (&im + im.transpose()) * 0.5;
    let (ck, sk) = (0.577_215_664_901_532_9f64.cos(), 0.577_215_664_901_532_9f64.sin());
    let a = &re * ck + &im * sk;
    let b = &im * ck - &re * sk;
    let eig = a.clone().symmetric_eigen();
    let mut o = eig.eigenvectors;
    let vals = eig.eigenvalues;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| vals[x].total_cmp(&vals[y]));
    let o_sorted = DMatrix::from_fn(n, n, |r, c| o[(r, order[c])]);
    o = o_sorted;
    let sv: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
    // Re-diagonalize the second combination inside near-degenerate clusters.
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && sv[end] - sv[end - 1] < 1e-4 {
            end += 1;
        }
        if end - start > 1 {
            let ob = o.columns(start, end - start).into_owned();
            let sub = ob.transpose() * &b * &ob;
            let sub = (&sub + sub.transpose()) * 0.5;
            let e2 = sub.symmetric_eigen();
            let rot = ob * e2.eigenvectors;
            o.columns_mut(start, end - start).copy_from(&rot);
        }
        start = end;
    }
    if o.determinant() < 0.0 {
        let col = -o.column(0);
        o.set_column(0, &col);
    }
    let oc = o.map(|x| c64(x, 0.0));
    let dm = oc.transpose() * p * &oc;
    let d: Vec<Complex64> = (0..n).map(|i| dm[(i, i)]).collect();
    let off = (&dm - diag(&d)).norm();
    if off > 1e-8 {
        return Err(SynthError::NumericalFailure { context: "real orthogonal diagonalization".into(), residual: off });
    }
    Ok((o, d))
}

/// Reorders the columns of `o2` so that its eigenvalues follow `d1`.
fn match_order(d1: &[Complex64], o2: &DMatrix<f64>, d2: &[Complex64]) -> DMatrix<f64> {
    let n = d1.len();
    let mut used = vec![false; n];
    let mut perm = Vec::with_capacity(n);
    for z in d1 {
        let j = (0..n)
            .filter(|&j| !used[j])
            .min_by(|&x, &y| (d2[x] - z).norm().total_cmp(&(d2[y] - z).norm()))
            .unwrap();
        used[j] = true;
        perm.push(j);
    }
    let mut out = DMatrix::from_fn(n, n, |r, c| o2[(r, perm[c])]);
    if out.determinant() < 0.0 {
        // Flip a column inside a degenerate pair if possible, else the first.
        let col = -out.column(0);
        out.set_column(0, &col);
    }
    out
}

fn split_local(m: &ComplexMatrix) -> Result<(Mat2, Mat2)> {
    let (a, b) = kron_factor(m)?;
    Ok((gates::from_matrix(&a), gates::from_matrix(&b)))
}

fn pair_roots(roots: &[Complex64]) -> (f64, f64) {
    let mut r: Vec<Complex64> = roots.to_vec();
    r.sort_by(|x, y| arg(*x).total_cmp(&arg(*y)));
    let mut used = [false; 4];
    let mut phases = Vec::new();
    for i in 0..4 {
        if used[i] {
            continue;
        }
        used[i] = true;
        let j = (0..4)
            .filter(|&j| !used[j])
            .min_by(|&x, &y| (r[x] - r[i].conj()).norm().total_cmp(&(r[y] - r[i].conj()).norm()))
            .unwrap();
        used[j] = true;
        phases.push(arg(r[i]));
    }
    (phases[0], phases[1])
}

/// Decomposes U so that the returned 2-C-NOT circuit equals Δ·U.
pub fn decompose_su4_up_to_diagonal(u: &ComplexMatrix) -> Result<(Su4Decomposition, Circuit)> {
    if u.shape() != (4, 4) {
        return Err(SynthError::InvalidInput("expected a 4x4 unitary".into()));
    }
    check_unitary(u, 1e-8)?;
    let delta_ph = det_phase(u);
    let us = u * cis(-delta_ph / 4.0);

    let g = gamma(&us)?;
    let t: Vec<Complex64> = (0..4).map(|i| g[(i, i)]).collect();
    let y = (t[0] + t[1] + t[2] + t[3]).im;
    let x = (t[0] - t[1] - t[2] + t[3]).re;
    let psi = if y.abs() < 1e-12 && x.abs() < 1e-12 { 0.0 } else { y.atan2(x) };
    let dvals = delta_values(psi);
    let du = diag(&dvals) * &us;

    let (s, tt) = pair_roots(&eigenvalues4(&gamma(&du)?));
    let theta = (s + tt) / 2.0;
    let phi = (s - tt) / 2.0;

    let mut core = Circuit::new(2);
    core.cx(0, 1);
    core.u(0, rx(theta));
    core.u(1, rz(phi));
    core.cx(0, 1);
    let v = core.to_unitary()?;

    let e = magic_basis();
    let w1 = e.adjoint() * &du * &e;
    let w2 = e.adjoint() * &v * &e;
    let (o1, d1) = real_orthogonal_diag(&(&w1 * w1.transpose()))?;
    let (o2, d2) = real_orthogonal_diag(&(&w2 * w2.transpose()))?;
    let o2 = match_order(&d1, &o2, &d2);
    let q = (&o1 * o2.transpose()).map(|x| c64(x, 0.0));
    let s3 = w2.adjoint() * q.transpose() * &w1;
    let imag = s3.map(|z| z.im).norm();
    if imag > 1e-9 {
        return Err(SynthError::NumericalFailure { context: "su4 s3 not real".into(), residual: imag });
    }
    let s3 = s3.map(|z| c64(z.re, 0.0));
    let (c, d) = split_local(&(&e * &q * e.adjoint()))?;
    let (a, b) = split_local(&(&e * &s3 * e.adjoint()))?;

    let mut circ = Circuit::new(2);
    circ.u(0, a);
    circ.u(1, b);
    circ.cx(0, 1);
    circ.u(0, rx(theta));
    circ.u(1, rz(phi));
    circ.cx(0, 1);
    circ.u(0, c);
    circ.u(1, d);
    circ.global_phase = delta_ph / 4.0;

    let res = (circ.to_unitary()? - diag(&dvals) * u).norm();
    if res > 1e-7 {
        return Err(SynthError::NumericalFailure { context: "su4 up to diagonal".into(), residual: res });
    }
    Ok((Su4Decomposition { a, b, c, d, theta, phi, psi, global_phase: delta_ph / 4.0 }, circ))
}

/// Exact 3-C-NOT synthesis of a two-qubit unitary, global phase included.
pub fn decompose_u4_exact(u: &ComplexMatrix) -> Result<Circuit> {
    if u.shape() != (4, 4) {
        return Err(SynthError::InvalidInput("expected a 4x4 unitary".into()));
    }
    check_unitary(u, 1e-8)?;
    let us = u * cis(-det_phase(u) / 4.0);
    let e = magic_basis();
    let w = e.adjoint() * &us * &e;
    let (o, d) = real_orthogonal_diag(&(&w * w.transpose()))?;
    let mut half: Vec<Complex64> = d.iter().map(|z| z.sqrt()).collect();
    let prod = half.iter().fold(ONE, |acc, z| acc * z);
    if prod.re < 0.0 {
        half[0] = -half[0];
    }
    let oc = o.map(|x| c64(x, 0.0));
    let k2 = diag(&half.iter().map(|z| z.conj()).collect::<Vec<_>>()) * oc.transpose() * &w;
    let k1 = &e * &oc * e.adjoint();
    let k2 = &e * k2.map(|z| c64(z.re, 0.0)) * e.adjoint();

    // Solve arg(half_k) = g + a·hX_k + b·hY_k + c·hZ_k on the magic-basis eigenvalues.
    let paulis = [gates::X, [[ZERO, -I], [I, ZERO]], gates::Z];
    let h: Vec<Vec<f64>> = paulis
        .iter()
        .map(|p| {
            let pm = gates::to_matrix(p);
            let pp = e.adjoint() * pm.kronecker(&pm) * &e;
            (0..4).map(|k| pp[(k, k)].re).collect()
        })
        .collect();
    let sys = DMatrix::<f64>::from_fn(4, 4, |k, j| if j == 0 { 1.0 } else { h[j - 1][k] });
    let rhs = nalgebra::DVector::<f64>::from_fn(4, |k, _| arg(half[k]));
    let sol = sys.lu().solve(&rhs).ok_or_else(|| SynthError::NumericalFailure {
        context: "canonical parameters".into(),
        residual: f64::NAN,
    })?;
    let (ca, cb, cc) = (sol[1], sol[2], sol[3]);

    let (a2, b2) = split_local(&k2)?;
    let (a1, b1) = split_local(&k1)?;
    let mut circ = Circuit::new(2);
    circ.u(0, a2);
    circ.u(1, gates::mul(&rz(-FRAC_PI_2), &b2));
    circ.cx(1, 0);
    circ.u(0, rz(FRAC_PI_2 + 2.0 * cc));
    circ.u(1, ry(FRAC_PI_2 + 2.0 * ca));
    circ.cx(0, 1);
    circ.u(1, ry(-FRAC_PI_2 - 2.0 * cb));
    circ.cx(1, 0);
    circ.u(0, gates::mul(&a1, &rz(FRAC_PI_2)));
    circ.u(1, b1);

    let cu = circ.to_unitary()?;
    let tr: Complex64 = (cu.adjoint() * u).trace();
    circ.global_phase = arg(tr);
    let res = (circ.to_unitary()? - u).norm();
    if res > 1e-7 {
        return Err(SynthError::NumericalFailure { context: "u4 exact".into(), residual: res });
    }
    Ok(circ)
}
