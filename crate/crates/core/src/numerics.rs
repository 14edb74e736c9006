//! Dense complex linear-algebra kernels.

use crate::error::{Result, SynthError};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;

pub type ComplexMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Eigenvalues closer than this on the unit circle are treated as one cluster.
pub const CLUSTER_GAP: f64 = 1e-8;

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn cis(phi: f64) -> Complex64 {
    Complex64::from_polar(1.0, phi)
}

/// Wraps an angle into (−π, π].
pub fn principal(phi: f64) -> f64 {
    let mut x = phi.rem_euclid(2.0 * PI);
    if x > PI {
        x -= 2.0 * PI;
    }
    x
}

/// Principal argument in (−π, π].
pub fn arg(z: Complex64) -> f64 {
    let a = z.arg();
    if a <= -PI {
        PI
    } else {
        a
    }
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn from_rows(rows: usize, cols: usize, data: &[Complex64]) -> ComplexMatrix {
    ComplexMatrix::from_row_slice(rows, cols, data)
}

pub fn diag(values: &[Complex64]) -> ComplexMatrix {
    let n = values.len();
    let mut m = ComplexMatrix::zeros(n, n);
    for (i, v) in values.iter().enumerate() {
        m[(i, i)] = *v;
    }
    m
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Block-diagonal sum a ⊕ b.
pub fn direct_sum(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut m = ComplexMatrix::zeros(ra + rb, ca + cb);
    m.view_mut((0, 0), (ra, ca)).copy_from(a);
    m.view_mut((ra, ca), (rb, cb)).copy_from(b);
    m
}

pub fn is_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// ‖X†X − I‖_F.
pub fn unitarity_residual(m: &ComplexMatrix) -> f64 {
    let p = m.adjoint() * m;
    (p - identity(m.ncols())).norm()
}

pub fn check_unitary(m: &ComplexMatrix, tol: f64) -> Result<()> {
    if !m.is_square() {
        return Err(SynthError::InvalidInput(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if !is_finite(m) {
        return Err(SynthError::InvalidInput("non-finite entries".into()));
    }
    let r = unitarity_residual(m);
    if r > tol {
        return Err(SynthError::NotUnitary { residual: r });
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct SvdResult {
    pub w: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub vdag: ComplexMatrix,
}

impl SvdResult {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let (m, n) = (self.w.nrows(), self.vdag.ncols());
        let mut s = ComplexMatrix::zeros(m, n);
        for (i, &x) in self.singular_values.iter().enumerate() {
            s[(i, i)] = c64(x, 0.0);
        }
        &self.w * s * &self.vdag
    }
}

fn to_faer(m: &ComplexMatrix) -> faer::Mat<Complex64> {
    faer::Mat::<Complex64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Extends the orthonormal columns of `q` (m×k) to an m×m unitary, taking
/// the new columns from the left singular vectors of the complement.
pub fn complete_to_unitary(q: &ComplexMatrix) -> ComplexMatrix {
    let (m, k) = q.shape();
    if k >= m {
        return q.clone();
    }
    let mut out = ComplexMatrix::zeros(m, m);
    out.columns_mut(0, k).copy_from(q);
    if k == 0 {
        return identity(m);
    }
    let s = to_faer(q).svd().expect("svd of an isometry");
    let u = s.U();
    for j in k..m {
        for i in 0..m {
            out[(i, j)] = u[(i, j)];
        }
    }
    // One re-orthogonalization pass against the given columns.
    for j in k..m {
        let mut v = out.column(j).into_owned();
        for p in 0..j {
            let c = out.column(p).into_owned();
            let proj = c.dotc(&v);
            v -= c * proj;
        }
        let nv = v.norm();
        out.set_column(j, &(v / c64(nv, 0.0)));
    }
    out
}

/// Singular value decomposition with square unitary factors and descending σ.
pub fn svd(m: &ComplexMatrix) -> Result<SvdResult> {
    if !is_finite(m) {
        return Err(SynthError::InvalidInput("non-finite entries".into()));
    }
    let (rows, cols) = m.shape();
    let d = rows.min(cols);
    if d == 0 {
        return Ok(SvdResult { w: identity(rows), singular_values: vec![], vdag: identity(cols) });
    }
    let fs = to_faer(m).svd().map_err(|_| SynthError::NumericalFailure { context: "svd".into(), residual: f64::NAN })?;
    let (fu, fsig, fv) = (fs.U(), fs.S().column_vector(), fs.V());
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| fsig[b].re.total_cmp(&fsig[a].re));
    let singular_values: Vec<f64> = order.iter().map(|&i| fsig[i].re.max(0.0)).collect();
    // Sorted singular directions first, then the remaining full-SVD columns.
    let wcols: Vec<usize> = order.iter().cloned().chain(d..rows).collect();
    let vcols: Vec<usize> = order.iter().cloned().chain(d..cols).collect();
    let w = ComplexMatrix::from_fn(rows, rows, |i, j| fu[(i, wcols[j])]);
    let vdag = ComplexMatrix::from_fn(cols, cols, |i, j| fv[(j, vcols[i])].conj());
    let out = SvdResult { w, singular_values, vdag };
    let scale = m.norm().max(f64::MIN_POSITIVE);
    let rec = (out.reconstruct() - m).norm() / scale;
    if rec > 1e-10 && m.norm() > 0.0 {
        return Err(SynthError::NumericalFailure { context: "svd".into(), residual: rec });
    }
    Ok(out)
}

/// Left polar decomposition M = S·U with S Hermitian PSD and U unitary.
pub fn polar_left(m: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if !m.is_square() {
        return Err(SynthError::InvalidInput("polar_left needs a square matrix".into()));
    }
    let r = svd(m)?;
    let u = &r.w * &r.vdag;
    let sig: Vec<Complex64> = r.singular_values.iter().map(|&x| c64(x, 0.0)).collect();
    let mut s = &r.w * diag(&sig) * r.w.adjoint();
    let sh = (&s + s.adjoint()) * c64(0.5, 0.0);
    s = sh;
    Ok((s, u))
}

fn arc_distance(a: f64, b: f64) -> f64 {
    principal(a - b).abs()
}

/// Groups indices whose phases lie within `gap` of each other on the circle.
fn phase_clusters(phases: &[f64], gap: f64) -> Vec<Vec<usize>> {
    let n = phases.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let nx = p[y];
            p[y] = r;
            y = nx;
        }
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if arc_distance(phases[i], phases[j]) < gap {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b] = a;
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

fn gram_schmidt_columns(w: &mut ComplexMatrix, idx: &[usize]) {
    for (a, &j) in idx.iter().enumerate() {
        let mut v = w.column(j).into_owned();
        for _ in 0..2 {
            for &p in &idx[..a] {
                let c = w.column(p).into_owned();
                let proj = c.dotc(&v);
                v -= c * proj;
            }
        }
        let nv = v.norm();
        w.set_column(j, &(v / c64(nv, 0.0)));
    }
}

fn eig_reconstruction(u: &ComplexMatrix, w: &ComplexMatrix, phases: &[f64]) -> f64 {
    let d: Vec<Complex64> = phases.iter().map(|&p| cis(p)).collect();
    (w * diag(&d) * w.adjoint() - u).norm()
}

/// Orthonormal eigendecomposition U = W·diag(e^{i·phases})·W†.
///
/// The primary path diagonalizes the Hermitian matrix Re(U) + c·Im(U) (the
/// two parts commute); clusters of that matrix are split again with a small
/// Schur step. A full complex Schur decomposition is the fallback.
pub fn unitary_eig(u: &ComplexMatrix) -> Result<(ComplexMatrix, Vec<f64>)> {
    check_unitary(u, 1e-8)?;
    let n = u.nrows();
    let tol = 1e-9 * (n as f64).sqrt().max(1.0);
    if let Some(out) = hermitian_path(u) {
        if eig_reconstruction(u, &out.0, &out.1) <= tol && unitarity_residual(&out.0) <= 1e-10 {
            return Ok(out);
        }
    }
    let (mut w, t) = u.clone().schur().unpack();
    let phases: Vec<f64> = (0..n).map(|i| arg(t[(i, i)])).collect();
    for cl in phase_clusters(&phases, CLUSTER_GAP) {
        if cl.len() > 1 {
            gram_schmidt_columns(&mut w, &cl);
        }
    }
    let r = eig_reconstruction(u, &w, &phases);
    if r > tol {
        return Err(SynthError::NumericalFailure { context: "unitary_eig".into(), residual: r });
    }
    Ok((w, phases))
}

/// Eigenvectors of the Hermitian matrix Re(X) + c·Im(X), ascending eigenvalues.
fn surrogate_eigh(x: &ComplexMatrix, c: f64) -> Option<(ComplexMatrix, Vec<f64>)> {
    let n = x.nrows();
    let xd = x.adjoint();
    let h = (x + &xd) * c64(0.5, 0.0) + (x - &xd) * c64(0.0, -0.5 * c);
    let fh = faer::Mat::<Complex64>::from_fn(n, n, |i, j| (h[(i, j)] + h[(j, i)].conj()) * 0.5);
    let e = fh.self_adjoint_eigen(faer::Side::Lower).ok()?;
    let (fu, fs) = (e.U(), e.S().column_vector());
    Some((ComplexMatrix::from_fn(n, n, |i, j| fu[(i, j)]), (0..n).map(|i| fs[i].re).collect()))
}

fn hermitian_path(u: &ComplexMatrix) -> Option<(ComplexMatrix, Vec<f64>)> {
    let n = u.nrows();
    let (mut w, vals) = surrogate_eigh(u, 0.618_033_988_749_894_9)?;
    // Two distinct phases cannot collide under both coefficients, so a second
    // surrogate on each near-degenerate cluster splits it.
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && vals[end] - vals[end - 1] < 1e-6 {
            end += 1;
        }
        if end - start > 1 {
            let wc = w.columns(start, end - start).into_owned();
            let sub = wc.adjoint() * u * &wc;
            let (q, _) = surrogate_eigh(&sub, -1.324_717_957_244_746)?;
            w.columns_mut(start, end - start).copy_from(&(wc * q));
        }
        start = end;
    }
    let dm = w.adjoint() * u * &w;
    let phases: Vec<f64> = (0..n).map(|i| arg(dm[(i, i)])).collect();
    for cl in phase_clusters(&phases, CLUSTER_GAP) {
        if cl.len() > 1 {
            gram_schmidt_columns(&mut w, &cl);
        }
    }
    Some((w, phases))
}

pub fn spectral_norm(m: &ComplexMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    svd(m).map(|r| r.singular_values[0]).unwrap_or(f64::NAN)
}

fn det2(m: &ComplexMatrix) -> Complex64 {
    m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
}

/// Splits a 4×4 unitary of the form a⊗b into its factors, with det(a) = 1.
pub fn kron_factor(m: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if m.shape() != (4, 4) {
        return Err(SynthError::InvalidInput("kron_factor needs a 4x4 matrix".into()));
    }
    // R[(2i+j),(2k+l)] = M[2i+k, 2j+l] so that a⊗b maps to vec(a)·vec(b)ᵀ.
    let mut r = ComplexMatrix::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    r[(2 * i + j, 2 * k + l)] = m[(2 * i + k, 2 * j + l)];
                }
            }
        }
    }
    let s = svd(&r)?;
    let sq = s.singular_values[0].sqrt();
    let mut a = ComplexMatrix::zeros(2, 2);
    let mut b = ComplexMatrix::zeros(2, 2);
    for i in 0..2 {
        for j in 0..2 {
            a[(i, j)] = s.w[(2 * i + j, 0)] * sq;
            b[(i, j)] = s.vdag[(0, 2 * i + j)] * sq;
        }
    }
    let da = det2(&a);
    if da.norm() < 1e-12 {
        return Err(SynthError::NotKroneckerForm { residual: (kron(&a, &b) - m).norm() });
    }
    // Scale a to unit determinant; the inverse scale goes to b.
    let f = da.sqrt();
    a /= f;
    b *= f;
    let res = (kron(&a, &b) - m).norm();
    if res > 1e-6 {
        return Err(SynthError::NotKroneckerForm { residual: res });
    }
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{haar_unitary, gaussian_matrix, rng};

    #[test]
    fn svd_identity_and_diag() {
        let r = svd(&identity(4)).unwrap();
        assert_eq!(r.singular_values, vec![1.0; 4]);
        assert!((r.reconstruct() - identity(4)).norm() < 1e-14);
        let d = diag(&[c64(3.0, 0.0), ZERO]);
        let r = svd(&d).unwrap();
        assert!((r.singular_values[0] - 3.0).abs() < 1e-14 && r.singular_values[1].abs() < 1e-14);
    }

    #[test]
    fn svd_random_and_rectangular() {
        let mut g = rng(3);
        for &(m, n) in &[(8, 8), (8, 2), (2, 8), (16, 4)] {
            let a = gaussian_matrix(&mut g, m, n);
            let r = svd(&a).unwrap();
            assert!((r.reconstruct() - &a).norm() / a.norm() < 1e-10);
            assert!(unitarity_residual(&r.w) < 1e-12);
            assert!(unitarity_residual(&r.vdag) < 1e-12);
            assert!(r.singular_values.windows(2).all(|p| p[0] >= p[1]));
        }
    }

    #[test]
    fn svd_rejects_nan() {
        let mut a = identity(2);
        a[(0, 1)] = c64(f64::NAN, 0.0);
        assert!(matches!(svd(&a), Err(SynthError::InvalidInput(_))));
    }

    #[test]
    fn polar_cases() {
        let mut g = rng(4);
        let u = haar_unitary(&mut g, 4);
        let (s, uu) = polar_left(&u).unwrap();
        assert!((s - identity(4)).norm() < 1e-10);
        assert!((uu - &u).norm() < 1e-10);
        let (s, uu) = polar_left(&ComplexMatrix::zeros(4, 4)).unwrap();
        assert!(s.norm() < 1e-15);
        assert!((uu - identity(4)).norm() < 1e-15);
        let m = gaussian_matrix(&mut g, 4, 4);
        let (s, uu) = polar_left(&m).unwrap();
        assert!((&s * &uu - &m).norm() < 1e-10);
        let ev = s.symmetric_eigenvalues();
        assert!(ev.iter().all(|&x| x > -1e-12));
    }

    #[test]
    fn polar_all_ranks() {
        let mut g = rng(5);
        for rank in 0..=4 {
            let w = haar_unitary(&mut g, 4);
            let v = haar_unitary(&mut g, 4);
            let sig: Vec<Complex64> = (0..4).map(|i| c64(if i < rank { 1.0 + i as f64 } else { 0.0 }, 0.0)).collect();
            let m = &w * diag(&sig) * &v;
            let (s, u) = polar_left(&m).unwrap();
            assert!((&s * &u - &m).norm() < 1e-10, "rank {rank}");
            assert!(unitarity_residual(&u) < 1e-10);
        }
    }

    #[test]
    fn eig_cases() {
        let (w, p) = unitary_eig(&identity(4)).unwrap();
        assert!(p.iter().all(|x| x.abs() < 1e-14));
        assert!(unitarity_residual(&w) < 1e-12);
        let (w, p) = unitary_eig(&diag(&[ONE, I])).unwrap();
        let mut ps = p.clone();
        ps.sort_by(f64::total_cmp);
        assert!(ps[0].abs() < 1e-14 && (ps[1] - PI / 2.0).abs() < 1e-14);
        assert!(unitarity_residual(&w) < 1e-12);
        let mut g = rng(6);
        for &n in &[8usize, 64, 128] {
            let u = haar_unitary(&mut g, n);
            let (w, p) = unitary_eig(&u).unwrap();
            assert!(eig_reconstruction(&u, &w, &p) < 1e-9, "n={n}");
            assert!(unitarity_residual(&w) < 1e-10);
            assert!(p.iter().all(|&x| x > -PI && x <= PI));
        }
    }

    #[test]
    fn eig_degenerate_blocks() {
        let mut g = rng(7);
        let q = haar_unitary(&mut g, 8);
        let d: Vec<Complex64> = [1.0, 1.0, 1.0, -1.0, -1.0, 0.3, 0.3, 2.0].iter().map(|&p| cis(p)).collect();
        let u = &q * diag(&d) * q.adjoint();
        let (w, p) = unitary_eig(&u).unwrap();
        assert!(eig_reconstruction(&u, &w, &p) < 1e-9);
        assert!(unitarity_residual(&w) < 1e-10);
        assert!(matches!(unitary_eig(&(identity(2) * c64(2.0, 0.0))), Err(SynthError::NotUnitary { .. })));
    }

    #[test]
    fn spectral_norm_cases() {
        assert!((spectral_norm(&identity(8)) - 1.0).abs() < 1e-14);
        assert!((spectral_norm(&diag(&[c64(0.5, 0.0), c64(2.0, 0.0)])) - 2.0).abs() < 1e-14);
        // power-iteration oracle on M†M
        let mut g = rng(8);
        let m = gaussian_matrix(&mut g, 6, 6);
        let mtm = m.adjoint() * &m;
        let mut v = nalgebra::DVector::<Complex64>::from_element(6, ONE);
        for _ in 0..2000 {
            v = &mtm * v;
            let nv = v.norm();
            v /= c64(nv, 0.0);
        }
        let lam = (&mtm * &v).norm().sqrt();
        assert!((spectral_norm(&m) - lam).abs() / lam < 1e-9);
    }

    #[test]
    fn kron_factor_cases() {
        let h = from_rows(2, 2, &[ONE, ONE, ONE, -ONE]) * c64(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let z = diag(&[ONE, -ONE]);
        let (a, b) = kron_factor(&kron(&h, &z)).unwrap();
        assert!((kron(&a, &b) - kron(&h, &z)).norm() < 1e-12);
        assert!((det2(&a) - ONE).norm() < 1e-12);
        let (a, b) = kron_factor(&identity(4)).unwrap();
        assert!((kron(&a, &b) - identity(4)).norm() < 1e-12);
        let mut g = rng(9);
        for _ in 0..50 {
            let u = haar_unitary(&mut g, 2);
            let v = haar_unitary(&mut g, 2);
            let m = kron(&u, &v);
            let (a, b) = kron_factor(&m).unwrap();
            assert!((kron(&a, &b) - &m).norm() < 1e-9);
            assert!(unitarity_residual(&a) < 1e-10 && unitarity_residual(&b) < 1e-10);
        }
        let cx = from_rows(4, 4, &[ONE, ZERO, ZERO, ZERO, ZERO, ONE, ZERO, ZERO, ZERO, ZERO, ZERO, ONE, ZERO, ZERO, ONE, ZERO]);
        assert!(matches!(kron_factor(&cx), Err(SynthError::NotKroneckerForm { .. })));
    }

    #[test]
    fn complete_isometry() {
        let mut g = rng(10);
        let u = haar_unitary(&mut g, 8);
        let v = u.columns(0, 3).into_owned();
        let full = complete_to_unitary(&v);
        assert!(unitarity_residual(&full) < 1e-12);
        assert!((full.columns(0, 3) - v).norm() < 1e-15);
    }
}
