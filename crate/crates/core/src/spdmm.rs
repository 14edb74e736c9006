//! State preparation by recursive Schmidt decomposition with residual
//! diagonals merged into the next-level state.

use crate::blockzxz::{n_iso_diag, n_u_diag, synth_isometry_up_to_diag, synth_unitary_up_to_diag};
use crate::circuit::Circuit;
use crate::error::{Result, SynthError};
use crate::numerics::{c64, svd, ComplexMatrix};
use num_complex::Complex64;

pub fn state_qubits(len: usize) -> Result<usize> {
    if len < 2 || !len.is_power_of_two() {
        return Err(SynthError::InvalidInput(format!("state length {len} is not a power of two >= 2")));
    }
    Ok(len.trailing_zeros() as usize)
}

/// Circuit C with C|0…0⟩ = ψ (global phase included).
pub fn prepare_state(psi: &[Complex64]) -> Result<Circuit> {
    let n = state_qubits(psi.len())?;
    if psi.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(SynthError::InvalidInput("non-finite amplitude".into()));
    }
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(SynthError::NotNormalized { norm });
    }
    let c = prep(psi, n)?;
    debug_assert_eq!(c.cnot_count() as u64, nstate_count(n).unwrap());
    Ok(c)
}

fn prep(psi: &[Complex64], n: usize) -> Result<Circuit> {
    if n == 1 {
        let (a, b) = (psi[0], psi[1]);
        let mut c = Circuit::new(1);
        c.u(0, [[a, -b.conj()], [b, a.conj()]]);
        return Ok(c);
    }
    let top = n.div_ceil(2);
    let bot = n / 2;
    let (rows, cols) = (1usize << top, 1usize << bot);
    let m = ComplexMatrix::from_row_slice(rows, cols, psi);
    let s = svd(&m)?;

    let u_part = if top == bot {
        synth_unitary_up_to_diag(&s.w)?
    } else {
        synth_isometry_up_to_diag(&s.w.columns(0, cols).into_owned())?
    };
    let conj_v = s.vdag.transpose();
    let v_part = synth_unitary_up_to_diag(&conj_v)?;

    let next: Vec<Complex64> = (0..cols)
        .map(|k| c64(s.singular_values[k], 0.0) * u_part.residual.values[k].conj() * v_part.residual.values[k].conj())
        .collect();
    // Renormalize against rounding so the base case stays exactly unitary.
    let nn = next.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let next: Vec<Complex64> = next.into_iter().map(|z| z / nn).collect();
    let inner = prep(&next, bot)?;

    let mut c = Circuit::new(n);
    c.append_at(&inner, top - bot);
    for j in 0..bot {
        c.cx(top - bot + j, top + j);
    }
    c.append_at(&u_part.circuit, 0);
    c.append_at(&v_part.circuit, top);
    Ok(c)
}

/// Recursion value of the state-preparation C-NOT count.
pub fn nstate_recursive(n: usize) -> u64 {
    if n <= 1 {
        return 0;
    }
    let (top, bot) = (n.div_ceil(2), n / 2);
    let blocks = if n % 2 == 0 { 2 * n_u_diag(top) } else { n_iso_diag(top) + n_u_diag(bot) };
    nstate_recursive(bot) + blocks + bot as u64
}

/// Closed-form state-preparation C-NOT count; recursion values below n = 4.
pub fn nstate_count(n: usize) -> Result<u64> {
    match n {
        0 => return Err(SynthError::InvalidInput("n must be >= 1".into())),
        1..=3 => return Ok(nstate_recursive(n)),
        _ => {}
    }
    if n > 60 {
        return Err(SynthError::InvalidInput("n too large for a 64-bit count".into()));
    }
    let l = (usize::BITS - n.leading_zeros()) as usize;
    let b = (n >> (l - 2)) as i128;
    // Everything scaled by 12 to stay in integers.
    let mut twelve: i128 = 0;
    for i in 0..l - 2 {
        let q = n >> i;
        let even = q % 2 == 0;
        twelve += 11 * (1i128 << q);
        twelve -= 12 * if even { 3 } else { 4 } * (1i128 << (n >> (i + 1)));
        twelve += if even { 16 } else { 20 };
    }
    twelve += 12 * (n as i128 - n.count_ones() as i128 - 1);
    twelve += 6 * b * (b - 1);
    debug_assert_eq!(twelve % 12, 0);
    Ok((twelve / 12) as u64)
}

/// ⌈2^n/2 − 3n/4 − 1/4⌉.
pub fn state_prep_lower_bound(n: usize) -> u64 {
    let four = (1i128 << (n + 1)) - 3 * n as i128 - 1;
    (four.max(0) as u64).div_ceil(4)
}

pub fn fidelity(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>().norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{ONE, ZERO};
    use crate::random::{random_state, rng};
    use proptest::prelude::*;

    fn run(psi: &[Complex64]) -> (usize, f64) {
        let c = prepare_state(psi).unwrap();
        let n = state_qubits(psi.len()).unwrap();
        let mut zero = vec![ZERO; 1 << n];
        zero[0] = ONE;
        let out = c.apply(&zero).unwrap();
        (c.cnot_count(), fidelity(psi, &out))
    }

    #[test]
    fn table_counts_small() {
        let mut g = rng(50);
        for (n, want) in [(2, 1), (3, 3), (4, 7), (5, 18), (6, 42), (7, 93)] {
            let psi = random_state(&mut g, n);
            let (cn, f) = run(&psi);
            assert_eq!(cn, want, "n={n}");
            assert!(f >= 1.0 - 1e-10, "n={n} fidelity {f}");
        }
    }

    #[test]
    fn structured_states() {
        let mut z = vec![ZERO; 16];
        z[0] = ONE;
        let (cn, f) = run(&z);
        assert_eq!(cn, 7);
        assert!((f - 1.0).abs() < 1e-12);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let mut ghz = vec![ZERO; 8];
        ghz[0] = c64(r, 0.0);
        ghz[7] = c64(r, 0.0);
        let (cn, f) = run(&ghz);
        assert_eq!(cn, 3);
        assert!(f >= 1.0 - 1e-10);
    }

    #[test]
    fn exact_including_phase() {
        let mut g = rng(51);
        let psi = random_state(&mut g, 5);
        let c = prepare_state(&psi).unwrap();
        let mut zero = vec![ZERO; 32];
        zero[0] = ONE;
        let out = c.apply(&zero).unwrap();
        let err: f64 = out.iter().zip(&psi).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        assert!(err < 1e-9);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(prepare_state(&[ONE, ONE]), Err(SynthError::NotNormalized { .. })));
        assert!(matches!(prepare_state(&[ONE, ZERO, ZERO]), Err(SynthError::InvalidInput(_))));
        assert!(matches!(nstate_count(0), Err(SynthError::InvalidInput(_))));
    }

    #[test]
    fn closed_form_matches_recursion_and_bound() {
        let t1: Vec<u64> = [2, 3, 4, 5, 10, 15].iter().map(|&n| nstate_count(n).unwrap()).collect();
        assert_eq!(t1, vec![1, 3, 7, 18, 867, 29627]);
        for n in 1..=30 {
            let v = nstate_count(n).unwrap();
            assert_eq!(v, nstate_recursive(n), "n={n}");
            assert!(12 * v as u128 <= 11 * (1u128 << n));
            assert!(state_prep_lower_bound(n) <= v);
        }
    }

    #[test]
    fn lower_bound_values() {
        let b: Vec<u64> = [1, 2, 3, 4, 5, 10, 15].iter().map(|&n| state_prep_lower_bound(n)).collect();
        assert_eq!(b, vec![0, 1, 2, 5, 12, 505, 16373]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn prop_permuted_amplitudes_keep_count(seed in any::<u64>(), n in 2usize..=6) {
            let mut g = rng(seed);
            let psi = random_state(&mut g, n);
            let mut perm = psi.clone();
            perm.reverse();
            let (a, fa) = run(&psi);
            let (b, fb) = run(&perm);
            prop_assert_eq!(a, b);
            prop_assert!(fa >= 1.0 - 1e-9 && fb >= 1.0 - 1e-9);
        }
    }
}
