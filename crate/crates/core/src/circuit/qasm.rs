use super::{Circuit, Gate};
use crate::gates::zyz;
use std::fmt::Write;

/// OpenQASM 2.0 text. Single-qubit gates become u3; the phases dropped by
/// that lowering are added to the trailing global-phase comment.
pub fn emit_qasm(c: &Circuit) -> String {
    let mut out = String::new();
    let mut phase = c.global_phase;
    out.push_str("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    writeln!(out, "qreg q[{}];", c.n_qubits).unwrap();
    for g in &c.gates {
        match *g {
            Gate::Cnot { control, target } => writeln!(out, "cx q[{control}],q[{target}];").unwrap(),
            Gate::U { target, m } => {
                let (alpha, t, p, l) = zyz(&m);
                phase += alpha;
                writeln!(out, "u3({t:.17e},{p:.17e},{l:.17e}) q[{target}];").unwrap();
            }
        }
    }
    writeln!(out, "// global_phase: {:.17e}", phase).unwrap();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::random_circuit;
    use crate::numerics::{c64, ComplexMatrix};
    use crate::random::rng;
    use num_complex::Complex64;

    /// Minimal independent interpreter for the emitted subset.
    fn interpret(text: &str) -> ComplexMatrix {
        let mut n = 0;
        let mut phase = 0.0;
        let mut ops: Vec<(String, Vec<f64>, Vec<usize>)> = Vec::new();
        for line in text.lines() {
            if let Some(rest) = line.strip_prefix("qreg q[") {
                n = rest.trim_end_matches("];").parse().unwrap();
            } else if let Some(rest) = line.strip_prefix("// global_phase: ") {
                phase = rest.parse().unwrap();
            } else if line.starts_with("cx ") || line.starts_with("u3(") {
                let name = if line.starts_with("cx") { "cx" } else { "u3" };
                let params: Vec<f64> = if name == "u3" {
                    let inner = &line[3..line.find(')').unwrap()];
                    inner.split(',').map(|x| x.parse().unwrap()).collect()
                } else {
                    vec![]
                };
                let wires: Vec<usize> = line
                    .match_indices("q[")
                    .map(|(i, _)| {
                        let s = &line[i + 2..];
                        s[..s.find(']').unwrap()].parse().unwrap()
                    })
                    .collect();
                ops.push((name.into(), params, wires));
            }
        }
        let dim = 1usize << n;
        let mut u = ComplexMatrix::identity(dim, dim);
        for (name, p, w) in ops {
            let mut g = ComplexMatrix::zeros(dim, dim);
            for col in 0..dim {
                if name == "cx" {
                    let (cb, tb) = (1 << (n - 1 - w[0]), 1 << (n - 1 - w[1]));
                    let row = if col & cb != 0 { col ^ tb } else { col };
                    g[(row, col)] = c64(1.0, 0.0);
                } else {
                    let bit = 1 << (n - 1 - w[0]);
                    let (th, ph, la) = (p[0], p[1], p[2]);
                    let m = [
                        [c64((th / 2.0).cos(), 0.0), -Complex64::from_polar((th / 2.0).sin(), la)],
                        [Complex64::from_polar((th / 2.0).sin(), ph), Complex64::from_polar((th / 2.0).cos(), ph + la)],
                    ];
                    let b = usize::from(col & bit != 0);
                    let base = col & !bit;
                    g[(base, col)] = m[0][b];
                    g[(base | bit, col)] = m[1][b];
                }
            }
            u = g * u;
        }
        u * Complex64::from_polar(1.0, phase)
    }

    #[test]
    fn empty_circuit_header_only() {
        let t = emit_qasm(&Circuit::new(2));
        assert!(t.contains("qreg q[2];"));
        assert!(!t.contains("cx") && !t.contains("u3"));
    }

    #[test]
    fn single_cnot() {
        let mut c = Circuit::new(2);
        c.cx(0, 1);
        assert_eq!(emit_qasm(&c).matches("cx q[0],q[1];").count(), 1);
    }

    #[test]
    fn reference_interpreter_roundtrip() {
        let mut g = rng(15);
        for _ in 0..5 {
            let c = random_circuit(&mut g, 4, 80);
            let u = interpret(&emit_qasm(&c));
            assert!((u - c.to_unitary().unwrap()).norm() < 1e-8);
        }
    }
}
