use super::{Circuit, Gate};
use crate::error::{Result, SynthError};
use crate::numerics::c64;
use serde::{Deserialize, Serialize};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CircuitDoc {
    n_qubits: usize,
    global_phase: f64,
    gates: Vec<GateDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum GateDoc {
    Cnot { control: usize, target: usize },
    U { target: usize, matrix: [[f64; 2]; 4] },
}

pub fn emit_json(c: &Circuit) -> String {
    let doc = CircuitDoc {
        n_qubits: c.n_qubits,
        global_phase: c.global_phase,
        gates: c
            .gates
            .iter()
            .map(|g| match *g {
                Gate::Cnot { control, target } => GateDoc::Cnot { control, target },
                Gate::U { target, m } => {
                    let e = [m[0][0], m[0][1], m[1][0], m[1][1]];
                    GateDoc::U { target, matrix: e.map(|z| [z.re, z.im]) }
                }
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("circuit serialization cannot fail")
}

pub fn parse_json(text: &str) -> Result<Circuit> {
    let doc: CircuitDoc = serde_json::from_str(text).map_err(|e| SynthError::Parse {
        line: e.line(),
        msg: format!("column {}: {}", e.column(), e),
    })?;
    let gates = doc
        .gates
        .into_iter()
        .map(|g| match g {
            GateDoc::Cnot { control, target } => Gate::Cnot { control, target },
            GateDoc::U { target, matrix } => {
                let z: Vec<_> = matrix.iter().map(|p| c64(p[0], p[1])).collect();
                Gate::U { target, m: [[z[0], z[1]], [z[2], z[3]]] }
            }
        })
        .collect();
    let c = Circuit { n_qubits: doc.n_qubits, gates, global_phase: doc.global_phase };
    c.validate().map_err(|e| SynthError::Parse { line: 0, msg: format!("field gates: {e}") })?;
    Ok(c)
}
