use agg_core::reductions::{BooleanCircuit, Gate};
use serde::Deserialize;

use super::{parse, rows, FormatError};

pub const HEADER: &str = "circ/v1";

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw {
    #[allow(dead_code)]
    format: String,
    gates: Vec<RawGate>,
    output: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGate {
    op: String,
    #[serde(default, rename = "in")]
    inputs: Vec<usize>,
}

/// Gates are `{"op": "input"}`, `{"op": "not", "in": [a]}`,
/// `{"op": "and", "in": [a, b]}` or `{"op": "or", "in": [a, b]}`.
pub fn read_circuit(text: &str) -> Result<BooleanCircuit, FormatError> {
    let raw: Raw = parse(text, HEADER)?;
    let mut gates = Vec::with_capacity(raw.gates.len());
    for (i, g) in raw.gates.iter().enumerate() {
        let gate = match (g.op.as_str(), g.inputs.as_slice()) {
            ("input", []) => Gate::Input,
            ("not", &[a]) => Gate::Not(a),
            ("and", &[a, b]) => Gate::And(a, b),
            ("or", &[a, b]) => Gate::Or(a, b),
            (op, ins) => return Err(FormatError::Invalid(format!("gate {i}: `{op}` with {} inputs", ins.len()))),
        };
        gates.push(gate);
    }
    BooleanCircuit::new(gates, raw.output).map_err(|e| FormatError::Invalid(e.to_string()))
}

pub fn write_circuit(c: &BooleanCircuit) -> String {
    let gates = rows(c.gates(), |g| match *g {
        Gate::Input => "\n    {\"op\": \"input\"}".to_string(),
        Gate::Not(a) => format!("\n    {{\"op\": \"not\", \"in\": [{a}]}}"),
        Gate::And(a, b) => format!("\n    {{\"op\": \"and\", \"in\": [{a}, {b}]}}"),
        Gate::Or(a, b) => format!("\n    {{\"op\": \"or\", \"in\": [{a}, {b}]}}"),
    });
    format!("{{\n  \"format\": \"{HEADER}\",\n  \"gates\": [{gates}\n  ],\n  \"output\": {}\n}}\n", c.output())
}
