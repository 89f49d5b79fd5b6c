#![allow(dead_code)]

use std::io::BufReader;

use vcd::{Command, Parser, SimulationCommand, Value};

/// One value change read back from a VCD file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Change {
    pub time: u64,
    pub name: String,
    /// MSB-first digits, `x` for unknown.
    pub bits: String,
}

fn digit(v: Value) -> char {
    match v {
        Value::V0 => '0',
        Value::V1 => '1',
        Value::X => 'x',
        Value::Z => 'z',
    }
}

/// Re-reads a VCD produced by the simulator: returns the timestamps seen and
/// every change after the `$dumpvars` block.
pub fn read_vcd(bytes: &[u8]) -> (Vec<u64>, Vec<Change>) {
    let mut parser = Parser::new(BufReader::new(bytes));
    let header = parser.parse_header().expect("valid header");
    let name_of = |code: vcd::IdCode| {
        header
            .items
            .iter()
            .find_map(|item| match item {
                vcd::ScopeItem::Var(v) if v.code == code => Some(v.reference.clone()),
                _ => None,
            })
            .expect("declared code")
    };
    let mut times = Vec::new();
    let mut changes = Vec::new();
    let mut in_dump = false;
    let mut now = 0;
    for cmd in parser {
        match cmd.expect("valid command") {
            Command::Begin(SimulationCommand::Dumpvars) => in_dump = true,
            Command::End(SimulationCommand::Dumpvars) => in_dump = false,
            Command::Timestamp(t) => {
                times.push(t);
                now = t;
            }
            Command::ChangeScalar(code, v) if !in_dump => changes.push(Change {
                time: now,
                name: name_of(code),
                bits: digit(v).to_string(),
            }),
            Command::ChangeVector(code, v) if !in_dump => changes.push(Change {
                time: now,
                name: name_of(code),
                bits: v.iter().map(digit).collect(),
            }),
            _ => {}
        }
    }
    (times, changes)
}
