//! Canonical text form of a program. `parse(print(p))` is structurally
//! identical to `p`.

use super::{Operand, Program};
use std::fmt::Write;

pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    for (i, f) in p.functions.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        write!(out, "func @{}({})", f.name, f.params.join(", ")).unwrap();
        if !f.attributes.is_empty() {
            let attrs: Vec<&str> = f.attributes.iter().map(|s| s.as_str()).collect();
            write!(out, " [{}]", attrs.join(", ")).unwrap();
        }
        out.push_str(" {\n");
        for (idx, instr) in f.body.iter().enumerate() {
            for (label, lidx) in &f.labels {
                if *lidx == idx {
                    writeln!(out, "{label}:").unwrap();
                }
            }
            write!(out, "  {}", instr.opcode).unwrap();
            for (i, operand) in instr.operands.iter().enumerate() {
                out.push_str(if i == 0 { " " } else { ", " });
                match operand {
                    Operand::Reg(r) => out.push_str(r),
                    Operand::Imm(v) => write!(out, "{v}").unwrap(),
                    Operand::Label(l) => out.push_str(l),
                    Operand::Func(name) => write!(out, "@{name}").unwrap(),
                }
            }
            out.push('\n');
        }
        for (label, lidx) in &f.labels {
            if *lidx == f.body.len() {
                writeln!(out, "{label}:").unwrap();
            }
        }
        out.push_str("}\n");
    }
    out
}
