//! Textual three-address IR: types, parsing, printing, and validation.
//!
//! A program is a list of functions; the first function in the file is the
//! entry point. Function bodies are flat instruction lists with labels, so
//! control flow is unstructured (labels + branches). The grammar is:
//!
//! ```text
//! func @name(reg, reg) [attr, attr] {
//!   opcode operand, operand, ...
//! Llabel:
//!   ...
//! }
//! ```
//!
//! `#` starts a comment that runs to the end of the line. Instructions are
//! conventionally written one per line, but the parser is token-driven and
//! operand arity is fixed per opcode (`call` consumes operands as long as
//! commas continue), so line breaks carry no meaning.

mod parse;
mod print;

pub use parse::parse_program;

use std::collections::BTreeSet;
use std::fmt;

/// Instruction opcodes. The `ci.*` opcodes execute on the co-processor with
/// a drawn latency; everything else runs on the base core.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub enum Opcode {
    Li,
    Mov,
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    And,
    Or,
    Xor,
    Shl,
    Shr,
    Beq,
    Bne,
    Blt,
    Bge,
    Jmp,
    Call,
    Ret,
    Halt,
    CiAdd,
    CiSub,
    CiMul,
    CiDiv,
    CiRem,
    CiAnd,
    CiOr,
    CiXor,
}

impl Opcode {
    pub const ALL: [Opcode; 28] = [
        Opcode::Li,
        Opcode::Mov,
        Opcode::Add,
        Opcode::Sub,
        Opcode::Mul,
        Opcode::Div,
        Opcode::Rem,
        Opcode::And,
        Opcode::Or,
        Opcode::Xor,
        Opcode::Shl,
        Opcode::Shr,
        Opcode::Beq,
        Opcode::Bne,
        Opcode::Blt,
        Opcode::Bge,
        Opcode::Jmp,
        Opcode::Call,
        Opcode::Ret,
        Opcode::Halt,
        Opcode::CiAdd,
        Opcode::CiSub,
        Opcode::CiMul,
        Opcode::CiDiv,
        Opcode::CiRem,
        Opcode::CiAnd,
        Opcode::CiOr,
        Opcode::CiXor,
    ];

    pub fn mnemonic(self) -> &'static str {
        match self {
            Opcode::Li => "li",
            Opcode::Mov => "mov",
            Opcode::Add => "add",
            Opcode::Sub => "sub",
            Opcode::Mul => "mul",
            Opcode::Div => "div",
            Opcode::Rem => "rem",
            Opcode::And => "and",
            Opcode::Or => "or",
            Opcode::Xor => "xor",
            Opcode::Shl => "shl",
            Opcode::Shr => "shr",
            Opcode::Beq => "beq",
            Opcode::Bne => "bne",
            Opcode::Blt => "blt",
            Opcode::Bge => "bge",
            Opcode::Jmp => "jmp",
            Opcode::Call => "call",
            Opcode::Ret => "ret",
            Opcode::Halt => "halt",
            Opcode::CiAdd => "ci.add",
            Opcode::CiSub => "ci.sub",
            Opcode::CiMul => "ci.mul",
            Opcode::CiDiv => "ci.div",
            Opcode::CiRem => "ci.rem",
            Opcode::CiAnd => "ci.and",
            Opcode::CiOr => "ci.or",
            Opcode::CiXor => "ci.xor",
        }
    }

    pub fn from_mnemonic(s: &str) -> Option<Opcode> {
        Opcode::ALL.iter().copied().find(|op| op.mnemonic() == s)
    }

    /// Three-operand register arithmetic executed on the base core.
    pub fn is_base_arith(self) -> bool {
        matches!(
            self,
            Opcode::Add
                | Opcode::Sub
                | Opcode::Mul
                | Opcode::Div
                | Opcode::Rem
                | Opcode::And
                | Opcode::Or
                | Opcode::Xor
                | Opcode::Shl
                | Opcode::Shr
        )
    }

    pub fn is_ci(self) -> bool {
        matches!(
            self,
            Opcode::CiAdd
                | Opcode::CiSub
                | Opcode::CiMul
                | Opcode::CiDiv
                | Opcode::CiRem
                | Opcode::CiAnd
                | Opcode::CiOr
                | Opcode::CiXor
        )
    }

    pub fn is_cond_branch(self) -> bool {
        matches!(self, Opcode::Beq | Opcode::Bne | Opcode::Blt | Opcode::Bge)
    }

    /// The diversified counterpart of a base arithmetic opcode, if one exists.
    pub fn ci_counterpart(self) -> Option<Opcode> {
        Some(match self {
            Opcode::Add => Opcode::CiAdd,
            Opcode::Sub => Opcode::CiSub,
            Opcode::Mul => Opcode::CiMul,
            Opcode::Div => Opcode::CiDiv,
            Opcode::Rem => Opcode::CiRem,
            Opcode::And => Opcode::CiAnd,
            Opcode::Or => Opcode::CiOr,
            Opcode::Xor => Opcode::CiXor,
            _ => return None,
        })
    }

    /// The base-core opcode a `ci.*` instruction computes.
    pub fn base_counterpart(self) -> Option<Opcode> {
        Some(match self {
            Opcode::CiAdd => Opcode::Add,
            Opcode::CiSub => Opcode::Sub,
            Opcode::CiMul => Opcode::Mul,
            Opcode::CiDiv => Opcode::Div,
            Opcode::CiRem => Opcode::Rem,
            Opcode::CiAnd => Opcode::And,
            Opcode::CiOr => Opcode::Or,
            Opcode::CiXor => Opcode::Xor,
            _ => return None,
        })
    }
}

impl fmt::Display for Opcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.mnemonic())
    }
}

/// An instruction operand. Which kinds are legal in which position is fixed
/// per opcode and checked during validation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Operand {
    Reg(String),
    Imm(u64),
    Label(String),
    Func(String),
}

impl Operand {
    pub fn reg(name: &str) -> Operand {
        Operand::Reg(name.to_string())
    }

    pub fn as_reg(&self) -> Option<&str> {
        match self {
            Operand::Reg(r) => Some(r),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Eq)]
pub struct Instruction {
    pub opcode: Opcode,
    pub operands: Vec<Operand>,
    /// 1-based source line; 0 for synthesized instructions.
    pub source_line: u32,
}

/// Equality is structural: the source line an instruction came from does not
/// participate, so printed-and-reparsed programs compare equal.
impl PartialEq for Instruction {
    fn eq(&self, other: &Self) -> bool {
        self.opcode == other.opcode && self.operands == other.operands
    }
}

impl Instruction {
    pub fn new(opcode: Opcode, operands: Vec<Operand>) -> Instruction {
        Instruction {
            opcode,
            operands,
            source_line: 0,
        }
    }

    /// The register written by this instruction, if any.
    pub fn dest(&self) -> Option<&str> {
        match self.opcode {
            Opcode::Li | Opcode::Mov | Opcode::Call => self.operands[0].as_reg(),
            op if op.is_base_arith() || op.is_ci() => self.operands[0].as_reg(),
            _ => None,
        }
    }
}

/// Attribute marking a function as eligible for the transformation passes.
pub const ATTR_CRITICAL: &str = "critical";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Function {
    pub name: String,
    pub params: Vec<String>,
    pub attributes: BTreeSet<String>,
    pub body: Vec<Instruction>,
    /// Labels in source order; the index is the instruction the label
    /// precedes (an index equal to `body.len()` marks a trailing label).
    pub labels: Vec<(String, usize)>,
}

impl Function {
    pub fn is_critical(&self) -> bool {
        self.attributes.contains(ATTR_CRITICAL)
    }

    pub fn label_index(&self, name: &str) -> Option<usize> {
        self.labels
            .iter()
            .find(|(l, _)| l == name)
            .map(|&(_, i)| i)
    }

    /// Shift label indices to account for `count` instructions inserted at
    /// `at`. Labels pointing at `at` move with the instruction they preceded.
    pub(crate) fn shift_labels(&mut self, at: usize, count: usize) {
        for (_, idx) in &mut self.labels {
            if *idx >= at {
                *idx += count;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub functions: Vec<Function>,
    /// Name of the entry function; always the first function of the source.
    pub entry: String,
}

impl Program {
    pub fn function(&self, name: &str) -> Option<&Function> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn entry_function(&self) -> &Function {
        self.function(&self.entry).expect("validated entry")
    }

    /// Canonical textual form; parsing it back yields an equal program.
    pub fn to_text(&self) -> String {
        print::print_program(self)
    }

    /// Structural checks: unique function and label names, operand arity and
    /// kinds, resolvable branch targets and call targets, call arity.
    pub fn validate(&self) -> Result<(), Diagnostics> {
        let mut diags = Vec::new();
        if self.functions.is_empty() {
            diags.push(Diagnostic::new(0, 0, "program has no functions"));
        }
        if self.function(&self.entry).is_none() {
            diags.push(Diagnostic::new(
                0,
                0,
                format!("entry function @{} does not exist", self.entry),
            ));
        }
        for (i, f) in self.functions.iter().enumerate() {
            if self.functions[..i].iter().any(|g| g.name == f.name) {
                diags.push(Diagnostic::new(
                    0,
                    0,
                    format!("duplicate function @{}", f.name),
                ));
            }
            self.validate_function(f, &mut diags);
        }
        if diags.is_empty() {
            Ok(())
        } else {
            Err(Diagnostics(diags))
        }
    }

    fn validate_function(&self, f: &Function, diags: &mut Vec<Diagnostic>) {
        for (i, (label, idx)) in f.labels.iter().enumerate() {
            if f.labels[..i].iter().any(|(l, _)| l == label) {
                diags.push(Diagnostic::new(
                    0,
                    0,
                    format!("duplicate label {label} in @{}", f.name),
                ));
            }
            if *idx > f.body.len() {
                diags.push(Diagnostic::new(
                    0,
                    0,
                    format!("label {label} out of range in @{}", f.name),
                ));
            }
        }
        for instr in &f.body {
            self.validate_instruction(f, instr, diags);
        }
    }

    fn validate_instruction(&self, f: &Function, instr: &Instruction, diags: &mut Vec<Diagnostic>) {
        let line = instr.source_line;
        let mut err = |msg: String| diags.push(Diagnostic::new(line, 0, msg));
        let kinds: &[OperandKind] = match instr.opcode {
            Opcode::Li => &[OperandKind::Reg, OperandKind::Imm],
            Opcode::Mov => &[OperandKind::Reg, OperandKind::Src],
            op if op.is_base_arith() || op.is_ci() => {
                &[OperandKind::Reg, OperandKind::Src, OperandKind::Src]
            }
            op if op.is_cond_branch() => &[OperandKind::Src, OperandKind::Src, OperandKind::Label],
            Opcode::Jmp => &[OperandKind::Label],
            Opcode::Ret => &[OperandKind::Src],
            Opcode::Halt => &[],
            Opcode::Call => {
                // Validated separately: dest register, callee, then arguments.
                if instr.operands.len() < 2 {
                    err(format!(
                        "call needs a destination register and a function, got {} operands",
                        instr.operands.len()
                    ));
                    return;
                }
                if instr.operands[0].as_reg().is_none() {
                    err("call destination must be a register".to_string());
                }
                let callee = match &instr.operands[1] {
                    Operand::Func(name) => name,
                    _ => {
                        err("call target must be written @name".to_string());
                        return;
                    }
                };
                match self.function(callee) {
                    None => err(format!("call to unknown function @{callee}")),
                    Some(g) => {
                        let got = instr.operands.len() - 2;
                        if got != g.params.len() {
                            err(format!(
                                "call to @{callee} passes {got} arguments, expected {}",
                                g.params.len()
                            ));
                        }
                    }
                }
                for arg in &instr.operands[2..] {
                    if !matches!(arg, Operand::Reg(_) | Operand::Imm(_)) {
                        err("call arguments must be registers or immediates".to_string());
                    }
                }
                return;
            }
            _ => unreachable!(),
        };
        if instr.operands.len() != kinds.len() {
            err(format!(
                "{} takes {} operands, got {}",
                instr.opcode,
                kinds.len(),
                instr.operands.len()
            ));
            return;
        }
        for (operand, kind) in instr.operands.iter().zip(kinds) {
            let ok = match kind {
                OperandKind::Reg => matches!(operand, Operand::Reg(_)),
                OperandKind::Src => matches!(operand, Operand::Reg(_) | Operand::Imm(_)),
                OperandKind::Imm => matches!(operand, Operand::Imm(_)),
                OperandKind::Label => match operand {
                    Operand::Label(l) => match f.label_index(l) {
                        None => {
                            err(format!("unresolved label {l}"));
                            true
                        }
                        Some(idx) if idx >= f.body.len() => {
                            err(format!("label {l} points past the end of @{}", f.name));
                            true
                        }
                        Some(_) => true,
                    },
                    _ => false,
                },
            };
            if !ok {
                err(format!("bad operand for {}", instr.opcode));
            }
        }
        for operand in &instr.operands {
            if let Operand::Reg(r) = operand {
                if r.contains('.') {
                    err(format!("invalid register name {r}"));
                }
            }
        }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

enum OperandKind {
    Reg,
    Src,
    Imm,
    Label,
}

/// A single parse or validation finding with its source position.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct Diagnostic {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl Diagnostic {
    pub fn new(line: u32, col: u32, message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            line,
            col,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

/// Diagnostic list returned by parsing/validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostics(pub Vec<Diagnostic>);

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl std::error::Error for Diagnostics {}
