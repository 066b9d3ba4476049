//! Token-based parser for the textual IR.

use super::{Diagnostic, Diagnostics, Function, Instruction, Opcode, Operand, Program};
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    FuncRef(String),
    Imm(u64),
    Comma,
    Colon,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: u32,
    col: u32,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn bump(&mut self) -> u8 {
        let c = self.src[self.pos];
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        c
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn tokenize(mut self) -> Result<Vec<Spanned>, Diagnostics> {
        let mut out = Vec::new();
        while let Some(c) = self.peek() {
            let (line, col) = (self.line, self.col);
            match c {
                b' ' | b'\t' | b'\r' | b'\n' => {
                    self.bump();
                }
                b'#' => {
                    while self.peek().is_some_and(|c| c != b'\n') {
                        self.bump();
                    }
                }
                b',' => {
                    self.bump();
                    out.push(Spanned { tok: Tok::Comma, line, col });
                }
                b':' => {
                    self.bump();
                    out.push(Spanned { tok: Tok::Colon, line, col });
                }
                b'(' => {
                    self.bump();
                    out.push(Spanned { tok: Tok::LParen, line, col });
                }
                b')' => {
                    self.bump();
                    out.push(Spanned { tok: Tok::RParen, line, col });
                }
                b'{' => {
                    self.bump();
                    out.push(Spanned { tok: Tok::LBrace, line, col });
                }
                b'}' => {
                    self.bump();
                    out.push(Spanned { tok: Tok::RBrace, line, col });
                }
                b'[' => {
                    self.bump();
                    out.push(Spanned { tok: Tok::LBracket, line, col });
                }
                b']' => {
                    self.bump();
                    out.push(Spanned { tok: Tok::RBracket, line, col });
                }
                b'@' => {
                    self.bump();
                    let name = self.take_ident();
                    if name.is_empty() {
                        return Err(one(line, col, "expected function name after @"));
                    }
                    out.push(Spanned { tok: Tok::FuncRef(name), line, col });
                }
                b'0'..=b'9' => {
                    let text = self.take_while(|c| c.is_ascii_alphanumeric() || c == b'x');
                    let value = if let Some(hex) = text.strip_prefix("0x") {
                        u64::from_str_radix(hex, 16)
                    } else {
                        text.parse::<u64>()
                    };
                    match value {
                        Ok(v) => out.push(Spanned { tok: Tok::Imm(v), line, col }),
                        Err(_) => return Err(one(line, col, format!("bad immediate `{text}`"))),
                    }
                }
                c if c == b'_' || c.is_ascii_alphabetic() => {
                    let name = self.take_ident();
                    out.push(Spanned { tok: Tok::Ident(name), line, col });
                }
                other => {
                    return Err(one(
                        line,
                        col,
                        format!("unexpected character `{}`", other as char),
                    ));
                }
            }
        }
        Ok(out)
    }

    fn take_ident(&mut self) -> String {
        // `.` is allowed inside identifiers so `ci.add` lexes as one token;
        // validation rejects dots in register names.
        self.take_while(|c| c == b'_' || c == b'.' || c.is_ascii_alphanumeric())
    }

    fn take_while(&mut self, pred: impl Fn(u8) -> bool) -> String {
        let start = self.pos;
        while self.peek().is_some_and(&pred) {
            self.bump();
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }
}

fn one(line: u32, col: u32, message: impl Into<String>) -> Diagnostics {
    Diagnostics(vec![Diagnostic::new(line, col, message)])
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Spanned> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> (u32, u32) {
        self.toks
            .get(self.pos.min(self.toks.len().saturating_sub(1)))
            .map_or((0, 0), |t| (t.line, t.col))
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<Spanned, Diagnostics> {
        let (line, col) = self.here();
        match self.next() {
            Some(t) if t.tok == want => Ok(t),
            Some(t) => Err(one(t.line, t.col, format!("expected {what}"))),
            None => Err(one(line, col, format!("expected {what}, found end of input"))),
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<(String, u32), Diagnostics> {
        let (line, col) = self.here();
        match self.next() {
            Some(Spanned { tok: Tok::Ident(s), line, .. }) => Ok((s, line)),
            Some(t) => Err(one(t.line, t.col, format!("expected {what}"))),
            None => Err(one(line, col, format!("expected {what}, found end of input"))),
        }
    }

    fn parse_program(&mut self) -> Result<Program, Diagnostics> {
        let mut functions = Vec::new();
        while let Some(t) = self.peek() {
            match &t.tok {
                Tok::Ident(kw) if kw == "func" => {
                    self.next();
                    functions.push(self.parse_function()?);
                }
                _ => return Err(one(t.line, t.col, "expected `func`")),
            }
        }
        if functions.is_empty() {
            return Err(one(0, 0, "program has no functions"));
        }
        let entry = functions[0].name.clone();
        Ok(Program { functions, entry })
    }

    fn parse_function(&mut self) -> Result<Function, Diagnostics> {
        let (line, col) = self.here();
        let name = match self.next() {
            Some(Spanned { tok: Tok::FuncRef(n), .. }) => n,
            _ => return Err(one(line, col, "expected @name after `func`")),
        };
        self.expect(Tok::LParen, "(")?;
        let mut params = Vec::new();
        if self.peek().is_some_and(|t| t.tok != Tok::RParen) {
            loop {
                params.push(self.expect_ident("parameter register")?.0);
                match self.peek().map(|t| &t.tok) {
                    Some(Tok::Comma) => {
                        self.next();
                    }
                    _ => break,
                }
            }
        }
        self.expect(Tok::RParen, ")")?;
        let mut attributes = BTreeSet::new();
        if self.peek().is_some_and(|t| t.tok == Tok::LBracket) {
            self.next();
            if self.peek().is_some_and(|t| t.tok != Tok::RBracket) {
                loop {
                    attributes.insert(self.expect_ident("attribute")?.0);
                    match self.peek().map(|t| &t.tok) {
                        Some(Tok::Comma) => {
                            self.next();
                        }
                        _ => break,
                    }
                }
            }
            self.expect(Tok::RBracket, "]")?;
        }
        self.expect(Tok::LBrace, "{")?;
        let mut body = Vec::new();
        let mut labels = Vec::new();
        loop {
            let t = match self.peek() {
                Some(t) => t.clone(),
                None => {
                    let (line, col) = self.here();
                    return Err(one(line, col, "expected `}`, found end of input"));
                }
            };
            match t.tok {
                Tok::RBrace => {
                    self.next();
                    break;
                }
                Tok::Ident(word) => {
                    self.next();
                    if self.peek().is_some_and(|n| n.tok == Tok::Colon) {
                        self.next();
                        labels.push((word, body.len()));
                    } else {
                        let opcode = Opcode::from_mnemonic(&word).ok_or_else(|| {
                            one(t.line, t.col, format!("unknown opcode `{word}`"))
                        })?;
                        body.push(self.parse_instruction(opcode, t.line)?);
                    }
                }
                _ => return Err(one(t.line, t.col, "expected instruction, label, or `}`")),
            }
        }
        Ok(Function {
            name,
            params,
            attributes,
            body,
            labels,
        })
    }

    fn parse_instruction(&mut self, opcode: Opcode, line: u32) -> Result<Instruction, Diagnostics> {
        let mut operands = Vec::new();
        // Operand lists are comma-delimited, so instructions do not need to
        // sit on their own lines. `halt` is the only zero-operand opcode; for
        // it the following token always starts the next statement.
        if opcode != Opcode::Halt && self.starts_operand() {
            loop {
                operands.push(self.parse_operand(opcode, operands.len())?);
                match self.peek().map(|t| &t.tok) {
                    Some(Tok::Comma) => {
                        self.next();
                    }
                    _ => break,
                }
            }
        }
        Ok(Instruction {
            opcode,
            operands,
            source_line: line,
        })
    }

    fn starts_operand(&self) -> bool {
        match self.peek().map(|t| &t.tok) {
            Some(Tok::Imm(_)) | Some(Tok::FuncRef(_)) => true,
            // An identifier followed by `:` is the next label, not an operand.
            Some(Tok::Ident(_)) => !self
                .toks
                .get(self.pos + 1)
                .is_some_and(|n| n.tok == Tok::Colon),
            _ => false,
        }
    }

    fn parse_operand(&mut self, opcode: Opcode, position: usize) -> Result<Operand, Diagnostics> {
        let (line, col) = self.here();
        match self.next() {
            Some(Spanned { tok: Tok::Imm(v), .. }) => Ok(Operand::Imm(v)),
            Some(Spanned { tok: Tok::FuncRef(n), .. }) => Ok(Operand::Func(n)),
            Some(Spanned { tok: Tok::Ident(name), .. }) => {
                let is_label_pos = match opcode {
                    Opcode::Jmp => position == 0,
                    op if op.is_cond_branch() => position == 2,
                    _ => false,
                };
                if is_label_pos {
                    Ok(Operand::Label(name))
                } else {
                    Ok(Operand::Reg(name))
                }
            }
            Some(t) => Err(one(t.line, t.col, "expected operand")),
            None => Err(one(line, col, "expected operand, found end of input")),
        }
    }
}

/// Parse and validate a textual IR program.
///
/// On success the program satisfies all structural invariants checked by
/// [`Program::validate`]; on failure every collected diagnostic is returned
/// with its source position.
pub fn parse_program(text: &str) -> Result<Program, Diagnostics> {
    let toks = Lexer::new(text).tokenize()?;
    let mut parser = Parser { toks, pos: 0 };
    let program = parser.parse_program()?;
    program.validate()?;
    Ok(program)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hex_immediates() {
        let p = parse_program("func @f() { li r, 0x9D2B ret r }").unwrap();
        assert_eq!(p.functions[0].body[0].operands[1], Operand::Imm(0x9D2B));
    }

    #[test]
    fn comments_and_blank_lines() {
        let src = "# header\nfunc @f() {\n  # before\n  li r, 1 # trailing\n\n  ret r\n}\n";
        assert!(parse_program(src).is_ok());
    }

    #[test]
    fn attributes_parse() {
        let p = parse_program("func @f(a) [critical] { ret a }").unwrap();
        assert!(p.functions[0].is_critical());
    }

    #[test]
    fn labels_bind_to_following_instruction() {
        let p = parse_program("func @f() { jmp L\nL: ret 0 }").unwrap();
        assert_eq!(p.functions[0].label_index("L"), Some(1));
    }

    #[test]
    fn syntax_error_has_position() {
        let err = parse_program("func @f() { li r, }").unwrap_err();
        assert_eq!(err.0[0].line, 1);
        assert!(err.0[0].col > 0);
    }
}
