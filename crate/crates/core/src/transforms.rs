//! IR-to-IR passes over `critical` functions.
//!
//! All three passes target the same structural pattern, the "triangle": a
//! conditional branch that skips forward over a straight-line body to a join
//! label (an if without an else). [`detect_triangles`] finds the pattern;
//! [`cross_copy`] adds a dummy else-arm mirroring the body; [`cond_assign`]
//! flattens the body into branch-free mask/select arithmetic; [`diversify`]
//! rewrites selected arithmetic opcodes to their `ci.*` counterparts.
//!
//! Passes never touch non-critical functions, and regions they cannot
//! transform are reported, not silently dropped. Scratch registers are drawn
//! from the `s0, s1, ...` namespace, starting above any such name already in
//! the program.

use crate::ir::{Function, Instruction, Opcode, Operand, Program, ATTR_CRITICAL};
use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;
use thiserror::Error;

/// An if-without-else shape: `branch_index` conditionally skips `body` and
/// lands on `join_index`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriangleRegion {
    pub branch_index: usize,
    pub body: Range<usize>,
    pub join_index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct SkippedRegion {
    pub function: String,
    pub branch_index: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct PassReport {
    pub pass: String,
    pub functions_visited: u32,
    pub instructions_replaced: u32,
    pub instructions_added: u32,
    pub instructions_removed: u32,
    pub regions_matched: u32,
    pub regions_skipped: Vec<SkippedRegion>,
}

impl PassReport {
    fn new(pass: &str) -> PassReport {
        PassReport {
            pass: pass.to_string(),
            functions_visited: 0,
            instructions_replaced: 0,
            instructions_added: 0,
            instructions_removed: 0,
            regions_matched: 0,
            regions_skipped: Vec::new(),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TransformError {
    #[error("{op} cannot be diversified; the filter must stay within add, sub, mul, div, rem, and, or, xor")]
    InvalidFilter { op: Opcode },
}

/// Opcodes legal inside a triangle body. Control flow other than the
/// guarding branch disqualifies the region; calls are structurally fine but
/// the rewriting passes skip them.
fn is_straight_line(op: Opcode) -> bool {
    matches!(op, Opcode::Li | Opcode::Mov | Opcode::Call) || op.is_base_arith() || op.is_ci()
}

/// Find all maximal triangle regions of `f`: a conditional branch whose
/// target label lies forward in the same function, with nothing but
/// straight-line instructions in between and no label inside the body (a
/// label there would admit a second entry). Regions never overlap because a
/// body cannot contain a branch.
pub fn detect_triangles(f: &Function) -> Vec<TriangleRegion> {
    let mut regions = Vec::new();
    for (i, instr) in f.body.iter().enumerate() {
        if !instr.opcode.is_cond_branch() {
            continue;
        }
        let target = match &instr.operands[2] {
            Operand::Label(l) => l,
            _ => continue,
        };
        let j = match f.label_index(target) {
            Some(j) => j,
            None => continue,
        };
        if j <= i + 1 {
            continue;
        }
        let body = (i + 1)..j;
        if !f.body[body.clone()].iter().all(|b| is_straight_line(b.opcode)) {
            continue;
        }
        if f.labels.iter().any(|&(_, idx)| body.contains(&idx)) {
            continue;
        }
        regions.push(TriangleRegion {
            branch_index: i,
            body,
            join_index: j,
        });
    }
    regions
}

/// Allocates `s<N>` register names starting above any already present.
struct ScratchAlloc {
    next: u64,
}

impl ScratchAlloc {
    fn new(p: &Program) -> ScratchAlloc {
        let mut max: Option<u64> = None;
        let mut see = |name: &str| {
            if let Some(num) = name.strip_prefix('s').and_then(|d| d.parse::<u64>().ok()) {
                max = Some(max.map_or(num, |m| m.max(num)));
            }
        };
        for f in &p.functions {
            for param in &f.params {
                see(param);
            }
            for instr in &f.body {
                for operand in &instr.operands {
                    if let Operand::Reg(r) = operand {
                        see(r);
                    }
                }
            }
        }
        ScratchAlloc {
            next: max.map_or(0, |m| m + 1),
        }
    }

    fn fresh(&mut self) -> String {
        let name = format!("s{}", self.next);
        self.next += 1;
        name
    }
}

fn fresh_label(p: &Program, prefix: &str, counter: &mut u64) -> String {
    loop {
        let name = format!("{prefix}{}", *counter);
        *counter += 1;
        if p.functions
            .iter()
            .all(|f| f.labels.iter().all(|(l, _)| l != &name))
        {
            return name;
        }
    }
}

/// Why a region cannot be rewritten without changing behavior, if any.
///
/// A division whose divisor register is compared by the guarding branch is
/// treated as guarded by it: executing that division unconditionally (or in
/// a mirrored arm) could divide by zero where the original never did.
fn unmirrorable_reason(f: &Function, region: &TriangleRegion) -> Option<String> {
    let branch = &f.body[region.branch_index];
    let guarded: BTreeSet<&str> = branch.operands[..2]
        .iter()
        .filter_map(|o| o.as_reg())
        .collect();
    for instr in &f.body[region.body.clone()] {
        if instr.opcode == Opcode::Call {
            return Some("body contains a call".to_string());
        }
        if matches!(
            instr.opcode,
            Opcode::Div | Opcode::Rem | Opcode::CiDiv | Opcode::CiRem
        ) {
            match &instr.operands[2] {
                Operand::Imm(0) => return Some("division by a zero immediate".to_string()),
                Operand::Reg(r) if guarded.contains(r.as_str()) => {
                    return Some(format!("divisor {r} is guarded by the removed branch"));
                }
                _ => {}
            }
        }
    }
    None
}

/// Rewrite one instruction so its destination goes to a fresh scratch and
/// its source operands read through the scratch map.
fn remap_into_scratch(
    instr: &Instruction,
    map: &mut BTreeMap<String, String>,
    alloc: &mut ScratchAlloc,
) -> Instruction {
    let mut operands = instr.operands.clone();
    for operand in operands.iter_mut().skip(1) {
        if let Operand::Reg(r) = operand {
            if let Some(s) = map.get(r) {
                *operand = Operand::Reg(s.clone());
            }
        }
    }
    if let Operand::Reg(dst) = &instr.operands[0] {
        let scratch = alloc.fresh();
        map.insert(dst.clone(), scratch.clone());
        operands[0] = Operand::Reg(scratch);
    }
    Instruction::new(instr.opcode, operands)
}

/// Cross-copying: give every triangle an else-arm that mirrors the body's
/// opcodes operand-for-operand into fresh scratch registers, so both branch
/// outcomes execute the same instruction sequence.
pub fn cross_copy(p: &Program) -> (Program, PassReport) {
    let mut out = p.clone();
    let mut report = PassReport::new("cross-copy");
    let mut alloc = ScratchAlloc::new(p);
    let mut label_counter = 0u64;
    for fi in 0..out.functions.len() {
        if !out.functions[fi].attributes.contains(ATTR_CRITICAL) {
            continue;
        }
        report.functions_visited += 1;
        let regions = detect_triangles(&out.functions[fi]);
        for region in regions.into_iter().rev() {
            if let Some(reason) = unmirrorable_reason(&out.functions[fi], &region) {
                report.regions_skipped.push(SkippedRegion {
                    function: out.functions[fi].name.clone(),
                    branch_index: region.branch_index,
                    reason,
                });
                continue;
            }
            let else_label = fresh_label(&out, "Lcc", &mut label_counter);
            let f = &mut out.functions[fi];
            let join_label = match &f.body[region.branch_index].operands[2] {
                Operand::Label(l) => l.clone(),
                _ => unreachable!("triangle branch"),
            };
            let mut map = BTreeMap::new();
            let mut mirror = Vec::with_capacity(region.body.len() + 1);
            mirror.push(Instruction::new(
                Opcode::Jmp,
                vec![Operand::Label(join_label)],
            ));
            for idx in region.body.clone() {
                let instr = f.body[idx].clone();
                mirror.push(remap_into_scratch(&instr, &mut map, &mut alloc));
            }
            let inserted = mirror.len();
            f.shift_labels(region.join_index, inserted);
            f.body
                .splice(region.join_index..region.join_index, mirror);
            // The jump sits first in the spliced block; the mirror starts
            // right after it, which is where the branch now lands.
            f.labels
                .push((else_label.clone(), region.join_index + 1));
            f.body[region.branch_index].operands[2] = Operand::Label(else_label);
            report.instructions_added += inserted as u32;
            report.regions_matched += 1;
        }
    }
    debug_assert!(out.validate().is_ok(), "cross_copy produced invalid IR");
    (out, report)
}

/// Branch-free condition bit: append instructions computing "the body would
/// have executed" as 0/1 into a fresh scratch, returned by name.
fn emit_condition_bit(
    branch: &Instruction,
    seq: &mut Vec<Instruction>,
    alloc: &mut ScratchAlloc,
) -> String {
    let a = branch.operands[0].clone();
    let b = branch.operands[1].clone();
    let all_ones = Operand::Imm(u64::MAX);
    let mut bin = |op: Opcode, x: Operand, y: Operand, seq: &mut Vec<Instruction>| {
        let dst = alloc.fresh();
        seq.push(Instruction::new(
            op,
            vec![Operand::Reg(dst.clone()), x, y],
        ));
        dst
    };
    // Nonzero test: (d | (0 - d)) >> 63 is 1 iff d != 0.
    let nonzero = |a: Operand, b: Operand, seq: &mut Vec<Instruction>, bin: &mut dyn FnMut(Opcode, Operand, Operand, &mut Vec<Instruction>) -> String| {
        let d = bin(Opcode::Xor, a, b, seq);
        let neg = bin(Opcode::Sub, Operand::Imm(0), Operand::reg(&d), seq);
        let or = bin(Opcode::Or, Operand::reg(&d), Operand::reg(&neg), seq);
        bin(Opcode::Shr, Operand::reg(&or), Operand::Imm(63), seq)
    };
    // Unsigned a < b: borrow bit of a - b, ((~a & b) | ((~a | b) & (a - b))) >> 63.
    let less_than = |a: Operand, b: Operand, seq: &mut Vec<Instruction>, bin: &mut dyn FnMut(Opcode, Operand, Operand, &mut Vec<Instruction>) -> String| {
        let na = bin(Opcode::Xor, a.clone(), all_ones.clone(), seq);
        let t1 = bin(Opcode::And, Operand::reg(&na), b.clone(), seq);
        let t2 = bin(Opcode::Or, Operand::reg(&na), b.clone(), seq);
        let t3 = bin(Opcode::Sub, a, b, seq);
        let t4 = bin(Opcode::And, Operand::reg(&t2), Operand::reg(&t3), seq);
        let t5 = bin(Opcode::Or, Operand::reg(&t1), Operand::reg(&t4), seq);
        bin(Opcode::Shr, Operand::reg(&t5), Operand::Imm(63), seq)
    };
    // The branch skips the body when taken, so the body executes on the
    // negated branch predicate.
    match branch.opcode {
        Opcode::Beq => nonzero(a, b, seq, &mut bin),
        Opcode::Bne => {
            let ne = nonzero(a, b, seq, &mut bin);
            bin(Opcode::Xor, Operand::reg(&ne), Operand::Imm(1), seq)
        }
        Opcode::Blt => {
            let lt = less_than(a, b, seq, &mut bin);
            bin(Opcode::Xor, Operand::reg(&lt), Operand::Imm(1), seq)
        }
        Opcode::Bge => less_than(a, b, seq, &mut bin),
        _ => unreachable!("triangle branch"),
    }
}

/// Conditional assignment: flatten every triangle whose body is straight-line
/// register assignments. The branch is removed; the body always executes into
/// scratch registers; each written register `r` then gets
/// `r = (new & mask) | (old & ~mask)` with `mask = 0 - condition_bit`.
pub fn cond_assign(p: &Program) -> (Program, PassReport) {
    let mut out = p.clone();
    let mut report = PassReport::new("cond-assign");
    let mut alloc = ScratchAlloc::new(p);
    for fi in 0..out.functions.len() {
        if !out.functions[fi].attributes.contains(ATTR_CRITICAL) {
            continue;
        }
        report.functions_visited += 1;
        let regions = detect_triangles(&out.functions[fi]);
        for region in regions.into_iter().rev() {
            if let Some(reason) = unmirrorable_reason(&out.functions[fi], &region) {
                report.regions_skipped.push(SkippedRegion {
                    function: out.functions[fi].name.clone(),
                    branch_index: region.branch_index,
                    reason,
                });
                continue;
            }
            let f = &mut out.functions[fi];
            let branch = f.body[region.branch_index].clone();

            let mut prefix = Vec::new();
            let bit = emit_condition_bit(&branch, &mut prefix, &mut alloc);
            let mask = alloc.fresh();
            prefix.push(Instruction::new(
                Opcode::Sub,
                vec![Operand::reg(&mask), Operand::Imm(0), Operand::reg(&bit)],
            ));
            let notmask = alloc.fresh();
            prefix.push(Instruction::new(
                Opcode::Xor,
                vec![
                    Operand::reg(&notmask),
                    Operand::reg(&mask),
                    Operand::Imm(u64::MAX),
                ],
            ));

            let mut map = BTreeMap::new();
            let mut write_order: Vec<String> = Vec::new();
            for idx in region.body.clone() {
                if let Some(dst) = f.body[idx].dest() {
                    if !write_order.iter().any(|w| w == dst) {
                        write_order.push(dst.to_string());
                    }
                }
                f.body[idx] = remap_into_scratch(&f.body[idx], &mut map, &mut alloc);
            }
            report.instructions_replaced += region.body.len() as u32;

            let mut selects = Vec::with_capacity(write_order.len() * 3);
            for orig in &write_order {
                let new_value = &map[orig];
                let kept = alloc.fresh();
                let dropped = alloc.fresh();
                selects.push(Instruction::new(
                    Opcode::And,
                    vec![
                        Operand::reg(&kept),
                        Operand::reg(new_value),
                        Operand::reg(&mask),
                    ],
                ));
                selects.push(Instruction::new(
                    Opcode::And,
                    vec![
                        Operand::reg(&dropped),
                        Operand::reg(orig),
                        Operand::reg(&notmask),
                    ],
                ));
                selects.push(Instruction::new(
                    Opcode::Or,
                    vec![
                        Operand::reg(orig),
                        Operand::reg(&kept),
                        Operand::reg(&dropped),
                    ],
                ));
            }

            let added_selects = selects.len();
            f.shift_labels(region.join_index, added_selects);
            f.body.splice(region.join_index..region.join_index, selects);

            let added_prefix = prefix.len();
            f.shift_labels(region.branch_index + 1, added_prefix.wrapping_sub(1));
            f.body
                .splice(region.branch_index..=region.branch_index, prefix);

            report.instructions_added += (added_prefix + added_selects) as u32;
            report.instructions_removed += 1;
            report.regions_matched += 1;
        }
    }
    debug_assert!(out.validate().is_ok(), "cond_assign produced invalid IR");
    (out, report)
}

/// Custom-instruction insertion: rewrite every instruction of a critical
/// function whose opcode is in `ops_filter` to its `ci.*` counterpart.
pub fn diversify(
    p: &Program,
    ops_filter: &BTreeSet<Opcode>,
) -> Result<(Program, PassReport), TransformError> {
    for &op in ops_filter {
        if op.ci_counterpart().is_none() {
            return Err(TransformError::InvalidFilter { op });
        }
    }
    let mut out = p.clone();
    let mut report = PassReport::new("diversify");
    for f in &mut out.functions {
        if !f.attributes.contains(ATTR_CRITICAL) {
            continue;
        }
        report.functions_visited += 1;
        for instr in &mut f.body {
            if ops_filter.contains(&instr.opcode) {
                instr.opcode = instr.opcode.ci_counterpart().expect("filter validated");
                report.instructions_replaced += 1;
            }
        }
    }
    debug_assert!(out.validate().is_ok(), "diversify produced invalid IR");
    Ok((out, report))
}
