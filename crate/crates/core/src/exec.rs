//! Cycle-accurate execution of IR programs.
//!
//! The executor lowers a validated [`Program`] to dense register indices and
//! resolved jump targets once, then interprets it. Every instruction adds its
//! [`CostModel`] cycles to the cycle counter; `ci.*` instructions instead add
//! the stall cycles reported by the co-processor, emulating a pipeline that
//! stalls until the custom instruction completes. Runs are deterministic
//! given (program, arguments, cost model, co-processor state).

use crate::coproc::CoProcessor;
use crate::ir::{Diagnostics, Instruction, Opcode, Operand, Program};
use std::collections::BTreeMap;
use thiserror::Error;

/// Number of significant bits; `bit_length(0) == 0`.
pub fn bit_length(x: u64) -> u64 {
    (64 - x.leading_zeros()) as u64
}

/// Per-opcode cycle costs plus the operand-dependent multiplier/divider
/// model. With the operand-dependent flags off, `mul`/`div`/`rem` cost their
/// constant base entries; with them on (the default) they emulate an
/// early-terminating functional unit whose latency tracks operand width.
#[derive(Debug, Clone, PartialEq)]
pub struct CostModel {
    base_costs: BTreeMap<Opcode, u64>,
    pub branch_taken: u64,
    pub branch_not_taken: u64,
    pub mul_operand_dependent: bool,
    pub div_operand_dependent: bool,
}

impl Default for CostModel {
    fn default() -> Self {
        let mut base_costs = BTreeMap::new();
        for (op, cycles) in [
            (Opcode::Li, 1),
            (Opcode::Mov, 1),
            (Opcode::Add, 1),
            (Opcode::Sub, 1),
            (Opcode::Mul, 3),
            (Opcode::Div, 5),
            (Opcode::Rem, 5),
            (Opcode::And, 1),
            (Opcode::Or, 1),
            (Opcode::Xor, 1),
            (Opcode::Shl, 1),
            (Opcode::Shr, 1),
            // jmp costs 2 so a taken branch (3) equals a not-taken branch (1)
            // plus the jump closing the fall-through arm; cross-copied
            // triangles then cost the same on both paths.
            (Opcode::Jmp, 2),
            (Opcode::Call, 2),
            (Opcode::Ret, 2),
            (Opcode::Halt, 1),
        ] {
            base_costs.insert(op, cycles);
        }
        CostModel {
            base_costs,
            branch_taken: 3,
            branch_not_taken: 1,
            mul_operand_dependent: true,
            div_operand_dependent: true,
        }
    }
}

impl CostModel {
    pub fn with_flags(mul_operand_dependent: bool, div_operand_dependent: bool) -> CostModel {
        CostModel {
            mul_operand_dependent,
            div_operand_dependent,
            ..CostModel::default()
        }
    }

    pub fn base_cost(&self, op: Opcode) -> u64 {
        self.base_costs.get(&op).copied().unwrap_or(1)
    }

    /// Override one base cost. Costs below 1 cycle are rejected.
    pub fn set_base_cost(&mut self, op: Opcode, cycles: u64) -> Result<(), ExecError> {
        if cycles < 1 {
            return Err(ExecError::InvalidCost { op, cycles });
        }
        if op.is_ci() {
            return Err(ExecError::InvalidCost { op, cycles });
        }
        self.base_costs.insert(op, cycles);
        Ok(())
    }

    /// Cycles consumed by one instruction given the runtime values of its
    /// source operands (in operand order). Branch costs depend on the
    /// comparison outcome; `ci.*` opcodes return 0 because their cycles come
    /// from the co-processor's latency draw.
    pub fn cost_of(&self, opcode: Opcode, operand_values: &[u64]) -> u64 {
        match opcode {
            op if op.is_cond_branch() => {
                if branch_taken(op, operand_values[0], operand_values[1]) {
                    self.branch_taken
                } else {
                    self.branch_not_taken
                }
            }
            Opcode::Mul if self.mul_operand_dependent => {
                2 + bit_length(operand_values[1]).div_ceil(8)
            }
            Opcode::Div | Opcode::Rem if self.div_operand_dependent => {
                4 + bit_length(operand_values[0]).div_ceil(8)
            }
            op if op.is_ci() => 0,
            op => self.base_cost(op),
        }
    }
}

/// Branch predicate on unsigned values.
pub(crate) fn branch_taken(op: Opcode, a: u64, b: u64) -> bool {
    match op {
        Opcode::Beq => a == b,
        Opcode::Bne => a != b,
        Opcode::Blt => a < b,
        Opcode::Bge => a >= b,
        _ => unreachable!("not a branch"),
    }
}

/// Free-function form of [`CostModel::cost_of`].
pub fn cost_of(instr: &Instruction, operand_values: &[u64], cost: &CostModel) -> u64 {
    cost.cost_of(instr.opcode, operand_values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct RunResult {
    pub return_value: u64,
    pub total_cycles: u64,
    pub instruction_count: u64,
}

#[derive(Debug, Clone)]
pub struct ExecOptions {
    /// Maximum number of executed instructions before the run is aborted as
    /// likely non-terminating.
    pub step_budget: u64,
}

impl Default for ExecOptions {
    fn default() -> Self {
        ExecOptions {
            step_budget: 10_000_000,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ExecError {
    #[error("invalid program: {0}")]
    Invalid(Diagnostics),
    #[error("entry function expects {expected} arguments, got {got}")]
    WrongArity { expected: usize, got: usize },
    #[error("division by zero in @{function} (line {source_line})")]
    DivisionByZero { function: String, source_line: u32 },
    #[error("step budget of {budget} instructions exceeded; program is likely non-terminating")]
    StepBudgetExceeded { budget: u64 },
    #[error("ci.* instruction at line {source_line} but no co-processor attached")]
    MissingCoprocessor { source_line: u32 },
    #[error("execution fell off the end of @{function}")]
    FellOffEnd { function: String },
    #[error("cost for {op} of {cycles} cycles is not allowed; costs must be >= 1")]
    InvalidCost { op: Opcode, cycles: u64 },
}

#[derive(Debug, Clone, Copy)]
enum Src {
    Reg(u32),
    Imm(u64),
}

#[derive(Debug, Clone)]
enum LInstr {
    Li { dst: u32, imm: u64 },
    Mov { dst: u32, src: Src },
    Bin { op: Opcode, dst: u32, a: Src, b: Src },
    Ci { op: Opcode, dst: u32, a: Src, b: Src },
    Br { op: Opcode, a: Src, b: Src, target: u32 },
    Jmp { target: u32 },
    Call { dst: u32, func: u32, args: Vec<Src> },
    Ret { src: Src },
    Halt,
}

#[derive(Debug)]
struct LoweredFn {
    name: String,
    n_params: usize,
    n_regs: usize,
    code: Vec<LInstr>,
    lines: Vec<u32>,
}

/// One suspended caller on the call stack.
#[derive(Debug, Clone)]
pub struct Frame {
    pub function: usize,
    pub return_pc: usize,
    pub dest: u32,
    pub saved_registers: Vec<u64>,
}

/// Architectural state of one run: the current frame's registers, the
/// program counter within the current function, the monotone cycle counter,
/// and the stack of suspended callers.
#[derive(Debug, Clone)]
pub struct MachineState {
    pub registers: Vec<u64>,
    pub pc: usize,
    pub cycle_counter: u64,
    pub call_stack: Vec<Frame>,
}

/// A program lowered for execution. Construction validates the program;
/// `run` may then be called any number of times.
pub struct Executor {
    funcs: Vec<LoweredFn>,
    entry: usize,
}

impl Executor {
    pub fn new(program: &Program) -> Result<Executor, ExecError> {
        program.validate().map_err(ExecError::Invalid)?;
        let func_index: BTreeMap<&str, u32> = program
            .functions
            .iter()
            .enumerate()
            .map(|(i, f)| (f.name.as_str(), i as u32))
            .collect();
        let mut funcs = Vec::with_capacity(program.functions.len());
        for f in &program.functions {
            let mut regs: BTreeMap<&str, u32> = BTreeMap::new();
            for p in &f.params {
                let next = regs.len() as u32;
                regs.entry(p).or_insert(next);
            }
            for instr in &f.body {
                for operand in &instr.operands {
                    if let Operand::Reg(r) = operand {
                        let next = regs.len() as u32;
                        regs.entry(r).or_insert(next);
                    }
                }
            }
            let reg = |name: &str| regs[name];
            let src = |operand: &Operand| match operand {
                Operand::Reg(r) => Src::Reg(reg(r)),
                Operand::Imm(v) => Src::Imm(*v),
                _ => unreachable!("validated"),
            };
            let mut code = Vec::with_capacity(f.body.len());
            let mut lines = Vec::with_capacity(f.body.len());
            for instr in &f.body {
                let ops = &instr.operands;
                let lowered = match instr.opcode {
                    Opcode::Li => LInstr::Li {
                        dst: reg(ops[0].as_reg().unwrap()),
                        imm: match ops[1] {
                            Operand::Imm(v) => v,
                            _ => unreachable!("validated"),
                        },
                    },
                    Opcode::Mov => LInstr::Mov {
                        dst: reg(ops[0].as_reg().unwrap()),
                        src: src(&ops[1]),
                    },
                    op if op.is_base_arith() => LInstr::Bin {
                        op,
                        dst: reg(ops[0].as_reg().unwrap()),
                        a: src(&ops[1]),
                        b: src(&ops[2]),
                    },
                    op if op.is_ci() => LInstr::Ci {
                        op,
                        dst: reg(ops[0].as_reg().unwrap()),
                        a: src(&ops[1]),
                        b: src(&ops[2]),
                    },
                    op if op.is_cond_branch() => LInstr::Br {
                        op,
                        a: src(&ops[0]),
                        b: src(&ops[1]),
                        target: match &ops[2] {
                            Operand::Label(l) => f.label_index(l).unwrap() as u32,
                            _ => unreachable!("validated"),
                        },
                    },
                    Opcode::Jmp => LInstr::Jmp {
                        target: match &ops[0] {
                            Operand::Label(l) => f.label_index(l).unwrap() as u32,
                            _ => unreachable!("validated"),
                        },
                    },
                    Opcode::Call => LInstr::Call {
                        dst: reg(ops[0].as_reg().unwrap()),
                        func: match &ops[1] {
                            Operand::Func(name) => func_index[name.as_str()],
                            _ => unreachable!("validated"),
                        },
                        args: ops[2..].iter().map(src).collect(),
                    },
                    Opcode::Ret => LInstr::Ret { src: src(&ops[0]) },
                    Opcode::Halt => LInstr::Halt,
                    _ => unreachable!(),
                };
                code.push(lowered);
                lines.push(instr.source_line);
            }
            funcs.push(LoweredFn {
                name: f.name.clone(),
                n_params: f.params.len(),
                n_regs: regs.len(),
                code,
                lines,
            });
        }
        let entry = func_index[program.entry.as_str()] as usize;
        Ok(Executor { funcs, entry })
    }

    pub fn entry_arity(&self) -> usize {
        self.funcs[self.entry].n_params
    }

    pub fn run(
        &self,
        args: &[u64],
        cost: &CostModel,
        coproc: Option<&mut CoProcessor>,
        opts: &ExecOptions,
    ) -> Result<RunResult, ExecError> {
        self.run_with_observer(args, cost, coproc, opts, |_, _, _| {})
    }

    /// Like [`Executor::run`], but invokes `observer(function_index, pc,
    /// cycles)` after each executed instruction. Used by tests to check that
    /// the cycle counter is exactly the sum of per-step costs.
    pub fn run_with_observer(
        &self,
        args: &[u64],
        cost: &CostModel,
        mut coproc: Option<&mut CoProcessor>,
        opts: &ExecOptions,
        mut observer: impl FnMut(usize, usize, u64),
    ) -> Result<RunResult, ExecError> {
        let entry = &self.funcs[self.entry];
        if args.len() != entry.n_params {
            return Err(ExecError::WrongArity {
                expected: entry.n_params,
                got: args.len(),
            });
        }
        let mut registers = vec![0u64; entry.n_regs];
        registers[..args.len()].copy_from_slice(args);
        let mut state = MachineState {
            registers,
            pc: 0,
            cycle_counter: 0,
            call_stack: Vec::new(),
        };
        let mut current = self.entry;
        let mut executed: u64 = 0;
        loop {
            let f = &self.funcs[current];
            if state.pc >= f.code.len() {
                return Err(ExecError::FellOffEnd {
                    function: f.name.clone(),
                });
            }
            if executed >= opts.step_budget {
                return Err(ExecError::StepBudgetExceeded {
                    budget: opts.step_budget,
                });
            }
            executed += 1;
            let pc = state.pc;
            let val = |s: Src, regs: &[u64]| match s {
                Src::Reg(r) => regs[r as usize],
                Src::Imm(v) => v,
            };
            let step_cost;
            match &f.code[pc] {
                LInstr::Li { dst, imm } => {
                    step_cost = cost.base_cost(Opcode::Li);
                    state.registers[*dst as usize] = *imm;
                    state.pc += 1;
                }
                LInstr::Mov { dst, src } => {
                    step_cost = cost.base_cost(Opcode::Mov);
                    state.registers[*dst as usize] = val(*src, &state.registers);
                    state.pc += 1;
                }
                LInstr::Bin { op, dst, a, b } => {
                    let (a, b) = (val(*a, &state.registers), val(*b, &state.registers));
                    step_cost = cost.cost_of(*op, &[a, b]);
                    let result = match op {
                        Opcode::Add => a.wrapping_add(b),
                        Opcode::Sub => a.wrapping_sub(b),
                        Opcode::Mul => a.wrapping_mul(b),
                        Opcode::Div | Opcode::Rem => {
                            if b == 0 {
                                return Err(ExecError::DivisionByZero {
                                    function: f.name.clone(),
                                    source_line: f.lines[pc],
                                });
                            }
                            if *op == Opcode::Div {
                                a / b
                            } else {
                                a % b
                            }
                        }
                        Opcode::And => a & b,
                        Opcode::Or => a | b,
                        Opcode::Xor => a ^ b,
                        Opcode::Shl => {
                            if b >= 64 {
                                0
                            } else {
                                a << b
                            }
                        }
                        Opcode::Shr => {
                            if b >= 64 {
                                0
                            } else {
                                a >> b
                            }
                        }
                        _ => unreachable!(),
                    };
                    state.registers[*dst as usize] = result;
                    state.pc += 1;
                }
                LInstr::Ci { op, dst, a, b } => {
                    let co = coproc.as_deref_mut().ok_or(ExecError::MissingCoprocessor {
                        source_line: f.lines[pc],
                    })?;
                    let (a, b) = (val(*a, &state.registers), val(*b, &state.registers));
                    let (result, stall) =
                        co.execute(*op, a, b).map_err(|_| ExecError::DivisionByZero {
                            function: f.name.clone(),
                            source_line: f.lines[pc],
                        })?;
                    step_cost = stall;
                    state.registers[*dst as usize] = result;
                    state.pc += 1;
                }
                LInstr::Br { op, a, b, target } => {
                    let (a, b) = (val(*a, &state.registers), val(*b, &state.registers));
                    let taken = branch_taken(*op, a, b);
                    step_cost = if taken {
                        cost.branch_taken
                    } else {
                        cost.branch_not_taken
                    };
                    state.pc = if taken { *target as usize } else { pc + 1 };
                }
                LInstr::Jmp { target } => {
                    step_cost = cost.base_cost(Opcode::Jmp);
                    state.pc = *target as usize;
                }
                LInstr::Call { dst, func, args } => {
                    step_cost = cost.base_cost(Opcode::Call);
                    let callee = &self.funcs[*func as usize];
                    let mut callee_regs = vec![0u64; callee.n_regs];
                    for (i, a) in args.iter().enumerate() {
                        callee_regs[i] = val(*a, &state.registers);
                    }
                    let saved = std::mem::replace(&mut state.registers, callee_regs);
                    state.call_stack.push(Frame {
                        function: current,
                        return_pc: pc + 1,
                        dest: *dst,
                        saved_registers: saved,
                    });
                    current = *func as usize;
                    state.pc = 0;
                }
                LInstr::Ret { src } => {
                    step_cost = cost.base_cost(Opcode::Ret);
                    let value = val(*src, &state.registers);
                    match state.call_stack.pop() {
                        None => {
                            state.cycle_counter += step_cost;
                            observer(current, pc, step_cost);
                            return Ok(RunResult {
                                return_value: value,
                                total_cycles: state.cycle_counter,
                                instruction_count: executed,
                            });
                        }
                        Some(frame) => {
                            state.registers = frame.saved_registers;
                            state.registers[frame.dest as usize] = value;
                            state.pc = frame.return_pc;
                            current = frame.function;
                        }
                    }
                }
                LInstr::Halt => {
                    step_cost = cost.base_cost(Opcode::Halt);
                    state.cycle_counter += step_cost;
                    observer(current, pc, step_cost);
                    return Ok(RunResult {
                        return_value: 0,
                        total_cycles: state.cycle_counter,
                        instruction_count: executed,
                    });
                }
            }
            state.cycle_counter += step_cost;
            observer(current, pc, step_cost);
        }
    }
}

/// Convenience wrapper: validate, lower, and run `program` once.
pub fn execute(
    program: &Program,
    args: &[u64],
    cost: &CostModel,
    coproc: Option<&mut CoProcessor>,
) -> Result<RunResult, ExecError> {
    Executor::new(program)?.run(args, cost, coproc, &ExecOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{modexp_oracle, MODEXP_BL_SRC};
    use crate::coproc::DiversityConfig;
    use crate::ir::parse_program;

    fn modexp() -> Executor {
        Executor::new(&parse_program(MODEXP_BL_SRC).unwrap()).unwrap()
    }

    #[test]
    fn modexp_program_matches_pow_mod() {
        let r = modexp()
            .run(&[4, 5, 497], &CostModel::default(), None, &ExecOptions::default())
            .unwrap();
        assert_eq!(r.return_value, 30);
        assert_eq!(r.return_value, modexp_oracle(4, 5, 497).unwrap());
    }

    #[test]
    fn zero_exponent_returns_one() {
        let r = modexp()
            .run(&[5, 0, 7], &CostModel::default(), None, &ExecOptions::default())
            .unwrap();
        assert_eq!(r.return_value, 1);
    }

    #[test]
    fn repeated_runs_are_identical() {
        let ex = modexp();
        let run = || {
            let mut co = CoProcessor::new(DiversityConfig::new(4, 99).unwrap());
            ex.run(
                &[310, 0x9D2B, 467],
                &CostModel::default(),
                Some(&mut co),
                &ExecOptions::default(),
            )
            .unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn cost_of_follows_the_operand_width_model() {
        let on = CostModel::default();
        // bitlen(255) = 8 -> one byte -> 2 + 1
        assert_eq!(on.cost_of(Opcode::Mul, &[7, 255]), 3);
        // bitlen(65535) = 16 -> two bytes -> 2 + 2
        assert_eq!(on.cost_of(Opcode::Mul, &[7, 65535]), 4);
        assert_eq!(on.cost_of(Opcode::Mul, &[7, 0]), 2);
        assert_eq!(on.cost_of(Opcode::Rem, &[0xFFFF_FFFF, 3]), 8);
        assert_eq!(on.cost_of(Opcode::Div, &[0, 3]), 4);
        let off = CostModel::with_flags(false, false);
        assert_eq!(off.cost_of(Opcode::Mul, &[7, u64::MAX]), 3);
        assert_eq!(off.cost_of(Opcode::Rem, &[u64::MAX, 3]), 5);
    }

    #[test]
    fn branch_costs_depend_on_outcome() {
        let cost = CostModel::default();
        assert_eq!(cost.cost_of(Opcode::Beq, &[1, 1]), 3);
        assert_eq!(cost.cost_of(Opcode::Beq, &[1, 2]), 1);
        assert_eq!(cost.cost_of(Opcode::Blt, &[1, 2]), 3);
        assert_eq!(cost.cost_of(Opcode::Bge, &[1, 2]), 1);
    }

    #[test]
    fn cycles_are_the_sum_of_per_step_costs() {
        let ex = modexp();
        let mut steps = Vec::new();
        let r = ex
            .run_with_observer(
                &[310, 0x9249, 467],
                &CostModel::default(),
                None,
                &ExecOptions::default(),
                |_, _, c| steps.push(c),
            )
            .unwrap();
        assert_eq!(r.total_cycles, steps.iter().sum::<u64>());
        assert_eq!(r.instruction_count, steps.len() as u64);
        assert!(r.total_cycles >= r.instruction_count);
    }

    #[test]
    fn cost_model_never_changes_results() {
        let ex = modexp();
        let mut weird = CostModel::with_flags(false, true);
        weird.set_base_cost(Opcode::Mul, 17).unwrap();
        weird.branch_taken = 9;
        let opts = ExecOptions::default();
        for args in [[2u64, 10, 1000], [310, 0x9249, 467], [0, 0, 1]] {
            let a = ex.run(&args, &CostModel::default(), None, &opts).unwrap();
            let b = ex.run(&args, &weird, None, &opts).unwrap();
            assert_eq!(a.return_value, b.return_value);
        }
    }

    #[test]
    fn flags_off_cycles_depend_on_path_only() {
        let ex = modexp();
        let cost = CostModel::with_flags(false, false);
        let opts = ExecOptions::default();
        // Same exponent, different base: identical path, identical cycles.
        let a = ex.run(&[111, 0x9249, 467], &cost, None, &opts).unwrap();
        let b = ex.run(&[222, 0x9249, 467], &cost, None, &opts).unwrap();
        assert_eq!(a.total_cycles, b.total_cycles);
    }

    #[test]
    fn runaway_program_hits_step_budget() {
        let p = parse_program("func @spin() { Lx: jmp Lx }").unwrap();
        let err = Executor::new(&p)
            .unwrap()
            .run(&[], &CostModel::default(), None, &ExecOptions { step_budget: 1000 })
            .unwrap_err();
        assert_eq!(err, ExecError::StepBudgetExceeded { budget: 1000 });
    }

    #[test]
    fn division_by_zero_reports_location() {
        let p = parse_program("func @f(a) { div q, a, 0 ret q }").unwrap();
        let err = execute(&p, &[3], &CostModel::default(), None).unwrap_err();
        match err {
            ExecError::DivisionByZero { function, source_line } => {
                assert_eq!(function, "f");
                assert_eq!(source_line, 1);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn ci_without_coprocessor_is_an_error() {
        let p = parse_program("func @f(a) { ci.add b, a, 1 ret b }").unwrap();
        let err = execute(&p, &[3], &CostModel::default(), None).unwrap_err();
        assert!(matches!(err, ExecError::MissingCoprocessor { .. }));
    }

    #[test]
    fn wrong_arity_is_rejected() {
        let err = modexp()
            .run(&[1, 2], &CostModel::default(), None, &ExecOptions::default())
            .unwrap_err();
        assert_eq!(err, ExecError::WrongArity { expected: 3, got: 2 });
    }

    #[test]
    fn calls_pass_arguments_and_return_values() {
        let p = parse_program(
            "func @main(a) {
               call b, @double, a
               call c, @double, b
               ret c
             }
             func @double(x) { add y, x, x  ret y }",
        )
        .unwrap();
        let r = execute(&p, &[5], &CostModel::default(), None).unwrap();
        assert_eq!(r.return_value, 20);
    }

    #[test]
    fn callee_registers_do_not_clobber_caller() {
        let p = parse_program(
            "func @main(x) {
               li y, 41
               call z, @clobber, x
               add out, y, 1
               ret out
             }
             func @clobber(x) { li y, 999  ret y }",
        )
        .unwrap();
        let r = execute(&p, &[0], &CostModel::default(), None).unwrap();
        assert_eq!(r.return_value, 42);
    }

    #[test]
    fn halt_stops_with_zero() {
        let p = parse_program("func @f() { li a, 5 halt }").unwrap();
        let r = execute(&p, &[], &CostModel::default(), None).unwrap();
        assert_eq!(r.return_value, 0);
        assert_eq!(r.instruction_count, 2);
    }

    #[test]
    fn oversized_shifts_produce_zero() {
        let p = parse_program("func @f(a) { shl b, a, 64  shr c, a, 200  or d, b, c  ret d }")
            .unwrap();
        let r = execute(&p, &[u64::MAX], &CostModel::default(), None).unwrap();
        assert_eq!(r.return_value, 0);
    }

    #[test]
    fn ci_stall_is_the_only_cost_of_a_ci_instruction() {
        let p = parse_program("func @f(a) { ci.mul b, a, a  ret b }").unwrap();
        let ex = Executor::new(&p).unwrap();
        let mut co = CoProcessor::new(DiversityConfig::new(0, 1).unwrap());
        let r = ex
            .run(&[9], &CostModel::default(), Some(&mut co), &ExecOptions::default())
            .unwrap();
        // ci.mul costs exactly the drawn stall (1 at dl=0) plus ret (2).
        assert_eq!(r.total_cycles, 3);
        assert_eq!(r.return_value, 81);
    }
}
