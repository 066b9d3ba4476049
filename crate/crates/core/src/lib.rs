//! Timing side-channel workbench for a small register machine.
//!
//! The crate simulates security-critical programs on a deterministic,
//! cycle-accurate register machine paired with a co-processor that executes
//! custom `ci.*` instructions with pseudo-randomly drawn latencies. Program
//! transformations (cross-copying, conditional assignment, custom-instruction
//! diversification) rewrite the critical functions of a program, and the
//! leakage estimator quantifies the resulting timing channel as Shannon
//! capacity via the Blahut-Arimoto algorithm.
//!
//! Modules:
//! - [`ir`]: textual three-address IR, parser, printer, validation
//! - [`exec`]: cost model and cycle-accurate executor
//! - [`coproc`]: diversifying co-processor and its PRNG
//! - [`transforms`]: IR-to-IR passes over `critical` functions
//! - [`benchmarks`]: shipped benchmark programs and independent oracles
//! - [`leakage`]: empirical channel construction and capacity estimation
//! - [`harness`]: distinguishing experiments, sweeps, and reports

pub mod benchmarks;
pub mod coproc;
pub mod exec;
pub mod harness;
pub mod ir;
pub mod leakage;
pub mod transforms;

pub use benchmarks::{
    get_benchmark, lr_window_modexp_oracle, modexp_oracle, mulmod16_oracle, BenchmarkName,
    BenchmarkSpec, Variant,
};
pub use coproc::{ci_latency, exec_ci, prng_next, CoProcessor, DiversityConfig, PrngState};
pub use exec::{execute, CostModel, ExecError, ExecOptions, Executor, RunResult};
pub use harness::{
    apply_noise, compare_solutions, derive_seed, run_experiment, sweep_dl, CompareReport,
    ExperimentConfig, ExperimentReport, NoiseModel, SweepReport,
};
pub use ir::{parse_program, Diagnostic, Function, Instruction, Opcode, Operand, Program};
pub use leakage::{
    ba_capacity, build_channel, capacity_reduction, CapacityResult, ChannelMatrix, LeakageError,
    TimingSamples,
};
pub use transforms::{
    cond_assign, cross_copy, detect_triangles, diversify, PassReport, TransformError,
    TriangleRegion,
};
