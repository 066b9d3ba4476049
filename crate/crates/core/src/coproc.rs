//! Latency-diversifying co-processor.
//!
//! The co-processor executes `ci.*` instructions: each returns exactly the
//! result of the corresponding base-core operation, but only after a stall
//! whose length is drawn from the PRNG. The diversification level `dl`
//! bounds the draw: stalls are uniform over `1..=2^dl` cycles, so `dl = 0`
//! pins every custom instruction to a single cycle and disables
//! diversification. One functional unit plus the latency draw stands in for
//! the `2^dl` instruction variants it emulates.

use crate::ir::Opcode;
use thiserror::Error;

/// Replacement seed when a caller hands us 0, which the xorshift state must
/// never be. Arbitrary odd constant.
const ZERO_SEED_SUBSTITUTE: u64 = 0x9E37_79B9_7F4A_7C15;

const XORSHIFT_MULTIPLIER: u64 = 2685821657736338717;

/// xorshift64* state; never zero.
///
/// Update: `x ^= x >> 12; x ^= x << 25; x ^= x >> 27`, output
/// `x * 2685821657736338717 (mod 2^64)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrngState {
    state: u64,
}

impl PrngState {
    /// Build a state from a seed, substituting a fixed nonzero constant for
    /// a zero seed.
    pub fn from_seed(seed: u64) -> PrngState {
        PrngState {
            state: if seed == 0 { ZERO_SEED_SUBSTITUTE } else { seed },
        }
    }

    pub fn state(&self) -> u64 {
        self.state
    }

    pub fn next(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(XORSHIFT_MULTIPLIER)
    }
}

/// Pure-function form of the PRNG step: returns the drawn value and the
/// advanced state.
pub fn prng_next(s: PrngState) -> (u64, PrngState) {
    let mut s = s;
    let v = s.next();
    (v, s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct DiversityConfig {
    /// Diversification level; latencies are uniform over `1..=2^dl`.
    pub dl: u32,
    pub seed: u64,
}

pub const MAX_DIVERSITY_LEVEL: u32 = 16;

impl DiversityConfig {
    pub fn new(dl: u32, seed: u64) -> Result<DiversityConfig, CoprocError> {
        if dl > MAX_DIVERSITY_LEVEL {
            return Err(CoprocError::InvalidLevel { dl });
        }
        Ok(DiversityConfig { dl, seed })
    }

    /// Number of emulated instruction variants, `n = 2^dl`.
    pub fn n(&self) -> u64 {
        1u64 << self.dl
    }
}

/// Draw the stall for one custom instruction: uniform over `1..=2^dl`.
/// Advances the PRNG even at `dl = 0`, where the result is always 1.
pub fn ci_latency(config: &DiversityConfig, prng: PrngState) -> (u64, PrngState) {
    let (value, next) = prng_next(prng);
    let cycles = 1 + (value & (config.n() - 1));
    (cycles, next)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CoprocError {
    #[error("diversification level {dl} out of range 0..={MAX_DIVERSITY_LEVEL}")]
    InvalidLevel { dl: u32 },
    #[error("co-processor has no funct for {op}")]
    UnknownFunct { op: Opcode },
    #[error("division by zero on the co-processor")]
    DivisionByZero,
}

/// The `ci.*` opcodes the funct table implements.
pub const CI_OPS: [Opcode; 8] = [
    Opcode::CiAdd,
    Opcode::CiSub,
    Opcode::CiMul,
    Opcode::CiDiv,
    Opcode::CiRem,
    Opcode::CiAnd,
    Opcode::CiOr,
    Opcode::CiXor,
];

/// Diversifying ALU: a funct table of base-ISA operations plus the latency
/// PRNG. All state for one execution lives here, so distinct trials own
/// distinct co-processors and may run concurrently.
#[derive(Debug, Clone)]
pub struct CoProcessor {
    pub config: DiversityConfig,
    pub prng: PrngState,
}

impl CoProcessor {
    pub fn new(config: DiversityConfig) -> CoProcessor {
        CoProcessor {
            config,
            prng: PrngState::from_seed(config.seed),
        }
    }

    /// Execute one custom instruction: the result is exactly the base ISA
    /// semantics of the operation; the stall is the drawn latency.
    pub fn execute(&mut self, op: Opcode, a: u64, b: u64) -> Result<(u64, u64), CoprocError> {
        let result = match op {
            Opcode::CiAdd => a.wrapping_add(b),
            Opcode::CiSub => a.wrapping_sub(b),
            Opcode::CiMul => a.wrapping_mul(b),
            Opcode::CiDiv => {
                if b == 0 {
                    return Err(CoprocError::DivisionByZero);
                }
                a / b
            }
            Opcode::CiRem => {
                if b == 0 {
                    return Err(CoprocError::DivisionByZero);
                }
                a % b
            }
            Opcode::CiAnd => a & b,
            Opcode::CiOr => a | b,
            Opcode::CiXor => a ^ b,
            other => return Err(CoprocError::UnknownFunct { op: other }),
        };
        let (stall, next) = ci_latency(&self.config, self.prng);
        self.prng = next;
        Ok((result, stall))
    }
}

/// Pure-function form of [`CoProcessor::execute`]: returns the result, the
/// stall, and the advanced co-processor.
pub fn exec_ci(
    op: Opcode,
    a: u64,
    b: u64,
    co: CoProcessor,
) -> Result<(u64, u64, CoProcessor), CoprocError> {
    let mut co = co;
    let (result, stall) = co.execute(op, a, b)?;
    Ok((result, stall, co))
}
