//! Shipped benchmark programs and the independent oracles they are checked
//! against.
//!
//! `modexp` is square-and-multiply modular exponentiation over a fixed
//! 16-bit exponent; `mulmod16` is the IDEA cipher's multiplication modulo
//! 65537 with 0 encoding 65536. The baseline (`bl`) and windowed (`lr`)
//! programs are hand-written IR shipped under `benchmarks/`; the hardened
//! variants are produced by the transformation passes. Snapshots of every
//! variant live next to the hand-written sources for inspection, and a test
//! keeps them in sync with the passes.
//!
//! Oracles use independent arithmetic (u128 intermediates), never the
//! simulator, so program-vs-oracle comparisons are meaningful.

use crate::ir::{parse_program, Opcode, Program};
use crate::transforms::{cond_assign, cross_copy, diversify};
use std::collections::BTreeSet;
use std::sync::OnceLock;
use thiserror::Error;

pub const MODEXP_BL_SRC: &str = include_str!("../../../benchmarks/modexp_bl.ir");
pub const MODEXP_LR_SRC: &str = include_str!("../../../benchmarks/modexp_lr.ir");
pub const MULMOD16_BL_SRC: &str = include_str!("../../../benchmarks/mulmod16_bl.ir");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchmarkName {
    ModExp,
    MulMod16,
}

impl BenchmarkName {
    pub fn code(self) -> &'static str {
        match self {
            BenchmarkName::ModExp => "modexp",
            BenchmarkName::MulMod16 => "mulmod16",
        }
    }
}

impl std::fmt::Display for BenchmarkName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.code())
    }
}

impl std::str::FromStr for BenchmarkName {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        match s {
            "modexp" => Ok(BenchmarkName::ModExp),
            "mulmod16" => Ok(BenchmarkName::MulMod16),
            _ => Err(BenchError::UnknownBenchmark { name: s.to_string() }),
        }
    }
}

/// Program variants: baseline, cross-copied, conditional-assignment,
/// left-to-right windowed, and their diversified (`pr*`) forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Bl,
    Cc,
    Ca,
    Lr,
    PrBl,
    PrLr,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::Bl,
        Variant::Cc,
        Variant::Ca,
        Variant::Lr,
        Variant::PrBl,
        Variant::PrLr,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Variant::Bl => "bl",
            Variant::Cc => "cc",
            Variant::Ca => "ca",
            Variant::Lr => "lr",
            Variant::PrBl => "prbl",
            Variant::PrLr => "prlr",
        }
    }

    /// Whether the variant contains custom instructions.
    pub fn is_diversified(self) -> bool {
        matches!(self, Variant::PrBl | Variant::PrLr)
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.code())
    }
}

impl std::str::FromStr for Variant {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        Variant::ALL
            .into_iter()
            .find(|v| v.code() == s)
            .ok_or_else(|| BenchError::UnknownVariant { name: s.to_string() })
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BenchError {
    #[error("unknown benchmark `{name}`")]
    UnknownBenchmark { name: String },
    #[error("unknown variant `{name}`")]
    UnknownVariant { name: String },
    #[error("benchmark {benchmark} has no {variant} variant")]
    UnknownCombination {
        benchmark: BenchmarkName,
        variant: Variant,
    },
    #[error("modulus must be nonzero")]
    ZeroModulus,
    #[error("window width {w} out of range 1..=8")]
    InvalidWindow { w: u32 },
}

/// One runnable benchmark instance: the program, which argument is the
/// secret, and default public arguments.
#[derive(Debug, Clone)]
pub struct BenchmarkSpec {
    pub name: BenchmarkName,
    pub variant: Variant,
    pub program: Program,
    pub secret_param_index: usize,
    pub public_args: Vec<u64>,
}

impl BenchmarkSpec {
    /// Full argument vector with `key` spliced in at the secret position.
    pub fn args_with_key(&self, key: u64) -> Vec<u64> {
        self.args_with_key_over(&self.public_args, key)
    }

    /// Like [`BenchmarkSpec::args_with_key`] with explicit public arguments.
    pub fn args_with_key_over(&self, public_args: &[u64], key: u64) -> Vec<u64> {
        let mut args = Vec::with_capacity(public_args.len() + 1);
        args.extend_from_slice(&public_args[..self.secret_param_index]);
        args.push(key);
        args.extend_from_slice(&public_args[self.secret_param_index..]);
        args
    }
}

/// Which opcodes the diversification pass replaces by default.
pub fn default_ops_filter(name: BenchmarkName) -> BTreeSet<Opcode> {
    match name {
        BenchmarkName::ModExp => BTreeSet::from([Opcode::Mul, Opcode::Rem]),
        BenchmarkName::MulMod16 => {
            BTreeSet::from([Opcode::Mul, Opcode::Rem, Opcode::Add, Opcode::Sub])
        }
    }
}

/// Default distinguishing key pairs (documented Hamming weights).
///
/// modexp: 0x9249 (weight 6) vs 0x9D2B (weight 9). Both keys have all six
/// 3-bit exponent windows nonzero, so the windowed variant performs the same
/// number of table multiplies for either key and its residual leak stays in
/// the operand-dependent costs rather than the multiply count.
/// mulmod16: 0x0000 (weight 0, exercising the 0 -> 65536 encoding branch)
/// vs 0x002B (weight 4), which differ both in control flow and in the width
/// classes seen by the multiplier/divider model.
pub fn default_key_pair(name: BenchmarkName) -> (u64, u64) {
    match name {
        BenchmarkName::ModExp => (0x9249, 0x9D2B),
        BenchmarkName::MulMod16 => (0x0000, 0x002B),
    }
}

fn modexp_bl_base() -> &'static Program {
    static P: OnceLock<Program> = OnceLock::new();
    P.get_or_init(|| parse_program(MODEXP_BL_SRC).expect("shipped modexp_bl.ir parses"))
}

fn modexp_lr_base() -> &'static Program {
    static P: OnceLock<Program> = OnceLock::new();
    P.get_or_init(|| parse_program(MODEXP_LR_SRC).expect("shipped modexp_lr.ir parses"))
}

fn mulmod16_bl_base() -> &'static Program {
    static P: OnceLock<Program> = OnceLock::new();
    P.get_or_init(|| parse_program(MULMOD16_BL_SRC).expect("shipped mulmod16_bl.ir parses"))
}

/// Fetch a benchmark variant, deriving transformed variants from the
/// hand-written sources with the default ops filter.
pub fn get_benchmark(name: BenchmarkName, variant: Variant) -> Result<BenchmarkSpec, BenchError> {
    get_benchmark_with_filter(name, variant, None)
}

/// [`get_benchmark`] with an explicit diversification filter for the `pr*`
/// variants (ignored otherwise).
pub fn get_benchmark_with_filter(
    name: BenchmarkName,
    variant: Variant,
    ops_filter: Option<&BTreeSet<Opcode>>,
) -> Result<BenchmarkSpec, BenchError> {
    let filter = ops_filter
        .cloned()
        .unwrap_or_else(|| default_ops_filter(name));
    let unknown = || BenchError::UnknownCombination {
        benchmark: name,
        variant,
    };
    let program = match (name, variant) {
        (BenchmarkName::ModExp, Variant::Bl) => modexp_bl_base().clone(),
        (BenchmarkName::ModExp, Variant::Lr) => modexp_lr_base().clone(),
        (BenchmarkName::ModExp, Variant::Cc) => cross_copy(modexp_bl_base()).0,
        (BenchmarkName::ModExp, Variant::Ca) => cond_assign(modexp_bl_base()).0,
        (BenchmarkName::ModExp, Variant::PrBl) => {
            diversify(modexp_bl_base(), &filter).expect("validated filter").0
        }
        (BenchmarkName::ModExp, Variant::PrLr) => {
            diversify(modexp_lr_base(), &filter).expect("validated filter").0
        }
        (BenchmarkName::MulMod16, Variant::Bl) => mulmod16_bl_base().clone(),
        (BenchmarkName::MulMod16, Variant::Cc) => cross_copy(mulmod16_bl_base()).0,
        (BenchmarkName::MulMod16, Variant::Ca) => cond_assign(mulmod16_bl_base()).0,
        (BenchmarkName::MulMod16, Variant::PrBl) => {
            diversify(mulmod16_bl_base(), &filter).expect("validated filter").0
        }
        (BenchmarkName::MulMod16, Variant::Lr | Variant::PrLr) => return Err(unknown()),
    };
    // modexp uses a 9-bit modulus so reduction dividends sit near a byte
    // boundary of the operand-dependent divider model; the hardened variants
    // then still leak through operand widths, which is the effect the
    // distinguishing experiments measure.
    let public_args = match name {
        BenchmarkName::ModExp => vec![310, 467],
        BenchmarkName::MulMod16 => vec![48879],
    };
    Ok(BenchmarkSpec {
        name,
        variant,
        program,
        secret_param_index: 1,
        public_args,
    })
}

/// `y^k mod n` by square-and-multiply; the reference for every modexp
/// variant. Intermediates use 128-bit arithmetic, so any u64 inputs are
/// exact.
pub fn modexp_oracle(y: u64, k: u64, n: u64) -> Result<u64, BenchError> {
    if n == 0 {
        return Err(BenchError::ZeroModulus);
    }
    let m = n as u128;
    let mut base = (y as u128) % m;
    let mut result: u128 = 1 % m;
    let mut exp = k;
    while exp > 0 {
        if exp & 1 == 1 {
            result = result * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    Ok(result as u64)
}

/// Left-to-right fixed-window exponentiation with a precomputed table of odd
/// powers `y^1, y^3, ..., y^(2^w - 1) mod n`. The exponent is scanned in
/// windows of `w` bits (padded at the top); a window `v = u << t` with `u`
/// odd is applied by squaring `w - t` times, multiplying by the table entry
/// for `u`, then squaring `t` more times. Always equals [`modexp_oracle`].
pub fn lr_window_modexp_oracle(y: u64, k: u64, n: u64, w: u32) -> Result<u64, BenchError> {
    if n == 0 {
        return Err(BenchError::ZeroModulus);
    }
    if !(1..=8).contains(&w) {
        return Err(BenchError::InvalidWindow { w });
    }
    let m = n as u128;
    let y1 = (y as u128) % m;
    let y2 = y1 * y1 % m;
    let mut table = Vec::with_capacity(1 << (w - 1));
    table.push(y1);
    for i in 1..(1usize << (w - 1)) {
        let prev = table[i - 1];
        table.push(prev * y2 % m);
    }
    let bits = 64 - k.leading_zeros();
    let mut pos = bits.div_ceil(w) * w;
    let mut r: u128 = 1 % m;
    while pos > 0 {
        pos -= w;
        let v = (k >> pos) & ((1u64 << w) - 1);
        if v == 0 {
            for _ in 0..w {
                r = r * r % m;
            }
        } else {
            let t = v.trailing_zeros();
            let u = v >> t;
            for _ in 0..(w - t) {
                r = r * r % m;
            }
            r = r * table[((u - 1) / 2) as usize] % m;
            for _ in 0..t {
                r = r * r % m;
            }
        }
    }
    Ok(r as u64)
}

/// IDEA multiplication modulo 65537 where an operand or result of 65536 is
/// encoded as 0. Operands must be 16-bit.
pub fn mulmod16_oracle(a: u64, b: u64) -> u64 {
    assert!(a <= 0xFFFF && b <= 0xFFFF, "mulmod16 operands are 16-bit");
    let aa = if a == 0 { 65536 } else { a };
    let bb = if b == 0 { 65536 } else { b };
    let r = aa * bb % 65537;
    if r == 65536 {
        0
    } else {
        r
    }
}
