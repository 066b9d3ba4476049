//! Regenerate the derived benchmark variant snapshots under `benchmarks/`.
//!
//! The cc/ca/pr* files are the pass outputs for the hand-written baseline
//! sources; a test keeps them in sync, so rerun this after changing a pass
//! or a baseline program:
//!
//! ```text
//! cargo run -p divsim-core --example gen_benchmarks
//! ```

use divsim_core::*;
use std::path::Path;

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../benchmarks");
    let combos = [
        (BenchmarkName::ModExp, Variant::Cc, "modexp_cc.ir"),
        (BenchmarkName::ModExp, Variant::Ca, "modexp_ca.ir"),
        (BenchmarkName::ModExp, Variant::PrBl, "modexp_prbl.ir"),
        (BenchmarkName::ModExp, Variant::PrLr, "modexp_prlr.ir"),
        (BenchmarkName::MulMod16, Variant::Cc, "mulmod16_cc.ir"),
        (BenchmarkName::MulMod16, Variant::Ca, "mulmod16_ca.ir"),
        (BenchmarkName::MulMod16, Variant::PrBl, "mulmod16_prbl.ir"),
    ];
    for (name, variant, file) in combos {
        let spec = get_benchmark(name, variant).expect("known combination");
        let header = format!(
            "# Generated from {}_bl.ir{} by `divsim transform`; do not edit.\n",
            name,
            if variant == Variant::PrLr { " via modexp_lr.ir" } else { "" },
        );
        let header = if variant == Variant::PrLr {
            "# Generated from modexp_lr.ir by `divsim transform`; do not edit.\n".to_string()
        } else {
            header
        };
        let path = dir.join(file);
        std::fs::write(&path, header + &spec.program.to_text()).expect("write snapshot");
        println!("wrote {}", path.display());
    }
}
