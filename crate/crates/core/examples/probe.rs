//! Development probe: print per-variant cycle counts for the default keys.

use divsim_core::*;

fn main() {
    let cost_on = CostModel::default();
    let cost_off = CostModel::with_flags(false, false);
    let opts = exec::ExecOptions::default();

    println!("== modexp variants, keys 0x9249 / 0x9D2B ==");
    for variant in [Variant::Bl, Variant::Cc, Variant::Ca, Variant::Lr] {
        let spec = get_benchmark(BenchmarkName::ModExp, variant).unwrap();
        let ex = Executor::new(&spec.program).unwrap();
        for (label, cost) in [("on", &cost_on), ("off", &cost_off)] {
            let mut row = format!("{variant:>4} flags {label:>3}: ");
            for key in [0x9249u64, 0x9D2B] {
                let r = ex
                    .run(&spec.args_with_key(key), cost, None, &opts)
                    .unwrap();
                row.push_str(&format!(
                    "key {key:#06x}: {} cyc {} instr ret {}  ",
                    r.total_cycles, r.instruction_count, r.return_value
                ));
            }
            println!("{row}");
        }
    }

    println!("== Pr variants at dl=0 (each ci costs exactly 1) ==");
    for (name, variant, keys) in [
        (BenchmarkName::ModExp, Variant::PrBl, [0x9249u64, 0x9D2B]),
        (BenchmarkName::ModExp, Variant::PrLr, [0x9249, 0x9D2B]),
        (BenchmarkName::MulMod16, Variant::PrBl, [0x002B, 0x9D2B]),
    ] {
        let spec = get_benchmark(name, variant).unwrap();
        let ex = Executor::new(&spec.program).unwrap();
        for key in keys {
            let mut co = CoProcessor::new(DiversityConfig::new(0, 7).unwrap());
            let r = ex
                .run(&spec.args_with_key(key), &cost_on, Some(&mut co), &opts)
                .unwrap();
            // Count executed ci instructions: with a constant stall of 1 at
            // dl=0, rerunning with the base opcodes' costs forced to 1 and
            // flags off gives the non-ci cycle total plus ci_count.
            println!(
                "{name} {variant} key {key:#06x}: {} cyc {} instr ret {}",
                r.total_cycles, r.instruction_count, r.return_value
            );
        }
    }

    println!("== mulmod16 BL keys ==");
    let spec = get_benchmark(BenchmarkName::MulMod16, Variant::Bl).unwrap();
    let ex = Executor::new(&spec.program).unwrap();
    for key in [0x002Bu64, 0x9D2B, 0, 1, 0xFFFF] {
        let r = ex
            .run(&spec.args_with_key(key), &cost_on, None, &opts)
            .unwrap();
        println!(
            "key {key:#06x}: {} cyc ret {} (oracle {})",
            r.total_cycles,
            r.return_value,
            mulmod16_oracle(48879, key)
        );
    }

    println!("== experiment capacities (quick, n=300) ==");
    for (name, variant, dl) in [
        (BenchmarkName::ModExp, Variant::Bl, 0),
        (BenchmarkName::ModExp, Variant::Cc, 0),
        (BenchmarkName::ModExp, Variant::Ca, 0),
        (BenchmarkName::ModExp, Variant::Lr, 0),
        (BenchmarkName::ModExp, Variant::PrLr, 5),
        (BenchmarkName::MulMod16, Variant::Bl, 0),
        (BenchmarkName::MulMod16, Variant::Cc, 0),
        (BenchmarkName::MulMod16, Variant::Ca, 0),
        (BenchmarkName::MulMod16, Variant::PrBl, 5),
    ] {
        let mut config = ExperimentConfig::new(name, variant);
        config.dl = dl;
        config.samples_per_key = 300;
        let report = run_experiment(&config).unwrap();
        println!(
            "{name} {variant} dl={dl}: capacity {:.4} bits, means {:?}",
            report.capacity_bits,
            report
                .per_key
                .iter()
                .map(|k| k.mean_cycles)
                .collect::<Vec<_>>()
        );
    }
}
