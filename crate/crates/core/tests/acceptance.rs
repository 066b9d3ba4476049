//! Acceptance suite: one test per shipped claim, each printing a PASS line
//! with the measured numbers (visible with `--nocapture`; failures panic
//! with the same detail).
//!
//! Thresholds are fixed here, not tuned at runtime. Sample counts per
//! criterion: the distinguishing experiments use 1000 samples per key; the
//! diversification-level trend uses larger counts (40k / 20k per key)
//! because the raw empirical-channel estimate is biased upward when the
//! support outgrows the sample count, and the trend assertion needs that
//! bias held below its inversion allowance.

use divsim_core::exec::ExecOptions;
use divsim_core::harness::CostFlags;
use divsim_core::*;
use std::time::Instant;

const SEEDS: [u64; 3] = [1, 2, 3];

fn config(benchmark: BenchmarkName, variant: Variant) -> ExperimentConfig {
    ExperimentConfig::new(benchmark, variant)
}

fn capacity(mut config: ExperimentConfig, dl: u32, seed: u64) -> f64 {
    config.dl = dl;
    config.master_seed = seed;
    run_experiment(&config).unwrap().capacity_bits
}

fn mean_capacity_over_seeds(config: &ExperimentConfig, dl: u32) -> f64 {
    let total: f64 = SEEDS.iter().map(|&s| capacity(config.clone(), dl, s)).sum();
    total / SEEDS.len() as f64
}

#[test]
fn criterion_1_functional_equivalence() {
    let start = Instant::now();
    let combos = [
        (BenchmarkName::ModExp, Variant::Bl),
        (BenchmarkName::ModExp, Variant::Cc),
        (BenchmarkName::ModExp, Variant::Ca),
        (BenchmarkName::ModExp, Variant::Lr),
        (BenchmarkName::ModExp, Variant::PrBl),
        (BenchmarkName::ModExp, Variant::PrLr),
        (BenchmarkName::MulMod16, Variant::Bl),
        (BenchmarkName::MulMod16, Variant::Cc),
        (BenchmarkName::MulMod16, Variant::Ca),
        (BenchmarkName::MulMod16, Variant::PrBl),
    ];
    let mut total_checked = 0u64;
    for (name, variant) in combos {
        let spec = get_benchmark(name, variant).unwrap();
        let executor = Executor::new(&spec.program).unwrap();
        let mut rng = PrngState::from_seed(0xACC0 ^ variant as u64 ^ ((name as u64) << 8));
        for i in 0..1000u32 {
            let (public, key, want) = match name {
                BenchmarkName::ModExp => {
                    let y = rng.next() % 65536;
                    let k = rng.next() % 65536;
                    let n = 1 + rng.next() % 65535;
                    (vec![y, n], k, modexp_oracle(y, k, n).unwrap())
                }
                BenchmarkName::MulMod16 => {
                    let a = rng.next() % 65536;
                    let b = rng.next() % 65536;
                    (vec![a], b, mulmod16_oracle(a, b))
                }
            };
            let mut coproc =
                CoProcessor::new(DiversityConfig::new(i % 9, rng.next()).unwrap());
            let got = executor
                .run(
                    &spec.args_with_key_over(&public, key),
                    &CostModel::default(),
                    Some(&mut coproc),
                    &ExecOptions::default(),
                )
                .unwrap()
                .return_value;
            assert_eq!(got, want, "{name} {variant} mismatch on {public:?} key {key}");
            total_checked += 1;
        }
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs() < 30,
        "equivalence sweep took {elapsed:?}, budget is 30 s"
    );
    println!(
        "criterion 1 (functional equivalence): PASS — {total_checked} runs across 10 variants, \
         zero mismatches, {elapsed:?}"
    );
}

#[test]
fn criterion_2_blahut_arimoto_correctness() {
    let matrix = |rows: Vec<Vec<f64>>| ChannelMatrix {
        inputs: (0..rows.len()).map(|i| format!("in{i}")).collect(),
        outputs: (0..rows[0].len() as u64).collect(),
        rows,
    };
    // Independent oracle for two-input channels: ternary search over the
    // concave mutual information in the one-parameter prior.
    let grid_capacity = |w: &ChannelMatrix| {
        let mi = |p0: f64| {
            let p = [p0, 1.0 - p0];
            let mut total = 0.0;
            for j in 0..w.outputs.len() {
                let qj = p[0] * w.rows[0][j] + p[1] * w.rows[1][j];
                for i in 0..2 {
                    let wij = w.rows[i][j];
                    if wij > 0.0 && qj > 0.0 {
                        total += p[i] * wij * (wij / qj).log2();
                    }
                }
            }
            total
        };
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let a = lo + (hi - lo) / 3.0;
            let b = hi - (hi - lo) / 3.0;
            if mi(a) < mi(b) {
                lo = a;
            } else {
                hi = b;
            }
        }
        mi(0.5 * (lo + hi))
    };

    let identity = ba_capacity(&matrix(vec![vec![1.0, 0.0], vec![0.0, 1.0]]), 1e-9, 100_000)
        .unwrap()
        .capacity_bits;
    assert!((identity - 1.0).abs() <= 1e-9, "identity channel: {identity}");

    let flat = ba_capacity(&matrix(vec![vec![0.4, 0.6], vec![0.4, 0.6]]), 1e-9, 100_000)
        .unwrap()
        .capacity_bits;
    assert!(flat <= 1e-9, "identical rows: {flat}");

    for p in [0.05, 0.1, 0.25] {
        let c = ba_capacity(&matrix(vec![vec![1.0 - p, p], vec![p, 1.0 - p]]), 1e-9, 100_000)
            .unwrap()
            .capacity_bits;
        let want = 1.0 - (-p * p.log2() - (1.0 - p) * (1.0 - p).log2());
        assert!((c - want).abs() <= 1e-6, "BSC({p}): {c} vs {want}");
    }

    let mut rng = PrngState::from_seed(0xBA2);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let mut rows = Vec::new();
        for _ in 0..2 {
            let mut row: Vec<f64> = (0..16).map(|_| (rng.next() % 997 + 1) as f64).collect();
            let total: f64 = row.iter().sum();
            row.iter_mut().for_each(|x| *x /= total);
            rows.push(row);
        }
        let w = matrix(rows);
        let ba = ba_capacity(&w, 1e-9, 100_000).unwrap();
        assert!(ba.converged, "BA failed to converge within 100000 iterations");
        let diff = (ba.capacity_bits - grid_capacity(&w)).abs();
        worst = worst.max(diff);
        assert!(diff <= 1e-6, "random channel off by {diff}");
    }
    println!(
        "criterion 2 (Blahut-Arimoto correctness): PASS — identity/flat/BSC exact, \
         1000 random 2x16 channels within 1e-6 of grid search (worst {worst:.2e})"
    );
}

#[test]
fn criterion_3_baseline_leak_reproduction() {
    let mut results = Vec::new();
    for (name, variant) in [
        (BenchmarkName::ModExp, Variant::Bl),
        (BenchmarkName::ModExp, Variant::Cc),
        (BenchmarkName::ModExp, Variant::Ca),
        (BenchmarkName::MulMod16, Variant::Bl),
    ] {
        let c = capacity(config(name, variant), 0, SEEDS[0]);
        results.push((name, variant, c));
    }
    for &(name, variant, c) in &results {
        assert!(
            c >= 0.9,
            "{name} {variant} baseline capacity {c:.4} < 0.9 bits"
        );
    }
    println!(
        "criterion 3 (baseline leak): PASS — {}",
        results
            .iter()
            .map(|(n, v, c)| format!("{n}/{v} {c:.3}"))
            .collect::<Vec<_>>()
            .join(", ")
    );
}

#[test]
fn criterion_4_countermeasure_failure_mode() {
    // Operand-dependent costs on: the equal-path countermeasures still leak
    // through the multiplier/divider widths.
    let mut leaking = Vec::new();
    for name in [BenchmarkName::ModExp, BenchmarkName::MulMod16] {
        for variant in [Variant::Ca, Variant::Cc] {
            let c = capacity(config(name, variant), 0, SEEDS[0]);
            leaking.push((name, variant, c));
        }
    }
    for &(name, variant, c) in &leaking {
        assert!(
            c >= 0.3,
            "{name} {variant} with operand-dependent costs: {c:.4} < 0.3 bits"
        );
    }
    // Operand-dependent costs off: cross-copying fully equalizes the paths.
    let mut equalized = Vec::new();
    for name in [BenchmarkName::ModExp, BenchmarkName::MulMod16] {
        let mut cc = config(name, Variant::Cc);
        cc.cost_flags = CostFlags {
            mul_operand_dependent: false,
            div_operand_dependent: false,
        };
        let c = capacity(cc, 0, SEEDS[0]);
        equalized.push((name, c));
    }
    for &(name, c) in &equalized {
        assert!(c <= 0.02, "{name} cc with constant costs: {c:.4} > 0.02 bits");
    }
    println!(
        "criterion 4 (countermeasure failure mode): PASS — flags on: {}; flags off: {}",
        leaking
            .iter()
            .map(|(n, v, c)| format!("{n}/{v} {c:.3}"))
            .collect::<Vec<_>>()
            .join(", "),
        equalized
            .iter()
            .map(|(n, c)| format!("{n}/cc {c:.4}"))
            .collect::<Vec<_>>()
            .join(", ")
    );
}

#[test]
fn criterion_5_diversification_effectiveness() {
    let prlr = mean_capacity_over_seeds(&config(BenchmarkName::ModExp, Variant::PrLr), 5);
    let prbl = mean_capacity_over_seeds(&config(BenchmarkName::MulMod16, Variant::PrBl), 5);
    let modexp_bl = capacity(config(BenchmarkName::ModExp, Variant::Bl), 0, SEEDS[0]);
    let mulmod_bl = capacity(config(BenchmarkName::MulMod16, Variant::Bl), 0, SEEDS[0]);
    let red_modexp = capacity_reduction(modexp_bl, prlr).unwrap();
    let red_mulmod = capacity_reduction(mulmod_bl, prbl).unwrap();
    assert!(prlr <= 0.25, "modexp prlr dl=5: {prlr:.4} > 0.25 bits");
    assert!(prbl <= 0.20, "mulmod16 prbl dl=5: {prbl:.4} > 0.20 bits");
    assert!(red_modexp >= 75.0, "modexp reduction {red_modexp:.1}% < 75%");
    assert!(red_mulmod >= 75.0, "mulmod16 reduction {red_mulmod:.1}% < 75%");
    println!(
        "criterion 5 (diversification effectiveness): PASS — modexp prlr {prlr:.3} bits \
         (-{red_modexp:.1}%), mulmod16 prbl {prbl:.3} bits (-{red_mulmod:.1}%), dl=5, 3 seeds"
    );
}

#[test]
fn criterion_6_tradeoff_trends() {
    // (config, samples per key): trend sample counts are larger than the
    // experiments' 1000 so the plug-in estimator bias at high levels stays
    // below the allowed inversion size.
    let sweeps = [
        (BenchmarkName::ModExp, Variant::PrLr, 40_000u32),
        (BenchmarkName::MulMod16, Variant::PrBl, 20_000),
    ];
    let dls: Vec<u32> = (0..=7).collect();
    let mut summaries = Vec::new();
    for (name, variant, samples) in sweeps {
        let mut caps = vec![0.0f64; dls.len()];
        let mut times = vec![0.0f64; dls.len()];
        for &seed in &SEEDS {
            let mut c = config(name, variant);
            c.samples_per_key = samples;
            c.master_seed = seed;
            let sweep = sweep_dl(&c, &dls).unwrap();
            for (i, row) in sweep.rows.iter().enumerate() {
                caps[i] += row.capacity_bits.expect("sweep row failed") / SEEDS.len() as f64;
                times[i] += row.mean_cycles / SEEDS.len() as f64;
            }
        }
        let inversions: Vec<(usize, f64)> = (0..caps.len() - 1)
            .filter(|&i| caps[i + 1] > caps[i])
            .map(|i| (i, caps[i + 1] - caps[i]))
            .collect();
        assert!(
            inversions.len() <= 1 && inversions.iter().all(|&(_, d)| d <= 0.02),
            "{name} {variant}: capacity not non-increasing: caps {caps:?}, inversions {inversions:?}"
        );
        for i in 1..times.len() - 1 {
            assert!(
                times[i + 1] > times[i],
                "{name} {variant}: mean time not strictly increasing at dl {} -> {}: {times:?}",
                dls[i],
                dls[i + 1]
            );
        }
        summaries.push(format!(
            "{name}/{variant} caps [{}]",
            caps.iter()
                .map(|c| format!("{c:.3}"))
                .collect::<Vec<_>>()
                .join(", ")
        ));
    }
    println!(
        "criterion 6 (trade-off trends): PASS — {} over dl 0..=7, 3 seeds",
        summaries.join("; ")
    );
}

#[test]
fn criterion_7_overhead_ordering() {
    let mut template = config(BenchmarkName::ModExp, Variant::Bl);
    template.dl = 5;
    let report = compare_solutions(
        &template,
        &[Variant::Bl, Variant::Cc, Variant::Ca, Variant::Lr, Variant::PrLr],
    )
    .unwrap();
    assert_eq!(report.rows.len(), 5);
    let overhead = |v: Variant| {
        report
            .rows
            .iter()
            .find(|r| r.variant == v)
            .unwrap()
            .overhead_percent
    };
    assert!(overhead(Variant::Bl).abs() < 1e-9, "bl must be its own baseline");
    // Sanity on the mulmod16 side: the equalizing countermeasures always
    // cost cycles.
    let mut mm = config(BenchmarkName::MulMod16, Variant::Bl);
    mm.dl = 5;
    let mm_report = compare_solutions(&mm, &[Variant::Bl, Variant::Cc, Variant::Ca]).unwrap();
    for row in &mm_report.rows {
        if row.variant != Variant::Bl {
            assert!(row.overhead_percent > 0.0, "{} overhead not positive", row.variant);
        }
    }
    let (pr, ca, cc) = (
        overhead(Variant::PrLr),
        overhead(Variant::Ca),
        overhead(Variant::Cc),
    );
    println!(
        "criterion 7 (overhead ordering): measured overheads vs bl — prlr(dl=5) {pr:.1}%, \
         ca {ca:.1}%, cc {cc:.1}%, lr {:.1}% (absolute figures are cost-model artifacts; \
         reported, not asserted)",
        overhead(Variant::Lr)
    );
    assert!(
        pr < ca && pr < cc,
        "prlr(dl=5) overhead {pr:.1}% is not below ca {ca:.1}% and cc {cc:.1}%: \
         with the fixed cost table the drawn 1..=32 cycle stalls replace 3-8 cycle \
         multiply/remainder ops on every one of the ~58 diversified instructions, which \
         alone exceeds the whole cost of the branch-equalizing transforms"
    );
    println!("criterion 7 (overhead ordering): PASS");
}

#[test]
fn criterion_8_determinism() {
    let mut c = config(BenchmarkName::ModExp, Variant::PrLr);
    c.dl = 3;
    c.samples_per_key = 200;
    let a = run_experiment(&c).unwrap().to_json();
    let b = run_experiment(&c).unwrap().to_json();
    assert_eq!(a, b, "experiment reports differ between runs");

    let sweep_a = sweep_dl(&c, &[0, 1, 2, 3]).unwrap().to_json();
    let sweep_b = sweep_dl(&c, &[0, 1, 2, 3]).unwrap().to_json();
    assert_eq!(sweep_a, sweep_b, "sweep reports differ between runs");

    // Same config under different parallelism degrees.
    let serial_pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let wide_pool = rayon::ThreadPoolBuilder::new().num_threads(8).build().unwrap();
    let serial = serial_pool.install(|| run_experiment(&c).unwrap().to_json());
    let parallel = wide_pool.install(|| run_experiment(&c).unwrap().to_json());
    assert_eq!(serial, parallel, "reports depend on the thread count");
    assert_eq!(serial, a, "pooled run differs from default-pool run");
    println!(
        "criterion 8 (determinism): PASS — experiment and sweep reports byte-identical \
         across reruns and across 1 vs 8 worker threads"
    );
}

#[test]
fn criterion_9_os_noise_robustness() {
    let os = NoiseModel::Os { mean_jitter: 5 };
    let with_noise = |mut c: ExperimentConfig, dl: u32| {
        c.noise = os;
        mean_capacity_over_seeds(&c, dl)
    };
    let prlr = with_noise(config(BenchmarkName::ModExp, Variant::PrLr), 5);
    let prbl = with_noise(config(BenchmarkName::MulMod16, Variant::PrBl), 5);
    let mut bl_modexp_cfg = config(BenchmarkName::ModExp, Variant::Bl);
    bl_modexp_cfg.noise = os;
    let bl_modexp = capacity(bl_modexp_cfg, 0, SEEDS[0]);
    let mut bl_mulmod_cfg = config(BenchmarkName::MulMod16, Variant::Bl);
    bl_mulmod_cfg.noise = os;
    let bl_mulmod = capacity(bl_mulmod_cfg, 0, SEEDS[0]);
    println!(
        "criterion 9 (os-noise robustness): measured — prlr {prlr:.3} (need <= 0.25), \
         prbl {prbl:.3} (need <= 0.20), modexp bl {bl_modexp:.3} (need >= 0.8), \
         mulmod16 bl {bl_mulmod:.3} (need >= 0.8)"
    );
    assert!(prlr <= 0.25, "modexp prlr under os:5 noise: {prlr:.4} > 0.25");
    assert!(prbl <= 0.20, "mulmod16 prbl under os:5 noise: {prbl:.4} > 0.20");
    assert!(
        bl_modexp >= 0.8,
        "modexp bl under os:5 noise: {bl_modexp:.4} < 0.8"
    );
    assert!(
        bl_mulmod >= 0.8,
        "mulmod16 bl under os:5 noise: {bl_mulmod:.4} < 0.8: the baseline kernel's \
         deterministic timing gap is a few cycles, and geometric jitter with mean 5 \
         overlaps the two distributions almost entirely (the exact two-spike channel \
         has capacity ~0.26 bits at gap 2)"
    );
    println!("criterion 9 (os-noise robustness): PASS");
}
