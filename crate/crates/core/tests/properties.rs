//! Property tests for the spec-level invariants that hold over whole input
//! domains rather than single examples.

use divsim_core::exec::ExecOptions;
use divsim_core::harness::derive_seed;
use divsim_core::*;
use proptest::prelude::*;
use std::collections::BTreeSet;

fn stochastic_row(len: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(1u32..1000, len).prop_map(|weights| {
        let total: f64 = weights.iter().map(|&w| w as f64).sum();
        weights.iter().map(|&w| w as f64 / total).collect()
    })
}

fn channel(k: usize, j: usize) -> impl Strategy<Value = ChannelMatrix> {
    proptest::collection::vec(stochastic_row(j), k).prop_map(move |rows| ChannelMatrix {
        inputs: (0..k).map(|i| format!("in{i}")).collect(),
        outputs: (0..j as u64).collect(),
        rows,
    })
}

proptest! {
    #[test]
    fn windowed_oracle_equals_square_and_multiply(
        y in any::<u64>(),
        k in any::<u64>(),
        n in 1u64..,
        w in 1u32..=8,
    ) {
        prop_assert_eq!(
            lr_window_modexp_oracle(y, k, n, w).unwrap(),
            modexp_oracle(y, k, n).unwrap()
        );
    }

    #[test]
    fn mulmod16_oracle_is_commutative_with_identity(a in 0u64..65536, b in 0u64..65536) {
        prop_assert_eq!(mulmod16_oracle(a, b), mulmod16_oracle(b, a));
        prop_assert_eq!(mulmod16_oracle(1, a), a);
    }

    #[test]
    fn capacity_stays_within_bounds(w in (2usize..=4).prop_flat_map(|k| channel(k, 6))) {
        let r = ba_capacity(&w, 1e-9, 100_000).unwrap();
        prop_assert!(r.capacity_bits >= -1e-12);
        prop_assert!(r.capacity_bits <= (w.rows.len() as f64).log2() + 1e-12);
    }

    #[test]
    fn capacity_is_permutation_invariant(
        w in channel(2, 8),
        permutation_seed in any::<u64>(),
    ) {
        let base = ba_capacity(&w, 1e-10, 100_000).unwrap().capacity_bits;
        let mut order: Vec<usize> = (0..8).collect();
        let mut rng = PrngState::from_seed(permutation_seed);
        for i in (1..order.len()).rev() {
            order.swap(i, (rng.next() % (i as u64 + 1)) as usize);
        }
        let permuted = ChannelMatrix {
            inputs: w.inputs.clone(),
            outputs: w.outputs.clone(),
            rows: w
                .rows
                .iter()
                .map(|row| order.iter().map(|&j| row[j]).collect())
                .collect(),
        };
        let shuffled = ba_capacity(&permuted, 1e-10, 100_000).unwrap().capacity_bits;
        prop_assert!((base - shuffled).abs() < 1e-9);
    }

    #[test]
    fn cost_model_choice_never_changes_results(
        y in 0u64..65536,
        k in 0u64..65536,
        n in 1u64..65536,
        mul_cost in 1u64..30,
        rem_cost in 1u64..30,
        taken in 1u64..10,
        mul_dep in any::<bool>(),
        div_dep in any::<bool>(),
    ) {
        let spec = get_benchmark(BenchmarkName::ModExp, Variant::Bl).unwrap();
        let executor = Executor::new(&spec.program).unwrap();
        let reference = executor
            .run(&[y, k, n], &CostModel::default(), None, &ExecOptions::default())
            .unwrap();
        let mut cost = CostModel::with_flags(mul_dep, div_dep);
        cost.set_base_cost(Opcode::Mul, mul_cost).unwrap();
        cost.set_base_cost(Opcode::Rem, rem_cost).unwrap();
        cost.branch_taken = taken;
        let tweaked = executor
            .run(&[y, k, n], &cost, None, &ExecOptions::default())
            .unwrap();
        prop_assert_eq!(reference.return_value, tweaked.return_value);
        prop_assert_eq!(reference.instruction_count, tweaked.instruction_count);
    }

    #[test]
    fn derived_seeds_are_never_zero(master in any::<u64>(), key in 0u32..2, trial in any::<u32>()) {
        prop_assert_ne!(derive_seed(master, key, trial), 0);
    }

    #[test]
    fn printed_programs_reparse_identically(filter_bits in 0u8..=255) {
        // Round-trip the shipped programs through print -> parse, under a
        // random diversification filter to vary the instruction mix.
        let all = [
            Opcode::Add, Opcode::Sub, Opcode::Mul, Opcode::Div,
            Opcode::Rem, Opcode::And, Opcode::Or, Opcode::Xor,
        ];
        let filter: BTreeSet<Opcode> = all
            .iter()
            .enumerate()
            .filter(|(i, _)| filter_bits & (1 << i) != 0)
            .map(|(_, &op)| op)
            .collect();
        for (name, variant) in [
            (BenchmarkName::ModExp, Variant::Bl),
            (BenchmarkName::ModExp, Variant::Lr),
            (BenchmarkName::MulMod16, Variant::Bl),
        ] {
            let base = get_benchmark(name, variant).unwrap().program;
            let (diversified, _) = diversify(&base, &filter).unwrap();
            for p in [base, diversified] {
                let reparsed = parse_program(&p.to_text()).unwrap();
                prop_assert_eq!(&reparsed, &p);
            }
        }
    }

    #[test]
    fn transformed_programs_compute_the_same_function(
        y in 0u64..512,
        k in 0u64..65536,
        n in 1u64..512,
    ) {
        let want = modexp_oracle(y, k, n).unwrap();
        for variant in [Variant::Cc, Variant::Ca] {
            let spec = get_benchmark(BenchmarkName::ModExp, variant).unwrap();
            let got = Executor::new(&spec.program)
                .unwrap()
                .run(&[y, k, n], &CostModel::default(), None, &ExecOptions::default())
                .unwrap()
                .return_value;
            prop_assert_eq!(got, want);
        }
    }
}
