//! `divsim` command line: run programs, apply transformation passes, and
//! drive distinguishing experiments, sweeps, comparisons, and capacity
//! estimation from samples.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use divsim_core::harness::{histogram_csv, samples_csv};
use divsim_core::*;
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Parser)]
#[command(
    name = "divsim",
    version,
    about = "Timing side-channel workbench: diversified co-processor simulation and channel capacity estimation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum PassName {
    Diversify,
    CrossCopy,
    CondAssign,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Benchmark name: modexp or mulmod16.
    #[arg(long)]
    benchmark: String,
    /// Variant: bl, cc, ca, lr, prbl, prlr.
    #[arg(long, default_value = "bl")]
    variant: String,
    /// Public arguments (comma separated); defaults to the benchmark's.
    #[arg(long, value_delimiter = ',')]
    public_args: Option<Vec<u64>>,
    /// The two secret keys, e.g. 0x9249,0x9D2B.
    #[arg(long, value_delimiter = ',', value_parser = parse_u64, num_args = 2)]
    keys: Option<Vec<u64>>,
    /// Samples per key.
    #[arg(long, default_value_t = 1000)]
    samples: u32,
    /// Diversification level (latencies drawn from 1..=2^dl).
    #[arg(long, default_value_t = 0)]
    dl: u32,
    /// Master seed; all per-trial seeds derive from it.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Noise model: `bare` or `os:<mean>`.
    #[arg(long, default_value = "bare")]
    noise: String,
    /// Disable the operand-dependent multiplier model.
    #[arg(long)]
    no_mul_dep: bool,
    /// Disable the operand-dependent divider model.
    #[arg(long)]
    no_div_dep: bool,
    /// Diversified opcodes for pr* variants (comma separated mnemonics).
    #[arg(long, value_delimiter = ',')]
    ops: Option<Vec<String>>,
    /// Worker threads for trials (0 = all cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

impl ExperimentArgs {
    fn to_config(&self) -> Result<ExperimentConfig> {
        let benchmark = BenchmarkName::from_str(&self.benchmark)?;
        let variant = Variant::from_str(&self.variant)?;
        let mut config = ExperimentConfig::new(benchmark, variant);
        config.public_args = self.public_args.clone();
        if let Some(keys) = &self.keys {
            config.key_pair = (keys[0], keys[1]);
        }
        config.samples_per_key = self.samples;
        config.dl = self.dl;
        config.master_seed = self.seed;
        config.noise = NoiseModel::parse(&self.noise)?;
        config.cost_flags.mul_operand_dependent = !self.no_mul_dep;
        config.cost_flags.div_operand_dependent = !self.no_div_dep;
        config.ops_filter = match &self.ops {
            None => None,
            Some(ops) => Some(parse_ops_filter(ops)?),
        };
        Ok(config)
    }

    fn install_thread_pool(&self) -> Result<()> {
        if self.threads > 0 {
            rayon::ThreadPoolBuilder::new()
                .num_threads(self.threads)
                .build_global()
                .context("thread pool already configured")?;
        }
        Ok(())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Execute a program once and print the run result.
    Run {
        /// IR file to execute; alternatively use --benchmark/--variant.
        #[arg(long, conflicts_with = "benchmark")]
        program: Option<PathBuf>,
        #[arg(long)]
        benchmark: Option<String>,
        #[arg(long, default_value = "bl")]
        variant: String,
        /// Program arguments (comma separated, decimal or 0x hex).
        #[arg(long, value_delimiter = ',', value_parser = parse_u64)]
        args: Vec<u64>,
        #[arg(long, default_value_t = 0)]
        dl: u32,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        no_mul_dep: bool,
        #[arg(long)]
        no_div_dep: bool,
        /// Instruction budget before aborting as non-terminating.
        #[arg(long, default_value_t = 10_000_000)]
        budget: u64,
    },
    /// Apply a transformation pass to an IR file.
    Transform {
        #[arg(long)]
        pass: PassName,
        /// Opcodes for the diversify pass (comma separated mnemonics).
        #[arg(long, value_delimiter = ',')]
        ops: Option<Vec<String>>,
        /// Input IR file.
        #[arg(long)]
        input: PathBuf,
        /// Output IR file (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Where to write the pass report JSON (stderr if omitted).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run a distinguishing experiment and emit its report.
    Experiment {
        #[command(flatten)]
        experiment: ExperimentArgs,
        /// Report path (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Also dump raw observations as a samples CSV.
        #[arg(long)]
        samples_out: Option<PathBuf>,
        /// Baseline report JSON to compute reduction/overhead against.
        #[arg(long)]
        baseline: Option<PathBuf>,
    },
    /// Run an experiment per diversification level.
    Sweep {
        #[command(flatten)]
        experiment: ExperimentArgs,
        /// Levels, e.g. 0,1,2,3 or 0..7.
        #[arg(long, default_value = "0..7")]
        dls: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Compare variants against the bl baseline under one configuration.
    Compare {
        #[command(flatten)]
        experiment: ExperimentArgs,
        /// Variants to compare (must include bl).
        #[arg(long, value_delimiter = ',', default_value = "bl,cc,ca,lr,prlr")]
        variants: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Estimate channel capacity from a samples CSV (label,cycles).
    Capacity {
        #[arg(long)]
        input: PathBuf,
        /// Convergence tolerance on the capacity bounds, in nats.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 100_000)]
        max_iter: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_u64(s: &str) -> Result<u64, String> {
    let s = s.trim();
    let parsed = if let Some(hex) = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        u64::from_str_radix(hex, 16)
    } else {
        s.parse()
    };
    parsed.map_err(|_| format!("bad number `{s}`"))
}

fn parse_ops_filter(ops: &[String]) -> Result<BTreeSet<Opcode>> {
    let mut filter = BTreeSet::new();
    for name in ops {
        let op = Opcode::from_mnemonic(name)
            .with_context(|| format!("unknown opcode `{name}` in --ops"))?;
        filter.insert(op);
    }
    Ok(filter)
}

fn parse_dls(spec: &str) -> Result<Vec<u32>> {
    if let Some((lo, hi)) = spec.split_once("..") {
        let lo: u32 = lo.trim().parse().context("bad dl range")?;
        let hi: u32 = hi.trim().parse().context("bad dl range")?;
        if hi < lo {
            bail!("empty dl range `{spec}`");
        }
        return Ok((lo..=hi).collect());
    }
    spec.split(',')
        .map(|part| part.trim().parse::<u32>().context("bad dl list"))
        .collect()
}

fn emit(path: &Option<PathBuf>, content: &str) -> Result<()> {
    match path {
        Some(path) => std::fs::write(path, content)
            .with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn read_ir(path: &Path) -> Result<Program> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_program(&text).map_err(|diags| anyhow::anyhow!("{}:\n{diags}", path.display()))
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run {
            program,
            benchmark,
            variant,
            args,
            dl,
            seed,
            no_mul_dep,
            no_div_dep,
            budget,
        } => {
            let prog = match (&program, &benchmark) {
                (Some(path), _) => read_ir(path)?,
                (None, Some(name)) => {
                    let spec = get_benchmark(
                        BenchmarkName::from_str(name)?,
                        Variant::from_str(&variant)?,
                    )?;
                    spec.program
                }
                (None, None) => bail!("pass either --program or --benchmark"),
            };
            let cost = CostModel::with_flags(!no_mul_dep, !no_div_dep);
            let executor = Executor::new(&prog)?;
            let needs_coproc = prog
                .functions
                .iter()
                .flat_map(|f| &f.body)
                .any(|i| i.opcode.is_ci());
            let mut coproc = needs_coproc
                .then(|| -> Result<CoProcessor> {
                    Ok(CoProcessor::new(DiversityConfig::new(dl, seed)?))
                })
                .transpose()?;
            let result = executor.run(
                &args,
                &cost,
                coproc.as_mut(),
                &exec::ExecOptions { step_budget: budget },
            )?;
            println!("{}", serde_json::to_string_pretty(&result)?);
        }
        Command::Transform {
            pass,
            ops,
            input,
            out,
            report,
        } => {
            let program = read_ir(&input)?;
            let (transformed, pass_report) = match pass {
                PassName::Diversify => {
                    let filter = match &ops {
                        Some(ops) => parse_ops_filter(ops)?,
                        None => bail!("diversify needs --ops, e.g. --ops mul,rem"),
                    };
                    diversify(&program, &filter)?
                }
                PassName::CrossCopy => cross_copy(&program),
                PassName::CondAssign => cond_assign(&program),
            };
            emit(&out, &transformed.to_text())?;
            let report_json = serde_json::to_string_pretty(&pass_report)?;
            match report {
                Some(path) => std::fs::write(path, report_json + "\n")?,
                None => eprintln!("{report_json}"),
            }
        }
        Command::Experiment {
            experiment,
            out,
            format,
            samples_out,
            baseline,
        } => {
            experiment.install_thread_pool()?;
            let config = experiment.to_config()?;
            let (mut report, samples) = harness::run_experiment_full(&config)?;
            if let Some(path) = baseline {
                let text = std::fs::read_to_string(&path)
                    .with_context(|| format!("reading {}", path.display()))?;
                let value: serde_json::Value = serde_json::from_str(&text)?;
                let capacity = value["capacity_bits"]
                    .as_f64()
                    .context("baseline report lacks capacity_bits")?;
                let mean = value["per_key"]
                    .as_array()
                    .map(|keys| {
                        let means: Vec<f64> = keys
                            .iter()
                            .filter_map(|k| k["mean_cycles"].as_f64())
                            .collect();
                        means.iter().sum::<f64>() / means.len() as f64
                    })
                    .context("baseline report lacks per_key means")?;
                report.set_baseline(capacity, mean);
            }
            if let Some(path) = samples_out {
                std::fs::write(&path, samples_csv(&samples))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            match format {
                Format::Json => emit(&out, &report.to_json())?,
                Format::Csv => emit(&out, &histogram_csv(&report))?,
            }
        }
        Command::Sweep {
            experiment,
            dls,
            out,
            format,
        } => {
            experiment.install_thread_pool()?;
            let config = experiment.to_config()?;
            let report = sweep_dl(&config, &parse_dls(&dls)?)?;
            match format {
                Format::Json => emit(&out, &report.to_json())?,
                Format::Csv => emit(&out, &report.to_csv())?,
            }
        }
        Command::Compare {
            experiment,
            variants,
            out,
            format,
        } => {
            experiment.install_thread_pool()?;
            let config = experiment.to_config()?;
            let variants = variants
                .iter()
                .map(|v| Variant::from_str(v).map_err(Into::into))
                .collect::<Result<Vec<_>>>()?;
            let report = compare_solutions(&config, &variants)?;
            match format {
                Format::Json => emit(&out, &report.to_json())?,
                Format::Csv => emit(&out, &report.to_csv())?,
            }
        }
        Command::Capacity {
            input,
            tol,
            max_iter,
            out,
        } => {
            let text = std::fs::read_to_string(&input)
                .with_context(|| format!("reading {}", input.display()))?;
            let samples = harness::parse_samples_csv(&text)?;
            let channel = build_channel(&samples)?;
            let result = ba_capacity(&channel, tol, max_iter)?;
            let mut json = serde_json::to_string_pretty(&result)?;
            json.push('\n');
            emit(&out, &json)?;
        }
    }
    Ok(())
}
