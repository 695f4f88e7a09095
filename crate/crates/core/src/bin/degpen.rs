use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use degpen::dynamics::{simulate_cp, CpOptions};
use degpen::experiments::{fit_scaling, oracle_suite, run_experiment, ExperimentConfig, PenaltyKind, PmfSpec};
use degpen::graph_core::{build_configuration_model, sample_degree_sequence, OddSum};
use degpen::renorm::{survival_estimate, write_survival_csv, ConeConfig, Dependence};
use degpen::rng::substream;
use degpen::structure::{jl_fixed_point, k_core_mask, surplus_count};

#[derive(Parser)]
#[command(name = "degpen", version, about = "Degree-penalized contact process experiments")]
struct Cli {
    /// Master seed.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Output file, or directory for `sweep`. Defaults to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Product,
    Max,
}

impl From<Kind> for PenaltyKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Product => PenaltyKind::Product,
            Kind::Max => PenaltyKind::Max,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// One contact process run on a configuration model, all vertices infected.
    Simulate {
        #[arg(long)]
        n: usize,
        /// Degree law, e.g. `power_law:tau=2.5` or `binomial:n=10,p=0.35`.
        #[arg(long, default_value = "power_law:tau=2.5")]
        pmf: String,
        #[arg(long, value_enum, default_value = "product")]
        penalty: Kind,
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        lambda: f64,
        /// Defaults to 1000 ln n.
        #[arg(long)]
        horizon: Option<f64>,
    },
    /// Run a TOML experiment config into the `--out` directory.
    ///
    /// Writes results.csv (one row per grid point and replica), summary.json and
    /// resumable checkpoints under points/. Every row starts with
    /// point,rep,seed,penalty followed by the grid keys in sorted order, then:
    ///
    ///   phase_sweep, extinction_scaling: t_ext,censored,edges,max_degree
    ///   core_survival:                   core_size,t_ext,censored
    ///   star_survival:                   t_ext,censored
    ///   attack_distribution:             v_le_m,q_m,sup_diff
    ///   op_percolation:                  survives,height,size
    ///   oracle_suite:                    point,rep,seed,module,oracle,passed,value,bound
    #[command(verbatim_doc_comment)]
    Sweep { config: PathBuf },
    /// k-core density of a configuration model against the fixed-point prediction.
    Kcore {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "binomial:n=10,p=0.35")]
        pmf: String,
        #[arg(long, default_value_t = 3)]
        k: usize,
    },
    /// Surplus edges of radius-r balls around random roots of a configuration model.
    Explore {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "power_law:tau=3.5")]
        pmf: String,
        #[arg(long)]
        radius: usize,
        #[arg(long, default_value_t = 100)]
        roots: usize,
    },
    /// Run the built-in self-checks; exits nonzero if any fails.
    Oracle,
    /// Oriented percolation survival on the cone. CSV: delta,depth,survival,ci_lo,ci_hi
    Opperc {
        #[arg(long, num_args = 1.., required = true)]
        delta: Vec<f64>,
        #[arg(long, default_value_t = 200)]
        depth: usize,
        #[arg(long, default_value_t = 10_000)]
        reps: usize,
        /// Use independent out-edges instead of one shared uniform per site.
        #[arg(long)]
        independent: bool,
    },
    /// Classify the growth of T in n from a CSV with columns n,T.
    Fit { input: PathBuf },
}

fn sink(out: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit_json<T: Serialize>(value: &T, out: Option<&Path>) -> anyhow::Result<()> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global()?;
    }
    let out = cli.out.as_deref();
    let mut rng = substream(cli.seed, &[]);
    match cli.cmd {
        Cmd::Simulate { n, pmf, penalty, mu, lambda, horizon } => {
            let pmf = PmfSpec::parse(&pmf)?.build(n, None)?;
            let p = PenaltyKind::from(penalty).spec(mu, lambda)?;
            let (g, _) =
                build_configuration_model(&sample_degree_sequence(&pmf, n, &mut rng), OddSum::AutoFix, &mut rng)?;
            let xi0: Vec<usize> = (0..n).collect();
            let h = horizon.unwrap_or(1e3 * (n.max(2) as f64).ln());
            let mut report = simulate_cp(&g, &p, &xi0, &CpOptions::with_horizon(h), &mut rng)?.report;
            report.local_ext.clear();
            emit_json(&report, out)?;
        }
        Cmd::Sweep { config } => {
            let cfg = ExperimentConfig::from_path(&config)?;
            let res = run_experiment(&cfg, out)?;
            eprintln!("wrote {} and {}", res.results_csv.display(), res.summary_json.display());
            if res.summary.all_passed == Some(false) {
                return Ok(ExitCode::FAILURE);
            }
        }
        Cmd::Kcore { n, pmf, k } => {
            let pmf = PmfSpec::parse(&pmf)?.build(n, None)?;
            let fp = jl_fixed_point(&pmf, k, 4000)?;
            let (g, _) =
                build_configuration_model(&sample_degree_sequence(&pmf, n, &mut rng), OddSum::AutoFix, &mut rng)?;
            let core = k_core_mask(&g, k).iter().filter(|&&b| b).count();
            #[derive(Serialize)]
            struct Out {
                n: usize,
                k: usize,
                p_hat: f64,
                predicted_density: f64,
                core_size: usize,
                density: f64,
            }
            emit_json(
                &Out {
                    n,
                    k,
                    p_hat: fp.p_hat,
                    predicted_density: fp.vertex_density,
                    core_size: core,
                    density: core as f64 / n as f64,
                },
                out,
            )?;
        }
        Cmd::Explore { n, pmf, radius, roots } => {
            use rand::Rng;
            let pmf = PmfSpec::parse(&pmf)?.build(n, None)?;
            let (g, _) =
                build_configuration_model(&sample_degree_sequence(&pmf, n, &mut rng), OddSum::AutoFix, &mut rng)?;
            let mut w = csv::Writer::from_writer(sink(out)?);
            w.write_record(["root", "radius", "ball_size", "surplus"])?;
            for _ in 0..roots {
                let v = rng.random_range(0..n);
                let s = surplus_count(&g, v, radius)?;
                w.write_record([
                    v.to_string(),
                    radius.to_string(),
                    g.ball(v, radius).len().to_string(),
                    s.to_string(),
                ])?;
            }
            w.flush()?;
        }
        Cmd::Oracle => {
            let res = oracle_suite(cli.seed);
            let mut w = sink(out)?;
            for o in &res {
                let tag = if o.passed { "PASS" } else { "FAIL" };
                writeln!(w, "{tag} {}::{} value={} bound={} {}", o.module, o.name, o.value, o.bound, o.detail)?;
            }
            if res.iter().any(|o| !o.passed) {
                return Ok(ExitCode::FAILURE);
            }
        }
        Cmd::Opperc { delta, depth, reps, independent } => {
            let mode = if independent { Dependence::Independent } else { Dependence::SharedSource };
            let rows = delta
                .iter()
                .map(|&d| survival_estimate(&ConeConfig::new(d, depth)?.with_mode(mode), reps, cli.seed))
                .collect::<degpen::Result<Vec<_>>>()?;
            write_survival_csv(&rows, sink(out)?)?;
        }
        Cmd::Fit { input } => {
            let mut rd = csv::Reader::from_path(&input).with_context(|| format!("reading {}", input.display()))?;
            let mut series = Vec::new();
            for rec in rd.records() {
                let rec = rec?;
                if rec.len() < 2 {
                    bail!("expected two columns n,T");
                }
                series.push((rec[0].trim().parse::<f64>()?, rec[1].trim().parse::<f64>()?));
            }
            emit_json(&fit_scaling(&series)?, out)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}
