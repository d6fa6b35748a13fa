use clap::{Args, Parser, Subcommand, ValueEnum};
use smooth_wasserstein::experiments::{self, BoundConfig, ExperimentConfig, MsweErrorConfig};
use smooth_wasserstein::mswe::{ObjectiveConfig, OptConfig, ParamFamily};
use smooth_wasserstein::ot::{augmented_pair, wasserstein_discrete, NoiseCoupling, OtConfig, OtMethod};
use smooth_wasserstein::twosample::{self, TestConfig, TestMode};
use smooth_wasserstein::{
    d2_squared, kernel, DistributionSpec, EmpiricalMeasure, Error, EstimatorKind, KernelParams, Result, SeedSpec,
};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "smoothw", version, about = "Gaussian-smoothed Wasserstein distances and friends")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the smooth Sobolev kernel at one pair of points.
    KernelEval {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        y: Vec<f64>,
        #[arg(long)]
        sigma: f64,
    },
    /// (Smooth) Wasserstein distance between two CSV measures.
    Distance(DistanceArgs),
    /// Kernel distance d2 between two CSV measures, printed as JSON.
    Mmd {
        #[arg(long)]
        input_a: PathBuf,
        #[arg(long)]
        input_b: PathBuf,
        #[arg(long)]
        sigma: f64,
        /// Drop the diagonal terms.
        #[arg(long)]
        u_statistic: bool,
    },
    /// Closed-form upper bound on the expected one-sample GW_2, as CSV (n, bound).
    Bound {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        sigma: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, default_value_t = 1_000_000)]
        mc: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Bootstrap two-sample test, printed as JSON.
    TwoSample {
        #[arg(long)]
        input_a: PathBuf,
        #[arg(long)]
        input_b: PathBuf,
        #[command(flatten)]
        test: TestArgs,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Omit the bootstrap replicates from the output.
        #[arg(long)]
        brief: bool,
    },
    /// Empirical rejection rate against the level, as CSV (alpha, rejection_rate).
    LevelCurve {
        #[arg(long)]
        spec: PathBuf,
        /// Second distribution; defaults to `--spec` (false-alarm curve).
        #[arg(long)]
        spec_b: Option<PathBuf>,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        test: TestArgs,
        #[arg(long, value_delimiter = ',', default_value = "0.02,0.05,0.1,0.15,0.2,0.25,0.3")]
        alphas: Vec<f64>,
        #[arg(long, default_value_t = 100)]
        repetitions: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimum smooth Wasserstein error experiment: CSV scatter table, SVG and manifest.
    Mswe {
        /// Data distribution; must belong to the family unless `--theta` is given.
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_enum)]
        family: Family,
        /// Reference parameter for the errors; defaults to the spec's own parameter.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        theta: Option<Vec<f64>>,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long)]
        sigma: f64,
        #[arg(long, default_value_t = 16)]
        k: usize,
        #[arg(long, value_delimiter = ',', default_value = "64,256,1024")]
        n_grid: Vec<usize>,
        #[arg(long, default_value_t = 40)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "mswe_out")]
        out: PathBuf,
    },
    /// Config-driven experiments.
    Experiment {
        #[command(subcommand)]
        action: ExperimentAction,
    },
}

#[derive(Subcommand)]
enum ExperimentAction {
    /// Run a JSON experiment config and write CSV, SVG and manifest.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct DistanceArgs {
    #[arg(long)]
    input_a: PathBuf,
    #[arg(long)]
    input_b: PathBuf,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long, value_enum, default_value_t = Method::ExactLp)]
    method: Method,
    /// Entropic regularization for sinkhorn; defaults to 0.01 x median cost.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, default_value_t = 16)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the transport plan as CSV (i, j, mass).
    #[arg(long)]
    plan: Option<PathBuf>,
}

#[derive(Args)]
struct TestArgs {
    #[arg(long)]
    p: f64,
    #[arg(long)]
    sigma: f64,
    #[arg(long = "B", default_value_t = 500)]
    replicates: usize,
    #[arg(long, default_value_t = 16)]
    k: usize,
    #[arg(long, value_enum, default_value_t = Mode::SmoothWasserstein)]
    mode: Mode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl TestArgs {
    fn config(&self, alpha: f64) -> TestConfig {
        let mut cfg = TestConfig::new(self.p, self.sigma);
        cfg.alpha = alpha;
        cfg.replicates = self.replicates;
        cfg.k = self.k;
        cfg.mode = match self.mode {
            Mode::SmoothWasserstein => TestMode::SmoothWasserstein,
            Mode::Mmd => TestMode::Mmd,
        };
        cfg
    }
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum Method {
    ExactLp,
    Sinkhorn,
    Quantile1d,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum Mode {
    SmoothWasserstein,
    Mmd,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum Family {
    TwoModeMeans,
    GaussianMeanScale,
}

fn read_spec(path: &Path) -> Result<DistributionSpec> {
    let spec: DistributionSpec = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    spec.validate()?;
    Ok(spec)
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn distance(args: DistanceArgs) -> Result<()> {
    let a = EmpiricalMeasure::read_csv_path(&args.input_a)?;
    let b = EmpiricalMeasure::read_csv_path(&args.input_b)?;
    let method = match args.method {
        Method::ExactLp => OtMethod::ExactLp,
        Method::Sinkhorn => OtMethod::sinkhorn(args.epsilon),
        Method::Quantile1d => OtMethod::Quantile1d,
    };
    let cfg = OtConfig::new(args.p, method);
    let (a, b) = if args.sigma > 0.0 {
        augmented_pair(&a, &b, args.sigma, args.k, SeedSpec::from(args.seed), NoiseCoupling::Independent)?
    } else if args.sigma == 0.0 {
        (a, b)
    } else {
        return Err(Error::InvalidInput(format!("sigma must be >= 0, got {}", args.sigma)));
    };
    match args.plan {
        Some(path) => {
            let plan = wasserstein_discrete(&a, &b, &cfg)?;
            plan.write_csv(std::io::BufWriter::new(std::fs::File::create(path)?))?;
            println!("{}", plan.distance());
        }
        None => println!("{}", smooth_wasserstein::ot::distance(&a, &b, &cfg)?),
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::KernelEval { x, y, sigma } => {
            println!("{}", kernel(&x, &y, KernelParams::new(sigma)?)?);
        }
        Command::Distance(args) => distance(args)?,
        Command::Mmd {
            input_a,
            input_b,
            sigma,
            u_statistic,
        } => {
            let a = EmpiricalMeasure::read_csv_path(input_a)?;
            let b = EmpiricalMeasure::read_csv_path(input_b)?;
            let kind = if u_statistic {
                EstimatorKind::UStatistic
            } else {
                EstimatorKind::VStatistic
            };
            print_json(&d2_squared(&a, &b, KernelParams::new(sigma)?, kind)?)?;
        }
        Command::Bound {
            spec,
            sigma,
            mut n,
            mc,
            seed,
        } => {
            n.sort_unstable();
            n.dedup();
            let cfg = BoundConfig {
                spec: read_spec(&spec)?,
                sigmas: vec![sigma],
                n_grid: n,
                mc,
            };
            let table = experiments::bound_curve(&cfg, SeedSpec::from(seed))?;
            let mut out = std::io::stdout().lock();
            writeln!(out, "n,bound")?;
            for r in &table.rows {
                writeln!(out, "{},{}", r.n, r.mean_value)?;
            }
        }
        Command::TwoSample {
            input_a,
            input_b,
            test,
            alpha,
            brief,
        } => {
            let a = EmpiricalMeasure::read_csv_path(input_a)?;
            let b = EmpiricalMeasure::read_csv_path(input_b)?;
            let mut res = twosample::test(&a, &b, &test.config(alpha), SeedSpec::from(test.seed))?;
            if brief {
                res.bootstrap_values.clear();
            }
            print_json(&res)?;
        }
        Command::LevelCurve {
            spec,
            spec_b,
            m,
            n,
            test,
            alphas,
            repetitions,
            out,
        } => {
            let a = read_spec(&spec)?;
            let b = match spec_b {
                Some(p) => read_spec(&p)?,
                None => a.clone(),
            };
            let cfg = test.config(0.05);
            let pts = twosample::rejection_curve(&a, &b, m, n, &cfg, &alphas, repetitions, SeedSpec::from(test.seed))?;
            let mut text = String::from("alpha,rejection_rate\n");
            for p in &pts {
                text.push_str(&format!("{},{}\n", p.alpha, p.rejection_rate));
            }
            match out {
                Some(path) => std::fs::write(path, text)?,
                None => print!("{text}"),
            }
        }
        Command::Mswe {
            spec,
            family,
            theta,
            p,
            sigma,
            k,
            n_grid,
            trials,
            seed,
            out,
        } => {
            let family = match family {
                Family::TwoModeMeans => ParamFamily::TwoModeMeans,
                Family::GaussianMeanScale => ParamFamily::GaussianMeanScale,
            };
            let data = read_spec(&spec)?;
            let true_theta = match theta {
                Some(t) => t,
                None => family.theta_of(&data)?,
            };
            let mut objective = ObjectiveConfig::new(p, sigma);
            objective.k = k;
            let cfg = ExperimentConfig {
                seed,
                out_dir: None,
                experiment: experiments::Experiment::MsweError(MsweErrorConfig {
                    family,
                    true_theta,
                    data: Some(data),
                    objective,
                    opt: OptConfig::default(),
                    n_grid,
                    trials,
                }),
            };
            let manifest = experiments::run(&cfg, Some(&out))?;
            eprintln!("wrote {} files to {}", manifest.outputs.len(), out.display());
        }
        Command::Experiment {
            action: ExperimentAction::Run { config, out },
        } => {
            let cfg = ExperimentConfig::from_path(config)?;
            let manifest = experiments::run(&cfg, out.as_deref())?;
            for f in &manifest.failures {
                eprintln!("cell failure: {f}");
            }
            print_json(&manifest)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
