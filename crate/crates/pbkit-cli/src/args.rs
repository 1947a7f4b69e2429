use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug, Clone)]
#[command(name = "pbkit", version, about = "Poisson binomial toolkit")]
pub struct Cli {
    /// Arithmetic for pmf, cdf, mode and distance computations.
    #[arg(long, env = "PBKIT_MODE", value_enum, default_value = "float", global = true)]
    pub mode: Mode,

    /// Write a reproducibility manifest for this run.
    #[arg(long, global = true, value_name = "PATH")]
    pub manifest: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Float,
    Rational,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Float => "float",
            Mode::Rational => "rational",
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Probability mass function.
    Pmf {
        #[arg(long)]
        probs: String,
        #[arg(long, default_value = "convolution")]
        method: String,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Cumulative distribution function, at `k` or on the whole support.
    Cdf {
        #[arg(long)]
        probs: String,
        #[arg(long)]
        k: Option<usize>,
        /// Any pmf method, or `fourier` for the direct characteristic-function inversion.
        #[arg(long, default_value = "convolution")]
        method: String,
    },
    /// Darroch's mode rule, checked against the pmf argmax.
    Mode {
        #[arg(long)]
        probs: String,
    },
    /// Approximation bounds.
    Approx {
        #[command(subcommand)]
        cmd: ApproxCmd,
    },
    /// Worst-case tail and largest gamma for a matched-pairs sensitivity analysis.
    Sensitivity {
        /// CSV of `treated,control` outcome pairs, or inline `1,0;1,1;...`.
        #[arg(long)]
        pairs: String,
        #[arg(long, allow_negative_numbers = true)]
        t: i64,
        #[arg(long)]
        alpha: f64,
        /// Evaluate the worst-case tail at this gamma instead of searching.
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// Stochastic orderings.
    Order {
        #[command(subcommand)]
        cmd: OrderCmd,
    },
    /// Polynomial real-rootedness and stability checks.
    Poly {
        #[command(subcommand)]
        cmd: PolyCmd,
    },
    /// Distances between two distributions.
    Dist {
        #[command(subcommand)]
        cmd: DistCmd,
    },
    /// W-infinity accuracy search for strongly Rayleigh approximation.
    #[command(args_conflicts_with_subcommands = true)]
    Acc {
        #[command(subcommand)]
        cmd: Option<AccCmd>,
        #[command(flatten)]
        search: AccSearch,
    },
    /// Proper learner from samples.
    #[command(args_conflicts_with_subcommands = true)]
    Learn {
        #[command(subcommand)]
        cmd: Option<LearnCmd>,
        #[command(flatten)]
        fit: LearnFit,
    },
    /// Golden reproductions and randomized bound checks; nonzero exit on any failure.
    #[command(name = "paper-check")]
    GoldenSuite {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 150)]
        instances: usize,
    },
    /// Re-run a manifest and compare output digests.
    Replay {
        manifest: PathBuf,
    },
}

#[derive(Subcommand, Debug, Clone)]
pub enum ApproxCmd {
    Report {
        #[arg(long)]
        probs: String,
        #[arg(long, value_enum)]
        family: Family,
    },
    ChoiXia {
        #[arg(long)]
        probs: String,
        #[arg(long, default_value_t = 1)]
        m_lo: u64,
        #[arg(long, default_value_t = 200)]
        m_hi: u64,
    },
    /// Binomial-type tail bound for `P(X >= t)`.
    Tail {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        t: f64,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Poisson,
    Tp,
    Normal,
    Binomial,
}

#[derive(Subcommand, Debug, Clone)]
pub enum OrderCmd {
    Compare {
        #[arg(long)]
        p: String,
        /// Second distribution; a single probability for `bsc`; unused by `hoeffding`.
        #[arg(long)]
        q: Option<String>,
        #[arg(long, value_enum)]
        test: OrderTest,
    },
    /// Whether `x` majorizes `y`.
    Majorize {
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
    /// Binomial/Poisson CDF sign patterns.
    SignPattern {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrderTest {
    Hoeffding,
    Gleser,
    Dominance,
    Bsc,
}

#[derive(Subcommand, Debug, Clone)]
pub enum PolyCmd {
    Check {
        /// Coefficient file or inline `1/8,3/4,1/8`; `bin:`/`pb:` literals give their PGF.
        #[arg(long = "in")]
        input: String,
        #[arg(long, value_enum)]
        test: PolyTest,
        #[arg(long)]
        stride: Option<usize>,
        #[arg(long, default_value_t = 6)]
        window: usize,
    },
    /// Recover Bernoulli parameters from a PGF.
    Recover {
        #[arg(long = "in")]
        input: String,
        #[arg(long)]
        len: Option<usize>,
    },
    /// PGF of `floor(j X / k)` with root diagnostics.
    Floor {
        #[arg(long)]
        probs: String,
        #[arg(long, default_value_t = 2)]
        j: u64,
        #[arg(long, default_value_t = 3)]
        k: u64,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolyTest {
    Real,
    Newton,
    Kurtz,
    Hurwitz,
    Interlace,
    Toeplitz,
    Roots,
}

#[derive(Args, Debug, Clone)]
pub struct DistArgs {
    /// Distribution JSON, PB parameters, or a `bin:`/`pb:` literal.
    #[arg(long)]
    pub a: String,
    #[arg(long)]
    pub b: Option<String>,
    #[arg(long)]
    pub scale_a: Option<String>,
    #[arg(long)]
    pub scale_b: Option<String>,
}

#[derive(Subcommand, Debug, Clone)]
pub enum DistCmd {
    Tv(DistArgs),
    /// Kolmogorov distance to `b`, or to the moment-matched normal when `b` is absent.
    Kolmogorov(DistArgs),
    Wp {
        #[command(flatten)]
        d: DistArgs,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
    },
    Winf(DistArgs),
}

#[derive(Args, Debug, Clone)]
pub struct AccSearch {
    /// Source PB law, e.g. `bin:9:1/2`.
    #[arg(long)]
    pub source: Option<String>,
    #[arg(long, default_value = "2/3")]
    pub scale: String,
    #[arg(long)]
    pub max_degree: Option<usize>,
    /// Seed for the continuous search stages.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Subcommand, Debug, Clone)]
pub enum AccCmd {
    /// Acc(2X/3) for X ~ Bin(n, 1/2), n = 1..6, against the published values.
    #[command(name = "appendix")]
    Table {
        #[arg(long)]
        seed: Option<u64>,
    },
    Fixtures,
    /// Re-check a certificate.
    Verify {
        #[arg(long)]
        cert: PathBuf,
    },
}

#[derive(Args, Debug, Clone)]
pub struct LearnFit {
    /// Sample CSV, one integer per line.
    #[arg(long)]
    pub samples: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
}

#[derive(Subcommand, Debug, Clone)]
pub enum LearnCmd {
    Sample {
        #[arg(long)]
        probs: String,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    Eval {
        #[arg(long)]
        truth: String,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Whether the learner tells apart `Bin(n, 1/2 - eps/sqrt(n))` and `Bin(n, 1/2 + eps/sqrt(n))`.
    Separation {
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
}
