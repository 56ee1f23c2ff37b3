use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "entangle",
    version,
    about = "Decide, certify and quantify entanglement of small quantum states",
    after_help = "Exit codes: 0 success / separable / detected, 1 entangled / not detected / target missed, \
                  2 undecided or inconclusive, 3 distillation cannot improve, 4 witness requested for a PPT state, \
                  64 usage error or malformed input."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a named or random state to a state file.
    Gen(GenArgs),
    /// Run the PPT, reduction and majorization criteria and print a verdict.
    Analyze {
        input: PathBuf,
    },
    /// Iterate the two-pair recurrence protocol.
    Distill(DistillArgs),
    /// Build, evaluate and optimize entanglement witnesses.
    #[command(subcommand)]
    Witness(WitnessCommand),
    /// Estimate an entanglement measure.
    Measure(MeasureArgs),
    /// Search for a Schmidt-rank-2 certificate of n-copy distillability.
    Distillable(DistillableArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Bell,
    Werner,
    Isotropic,
    Ghz,
    W,
    NoisyW,
    Symasym,
    Maxent,
    Basis,
    Random,
    RandomPure,
    Separable,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    pub family: Family,
    /// Mixing weight of the entangled component (werner, isotropic, noisy-w).
    #[arg(long)]
    pub p: Option<f64>,
    /// Local dimension (isotropic, maxent).
    #[arg(long)]
    pub d: Option<usize>,
    /// Symmetric weight of the symmetric/antisymmetric family.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Local dimension of the symmetric/antisymmetric family.
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// Which Bell state: phi+, phi-, psi+ or psi-.
    #[arg(long, default_value = "phi+")]
    pub which: String,
    /// Subsystem dimensions, e.g. 3,3 (random, random-pure, separable, basis).
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    /// Rank of a random density matrix; full rank when omitted.
    #[arg(long)]
    pub rank: Option<usize>,
    /// Number of product terms in a random separable state.
    #[arg(long)]
    pub terms: Option<usize>,
    /// Computational basis index (basis).
    #[arg(long)]
    pub index: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; the state is printed to stdout when omitted.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DistillArgs {
    /// Two-qubit state file.
    #[arg(required_unless_present = "fidelity", conflicts_with = "fidelity")]
    pub input: Option<PathBuf>,
    /// Start from the isotropic pair with this fidelity.
    #[arg(long)]
    pub fidelity: Option<f64>,
    #[arg(long, default_value_t = 0.99)]
    pub target: f64,
    #[arg(long, default_value_t = 50)]
    pub max_steps: usize,
    /// Do not re-twirl to the isotropic form between rounds.
    #[arg(long)]
    pub no_twirl: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NamedWitness {
    Ghz,
    W,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MapArg {
    Transpose,
    Reduction,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Required for every command that samples random starting points.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Run restarts one after another instead of on the thread pool.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Subcommand)]
pub enum WitnessCommand {
    /// Witness from the most negative eigenvector of the partial transpose.
    Build {
        input: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// tr(W rho); exits 0 when the witness detects the state.
    Eval {
        witness: PathBuf,
        state: PathBuf,
    },
    /// Shift the witness until it touches the product states.
    Optimize {
        witness: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// GHZ and W class evidence for a three-qubit state.
    Classify3 {
        input: PathBuf,
    },
    /// Write the GHZ-class or W-class three-qubit witness.
    Named {
        which: NamedWitness,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Witness obtained from a positive map through the Jamiolkowski isomorphism.
    Jamiolkowski {
        map: MapArg,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeasureKindArg {
    Entropy,
    Formation,
    Relent,
    Bounds,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub kind: MeasureKindArg,
    /// Ensemble size for formation, mixture size for relent.
    #[arg(long)]
    pub size: Option<usize>,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Args)]
pub struct DistillableArgs {
    pub input: PathBuf,
    /// Number of copies, 1 or 2.
    #[arg(long, default_value_t = 1)]
    pub copies: usize,
    #[command(flatten)]
    pub search: SearchArgs,
}
