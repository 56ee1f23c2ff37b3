use std::path::{Path, PathBuf};

use entangle_core::distill::{self, Distillability, Twirl};
use entangle_core::io::{Payload, StateFile};
use entangle_core::measures::{self, MeasureEstimate};
use entangle_core::separability::{self, Criterion, Status};
use entangle_core::states::{self, BellKind, DensityMatrix};
use entangle_core::witness::{self, MapKind, WitnessKind};
use entangle_core::{Error, Execution, SearchOptions};

use crate::args::*;
use crate::report::{join, short, Report};

pub const EXIT_OK: u8 = 0;
pub const EXIT_NEGATIVE: u8 = 1;
pub const EXIT_UNDECIDED: u8 = 2;
pub const EXIT_NON_IMPROVING: u8 = 3;
pub const EXIT_PPT_WITNESS: u8 = 4;
pub const EXIT_USAGE: u8 = 64;

/// Message plus the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::PositivePartialTranspose { .. } => EXIT_PPT_WITNESS,
            Error::NonImproving { .. } => EXIT_NON_IMPROVING,
            Error::ShiftCheckFailed(_) | Error::DegenerateInput(_) => EXIT_NEGATIVE,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<u8, Failure>;

pub fn run(command: Command) -> Outcome {
    match command {
        Command::Gen(args) => gen(args),
        Command::Analyze { input } => analyze(&input),
        Command::Distill(args) => distill_cmd(args),
        Command::Witness(sub) => witness_cmd(sub),
        Command::Measure(args) => measure(args),
        Command::Distillable(args) => distillable(args),
    }
}

fn load(path: &Path) -> Result<StateFile, Failure> {
    StateFile::read(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn load_density(path: &Path) -> Result<DensityMatrix, Failure> {
    load(path)?
        .to_density()
        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

/// Writes the file, or prints it when no path is given. Returns whether a
/// summary should follow.
fn emit(file: &StateFile, out: Option<&PathBuf>) -> Result<bool, Failure> {
    match out {
        Some(path) => {
            file.write(path)?;
            Ok(true)
        }
        None => {
            print!("{}", file.to_text());
            Ok(false)
        }
    }
}

fn need<T>(value: Option<T>, flag: &str, family: &str) -> Result<T, Failure> {
    value.ok_or_else(|| Failure::usage(format!("{family} needs --{flag}")))
}

fn search_options(search: &SearchArgs, default_restarts: usize, command: &str) -> Result<SearchOptions, Failure> {
    let seed = search
        .seed
        .ok_or_else(|| Failure::usage(format!("{command} is randomized and needs --seed")))?;
    let restarts = search.restarts.unwrap_or(default_restarts);
    if restarts == 0 {
        return Err(Failure::usage("--restarts must be positive"));
    }
    let execution = if search.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    Ok(SearchOptions::new(restarts, seed).with_execution(execution))
}

fn gen(args: GenArgs) -> Outcome {
    let mut report = Report::default();
    let family = format!("{:?}", args.family).to_ascii_lowercase();
    report.kv("FAMILY", &family);
    let (payload, provenance) = match args.family {
        Family::Bell => {
            let kind: BellKind = args.which.parse()?;
            report.kv("WHICH", kind);
            (Payload::Pure(states::bell(kind)), format!("bell {kind}"))
        }
        Family::Werner => {
            let p = need(args.p, "p", "werner")?;
            report.num("P", p);
            (Payload::Density(states::werner(p)?), format!("werner p={p}"))
        }
        Family::Isotropic => {
            let p = need(args.p, "p", "isotropic")?;
            let d = args.d.unwrap_or(2);
            report.num("P", p).kv("D", d);
            (Payload::Density(states::isotropic(p, d)?), format!("isotropic p={p} d={d}"))
        }
        Family::Ghz => (Payload::Pure(states::ghz()), "ghz".into()),
        Family::W => (Payload::Pure(states::w_state()), "w".into()),
        Family::NoisyW => {
            let p = need(args.p, "p", "noisy-w")?;
            report.num("P", p);
            (Payload::Density(states::noisy_w(p)?), format!("noisy-w p={p}"))
        }
        Family::Symasym => {
            let alpha = need(args.alpha, "alpha", "symasym")?;
            report.num("ALPHA", alpha).kv("N", args.n);
            (
                Payload::Density(states::sym_antisym_family(args.n, alpha)?),
                format!("symasym n={} alpha={alpha}", args.n),
            )
        }
        Family::Maxent => {
            let d = need(args.d, "d", "maxent")?;
            report.kv("D", d);
            (Payload::Pure(states::maximally_entangled(d)?), format!("maxent d={d}"))
        }
        Family::Basis => {
            let dims = need(args.dims.clone(), "dims", "basis")?;
            let index = need(args.index, "index", "basis")?;
            report.kv("INDEX", index);
            (Payload::Pure(states::basis_state(&dims, index)?), format!("basis index={index}"))
        }
        Family::Random => {
            let dims = need(args.dims.clone(), "dims", "random")?;
            let seed = need(args.seed, "seed", "random")?;
            let rank = args.rank.unwrap_or(dims.iter().product());
            report.kv("RANK", rank).kv("SEED", seed);
            (
                Payload::Density(states::random_density(&dims, rank, seed)?),
                format!("random rank={rank}"),
            )
        }
        Family::RandomPure => {
            let dims = need(args.dims.clone(), "dims", "random-pure")?;
            let seed = need(args.seed, "seed", "random-pure")?;
            report.kv("SEED", seed);
            (Payload::Pure(states::random_pure(&dims, seed)?), "random-pure".into())
        }
        Family::Separable => {
            let dims = need(args.dims.clone(), "dims", "separable")?;
            let seed = need(args.seed, "seed", "separable")?;
            let terms = args.terms.unwrap_or(dims.iter().product());
            report.kv("TERMS", terms).kv("SEED", seed);
            (
                Payload::Density(states::random_separable(&dims, terms, seed)?),
                format!("separable terms={terms}"),
            )
        }
    };
    report.kv("KIND", payload.kind_name()).kv("DIMS", join(payload.dims()));
    let mut file = StateFile::new(payload).with_provenance(provenance);
    if let Some(seed) = args.seed {
        file = file.with_seed(seed);
    }
    if emit(&file, args.out.as_ref())? {
        report.kv("OUT", args.out.as_ref().map(|p| p.display().to_string()).unwrap_or_default());
        report.print();
    }
    Ok(EXIT_OK)
}

fn analyze(input: &Path) -> Outcome {
    let rho = load_density(input)?;
    let verdict = separability::analyze(&rho)?;
    let mut report = Report::default();
    report.kv("DIMS", join(&verdict.dims));
    for criterion in [Criterion::Ppt, Criterion::Reduction, Criterion::Majorization] {
        let r = verdict.report(criterion);
        report
            .kv(&format!("{criterion}_SATISFIED"), r.satisfied)
            .num(&format!("{criterion}_MARGIN"), r.margin)
            .kv(&format!("{criterion}_BOUNDARY"), r.boundary);
    }
    report.kv("PPT_SUFFICIENT", separability::ppt_is_sufficient(&verdict.dims));
    report.kv("VERDICT", verdict.status);
    report.print();
    Ok(match verdict.status {
        Status::Separable => EXIT_OK,
        Status::Entangled => EXIT_NEGATIVE,
        Status::Undecided => EXIT_UNDECIDED,
    })
}

fn distill_cmd(args: DistillArgs) -> Outcome {
    let twirl = if args.no_twirl { Twirl::Never } else { Twirl::EachStep };
    let (start, trace) = match (&args.input, args.fidelity) {
        (_, Some(f)) => (f, distill::iterate_with(f, args.target, args.max_steps, twirl)?),
        (Some(path), None) => {
            let rho = load_density(path)?;
            let f = distill::twirl_to_isotropic(&rho)?.fidelity;
            (f, distill::iterate_state(rho, args.target, args.max_steps, twirl)?)
        }
        (None, None) => return Err(Failure::usage("give a state file or --fidelity")),
    };
    if trace.steps.is_empty() && trace.reached_target {
        println!("STEPS=0 FINAL_FIDELITY={start} REACHED_TARGET=true");
        return Ok(EXIT_OK);
    }
    let mut report = Report::default();
    report.line(format!("{:>4}  {:>10}  {:>10}  {:>10}", "step", "F_before", "F_after", "P_success"));
    for (i, s) in trace.steps.iter().enumerate() {
        report.line(format!(
            "{:>4}  {:>10.6}  {:>10.6}  {:>10.6}",
            i + 1,
            s.fidelity_before,
            s.fidelity_after,
            s.success_probability
        ));
    }
    report
        .num("INITIAL_FIDELITY", start)
        .num("TARGET", args.target)
        .kv("TWIRL", if args.no_twirl { "never" } else { "each-step" })
        .kv("STEPS", trace.steps.len())
        .num("FINAL_FIDELITY", trace.final_fidelity().unwrap_or(start))
        .num("PAIRS_CONSUMED_ESTIMATE", trace.pairs_consumed_estimate)
        .kv("REACHED_TARGET", trace.reached_target);
    report.print();
    Ok(if trace.reached_target { EXIT_OK } else { EXIT_NEGATIVE })
}

fn witness_cmd(sub: WitnessCommand) -> Outcome {
    let mut report = Report::default();
    match sub {
        WitnessCommand::Build { input, out } => {
            let rho = load_density(&input)?;
            let w = witness::construct_from_npt(&rho)?;
            let value = witness::evaluate(&w, &rho)?;
            if emit(&StateFile::new(Payload::Witness(w)), out.as_ref())? {
                report
                    .kv("WITNESS_KIND", WitnessKind::Entanglement)
                    .num("EXPECTATION_ON_INPUT", value)
                    .kv("OUT", out.unwrap().display());
                report.print();
            }
            Ok(EXIT_OK)
        }
        WitnessCommand::Eval { witness: wpath, state } => {
            let w = load(&wpath)?.to_witness()?;
            let rho = load_density(&state)?;
            let value = witness::evaluate(&w, &rho)?;
            let detected = value < -separability::ZERO_TOL;
            report.kv("WITNESS_KIND", w.kind()).num("EXPECTATION", value).kv("DETECTED", detected);
            if let WitnessKind::Schmidt(k) = w.kind() {
                report.kv("SCHMIDT_NUMBER_AT_LEAST", if detected { k } else { 1 });
            }
            report.line(format!("expectation: {}", short(value)));
            report.print();
            Ok(if detected { EXIT_OK } else { EXIT_NEGATIVE })
        }
        WitnessCommand::Optimize { witness: wpath, search, out } => {
            let w = load(&wpath)?.to_witness()?;
            let opts = search_options(&search, SearchOptions::DEFAULT_RESTARTS, "witness optimize")?;
            let shifted = witness::shift_optimize(&w, &opts)?;
            let file = StateFile::new(Payload::Witness(shifted.witness)).with_seed(opts.seed);
            if emit(&file, out.as_ref())? {
                report
                    .num("SHIFT", shifted.shift)
                    .num("POST_MIN_PRODUCT", shifted.post_min)
                    .kv("RESTARTS", opts.restarts)
                    .kv("SEED", opts.seed)
                    .kv("OUT", out.unwrap().display());
                report.print();
            }
            Ok(EXIT_OK)
        }
        WitnessCommand::Classify3 { input } => {
            let rho = load_density(&input)?;
            let ev = witness::classify_tripartite(&rho)?;
            report
                .num("GHZ_WITNESS", ev.ghz_value)
                .num("W_WITNESS", ev.w_value)
                .kv("OUTSIDE_BISEPARABLE", ev.outside_biseparable())
                .kv("GHZ_NOT_W", ev.ghz_not_w())
                .kv("CLASS_EVIDENCE", ev.summary().replace(' ', "_"));
            if ev.ghz_not_w() {
                report.line(format!("GHZ∖W evidence: {}", short(ev.ghz_value)));
            } else if ev.outside_biseparable() {
                report.line(format!("outside-biseparable evidence: {}", short(ev.w_value)));
            } else {
                report.line("no class evidence");
            }
            report.print();
            Ok(EXIT_OK)
        }
        WitnessCommand::Named { which, out } => {
            let w = match which {
                NamedWitness::Ghz => witness::ghz_witness(),
                NamedWitness::W => witness::w_witness(),
            };
            let kind = w.kind();
            if emit(&StateFile::new(Payload::Witness(w)), out.as_ref())? {
                report.kv("WITNESS_KIND", kind).kv("OUT", out.unwrap().display());
                report.print();
            }
            Ok(EXIT_OK)
        }
        WitnessCommand::Jamiolkowski { map, d, out } => {
            let kind = match map {
                MapArg::Transpose => MapKind::Transpose,
                MapArg::Reduction => MapKind::Reduction,
            };
            let w = witness::jamiolkowski(kind, d)?;
            if emit(&StateFile::new(Payload::Witness(w)), out.as_ref())? {
                report.kv("MAP", format!("{map:?}").to_ascii_lowercase()).kv("D", d).kv("OUT", out.unwrap().display());
                report.print();
            }
            Ok(EXIT_OK)
        }
    }
}

fn estimate_lines(report: &mut Report, symbol: &str, est: &MeasureEstimate, seed: u64) {
    report
        .kv("KIND", est.kind)
        .num("VALUE", est.value)
        .kv("BOUND", "upper")
        .kv("RESTARTS", est.stats.restarts)
        .kv("ITERATIONS", est.stats.iterations)
        .kv("BEST_RESTART", est.stats.best_restart)
        .kv("SEED", seed)
        .line(format!("{symbol} <= {} ebits (upper estimate)", short(est.value)));
}

fn measure(args: MeasureArgs) -> Outcome {
    let file = load(&args.input)?;
    let mut report = Report::default();
    match args.kind {
        MeasureKindArg::Entropy => {
            let Payload::Pure(psi) = &file.payload else {
                return Err(Failure::usage(
                    "entropy of entanglement needs a pure state; use --kind formation for mixed states",
                ));
            };
            let est = measures::pure_entanglement(psi)?;
            report
                .kv("KIND", est.kind)
                .num("VALUE", est.value)
                .kv("BOUND", "exact")
                .line(format!("E = {} ebits", short(est.value)));
        }
        MeasureKindArg::Formation => {
            let opts = search_options(&args.search, measures::DEFAULT_RESTARTS, "measure --kind formation")?;
            let est = measures::entanglement_of_formation(&file.to_density()?, args.size, &opts)?;
            estimate_lines(&mut report, "E_F", &est, opts.seed);
        }
        MeasureKindArg::Relent => {
            let opts = search_options(&args.search, measures::DEFAULT_RESTARTS, "measure --kind relent")?;
            let est = measures::relative_entropy_estimate(&file.to_density()?, args.size, &opts)?;
            estimate_lines(&mut report, "E_R", &est, opts.seed);
        }
        MeasureKindArg::Bounds => {
            let opts = search_options(&args.search, measures::DEFAULT_RESTARTS, "measure --kind bounds")?;
            let b = measures::bounds_report(&file.to_density()?, &opts)?;
            report
                .num("LOWER", b.lower)
                .num("UPPER", b.upper)
                .kv("UPPER_LABEL", measures::BoundsReport::UPPER_LABEL)
                .kv("PPT", b.ppt_flag)
                .kv("DISTILLABILITY", b.distillability.map_or("none".to_string(), |d| d.to_string()))
                .kv("SEED", opts.seed)
                .line(format!("{} <= E <= {} (upper is conjecture-based)", short(b.lower), short(b.upper)));
        }
    }
    report.print();
    Ok(EXIT_OK)
}

fn distillable(args: DistillableArgs) -> Outcome {
    let rho = load_density(&args.input)?;
    let opts = search_options(&args.search, 20, "distillable")?;
    let cert = distill::distillability_test(&rho, args.copies, &opts)?;
    let mut report = Report::default();
    report
        .kv("COPIES", cert.n)
        .num("VALUE", cert.value)
        .kv("SCHMIDT_COEFFICIENTS", join(&cert.witness_vector.coefficients))
        .kv("RESTARTS", cert.restarts)
        .kv("SEED", opts.seed)
        .kv("VERDICT", cert.verdict);
    report.print();
    Ok(match cert.verdict {
        Distillability::Distillable(_) => EXIT_OK,
        Distillability::Inconclusive => EXIT_UNDECIDED,
    })
}
