//! `preserver`: build, classify and verify maps that preserve pure or
//! separable pure states.
//!
//! Exit codes: 0 success, 1 not a preserver / verification failed,
//! 2 malformed input or violated constraint, 3 indeterminate.

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use preserver_core::io::{parse_json, state_to_json, superop_from_str, superop_to_string, MapSpecJson, StateJson};
use preserver_core::linalg::{seeded_rng, PureState, PURITY_TOL};
use preserver_core::pure::{classify_pure_preserver, mc_verify_pure, ClassifyOptions, McOutcome};
use preserver_core::report::{multi_report, pure_report, sep_report};
use preserver_core::sep::{
    classify_multi_preserver, classify_sep_preserver, doubling_obstruction, mc_verify_product_pure,
    MultiClassification, ProductMcOutcome, SepClassification,
};
use preserver_core::states::{ppt_check, sample_separable_with, Ppt};
use preserver_core::superop::{conjugation, trace_replacer, ConjFlag, Isometry, MultiForm, SepForm};
use preserver_core::{Error, SuperOperator};

const EXIT_OK: u8 = 0;
const EXIT_NEGATIVE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_INDETERMINATE: u8 = 3;

/// Separable states checked by `verify` on bipartite maps.
const PPT_SAMPLES: usize = 200;

#[derive(Parser)]
#[command(name = "preserver", version, about = "Construct, classify and verify separable-pure-state preservers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the superoperator JSON of a canonical map
    Make(MakeArgs),
    /// Classify a superoperator and print a report
    Classify(ClassifyArgs),
    /// Monte-Carlo check that a map preserves (product) pure states
    Verify(VerifyArgs),
    /// Classify a few well-known maps
    Demo(DemoArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum PureKind {
    Trace,
    Linear,
    Conjugate,
}

#[derive(Clone, Copy, ValueEnum)]
enum FlagArg {
    Linear,
    Conjugate,
}

impl From<FlagArg> for ConjFlag {
    fn from(f: FlagArg) -> Self {
        match f {
            FlagArg::Linear => ConjFlag::Linear,
            FlagArg::Conjugate => ConjFlag::ConjugateLinear,
        }
    }
}

#[derive(Args)]
struct MakeArgs {
    /// Bipartite canonical form 1-7
    #[arg(long, conflicts_with_all = ["multi", "pure_kind", "spec"])]
    form: Option<u8>,
    /// Multipartite permutation form (needs --pi and --dims)
    #[arg(long, conflicts_with_all = ["pure_kind", "spec"])]
    multi: bool,
    /// Permutation (p_1,...,p_n), 1-based
    #[arg(long, value_delimiter = ',', requires = "multi")]
    pi: Vec<usize>,
    /// Single-factor map: trace replacer or (conjugate-)linear conjugation
    #[arg(long, value_enum, conflicts_with = "spec")]
    pure_kind: Option<PureKind>,
    /// Factor dimensions, comma separated
    #[arg(long, value_delimiter = ',')]
    dims: Vec<usize>,
    /// Output dimension of a single-factor map (defaults to the input dimension)
    #[arg(long, requires = "pure_kind")]
    out_dim: Option<usize>,
    /// Conjugation flags of the isometries, in order; missing ones are drawn from the seed
    #[arg(long, value_enum, value_delimiter = ',')]
    flags: Vec<FlagArg>,
    /// JSON map specification
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Superoperator JSON file, or "-" for stdin
    path: String,
    #[arg(long, default_value_t = PURITY_TOL)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct VerifyArgs {
    /// Superoperator JSON file, or "-" for stdin
    path: String,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = PURITY_TOL)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct DemoArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Make(a) => cmd_make(&a),
        Command::Classify(a) => cmd_classify(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::Demo(a) => cmd_demo(&a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn read_input(path: &str) -> Result<String, Error> {
    let mut text = String::new();
    let res = if path == "-" {
        io::stdin().read_to_string(&mut text).map(|_| ())
    } else {
        fs::read_to_string(path).map(|t| text = t)
    };
    res.map_err(|e| Error::InvalidInput(format!("cannot read {path}: {e}")))?;
    Ok(text)
}

fn emit(text: &str) -> Result<(), Error> {
    let mut out = io::stdout().lock();
    writeln!(out, "{text}").map_err(|e| Error::InvalidInput(format!("cannot write output: {e}")))
}

fn emit_json(v: &Value) -> Result<(), Error> {
    emit(&serde_json::to_string(v).expect("reports serialize"))
}

fn two_dims(dims: &[usize]) -> Result<[usize; 2], Error> {
    match dims {
        [m, n] => Ok([*m, *n]),
        _ => Err(Error::InvalidInput(format!("--dims needs two entries m,n for a bipartite form, got {dims:?}"))),
    }
}

fn cmd_make(a: &MakeArgs) -> Result<u8, Error> {
    let flags: Vec<ConjFlag> = a.flags.iter().map(|&f| f.into()).collect();
    let mut rng = seeded_rng(a.seed);
    let phi: SuperOperator = if let Some(tag) = a.form {
        if matches!(tag, 8 | 9) {
            return Err(Error::Unsupported("form 8/9 has no constructor (open in source theorem)".into()));
        }
        let dims = two_dims(&a.dims)?;
        let form = SepForm::random(tag, dims, &flags, &mut rng)?;
        preserver_core::superop::canonical_sep(&form, dims)?
    } else if a.multi {
        if a.dims.is_empty() {
            return Err(Error::InvalidInput("--multi needs --dims".into()));
        }
        let perm = if a.pi.is_empty() { (1..=a.dims.len()).collect() } else { a.pi.clone() };
        let form = MultiForm::random(perm, &a.dims, &flags, &mut rng)?;
        preserver_core::superop::canonical_multi(&form, &a.dims)?
    } else if let Some(kind) = a.pure_kind {
        let m = match a.dims.as_slice() {
            [m] => *m,
            other => return Err(Error::InvalidInput(format!("--pure-kind needs a single --dims entry, got {other:?}"))),
        };
        let n = a.out_dim.unwrap_or(m);
        match kind {
            PureKind::Trace => trace_replacer(&preserver_core::linalg::random_pure(n, &mut rng)?, &[m])?,
            PureKind::Linear | PureKind::Conjugate => {
                if m > n {
                    return Err(Error::Structure(format!("an isometry needs input dim <= output dim, got {m} > {n}")));
                }
                let flag = if matches!(kind, PureKind::Linear) { ConjFlag::Linear } else { ConjFlag::ConjugateLinear };
                conjugation(&Isometry::random(n, m, flag, &mut rng)?)?
            }
        }
    } else if let Some(path) = &a.spec {
        let text = read_input(&path.to_string_lossy())?;
        parse_json::<MapSpecJson>(&text)?.build()?
    } else {
        return Err(Error::InvalidInput("make needs one of --form, --multi, --pure-kind or --spec".into()));
    };
    emit(&superop_to_string(&phi))?;
    Ok(EXIT_OK)
}

fn inconclusive_report(key: &str, e: &Error) -> Value {
    json!({ key: "inconclusive", "message": e.to_string() })
}

fn cmd_classify(a: &ClassifyArgs) -> Result<u8, Error> {
    let phi = superop_from_str(&read_input(&a.path)?)?;
    let opts = ClassifyOptions { tol: a.tol, seed: a.seed };
    let (report, code) = classify_report(&phi, &opts)?;
    emit_json(&report)?;
    Ok(code)
}

fn classify_report(phi: &SuperOperator, opts: &ClassifyOptions) -> Result<(Value, u8), Error> {
    let factors = phi.in_dims().len();
    if factors == 1 {
        if phi.out_dims().len() != 1 {
            return Err(Error::Structure(format!(
                "single-factor input needs a single-factor output, got {:?}",
                phi.out_dims()
            )));
        }
        return match classify_pure_preserver(phi, opts) {
            Ok(c) => {
                let code = if c.residual().is_some() { EXIT_OK } else { EXIT_NEGATIVE };
                Ok((pure_report(&c), code))
            }
            Err(e @ Error::Inconclusive(_)) => Ok((inconclusive_report("kind", &e), EXIT_INDETERMINATE)),
            Err(e) => Err(e),
        };
    }
    if factors == 2 {
        let dims = [phi.in_dims()[0], phi.in_dims()[1]];
        return match classify_sep_preserver(phi, dims, opts) {
            Ok(c) => {
                let code = match c {
                    SepClassification::Form { .. } => EXIT_OK,
                    SepClassification::NotPreserver { .. } => EXIT_NEGATIVE,
                    SepClassification::Pattern89 { .. } => EXIT_INDETERMINATE,
                };
                Ok((sep_report(&c, dims), code))
            }
            Err(e @ Error::Inconclusive(_)) => Ok((inconclusive_report("form", &e), EXIT_INDETERMINATE)),
            Err(e) => Err(e),
        };
    }
    match classify_multi_preserver(phi, &phi.in_dims().to_vec(), opts) {
        Ok(c) => {
            let code = match c {
                MultiClassification::Form { .. } => EXIT_OK,
                MultiClassification::NotPreserver { .. } => EXIT_NEGATIVE,
                MultiClassification::InsufficientRichness { .. } => EXIT_INDETERMINATE,
            };
            Ok((multi_report(&c), code))
        }
        Err(e @ Error::Inconclusive(_)) => Ok((inconclusive_report("form", &e), EXIT_INDETERMINATE)),
        Err(e) => Err(e),
    }
}

fn cmd_verify(a: &VerifyArgs) -> Result<u8, Error> {
    let phi = superop_from_str(&read_input(&a.path)?)?;
    let base = |checks: &[&str]| json!({"result": "pass", "samples": a.samples, "seed": a.seed, "checks": checks, "witness": null});
    let fail = |check: &str, witness: Value| {
        json!({"result": "fail", "samples": a.samples, "seed": a.seed, "failed_check": check, "witness": witness})
    };
    if phi.in_dims().len() == 1 {
        return match mc_verify_pure(&phi, a.samples, a.seed, a.tol)? {
            McOutcome::Pass => emit_json(&base(&["pure"])).map(|_| EXIT_OK),
            McOutcome::Fail { witness } => emit_json(&fail("pure", json!(state_to_json(&witness)))).map(|_| EXIT_NEGATIVE),
        };
    }
    if phi.in_dims() != phi.out_dims() {
        return Err(Error::Structure(format!(
            "product-state verification needs equal input and output factors, got {:?} -> {:?}",
            phi.in_dims(),
            phi.out_dims()
        )));
    }
    if let ProductMcOutcome::Fail { witness } = mc_verify_product_pure(&phi, a.samples, a.seed, a.tol)? {
        let w: Vec<_> = witness.iter().map(state_to_json).collect();
        emit_json(&fail("product_pure", json!(w)))?;
        return Ok(EXIT_NEGATIVE);
    }
    if phi.in_dims().len() == 2 {
        let mut rng = seeded_rng(a.seed ^ 0x5eed);
        for _ in 0..a.samples.min(PPT_SAMPLES) {
            let rho = sample_separable_with(phi.in_dims(), 3, &mut rng)?;
            let img = phi.apply(rho.density())?;
            if let Ppt::Negative { .. } = ppt_check(&img)? {
                emit_json(&fail("separable_ppt", json!(StateJson::from_state(&rho))))?;
                return Ok(EXIT_NEGATIVE);
            }
        }
        emit_json(&base(&["product_pure", "separable_ppt"]))?;
    } else {
        emit_json(&base(&["product_pure"]))?;
    }
    Ok(EXIT_OK)
}

fn cmd_demo(a: &DemoArgs) -> Result<u8, Error> {
    use preserver_core::linalg::{partial_transpose, swap_theta, FactorIndex};
    let opts = ClassifyOptions { tol: PURITY_TOL, seed: a.seed };
    let show = |name: &str, phi: &SuperOperator| -> Result<(), Error> {
        let (report, code) = classify_report(phi, &opts)?;
        emit(&format!("{name} (exit {code}): {}", serde_json::to_string(&report).expect("reports serialize")))
    };
    show("transpose on C^2", &conjugation(&Isometry::identity(2, ConjFlag::ConjugateLinear))?)?;
    show(
        "partial transpose on C^2 x C^2",
        &SuperOperator::from_action(&[2, 2], &[2, 2], |f| partial_transpose(f, FactorIndex::new(1)?))?,
    )?;
    show("swap on C^2 x C^2", &SuperOperator::from_action(&[2, 2], &[2, 2], swap_theta)?)?;
    let bell = PureState::from_vector(preserver_core::linalg::CVector::from_fn(4, |i, _| {
        if i == 0 || i == 3 { 1.0.into() } else { 0.0.into() }
    }))?;
    show(
        "trace times Bell projection",
        &trace_replacer(&bell, &[2, 2])?.with_dims(vec![2, 2], vec![2, 2])?,
    )?;
    let (lin, gap) = doubling_obstruction(2)?;
    emit(&format!("doubling obstruction at m = 2: |P1+P2-P3-P4| = {lin:e}, tensor-square gap = {gap}"))?;
    Ok(EXIT_OK)
}
