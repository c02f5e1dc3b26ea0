//! Command-line interface: load a transition matrix, pick a g-inverse
//! recipe, compute stationary distributions, passage moments or occupation
//! sums, and emit a structured report.
//!
//! Exit codes: 0 when every requested check passes, 2 on input validation
//! failures, 3 on numerical failures. Errors are machine-readable JSON on
//! stderr. All state indices are 1-based.

mod input;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use markov_ginv::chain::{StationaryVector, TransitionMatrix};
use markov_ginv::ginv::{
    build_with_tol, check_conditions, classify, convert, extract_params, GInvRecipe, GInverse,
    DEFAULT_CLASSIFY_TOL,
};
use markov_ginv::linalg::{diag_of, Matrix};
use markov_ginv::passage::PassageMoments;
use markov_ginv::{occupation, oracle, passage, stationary, Error};
use serde_json::{json, Value};

use input::{load_matrix, InputFormat};
use report::{matrix_json, render_table, vector_json, ReportBuilder};

/// Environment variable overriding the default tolerance.
const TOL_ENV: &str = "MARKOV_GINV_TOL";

#[derive(Debug)]
pub struct CliError {
    kind: String,
    message: String,
    code: u8,
}

impl CliError {
    pub fn validation(kind: &str, message: String) -> Self {
        CliError { kind: kind.into(), message, code: 2 }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let (kind, code) = match &e {
            Error::NotStochastic { .. } => ("NotStochastic", 2),
            Error::NotIrreducible { .. } => ("NotIrreducible", 2),
            Error::ShapeMismatch(_) => ("ShapeMismatch", 2),
            Error::NonFinite(_) => ("NonFinite", 2),
            Error::IndexOutOfRange { .. } => ("IndexOutOfRange", 2),
            Error::InvalidHorizon => ("InvalidHorizon", 2),
            Error::MissingPi(_) => ("MissingPi", 2),
            Error::ZeroDelta => ("ZeroDelta", 2),
            Error::SingularMatrix { .. } => ("SingularMatrix", 3),
            Error::Condition1Failed { .. } => ("Condition1Failed", 3),
            Error::DegenerateAlpha => ("DegenerateAlpha", 3),
            Error::DegeneratePivot(_) => ("DegeneratePivot", 3),
            Error::InvarianceViolated { .. } => ("InvarianceViolated", 3),
            Error::ZeroProjection => ("ZeroProjection", 3),
            Error::NoValidRow => ("NoValidRow", 3),
            Error::Gamma2Inverse => ("Gamma2Inverse", 3),
            Error::Not15Inverse => ("Not15Inverse", 3),
            Error::Not14Inverse => ("Not14Inverse", 3),
            Error::NoRecipeVectors => ("NoRecipeVectors", 3),
            Error::RowSumNotConstant { .. } => ("RowSumNotConstant", 3),
            Error::PeriodicChain { .. } => ("PeriodicChain", 3),
            Error::NoConvergence { .. } => ("NoConvergence", 3),
            Error::TrajectoryCapExceeded { .. } => ("TrajectoryCapExceeded", 3),
            Error::NegativeVariance { .. } => ("NegativeVariance", 3),
            Error::InvalidStationary(_) => ("InvalidStationary", 3),
        };
        CliError { kind: kind.into(), message: e.to_string(), code }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RecipeId {
    Ee,
    #[value(name = "eb_r")]
    EbR,
    Eb,
    #[value(name = "ae_c")]
    AeC,
    #[value(name = "ab_cr")]
    AbCr,
    #[value(name = "ab_c")]
    AbC,
    Ae,
    #[value(name = "ab_r")]
    AbR,
    Ab,
    #[value(name = "tb_c")]
    TbC,
    Fundamental,
    Group,
    Mp,
    Rhode,
    Custom,
}

impl RecipeId {
    fn table_recipe(self, a: usize, b: usize) -> Option<GInvRecipe> {
        Some(match self {
            RecipeId::Ee => GInvRecipe::g_ee(),
            RecipeId::EbR => GInvRecipe::g_eb_r(b),
            RecipeId::Eb => GInvRecipe::g_eb(b),
            RecipeId::AeC => GInvRecipe::g_ae_c(a),
            RecipeId::AbCr => GInvRecipe::g_ab_cr(a, b),
            RecipeId::AbC => GInvRecipe::g_ab_c(a, b),
            RecipeId::Ae => GInvRecipe::g_ae(a),
            RecipeId::AbR => GInvRecipe::g_ab_r(a, b),
            RecipeId::Ab => GInvRecipe::g_ab(a, b),
            RecipeId::TbC => GInvRecipe::g_tb_c(b),
            _ => return None,
        })
    }

    fn needs_pi(self) -> bool {
        matches!(self, RecipeId::Fundamental | RecipeId::Group | RecipeId::Mp)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GinvAction {
    Build,
    Check,
    Classify,
    Convert,
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Transition matrix file.
    #[arg(long)]
    input: PathBuf,
    /// Input format; inferred from the file extension when omitted.
    #[arg(long, value_enum)]
    format: Option<InputFormat>,
    /// Tolerance for condition and agreement checks
    /// (default: MARKOV_GINV_TOL or 1e-8).
    #[arg(long)]
    tol: Option<f64>,
    /// Rescale rows to unit sum before validating; recorded in the report.
    #[arg(long)]
    normalize: bool,
    /// Report format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    output: OutputFormat,
}

#[derive(Args, Debug)]
struct RecipeArgs {
    /// g-inverse recipe.
    #[arg(long = "ginv", value_enum, default_value_t = RecipeId::Eb)]
    ginv: RecipeId,
    /// Row/column index a (1-based) for recipes that use one.
    #[arg(long, default_value_t = 1)]
    a: usize,
    /// Row/column index b (1-based) for recipes that use one.
    #[arg(long, default_value_t = 1)]
    b: usize,
    /// Custom g-inverse matrix file (required with --ginv custom).
    #[arg(long)]
    matrix: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Run the oracle cross-checks (direct solves and Monte Carlo).
    #[arg(long)]
    verify: bool,
    /// Monte Carlo trials per state pair.
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    /// RNG seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// RNG algorithm name (only "chacha12" is implemented).
    #[arg(long, default_value = oracle::RNG_ALGORITHM)]
    rng: String,
}

#[derive(Parser, Debug)]
#[command(
    name = "markov-ginv",
    version,
    about = "Stationary distributions, first passage moments and occupation times of finite irreducible Markov chains via generalized inverses"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Stationary distribution through a chosen g-inverse route.
    Stationary {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        recipe: RecipeArgs,
    },
    /// Mean first passage time matrix.
    Mfpt {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        recipe: RecipeArgs,
        #[command(flatten)]
        verify: VerifyArgs,
    },
    /// First and second passage moments and variances.
    Moments {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        recipe: RecipeArgs,
        #[command(flatten)]
        verify: VerifyArgs,
    },
    /// Expected occupation counts over a finite horizon.
    Occupation {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        recipe: RecipeArgs,
        /// Horizon: counts cover the time points 0..n-1.
        #[arg(long)]
        n: usize,
    },
    /// Build, check, classify or convert g-inverses.
    Ginv {
        #[command(flatten)]
        common: CommonArgs,
        /// g-inverse recipe.
        #[arg(long = "recipe", alias = "ginv", value_enum, default_value_t = RecipeId::Eb)]
        recipe: RecipeId,
        #[arg(long, default_value_t = 1)]
        a: usize,
        #[arg(long, default_value_t = 1)]
        b: usize,
        /// Custom g-inverse matrix file (required with --recipe custom).
        #[arg(long)]
        matrix: Option<PathBuf>,
        /// What to do with the g-inverse.
        action: GinvAction,
        /// Conversion target recipe (canonical update family only).
        #[arg(long, value_enum)]
        to: Option<RecipeId>,
        /// Target index a for --to (defaults to --a).
        #[arg(long)]
        a2: Option<usize>,
        /// Target index b for --to (defaults to --b).
        #[arg(long)]
        b2: Option<usize>,
        /// Write the resulting matrix (build/convert) to this CSV file.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
}

struct Tolerances {
    condition: f64,
    classification: f64,
    residual_m1: f64,
    residual_m2: f64,
    oracle_agreement: f64,
}

impl Tolerances {
    fn resolve(flag: Option<f64>) -> Self {
        let base = flag
            .or_else(|| std::env::var(TOL_ENV).ok().and_then(|s| s.parse().ok()))
            .unwrap_or(1e-8);
        Tolerances {
            condition: base,
            classification: DEFAULT_CLASSIFY_TOL,
            residual_m1: base,
            residual_m2: base * 10.0,
            oracle_agreement: base * 10.0,
        }
    }

    fn to_json(&self) -> Value {
        json!({
            "condition": self.condition,
            "classification": self.classification,
            "residual_m1": self.residual_m1,
            "residual_m2": self.residual_m2,
            "oracle_agreement": self.oracle_agreement,
            "stationary_residual": markov_ginv::chain::DEFAULT_PI_RESIDUAL_TOL,
        })
    }
}

fn load_chain(common: &CommonArgs) -> Result<(TransitionMatrix, String, bool), CliError> {
    let (raw, digest) = load_matrix(&common.input, common.format)?;
    if common.normalize {
        let (chain, changed) = TransitionMatrix::validate_normalized(raw)?;
        Ok((chain, digest, changed))
    } else {
        Ok((TransitionMatrix::validate(raw)?, digest, false))
    }
}

/// Builds the requested g-inverse, computing the stationary vector first when
/// the recipe requires it. Returns the inverse and the internal pi, if any.
fn build_recipe(
    p: &TransitionMatrix,
    id: RecipeId,
    a: usize,
    b: usize,
    matrix_path: Option<&PathBuf>,
    cond_tol: f64,
) -> Result<(GInverse, Option<StationaryVector>), CliError> {
    let recipe = match id {
        RecipeId::Custom => {
            let path = matrix_path.ok_or_else(|| {
                CliError::validation("MissingMatrix", "--ginv custom requires --matrix".into())
            })?;
            let (g, _) = load_matrix(path, None)?;
            GInvRecipe::CustomMatrix { g }
        }
        RecipeId::Fundamental => GInvRecipe::Fundamental,
        RecipeId::Group => GInvRecipe::GroupInverse,
        RecipeId::Mp => GInvRecipe::MoorePenrose,
        RecipeId::Rhode => GInvRecipe::Rhode,
        other => other.table_recipe(a, b).unwrap(),
    };
    if id.needs_pi() {
        let pi = stationary::pi_default(p)?;
        let g = build_with_tol(p, recipe, Some(&pi), cond_tol)?;
        Ok((g, Some(pi)))
    } else {
        let g = build_with_tol(p, recipe, None, cond_tol)?;
        Ok((g, None))
    }
}

fn check_rng(name: &str) -> Result<(), CliError> {
    if name != oracle::RNG_ALGORITHM {
        return Err(CliError::validation(
            "UnknownRng",
            format!("unknown RNG `{name}`; available: {}", oracle::RNG_ALGORITHM),
        ));
    }
    Ok(())
}

struct Outcome {
    report: Value,
    output: OutputFormat,
    failed_checks: Vec<String>,
}

fn cmd_stationary(common: CommonArgs, recipe: RecipeArgs) -> Result<Outcome, CliError> {
    let tols = Tolerances::resolve(common.tol);
    let (p, digest, normalized) = load_chain(&common)?;
    let (g, _) = build_recipe(&p, recipe.ginv, recipe.a, recipe.b, recipe.matrix.as_ref(), tols.condition)?;

    let (pi, procedure) = match recipe.ginv {
        RecipeId::Rhode => (stationary::pi_rhode(&p)?, "partitioned"),
        RecipeId::Custom => (stationary::pi_from_a(&p, &g, None)?, "a-row-scan"),
        RecipeId::Fundamental | RecipeId::Group | RecipeId::Mp => {
            (stationary::pi_from_a(&p, &g, None)?, "a-first-row")
        }
        _ => (stationary::pi_from_tu(&p, &g)?, "direct-tu"),
    };
    let params = extract_params(&p, &g)?;
    let labels = classify(&params, &p, &pi, tols.classification);

    let mut rb = ReportBuilder::new("stationary", &digest, p.m(), normalized);
    rb.set(
        "route",
        json!({
            "recipe": g.label(),
            "procedure": procedure,
            "pi_source": if recipe.ginv.needs_pi() { "internal-default" } else { "self" },
        }),
    );
    rb.set("tolerances", tols.to_json());
    rb.set(
        "results",
        json!({
            "pi": vector_json(pi.pi()),
            "alpha": vector_json(&params.alpha),
            "beta": vector_json(&params.beta),
            "gamma": params.gamma,
            "labels": labels.labels(),
        }),
    );
    rb.set("residuals", json!({ "stationary": pi.residual() }));

    // Construction already enforces the stationary residual bound.
    Ok(Outcome { report: rb.finish(), output: common.output, failed_checks: vec![] })
}

fn moments_from_recipe(
    p: &TransitionMatrix,
    recipe: &RecipeArgs,
    cond_tol: f64,
    want_m2: bool,
) -> Result<PassageMoments, CliError> {
    if recipe.ginv == RecipeId::Eb {
        if want_m2 {
            let out = passage::m2_geb(p, recipe.b)?;
            let d = diag_of(&out.m1)?;
            Ok(PassageMoments {
                pi: out.pi,
                m1: out.m1,
                m2: Some(out.m2),
                var: Some(out.var),
                d,
                variance_clamped: out.variance_clamped,
                route: passage::MomentsRoute {
                    recipe: format!("eb(b={})", recipe.b),
                    pi_rule: "g-row".into(),
                    m1_rule: "geb-elemental".into(),
                    m2_rule: Some("geb-squared".into()),
                },
            })
        } else {
            let (pi, m1) = passage::mfpt_geb(p, recipe.b)?;
            let d = diag_of(&m1)?;
            Ok(PassageMoments {
                pi,
                m1,
                m2: None,
                var: None,
                d,
                variance_clamped: false,
                route: passage::MomentsRoute {
                    recipe: format!("eb(b={})", recipe.b),
                    pi_rule: "g-row".into(),
                    m1_rule: "geb-elemental".into(),
                    m2_rule: None,
                },
            })
        }
    } else {
        let (g, _) = build_recipe(p, recipe.ginv, recipe.a, recipe.b, recipe.matrix.as_ref(), cond_tol)?;
        Ok(PassageMoments::compute_with(p, &g, want_m2)?)
    }
}

fn m1_residual(p: &TransitionMatrix, m1: &Matrix) -> f64 {
    let m = p.m();
    let e = Matrix::from_fn(m, m, |_, _| 1.0);
    let m1d = diag_of(m1).expect("square");
    p.kernel().matmul(m1).max_diff(&e.sub(&p.p().matmul(&m1d)))
}

fn m2_residual(p: &TransitionMatrix, m1: &Matrix, m2: &Matrix) -> f64 {
    let m = p.m();
    let e = Matrix::from_fn(m, m, |_, _| 1.0);
    let m1d = diag_of(m1).expect("square");
    let m2d = diag_of(m2).expect("square");
    let rhs = e
        .add(&p.p().matmul(&m1.sub(&m1d)).scale(2.0))
        .sub(&p.p().matmul(&m2d));
    p.kernel().matmul(m2).max_diff(&rhs)
}

fn cmd_moments(
    common: CommonArgs,
    recipe: RecipeArgs,
    verify: VerifyArgs,
    want_m2: bool,
) -> Result<Outcome, CliError> {
    check_rng(&verify.rng)?;
    let tols = Tolerances::resolve(common.tol);
    let (p, digest, normalized) = load_chain(&common)?;
    let pm = moments_from_recipe(&p, &recipe, tols.condition, want_m2)?;

    let mut failed = Vec::new();
    let r1 = m1_residual(&p, &pm.m1);
    if r1 > tols.residual_m1 {
        failed.push(format!("m1 defining-equation residual {r1:.3e}"));
    }
    let mut residuals = serde_json::Map::new();
    residuals.insert("m1_defining_equation".into(), json!(r1));
    if let Some(m2m) = &pm.m2 {
        let r2 = m2_residual(&p, &pm.m1, m2m);
        residuals.insert("m2_defining_equation".into(), json!(r2));
        if r2 > tols.residual_m2 {
            failed.push(format!("m2 defining-equation residual {r2:.3e}"));
        }
    }

    let mut results = serde_json::Map::new();
    results.insert("pi".into(), vector_json(pm.pi.pi()));
    results.insert("m1".into(), matrix_json(&pm.m1));
    if let Some(m2m) = &pm.m2 {
        results.insert("m2".into(), matrix_json(m2m));
    }
    if let Some(var) = &pm.var {
        results.insert("var".into(), matrix_json(var));
        results.insert("variance_clamped".into(), json!(pm.variance_clamped));
    }

    let mut rb = ReportBuilder::new(
        if want_m2 { "moments" } else { "mfpt" },
        &digest,
        p.m(),
        normalized,
    );
    rb.set(
        "route",
        json!({
            "recipe": pm.route.recipe,
            "pi_rule": pm.route.pi_rule,
            "m1_rule": pm.route.m1_rule,
            "m2_rule": pm.route.m2_rule,
        }),
    );
    rb.set("tolerances", tols.to_json());

    if verify.verify {
        let direct = oracle::mfpt_direct(&p)?;
        let m1_diff = pm.m1.max_diff(&direct);
        let mut block = serde_json::Map::new();
        block.insert("oracle".into(), json!("first-step-solve"));
        block.insert("m1_max_abs_diff".into(), json!(m1_diff));
        if m1_diff > tols.oracle_agreement {
            failed.push(format!("oracle m1 disagreement {m1_diff:.3e}"));
        }
        if let Some(m2m) = &pm.m2 {
            let direct2 = oracle::m2_direct(&p, &direct)?;
            let m2_diff = m2m.max_diff(&direct2);
            block.insert("m2_max_abs_diff".into(), json!(m2_diff));
            if m2_diff > tols.oracle_agreement {
                failed.push(format!("oracle m2 disagreement {m2_diff:.3e}"));
            }

            // Monte Carlo bracketing of every state pair.
            let m = p.m();
            let mut worst_z_mean = 0.0f64;
            let mut worst_z_m2 = 0.0f64;
            let mut brackets_ok = true;
            for i in 1..=m {
                for j in 1..=m {
                    let seed = verify
                        .seed
                        .wrapping_mul(0x9e3779b97f4a7c15)
                        .wrapping_add((i * m + j) as u64);
                    let est = oracle::simulate_passage(&p, i, j, verify.trials, seed)?;
                    let dm = (est.mean - pm.m1[(i - 1, j - 1)]).abs();
                    let d2 = (est.second_moment - m2m[(i - 1, j - 1)]).abs();
                    if est.std_error_mean > 0.0 {
                        worst_z_mean = worst_z_mean.max(dm / est.std_error_mean);
                    }
                    if est.std_error_second_moment > 0.0 {
                        worst_z_m2 = worst_z_m2.max(d2 / est.std_error_second_moment);
                    }
                    if dm > 4.0 * est.std_error_mean + 1e-9
                        || d2 > 4.0 * est.std_error_second_moment + 1e-9
                    {
                        brackets_ok = false;
                    }
                }
            }
            block.insert(
                "monte_carlo".into(),
                json!({
                    "algorithm": oracle::RNG_ALGORITHM,
                    "seed": verify.seed,
                    "trials": verify.trials,
                    "worst_z_mean": worst_z_mean,
                    "worst_z_second_moment": worst_z_m2,
                    "within_four_stderr": brackets_ok,
                }),
            );
            if !brackets_ok {
                failed.push("Monte Carlo bracket exceeded four standard errors".into());
            }
        }
        rb.set("verify", Value::Object(block));
    }

    rb.set("results", Value::Object(results));
    rb.set("residuals", Value::Object(residuals));
    Ok(Outcome { report: rb.finish(), output: common.output, failed_checks: failed })
}

fn cmd_occupation(common: CommonArgs, recipe: RecipeArgs, n: usize) -> Result<Outcome, CliError> {
    let tols = Tolerances::resolve(common.tol);
    let (p, digest, normalized) = load_chain(&common)?;
    let pi = stationary::pi_default(&p)?;
    let (g, _) = build_recipe(&p, recipe.ginv, recipe.a, recipe.b, recipe.matrix.as_ref(), tols.condition)?;

    let explicit = occupation::occupation_explicit(&p, n)?;
    let left = occupation::occupation_closed(&p, &g, &pi, n, occupation::ClosedSide::Left)?;
    let right = occupation::occupation_closed(&p, &g, &pi, n, occupation::ClosedSide::Right)?;
    let dl = left.a_n.max_diff(&explicit.a_n);
    let dr = right.a_n.max_diff(&explicit.a_n);
    let max_disc = dl.max(dr);

    let mut failed = Vec::new();
    if max_disc > tols.condition {
        failed.push(format!("closed-form discrepancy {max_disc:.3e}"));
    }

    let mut rb = ReportBuilder::new("occupation", &digest, p.m(), normalized);
    rb.set(
        "route",
        json!({ "recipe": g.label(), "forms": ["explicit", "closed_left", "closed_right"] }),
    );
    rb.set("tolerances", tols.to_json());
    rb.set(
        "results",
        json!({
            "n": n,
            "a_n": matrix_json(&explicit.a_n),
            "max_discrepancy": max_disc,
        }),
    );
    rb.set(
        "residuals",
        json!({
            "closed_left_vs_explicit": dl,
            "closed_right_vs_explicit": dr,
        }),
    );
    Ok(Outcome { report: rb.finish(), output: common.output, failed_checks: failed })
}

#[allow(clippy::too_many_arguments)]
fn cmd_ginv(
    common: CommonArgs,
    recipe_id: RecipeId,
    a: usize,
    b: usize,
    matrix: Option<PathBuf>,
    action: GinvAction,
    to: Option<RecipeId>,
    a2: Option<usize>,
    b2: Option<usize>,
    emit: Option<PathBuf>,
) -> Result<Outcome, CliError> {
    let tols = Tolerances::resolve(common.tol);
    let (p, digest, normalized) = load_chain(&common)?;

    // `check` inspects arbitrary matrices without the condition-1 gate;
    // everything else goes through the validated build.
    let (g_matrix, label, g_built): (Matrix, String, Option<GInverse>) =
        if action == GinvAction::Check && recipe_id == RecipeId::Custom {
            let path = matrix.as_ref().ok_or_else(|| {
                CliError::validation("MissingMatrix", "--recipe custom requires --matrix".into())
            })?;
            let (gm, _) = load_matrix(path, None)?;
            (gm, "custom_matrix".into(), None)
        } else {
            let (g, _) = build_recipe(&p, recipe_id, a, b, matrix.as_ref(), tols.condition)?;
            (g.matrix().clone(), g.label(), Some(g))
        };

    let profile = check_conditions(&p, &g_matrix, tols.condition)?;
    let conditions = json!({
        "held": profile.held(),
        "residuals": profile.residuals().to_vec(),
        "tolerance": profile.tolerance(),
    });
    let mut failed = Vec::new();
    if !profile.holds(1) {
        failed.push(format!(
            "condition 1 residual {:.3e} exceeds {:.3e}",
            profile.residual(1),
            profile.tolerance()
        ));
    }

    let mut rb = ReportBuilder::new("ginv", &digest, p.m(), normalized);
    rb.set("tolerances", tols.to_json());
    let mut results = serde_json::Map::new();
    results.insert("conditions".into(), conditions);
    let mut emit_matrix: Option<Matrix> = None;

    match action {
        GinvAction::Check => {
            rb.set("route", json!({ "recipe": label, "action": "check" }));
        }
        GinvAction::Build | GinvAction::Classify => {
            let g = g_built.as_ref().expect("built above");
            let params = extract_params(&p, g)?;
            let pi = stationary::pi_default(&p)?;
            let labels = classify(&params, &p, &pi, tols.classification);
            results.insert("alpha".into(), vector_json(&params.alpha));
            results.insert("beta".into(), vector_json(&params.beta));
            results.insert("gamma".into(), json!(params.gamma));
            results.insert("labels".into(), json!(labels.labels()));
            if action == GinvAction::Build {
                results.insert("g".into(), matrix_json(g.matrix()));
                emit_matrix = Some(g.matrix().clone());
            }
            rb.set(
                "route",
                json!({ "recipe": label, "action": format!("{action:?}").to_lowercase() }),
            );
        }
        GinvAction::Convert => {
            let target_id = to.ok_or_else(|| {
                CliError::validation("MissingTarget", "convert requires --to <recipe>".into())
            })?;
            let target = target_id.table_recipe(a2.unwrap_or(a), b2.unwrap_or(b)).ok_or_else(|| {
                CliError::validation(
                    "InvalidTarget",
                    "--to must name a canonical update recipe (ee, eb, ab, ...)".into(),
                )
            })?;
            let pi = stationary::pi_default(&p)?;
            let direct = build_with_tol(&p, target, None, tols.condition)?;
            let t2 = direct.t_vector().expect("table recipes carry t").clone();
            let u2 = direct.u_vector().expect("table recipes carry u").clone();
            let converted = convert(&p, &g_matrix, &t2, &u2, &pi)?;
            let diff = converted.max_diff(direct.matrix());
            if diff > tols.condition {
                failed.push(format!("conversion disagrees with direct build by {diff:.3e}"));
            }
            results.insert("g".into(), matrix_json(&converted));
            results.insert("to".into(), json!(direct.label()));
            results.insert("max_abs_diff_vs_direct".into(), json!(diff));
            emit_matrix = Some(converted);
            rb.set(
                "route",
                json!({ "recipe": label, "action": "convert", "to": direct.label() }),
            );
        }
    }

    if let Some(path) = &emit {
        let to_write = emit_matrix.ok_or_else(|| {
            CliError::validation("NothingToEmit", "--emit applies to build and convert".into())
        })?;
        std::fs::write(path, input::matrix_to_csv(&to_write)).map_err(|e| {
            CliError::validation("IoError", format!("cannot write {}: {e}", path.display()))
        })?;
    }

    rb.set("results", Value::Object(results));
    rb.set(
        "residuals",
        json!({
            "condition1": profile.residual(1),
            "condition2": profile.residual(2),
            "condition3": profile.residual(3),
            "condition4": profile.residual(4),
            "condition5": profile.residual(5),
        }),
    );
    Ok(Outcome { report: rb.finish(), output: common.output, failed_checks: failed })
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Stationary { common, recipe } => cmd_stationary(common, recipe),
        Command::Mfpt { common, recipe, verify } => cmd_moments(common, recipe, verify, false),
        Command::Moments { common, recipe, verify } => cmd_moments(common, recipe, verify, true),
        Command::Occupation { common, recipe, n } => cmd_occupation(common, recipe, n),
        Command::Ginv { common, recipe, a, b, matrix, action, to, a2, b2, emit } => {
            cmd_ginv(common, recipe, a, b, matrix, action, to, a2, b2, emit)
        }
    }
}

fn emit_error(kind: &str, message: &str, code: u8) {
    let payload = json!({
        "error": { "kind": kind, "message": message, "exit_code": code }
    });
    eprintln!("{payload}");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(outcome) => {
            match outcome.output {
                OutputFormat::Json => {
                    println!("{}", serde_json::to_string_pretty(&outcome.report).unwrap())
                }
                OutputFormat::Table => print!("{}", render_table(&outcome.report)),
            }
            if outcome.failed_checks.is_empty() {
                ExitCode::SUCCESS
            } else {
                emit_error("ChecksFailed", &outcome.failed_checks.join("; "), 3);
                ExitCode::from(3)
            }
        }
        Err(e) => {
            emit_error(&e.kind, &e.message, e.code);
            ExitCode::from(e.code)
        }
    }
}
