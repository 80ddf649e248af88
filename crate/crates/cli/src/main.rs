//! Command-line front end: validates tuple documents, runs the library's
//! operations, and emits deterministic reports (human or machine format).
//!
//! Exit codes: 0 = computed, 1 = input error, 2 = undetermined or not
//! converged; a report is emitted in every case.

mod formats;
mod report;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fockmodel_core::charfn::char_fn;
use fockmodel_core::dilation::{build_dilation, dilation_moment_residual, wold};
use fockmodel_core::error::Error as CoreError;
use fockmodel_core::factorization::{
    build_x, compare_factorizations, factorization_from_subspace, regularity_shortcuts,
    round_trip_subspace_distance, subspaces_from_factorization, FactorRelation,
};
use fockmodel_core::model::model_of_t;
use fockmodel_core::multianalytic::MultiAnalyticOp;
use fockmodel_core::numerics::Tolerance;
use fockmodel_core::similarity::{similarity_to_cuntz, SimilarityObstruction};
use formats::{matrix_json, CoeffDump, SubspaceDocument, TupleDocument};
use report::{Outcome, Report};
use serde::de::DeserializeOwned;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Parser)]
#[command(name = "fockmodel", version, about = "Model theory of row contractions on truncated Fock spaces")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Machine,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Truncation / working degree.
    #[arg(short = 'N', long = "deg", default_value_t = 6)]
    deg: usize,
    /// Absolute equality tolerance (defaults to FOCKMODEL_DEFAULT_TOL or 1e-8).
    #[arg(long)]
    tol: Option<f64>,
    /// Relative singular-value threshold for rank decisions.
    #[arg(long)]
    rank_tol: Option<f64>,
    /// Iteration horizon for fixed-point and limit computations.
    #[arg(long, default_value_t = 400)]
    horizon: usize,
    /// Write the report to this path instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
}

impl CommonOpts {
    fn tolerance(&self) -> Result<Tolerance, String> {
        let env_tol = std::env::var("FOCKMODEL_DEFAULT_TOL")
            .ok()
            .and_then(|s| s.parse::<f64>().ok());
        let eq = self.tol.or(env_tol).unwrap_or(1e-8);
        let rank = self.rank_tol.unwrap_or(1e-9);
        Tolerance::new(rank, eq).map_err(|e| e.to_string())
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse and validate a tuple document.
    Validate {
        tuple: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Class membership flags and both triangulations of a row contraction.
    Classify {
        tuple: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Characteristic-function coefficients of a row contraction.
    Charfn {
        tuple: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Truncated minimal isometric dilation.
    Dilate {
        tuple: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Wold decomposition of the dilation's row isometry.
    Wold {
        tuple: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Functional model of a c.n.c. row contraction with moment validation.
    Model {
        tuple: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Regularity of a factorization given by two coefficient dumps.
    FactorizeCheck {
        theta1: PathBuf,
        theta2: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Regular factorization induced by a joint invariant subspace.
    InvariantToFactor {
        tuple: PathBuf,
        subspace: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Model subspaces generated by a regular factorization.
    FactorToInvariant {
        theta1: PathBuf,
        theta2: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
        /// Embed the subspace bases in the report.
        #[arg(long)]
        emit_bases: bool,
    },
    /// Containment/equality relation between two regular factorizations.
    CompareFactors {
        theta1: PathBuf,
        theta2: PathBuf,
        theta1_other: PathBuf,
        theta2_other: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Inner-outer factorization of a coefficient dump.
    InnerOuter {
        theta: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Joint similarity to a Cuntz row isometry.
    Similarity {
        tuple: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
    },
}

fn main() {
    let cli = Cli::parse();
    let started = Instant::now();
    let (opts, mut rep, outcome) = dispatch(&cli.command);
    rep.wall_time_ms = started.elapsed().as_secs_f64() * 1e3;
    rep.set_status(outcome);
    let rendered = match opts.format {
        Format::Machine => rep.render_machine(),
        Format::Human => rep.render_human(),
    };
    match &opts.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, rendered) {
                eprintln!("cannot write report to {}: {e}", path.display());
                std::process::exit(1);
            }
        }
        None => print!("{rendered}"),
    }
    std::process::exit(outcome.exit_code());
}

fn dispatch(cmd: &Cmd) -> (CommonOpts, Report, Outcome) {
    match cmd {
        Cmd::Validate { tuple, opts } => run(opts, "validate", |r, t| cmd_validate(r, t, tuple)),
        Cmd::Classify { tuple, opts } => run(opts, "classify", |r, t| cmd_classify(r, t, tuple, opts)),
        Cmd::Charfn { tuple, opts } => run(opts, "charfn", |r, t| cmd_charfn(r, t, tuple, opts)),
        Cmd::Dilate { tuple, opts } => run(opts, "dilate", |r, t| cmd_dilate(r, t, tuple, opts)),
        Cmd::Wold { tuple, opts } => run(opts, "wold", |r, t| cmd_wold(r, t, tuple, opts)),
        Cmd::Model { tuple, opts } => run(opts, "model", |r, t| cmd_model(r, t, tuple, opts)),
        Cmd::FactorizeCheck { theta1, theta2, opts } => run(opts, "factorize-check", |r, t| {
            cmd_factorize_check(r, t, theta1, theta2, opts)
        }),
        Cmd::InvariantToFactor { tuple, subspace, opts } => {
            run(opts, "invariant-to-factor", |r, t| {
                cmd_invariant_to_factor(r, t, tuple, subspace, opts)
            })
        }
        Cmd::FactorToInvariant { theta1, theta2, opts, emit_bases } => {
            run(opts, "factor-to-invariant", |r, t| {
                cmd_factor_to_invariant(r, t, theta1, theta2, opts, *emit_bases)
            })
        }
        Cmd::CompareFactors { theta1, theta2, theta1_other, theta2_other, opts } => {
            run(opts, "compare-factors", |r, t| {
                cmd_compare_factors(r, t, theta1, theta2, theta1_other, theta2_other, opts)
            })
        }
        Cmd::InnerOuter { theta, opts } => {
            run(opts, "inner-outer", |r, t| cmd_inner_outer(r, t, theta, opts))
        }
        Cmd::Similarity { tuple, opts } => {
            run(opts, "similarity", |r, t| cmd_similarity(r, t, tuple, opts))
        }
    }
}

fn run(
    opts: &CommonOpts,
    name: &str,
    f: impl FnOnce(&mut Report, &Tolerance) -> Result<Outcome, CmdError>,
) -> (CommonOpts, Report, Outcome) {
    let mut rep = Report::new(name);
    let tol = match opts.tolerance() {
        Ok(t) => t,
        Err(e) => {
            rep.result("error", e);
            return (opts.clone(), rep, Outcome::InputError);
        }
    };
    rep.param("deg", opts.deg);
    rep.param("eq_tol", tol.eq_tol);
    rep.param("rank_tol", tol.rank_tol);
    rep.param("horizon", opts.horizon);
    let outcome = match f(&mut rep, &tol) {
        Ok(out) => out,
        Err(CmdError::Input(msg)) => {
            rep.result("error", msg);
            Outcome::InputError
        }
        Err(CmdError::Undetermined(msg)) => {
            rep.result("error", msg);
            Outcome::Undetermined
        }
    };
    (opts.clone(), rep, outcome)
}

enum CmdError {
    Input(String),
    Undetermined(String),
}

impl From<CoreError> for CmdError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::NotConverged { .. }
            | CoreError::TruncationUnstable(_)
            | CoreError::RankUnstable { .. } => CmdError::Undetermined(e.to_string()),
            other => CmdError::Input(other.to_string()),
        }
    }
}

fn load_json<T: DeserializeOwned>(
    rep: &mut Report,
    name: &str,
    path: &Path,
) -> Result<T, CmdError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CmdError::Input(format!("cannot read {}: {e}", path.display())))?;
    rep.input(name, path, &bytes);
    serde_json::from_slice(&bytes).map_err(|e| {
        CmdError::Input(format!(
            "{}: parse error at line {}, column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

fn load_tuple(
    rep: &mut Report,
    path: &Path,
    tol: &Tolerance,
) -> Result<fockmodel_core::RowContraction, CmdError> {
    let doc: TupleDocument = load_json(rep, "tuple", path)?;
    if let Some(label) = &doc.label {
        rep.result("label", label.clone());
    }
    doc.to_contraction(*tol).map_err(CmdError::Input)
}

/// Loads the raw matrices without the row-contraction invariant (the
/// similarity pipeline accepts any power-bounded tuple).
fn load_tuple_matrices(
    rep: &mut Report,
    path: &Path,
) -> Result<Vec<fockmodel_core::CMatrix>, CmdError> {
    let doc: TupleDocument = load_json(rep, "tuple", path)?;
    if let Some(label) = &doc.label {
        rep.result("label", label.clone());
    }
    doc.matrices().map_err(CmdError::Input)
}

fn load_theta(rep: &mut Report, name: &str, path: &Path) -> Result<MultiAnalyticOp, CmdError> {
    let doc: CoeffDump = load_json(rep, name, path)?;
    doc.to_op().map_err(CmdError::Input)
}

fn cmd_validate(rep: &mut Report, tol: &Tolerance, tuple: &Path) -> Result<Outcome, CmdError> {
    let doc: TupleDocument = load_json(rep, "tuple", tuple)?;
    rep.result("n", doc.n);
    rep.result("d", doc.d);
    match doc.to_contraction(*tol) {
        Ok(t) => {
            let eye = fockmodel_core::CMatrix::identity(t.d(), t.d());
            let defect = &eye - t.phi(&eye);
            rep.result(
                "row_defect_min_eigenvalue",
                fockmodel_core::numerics::min_eigenvalue(&defect),
            );
            rep.result("row_contraction", true);
            Ok(Outcome::Computed)
        }
        Err(msg) => {
            rep.result("row_contraction", false);
            rep.result("error", msg);
            Ok(Outcome::Computed)
        }
    }
}

fn cmd_classify(
    rep: &mut Report,
    tol: &Tolerance,
    tuple: &Path,
    opts: &CommonOpts,
) -> Result<Outcome, CmdError> {
    let t = load_tuple(rep, tuple, tol)?;
    let conv_tol = tol.eq_tol * 1e-4;
    let c = t.classify(opts.horizon, conv_tol);
    rep.param("limit_conv_tol", conv_tol);
    rep.result("pure_c0", opt_bool(c.pure_c0));
    rep.result("c1", opt_bool(c.c1));
    rep.result("coisometric", c.coisometric);
    rep.result("cnc", c.cnc);
    rep.result("dim_hc", c.dim_hc);
    rep.result("power_bounded", c.power_bounded);
    rep.result("power_bound", c.power_bound);
    rep.result("limit_converged", c.limit.converged);
    rep.result("limit_iterations", c.limit.iterations);
    rep.result("limit_residual", c.limit.residual);
    let tri = t.triangulate_c_cnc()?;
    rep.result("dim_h_c", tri.h_c.dim());
    rep.result("dim_h_cnc", tri.h_cnc.dim());
    if c.limit.converged {
        let tri01 = t.triangulate_c0_c1(opts.horizon, conv_tol)?;
        rep.result("dim_h0", tri01.h_0.dim());
        rep.result("dim_h1", tri01.h_1.dim());
    }
    if c.pure_c0.is_none() {
        return Ok(Outcome::Undetermined);
    }
    Ok(Outcome::Computed)
}

fn cmd_charfn(
    rep: &mut Report,
    tol: &Tolerance,
    tuple: &Path,
    opts: &CommonOpts,
) -> Result<Outcome, CmdError> {
    let t = load_tuple(rep, tuple, tol)?;
    let theta = char_fn(&t, opts.deg)?;
    rep.result("dim_d", theta.dim_in());
    rep.result("dim_d_star", theta.dim_out());
    rep.result("truncated_norm", theta.truncated_norm(opts.deg)?);
    rep.result("intertwining_defect", theta.intertwining_defect(opts.deg)?);
    rep.result_json(
        "coefficients",
        serde_json::to_value(CoeffDump::from_op(&theta)).expect("dump serializes"),
    );
    Ok(Outcome::Computed)
}

fn cmd_dilate(
    rep: &mut Report,
    tol: &Tolerance,
    tuple: &Path,
    opts: &CommonOpts,
) -> Result<Outcome, CmdError> {
    let t = load_tuple(rep, tuple, tol)?;
    let ds = build_dilation(&t, opts.deg)?;
    rep.result("dim_k", ds.dim_k());
    rep.result("dim_h", ds.dim_h());
    rep.result("dim_defect", ds.defect_range().dim());
    rep.result("dim_l", ds.l().dim());
    rep.result("dim_l_star", ds.l_star().dim());
    rep.result("exact", ds.exact());
    rep.result("isometry_residual", ds.isometry_residual());
    rep.result(
        "moment_residual",
        dilation_moment_residual(&ds, opts.deg.saturating_sub(1).min(4)),
    );
    Ok(Outcome::Computed)
}

fn cmd_wold(
    rep: &mut Report,
    tol: &Tolerance,
    tuple: &Path,
    opts: &CommonOpts,
) -> Result<Outcome, CmdError> {
    let t = load_tuple(rep, tuple, tol)?;
    let ds = build_dilation(&t, opts.deg)?;
    rep.result("dim_k", ds.dim_k());
    let w = wold(ds.isometries(), tol, opts.horizon)?;
    rep.result("residual_dim", w.residual.dim());
    rep.result("wandering_dim", w.wandering.dim());
    rep.result("iterations", w.iterations);
    rep.result("identity_residual", w.identity_residual);
    Ok(Outcome::Computed)
}

fn cmd_model(
    rep: &mut Report,
    tol: &Tolerance,
    tuple: &Path,
    opts: &CommonOpts,
) -> Result<Outcome, CmdError> {
    let t = load_tuple(rep, tuple, tol)?;
    let moment_margin = 3;
    rep.param("moment_margin", moment_margin);
    let out = model_of_t(&t, opts.deg, moment_margin, tol)?;
    rep.result("dim_k_bold", out.model.space.dim_k_bold());
    rep.result("dim_h_bold", out.model.space.dim_h_bold());
    rep.result("defect_closure_dim", out.model.space.defect_closure.dim());
    rep.result("invariance_residual", out.model.invariance_residual);
    rep.result("embedding_image_residual", out.embedding.image_residual);
    rep.result("embedding_isometry_residual", out.embedding.isometry_residual);
    rep.result("moment_residual", out.moment_residual);
    Ok(Outcome::Computed)
}

fn cmd_factorize_check(
    rep: &mut Report,
    tol: &Tolerance,
    theta1: &Path,
    theta2: &Path,
    opts: &CommonOpts,
) -> Result<Outcome, CmdError> {
    let t1 = load_theta(rep, "theta1", theta1)?;
    let t2 = load_theta(rep, "theta2", theta2)?;
    let f = build_x(&t1, &t2, opts.deg, tol)?;
    let (r, r2, r1) = f.dims();
    rep.result("regular", f.regular);
    rep.result("rank_defect_theta", r);
    rep.result("rank_defect_theta2", r2);
    rep.result("rank_defect_theta1", r1);
    rep.result("rank_deficit", f.rank_deficit);
    rep.result("isometry_residual", f.isometry_residual);
    let s = regularity_shortcuts(&t1, &t2, opts.deg, tol)?;
    rep.result("theta2_inner", s.theta2_inner);
    rep.result("theta_inner", s.theta_inner);
    rep.result("rank_additivity", s.rank_additivity);
    Ok(Outcome::Computed)
}

fn cmd_invariant_to_factor(
    rep: &mut Report,
    tol: &Tolerance,
    tuple: &Path,
    subspace: &Path,
    opts: &CommonOpts,
) -> Result<Outcome, CmdError> {
    let t = load_tuple(rep, tuple, tol)?;
    let sub_doc: SubspaceDocument = load_json(rep, "subspace", subspace)?;
    let h1 = sub_doc.to_subspace(tol).map_err(CmdError::Input)?;
    let itf = factorization_from_subspace(&t, &h1, opts.deg, tol)?;
    rep.result("dim_q", itf.dim_q);
    rep.result("regular", itf.factorization.regular);
    rep.result("product_residual", itf.product_residual);
    rep.result("product_margin", itf.product_margin);
    rep.result("isometry_residual", itf.factorization.isometry_residual);
    let d = round_trip_subspace_distance(&itf, &h1, tol)?;
    rep.result("round_trip_distance", d);
    rep.result_json(
        "theta1",
        serde_json::to_value(CoeffDump::from_op(&itf.factorization.theta1)).expect("serializes"),
    );
    rep.result_json(
        "theta2",
        serde_json::to_value(CoeffDump::from_op(&itf.factorization.theta2)).expect("serializes"),
    );
    Ok(Outcome::Computed)
}

fn cmd_factor_to_invariant(
    rep: &mut Report,
    tol: &Tolerance,
    theta1: &Path,
    theta2: &Path,
    opts: &CommonOpts,
    emit_bases: bool,
) -> Result<Outcome, CmdError> {
    let t1 = load_theta(rep, "theta1", theta1)?;
    let t2 = load_theta(rep, "theta2", theta2)?;
    let f = build_x(&t1, &t2, opts.deg, tol)?;
    rep.result("regular", f.regular);
    if !f.regular {
        rep.result("rank_deficit", f.rank_deficit);
        return Ok(Outcome::Computed);
    }
    let fs = subspaces_from_factorization(&f, tol)?;
    rep.result("dim_h_bold", fs.model.space.dim_h_bold());
    rep.result("dim_h1_bold", fs.h1_bold.dim());
    rep.result("dim_h2_bold", fs.h2_bold.dim());
    rep.result("invariance_residual", fs.invariance_residual);
    rep.result("complement_residual", fs.complement_residual);
    rep.result("eq_def_residual", fs.eq_def_residual);
    if emit_bases {
        rep.result_json(
            "h1_basis",
            serde_json::to_value(SubspaceDocument::from_subspace(&fs.h1_bold))
                .expect("serializes"),
        );
        rep.result_json(
            "h2_basis",
            serde_json::to_value(SubspaceDocument::from_subspace(&fs.h2_bold))
                .expect("serializes"),
        );
    }
    Ok(Outcome::Computed)
}

fn cmd_compare_factors(
    rep: &mut Report,
    tol: &Tolerance,
    theta1: &Path,
    theta2: &Path,
    theta1_other: &Path,
    theta2_other: &Path,
    opts: &CommonOpts,
) -> Result<Outcome, CmdError> {
    let t1 = load_theta(rep, "theta1", theta1)?;
    let t2 = load_theta(rep, "theta2", theta2)?;
    let u1 = load_theta(rep, "theta1_other", theta1_other)?;
    let u2 = load_theta(rep, "theta2_other", theta2_other)?;
    let f = build_x(&t1, &t2, opts.deg, tol)?;
    let g = build_x(&u1, &u2, opts.deg, tol)?;
    match compare_factorizations(&f, &g, tol) {
        Ok(cmp) => {
            let rel = match cmp.relation {
                FactorRelation::Equal => "equal",
                FactorRelation::FirstInsideSecond => "first-inside-second",
                FactorRelation::SecondInsideFirst => "second-inside-first",
            };
            rep.result("relation", rel);
            rep.result("psi_unitary_constant", cmp.psi_is_unitary_constant);
            rep.result("connect_residual", cmp.connect_residual);
            rep.result_json(
                "psi",
                serde_json::to_value(CoeffDump::from_op(&cmp.psi)).expect("serializes"),
            );
            Ok(Outcome::Computed)
        }
        Err(CoreError::NotComparable { residual }) => {
            rep.result("relation", "incomparable");
            rep.result("containment_residual", residual);
            Ok(Outcome::Computed)
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_inner_outer(
    rep: &mut Report,
    tol: &Tolerance,
    theta: &Path,
    opts: &CommonOpts,
) -> Result<Outcome, CmdError> {
    let op = load_theta(rep, "theta", theta)?;
    let f = op.inner_outer_factorize(opts.deg, tol)?;
    rep.result("wandering_dim", f.wandering_dim);
    rep.result("range_dim", f.range_dim);
    rep.result("product_residual", f.product_residual);
    rep.result("product_margin", f.product_margin);
    rep.result("outer_dense", f.outer_dense);
    rep.result_json(
        "inner",
        serde_json::to_value(CoeffDump::from_op(&f.inner)).expect("serializes"),
    );
    rep.result_json(
        "outer",
        serde_json::to_value(CoeffDump::from_op(&f.outer)).expect("serializes"),
    );
    Ok(Outcome::Computed)
}

fn cmd_similarity(
    rep: &mut Report,
    tol: &Tolerance,
    tuple: &Path,
    opts: &CommonOpts,
) -> Result<Outcome, CmdError> {
    let mats = load_tuple_matrices(rep, tuple)?;
    let report = similarity_to_cuntz(&mats, opts.horizon, tol)?;
    rep.result("similar", opt_bool(report.similar));
    rep.result(
        "obstruction",
        match report.obstruction {
            Some(SimilarityObstruction::Injectivity) => "injectivity",
            Some(SimilarityObstruction::NotPowerBounded) => "not-power-bounded",
            Some(SimilarityObstruction::LowerBound) => "lower-bound",
            None => "none",
        },
    );
    rep.result("lower_bound", report.lower_bound);
    if let Some(c) = report.cond_x {
        rep.result("cond_x", c);
    }
    if let Some(r) = report.cuntz_residual {
        rep.result("cuntz_residual", r);
    }
    if let Some(r) = report.intertwining_residual {
        rep.result("intertwining_residual", r);
    }
    if let Some(r) = report.fixed_point_residual {
        rep.result("fixed_point_residual", r);
    }
    if let Some(p) = &report.p {
        rep.result_json("p", matrix_json(p));
    }
    if let Some(x) = &report.x {
        rep.result_json("x", matrix_json(x));
    }
    for (i, w) in report.w.iter().enumerate() {
        rep.result_json(&format!("w{}", i + 1), matrix_json(w));
    }
    if report.similar.is_none() {
        return Ok(Outcome::Undetermined);
    }
    Ok(Outcome::Computed)
}

fn opt_bool(v: Option<bool>) -> serde_json::Value {
    match v {
        Some(b) => serde_json::Value::Bool(b),
        None => serde_json::Value::Null,
    }
}
