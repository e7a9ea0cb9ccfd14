//! Command-line frontend: `gen-mexhat`, `synth`, `fit`, `reduce`, `compare`.
//!
//! Exit codes: 0 on success, 1 on numerical failure, 2 on usage, IO or
//! parse errors.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::backward::{naive_truncation, reduce, StoppingRule};
use crate::dictionary::{demo_grid, mexican_hat_dictionary, AtomId, Dictionary, DEMO_CENTERS};
use crate::error::{Error, Result};
use crate::forward::{build_duals, Approximation, DualState, ForwardOptions, DEFAULT_DEP_TOL};
use crate::oracle::GramSystem;
use crate::space::{norm_sq, num17, write_file, Grid, Signal};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "biortho", version, about = "Adaptive biorthogonalization of atom dictionaries")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a dictionary of unit-norm Mexican-hat atoms as wide CSV.
    GenMexhat(GenMexhatArgs),
    /// Write the signal `Σ cₙ αₙ` for given coefficients.
    Synth(SynthArgs),
    /// Project a signal onto a dictionary and write its coefficients.
    Fit(FitArgs),
    /// Remove atoms one at a time, adapting the remaining coefficients.
    Reduce(ReduceArgs),
    /// Compare naive truncation against adapted coefficients.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct GenMexhatArgs {
    /// Grid as `min:max:points`.
    #[arg(long, default_value = "-4:4:801", allow_hyphen_values = true)]
    pub grid: String,
    /// Comma-separated centers; defaults to 0,1,-1,…,6,-6.
    #[arg(long, allow_hyphen_values = true)]
    pub centers: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub dict: PathBuf,
    /// Comma-separated coefficients, one per atom.
    #[arg(long, allow_hyphen_values = true, required_unless_present = "demo")]
    pub coeffs: Option<String>,
    /// Use the 13 demonstration coefficients.
    #[arg(long, conflicts_with = "coeffs")]
    pub demo: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long)]
    pub dict: PathBuf,
    #[arg(long)]
    pub signal: PathBuf,
    /// Absorb atoms by largest residual norm when building the duals.
    #[arg(long)]
    pub pivoting: bool,
    #[arg(long, default_value_t = DEFAULT_DEP_TOL)]
    pub dep_tol: f64,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Coefficients JSON.
    #[arg(long)]
    pub out: PathBuf,
    /// CSV with columns `t,f,approx`.
    #[arg(long)]
    pub curves: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Strategy {
    MinImpact,
    Explicit,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value_t = Strategy::MinImpact)]
    pub strategy: Strategy,
    /// Comma-separated atom ids, for `--strategy explicit`.
    #[arg(long)]
    pub remove: Option<String>,
    /// Residual budget δ on `‖f_N − f⁽ᵏ⁾‖²`.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub target_count: Option<usize>,
    /// Reduction trace JSON.
    #[arg(long)]
    pub trace: PathBuf,
    /// Final approximant as `t,value` CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Comma-separated atom ids to drop; empty drops nothing.
    #[arg(long, default_value = "")]
    pub remove: String,
    /// CSV with columns `t,f,truncated,adapted`.
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli.command) {
        Ok(report) => {
            print!("{report}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_USAGE
    }
}

/// Runs a parsed command and returns the text it reports on stdout.
pub fn execute(cmd: &Command) -> Result<String> {
    match cmd {
        Command::GenMexhat(a) => gen_mexhat(a),
        Command::Synth(a) => synth(a),
        Command::Fit(a) => fit(a),
        Command::Reduce(a) => reduce_cmd(a),
        Command::Compare(a) => compare(a),
    }
}

/// Parses `min:max:points`.
pub fn parse_grid(spec: &str) -> Result<Grid> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::InvalidArgument(format!("grid must be min:max:points, got {spec:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let t_min: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let t_max: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    Grid::new(t_min, t_max, n)
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| Error::InvalidArgument(format!("bad {what} {s:?}")))
        })
        .collect()
}

fn parse_ids(text: &str) -> Result<Vec<AtomId>> {
    Ok(parse_list::<usize>(text, "atom id")?
        .into_iter()
        .map(AtomId)
        .collect())
}

fn gen_mexhat(a: &GenMexhatArgs) -> Result<String> {
    let grid = parse_grid(&a.grid)?;
    let centers = match &a.centers {
        Some(text) => parse_list::<f64>(text, "center")?,
        None => DEMO_CENTERS.to_vec(),
    };
    let dict = mexican_hat_dictionary(grid, &centers)?;
    dict.save_csv(&a.out)?;
    let sys = GramSystem::new(&dict);
    Ok(format!(
        "atoms: {}\ngram condition estimate: {:.6e}\n",
        dict.len(),
        sys.condition_estimate
    ))
}

fn synth(a: &SynthArgs) -> Result<String> {
    let dict = Dictionary::load_csv(&a.dict)?;
    let coeffs = match &a.coeffs {
        Some(text) => parse_list::<f64>(text, "coefficient")?,
        None => crate::dictionary::DEMO_COEFFICIENTS.to_vec(),
    };
    let f = dict.synthesize(&coeffs)?;
    f.save_csv(&a.out)?;
    Ok(format!("samples: {}\nnorm_sq: {}\n", f.len(), num17::format(norm_sq(&f))))
}

struct Model {
    state: DualState,
    approx: Approximation,
}

fn load_model(m: &ModelArgs) -> Result<Model> {
    let dict = Dictionary::load_csv(&m.dict)?;
    let f = Signal::load_csv(&m.signal)?;
    if f.grid() != dict.grid() {
        return Err(Error::GridMismatch(format!(
            "signal {} is on {}, dictionary {} on {}",
            m.signal.display(),
            f.grid(),
            m.dict.display(),
            dict.grid()
        )));
    }
    let opts = ForwardOptions {
        dep_tol: m.dep_tol,
        pivoting: m.pivoting,
    };
    let state = build_duals(&dict, &opts)?;
    let approx = state.fit(&f)?;
    Ok(Model { state, approx })
}

fn write_columns(path: &Path, header: &str, grid: &Grid, columns: &[&Signal]) -> Result<()> {
    let mut out = String::with_capacity(grid.n_points() * 25 * (columns.len() + 1));
    out.push_str(header);
    out.push('\n');
    for (k, t) in grid.abscissae().enumerate() {
        out.push_str(&num17::format(t));
        for c in columns {
            out.push(',');
            out.push_str(&num17::format(c.values()[k]));
        }
        out.push('\n');
    }
    write_file(path, out.as_bytes())
}

fn fit(a: &FitArgs) -> Result<String> {
    let Model { state, approx } = load_model(&a.model)?;

    #[derive(Serialize)]
    struct Entry<'a> {
        id: AtomId,
        label: &'a str,
        #[serde(serialize_with = "num17::real")]
        coeff: f64,
        #[serde(serialize_with = "num17::real")]
        dual_norm_sq: f64,
    }
    #[derive(Serialize)]
    struct Report<'a> {
        #[serde(serialize_with = "num17::real")]
        approx_norm_sq: f64,
        #[serde(serialize_with = "num17::real")]
        residual_sq: f64,
        atoms: Vec<Entry<'a>>,
    }

    let residual_sq = approx.residual_sq(&state)?;
    let atoms = state
        .dictionary()
        .atoms()
        .iter()
        .zip(approx.coeffs())
        .zip(state.dual_norm_sq())
        .map(|((atom, &coeff), &dual_norm_sq)| Entry {
            id: atom.id(),
            label: atom.label(),
            coeff,
            dual_norm_sq,
        })
        .collect();
    let report = Report {
        approx_norm_sq: approx.approx_norm_sq(),
        residual_sq,
        atoms,
    };
    let json = serde_json::to_string_pretty(&report)? + "\n";
    write_file(&a.out, json.as_bytes())?;

    if let Some(path) = &a.curves {
        let fitted = approx.approximant(&state)?;
        write_columns(path, "t,f,approx", state.grid(), &[approx.signal(), &fitted])?;
    }
    Ok(format!("residual_sq: {}\n", num17::format(residual_sq)))
}

fn stopping_rule(a: &ReduceArgs) -> Result<StoppingRule> {
    match a.strategy {
        Strategy::Explicit => {
            if a.delta.is_some() || a.target_count.is_some() {
                return Err(Error::InvalidArgument(
                    "--strategy explicit takes --remove only, not --delta or --target-count".into(),
                ));
            }
            let text = a.remove.as_deref().ok_or_else(|| {
                Error::InvalidArgument("--strategy explicit needs --remove".into())
            })?;
            Ok(StoppingRule::ExplicitOrder(parse_ids(text)?))
        }
        Strategy::MinImpact => {
            if a.remove.is_some() {
                return Err(Error::InvalidArgument(
                    "--remove requires --strategy explicit".into(),
                ));
            }
            match (a.delta, a.target_count) {
                (Some(d), None) => {
                    if !(d >= 0.0) {
                        return Err(Error::InvalidArgument(format!("--delta must be >= 0, got {d}")));
                    }
                    Ok(StoppingRule::ResidualBudget(d))
                }
                (None, Some(m)) => Ok(StoppingRule::TargetCount(m)),
                _ => Err(Error::InvalidArgument(
                    "give exactly one of --delta or --target-count".into(),
                )),
            }
        }
    }
}

fn reduce_cmd(a: &ReduceArgs) -> Result<String> {
    let rule = stopping_rule(a)?;
    let Model { state, approx } = load_model(&a.model)?;
    let residual0 = approx.residual_sq(&state)?;
    let (final_state, final_approx, trace) = reduce(&state, &approx, &rule)?;
    write_file(&a.trace, trace.to_json()?.as_bytes())?;
    if let Some(path) = &a.out {
        final_approx.approximant(&final_state)?.save_csv(path)?;
    }
    let removed: Vec<String> = trace.removed_ids().iter().map(|id| id.to_string()).collect();
    Ok(format!(
        "removed: [{}]\nstopped: {:?}\ncumulative_impact: {}\ndistance_to_signal_sq: {}\n",
        removed.join(","),
        trace.stopped_reason,
        num17::format(trace.cumulative_impact()),
        num17::format(residual0 + trace.cumulative_impact()),
    ))
}

fn compare(a: &CompareArgs) -> Result<String> {
    let dropped = parse_ids(&a.remove)?;
    let Model { state, approx } = load_model(&a.model)?;
    let truncated = naive_truncation(&state, &approx, &dropped)?;
    let (final_state, final_approx, _) =
        reduce(&state, &approx, &StoppingRule::ExplicitOrder(dropped))?;
    let adapted = final_approx.approximant(&final_state)?;
    let f = approx.signal();
    write_columns(&a.out, "t,f,truncated,adapted", state.grid(), &[f, &truncated, &adapted])?;
    let trunc_err = norm_sq(&f.sub(&truncated)?);
    let adapt_err = norm_sq(&f.sub(&adapted)?);
    Ok(format!(
        "truncated_error_sq: {}\nadapted_error_sq: {}\n",
        num17::format(trunc_err),
        num17::format(adapt_err)
    ))
}

/// Default demonstration grid spec, matching [`demo_grid`].
pub fn default_grid_spec() -> String {
    let g = demo_grid();
    format!("{}:{}:{}", g.t_min(), g.t_max(), g.n_points())
}
