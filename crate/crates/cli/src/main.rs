//! `qguess`: compute entropies, guesswork moments, moment bounds, redundancy
//! and minimax solutions on JSON pmfs, and run the verification sweeps.
//!
//! Exit codes: 0 success, 2 parse/input errors, 3 domain errors, 4
//! verification failure, 5 solver non-convergence.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qguess::bounds::{
    check_mismatch2, check_mismatch3, check_mismatch_sandwich, check_theorem1, check_theorem2,
    check_theorem3, BoundReport,
};
use qguess::entropy::{
    clne, clne_diag, kl, lne, lne_diag, relative_ab, relative_ab_cond, renyi, shannon,
    SINGULARITY_TOL,
};
use qguess::guessing::{optimal_strategy_joint, q_moment};
use qguess::minimax::solve_minimax;
use qguess::verify::run_sweep;
use qguess::{
    AlphaBeta, Error, GuessingStrategy, JointPmf, NEParams, Pmf, SolverConfig, SourceFamily,
    SweepConfig,
};

#[derive(Parser)]
#[command(name = "qguess", version, about = "Guesswork moments, escort strategies and moment bounds under q-normalized expectations")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate an entropy or divergence measure on JSON pmf files.
    Entropy(EntropyArgs),
    /// Print the optimal (escort-ordered) guessing strategy for a source.
    Guess(GuessArgs),
    /// E_q[G^rho] of a strategy (optimal by default) under a source.
    Moment(MomentArgs),
    /// Moment-bound reports (CSV rows) for the applicable theorems.
    Bound(BoundArgs),
    /// Redundancy R_q(P,G) of a strategy against the optimal one.
    Redundancy(RedundancyArgs),
    /// Solve the minimax-redundancy problem over a source family.
    Minimax(MinimaxArgs),
    /// Run the verification sweep; nonzero exit iff any check fails.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Measure {
    Shannon,
    Renyi,
    Lne,
    Clne,
    Kl,
    Relab,
    #[value(name = "relab-cond")]
    RelabCond,
}

#[derive(Args)]
struct EntropyArgs {
    /// Measure to evaluate.
    #[arg(value_enum)]
    measure: Measure,
    /// Input file(s): one pmf/joint, or two for kl/relab/relab-cond.
    #[arg(required = true)]
    files: Vec<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    /// Sweep alpha over START:STOP:COUNT and emit CSV instead of one value.
    #[arg(long)]
    grid: Option<String>,
    /// Write output (value or CSV) to a file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report in bits (divide nats by ln 2).
    #[arg(long)]
    bits: bool,
    /// Print full round-trip precision instead of 12 significant digits.
    #[arg(long)]
    exact: bool,
}

#[derive(Args)]
struct GuessArgs {
    file: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    q: f64,
    /// Write the strategy JSON here in addition to the printed table.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MomentArgs {
    file: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    q: f64,
    #[arg(long)]
    rho: f64,
    /// Strategy JSON; the optimal strategy for q when omitted.
    #[arg(long)]
    strategy: Option<PathBuf>,
    #[arg(long)]
    exact: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TheoremPick {
    T1,
    T2,
    T3,
    M1,
    M2,
    M3,
}

#[derive(Args)]
struct BoundArgs {
    file: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    q: f64,
    #[arg(long)]
    rho: f64,
    /// Restrict to one theorem (default: all applicable).
    #[arg(long, value_enum)]
    theorem: Option<TheoremPick>,
    /// Mismatched source Q for the M1/M3 bounds.
    #[arg(long)]
    mismatch: Option<PathBuf>,
    /// Strategy JSON for the arbitrary-strategy bounds (T1/T2/M2/M3).
    #[arg(long)]
    strategy: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RedundancyArgs {
    file: PathBuf,
    #[arg(long)]
    strategy: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    q: f64,
    #[arg(long)]
    rho: f64,
    #[arg(long)]
    exact: bool,
}

#[derive(Args)]
struct MinimaxArgs {
    family: PathBuf,
    #[arg(long)]
    q: f64,
    #[arg(long)]
    rho: f64,
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 100_000)]
    max_iters: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Write the result JSON here (stdout otherwise).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// SweepConfig JSON; built-in defaults when omitted.
    config: Option<PathBuf>,
    #[arg(long)]
    out_csv: Option<PathBuf>,
    #[arg(long)]
    out_summary: Option<PathBuf>,
}

/// Failure paths mapped onto the documented exit codes.
enum Failure {
    Input(String),
    Domain(Error),
    Verification(usize),
    NonConvergence,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Domain(_) => 3,
            Failure::Verification(_) => 4,
            Failure::NonConvergence => 5,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(m) => write!(f, "{m}"),
            Failure::Domain(e) => write!(f, "{e}"),
            Failure::Verification(n) => write!(f, "verification failed: {n} check failure(s)"),
            Failure::NonConvergence => write!(f, "NonConvergence: solver did not reach tolerance"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(_) => Failure::Input(e.to_string()),
            other => Failure::Domain(other),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Entropy(a) => cmd_entropy(a),
        Cmd::Guess(a) => cmd_guess(a),
        Cmd::Moment(a) => cmd_moment(a),
        Cmd::Bound(a) => cmd_bound(a),
        Cmd::Redundancy(a) => cmd_redundancy(a),
        Cmd::Minimax(a) => cmd_minimax(a),
        Cmd::Verify(a) => cmd_verify(a),
    }
}

// ---------------------------------------------------------------------------
// file loading

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))
}

fn load_pmf(path: &Path) -> Result<Pmf, Failure> {
    serde_json::from_str(&read_file(path)?)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_joint(path: &Path) -> Result<JointPmf, Failure> {
    serde_json::from_str(&read_file(path)?)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_strategy(path: &Path) -> Result<GuessingStrategy, Failure> {
    serde_json::from_str(&read_file(path)?)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

/// A source file is a pmf or a joint; the joint schema carries `x_labels`.
fn load_source(path: &Path) -> Result<JointPmf, Failure> {
    let text = read_file(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    if value.get("x_labels").is_some() {
        serde_json::from_value(value).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
    } else {
        let pmf: Pmf = serde_json::from_value(value)
            .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        Ok(pmf.to_joint())
    }
}

fn write_or_print(out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn format_value(v: f64, bits: bool, exact: bool) -> String {
    let v = if bits { v / std::f64::consts::LN_2 } else { v };
    if exact {
        format!("{v}")
    } else {
        format!("{v:.12}")
    }
}

// ---------------------------------------------------------------------------
// subcommands

fn need_beta(a: &EntropyArgs) -> Result<f64, Failure> {
    a.beta.ok_or_else(|| Failure::Input("--beta is required for this measure".into()))
}

fn eval_measure(a: &EntropyArgs, alpha_override: Option<f64>) -> Result<f64, Failure> {
    let alpha = alpha_override.or(a.alpha);
    let one_file = |idx: usize| -> &PathBuf { &a.files[idx] };
    let value = match a.measure {
        Measure::Shannon => shannon(&load_pmf(one_file(0))?),
        Measure::Renyi => {
            let al = alpha.ok_or_else(|| Failure::Input("--alpha is required".into()))?;
            renyi(&load_pmf(one_file(0))?, al)?
        }
        Measure::Lne => {
            let al = alpha.ok_or_else(|| Failure::Input("--alpha is required".into()))?;
            let be = need_beta(a)?;
            let p = load_pmf(one_file(0))?;
            if (be - al).abs() < SINGULARITY_TOL {
                lne_diag(&p, al)?
            } else {
                lne(&p, AlphaBeta::new(al, be)?)?
            }
        }
        Measure::Clne => {
            let al = alpha.ok_or_else(|| Failure::Input("--alpha is required".into()))?;
            let be = need_beta(a)?;
            let j = load_joint(one_file(0))?;
            if (be - al).abs() < SINGULARITY_TOL {
                clne_diag(&j, al)?
            } else {
                clne(&j, AlphaBeta::new(al, be)?)?
            }
        }
        Measure::Kl => {
            require_files(a, 2)?;
            kl(&load_pmf(one_file(0))?, &load_pmf(one_file(1))?)?
        }
        Measure::Relab => {
            require_files(a, 2)?;
            let al = alpha.ok_or_else(|| Failure::Input("--alpha is required".into()))?;
            let ab = AlphaBeta::new(al, need_beta(a)?)?;
            relative_ab(&load_pmf(one_file(0))?, &load_pmf(one_file(1))?, ab)?
        }
        Measure::RelabCond => {
            require_files(a, 2)?;
            let al = alpha.ok_or_else(|| Failure::Input("--alpha is required".into()))?;
            let ab = AlphaBeta::new(al, need_beta(a)?)?;
            relative_ab_cond(&load_joint(one_file(0))?, &load_joint(one_file(1))?, ab)?
        }
    };
    Ok(value)
}

fn require_files(a: &EntropyArgs, n: usize) -> Result<(), Failure> {
    if a.files.len() != n {
        return Err(Failure::Input(format!(
            "this measure takes exactly {n} input file(s), got {}",
            a.files.len()
        )));
    }
    Ok(())
}

fn cmd_entropy(a: EntropyArgs) -> Result<(), Failure> {
    if a.files.is_empty() {
        return Err(Failure::Input("at least one input file is required".into()));
    }
    if matches!(a.measure, Measure::Shannon | Measure::Renyi | Measure::Lne | Measure::Clne) {
        require_files(&a, 1)?;
    }
    match &a.grid {
        None => {
            let v = eval_measure(&a, None)?;
            write_or_print(&a.out, &format_value(v, a.bits, a.exact))
        }
        Some(spec) => {
            if matches!(a.measure, Measure::Shannon | Measure::Kl) {
                return Err(Failure::Input("--grid needs a measure with an --alpha order".into()));
            }
            let (start, stop, count) = parse_grid(spec)?;
            let mut csv = String::from("alpha,value\n");
            for i in 0..count {
                let t = if count == 1 { 0.0 } else { i as f64 / (count - 1) as f64 };
                let alpha = start + t * (stop - start);
                let v = eval_measure(&a, Some(alpha))?;
                let v = if a.bits { v / std::f64::consts::LN_2 } else { v };
                csv.push_str(&format!("{alpha},{v}\n"));
            }
            write_or_print(&a.out, csv.trim_end())
        }
    }
}

fn parse_grid(spec: &str) -> Result<(f64, f64, usize), Failure> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Failure::Input("grid must be START:STOP:COUNT".into()));
    }
    let start: f64 = parts[0].parse().map_err(|_| Failure::Input("bad grid start".into()))?;
    let stop: f64 = parts[1].parse().map_err(|_| Failure::Input("bad grid stop".into()))?;
    let count: usize = parts[2].parse().map_err(|_| Failure::Input("bad grid count".into()))?;
    if count == 0 {
        return Err(Failure::Input("grid count must be positive".into()));
    }
    Ok((start, stop, count))
}

fn cmd_guess(a: GuessArgs) -> Result<(), Failure> {
    if !a.q.is_finite() {
        return Err(Failure::Input("--q must be finite".into()));
    }
    let j = load_source(&a.file)?;
    let g = optimal_strategy_joint(&j, a.q);
    println!("y\trank\tx");
    for (yi, y) in g.y_labels().iter().enumerate() {
        let mut order: Vec<usize> = (0..g.x_len()).collect();
        order.sort_by_key(|&xi| g.rank(yi, xi));
        for xi in order {
            println!("{y}\t{}\t{}", g.rank(yi, xi), j.x_labels()[xi]);
        }
    }
    if let Some(path) = &a.out {
        let text = serde_json::to_string_pretty(&g)
            .map_err(|e| Failure::Input(format!("serialize: {e}")))?;
        fs::write(path, text)
            .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn cmd_moment(a: MomentArgs) -> Result<(), Failure> {
    let j = load_source(&a.file)?;
    let params = NEParams::new(a.q, a.rho)?;
    let g = match &a.strategy {
        Some(path) => load_strategy(path)?,
        None => optimal_strategy_joint(&j, a.q),
    };
    let v = q_moment(&g, &j, &params)?;
    println!("{}", format_value(v, false, a.exact));
    Ok(())
}

fn cmd_bound(a: BoundArgs) -> Result<(), Failure> {
    let j = load_source(&a.file)?;
    let params = NEParams::new(a.q, a.rho)?;
    let strategy = match &a.strategy {
        Some(path) => Some(load_strategy(path)?),
        None => None,
    };
    let unconditional = j.y_len() == 1;
    let g_any = strategy.clone().unwrap_or_else(|| optimal_strategy_joint(&j, a.q));

    let mut reports: Vec<BoundReport> = Vec::new();
    let want = |pick: TheoremPick| a.theorem.is_none() || a.theorem == Some(pick);
    if want(TheoremPick::T1) && unconditional {
        let p = j.conditional_by_index(0);
        reports.push(check_theorem1(&p, &g_any, &params)?);
    }
    if want(TheoremPick::T2) && !unconditional {
        reports.push(check_theorem2(&j, &g_any, &params)?);
    }
    if want(TheoremPick::T3) {
        reports.push(check_theorem3(&j, &params)?);
    }
    if let Some(mismatch) = &a.mismatch {
        let qj = load_source(mismatch)?;
        if want(TheoremPick::M1) {
            reports.push(check_mismatch_sandwich(&j, &qj, &params)?);
        }
        if want(TheoremPick::M2) {
            reports.push(check_mismatch2(&j, &g_any, &params)?);
        }
        if want(TheoremPick::M3) && params.q() > 0.0 {
            reports.push(check_mismatch3(&j, &g_any, &params)?);
        }
    } else if matches!(a.theorem, Some(TheoremPick::M1 | TheoremPick::M3)) {
        return Err(Failure::Input("--mismatch FILE is required for the M1/M3 bounds".into()));
    } else if want(TheoremPick::M2) && a.theorem == Some(TheoremPick::M2) {
        reports.push(check_mismatch2(&j, &g_any, &params)?);
    }
    if reports.is_empty() {
        return Err(Failure::Input("no applicable theorem for this source/flag combination".into()));
    }

    let mut out = String::from(BoundReport::csv_header());
    for rep in &reports {
        out.push('\n');
        out.push_str(&rep.csv_row(j.x_len(), j.y_len(), 0));
    }
    write_or_print(&a.out, &out)
}

fn cmd_redundancy(a: RedundancyArgs) -> Result<(), Failure> {
    let j = load_source(&a.file)?;
    let params = NEParams::new(a.q, a.rho)?;
    let g = load_strategy(&a.strategy)?;
    let v = qguess::bounds::redundancy(&j, &g, &params)?;
    println!("{}", format_value(v, false, a.exact));
    Ok(())
}

fn cmd_minimax(a: MinimaxArgs) -> Result<(), Failure> {
    let family: SourceFamily = serde_json::from_str(&read_file(&a.family)?)
        .map_err(|e| Failure::Input(format!("{}: {e}", a.family.display())))?;
    let params = NEParams::new(a.q, a.rho)?;
    let config = SolverConfig { restarts: a.restarts, tol: a.tol, max_iters: a.max_iters, seed: a.seed };
    let res = solve_minimax(&family, &params, &config)?;
    let text = serde_json::to_string_pretty(&res)
        .map_err(|e| Failure::Input(format!("serialize: {e}")))?;
    write_or_print(&a.out, &text)?;
    if !res.converged {
        return Err(Failure::NonConvergence);
    }
    Ok(())
}

fn cmd_verify(a: VerifyArgs) -> Result<(), Failure> {
    let config: SweepConfig = match &a.config {
        Some(path) => serde_json::from_str(&read_file(path)?)
            .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?,
        None => SweepConfig::default(),
    };
    config.validate()?;
    let report = run_sweep(&config)?;
    if let Some(path) = &a.out_csv {
        fs::write(path, &report.csv)
            .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))?;
    }
    let summary = report.summary_json();
    if let Some(path) = &a.out_summary {
        fs::write(path, &summary)
            .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))?;
    }
    println!("{summary}");
    let failures = report.failures_total();
    if failures > 0 {
        return Err(Failure::Verification(failures));
    }
    Ok(())
}
