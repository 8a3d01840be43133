//! `hjb-lab` command line.
//!
//! Exit status: 0 on success (a stalled run is a successful outcome), 2 on
//! usage errors, 1 on I/O failures.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::bench::{self, standard_test, write_atomic, ReferenceCache, DEFAULT_REF_GRID};
use crate::error::{Error, Result};
use crate::grid::{Bounds, Grid};
use crate::problems::{Catalog, ControlSet, Params, Problem, DEFAULT_CONTROLS};
use crate::schemes::Scheme;
use crate::solvers::{
    solve, Marcher, Method, SolverConfig, SolverReport, DEFAULT_SIGMA, DEFAULT_TOL, DEFAULT_TOL_EXACT,
};
use crate::verify::{cons_dependency_cycle, current_updates, diagnose_iso, extract_optimal_field, ReferenceSolution};

#[derive(Debug, Parser)]
#[command(name = "hjb-lab", version, about = "Minimum-time HJB solvers and single-pass method verification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one problem with one method and dump the field.
    Solve(SolveArgs),
    /// Run SDM or DM against a same-grid reference; dump a snapshot on stall.
    Verify(VerifyArgs),
    /// Regenerate the comparison tables as CSV.
    Bench(BenchArgs),
    /// Flag nodes where characteristics and gradient lines leave the same quadrant.
    Diagnose(DiagnoseArgs),
}

#[derive(Debug, Args, Clone)]
pub struct ProblemArgs {
    /// HJB-A, HJB-B, HJB-C, HJB-D or HJB-E.
    #[arg(long, value_parser = parse_catalog)]
    pub problem: Catalog,
    /// Anisotropy coefficient lambda (HJB-C/D/E).
    #[arg(long, default_value_t = 6.0, allow_negative_numbers = true)]
    pub lambda: f64,
    /// Anisotropy coefficient mu (HJB-C/D/E).
    #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
    pub mu: f64,
    /// Slope of the fast region in HJB-D.
    #[arg(long, default_value_t = 0.02)]
    pub eps: f64,
    /// Number of control directions on the unit circle.
    #[arg(long, default_value_t = DEFAULT_CONTROLS)]
    pub nc: usize,
    /// Nodes per side.
    #[arg(long, default_value_t = 101)]
    pub grid: usize,
    /// Local scheme: sl2p or sl3p.
    #[arg(long, default_value = "sl3p")]
    pub scheme: Scheme,
    /// Half-width of the square domain [-h, h]^2.
    #[arg(long, default_value_t = 2.0)]
    pub half_width: f64,
}

impl ProblemArgs {
    fn problem(&self) -> Problem {
        Problem::catalog(
            self.problem,
            Params {
                lambda: self.lambda,
                mu: self.mu,
                eps: self.eps,
            },
        )
    }

    fn grid(&self, problem: &Problem) -> Result<Grid> {
        let mut g = Grid::new(Bounds::centered(self.half_width), self.grid)?;
        g.embed_target(&problem.target)?;
        Ok(g)
    }
}

#[derive(Debug, Args, Clone)]
pub struct TolArgs {
    /// Stopping threshold of ITM/FSM (max nodal change per iteration).
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Safeness tolerance sigma.
    #[arg(long, default_value_t = DEFAULT_SIGMA)]
    pub sigma: f64,
    /// Relative tolerance of the exact-node test.
    #[arg(long, default_value_t = DEFAULT_TOL_EXACT)]
    pub tol_exact: f64,
    /// Iteration/sweep cap for ITM/FSM (default 10 N).
    #[arg(long)]
    pub max_iter: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub tols: TolArgs,
    /// itm, fsm, fmm, sm, sfmm, sdm or dm.
    #[arg(long, default_value = "fsm")]
    pub method: Method,
    /// Field dump (CSV `x,y,value,state`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Append the optimal velocity columns `fx,fy` to the dump.
    #[arg(long)]
    pub with_field: bool,
    /// JSON report path (stdout when omitted).
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Include the acceptance order in the report.
    #[arg(long)]
    pub trace: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub tols: TolArgs,
    /// sdm or dm (any single-pass method is accepted).
    #[arg(long, default_value = "sdm")]
    pub method: Method,
    /// Final field dump.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON report path (stdout when omitted).
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Where to write the state/f* snapshot when the run stalls.
    #[arg(long, default_value = "stall_snapshot.csv")]
    pub snapshot: PathBuf,
    #[arg(long)]
    pub trace: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Test number 0..6 (repeatable).
    #[arg(long = "test", value_parser = clap::value_parser!(u8).range(0..=6))]
    pub tests: Vec<u8>,
    /// Run tests 0..6.
    #[arg(long, conflicts_with = "tests")]
    pub all: bool,
    /// Reference grid size.
    #[arg(long, default_value_t = DEFAULT_REF_GRID)]
    pub ref_grid: usize,
    /// Directory for cached reference solutions.
    #[arg(long)]
    pub ref_cache: Option<PathBuf>,
    /// Override the comparison grids, e.g. `--grids 101,201`.
    #[arg(long, value_delimiter = ',')]
    pub grids: Option<Vec<usize>>,
    #[arg(long, default_value_t = DEFAULT_CONTROLS)]
    pub nc: usize,
    /// Output CSV (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write successive error ratios per (test, problem, scheme, method).
    #[arg(long)]
    pub rates: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Per-node CSV `x,y,value,state,fx,fy,gx,gy,flagged`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_catalog(s: &str) -> std::result::Result<Catalog, String> {
    s.parse::<Catalog>().map_err(|e| e.to_string())
}

/// Runs the CLI and returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) | Error::Json(_) | Error::BadCache { .. } => 1,
                _ => 2,
            }
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Solve(a) => cmd_solve(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Diagnose(a) => cmd_diagnose(a),
    }
}

fn config(method: Method, p: &ProblemArgs, t: &TolArgs) -> Result<SolverConfig> {
    let mut cfg = SolverConfig::new(method, p.scheme).with_controls(ControlSet::new(p.nc)?);
    cfg.tol = t.tol;
    cfg.sigma = t.sigma;
    cfg.tol_exact = t.tol_exact;
    cfg.max_iter = t.max_iter;
    Ok(cfg)
}

fn same_grid_reference(problem: &Problem, grid: &Grid, cfg: &SolverConfig) -> Result<Arc<ReferenceSolution>> {
    Ok(Arc::new(ReferenceSolution::compute(
        problem,
        grid.bounds(),
        grid.n(),
        cfg.scheme,
        &cfg.controls,
        DEFAULT_TOL,
        Method::Fsm,
    )?))
}

fn emit_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            writeln!(w)?;
            Ok(())
        }),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            serde_json::to_writer_pretty(&mut lock, value)?;
            writeln!(lock)?;
            Ok(())
        }
    }
}

fn dump_field(path: &Path, grid: &Grid, field: Option<&[Option<[f64; 2]>]>) -> Result<()> {
    write_atomic(path, |w| grid.write_csv(w, field))
}

#[derive(Debug, Serialize)]
struct RunSummary<'a> {
    problem: &'a str,
    lambda: f64,
    mu: f64,
    eps: f64,
    grid: usize,
    scheme: Scheme,
    #[serde(flatten)]
    report: &'a SolverReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    cons_cycle: Option<Vec<usize>>,
}

fn summary<'a>(p: &'a ProblemArgs, problem: &'a Problem, report: &'a SolverReport) -> RunSummary<'a> {
    RunSummary {
        problem: problem.name(),
        lambda: p.lambda,
        mu: p.mu,
        eps: p.eps,
        grid: p.grid,
        scheme: p.scheme,
        report,
        cons_cycle: None,
    }
}

fn cmd_solve(a: SolveArgs) -> Result<()> {
    let problem = a.problem.problem();
    let mut grid = a.problem.grid(&problem)?;
    let mut cfg = config(a.method, &a.problem, &a.tols)?;
    if a.method.needs_reference() {
        cfg.reference = Some(same_grid_reference(&problem, &grid, &cfg)?);
    }
    let mut report = solve(&mut grid, &problem, &cfg)?;
    if let Some(out) = &a.out {
        let field = a
            .with_field
            .then(|| extract_optimal_field(&grid, &problem, &cfg.controls, cfg.scheme));
        dump_field(out, &grid, field.as_deref())?;
    }
    if !a.trace {
        report.accepted_order.clear();
    }
    emit_json(a.report.as_deref(), &summary(&a.problem, &problem, &report))
}

fn cmd_verify(a: VerifyArgs) -> Result<()> {
    if !a.method.is_single_pass() {
        return Err(Error::InvalidConfig(format!(
            "verify runs single-pass methods, got {}",
            a.method
        )));
    }
    let problem = a.problem.problem();
    let mut grid = a.problem.grid(&problem)?;
    let mut cfg = config(a.method, &a.problem, &a.tols)?;
    cfg.reference = Some(same_grid_reference(&problem, &grid, &cfg)?);
    let (mut report, cycle, snapshot_field) = {
        let mut m = Marcher::new(&mut grid, &problem, &cfg)?;
        let report = m.run_in_place();
        let (cycle, field) = if report.stalled {
            let updates = current_updates(m.grid(), &problem, &cfg.controls, cfg.scheme);
            let field: Vec<Option<[f64; 2]>> = updates.iter().map(|u| u.map(|u| u.velocity)).collect();
            (cons_dependency_cycle(m.grid(), &updates), Some(field))
        } else {
            (None, None)
        };
        (report, cycle, field)
    };
    if let Some(field) = &snapshot_field {
        dump_field(&a.snapshot, &grid, Some(field))?;
        eprintln!(
            "{} stalled after {} of {} nodes; snapshot written to {}",
            a.method,
            report.accepted_count,
            grid.len(),
            a.snapshot.display()
        );
    }
    if let Some(out) = &a.out {
        dump_field(out, &grid, None)?;
    }
    if !a.trace {
        report.accepted_order.clear();
    }
    let mut s = summary(&a.problem, &problem, &report);
    s.cons_cycle = cycle;
    emit_json(a.report.as_deref(), &s)
}

fn cmd_bench(a: BenchArgs) -> Result<()> {
    let tests: Vec<u8> = if a.all || a.tests.is_empty() {
        (0..=6).collect()
    } else {
        a.tests.clone()
    };
    let cache = match &a.ref_cache {
        Some(dir) => ReferenceCache::on_disk(dir)?,
        None => ReferenceCache::in_memory(),
    };
    let mut rows = Vec::new();
    for t in tests {
        for mut spec in standard_test(t).expect("range-checked by clap") {
            spec.ref_grid = a.ref_grid;
            spec.nc = a.nc;
            if let Some(g) = &a.grids {
                spec.grids = g.clone();
            }
            rows.extend(bench::run_experiment(&spec, &cache)?);
        }
    }
    match &a.out {
        Some(p) => write_atomic(p, |w| bench::write_csv(w, &rows))?,
        None => bench::write_csv(std::io::stdout().lock(), &rows)?,
    }
    if let Some(p) = &a.rates {
        write_atomic(p, |w| write_rates(w, &rows))?;
    }
    Ok(())
}

fn write_rates<W: Write>(mut w: W, rows: &[bench::BenchRow]) -> Result<()> {
    writeln!(w, "test,problem,scheme,method,grid,e1,einf,e1_ratio,einf_ratio")?;
    for (idx, r) in rows.iter().enumerate() {
        let prev = rows[..idx].iter().rev().find(|p| {
            p.test == r.test && p.problem == r.problem && p.scheme == r.scheme && p.method == r.method && p.lambda == r.lambda
        });
        let ratio = |a: Option<f64>, b: f64| a.map(|a| format!("{:.4}", a / b)).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{},{:.6e},{:.6e},{},{}",
            r.test.map(|t| t.to_string()).unwrap_or_default(),
            r.problem,
            r.scheme,
            r.method,
            r.grid,
            r.e1,
            r.einf,
            ratio(prev.map(|p| p.e1), r.e1),
            ratio(prev.map(|p| p.einf), r.einf)
        )?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct DiagnoseSummary<'a> {
    problem: &'a str,
    declared_class: String,
    grid: usize,
    examined: usize,
    flagged: usize,
    iso: bool,
}

fn cmd_diagnose(a: DiagnoseArgs) -> Result<()> {
    let problem = a.problem.problem();
    let mut grid = a.problem.grid(&problem)?;
    let cfg = config(Method::Fsm, &a.problem, &TolArgs {
        tol: DEFAULT_TOL,
        sigma: DEFAULT_SIGMA,
        tol_exact: DEFAULT_TOL_EXACT,
        max_iter: None,
    })?;
    solve(&mut grid, &problem, &cfg)?;
    let diag = diagnose_iso(&grid, &problem, &cfg.controls, cfg.scheme);
    if let Some(out) = &a.out {
        write_atomic(out, |w| {
            writeln!(w, "x,y,value,state,fx,fy,gx,gy,flagged")?;
            let mut per_node = vec![None; grid.len()];
            for node in &diag.nodes {
                per_node[node.index] = Some(*node);
            }
            for (k, nd) in per_node.iter().enumerate() {
                let [x, y] = grid.coord(k);
                write!(w, "{:.16e},{:.16e},{:.16e},{}", x, y, grid.values[k], grid.states[k])?;
                match nd {
                    Some(nd) => writeln!(
                        w,
                        ",{:.16e},{:.16e},{:.16e},{:.16e},{}",
                        nd.characteristic[0], nd.characteristic[1], -nd.descent[0], -nd.descent[1], nd.flagged as u8
                    )?,
                    None => writeln!(w, ",,,,,0")?,
                }
            }
            Ok(())
        })?;
    }
    emit_json(
        None,
        &DiagnoseSummary {
            problem: problem.name(),
            declared_class: problem.class.to_string(),
            grid: grid.n(),
            examined: diag.examined,
            flagged: diag.flagged,
            iso: diag.iso,
        },
    )
}
