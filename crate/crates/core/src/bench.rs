//! Error metrics against nested-grid references and the comparative
//! experiments (tests 0 to 6).

use std::collections::HashMap;
use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Bounds, Grid};
use crate::problems::{Catalog, ControlSet, Params, Problem, DEFAULT_CONTROLS};
use crate::schemes::Scheme;
use crate::solvers::{solve, Method, SolverConfig, DEFAULT_TOL};
use crate::verify::ReferenceSolution;

pub const DEFAULT_REF_GRID: usize = 801;
/// Bumped whenever cached references would no longer match a fresh solve.
const CACHE_FORMAT: u32 = 1;
pub const DEFAULT_GRIDS: [usize; 3] = [101, 201, 401];

/// Relative L1 (mean) and L-infinity errors over the nodes where the
/// reference is nonzero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub e1: f64,
    pub einf: f64,
    pub compared_nodes: usize,
    /// Nodes skipped because the reference vanishes there (the target).
    pub excluded_nodes: usize,
}

pub fn compute_errors(field: &Grid, reference: &ReferenceSolution) -> Result<ErrorReport> {
    let exact = reference.restrict(field)?;
    Ok(relative_errors(&field.values, &exact))
}

pub(crate) fn relative_errors(values: &[f64], exact: &[f64]) -> ErrorReport {
    let mut sum = 0.0;
    let mut max: f64 = 0.0;
    let mut compared = 0;
    let mut excluded = 0;
    for (&v, &e) in values.iter().zip(exact) {
        if e == 0.0 {
            excluded += 1;
            continue;
        }
        let r = (e - v).abs() / e.abs();
        sum += r;
        max = max.max(r);
        compared += 1;
    }
    ErrorReport {
        e1: if compared > 0 { sum / compared as f64 } else { 0.0 },
        einf: max,
        compared_nodes: compared,
        excluded_nodes: excluded,
    }
}

/// Reference solutions kept in memory and, optionally, on disk.
///
/// Entries are addressed by problem, parameters, scheme, grid size,
/// tolerance, control count and domain, so a cached file is reused only for
/// an identical computation.
#[derive(Debug, Default)]
pub struct ReferenceCache {
    dir: Option<PathBuf>,
    memory: Mutex<HashMap<String, Arc<ReferenceSolution>>>,
}

impl ReferenceCache {
    pub fn in_memory() -> Self {
        ReferenceCache::default()
    }

    pub fn on_disk(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(ReferenceCache {
            dir: Some(dir),
            memory: Mutex::default(),
        })
    }

    pub fn key(problem: &Problem, bounds: Bounds, n: usize, scheme: Scheme, nc: usize, tol: f64) -> String {
        format!(
            "v{}_{}_{}_n{}_tol{:e}_nc{}_x{}_{}_y{}_{}",
            CACHE_FORMAT,
            problem.cache_key(),
            scheme,
            n,
            tol,
            nc,
            bounds.xmin,
            bounds.xmax,
            bounds.ymin,
            bounds.ymax
        )
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{key}.json")))
    }

    pub fn get_or_compute(
        &self,
        problem: &Problem,
        bounds: Bounds,
        n: usize,
        scheme: Scheme,
        controls: &ControlSet,
        tol: f64,
    ) -> Result<Arc<ReferenceSolution>> {
        let key = Self::key(problem, bounds, n, scheme, controls.len(), tol);
        if let Some(hit) = self.memory.lock().expect("cache lock").get(&key) {
            return Ok(hit.clone());
        }
        let path = self.path(&key);
        let loaded = match &path {
            Some(p) if p.exists() => Some(load_reference(p)?),
            _ => None,
        };
        let reference = match loaded {
            Some(r) => r,
            None => {
                let r = ReferenceSolution::compute(problem, bounds, n, scheme, controls, tol, Method::Fsm)?;
                if let Some(p) = &path {
                    store_reference(p, &r)?;
                }
                r
            }
        };
        let reference = Arc::new(reference);
        self.memory
            .lock()
            .expect("cache lock")
            .insert(key, reference.clone());
        Ok(reference)
    }
}

fn load_reference(path: &Path) -> Result<ReferenceSolution> {
    let file = fs::File::open(path)?;
    let r: ReferenceSolution = serde_json::from_reader(BufReader::new(file))?;
    if r.field.len() != r.n * r.n {
        return Err(Error::BadCache {
            path: path.display().to_string(),
            reason: format!("{} values for a {}x{} grid", r.field.len(), r.n, r.n),
        });
    }
    Ok(r)
}

fn store_reference(path: &Path, r: &ReferenceSolution) -> Result<()> {
    write_atomic(path, |w| Ok(serde_json::to_writer(w, r)?))
}

/// Writes through a temporary file in the destination directory and
/// renames it into place.
pub fn write_atomic<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<&mut tempfile::NamedTempFile>) -> Result<()>,
{
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file().set_permissions(fs::Permissions::from_mode(0o644))?;
    }
    {
        let mut w = BufWriter::new(&mut tmp);
        body(&mut w)?;
        w.flush()?;
    }
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// One problem/scheme block of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub test: Option<u8>,
    pub problem: Catalog,
    pub params: Params,
    pub grids: Vec<usize>,
    pub scheme: Scheme,
    pub methods: Vec<Method>,
    pub ref_grid: usize,
    pub nc: usize,
    pub bounds: Bounds,
    /// Compare against the nested reference; when false the error columns
    /// are left empty (NaN).
    pub with_errors: bool,
}

impl ExperimentSpec {
    pub fn new(problem: Catalog, params: Params, scheme: Scheme, methods: Vec<Method>) -> Self {
        ExperimentSpec {
            test: None,
            problem,
            params,
            grids: DEFAULT_GRIDS.to_vec(),
            scheme,
            methods,
            ref_grid: DEFAULT_REF_GRID,
            nc: DEFAULT_CONTROLS,
            bounds: Bounds::default(),
            with_errors: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for &n in &self.grids {
            if n < 3 || self.ref_grid < n || !(self.ref_grid - 1).is_multiple_of(n - 1) {
                return Err(Error::NotNested {
                    reference: self.ref_grid,
                    field: n,
                });
            }
        }
        Ok(())
    }
}

fn params(lambda: f64, mu: f64) -> Params {
    Params {
        lambda,
        mu,
        eps: 0.02,
    }
}

/// The experiment blocks of test `t` (0 to 6) on the default grids.
pub fn standard_test(t: u8) -> Option<Vec<ExperimentSpec>> {
    use Method::*;
    let default = Params::default();
    let block = |problem, params, scheme, methods: &[Method]| {
        let mut s = ExperimentSpec::new(problem, params, scheme, methods.to_vec());
        s.test = Some(t);
        s
    };
    let specs = match t {
        0 => vec![
            block(Catalog::A, default, Scheme::Sl2p, &[Fsm]),
            block(Catalog::A, default, Scheme::Sl3p, &[Fsm]),
            block(Catalog::D, default, Scheme::Sl2p, &[Fsm]),
            block(Catalog::D, default, Scheme::Sl3p, &[Fsm]),
        ],
        1 => vec![block(Catalog::A, default, Scheme::Sl3p, &[Fsm, Fmm, Sm])],
        2 => vec![block(Catalog::B, default, Scheme::Sl3p, &[Fsm, Fmm, Sfmm, Sm])],
        3 => vec![block(Catalog::C, params(6.0, 5.0), Scheme::Sl3p, &[Fsm, Fmm, Sm])],
        4 => vec![block(
            Catalog::E,
            params(6.0, 5.0),
            Scheme::Sl3p,
            &[Fsm, Fmm, Sfmm, Sm, Dm, Sdm],
        )],
        5 => vec![block(Catalog::E, params(5.0, 5.0), Scheme::Sl3p, &[Fsm, Sfmm])],
        6 => {
            let mut s = block(Catalog::E, params(10.0, 5.0), Scheme::Sl3p, &[Sdm, Dm]);
            s.grids = vec![101];
            s.with_errors = false;
            vec![s]
        }
        _ => return None,
    };
    Some(specs)
}

/// One line of the results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub test: Option<u8>,
    pub problem: Catalog,
    pub lambda: f64,
    pub mu: f64,
    pub eps: f64,
    pub grid: usize,
    pub scheme: Scheme,
    pub method: Method,
    pub einf: f64,
    pub e1: f64,
    pub sweeps: usize,
    pub iterations: usize,
    pub stalled: bool,
    pub accepted_count: usize,
}

pub const CSV_HEADER: &str = "test,problem,lambda,mu,eps,grid,scheme,method,einf,e1,sweeps,iterations,stalled";

impl BenchRow {
    pub fn csv_line(&self) -> String {
        let num = |v: f64| if v.is_nan() { String::new() } else { format!("{v:.6e}") };
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.test.map(|t| t.to_string()).unwrap_or_default(),
            self.problem,
            self.lambda,
            self.mu,
            self.eps,
            self.grid,
            self.scheme,
            self.method,
            num(self.einf),
            num(self.e1),
            self.sweeps,
            self.iterations,
            self.stalled
        )
    }
}

pub fn write_csv<W: Write>(mut w: W, rows: &[BenchRow]) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(w, "{}", r.csv_line())?;
    }
    Ok(())
}

/// Runs every (grid, method) pair of `spec`, in spec order.
pub fn run_experiment(spec: &ExperimentSpec, cache: &ReferenceCache) -> Result<Vec<BenchRow>> {
    spec.validate()?;
    let problem = Problem::catalog(spec.problem, spec.params);
    let controls = ControlSet::new(spec.nc)?;
    let reference = if spec.with_errors {
        Some(cache.get_or_compute(&problem, spec.bounds, spec.ref_grid, spec.scheme, &controls, DEFAULT_TOL)?)
    } else {
        None
    };
    let mut rows = Vec::new();
    for &n in &spec.grids {
        let same_grid = if spec.methods.iter().any(|m| m.needs_reference()) {
            Some(cache.get_or_compute(&problem, spec.bounds, n, spec.scheme, &controls, DEFAULT_TOL)?)
        } else {
            None
        };
        for &method in &spec.methods {
            let mut grid = Grid::new(spec.bounds, n)?;
            grid.embed_target(&problem.target)?;
            let mut cfg = SolverConfig::new(method, spec.scheme).with_controls(controls.clone());
            if method.needs_reference() {
                cfg.reference = same_grid.clone();
            }
            let report = solve(&mut grid, &problem, &cfg)?;
            let (einf, e1) = match &reference {
                Some(r) => {
                    let e = compute_errors(&grid, r)?;
                    (e.einf, e.e1)
                }
                None => (f64::NAN, f64::NAN),
            };
            rows.push(BenchRow {
                test: spec.test,
                problem: spec.problem,
                lambda: spec.params.lambda,
                mu: spec.params.mu,
                eps: spec.params.eps,
                grid: n,
                scheme: spec.scheme,
                method,
                einf,
                e1,
                sweeps: report.sweeps,
                iterations: report.iterations,
                stalled: report.stalled,
                accepted_count: report.accepted_count,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateRow {
    pub grid: usize,
    pub e1: f64,
    pub einf: f64,
    /// Previous grid's error divided by this grid's.
    pub e1_ratio: Option<f64>,
    pub einf_ratio: Option<f64>,
}

/// Errors of one method across successively refined nested grids.
pub fn convergence_study(
    problem: &Problem,
    method: Method,
    scheme: Scheme,
    grids: &[usize],
    ref_grid: usize,
    controls: &ControlSet,
    cache: &ReferenceCache,
) -> Result<Vec<RateRow>> {
    if grids.len() < 2 {
        return Err(Error::InvalidConfig("a convergence study needs at least two grids".into()));
    }
    let bounds = Bounds::default();
    let reference = cache.get_or_compute(problem, bounds, ref_grid, scheme, controls, DEFAULT_TOL)?;
    let mut rows: Vec<RateRow> = Vec::with_capacity(grids.len());
    for &n in grids {
        let mut grid = Grid::new(bounds, n)?;
        reference.check_nested(&grid)?;
        grid.embed_target(&problem.target)?;
        let mut cfg = SolverConfig::new(method, scheme).with_controls(controls.clone());
        if method.needs_reference() {
            cfg.reference = Some(cache.get_or_compute(problem, bounds, n, scheme, controls, DEFAULT_TOL)?);
        }
        solve(&mut grid, problem, &cfg)?;
        let e = compute_errors(&grid, &reference)?;
        let prev = rows.last().copied();
        rows.push(RateRow {
            grid: n,
            e1: e.e1,
            einf: e.einf,
            e1_ratio: prev.map(|p| p.e1 / e.e1),
            einf_ratio: prev.map(|p| p.einf / e.einf),
        });
    }
    Ok(rows)
}
