//! Experiment drivers: turn a [`RunConfig`] into convergence reports or an
//! oracle run, fanning independent cells out to a worker pool.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use anyhow::{bail, Context, Result};

use fracgal_core::fem::{build_space, FemSpace};
use fracgal_core::mesh::GradedMesh;
use fracgal_core::oracles::{standard_suite, OracleOutcome};
use fracgal_core::pde::{
    error_e1, error_e2, field_reference, solve_dg, solve_pg, Backend, FieldStudy,
    FieldTrajectory,
};
use fracgal_core::report::{ConvergenceReport, ReferenceDescriptor};
use fracgal_core::stepper::{scalar_error_study, Scheme};

use crate::config::{
    expected_order, Experiment, RunConfig, BackendChoice, HORIZON, SCALAR_LAMBDA,
};

/// Environment variable capping the worker pool.
pub const THREADS_ENV: &str = "FRACGAL_THREADS";

/// The completed numbers of one convergence run.
#[derive(Debug)]
pub struct StudyOutcome {
    pub fingerprint: String,
    /// One report per grading exponent, in the configured order.
    pub reports: Vec<ConvergenceReport>,
    /// Asymptotic order the theory predicts for each sigma, when it does.
    pub expected: Vec<Option<f64>>,
}

/// How many workers to use for `tasks` independent cells: `FRACGAL_THREADS`
/// if set, otherwise the machine's parallelism, never more than the task
/// count. The mapping from cell to result slot is fixed, so the worker count
/// never changes any output byte.
pub fn worker_count(tasks: usize) -> Result<usize> {
    let cap = match std::env::var(THREADS_ENV) {
        Ok(raw) => raw
            .parse::<usize>()
            .ok()
            .filter(|&n| n >= 1)
            .with_context(|| format!("{THREADS_ENV} must be a positive integer, got {raw:?}"))?,
        Err(_) => thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };
    Ok(cap.min(tasks).max(1))
}

/// Run `work` over `0..tasks` on the pool, collecting results in task order.
fn parallel_map<R, F>(tasks: usize, work: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(usize) -> R + Sync,
{
    let workers = worker_count(tasks)?;
    let slots: Vec<Mutex<Option<R>>> = (0..tasks).map(|_| Mutex::new(None)).collect();
    let cursor = AtomicUsize::new(0);
    thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = cursor.fetch_add(1, Ordering::Relaxed);
                if i >= tasks {
                    break;
                }
                let result = work(i);
                *slots[i].lock().expect("worker poisoned a result slot") = Some(result);
            });
        }
    });
    Ok(slots
        .into_iter()
        .map(|slot| {
            slot.into_inner()
                .expect("worker poisoned a result slot")
                .expect("every task index below the bound was claimed")
        })
        .collect())
}

/// Run the configured convergence experiment.
pub fn run_study(cfg: &RunConfig) -> Result<StudyOutcome> {
    let reports = match cfg.experiment {
        Experiment::ScalarDiffusion | Experiment::ScalarWave => scalar_reports(cfg)?,
        Experiment::Diffusion | Experiment::Wave => field_reports(cfg)?,
        Experiment::Oracles => bail!("the oracle suite does not produce a convergence report"),
    };
    let expected = cfg.sigmas.iter().map(|&s| expected_order(cfg, s)).collect();
    Ok(StudyOutcome {
        fingerprint: cfg.fingerprint(),
        reports,
        expected,
    })
}

fn scalar_reports(cfg: &RunConfig) -> Result<Vec<ConvergenceReport>> {
    let metric = cfg.experiment.metric().expect("scalar experiment");
    let results = parallel_map(cfg.sigmas.len(), |i| {
        scalar_error_study(
            cfg.alpha,
            SCALAR_LAMBDA,
            cfg.sigmas[i],
            HORIZON,
            &cfg.grids,
            metric,
        )
    })?;
    results
        .into_iter()
        .map(|r| r.map_err(|e| anyhow::anyhow!("scalar study failed: {e}")))
        .collect()
}

/// The initial data of the two field experiments. Their fractional spatial
/// regularity (about 1/2 and 3/2) drives the attainable temporal orders.
fn field_datum(experiment: Experiment) -> fn(f64) -> f64 {
    match experiment {
        Experiment::Diffusion => |x: f64| x.powf(0.51) * (1.0 - x),
        Experiment::Wave => |x: f64| x.powf(1.51) * (1.0 - x) * (1.0 - x),
        _ => unreachable!("not a field experiment"),
    }
}

fn field_reports(cfg: &RunConfig) -> Result<Vec<ConvergenceReport>> {
    let scheme = cfg.experiment.scheme().expect("field experiment");
    let metric = cfg.experiment.metric().expect("field experiment");
    let backend = cfg.backend.to_core();

    let mut space = build_space(cfg.cells).map_err(|e| anyhow::anyhow!("building space: {e}"))?;
    if cfg.backend == BackendChoice::Spectral {
        space
            .eigen_decompose()
            .map_err(|e| anyhow::anyhow!("eigendecomposition: {e}"))?;
    }
    let initial = space
        .l2_project(field_datum(cfg.experiment))
        .map_err(|e| anyhow::anyhow!("projecting the datum: {e}"))?;

    // One reference solve serves every grading exponent; it dominates the
    // total cost by orders of magnitude.
    let study = FieldStudy {
        space: &space,
        alpha: cfg.alpha,
        sigma: cfg.sigmas[0],
        horizon: HORIZON,
        initial: &initial,
        grids: &cfg.grids,
        reference_intervals: cfg.reference_intervals,
        reference_sigma: cfg.reference_sigma,
        backend,
        metric,
    };
    let reference =
        field_reference(&study).map_err(|e| anyhow::anyhow!("reference solve: {e}"))?;

    // Every (sigma, J) cell is independent given the reference.
    let cells: Vec<(usize, usize)> = (0..cfg.sigmas.len())
        .flat_map(|si| (0..cfg.grids.len()).map(move |gi| (si, gi)))
        .collect();
    let errors = parallel_map(cells.len(), |i| {
        let (si, gi) = cells[i];
        field_cell_error(
            &space,
            cfg.alpha,
            cfg.sigmas[si],
            cfg.grids[gi],
            &initial,
            backend,
            scheme,
            &reference,
        )
    })?;

    let mut reports = Vec::with_capacity(cfg.sigmas.len());
    for (si, &sigma) in cfg.sigmas.iter().enumerate() {
        let mut report = ConvergenceReport::new(scheme, cfg.alpha, sigma, metric)
            .with_reference(ReferenceDescriptor {
                intervals: cfg.reference_intervals,
                sigma: cfg.reference_sigma,
            });
        for (gi, &grid) in cfg.grids.iter().enumerate() {
            let err = errors[si * cfg.grids.len() + gi]
                .as_ref()
                .map_err(|e| anyhow::anyhow!("solve at sigma={sigma}, J={grid}: {e}"))?;
            report.push(grid, *err);
        }
        reports.push(report);
    }
    Ok(reports)
}

#[allow(clippy::too_many_arguments)]
fn field_cell_error(
    space: &FemSpace,
    alpha: f64,
    sigma: f64,
    grid: usize,
    initial: &[f64],
    backend: Backend,
    scheme: Scheme,
    reference: &FieldTrajectory<'_>,
) -> fracgal_core::Result<f64> {
    let mesh = GradedMesh::new(grid, sigma, HORIZON)?;
    match scheme {
        Scheme::Dg => {
            let traj = solve_dg(space, &mesh, alpha, initial, backend)?;
            error_e1(&traj, reference)
        }
        Scheme::Pg => {
            let traj = solve_pg(space, &mesh, alpha, initial, backend)?;
            error_e2(&traj, reference)
        }
    }
}

/// The completed oracle suite.
#[derive(Debug)]
pub struct OracleRun {
    pub seed: u64,
    pub outcomes: Vec<OracleOutcome>,
}

impl OracleRun {
    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed())
    }
}

/// Run every inequality oracle at its standard sample count.
pub fn run_oracles(seed: u64) -> Result<OracleRun> {
    let outcomes =
        standard_suite(seed).map_err(|e| anyhow::anyhow!("oracle suite failed to run: {e}"))?;
    Ok(OracleRun { seed, outcomes })
}
