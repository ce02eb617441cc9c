use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use serde::Serialize;

use crate::diagnostics::{holder_norms_strided, lemma_sweep, records_for_density};
use crate::error::{Error, Result};
use crate::fixed_point::{density_trajectory, iterate_to_fixed_point};
use crate::fv_oracle::solve_direct;
use crate::problem::Problem;
use crate::trajectory::Trajectory;

use super::config::{Mode, RunConfig};
use super::output::{fmt_f64, write_diagnostics_csv, write_json, write_trajectory_csv};
use super::OUTPUT_ROOT_ENV;

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: RunConfig,
    pub version: String,
    pub wall_clock_seconds: f64,
    pub output_directory: String,
    /// Every file written, relative to `output_directory`.
    pub files: Vec<String>,
    pub checks: BTreeMap<String, bool>,
    pub metrics: BTreeMap<String, f64>,
    pub errors: Vec<String>,
    /// The initial datum violates the boundary compatibility condition.
    pub outside_theory: bool,
}

impl RunManifest {
    fn new(command: &str, config: &RunConfig, dir: &Path) -> Self {
        Self {
            command: command.to_string(),
            config: config.clone(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_clock_seconds: 0.0,
            output_directory: dir.display().to_string(),
            files: Vec::new(),
            checks: BTreeMap::new(),
            metrics: BTreeMap::new(),
            errors: Vec::new(),
            outside_theory: false,
        }
    }

    /// True when every check passed and no stage failed.
    pub fn passed(&self) -> bool {
        self.errors.is_empty() && self.checks.values().all(|&ok| ok)
    }

    fn check(&mut self, name: &str, ok: bool) {
        if !ok {
            warn!("check `{name}` failed");
        }
        self.checks.insert(name.to_string(), ok);
    }

    fn metric(&mut self, name: &str, value: f64) {
        self.metrics.insert(name.to_string(), value);
    }

    fn fail(&mut self, stage: &str, err: Error) {
        warn!("{stage} failed: {err}");
        self.errors.push(format!("{stage}: {err}"));
        self.check(&format!("{stage}_completed"), false);
    }

    fn file(&mut self, dir: &Path, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        dir.join(name)
    }

    fn finish(mut self, start: Instant, dir: &Path) -> Result<Self> {
        self.wall_clock_seconds = start.elapsed().as_secs_f64();
        let path = self.file(dir, "manifest.json");
        write_json(&path, &self)?;
        Ok(self)
    }
}

/// Output directory of a run: `output.directory`, placed under
/// `$NLFP_OUTPUT_ROOT` when that is set and the directory is relative.
pub fn output_root(config: &RunConfig) -> PathBuf {
    let dir = PathBuf::from(&config.output.directory);
    match std::env::var_os(OUTPUT_ROOT_ENV) {
        Some(root) if dir.is_relative() => PathBuf::from(root).join(dir),
        _ => dir,
    }
}

fn max_abs_mass_error(records: &[crate::diagnostics::DiagnosticsRecord<f64>]) -> f64 {
    records.iter().fold(0.0, |m, r| m.max((r.mass - 1.0).abs()))
}

fn run_fv(
    config: &RunConfig,
    problem: &Problem<f64>,
    dir: &Path,
    m: &mut RunManifest,
) -> Result<Option<Trajectory<f64>>> {
    let sol = match solve_direct(problem, &config.fv_config()) {
        Ok(s) => s,
        Err(e) => {
            m.fail("fv", e);
            return Ok(None);
        }
    };
    m.check("fv_completed", true);
    let records = &sol.diagnostics;
    if config.output.write_trajectories {
        let path = m.file(dir, "trajectory_fv.csv");
        write_trajectory_csv(
            &path,
            &sol.f,
            problem.grid.nodes(),
            config.output.trajectory_stride,
        )?;
    }
    let path = m.file(dir, "diagnostics_fv.csv");
    write_diagnostics_csv(&path, records)?;

    let slack = 100.0 * sol.dt * sol.dt;
    let max_increase = records
        .windows(2)
        .map(|w| w[1].free_energy - w[0].free_energy)
        .fold(f64::NEG_INFINITY, f64::max);
    let mass_err = max_abs_mass_error(records);
    let rho_dev = sol
        .rho_final
        .iter()
        .fold(0.0f64, |a, &r| a.max((r - 1.0).abs()));
    m.metric("dt", sol.dt);
    m.metric("fv_steps", sol.n_steps as f64);
    m.metric("fv_max_mass_error", mass_err);
    m.metric("fv_max_energy_increase", max_increase);
    m.metric(
        "fv_final_free_energy",
        records.last().map_or(f64::NAN, |r| r.free_energy),
    );
    m.metric("fv_final_rho_deviation", rho_dev);
    m.check("fv_mass_conserved", mass_err <= 1e-12);
    m.check("fv_energy_nonincreasing", max_increase <= slack);
    m.check(
        "fv_dissipation_nonpositive",
        records.iter().all(|r| r.dissipation_rate <= 0.0),
    );
    m.check("fv_positive", records.iter().all(|r| r.min_density > 0.0));
    Ok(Some(sol.f))
}

fn run_fixed_point(
    config: &RunConfig,
    problem: &Problem<f64>,
    dir: &Path,
    m: &mut RunManifest,
) -> Result<Option<Trajectory<f64>>> {
    let fp = config.fixed_point_config();
    let sol = match iterate_to_fixed_point(problem, &fp) {
        Ok(s) => s,
        Err(e) => {
            if matches!(e, Error::Divergence { .. }) {
                m.check("fixed_point_converged", false);
            }
            m.fail("fixed_point", e);
            return Ok(None);
        }
    };
    m.check("fixed_point_completed", true);
    let report = &sol.report;
    let path = m.file(dir, "iteration_report.json");
    write_json(&path, report)?;
    let f = density_trajectory(problem, &sol.xi);
    let records = match records_for_density(problem, &f) {
        Ok(r) => r,
        Err(e) => {
            m.fail("fixed_point_diagnostics", e);
            return Ok(None);
        }
    };
    if config.output.write_trajectories {
        let path = m.file(dir, "trajectory_fixed_point.csv");
        write_trajectory_csv(
            &path,
            &f,
            problem.grid.nodes(),
            config.output.trajectory_stride,
        )?;
    }
    let path = m.file(dir, "diagnostics_fixed_point.csv");
    write_diagnostics_csv(&path, &records)?;
    match holder_norms_strided(
        &sol.xi,
        &problem.grid,
        fp.alpha,
        config.output.holder_stride,
        true,
    ) {
        Ok(h) => {
            let path = m.file(dir, "holder_report.json");
            write_json(&path, &h)?;
            m.metric("xi_c_alpha_norm", h.c_alpha_norm);
            m.metric("xi_c2_alpha_norm", h.c2_alpha_norm);
        }
        Err(e) => m.fail("holder_norms", e),
    }
    m.metric("fixed_point_iterations", report.iterates as f64);
    m.metric("fixed_point_worst_ratio", report.worst_ratio());
    m.metric("kappa_T", report.kappa_t);
    m.metric("fixed_point_max_mass_error", max_abs_mass_error(&records));
    m.check("fixed_point_converged", report.converged);
    m.check(
        "fixed_point_contracting",
        report.ratios.iter().all(|&r| r < 1.0),
    );
    m.check(
        "fixed_point_positive",
        records.iter().all(|r| r.min_density > 0.0),
    );
    Ok(Some(f))
}

/// Executes the configured mode and writes all outputs into `dir`.
/// Solver failures are recorded in the manifest; only I/O errors are returned.
pub fn run_experiment(config: &RunConfig, dir: &Path) -> Result<RunManifest> {
    let start = Instant::now();
    fs::create_dir_all(dir)?;
    let mut m = RunManifest::new("run", config, dir);
    let problem = match config.build_problem() {
        Ok(p) => p,
        Err(e) => {
            m.fail("setup", e);
            return m.finish(start, dir);
        }
    };
    m.outside_theory = !problem.compatibility.compatible;
    m.metric("compatibility_left", problem.compatibility.left);
    m.metric("compatibility_right", problem.compatibility.right);
    m.metric("c_norm", problem.coeffs.eq.c_norm);
    let mode = config.solver.mode;
    let fv = if mode != Mode::FixedPoint {
        info!("finite-volume solve");
        run_fv(config, &problem, dir, &mut m)?
    } else {
        None
    };
    let fp = if mode != Mode::Fv {
        info!("fixed-point solve");
        run_fixed_point(config, &problem, dir, &mut m)?
    } else {
        None
    };
    if let (Some(a), Some(b)) = (&fp, &fv) {
        match a.sup_distance(b) {
            Ok(gap) => {
                m.metric("cross_solver_discrepancy", gap);
                m.check("cross_solver_agreement", gap <= config.solver.cross_tol);
            }
            Err(e) => m.fail("cross_solver", e),
        }
    }
    m.finish(start, dir)
}

/// Randomized sweep of the decay and product inequalities.
pub fn verify_lemmas(config: &RunConfig, dir: &Path) -> Result<RunManifest> {
    let start = Instant::now();
    fs::create_dir_all(dir)?;
    let mut m = RunManifest::new("verify-lemmas", config, dir);
    let s = &config.solver;
    let swept = config.grid().and_then(|g| {
        lemma_sweep(
            s.seed,
            s.lemma_decay_trials,
            s.lemma_product_trials,
            s.alpha,
            &g,
            s.lemma_steps,
        )
    });
    match swept {
        Ok(report) => {
            let path = m.file(dir, "lemma_report.json");
            write_json(&path, &report)?;
            m.metric("decay_failures", report.decay_failures as f64);
            m.metric("product_failures", report.product_failures as f64);
            m.check("decay_bounds", report.decay_failures == 0);
            m.check("product_bound", report.product_failures == 0);
        }
        Err(e) => m.fail("lemmas", e),
    }
    m.finish(start, dir)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceLevel {
    pub n_cells: usize,
    pub dt: f64,
    /// Space-time sup of `|f_fixed_point - f_fv|`.
    pub discrepancy: f64,
    /// `log2` of the ratio to the previous level's discrepancy.
    pub order: Option<f64>,
}

/// Cross-solver discrepancy on `levels` meshes obtained by halving `dx` and
/// quartering `dt` from the configured ones.
pub fn convergence_study(config: &RunConfig, levels: usize) -> Result<Vec<ConvergenceLevel>> {
    if levels == 0 {
        return Err(Error::validation("levels", "must be at least 1"));
    }
    let mut out: Vec<ConvergenceLevel> = Vec::with_capacity(levels);
    for l in 0..levels {
        let mut c = config.clone();
        c.grid.n_cells = config.grid.n_cells << l;
        c.solver.dt = Some(config.dt() / 4f64.powi(l as i32));
        let problem = c.build_problem()?;
        let fv = solve_direct(&problem, &c.fv_config())?;
        let fp = iterate_to_fixed_point(&problem, &c.fixed_point_config())?;
        let f = density_trajectory(&problem, &fp.xi);
        let discrepancy = f.sup_distance(&fv.f)?;
        let order = out.last().map(|p| (p.discrepancy / discrepancy).log2());
        info!(
            "level {l}: n_cells = {}, discrepancy = {discrepancy:e}",
            c.grid.n_cells
        );
        out.push(ConvergenceLevel {
            n_cells: c.grid.n_cells,
            dt: fv.dt,
            discrepancy,
            order,
        });
    }
    Ok(out)
}

/// Runs [`convergence_study`] and writes `convergence.csv`.
pub fn run_convergence(config: &RunConfig, levels: usize, dir: &Path) -> Result<RunManifest> {
    let start = Instant::now();
    fs::create_dir_all(dir)?;
    let mut m = RunManifest::new("convergence", config, dir);
    match convergence_study(config, levels) {
        Ok(study) => {
            let path = m.file(dir, "convergence.csv");
            let mut text = String::from("n_cells,dt,discrepancy,order\n");
            for l in &study {
                let order = l.order.map(fmt_f64).unwrap_or_default();
                text.push_str(&format!(
                    "{},{},{},{}\n",
                    l.n_cells,
                    fmt_f64(l.dt),
                    fmt_f64(l.discrepancy),
                    order
                ));
            }
            fs::write(&path, text)?;
            m.check(
                "convergence_monotone",
                study
                    .windows(2)
                    .all(|w| w[1].discrepancy < w[0].discrepancy),
            );
            if let Some(order) = study.last().and_then(|l| l.order) {
                m.metric("finest_order", order);
                m.check("convergence_order", order >= 1.8);
            }
        }
        Err(e) => m.fail("convergence", e),
    }
    m.finish(start, dir)
}
