//! Picard iteration `xi^{k+1} = A xi^k` of the discrete solution map and the
//! contraction observables around it.

use log::warn;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linear_parabolic::SolutionMap;
use crate::problem::{Problem, TermOptions};
use crate::scalar::Real;
use crate::trajectory::Trajectory;
use crate::transforms::{f_from_xi_values, rho_values, FieldKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPointConfig<T> {
    /// Horizon `T`.
    pub horizon: T,
    /// Largest admissible time step; shortened to divide the horizon.
    pub dt: T,
    pub theta: T,
    pub max_outer_iters: usize,
    /// Stopping threshold on the space-time sup norm of successive iterates.
    pub fixed_point_tol: T,
    /// Hölder exponent used for `kappa(T)` and reporting.
    pub alpha: T,
    /// Divergence guard on the sup norm of every iterate.
    pub m_cap: T,
    pub terms: TermOptions,
}

impl<T: Real> FixedPointConfig<T> {
    pub fn new(horizon: T, dt: T) -> Self {
        Self {
            horizon,
            dt,
            theta: T::one(),
            max_outer_iters: 50,
            fixed_point_tol: T::lit(1e-10),
            alpha: T::lit(0.5),
            m_cap: T::lit(100.0),
            terms: TermOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > T::zero()) {
            return Err(Error::validation("solver.t_final", "must be positive"));
        }
        if !(self.dt > T::zero() && self.dt <= self.horizon) {
            return Err(Error::validation(
                "solver.dt",
                "must satisfy 0 < dt <= t_final",
            ));
        }
        if !(self.fixed_point_tol > T::zero()) {
            return Err(Error::validation(
                "solver.fixed_point_tol",
                "must be positive",
            ));
        }
        if !(self.alpha > T::zero() && self.alpha < T::one()) {
            return Err(Error::validation("solver.alpha", "must lie in (0, 1)"));
        }
        if !(self.m_cap > T::zero()) {
            return Err(Error::validation("solver.m_cap", "must be positive"));
        }
        if self.max_outer_iters == 0 {
            return Err(Error::validation(
                "solver.max_outer_iters",
                "must be at least 1",
            ));
        }
        Ok(())
    }

    pub fn solution_map<'a>(&self, problem: &'a Problem<T>) -> Result<SolutionMap<'a, T>> {
        self.validate()?;
        SolutionMap::new(problem, self.horizon, self.dt, self.theta, self.terms)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationReport<T> {
    pub iterates: usize,
    pub sup_diffs: Vec<T>,
    pub ratios: Vec<T>,
    pub converged: bool,
    #[serde(rename = "kappa_T")]
    pub kappa_t: T,
}

impl<T: Real> IterationReport<T> {
    pub fn worst_ratio(&self) -> T {
        self.ratios.iter().fold(T::zero(), |m, &r| m.max(r))
    }
}

#[derive(Debug, Clone)]
pub struct FixedPointSolution<T> {
    pub xi: Trajectory<T>,
    pub report: IterationReport<T>,
}

/// `kappa(T) = (T^{(1+a)/2} + T^{1/2})^2 + (T^{(1+a)/2} + T^{1/2}) (T + T^{1-a/2})`.
pub fn kappa<T: Real>(horizon: T, alpha: T) -> T {
    let half = T::lit(0.5);
    let grad_decay = horizon.powf((T::one() + alpha) * half) + horizon.sqrt();
    let value_decay = horizon + horizon.powf(T::one() - alpha * half);
    grad_decay * grad_decay + grad_decay * value_decay
}

pub fn apply_solution_map<T: Real>(
    psi: &Trajectory<T>,
    problem: &Problem<T>,
    config: &FixedPointConfig<T>,
) -> Result<Trajectory<T>> {
    config.solution_map(problem)?.apply(psi)
}

/// Picard iteration from `xi^0 = 0`.
pub fn iterate_to_fixed_point<T: Real>(
    problem: &Problem<T>,
    config: &FixedPointConfig<T>,
) -> Result<FixedPointSolution<T>> {
    let map = config.solution_map(problem)?;
    let start = map.zero_trajectory();
    iterate_from(&map, start, config)
}

/// Picard iteration from an arbitrary admissible starting trajectory.
pub fn iterate_from<T: Real>(
    map: &SolutionMap<'_, T>,
    start: Trajectory<T>,
    config: &FixedPointConfig<T>,
) -> Result<FixedPointSolution<T>> {
    let problem = map.problem();
    if !problem.compatibility.compatible {
        warn!(
            "initial datum violates the boundary compatibility condition \
             (residuals {:e}, {:e}); the run is outside the classical theory",
            problem.compatibility.left.as_f64(),
            problem.compatibility.right.as_f64()
        );
    }
    map.check_input(&start)?;
    let mut current = start;
    let mut sup_diffs: Vec<T> = Vec::new();
    let mut ratios = Vec::new();
    let mut converged = false;
    for k in 0..config.max_outer_iters {
        let next = map.apply(&current)?;
        let norm = next.sup_norm();
        if !(norm <= config.m_cap) {
            return Err(Error::Divergence {
                iteration: k + 1,
                norm: norm.as_f64(),
                cap: config.m_cap.as_f64(),
            });
        }
        let diff = next.sup_distance(&current)?;
        if let Some(&prev) = sup_diffs.last() {
            ratios.push(if prev > T::zero() {
                diff / prev
            } else {
                T::zero()
            });
        }
        sup_diffs.push(diff);
        current = next;
        if diff <= config.fixed_point_tol {
            converged = true;
            break;
        }
    }
    let report = IterationReport {
        iterates: sup_diffs.len(),
        sup_diffs,
        ratios,
        converged,
        kappa_t: kappa(config.horizon, config.alpha),
    };
    Ok(FixedPointSolution {
        xi: current,
        report,
    })
}

/// `amplitude (t / T) cos(pi (x - x_min) / L)`, an admissible nonzero start.
pub fn probe_start<T: Real>(map: &SolutionMap<'_, T>, amplitude: T) -> Trajectory<T> {
    let grid = &map.problem().grid;
    let times = map.times();
    let horizon = *times.last().expect("at least one level");
    let (x0, len) = (grid.x_min(), grid.length());
    Trajectory::from_fn(FieldKind::DeviationXi, grid.nodes(), times, |x, t| {
        amplitude * (t / horizon) * (T::PI() * (x - x0) / len).cos()
    })
}

/// `||A psi1 - A psi2|| / ||psi1 - psi2||` in the space-time sup norm, with
/// `0` for identical inputs.
pub fn estimate_contraction_ratio<T: Real>(
    psi1: &Trajectory<T>,
    psi2: &Trajectory<T>,
    map: &SolutionMap<'_, T>,
) -> Result<T> {
    let den = psi1.sup_distance(psi2)?;
    if den == T::zero() {
        return Ok(T::zero());
    }
    let a1 = map.apply(psi1)?;
    let a2 = map.apply(psi2)?;
    Ok(a1.sup_distance(&a2)? / den)
}

/// `rho = exp((xi + h0) / D)` at every level.
pub fn rho_trajectory<T: Real>(problem: &Problem<T>, xi: &Trajectory<T>) -> Trajectory<T> {
    xi.map_levels(FieldKind::ScaledRho, |l| {
        let h: Vec<T> = l.iter().zip(&problem.h0).map(|(&x, &h0)| x + h0).collect();
        rho_values(&h, &problem.coeffs.d)
    })
}

/// `f = feq exp((xi + h0) / D)` at every level.
pub fn density_trajectory<T: Real>(problem: &Problem<T>, xi: &Trajectory<T>) -> Trajectory<T> {
    xi.map_levels(FieldKind::DensityF, |l| {
        f_from_xi_values(l, &problem.h0, &problem.coeffs.d, &problem.coeffs.eq.feq)
    })
}
