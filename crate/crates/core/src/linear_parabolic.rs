//! The linearized `xi`-problem `d_t eta = L eta + g0 + G(psi)` with
//! homogeneous Neumann data and zero initial value, discretized by central
//! differences in space and a theta-scheme in time.
//!
//! With `q = b^2 feq / (2D)`:
//!
//! ```text
//! L xi  = b^2/2 xi'' + [ (D/feq) q' + (b^2/D) h0' - b^2 h0 D' / (2 D^2) ] xi'
//!         - [ b^2 D' h0' / (2 D^2) ] xi
//! g0    = b^2/2 h0'' + (D/feq) q' h0' + b^2/(2D) h0'^2 - b^2 h0 h0' D' / (2 D^2)
//! G(xi) = b^2/(2D) xi'^2 - b^2 xi xi' D' / (2 D^2)
//! ```

use serde::Serialize;

use crate::coefficients::CoefficientSet;
use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::problem::{Problem, TermOptions};
use crate::scalar::Real;
use crate::trajectory::{step_count, uniform_times, Trajectory};
use crate::transforms::{Field, FieldKind};
use crate::tridiag::{Tridiagonal, TridiagonalLu};

/// Coefficients of `L xi = a2 xi'' + a1 xi' + a0 xi` at one time level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorCoefficients<T> {
    pub a2: Vec<T>,
    pub a1: Vec<T>,
    pub a0: Vec<T>,
    pub time: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForcingField<T> {
    pub g0_values: Vec<T>,
    pub time: T,
}

/// Every contribution that carries a factor `grad D`, kept apart so the
/// constant-temperature reduction can be checked term by term.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TemperatureGradientTerms<T> {
    /// `-b^2 h0 D' / (2 D^2)` in the drift of `L`.
    pub drift: Vec<T>,
    /// `-b^2 D' h0' / (2 D^2)`, the reaction coefficient of `L`.
    pub reaction: Vec<T>,
    /// `-b^2 h0 h0' D' / (2 D^2)` in `g0`.
    pub forcing: Vec<T>,
    /// `-b^2 psi psi' D' / (2 D^2)` in `G(psi)`.
    pub nonlinear: Vec<T>,
}

struct Pointwise<T> {
    b2: Vec<T>,
    d_grad: Vec<T>,
    q_drift: Vec<T>,
}

fn pointwise<T: Real>(coeffs: &CoefficientSet<T>, grid: &Grid1D<T>, t: T) -> Pointwise<T> {
    let b2 = coeffs.b_squared_at(t);
    let feq = &coeffs.eq.feq;
    let d = &coeffs.d;
    let half = T::lit(0.5);
    let q: Vec<T> = (0..b2.len())
        .map(|i| half * b2[i] * feq[i] / d[i])
        .collect();
    let dq = grid.gradient(&q);
    let q_drift = (0..b2.len()).map(|i| d[i] / feq[i] * dq[i]).collect();
    Pointwise {
        b2,
        d_grad: grid.gradient(d),
        q_drift,
    }
}

/// `-b^2 D' / (2 D^2)`, the common factor of every temperature-gradient term.
fn cross_factor<T: Real>(b2: &[T], d: &[T], d_grad: &[T]) -> Vec<T> {
    let half = T::lit(0.5);
    (0..b2.len())
        .map(|i| -half * b2[i] * d_grad[i] / (d[i] * d[i]))
        .collect()
}

pub fn assemble_operator<T: Real>(
    coeffs: &CoefficientSet<T>,
    h0: &[T],
    grid: &Grid1D<T>,
    t: T,
    opts: TermOptions,
) -> Result<OperatorCoefficients<T>> {
    grid.check_len(h0, "h0")?;
    let pw = pointwise(coeffs, grid, t);
    let d = &coeffs.d;
    let h0_grad = grid.gradient(h0);
    let cross = cross_factor(&pw.b2, d, &pw.d_grad);
    let n = pw.b2.len();
    let half = T::lit(0.5);
    let mut a2 = Vec::with_capacity(n);
    let mut a1 = Vec::with_capacity(n);
    let mut a0 = Vec::with_capacity(n);
    for i in 0..n {
        a2.push(half * pw.b2[i]);
        let mut drift = pw.q_drift[i] + pw.b2[i] / d[i] * h0_grad[i];
        let mut reaction = T::zero();
        if opts.temperature_gradient_terms {
            drift = drift + cross[i] * h0[i];
            reaction = cross[i] * h0_grad[i];
        }
        a1.push(drift);
        a0.push(reaction);
    }
    let floor = half * coeffs.b_floor() * coeffs.b_floor();
    if let Some(i) = a2.iter().position(|&v| !(v >= floor)) {
        return Err(Error::validation(
            "b",
            format!(
                "uniform parabolicity lost at node {i}, t = {t}: b^2/2 = {} < {}",
                a2[i], floor
            ),
        ));
    }
    Ok(OperatorCoefficients {
        a2,
        a1,
        a0,
        time: t,
    })
}

pub fn compute_g0<T: Real>(
    coeffs: &CoefficientSet<T>,
    h0: &[T],
    grid: &Grid1D<T>,
    t: T,
    opts: TermOptions,
) -> Result<ForcingField<T>> {
    grid.check_len(h0, "h0")?;
    let pw = pointwise(coeffs, grid, t);
    let d = &coeffs.d;
    let h0_grad = grid.gradient(h0);
    let h0_lap = grid.laplacian(h0);
    let cross = cross_factor(&pw.b2, d, &pw.d_grad);
    let half = T::lit(0.5);
    let g0_values = (0..h0.len())
        .map(|i| {
            let mut g = half * pw.b2[i] * h0_lap[i]
                + pw.q_drift[i] * h0_grad[i]
                + half * pw.b2[i] / d[i] * h0_grad[i] * h0_grad[i];
            if opts.temperature_gradient_terms {
                g = g + cross[i] * h0[i] * h0_grad[i];
            }
            g
        })
        .collect();
    Ok(ForcingField { g0_values, time: t })
}

/// Pointwise weights of `G`: `G = quad * psi'^2 + cross * psi * psi'`.
struct NonlinearWeights<T> {
    quad: Vec<T>,
    cross: Vec<T>,
}

fn nonlinear_weights<T: Real>(
    coeffs: &CoefficientSet<T>,
    b2: &[T],
    d_grad: &[T],
    opts: TermOptions,
) -> NonlinearWeights<T> {
    let d = &coeffs.d;
    let half = T::lit(0.5);
    let mut quad: Vec<T> = (0..b2.len()).map(|i| half * b2[i] / d[i]).collect();
    let mut cross = if opts.temperature_gradient_terms {
        cross_factor(b2, d, d_grad)
    } else {
        vec![T::zero(); b2.len()]
    };
    if opts.paper_literal_g {
        for (i, e) in coeffs.eq.feq.iter().enumerate() {
            quad[i] = quad[i] * *e;
            cross[i] = cross[i] * *e;
        }
    }
    NonlinearWeights { quad, cross }
}

fn eval_nonlinear<T: Real>(w: &NonlinearWeights<T>, psi: &[T], grid: &Grid1D<T>) -> Vec<T> {
    let g = grid.gradient(psi);
    (0..psi.len())
        .map(|i| w.quad[i] * g[i] * g[i] + w.cross[i] * psi[i] * g[i])
        .collect()
}

/// The quadratic nonlinearity `G(psi)` at time `t`.
pub fn compute_g<T: Real>(
    psi: &Field<T>,
    coeffs: &CoefficientSet<T>,
    grid: &Grid1D<T>,
    t: T,
    opts: TermOptions,
) -> Result<Vec<T>> {
    grid.check_len(&psi.values, "psi")?;
    let b2 = coeffs.b_squared_at(t);
    let d_grad = grid.gradient(&coeffs.d);
    let w = nonlinear_weights(coeffs, &b2, &d_grad, opts);
    Ok(eval_nonlinear(&w, &psi.values, grid))
}

/// The four temperature-gradient contributions evaluated at `t` for the
/// deviation `psi`.
pub fn temperature_gradient_terms<T: Real>(
    problem: &Problem<T>,
    psi: &[T],
    t: T,
) -> TemperatureGradientTerms<T> {
    let grid = &problem.grid;
    let b2 = problem.coeffs.b_squared_at(t);
    let cross = cross_factor(&b2, &problem.coeffs.d, &grid.gradient(&problem.coeffs.d));
    let h0 = &problem.h0;
    let h0_grad = grid.gradient(h0);
    let psi_grad = grid.gradient(psi);
    let n = h0.len();
    TemperatureGradientTerms {
        drift: (0..n).map(|i| cross[i] * h0[i]).collect(),
        reaction: (0..n).map(|i| cross[i] * h0_grad[i]).collect(),
        forcing: (0..n).map(|i| cross[i] * h0[i] * h0_grad[i]).collect(),
        nonlinear: (0..n).map(|i| cross[i] * psi[i] * psi_grad[i]).collect(),
    }
}

/// `L xi` with ghost-point Neumann reflection.
pub fn apply_operator<T: Real>(op: &OperatorCoefficients<T>, xi: &[T], grid: &Grid1D<T>) -> Vec<T> {
    let lap = grid.laplacian(xi);
    let grad = grid.gradient(xi);
    (0..xi.len())
        .map(|i| op.a2[i] * lap[i] + op.a1[i] * grad[i] + op.a0[i] * xi[i])
        .collect()
}

/// Matrix of `I + scale * L`, boundary rows folded by ghost reflection.
fn shifted_operator<T: Real>(
    op: &OperatorCoefficients<T>,
    grid: &Grid1D<T>,
    scale: T,
) -> Tridiagonal<T> {
    let n = op.a2.len();
    let inv_dx2 = T::one() / (grid.dx() * grid.dx());
    let inv_2dx = T::one() / (grid.dx() + grid.dx());
    let two = T::lit(2.0);
    let mut lower = vec![T::zero(); n];
    let mut diag = vec![T::zero(); n];
    let mut upper = vec![T::zero(); n];
    for i in 0..n {
        diag[i] = T::one() + scale * (op.a0[i] - two * op.a2[i] * inv_dx2);
        if i == 0 {
            upper[i] = scale * two * op.a2[i] * inv_dx2;
        } else if i == n - 1 {
            lower[i] = scale * two * op.a2[i] * inv_dx2;
        } else {
            lower[i] = scale * (op.a2[i] * inv_dx2 - op.a1[i] * inv_2dx);
            upper[i] = scale * (op.a2[i] * inv_dx2 + op.a1[i] * inv_2dx);
        }
    }
    Tridiagonal { lower, diag, upper }
}

fn check_theta<T: Real>(theta: T) -> Result<()> {
    if !(theta >= T::lit(0.5) && theta <= T::one()) {
        return Err(Error::validation(
            "solver.theta",
            format!("must lie in [0.5, 1], got {theta}"),
        ));
    }
    Ok(())
}

/// One theta-step: `(I - theta dt L) xi' = (I + (1 - theta) dt L) xi + dt rhs`.
pub fn step_theta<T: Real>(
    xi_n: &Field<T>,
    op: &OperatorCoefficients<T>,
    rhs: &[T],
    dt: T,
    theta: T,
    grid: &Grid1D<T>,
) -> Result<Field<T>> {
    check_theta(theta)?;
    if !(dt > T::zero()) {
        return Err(Error::validation("dt", "must be positive"));
    }
    grid.check_len(&xi_n.values, "xi")?;
    grid.check_len(rhs, "rhs")?;
    let lhs = shifted_operator(op, grid, -theta * dt).factor()?;
    let explicit = shifted_operator(op, grid, (T::one() - theta) * dt);
    let mut next = explicit.mul_vec(&xi_n.values);
    for (v, r) in next.iter_mut().zip(rhs) {
        *v = *v + dt * *r;
    }
    lhs.solve_in_place(&mut next);
    Ok(Field {
        kind: FieldKind::DeviationXi,
        values: next,
        time: xi_n.time + dt,
    })
}

struct Stage<T> {
    g0: Vec<T>,
    weights: NonlinearWeights<T>,
    lhs: TridiagonalLu<T>,
    explicit: Tridiagonal<T>,
}

/// The discrete solution map `psi -> eta` on a fixed time mesh, with the
/// operator, forcing and factorizations precomputed per stage time
/// `t_n + theta dt` (a single stage when `b` does not depend on time).
pub struct SolutionMap<'a, T> {
    problem: &'a Problem<T>,
    dt: T,
    n_steps: usize,
    theta: T,
    opts: TermOptions,
    stages: Vec<Stage<T>>,
}

impl<'a, T: Real> SolutionMap<'a, T> {
    /// `dt_max` is shortened so that an integer number of steps fits `horizon`.
    pub fn new(
        problem: &'a Problem<T>,
        horizon: T,
        dt_max: T,
        theta: T,
        opts: TermOptions,
    ) -> Result<Self> {
        check_theta(theta)?;
        let (n_steps, dt) = step_count(horizon, dt_max)?;
        problem
            .coeffs
            .check_horizon(&problem.grid, horizon.as_f64())?;
        let n_stages = if problem.coeffs.is_autonomous() {
            1
        } else {
            n_steps
        };
        let stages = (0..n_stages)
            .map(|n| {
                let t = dt * (T::from_usize_lossy(n) + theta);
                Self::stage(problem, t, dt, theta, opts)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            problem,
            dt,
            n_steps,
            theta,
            opts,
            stages,
        })
    }

    fn stage(problem: &Problem<T>, t: T, dt: T, theta: T, opts: TermOptions) -> Result<Stage<T>> {
        let grid = &problem.grid;
        let coeffs = &problem.coeffs;
        let op = assemble_operator(coeffs, &problem.h0, grid, t, opts)?;
        let g0 = compute_g0(coeffs, &problem.h0, grid, t, opts)?.g0_values;
        let b2 = coeffs.b_squared_at(t);
        let weights = nonlinear_weights(coeffs, &b2, &grid.gradient(&coeffs.d), opts);
        Ok(Stage {
            g0,
            weights,
            lhs: shifted_operator(&op, grid, -theta * dt).factor()?,
            explicit: shifted_operator(&op, grid, (T::one() - theta) * dt),
        })
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn options(&self) -> TermOptions {
        self.opts
    }

    pub fn problem(&self) -> &Problem<T> {
        self.problem
    }

    pub fn times(&self) -> Vec<T> {
        uniform_times(self.dt, self.n_steps)
    }

    /// The zero deviation on this map's mesh.
    pub fn zero_trajectory(&self) -> Trajectory<T> {
        Trajectory::zeros(
            FieldKind::DeviationXi,
            self.problem.n_nodes(),
            self.dt,
            self.n_steps,
        )
    }

    pub fn check_input(&self, psi: &Trajectory<T>) -> Result<()> {
        if psi.n_levels() != self.n_steps + 1 || psi.n_nodes() != self.problem.n_nodes() {
            return Err(Error::validation(
                "psi",
                format!(
                    "expected {} levels of {} nodes, got {} of {}",
                    self.n_steps + 1,
                    self.problem.n_nodes(),
                    psi.n_levels(),
                    psi.n_nodes()
                ),
            ));
        }
        let tol = T::lit(1e-9) * self.dt;
        for (k, (a, b)) in psi.times.iter().zip(self.times()).enumerate() {
            if (*a - b).abs() > tol {
                return Err(Error::validation(
                    "psi",
                    format!("time level {k} is {a}, expected {b}"),
                ));
            }
        }
        if psi.levels[0].iter().any(|v| *v != T::zero()) {
            return Err(Error::validation("psi", "must vanish at t = 0"));
        }
        Ok(())
    }

    /// `eta = A psi`: theta-march with forcing `g0 + G(psi)` where `G` is
    /// evaluated on `(1 - theta) psi_n + theta psi_{n+1}` at the stage time.
    pub fn apply(&self, psi: &Trajectory<T>) -> Result<Trajectory<T>> {
        self.check_input(psi)?;
        let grid = &self.problem.grid;
        let n_nodes = self.problem.n_nodes();
        let one_minus = T::one() - self.theta;
        let mut levels = Vec::with_capacity(self.n_steps + 1);
        levels.push(vec![T::zero(); n_nodes]);
        let mut blend = vec![T::zero(); n_nodes];
        for n in 0..self.n_steps {
            let stage = &self.stages[n.min(self.stages.len() - 1)];
            let (p0, p1) = (&psi.levels[n], &psi.levels[n + 1]);
            for i in 0..n_nodes {
                blend[i] = one_minus * p0[i] + self.theta * p1[i];
            }
            let g = eval_nonlinear(&stage.weights, &blend, grid);
            let mut next = stage.explicit.mul_vec(&levels[n]);
            for i in 0..n_nodes {
                next[i] = next[i] + self.dt * (stage.g0[i] + g[i]);
            }
            stage.lhs.solve_in_place(&mut next);
            levels.push(next);
        }
        Ok(Trajectory {
            kind: FieldKind::DeviationXi,
            times: self.times(),
            levels,
        })
    }

    /// March with an arbitrary per-step forcing `rhs(n)` and no `g0`/`G`;
    /// the linear part of the map.
    pub fn march_forced(&self, rhs: impl Fn(usize) -> Vec<T>) -> Result<Trajectory<T>> {
        let n_nodes = self.problem.n_nodes();
        let mut levels = Vec::with_capacity(self.n_steps + 1);
        levels.push(vec![T::zero(); n_nodes]);
        for n in 0..self.n_steps {
            let stage = &self.stages[n.min(self.stages.len() - 1)];
            let r = rhs(n);
            self.problem.grid.check_len(&r, "rhs")?;
            let mut next = stage.explicit.mul_vec(&levels[n]);
            for i in 0..n_nodes {
                next[i] = next[i] + self.dt * r[i];
            }
            stage.lhs.solve_in_place(&mut next);
            levels.push(next);
        }
        Ok(Trajectory {
            kind: FieldKind::DeviationXi,
            times: self.times(),
            levels,
        })
    }
}

/// One application of the solution map on the mesh `{0, dt, ..., T}`.
pub fn solve_linear_parabolic<T: Real>(
    psi: &Trajectory<T>,
    problem: &Problem<T>,
    dt: T,
    horizon: T,
    theta: T,
    opts: TermOptions,
) -> Result<Trajectory<T>> {
    SolutionMap::new(problem, horizon, dt, theta, opts)?.apply(psi)
}
