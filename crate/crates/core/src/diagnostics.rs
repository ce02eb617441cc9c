//! Mass, free energy, dissipation and discrete parabolic Hölder norms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::coefficients::{CoefficientSet, EquilibriumState};
use crate::error::{Error, Result};
use crate::fv_oracle::{face_coefficients, FaceMean};
use crate::grid::Grid1D;
use crate::problem::Problem;
use crate::scalar::{min_value, sup_norm, Real};
use crate::trajectory::{uniform_times, Trajectory};
use crate::transforms::{check_positive, FieldKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagnosticsRecord<T> {
    pub time: T,
    pub mass: T,
    pub free_energy: T,
    /// Right side of the energy law; never positive.
    pub dissipation_rate: T,
    pub min_density: T,
    pub sup_xi: T,
}

/// `F[f] = integral D f (log f - 1) + f phi`.
pub fn free_energy_f<T: Real>(f: &[T], d: &[T], phi: &[T], grid: &Grid1D<T>) -> Result<T> {
    grid.check_len(f, "f")?;
    check_positive(f, "f")?;
    let w: Vec<T> = f
        .iter()
        .zip(d)
        .zip(phi)
        .map(|((&f, &d), &p)| d * f * (f.ln() - T::one()) + f * p)
        .collect();
    grid.integrate(&w)
}

/// `F = integral (D (log rho - 1) + C) rho feq`.
pub fn free_energy_rho<T: Real>(
    rho: &[T],
    d: &[T],
    eq: &EquilibriumState<T>,
    grid: &Grid1D<T>,
) -> Result<T> {
    grid.check_len(rho, "rho")?;
    check_positive(rho, "rho")?;
    let w: Vec<T> = rho
        .iter()
        .zip(d)
        .zip(&eq.feq)
        .map(|((&r, &d), &e)| (d * (r.ln() - T::one()) + eq.c_norm) * r * e)
        .collect();
    grid.integrate(&w)
}

/// `F = integral (h - D + C) exp(h / D) feq`.
pub fn free_energy_h<T: Real>(
    h: &[T],
    d: &[T],
    eq: &EquilibriumState<T>,
    grid: &Grid1D<T>,
) -> Result<T> {
    grid.check_len(h, "h")?;
    let w: Vec<T> = h
        .iter()
        .zip(d)
        .zip(&eq.feq)
        .map(|((&h, &d), &e)| (h - d + eq.c_norm) * (h / d).exp() * e)
        .collect();
    grid.integrate(&w)
}

/// `F = integral (xi + h0 - D + C) exp((xi + h0) / D) feq`.
pub fn free_energy_xi<T: Real>(
    xi: &[T],
    h0: &[T],
    d: &[T],
    eq: &EquilibriumState<T>,
    grid: &Grid1D<T>,
) -> Result<T> {
    grid.check_len(xi, "xi")?;
    let h: Vec<T> = xi.iter().zip(h0).map(|(&x, &h)| x + h).collect();
    free_energy_h(&h, d, eq, grid)
}

pub(crate) fn dissipation_rho<T: Real>(
    rho: &[T],
    coeffs: &CoefficientSet<T>,
    grid: &Grid1D<T>,
    t: T,
    mean: FaceMean,
) -> T {
    let c = face_coefficients(coeffs, t);
    let h: Vec<T> = rho
        .iter()
        .zip(&coeffs.d)
        .map(|(&r, &d)| d * r.ln())
        .collect();
    let dx = grid.dx();
    let mut acc = T::zero();
    for k in 0..grid.n_cells() {
        let g = (h[k + 1] - h[k]) / dx;
        acc = acc + c[k] * mean.apply(rho[k], rho[k + 1]) * g * g;
    }
    -(acc * dx)
}

/// `-integral (b^2 / 2D) |grad(phi + D log f)|^2 f` on the face stencil of the
/// finite-volume flux, which makes the semi-discrete energy identity exact.
pub fn dissipation_rate<T: Real>(
    f: &[T],
    coeffs: &CoefficientSet<T>,
    grid: &Grid1D<T>,
    t: T,
) -> Result<T> {
    dissipation_rate_with(f, coeffs, grid, t, FaceMean::Geometric)
}

pub fn dissipation_rate_with<T: Real>(
    f: &[T],
    coeffs: &CoefficientSet<T>,
    grid: &Grid1D<T>,
    t: T,
    mean: FaceMean,
) -> Result<T> {
    grid.check_len(f, "f")?;
    check_positive(f, "f")?;
    let rho: Vec<T> = f.iter().zip(&coeffs.eq.feq).map(|(&f, &e)| f / e).collect();
    Ok(dissipation_rho(&rho, coeffs, grid, t, mean))
}

/// Record for the state `rho` at time `t`.
pub fn record_rho<T: Real>(
    problem: &Problem<T>,
    rho: &[T],
    t: T,
    mean: FaceMean,
) -> Result<DiagnosticsRecord<T>> {
    let grid = &problem.grid;
    let coeffs = &problem.coeffs;
    grid.check_len(rho, "rho")?;
    check_positive(rho, "rho")?;
    let f: Vec<T> = rho
        .iter()
        .zip(&coeffs.eq.feq)
        .map(|(&r, &e)| r * e)
        .collect();
    let sup_xi = rho
        .iter()
        .zip(&coeffs.d)
        .zip(&problem.h0)
        .fold(T::zero(), |m, ((&r, &d), &h0)| {
            m.max((d * r.ln() - h0).abs())
        });
    Ok(DiagnosticsRecord {
        time: t,
        mass: grid.integrate(&f)?,
        free_energy: free_energy_rho(rho, &coeffs.d, &coeffs.eq, grid)?,
        dissipation_rate: dissipation_rho(rho, coeffs, grid, t, mean),
        min_density: min_value(&f),
        sup_xi,
    })
}

/// Records along a density trajectory.
pub fn records_for_density<T: Real>(
    problem: &Problem<T>,
    f: &Trajectory<T>,
) -> Result<Vec<DiagnosticsRecord<T>>> {
    f.levels
        .iter()
        .zip(&f.times)
        .map(|(l, &t)| {
            let rho: Vec<T> = l
                .iter()
                .zip(&problem.coeffs.eq.feq)
                .map(|(&f, &e)| f / e)
                .collect();
            record_rho(problem, &rho, t, FaceMean::Geometric)
        })
        .collect()
}

/// Time derivative of sampled values: centered in the interior, second-order
/// one-sided at both ends.
pub fn time_derivative<T: Real>(times: &[T], values: &[T]) -> Result<Vec<T>> {
    let m = values.len();
    if m < 3 || times.len() != m {
        return Err(Error::validation(
            "values",
            "need at least three samples on matching times",
        ));
    }
    let mut out = vec![T::zero(); m];
    for n in 1..m - 1 {
        out[n] = (values[n + 1] - values[n - 1]) / (times[n + 1] - times[n - 1]);
    }
    let (three, four, two) = (T::lit(3.0), T::lit(4.0), T::lit(2.0));
    let h0 = times[1] - times[0];
    out[0] = (-three * values[0] + four * values[1] - values[2]) / (two * h0);
    let h1 = times[m - 1] - times[m - 2];
    out[m - 1] = (three * values[m - 1] - four * values[m - 2] + values[m - 3]) / (two * h1);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HolderReport<T> {
    pub alpha: T,
    pub sup_norm: T,
    pub space_seminorm: T,
    pub time_seminorm: T,
    pub c_alpha_norm: T,
    pub c2_alpha_norm: T,
    /// Subsampling stride in both directions; `1` is the exact discrete sup.
    pub stride: usize,
}

fn check_alpha<T: Real>(alpha: T) -> Result<()> {
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(Error::validation("alpha", "must lie in (0, 1)"));
    }
    Ok(())
}

fn check_traj<T: Real>(traj: &Trajectory<T>, grid: &Grid1D<T>) -> Result<()> {
    if traj.levels.is_empty() {
        return Err(Error::validation("trajectory", "empty"));
    }
    grid.check_len(&traj.levels[0], "trajectory")
}

fn space_seminorm<T: Real>(levels: &[Vec<T>], nodes: &[T], alpha: T, stride: usize) -> T {
    let mut best = T::zero();
    for l in levels.iter().step_by(stride) {
        for i in (0..nodes.len()).step_by(stride) {
            for j in (i + stride..nodes.len()).step_by(stride) {
                let q = (l[i] - l[j]).abs() / (nodes[j] - nodes[i]).powf(alpha);
                best = best.max(q);
            }
        }
    }
    best
}

fn time_seminorm<T: Real>(levels: &[Vec<T>], times: &[T], beta: T, stride: usize) -> T {
    let mut best = T::zero();
    let m = levels.len();
    for n in (0..m).step_by(stride) {
        for k in (n + stride..m).step_by(stride) {
            let w = (times[k] - times[n]).powf(beta);
            for i in (0..levels[n].len()).step_by(stride) {
                best = best.max((levels[n][i] - levels[k][i]).abs() / w);
            }
        }
    }
    best
}

fn sup_all<T: Real>(levels: &[Vec<T>]) -> T {
    levels.iter().fold(T::zero(), |m, l| m.max(sup_norm(l)))
}

/// First x-derivative: central inside, second-order one-sided at the ends.
fn d_dx<T: Real>(u: &[T], grid: &Grid1D<T>) -> Vec<T> {
    let n = u.len() - 1;
    let inv = T::one() / (grid.dx() + grid.dx());
    let mut g = vec![T::zero(); n + 1];
    for i in 1..n {
        g[i] = (u[i + 1] - u[i - 1]) * inv;
    }
    let (l, r) = grid.boundary_derivatives(u);
    g[0] = l;
    g[n] = r;
    g
}

/// Second x-derivative: three-point inside, four-point one-sided at the ends.
fn d_xx<T: Real>(u: &[T], grid: &Grid1D<T>) -> Vec<T> {
    let n = u.len() - 1;
    let inv = T::one() / (grid.dx() * grid.dx());
    let (two, four, five) = (T::lit(2.0), T::lit(4.0), T::lit(5.0));
    let mut g = vec![T::zero(); n + 1];
    for i in 1..n {
        g[i] = (u[i + 1] - two * u[i] + u[i - 1]) * inv;
    }
    g[0] = (two * u[0] - five * u[1] + four * u[2] - u[3]) * inv;
    g[n] = (two * u[n] - five * u[n - 1] + four * u[n - 2] - u[n - 3]) * inv;
    g
}

/// Forward differences in time, backward at the last level.
fn d_dt<T: Real>(traj: &Trajectory<T>) -> Vec<Vec<T>> {
    let m = traj.n_levels();
    if m < 2 {
        return vec![vec![T::zero(); traj.n_nodes()]; m];
    }
    (0..m)
        .map(|n| {
            let (a, b) = if n + 1 < m { (n, n + 1) } else { (n - 1, n) };
            let dt = traj.times[b] - traj.times[a];
            traj.levels[b]
                .iter()
                .zip(&traj.levels[a])
                .map(|(&u1, &u0)| (u1 - u0) / dt)
                .collect()
        })
        .collect()
}

/// Spatial gradient of every level.
pub fn gradient_trajectory<T: Real>(traj: &Trajectory<T>, grid: &Grid1D<T>) -> Trajectory<T> {
    traj.map_levels(traj.kind, |l| d_dx(l, grid))
}

/// `sup + [.]_alpha + <.>_{alpha/2}` on the full mesh.
pub fn c_alpha_norm<T: Real>(traj: &Trajectory<T>, grid: &Grid1D<T>, alpha: T) -> Result<T> {
    Ok(holder_norms_strided(traj, grid, alpha, 1, false)?.c_alpha_norm)
}

/// All discrete Hölder quantities with exact (unit-stride) suprema.
pub fn holder_norms<T: Real>(
    traj: &Trajectory<T>,
    grid: &Grid1D<T>,
    alpha: T,
) -> Result<HolderReport<T>> {
    holder_norms_strided(traj, grid, alpha, 1, true)
}

/// Like [`holder_norms`] but scanning only every `stride`-th node and level.
/// `with_c2` skips the composite norm when false (it is then reported as 0).
pub fn holder_norms_strided<T: Real>(
    traj: &Trajectory<T>,
    grid: &Grid1D<T>,
    alpha: T,
    stride: usize,
    with_c2: bool,
) -> Result<HolderReport<T>> {
    check_alpha(alpha)?;
    check_traj(traj, grid)?;
    if stride == 0 {
        return Err(Error::validation("stride", "must be at least 1"));
    }
    let nodes = grid.nodes();
    let half = T::lit(0.5);
    let sup = sup_all(&traj.levels);
    let space = space_seminorm(&traj.levels, nodes, alpha, stride);
    let time = time_seminorm(&traj.levels, &traj.times, alpha * half, stride);
    let c2 = if with_c2 {
        let ux: Vec<Vec<T>> = traj.levels.iter().map(|l| d_dx(l, grid)).collect();
        let uxx: Vec<Vec<T>> = traj.levels.iter().map(|l| d_xx(l, grid)).collect();
        let ut = d_dt(traj);
        sup + sup_all(&ux)
            + sup_all(&uxx)
            + sup_all(&ut)
            + space_seminorm(&uxx, nodes, alpha, stride)
            + space_seminorm(&ut, nodes, alpha, stride)
            + time_seminorm(&ux, &traj.times, (T::one() + alpha) * half, stride)
            + time_seminorm(&uxx, &traj.times, alpha * half, stride)
            + time_seminorm(&ut, &traj.times, alpha * half, stride)
    } else {
        T::zero()
    };
    Ok(HolderReport {
        alpha,
        sup_norm: sup,
        space_seminorm: space,
        time_seminorm: time,
        c_alpha_norm: sup + space + time,
        c2_alpha_norm: c2,
        stride,
    })
}

/// Both sides of the two decay inequalities for a trajectory vanishing at
/// `t = 0`; margins are `rhs - lhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayCheck<T> {
    pub horizon: T,
    pub c2_alpha_norm: T,
    pub gradient_lhs: T,
    pub gradient_rhs: T,
    pub value_lhs: T,
    pub value_rhs: T,
    pub gradient_margin: T,
    pub value_margin: T,
    pub passed: bool,
}

// Relative slack for comparing two floating point evaluations of an inequality
// that may hold with equality.
fn holds<T: Real>(lhs: T, rhs: T) -> bool {
    lhs <= rhs + T::lit(1e-12) * rhs.abs()
}

/// `||grad theta||_{C^a} <= 3 (T^{(1+a)/2} + T^{1/2}) ||theta||_{C^{2+a}}` and
/// `||theta||_{C^a} <= 3 (T + T^{1-a/2}) ||theta||_{C^{2+a}}`, with `T` the
/// last time level.
pub fn verify_decay_bounds<T: Real>(
    traj: &Trajectory<T>,
    grid: &Grid1D<T>,
    alpha: T,
) -> Result<DecayCheck<T>> {
    check_alpha(alpha)?;
    check_traj(traj, grid)?;
    if let Some(i) = traj.levels[0].iter().position(|&v| v != T::zero()) {
        return Err(Error::validation(
            "trajectory",
            format!(
                "initial slice must vanish; node {i} is {}",
                traj.levels[0][i]
            ),
        ));
    }
    let horizon = traj.final_time() - traj.times[0];
    let half = T::lit(0.5);
    let three = T::lit(3.0);
    let full = holder_norms(traj, grid, alpha)?;
    let grad = c_alpha_norm(&gradient_trajectory(traj, grid), grid, alpha)?;
    let gradient_rhs =
        three * (horizon.powf((T::one() + alpha) * half) + horizon.sqrt()) * full.c2_alpha_norm;
    let value_rhs = three * (horizon + horizon.powf(T::one() - alpha * half)) * full.c2_alpha_norm;
    Ok(DecayCheck {
        horizon,
        c2_alpha_norm: full.c2_alpha_norm,
        gradient_lhs: grad,
        gradient_rhs,
        value_lhs: full.c_alpha_norm,
        value_rhs,
        gradient_margin: gradient_rhs - grad,
        value_margin: value_rhs - full.c_alpha_norm,
        passed: holds(grad, gradient_rhs) && holds(full.c_alpha_norm, value_rhs),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProductCheck<T> {
    pub product_norm: T,
    pub norm_product: T,
    pub margin: T,
    pub passed: bool,
}

/// `||theta1 theta2||_{C^a} <= ||theta1||_{C^a} ||theta2||_{C^a}`.
pub fn product_norm_check<T: Real>(
    a: &Trajectory<T>,
    b: &Trajectory<T>,
    grid: &Grid1D<T>,
    alpha: T,
) -> Result<ProductCheck<T>> {
    a.check_same_mesh(b)?;
    let prod = Trajectory {
        kind: a.kind,
        times: a.times.clone(),
        levels: a
            .levels
            .iter()
            .zip(&b.levels)
            .map(|(x, y)| x.iter().zip(y).map(|(&u, &v)| u * v).collect())
            .collect(),
    };
    let lhs = c_alpha_norm(&prod, grid, alpha)?;
    let rhs = c_alpha_norm(a, grid, alpha)? * c_alpha_norm(b, grid, alpha)?;
    Ok(ProductCheck {
        product_norm: lhs,
        norm_product: rhs,
        margin: rhs - lhs,
        passed: holds(lhs, rhs),
    })
}

/// Shape of the random trajectories used by the lemma sweeps:
/// `theta = sum_{m, k} c_{mk} cos(m pi (x - x_min) / L) (t / T)^k` with
/// `m < modes`, `k` in `powers` and `c_{mk}` uniform in `[-1, 1] / (1 + m^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandLimited {
    pub modes: usize,
    pub min_power: u32,
    pub max_power: u32,
}

impl BandLimited {
    /// Zero initial slice (`k >= 1`).
    pub const ZERO_SLICE: Self = Self {
        modes: 5,
        min_power: 1,
        max_power: 3,
    };
    pub const GENERIC: Self = Self {
        modes: 5,
        min_power: 0,
        max_power: 2,
    };

    /// Draw number `draw` of the stream determined by `seed`.
    pub fn sample<T: Real>(
        &self,
        seed: u64,
        draw: u64,
        grid: &Grid1D<T>,
        horizon: T,
        n_steps: usize,
    ) -> Trajectory<T> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(draw);
        let n_pow = (self.max_power - self.min_power + 1) as usize;
        let coeffs: Vec<f64> = (0..self.modes * n_pow)
            .map(|j| {
                let m = (j / n_pow) as f64;
                rng.random_range(-1.0..=1.0) / (1.0 + m * m)
            })
            .collect();
        let x0 = grid.x_min();
        let len = grid.length();
        let dt = horizon / T::from_usize_lossy(n_steps);
        let times = uniform_times(dt, n_steps);
        let pi = T::PI();
        Trajectory::from_fn(FieldKind::DeviationXi, grid.nodes(), times, |x, t| {
            let s = t / horizon;
            let mut acc = T::zero();
            for (j, &c) in coeffs.iter().enumerate() {
                let m = T::from_usize_lossy(j / n_pow);
                let k = self.min_power as i32 + (j % n_pow) as i32;
                let tk = if k == 0 { T::one() } else { s.powi(k) };
                acc = acc + T::lit(c) * (m * pi * (x - x0) / len).cos() * tk;
            }
            acc
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaSweepReport {
    pub seed: u64,
    pub alpha: f64,
    pub decay_trials: usize,
    pub decay_failures: usize,
    pub product_trials: usize,
    pub product_failures: usize,
    /// Smallest `rhs - lhs` seen in each family.
    pub worst_gradient_margin: f64,
    pub worst_value_margin: f64,
    pub worst_product_margin: f64,
}

impl LemmaSweepReport {
    pub fn passed(&self) -> bool {
        self.decay_failures == 0 && self.product_failures == 0
    }
}

/// Horizons cycled through by the decay sweep.
pub const SWEEP_HORIZONS: [f64; 3] = [0.05, 0.1, 0.2];

/// Randomized decay and product checks on `grid` with `n_steps` time steps.
pub fn lemma_sweep<T: Real>(
    seed: u64,
    n_decay: usize,
    n_product: usize,
    alpha: T,
    grid: &Grid1D<T>,
    n_steps: usize,
) -> Result<LemmaSweepReport> {
    let mut report = LemmaSweepReport {
        seed,
        alpha: alpha.as_f64(),
        decay_trials: n_decay,
        decay_failures: 0,
        product_trials: n_product,
        product_failures: 0,
        worst_gradient_margin: f64::INFINITY,
        worst_value_margin: f64::INFINITY,
        worst_product_margin: f64::INFINITY,
    };
    for k in 0..n_decay {
        let horizon = T::lit(SWEEP_HORIZONS[k % SWEEP_HORIZONS.len()]);
        let theta = BandLimited::ZERO_SLICE.sample(seed, k as u64, grid, horizon, n_steps);
        let c = verify_decay_bounds(&theta, grid, alpha)?;
        if !c.passed {
            report.decay_failures += 1;
        }
        report.worst_gradient_margin = report.worst_gradient_margin.min(c.gradient_margin.as_f64());
        report.worst_value_margin = report.worst_value_margin.min(c.value_margin.as_f64());
    }
    let offset = n_decay as u64;
    for k in 0..n_product {
        let horizon = T::lit(SWEEP_HORIZONS[k % SWEEP_HORIZONS.len()]);
        let a = BandLimited::GENERIC.sample(seed, offset + 2 * k as u64, grid, horizon, n_steps);
        let b =
            BandLimited::GENERIC.sample(seed, offset + 2 * k as u64 + 1, grid, horizon, n_steps);
        let c = product_norm_check(&a, &b, grid, alpha)?;
        if !c.passed {
            report.product_failures += 1;
        }
        report.worst_product_margin = report.worst_product_margin.min(c.margin.as_f64());
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{CoefficientSpec, Profile};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn unit_grid(n: usize) -> Grid1D<f64> {
        Grid1D::new(0.0, 1.0, n).unwrap()
    }

    fn coeffs(grid: &Grid1D<f64>, d: Profile, phi: Profile) -> CoefficientSet<f64> {
        let spec = CoefficientSpec::new(d, phi, Profile::constant(2f64.sqrt()));
        CoefficientSet::sample(&spec, grid, 1e-12).unwrap()
    }

    fn bump() -> Profile {
        Profile::CosineBump {
            base: 1.0,
            amplitude: 0.2,
            modes: 1.0,
        }
    }

    #[test]
    fn free_energy_of_uniform_density() {
        let g = unit_grid(50);
        let f = vec![1.0; 51];
        let v = free_energy_f(&f, &[1.0; 51], &[0.0; 51], &g).unwrap();
        assert_relative_eq!(v, -1.0, epsilon = 1e-14);
        assert!(free_energy_f(&[0.0; 51], &[1.0; 51], &[0.0; 51], &g).is_err());
    }

    #[test]
    fn free_energy_closed_form_for_linear_potential() {
        // D log f + phi = c pointwise, so F = c - 1 up to quadrature.
        let c = 0.45867514538708193;
        let mut prev = f64::INFINITY;
        for n in [100, 200, 400] {
            let g = unit_grid(n);
            let f = g.sample(|x| (c - x).exp());
            let phi = g.sample(|x| x);
            let v = free_energy_f(&f, &vec![1.0; n + 1], &phi, &g).unwrap();
            let err = (v - (c - 1.0)).abs();
            assert!(err < 1e-5 && err < prev);
            prev = err;
        }
        assert!((c - 1.0 - -0.541325f64).abs() < 1e-6);
    }

    #[test]
    fn four_forms_agree_at_equilibrium_and_off_it() {
        let g = unit_grid(40);
        let cs = coeffs(
            &g,
            bump(),
            Profile::Affine {
                offset: 0.0,
                slope: 1.0,
            },
        );
        for rho in [vec![1.0; 41], g.sample(|x| 1.0 + 0.3 * (PI * x).cos())] {
            let f: Vec<f64> = rho.iter().zip(&cs.eq.feq).map(|(a, b)| a * b).collect();
            let h: Vec<f64> = rho.iter().zip(&cs.d).map(|(r, d)| d * r.ln()).collect();
            let h0 = g.sample(|x| 0.1 * x * x);
            let xi: Vec<f64> = h.iter().zip(&h0).map(|(a, b)| a - b).collect();
            let vf = free_energy_f(&f, &cs.d, &cs.phi, &g).unwrap();
            let vr = free_energy_rho(&rho, &cs.d, &cs.eq, &g).unwrap();
            let vh = free_energy_h(&h, &cs.d, &cs.eq, &g).unwrap();
            let vx = free_energy_xi(&xi, &h0, &cs.d, &cs.eq, &g).unwrap();
            for v in [vr, vh, vx] {
                assert!((v - vf).abs() < 1e-12, "{v} {vf}");
            }
        }
    }

    #[test]
    fn equilibrium_minimizes_free_energy() {
        let g = unit_grid(64);
        let cs = coeffs(
            &g,
            bump(),
            Profile::Affine {
                offset: 0.0,
                slope: 0.7,
            },
        );
        let feq = &cs.eq.feq;
        let f_eq = free_energy_f(feq, &cs.d, &cs.phi, &g).unwrap();
        for k in 0..20 {
            let p = BandLimited::GENERIC.sample(7, k, &g, 1.0, 1);
            let pert: Vec<f64> = feq
                .iter()
                .zip(&p.levels[1])
                .map(|(e, q)| e * (1.0 + 0.1 * q))
                .collect();
            let m = g.integrate(&pert).unwrap();
            let pert: Vec<f64> = pert.iter().map(|v| v / m).collect();
            assert!(f_eq <= free_energy_f(&pert, &cs.d, &cs.phi, &g).unwrap());
        }
    }

    #[test]
    fn dissipation_sign_and_equilibrium() {
        let g = unit_grid(32);
        let cs = coeffs(
            &g,
            bump(),
            Profile::Affine {
                offset: 0.0,
                slope: 1.0,
            },
        );
        assert!(dissipation_rate(&cs.eq.feq, &cs, &g, 0.0).unwrap().abs() < 1e-10);
        let f: Vec<f64> = cs
            .eq
            .feq
            .iter()
            .zip(g.nodes())
            .map(|(e, x)| e * (1.0 + x))
            .collect();
        assert!(dissipation_rate(&f, &cs, &g, 0.0).unwrap() < 0.0);
        assert!(dissipation_rate_with(&f, &cs, &g, 0.0, FaceMean::Arithmetic).unwrap() < 0.0);
    }

    #[test]
    fn centered_time_derivative_is_exact_for_quadratics() {
        let t: Vec<f64> = (0..6).map(|k| 0.1 * k as f64).collect();
        let v: Vec<f64> = t.iter().map(|t| 3.0 * t * t - t).collect();
        for (d, t) in time_derivative(&t, &v).unwrap().iter().zip(&t) {
            assert_relative_eq!(*d, 6.0 * t - 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn constant_trajectory_norms() {
        let g = unit_grid(10);
        let tr = Trajectory::from_fn(
            FieldKind::DeviationXi,
            g.nodes(),
            uniform_times(0.1, 5),
            |_, _| -2.5,
        );
        let r = holder_norms(&tr, &g, 0.5).unwrap();
        assert_eq!(r.sup_norm, 2.5);
        assert_eq!(r.space_seminorm, 0.0);
        assert_eq!(r.time_seminorm, 0.0);
        assert_eq!(r.c_alpha_norm, 2.5);
        assert_eq!(r.c2_alpha_norm, 2.5);
    }

    #[test]
    fn linear_in_space_and_time() {
        let g = unit_grid(16);
        for alpha in [0.25, 0.5, 0.75] {
            let tr = Trajectory::from_fn(
                FieldKind::DeviationXi,
                g.nodes(),
                uniform_times(0.05, 4),
                |x, _| x,
            );
            let r = holder_norms(&tr, &g, alpha).unwrap();
            assert_relative_eq!(r.space_seminorm, 1.0, epsilon = 1e-14);
            assert_eq!(r.time_seminorm, 0.0);
            let tr = Trajectory::from_fn(
                FieldKind::DeviationXi,
                g.nodes(),
                uniform_times(0.05, 4),
                |_, t| t,
            );
            let r = holder_norms(&tr, &g, alpha).unwrap();
            assert_relative_eq!(
                r.time_seminorm,
                0.2f64.powf(1.0 - alpha / 2.0),
                epsilon = 1e-14
            );
            assert_eq!(r.space_seminorm, 0.0);
            assert_eq!(
                r.c_alpha_norm,
                r.sup_norm + r.space_seminorm + r.time_seminorm
            );
        }
        assert!(holder_norms(
            &Trajectory::from_fn(FieldKind::DeviationXi, g.nodes(), vec![0.0], |x, _| x),
            &g,
            1.0
        )
        .is_err());
    }

    #[test]
    fn stride_gives_a_lower_bound() {
        let g = unit_grid(24);
        let tr = BandLimited::GENERIC.sample(3, 0, &g, 0.1, 12);
        let full = holder_norms(&tr, &g, 0.5).unwrap();
        let coarse = holder_norms_strided(&tr, &g, 0.5, 3, true).unwrap();
        assert!(coarse.space_seminorm <= full.space_seminorm);
        assert!(coarse.time_seminorm <= full.time_seminorm);
        assert_eq!(coarse.stride, 3);
    }

    #[test]
    fn decay_bounds_examples() {
        let g = unit_grid(32);
        let zero = Trajectory::zeros(FieldKind::DeviationXi, 33, 0.005, 20);
        let c = verify_decay_bounds(&zero, &g, 0.5).unwrap();
        assert!(c.passed);
        assert_eq!(c.gradient_margin, 0.0);
        assert_eq!(c.value_margin, 0.0);
        let tr = Trajectory::from_fn(
            FieldKind::DeviationXi,
            g.nodes(),
            uniform_times(0.005, 20),
            |x, t| t * (PI * x).cos(),
        );
        let c = verify_decay_bounds(&tr, &g, 0.5).unwrap();
        assert!(c.passed, "{c:?}");
        let shifted = tr.map_levels(FieldKind::DeviationXi, |l| {
            l.iter().map(|v| v + 1.0).collect()
        });
        assert!(verify_decay_bounds(&shifted, &g, 0.5).is_err());
    }

    #[test]
    fn product_examples() {
        let g = unit_grid(16);
        let times = uniform_times(0.01, 10);
        let a = BandLimited::GENERIC.sample(11, 0, &g, 0.1, 10);
        let one = Trajectory::from_fn(FieldKind::DeviationXi, g.nodes(), times.clone(), |_, _| 1.0);
        let c = product_norm_check(&a, &one, &g, 0.5).unwrap();
        assert!(c.passed);
        assert!(c.margin.abs() < 1e-12 * c.norm_product);
        let x = Trajectory::from_fn(FieldKind::DeviationXi, g.nodes(), times, |x, _| x);
        assert!(product_norm_check(&x, &x, &g, 0.5).unwrap().passed);
        let short = Trajectory::zeros(FieldKind::DeviationXi, 17, 0.01, 5);
        assert!(product_norm_check(&a, &short, &g, 0.5).is_err());
    }

    #[test]
    fn sweep_is_deterministic_and_passes() {
        let g = unit_grid(24);
        let a = lemma_sweep(42, 12, 6, 0.5, &g, 12).unwrap();
        let b = lemma_sweep(42, 12, 6, 0.5, &g, 12).unwrap();
        assert_eq!(a, b);
        assert!(a.passed(), "{a:?}");
        let tr = BandLimited::ZERO_SLICE.sample(42, 0, &g, 0.1, 12);
        assert!(tr.levels[0].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn c_alpha_norm_grows_with_horizon() {
        let g = unit_grid(20);
        let tr = BandLimited::ZERO_SLICE.sample(5, 1, &g, 0.2, 40);
        let mut prev = 0.0;
        for n in [2, 5, 10, 20, 40] {
            let v = c_alpha_norm(&tr.prefix(n + 1), &g, 0.5).unwrap();
            assert!(v >= prev);
            prev = v;
        }
        let tiny = Trajectory::from_fn(
            FieldKind::DeviationXi,
            g.nodes(),
            uniform_times(1e-6, 4),
            |x, t| t * (PI * x).cos(),
        );
        assert!(c_alpha_norm(&tiny, &g, 0.5).unwrap() < 1e-2);
    }
}
