//! Explicit conservative finite-volume scheme for `feq rho_t = div(c feq rho grad(D log rho))`,
//! `c = b^2 / 2D`, on the dual cells of the vertex grid.
//!
//! Face `i + 1/2` carries
//! `F = avg(c feq) * mean(rho_i, rho_{i+1}) * (h_{i+1} - h_i) / dx` with
//! `h = D log rho`; the two boundary faces carry zero. Node `i` is updated by
//! `w_i feq_i (rho_i^{n+1} - rho_i^n) / dt = F_{i+1/2} - F_{i-1/2}` with `w_i`
//! the dual-cell measure, so the trapezoidal mass telescopes exactly.

use serde::{Deserialize, Serialize};

use crate::coefficients::CoefficientSet;
use crate::diagnostics::{self, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::problem::Problem;
use crate::scalar::Real;
use crate::trajectory::{step_count, Trajectory};
use crate::transforms::{check_positive, Field, FieldKind};

/// How `rho` is averaged onto a face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaceMean {
    #[default]
    Geometric,
    Arithmetic,
}

impl FaceMean {
    #[inline]
    pub fn apply<T: Real>(self, a: T, b: T) -> T {
        match self {
            FaceMean::Geometric => (a * b).sqrt(),
            FaceMean::Arithmetic => (a + b) * T::lit(0.5),
        }
    }
}

/// Fluxes on the `n_cells + 2` faces of the dual mesh: entry `0` is the left
/// boundary, entry `k` (`1 <= k <= n_cells`) sits between nodes `k - 1` and
/// `k`, the last entry is the right boundary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluxField<T> {
    pub face_values: Vec<T>,
    pub time: T,
}

impl<T: Real> FluxField<T> {
    /// Net inflow `F_{i+1/2} - F_{i-1/2}` into the dual cell of node `i`.
    pub fn divergence(&self) -> Vec<T> {
        self.face_values.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// Arithmetic face averages of `b^2 feq / (2D)` at time `t`.
pub fn face_coefficients<T: Real>(coeffs: &CoefficientSet<T>, t: T) -> Vec<T> {
    let b2 = coeffs.b_squared_at(t);
    let half = T::lit(0.5);
    let q: Vec<T> = b2
        .iter()
        .zip(&coeffs.eq.feq)
        .zip(&coeffs.d)
        .map(|((&b2, &e), &d)| b2 * e / (d + d))
        .collect();
    q.windows(2).map(|w| (w[0] + w[1]) * half).collect()
}

fn face_fluxes<T: Real>(rho: &[T], h: &[T], c_face: &[T], dx: T, mean: FaceMean) -> Vec<T> {
    let n_cells = c_face.len();
    let mut faces = vec![T::zero(); n_cells + 2];
    for k in 0..n_cells {
        faces[k + 1] = c_face[k] * mean.apply(rho[k], rho[k + 1]) * (h[k + 1] - h[k]) / dx;
    }
    faces
}

fn h_of<T: Real>(rho: &[T], d: &[T]) -> Vec<T> {
    rho.iter().zip(d).map(|(&r, &d)| d * r.ln()).collect()
}

pub fn compute_face_flux<T: Real>(
    rho: &Field<T>,
    coeffs: &CoefficientSet<T>,
    grid: &Grid1D<T>,
    mean: FaceMean,
) -> Result<FluxField<T>> {
    if rho.kind != FieldKind::ScaledRho {
        return Err(Error::validation(
            "rho",
            format!("expected a scaled density, got {:?}", rho.kind),
        ));
    }
    grid.check_len(&rho.values, "rho")?;
    check_positive(&rho.values, "rho")?;
    let h = h_of(&rho.values, &coeffs.d);
    let c = face_coefficients(coeffs, rho.time);
    Ok(FluxField {
        face_values: face_fluxes(&rho.values, &h, &c, grid.dx(), mean),
        time: rho.time,
    })
}

fn advance<T: Real>(
    rho: &[T],
    coeffs: &CoefficientSet<T>,
    grid: &Grid1D<T>,
    dt: T,
    t: T,
    mean: FaceMean,
    step: usize,
) -> Result<Vec<T>> {
    let h = h_of(rho, &coeffs.d);
    let c = face_coefficients(coeffs, t);
    let faces = face_fluxes(rho, &h, &c, grid.dx(), mean);
    let mut next = Vec::with_capacity(rho.len());
    for (i, &r) in rho.iter().enumerate() {
        let v = r + dt * (faces[i + 1] - faces[i]) / (grid.weight(i) * coeffs.eq.feq[i]);
        if !(v > T::zero()) {
            return Err(Error::Cfl {
                step,
                time: (t + dt).as_f64(),
                node: i,
                value: v.as_f64(),
            });
        }
        next.push(v);
    }
    Ok(next)
}

/// One explicit step from `rho_n` at time `rho_n.time`.
pub fn step_fv<T: Real>(
    rho_n: &Field<T>,
    coeffs: &CoefficientSet<T>,
    grid: &Grid1D<T>,
    dt: T,
    mean: FaceMean,
) -> Result<Field<T>> {
    if rho_n.kind != FieldKind::ScaledRho {
        return Err(Error::validation(
            "rho",
            format!("expected a scaled density, got {:?}", rho_n.kind),
        ));
    }
    if !(dt > T::zero()) {
        return Err(Error::validation("dt", "must be positive"));
    }
    grid.check_len(&rho_n.values, "rho")?;
    check_positive(&rho_n.values, "rho")?;
    let values = advance(&rho_n.values, coeffs, grid, dt, rho_n.time, mean, 1)?;
    Ok(Field {
        kind: FieldKind::ScaledRho,
        values,
        time: rho_n.time + dt,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FvConfig<T> {
    pub horizon: T,
    /// Largest admissible step; shortened to divide the horizon.
    pub dt: T,
    pub mean: FaceMean,
    /// Keep every `record_stride`-th level in the trajectory (the final level
    /// is always kept). Diagnostics are recorded at every step regardless.
    pub record_stride: usize,
}

impl<T: Real> FvConfig<T> {
    pub fn new(horizon: T, dt: T) -> Self {
        Self {
            horizon,
            dt,
            mean: FaceMean::Geometric,
            record_stride: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DirectSolution<T> {
    /// Density `f` on the recorded levels.
    pub f: Trajectory<T>,
    /// One record per time level, starting at `t = 0`.
    pub diagnostics: Vec<DiagnosticsRecord<T>>,
    pub rho_final: Vec<T>,
    pub dt: T,
    pub n_steps: usize,
}

/// Marches the finite-volume scheme from `problem.f0()` to the horizon.
pub fn solve_direct<T: Real>(
    problem: &Problem<T>,
    config: &FvConfig<T>,
) -> Result<DirectSolution<T>> {
    let grid = &problem.grid;
    let coeffs = &problem.coeffs;
    let f0 = problem.f0();
    let mass = grid.integrate(&f0)?;
    if (mass - T::one()).abs() > T::lit(1e-8) {
        return Err(Error::validation(
            "f0",
            format!("mass {mass} differs from 1 by more than 1e-8"),
        ));
    }
    if config.record_stride == 0 {
        return Err(Error::validation("record_stride", "must be at least 1"));
    }
    let (n_steps, dt) = step_count(config.horizon, config.dt)?;
    coeffs.check_horizon(grid, config.horizon.as_f64())?;
    let mut rho = problem.rho0.clone();
    let mut t = T::zero();
    let mut times = vec![t];
    let mut levels = vec![f0];
    let mut records = Vec::with_capacity(n_steps + 1);
    records.push(diagnostics::record_rho(problem, &rho, t, config.mean)?);
    for n in 0..n_steps {
        rho = advance(&rho, coeffs, grid, dt, t, config.mean, n + 1)?;
        t = dt * T::from_usize_lossy(n + 1);
        records.push(diagnostics::record_rho(problem, &rho, t, config.mean)?);
        if (n + 1) % config.record_stride == 0 || n + 1 == n_steps {
            times.push(t);
            levels.push(
                rho.iter()
                    .zip(&coeffs.eq.feq)
                    .map(|(&r, &e)| r * e)
                    .collect(),
            );
        }
    }
    Ok(DirectSolution {
        f: Trajectory {
            kind: FieldKind::DensityF,
            times,
            levels,
        },
        diagnostics: records,
        rho_final: rho,
        dt,
        n_steps,
    })
}

/// Reference scheme for constant `D`: explicit central discretization of
/// `f_t = d/dx( (b^2/2D) (D f_x + phi_x f) )` in the density variable, with
/// the face value of `f` averaged arithmetically. Shares nothing with the
/// `rho`-scheme beyond the mesh.
pub fn solve_linear_reference<T: Real>(
    problem: &Problem<T>,
    horizon: T,
    dt_max: T,
) -> Result<Trajectory<T>> {
    let coeffs = &problem.coeffs;
    if !coeffs.has_constant_temperature() {
        return Err(Error::validation(
            "d",
            "the linear reference requires a constant temperature",
        ));
    }
    let grid = &problem.grid;
    let (n_steps, dt) = step_count(horizon, dt_max)?;
    let dx = grid.dx();
    let d = coeffs.d[0];
    let half = T::lit(0.5);
    let mut f = problem.f0();
    let mut times = vec![T::zero()];
    let mut levels = vec![f.clone()];
    for n in 0..n_steps {
        let t = dt * T::from_usize_lossy(n);
        let b2 = coeffs.b_squared_at(t);
        let mut faces = vec![T::zero(); grid.n_cells() + 2];
        for k in 0..grid.n_cells() {
            let c = (b2[k] + b2[k + 1]) * half / (d + d);
            let diffusive = d * (f[k + 1] - f[k]) / dx;
            let drift = (coeffs.phi[k + 1] - coeffs.phi[k]) / dx * (f[k] + f[k + 1]) * half;
            faces[k + 1] = c * (diffusive + drift);
        }
        for i in 0..f.len() {
            f[i] = f[i] + dt * (faces[i + 1] - faces[i]) / grid.weight(i);
        }
        check_positive(&f, "f").map_err(|_| Error::Cfl {
            step: n + 1,
            time: (t + dt).as_f64(),
            node: f.iter().position(|v| !(*v > T::zero())).unwrap_or(0),
            value: f.iter().fold(T::infinity(), |m, &v| m.min(v)).as_f64(),
        })?;
        times.push(t + dt);
        levels.push(f.clone());
    }
    Ok(Trajectory {
        kind: FieldKind::DensityF,
        times,
        levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{CoefficientSpec, Profile};
    use crate::scalar::sup_diff;
    use std::f64::consts::PI;

    fn benchmark(n: usize) -> Problem<f64> {
        let grid = Grid1D::new(0.0, 1.0, n).unwrap();
        let spec = CoefficientSpec::new(
            Profile::CosineBump {
                base: 1.0,
                amplitude: 0.2,
                modes: 1.0,
            },
            Profile::constant(0.0),
            Profile::constant(2f64.sqrt()),
        );
        let coeffs = CoefficientSet::sample(&spec, &grid, 1e-12).unwrap();
        let shape = grid.sample(|x| 1.0 + 0.1 * (PI * x).cos());
        let tol = Problem::default_compat_tol(&grid);
        Problem::normalized(grid, coeffs, shape, tol).unwrap()
    }

    fn unit_coeffs(grid: &Grid1D<f64>) -> CoefficientSet<f64> {
        let spec = CoefficientSpec::new(
            Profile::constant(1.0),
            Profile::constant(0.0),
            Profile::constant(2f64.sqrt()),
        );
        CoefficientSet::sample(&spec, grid, 1e-12).unwrap()
    }

    #[test]
    fn constant_rho_has_zero_flux() {
        let grid = Grid1D::new(0.0, 1.0, 16).unwrap();
        let c = unit_coeffs(&grid);
        let rho = Field::new(FieldKind::ScaledRho, vec![1.0; 17], 0.0).unwrap();
        let flux = compute_face_flux(&rho, &c, &grid, FaceMean::Geometric).unwrap();
        assert_eq!(flux.face_values.len(), 18);
        assert!(flux.face_values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn boundary_faces_are_zero() {
        let p = benchmark(20);
        let rho = Field::new(FieldKind::ScaledRho, p.grid.sample(|x| 1.0 + x * x), 0.0).unwrap();
        for mean in [FaceMean::Geometric, FaceMean::Arithmetic] {
            let flux = compute_face_flux(&rho, &p.coeffs, &p.grid, mean).unwrap();
            assert_eq!(flux.face_values[0], 0.0);
            assert_eq!(*flux.face_values.last().unwrap(), 0.0);
        }
        let bad = Field {
            kind: FieldKind::ScaledRho,
            values: vec![-1.0; 21],
            time: 0.0,
        };
        assert!(matches!(
            compute_face_flux(&bad, &p.coeffs, &p.grid, FaceMean::Geometric),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn exponential_flux_is_second_order() {
        // D = 1, b^2 = 2, feq = 1 on [0, 1]: flux = rho (log rho)' = e^x.
        let err = |n: usize, mean: FaceMean| {
            let grid = Grid1D::new(0.0, 1.0, n).unwrap();
            let c = unit_coeffs(&grid);
            let rho = Field::new(FieldKind::ScaledRho, grid.sample(f64::exp), 0.0).unwrap();
            let flux = compute_face_flux(&rho, &c, &grid, mean).unwrap();
            (0..n)
                .map(|k| {
                    let xm = (k as f64 + 0.5) * grid.dx();
                    ((flux.face_values[k + 1] - xm.exp()) / xm.exp()).abs()
                })
                .fold(0.0, f64::max)
        };
        // The geometric mean of e^x at neighbouring nodes is e^x at the face.
        assert!(err(32, FaceMean::Geometric) < 1e-12);
        let (e1, e2) = (err(32, FaceMean::Arithmetic), err(64, FaceMean::Arithmetic));
        assert!(e1 < 1e-3);
        assert!((e1 / e2).log2() > 1.9, "{e1} {e2}");
    }

    #[test]
    fn equilibrium_is_stationary() {
        let p = benchmark(24);
        let rho = Field::new(FieldKind::ScaledRho, vec![1.0; 25], 0.0).unwrap();
        let next = step_fv(&rho, &p.coeffs, &p.grid, 1e-4, FaceMean::Geometric).unwrap();
        assert!(next.values.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn step_conserves_mass() {
        let p = benchmark(32);
        let dt = p.coeffs.default_time_step(&p.grid, 1.0);
        let mut rho = Field::new(FieldKind::ScaledRho, p.rho0.clone(), 0.0).unwrap();
        let mass = |r: &[f64]| {
            let f: Vec<f64> = r.iter().zip(&p.coeffs.eq.feq).map(|(a, b)| a * b).collect();
            p.grid.integrate(&f).unwrap()
        };
        let m0 = mass(&rho.values);
        for _ in 0..200 {
            let next = step_fv(&rho, &p.coeffs, &p.grid, dt, FaceMean::Geometric).unwrap();
            assert!((mass(&next.values) - mass(&rho.values)).abs() <= 1e-14);
            rho = next;
        }
        assert!((mass(&rho.values) - m0).abs() < 1e-13);
    }

    #[test]
    fn oversized_step_aborts() {
        let p = benchmark(32);
        let dt = 200.0 * p.coeffs.default_time_step(&p.grid, 1.0);
        match solve_direct(&p, &FvConfig::new(20.0 * dt, dt)) {
            Err(Error::Cfl { step, .. }) => assert!(step >= 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn direct_solve_from_equilibrium_is_constant() {
        let p = {
            let b = benchmark(16);
            let tol = Problem::default_compat_tol(&b.grid);
            Problem::new(b.grid.clone(), b.coeffs.clone(), vec![1.0; 17], tol).unwrap()
        };
        let dt = p.coeffs.default_time_step(&p.grid, 0.01);
        let sol = solve_direct(&p, &FvConfig::new(0.01, dt)).unwrap();
        for l in &sol.f.levels {
            assert_eq!(sup_diff(l, &p.coeffs.eq.feq), 0.0);
        }
        assert!(sol.diagnostics.iter().all(|r| r.dissipation_rate == 0.0));
    }

    #[test]
    fn constant_temperature_matches_linear_reference() {
        let run = |n: usize| {
            let grid = Grid1D::new(0.0, 1.0, n).unwrap();
            let spec = CoefficientSpec::new(
                Profile::constant(1.0),
                Profile::Affine {
                    offset: 0.0,
                    slope: 1.0,
                },
                Profile::constant(2f64.sqrt()),
            );
            let coeffs = CoefficientSet::sample(&spec, &grid, 1e-12).unwrap();
            let shape = grid.sample(|x| 1.0 + 0.3 * (PI * x).cos());
            let tol = Problem::default_compat_tol(&grid);
            let p = Problem::normalized(grid, coeffs, shape, tol).unwrap();
            let dt = p.coeffs.default_time_step(&p.grid, 0.05);
            let fv = solve_direct(&p, &FvConfig::new(0.05, dt)).unwrap();
            let lin = solve_linear_reference(&p, 0.05, dt).unwrap();
            sup_diff(fv.f.levels.last().unwrap(), lin.levels.last().unwrap())
        };
        let (e1, e2) = (run(32), run(64));
        assert!(e1 < 5e-3, "{e1}");
        assert!(e2 < e1 / 3.0, "{e1} {e2}");
    }

    #[test]
    fn linear_reference_rejects_variable_temperature() {
        let p = benchmark(16);
        assert!(solve_linear_reference(&p, 0.01, 1e-4).is_err());
    }
}
