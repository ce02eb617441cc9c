use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{sup_norm, Real};
use crate::transforms::FieldKind;

/// Time-indexed sequence of nodal fields of one kind.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory<T> {
    pub kind: FieldKind,
    pub times: Vec<T>,
    pub levels: Vec<Vec<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn new(kind: FieldKind, times: Vec<T>, levels: Vec<Vec<T>>) -> Result<Self> {
        if times.is_empty() || times.len() != levels.len() {
            return Err(Error::validation(
                "levels",
                format!("{} time levels but {} fields", times.len(), levels.len()),
            ));
        }
        let n = levels[0].len();
        if levels.iter().any(|l| l.len() != n) {
            return Err(Error::validation("levels", "ragged trajectory"));
        }
        Ok(Self {
            kind,
            times,
            levels,
        })
    }

    /// Zero field on the uniform mesh `0, dt, ..., n_steps * dt`.
    pub fn zeros(kind: FieldKind, n_nodes: usize, dt: T, n_steps: usize) -> Self {
        Self {
            kind,
            times: uniform_times(dt, n_steps),
            levels: vec![vec![T::zero(); n_nodes]; n_steps + 1],
        }
    }

    /// Samples `f(x, t)` on the given nodes and times.
    pub fn from_fn(kind: FieldKind, nodes: &[T], times: Vec<T>, f: impl Fn(T, T) -> T) -> Self {
        let levels = times
            .iter()
            .map(|&t| nodes.iter().map(|&x| f(x, t)).collect())
            .collect();
        Self {
            kind,
            times,
            levels,
        }
    }

    pub fn n_levels(&self) -> usize {
        self.times.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.levels[0].len()
    }

    pub fn final_time(&self) -> T {
        *self.times.last().expect("nonempty")
    }

    /// Sup norm over all nodes and time levels.
    pub fn sup_norm(&self) -> T {
        self.levels
            .iter()
            .fold(T::zero(), |m, l| m.max(sup_norm(l)))
    }

    /// Space-time sup norm of `self - other`.
    pub fn sup_distance(&self, other: &Self) -> Result<T> {
        self.check_same_mesh(other)?;
        Ok(self
            .levels
            .iter()
            .zip(&other.levels)
            .fold(T::zero(), |m, (a, b)| {
                a.iter().zip(b).fold(m, |m, (x, y)| m.max((*x - *y).abs()))
            }))
    }

    pub fn check_same_mesh(&self, other: &Self) -> Result<()> {
        if self.times.len() != other.times.len() || self.n_nodes() != other.n_nodes() {
            return Err(Error::validation(
                "trajectory",
                format!(
                    "mesh mismatch: {}x{} vs {}x{}",
                    self.n_levels(),
                    self.n_nodes(),
                    other.n_levels(),
                    other.n_nodes()
                ),
            ));
        }
        let tol = T::lit(1e-9) * (T::one() + self.final_time().abs());
        if self
            .times
            .iter()
            .zip(&other.times)
            .any(|(a, b)| (*a - *b).abs() > tol)
        {
            return Err(Error::validation("trajectory", "time levels differ"));
        }
        Ok(())
    }

    /// Restriction to the first `n_levels` time levels.
    pub fn prefix(&self, n_levels: usize) -> Self {
        let n = n_levels.clamp(1, self.n_levels());
        Self {
            kind: self.kind,
            times: self.times[..n].to_vec(),
            levels: self.levels[..n].to_vec(),
        }
    }

    /// Pointwise map to a new trajectory of another kind.
    pub fn map_levels(&self, kind: FieldKind, f: impl Fn(&[T]) -> Vec<T>) -> Self {
        Self {
            kind,
            times: self.times.clone(),
            levels: self.levels.iter().map(|l| f(l)).collect(),
        }
    }
}

pub fn uniform_times<T: Real>(dt: T, n_steps: usize) -> Vec<T> {
    (0..=n_steps).map(|k| dt * T::from_usize_lossy(k)).collect()
}

/// Splits `horizon` into an integer number of steps no longer than `dt_max`.
pub fn step_count<T: Real>(horizon: T, dt_max: T) -> Result<(usize, T)> {
    if !(horizon > T::zero()) || !horizon.is_finite() {
        return Err(Error::validation("t_final", "must be positive and finite"));
    }
    if !(dt_max > T::zero()) || dt_max > horizon {
        return Err(Error::validation("dt", "must satisfy 0 < dt <= t_final"));
    }
    let ratio = (horizon / dt_max).as_f64();
    // Absorb round-off so that T = k * dt exactly yields k steps.
    let n = ((ratio - 1e-9).ceil().max(1.0)) as usize;
    Ok((n, horizon / T::from_usize_lossy(n)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_count_is_exact_for_divisible_horizons() {
        let (n, dt) = step_count(0.05, 0.05 / 320.0).unwrap();
        assert_eq!(n, 320);
        assert!((dt - 0.05 / 320.0f64).abs() < 1e-18);
        let (n, dt) = step_count(1.0, 0.3).unwrap();
        assert_eq!(n, 4);
        assert_eq!(dt, 0.25);
        assert!(step_count(1.0, 2.0).is_err());
        assert!(step_count(0.0, 0.1).is_err());
    }

    #[test]
    fn sup_distance_and_prefix() {
        let a = Trajectory::zeros(FieldKind::DeviationXi, 4, 0.1, 3);
        let mut b = a.clone();
        b.levels[2][1] = -0.5;
        assert_eq!(a.sup_distance(&b).unwrap(), 0.5);
        assert_eq!(b.prefix(2).sup_norm(), 0.0);
        assert_eq!(b.prefix(100).n_levels(), 4);
        let c = Trajectory::zeros(FieldKind::DeviationXi, 5, 0.1, 3);
        assert!(a.sup_distance(&c).is_err());
    }
}
