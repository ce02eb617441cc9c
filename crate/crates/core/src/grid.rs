//! Uniform vertex-centered mesh of an interval with homogeneous Neumann
//! ghost-point stencils and trapezoidal quadrature.
//!
//! Node `i` sits at `x_min + i * dx`, `i = 0..=n_cells`. The dual cell of an
//! interior node has measure `dx`, the two boundary nodes own half cells; the
//! trapezoid weights are exactly these measures, so quadrature and the
//! finite-volume balance share one notion of "cell".

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Smallest admissible number of cells.
pub const MIN_CELLS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid1D<T> {
    x_min: T,
    x_max: T,
    n_cells: usize,
    dx: T,
    nodes: Vec<T>,
}

impl<T: Real> Grid1D<T> {
    pub fn new(x_min: T, x_max: T, n_cells: usize) -> Result<Self> {
        if !x_min.is_finite() {
            return Err(Error::validation("x_min", "must be finite"));
        }
        if !x_max.is_finite() {
            return Err(Error::validation("x_max", "must be finite"));
        }
        if x_max <= x_min {
            return Err(Error::validation(
                "x_max",
                format!("must exceed x_min ({x_max} <= {x_min})"),
            ));
        }
        if n_cells < MIN_CELLS {
            return Err(Error::validation(
                "n_cells",
                format!("must be at least {MIN_CELLS}, got {n_cells}"),
            ));
        }
        let n = T::from_usize_lossy(n_cells);
        let length = x_max - x_min;
        let dx = length / n;
        // Interpolating from both ends pins the last node to x_max exactly.
        let nodes = (0..=n_cells)
            .map(|i| {
                let s = T::from_usize_lossy(i) / n;
                x_min * (T::one() - s) + x_max * s
            })
            .collect();
        Ok(Self {
            x_min,
            x_max,
            n_cells,
            dx,
            nodes,
        })
    }

    pub fn x_min(&self) -> T {
        self.x_min
    }

    pub fn x_max(&self) -> T {
        self.x_max
    }

    pub fn length(&self) -> T {
        self.x_max - self.x_min
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn n_nodes(&self) -> usize {
        self.n_cells + 1
    }

    pub fn dx(&self) -> T {
        self.dx
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    /// Quadrature weight (dual-cell measure) of node `i`.
    #[inline]
    pub fn weight(&self, i: usize) -> T {
        if i == 0 || i == self.n_cells {
            self.dx * T::lit(0.5)
        } else {
            self.dx
        }
    }

    pub fn check_len(&self, values: &[T], what: &str) -> Result<()> {
        if values.len() != self.n_nodes() {
            return Err(Error::validation(
                what,
                format!(
                    "expected {} nodal values, got {}",
                    self.n_nodes(),
                    values.len()
                ),
            ));
        }
        Ok(())
    }

    /// Trapezoidal rule over the nodes.
    pub fn integrate(&self, values: &[T]) -> Result<T> {
        self.check_len(values, "values")?;
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::validation(
                "values",
                format!("non-finite entry at node {i}"),
            ));
        }
        Ok(self.integrate_unchecked(values))
    }

    pub(crate) fn integrate_unchecked(&self, values: &[T]) -> T {
        let n = self.n_cells;
        let interior: T = values[1..n].iter().copied().sum();
        self.dx * (interior + (values[0] + values[n]) * T::lit(0.5))
    }

    /// Samples `f` at every node.
    pub fn sample(&self, f: impl Fn(T) -> T) -> Vec<T> {
        self.nodes.iter().map(|&x| f(x)).collect()
    }

    /// Central first difference with ghost reflection `u[-1] = u[1]`,
    /// `u[n+1] = u[n-1]`; the boundary entries are therefore zero.
    pub fn gradient(&self, u: &[T]) -> Vec<T> {
        let n = self.n_cells;
        let inv = T::one() / (self.dx + self.dx);
        let mut g = vec![T::zero(); n + 1];
        for i in 1..n {
            g[i] = (u[i + 1] - u[i - 1]) * inv;
        }
        g
    }

    /// Second difference with the same ghost reflection as [`Self::gradient`].
    pub fn laplacian(&self, u: &[T]) -> Vec<T> {
        let n = self.n_cells;
        let inv = T::one() / (self.dx * self.dx);
        let two = T::lit(2.0);
        let mut l = vec![T::zero(); n + 1];
        l[0] = two * (u[1] - u[0]) * inv;
        for i in 1..n {
            l[i] = (u[i + 1] - two * u[i] + u[i - 1]) * inv;
        }
        l[n] = two * (u[n - 1] - u[n]) * inv;
        l
    }

    /// One-sided second-order derivatives at `(x_min, x_max)`.
    pub fn boundary_derivatives(&self, u: &[T]) -> (T, T) {
        let n = self.n_cells;
        let inv = T::one() / (self.dx + self.dx);
        let three = T::lit(3.0);
        let four = T::lit(4.0);
        let left = (-three * u[0] + four * u[1] - u[2]) * inv;
        let right = (three * u[n] - four * u[n - 1] + u[n - 2]) * inv;
        (left, right)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn unit_interval_hundred_cells() {
        let g = Grid1D::new(0.0, 1.0, 100).unwrap();
        assert_relative_eq!(g.dx(), 0.01, epsilon = 1e-15);
        assert_eq!(g.nodes().len(), 101);
        assert_eq!(g.nodes()[0], 0.0);
        assert_eq!(g.nodes()[100], 1.0);
    }

    #[test]
    fn symmetric_interval_eight_cells() {
        let g = Grid1D::new(-1.0, 1.0, 8).unwrap();
        assert_eq!(g.dx(), 0.25);
        assert_eq!(g.n_nodes(), 9);
        for (i, x) in g.nodes().iter().enumerate() {
            assert_relative_eq!(*x, -1.0 + 0.25 * i as f64, epsilon = 1e-15);
        }
    }

    #[test]
    fn rejects_reversed_interval() {
        match Grid1D::new(1.0, 0.0, 100) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "x_max"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_too_few_cells() {
        match Grid1D::new(0.0, 1.0, 7) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "n_cells"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(Grid1D::new(0.0, f64::NAN, 10).is_err());
    }

    #[test]
    fn quadrature_examples() {
        let g = Grid1D::new(0.0, 1.0, 100).unwrap();
        let ones = vec![1.0; 101];
        assert_relative_eq!(g.integrate(&ones).unwrap(), 1.0, epsilon = 1e-14);
        for n in [8, 13, 100] {
            let g = Grid1D::new(0.0, 1.0, n).unwrap();
            let x = g.nodes().to_vec();
            assert_relative_eq!(g.integrate(&x).unwrap(), 0.5, epsilon = 1e-14);
        }
        let sq = g.sample(|x| x * x);
        // 1/3 + dx^2/6 exactly for the trapezoid rule on x^2.
        let q: f64 = g.integrate(&sq).unwrap();
        assert!((q - 0.333350).abs() < 1e-4);
        assert_relative_eq!(q, 1.0 / 3.0 + 1e-4 / 6.0, epsilon = 1e-13);
    }

    #[test]
    fn quadrature_length_mismatch() {
        let g = Grid1D::new(0.0, 1.0, 10).unwrap();
        assert!(g.integrate(&[1.0; 10]).is_err());
        let mut v = vec![1.0; 11];
        v[3] = f64::INFINITY;
        assert!(g.integrate(&v).is_err());
    }

    #[test]
    fn quadrature_refinement_order() {
        let exact: f64 = 1.0 - (1.0f64).cos();
        let errs: Vec<f64> = [16, 32, 64, 128]
            .iter()
            .map(|&n| {
                let g = Grid1D::new(0.0, 1.0, n).unwrap();
                (g.integrate(&g.sample(f64::sin)).unwrap() - exact).abs()
            })
            .collect();
        for w in errs.windows(2) {
            assert!((w[0] / w[1]).log2() >= 1.9, "{errs:?}");
        }
    }

    #[test]
    fn cosine_is_discrete_neumann_eigenvector() {
        let g = Grid1D::new(0.0, 1.0, 20).unwrap();
        let pi = std::f64::consts::PI;
        let u = g.sample(|x| (pi * x).cos());
        let lam = 2.0 / (g.dx() * g.dx()) * (1.0 - (pi * g.dx()).cos());
        for (l, v) in g.laplacian(&u).iter().zip(&u) {
            assert_relative_eq!(*l, -lam * v, epsilon = 1e-10);
        }
        let grad = g.gradient(&u);
        assert_eq!(grad[0], 0.0);
        assert_eq!(grad[20], 0.0);
    }

    #[test]
    fn boundary_derivatives_of_quadratic_are_exact() {
        let g = Grid1D::new(0.0, 2.0, 16).unwrap();
        let u = g.sample(|x| 3.0 * x * x - x);
        let (l, r) = g.boundary_derivatives(&u);
        assert_relative_eq!(l, -1.0, epsilon = 1e-12);
        assert_relative_eq!(r, 11.0, epsilon = 1e-12);
    }
}
