use serde::{Deserialize, Serialize};

use crate::coefficients::{check_compatibility, CoefficientSet, Compatibility};
use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::scalar::Real;
use crate::transforms::{check_positive, h_values};

/// Which terms of the `xi`-equation are switched on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermOptions {
    /// Multiply both terms of the quadratic nonlinearity `G` by `feq`, as the
    /// collected operator form is sometimes written. Off by default: the
    /// expansion of `|grad h|^2` and `h grad h . grad D` carries no `feq`.
    pub paper_literal_g: bool,
    /// Keep every term carrying `grad D`. Turning this off gives the linear
    /// (constant temperature) equation transported to the `xi` variable.
    pub temperature_gradient_terms: bool,
}

impl Default for TermOptions {
    fn default() -> Self {
        Self {
            paper_literal_g: false,
            temperature_gradient_terms: true,
        }
    }
}

/// Everything that defines one initial-boundary value problem on a grid.
#[derive(Debug, Clone)]
pub struct Problem<T> {
    pub grid: Grid1D<T>,
    pub coeffs: CoefficientSet<T>,
    /// Initial scaled density `f0 / feq`.
    pub rho0: Vec<T>,
    /// `D log rho0`, frozen into the coefficients of the linearized operator.
    pub h0: Vec<T>,
    pub compatibility: Compatibility<T>,
}

impl<T: Real> Problem<T> {
    /// Builds the problem from an initial scaled density. The compatibility
    /// residuals are recorded but not enforced.
    pub fn new(
        grid: Grid1D<T>,
        coeffs: CoefficientSet<T>,
        rho0: Vec<T>,
        compat_tol: T,
    ) -> Result<Self> {
        grid.check_len(&rho0, "rho0")?;
        check_positive(&rho0, "rho0")?;
        let h0 = h_values(&rho0, &coeffs.d)?;
        let compatibility = check_compatibility(&rho0, &coeffs.d, &grid, compat_tol)?;
        Ok(Self {
            grid,
            coeffs,
            rho0,
            h0,
            compatibility,
        })
    }

    /// Like [`Problem::new`] but rescales `rho0_shape` so that
    /// `integral rho0 * feq = 1`.
    pub fn normalized(
        grid: Grid1D<T>,
        coeffs: CoefficientSet<T>,
        rho0_shape: Vec<T>,
        compat_tol: T,
    ) -> Result<Self> {
        grid.check_len(&rho0_shape, "rho0")?;
        check_positive(&rho0_shape, "rho0")?;
        let f: Vec<T> = rho0_shape
            .iter()
            .zip(&coeffs.eq.feq)
            .map(|(&r, &e)| r * e)
            .collect();
        let mass = grid.integrate(&f)?;
        if !(mass > T::zero()) {
            return Err(Error::validation("rho0", "zero initial mass"));
        }
        let rho0 = rho0_shape.iter().map(|&r| r / mass).collect();
        Self::new(grid, coeffs, rho0, compat_tol)
    }

    /// Default compatibility tolerance `10 dx^2`.
    pub fn default_compat_tol(grid: &Grid1D<T>) -> T {
        T::lit(10.0) * grid.dx() * grid.dx()
    }

    pub fn f0(&self) -> Vec<T> {
        self.rho0
            .iter()
            .zip(&self.coeffs.eq.feq)
            .map(|(&r, &e)| r * e)
            .collect()
    }

    pub fn n_nodes(&self) -> usize {
        self.grid.n_nodes()
    }
}
