//! Problem data `D(x)`, `phi(x)`, `b(x,t)`: families, sampling, the strong
//! positivity floors, the equilibrium density and the compatibility check on
//! the initial datum.
//!
//! Built-in families are smooth (analytic) on the closed interval, so they
//! meet any Hölder-regularity requirement; tabulated data is taken as given.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::scalar::{max_value, min_value, Real};

/// Spatial profile of one coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    Constant {
        value: f64,
    },
    /// `offset + slope * x`.
    Affine {
        offset: f64,
        slope: f64,
    },
    /// `base + amplitude * cos(modes * pi * (x - x_min) / L)`.
    CosineBump {
        base: f64,
        amplitude: f64,
        #[serde(default = "one")]
        modes: f64,
    },
    /// `base + amplitude * exp(-((x - center) / width)^2 / 2)`.
    GaussianBump {
        base: f64,
        amplitude: f64,
        center: f64,
        width: f64,
    },
    /// One value per grid node.
    Tabulated {
        values: Vec<f64>,
    },
}

fn one() -> f64 {
    1.0
}

impl Profile {
    pub fn constant(value: f64) -> Self {
        Profile::Constant { value }
    }

    pub fn sample<T: Real>(&self, grid: &Grid1D<T>, name: &str) -> Result<Vec<T>> {
        let lit = T::lit;
        let values = match self {
            Profile::Constant { value } => vec![lit(*value); grid.n_nodes()],
            Profile::Affine { offset, slope } => {
                let (a, s) = (lit(*offset), lit(*slope));
                grid.sample(|x| a + s * x)
            }
            Profile::CosineBump {
                base,
                amplitude,
                modes,
            } => {
                let (c, a) = (lit(*base), lit(*amplitude));
                let k = lit(*modes) * T::PI() / grid.length();
                let x0 = grid.x_min();
                grid.sample(|x| c + a * (k * (x - x0)).cos())
            }
            Profile::GaussianBump {
                base,
                amplitude,
                center,
                width,
            } => {
                if *width <= 0.0 {
                    return Err(Error::validation(
                        format!("{name}.width"),
                        "must be positive",
                    ));
                }
                let (c, a, m, w) = (lit(*base), lit(*amplitude), lit(*center), lit(*width));
                let half = T::lit(0.5);
                grid.sample(|x| {
                    let z = (x - m) / w;
                    c + a * (-half * z * z).exp()
                })
            }
            Profile::Tabulated { values } => {
                if values.len() != grid.n_nodes() {
                    return Err(Error::validation(
                        format!("{name}.values"),
                        format!(
                            "tabulated profile needs {} values, got {}",
                            grid.n_nodes(),
                            values.len()
                        ),
                    ));
                }
                values.iter().map(|&v| lit(v)).collect()
            }
        };
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::validation(
                name,
                format!("non-finite value at node {i}"),
            ));
        }
        Ok(values)
    }
}

/// Scalar time factor multiplying the spatial profile of `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TimeModulation {
    #[default]
    None,
    /// `exp(-rate * t)`.
    ExponentialDecay { rate: f64 },
    /// `1 + amplitude * sin(2 pi frequency t)`, `|amplitude| < 1`.
    Sinusoidal { amplitude: f64, frequency: f64 },
}

impl TimeModulation {
    pub fn factor<T: Real>(&self, t: T) -> T {
        match *self {
            TimeModulation::None => T::one(),
            TimeModulation::ExponentialDecay { rate } => (-T::lit(rate) * t).exp(),
            TimeModulation::Sinusoidal {
                amplitude,
                frequency,
            } => {
                T::one() + T::lit(amplitude) * (T::lit(2.0) * T::PI() * T::lit(frequency) * t).sin()
            }
        }
    }

    /// Lower bound of the factor on `[0, horizon]`.
    pub fn min_on(&self, horizon: f64) -> f64 {
        match *self {
            TimeModulation::None => 1.0,
            TimeModulation::ExponentialDecay { rate } => (-rate * horizon).exp().min(1.0),
            TimeModulation::Sinusoidal { amplitude, .. } => 1.0 - amplitude.abs(),
        }
    }

    /// Upper bound of the factor on `[0, horizon]`.
    pub fn max_on(&self, horizon: f64) -> f64 {
        match *self {
            TimeModulation::None => 1.0,
            TimeModulation::ExponentialDecay { rate } => (-rate * horizon).exp().max(1.0),
            TimeModulation::Sinusoidal { amplitude, .. } => 1.0 + amplitude.abs(),
        }
    }

    pub fn is_static(&self) -> bool {
        matches!(self, TimeModulation::None)
    }

    fn validate(&self) -> Result<()> {
        match *self {
            TimeModulation::None => Ok(()),
            TimeModulation::ExponentialDecay { rate } if rate.is_finite() && rate >= 0.0 => Ok(()),
            TimeModulation::ExponentialDecay { .. } => Err(Error::validation(
                "b_time.rate",
                "must be finite and nonnegative",
            )),
            TimeModulation::Sinusoidal {
                amplitude,
                frequency,
            } => {
                if !(amplitude.abs() < 1.0) {
                    return Err(Error::validation(
                        "b_time.amplitude",
                        "|amplitude| must be below 1 to keep b positive",
                    ));
                }
                if !frequency.is_finite() {
                    return Err(Error::validation("b_time.frequency", "must be finite"));
                }
                Ok(())
            }
        }
    }
}

pub const DEFAULT_FLOOR: f64 = 1e-6;
pub const DEFAULT_NORM_TOL: f64 = 1e-10;

fn default_floor() -> f64 {
    DEFAULT_FLOOR
}

/// Declarative description of `D`, `phi` and `b` with their positivity floors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientSpec {
    pub d: Profile,
    pub phi: Profile,
    /// Spatial profile of `b` (not `b^2`).
    pub b: Profile,
    #[serde(default)]
    pub b_time: TimeModulation,
    #[serde(default = "default_floor")]
    pub d_floor: f64,
    #[serde(default = "default_floor")]
    pub b_floor: f64,
}

impl CoefficientSpec {
    pub fn new(d: Profile, phi: Profile, b: Profile) -> Self {
        Self {
            d,
            phi,
            b,
            b_time: TimeModulation::None,
            d_floor: DEFAULT_FLOOR,
            b_floor: DEFAULT_FLOOR,
        }
    }
}

/// Equilibrium density `exp(-(phi - c_norm) / D)` normalized to unit mass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumState<T> {
    pub c_norm: T,
    pub feq: Vec<T>,
}

/// Sampled coefficients together with their equilibrium.
#[derive(Debug, Clone)]
pub struct CoefficientSet<T> {
    pub d: Vec<T>,
    pub phi: Vec<T>,
    b_profile: Vec<T>,
    b_time: TimeModulation,
    b_floor: T,
    pub d_floor: T,
    pub eq: EquilibriumState<T>,
}

fn check_floor<T: Real>(name: &str, values: &[T], floor: T, grid: &Grid1D<T>) -> Result<()> {
    for (i, &v) in values.iter().enumerate() {
        if !(v >= floor) {
            return Err(Error::Floor {
                name: name.to_string(),
                node: i,
                x: grid.nodes()[i].as_f64(),
                value: v.as_f64(),
                floor: floor.as_f64(),
            });
        }
    }
    Ok(())
}

impl<T: Real> CoefficientSet<T> {
    /// Samples `spec` on `grid`, enforces the floors at `t = 0` and computes
    /// the equilibrium.
    pub fn sample(spec: &CoefficientSpec, grid: &Grid1D<T>, norm_tol: T) -> Result<Self> {
        if !(spec.d_floor > 0.0) {
            return Err(Error::validation("d_floor", "must be positive"));
        }
        if !(spec.b_floor > 0.0) {
            return Err(Error::validation("b_floor", "must be positive"));
        }
        spec.b_time.validate()?;
        let d = spec.d.sample(grid, "d")?;
        let phi = spec.phi.sample(grid, "phi")?;
        let b_profile = spec.b.sample(grid, "b")?;
        let d_floor = T::lit(spec.d_floor);
        let b_floor = T::lit(spec.b_floor);
        check_floor("D", &d, d_floor, grid)?;
        check_floor("b", &b_profile, b_floor, grid)?;
        let eq = compute_equilibrium(&d, &phi, grid, norm_tol)?;
        Ok(Self {
            d,
            phi,
            b_profile,
            b_time: spec.b_time,
            b_floor,
            d_floor,
            eq,
        })
    }

    /// Verifies `b >= b_floor` on the whole time window `[0, horizon]`.
    pub fn check_horizon(&self, grid: &Grid1D<T>, horizon: f64) -> Result<()> {
        let m = T::lit(self.b_time.min_on(horizon));
        let worst: Vec<T> = self.b_profile.iter().map(|&b| b * m).collect();
        check_floor("b", &worst, self.b_floor, grid)
    }

    pub fn b_floor(&self) -> T {
        self.b_floor
    }

    pub fn b_time(&self) -> TimeModulation {
        self.b_time
    }

    /// True when `b` does not depend on time.
    pub fn is_autonomous(&self) -> bool {
        self.b_time.is_static()
    }

    pub fn b_at(&self, t: T) -> Vec<T> {
        let m = self.b_time.factor(t);
        self.b_profile.iter().map(|&b| b * m).collect()
    }

    pub fn b_squared_at(&self, t: T) -> Vec<T> {
        let m = self.b_time.factor(t);
        self.b_profile
            .iter()
            .map(|&b| {
                let v = b * m;
                v * v
            })
            .collect()
    }

    /// Upper bound of `b^2 / 2` over nodes and `[0, horizon]`.
    pub fn max_half_b_squared(&self, horizon: f64) -> T {
        let m = T::lit(self.b_time.max_on(horizon));
        let bmax = self
            .b_profile
            .iter()
            .fold(T::zero(), |a, &b| a.max(b.abs()))
            * m;
        bmax * bmax * T::lit(0.5)
    }

    /// The explicit finite-volume step default `0.2 dx^2 min(D) / max(b^2/2)`.
    pub fn default_time_step(&self, grid: &Grid1D<T>, horizon: f64) -> T {
        T::lit(0.2) * grid.dx() * grid.dx() * min_value(&self.d) / self.max_half_b_squared(horizon)
    }

    /// True when `D` is the same at every node.
    pub fn has_constant_temperature(&self) -> bool {
        let d0 = self.d[0];
        self.d.iter().all(|&v| v == d0)
    }
}

fn normalization_mass<T: Real>(d: &[T], phi: &[T], grid: &Grid1D<T>, c: T) -> T {
    let vals: Vec<T> = d
        .iter()
        .zip(phi)
        .map(|(&d, &p)| ((c - p) / d).exp())
        .collect();
    grid.integrate_unchecked(&vals)
}

/// Finds `C` with `integral exp(-(phi - C)/D) = 1` by bisection.
///
/// The mass is strictly increasing in `C`, so the root is unique. The
/// bracket starts at `[min(phi) - 20 max(D), max(phi) + 20 max(D)]` and is
/// widened by doubling until it straddles the root; bisection then runs until
/// the bracket can no longer be split.
pub fn compute_equilibrium<T: Real>(
    d: &[T],
    phi: &[T],
    grid: &Grid1D<T>,
    norm_tol: T,
) -> Result<EquilibriumState<T>> {
    grid.check_len(d, "d")?;
    grid.check_len(phi, "phi")?;
    if !(norm_tol > T::zero()) {
        return Err(Error::validation("norm_tol", "must be positive"));
    }
    if let Some(i) = d.iter().position(|&v| !(v > T::zero())) {
        return Err(Error::Domain {
            what: "D".into(),
            node: i,
            value: d[i].as_f64(),
        });
    }
    let mass = |c: T| normalization_mass(d, phi, grid, c);
    let span = T::lit(20.0) * max_value(d);
    let mut lo = min_value(phi) - span;
    let mut hi = max_value(phi) + span;
    let mut width = hi - lo;
    let mut widened = 0;
    while mass(lo) > T::one() || mass(hi) < T::one() {
        if widened == 64 || !width.is_finite() {
            return Err(Error::Normalization {
                lo: lo.as_f64(),
                hi: hi.as_f64(),
                residual: f64::NAN,
            });
        }
        if mass(lo) > T::one() {
            lo = lo - width;
        }
        if mass(hi) < T::one() {
            hi = hi + width;
        }
        width = width + width;
        widened += 1;
    }

    let half = T::lit(0.5);
    let mut best = (T::infinity(), lo);
    for _ in 0..400 {
        let mid = lo + (hi - lo) * half;
        let r = mass(mid) - T::one();
        if r.abs() < best.0 {
            best = (r.abs(), mid);
        }
        if r == T::zero() || mid <= lo || mid >= hi {
            break;
        }
        if r > T::zero() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let (residual, c_norm) = best;
    if !(residual <= norm_tol) {
        return Err(Error::Normalization {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
            residual: residual.as_f64(),
        });
    }
    let feq = d
        .iter()
        .zip(phi)
        .map(|(&d, &p)| (-(p - c_norm) / d).exp())
        .collect();
    Ok(EquilibriumState { c_norm, feq })
}

/// Endpoint derivatives of `D log rho0` and whether both are within `tol`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Compatibility<T> {
    pub left: T,
    pub right: T,
    pub compatible: bool,
}

/// Checks that `d/dx (D log rho0)` vanishes at both endpoints, using
/// one-sided second-order differences.
pub fn check_compatibility<T: Real>(
    rho0: &[T],
    d: &[T],
    grid: &Grid1D<T>,
    tol: T,
) -> Result<Compatibility<T>> {
    grid.check_len(rho0, "rho0")?;
    grid.check_len(d, "d")?;
    if let Some(i) = rho0.iter().position(|&v| !(v > T::zero())) {
        return Err(Error::Domain {
            what: "rho0".into(),
            node: i,
            value: rho0[i].as_f64(),
        });
    }
    let h0: Vec<T> = d.iter().zip(rho0).map(|(&d, &r)| d * r.ln()).collect();
    let (left, right) = grid.boundary_derivatives(&h0);
    Ok(Compatibility {
        left,
        right,
        compatible: left.abs() <= tol && right.abs() <= tol,
    })
}
