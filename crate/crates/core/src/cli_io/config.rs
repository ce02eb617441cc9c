use serde::{Deserialize, Serialize};

use crate::coefficients::{CoefficientSet, CoefficientSpec, Profile, DEFAULT_NORM_TOL};
use crate::error::{Error, Result};
use crate::fixed_point::FixedPointConfig;
use crate::fv_oracle::{FaceMean, FvConfig};
use crate::grid::{Grid1D, MIN_CELLS};
use crate::problem::{Problem, TermOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSection,
    pub coefficients: CoefficientSpec,
    pub initial: InitialSection,
    pub solver: SolverSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default)]
    pub x_min: f64,
    #[serde(default = "default_x_max")]
    pub x_max: f64,
    pub n_cells: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialVariable {
    /// The profile is `rho0 = f0 / feq`.
    #[default]
    Rho,
    /// The profile is `f0` itself.
    F,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    #[serde(default)]
    pub variable: InitialVariable,
    pub profile: Profile,
    /// Rescale to unit mass.
    #[serde(default = "yes")]
    pub normalize: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    FixedPoint,
    Fv,
    #[default]
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default)]
    pub mode: Mode,
    pub t_final: f64,
    /// Time step shared by both solvers; filled from the explicit stability
    /// rule when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default = "default_fp_tol")]
    pub fixed_point_tol: f64,
    #[serde(default = "default_max_iters")]
    pub max_outer_iters: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_m_cap")]
    pub m_cap: f64,
    #[serde(default)]
    pub paper_literal_g: bool,
    #[serde(default = "yes")]
    pub temperature_gradient_terms: bool,
    #[serde(default)]
    pub face_mean: FaceMean,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_norm_tol")]
    pub norm_tol: f64,
    /// Boundary compatibility tolerance; `10 dx^2` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compat_tol: Option<f64>,
    /// Acceptable sup-norm gap between the two solvers in `both` mode.
    #[serde(default = "default_cross_tol")]
    pub cross_tol: f64,
    #[serde(default = "default_decay_trials")]
    pub lemma_decay_trials: usize,
    #[serde(default = "default_product_trials")]
    pub lemma_product_trials: usize,
    #[serde(default = "default_lemma_steps")]
    pub lemma_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_directory")]
    pub directory: String,
    /// Write every `trajectory_stride`-th time level of the trajectories.
    #[serde(default = "one")]
    pub trajectory_stride: usize,
    /// Subsampling of the Hölder scans; `1` is exact.
    #[serde(default = "one")]
    pub holder_stride: usize,
    #[serde(default = "yes")]
    pub write_trajectories: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: default_directory(),
            trajectory_stride: 1,
            holder_stride: 1,
            write_trajectories: true,
        }
    }
}

fn default_x_max() -> f64 {
    1.0
}
fn yes() -> bool {
    true
}
fn one() -> usize {
    1
}
fn default_theta() -> f64 {
    1.0
}
fn default_fp_tol() -> f64 {
    1e-10
}
fn default_max_iters() -> usize {
    50
}
fn default_alpha() -> f64 {
    0.5
}
fn default_m_cap() -> f64 {
    100.0
}
fn default_norm_tol() -> f64 {
    DEFAULT_NORM_TOL
}
fn default_cross_tol() -> f64 {
    1e-3
}
fn default_decay_trials() -> usize {
    150
}
fn default_product_trials() -> usize {
    50
}
fn default_lemma_steps() -> usize {
    20
}
fn default_directory() -> String {
    "nlfp-run".to_string()
}

fn range(field: &str, ok: bool, message: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::validation(field, message))
    }
}

/// Parses, validates and resolves a TOML run configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let de = toml::Deserializer::parse(text).map_err(|e| Error::Config {
        path: "<document>".to_string(),
        message: e.to_string().trim_end().to_string(),
    })?;
    let mut config: RunConfig =
        serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
            path: e.path().to_string(),
            message: e.inner().to_string().trim_end().to_string(),
        })?;
    config.resolve()?;
    Ok(config)
}

impl RunConfig {
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config {
            path: "<document>".to_string(),
            message: e.to_string(),
        })
    }

    /// Range checks on every numeric field.
    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        range("grid.x_min", g.x_min.is_finite(), "must be finite")?;
        range(
            "grid.x_max",
            g.x_max.is_finite() && g.x_max > g.x_min,
            "must be finite and exceed grid.x_min",
        )?;
        range("grid.n_cells", g.n_cells >= MIN_CELLS, "must be at least 8")?;
        let c = &self.coefficients;
        range("coefficients.d_floor", c.d_floor > 0.0, "must be positive")?;
        range("coefficients.b_floor", c.b_floor > 0.0, "must be positive")?;
        let s = &self.solver;
        range(
            "solver.t_final",
            s.t_final > 0.0 && s.t_final.is_finite(),
            "must be positive and finite",
        )?;
        if let Some(dt) = s.dt {
            range(
                "solver.dt",
                dt > 0.0 && dt <= s.t_final,
                "must satisfy 0 < dt <= solver.t_final",
            )?;
        }
        range(
            "solver.theta",
            (0.5..=1.0).contains(&s.theta),
            "must lie in [0.5, 1]",
        )?;
        range(
            "solver.fixed_point_tol",
            s.fixed_point_tol > 0.0,
            "must be positive",
        )?;
        range(
            "solver.max_outer_iters",
            s.max_outer_iters >= 1,
            "must be at least 1",
        )?;
        range(
            "solver.alpha",
            s.alpha > 0.0 && s.alpha < 1.0,
            "must lie in (0, 1)",
        )?;
        range("solver.m_cap", s.m_cap > 0.0, "must be positive")?;
        range("solver.norm_tol", s.norm_tol > 0.0, "must be positive")?;
        if let Some(tol) = s.compat_tol {
            range("solver.compat_tol", tol > 0.0, "must be positive")?;
        }
        range("solver.cross_tol", s.cross_tol > 0.0, "must be positive")?;
        range(
            "solver.lemma_steps",
            s.lemma_steps >= 2,
            "must be at least 2",
        )?;
        range(
            "output.trajectory_stride",
            self.output.trajectory_stride >= 1,
            "must be at least 1",
        )?;
        range(
            "output.holder_stride",
            self.output.holder_stride >= 1,
            "must be at least 1",
        )?;
        range(
            "output.directory",
            !self.output.directory.is_empty(),
            "must not be empty",
        )
    }

    /// Validates and fills `solver.dt` from `0.2 dx^2 min(D) / max(b^2 / 2)`.
    pub fn resolve(&mut self) -> Result<()> {
        self.validate()?;
        if self.solver.dt.is_none() {
            let grid = self.grid()?;
            let coeffs = self.coefficient_set(&grid)?;
            let dt = coeffs.default_time_step(&grid, self.solver.t_final);
            self.solver.dt = Some(dt.min(self.solver.t_final));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.solver.dt.expect("resolved configuration")
    }

    pub fn grid(&self) -> Result<Grid1D<f64>> {
        Grid1D::new(self.grid.x_min, self.grid.x_max, self.grid.n_cells)
    }

    pub fn coefficient_set(&self, grid: &Grid1D<f64>) -> Result<CoefficientSet<f64>> {
        CoefficientSet::sample(&self.coefficients, grid, self.solver.norm_tol)
    }

    pub fn build_problem(&self) -> Result<Problem<f64>> {
        let grid = self.grid()?;
        let coeffs = self.coefficient_set(&grid)?;
        let values = self.initial.profile.sample(&grid, "initial.profile")?;
        let rho0: Vec<f64> = match self.initial.variable {
            InitialVariable::Rho => values,
            InitialVariable::F => values
                .iter()
                .zip(&coeffs.eq.feq)
                .map(|(f, e)| f / e)
                .collect(),
        };
        let tol = self
            .solver
            .compat_tol
            .unwrap_or_else(|| Problem::default_compat_tol(&grid));
        if self.initial.normalize {
            Problem::normalized(grid, coeffs, rho0, tol)
        } else {
            Problem::new(grid, coeffs, rho0, tol)
        }
    }

    pub fn terms(&self) -> TermOptions {
        TermOptions {
            paper_literal_g: self.solver.paper_literal_g,
            temperature_gradient_terms: self.solver.temperature_gradient_terms,
        }
    }

    pub fn fixed_point_config(&self) -> FixedPointConfig<f64> {
        let s = &self.solver;
        FixedPointConfig {
            horizon: s.t_final,
            dt: self.dt(),
            theta: s.theta,
            max_outer_iters: s.max_outer_iters,
            fixed_point_tol: s.fixed_point_tol,
            alpha: s.alpha,
            m_cap: s.m_cap,
            terms: self.terms(),
        }
    }

    pub fn fv_config(&self) -> FvConfig<f64> {
        FvConfig {
            horizon: self.solver.t_final,
            dt: self.dt(),
            mean: self.solver.face_mean,
            record_stride: 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[grid]
n_cells = 32

[coefficients]
d = { family = "cosine_bump", base = 1.0, amplitude = 0.2 }
phi = { family = "constant", value = 0.0 }
b = { family = "constant", value = 1.4142135623730951 }

[initial]
profile = { family = "cosine_bump", base = 1.0, amplitude = 0.1 }

[solver]
t_final = 0.05
"#;

    #[test]
    fn minimal_document_fills_dt() {
        let c = parse_config(MINIMAL).unwrap();
        let dx = 1.0 / 32.0;
        let expected = 0.2 * dx * dx * 0.8 / 1.0;
        assert!((c.dt() - expected).abs() < 1e-15);
        assert_eq!(c.solver.mode, Mode::Both);
        assert_eq!(c.solver.theta, 1.0);
    }

    #[test]
    fn theta_out_of_range_names_the_key() {
        let text = MINIMAL.replace("t_final = 0.05", "t_final = 0.05\ntheta = 1.5");
        match parse_config(&text) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "solver.theta"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = MINIMAL.replace("t_final = 0.05", "t_final = 0.05\nthetaa = 1.0");
        match parse_config(&text) {
            Err(Error::Config { message, .. }) => assert!(message.contains("thetaa"), "{message}"),
            other => panic!("unexpected {other:?}"),
        }
        let text = MINIMAL.replace("amplitude = 0.1", "amplitud = 0.1");
        match parse_config(&text) {
            Err(Error::Config { path, .. }) => {
                assert!(path.starts_with("initial.profile"), "{path}")
            }
            other => panic!("unexpected {other:?}"),
        }
        let text = MINIMAL.replace("\"constant\", value = 0.0", "\"quartic\", value = 0.0");
        assert!(matches!(parse_config(&text), Err(Error::Config { .. })));
    }

    #[test]
    fn type_mismatch_reports_path() {
        let text = MINIMAL.replace("n_cells = 32", "n_cells = \"many\"");
        match parse_config(&text) {
            Err(Error::Config { path, .. }) => assert_eq!(path, "grid.n_cells"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_config("[grid"), Err(Error::Config { .. })));
    }

    #[test]
    fn round_trip_is_identity() {
        let c = parse_config(MINIMAL).unwrap();
        let again = parse_config(&c.to_toml().unwrap()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn f_initial_datum_is_divided_by_feq() {
        let text = MINIMAL.replace("[initial]\n", "[initial]\nvariable = \"f\"\n");
        let c = parse_config(&text).unwrap();
        let p = c.build_problem().unwrap();
        let f0 = p.f0();
        let m = p.grid.integrate(&f0).unwrap();
        assert!((m - 1.0).abs() < 1e-12);
    }
}
