use std::fmt;
use std::str::FromStr;

use crate::coefficients::{CoefficientSpec, Profile};
use crate::error::{Error, Result};

use super::config::{
    GridSection, InitialSection, InitialVariable, Mode, OutputSection, RunConfig, SolverSection,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// `rho0 = 1`, `D = 1`, `phi = 0`, `b^2 = 2`.
    Equilibrium,
    /// Constant temperature with a linear potential.
    LinearReduction,
    /// `D = 1 + 0.2 cos(pi x)`, `phi = 0`, `b^2 = 2`, `rho0 ~ 1 + 0.1 cos(pi x)`.
    GenericBenchmark,
    /// A localized hot spot in `D`.
    GrainBump,
}

impl Preset {
    pub const ALL: [Preset; 4] = [
        Preset::Equilibrium,
        Preset::LinearReduction,
        Preset::GenericBenchmark,
        Preset::GrainBump,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Equilibrium => "equilibrium",
            Preset::LinearReduction => "linear_reduction",
            Preset::GenericBenchmark => "generic_benchmark",
            Preset::GrainBump => "grain_bump",
        }
    }

    pub fn config(self) -> RunConfig {
        let sqrt2 = Profile::constant(2f64.sqrt());
        let cos = |base: f64, amplitude: f64| Profile::CosineBump {
            base,
            amplitude,
            modes: 1.0,
        };
        let (n_cells, d, phi, rho0) = match self {
            Preset::Equilibrium => (
                64,
                Profile::constant(1.0),
                Profile::constant(0.0),
                Profile::constant(1.0),
            ),
            Preset::LinearReduction => (
                64,
                Profile::constant(1.0),
                Profile::Affine {
                    offset: 0.0,
                    slope: 1.0,
                },
                cos(1.0, 0.3),
            ),
            Preset::GenericBenchmark => (64, cos(1.0, 0.2), Profile::constant(0.0), cos(1.0, 0.1)),
            Preset::GrainBump => (
                128,
                Profile::GaussianBump {
                    base: 1.0,
                    amplitude: 0.5,
                    center: 0.5,
                    width: 0.08,
                },
                Profile::constant(0.0),
                cos(1.0, 0.2),
            ),
        };
        let mut config = RunConfig {
            grid: GridSection {
                x_min: 0.0,
                x_max: 1.0,
                n_cells,
            },
            coefficients: CoefficientSpec::new(d, phi, sqrt2),
            initial: InitialSection {
                variable: InitialVariable::Rho,
                profile: rho0,
                normalize: true,
            },
            solver: SolverSection {
                mode: Mode::Both,
                t_final: 0.05,
                dt: None,
                theta: 1.0,
                fixed_point_tol: 1e-10,
                max_outer_iters: 50,
                alpha: 0.5,
                m_cap: 100.0,
                paper_literal_g: false,
                temperature_gradient_terms: true,
                face_mean: Default::default(),
                seed: 20_241_015,
                norm_tol: 1e-12,
                compat_tol: None,
                cross_tol: 1e-3,
                lemma_decay_trials: 150,
                lemma_product_trials: 50,
                lemma_steps: 20,
            },
            output: OutputSection {
                directory: self.name().to_string(),
                ..OutputSection::default()
            },
        };
        config.resolve().expect("presets are valid");
        config
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let known: Vec<&str> = Preset::ALL.iter().map(|p| p.name()).collect();
                Error::validation(
                    "preset",
                    format!("unknown preset `{s}`; known: {}", known.join(", ")),
                )
            })
    }
}

pub fn preset(name: &str) -> Result<RunConfig> {
    Ok(name.parse::<Preset>()?.config())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli_io::parse_config;

    #[test]
    fn presets_round_trip_and_build() {
        for p in Preset::ALL {
            let c = p.config();
            let text = c.to_toml().unwrap();
            assert_eq!(parse_config(&text).unwrap(), c, "{p}");
            let problem = c.build_problem().unwrap();
            assert!(problem.compatibility.compatible, "{p}");
        }
    }

    #[test]
    fn equilibrium_preset_is_trivial() {
        let p = preset("equilibrium").unwrap().build_problem().unwrap();
        assert!(p.rho0.iter().all(|&r| (r - 1.0).abs() < 1e-14));
        assert!(p.coeffs.eq.feq.iter().all(|&f| (f - 1.0).abs() < 1e-10));
    }

    #[test]
    fn unknown_preset() {
        assert!(preset("nope").is_err());
    }
}
