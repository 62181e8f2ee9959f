//! Declarative scenario documents (TOML).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use phasespace::dynamics::{steps_to, Potential};
use phasespace::states::{self, Wavefunction};
use phasespace::{Error, PhaseGrid};

/// Step used when a timeline gives neither `dt` nor `steps`.
pub const DEFAULT_DT: f64 = 1e-3;
/// Sample count used when a timeline gives neither `sample_times` nor `samples`.
pub const DEFAULT_SAMPLES: usize = 10;
/// Frame count for tomography when `angles` is omitted.
pub const DEFAULT_ANGLES: usize = 180;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub grid: GridConfig,
    pub state: StateSpec,
    #[serde(default = "Potential::free")]
    pub potential: Potential,
    pub experiment: Experiment,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Lattice parameters. Omitting both bounds selects the origin-centered grid
/// with equal position and momentum spacing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_max: Option<f64>,
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default = "one")]
    pub mass: f64,
}

fn one() -> f64 {
    1.0
}

impl GridConfig {
    pub fn build(&self) -> Result<PhaseGrid, Error> {
        match (self.x_min, self.x_max) {
            (Some(lo), Some(hi)) => PhaseGrid::new(self.n, lo, hi, self.hbar, self.mass),
            (None, None) => PhaseGrid::isotropic(self.n, self.hbar, self.mass),
            _ => Err(Error::InvalidParameter {
                module: "grid",
                param: "x_max",
                reason: "give both x_min and x_max, or neither".into(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StateSpec {
    Gaussian {
        #[serde(default)]
        x0: f64,
        #[serde(default)]
        p0: f64,
        sigma: f64,
    },
    Harmonic {
        level: usize,
        #[serde(default = "one")]
        omega: f64,
    },
    Cat {
        x0: f64,
        sigma: f64,
    },
    SlitPair {
        separation: f64,
        width: f64,
    },
    Superposition {
        components: Vec<Component>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Component {
    pub state: StateSpec,
    #[serde(default = "one")]
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl StateSpec {
    pub fn build(&self, grid: &PhaseGrid) -> Result<Wavefunction, Error> {
        match self {
            StateSpec::Gaussian { x0, p0, sigma } => states::gaussian_packet(grid, *x0, *p0, *sigma),
            StateSpec::Harmonic { level, omega } => states::harmonic_eigenstate(grid, *level, *omega),
            StateSpec::Cat { x0, sigma } => states::cat_state(grid, *x0, *sigma),
            StateSpec::SlitPair { separation, width } => states::slit_pair(grid, *separation, *width),
            StateSpec::Superposition { components } => {
                let parts = components
                    .iter()
                    .map(|c| c.state.build(grid))
                    .collect::<Result<Vec<_>, _>>()?;
                let coefficients: Vec<Complex64> = components.iter().map(|c| Complex64::new(c.re, c.im)).collect();
                Ok(states::superpose(&parts, &coefficients)?.state)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    Schrodinger,
    MoyalExact,
    MoyalTruncated,
    Characteristic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    /// Wigner function, marginals, negativity and reconstruction of the state.
    Wigner {},
    /// One propagation route with snapshots at the sample times.
    Evolve {
        route: Route,
        #[serde(default = "default_n_max")]
        n_max: usize,
        t_final: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dt: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        steps: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sample_times: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        samples: Option<usize>,
    },
    /// Three-route cross-validation.
    Validate {
        t_final: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dt: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        steps: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sample_times: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        samples: Option<usize>,
    },
    /// Forward tomogram over equispaced angles in `[0, π)`, optionally inverted.
    Tomo {
        #[serde(default = "default_angles")]
        angles: usize,
        #[serde(default = "yes")]
        reconstruct: bool,
    },
    /// Moments by the operator and the phase-space route.
    Moments {},
    /// Quantum means against the classical trajectory.
    Ehrenfest {
        t_final: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dt: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        steps: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sample_times: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        samples: Option<usize>,
    },
}

fn default_n_max() -> usize {
    1
}
fn default_angles() -> usize {
    DEFAULT_ANGLES
}
fn yes() -> bool {
    true
}

/// Resolved time axis of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Timeline {
    pub dt: f64,
    pub t_final: f64,
    pub sample_times: Vec<f64>,
}

impl Timeline {
    pub fn resolve(
        t_final: f64,
        dt: Option<f64>,
        steps: Option<usize>,
        sample_times: Option<&[f64]>,
        samples: Option<usize>,
    ) -> Result<Self, Error> {
        let bad = |param: &'static str, reason: String| Error::InvalidParameter {
            module: "cli",
            param,
            reason,
        };
        if !(t_final.is_finite() && t_final > 0.0) {
            return Err(bad("t_final", format!("must be positive, got {t_final}")));
        }
        let dt = match (dt, steps) {
            (Some(_), Some(_)) => return Err(bad("steps", "give either dt or steps, not both".into())),
            (Some(dt), None) => dt,
            (None, Some(0)) => return Err(bad("steps", "must be at least 1".into())),
            (None, Some(k)) => t_final / k as f64,
            (None, None) => DEFAULT_DT,
        };
        let total = steps_to(t_final, dt)?;
        let sample_times = match (sample_times, samples) {
            (Some(_), Some(_)) => return Err(bad("samples", "give either sample_times or samples, not both".into())),
            (Some(list), None) => list.to_vec(),
            (None, count) => {
                let count = count.unwrap_or(DEFAULT_SAMPLES);
                if count == 0 || total % count != 0 {
                    return Err(bad(
                        "samples",
                        format!("{count} samples do not divide the {total} steps evenly"),
                    ));
                }
                let stride = total / count;
                (1..=count).map(|i| (i * stride) as f64 * dt).collect()
            }
        };
        for &t in &sample_times {
            if steps_to(t, dt)? > total {
                return Err(bad("sample_times", format!("time {t} exceeds t_final {t_final}")));
            }
        }
        Ok(Timeline {
            dt,
            t_final,
            sample_times,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Output directory; relative paths resolve against the output root.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    #[serde(default = "all_formats")]
    pub formats: Vec<Format>,
}

fn all_formats() -> Vec<Format> {
    vec![Format::Json, Format::Csv, Format::Binary]
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: None,
            formats: all_formats(),
        }
    }
}

impl OutputConfig {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }
}
