//! Experiment configuration read from TOML.
//!
//! Every table rejects unknown keys. Missing tables fall back to the desk
//! defaults: `cos x` on `N = 128`, integrable coefficients, renormalized flow,
//! ETDRK4 with `dt = 1e-5` up to `T = 0.01`.

use std::path::Path;

use kdv5::equation::{Coefficients, EquationParams};
use kdv5::integrator::{Scheme, SolverConfig};
use kdv5::random::{random_hs_field, RandomFieldSpec};
use kdv5::spectral::{SpectralField, TorusGrid};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::LabError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Root of every random stream; `--seed` overrides it.
    pub seed: u64,
    pub grid: GridConfig,
    pub equation: EquationConfig,
    pub initial: InitialData,
    pub solver: SolverSection,
    pub resonance: ResonanceConfig,
    pub gauge: GaugeConfig,
    pub norms: NormConfig,
    pub blocks: BlockConfig,
    pub energy: EnergyConfig,
    pub counterexample: CounterexampleConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Largest retained frequency `N`.
    pub modes: usize,
    /// Physical sample count `M`; defaults to `2N + 1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            modes: 128,
            points: None,
        }
    }
}

impl GridConfig {
    pub fn grid(&self) -> Result<TorusGrid, LabError> {
        match self.points {
            None => Ok(TorusGrid::with_modes(self.modes)),
            Some(m) => Ok(TorusGrid::new(self.modes, m)?),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoefficientSpec {
    Named(NamedCoefficients),
    Triple([f64; 3]),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NamedCoefficients {
    Integrable,
}

impl CoefficientSpec {
    pub fn coefficients(&self) -> Coefficients {
        match *self {
            CoefficientSpec::Named(NamedCoefficients::Integrable) => Coefficients::INTEGRABLE,
            CoefficientSpec::Triple([a1, a2, a3]) => Coefficients::new(a1, a2, a3),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquationConfig {
    pub coefficients: CoefficientSpec,
    pub renormalized: bool,
}

impl Default for EquationConfig {
    fn default() -> Self {
        Self {
            coefficients: CoefficientSpec::Named(NamedCoefficients::Integrable),
            renormalized: true,
        }
    }
}

impl EquationConfig {
    pub fn params(&self, u0: &SpectralField) -> Result<EquationParams, LabError> {
        let c = self.coefficients.coefficients();
        if !c.is_finite() {
            return Err(LabError::Config("equation coefficients must be finite".into()));
        }
        if self.renormalized {
            Ok(EquationParams::renormalized(c, u0)?)
        } else {
            Ok(EquationParams::raw(c))
        }
    }
}

/// `a cos(n x) + b sin(n x)`; `n = 0` adds the constant `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeTerm {
    pub n: u32,
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialData {
    Modes {
        terms: Vec<ModeTerm>,
    },
    Random {
        s: f64,
        radius: f64,
        #[serde(default = "default_max_mode")]
        max_mode: usize,
        #[serde(default = "default_decay")]
        decay: f64,
        #[serde(default)]
        zero_mean: bool,
    },
}

fn default_max_mode() -> usize {
    16
}

fn default_decay() -> f64 {
    1.0
}

impl Default for InitialData {
    fn default() -> Self {
        InitialData::Modes {
            terms: vec![ModeTerm {
                n: 1,
                cos: 1.0,
                sin: 0.0,
            }],
        }
    }
}

impl InitialData {
    /// Shape used for random draws and level-set perturbations.
    pub fn field_spec(&self) -> RandomFieldSpec {
        match *self {
            InitialData::Random {
                max_mode,
                decay,
                zero_mean,
                ..
            } => RandomFieldSpec {
                max_mode,
                decay,
                zero_mean,
            },
            InitialData::Modes { .. } => RandomFieldSpec {
                max_mode: default_max_mode(),
                decay: default_decay(),
                zero_mean: true,
            },
        }
    }

    pub fn build(&self, grid: TorusGrid, seed: u64) -> Result<SpectralField, LabError> {
        match self {
            InitialData::Modes { terms } => {
                if let Some(t) = terms.iter().find(|t| t.n as usize > grid.modes()) {
                    return Err(LabError::Config(format!("mode {} exceeds the grid", t.n)));
                }
                let terms = terms.clone();
                Ok(SpectralField::from_fn(grid, move |x| {
                    terms
                        .iter()
                        .map(|t| {
                            let nx = t.n as f64 * x;
                            t.cos * nx.cos() + t.sin * nx.sin()
                        })
                        .sum()
                }))
            }
            InitialData::Random { s, radius, .. } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Ok(random_hs_field(grid, &self.field_spec(), *s, *radius, &mut rng)?)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeName {
    Etdrk4,
    Ifrk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub scheme: SchemeName,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_contour")]
    pub contour_points: usize,
    #[serde(default = "default_true")]
    pub dealias: bool,
}

fn default_contour() -> usize {
    32
}

fn default_true() -> bool {
    true
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            scheme: SchemeName::Etdrk4,
            dt: 1e-5,
            t_end: 1e-2,
            contour_points: default_contour(),
            dealias: true,
        }
    }
}

impl SolverSection {
    pub fn solver(&self) -> Result<SolverConfig, LabError> {
        let cfg = SolverConfig {
            dt: self.dt,
            t_end: self.t_end,
            scheme: match self.scheme {
                SchemeName::Etdrk4 => Scheme::Etdrk4,
                SchemeName::Ifrk4 => Scheme::Ifrk4,
            },
            contour_points: self.contour_points,
            dealias: self.dealias,
        };
        cfg.validate().map_err(|e| LabError::Config(e.to_string()))?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResonanceConfig {
    /// Scans visit every `|n_i| <= range`.
    pub range: i64,
}

impl Default for ResonanceConfig {
    fn default() -> Self {
        Self { range: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaugeConfig {
    pub s: f64,
    /// Initial `H^s` separations of the bicontinuity ladder.
    pub separations: Vec<f64>,
}

impl Default for GaugeConfig {
    fn default() -> Self {
        Self {
            s: 1.0,
            separations: vec![1e-2, 1e-3, 1e-4, 1e-5],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormConfig {
    pub s: f64,
    pub kmax: u32,
    /// Defaults to the end of the trajectory.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    /// Energy ledger sampling stride in steps.
    pub stride: usize,
}

impl Default for NormConfig {
    fn default() -> Self {
        Self {
            s: 1.0,
            kmax: 4,
            t_max: None,
            stride: 50,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BlockConfig {
    /// Sweep every frequency triple up to this `k_max`.
    pub kmax: u32,
    pub trials: usize,
    pub width: usize,
    pub cap: f64,
    /// Renormalization constants of the resonance function `G`.
    pub c1: f64,
    pub c2: f64,
}

impl Default for BlockConfig {
    fn default() -> Self {
        Self {
            kmax: 4,
            trials: 100,
            width: 8,
            cap: 10.0,
            c1: 0.05,
            c2: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnergyConfig {
    pub alpha: f64,
    pub beta: f64,
    pub s: f64,
    /// Smallness ladder of the comparability check.
    pub deltas: Vec<f64>,
    /// Seeded trajectories per `delta`.
    pub trajectories: usize,
    /// Largest band of the commutator scan.
    pub commutator_kmax: u32,
}

impl Default for EnergyConfig {
    fn default() -> Self {
        Self {
            alpha: -4.0,
            beta: 6.0,
            s: 1.0,
            deltas: vec![1e-2],
            trajectories: 20,
            commutator_kmax: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CounterexampleConfig {
    pub s: f64,
    /// `b` values scanned on the high branch.
    pub high_b: Vec<f64>,
    /// `b` values scanned on the low branch.
    pub low_b: Vec<f64>,
    pub n_list: Vec<i64>,
}

impl Default for CounterexampleConfig {
    fn default() -> Self {
        Self {
            s: 0.0,
            high_b: vec![0.3, 0.5, 1.0],
            low_b: vec![0.5, 0.75],
            n_list: kdv5::counterexample::dyadic_ladder(6, 12),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, LabError> {
        let cfg: Self = toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Checks the value ranges that the schema itself cannot express.
    pub fn validate(&self) -> Result<(), LabError> {
        let bad = |m: &str| Err(LabError::Config(m.to_string()));
        if self.grid.modes == 0 {
            return bad("grid.modes must be positive");
        }
        self.grid.grid()?;
        self.solver.solver()?;
        if self.resonance.range < 0 {
            return bad("resonance.range must be nonnegative");
        }
        if self.gauge.separations.iter().any(|e| !(*e > 0.0)) {
            return bad("gauge.separations must be positive");
        }
        if self.norms.kmax == 0 || self.norms.stride == 0 {
            return bad("norms.kmax and norms.stride must be positive");
        }
        if self.blocks.trials == 0 || self.blocks.width == 0 || !(self.blocks.cap > 0.0) {
            return bad("blocks.trials, blocks.width and blocks.cap must be positive");
        }
        if self.energy.deltas.iter().any(|d| !(*d > 0.0)) || self.energy.trajectories == 0 {
            return bad("energy.deltas must be positive and energy.trajectories nonzero");
        }
        if self.counterexample.n_list.iter().any(|&n| n < 8) {
            return bad("counterexample.n_list entries must be at least 8");
        }
        if let InitialData::Random { radius, max_mode, .. } = self.initial {
            if !(radius >= 0.0) || max_mode == 0 {
                return bad("initial.radius must be nonnegative and initial.max_mode positive");
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_the_default() {
        assert_eq!(ExperimentConfig::from_toml("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn round_trip_through_toml() {
        let mut cfg = ExperimentConfig::default();
        cfg.equation.coefficients = CoefficientSpec::Triple([-30.0, 20.0, 5.0]);
        cfg.initial = InitialData::Random {
            s: 1.0,
            radius: 0.5,
            max_mode: 8,
            decay: 2.0,
            zero_mean: true,
        };
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), cfg);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::from_toml("sed = 3").is_err());
        assert!(ExperimentConfig::from_toml("[solver]\nscheme = \"etdrk4\"\ndt = 1e-5\nt_end = 1e-2\norder = 4").is_err());
        assert!(ExperimentConfig::from_toml("[initial]\nkind = \"modes\"\nterms = [{ n = 1, cos = 1.0, tan = 2.0 }]").is_err());
        assert!(ExperimentConfig::from_toml("[equation]\ncoefficients = \"kdv\"\nrenormalized = true").is_err());
    }

    #[test]
    fn ranges_are_validated() {
        assert!(ExperimentConfig::from_toml("[solver]\nscheme = \"etdrk4\"\ndt = 3e-5\nt_end = 1e-4").is_err());
        assert!(ExperimentConfig::from_toml("[counterexample]\nn_list = [4, 8, 16, 32]").is_err());
        assert!(ExperimentConfig::from_toml("[grid]\nmodes = 0").is_err());
    }

    #[test]
    fn mode_terms_build_the_field() {
        let grid = TorusGrid::with_modes(8);
        let data = InitialData::Modes {
            terms: vec![
                ModeTerm { n: 0, cos: 0.5, sin: 0.0 },
                ModeTerm { n: 3, cos: 0.0, sin: 2.0 },
            ],
        };
        let u = data.build(grid, 0).unwrap();
        for x in [0.1, 1.7, 4.0] {
            assert!((u.eval(x) - (0.5 + 2.0 * (3.0 * x).sin())).abs() < 1e-13);
        }
        let far = InitialData::Modes {
            terms: vec![ModeTerm { n: 9, cos: 1.0, sin: 0.0 }],
        };
        assert!(far.build(grid, 0).is_err());
    }
}
