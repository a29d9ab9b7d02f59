//! Run configuration: defaults per experiment and profile, JSON config files,
//! flag overrides, validation, and the semantic fingerprint embedded in every
//! report.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use fracgal_core::pde::{self, Backend};
use fracgal_core::report::Metric;
use fracgal_core::stepper::Scheme;

/// Final time of every study. The model problem lives on `(0, 1]`.
pub const HORIZON: f64 = 1.0;

/// Decay rate of the scalar mode problem solved by the scalar experiments.
pub const SCALAR_LAMBDA: f64 = 1.0;

/// Which study a run performs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    /// Field problem, `0 < alpha < 1`: DG in time, P1 elements in space,
    /// datum `x^0.51 (1-x)`, sup-in-time L2 error (E1) against a fine
    /// strongly graded discrete reference.
    Diffusion,
    /// Field problem, `1 < alpha < 2`: Petrov-Galerkin in time, datum
    /// `x^1.51 (1-x)^2`, max nodal L2 error (E2) against a discrete reference.
    Wave,
    /// Scalar mode problem, `0 < alpha < 1`, against the exact
    /// Mittag-Leffler solution.
    ScalarDiffusion,
    /// Scalar mode problem, `1 < alpha < 2`, against the exact solution.
    ScalarWave,
    /// The randomized inequality oracle suite.
    Oracles,
}

impl Experiment {
    pub fn label(self) -> &'static str {
        match self {
            Experiment::Diffusion => "diffusion",
            Experiment::Wave => "wave",
            Experiment::ScalarDiffusion => "scalar-diffusion",
            Experiment::ScalarWave => "scalar-wave",
            Experiment::Oracles => "oracles",
        }
    }

    pub fn is_scalar(self) -> bool {
        matches!(self, Experiment::ScalarDiffusion | Experiment::ScalarWave)
    }

    pub fn is_field(self) -> bool {
        matches!(self, Experiment::Diffusion | Experiment::Wave)
    }

    /// The time-stepping scheme the experiment exercises.
    pub fn scheme(self) -> Option<Scheme> {
        match self {
            Experiment::Diffusion | Experiment::ScalarDiffusion => Some(Scheme::Dg),
            Experiment::Wave | Experiment::ScalarWave => Some(Scheme::Pg),
            Experiment::Oracles => None,
        }
    }

    /// The error functional reported by the experiment.
    pub fn metric(self) -> Option<Metric> {
        match self {
            Experiment::Diffusion => Some(Metric::FieldSup),
            Experiment::Wave => Some(Metric::FieldNodes),
            Experiment::ScalarDiffusion | Experiment::ScalarWave => Some(Metric::MaxNode),
            Experiment::Oracles => None,
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Resource scale of a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    /// Minutes-scale defaults: 2^9 spatial cells, reference grid 2^13,
    /// coarse grids capped at 2^10.
    Ci,
    /// Publication-scale defaults: 2^11 cells and a 2^15 reference grid.
    /// Field runs take hours and the wave reference holds two copies of a
    /// `(2^15 + 1) x 2047` trajectory (about 1.1 GB); requires `--yes-full`.
    Full,
}

impl Profile {
    pub fn label(self) -> &'static str {
        match self {
            Profile::Ci => "ci",
            Profile::Full => "full",
        }
    }
}

/// Which field solver carries the march.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum BackendChoice {
    /// Eigenmode decoupling; states kept as eigen coefficients. The only
    /// practical choice at reference resolutions.
    Spectral,
    /// Tridiagonal solve per step in nodal variables.
    Direct,
}

impl BackendChoice {
    pub fn label(self) -> &'static str {
        self.to_core().label()
    }

    pub fn to_core(self) -> Backend {
        match self {
            BackendChoice::Spectral => Backend::Spectral,
            BackendChoice::Direct => Backend::Direct,
        }
    }
}

/// A partial configuration: a JSON config file or the set of CLI flags.
/// Fields left `None` fall back to the layer below (flags > file > defaults).
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigPatch {
    pub experiment: Option<Experiment>,
    pub alpha: Option<f64>,
    pub sigmas: Option<Vec<f64>>,
    pub grids: Option<Vec<usize>>,
    pub reference_intervals: Option<usize>,
    pub reference_sigma: Option<f64>,
    pub cells: Option<usize>,
    pub backend: Option<BackendChoice>,
    pub seed: Option<u64>,
    pub profile: Option<Profile>,
    pub allow_any_grid: Option<bool>,
    pub out_dir: Option<PathBuf>,
}

impl ConfigPatch {
    pub fn from_json_file(path: &Path) -> Result<ConfigPatch> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        serde_json::from_str(&text)
            .with_context(|| format!("parsing config file {}", path.display()))
    }
}

/// A fully resolved run configuration. Everything except `out_dir` is
/// semantic: it determines the numbers in the reports and is hashed into the
/// fingerprint.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub alpha: f64,
    /// Grading exponents of the coarse meshes, one report column group each.
    pub sigmas: Vec<f64>,
    /// Coarse interval counts, strictly increasing.
    pub grids: Vec<usize>,
    /// Reference interval count (field experiments; 0 = exact reference).
    pub reference_intervals: usize,
    /// Reference grading exponent (field experiments; 0 = exact reference).
    pub reference_sigma: f64,
    /// Spatial cells (field experiments; 0 for scalar and oracle runs).
    pub cells: usize,
    pub backend: BackendChoice,
    pub seed: u64,
    pub profile: Profile,
    /// Permit interval counts that are not powers of two.
    pub allow_any_grid: bool,
    /// Where reports are written. Not part of the fingerprint.
    pub out_dir: PathBuf,
}

pub const DEFAULT_SEED: u64 = 7;
pub const DEFAULT_OUT_DIR: &str = "out";

/// Largest coarse grid the ci profile runs.
const CI_GRID_CAP: usize = 1 << 10;

impl RunConfig {
    /// Default configuration for an experiment at a given order and profile.
    pub fn defaults(experiment: Experiment, alpha: f64, profile: Profile) -> RunConfig {
        let (cells, reference_intervals) = match (experiment.is_field(), profile) {
            (true, Profile::Ci) => (1 << 9, 1 << 13),
            (true, Profile::Full) => (1 << 11, 1 << 15),
            (false, _) => (0, 0),
        };
        let reference_sigma = match experiment.scheme() {
            Some(scheme) if experiment.is_field() => {
                pde::default_reference_grading(scheme, alpha)
            }
            _ => 0.0,
        };
        RunConfig {
            experiment,
            alpha,
            sigmas: default_sigmas(experiment, alpha),
            grids: default_grids(experiment, alpha, profile),
            reference_intervals,
            reference_sigma,
            cells,
            backend: BackendChoice::Spectral,
            seed: DEFAULT_SEED,
            profile,
            allow_any_grid: false,
            out_dir: PathBuf::from(DEFAULT_OUT_DIR),
        }
    }

    /// Overwrite every field the patch sets. Later layers win.
    pub fn apply(&mut self, patch: &ConfigPatch) {
        if let Some(v) = patch.experiment {
            self.experiment = v;
        }
        if let Some(v) = patch.alpha {
            self.alpha = v;
        }
        if let Some(v) = &patch.sigmas {
            self.sigmas = v.clone();
        }
        if let Some(v) = &patch.grids {
            self.grids = v.clone();
        }
        if let Some(v) = patch.reference_intervals {
            self.reference_intervals = v;
        }
        if let Some(v) = patch.reference_sigma {
            self.reference_sigma = v;
        }
        if let Some(v) = patch.cells {
            self.cells = v;
        }
        if let Some(v) = patch.backend {
            self.backend = v;
        }
        if let Some(v) = patch.seed {
            self.seed = v;
        }
        if let Some(v) = patch.profile {
            self.profile = v;
        }
        if let Some(v) = patch.allow_any_grid {
            self.allow_any_grid = v;
        }
        if let Some(v) = &patch.out_dir {
            self.out_dir = v.clone();
        }
    }

    /// Check every invariant the drivers rely on.
    pub fn validate(&self) -> Result<()> {
        if self.experiment == Experiment::Oracles {
            // Only the seed matters; the numeric fields must stay at their
            // inert defaults so the fingerprint reflects what actually ran.
            if self.alpha != 0.0 || !self.sigmas.is_empty() || !self.grids.is_empty() {
                bail!("the oracle suite takes only --seed; alpha, sigma, and grid flags do not apply");
            }
            return Ok(());
        }

        let scheme = self.experiment.scheme().expect("non-oracle experiment");
        let range_ok = match scheme {
            Scheme::Dg => self.alpha > 0.0 && self.alpha < 1.0,
            Scheme::Pg => self.alpha > 1.0 && self.alpha < 2.0,
        };
        if !self.alpha.is_finite() || !range_ok {
            bail!(
                "alpha = {} is outside the {} range of experiment {}",
                self.alpha,
                match scheme {
                    Scheme::Dg => "(0, 1)",
                    Scheme::Pg => "(1, 2)",
                },
                self.experiment
            );
        }

        if self.sigmas.is_empty() {
            bail!("at least one grading exponent is required");
        }
        for &s in &self.sigmas {
            if !s.is_finite() || s < 1.0 {
                bail!("grading exponent sigma = {s} must be a finite value >= 1");
            }
        }

        if self.grids.is_empty() {
            bail!("at least one coarse interval count is required");
        }
        for w in self.grids.windows(2) {
            if w[1] <= w[0] {
                bail!("grid sizes must be strictly increasing, got {} after {}", w[1], w[0]);
            }
        }
        if self.grids[0] < 2 {
            bail!("grid sizes must be at least 2, got {}", self.grids[0]);
        }
        if !self.allow_any_grid {
            for &j in &self.grids {
                if !j.is_power_of_two() {
                    bail!("grid size {j} is not a power of two (pass --allow-any-grid to permit it)");
                }
            }
        }

        if self.experiment.is_scalar() {
            if self.reference_intervals != 0 || self.reference_sigma != 0.0 {
                bail!(
                    "scalar experiments compare against the exact Mittag-Leffler solution; \
                     --ref-J and --ref-sigma do not apply"
                );
            }
            if self.cells != 0 {
                bail!("scalar experiments have no spatial mesh; --cells does not apply");
            }
            return Ok(());
        }

        // Field experiments: a discrete reference and a spatial mesh.
        let finest = *self.grids.last().expect("nonempty");
        if self.reference_intervals <= finest {
            bail!(
                "reference grid J* = {} must exceed the finest coarse grid {}",
                self.reference_intervals,
                finest
            );
        }
        if !self.allow_any_grid && !self.reference_intervals.is_power_of_two() {
            bail!(
                "reference grid {} is not a power of two (pass --allow-any-grid to permit it)",
                self.reference_intervals
            );
        }
        if !self.reference_sigma.is_finite() || self.reference_sigma < 1.0 {
            bail!(
                "reference grading sigma* = {} must be a finite value >= 1",
                self.reference_sigma
            );
        }
        if self.cells < 2 {
            bail!("a field run needs at least 2 spatial cells, got {}", self.cells);
        }
        Ok(())
    }

    /// Hex digest of the semantic fields (everything except `out_dir`).
    /// Two runs with equal fingerprints computed the same numbers.
    pub fn fingerprint(&self) -> String {
        let canon = format!(
            "experiment={};alpha={:?};sigmas={:?};grids={:?};refJ={};refsigma={:?};\
             cells={};backend={};seed={};profile={};anygrid={};horizon={:?};lambda={:?}",
            self.experiment.label(),
            self.alpha,
            self.sigmas,
            self.grids,
            self.reference_intervals,
            self.reference_sigma,
            self.cells,
            self.backend.label(),
            self.seed,
            self.profile.label(),
            self.allow_any_grid,
            HORIZON,
            SCALAR_LAMBDA,
        );
        let digest = Sha256::digest(canon.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Resolve defaults, an optional JSON config, and CLI flags into one
/// configuration; flags win over the file, the file wins over defaults.
pub fn resolve(file: Option<ConfigPatch>, flags: ConfigPatch) -> Result<RunConfig> {
    let file = file.unwrap_or_default();
    let experiment = flags
        .experiment
        .or(file.experiment)
        .context("an experiment is required: pass --experiment or set it in --config")?;
    let profile = flags.profile.or(file.profile).unwrap_or(Profile::Ci);
    let alpha = match flags.alpha.or(file.alpha) {
        Some(a) => a,
        None if experiment == Experiment::Oracles => 0.0,
        None => bail!("experiment {experiment} needs --alpha (or alpha in --config)"),
    };
    let mut cfg = RunConfig::defaults(experiment, alpha, profile);
    cfg.apply(&file);
    cfg.apply(&flags);
    cfg.validate()?;
    Ok(cfg)
}

fn default_sigmas(experiment: Experiment, alpha: f64) -> Vec<f64> {
    match experiment {
        Experiment::Diffusion | Experiment::ScalarDiffusion => {
            // Ungraded, half-optimal (at least quadratic), and optimal.
            let optimal = 2.0 / alpha;
            vec![1.0, (optimal / 2.0).max(2.0), optimal]
        }
        Experiment::Wave | Experiment::ScalarWave => {
            vec![2.0 * (3.0 - alpha) / alpha]
        }
        Experiment::Oracles => Vec::new(),
    }
}

fn default_grids(experiment: Experiment, alpha: f64, profile: Profile) -> Vec<usize> {
    let full: &[usize] = match experiment {
        // Strongly singular solutions need finer grids before the
        // asymptotic range shows.
        Experiment::Diffusion if alpha < 0.35 => &[512, 1024, 2048, 4096],
        Experiment::Diffusion => &[128, 256, 512, 1024],
        Experiment::Wave => &[64, 128, 256, 512],
        Experiment::ScalarDiffusion => &[64, 128, 256, 512, 1024, 2048],
        Experiment::ScalarWave => &[64, 128, 256, 512, 1024],
        Experiment::Oracles => &[],
    };
    match (experiment.is_field(), profile) {
        (true, Profile::Ci) => full.iter().copied().filter(|&j| j <= CI_GRID_CAP).collect(),
        _ => full.to_vec(),
    }
}

/// Expected asymptotic order of the error in `J`, when the theory pins one
/// down for this experiment's built-in datum. The run summary grades the
/// finest observed order against it.
pub fn expected_order(cfg: &RunConfig, sigma: f64) -> Option<f64> {
    match cfg.experiment {
        // Datum in the operator domain: rate min(sigma * alpha, 1).
        Experiment::ScalarDiffusion => Some((sigma * cfg.alpha).min(1.0)),
        // Datum x^0.51 (1-x) has spatial regularity index about 1/2,
        // halving the attainable rate.
        Experiment::Diffusion => Some((sigma * cfg.alpha / 2.0).min(1.0)),
        // At the optimal grading the nodal error decays at order 3 - alpha;
        // no claim is made for other gradings.
        Experiment::Wave | Experiment::ScalarWave => {
            let optimal = 2.0 * (3.0 - cfg.alpha) / cfg.alpha;
            if (sigma - optimal).abs() < 1e-9 * optimal {
                Some(3.0 - cfg.alpha)
            } else {
                None
            }
        }
        Experiment::Oracles => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diffusion_ci() -> RunConfig {
        RunConfig::defaults(Experiment::Diffusion, 0.5, Profile::Ci)
    }

    #[test]
    fn defaults_follow_the_profile() {
        let ci = diffusion_ci();
        assert_eq!(ci.cells, 512);
        assert_eq!(ci.reference_intervals, 8192);
        assert_eq!(ci.reference_sigma, 4.0);
        assert_eq!(ci.sigmas, vec![1.0, 2.0, 4.0]);
        assert_eq!(ci.grids, vec![128, 256, 512, 1024]);
        ci.validate().unwrap();

        let full = RunConfig::defaults(Experiment::Diffusion, 0.5, Profile::Full);
        assert_eq!(full.cells, 2048);
        assert_eq!(full.reference_intervals, 32768);
        assert_eq!(full.grids, vec![128, 256, 512, 1024]);
        full.validate().unwrap();

        // The strongly singular case starts its ladder later, and the ci
        // profile keeps only the affordable part.
        let singular = RunConfig::defaults(Experiment::Diffusion, 0.2, Profile::Full);
        assert_eq!(singular.grids, vec![512, 1024, 2048, 4096]);
        assert_eq!(singular.sigmas, vec![1.0, 5.0, 10.0]);
        let singular_ci = RunConfig::defaults(Experiment::Diffusion, 0.2, Profile::Ci);
        assert_eq!(singular_ci.grids, vec![512, 1024]);

        let wave = RunConfig::defaults(Experiment::Wave, 1.5, Profile::Ci);
        assert_eq!(wave.sigmas, vec![2.0]);
        assert_eq!(wave.reference_sigma, 2.0);
        wave.validate().unwrap();

        let scalar = RunConfig::defaults(Experiment::ScalarDiffusion, 0.5, Profile::Ci);
        assert_eq!(scalar.cells, 0);
        assert_eq!(scalar.reference_intervals, 0);
        assert_eq!(scalar.grids.last(), Some(&2048));
        scalar.validate().unwrap();
    }

    #[test]
    fn validation_rejects_bad_configs() {
        let mut cfg = diffusion_ci();
        cfg.alpha = 1.5;
        assert!(cfg.validate().is_err());

        let mut cfg = diffusion_ci();
        cfg.grids = vec![128, 96];
        assert!(cfg.validate().is_err());

        let mut cfg = diffusion_ci();
        cfg.grids = vec![100, 200];
        assert!(cfg.validate().is_err());
        cfg.allow_any_grid = true;
        cfg.reference_intervals = 8000;
        cfg.validate().unwrap();

        let mut cfg = diffusion_ci();
        cfg.reference_intervals = 1024;
        assert!(cfg.validate().is_err());

        let mut cfg = diffusion_ci();
        cfg.sigmas = vec![0.5];
        assert!(cfg.validate().is_err());

        let mut cfg = RunConfig::defaults(Experiment::ScalarWave, 1.5, Profile::Ci);
        cfg.cells = 64;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn flags_override_file_overrides_defaults() {
        let file = ConfigPatch {
            experiment: Some(Experiment::Diffusion),
            alpha: Some(0.5),
            seed: Some(99),
            cells: Some(256),
            ..ConfigPatch::default()
        };
        let flags = ConfigPatch {
            seed: Some(3),
            ..ConfigPatch::default()
        };
        let cfg = resolve(Some(file), flags).unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.cells, 256);
        assert_eq!(cfg.profile, Profile::Ci);
    }

    #[test]
    fn fingerprint_tracks_semantic_fields_only() {
        let a = diffusion_ci();
        let mut b = diffusion_ci();
        b.out_dir = PathBuf::from("elsewhere");
        assert_eq!(a.fingerprint(), b.fingerprint());

        let mut c = diffusion_ci();
        c.seed = 8;
        assert_ne!(a.fingerprint(), c.fingerprint());

        let mut d = diffusion_ci();
        d.grids = vec![128, 256];
        assert_ne!(a.fingerprint(), d.fingerprint());
    }

    #[test]
    fn expected_orders_match_the_theory() {
        let cfg = diffusion_ci();
        assert_eq!(expected_order(&cfg, 1.0), Some(0.25));
        assert_eq!(expected_order(&cfg, 4.0), Some(1.0));
        let wave = RunConfig::defaults(Experiment::Wave, 1.5, Profile::Ci);
        assert_eq!(expected_order(&wave, 2.0), Some(1.5));
        assert_eq!(expected_order(&wave, 3.0), None);
        let scalar = RunConfig::defaults(Experiment::ScalarDiffusion, 0.5, Profile::Ci);
        assert_eq!(expected_order(&scalar, 2.0), Some(1.0));
    }

    #[test]
    fn config_files_round_trip_and_reject_unknown_fields() {
        let json = r#"{"experiment":"scalar-wave","alpha":1.5,"seed":11}"#;
        let patch: ConfigPatch = serde_json::from_str(json).unwrap();
        let cfg = resolve(Some(patch), ConfigPatch::default()).unwrap();
        assert_eq!(cfg.experiment, Experiment::ScalarWave);
        assert_eq!(cfg.seed, 11);

        let bad = r#"{"experiment":"wave","alfa":1.5}"#;
        assert!(serde_json::from_str::<ConfigPatch>(bad).is_err());
    }
}
