//! Experiment configuration: one JSON document, validated before any work.

use std::path::PathBuf;

use anyhow::{bail, ensure, Context, Result};
use dirac_virial::clifford::CliffordJson;
use dirac_virial::evolution::EigenOptions;
use dirac_virial::potentials::RadialMesh;
use dirac_virial::{GridSpec, PotentialSpec};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

fn default_grid() -> GridSpec {
    GridSpec::new(3, 128, 8.0)
}
fn one() -> f64 {
    1.0
}
fn one_u() -> usize {
    1
}
fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default = "default_grid")]
    pub grid: GridSpec,
    #[serde(default = "one")]
    pub mass: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub potential: Option<PotentialSpec>,
    /// Radius R of the truncated Morawetz multiplier.
    #[serde(default = "one")]
    pub multiplier_r: f64,
    /// Explicit α/β matrices replacing the built-in representation.
    #[serde(default)]
    pub clifford: Option<CliffordJson>,
    #[serde(default)]
    pub identities: IdentitiesConfig,
    #[serde(default)]
    pub certify: CertifyConfig,
    #[serde(default)]
    pub norms: NormsConfig,
    #[serde(default)]
    pub evolve: EvolveConfig,
    #[serde(default)]
    pub spectrum: SpectrumConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IdentitiesConfig {
    pub random_pairs: usize,
    pub packet_width: f64,
    /// Clifford relations and the matrix identity.
    pub exact_tol: f64,
    /// Potential rewrite with composed commutators.
    pub composed_tol: f64,
    /// Field identities that carry discretization error.
    pub field_tol: f64,
    /// Allowed negative kinetic margin, relative to K.
    pub kinetic_tol: f64,
}

impl Default for IdentitiesConfig {
    fn default() -> Self {
        Self { random_pairs: 1000, packet_width: 1.5, exact_tol: 1e-12, composed_tol: 1e-8, field_tol: 1e-6, kinetic_tol: 1e-4 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremFamily {
    /// Absence of eigenvalues (m = 0 or m > 0).
    Stationary,
    /// Boundedness of the smoothing functional.
    Smoothing,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyConfig {
    #[serde(default = "stationary")]
    pub family: TheoremFamily,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub mesh: RadialMesh,
}

fn stationary() -> TheoremFamily {
    TheoremFamily::Stationary
}

impl Default for CertifyConfig {
    fn default() -> Self {
        Self { family: TheoremFamily::Stationary, epsilon: None, mesh: RadialMesh::default() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormsConfig {
    pub fields: usize,
    pub ncomp: usize,
    pub delta: f64,
    pub slack: f64,
}

impl Default for NormsConfig {
    fn default() -> Self {
        Self { fields: 200, ncomp: 2, delta: 0.25, slack: 1e-6 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvolveMode {
    /// One Gaussian packet.
    Packet,
    /// Random packets; reports the largest smoothing ratio.
    Family,
    /// Single-momentum superposition of both energy signs.
    Zitterbewegung,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PacketConfig {
    /// Zero when absent.
    pub center: Option<Vec<f64>>,
    pub momentum: Option<Vec<f64>>,
    pub width: f64,
    /// `[re, im]` per component; random from the seed when absent.
    pub spinor: Option<Vec<[f64; 2]>>,
}

impl Default for PacketConfig {
    fn default() -> Self {
        Self { center: None, momentum: None, width: 1.5, spinor: None }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    #[serde(default = "packet_mode")]
    pub mode: EvolveMode,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "one_u")]
    pub cadence: usize,
    #[serde(default = "one")]
    pub delta: f64,
    #[serde(default)]
    pub window_radius: Option<f64>,
    #[serde(default = "yes")]
    pub smoothing: bool,
    #[serde(default)]
    pub packet: PacketConfig,
    #[serde(default = "default_family")]
    pub family_size: usize,
    /// Centers and momenta are drawn uniformly from [−spread, spread]^d.
    #[serde(default = "half")]
    pub family_spread: f64,
    #[serde(default = "default_widths")]
    pub family_widths: [f64; 2],
    /// Horizons at which the family ratio is reported.
    #[serde(default)]
    pub report_times: Vec<f64>,
    #[serde(default = "default_modes")]
    pub zitter_modes: Vec<i64>,
    #[serde(default = "one")]
    pub zitter_positive: f64,
    #[serde(default = "one")]
    pub zitter_negative: f64,
}

fn packet_mode() -> EvolveMode {
    EvolveMode::Packet
}
fn default_dt() -> f64 {
    0.05
}
fn default_t_max() -> f64 {
    2.0
}
fn default_family() -> usize {
    20
}
fn half() -> f64 {
    0.5
}
fn default_widths() -> [f64; 2] {
    [1.0, 1.5]
}
fn default_modes() -> Vec<i64> {
    vec![1]
}

impl Default for EvolveConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    #[serde(default = "default_count")]
    pub count: usize,
    /// (−0.99m, 0.99m) when absent.
    #[serde(default)]
    pub window: Option<[f64; 2]>,
    #[serde(default)]
    pub options: EigenOptions,
}

fn default_count() -> usize {
    2
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self { count: 2, window: None, options: EigenOptions::default() }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).context("config does not match the schema")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn default_for_schema() -> Self {
        Self::parse(&format!("{{\"schema_version\": {SCHEMA_VERSION}}}")).expect("defaults are valid")
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(self.schema_version == SCHEMA_VERSION, "unsupported schema_version {} (expected {SCHEMA_VERSION})", self.schema_version);
        self.grid.validate()?;
        ensure!(self.mass >= 0.0 && self.mass.is_finite(), "mass must be a nonnegative number");
        ensure!(self.multiplier_r > 0.0, "multiplier_r must be positive");
        if let Some(p) = &self.potential {
            p.validate()?;
        }
        let d = self.grid.d;
        let id = &self.identities;
        ensure!(id.packet_width > 0.0, "identities.packet_width must be positive");
        for t in [id.exact_tol, id.composed_tol, id.field_tol, id.kinetic_tol] {
            ensure!(t >= 0.0, "tolerances must be nonnegative");
        }
        if let Some(e) = self.certify.epsilon {
            ensure!(e > 0.0 && e < 1.0, "certify.epsilon must lie in (0, 1)");
        }
        self.certify.mesh.validate()?;
        ensure!(self.norms.ncomp >= 1 && self.norms.delta > 0.0, "norms needs ncomp ≥ 1 and δ > 0");
        let ev = &self.evolve;
        let pk = &ev.packet;
        ensure!(pk.width > 0.0, "evolve.packet.width must be positive");
        for v in [&pk.center, &pk.momentum].into_iter().flatten() {
            ensure!(v.len() == d, "packet vectors must have length d = {d}");
        }
        ensure!(ev.family_widths[0] > 0.0 && ev.family_widths[0] <= ev.family_widths[1], "family_widths must be increasing and positive");
        ensure!(ev.family_spread >= 0.0, "family_spread must be nonnegative");
        if ev.mode == EvolveMode::Zitterbewegung && ev.zitter_modes.len() > d {
            bail!("zitter_modes has more entries than d = {d}");
        }
        if let Some([lo, hi]) = self.spectrum.window {
            ensure!(lo < hi, "spectrum.window must have lo < hi");
        }
        ensure!(self.spectrum.count >= 1, "spectrum.count must be at least 1");
        Ok(())
    }

    /// Smaller grids and sample counts for smoke runs.
    pub fn apply_quick(&mut self) {
        let cap = match self.grid.d {
            1 => 64,
            2 => 48,
            3 => 32,
            4 => 16,
            _ => 8,
        };
        self.grid.n = self.grid.n.min(cap);
        self.identities.random_pairs = self.identities.random_pairs.min(50);
        self.norms.fields = self.norms.fields.min(10);
        self.evolve.family_size = self.evolve.family_size.min(3);
    }
}
