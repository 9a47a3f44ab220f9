//! Experiment configuration files.
//!
//! A configuration is a JSON object; unknown keys are rejected so that a
//! misspelled option never silently falls back to its default. The file is
//! kept verbatim and echoed into every report.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::bmo::Symbol;
use crate::error::{Error, Result};
use crate::field::{Point, SampledField};
use crate::intrinsic::{ConeQuadrature, DEFAULT_LATTICE_STEP};
use crate::morrey::{EnvelopeReading, HardyConfig, ProbeSet, WeightFunction};
use crate::young::{log_grid, YoungFunction};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub origin: Vec<f64>,
    pub h: f64,
    pub extents: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    pub centers: Vec<Vec<f64>>,
    pub r_min: f64,
    pub r_max: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    /// Defaults to two grid cells.
    #[serde(default)]
    pub t_min: Option<f64>,
    /// Defaults to half the box side.
    #[serde(default)]
    pub t_max: Option<f64>,
    #[serde(default = "default_npd")]
    pub nodes_per_decade: usize,
    #[serde(default = "default_m")]
    pub m: usize,
    /// Spatial truncation of the half-space integral; defaults to half the
    /// box side.
    #[serde(default)]
    pub r_max: Option<f64>,
    /// Upper truncation of the radial integrals on the right-hand sides.
    #[serde(default = "default_s_max")]
    pub s_max: f64,
    #[serde(default)]
    pub lattice_step: Option<f64>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            t_min: None,
            t_max: None,
            nodes_per_decade: default_npd(),
            m: default_m(),
            r_max: None,
            s_max: default_s_max(),
            lattice_step: None,
        }
    }
}

/// Radii and truncation for the Zygmund-type condition.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZygmundSpec {
    pub r_min: f64,
    pub r_max: f64,
    pub count: usize,
    pub s_max: f64,
}

impl Default for ZygmundSpec {
    fn default() -> Self {
        ZygmundSpec { r_min: 1e-3, r_max: 1.0, count: 13, s_max: 1e5 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HardySpec {
    pub v1: String,
    pub v2: String,
    pub w: String,
    pub t_min: f64,
    pub t_max: f64,
    pub count: usize,
    pub s_max: f64,
}

fn default_young() -> String {
    "power:2".into()
}

fn default_alpha() -> f64 {
    1.0
}

fn default_betas() -> Vec<f64> {
    vec![1.0, 2.0, 4.0, 8.0]
}

fn default_npd() -> usize {
    4
}

fn default_m() -> usize {
    16
}

fn default_s_max() -> f64 {
    1e4
}

fn default_true() -> bool {
    true
}

/// The parsed configuration file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dim: usize,
    pub grid: GridSpec,
    #[serde(default = "default_young")]
    pub young: String,
    #[serde(default)]
    pub phi1: Option<String>,
    #[serde(default)]
    pub phi2: Option<String>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_betas")]
    pub beta_list: Vec<f64>,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub symbol: Option<String>,
    pub probes: ProbeSpec,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    #[serde(default)]
    pub zygmund: ZygmundSpec,
    #[serde(default)]
    pub corpus: Vec<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub envelope: EnvelopeReading,
    #[serde(default)]
    pub hardy: Option<HardySpec>,
    /// Repeat each experiment on the halved grid with a doubled corpus.
    #[serde(default = "default_true")]
    pub refine: bool,
    /// Rerun with `t_max` and `R_max` doubled and report the change.
    #[serde(default = "default_true")]
    pub truncation_check: bool,
    /// Free-form annotation, ignored by the runner.
    #[serde(default)]
    pub description: Option<String>,
    #[serde(skip)]
    raw: String,
    #[serde(skip)]
    overrides: Vec<(String, String)>,
    #[serde(skip)]
    level: u32,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid configuration: {e}")))?;
        cfg.raw = text.to_string();
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ExperimentConfig::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// The configuration text exactly as read.
    pub fn raw(&self) -> &str {
        &self.raw
    }

    pub fn overrides(&self) -> &[(String, String)] {
        &self.overrides
    }

    /// Replaces the seed, recording the override.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.overrides.push(("seed".into(), seed.to_string()));
        self
    }

    /// Number of refinements applied to the file's grid.
    pub fn level(&self) -> u32 {
        self.level
    }

    fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.dim != 1 && self.dim != 2 {
            return bad(format!("dim must be 1 or 2, got {}", self.dim));
        }
        if self.grid.origin.len() != self.dim || self.grid.extents.len() != self.dim {
            return bad("grid origin and extents need one entry per dimension".into());
        }
        if self.probes.centers.iter().any(|c| c.len() != self.dim) {
            return bad("every probe center needs one coordinate per dimension".into());
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad(format!("alpha must lie in (0, 1], got {}", self.alpha));
        }
        if self.beta_list.iter().any(|b| !(*b >= 1.0 && b.is_finite())) {
            return bad("apertures must be at least 1".into());
        }
        let young = YoungFunction::from_id(&self.young)?;
        for w in [&self.phi1, &self.phi2].into_iter().flatten() {
            WeightFunction::from_id(w, self.dim, &young)?;
        }
        if let Some(s) = &self.symbol {
            Symbol::from_id(s)?;
        }
        if let Some(h) = &self.hardy {
            for w in [&h.v1, &h.v2, &h.w] {
                WeightFunction::from_id(w, self.dim, &young)?;
            }
        }
        Ok(())
    }

    /// The configuration on the grid with half the spacing over the same
    /// box, and twice the `t` node density.
    pub fn refined(&self) -> Self {
        let mut cfg = self.clone();
        cfg.grid.h /= 2.0;
        cfg.grid.extents.iter_mut().for_each(|e| *e *= 2);
        cfg.quadrature.nodes_per_decade *= 2;
        cfg.level += 1;
        cfg
    }

    /// Resolves every catalog id and builds the numerical objects.
    pub fn resolve(&self) -> Result<Resolved> {
        let origin = point(&self.grid.origin);
        let extents =
            if self.dim == 1 { [self.grid.extents[0], 1] } else { [self.grid.extents[0], self.grid.extents[1]] };
        let template = SampledField::zeros(self.dim, origin, self.grid.h, extents)
            .map_err(|e| Error::Config(format!("grid: {e}")))?;
        let young = YoungFunction::from_id(&self.young)?;
        let weight =
            |id: &Option<String>| id.as_deref().map(|w| WeightFunction::from_id(w, self.dim, &young)).transpose();
        let phi1 = weight(&self.phi1)?;
        let phi2 = weight(&self.phi2)?;
        let probes = ProbeSet::new(
            self.probes.centers.iter().map(|c| point(c)).collect(),
            self.probes.r_min,
            self.probes.r_max,
            self.probes.count,
        )
        .map_err(|e| Error::Config(format!("probes: {e}")))?;
        probes.validate_for(&template).map_err(|e| Error::Config(format!("probes: {e}")))?;
        let q = &self.quadrature;
        let half = template.box_side() / 2.0;
        let mut quad = ConeQuadrature::new(
            q.t_min.unwrap_or(2.0 * self.grid.h),
            q.t_max.unwrap_or(half),
            q.nodes_per_decade,
            q.m,
            q.r_max.unwrap_or(half),
        )
        .map_err(|e| Error::Config(format!("quadrature: {e}")))?;
        quad.lattice_step = q.lattice_step.unwrap_or(DEFAULT_LATTICE_STEP);
        quad.validate_for(&template).map_err(|e| Error::Config(format!("quadrature: {e}")))?;
        let symbol = self.symbol.as_deref().map(Symbol::from_id).transpose()?;
        let z = &self.zygmund;
        if !(z.r_min > 0.0 && z.r_max >= z.r_min && z.count > 0) {
            return Err(Error::Config("zygmund radii must satisfy 0 < r_min <= r_max".into()));
        }
        let zygmund_radii = if z.count == 1 { vec![z.r_min] } else { log_grid(z.r_min, z.r_max, z.count) };
        let hardy = match &self.hardy {
            Some(h) => Some(HardyConfig::new(
                WeightFunction::from_id(&h.v1, self.dim, &young)?,
                WeightFunction::from_id(&h.v2, self.dim, &young)?,
                WeightFunction::from_id(&h.w, self.dim, &young)?,
                h.t_min,
                h.t_max,
                h.count,
                h.s_max,
            )?),
            None => None,
        };
        Ok(Resolved { template, young, phi1, phi2, probes, quad, symbol, zygmund_radii, hardy })
    }

    /// One-line description of the grid for report provenance.
    pub fn grid_label(&self) -> String {
        let q = &self.quadrature;
        let or_default = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_else(|| "default".into());
        format!(
            "dim={} h={} extents={:?} t=[{}, {}] R_max={} t_nodes/decade={} m={} lattice={}",
            self.dim,
            self.grid.h,
            self.grid.extents,
            or_default(q.t_min),
            or_default(q.t_max),
            or_default(q.r_max),
            self.quadrature.nodes_per_decade,
            self.quadrature.m,
            self.quadrature.lattice_step.unwrap_or(DEFAULT_LATTICE_STEP)
        )
    }
}

fn point(c: &[f64]) -> Point {
    [c[0], c.get(1).copied().unwrap_or(0.0)]
}

/// Numerical objects built from an [`ExperimentConfig`].
#[derive(Debug, Clone)]
pub struct Resolved {
    /// The zero field on the configured grid.
    pub template: SampledField,
    pub young: YoungFunction,
    pub phi1: Option<WeightFunction>,
    pub phi2: Option<WeightFunction>,
    pub probes: ProbeSet,
    pub quad: ConeQuadrature,
    pub symbol: Option<Symbol>,
    pub zygmund_radii: Vec<f64>,
    pub hardy: Option<HardyConfig>,
}
