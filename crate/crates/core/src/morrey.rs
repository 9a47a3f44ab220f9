//! Generalized Orlicz–Morrey norms, the Zygmund-type integral condition on
//! weight pairs, and the supremal Hardy operator.

use std::fmt;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{Ball, Point, SampledField};
use crate::orlicz::luxemburg_norm;
use crate::young::{log_grid, read_pairs, YoungFunction};

/// Grid density used for every suffix scan and log-grid quadrature.
pub const POINTS_PER_DECADE: usize = 256;
/// Relative change under truncation doubling above which a tail diverges.
pub const DIVERGENCE_THRESHOLD: f64 = 0.05;

/// A positive radial weight `φ(r)`.
#[derive(Debug, Clone)]
pub enum WeightFunction {
    /// A nonnegative constant; zero is allowed for the Hardy weights.
    Constant(f64),
    /// `r^γ`.
    PowerLaw(f64),
    /// `Φ^{-1}(r^{-n})`.
    OrliczMatch {
        young: YoungFunction,
        dim: usize,
    },
    /// `r^{(λ - n)/p}`.
    MorreyClassical {
        lambda: f64,
        p: f64,
        dim: usize,
    },
    Tabulated(LogTable),
    Product(Vec<WeightFunction>),
}

/// Piecewise power law through tabulated `(r, φ(r))` samples, extended by
/// the end slopes.
#[derive(Debug, Clone)]
pub struct LogTable {
    source: String,
    log_r: Vec<f64>,
    log_v: Vec<f64>,
}

impl LogTable {
    pub fn new(radii: Vec<f64>, values: Vec<f64>, source: impl Into<String>) -> Result<Self> {
        if radii.len() < 2 || radii.len() != values.len() {
            return Err(Error::Argument("a weight table needs at least two (r, value) rows".into()));
        }
        if radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] <= 0.0 {
            return Err(Error::Argument("weight table radii must be positive and increasing".into()));
        }
        if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Argument("weight table values must be positive and finite".into()));
        }
        Ok(LogTable {
            source: source.into(),
            log_r: radii.iter().map(|r| r.ln()).collect(),
            log_v: values.iter().map(|v| v.ln()).collect(),
        })
    }

    pub fn value(&self, r: f64) -> f64 {
        let u = r.ln();
        let n = self.log_r.len();
        let k = match self.log_r.partition_point(|&x| x <= u) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let (u0, u1) = (self.log_r[k], self.log_r[k + 1]);
        let (v0, v1) = (self.log_v[k], self.log_v[k + 1]);
        (v0 + (v1 - v0) * (u - u0) / (u1 - u0)).exp()
    }
}

impl WeightFunction {
    /// Resolves a catalog id. Factors joined by `*` form a product.
    ///
    /// `dim` and `young` bind the dimension and Young function that
    /// `orliczmatch` and `morrey:λ:p` depend on.
    pub fn from_id(id: &str, dim: usize, young: &YoungFunction) -> Result<Self> {
        let id = id.trim();
        if id.contains('*') && !id.starts_with("table:") {
            let factors = id.split('*').map(|f| WeightFunction::from_id(f, dim, young)).collect::<Result<Vec<_>>>()?;
            return Ok(WeightFunction::Product(factors));
        }
        let num =
            |s: &str| s.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad number in weight id `{id}`")));
        if let Some(path) = id.strip_prefix("table:") {
            return WeightFunction::from_csv(path);
        }
        if id == "orliczmatch" {
            return Ok(WeightFunction::OrliczMatch { young: young.clone(), dim });
        }
        if let Some(c) = id.strip_prefix("const:") {
            let c = num(c)?;
            if !(c >= 0.0 && c.is_finite()) {
                return Err(Error::Config(format!("constant weight must be nonnegative, got `{id}`")));
            }
            return Ok(WeightFunction::Constant(c));
        }
        if let Some(g) = id.strip_prefix("powerlaw:") {
            return Ok(WeightFunction::PowerLaw(num(g)?));
        }
        if let Some(rest) = id.strip_prefix("morrey:") {
            let (l, p) =
                rest.split_once(':').ok_or_else(|| Error::Config(format!("expected morrey:λ:p, got `{id}`")))?;
            let (lambda, p) = (num(l)?, num(p)?);
            if !(p >= 1.0 && (0.0..=dim as f64).contains(&lambda)) {
                return Err(Error::Config(format!("morrey weight needs p >= 1 and 0 <= λ <= n, got `{id}`")));
            }
            return Ok(WeightFunction::MorreyClassical { lambda, p, dim });
        }
        Err(Error::Config(format!("unknown weight id `{id}`")))
    }

    /// Loads a two-column `r,φ(r)` CSV file.
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let (r, v) = read_pairs(path)?;
        let table = LogTable::new(r, v, path.display().to_string()).map_err(|e| Error::parse(path, e.to_string()))?;
        Ok(WeightFunction::Tabulated(table))
    }

    /// `φ(r)`; the catalog weights do not depend on the center.
    pub fn value(&self, r: f64) -> f64 {
        match self {
            WeightFunction::Constant(c) => *c,
            WeightFunction::PowerLaw(g) => r.powf(*g),
            WeightFunction::OrliczMatch { young, dim } => young.inverse(r.powi(-(*dim as i32))),
            WeightFunction::MorreyClassical { lambda, p, dim } => r.powf((lambda - *dim as f64) / p),
            WeightFunction::Tabulated(t) => t.value(r),
            WeightFunction::Product(fs) => fs.iter().map(|f| f.value(r)).product(),
        }
    }

    pub fn id(&self) -> String {
        match self {
            WeightFunction::Constant(c) => format!("const:{c}"),
            WeightFunction::PowerLaw(g) => format!("powerlaw:{g}"),
            WeightFunction::OrliczMatch { .. } => "orliczmatch".into(),
            WeightFunction::MorreyClassical { lambda, p, .. } => format!("morrey:{lambda}:{p}"),
            WeightFunction::Tabulated(t) => format!("table:{}", t.source),
            WeightFunction::Product(fs) => fs.iter().map(|f| f.id()).collect::<Vec<_>>().join("*"),
        }
    }
}

impl fmt::Display for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

/// Balls `B(x, r)` over a set of centers and a log-spaced list of radii.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeSet {
    pub centers: Vec<Point>,
    pub radii: Vec<f64>,
}

impl ProbeSet {
    pub fn new(centers: Vec<Point>, r_min: f64, r_max: f64, count: usize) -> Result<Self> {
        if !(r_min > 0.0 && r_max >= r_min) || count == 0 {
            return Err(Error::Argument(format!("bad probe radii [{r_min}, {r_max}] x {count}")));
        }
        let radii = if count == 1 { vec![r_min] } else { log_grid(r_min, r_max, count) };
        ProbeSet::with_radii(centers, radii)
    }

    pub fn with_radii(centers: Vec<Point>, radii: Vec<f64>) -> Result<Self> {
        if centers.is_empty() || radii.is_empty() {
            return Err(Error::Argument("probe set needs at least one center and one radius".into()));
        }
        if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::Argument("probe radii must be positive".into()));
        }
        Ok(ProbeSet { centers, radii })
    }

    pub fn r_min(&self) -> f64 {
        self.radii.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn r_max(&self) -> f64 {
        self.radii.iter().copied().fold(0.0, f64::max)
    }

    /// All balls, center-major.
    pub fn balls(&self) -> Vec<Ball> {
        self.centers.iter().flat_map(|c| self.radii.iter().map(move |&r| Ball { center: *c, radius: r })).collect()
    }

    pub fn len(&self) -> usize {
        self.centers.len() * self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Requires two cells per radius and every ball inside the box.
    pub fn validate_for(&self, f: &SampledField) -> Result<()> {
        let h = f.spacing();
        if self.r_min() < 2.0 * h * (1.0 - 1e-12) {
            return Err(Error::Precondition(format!(
                "smallest probe radius {} is below two cells ({})",
                self.r_min(),
                2.0 * h
            )));
        }
        let (lo, hi) = f.bounds();
        let r = self.r_max();
        let slack = 1e-9 * f.box_side();
        for c in &self.centers {
            let axes = if f.dim() == 1 { 1 } else { 2 };
            for k in 0..axes {
                if c[k] - r < lo[k] - slack || c[k] + r > hi[k] + slack {
                    return Err(Error::Precondition(format!("probe ball B({c:?}, {r}) leaves the field's box")));
                }
            }
        }
        Ok(())
    }
}

/// One term of the Morrey supremum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeValue {
    pub center: Point,
    pub radius: f64,
    pub value: f64,
}

/// `φ(x,r)^{-1} Φ^{-1}(r^{-n}) ‖f‖_{L^Φ(B(x,r))}` for every probe.
pub fn morrey_profile(
    f: &SampledField,
    phi: &YoungFunction,
    weight: &WeightFunction,
    probes: &ProbeSet,
) -> Result<Vec<ProbeValue>> {
    probes.validate_for(f)?;
    let n = f.dim() as i32;
    Ok(probes
        .balls()
        .into_par_iter()
        .map(|ball| {
            let r = ball.radius;
            let norm = luxemburg_norm(f, &ball, phi);
            let value = if norm == 0.0 { 0.0 } else { phi.inverse(r.powi(-n)) / weight.value(r) * norm };
            ProbeValue { center: ball.center, radius: r, value }
        })
        .collect())
}

/// The generalized Orlicz–Morrey norm over the probe set.
pub fn morrey_norm(f: &SampledField, phi: &YoungFunction, weight: &WeightFunction, probes: &ProbeSet) -> Result<f64> {
    Ok(morrey_profile(f, phi, weight, probes)?.iter().map(|p| p.value).fold(0.0, f64::max))
}

/// Which essential extremum the envelope over `(t, ∞)` takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeReading {
    #[default]
    EssInf,
    EssSup,
}

/// Value of the envelope at one `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Envelope {
    pub value: f64,
    /// The extremum sits at the truncation point, so a larger `S_max` would
    /// change it.
    pub truncation_dominated: bool,
}

/// Suffix extrema of `φ1(s)/Φ^{-1}(s^{-n})` on a log grid ending at `S_max`.
fn envelope_scan(
    phi1: &WeightFunction,
    young: &YoungFunction,
    dim: usize,
    grid: &[f64],
    reading: EnvelopeReading,
) -> Vec<Envelope> {
    let n = dim as i32;
    let ratio: Vec<f64> = grid.iter().map(|&s| phi1.value(s) / young.inverse(s.powi(-n))).collect();
    let last = grid.len() - 1;
    let mut out = vec![Envelope { value: 0.0, truncation_dominated: false }; grid.len()];
    let (mut best, mut at) = (ratio[last], last);
    for k in (0..=last).rev() {
        let better = match reading {
            EnvelopeReading::EssInf => ratio[k] < best,
            EnvelopeReading::EssSup => ratio[k] > best,
        };
        if better {
            best = ratio[k];
            at = k;
        }
        out[k] = Envelope { value: best, truncation_dominated: at == last && k != last && ratio[k] != best };
    }
    out
}

fn grid_points(lo: f64, hi: f64) -> usize {
    ((hi / lo).log10() * POINTS_PER_DECADE as f64).ceil().max(2.0) as usize + 1
}

/// `inf_{t ≤ s ≤ S_max} φ1(s)/Φ^{-1}(s^{-n})` (or the supremum under the
/// alternative reading).
pub fn suffix_envelope(
    phi1: &WeightFunction,
    young: &YoungFunction,
    dim: usize,
    t: f64,
    s_max: f64,
    reading: EnvelopeReading,
) -> Result<Envelope> {
    if !(t > 0.0 && t < s_max) {
        return Err(Error::Argument(format!("need 0 < t < S_max, got t = {t}, S_max = {s_max}")));
    }
    let grid = log_grid(t, s_max, grid_points(t, s_max));
    Ok(envelope_scan(phi1, young, dim, &grid, reading)[0])
}

/// A constant estimated on a truncated domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncatedConstant {
    pub value: f64,
    /// Radius or `t` at which the supremum is attained.
    pub argmax: f64,
    /// Largest relative change of the underlying integrals when the
    /// truncation bound doubles.
    pub doubling_delta: f64,
}

/// Result of a sufficiency-condition check.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Bound {
    Finite(TruncatedConstant),
    Divergent { doubling_delta: f64 },
    Inconclusive { reason: String },
}

impl Bound {
    pub fn finite(&self) -> Option<f64> {
        match self {
            Bound::Finite(c) => Some(c.value),
            _ => None,
        }
    }

    pub fn is_divergent(&self) -> bool {
        matches!(self, Bound::Divergent { .. })
    }
}

/// Inputs of the Zygmund-type condition.
#[derive(Debug, Clone)]
pub struct ZygmundProblem<'a> {
    pub phi1: &'a WeightFunction,
    pub phi2: &'a WeightFunction,
    pub young: &'a YoungFunction,
    pub dim: usize,
    /// Multiply the integrand by `1 + ln(t/r)`.
    pub with_log: bool,
    pub reading: EnvelopeReading,
}

/// Per-radius integral `I(r)` and the envelope diagnostics.
fn zygmund_integral(p: &ZygmundProblem<'_>, r: f64, s_max: f64) -> (f64, bool) {
    let grid = log_grid(r, s_max, grid_points(r, s_max));
    let env = envelope_scan(p.phi1, p.young, p.dim, &grid, p.reading);
    let n = p.dim as i32;
    let integrand: Vec<f64> = grid
        .iter()
        .zip(&env)
        .map(|(&t, e)| {
            let log_factor = if p.with_log { 1.0 + (t / r).ln() } else { 1.0 };
            log_factor * e.value * p.young.inverse(t.powi(-n))
        })
        .collect();
    let du = (s_max / r).ln() / (grid.len() - 1) as f64;
    let sum: f64 = integrand.windows(2).map(|w| 0.5 * (w[0] + w[1]) * du).sum();
    (sum, env[0].truncation_dominated)
}

/// `sup_r φ2(r)^{-1} ∫_r^{S_max} [1 + ln(t/r)]^κ env(t) Φ^{-1}(t^{-n}) dt/t`,
/// declared divergent when doubling `S_max` moves any integral by more than
/// five percent.
pub fn zygmund_constant(p: &ZygmundProblem<'_>, radii: &[f64], s_max: f64) -> Result<Bound> {
    if radii.is_empty() {
        return Err(Error::Argument("no probe radii".into()));
    }
    let r_max = radii.iter().copied().fold(0.0, f64::max);
    if s_max < 10.0 * r_max {
        return Err(Error::Precondition(format!(
            "S_max = {s_max} must be at least 10 times the largest radius {r_max}"
        )));
    }
    let rows: Vec<(f64, f64, f64, bool)> = radii
        .par_iter()
        .map(|&r| {
            let (i1, dominated) = zygmund_integral(p, r, s_max);
            let (i2, _) = zygmund_integral(p, r, 2.0 * s_max);
            (r, i1, i2, dominated)
        })
        .collect();
    if rows.iter().all(|row| row.3) {
        return Ok(Bound::Inconclusive {
            reason: "the envelope is attained at the truncation bound for every radius".into(),
        });
    }
    let mut delta: f64 = 0.0;
    let mut best = TruncatedConstant { value: 0.0, argmax: radii[0], doubling_delta: 0.0 };
    for &(r, i1, i2, _) in &rows {
        let d = if i2 > 0.0 { (i2 - i1).abs() / i2 } else { 0.0 };
        delta = delta.max(d);
        let c = i1 / p.phi2.value(r);
        if c > best.value {
            best.value = c;
            best.argmax = r;
        }
    }
    if !delta.is_finite() || delta > DIVERGENCE_THRESHOLD || !best.value.is_finite() {
        return Ok(Bound::Divergent { doubling_delta: delta });
    }
    best.doubling_delta = delta;
    Ok(Bound::Finite(best))
}

/// Weights and grids for the supremal Hardy inequality
/// `sup v2 H*_w g ≤ B sup v1 g` over nondecreasing `g`.
#[derive(Debug, Clone)]
pub struct HardyConfig {
    pub v1: WeightFunction,
    pub v2: WeightFunction,
    pub w: WeightFunction,
    /// Points at which the outer supremum is taken.
    pub t_grid: Vec<f64>,
    pub s_max: f64,
}

impl HardyConfig {
    /// Log-spaced outer grid of `count` points on `[t_min, t_max]`.
    pub fn new(
        v1: WeightFunction,
        v2: WeightFunction,
        w: WeightFunction,
        t_min: f64,
        t_max: f64,
        count: usize,
        s_max: f64,
    ) -> Result<Self> {
        if !(t_min > 0.0 && t_max >= t_min && s_max > t_max) || count == 0 {
            return Err(Error::Argument(format!("need 0 < t_min <= t_max < S_max, got {t_min}, {t_max}, {s_max}")));
        }
        let t_grid = if count == 1 { vec![t_min] } else { log_grid(t_min, t_max, count) };
        let cfg = HardyConfig { v1, v2, w, t_grid, s_max };
        cfg.check_v1()?;
        Ok(cfg)
    }

    fn check_v1(&self) -> Result<()> {
        let grid = self.integration_grid_to(self.s_max);
        let tail_start = grid.len() / 2;
        if grid[tail_start..].iter().any(|&t| !self.v1.value(t).is_finite()) {
            return Err(Error::Precondition("v1 is unbounded near the truncation bound".into()));
        }
        Ok(())
    }

    /// Fine log grid from the first outer point to `S_max` containing every
    /// outer point as a node.
    pub fn integration_grid(&self) -> Vec<f64> {
        self.integration_grid_to(self.s_max)
    }

    fn integration_grid_to(&self, s_max: f64) -> Vec<f64> {
        let mut knots = self.t_grid.clone();
        knots.push(s_max);
        let mut grid = vec![knots[0]];
        for w in knots.windows(2) {
            let n = grid_points(w[0], w[1]);
            grid.extend_from_slice(&log_grid(w[0], w[1], n)[1..]);
        }
        grid
    }

    fn outer_indices(&self, grid: &[f64]) -> Vec<usize> {
        let mut idx = Vec::with_capacity(self.t_grid.len());
        let mut k = 0;
        for &t in &self.t_grid {
            while grid[k] != t {
                k += 1;
            }
            idx.push(k);
        }
        idx
    }
}

/// Reverse trapezoid `∫_{grid[k]}^{grid[last]} h(s) ds` for every `k`.
fn tail_integrals(grid: &[f64], h: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; grid.len()];
    for k in (0..grid.len() - 1).rev() {
        out[k] = out[k + 1] + 0.5 * (h[k] + h[k + 1]) * (grid[k + 1] - grid[k]);
    }
    out
}

/// `∫_{t}^{grid end} g w ds` with `t = grid[t_index]`, for `g` sampled on `grid`.
pub fn hardy_apply(g: &[f64], grid: &[f64], w: &WeightFunction, t_index: usize) -> Result<f64> {
    if g.len() != grid.len() || t_index >= grid.len() {
        return Err(Error::Argument("samples and grid disagree".into()));
    }
    if g.windows(2).any(|p| p[1] < p[0]) {
        return Err(Error::Precondition("g must be nondecreasing".into()));
    }
    let h: Vec<f64> = g[t_index..].iter().zip(&grid[t_index..]).map(|(g, &s)| g * w.value(s)).collect();
    Ok(tail_integrals(&grid[t_index..], &h)[0])
}

/// Suffix supremum of `v1` over `[s, S_max]`.
fn suffix_sup(v1: &WeightFunction, grid: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; grid.len()];
    let mut best: f64 = 0.0;
    for k in (0..grid.len()).rev() {
        best = best.max(v1.value(grid[k]));
        out[k] = best;
    }
    out
}

fn hardy_profile(cfg: &HardyConfig, s_max: f64) -> Option<(Vec<f64>, Vec<usize>, Vec<f64>)> {
    let grid = cfg.integration_grid_to(s_max);
    let sup_v1 = suffix_sup(&cfg.v1, &grid);
    if sup_v1.iter().any(|&v| v <= 0.0) {
        return None;
    }
    let h: Vec<f64> = grid.iter().zip(&sup_v1).map(|(&s, v)| cfg.w.value(s) / v).collect();
    let tails = tail_integrals(&grid, &h);
    let idx = cfg.outer_indices(&grid);
    let profile = idx.iter().map(|&k| cfg.v2.value(grid[k]) * tails[k]).collect();
    Some((grid, idx, profile))
}

/// `B = sup_t v2(t) ∫_t^{S_max} w(s) / sup_{s ≤ τ} v1(τ) ds`.
pub fn hardy_best_constant(cfg: &HardyConfig) -> Result<Bound> {
    let (Some((_, _, p1)), Some((_, _, p2))) = (hardy_profile(cfg, cfg.s_max), hardy_profile(cfg, 2.0 * cfg.s_max))
    else {
        return Ok(Bound::Divergent { doubling_delta: f64::INFINITY });
    };
    let mut delta: f64 = 0.0;
    let mut best = TruncatedConstant { value: 0.0, argmax: cfg.t_grid[0], doubling_delta: 0.0 };
    for ((&t, &a), &b) in cfg.t_grid.iter().zip(&p1).zip(&p2) {
        if b > 0.0 {
            delta = delta.max((b - a).abs() / b);
        }
        if a > best.value {
            best.value = a;
            best.argmax = t;
        }
    }
    if !delta.is_finite() || delta > DIVERGENCE_THRESHOLD || !best.value.is_finite() {
        return Ok(Bound::Divergent { doubling_delta: delta });
    }
    best.doubling_delta = delta;
    Ok(Bound::Finite(best))
}

/// A `g` and point where `v2 H*_w g` exceeds `B sup v1 g`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HardyViolation {
    pub g_index: usize,
    pub t: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HardyReport {
    pub best_constant: f64,
    /// `sup_t v2 H*_w g / (B sup v1 g)` per corpus entry; `None` for `g = 0`.
    pub ratios: Vec<Option<f64>>,
    pub max_ratio: f64,
    /// Ratio achieved by `g = 1 / sup_{s ≤ τ} v1(τ)`.
    pub witness_ratio: f64,
    pub violations: Vec<HardyViolation>,
}

/// Relative slack allowed before a ratio above one counts as a violation.
pub const HARDY_TOL: f64 = 1e-9;

/// Checks the Hardy inequality for each `g` (samples on
/// [`HardyConfig::integration_grid`]) and for the extremal witness.
pub fn hardy_verify(cfg: &HardyConfig, corpus: &[Vec<f64>]) -> Result<HardyReport> {
    let b = match hardy_best_constant(cfg)? {
        Bound::Finite(c) => c.value,
        other => return Err(Error::HypothesisUnmet(format!("the Hardy constant is not finite: {other:?}"))),
    };
    let grid = cfg.integration_grid();
    let idx = cfg.outer_indices(&grid);
    let ratio_of = |g: &[f64]| -> Result<Option<(f64, f64)>> {
        let rhs = grid.iter().zip(g).map(|(&t, g)| cfg.v1.value(t) * g).fold(0.0, f64::max);
        let mut lhs: f64 = 0.0;
        let mut at = cfg.t_grid[0];
        for &k in &idx {
            let v = cfg.v2.value(grid[k]) * hardy_apply(g, &grid, &cfg.w, k)?;
            if v > lhs {
                lhs = v;
                at = grid[k];
            }
        }
        if rhs == 0.0 || b == 0.0 {
            return Ok(if lhs == 0.0 { None } else { Some((f64::INFINITY, at)) });
        }
        Ok(Some((lhs / (b * rhs), at)))
    };
    let mut ratios = Vec::with_capacity(corpus.len());
    let mut violations = Vec::new();
    let mut max_ratio: f64 = 0.0;
    for (i, g) in corpus.iter().enumerate() {
        if g.len() != grid.len() {
            return Err(Error::Argument(format!(
                "corpus entry {i} has {} samples, the integration grid has {}",
                g.len(),
                grid.len()
            )));
        }
        let r = ratio_of(g)?;
        if let Some((ratio, t)) = r {
            max_ratio = max_ratio.max(ratio);
            if ratio > 1.0 + HARDY_TOL {
                violations.push(HardyViolation { g_index: i, t, ratio });
            }
        }
        ratios.push(r.map(|x| x.0));
    }
    let witness: Vec<f64> = suffix_sup(&cfg.v1, &grid).iter().map(|v| 1.0 / v).collect();
    let witness_ratio = ratio_of(&witness)?.map_or(0.0, |x| x.0);
    Ok(HardyReport { best_constant: b, ratios, max_ratio, witness_ratio, violations })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn power(p: f64) -> YoungFunction {
        YoungFunction::power(p).unwrap()
    }

    fn aligned_probes(h: f64, ks: impl Iterator<Item = usize>) -> ProbeSet {
        ProbeSet::with_radii(vec![[0.0, 0.0]], ks.map(|k| k as f64 * h).collect()).unwrap()
    }

    #[test]
    fn weight_catalog() {
        let y = power(2.0);
        let w = WeightFunction::from_id("morrey:0.5:2", 1, &y).unwrap();
        assert!((w.value(16.0) - 16f64.powf(-0.25)).abs() < 1e-15);
        let w = WeightFunction::from_id("orliczmatch", 1, &y).unwrap();
        assert!((w.value(4.0) - 0.5).abs() < 1e-15);
        let w = WeightFunction::from_id("powerlaw:2*powerlaw:-1", 1, &y).unwrap();
        assert!((w.value(3.0) - 3.0).abs() < 1e-14);
        assert_eq!(w.id(), "powerlaw:2*powerlaw:-1");
        assert!(WeightFunction::from_id("morrey:3:2", 1, &y).is_err());
        assert!(WeightFunction::from_id("nope", 1, &y).is_err());
    }

    #[test]
    fn tabulated_weight_interpolates_power_laws() {
        let t = LogTable::new(vec![1.0, 10.0, 100.0], vec![1.0, 100.0, 1000.0], "mem").unwrap();
        assert!((t.value(3.0) - 9.0).abs() < 1e-12);
        assert!((t.value(0.1) - 0.01).abs() < 1e-14);
        assert!((t.value(1000.0) - 10000.0).abs() < 1e-8);
        assert!(LogTable::new(vec![1.0, 1.0], vec![1.0, 2.0], "mem").is_err());
        assert!(LogTable::new(vec![1.0, 2.0], vec![1.0, 0.0], "mem").is_err());
    }

    #[test]
    fn probe_validation() {
        let f = SampledField::zeros(1, [-4.0, 0.0], 1.0 / 64.0, [512, 1]).unwrap();
        assert!(ProbeSet::new(vec![[0.0, 0.0]], 0.01, 1.0, 8).unwrap().validate_for(&f).is_err());
        assert!(ProbeSet::new(vec![[0.0, 0.0]], 0.05, 5.0, 8).unwrap().validate_for(&f).is_err());
        assert!(ProbeSet::new(vec![[0.0, 0.0]], 0.05, 4.0, 8).unwrap().validate_for(&f).is_ok());
    }

    #[test]
    fn classical_morrey_pattern_matches_direct_formula() {
        let h = 1.0 / 64.0;
        let f = SampledField::from_fn(1, [-4.0, 0.0], h, [512, 1], "chi", |p| if p[0].abs() < 1.0 { 1.0 } else { 0.0 })
            .unwrap();
        let y = power(2.0);
        let w = WeightFunction::MorreyClassical { lambda: 0.5, p: 2.0, dim: 1 };
        let probes = aligned_probes(h, (2..=256).step_by(3));
        let got = morrey_norm(&f, &y, &w, &probes).unwrap();
        let oracle = probes.radii.iter().map(|&r| r.powf(-0.25) * (2.0 * r.min(1.0)).sqrt()).fold(0.0, f64::max);
        assert!((got - oracle).abs() < 1e-6 * oracle, "{got} vs {oracle}");
        let zero = f.scaled(0.0);
        assert_eq!(morrey_norm(&zero, &y, &w, &probes).unwrap(), 0.0);
    }

    #[test]
    fn orlicz_match_recovers_orlicz_norm() {
        let h = 1.0 / 64.0;
        let f = SampledField::from_fn(1, [-4.0, 0.0], h, [512, 1], "bump", |p| (1.0 - p[0].abs()).max(0.0)).unwrap();
        let y = YoungFunction::llogl();
        let w = WeightFunction::OrliczMatch { young: y.clone(), dim: 1 };
        let probes = aligned_probes(h, [64, 96, 128, 192, 256].into_iter());
        let got = morrey_norm(&f, &y, &w, &probes).unwrap();
        let global = crate::orlicz::luxemburg_norm_total(&f, &y);
        assert!((got - global).abs() < 1e-9 * global, "{got} vs {global}");
    }

    #[test]
    fn envelope_readings() {
        let y = power(2.0);
        let w = WeightFunction::MorreyClassical { lambda: 0.5, p: 2.0, dim: 1 };
        let e = suffix_envelope(&w, &y, 1, 0.3, 100.0, EnvelopeReading::EssInf).unwrap();
        assert!((e.value - 0.3f64.powf(0.25)).abs() < 1e-12);
        assert!(!e.truncation_dominated);
        let e = suffix_envelope(&w, &y, 1, 0.3, 100.0, EnvelopeReading::EssSup).unwrap();
        assert!((e.value - 100f64.powf(0.25)).abs() < 1e-9);
        assert!(e.truncation_dominated);
        let m = WeightFunction::OrliczMatch { young: y.clone(), dim: 1 };
        let e = suffix_envelope(&m, &y, 1, 0.3, 100.0, EnvelopeReading::EssInf).unwrap();
        assert_eq!(e.value, 1.0);
        let dec = WeightFunction::PowerLaw(-1.0);
        let e = suffix_envelope(&dec, &y, 1, 0.3, 100.0, EnvelopeReading::EssInf).unwrap();
        assert!((e.value - 0.1).abs() < 1e-12);
        assert!(e.truncation_dominated);
    }

    fn zygmund(phi1: &WeightFunction, phi2: &WeightFunction, y: &YoungFunction, with_log: bool) -> Bound {
        let p = ZygmundProblem { phi1, phi2, young: y, dim: 1, with_log, reading: EnvelopeReading::EssInf };
        zygmund_constant(&p, &log_grid(1e-3, 1.0, 13), 1e5).unwrap()
    }

    #[test]
    fn zygmund_closed_forms() {
        let y = power(2.0);
        let w = WeightFunction::MorreyClassical { lambda: 0.5, p: 2.0, dim: 1 };
        let c = zygmund(&w, &w, &y, false).finite().unwrap();
        assert!((c - 4.0).abs() < 0.02 * 4.0, "{c}");
        let m = WeightFunction::OrliczMatch { young: y.clone(), dim: 1 };
        let c = zygmund(&m, &m, &y, false).finite().unwrap();
        assert!((c - 2.0).abs() < 0.02 * 2.0, "{c}");
        let one = WeightFunction::PowerLaw(0.0);
        assert!(zygmund(&one, &one, &y, false).is_divergent());
        let with_log = zygmund(&w, &w, &y, true).finite().unwrap();
        assert!(with_log >= c);
        let sup =
            ZygmundProblem { phi1: &w, phi2: &w, young: &y, dim: 1, with_log: false, reading: EnvelopeReading::EssSup };
        assert!(!matches!(zygmund_constant(&sup, &[1e-3, 1e-2], 1e5).unwrap(), Bound::Finite(_)));
    }

    fn closed_form_hardy() -> HardyConfig {
        HardyConfig::new(
            WeightFunction::PowerLaw(-1.0),
            WeightFunction::PowerLaw(1.0),
            WeightFunction::PowerLaw(-3.0),
            1e-2,
            10.0,
            16,
            1e4,
        )
        .unwrap()
    }

    #[test]
    fn hardy_apply_closed_forms() {
        let grid = log_grid(1.0, 1e6, 6 * POINTS_PER_DECADE + 1);
        let ones = vec![1.0; grid.len()];
        let v = hardy_apply(&ones, &grid, &WeightFunction::PowerLaw(-2.0), 0).unwrap();
        assert!((v - 1.0).abs() < 1e-4, "{v}");
        let zero = vec![0.0; grid.len()];
        assert_eq!(hardy_apply(&zero, &grid, &WeightFunction::PowerLaw(-2.0), 0).unwrap(), 0.0);
        let grid = log_grid(2.0, 2e6, 6 * POINTS_PER_DECADE + 1);
        let lin = grid.clone();
        let v = hardy_apply(&lin, &grid, &WeightFunction::PowerLaw(-3.0), 0).unwrap();
        assert!((v - 0.5).abs() < 1e-4, "{v}");
        let mut bad = ones.clone();
        bad[3] = 0.5;
        assert!(hardy_apply(&bad, &log_grid(1.0, 1e6, bad.len()), &WeightFunction::PowerLaw(-2.0), 0).is_err());
    }

    #[test]
    fn hardy_best_constant_closed_form() {
        let b = hardy_best_constant(&closed_form_hardy()).unwrap().finite().unwrap();
        assert!((b - 1.0).abs() < 0.02, "{b}");
        let mut zero = closed_form_hardy();
        zero.v2 = WeightFunction::Constant(0.0);
        assert_eq!(hardy_best_constant(&zero).unwrap().finite(), Some(0.0));
        let mut flat = closed_form_hardy();
        flat.w = WeightFunction::PowerLaw(0.0);
        assert!(hardy_best_constant(&flat).unwrap().is_divergent());
    }

    #[test]
    fn hardy_verify_reports_sharpness() {
        let cfg = closed_form_hardy();
        let grid = cfg.integration_grid();
        let corpus = vec![
            vec![1.0; grid.len()],
            vec![0.0; grid.len()],
            grid.iter().map(|t| t.sqrt()).collect(),
            grid.iter().map(|t| t.min(1.0)).collect(),
        ];
        let rep = hardy_verify(&cfg, &corpus).unwrap();
        assert!(rep.violations.is_empty());
        assert_eq!(rep.ratios[1], None);
        let r0 = rep.ratios[0].unwrap();
        assert!((r0 - 0.5).abs() < 0.01, "{r0}");
        assert!(rep.witness_ratio >= 0.95 && rep.witness_ratio <= 1.0 + HARDY_TOL);
    }
}
