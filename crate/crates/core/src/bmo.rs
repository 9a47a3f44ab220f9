//! Mean oscillation of symbols and the commutator square functions.

use std::fmt;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{dist, Ball, Point, SampledField};
use crate::intrinsic::{ConeQuadrature, SquareFunctions, SquareKind};
use crate::lp::KernelClass;
use crate::morrey::ProbeSet;
use crate::orlicz::luxemburg_of;
use crate::young::YoungFunction;

/// Smallest number of cells a ball must cover before its average is trusted.
pub const MIN_CELLS: usize = 4;
/// Tail counts below this many cells are left out of the John–Nirenberg fit.
pub const JN_MIN_COUNT: usize = 10;

/// Catalog of BMO symbols.
#[derive(Debug, Clone)]
pub enum Symbol {
    Const(f64),
    /// `log|x|`.
    Log,
    /// `a x_1 + b`.
    Affine {
        a: f64,
        b: f64,
    },
    /// A sampled field, resampled by point evaluation.
    Table {
        path: String,
        field: SampledField,
    },
}

impl Symbol {
    /// Resolves `const:c`, `log`, `affine:a:b` or `table:<path>`.
    pub fn from_id(id: &str) -> Result<Self> {
        let id = id.trim();
        let num = |s: &str| s.parse::<f64>().map_err(|_| Error::Config(format!("bad number in symbol id `{id}`")));
        if id == "log" {
            return Ok(Symbol::Log);
        }
        if let Some(c) = id.strip_prefix("const:") {
            return Ok(Symbol::Const(num(c)?));
        }
        if let Some(rest) = id.strip_prefix("affine:") {
            let (a, b) =
                rest.split_once(':').ok_or_else(|| Error::Config(format!("expected affine:a:b, got `{id}`")))?;
            return Ok(Symbol::Affine { a: num(a)?, b: num(b)? });
        }
        if let Some(path) = id.strip_prefix("table:") {
            return Ok(Symbol::Table { path: path.into(), field: SampledField::read_csv(Path::new(path))? });
        }
        Err(Error::Config(format!("unknown symbol id `{id}`")))
    }

    pub fn id(&self) -> String {
        match self {
            Symbol::Const(c) => format!("const:{c}"),
            Symbol::Log => "log".into(),
            Symbol::Affine { a, b } => format!("affine:{a}:{b}"),
            Symbol::Table { path, .. } => format!("table:{path}"),
        }
    }

    /// Samples the symbol on the grid of `like`. A cell center at the
    /// singularity of `log|x|` takes the one-dimensional cell mean
    /// `log(h/2) - 1`.
    pub fn sample_like(&self, like: &SampledField) -> SampledField {
        let h = like.spacing();
        let values = (0..like.len())
            .map(|k| {
                let p = like.cell_center(k);
                match self {
                    Symbol::Const(c) => *c,
                    Symbol::Log => {
                        let r = dist(like.dim(), p, [0.0, 0.0]);
                        if r < 1e-12 * h {
                            (h / 2.0).ln() - 1.0
                        } else {
                            r.ln()
                        }
                    }
                    Symbol::Affine { a, b } => a * p[0] + b,
                    Symbol::Table { field, .. } => field.eval(p),
                }
            })
            .collect();
        like.with_values(values, self.id()).expect("same grid")
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

fn ball_values(b: &SampledField, ball: &Ball) -> Result<Vec<f64>> {
    let cells = b.cells_in(ball);
    if cells.len() < MIN_CELLS {
        return Err(Error::Precondition(format!(
            "ball {ball:?} covers {} cells, need at least {MIN_CELLS}",
            cells.len()
        )));
    }
    Ok(cells.into_iter().map(|k| b.values()[k]).collect())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// `b_B`: the mean of `b` over the cells of `B`.
pub fn ball_average(b: &SampledField, ball: &Ball) -> Result<f64> {
    Ok(mean(&ball_values(b, ball)?))
}

/// `|B|^{-1} ∫_B |b - b_B|` and `(|B|^{-1} ∫_B |b - b_B|²)^{1/2}` on one ball.
fn oscillations(b: &SampledField, ball: &Ball) -> Result<(f64, f64)> {
    let v = ball_values(b, ball)?;
    let avg = mean(&v);
    let l1 = v.iter().map(|x| (x - avg).abs()).sum::<f64>() / v.len() as f64;
    let l2 = (v.iter().map(|x| (x - avg) * (x - avg)).sum::<f64>() / v.len() as f64).sqrt();
    Ok((l1, l2))
}

/// `‖b‖_*` over the probe set.
pub fn bmo_norm(b: &SampledField, probes: &ProbeSet) -> Result<f64> {
    let osc = probes.balls().par_iter().map(|ball| oscillations(b, ball).map(|o| o.0)).collect::<Result<Vec<_>>>()?;
    Ok(osc.into_iter().fold(0.0, f64::max))
}

/// `max |b_{B(x,r)} - b_{B(x,t)}| / ln(t/r)` over concentric probe pairs with
/// `t > 2r`, not yet divided by `‖b‖_*`.
pub fn drift_ratio(b: &SampledField, probes: &ProbeSet) -> Result<f64> {
    let mut best: f64 = 0.0;
    for c in &probes.centers {
        let avgs = probes
            .radii
            .iter()
            .map(|&r| ball_average(b, &Ball { center: *c, radius: r }))
            .collect::<Result<Vec<_>>>()?;
        for (i, &r) in probes.radii.iter().enumerate() {
            for (j, &t) in probes.radii.iter().enumerate() {
                if t > 2.0 * r {
                    best = best.max((avgs[i] - avgs[j]).abs() / (t / r).ln());
                }
            }
        }
    }
    Ok(best)
}

/// Smallest `C` with `|b_{B(x,r)} - b_{B(x,t)}| ≤ C ‖b‖_* ln(t/r)` over the
/// probed pairs.
pub fn log_drift_constant(b: &SampledField, probes: &ProbeSet) -> Result<f64> {
    let norm = bmo_norm(b, probes)?;
    if norm == 0.0 {
        return Err(Error::Precondition("the symbol has zero mean oscillation".into()));
    }
    Ok(drift_ratio(b, probes)? / norm)
}

/// Mean-oscillation summary of a symbol.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BmoReport {
    pub norm: f64,
    /// `None` when the norm vanishes.
    pub log_drift_c: Option<f64>,
    pub drift_ratio: f64,
    /// `|{x ∈ B : |b - b_B| > β}| / |B| ≤ C1 exp(-C2 β / ‖b‖_*)`.
    pub jn_c1: f64,
    pub jn_c2: f64,
    /// Root-mean-square residual of the log-linear fit.
    pub jn_residual: f64,
    pub jn_points: usize,
    /// Largest L² mean oscillation divided by the norm.
    pub p_norm_equiv: f64,
}

pub fn bmo_report(b: &SampledField, probes: &ProbeSet) -> Result<BmoReport> {
    let balls = probes.balls();
    let osc = balls.par_iter().map(|ball| oscillations(b, ball)).collect::<Result<Vec<_>>>()?;
    let norm = osc.iter().map(|o| o.0).fold(0.0, f64::max);
    let l2 = osc.iter().map(|o| o.1).fold(0.0, f64::max);
    let drift = drift_ratio(b, probes)?;
    if norm == 0.0 {
        return Ok(BmoReport {
            norm,
            log_drift_c: None,
            drift_ratio: drift,
            jn_c1: 0.0,
            jn_c2: 0.0,
            jn_residual: 0.0,
            jn_points: 0,
            p_norm_equiv: 0.0,
        });
    }
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for ball in &balls {
        let v = ball_values(b, ball)?;
        let avg = mean(&v);
        let mut dev: Vec<f64> = v.iter().map(|x| (x - avg).abs()).collect();
        dev.sort_by(f64::total_cmp);
        for k in 1.. {
            let beta = 0.25 * k as f64 * norm;
            let count = dev.len() - dev.partition_point(|&d| d <= beta);
            if count < JN_MIN_COUNT {
                break;
            }
            pts.push((beta / norm, (count as f64 / dev.len() as f64).ln()));
        }
    }
    let (c1, c2, residual) = fit_exponential_tail(&pts);
    Ok(BmoReport {
        norm,
        log_drift_c: Some(drift / norm),
        drift_ratio: drift,
        jn_c1: c1,
        jn_c2: c2,
        jn_residual: residual,
        jn_points: pts.len(),
        p_norm_equiv: l2 / norm,
    })
}

/// Least-squares slope of `ln F` against `β/‖b‖_*`, with the intercept then
/// raised until the fitted curve dominates every point.
fn fit_exponential_tail(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    if pts.len() < 2 {
        return (1.0, 0.0, 0.0);
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let c2 = (-slope).max(0.0);
    let intercept = my + c2 * mx;
    let residual = (pts.iter().map(|p| (p.1 - (intercept - c2 * p.0)).powi(2)).sum::<f64>() / n).sqrt();
    let lift = pts.iter().map(|p| p.1 + c2 * p.0).fold(f64::NEG_INFINITY, f64::max);
    (lift.exp(), c2, residual)
}

/// Orlicz mean oscillation under both normalizations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrliczBmo {
    /// `max Φ^{-1}(|B|^{-1}) ‖b - b_B‖_{L^Φ(B)}` with the discrete `|B|`.
    pub lhs: f64,
    /// The same with `Φ^{-1}(r^{-n})`.
    pub lhs_radius: f64,
    pub ratio: f64,
    pub ratio_radius: f64,
}

pub fn bmo_orlicz_equiv(b: &SampledField, phi: &YoungFunction, probes: &ProbeSet) -> Result<OrliczBmo> {
    if !(phi.lower_type() > 1.0 && phi.upper_type().is_finite()) {
        return Err(Error::Precondition(format!(
            "{phi} needs lower type above 1 and finite upper type, has ({}, {})",
            phi.lower_type(),
            phi.upper_type()
        )));
    }
    let norm = bmo_norm(b, probes)?;
    let n = b.dim() as i32;
    let cell = b.cell_volume();
    let rows = probes
        .balls()
        .par_iter()
        .map(|ball| {
            let v = ball_values(b, ball)?;
            let avg = mean(&v);
            let dev: Vec<f64> = v.iter().map(|x| (x - avg).abs()).collect();
            let lux = luxemburg_of(&dev, cell, phi);
            let measure = v.len() as f64 * cell;
            Ok((phi.inverse(1.0 / measure) * lux, phi.inverse(ball.radius.powi(-n)) * lux))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let lhs = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let lhs_radius = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let div = |x: f64| if norm > 0.0 { x / norm } else { 0.0 };
    Ok(OrliczBmo { lhs, lhs_radius, ratio: div(lhs), ratio_radius: div(lhs_radius) })
}

/// `A_{α,b} f(t, y)` with outer point `x`.
#[allow(clippy::too_many_arguments)]
pub fn a_alpha_b(f: &SampledField, b: &SampledField, x: Point, y: Point, t: f64, alpha: f64, m: usize) -> Result<f64> {
    if t < f.spacing() * (1.0 - 1e-12) {
        return Err(Error::Precondition(format!("t = {t} is below the grid spacing {}", f.spacing())));
    }
    let class = KernelClass::unit_ball(f.dim(), alpha, m)?;
    let bx = b.eval(x);
    let c: Vec<f64> = class
        .points()
        .iter()
        .zip(class.weights())
        .map(|(z, w)| {
            let p = [y[0] - t * z[0], y[1] - t * z[1]];
            let fz = f.eval(p);
            if fz == 0.0 {
                0.0
            } else {
                (bx - b.eval(p)) * fz * w
            }
        })
        .collect();
    Ok(class.solve(&c)?.value)
}

/// `[b, T] f(x)` for the square function `T` named by `kind`.
pub fn commutator_sqfn(
    kind: SquareKind,
    f: &SampledField,
    b: &SampledField,
    x: Point,
    alpha: f64,
    quad: &ConeQuadrature,
) -> Result<f64> {
    SquareFunctions::new(f, alpha, quad)?.commutator(b, kind, x)
}

/// The two halves of the commutator split about a ball average.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CommutatorSplit {
    pub total: f64,
    /// `|b(x) - b_B| G_α f(x)`.
    pub a_part: f64,
    /// The cone integral of the amplitudes with coefficients `(b_B - b(z)) f(z)`.
    pub b_part: f64,
    /// `total ≤ (a_part + b_part)(1 + 5%)`.
    pub holds: bool,
}

/// Splits `[b, G_α] f(x)` as `|b(x) - b_B| G_α f(x)` plus the commutator with
/// `b(x)` replaced by `b_B`.
pub fn commutator_split(sq: &SquareFunctions<'_>, b: &SampledField, x: Point, ball: &Ball) -> Result<CommutatorSplit> {
    let kind = SquareKind::Lusin { beta: 1.0 };
    let bb = ball_average(b, ball)?;
    let total = sq.commutator(b, kind, x)?;
    let a_part = (b.eval(x) - bb).abs() * sq.lusin(x, 1.0)?;
    let b_part = sq.commutator_with_outer(b, kind, x, bb)?;
    Ok(CommutatorSplit { total, a_part, b_part, holds: total <= (a_part + b_part) * 1.05 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(h: f64) -> SampledField {
        let n = (8.0 / h).round() as usize;
        SampledField::zeros(1, [-4.0, 0.0], h, [n, 1]).unwrap()
    }

    fn log_symbol(h: f64) -> SampledField {
        Symbol::Log.sample_like(&grid(h))
    }

    #[test]
    fn symbol_catalog() {
        let g = grid(0.25);
        assert_eq!(Symbol::from_id("const:5").unwrap().sample_like(&g).values()[3], 5.0);
        let a = Symbol::from_id("affine:2:1").unwrap().sample_like(&g);
        assert_eq!(a.values()[0], 2.0 * -3.875 + 1.0);
        assert!(Symbol::from_id("log").unwrap().sample_like(&g).values().iter().all(|v| v.is_finite()));
        assert!(Symbol::from_id("sin").is_err());
        let centered = SampledField::zeros(1, [-4.125, 0.0], 0.25, [33, 1]).unwrap();
        let l = Symbol::Log.sample_like(&centered);
        assert_eq!(l.values()[16], (0.125f64).ln() - 1.0);
    }

    #[test]
    fn averages() {
        let g = grid(1.0 / 64.0);
        let five = Symbol::Const(5.0).sample_like(&g);
        let ball = Ball::interval(0.0, 1.0).unwrap();
        assert_eq!(ball_average(&five, &ball).unwrap(), 5.0);
        let h = 1.0 / 1024.0;
        let b = log_symbol(h);
        for r in [0.25, 0.5, 1.0] {
            let avg = ball_average(&b, &Ball::interval(0.0, r).unwrap()).unwrap();
            // the midpoint rule misses (1 - ln 2) h per side at the singularity
            assert!((avg - (r.ln() - 1.0)).abs() < 0.5 * h / r, "{avg}");
        }
        let aff = Symbol::Affine { a: 1.0, b: 0.0 }.sample_like(&g);
        let sum = aff.zip_with(&five, |x, y| 3.0 * x + y).unwrap();
        let lhs = ball_average(&sum, &ball).unwrap();
        let rhs = 3.0 * ball_average(&aff, &ball).unwrap() + 5.0;
        assert!((lhs - rhs).abs() < 1e-12);
        assert!(ball_average(&five, &Ball::interval(0.0, 0.02).unwrap()).is_err());
    }

    #[test]
    fn norm_properties() {
        let b = log_symbol(1.0 / 256.0);
        let probes = ProbeSet::new(vec![[0.0, 0.0], [0.3, 0.0]], 1.0 / 64.0, 2.0, 12).unwrap();
        let n = bmo_norm(&b, &probes).unwrap();
        assert!(n > 0.5 && n < 1.0, "{n}");
        let shifted = bmo_norm(&b.map(|v| v + 7.0), &probes).unwrap();
        assert!((shifted - n).abs() <= 1e-12 * n);
        let scaled = bmo_norm(&b.scaled(-3.0), &probes).unwrap();
        assert!((scaled - 3.0 * n).abs() <= 1e-12 * n);
        assert_eq!(bmo_norm(&Symbol::Const(2.0).sample_like(&b), &probes).unwrap(), 0.0);
        let bounded = Symbol::Affine { a: 1.0, b: 0.0 }.sample_like(&b);
        assert!(bmo_norm(&bounded, &probes).unwrap() <= 2.0 * bounded.max_abs());
    }

    #[test]
    fn log_drift_is_exact_for_the_log_symbol() {
        let b = log_symbol(1.0 / 1024.0);
        let probes = ProbeSet::new(vec![[0.0, 0.0]], 1.0 / 128.0, 2.0, 9).unwrap();
        let d = drift_ratio(&b, &probes).unwrap();
        assert!((d - 1.0).abs() < 0.02, "{d}");
        let rep = bmo_report(&b, &probes).unwrap();
        assert!((rep.log_drift_c.unwrap() - d / rep.norm).abs() < 1e-15);
        assert!(rep.jn_c1 > 0.0 && rep.jn_c2 > 0.0 && rep.jn_points > 2);
        assert!(rep.p_norm_equiv >= 1.0 && rep.p_norm_equiv <= 4.0);
        let c = Symbol::Const(1.0).sample_like(&b);
        assert!(log_drift_constant(&c, &probes).is_err());
    }

    #[test]
    fn orlicz_oscillation_matches_lp_mean_oscillation() {
        let b = log_symbol(1.0 / 256.0);
        let probes = ProbeSet::new(vec![[0.0, 0.0], [0.5, 0.0]], 1.0 / 32.0, 1.0, 6).unwrap();
        let p = 2.0;
        let eq = bmo_orlicz_equiv(&b, &YoungFunction::power(p).unwrap(), &probes).unwrap();
        let direct = probes
            .balls()
            .iter()
            .map(|ball| {
                let cells = b.cells_in(ball);
                let v: Vec<f64> = cells.iter().map(|&k| b.values()[k]).collect();
                let avg = v.iter().sum::<f64>() / v.len() as f64;
                (v.iter().map(|x| (x - avg).abs().powf(p)).sum::<f64>() / v.len() as f64).powf(1.0 / p)
            })
            .fold(0.0, f64::max);
        assert!((eq.lhs - direct).abs() < 1e-8 * direct, "{} vs {direct}", eq.lhs);
        assert!(eq.ratio >= 1.0 && eq.ratio < 4.0);
        assert!((eq.lhs_radius / eq.lhs - 2f64.sqrt()).abs() < 0.05);
        assert!(bmo_orlicz_equiv(&b, &YoungFunction::exp(), &probes).is_err());
        let c = Symbol::Const(3.0).sample_like(&b);
        assert_eq!(bmo_orlicz_equiv(&c, &YoungFunction::power(2.0).unwrap(), &probes).unwrap().lhs, 0.0);
    }

    #[test]
    fn commutator_amplitude_ignores_constant_shifts() {
        let h = 1.0 / 32.0;
        let f = SampledField::from_fn(1, [-4.0, 0.0], h, [256, 1], "f", |p| (3.0 * p[0]).sin()).unwrap();
        let b = Symbol::Log.sample_like(&f);
        let x = [0.3, 0.0];
        let v = a_alpha_b(&f, &b, x, [0.1, 0.0], 0.5, 1.0, 30).unwrap();
        let w = a_alpha_b(&f, &b.map(|v| v + 4.0), x, [0.1, 0.0], 0.5, 1.0, 30).unwrap();
        assert!(v > 0.0 && (v - w).abs() <= 1e-12 * v, "{v} {w}");
        let c = Symbol::Const(2.0).sample_like(&f);
        assert_eq!(a_alpha_b(&f, &c, x, [0.1, 0.0], 0.5, 1.0, 30).unwrap(), 0.0);
    }

    #[test]
    fn commutator_split_holds() {
        let h = 1.0 / 32.0;
        let f = SampledField::from_fn(1, [-4.0, 0.0], h, [256, 1], "f", |p| {
            if p[0].abs() > 0.5 && p[0].abs() < 2.0 {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        let b = Symbol::Log.sample_like(&f);
        let q = ConeQuadrature::new(1.0 / 16.0, 1.0, 4, 20, 2.0).unwrap();
        let sq = SquareFunctions::new(&f, 1.0, &q).unwrap();
        let ball = Ball::interval(0.0, 0.25).unwrap();
        let s = commutator_split(&sq, &b, [0.1, 0.0], &ball).unwrap();
        assert!(s.total > 0.0 && s.holds, "{s:?}");
        let v = commutator_sqfn(SquareKind::Vertical, &f, &b, [0.1, 0.0], 1.0, &q).unwrap();
        assert!(v.is_finite());
    }
}
