//! Luxemburg norms of sampled fields over balls, and the Hölder-type
//! inequalities relating them to `L¹`.
//!
//! All integrals use the same cell-center rule: a cell contributes its full
//! volume when its center lies in the ball. The measure `|B|` appearing in
//! the defect ratios is the discrete measure of the ball, so that every
//! quantity in a ratio is integrated the same way.

use crate::error::{Error, Result};
use crate::field::{Ball, SampledField};
use crate::young::YoungFunction;

/// `∫_B Φ(|f|/λ)` by the cell-center rule; `+inf` when an integrand value
/// leaves the trusted domain of `Φ`.
pub fn modular(f: &SampledField, ball: &Ball, phi: &YoungFunction, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::Argument(format!("modular needs λ > 0, got {lambda}")));
    }
    let vals: Vec<f64> = f.cells_in(ball).into_iter().map(|k| f.values()[k].abs()).collect();
    Ok(modular_of(&vals, f.cell_volume(), phi, lambda))
}

fn modular_of(abs_vals: &[f64], cell: f64, phi: &YoungFunction, lambda: f64) -> f64 {
    let mut sum = 0.0;
    for &v in abs_vals {
        let term = phi.value(v / lambda);
        if term.is_infinite() {
            return f64::INFINITY;
        }
        sum += term;
    }
    sum * cell
}

/// `inf{λ > 0 : ∫_B Φ(|f|/λ) <= 1}`. The returned `λ` always satisfies the
/// modular bound.
pub fn luxemburg_norm(f: &SampledField, ball: &Ball, phi: &YoungFunction) -> f64 {
    let vals: Vec<f64> = f.cells_in(ball).into_iter().map(|k| f.values()[k].abs()).collect();
    luxemburg_of(&vals, f.cell_volume(), phi)
}

/// Luxemburg norm of the whole field (every cell of the box).
pub fn luxemburg_norm_total(f: &SampledField, phi: &YoungFunction) -> f64 {
    let vals: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();
    luxemburg_of(&vals, f.cell_volume(), phi)
}

pub(crate) fn luxemburg_of(abs_vals: &[f64], cell: f64, phi: &YoungFunction) -> f64 {
    let sup = abs_vals.iter().fold(0.0f64, |m, &v| m.max(v));
    if sup == 0.0 {
        return 0.0;
    }
    let measure = abs_vals.len() as f64 * cell;
    let fits = |lambda: f64| modular_of(abs_vals, cell, phi, lambda) <= 1.0;

    let mut lo = sup / phi.inverse(1e6 / measure);
    let mut hi = sup * measure / phi.inverse(1.0) + 1.0;
    if !(lo > 0.0 && lo.is_finite()) {
        lo = sup * 1e-12;
    }
    while fits(lo) {
        lo /= 2.0;
    }
    while !fits(hi) {
        hi *= 2.0;
    }
    // bisection on the bit patterns of positive floats
    let (mut a, mut b) = (lo.to_bits(), hi.to_bits());
    while b - a > 1 {
        let mid = a + (b - a) / 2;
        if fits(f64::from_bits(mid)) {
            b = mid;
        } else {
            a = mid;
        }
    }
    f64::from_bits(b)
}

/// `‖χ_B‖_{L^Φ} = 1 / Φ⁻¹(|B|⁻¹)` with the continuum measure of `B`.
pub fn characteristic_norm(ball: &Ball, dim: usize, phi: &YoungFunction) -> f64 {
    1.0 / phi.inverse(1.0 / ball.volume(dim))
}

/// `∫_B |f|` by the cell-center rule.
pub fn l1_norm(f: &SampledField, ball: &Ball) -> f64 {
    f.cells_in(ball).into_iter().map(|k| f.values()[k].abs()).sum::<f64>() * f.cell_volume()
}

/// `‖fg‖_{L¹(B)} / (2 ‖f‖_{L^Φ(B)} ‖g‖_{L^Φ̃(B)})`, at most one by the
/// Orlicz-Hölder inequality. Computes `Φ̃` numerically.
pub fn holder_defect(f: &SampledField, g: &SampledField, ball: &Ball, phi: &YoungFunction) -> Result<f64> {
    let conj = phi.conjugate()?;
    holder_defect_with(f, g, ball, phi, &conj)
}

pub fn holder_defect_with(
    f: &SampledField,
    g: &SampledField,
    ball: &Ball,
    phi: &YoungFunction,
    conj: &YoungFunction,
) -> Result<f64> {
    let fg = f.zip_with(g, |a, b| a * b)?;
    let nf = luxemburg_norm(f, ball, phi);
    let ng = luxemburg_norm(g, ball, conj);
    if nf == 0.0 || ng == 0.0 {
        return Err(Error::Precondition("holder_defect needs f and g nonzero on B".into()));
    }
    if !nf.is_finite() {
        return Err(Error::DivergentNorm { factor: "f" });
    }
    if !ng.is_finite() {
        return Err(Error::DivergentNorm { factor: "g" });
    }
    Ok(l1_norm(&fg, ball) / (2.0 * nf * ng))
}

/// `‖f‖_{L¹(B)} / (2 |B| Φ⁻¹(|B|⁻¹) ‖f‖_{L^Φ(B)})`, at most one.
pub fn l1_embedding_defect(f: &SampledField, ball: &Ball, phi: &YoungFunction) -> Result<f64> {
    let norm = luxemburg_norm(f, ball, phi);
    if norm == 0.0 {
        return Err(Error::Precondition("l1_embedding_defect needs f nonzero on B".into()));
    }
    let measure = f.ball_measure(ball);
    Ok(l1_norm(f, ball) / (2.0 * measure * phi.inverse(1.0 / measure) * norm))
}
