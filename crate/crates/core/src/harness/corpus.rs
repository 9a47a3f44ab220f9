//! Deterministic test-function corpora.
//!
//! Generator specs:
//!
//! | spec | field |
//! |---|---|
//! | `zero` | `0` |
//! | `const:c` | `c` on the whole box |
//! | `indicator:x0:r` (`indicator:x0:y0:r` in 2D) | `χ_{B(x0, r)}` |
//! | `bump:x0:γ:R` (`bump:x0:y0:γ:R`) | `|x - x0|^{-γ} χ_{B(x0, R)}` with `γ < n / p1` |
//! | `trig:k` | random trigonometric polynomial of degree `k`, windowed to the box |
//! | `step:a:b` | `χ_{a ≤ x_1 < b}` |
//! | `table:path` | a field CSV, resampled onto the grid |
//!
//! `trig` specs are the only random ones. Entry `i` draws from a ChaCha
//! stream keyed by `(seed, i)`; the doubled corpus of a refined run adds a
//! second draw per random spec.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{dist, Point, SampledField};
use crate::young::YoungFunction;

/// One parsed corpus entry.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldSpec {
    Zero,
    Const(f64),
    Indicator { center: Point, radius: f64 },
    Bump { center: Point, gamma: f64, radius: f64 },
    Trig { degree: usize },
    Step { from: f64, to: f64 },
    Table { path: String },
}

impl FieldSpec {
    pub fn parse(spec: &str, dim: usize) -> Result<Self> {
        let spec = spec.trim();
        let bad = || Error::Config(format!("malformed corpus spec `{spec}`"));
        let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
        let nums =
            || -> Result<Vec<f64>> { rest.split(':').map(|s| s.trim().parse::<f64>().map_err(|_| bad())).collect() };
        let center = |v: &[f64]| if dim == 2 { [v[0], v[1]] } else { [v[0], 0.0] };
        match name {
            "zero" if rest.is_empty() => Ok(FieldSpec::Zero),
            "const" => match nums()?[..] {
                [c] => Ok(FieldSpec::Const(c)),
                _ => Err(bad()),
            },
            "indicator" => {
                let v = nums()?;
                if v.len() != dim + 1 || !(v[dim] > 0.0) {
                    return Err(bad());
                }
                Ok(FieldSpec::Indicator { center: center(&v), radius: v[dim] })
            }
            "bump" => {
                let v = nums()?;
                if v.len() != dim + 2 || !(v[dim] > 0.0 && v[dim + 1] > 0.0) {
                    return Err(bad());
                }
                Ok(FieldSpec::Bump { center: center(&v), gamma: v[dim], radius: v[dim + 1] })
            }
            "trig" => {
                let k: usize = rest.trim().parse().map_err(|_| bad())?;
                if k == 0 {
                    return Err(bad());
                }
                Ok(FieldSpec::Trig { degree: k })
            }
            "step" => match nums()?[..] {
                [a, b] if a < b => Ok(FieldSpec::Step { from: a, to: b }),
                _ => Err(bad()),
            },
            "table" if !rest.is_empty() => Ok(FieldSpec::Table { path: rest.to_string() }),
            _ => Err(Error::Config(format!("unknown corpus generator `{spec}`"))),
        }
    }

    pub fn is_random(&self) -> bool {
        matches!(self, FieldSpec::Trig { .. })
    }
}

/// Stream seed of corpus entry `index`.
fn stream_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Samples `spec` on the grid of `template`. `draw` selects the random
/// stream of a `trig` spec.
pub fn sample(
    spec: &FieldSpec,
    template: &SampledField,
    young: &YoungFunction,
    label: &str,
    draw: u64,
) -> Result<SampledField> {
    let dim = template.dim();
    let n = dim as f64;
    let values: Vec<f64> = match spec {
        FieldSpec::Zero => vec![0.0; template.len()],
        FieldSpec::Const(c) => vec![*c; template.len()],
        FieldSpec::Indicator { center, radius } => {
            cells(template, |p| if dist(dim, p, *center) < *radius { 1.0 } else { 0.0 })
        }
        FieldSpec::Bump { center, gamma, radius } => {
            let p1 = young.upper_type();
            if !(*gamma < n / p1) {
                return Err(Error::Config(format!(
                    "bump exponent {gamma} must be below n / p1 = {} for a finite local norm",
                    n / p1
                )));
            }
            let floor = template.spacing() / 4.0;
            cells(template, |p| {
                let d = dist(dim, p, *center);
                if d < *radius {
                    d.max(floor).powf(-gamma)
                } else {
                    0.0
                }
            })
        }
        FieldSpec::Trig { degree } => trig(template, *degree, draw),
        FieldSpec::Step { from, to } => cells(template, |p| if *from <= p[0] && p[0] < *to { 1.0 } else { 0.0 }),
        FieldSpec::Table { path } => {
            let table = SampledField::read_csv(Path::new(path))?;
            if table.dim() != dim {
                return Err(Error::Config(format!("table `{path}` has dimension {}, expected {dim}", table.dim())));
            }
            cells(template, |p| table.eval(p))
        }
    };
    template.with_values(values, label)
}

fn cells(template: &SampledField, f: impl Fn(Point) -> f64) -> Vec<f64> {
    (0..template.len()).map(|k| f(template.cell_center(k))).collect()
}

/// `w(x) Σ a_j cos(2π j·(x - lo)/L + θ_j)` over wave vectors with
/// `|j|_∞ ≤ k`, amplitudes decaying like `1/(1 + |j|²)` and the window
/// `w = Π sin²(π (x_i - lo_i)/L)`.
fn trig(template: &SampledField, degree: usize, seed: u64) -> Vec<f64> {
    let dim = template.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = degree as i64;
    let mut modes = Vec::new();
    let second: Vec<i64> = if dim == 2 { (-k..=k).collect() } else { vec![0] };
    for j0 in 0..=k {
        for &j1 in &second {
            if j0 == 0 && j1 < 0 {
                continue;
            }
            let amp: f64 = rng.gen_range(-1.0..1.0) / (1.0 + (j0 * j0 + j1 * j1) as f64);
            let phase: f64 = rng.gen_range(0.0..2.0 * PI);
            modes.push(([j0 as f64, j1 as f64], amp, phase));
        }
    }
    let (lo, _) = template.bounds();
    let l = template.box_side();
    cells(template, |p| {
        let u = [(p[0] - lo[0]) / l, if dim == 2 { (p[1] - lo[1]) / l } else { 0.0 }];
        let window = (PI * u[0]).sin().powi(2) * if dim == 2 { (PI * u[1]).sin().powi(2) } else { 1.0 };
        let s: f64 = modes.iter().map(|(j, a, th)| a * (2.0 * PI * (j[0] * u[0] + j[1] * u[1]) + th).cos()).sum();
        window * s
    })
}

/// Samples every spec on `template`. With `doubled`, each random spec
/// contributes a second independent draw, appended after the base corpus.
pub fn build_corpus(
    specs: &[String],
    template: &SampledField,
    young: &YoungFunction,
    seed: u64,
    doubled: bool,
) -> Result<Vec<SampledField>> {
    let parsed = specs.iter().map(|s| FieldSpec::parse(s, template.dim())).collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(2 * parsed.len());
    for (i, spec) in parsed.iter().enumerate() {
        out.push(sample(spec, template, young, &specs[i], stream_seed(seed, i))?);
    }
    if doubled {
        for (i, spec) in parsed.iter().enumerate().filter(|(_, s)| s.is_random()) {
            let label = format!("{}#2", specs[i]);
            out.push(sample(spec, template, young, &label, stream_seed(seed, i + parsed.len()))?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> SampledField {
        SampledField::zeros(1, [-2.0, 0.0], 1.0 / 16.0, [64, 1]).unwrap()
    }

    fn corpus(specs: &[&str], seed: u64, doubled: bool) -> Result<Vec<SampledField>> {
        let specs: Vec<String> = specs.iter().map(|s| s.to_string()).collect();
        build_corpus(&specs, &grid(), &YoungFunction::power(2.0).unwrap(), seed, doubled)
    }

    #[test]
    fn indicator_and_zero() {
        let c = corpus(&["indicator:0:1", "zero"], 0, false).unwrap();
        let ones = c[0].values().iter().filter(|v| **v == 1.0).count();
        assert_eq!(ones, 32);
        assert!(c[0].values().iter().all(|v| *v == 0.0 || *v == 1.0));
        assert!(c[1].values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn seeded_draws_repeat_bitwise() {
        let a = corpus(&["trig:4", "trig:4"], 7, true).unwrap();
        let b = corpus(&["trig:4", "trig:4"], 7, true).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 4);
        assert_ne!(a[0].values(), a[1].values());
        let other = corpus(&["trig:4"], 8, false).unwrap();
        assert_ne!(a[0].values(), other[0].values());
        assert!(a[0].values()[0].abs() < 1e-2);
    }

    #[test]
    fn refined_trig_samples_the_same_function() {
        let young = YoungFunction::power(2.0).unwrap();
        let coarse = build_corpus(&["trig:3".into()], &grid(), &young, 1, false).unwrap();
        let fine_grid = SampledField::zeros(1, [-2.0, 0.0], 1.0 / 32.0, [128, 1]).unwrap();
        let fine = build_corpus(&["trig:3".into()], &fine_grid, &young, 1, false).unwrap();
        let p = coarse[0].cell_center(10);
        assert!((coarse[0].eval(p) - fine[0].eval(p)).abs() < 0.2);
    }

    #[test]
    fn bump_exponent_is_checked() {
        assert!(corpus(&["bump:0:0.4:1"], 0, false).is_ok());
        assert!(matches!(corpus(&["bump:0:0.5:1"], 0, false), Err(Error::Config(_))));
    }

    #[test]
    fn unknown_generators_are_config_errors() {
        for spec in ["gauss:1", "indicator:0", "step:1:0", "trig:0", "zero:1"] {
            assert!(matches!(corpus(&[spec], 0, false), Err(Error::Config(_))), "{spec}");
        }
    }
}
