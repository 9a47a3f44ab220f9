//! Sampled fields on uniform grids and the balls they are measured over.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// A point of R^n, n <= 2. One-dimensional points ignore the second slot.
pub type Point = [f64; 2];

/// Volume of the unit ball: `v_1 = 2`, `v_2 = π`.
pub fn unit_ball_volume(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => std::f64::consts::PI,
        _ => panic!("only dimensions 1 and 2 are supported"),
    }
}

pub(crate) fn dist(dim: usize, a: Point, b: Point) -> f64 {
    if dim == 1 {
        (a[0] - b[0]).abs()
    } else {
        (a[0] - b[0]).hypot(a[1] - b[1])
    }
}

/// The ball `B(center, radius)` (open).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Argument(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Ball { center, radius })
    }

    /// `B(x, r)` on the real line.
    pub fn interval(x: f64, radius: f64) -> Result<Self> {
        Ball::new([x, 0.0], radius)
    }

    /// Continuum measure `v_n r^n`.
    pub fn volume(&self, dim: usize) -> f64 {
        unit_ball_volume(dim) * self.radius.powi(dim as i32)
    }

    pub fn dilate(&self, factor: f64) -> Ball {
        Ball { center: self.center, radius: self.radius * factor }
    }
}

/// Real values on the cells of a uniform grid over a box.
///
/// Cell `(i, j)` covers `origin + h [i, i+1) x [j, j+1)`; its value is the
/// sample at the cell center and the field is piecewise constant. Outside
/// the box the field is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    dim: usize,
    origin: Point,
    h: f64,
    extents: [usize; 2],
    values: Vec<f64>,
    label: String,
}

impl SampledField {
    pub fn new(
        dim: usize,
        origin: Point,
        h: f64,
        extents: [usize; 2],
        values: Vec<f64>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::Argument(format!("dimension must be 1 or 2, got {dim}")));
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::Argument(format!("grid spacing must be positive, got {h}")));
        }
        let extents = if dim == 1 { [extents[0], 1] } else { extents };
        if extents[0] == 0 || extents[1] == 0 {
            return Err(Error::Argument("grid box must be nonempty".into()));
        }
        if values.len() != extents[0] * extents[1] {
            return Err(Error::Argument(format!("expected {} values, got {}", extents[0] * extents[1], values.len())));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Argument(format!("field values must be finite, found {v}")));
        }
        let origin = if dim == 1 { [origin[0], 0.0] } else { origin };
        Ok(SampledField { dim, origin, h, extents, values, label: label.into() })
    }

    /// Samples `f` at the cell centers.
    pub fn from_fn(
        dim: usize,
        origin: Point,
        h: f64,
        extents: [usize; 2],
        label: impl Into<String>,
        f: impl Fn(Point) -> f64,
    ) -> Result<Self> {
        let shape = SampledField::zeros(dim, origin, h, extents)?;
        let values = (0..shape.len()).map(|k| f(shape.cell_center(k))).collect();
        SampledField::new(dim, origin, h, extents, values, label)
    }

    pub fn zeros(dim: usize, origin: Point, h: f64, extents: [usize; 2]) -> Result<Self> {
        let n = if dim == 1 { extents[0] } else { extents[0] * extents[1] };
        SampledField::new(dim, origin, h, extents, vec![0.0; n], "zero")
    }

    /// A field on the same grid with new values.
    pub fn with_values(&self, values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        SampledField::new(self.dim, self.origin, self.h, self.extents, values, label)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn extents(&self) -> [usize; 2] {
        self.extents
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn set_label(&mut self, label: impl Into<String>) {
        self.label = label.into();
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    /// Lower and upper corners of the box.
    pub fn bounds(&self) -> (Point, Point) {
        let hi = [self.origin[0] + self.h * self.extents[0] as f64, self.origin[1] + self.h * self.extents[1] as f64];
        (self.origin, hi)
    }

    /// Longest side of the box.
    pub fn box_side(&self) -> f64 {
        let (lo, hi) = self.bounds();
        if self.dim == 1 {
            hi[0] - lo[0]
        } else {
            (hi[0] - lo[0]).max(hi[1] - lo[1])
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        let (lo, hi) = self.bounds();
        let inside = |k: usize| p[k] >= lo[k] && p[k] < hi[k];
        inside(0) && (self.dim == 1 || inside(1))
    }

    pub fn cell_center(&self, k: usize) -> Point {
        let (i, j) = (k % self.extents[0], k / self.extents[0]);
        let x = self.origin[0] + (i as f64 + 0.5) * self.h;
        if self.dim == 1 {
            [x, 0.0]
        } else {
            [x, self.origin[1] + (j as f64 + 0.5) * self.h]
        }
    }

    /// Linear index of the cell containing `p`, if inside the box.
    pub fn cell_of(&self, p: Point) -> Option<usize> {
        let i = ((p[0] - self.origin[0]) / self.h).floor();
        if !(i >= 0.0 && i < self.extents[0] as f64) {
            return None;
        }
        if self.dim == 1 {
            return Some(i as usize);
        }
        let j = ((p[1] - self.origin[1]) / self.h).floor();
        if !(j >= 0.0 && j < self.extents[1] as f64) {
            return None;
        }
        Some(j as usize * self.extents[0] + i as usize)
    }

    /// Piecewise-constant evaluation; zero outside the box.
    pub fn eval(&self, p: Point) -> f64 {
        self.cell_of(p).map_or(0.0, |k| self.values[k])
    }

    /// Indices of the cells whose centers lie in `ball`.
    pub fn cells_in(&self, ball: &Ball) -> Vec<usize> {
        let r = ball.radius;
        let range = |axis: usize| {
            let c = (ball.center[axis] - self.origin[axis]) / self.h - 0.5;
            let lo = ((c - r / self.h).floor().max(0.0)) as usize;
            let hi = ((c + r / self.h).ceil() + 1.0).clamp(0.0, self.extents[axis] as f64) as usize;
            lo..hi
        };
        let mut out = Vec::new();
        let jrange = if self.dim == 1 { 0..1 } else { range(1) };
        let irange = range(0);
        for j in jrange {
            for i in irange.clone() {
                let k = j * self.extents[0] + i;
                if dist(self.dim, self.cell_center(k), ball.center) < r {
                    out.push(k);
                }
            }
        }
        out
    }

    /// Discrete measure of `ball`: number of cells inside times the cell volume.
    pub fn ball_measure(&self, ball: &Ball) -> f64 {
        self.cells_in(ball).len() as f64 * self.cell_volume()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> SampledField {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v = f(*v));
        out
    }

    pub fn scaled(&self, c: f64) -> SampledField {
        let mut out = self.map(|v| c * v);
        out.label = format!("{}*{}", c, self.label);
        out
    }

    fn check_same_grid(&self, other: &SampledField) -> Result<()> {
        if self.dim != other.dim || self.origin != other.origin || self.h != other.h || self.extents != other.extents {
            return Err(Error::Argument("fields live on different grids".into()));
        }
        Ok(())
    }

    pub fn zip_with(&self, other: &SampledField, f: impl Fn(f64, f64) -> f64) -> Result<SampledField> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect();
        self.with_values(values, format!("({})o({})", self.label, other.label))
    }

    /// Zeroes every cell whose center is outside `ball`.
    pub fn restricted(&self, ball: &Ball) -> SampledField {
        let mut out = self.map(|_| 0.0);
        for k in self.cells_in(ball) {
            out.values[k] = self.values[k];
        }
        out
    }

    /// Zeroes every cell whose center is inside `ball`.
    pub fn excluding(&self, ball: &Ball) -> SampledField {
        let mut out = self.clone();
        for k in self.cells_in(ball) {
            out.values[k] = 0.0;
        }
        out
    }

    /// CSV serialization: a header followed by one row of values per grid
    /// row. Floats use the shortest round-trip representation.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        s.push_str("# isqlab sampled field\n");
        let _ = writeln!(s, "dim,{}", self.dim);
        let _ = writeln!(s, "origin,{:?},{:?}", self.origin[0], self.origin[1]);
        let _ = writeln!(s, "h,{:?}", self.h);
        let _ = writeln!(s, "extents,{},{}", self.extents[0], self.extents[1]);
        let _ = writeln!(s, "label,{}", self.label.replace('\n', " "));
        for row in self.values.chunks(self.extents[0]) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            s.push_str(&line.join(","));
            s.push('\n');
        }
        s
    }

    pub fn from_csv_str(text: &str, source: &Path) -> Result<Self> {
        let bad = |d: String| Error::parse(source, d);
        let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
        let mut header = |key: &str| -> Result<Vec<String>> {
            let line = lines.next().ok_or_else(|| bad(format!("missing `{key}` line")))?;
            let (k, rest) = line.split_once(',').ok_or_else(|| bad(format!("malformed `{key}` line")))?;
            if k.trim() != key {
                return Err(bad(format!("expected `{key}`, found `{k}`")));
            }
            Ok(if key == "label" {
                vec![rest.to_string()]
            } else {
                rest.split(',').map(|x| x.trim().to_string()).collect()
            })
        };
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("bad number `{s}`")));
        let int = |s: &str| s.parse::<usize>().map_err(|_| bad(format!("bad integer `{s}`")));
        let dim = int(&header("dim")?[0])?;
        let o = header("origin")?;
        let origin = [num(&o[0])?, num(o.get(1).map_or("0", String::as_str))?];
        let h = num(&header("h")?[0])?;
        let e = header("extents")?;
        let extents = [int(&e[0])?, int(e.get(1).map_or("1", String::as_str))?];
        let label = header("label")?.remove(0);
        let mut values = Vec::new();
        for line in lines {
            for tok in line.split(',') {
                values.push(num(tok.trim())?);
            }
        }
        SampledField::new(dim, origin, h, extents, values, label).map_err(|e| bad(e.to_string()))
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        SampledField::from_csv_str(&text, path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn line(n: usize, h: f64) -> SampledField {
        SampledField::from_fn(1, [-(n as f64) * h / 2.0, 0.0], h, [n, 1], "x", |p| p[0]).unwrap()
    }

    #[test]
    fn rejects_bad_fields() {
        assert!(SampledField::new(3, [0.0; 2], 1.0, [1, 1], vec![0.0], "").is_err());
        assert!(SampledField::new(1, [0.0; 2], 0.0, [1, 1], vec![0.0], "").is_err());
        assert!(SampledField::new(1, [0.0; 2], 1.0, [2, 1], vec![0.0, f64::NAN], "").is_err());
        assert!(SampledField::new(1, [0.0; 2], 1.0, [0, 1], vec![], "").is_err());
        assert!(Ball::new([0.0; 2], 0.0).is_err());
    }

    #[test]
    fn evaluation_is_zero_outside_box() {
        let f = line(8, 0.25);
        assert_eq!(f.eval([5.0, 0.0]), 0.0);
        assert_eq!(f.eval([-1.01, 0.0]), 0.0);
        assert_eq!(f.eval([0.1, 0.0]), 0.125);
    }

    #[test]
    fn ball_cells_and_measure() {
        let f = line(64, 1.0 / 16.0);
        let b = Ball::interval(0.0, 0.5).unwrap();
        assert_eq!(f.cells_in(&b).len(), 16);
        assert_eq!(f.ball_measure(&b), 1.0);
        assert_eq!(b.volume(1), 1.0);
        let disk = Ball::new([0.0, 0.0], 1.0).unwrap();
        assert!((disk.volume(2) - std::f64::consts::PI).abs() < 1e-15);
        let g = SampledField::zeros(2, [-2.0, -2.0], 0.05, [80, 80]).unwrap();
        let m = g.ball_measure(&disk);
        assert!((m - std::f64::consts::PI).abs() / std::f64::consts::PI < 0.02);
    }

    #[test]
    fn csv_roundtrip_2d() {
        let f = SampledField::from_fn(2, [-1.0, 0.5], 0.1, [7, 3], "bump, 2d", |p| {
            (p[0] * 3.1).sin() / (1.0 + p[1] * p[1])
        })
        .unwrap();
        let back = SampledField::from_csv_str(&f.to_csv(), Path::new("mem")).unwrap();
        assert_eq!(f, back);
    }

    proptest! {
        #[test]
        fn csv_roundtrip_is_bit_exact(vals in prop::collection::vec(-1e300f64..1e300, 1..40), h in 1e-6f64..10.0) {
            let n = vals.len();
            let f = SampledField::new(1, [-0.3, 0.0], h, [n, 1], vals, "p").unwrap();
            let back = SampledField::from_csv_str(&f.to_csv(), Path::new("mem")).unwrap();
            prop_assert_eq!(f.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                            back.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>());
            prop_assert_eq!(f, back);
        }
    }
}
