//! Intrinsic square functions by truncated quadrature.
//!
//! `A_α f(t, y)` is the value of the kernel-class linear program with
//! coefficients `f(y - t z_i) w_i` over the unit-ball nodes `z_i`. The cone
//! and half-space integrals use log-spaced `t` nodes (trapezoid in `ln t`)
//! and, at each `t`, the lattice `y ∈ s t Z^n` anchored at the origin. Since
//! the lattice does not depend on the evaluation point, the cone of aperture
//! `β1 ≤ β2` uses a subset of the nodes of `β2`, and amplitudes are shared
//! between evaluation points through an [`AmplitudeTable`].

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{dist, Point, SampledField};
use crate::lp::KernelClass;

/// Default `y`-lattice spacing as a fraction of `t`.
pub const DEFAULT_LATTICE_STEP: f64 = 0.25;

/// Truncated `(y, t)` quadrature over cones and the upper half-space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeQuadrature {
    pub t_min: f64,
    pub t_max: f64,
    pub nodes_per_decade: usize,
    /// Nodes of the unit-ball discretization in the inner linear program.
    pub m: usize,
    /// Lattice spacing in `y` divided by `t`.
    #[serde(default = "default_step")]
    pub lattice_step: f64,
    /// Spatial truncation `|x - y| ≤ R_max` of the half-space integral.
    pub r_max: f64,
}

fn default_step() -> f64 {
    DEFAULT_LATTICE_STEP
}

/// One `t` node with its trapezoid weight for `dt/t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TNode {
    pub t: f64,
    pub weight: f64,
}

impl ConeQuadrature {
    pub fn new(t_min: f64, t_max: f64, nodes_per_decade: usize, m: usize, r_max: f64) -> Result<Self> {
        let q = ConeQuadrature { t_min, t_max, nodes_per_decade, m, lattice_step: DEFAULT_LATTICE_STEP, r_max };
        q.check()?;
        Ok(q)
    }

    /// `t ∈ [2h, L/2]` and `R_max = L/2` for a field with spacing `h` and
    /// box side `L`.
    pub fn for_field(f: &SampledField, nodes_per_decade: usize, m: usize) -> Result<Self> {
        let l = f.box_side();
        ConeQuadrature::new(2.0 * f.spacing(), l / 2.0, nodes_per_decade, m, l / 2.0)
    }

    fn check(&self) -> Result<()> {
        if !(self.t_min > 0.0 && self.t_max >= self.t_min && self.t_max.is_finite()) {
            return Err(Error::Argument(format!("bad t range [{}, {}]", self.t_min, self.t_max)));
        }
        if self.nodes_per_decade == 0 || self.m == 0 {
            return Err(Error::Argument("quadrature needs nodes".into()));
        }
        if !(self.lattice_step > 0.0 && self.lattice_step <= 1.0) {
            return Err(Error::Argument(format!("lattice step must lie in (0, 1], got {}", self.lattice_step)));
        }
        if !(self.r_max > 0.0) {
            return Err(Error::Argument("R_max must be positive".into()));
        }
        Ok(())
    }

    /// Checks that the kernel is resolvable on `f`'s grid.
    pub fn validate_for(&self, f: &SampledField) -> Result<()> {
        self.check()?;
        if self.t_min < f.spacing() * (1.0 - 1e-12) {
            return Err(Error::Precondition(format!(
                "t_min = {} is below the grid spacing {}",
                self.t_min,
                f.spacing()
            )));
        }
        Ok(())
    }

    pub fn t_nodes(&self) -> Vec<TNode> {
        if self.t_max == self.t_min {
            return vec![TNode { t: self.t_min, weight: 1.0 }];
        }
        let decades = (self.t_max / self.t_min).log10();
        let n = ((decades * self.nodes_per_decade as f64).ceil() as usize).max(1) + 1;
        let du = (self.t_max / self.t_min).ln() / (n - 1) as f64;
        crate::young::log_grid(self.t_min, self.t_max, n)
            .into_iter()
            .enumerate()
            .map(|(k, t)| TNode { t, weight: if k == 0 || k == n - 1 { 0.5 * du } else { du } })
            .collect()
    }

    /// The same quadrature with twice the `t` density.
    pub fn refined(&self) -> Self {
        ConeQuadrature { nodes_per_decade: 2 * self.nodes_per_decade, ..self.clone() }
    }
}

/// Which square function to aggregate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SquareKind {
    /// `G_{α,β}`: the cone of aperture `β`.
    Lusin { beta: f64 },
    /// `g_α`: the vertical line `y = x`.
    Vertical,
    /// `g*_{λ,α}`: the half-space with weight `(t/(t + |x - y|))^{nλ}`.
    GStar { lambda: f64 },
}

type Key = (u32, [i64; 2]);

/// Cached amplitudes `A_α f(t_k, y)` at lattice nodes.
#[derive(Debug, Clone, Default)]
pub struct AmplitudeTable {
    values: HashMap<Key, f64>,
}

impl AmplitudeTable {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// What the kernel is paired with: `f`, or `(b(x) - b) f` for a commutator
/// with outer point value `b(x)`.
#[derive(Debug, Clone, Copy)]
enum Integrand<'a> {
    Plain(&'a SampledField),
    Commutator { f: &'a SampledField, b: &'a SampledField, bx: f64 },
}

impl Integrand<'_> {
    fn at(&self, z: Point) -> f64 {
        match *self {
            Integrand::Plain(f) => f.eval(z),
            Integrand::Commutator { f, b, bx } => {
                let fz = f.eval(z);
                if fz == 0.0 {
                    0.0
                } else {
                    (bx - b.eval(z)) * fz
                }
            }
        }
    }
}

/// Near and far parts of `(g*_{λ,α} f(x))²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GStarParts {
    pub value: f64,
    /// Contribution of `|x - y| < t`.
    pub near: f64,
    /// Contribution of `|x - y| ≥ t`.
    pub far: f64,
    /// Far contributions of the annuli `2^{j-1} t ≤ |x - y| < 2^j t`,
    /// `j = 1, 2, 3`.
    pub annuli: [f64; 3],
    /// Far contribution beyond `8t`.
    pub tail: f64,
}

/// Square functions of one field at fixed `α` and quadrature.
#[derive(Debug, Clone)]
pub struct SquareFunctions<'a> {
    f: &'a SampledField,
    alpha: f64,
    quad: ConeQuadrature,
    class: KernelClass,
    nodes: Vec<TNode>,
}

impl<'a> SquareFunctions<'a> {
    pub fn new(f: &'a SampledField, alpha: f64, quad: &ConeQuadrature) -> Result<Self> {
        quad.validate_for(f)?;
        let class = KernelClass::unit_ball(f.dim(), alpha, quad.m)?;
        Ok(SquareFunctions { f, alpha, quad: quad.clone(), class, nodes: quad.t_nodes() })
    }

    pub fn field(&self) -> &SampledField {
        self.f
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn quadrature(&self) -> &ConeQuadrature {
        &self.quad
    }

    pub fn kernel_class(&self) -> &KernelClass {
        &self.class
    }

    fn amplitude_of(&self, src: Integrand<'_>, y: Point, t: f64) -> Result<f64> {
        let c: Vec<f64> = self
            .class
            .points()
            .iter()
            .zip(self.class.weights())
            .map(|(z, w)| src.at([y[0] - t * z[0], y[1] - t * z[1]]) * w)
            .collect();
        Ok(self.class.solve(&c)?.value)
    }

    /// `A_α f(t, y)`.
    pub fn amplitude(&self, y: Point, t: f64) -> Result<f64> {
        self.amplitude_of(Integrand::Plain(self.f), y, t)
    }

    fn step(&self, k: usize) -> f64 {
        self.quad.lattice_step * self.nodes[k].t
    }

    fn lattice_point(&self, k: usize, j: [i64; 2]) -> Point {
        let s = self.step(k);
        let y1 = if self.f.dim() == 2 { j[1] as f64 * s } else { 0.0 };
        [j[0] as f64 * s, y1]
    }

    /// Lattice indices at level `k` within `radius` of `x` (strictly inside
    /// when `strict`).
    fn lattice_around(&self, k: usize, x: Point, radius: f64, strict: bool) -> Vec<[i64; 2]> {
        let s = self.step(k);
        let dim = self.f.dim();
        let range = |c: f64| ((c - radius) / s).ceil() as i64..=((c + radius) / s).floor() as i64;
        let inside = |d: f64| if strict { d < radius } else { d <= radius };
        let mut out = Vec::new();
        let js: Vec<i64> = if dim == 2 { range(x[1]).collect() } else { vec![0] };
        for j1 in js {
            for j0 in range(x[0]) {
                let y = self.lattice_point(k, [j0, j1]);
                if inside(dist(dim, x, y)) {
                    out.push([j0, j1]);
                }
            }
        }
        out
    }

    /// Furthest reach of the integration region of `kind` at level `k`.
    fn reach(&self, kind: SquareKind, k: usize) -> (f64, bool) {
        match kind {
            SquareKind::Lusin { beta } => (beta * self.nodes[k].t, true),
            SquareKind::GStar { .. } => (self.quad.r_max, false),
            SquareKind::Vertical => (0.0, false),
        }
    }

    /// Computes every amplitude that `kind` needs at the points `xs`.
    pub fn table_for(&self, kind: SquareKind, xs: &[Point]) -> Result<AmplitudeTable> {
        let mut keys: Vec<Key> = Vec::new();
        for k in 0..self.nodes.len() {
            let (r, strict) = self.reach(kind, k);
            for x in xs {
                keys.extend(self.lattice_around(k, *x, r, strict).into_iter().map(|j| (k as u32, j)));
            }
        }
        keys.sort_unstable();
        keys.dedup();
        let vals = keys
            .par_iter()
            .map(|&(k, j)| self.amplitude(self.lattice_point(k as usize, j), self.nodes[k as usize].t))
            .collect::<Result<Vec<f64>>>()?;
        Ok(AmplitudeTable { values: keys.into_iter().zip(vals).collect() })
    }

    fn lookup(&self, table: &AmplitudeTable, k: usize, j: [i64; 2]) -> Result<f64> {
        match table.values.get(&(k as u32, j)) {
            Some(v) => Ok(*v),
            None => self.amplitude(self.lattice_point(k, j), self.nodes[k].t),
        }
    }

    fn cone_sum(&self, x: Point, beta: f64, amp: &dyn Fn(usize, [i64; 2]) -> Result<f64>) -> Result<f64> {
        let sn = self.quad.lattice_step.powi(self.f.dim() as i32);
        let mut total = 0.0;
        for (k, node) in self.nodes.iter().enumerate() {
            let mut level = 0.0;
            for j in self.lattice_around(k, x, beta * node.t, true) {
                let a = amp(k, j)?;
                level += a * a;
            }
            total += node.weight * sn * level;
        }
        Ok(total)
    }

    fn gstar_parts(&self, x: Point, lambda: f64, amp: &dyn Fn(usize, [i64; 2]) -> Result<f64>) -> Result<GStarParts> {
        let dim = self.f.dim();
        let sn = self.quad.lattice_step.powi(dim as i32);
        let nl = dim as f64 * lambda;
        let mut near = 0.0;
        let mut annuli = [0.0; 3];
        let mut tail = 0.0;
        for (k, node) in self.nodes.iter().enumerate() {
            let t = node.t;
            for j in self.lattice_around(k, x, self.quad.r_max, false) {
                let d = dist(dim, x, self.lattice_point(k, j));
                let a = amp(k, j)?;
                let term = node.weight * sn * (t / (t + d)).powf(nl) * a * a;
                if d < t {
                    near += term;
                } else if d < 2.0 * t {
                    annuli[0] += term;
                } else if d < 4.0 * t {
                    annuli[1] += term;
                } else if d < 8.0 * t {
                    annuli[2] += term;
                } else {
                    tail += term;
                }
            }
        }
        let far = annuli.iter().sum::<f64>() + tail;
        Ok(GStarParts { value: (near + far).sqrt(), near, far, annuli, tail })
    }

    fn vertical_sum(&self, src: Integrand<'_>, x: Point) -> Result<f64> {
        let mut total = 0.0;
        for node in &self.nodes {
            let a = self.amplitude_of(src, x, node.t)?;
            total += node.weight * a * a;
        }
        Ok(total)
    }

    /// `G_{α,β} f(x)`.
    pub fn lusin(&self, x: Point, beta: f64) -> Result<f64> {
        let table = self.table_for(SquareKind::Lusin { beta }, &[x])?;
        self.lusin_with(&table, x, beta)
    }

    /// `G_{α,β} f(x)` reading amplitudes from `table` where available.
    pub fn lusin_with(&self, table: &AmplitudeTable, x: Point, beta: f64) -> Result<f64> {
        check_beta(beta)?;
        Ok(self.cone_sum(x, beta, &|k, j| self.lookup(table, k, j))?.sqrt())
    }

    /// `g_α f(x)`.
    pub fn vertical(&self, x: Point) -> Result<f64> {
        Ok(self.vertical_sum(Integrand::Plain(self.f), x)?.sqrt())
    }

    /// `g*_{λ,α} f(x)` with its near/far decomposition.
    pub fn gstar(&self, x: Point, lambda: f64) -> Result<GStarParts> {
        let table = self.table_for(SquareKind::GStar { lambda }, &[x])?;
        self.gstar_with(&table, x, lambda)
    }

    pub fn gstar_with(&self, table: &AmplitudeTable, x: Point, lambda: f64) -> Result<GStarParts> {
        check_lambda(lambda)?;
        self.gstar_parts(x, lambda, &|k, j| self.lookup(table, k, j))
    }

    /// Values of `kind` at every point, sharing amplitudes across points.
    pub fn evaluate_many(&self, kind: SquareKind, xs: &[Point]) -> Result<Vec<f64>> {
        match kind {
            SquareKind::Vertical => xs.par_iter().map(|&x| self.vertical(x)).collect(),
            SquareKind::Lusin { beta } => {
                let table = self.table_for(kind, xs)?;
                xs.iter().map(|&x| self.lusin_with(&table, x, beta)).collect()
            }
            SquareKind::GStar { lambda } => {
                let table = self.table_for(kind, xs)?;
                xs.iter().map(|&x| Ok(self.gstar_with(&table, x, lambda)?.value)).collect()
            }
        }
    }

    /// Commutator `[b, T] f(x)` for the square function `T` of `kind`: the
    /// amplitudes use coefficients `(b(x) - b(z)) f(z)`.
    pub fn commutator(&self, b: &SampledField, kind: SquareKind, x: Point) -> Result<f64> {
        self.commutator_with_outer(b, kind, x, b.eval(x))
    }

    /// The commutator skeleton at `x` with `b(x)` replaced by `outer`.
    pub fn commutator_with_outer(&self, b: &SampledField, kind: SquareKind, x: Point, outer: f64) -> Result<f64> {
        let src = Integrand::Commutator { f: self.f, b, bx: outer };
        match kind {
            SquareKind::Vertical => Ok(self.vertical_sum(src, x)?.sqrt()),
            SquareKind::Lusin { beta } => {
                check_beta(beta)?;
                let amps = self.local_amplitudes(src, kind, x)?;
                Ok(self.cone_sum(x, beta, &|k, j| Ok(amps[&(k as u32, j)]))?.sqrt())
            }
            SquareKind::GStar { lambda } => {
                check_lambda(lambda)?;
                let amps = self.local_amplitudes(src, kind, x)?;
                Ok(self.gstar_parts(x, lambda, &|k, j| Ok(amps[&(k as u32, j)]))?.value)
            }
        }
    }

    /// Commutator values at many points, parallel over points.
    pub fn commutator_many(&self, b: &SampledField, kind: SquareKind, xs: &[Point]) -> Result<Vec<f64>> {
        xs.par_iter().map(|&x| self.commutator(b, kind, x)).collect()
    }

    fn local_amplitudes(&self, src: Integrand<'_>, kind: SquareKind, x: Point) -> Result<HashMap<Key, f64>> {
        let mut map = HashMap::new();
        for k in 0..self.nodes.len() {
            let (r, strict) = self.reach(kind, k);
            for j in self.lattice_around(k, x, r, strict) {
                let a = self.amplitude_of(src, self.lattice_point(k, j), self.nodes[k].t)?;
                map.insert((k as u32, j), a);
            }
        }
        Ok(map)
    }

    /// `G_{α,β} f(x)` for each `β`, its ratio to `β = 1` and the aperture
    /// bound `β^{3n/2+α}`.
    pub fn aperture_report(&self, x: Point, betas: &[f64]) -> Result<Vec<ApertureRow>> {
        if !betas.contains(&1.0) {
            return Err(Error::Argument("the aperture list must contain 1".into()));
        }
        let widest = betas.iter().copied().fold(0.0, f64::max);
        let table = self.table_for(SquareKind::Lusin { beta: widest }, &[x])?;
        let base = self.lusin_with(&table, x, 1.0)?;
        let n = self.f.dim() as f64;
        betas
            .iter()
            .map(|&beta| {
                let value = self.lusin_with(&table, x, beta)?;
                let ratio = if base > 0.0 {
                    value / base
                } else if value == 0.0 {
                    1.0
                } else {
                    f64::INFINITY
                };
                let bound = beta.powf(1.5 * n + self.alpha);
                Ok(ApertureRow { beta, value, ratio, bound, within_bound: ratio <= bound * (1.0 + APERTURE_SLACK) })
            })
            .collect()
    }
}

/// Slack allowed on the aperture bound before a row is flagged.
pub const APERTURE_SLACK: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApertureRow {
    pub beta: f64,
    pub value: f64,
    pub ratio: f64,
    pub bound: f64,
    pub within_bound: bool,
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::Argument(format!("aperture must be positive, got {beta}")))
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 1.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::Argument(format!("λ must exceed 1, got {lambda}")))
    }
}

/// `A_α f(t, y)` on an `m`-node discretization of the unit ball.
pub fn a_alpha(f: &SampledField, y: Point, t: f64, alpha: f64, m: usize) -> Result<f64> {
    if t < f.spacing() * (1.0 - 1e-12) {
        return Err(Error::Precondition(format!("t = {t} is below the grid spacing {}", f.spacing())));
    }
    let class = KernelClass::unit_ball(f.dim(), alpha, m)?;
    let c: Vec<f64> = class
        .points()
        .iter()
        .zip(class.weights())
        .map(|(z, w)| f.eval([y[0] - t * z[0], y[1] - t * z[1]]) * w)
        .collect();
    Ok(class.solve(&c)?.value)
}

/// `G_{α,β} f(x)`.
pub fn lusin(f: &SampledField, x: Point, alpha: f64, beta: f64, quad: &ConeQuadrature) -> Result<f64> {
    SquareFunctions::new(f, alpha, quad)?.lusin(x, beta)
}

/// `g_α f(x)`, the vertical function at `y = x`.
pub fn vertical(f: &SampledField, x: Point, alpha: f64, quad: &ConeQuadrature) -> Result<f64> {
    SquareFunctions::new(f, alpha, quad)?.vertical(x)
}

/// `g*_{λ,α} f(x)` with its near/far decomposition.
pub fn gstar(f: &SampledField, x: Point, alpha: f64, lambda: f64, quad: &ConeQuadrature) -> Result<GStarParts> {
    SquareFunctions::new(f, alpha, quad)?.gstar(x, lambda)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sign_field() -> SampledField {
        SampledField::from_fn(1, [-4.0, 0.0], 1.0 / 32.0, [256, 1], "sign", |p| {
            if p[0].abs() < 2.0 {
                p[0].signum()
            } else {
                0.0
            }
        })
        .unwrap()
    }

    fn quad() -> ConeQuadrature {
        ConeQuadrature::new(1.0 / 16.0, 1.0, 4, 24, 2.0).unwrap()
    }

    #[test]
    fn t_nodes_integrate_dt_over_t() {
        let q = ConeQuadrature::new(0.01, 10.0, 8, 10, 1.0).unwrap();
        let total: f64 = q.t_nodes().iter().map(|n| n.weight).sum();
        assert!((total - 1000f64.ln()).abs() < 1e-12);
        assert_eq!(q.t_nodes().len(), 25);
        assert_eq!(q.refined().t_nodes().len(), 49);
    }

    #[test]
    fn amplitude_bounded_by_local_l1() {
        let f = sign_field();
        for &(y, t) in &[(0.0, 0.5), (0.3, 0.25), (-1.0, 1.0)] {
            let a = a_alpha(&f, [y, 0.0], t, 1.0, 40).unwrap();
            let ball = crate::field::Ball::interval(y, t).unwrap();
            assert!(a >= 0.0 && a <= crate::orlicz::l1_norm(&f, &ball) / t + 1e-12);
        }
        assert!(a_alpha(&f, [0.0, 0.0], 0.01, 1.0, 40).is_err());
    }

    #[test]
    fn constants_are_annihilated() {
        let one = SampledField::from_fn(1, [-4.0, 0.0], 1.0 / 32.0, [256, 1], "one", |_| 1.0).unwrap();
        let sq = SquareFunctions::new(&one, 0.5, &quad()).unwrap();
        assert!(sq.lusin([0.0, 0.0], 1.0).unwrap() <= 1e-10);
        assert!(sq.vertical([0.1, 0.0]).unwrap() <= 1e-10);
        assert!(sq.gstar([0.0, 0.0], 4.0).unwrap().value <= 1e-10);
    }

    #[test]
    fn homogeneity() {
        let f = sign_field();
        let q = quad();
        let sq = SquareFunctions::new(&f, 1.0, &q).unwrap();
        let g = sq.lusin([0.1, 0.0], 1.0).unwrap();
        assert!(g > 0.0);
        for c in [-2.0, 3.7] {
            let fc = f.scaled(c);
            let sc = SquareFunctions::new(&fc, 1.0, &q).unwrap();
            let gc = sc.lusin([0.1, 0.0], 1.0).unwrap();
            assert!((gc - c.abs() * g).abs() <= 1e-12 * gc, "{gc} vs {}", c.abs() * g);
        }
    }

    #[test]
    fn nesting_and_aperture_report() {
        let f = sign_field();
        let sq = SquareFunctions::new(&f, 1.0, &quad()).unwrap();
        let rows = sq.aperture_report([0.2, 0.0], &[1.0, 2.0, 4.0]).unwrap();
        assert_eq!(rows[0].ratio, 1.0);
        assert!(rows.windows(2).all(|w| w[0].value <= w[1].value));
        assert!(sq.aperture_report([0.2, 0.0], &[2.0]).is_err());
        let only = sq.aperture_report([0.2, 0.0], &[1.0]).unwrap();
        assert_eq!(only.len(), 1);
        assert_eq!(only[0].ratio, 1.0);
    }

    #[test]
    fn gstar_near_part_is_bounded_by_the_cone() {
        let f = sign_field();
        let sq = SquareFunctions::new(&f, 1.0, &quad()).unwrap();
        let x = [0.15, 0.0];
        let parts = sq.gstar(x, 4.0).unwrap();
        let g = sq.lusin(x, 1.0).unwrap();
        assert!(parts.near <= g * g);
        assert!(parts.far > 0.0);
        let total = parts.near + parts.far;
        assert!((parts.value * parts.value - total).abs() <= 1e-12 * total);
    }

    #[test]
    fn many_points_share_amplitudes() {
        let f = sign_field();
        let sq = SquareFunctions::new(&f, 0.5, &quad()).unwrap();
        let xs = [[0.0, 0.0], [0.05, 0.0], [0.5, 0.0]];
        let many = sq.evaluate_many(SquareKind::Lusin { beta: 1.0 }, &xs).unwrap();
        for (x, v) in xs.iter().zip(&many) {
            assert_eq!(*v, sq.lusin(*x, 1.0).unwrap());
        }
    }

    #[test]
    fn commutator_with_constant_symbol_vanishes() {
        let f = sign_field();
        let b = SampledField::from_fn(1, [-4.0, 0.0], 1.0 / 32.0, [256, 1], "b", |_| 2.5).unwrap();
        let sq = SquareFunctions::new(&f, 1.0, &quad()).unwrap();
        for kind in [SquareKind::Lusin { beta: 1.0 }, SquareKind::Vertical, SquareKind::GStar { lambda: 4.0 }] {
            assert_eq!(sq.commutator(&b, kind, [0.1, 0.0]).unwrap(), 0.0);
        }
    }

    #[test]
    fn two_dimensional_smoke() {
        let f = SampledField::from_fn(2, [-1.0, -1.0], 1.0 / 16.0, [32, 32], "bump", |p| {
            (1.0 - 2.0 * p[0].hypot(p[1])).max(0.0) * p[0].signum()
        })
        .unwrap();
        let q = ConeQuadrature::new(0.125, 0.25, 2, 30, 0.5).unwrap();
        let sq = SquareFunctions::new(&f, 1.0, &q).unwrap();
        let g = sq.lusin([0.1, 0.0], 1.0).unwrap();
        assert!(g > 0.0 && g.is_finite());
    }
}
