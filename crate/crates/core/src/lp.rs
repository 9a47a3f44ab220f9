//! The kernel-class supremum as a linear program.
//!
//! On a node set `z_1..z_m` of the closed unit ball we maximize `Σ c_i φ_i`
//! over
//!
//! * `φ_i - φ_j <= |z_i - z_j|^α` for every ordered pair,
//! * `|φ_i| <= (1 - |z_i|)^α` (distance to the complement of the ball),
//! * `Σ w_i φ_i = 0`.
//!
//! The solver works on the dual, `min d·u` subject to `M u = c, u >= 0`,
//! whose columns are `e_i - e_j` (pairs), `±e_i` (boundary) and `±w` (mean).
//! The boundary columns give a feasible starting basis for every `c`, so no
//! phase one is needed; the simplex multipliers at optimality are the
//! primal witness. Pivoting is revised simplex with an explicit basis
//! inverse, Dantzig pricing, and Bland's rule once a run of degenerate
//! pivots appears.

use crate::error::{Error, Result};
use crate::field::{dist, Point};

/// Default cap on the number of nodes.
pub const MAX_NODES: usize = 200;
/// Witness feasibility guaranteed by the solver.
pub const FEASIBILITY_TOL: f64 = 1e-9;

const PRICE_TOL: f64 = 1e-11;
const PIVOT_TOL: f64 = 1e-9;
const DEGENERATE_RUN: usize = 30;
const REFACTOR_EVERY: usize = 64;

/// Node set and constraint data of the discretized kernel class `C_α`.
#[derive(Debug, Clone)]
pub struct KernelClass {
    dim: usize,
    alpha: f64,
    points: Vec<Point>,
    weights: Vec<f64>,
    bounds: Vec<f64>,
    pairs: Vec<(u32, u32, f64)>,
}

impl KernelClass {
    /// Builds the class on explicit nodes with quadrature weights.
    pub fn new(dim: usize, alpha: f64, points: Vec<Point>, weights: Vec<f64>) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Argument(format!("Hölder exponent must lie in (0, 1], got {alpha}")));
        }
        if points.is_empty() || points.len() != weights.len() {
            return Err(Error::Argument("need one weight per node".into()));
        }
        if points.len() > MAX_NODES {
            return Err(Error::Precondition(format!("{} nodes exceed the cap of {MAX_NODES}", points.len())));
        }
        let origin = [0.0, 0.0];
        let mut bounds = Vec::with_capacity(points.len());
        for p in &points {
            let r = dist(dim, *p, origin);
            if r > 1.0 {
                return Err(Error::Argument(format!("node {p:?} lies outside the unit ball")));
            }
            bounds.push((1.0 - r).powf(alpha));
        }
        let m = points.len();
        let mut pairs = Vec::new();
        for i in 0..m {
            for j in 0..m {
                if i == j {
                    continue;
                }
                let d = dist(dim, points[i], points[j]).powf(alpha);
                // implied by the two boundary constraints otherwise
                if d < bounds[i] + bounds[j] {
                    pairs.push((i as u32, j as u32, d));
                }
            }
        }
        Ok(KernelClass { dim, alpha, points, weights, bounds, pairs })
    }

    /// Midpoint nodes of the unit ball: `m` equal cells of `[-1, 1]` in one
    /// dimension, a square grid of about `m` cells clipped to the disk in two.
    pub fn unit_ball(dim: usize, alpha: f64, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Argument("need at least one node".into()));
        }
        let (points, weights) = match dim {
            1 => {
                let w = 2.0 / m as f64;
                let pts = (0..m).map(|i| [-1.0 + (i as f64 + 0.5) * w, 0.0]).collect();
                (pts, vec![w; m])
            }
            2 => {
                let s = (std::f64::consts::PI / m as f64).sqrt();
                let k = (1.0 / s).ceil() as i64 + 1;
                let mut pts = Vec::new();
                for j in -k..k {
                    for i in -k..k {
                        let p = [(i as f64 + 0.5) * s, (j as f64 + 0.5) * s];
                        if p[0].hypot(p[1]) < 1.0 {
                            pts.push(p);
                        }
                    }
                }
                let n = pts.len();
                (pts, vec![s * s; n])
            }
            _ => return Err(Error::Argument(format!("dimension must be 1 or 2, got {dim}"))),
        };
        KernelClass::new(dim, alpha, points, weights)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `(1 - |z_i|)^α`.
    pub fn bounds(&self) -> &[f64] {
        &self.bounds
    }

    /// `|z_i - z_j|^α`.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        dist(self.dim, self.points[i], self.points[j]).powf(self.alpha)
    }

    /// Largest violation of any constraint by `phi` (zero when feasible).
    pub fn max_violation(&self, phi: &[f64]) -> f64 {
        let m = self.len();
        let mut worst: f64 = 0.0;
        for i in 0..m {
            worst = worst.max(phi[i].abs() - self.bounds[i]);
            for j in 0..m {
                if i != j {
                    worst = worst.max(phi[i] - phi[j] - self.distance(i, j));
                }
            }
        }
        let mean: f64 = phi.iter().zip(&self.weights).map(|(p, w)| p * w).sum();
        worst.max(mean.abs())
    }

    /// Solves the LP for objective `c`.
    pub fn solve(&self, c: &[f64]) -> Result<LpSolution> {
        if c.len() != self.len() {
            return Err(Error::Argument(format!("expected {} coefficients, got {}", self.len(), c.len())));
        }
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("objective coefficients must be finite".into()));
        }
        if c.iter().all(|&v| v == 0.0) {
            return Ok(LpSolution { value: 0.0, witness: vec![0.0; self.len()], pivots: 0 });
        }
        // the class is symmetric under φ -> -φ
        let first = c.iter().find(|&&v| v != 0.0).copied().unwrap_or(0.0);
        if first < 0.0 {
            let flipped: Vec<f64> = c.iter().map(|v| -v).collect();
            let mut sol = DualSimplex::new(self, &flipped).run()?;
            sol.witness.iter_mut().for_each(|v| *v = -*v);
            return Ok(sol);
        }
        DualSimplex::new(self, c).run()
    }
}

/// Optimal value and maximizing kernel values at the nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub value: f64,
    pub witness: Vec<f64>,
    pub pivots: usize,
}

/// One instance of the kernel-class supremum: a node set plus objective.
#[derive(Debug, Clone)]
pub struct LipschitzDualProblem<'a> {
    pub class: &'a KernelClass,
    pub coefficients: Vec<f64>,
}

/// Maximum of `Σ c_i φ_i` over the class, with the maximizing `φ`.
pub fn lipschitz_dual_value(prob: &LipschitzDualProblem<'_>) -> Result<(f64, Vec<f64>)> {
    let sol = prob.class.solve(&prob.coefficients)?;
    Ok((sol.value, sol.witness))
}

// Column encoding: [0, P) pairs, [P, P+m) +e_i, [P+m, P+2m) -e_i, P+2m is +w,
// P+2m+1 is -w.
struct DualSimplex<'a> {
    class: &'a KernelClass,
    c: &'a [f64],
    m: usize,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    y: Vec<f64>,
    scale: f64,
}

impl<'a> DualSimplex<'a> {
    fn new(class: &'a KernelClass, c: &'a [f64]) -> Self {
        let m = class.len();
        let p = class.pairs.len();
        let ncols = p + 2 * m + 2;
        let mut basis = Vec::with_capacity(m);
        let mut in_basis = vec![false; ncols];
        let mut binv = vec![0.0; m * m];
        let mut xb = vec![0.0; m];
        for i in 0..m {
            let col = if c[i] >= 0.0 { p + i } else { p + m + i };
            basis.push(col);
            in_basis[col] = true;
            binv[i * m + i] = if c[i] >= 0.0 { 1.0 } else { -1.0 };
            xb[i] = c[i].abs();
        }
        let scale = c.iter().fold(0.0f64, |s, v| s.max(v.abs()));
        DualSimplex { class, c, m, basis, in_basis, binv, xb, y: vec![0.0; m], scale }
    }

    fn ncols(&self) -> usize {
        self.class.pairs.len() + 2 * self.m + 2
    }

    fn cost(&self, col: usize) -> f64 {
        let p = self.class.pairs.len();
        if col < p {
            self.class.pairs[col].2
        } else if col < p + 2 * self.m {
            self.class.bounds[(col - p) % self.m]
        } else {
            0.0
        }
    }

    /// Writes column `col` of the constraint matrix into `out`.
    fn column(&self, col: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let p = self.class.pairs.len();
        let m = self.m;
        if col < p {
            let (i, j, _) = self.class.pairs[col];
            out[i as usize] = 1.0;
            out[j as usize] = -1.0;
        } else if col < p + m {
            out[col - p] = 1.0;
        } else if col < p + 2 * m {
            out[col - p - m] = -1.0;
        } else {
            let sign = if col == p + 2 * m { 1.0 } else { -1.0 };
            for (o, w) in out.iter_mut().zip(&self.class.weights) {
                *o = sign * w;
            }
        }
    }

    fn reduced_cost(&self, col: usize, wy: f64) -> f64 {
        let p = self.class.pairs.len();
        let m = self.m;
        if col < p {
            let (i, j, d) = self.class.pairs[col];
            d - (self.y[i as usize] - self.y[j as usize])
        } else if col < p + m {
            self.class.bounds[col - p] - self.y[col - p]
        } else if col < p + 2 * m {
            self.class.bounds[col - p - m] + self.y[col - p - m]
        } else if col == p + 2 * m {
            -wy
        } else {
            wy
        }
    }

    fn update_duals(&mut self) {
        let m = self.m;
        self.y.iter_mut().for_each(|v| *v = 0.0);
        for k in 0..m {
            let dk = self.cost(self.basis[k]);
            if dk != 0.0 {
                let row = &self.binv[k * m..(k + 1) * m];
                for (yj, b) in self.y.iter_mut().zip(row) {
                    *yj += dk * b;
                }
            }
        }
    }

    /// Rebuilds the basis inverse from scratch by Gauss-Jordan elimination.
    fn refactor(&mut self) -> Result<()> {
        let m = self.m;
        let mut a = vec![0.0; m * m];
        let mut col = vec![0.0; m];
        for (k, &b) in self.basis.iter().enumerate() {
            self.column(b, &mut col);
            for i in 0..m {
                a[i * m + k] = col[i];
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for k in 0..m {
            let piv = (k..m).max_by(|&x, &y| a[x * m + k].abs().total_cmp(&a[y * m + k].abs())).unwrap();
            if a[piv * m + k].abs() < 1e-14 {
                return Err(Error::Solver { iterations: 0, detail: "singular basis on refactor".into() });
            }
            if piv != k {
                for j in 0..m {
                    a.swap(piv * m + j, k * m + j);
                    inv.swap(piv * m + j, k * m + j);
                }
            }
            let d = a[k * m + k];
            for j in 0..m {
                a[k * m + j] /= d;
                inv[k * m + j] /= d;
            }
            for i in 0..m {
                if i != k {
                    let f = a[i * m + k];
                    if f != 0.0 {
                        for j in 0..m {
                            a[i * m + j] -= f * a[k * m + j];
                            inv[i * m + j] -= f * inv[k * m + j];
                        }
                    }
                }
            }
        }
        // basis row k of the inverse corresponds to basis position k
        self.binv = inv;
        for k in 0..m {
            let row = &self.binv[k * m..(k + 1) * m];
            self.xb[k] = row.iter().zip(self.c).map(|(b, c)| b * c).sum::<f64>().max(0.0);
        }
        Ok(())
    }

    fn run(mut self) -> Result<LpSolution> {
        let m = self.m;
        let ncols = self.ncols();
        let max_iter = 50 * (m + 10) + 10 * ncols;
        let mut degenerate = 0usize;
        let mut dcol = vec![0.0; m];
        let mut acol = vec![0.0; m];
        for iter in 0..max_iter {
            if iter > 0 && iter % REFACTOR_EVERY == 0 {
                self.refactor()
                    .map_err(|_| Error::Solver { iterations: iter, detail: "basis became singular".into() })?;
            }
            self.update_duals();
            let wy: f64 = self.class.weights.iter().zip(&self.y).map(|(w, y)| w * y).sum();
            let bland = degenerate >= DEGENERATE_RUN;

            let mut entering = None;
            let mut best = -PRICE_TOL;
            for col in 0..ncols {
                if self.in_basis[col] {
                    continue;
                }
                let rc = self.reduced_cost(col, wy);
                if rc < best {
                    entering = Some(col);
                    if bland {
                        break;
                    }
                    best = rc;
                }
            }
            let Some(q) = entering else {
                return Ok(self.finish(iter));
            };

            self.column(q, &mut acol);
            for k in 0..m {
                let row = &self.binv[k * m..(k + 1) * m];
                dcol[k] = row.iter().zip(&acol).map(|(b, a)| b * a).sum();
            }
            let dmax = dcol.iter().fold(0.0f64, |s, v| s.max(v.abs()));
            let piv_tol = PIVOT_TOL * dmax.max(1.0);
            let mut leave: Option<usize> = None;
            let mut theta = f64::INFINITY;
            for k in 0..m {
                if dcol[k] > piv_tol {
                    let ratio = self.xb[k].max(0.0) / dcol[k];
                    let better = match leave {
                        None => true,
                        Some(l) => {
                            if ratio < theta * (1.0 - 1e-12) {
                                true
                            } else if ratio <= theta * (1.0 + 1e-12) {
                                if bland {
                                    self.basis[k] < self.basis[l]
                                } else {
                                    dcol[k] > dcol[l]
                                }
                            } else {
                                false
                            }
                        }
                    };
                    if better {
                        leave = Some(k);
                        theta = ratio;
                    }
                }
            }
            let Some(l) = leave else {
                return Err(Error::Solver {
                    iterations: iter,
                    detail: "dual ray found although the zero kernel is feasible".into(),
                });
            };

            if theta <= 1e-13 * self.scale {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            for k in 0..m {
                if k != l {
                    self.xb[k] = (self.xb[k] - theta * dcol[k]).max(0.0);
                }
            }
            self.xb[l] = theta;
            let piv = dcol[l];
            for j in 0..m {
                self.binv[l * m + j] /= piv;
            }
            let (before, rest) = self.binv.split_at_mut(l * m);
            let (prow, after) = rest.split_at_mut(m);
            for (k, row) in before.chunks_mut(m).enumerate() {
                let f = dcol[k];
                if f != 0.0 {
                    row.iter_mut().zip(prow.iter()).for_each(|(r, p)| *r -= f * p);
                }
            }
            for (k, row) in after.chunks_mut(m).enumerate() {
                let f = dcol[l + 1 + k];
                if f != 0.0 {
                    row.iter_mut().zip(prow.iter()).for_each(|(r, p)| *r -= f * p);
                }
            }
            self.in_basis[self.basis[l]] = false;
            self.in_basis[q] = true;
            self.basis[l] = q;
        }
        Err(Error::Solver { iterations: max_iter, detail: format!("no optimum after {max_iter} pivots") })
    }

    fn finish(self, pivots: usize) -> LpSolution {
        let witness = self.y;
        let value: f64 = self.c.iter().zip(&witness).map(|(c, y)| c * y).sum();
        LpSolution { value: value.max(0.0), witness, pivots }
    }
}
