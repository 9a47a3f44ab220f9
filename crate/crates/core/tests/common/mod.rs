#![allow(dead_code, clippy::needless_range_loop)]

use isqlab::lp::KernelClass;
use rand::Rng;

/// Maximum of `c·φ` over the polytope found by enumerating all vertices:
/// every choice of `m - 1` inequality rows joined with the mean-zero row.
pub fn vertex_enumeration(class: &KernelClass, c: &[f64]) -> f64 {
    let m = class.len();
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for i in 0..m {
        let mut a = vec![0.0; m];
        a[i] = 1.0;
        rows.push((a.clone(), class.bounds()[i]));
        a[i] = -1.0;
        rows.push((a, class.bounds()[i]));
        for j in 0..m {
            if i != j {
                let mut a = vec![0.0; m];
                a[i] = 1.0;
                a[j] = -1.0;
                rows.push((a, class.distance(i, j)));
            }
        }
    }
    let mut best = f64::NEG_INFINITY;
    let mut pick = Vec::with_capacity(m - 1);
    choose(&rows, m - 1, 0, &mut pick, &mut |sel: &[usize]| {
        let mut a = Vec::with_capacity(m);
        let mut b = Vec::with_capacity(m);
        for &r in sel {
            a.push(rows[r].0.clone());
            b.push(rows[r].1);
        }
        a.push(class.weights().to_vec());
        b.push(0.0);
        if let Some(phi) = solve_dense(a, b) {
            let feasible =
                rows.iter().all(|(row, rhs)| row.iter().zip(&phi).map(|(x, y)| x * y).sum::<f64>() <= rhs + 1e-10);
            if feasible {
                let v: f64 = c.iter().zip(&phi).map(|(x, y)| x * y).sum();
                best = best.max(v);
            }
        }
    });
    best
}

fn choose(rows: &[(Vec<f64>, f64)], k: usize, start: usize, pick: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
    if pick.len() == k {
        visit(pick);
        return;
    }
    for r in start..rows.len() {
        if rows.len() - r < k - pick.len() {
            break;
        }
        pick.push(r);
        choose(rows, k, r + 1, pick, visit);
        pick.pop();
    }
}

fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&x, &y| a[x][k].abs().total_cmp(&a[y][k].abs()))?;
        if a[p][k].abs() < 1e-12 {
            return None;
        }
        a.swap(p, k);
        b.swap(p, k);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            if f != 0.0 {
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    Some(x)
}

/// A random small instance: nodes in the unit ball, positive weights,
/// Gaussian-ish coefficients.
pub fn random_instance<R: Rng>(rng: &mut R, m: usize) -> (KernelClass, Vec<f64>) {
    let dim = if rng.gen_bool(0.5) { 1 } else { 2 };
    let alpha = rng.gen_range(0.2..=1.0);
    let mut points = Vec::with_capacity(m);
    while points.len() < m {
        let p = [rng.gen_range(-0.95..0.95), if dim == 2 { rng.gen_range(-0.95..0.95) } else { 0.0 }];
        if f64::hypot(p[0], p[1]) < 0.95 {
            points.push(p);
        }
    }
    let weights = (0..m).map(|_| rng.gen_range(0.1..1.0)).collect();
    let c = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
    (KernelClass::new(dim, alpha, points, weights).unwrap(), c)
}

/// Rescales `v` into the class: subtract its weighted mean, then divide by
/// the largest constraint ratio.
pub fn project_feasible(class: &KernelClass, mut v: Vec<f64>) -> Vec<f64> {
    let wsum: f64 = class.weights().iter().sum();
    let mean: f64 = v.iter().zip(class.weights()).map(|(a, w)| a * w).sum::<f64>() / wsum;
    v.iter_mut().for_each(|x| *x -= mean);
    let m = class.len();
    let mut s: f64 = 0.0;
    for i in 0..m {
        s = s.max(v[i].abs() / class.bounds()[i]);
        for j in 0..m {
            if i != j {
                s = s.max((v[i] - v[j]) / class.distance(i, j));
            }
        }
    }
    if s > 0.0 {
        v.iter_mut().for_each(|x| *x /= s * (1.0 + 1e-12));
    }
    v
}

/// Random members of the class: smooth trigonometric sums, bumps, and
/// rough noise, each projected into the feasible set.
pub fn feasible_dictionary<R: Rng>(rng: &mut R, class: &KernelClass, count: usize) -> Vec<Vec<f64>> {
    let pts = class.points();
    (0..count)
        .map(|k| {
            let v: Vec<f64> = match k % 3 {
                0 => {
                    let terms: Vec<(f64, f64, f64, f64)> = (0..4)
                        .map(|_| {
                            (
                                rng.gen_range(-1.0..1.0),
                                rng.gen_range(0.5..6.0),
                                rng.gen_range(0.0..6.3),
                                rng.gen_range(-1.0..1.0),
                            )
                        })
                        .collect();
                    pts.iter()
                        .map(|p| terms.iter().map(|&(a, f, ph, d)| a * (f * (p[0] + d * p[1]) + ph).sin()).sum())
                        .collect()
                }
                1 => {
                    let c = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
                    let r = rng.gen_range(0.1..1.5);
                    let s = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                    pts.iter().map(|p| s * (1.0 - f64::hypot(p[0] - c[0], p[1] - c[1]) / r).max(0.0)).collect()
                }
                _ => pts.iter().map(|_| rng.gen_range(-1.0..1.0)).collect(),
            };
            project_feasible(class, v)
        })
        .collect()
}
