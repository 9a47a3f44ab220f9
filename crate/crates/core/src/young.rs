//! Young functions: evaluation, generalized inverse, complementary function
//! and growth diagnostics.
//!
//! Every catalog member is finite and positive on `(0, domain_cap]`, so the
//! generalized inverse `inf{r >= 0 : Φ(r) > s}` is an ordinary inverse. In
//! floating point we return the largest representable `r` with `Φ(r) <= s`,
//! which makes both halves of `Φ(Φ⁻¹(s)) <= s <= Φ⁻¹(Φ(s))` hold exactly for
//! any monotone evaluator.

use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};

/// Default trusted range for the power-like kinds.
pub const POWER_DOMAIN_CAP: f64 = 1e12;
/// `e^r` overflows shortly after 709.
pub const EXP_DOMAIN_CAP: f64 = 700.0;

/// Knot count of a numerically computed complementary function.
pub const CONJUGATE_KNOTS: usize = 2048;
/// Default argument range of a numerically computed complementary function.
pub const CONJUGATE_RANGE: (f64, f64) = (1e-4, 1e4);

/// The closed-form families plus a tabulated fallback.
#[derive(Debug, Clone, PartialEq)]
pub enum YoungKind {
    /// `r^p`
    Power(f64),
    /// `r^p / p`
    NormalizedPower(f64),
    /// `e^r - r - 1`
    Exp,
    /// `(1 + r) log(1 + r) - r`
    LLogL,
    Tabulated(Table),
}

/// Monotone piecewise-cubic Hermite table through `(r, Φ(r), Φ'(r))` knots.
///
/// Below the first knot the table is continued linearly to `(0, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    knots: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl Table {
    /// Builds a table with Fritsch-Carlson slopes.
    pub fn from_points(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        validate_points(&knots, &values)?;
        let slopes = pchip_slopes(&knots, &values);
        Ok(Table { knots, values, slopes })
    }

    /// Builds a table with caller-supplied derivatives at the knots.
    pub fn with_slopes(knots: Vec<f64>, values: Vec<f64>, slopes: Vec<f64>) -> Result<Self> {
        validate_points(&knots, &values)?;
        if slopes.len() != knots.len() || slopes.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::Argument("table slopes must be finite and nonnegative".into()));
        }
        Ok(Table { knots, values, slopes })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn last_knot(&self) -> f64 {
        *self.knots.last().expect("tables are nonempty")
    }

    fn eval(&self, r: f64) -> f64 {
        let (k0, v0) = (self.knots[0], self.values[0]);
        if r <= k0 {
            return if k0 == 0.0 { v0 } else { v0 * (r / k0) };
        }
        // partition_point gives the first knot strictly above r
        let j = self.knots.partition_point(|&k| k <= r);
        if j >= self.knots.len() {
            return *self.values.last().unwrap();
        }
        let i = j - 1;
        let (x0, x1) = (self.knots[i], self.knots[j]);
        let (y0, y1) = (self.values[i], self.values[j]);
        let (m0, m1) = (self.slopes[i], self.slopes[j]);
        let h = x1 - x0;
        let s = (r - x0) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        (h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1).max(0.0)
    }

    /// Smallest and largest log-log slope between consecutive positive knots.
    fn type_exponents(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for w in self.knots.iter().zip(&self.values).collect::<Vec<_>>().windows(2) {
            let ((&a, &fa), (&b, &fb)) = (w[0], w[1]);
            if a > 0.0 && fa > 0.0 && fb > 0.0 {
                let slope = (fb / fa).ln() / (b / a).ln();
                lo = lo.min(slope);
                hi = hi.max(slope);
            }
        }
        if !lo.is_finite() {
            lo = 1.0;
            hi = hi.max(1.0);
        }
        (lo, hi)
    }
}

fn validate_points(knots: &[f64], values: &[f64]) -> Result<()> {
    if knots.len() < 2 || knots.len() != values.len() {
        return Err(Error::Argument("a table needs at least two (r, value) pairs".into()));
    }
    if knots.iter().chain(values).any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Argument("table entries must be finite and nonnegative".into()));
    }
    if knots.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Argument("table knots must be strictly increasing".into()));
    }
    if values.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Argument("table values must be nondecreasing".into()));
    }
    if knots[0] == 0.0 && values[0] != 0.0 {
        return Err(Error::Argument("a Young function vanishes at 0".into()));
    }
    Ok(())
}

fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let d: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
    let mut m = vec![0.0; n];
    if n == 2 {
        m[0] = d[0];
        m[1] = d[0];
        return m;
    }
    for i in 1..n - 1 {
        if d[i - 1] * d[i] <= 0.0 {
            m[i] = 0.0;
        } else {
            let (h0, h1) = (x[i] - x[i - 1], x[i + 1] - x[i]);
            let w1 = 2.0 * h1 + h0;
            let w2 = h1 + 2.0 * h0;
            m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
        }
    }
    let end = |d0: f64, d1: f64, h0: f64, h1: f64| {
        let v = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if v * d0 <= 0.0 {
            0.0
        } else if d0 * d1 <= 0.0 && v.abs() > 3.0 * d0.abs() {
            3.0 * d0
        } else {
            v
        }
    };
    m[0] = end(d[0], d[1], x[1] - x[0], x[2] - x[1]);
    m[n - 1] = end(d[n - 2], d[n - 3], x[n - 1] - x[n - 2], x[n - 2] - x[n - 3]);
    m
}

/// A Young function together with its declared type exponents.
#[derive(Debug, Clone, PartialEq)]
pub struct YoungFunction {
    kind: YoungKind,
    p0: f64,
    p1: f64,
    domain_cap: f64,
}

impl YoungFunction {
    pub fn power(p: f64) -> Result<Self> {
        check_exponent(p)?;
        Ok(YoungFunction { kind: YoungKind::Power(p), p0: p, p1: p, domain_cap: POWER_DOMAIN_CAP })
    }

    pub fn normalized_power(p: f64) -> Result<Self> {
        check_exponent(p)?;
        Ok(YoungFunction { kind: YoungKind::NormalizedPower(p), p0: p, p1: p, domain_cap: POWER_DOMAIN_CAP })
    }

    /// `e^r - r - 1`: lower type 2, no finite upper type.
    pub fn exp() -> Self {
        YoungFunction { kind: YoungKind::Exp, p0: 2.0, p1: f64::INFINITY, domain_cap: EXP_DOMAIN_CAP }
    }

    /// `(1 + r) log(1 + r) - r`: lower type 1, upper type 2.
    pub fn llogl() -> Self {
        YoungFunction { kind: YoungKind::LLogL, p0: 1.0, p1: 2.0, domain_cap: POWER_DOMAIN_CAP }
    }

    /// Wraps a table; the type exponents are read off the knots and the
    /// domain cap is the last knot.
    pub fn tabulated(table: Table) -> Self {
        let (p0, p1) = table.type_exponents();
        let domain_cap = table.last_knot();
        YoungFunction { kind: YoungKind::Tabulated(table), p0, p1, domain_cap }
    }

    /// Loads a two-column `r,Φ(r)` CSV file. A non-numeric first line is
    /// treated as a header.
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let (knots, values) = read_pairs(path)?;
        let table = Table::from_points(knots, values).map_err(|e| Error::parse(path, e.to_string()))?;
        Ok(Self::tabulated(table))
    }

    /// Resolves a catalog id: `power:p`, `npower:p`, `exp`, `llogl` or
    /// `table:<path>`.
    pub fn from_id(id: &str) -> Result<Self> {
        let id = id.trim();
        if let Some(path) = id.strip_prefix("table:") {
            return Self::from_csv(path);
        }
        let parse_p = |s: &str| s.parse::<f64>().map_err(|_| Error::Config(format!("bad exponent in Young id `{id}`")));
        match id.split_once(':') {
            Some(("power", p)) => Self::power(parse_p(p)?),
            Some(("npower", p)) => Self::normalized_power(parse_p(p)?),
            None if id == "exp" => Ok(Self::exp()),
            None if id == "llogl" => Ok(Self::llogl()),
            _ => Err(Error::Config(format!("unknown Young function id `{id}`"))),
        }
    }

    /// Overrides the trusted domain.
    pub fn with_domain_cap(mut self, cap: f64) -> Result<Self> {
        if !(cap > 0.0) || !cap.is_finite() {
            return Err(Error::Argument(format!("domain cap must be positive, got {cap}")));
        }
        self.domain_cap = cap;
        Ok(self)
    }

    pub fn kind(&self) -> &YoungKind {
        &self.kind
    }

    pub fn lower_type(&self) -> f64 {
        self.p0
    }

    pub fn upper_type(&self) -> f64 {
        self.p1
    }

    pub fn domain_cap(&self) -> f64 {
        self.domain_cap
    }

    /// `Φ(r)`, rejecting negative arguments and arguments beyond the cap.
    pub fn evaluate(&self, r: f64) -> Result<f64> {
        if r.is_nan() || r < 0.0 {
            return Err(Error::Argument(format!("Young functions are defined on [0, inf), got {r}")));
        }
        if r > self.domain_cap {
            return Err(Error::Domain { what: "r", value: r, cap: self.domain_cap });
        }
        Ok(self.raw(r))
    }

    /// `Φ(r)` for `r >= 0`, with `+inf` past the domain cap. This is the
    /// sentinel used by modulars, where an infinite integrand is legal.
    pub fn value(&self, r: f64) -> f64 {
        if r > self.domain_cap {
            f64::INFINITY
        } else {
            self.raw(r)
        }
    }

    fn raw(&self, r: f64) -> f64 {
        match &self.kind {
            YoungKind::Power(p) => r.powf(*p),
            YoungKind::NormalizedPower(p) => r.powf(*p) / p,
            YoungKind::Exp => exp_type(r),
            YoungKind::LLogL => llogl(r),
            YoungKind::Tabulated(t) => t.eval(r),
        }
    }

    /// Generalized inverse `Φ⁻¹(s)`; `+inf` when `Φ` stays `<= s` on the
    /// whole trusted domain.
    pub fn inverse(&self, s: f64) -> f64 {
        if s.is_nan() {
            return f64::NAN;
        }
        if s <= 0.0 {
            return 0.0;
        }
        if s.is_infinite() || self.raw(self.domain_cap) <= s {
            return f64::INFINITY;
        }
        let guess = match &self.kind {
            YoungKind::Power(p) => Some(s.powf(1.0 / p)),
            YoungKind::NormalizedPower(p) => Some((p * s).powf(1.0 / p)),
            _ => None,
        };
        if let Some(g) = guess {
            if let Some(r) = self.polish_inverse(g.min(self.domain_cap), s) {
                return r;
            }
        }
        self.bisect_inverse(s)
    }

    /// Walks a closed-form guess to the largest float with `Φ(r) <= s`.
    fn polish_inverse(&self, mut r: f64, s: f64) -> Option<f64> {
        for _ in 0..64 {
            if self.raw(r) <= s {
                break;
            }
            r = r.next_down();
        }
        if self.raw(r) > s {
            return None;
        }
        for _ in 0..64 {
            let up = r.next_up();
            if up > self.domain_cap || self.raw(up) > s {
                return Some(r);
            }
            r = up;
        }
        None
    }

    /// Bisection over the ordered bit patterns of `[0, cap]`.
    fn bisect_inverse(&self, s: f64) -> f64 {
        let mut lo = 0u64;
        let mut hi = self.domain_cap.to_bits();
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.raw(f64::from_bits(mid)) <= s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        f64::from_bits(lo)
    }

    /// Complementary function on the default range, shrinking the upper end
    /// when the supremum escapes the domain cap.
    pub fn conjugate(&self) -> Result<YoungFunction> {
        let (lo, mut hi) = CONJUGATE_RANGE;
        loop {
            match self.conjugate_on(lo, hi, CONJUGATE_KNOTS) {
                Err(Error::Unbounded { r }) if r > lo * 4.0 => hi = r / 2.0,
                other => return other,
            }
        }
    }

    /// `Φ̃(r) = sup_s (rs - Φ(s))` on `knots` log-spaced points of `[lo, hi]`,
    /// returned as a Hermite table whose slopes are the maximizers.
    pub fn conjugate_on(&self, lo: f64, hi: f64, knots: usize) -> Result<YoungFunction> {
        if !(lo > 0.0 && hi > lo && knots >= 2) {
            return Err(Error::Argument(format!("bad conjugate grid [{lo}, {hi}] x {knots}")));
        }
        let grid = log_grid(lo, hi, knots);
        let mut values = Vec::with_capacity(knots);
        let mut slopes = Vec::with_capacity(knots);
        for &r in &grid {
            let (v, s) = self.legendre(r)?;
            values.push(v);
            slopes.push(s);
        }
        // Enforce monotone data against last-bit noise.
        for i in 1..values.len() {
            if values[i] < values[i - 1] {
                values[i] = values[i - 1];
            }
        }
        let table = Table::with_slopes(grid, values, slopes)?;
        Ok(YoungFunction::tabulated(table))
    }

    /// Returns `(sup_s rs - Φ(s), argmax)`.
    pub(crate) fn legendre(&self, r: f64) -> Result<(f64, f64)> {
        let cap = self.domain_cap;
        let slope_exceeds = |s: f64| self.raw(s) > r * s;
        let mut s_hi = 1.0_f64.min(cap);
        if slope_exceeds(s_hi) {
            while s_hi > 1e-300 && slope_exceeds(s_hi / 2.0) {
                s_hi /= 2.0;
            }
            if s_hi <= 1e-300 {
                return Ok((0.0, 0.0));
            }
        } else {
            while !slope_exceeds(s_hi) {
                if s_hi >= cap {
                    return Err(Error::Unbounded { r });
                }
                s_hi = (s_hi * 2.0).min(cap);
            }
        }
        let gain = |s: f64| r * s - self.raw(s);
        let s_star = golden_max(gain, 0.0, s_hi);
        Ok((gain(s_star).max(0.0), s_star))
    }

    /// Short catalog-style label.
    pub fn id(&self) -> String {
        match &self.kind {
            YoungKind::Power(p) => format!("power:{p}"),
            YoungKind::NormalizedPower(p) => format!("npower:{p}"),
            YoungKind::Exp => "exp".into(),
            YoungKind::LLogL => "llogl".into(),
            YoungKind::Tabulated(t) => format!("table[{} knots]", t.knots.len()),
        }
    }
}

impl fmt::Display for YoungFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if p.is_finite() && p >= 1.0 {
        Ok(())
    } else {
        Err(Error::Argument(format!("power exponent must be >= 1, got {p}")))
    }
}

fn exp_type(r: f64) -> f64 {
    if r < 0.1 {
        // e^r - r - 1 = sum_{k >= 2} r^k / k!
        let mut term = r * r / 2.0;
        let mut sum = term;
        for k in 3..20 {
            term *= r / k as f64;
            sum += term;
            if term < sum * 1e-18 {
                break;
            }
        }
        sum
    } else {
        r.exp_m1() - r
    }
}

fn llogl(r: f64) -> f64 {
    if r < 0.1 {
        // sum_{k >= 2} (-1)^k r^k / (k (k - 1))
        let mut pow = r * r;
        let mut sum = 0.0;
        for k in 2..40 {
            let term = pow / (k * (k - 1)) as f64;
            sum += if k % 2 == 0 { term } else { -term };
            if term < 1e-19 * r * r {
                break;
            }
            pow *= r;
        }
        sum
    } else {
        (1.0 + r) * r.ln_1p() - r
    }
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if b - a <= 4.0 * f64::EPSILON * b.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        c
    } else {
        d
    }
}

/// Reads a two-column numeric CSV file. A non-numeric first line is treated
/// as a header; blank lines and `#` comments are skipped.
pub(crate) fn read_pairs(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split(',').map(str::trim);
        let parsed = match (cols.next(), cols.next()) {
            (Some(a), Some(b)) => a.parse::<f64>().ok().zip(b.parse::<f64>().ok()),
            _ => None,
        };
        match parsed {
            Some((x, y)) => {
                xs.push(x);
                ys.push(y);
            }
            None if lineno == 0 => continue,
            None => return Err(Error::parse(path, format!("line {}: expected two numbers", lineno + 1))),
        }
    }
    Ok((xs, ys))
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| if i == n - 1 { hi } else { (a + (b - a) * i as f64 / (n - 1) as f64).exp() }).collect()
}

/// Worst-case defects of the inverse and complementary-inverse brackets.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseBracketReport {
    /// `max (Φ(Φ⁻¹(r)) - r) / r`, positive entries are violations.
    pub left_excess: f64,
    /// `max (r - Φ⁻¹(Φ(r))) / r`.
    pub right_excess: f64,
    /// `min Φ⁻¹(r) Φ̃⁻¹(r) / r`; the bracket requires `>= 1`.
    pub product_min: f64,
    /// `max Φ⁻¹(r) Φ̃⁻¹(r) / r`; the bracket requires `<= 2`.
    pub product_max: f64,
    /// Points where the product leaves `[r, 2r]` by more than the tolerance.
    pub product_violations: usize,
    pub tolerance: f64,
}

/// Relative slack granted to the complementary-function bracket, which is
/// evaluated through the tabulated conjugate.
pub const CONJUGATE_BRACKET_TOL: f64 = 1e-8;

/// Checks `Φ(Φ⁻¹(r)) <= r <= Φ⁻¹(Φ(r))` and `r <= Φ⁻¹(r) Φ̃⁻¹(r) <= 2r` on
/// `r_grid`, with `Φ̃` computed numerically.
pub fn verify_inverse_bracket(phi: &YoungFunction, r_grid: &[f64]) -> Result<InverseBracketReport> {
    let conj = phi.conjugate()?;
    verify_inverse_bracket_with(phi, &conj, r_grid)
}

/// Same as [`verify_inverse_bracket`] with a precomputed complementary function.
pub fn verify_inverse_bracket_with(
    phi: &YoungFunction,
    conj: &YoungFunction,
    r_grid: &[f64],
) -> Result<InverseBracketReport> {
    let mut rep = InverseBracketReport {
        left_excess: f64::NEG_INFINITY,
        right_excess: f64::NEG_INFINITY,
        product_min: f64::INFINITY,
        product_max: f64::NEG_INFINITY,
        product_violations: 0,
        tolerance: CONJUGATE_BRACKET_TOL,
    };
    for &r in r_grid {
        if !(r > 0.0) || r > phi.domain_cap() {
            return Err(Error::Precondition(format!("grid point {r} outside (0, domain_cap]")));
        }
        let left = phi.value(phi.inverse(r));
        rep.left_excess = rep.left_excess.max((left - r) / r);
        let right = phi.inverse(phi.raw(r));
        rep.right_excess = rep.right_excess.max((r - right) / r);
        let q = phi.inverse(r) * conj.inverse(r) / r;
        rep.product_min = rep.product_min.min(q);
        rep.product_max = rep.product_max.max(q);
        if !(1.0 - CONJUGATE_BRACKET_TOL..=2.0 * (1.0 + CONJUGATE_BRACKET_TOL)).contains(&q) {
            rep.product_violations += 1;
        }
    }
    Ok(rep)
}

/// Sampled Δ2 / ∇2 constants and type exponents.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthReport {
    /// `max Φ(2r)/Φ(r)` over the usable grid.
    pub delta2_k: f64,
    /// False when the doubling ratio is still climbing at the top of the grid.
    pub delta2_bounded: bool,
    /// Smallest sampled `k` with `Φ(r) <= Φ(kr)/(2k)` on the grid.
    pub nabla2_k: Option<f64>,
    pub empirical_p0: f64,
    pub empirical_p1: f64,
    /// Grid points dropped because `2r` or `kr` left the trusted domain.
    pub grid_truncated: bool,
}

impl GrowthReport {
    /// Δ2 and ∇2 both observed.
    pub fn doubling_both(&self) -> bool {
        self.delta2_bounded && self.nabla2_k.is_some()
    }
}

/// Candidate `k` values for the ∇2 scan: `2^(j/64)`, up to 1024.
fn nabla2_candidates() -> impl Iterator<Item = f64> {
    (1..=640).map(|j| 2f64.powf(j as f64 / 64.0))
}

pub fn estimate_growth_constants(phi: &YoungFunction, r_grid: &[f64]) -> Result<GrowthReport> {
    if r_grid.len() < 32 {
        return Err(Error::Precondition(format!("need >= 32 grid points, got {}", r_grid.len())));
    }
    if r_grid.iter().any(|&r| !(r > 0.0)) || r_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition("grid must be positive and increasing".into()));
    }
    let cap = phi.domain_cap();
    let usable: Vec<f64> = r_grid
        .iter()
        .copied()
        .filter(|&r| 2.0 * r <= cap && phi.raw(2.0 * r).is_finite() && phi.raw(r) > 0.0)
        .collect();
    let mut truncated = usable.len() < r_grid.len();
    if usable.len() < 8 {
        return Err(Error::Precondition("fewer than 8 grid points inside the domain".into()));
    }

    let ratios: Vec<f64> = usable.iter().map(|&r| phi.raw(2.0 * r) / phi.raw(r)).collect();
    let delta2_k = ratios.iter().copied().fold(0.0, f64::max);
    let last = *ratios.last().unwrap();
    let three_quarter = ratios[ratios.len() * 3 / 4];
    let delta2_bounded = !(last >= delta2_k * (1.0 - 1e-12) && last > three_quarter * (1.0 + 1e-3));

    let mut nabla2_k = None;
    for k in nabla2_candidates() {
        let pts: Vec<f64> = usable.iter().copied().filter(|&r| k * r <= cap).collect();
        if pts.len() < usable.len() {
            truncated = true;
        }
        if pts.is_empty() {
            break;
        }
        let ok = pts.iter().all(|&r| phi.raw(r) <= phi.raw(k * r) / (2.0 * k) * (1.0 + 1e-12));
        if ok {
            nabla2_k = Some(k);
            break;
        }
    }

    let mut p0 = f64::INFINITY;
    let mut p1: f64 = 0.0;
    for w in usable.windows(2) {
        let slope = (phi.raw(w[1]) / phi.raw(w[0])).ln() / (w[1] / w[0]).ln();
        p0 = p0.min(slope);
        p1 = p1.max(slope);
    }
    Ok(GrowthReport {
        delta2_k,
        delta2_bounded,
        nabla2_k,
        empirical_p0: p0,
        empirical_p1: p1,
        grid_truncated: truncated,
    })
}
