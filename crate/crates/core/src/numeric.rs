//! Small numerical kernels shared by the rate, tree and oracle modules.

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

const INV_GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Result of a one-dimensional search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub x: f64,
    pub value: f64,
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
///
/// Stops once the bracket is narrower than `tol`. The returned point is the
/// best of the interior probes and both endpoints, so a maximum sitting on
/// the boundary is reported exactly.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Extremum {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_GOLDEN * (b - a);
    let mut d = a + INV_GOLDEN * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..400 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_GOLDEN * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_GOLDEN * (b - a);
            fd = f(d);
        }
    }
    let mut best = if fc >= fd {
        Extremum { x: c, value: fc }
    } else {
        Extremum { x: d, value: fd }
    };
    for x in [lo, hi] {
        let v = f(x);
        if v > best.value {
            best = Extremum { x, value: v };
        }
    }
    best
}

/// Golden-section search for the minimum of a unimodal `f` on `[lo, hi]`.
pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Extremum {
    let e = golden_max(|x| -f(x), lo, hi, tol);
    Extremum {
        x: e.x,
        value: -e.value,
    }
}

/// Maximises `f` over `[lo, hi]` by scanning `points` uniform grid nodes and
/// refining the best cell pair with golden-section search.
pub fn grid_golden_max<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    points: usize,
    tol: f64,
) -> Extremum {
    let points = points.max(3);
    let step = (hi - lo) / (points - 1) as f64;
    let mut best_i = 0;
    let mut best_v = f64::NEG_INFINITY;
    for i in 0..points {
        let v = f(grid_node(lo, hi, i, points));
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    let a = (lo + step * best_i.saturating_sub(1) as f64).max(lo);
    let b = (lo + step * (best_i + 1) as f64).min(hi);
    let refined = golden_max(&mut f, a, b, tol);
    if refined.value >= best_v {
        refined
    } else {
        Extremum {
            x: grid_node(lo, hi, best_i, points),
            value: best_v,
        }
    }
}

/// Node `i` of a uniform grid with `points` nodes; the last node is exactly `hi`.
pub fn grid_node(lo: f64, hi: f64, i: usize, points: usize) -> f64 {
    if i + 1 == points {
        hi
    } else {
        lo + (hi - lo) * i as f64 / (points - 1) as f64
    }
}

/// Bisection for a root of `f` on `[lo, hi]`, which must bracket a sign change.
/// Runs until the bracket cannot shrink further or its width drops below `tol`.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoBracket(format!(
            "f({lo}) = {fa} and f({hi}) = {fb} have the same sign"
        )));
    }
    for _ in 0..2000 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b || (b - a) <= tol {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Neumaier-compensated accumulator. Carries roughly twice the working
/// precision of a plain `f64` running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    /// Folds another accumulator into this one. Merging partial sums in a
    /// fixed order gives reproducible totals.
    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `ln(n!)` by direct summation; exact enough for the sizes used here.
pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// `1/n!` as a product of reciprocals.
pub fn inv_factorial(n: usize) -> f64 {
    let mut f = 1.0;
    for i in 2..=n {
        f *= i as f64;
    }
    1.0 / f
}

/// `ln(sum(exp(terms)))` without overflow.
pub fn log_sum_exp(terms: impl IntoIterator<Item = f64> + Clone) -> f64 {
    let m = terms.clone().into_iter().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let s: f64 = terms.into_iter().map(|t| (t - m).exp()).sum();
    m + s.ln()
}

/// Formats `x` with 17 significant digits. Magnitudes in `[1e-5, 1e17)` are
/// written positionally, everything else in scientific notation.
pub fn fmt_real(x: f64) -> String {
    if x.is_nan() {
        return "NaN".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0.0" } else { "0.0" }.to_string();
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-5..17).contains(&exp) {
        return sci;
    }
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let mut out = String::with_capacity(24);
    if negative {
        out.push('-');
    }
    if exp < 0 {
        out.push_str("0.");
        for _ in 0..(-exp - 1) {
            out.push('0');
        }
        out.push_str(&digits);
    } else {
        let int_len = exp as usize + 1;
        out.push_str(&digits[..int_len]);
        out.push('.');
        let frac = &digits[int_len..];
        out.push_str(if frac.is_empty() { "0" } else { frac });
    }
    out
}

/// An `f64` that serialises as a 17-significant-digit decimal string.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Real(pub f64);

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_real(self.0))
    }
}

impl From<f64> for Real {
    fn from(x: f64) -> Self {
        Real(x)
    }
}
