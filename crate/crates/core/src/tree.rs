//! Tree-polynomial machinery behind the acyclic and small-component rates.
//!
//! `F_r(s) = sum_{l=1..r} a_l s^l / l!` with `a_l = l^{l-2}` spanning trees
//! on `l` labelled vertices. The saddle point of
//! `Theta_r(s, theta, alpha) = -theta ln alpha - theta ln theta + theta + theta ln F_r(s) - ln s`
//! gives the exponential rate of `Z[L ∩ B_r]`.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::graph::pair_count;
use crate::numeric::{
    bisect, golden_min, inv_factorial, ln_factorial, log_sum_exp, CompensatedSum, Real,
};
use crate::rate;

const MAX_EXP: f64 = 700.0;

/// Number of spanning trees of `K_l`, `l^{l-2}` (with `a_1 = 1`).
pub fn cayley(l: usize) -> f64 {
    assert!(l >= 1, "cayley(0) is undefined");
    if l <= 2 {
        1.0
    } else {
        (l as f64).powi(l as i32 - 2)
    }
}

/// `F_r` with coefficients `a_l / l!` stored as logarithms.
#[derive(Debug, Clone, PartialEq)]
pub struct TreePolynomial {
    r: usize,
    ln_coeffs: Vec<f64>,
}

impl TreePolynomial {
    pub fn new(r: usize) -> Result<Self> {
        if r == 0 {
            return Err(domain("tree polynomial order r must be at least 1"));
        }
        let mut ln_fact = 0.0;
        let ln_coeffs = (1..=r)
            .map(|l| {
                ln_fact += (l as f64).ln();
                (l as f64 - 2.0) * (l as f64).ln() - ln_fact
            })
            .collect();
        Ok(Self { r, ln_coeffs })
    }

    pub fn order(&self) -> usize {
        self.r
    }

    /// `a_l / l!`.
    pub fn coefficient(&self, l: usize) -> f64 {
        self.ln_coeffs[l - 1].exp()
    }

    /// `sum_l l^k (a_l/l!) s^l`, failing on overflow.
    fn moment(&self, s: f64, k: i32) -> Result<f64> {
        if !(s > 0.0) {
            return Err(domain(format!("s must be positive, got {s}")));
        }
        let ls = s.ln();
        let mut total = 0.0;
        for (i, &lc) in self.ln_coeffs.iter().enumerate() {
            let l = (i + 1) as f64;
            let e = lc + l * ls;
            if e > MAX_EXP {
                return Err(Error::Range(format!(
                    "F_{} overflows at s = {s} (term {} has log {e:.1})",
                    self.r,
                    i + 1
                )));
            }
            total += l.powi(k) * e.exp();
        }
        Ok(total)
    }

    /// `F_r(s)`.
    pub fn value(&self, s: f64) -> Result<f64> {
        self.moment(s, 0)
    }

    /// `F_r'(s)`.
    pub fn derivative(&self, s: f64) -> Result<f64> {
        Ok(self.moment(s, 1)? / s)
    }

    /// `s F_r'(s)`, strictly increasing in `s`.
    pub fn s_derivative(&self, s: f64) -> Result<f64> {
        self.moment(s, 1)
    }

    /// `ln(F_r(s)/s)` as a function of `u = ln s`; never overflows and is
    /// nonnegative whenever `F_r(s) >= s`, which always holds.
    fn ln_quotient(&self, u: f64) -> f64 {
        log_sum_exp(
            self.ln_coeffs
                .iter()
                .enumerate()
                .map(move |(i, &lc)| lc + i as f64 * u),
        )
    }
}

/// `F_r(s)`.
pub fn f_r(s: f64, r: usize) -> Result<f64> {
    TreePolynomial::new(r)?.value(s)
}

/// `F_r'(s)`.
pub fn f_r_prime(s: f64, r: usize) -> Result<f64> {
    TreePolynomial::new(r)?.derivative(s)
}

/// The tree function: the root `W in [0, 1]` of `W e^{-W} = s` for `s in [0, 1/e]`.
///
/// Newton iteration safeguarded by the bracket `[0, 1]`; converges to a
/// residual below `1e-14`.
pub fn tree_w(s: f64) -> Result<f64> {
    let inv_e = (-1.0f64).exp();
    if !(s >= 0.0 && s <= inv_e * (1.0 + 4.0 * f64::EPSILON)) {
        return Err(domain(format!(
            "tree function needs s in [0, 1/e], got {s}"
        )));
    }
    if s == 0.0 {
        return Ok(0.0);
    }
    if s >= inv_e {
        return Ok(1.0);
    }
    let h = |w: f64| w * (-w).exp() - s;
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut w = s;
    for _ in 0..200 {
        let hw = h(w);
        if hw.abs() <= 1e-16 {
            break;
        }
        if hw < 0.0 {
            lo = w;
        } else {
            hi = w;
        }
        let d = (1.0 - w) * (-w).exp();
        let step = if d > 0.0 { w - hw / d } else { f64::NAN };
        w = if step > lo && step < hi {
            step
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Ok(w)
}

/// `Delta_r(s) = W(s) - s F_r'(s)`, the truncation error of the tree series.
pub fn delta_r(s: f64, r: usize) -> Result<f64> {
    if !(s > 0.0) {
        return Err(domain(format!("delta_r needs s in (0, 1/e], got {s}")));
    }
    let s = s.min((-1.0f64).exp());
    if s * std::f64::consts::E <= 0.95 {
        return Ok(tree_tail(s, r));
    }
    let w = tree_w(s)?;
    Ok(w - TreePolynomial::new(r)?.s_derivative(s)?)
}

/// `sum_{l > r} l^{l-1} s^l / l!`, summed directly; terms shrink
/// geometrically by roughly `s e` per step.
fn tree_tail(s: f64, r: usize) -> f64 {
    let ln_s = s.ln();
    let mut sum = CompensatedSum::new();
    for l in r + 1.. {
        let lf = l as f64;
        let term = ((lf - 1.0) * lf.ln() - ln_factorial(l) + lf * ln_s).exp();
        sum.add(term);
        if term <= 1e-18 * sum.value() || term < f64::MIN_POSITIVE {
            break;
        }
    }
    sum.value()
}

/// `F_r(s) / (s F_r'(s))`: the stationary `theta` for a given `s`.
pub fn theta_of_s(s: f64, r: usize) -> Result<f64> {
    let p = TreePolynomial::new(r)?;
    Ok(p.value(s)? / p.s_derivative(s)?)
}

/// `P(s) / (s P'(s))` for `P(s) = sum_l coeffs[l] s^l` with nonnegative
/// coefficients, at least one of positive degree.
pub fn polynomial_quotient(coeffs: &[f64], s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(domain(format!("polynomial_quotient needs s > 0, got {s}")));
    }
    if coeffs.iter().any(|&c| !(c >= 0.0)) || coeffs.iter().skip(1).all(|&c| c == 0.0) {
        return Err(domain(
            "coefficients must be nonnegative with a positive-degree term",
        ));
    }
    let (mut p, mut sdp, mut pow) = (0.0, 0.0, 1.0);
    for (l, &c) in coeffs.iter().enumerate() {
        p += c * pow;
        sdp += l as f64 * c * pow;
        pow *= s;
    }
    Ok(p / sdp)
}

/// `Theta_r(s, theta, alpha)`.
pub fn theta_objective(poly: &TreePolynomial, s: f64, theta: f64, alpha: f64) -> Result<f64> {
    if !(theta > 0.0) {
        return Err(domain(format!("theta must be positive, got {theta}")));
    }
    Ok(-theta * alpha.ln() - theta * theta.ln() + theta + theta * poly.value(s)?.ln() - s.ln())
}

/// Saddle point of `Theta_r` for one `(r, alpha)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaddlePoint {
    pub r: usize,
    pub alpha: f64,
    pub s: f64,
    pub theta: f64,
    pub value: f64,
}

impl SaddlePoint {
    /// `|s F_r'(s) - alpha|` and `|F_r(s) - alpha theta|`.
    pub fn residuals(&self) -> Result<(f64, f64)> {
        let p = TreePolynomial::new(self.r)?;
        Ok((
            (p.s_derivative(self.s)? - self.alpha).abs(),
            (p.value(self.s)? - self.alpha * self.theta).abs(),
        ))
    }
}

/// `r -> infinity` limits of `(s_r, theta_r, Theta_r)`.
pub fn saddle_limits(alpha: f64) -> Result<(f64, f64, f64)> {
    if !(alpha > 0.0) {
        return Err(domain(format!("alpha must be positive, got {alpha}")));
    }
    let (s, theta) = if alpha <= 1.0 {
        (alpha * (-alpha).exp(), 1.0 - alpha / 2.0)
    } else {
        ((-1.0f64).exp(), 1.0 / (2.0 * alpha))
    };
    let value = 1.0 + alpha / 2.0 - alpha.ln() + rate::psi(alpha)?;
    Ok((s, theta, value))
}

/// Solves `s F_r'(s) = alpha`, `F_r(s) = alpha theta`.
pub fn solve_saddle(alpha: f64, r: usize) -> Result<SaddlePoint> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(domain(format!("alpha must be positive, got {alpha}")));
    }
    if r < 2 {
        return Err(domain("the saddle point needs r >= 2"));
    }
    let poly = TreePolynomial::new(r)?;
    let s = solve_s_derivative(&poly, alpha)?;
    let theta = poly.value(s)? / alpha;
    let value = theta_objective(&poly, s, theta, alpha)?;
    Ok(SaddlePoint {
        r,
        alpha,
        s,
        theta,
        value,
    })
}

fn solve_s_derivative(poly: &TreePolynomial, alpha: f64) -> Result<f64> {
    let lo = 1e-12;
    if poly.s_derivative(lo)? >= alpha {
        return Err(Error::NoBracket(format!(
            "alpha = {alpha} is below s F_r'(s) at s = {lo}"
        )));
    }
    let mut hi = 1e-3;
    loop {
        match poly.s_derivative(hi) {
            Ok(v) if v > alpha => break,
            Ok(_) => hi *= 1.5,
            Err(_) => {
                return Err(Error::NoBracket(format!(
                    "no bracket for s F_{}'(s) = {alpha} before overflow",
                    poly.order()
                )))
            }
        }
        if hi > 1e12 {
            return Err(Error::NoBracket(format!(
                "no bracket for s F_{}'(s) = {alpha}",
                poly.order()
            )));
        }
    }
    bisect(
        |s| poly.s_derivative(s).expect("bracketed range") - alpha,
        lo,
        hi,
        0.0,
    )
}

/// Finite-`n` saddle point: `theta_{r,n} = floor(theta_r n)/n` and the
/// minimiser `s_{r,n}` of `Theta_r(., theta_{r,n}, alpha)`.
///
/// `Theta_r` is convex in `ln s`, so the minimiser is the unique root of
/// `F_r(s)/(s F_r'(s)) = theta_{r,n}`.
pub fn discrete_saddle(alpha: f64, r: usize, n: usize) -> Result<SaddlePoint> {
    if n < r {
        return Err(domain(format!(
            "discrete saddle needs n >= r, got n = {n}, r = {r}"
        )));
    }
    let cont = solve_saddle(alpha, r)?;
    let theta = (cont.theta * n as f64).floor() / n as f64;
    let poly = TreePolynomial::new(r)?;
    let s = s_for_theta(&poly, theta)?;
    let value = theta_objective(&poly, s, theta, alpha)?;
    Ok(SaddlePoint {
        r,
        alpha,
        s,
        theta,
        value,
    })
}

/// Inverse of the decreasing map `s -> F_r(s)/(s F_r'(s))` on `(1/r, 1)`.
fn s_for_theta(poly: &TreePolynomial, theta: f64) -> Result<f64> {
    let r = poly.order() as f64;
    if !(theta > 1.0 / r && theta < 1.0) {
        return Err(Error::NoBracket(format!(
            "theta = {theta} is outside (1/r, 1) = ({}, 1)",
            1.0 / r
        )));
    }
    let quotient = |s: f64| -> Result<f64> { Ok(poly.value(s)? / poly.s_derivative(s)?) };
    let lo = 1e-12;
    let mut hi = 1.0;
    while quotient(hi)? > theta {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::NoBracket(format!("no bracket for theta = {theta}")));
        }
    }
    bisect(
        |s| quotient(s).expect("bracketed range") - theta,
        lo,
        hi,
        0.0,
    )
}

/// `Q_{n,k,r}`: sum over size profiles `(m_l)` with `sum l m_l = n`,
/// `sum m_l = k` and `m_l = 0` for `l > r` of `prod_l (a_l/l!)^{m_l} / m_l!`.
///
/// Exact enumeration of restricted partitions with per-call memoisation.
pub fn q_nkr(n: usize, k: usize, r: usize) -> Result<f64> {
    if n == 0 || k == 0 || k > n || r == 0 {
        return Err(domain(format!(
            "q_nkr needs 1 <= k <= n and r >= 1, got n = {n}, k = {k}, r = {r}"
        )));
    }
    let poly = TreePolynomial::new(r.min(n))?;
    let coeffs: Vec<f64> = (1..=poly.order()).map(|l| poly.coefficient(l)).collect();
    let mut memo = HashMap::new();
    Ok(q_rec(n, k, poly.order(), &coeffs, &mut memo))
}

fn q_rec(
    rem: usize,
    parts: usize,
    cap: usize,
    coeffs: &[f64],
    memo: &mut HashMap<(usize, usize, usize), f64>,
) -> f64 {
    if rem == 0 || parts == 0 {
        return if rem == 0 && parts == 0 { 1.0 } else { 0.0 };
    }
    // each part has size between 1 and cap
    if parts > rem || rem > parts * cap {
        return 0.0;
    }
    if cap == 1 {
        // only singletons remain: a_1/1! = 1
        return inv_factorial(rem);
    }
    if let Some(&v) = memo.get(&(rem, parts, cap)) {
        return v;
    }
    let c = coeffs[cap - 1];
    let mut total = 0.0;
    let mut power = 1.0;
    for m in 0..=parts.min(rem / cap) {
        if m > 0 {
            power *= c;
        }
        let rest = q_rec(rem - m * cap, parts - m, cap - 1, coeffs, memo);
        if rest != 0.0 {
            total += power * inv_factorial(m) * rest;
        }
    }
    memo.insert((rem, parts, cap), total);
    total
}

/// `(1/k!) inf_{s>0} F_r(s)^k / s^n`, minimised over `ln s in [-30, 10]`.
///
/// The objective is convex in `ln s`; a coarse scan locates the basin and
/// golden-section search refines it.
pub fn q_upper_bound(n: usize, k: usize, r: usize) -> Result<f64> {
    if n == 0 || k == 0 || k > n || r == 0 {
        return Err(domain(format!(
            "q_upper_bound needs 1 <= k <= n and r >= 1, got n = {n}, k = {k}, r = {r}"
        )));
    }
    let poly = TreePolynomial::new(r)?;
    // k ln F(s) - n ln s = k ln(F(s)/s) - (n-k) ln s
    let h = |u: f64| k as f64 * poly.ln_quotient(u) - (n - k) as f64 * u;
    let (lo, hi) = (-30.0, 10.0);
    let points = 401;
    let step = (hi - lo) / (points - 1) as f64;
    let best = (0..points)
        .map(|i| lo + step * i as f64)
        .min_by(|a, b| h(*a).total_cmp(&h(*b)))
        .expect("non-empty scan");
    let refined = golden_min(h, (best - step).max(lo), (best + step).min(hi), 1e-12);
    let ln_inf = refined.value.min(h(best));
    Ok(ln_inf.exp() * inv_factorial(k))
}

/// `Z_{n,lambda,q}[L ∩ B_r]` through the `Q_{n,k,r}` rearrangement:
/// `n! p^n (1-p)^{C(n,2)-n} sum_k p^{-k} [q(1-p)]^k Q_{n,k,r}` with `p = lambda/n`.
pub fn acyclic_partition_identity(n: usize, lambda: f64, q: f64, r: usize) -> Result<f64> {
    if n == 0 || n > 20 {
        return Err(domain(format!(
            "acyclic identity supports 1 <= n <= 20, got {n}"
        )));
    }
    let p = lambda / n as f64;
    if !(p > 0.0 && p < 1.0) || !(q > 0.0) {
        return Err(domain(format!(
            "need 0 < lambda < n and q > 0, got lambda = {lambda}, q = {q}"
        )));
    }
    let ln_prefactor =
        ln_factorial(n) + n as f64 * p.ln() + (pair_count(n) as f64 - n as f64) * (-p).ln_1p();
    let ln_ratio = (q * (1.0 - p)).ln() - p.ln();
    let mut total = 0.0;
    for k in 1..=n {
        let qk = q_nkr(n, k, r)?;
        if qk > 0.0 {
            total += (ln_prefactor + k as f64 * ln_ratio).exp() * qk;
        }
    }
    Ok(total)
}

#[derive(Serialize)]
struct SaddleDiagnostic {
    r: usize,
    alpha: Real,
    s_r: Real,
    theta_r: Real,
    value: Real,
    s_limit: Real,
    theta_limit: Real,
    value_limit: Real,
}

/// JSON `{r, alpha, s_r, theta_r, value, s_limit, theta_limit, value_limit}`.
pub fn saddle_diagnostic_json(alpha: f64, r: usize) -> Result<String> {
    let sp = solve_saddle(alpha, r)?;
    let (s_limit, theta_limit, value_limit) = saddle_limits(alpha)?;
    let d = SaddleDiagnostic {
        r,
        alpha: Real(alpha),
        s_r: Real(sp.s),
        theta_r: Real(sp.theta),
        value: Real(sp.value),
        s_limit: Real(s_limit),
        theta_limit: Real(theta_limit),
        value_limit: Real(value_limit),
    };
    Ok(serde_json::to_string_pretty(&d).expect("plain struct serialises"))
}
