//! Closed-form asymptotic rates for the random cluster model on `K_n` with
//! edge weight `p = lambda/n` and cluster weight `q`.
//!
//! All logarithms are natural and every rate is in nats per vertex.

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::numeric::{bisect, fmt_real, grid_golden_max, grid_node, Real};

/// Grid size used to bracket roots of the mean-field equation.
pub const ROOT_GRID_POINTS: usize = 10_000;
/// Default grid size for numeric suprema of `phi`.
pub const SUP_GRID_POINTS: usize = 4096;
/// Golden-section tolerance in `theta` for numeric suprema.
pub const SUP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub theta: f64,
    pub value: f64,
}

/// `phi(., lambda, q)` sampled on a uniform grid including both endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct RateCurve {
    pub lambda: f64,
    pub q: f64,
    pub points: Vec<RatePoint>,
}

impl RateCurve {
    pub fn new(lambda: f64, q: f64, grid_points: usize) -> Result<Self> {
        check_positive("lambda", lambda)?;
        check_positive("q", q)?;
        if grid_points < 2 {
            return Err(domain("a rate curve needs at least two grid points"));
        }
        let points = (0..grid_points)
            .map(|i| {
                let theta = grid_node(0.0, 1.0, i, grid_points);
                phi(theta, lambda, q).map(|value| RatePoint { theta, value })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { lambda, q, points })
    }

    /// Grid point with the largest rate; the first one wins ties.
    pub fn argmax(&self) -> RatePoint {
        self.points
            .iter()
            .copied()
            .fold(None, |best: Option<RatePoint>, p| match best {
                Some(b) if b.value >= p.value => Some(b),
                _ => Some(p),
            })
            .expect("curve is non-empty")
    }

    /// CSV with header `theta,phi`, LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta,phi\n");
        for p in &self.points {
            out.push_str(&fmt_real(p.theta));
            out.push(',');
            out.push_str(&fmt_real(p.value));
            out.push('\n');
        }
        out
    }
}

/// Phase-diagram summary for one `(lambda, q)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub lambda: f64,
    pub q: f64,
    pub lambda_c: f64,
    pub theta_star: f64,
    pub theta_max: f64,
    pub free_energy: f64,
}

#[derive(Serialize)]
struct PhasePointJson {
    lambda: Real,
    q: Real,
    lambda_c: Real,
    theta_star: Real,
    theta_max: Real,
    free_energy: Real,
}

impl PhasePoint {
    pub fn compute(lambda: f64, q: f64) -> Result<Self> {
        Ok(Self {
            lambda,
            q,
            lambda_c: lambda_c(q)?,
            theta_star: theta_star(lambda, q)?,
            theta_max: theta_max(lambda, q)?,
            free_energy: free_energy(lambda, q)?,
        })
    }

    pub fn to_json(&self) -> String {
        let j = PhasePointJson {
            lambda: Real(self.lambda),
            q: Real(self.q),
            lambda_c: Real(self.lambda_c),
            theta_star: Real(self.theta_star),
            theta_max: Real(self.theta_max),
            free_energy: Real(self.free_energy),
        };
        serde_json::to_string_pretty(&j).expect("plain struct serialises")
    }
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(domain(format!(
            "{name} must be positive and finite, got {x}"
        )))
    }
}

fn check_fraction(theta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&theta) {
        Ok(())
    } else {
        Err(domain(format!("theta must lie in [0, 1], got {theta}")))
    }
}

/// `theta ln theta + (1 - theta) ln(1 - theta)`, extended by 0 at the endpoints.
pub fn entropy(theta: f64) -> Result<f64> {
    check_fraction(theta)?;
    Ok(xlogx(theta) + xlogx(1.0 - theta))
}

fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// `1 - e^{-x}`.
pub fn pi1(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(domain(format!("pi1 needs x >= 0, got {x}")));
    }
    Ok(-(-x).exp_m1())
}

/// `min(ln x - (x - 1/x)/2, 0)`; strictly negative exactly when `x > 1`.
pub fn psi(x: f64) -> Result<f64> {
    check_positive("x", x)?;
    if x <= 1.0 {
        return Ok(0.0);
    }
    Ok((x.ln() - 0.5 * (x - 1.0 / x)).min(0.0))
}

/// The large-deviation rate of `|V_{eps n}| = floor(theta n)` before normalisation.
///
/// Sum of the entropy of choosing the giant, the cost of no edges leaving
/// it, the rate for the giant to be connected and the acyclic rate of the
/// remainder at effective mean degree `lambda (1 - theta)`.
pub fn phi(theta: f64, lambda: f64, q: f64) -> Result<f64> {
    check_fraction(theta)?;
    check_positive("lambda", lambda)?;
    check_positive("q", q)?;
    let rest = 1.0 - theta;
    // (1 - theta) ln[1 - pi1(lambda theta)] = -lambda theta (1 - theta)
    let mut v = -entropy(theta)? - lambda * theta * rest;
    if theta > 0.0 {
        v += theta * pi1(lambda * theta)?.ln();
    }
    if rest > 0.0 {
        let x = lambda * rest;
        v += rest * (psi(x / q)? - (q - 1.0) / (2.0 * q) * x + q.ln());
    }
    Ok(v)
}

/// Critical mean degree: `q` for `q <= 2`, `2 (q-1)/(q-2) ln(q-1)` above.
pub fn lambda_c(q: f64) -> Result<f64> {
    check_positive("q", q)?;
    if q <= 2.0 {
        Ok(q)
    } else {
        Ok(2.0 * (q - 1.0) / (q - 2.0) * (q - 1.0).ln())
    }
}

/// True when `lambda` is within rounding of `lambda_c(q)`.
pub fn is_critical(lambda: f64, q: f64) -> Result<bool> {
    let lc = lambda_c(q)?;
    Ok((lambda - lc).abs() <= 1e-12 * lc.max(1.0))
}

fn mean_field_residual(theta: f64, lambda: f64, q: f64) -> f64 {
    (-lambda * theta).exp() - (1.0 - theta) / (1.0 + (q - 1.0) * theta)
}

/// `|e^{-lambda theta} - (1-theta)/(1+(q-1)theta)|`.
pub fn mean_field_error(theta: f64, lambda: f64, q: f64) -> f64 {
    mean_field_residual(theta, lambda, q).abs()
}

/// All roots of the mean-field equation in `[0, 1)`, ascending. Zero is
/// always a root, so the list is never empty and its last entry is
/// `theta_max`. Roots are bracketed on a uniform grid and polished by
/// bisection; tangential double roots are not detected.
pub fn mean_field_roots(lambda: f64, q: f64) -> Result<Vec<f64>> {
    check_positive("lambda", lambda)?;
    check_positive("q", q)?;
    let f = |t: f64| mean_field_residual(t, lambda, q);
    let mut roots = vec![0.0];
    let mut prev_t = grid_node(0.0, 1.0, 1, ROOT_GRID_POINTS);
    let mut prev_f = f(prev_t);
    for i in 2..ROOT_GRID_POINTS {
        let t = grid_node(0.0, 1.0, i, ROOT_GRID_POINTS);
        let ft = f(t);
        if prev_f == 0.0 {
            roots.push(prev_t);
        } else if prev_f.signum() != ft.signum() && ft != 0.0 {
            roots.push(bisect(f, prev_t, t, 0.0)?);
        }
        prev_t = t;
        prev_f = ft;
    }
    Ok(roots)
}

/// Largest root of the mean-field equation.
pub fn theta_max(lambda: f64, q: f64) -> Result<f64> {
    Ok(*mean_field_roots(lambda, q)?
        .last()
        .expect("zero is always a root"))
}

/// Maximiser of `phi(., lambda, q)`: 0 below `lambda_c`, `theta_max` above.
pub fn theta_star(lambda: f64, q: f64) -> Result<f64> {
    check_positive("lambda", lambda)?;
    if is_critical(lambda, q)? {
        return Err(Error::AtCriticality { lambda, q });
    }
    if lambda < lambda_c(q)? {
        Ok(0.0)
    } else {
        theta_max(lambda, q)
    }
}

/// `-(q-1)(2-theta) ln(1-theta) - [2+(q-1)theta] ln[1+(q-1)theta]`.
pub fn g(theta: f64, q: f64) -> Result<f64> {
    check_positive("q", q)?;
    if !(0.0..1.0).contains(&theta) {
        return Err(domain(format!("g needs theta in [0, 1), got {theta}")));
    }
    let b = (q - 1.0) * theta;
    Ok(-(q - 1.0) * (2.0 - theta) * (-theta).ln_1p() - (2.0 + b) * b.ln_1p())
}

/// Closed-form second derivative of [`g`].
pub fn g_second(theta: f64, q: f64) -> Result<f64> {
    check_positive("q", q)?;
    if !(0.0..1.0).contains(&theta) {
        return Err(domain(format!("g'' needs theta in [0, 1), got {theta}")));
    }
    let b = 1.0 + (q - 1.0) * theta;
    Ok(-q * (q - 1.0) * (q - 2.0 - 2.0 * (q - 1.0) * theta) * theta
        / ((1.0 - theta).powi(2) * b * b))
}

/// `(q-2)/(q-1)`: the zero of `g` beyond its inflection point when `q > 2`,
/// and the largest mean-field root at `lambda_c`.
pub fn theta_c(q: f64) -> Result<f64> {
    if !(q > 2.0) {
        return Err(domain(format!("theta_c is defined for q > 2, got {q}")));
    }
    Ok((q - 2.0) / (q - 1.0))
}

/// Limit of `(1/n) ln Z_{n,lambda,q}`, evaluated through `g` at `theta_star`.
pub fn free_energy(lambda: f64, q: f64) -> Result<f64> {
    let t = theta_star(lambda, q)?;
    Ok(g(t, q)? / (2.0 * q) - (q - 1.0) / (2.0 * q) * lambda + q.ln())
}

/// `sup_theta phi(theta, lambda, q)` by grid scan plus golden-section
/// refinement. Returns the maximising `theta` and the supremum.
pub fn phi_sup(lambda: f64, q: f64, grid_points: usize) -> Result<RatePoint> {
    check_positive("lambda", lambda)?;
    check_positive("q", q)?;
    let f = |t: f64| phi(t.clamp(0.0, 1.0), lambda, q).expect("validated arguments");
    let e = grid_golden_max(f, 0.0, 1.0, grid_points, SUP_TOL);
    Ok(RatePoint {
        theta: e.x,
        value: e.value,
    })
}

/// Rate of the event that `K_n(omega)` is connected; independent of `q`.
pub fn connected_rate(lambda: f64) -> Result<f64> {
    check_positive("lambda", lambda)?;
    Ok((-(-lambda).exp()).ln_1p())
}

/// Rate of the event that `K_n(omega)` is acyclic.
pub fn acyclic_rate(lambda: f64, q: f64) -> Result<f64> {
    check_positive("lambda", lambda)?;
    check_positive("q", q)?;
    Ok(psi(lambda / q)? - (q - 1.0) / (2.0 * q) * lambda + q.ln())
}

/// Exponent comparing a split into two connected pieces of sizes
/// `theta n` and `(1-theta) n` against a single connected graph.
pub fn xi(theta: f64, lambda: f64) -> Result<f64> {
    check_positive("lambda", lambda)?;
    if !(theta > 0.0 && theta < 1.0) {
        return Err(domain(format!("xi needs theta in (0, 1), got {theta}")));
    }
    let rest = 1.0 - theta;
    Ok(
        -entropy(theta)? + theta * pi1(lambda * theta)?.ln() + rest * pi1(lambda * rest)?.ln()
            - lambda * theta * rest,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn entropy_values() {
        close(entropy(0.5).unwrap(), -std::f64::consts::LN_2, 1e-15);
        assert_eq!(entropy(0.0).unwrap(), 0.0);
        assert_eq!(entropy(1.0).unwrap(), 0.0);
        close(entropy(0.25).unwrap(), -0.562_335_144_618_808_3, 1e-12);
        assert!(matches!(entropy(1.5), Err(Error::Domain(_))));
        assert!(entropy(f64::NAN).is_err());
    }

    #[test]
    fn pi1_values() {
        assert_eq!(pi1(0.0).unwrap(), 0.0);
        close(pi1(1.0).unwrap(), 0.632_120_558_828_557_7, 1e-15);
        assert!(pi1(-0.1).is_err());
        let mut prev = 0.0;
        for i in 1..200 {
            let v = pi1(i as f64 * 0.1).unwrap();
            assert!(v > prev && v < 1.0);
            prev = v;
        }
    }

    #[test]
    fn psi_values() {
        assert_eq!(psi(1.0).unwrap(), 0.0);
        assert_eq!(psi(0.5).unwrap(), 0.0);
        close(psi(2.0).unwrap(), 2f64.ln() - 0.75, 1e-15);
        assert!(psi(0.0).is_err());
        for i in 1..100 {
            let x = i as f64 * 0.05;
            assert_eq!(psi(x).unwrap() < 0.0, x > 1.0, "x = {x}");
        }
    }

    #[test]
    fn phi_endpoints() {
        for &(l, q) in &[(0.7, 1.0), (3.0, 2.0), (5.0, 4.0), (1.2, 0.6)] {
            close(phi(1.0, l, q).unwrap(), pi1(l).unwrap().ln(), 1e-15);
            close(
                phi(0.0, l, q).unwrap(),
                psi(l / q).unwrap() - (q - 1.0) / (2.0 * q) * l + q.ln(),
                1e-15,
            );
        }
        assert!(phi(-0.1, 1.0, 1.0).is_err());
        assert!(phi(0.5, 0.0, 1.0).is_err());
        assert!(phi(0.5, 1.0, -1.0).is_err());
    }

    #[test]
    fn percolation_sup_is_zero() {
        for l in [0.5, 1.5, 3.0] {
            let s = phi_sup(l, 1.0, SUP_GRID_POINTS).unwrap();
            assert!(s.value.abs() <= 1e-6, "lambda {l}: {}", s.value);
        }
    }

    #[test]
    fn lambda_c_values() {
        assert_eq!(lambda_c(1.0).unwrap(), 1.0);
        assert_eq!(lambda_c(2.0).unwrap(), 2.0);
        close(lambda_c(4.0).unwrap(), 3.0 * 3f64.ln(), 1e-15);
        close(lambda_c(4.0).unwrap(), 3.295_836_866_004_329, 1e-12);
        assert!(lambda_c(0.0).is_err());
    }

    #[test]
    fn mean_field_examples() {
        // e^{-2 theta} = 1 - theta
        close(theta_max(2.0, 1.0).unwrap(), 0.796_812_130_020_02, 1e-10);
        close(theta_max(3.0, 2.0).unwrap(), 0.858_559_636_640_110_6, 1e-10);
        for &(l, q) in &[(0.5, 1.0), (0.9, 1.5), (1.99, 2.0), (0.3, 0.5)] {
            assert_eq!(mean_field_roots(l, q).unwrap(), vec![0.0], "({l}, {q})");
        }
    }

    #[test]
    fn mean_field_three_roots_above_two() {
        // q = 4 just below lambda_c has a metastable branch: 0, an unstable
        // root and theta_max.
        let roots = mean_field_roots(3.25, 4.0).unwrap();
        assert_eq!(roots.len(), 3, "{roots:?}");
        for r in roots {
            assert!(mean_field_error(r, 3.25, 4.0) <= 1e-10);
        }
        assert_eq!(theta_star(3.25, 4.0).unwrap(), 0.0);
    }

    #[test]
    fn theta_star_branches() {
        assert_eq!(theta_star(1.0, 2.0).unwrap(), 0.0);
        close(theta_star(3.0, 2.0).unwrap(), 0.8585596366, 1e-9);
        assert_eq!(theta_star(3.1, 4.0).unwrap(), 0.0);
        assert!(matches!(
            theta_star(2.0, 2.0),
            Err(Error::AtCriticality { .. })
        ));
        let lc = lambda_c(4.0).unwrap();
        assert!(matches!(
            free_energy(lc, 4.0),
            Err(Error::AtCriticality { .. })
        ));
    }

    #[test]
    fn g_values() {
        assert_eq!(g(0.0, 3.0).unwrap(), 0.0);
        for i in 0..10 {
            assert_eq!(g(i as f64 * 0.09, 1.0).unwrap(), 0.0);
        }
        close(g(0.8585, 2.0).unwrap(), 0.460_540_805_713_878_5, 1e-12);
        assert!(g(1.0, 2.0).is_err());
    }

    #[test]
    fn free_energy_examples() {
        for l in [0.5, 3.0] {
            close(free_energy(l, 1.0).unwrap(), 0.0, 1e-15);
        }
        close(free_energy(1.0, 2.0).unwrap(), 2f64.ln() - 0.25, 1e-15);
        close(
            free_energy(1.0, 2.0).unwrap(),
            phi(0.0, 1.0, 2.0).unwrap(),
            1e-15,
        );
        let fe = free_energy(3.0, 2.0).unwrap();
        close(fe, 0.058_341_349_44, 1e-9);
        close(fe, phi_sup(3.0, 2.0, SUP_GRID_POINTS).unwrap().value, 1e-6);
    }

    #[test]
    fn connected_and_acyclic_rates() {
        close(
            connected_rate(1.0).unwrap(),
            -0.458_675_145_387_081_9,
            1e-14,
        );
        assert!(connected_rate(50.0).unwrap() < 0.0);
        assert!(connected_rate(50.0).unwrap() > -1e-20);
        close(acyclic_rate(1.0, 2.0).unwrap(), 2f64.ln() - 0.25, 1e-15);
        for l in [0.3, 1.0, 4.0] {
            assert_eq!(acyclic_rate(l, 1.0).unwrap(), psi(l).unwrap());
        }
    }

    #[test]
    fn xi_values() {
        // -S(1/2) + ln pi1(1/2) - 1/4
        close(xi(0.5, 1.0).unwrap(), -0.489_604_949_007_243_3, 1e-12);
        assert!(xi(0.0, 1.0).is_err());
        assert!(xi(1.0, 1.0).is_err());
    }

    #[test]
    fn rate_curve_csv_and_argmax() {
        let c = RateCurve::new(3.0, 2.0, 4096).unwrap();
        assert_eq!(c.points.first().unwrap().theta, 0.0);
        assert_eq!(c.points.last().unwrap().theta, 1.0);
        assert!(c.points.windows(2).all(|w| w[0].theta < w[1].theta));
        close(c.argmax().theta, 0.8585596, 1.0 / 4095.0);
        let csv = c.to_csv();
        assert!(csv.starts_with("theta,phi\n0.0,"));
        assert_eq!(csv.lines().count(), 4097);
        assert!(!csv.contains('\r'));
        assert_eq!(RateCurve::new(0.5, 2.0, 4096).unwrap().argmax().theta, 0.0);
    }

    #[test]
    fn phase_point_json_keys() {
        let p = PhasePoint::compute(3.0, 2.0).unwrap();
        let v: serde_json::Value = serde_json::from_str(&p.to_json()).unwrap();
        for key in [
            "lambda",
            "q",
            "lambda_c",
            "theta_star",
            "theta_max",
            "free_energy",
        ] {
            assert!(v[key].is_string(), "{key}");
        }
        assert_eq!(v["lambda_c"], "2.0000000000000000");
    }
}
