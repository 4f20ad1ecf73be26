//! Gauss–Legendre rules and the endpoint substitution for integrals of the form
//!
//! ```text
//! ∫_d^{π/2} (cos²d − cos²u)^{±1/2} g(u) du
//! ```
//!
//! With `cos u = cos d · sin φ` the square-root factor becomes `cos d · cos φ`
//! and `du = cos d · cos φ dφ / sin u`, so both weights turn into smooth
//! integrands on `φ ∈ [0, π/2]` and Gauss–Legendre converges geometrically.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

pub const ADAPTIVE_START: usize = 16;
pub const ADAPTIVE_CAP: usize = 4096;

/// Nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn count(&self) -> usize {
        self.nodes.len()
    }

    /// `∫_a^b f`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        half * self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
    }
}

/// `count`-point Gauss–Legendre rule, exact for polynomials of degree `2 count - 1`.
///
/// Roots of `P_count` are found by Newton iteration from the Tricomi-type
/// guesses `cos(π(i + 3/4)/(count + 1/2))`; the negative half is mirrored so
/// the rule is exactly symmetric.
pub fn gauss_legendre_rule(count: usize) -> QuadratureRule {
    assert!(count >= 1, "a quadrature rule needs at least one node");
    let n = count;
    let weight = |x: f64| {
        let dp = legendre_with_derivative(n, x).1;
        2.0 / ((1.0 - x * x) * dp * dp)
    };
    // Positive roots, largest first.
    let mut positive = Vec::with_capacity(n / 2);
    for i in 0..n / 2 {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let step = p / dp;
            x -= step;
            if step.abs() <= 1e-16 {
                break;
            }
        }
        positive.push((x, weight(x)));
    }
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for &(x, w) in &positive {
        nodes.push(-x);
        weights.push(w);
    }
    if n % 2 == 1 {
        nodes.push(0.0);
        weights.push(weight(0.0));
    }
    for &(x, w) in positive.iter().rev() {
        nodes.push(x);
        weights.push(w);
    }
    QuadratureRule { nodes, weights }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        p_prev = p;
        p = next;
    }
    let dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

/// Shared, lazily built rules.
pub fn cached_rule(count: usize) -> Arc<QuadratureRule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<QuadratureRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().unwrap().get(&count) {
        return Arc::clone(rule);
    }
    let rule = Arc::new(gauss_legendre_rule(count));
    cache.lock().unwrap().entry(count).or_insert(rule).clone()
}

/// Exponent of `(cos²d − cos²u)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqrtWeight {
    /// `+1/2`
    Sqrt,
    /// `-1/2`
    InverseSqrt,
}

/// `∫_d^{π/2} (cos²d − cos²u)^{±1/2} · (·) du`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqrtWeightedIntegral {
    d: f64,
    weight: SqrtWeight,
}

impl SqrtWeightedIntegral {
    pub fn new(d: f64, weight: SqrtWeight) -> Result<Self> {
        if !(0.0..FRAC_PI_2).contains(&d) {
            return Err(Error::domain(format!(
                "lower limit d={d} must lie in [0, pi/2)"
            )));
        }
        Ok(SqrtWeightedIntegral { d, weight })
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn weight(&self) -> SqrtWeight {
        self.weight
    }

    /// `∫_d^{π/2} (cos²d − cos²u)^{±1/2} sin u du`, i.e. the total mass of the
    /// weight in the `−d(cos u)` measure.
    pub fn mass(&self) -> f64 {
        match self.weight {
            SqrtWeight::Sqrt => FRAC_PI_2 * 0.5 * self.d.cos().powi(2),
            SqrtWeight::InverseSqrt => FRAC_PI_2,
        }
    }

    /// Integrand on the `φ` interval for `∫ w(u) h(cos u) (−d cos u)`.
    fn phi_integrand<'a, H: Fn(f64) -> f64 + 'a>(&self, h: H) -> impl Fn(f64) -> f64 + 'a {
        let c = self.d.cos();
        let weight = self.weight;
        move |phi: f64| {
            let x = c * phi.sin();
            match weight {
                SqrtWeight::Sqrt => (c * phi.cos()).powi(2) * h(x),
                SqrtWeight::InverseSqrt => h(x),
            }
        }
    }

    /// `(cos u, sin u)` at `φ`, with `sin u` free of cancellation near `u = d = 0`.
    fn angle_at(&self, phi: f64) -> (f64, f64) {
        let c = self.d.cos();
        let s = self.d.sin();
        let cos_u = c * phi.sin();
        let sin_u = (s * s + (c * phi.cos()).powi(2)).sqrt();
        (cos_u, sin_u)
    }
}

/// `∫_d^{π/2} (cos²d − cos²u)^{±1/2} g(u) du` on one rule.
///
/// `g(u)/sin u` must stay bounded as `u → d`, which only matters at `d = 0`.
pub fn integrate_weighted<G: Fn(f64) -> f64>(
    spec: &SqrtWeightedIntegral,
    g: G,
    rule: &QuadratureRule,
) -> f64 {
    let c = spec.d.cos();
    rule.integrate(0.0, FRAC_PI_2, |phi| {
        let (cos_u, sin_u) = spec.angle_at(phi);
        let u = sin_u.atan2(cos_u);
        let base = g(u) / sin_u;
        match spec.weight {
            SqrtWeight::Sqrt => (c * phi.cos()).powi(2) * base,
            SqrtWeight::InverseSqrt => base,
        }
    })
}

/// `∫_d^{π/2} (cos²d − cos²u)^{±1/2} h(cos u) sin u du`, the `−d(cos u)` form.
/// No division by `sin u` happens on this path.
pub fn integrate_weighted_dcos<H: Fn(f64) -> f64>(
    spec: &SqrtWeightedIntegral,
    h: H,
    rule: &QuadratureRule,
) -> f64 {
    rule.integrate(0.0, FRAC_PI_2, spec.phi_integrand(h))
}

/// Result of a doubling sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveEstimate {
    pub value: f64,
    pub nodes: usize,
    /// `|I_N − I_{N/2}|` at acceptance.
    pub diff: f64,
}

/// Acceptance test for the doubling sequence: `diff <= max(abs, rel * |I|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Convergence {
    pub abs: f64,
    pub rel: f64,
}

impl Convergence {
    pub fn absolute(tol: f64) -> Self {
        Convergence { abs: tol, rel: 0.0 }
    }

    fn threshold(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

fn doubling<F: Fn(&QuadratureRule) -> f64>(
    estimate: F,
    conv: Convergence,
) -> Result<AdaptiveEstimate> {
    let mut nodes = ADAPTIVE_START;
    let mut previous = estimate(&cached_rule(nodes));
    let mut diff = f64::INFINITY;
    while nodes < ADAPTIVE_CAP {
        nodes *= 2;
        let current = estimate(&cached_rule(nodes));
        diff = (current - previous).abs();
        if diff <= conv.threshold(current) {
            return Ok(AdaptiveEstimate {
                value: current,
                nodes,
                diff,
            });
        }
        previous = current;
    }
    Err(Error::NonConvergence {
        nodes,
        diff,
        tol: conv.threshold(previous),
    })
}

/// Doubles the node count from 16 until two successive estimates differ by
/// at most `tol`, failing at 4096 nodes.
pub fn adaptive_integrate<G: Fn(f64) -> f64>(
    spec: &SqrtWeightedIntegral,
    g: G,
    tol: f64,
) -> Result<AdaptiveEstimate> {
    adaptive_integrate_with(spec, g, Convergence::absolute(tol))
}

pub fn adaptive_integrate_with<G: Fn(f64) -> f64>(
    spec: &SqrtWeightedIntegral,
    g: G,
    conv: Convergence,
) -> Result<AdaptiveEstimate> {
    doubling(|rule| integrate_weighted(spec, &g, rule), conv)
}

pub fn adaptive_integrate_dcos<H: Fn(f64) -> f64>(
    spec: &SqrtWeightedIntegral,
    h: H,
    conv: Convergence,
) -> Result<AdaptiveEstimate> {
    doubling(|rule| integrate_weighted_dcos(spec, &h, rule), conv)
}

/// Plain `∫_a^b f` by the same doubling scheme.
pub fn adaptive_interval<F: Fn(f64) -> f64>(
    a: f64,
    b: f64,
    f: F,
    conv: Convergence,
) -> Result<AdaptiveEstimate> {
    doubling(|rule| rule.integrate(a, b, &f), conv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn small_rules() {
        let one = gauss_legendre_rule(1);
        assert_eq!(one.nodes(), &[0.0]);
        assert_relative_eq!(one.weights()[0], 2.0, epsilon = 1e-15);

        let two = gauss_legendre_rule(2);
        let r = 1.0 / 3f64.sqrt();
        assert_relative_eq!(two.nodes()[0], -r, epsilon = 1e-15);
        assert_relative_eq!(two.nodes()[1], r, epsilon = 1e-15);
        assert_relative_eq!(two.weights()[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(two.weights()[1], 1.0, epsilon = 1e-15);

        let three = gauss_legendre_rule(3);
        assert_relative_eq!(
            three.integrate(-1.0, 1.0, |x| x.powi(4)),
            0.4,
            epsilon = 1e-15
        );
    }

    #[test]
    fn rule_structure() {
        for n in [1usize, 2, 3, 7, 16, 64, 255, 1024, 4096] {
            let rule = gauss_legendre_rule(n);
            assert_eq!(rule.count(), n);
            let sum: f64 = rule.weights().iter().sum();
            assert!((sum - 2.0).abs() <= 1e-13, "n={n}: weight sum {sum}");
            assert!(rule.weights().iter().all(|&w| w > 0.0));
            assert!(
                rule.nodes().windows(2).all(|p| p[0] < p[1]),
                "n={n}: nodes not increasing"
            );
            for (a, b) in rule.nodes().iter().zip(rule.nodes().iter().rev()) {
                assert_eq!(*a, -*b);
            }
        }
    }

    #[test]
    fn polynomial_exactness() {
        for n in 1..=10usize {
            let rule = gauss_legendre_rule(n);
            for degree in 0..=(2 * n - 1) {
                let exact = if degree % 2 == 1 {
                    0.0
                } else {
                    2.0 / (degree as f64 + 1.0)
                };
                let got = rule.integrate(-1.0, 1.0, |x| x.powi(degree as i32));
                assert!((got - exact).abs() <= 1e-14, "n={n} degree={degree}");
            }
        }
    }

    #[test]
    fn substitution_analytic_values() {
        let rule = gauss_legendre_rule(64);
        for d in [0.0f64, 0.3, 0.7, 1.2, 1.5] {
            let plus = SqrtWeightedIntegral::new(d, SqrtWeight::Sqrt).unwrap();
            let v = integrate_weighted(&plus, f64::sin, &rule);
            assert!((v - PI / 4.0 * d.cos().powi(2)).abs() <= 1e-12, "d={d}");
            let minus = SqrtWeightedIntegral::new(d, SqrtWeight::InverseSqrt).unwrap();
            let v = integrate_weighted(&minus, f64::sin, &rule);
            assert!((v - FRAC_PI_2).abs() <= 1e-12, "d={d}");

            assert!((integrate_weighted_dcos(&plus, |_| 1.0, &rule) - plus.mass()).abs() <= 1e-12);
            assert!(
                (integrate_weighted_dcos(&minus, |_| 1.0, &rule) - minus.mass()).abs() <= 1e-12
            );
        }
    }

    #[test]
    fn vanishing_interval() {
        let spec = SqrtWeightedIntegral::new(FRAC_PI_2 - 1e-6, SqrtWeight::Sqrt).unwrap();
        let v = integrate_weighted(&spec, |u| 3.0 * u.cos() + 2.0, &gauss_legendre_rule(16));
        assert!(v.abs() < 1e-9);
    }

    #[test]
    fn rejects_upper_endpoint() {
        assert!(SqrtWeightedIntegral::new(FRAC_PI_2, SqrtWeight::Sqrt).is_err());
        assert!(SqrtWeightedIntegral::new(-0.1, SqrtWeight::Sqrt).is_err());
    }

    #[test]
    fn adaptive_polynomial() {
        // sin(u) times a degree-6 polynomial in cos(u) is a polynomial in sin(φ).
        let spec = SqrtWeightedIntegral::new(0.4, SqrtWeight::InverseSqrt).unwrap();
        let g = |u: f64| u.sin() * (1.0 + u.cos().powi(6));
        let est = adaptive_integrate(&spec, g, 1e-13).unwrap();
        assert_eq!(est.nodes, 2 * ADAPTIVE_START);
        let direct = integrate_weighted(&spec, g, &gauss_legendre_rule(16));
        assert!((est.value - direct).abs() <= 1e-14);
    }

    #[test]
    fn adaptive_unreachable_tolerance() {
        let spec = SqrtWeightedIntegral::new(0.2, SqrtWeight::Sqrt).unwrap();
        let err = adaptive_integrate(&spec, |u| (40.0 * u).sin() * u.sin(), 1e-30).unwrap_err();
        assert!(matches!(
            err,
            Error::NonConvergence {
                nodes: ADAPTIVE_CAP,
                ..
            }
        ));
    }

    #[test]
    fn adaptive_interval_gaussian() {
        let est =
            adaptive_interval(-6.0, 6.0, |x| (-x * x).exp(), Convergence::absolute(1e-13)).unwrap();
        assert_relative_eq!(est.value, PI.sqrt(), max_relative = 1e-13);
    }
}
