//! Theta-type series `θ_m(t;u) = Σ_l exp(-4t(l+(m-1)/2)²) cos((2l+m-1)u)`,
//! their ladder transforms `L^j θ_m`, `Ψ_j = sin(u) L^j θ_m`, and a direct
//! evaluator of the classical `ϑ₂(z, τ)` for purely imaginary `τ`.
//!
//! All sums are cut with a rigorous tail bound: if `b_l` bounds the `l`-th
//! term and the ratios `b_{l+1}/b_l` are non-increasing, the tail from `L`
//! on is at most `b_L / (1 - b_{L+1}/b_L)` once that ratio drops below one.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::orthopoly::{cosine_ladder, gegenbauer_sequence};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_L_MAX_CAP: usize = 100_000;

/// Where an infinite series is cut.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    /// Absolute bound on the discarded tail.
    pub tol: f64,
    pub l_max_cap: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            tol: DEFAULT_TOL,
            l_max_cap: DEFAULT_L_MAX_CAP,
        }
    }
}

impl TruncationPolicy {
    pub fn new(tol: f64, l_max_cap: usize) -> Result<Self> {
        if !(tol > 0.0) || l_max_cap < 1 {
            return Err(Error::domain(format!(
                "truncation policy needs tol > 0 and cap >= 1, got tol={tol}, cap={l_max_cap}"
            )));
        }
        Ok(TruncationPolicy { tol, l_max_cap })
    }

    pub fn with_tol(tol: f64) -> Result<Self> {
        Self::new(tol, DEFAULT_L_MAX_CAP)
    }
}

/// Point of evaluation of `θ_m(t;u)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaQuery {
    pub m: usize,
    pub t: f64,
    pub u: f64,
}

impl ThetaQuery {
    pub fn new(m: usize, t: f64, u: f64) -> Result<Self> {
        let q = ThetaQuery { m, t, u };
        q.validate()?;
        Ok(q)
    }

    fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::domain(format!(
                "theta subscript must be >= 2, got {}",
                self.m
            )));
        }
        if !(self.t > 0.0) || !self.t.is_finite() {
            return Err(Error::domain(format!(
                "diffusion time must be positive, got {}",
                self.t
            )));
        }
        if !self.u.is_finite() {
            return Err(Error::domain("angle must be finite"));
        }
        Ok(())
    }
}

/// A truncated sum together with its truncation certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesEstimate {
    pub value: f64,
    pub terms: usize,
    pub error_bound: f64,
}

/// Smallest `L >= start` whose tail bound is below `tol`, with that bound.
///
/// `bound(l)` must dominate the `l`-th term and have non-increasing
/// successive ratios from `start` on.
pub(crate) fn truncation_index(
    bound: impl Fn(usize) -> f64,
    start: usize,
    tol: f64,
    cap: usize,
) -> Result<(usize, f64)> {
    let mut current = bound(start);
    for l in start..cap {
        let next = bound(l + 1);
        if next.is_nan() || current.is_nan() {
            return Err(Error::domain(format!(
                "term bound is not a number at index {l}"
            )));
        }
        let tail = if current == 0.0 {
            0.0
        } else if next < current {
            current / (1.0 - next / current)
        } else {
            f64::INFINITY
        };
        if tail <= tol {
            return Ok((l, tail));
        }
        current = next;
    }
    Err(Error::TruncationCap { cap, tol })
}

/// `L^j θ_m(t; ·)` with its coefficients and cut-off fixed once, so it can be
/// evaluated at many angles (quadrature nodes) cheaply.
///
/// `j = 0` is `θ_m` itself.
#[derive(Debug, Clone)]
pub struct LadderTheta {
    m: usize,
    j: usize,
    /// `exp(-4t(l+c)²)` times the ladder scale, for `l < terms`.
    coefficients: Vec<f64>,
    error_bound: f64,
}

impl LadderTheta {
    pub fn new(m: usize, j: usize, t: f64, policy: &TruncationPolicy) -> Result<Self> {
        Self::rescaled(m, j, t, 0.0, policy)
    }

    /// `exp(log_factor) · L^j θ_m`. The factor is folded into each exponent,
    /// so large prefactors such as `exp((m-1)²t)` never overflow on their own.
    /// The tail bound in `policy` applies to the rescaled series.
    pub fn rescaled(
        m: usize,
        j: usize,
        t: f64,
        log_factor: f64,
        policy: &TruncationPolicy,
    ) -> Result<Self> {
        ThetaQuery::new(m, t, 0.0)?;
        if !log_factor.is_finite() {
            return Err(Error::domain("log factor must be finite"));
        }
        let offset = (m as f64 - 1.0) / 2.0;
        let weight = |l: usize| (log_factor - 4.0 * t * (l as f64 + offset).powi(2)).exp();
        let frequency = |l: usize| 2 * l + m - 1;
        // First index whose harmonic survives L^j.
        let start = if j == 0 {
            0
        } else {
            (j + 1).saturating_sub(m).div_ceil(2)
        };
        let bound = |l: usize| {
            if j == 0 {
                weight(l)
            } else {
                weight(l) * cosine_ladder(j, frequency(l)).sup_bound()
            }
        };
        let (terms, error_bound) = truncation_index(bound, start, policy.tol, policy.l_max_cap)?;
        let coefficients = (0..terms)
            .map(|l| {
                if j == 0 {
                    weight(l)
                } else {
                    weight(l) * cosine_ladder(j, frequency(l)).scale
                }
            })
            .collect();
        Ok(LadderTheta {
            m,
            j,
            coefficients,
            error_bound,
        })
    }

    pub fn terms(&self) -> usize {
        self.coefficients.len()
    }

    /// Absolute bound on the discarded tail, uniform in the angle.
    pub fn error_bound(&self) -> f64 {
        self.error_bound
    }

    pub fn eval(&self, u: f64) -> f64 {
        if self.j == 0 {
            return self
                .coefficients
                .iter()
                .enumerate()
                .map(|(l, c)| c * ((2 * l + self.m - 1) as f64 * u).cos())
                .sum();
        }
        self.eval_at_cos(u.cos())
    }

    /// Evaluates at `x = cos u`. For `j >= 1` every term is a Gegenbauer
    /// polynomial of the same order `j`, so one recurrence serves all terms.
    pub fn eval_at_cos(&self, x: f64) -> f64 {
        if self.terms() == 0 {
            return 0.0;
        }
        let top = 2 * (self.terms() - 1) + self.m - 1;
        if self.j == 0 {
            let cheb = chebyshev_sequence(x, top + 1);
            return self
                .coefficients
                .iter()
                .enumerate()
                .map(|(l, c)| c * cheb[2 * l + self.m - 1])
                .sum();
        }
        if top < self.j {
            return 0.0;
        }
        let gegen = gegenbauer_sequence(self.j as f64, x, top - self.j + 1);
        self.coefficients
            .iter()
            .enumerate()
            .filter_map(|(l, c)| {
                let q = 2 * l + self.m - 1;
                q.checked_sub(self.j).map(|d| c * gegen[d])
            })
            .sum()
    }
}

fn chebyshev_sequence(x: f64, count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let v = match k {
            0 => 1.0,
            1 => x,
            _ => 2.0 * x * out[k - 1] - out[k - 2],
        };
        out.push(v);
    }
    out
}

pub fn theta_estimate(q: &ThetaQuery, policy: &TruncationPolicy) -> Result<SeriesEstimate> {
    q.validate()?;
    let series = LadderTheta::new(q.m, 0, q.t, policy)?;
    Ok(SeriesEstimate {
        value: series.eval(q.u),
        terms: series.terms(),
        error_bound: series.error_bound(),
    })
}

/// `θ_m(t;u)`, absolute error at most `policy.tol`.
pub fn theta(q: &ThetaQuery, policy: &TruncationPolicy) -> Result<f64> {
    theta_estimate(q, policy).map(|e| e.value)
}

/// `L^j θ_m(t;u)` without the `sin u` factor.
pub fn ladder_theta(j: usize, q: &ThetaQuery, policy: &TruncationPolicy) -> Result<f64> {
    q.validate()?;
    Ok(LadderTheta::new(q.m, j, q.t, policy)?.eval(q.u))
}

pub fn psi_estimate(j: usize, q: &ThetaQuery, policy: &TruncationPolicy) -> Result<SeriesEstimate> {
    if j == 0 {
        return Err(Error::domain("Psi needs a positive ladder exponent"));
    }
    q.validate()?;
    let series = LadderTheta::new(q.m, j, q.t, policy)?;
    let s = q.u.sin();
    Ok(SeriesEstimate {
        value: s * series.eval(q.u),
        terms: series.terms(),
        error_bound: s.abs() * series.error_bound(),
    })
}

/// `Ψ_j(t,u) = sin(u) L^j θ_m(t;u)`, assembled termwise through the cosine ladder.
pub fn psi(j: usize, q: &ThetaQuery, policy: &TruncationPolicy) -> Result<f64> {
    psi_estimate(j, q, policy).map(|e| e.value)
}

/// `ϑ₂(z, iτ) = 2 Σ_l exp(-πτ(l+1/2)²) cos((2l+1)πz)`, summed directly.
pub fn jacobi_theta2_reference(z: f64, tau_imag: f64, policy: &TruncationPolicy) -> Result<f64> {
    if !(tau_imag > 0.0) || !tau_imag.is_finite() {
        return Err(Error::domain(format!(
            "Im(tau) must be positive, got {tau_imag}"
        )));
    }
    let term_bound = |l: usize| 2.0 * (-PI * tau_imag * (l as f64 + 0.5).powi(2)).exp();
    let (terms, _) = truncation_index(term_bound, 0, policy.tol, policy.l_max_cap)?;
    Ok((0..terms)
        .map(|l| term_bound(l) * ((2 * l + 1) as f64 * PI * z).cos())
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fd;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    fn direct_theta(m: usize, t: f64, u: f64, terms: usize) -> f64 {
        let c = (m as f64 - 1.0) / 2.0;
        (0..terms)
            .map(|l| (-4.0 * t * (l as f64 + c).powi(2)).exp() * ((2 * l + m - 1) as f64 * u).cos())
            .sum()
    }

    fn policy() -> TruncationPolicy {
        TruncationPolicy::default()
    }

    #[test]
    fn theta_vanishes_at_quarter_turn() {
        let v = theta(&ThetaQuery::new(4, 0.5, FRAC_PI_2).unwrap(), &policy()).unwrap();
        assert!(v.abs() < 1e-15);
    }

    #[test]
    fn theta_single_term_domination() {
        let v = theta(&ThetaQuery::new(4, 10.0, 0.0).unwrap(), &policy()).unwrap();
        let oracle = direct_theta(4, 10.0, 0.0, 1000);
        assert_relative_eq!(v, oracle, max_relative = 1e-15);
        assert_relative_eq!(v, (-90.0f64).exp(), max_relative = 1e-15);
    }

    #[test]
    fn theta_m2_is_half_theta2() {
        let (t, u) = (0.3, 0.4);
        let v = theta(&ThetaQuery::new(2, t, u).unwrap(), &policy()).unwrap();
        let reference = 0.5 * jacobi_theta2_reference(u / PI, 4.0 * t / PI, &policy()).unwrap();
        assert!((v - reference).abs() < 1e-12);
    }

    #[test]
    fn theta2_reference_examples() {
        for tau in [0.1, 0.7, 3.0] {
            assert!(jacobi_theta2_reference(0.5, tau, &policy()).unwrap().abs() < 1e-14);
        }
        let t = 0.5;
        let at_zero = jacobi_theta2_reference(0.0, 4.0 * t / PI, &policy()).unwrap();
        let th = theta(&ThetaQuery::new(2, t, 0.0).unwrap(), &policy()).unwrap();
        assert!((0.5 * at_zero - th).abs() < 1e-12);
        let t = 0.8;
        let z = 0.27;
        let r = 0.5 * jacobi_theta2_reference(z, 4.0 * t / PI, &policy()).unwrap();
        let th = theta(&ThetaQuery::new(2, t, z * PI).unwrap(), &policy()).unwrap();
        assert!((r - th).abs() < 1e-12);
        assert!(jacobi_theta2_reference(0.1, 0.0, &policy()).is_err());
    }

    #[test]
    fn psi_single_term_at_long_time() {
        // l = 0: L^3 cos(3u) = 3 * 2^2 * 2! * C_0^3 = 24.
        let (t, u) = (5.0, 0.8f64);
        let v = psi(3, &ThetaQuery::new(4, t, u).unwrap(), &policy()).unwrap();
        let analytic = 24.0 * u.sin() * (-9.0 * t).exp();
        assert_relative_eq!(v, analytic, max_relative = 1e-10);

        let theta_200 = |x: f64| direct_theta(4, t, x, 200);
        let fd_value = u.sin() * fd::apply_l(&theta_200, u, 3);
        assert_relative_eq!(v, fd_value, max_relative = 1e-6);
    }

    #[test]
    fn psi_at_quarter_turn_matches_finite_differences() {
        let t = 0.5;
        for (m, j) in [(2, 1), (4, 3), (4, 2), (6, 3)] {
            let v = psi(j, &ThetaQuery::new(m, t, FRAC_PI_2).unwrap(), &policy()).unwrap();
            let th = |x: f64| direct_theta(m, t, x, 200);
            let fd_value = fd::apply_l(&th, FRAC_PI_2, j);
            assert!(v.is_finite());
            assert!(
                (v - fd_value).abs() <= 1e-5 * v.abs().max(1.0),
                "m={m} j={j}: {v} vs {fd_value}"
            );
        }
    }

    #[test]
    fn psi_one_is_sine_series() {
        let t = 0.5;
        for u in [0.1f64, 0.9, 2.0, 3.0] {
            let v = psi(1, &ThetaQuery::new(2, t, u).unwrap(), &policy()).unwrap();
            let analytic: f64 = (0..60)
                .map(|l| {
                    let q = (2 * l + 1) as f64;
                    q * (-4.0 * t * (l as f64 + 0.5).powi(2)).exp() * (q * u).sin()
                })
                .sum();
            assert!((v - analytic).abs() < 1e-12);
        }
    }

    #[test]
    fn psi_is_finite_at_poles() {
        for u in [0.0, PI] {
            let v = psi(3, &ThetaQuery::new(4, 0.3, u).unwrap(), &policy()).unwrap();
            assert!(v.abs() < 1e-12);
        }
        assert!(psi(0, &ThetaQuery::new(4, 0.3, 0.5).unwrap(), &policy()).is_err());
    }

    #[test]
    fn theta_matches_shifted_theta2_on_grid() {
        for n in 1..=2usize {
            for t in [0.1, 0.5, 2.0] {
                for i in 0..50 {
                    let x = FRAC_PI_2 * i as f64 / 49.0;
                    let lhs = theta(&ThetaQuery::new(2 * n + 2, t, x).unwrap(), &policy()).unwrap();
                    let half =
                        0.5 * jacobi_theta2_reference(x / PI, 4.0 * t / PI, &policy()).unwrap();
                    let correction: f64 = (0..n)
                        .map(|l| {
                            (-4.0 * t * (l as f64 + 0.5).powi(2)).exp()
                                * ((2 * l + 1) as f64 * x).cos()
                        })
                        .sum();
                    assert!(
                        (lhs - (half - correction)).abs() <= 1e-11,
                        "n={n} t={t} x={x}"
                    );
                }
            }
        }
    }

    #[test]
    fn psi_matches_finite_differences_on_grid() {
        // j < m: the regime where the ladder is used. For j >= m the low harmonics
        // are annihilated and the FD oracle only sees roundoff of the dominant term.
        for m in [2usize, 4, 6] {
            for j in (1..=3usize).filter(|&j| j < m) {
                for t in [0.2, 0.5, 1.5] {
                    let grid: Vec<f64> = (0..=10)
                        .map(|i| 0.2 + (FRAC_PI_2 - 0.3) * i as f64 / 10.0)
                        .collect();
                    let exact: Vec<f64> = grid
                        .iter()
                        .map(|&u| psi(j, &ThetaQuery::new(m, t, u).unwrap(), &policy()).unwrap())
                        .collect();
                    let scale = exact.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                    let th = |x: f64| direct_theta(m, t, x, 200);
                    for (&u, e) in grid.iter().zip(&exact) {
                        let fd_value = u.sin() * fd::apply_l(&th, u, j);
                        // The absolute truncation tolerance covers series cut to zero terms.
                        assert!(
                            (fd_value - e).abs() <= 1e-5 * scale + policy().tol,
                            "m={m} j={j} t={t} u={u}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn truncation_is_sound() {
        let p = policy();
        for (m, j, t) in [
            (2, 0, 0.01),
            (4, 3, 0.05),
            (8, 7, 0.1),
            (4, 0, 1e-4),
            (6, 5, 1e-3),
        ] {
            let series = LadderTheta::new(m, j, t, &p).unwrap();
            let terms = series.terms();
            let c = (m as f64 - 1.0) / 2.0;
            for u in [0.3f64, 1.0, 1.4] {
                // What doubling the cut-off would add.
                let extra: f64 = (terms..2 * terms.max(1))
                    .map(|l| {
                        let w = (-4.0 * t * (l as f64 + c).powi(2)).exp();
                        let q = 2 * l + m - 1;
                        if j == 0 {
                            w * (q as f64 * u).cos()
                        } else {
                            w * cosine_ladder(j, q).eval(u.cos())
                        }
                    })
                    .sum();
                assert!(extra.abs() < p.tol, "m={m} j={j} t={t}");
                assert!(series.error_bound() < p.tol);
            }
        }
    }

    #[test]
    fn theta_parity() {
        for u in [0.1, 0.8, 2.5] {
            let a = theta(&ThetaQuery::new(6, 0.2, u).unwrap(), &policy()).unwrap();
            let b = theta(&ThetaQuery::new(6, 0.2, -u).unwrap(), &policy()).unwrap();
            assert!((a - b).abs() <= 1e-14);
        }
    }

    #[test]
    fn cap_is_reported() {
        let p = TruncationPolicy::new(1e-12, 10).unwrap();
        let err = theta(&ThetaQuery::new(4, 1e-4, 0.2).unwrap(), &p).unwrap_err();
        assert!(matches!(err, Error::TruncationCap { cap: 10, .. }));
    }

    #[test]
    fn invalid_queries() {
        assert!(ThetaQuery::new(1, 0.5, 0.0).is_err());
        assert!(ThetaQuery::new(4, 0.0, 0.0).is_err());
        assert!(TruncationPolicy::new(0.0, 10).is_err());
    }
}
