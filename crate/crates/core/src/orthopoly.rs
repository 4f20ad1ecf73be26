//! Jacobi and Gegenbauer polynomials, and the Gegenbauer ladder for the
//! operator `L = -(1/sin u) d/du`.
//!
//! On functions of `x = cos u`, `L` is exactly `d/dx`, so powers of `L` act on
//! Gegenbauer polynomials through
//!
//! ```text
//! L^m C_l^λ(cos u) = 2^m (λ)_m C_{l-m}^{λ+m}(cos u)
//! ```
//!
//! and on a single cosine harmonic (`L cos(qu) = q C_{q-1}^1(cos u)`) through
//!
//! ```text
//! L^m cos(qu) = q 2^{m-1} (m-1)! C_{q-m}^m(cos u).
//! ```

use crate::error::{Error, Result};

/// Above this many factors, rising factorials are accumulated as a sum of logs.
const LOG_SPACE_THRESHOLD: usize = 150;

/// Degree and weight parameters of `P_l^{(α,β)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiParams {
    pub degree: usize,
    pub alpha: f64,
    pub beta: f64,
}

impl JacobiParams {
    pub fn new(degree: usize, alpha: f64, beta: f64) -> Result<Self> {
        let params = JacobiParams {
            degree,
            alpha,
            beta,
        };
        params.validate()?;
        Ok(params)
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha > -0.5 && self.beta > -0.5) {
            return Err(Error::domain(format!(
                "Jacobi weights must exceed -1/2, got alpha={}, beta={}",
                self.alpha, self.beta
            )));
        }
        Ok(())
    }
}

/// Degree and order of `C_l^λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GegenbauerParams {
    pub degree: usize,
    pub lambda: f64,
}

impl GegenbauerParams {
    pub fn new(degree: usize, lambda: f64) -> Result<Self> {
        let params = GegenbauerParams { degree, lambda };
        params.validate()?;
        Ok(params)
    }

    fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) {
            return Err(Error::domain(format!(
                "Gegenbauer order must be positive, got {}",
                self.lambda
            )));
        }
        Ok(())
    }
}

fn check_unit_interval(x: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::domain(format!("argument {x} outside [-1, 1]")));
    }
    Ok(())
}

/// `P_l^{(α,β)}(x)` by forward three-term recurrence in `l`.
pub fn jacobi_p(params: &JacobiParams, x: f64) -> Result<f64> {
    params.validate()?;
    check_unit_interval(x)?;
    let values = jacobi_sequence(params.alpha, params.beta, x, params.degree + 1);
    Ok(values[params.degree])
}

/// `[P_0(x), ..., P_{count-1}(x)]` for fixed `(α, β)`. Arguments are not validated.
pub fn jacobi_sequence(alpha: f64, beta: f64, x: f64, count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    out.push(1.0);
    if count == 1 {
        return out;
    }
    let ab = alpha + beta;
    out.push((alpha + 1.0) + (ab + 2.0) * (x - 1.0) / 2.0);
    for n in 1..count - 1 {
        let nf = n as f64;
        let s = 2.0 * nf + ab;
        let a = 2.0 * (nf + 1.0) * (nf + ab + 1.0) * s;
        let b = (s + 1.0) * (alpha * alpha - beta * beta);
        let c = s * (s + 1.0) * (s + 2.0);
        let d = 2.0 * (nf + alpha) * (nf + beta) * (s + 2.0);
        let next = ((b + c * x) * out[n] - d * out[n - 1]) / a;
        out.push(next);
    }
    out
}

/// `P_l^{(α,β)}(1) = binom(l + α, l)`.
pub fn jacobi_endpoint(degree: usize, alpha: f64) -> f64 {
    binomial(degree as f64 + alpha, degree)
}

/// `binom(top, k) = (top-k+1)_k / k!`, as a product of ratios so neither
/// factor overflows on its own.
pub fn binomial(top: f64, k: usize) -> f64 {
    let base = top - k as f64;
    if k > LOG_SPACE_THRESHOLD && base > -1.0 {
        let log_sum: f64 = (1..=k).map(|j| ((base + j as f64) / j as f64).ln()).sum();
        return log_sum.exp();
    }
    (1..=k).fold(1.0, |acc, j| acc * (base + j as f64) / j as f64)
}

/// `C_l^λ(x)` by forward three-term recurrence.
pub fn gegenbauer_c(params: &GegenbauerParams, x: f64) -> Result<f64> {
    params.validate()?;
    check_unit_interval(x)?;
    let values = gegenbauer_sequence(params.lambda, x, params.degree + 1);
    Ok(values[params.degree])
}

/// `[C_0^λ(x), ..., C_{count-1}^λ(x)]`. Arguments are not validated.
pub fn gegenbauer_sequence(lambda: f64, x: f64, count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    out.push(1.0);
    if count == 1 {
        return out;
    }
    out.push(2.0 * lambda * x);
    for n in 1..count - 1 {
        let nf = n as f64;
        let next = (2.0 * (nf + lambda) * x * out[n] - (nf + 2.0 * lambda - 1.0) * out[n - 1])
            / (nf + 1.0);
        out.push(next);
    }
    out
}

/// `C_l^λ(1) = binom(l + 2λ - 1, l)`, the sup of `|C_l^λ|` on `[-1, 1]` for `λ > 0`.
pub fn gegenbauer_endpoint(degree: usize, lambda: f64) -> f64 {
    binomial(degree as f64 + 2.0 * lambda - 1.0, degree)
}

/// Rising factorial `(x)_m = x (x+1) ... (x+m-1)`.
pub fn pochhammer(x: f64, m: usize) -> f64 {
    if m > LOG_SPACE_THRESHOLD && x > 0.0 {
        let log_sum: f64 = (0..m).map(|j| (x + j as f64).ln()).sum();
        return log_sum.exp();
    }
    (0..m).fold(1.0, |acc, j| acc * (x + j as f64))
}

/// `scale * C_degree^order(cos u)`, or the zero function when `degree < 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderResult {
    pub scale: f64,
    pub degree: i64,
    pub order: f64,
}

impl LadderResult {
    pub fn is_zero(&self) -> bool {
        self.degree < 0
    }

    /// Evaluates the represented function at `x = cos u`.
    pub fn eval(&self, x: f64) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let values = gegenbauer_sequence(self.order, x, self.degree as usize + 1);
        self.scale * values[self.degree as usize]
    }

    /// Sup norm on `[-1, 1]`.
    pub fn sup_bound(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        self.scale * gegenbauer_endpoint(self.degree as usize, self.order)
    }
}

/// `L^m C_l^λ(cos u) = 2^m (λ)_m C_{l-m}^{λ+m}(cos u)`.
pub fn ladder_apply(m: usize, source: &GegenbauerParams) -> LadderResult {
    LadderResult {
        scale: 2f64.powi(m as i32) * pochhammer(source.lambda, m),
        degree: source.degree as i64 - m as i64,
        order: source.lambda + m as f64,
    }
}

/// `L^m cos(q u) = q 2^{m-1} (m-1)! C_{q-m}^m(cos u)`.
///
/// Panics if `m == 0` or `q == 0`: neither `cos(qu)` nor a constant is a
/// Gegenbauer multiple of positive order.
pub fn cosine_ladder(m: usize, q: usize) -> LadderResult {
    assert!(m >= 1 && q >= 1, "cosine_ladder requires m >= 1 and q >= 1");
    LadderResult {
        scale: q as f64 * 2f64.powi(m as i32 - 1) * pochhammer(1.0, m - 1),
        degree: q as i64 - m as i64,
        order: m as f64,
    }
}
