//! Heat kernels `E_{n,k}(t; d)` of `P^n(C)` (`k = 1`) and `P^n(H)` (`k = 2`)
//! as functions of time and geodesic distance.
//!
//! With `a = k(n+1)` there are two representations:
//!
//! * spectral: `π^{-kn} Σ_l (2l+a-1) (l+a-2)!/(l+k-1)! e^{-4l(l+a-1)t} P_l^{(kn-1,k-1)}(cos 2d)`
//! * integral: `c e^{(a-1)²t} cos(d)^{-2(k-1)} ∫_d^{π/2} (cos²d - cos²u)^{k-3/2} L^{a-1} θ_a(t;u) (-d cos u)`
//!   with `c = 1 / (2^{kn-2} π^{kn+1})`.
//!
//! A returned [`KernelValue`] satisfies `est_error <= tol · max(1, |value|)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{Field, SpaceDescriptor};
use crate::orthopoly::{jacobi_endpoint, jacobi_sequence};
use crate::quadrature::{
    adaptive_integrate_dcos, adaptive_integrate_with, Convergence, SqrtWeight, SqrtWeightedIntegral,
};
use crate::thetapsi::{truncation_index, LadderTheta, TruncationPolicy, DEFAULT_L_MAX_CAP};

/// Hard cap on the number of spectral terms.
pub const SERIES_TERM_CAP: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Series,
    Integral,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Series => "series",
            Method::Integral => "integral",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelQuery {
    pub space: SpaceDescriptor,
    pub t: f64,
    pub d: f64,
    pub method: Method,
    pub tol: f64,
}

impl KernelQuery {
    pub fn new(space: SpaceDescriptor, t: f64, d: f64, method: Method, tol: f64) -> Result<Self> {
        check_point(t, d, tol)?;
        Ok(KernelQuery {
            space,
            t,
            d,
            method,
            tol,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub value: f64,
    /// Series terms or quadrature nodes, depending on the method.
    pub terms_or_nodes: usize,
    pub est_error: f64,
}

fn check_point(t: f64, d: f64, tol: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!(
            "time t={t} must be positive and finite"
        )));
    }
    if !(0.0..std::f64::consts::FRAC_PI_2).contains(&d) {
        return Err(Error::domain(format!(
            "distance d={d} must lie in [0, pi/2)"
        )));
    }
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::domain(format!("tolerance {tol} must be positive")));
    }
    Ok(())
}

/// `m!/j!` for `j <= m`, as a product of `m - j` factors.
fn factorial_ratio(m: usize, j: usize) -> f64 {
    (j + 1..=m).fold(1.0, |acc, i| acc * i as f64)
}

/// `lim_{t→∞} E = (a-1) (a-2)! / ((k-1)! π^{kn}) = 1 / Vol(M)`.
pub fn stationary_value(space: &SpaceDescriptor) -> f64 {
    let (k, n) = (space.k(), space.n());
    let a = k * (n + 1);
    (a - 1) as f64 * factorial_ratio(a - 2, k - 1) / PI.powi((k * n) as i32)
}

pub fn evaluate(q: &KernelQuery) -> Result<KernelValue> {
    unified(&q.space, q.t, q.d, q.tol, q.method)
}

/// `E_{n,k}(t; d)` by the selected representation.
pub fn unified(
    space: &SpaceDescriptor,
    t: f64,
    d: f64,
    tol: f64,
    method: Method,
) -> Result<KernelValue> {
    check_point(t, d, tol)?;
    match method {
        Method::Series => unified_series(space, t, d, tol),
        Method::Integral => unified_integral(space, t, d, tol),
    }
}

/// Sums `Σ_l coefficient(l) e^{-4l(l+shift)t} P_l^{(α,β)}(cos 2d) / π^{power}`.
///
/// `coefficients` yields the first `count` coefficients in order; `bound`
/// gives the same coefficient for any `l` and is only used for the cut-off.
fn spectral_sum(
    (alpha, beta): (f64, f64),
    shift: f64,
    power: i32,
    (t, d, tol): (f64, f64, f64),
    bound: impl Fn(usize) -> f64,
    coefficients: impl Fn(usize) -> Vec<f64>,
) -> Result<KernelValue> {
    let norm = PI.powi(power);
    let decay = |l: usize| (-4.0 * l as f64 * (l as f64 + shift) * t).exp();
    // |P_l^{(α,β)}| <= P_l^{(α,β)}(1) on [-1, 1] when α >= β.
    let term_bound = |l: usize| bound(l) * decay(l) * jacobi_endpoint(l, alpha);
    let (count, tail) =
        truncation_index(term_bound, 0, tol * norm, SERIES_TERM_CAP).map_err(|e| match e {
            Error::TruncationCap { cap, .. } => Error::TruncationCap { cap, tol },
            other => other,
        })?;
    let p = jacobi_sequence(alpha, beta, (2.0 * d).cos(), count);
    let sum: f64 = coefficients(count)
        .iter()
        .zip(&p)
        .enumerate()
        .map(|(l, (c, p))| c * decay(l) * p)
        .sum();
    Ok(KernelValue {
        value: sum / norm,
        terms_or_nodes: count,
        est_error: tail / norm,
    })
}

fn unified_series(space: &SpaceDescriptor, t: f64, d: f64, tol: f64) -> Result<KernelValue> {
    let (k, n) = (space.k(), space.n());
    let a = k * (n + 1);
    let bound = |l: usize| (2 * l + a - 1) as f64 * factorial_ratio(l + a - 2, l + k - 1);
    // (l+a-2)!/(l+k-1)! updated by (l+a-1)/(l+k) per step.
    let coefficients = |count: usize| {
        let mut ratio = factorial_ratio(a - 2, k - 1);
        (0..count)
            .map(|l| {
                let c = (2 * l + a - 1) as f64 * ratio;
                ratio *= (l + a - 1) as f64 / (l + k) as f64;
                c
            })
            .collect()
    };
    spectral_sum(
        ((k * n - 1) as f64, (k - 1) as f64),
        (a - 1) as f64,
        (k * n) as i32,
        (t, d, tol),
        bound,
        coefficients,
    )
}

/// `H_n(t; d)` on `P^n(H)` from its spectral series.
pub fn hpn_series(n: usize, t: f64, d: f64, tol: f64) -> Result<KernelValue> {
    SpaceDescriptor::hpn(n)?;
    check_point(t, d, tol)?;
    let coefficient = |l: usize| (2 * l + 2 * n + 1) as f64 * factorial_ratio(l + 2 * n, l + 1);
    spectral_sum(
        ((2 * n - 1) as f64, 1.0),
        (2 * n + 1) as f64,
        (2 * n) as i32,
        (t, d, tol),
        coefficient,
        |count| (0..count).map(coefficient).collect(),
    )
}

/// `Q_n(t; d)` on `P^n(C)` from its spectral series.
pub fn cpn_series(n: usize, t: f64, d: f64, tol: f64) -> Result<KernelValue> {
    SpaceDescriptor::cpn(n)?;
    check_point(t, d, tol)?;
    let coefficient = |l: usize| (2 * l + n) as f64 * factorial_ratio(l + n - 1, l);
    spectral_sum(
        ((n - 1) as f64, 0.0),
        n as f64,
        n as i32,
        (t, d, tol),
        coefficient,
        |count| (0..count).map(coefficient).collect(),
    )
}

/// Tail tolerance handed to the theta series so that its contribution to the
/// kernel stays below a quarter of `tol`.
fn theta_policy(tol: f64, scale: f64, mass: f64) -> Result<TruncationPolicy> {
    TruncationPolicy::new(0.25 * tol / (scale * mass), DEFAULT_L_MAX_CAP)
}

fn quadrature_convergence(tol: f64, scale: f64) -> Convergence {
    Convergence {
        abs: 0.5 * tol / scale,
        rel: 0.5 * tol,
    }
}

/// `scale · ∫ w(u) · (sin u) L^j θ_m(u) du` in the `u` parametrization, with
/// `exp(log_factor)` folded into the theta coefficients.
fn ladder_integral_u(
    weight: SqrtWeight,
    (m, j, log_factor, scale): (usize, usize, f64, f64),
    (t, d, tol): (f64, f64, f64),
) -> Result<KernelValue> {
    let spec = SqrtWeightedIntegral::new(d, weight)?;
    let ladder =
        LadderTheta::rescaled(m, j, t, log_factor, &theta_policy(tol, scale, spec.mass())?)?;
    let est = adaptive_integrate_with(
        &spec,
        |u| u.sin() * ladder.eval(u),
        quadrature_convergence(tol, scale),
    )?;
    Ok(KernelValue {
        value: scale * est.value,
        terms_or_nodes: est.nodes,
        est_error: scale * (est.diff + ladder.error_bound() * spec.mass()),
    })
}

fn unified_integral(space: &SpaceDescriptor, t: f64, d: f64, tol: f64) -> Result<KernelValue> {
    let (k, n) = (space.k(), space.n());
    let a = k * (n + 1);
    let weight = match space.field() {
        Field::Complex => SqrtWeight::InverseSqrt,
        Field::Quaternionic => SqrtWeight::Sqrt,
    };
    let spec = SqrtWeightedIntegral::new(d, weight)?;
    let c = 2f64.powi(2 - (k * n) as i32) / PI.powi((k * n + 1) as i32);
    let scale = c / d.cos().powi(2 * (k as i32 - 1));
    let log_factor = ((a - 1) * (a - 1)) as f64 * t;
    let ladder = LadderTheta::rescaled(
        a,
        a - 1,
        t,
        log_factor,
        &theta_policy(tol, scale, spec.mass())?,
    )?;
    let est = adaptive_integrate_dcos(
        &spec,
        |x| ladder.eval_at_cos(x),
        quadrature_convergence(tol, scale),
    )?;
    Ok(KernelValue {
        value: scale * est.value,
        terms_or_nodes: est.nodes,
        est_error: scale * (est.diff + ladder.error_bound() * spec.mass()),
    })
}

/// `H_n(t; d)` from `∫_d^{π/2} √(cos²d - cos²u) Ψ_{2n+1}(t,u) du`.
pub fn hpn_integral(n: usize, t: f64, d: f64, tol: f64) -> Result<KernelValue> {
    SpaceDescriptor::hpn(n)?;
    check_point(t, d, tol)?;
    let m = 2 * n + 2;
    let scale = 1.0 / (2f64.powi(2 * n as i32 - 2) * PI.powi(2 * n as i32 + 1) * d.cos().powi(2));
    let log_factor = ((m - 1) * (m - 1)) as f64 * t;
    ladder_integral_u(SqrtWeight::Sqrt, (m, m - 1, log_factor, scale), (t, d, tol))
}

/// `Q_n(t; d)` from `∫_d^{π/2} L^n θ_{n+1}(t;u) sin u du / √(cos²d - cos²u)`.
pub fn cpn_integral(n: usize, t: f64, d: f64, tol: f64) -> Result<KernelValue> {
    SpaceDescriptor::cpn(n)?;
    check_point(t, d, tol)?;
    let scale = 1.0 / (2f64.powi(n as i32 - 2) * PI.powi(n as i32 + 1));
    let log_factor = (n * n) as f64 * t;
    ladder_integral_u(
        SqrtWeight::InverseSqrt,
        (n + 1, n, log_factor, scale),
        (t, d, tol),
    )
}

/// `Q_{2n+1}(t; d)` written with `Ψ_{2n+1}`, the odd-dimensional kernel that
/// sits above `P^n(H)`.
pub fn cpn_odd_integral(n: usize, t: f64, d: f64, tol: f64) -> Result<KernelValue> {
    SpaceDescriptor::hpn(n)?;
    check_point(t, d, tol)?;
    let m = 2 * n + 2;
    let scale = 1.0 / (2f64.powi(2 * n as i32 - 1) * PI.powi(2 * n as i32 + 2));
    let log_factor = ((m - 1) * (m - 1)) as f64 * t;
    ladder_integral_u(
        SqrtWeight::InverseSqrt,
        (m, m - 1, log_factor, scale),
        (t, d, tol),
    )
}

/// Both representations at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub series: KernelValue,
    pub integral: KernelValue,
}

impl Comparison {
    pub fn abs_diff(&self) -> f64 {
        (self.series.value - self.integral.value).abs()
    }

    pub fn rel_diff(&self) -> f64 {
        self.abs_diff() / self.series.value.abs()
    }
}

/// Evaluates the series tightly, then the integral at a tolerance scaled to
/// the series value so that `rel_tol` is meaningful for small kernels too.
pub fn compare_representations(
    space: &SpaceDescriptor,
    t: f64,
    d: f64,
    rel_tol: f64,
) -> Result<Comparison> {
    let series = unified(space, t, d, 1e-15, Method::Series)?;
    let integral_tol = (0.1 * rel_tol * series.value.abs())
        .max(1e-14 * series.value.abs())
        .max(f64::MIN_POSITIVE);
    let integral = unified(space, t, d, integral_tol, Method::Integral)?;
    Ok(Comparison { series, integral })
}
