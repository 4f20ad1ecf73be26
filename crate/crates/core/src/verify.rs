//! Numerical certification of the identities behind the kernels. Every check
//! produces a [`VerificationReport`]; a failing identity or a numerical error
//! becomes a failed report, never a panic.
//!
//! Internal accuracies are fixed and independent of the tolerance a report
//! is judged against, so a zero tolerance still records finite discrepancies.

use std::cmp::Ordering;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::fd;
use crate::geometry::{
    radial_laplacian_divergence_fd, radial_laplacian_fd, volume_density_unchecked, Field,
    SpaceDescriptor,
};
use crate::kernels::{compare_representations, stationary_value, unified, Method};
use crate::orthopoly::{
    gegenbauer_c, gegenbauer_endpoint, jacobi_p, ladder_apply, GegenbauerParams, JacobiParams,
};
use crate::quadrature::{
    adaptive_integrate_with, adaptive_interval, Convergence, SqrtWeight, SqrtWeightedIntegral,
};
use crate::thetapsi::{jacobi_theta2_reference, theta, ThetaQuery, TruncationPolicy};

/// Accuracy of quadratures and series inside the checks.
const INNER: Convergence = Convergence {
    abs: 1e-13,
    rel: 1e-13,
};
const INNER_SERIES_TOL: f64 = 1e-14;

/// Polynomial integrands can be large while their integral is small; the
/// attainable absolute accuracy is set by `magnitude`, a bound on `∫ |integrand|`.
fn scaled_inner(magnitude: f64) -> Convergence {
    Convergence {
        abs: INNER.abs.max(1e-14 * magnitude),
        rel: INNER.rel,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub identity_name: String,
    #[serde(serialize_with = "parameters_as_map")]
    pub parameters: Vec<(String, f64)>,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub tol: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn parameters_as_map<S: Serializer>(
    params: &[(String, f64)],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_map(params.iter().map(|(k, v)| (k, v)))
}

impl VerificationReport {
    /// Passes when `abs_err < tol · max(1, |rhs|)`: relative for large
    /// right-hand sides, absolute otherwise.
    pub fn new(identity: &str, parameters: &[(&str, f64)], lhs: f64, rhs: f64, tol: f64) -> Self {
        let abs_err = (lhs - rhs).abs();
        let rel_err = if abs_err == 0.0 {
            0.0
        } else {
            abs_err / rhs.abs()
        };
        let passed = abs_err < tol * rhs.abs().max(1.0);
        VerificationReport {
            identity_name: identity.to_string(),
            parameters: parameters
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect(),
            lhs,
            rhs,
            abs_err,
            rel_err,
            tol,
            passed,
            error: None,
        }
    }

    /// A check that could not be evaluated.
    pub fn failure(identity: &str, parameters: &[(&str, f64)], tol: f64, err: &Error) -> Self {
        let mut r = Self::new(identity, parameters, f64::NAN, f64::NAN, tol);
        r.passed = false;
        r.error = Some(err.to_string());
        r
    }

    fn from_result(
        identity: &str,
        parameters: &[(&str, f64)],
        tol: f64,
        sides: Result<(f64, f64)>,
    ) -> Self {
        match sides {
            Ok((lhs, rhs)) => Self::new(identity, parameters, lhs, rhs, tol),
            Err(e) => Self::failure(identity, parameters, tol, &e),
        }
    }

    pub fn parameter(&self, key: &str) -> Option<f64> {
        self.parameters
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| *v)
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("reports always serialize")
    }

    fn sort_key_cmp(&self, other: &Self) -> Ordering {
        self.identity_name.cmp(&other.identity_name).then_with(|| {
            for ((ka, va), (kb, vb)) in self.parameters.iter().zip(&other.parameters) {
                let o = ka.cmp(kb).then(va.total_cmp(vb));
                if o != Ordering::Equal {
                    return o;
                }
            }
            self.parameters.len().cmp(&other.parameters.len())
        })
    }
}

/// `∫_d^{π/2} [√(cos²d − cos²u)/cos²d] L^{2n}(C^1_{2l+2n}(cos u)) sin u du`
/// against `2^{2n-2} π (l+2n)!/(l+1)! P_l^{(2n-1,1)}(cos 2d)`.
pub fn lemma_check(n: usize, l: usize, d: f64, tol: f64) -> VerificationReport {
    let params = [("n", n as f64), ("l", l as f64), ("d", d)];
    VerificationReport::from_result("lemma", &params, tol, lemma_sides(n, l, d))
}

fn lemma_sides(n: usize, l: usize, d: f64) -> Result<(f64, f64)> {
    if n < 1 {
        return Err(Error::domain("lemma needs n >= 1"));
    }
    let spec = SqrtWeightedIntegral::new(d, SqrtWeight::Sqrt)?;
    let ladder = ladder_apply(2 * n, &GegenbauerParams::new(2 * l + 2 * n, 1.0)?);
    let conv = scaled_inner(ladder.sup_bound() * spec.mass());
    let integral = adaptive_integrate_with(&spec, |u| ladder.eval(u.cos()) * u.sin(), conv)?;
    let lhs = integral.value / d.cos().powi(2);
    let ratio = (l + 2..=l + 2 * n).fold(1.0, |acc, j| acc * j as f64);
    let jacobi = jacobi_p(
        &JacobiParams::new(l, (2 * n - 1) as f64, 1.0)?,
        (2.0 * d).cos(),
    )?;
    let rhs = 2f64.powi(2 * n as i32 - 2) * PI * ratio * jacobi;
    Ok((lhs, rhs))
}

/// The two readings of the upper Jacobi index in the integral formula for
/// `P_{l+1}^{(α,0)}(cos 2d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum JacobiConvention {
    /// `α = 2n - 2`
    TwoNMinusTwo,
    /// `α = 2n - 1`
    TwoNMinusOne,
}

impl JacobiConvention {
    pub const ALL: [JacobiConvention; 2] = [
        JacobiConvention::TwoNMinusTwo,
        JacobiConvention::TwoNMinusOne,
    ];

    /// `α = 2n - offset`.
    pub fn offset(self) -> usize {
        match self {
            JacobiConvention::TwoNMinusTwo => 2,
            JacobiConvention::TwoNMinusOne => 1,
        }
    }
}

/// `P_{l+1}^{(α,0)}(cos 2d)` against
/// `2 (l+1)! (2n-2)! / (π (l+2n-1)!) ∫_d^{π/2} C^{2n-1}_{2l+2}(cos u) (−d cos u)/√(cos²d − cos²u)`.
pub fn jacobi_rep_check(
    n: usize,
    l: usize,
    d: f64,
    tol: f64,
    convention: JacobiConvention,
) -> VerificationReport {
    let params = [
        ("n", n as f64),
        ("l", l as f64),
        ("d", d),
        ("alpha_offset", convention.offset() as f64),
    ];
    VerificationReport::from_result(
        "jacobi_rep",
        &params,
        tol,
        jacobi_rep_sides(n, l, d, convention),
    )
}

fn jacobi_rep_sides(
    n: usize,
    l: usize,
    d: f64,
    convention: JacobiConvention,
) -> Result<(f64, f64)> {
    if n < 1 {
        return Err(Error::domain("integral formula needs n >= 1"));
    }
    let alpha = (2 * n - convention.offset()) as f64;
    let lhs = jacobi_p(&JacobiParams::new(l + 1, alpha, 0.0)?, (2.0 * d).cos())?;
    let spec = SqrtWeightedIntegral::new(d, SqrtWeight::InverseSqrt)?;
    let gegen = GegenbauerParams::new(2 * l + 2, (2 * n - 1) as f64)?;
    let conv = scaled_inner(gegenbauer_endpoint(2 * l + 2, (2 * n - 1) as f64) * spec.mass());
    let integral =
        adaptive_integrate_with(&spec, |u| u.sin() * gegen_value(&gegen, u.cos()), conv)?;
    // (l+1)! (2n-2)! / (l+2n-1)! = Π_{j=1}^{l+1} j / (j+2n-2)
    let ratio = (1..=l + 1).fold(1.0, |acc, j| acc * j as f64 / (j + 2 * n - 2) as f64);
    let rhs = 2.0 * ratio / PI * integral.value;
    Ok((lhs, rhs))
}

fn gegen_value(params: &GegenbauerParams, x: f64) -> f64 {
    gegenbauer_c(params, x.clamp(-1.0, 1.0)).expect("argument clamped to [-1, 1]")
}

/// `θ_{2n+2}(t;x)` against `½ϑ₂(x/π, 4it/π) − Σ_{l<n} e^{-4t(l+1/2)²} cos((2l+1)x)`.
pub fn theta2_relation_check(n: usize, t: f64, x: f64, tol: f64) -> VerificationReport {
    let params = [("n", n as f64), ("t", t), ("x", x)];
    VerificationReport::from_result("theta2_relation", &params, tol, theta2_sides(n, t, x))
}

fn theta2_sides(n: usize, t: f64, x: f64) -> Result<(f64, f64)> {
    let policy = TruncationPolicy::with_tol(1e-15)?;
    let lhs = theta(&ThetaQuery::new(2 * n + 2, t, x)?, &policy)?;
    let head: f64 = (0..n)
        .map(|l| {
            let h = l as f64 + 0.5;
            (-4.0 * t * h * h).exp() * ((2 * l + 1) as f64 * x).cos()
        })
        .sum();
    let rhs = 0.5 * jacobi_theta2_reference(x / PI, 4.0 * t / PI, &policy)? - head;
    Ok((lhs, rhs))
}

fn kernel_params(space: &SpaceDescriptor) -> [(&'static str, f64); 2] {
    [("k", space.k() as f64), ("n", space.n() as f64)]
}

fn with(base: &[(&'static str, f64)], extra: &[(&'static str, f64)]) -> Vec<(&'static str, f64)> {
    base.iter().chain(extra).copied().collect()
}

/// Integral representation (`lhs`) against the spectral series (`rhs`).
pub fn representation_check(
    space: &SpaceDescriptor,
    t: f64,
    d: f64,
    tol: f64,
) -> VerificationReport {
    let params = with(&kernel_params(space), &[("t", t), ("d", d)]);
    // The integral is computed to a tenth of a fixed 1e-10 relative accuracy.
    let sides =
        compare_representations(space, t, d, 1e-10).map(|c| (c.integral.value, c.series.value));
    VerificationReport::from_result("representation", &params, tol, sides)
}

fn series(space: &SpaceDescriptor, t: f64, d: f64) -> Result<f64> {
    Ok(unified(space, t, d, INNER_SERIES_TOL, Method::Series)?.value)
}

/// `E(t; d)` against its long-time limit.
pub fn stationary_check(
    space: &SpaceDescriptor,
    t: f64,
    d: f64,
    method: Method,
    tol: f64,
) -> VerificationReport {
    let params = with(
        &kernel_params(space),
        &[
            ("t", t),
            ("d", d),
            ("integral", (method == Method::Integral) as u8 as f64),
        ],
    );
    let sides = unified(space, t, d, 1e-13, method).map(|v| (v.value, stationary_value(space)));
    VerificationReport::from_result("stationary", &params, tol, sides)
}

/// `∫_0^{π/2} E(t; r) J(r) dr` against 1.
pub fn normalization_check(space: &SpaceDescriptor, t: f64, tol: f64) -> VerificationReport {
    let params = with(&kernel_params(space), &[("t", t)]);
    let sides = radial_integral(space, |r| series(space, t, r)).map(|v| (v, 1.0));
    VerificationReport::from_result("normalization", &params, tol, sides)
}

/// `∫_0^{π/2} f(r) J(r) dr` for a fallible `f`.
fn radial_integral(space: &SpaceDescriptor, f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let failure = std::sync::Mutex::new(None);
    let est = adaptive_interval(
        0.0,
        FRAC_PI_2,
        |r| match f(r) {
            Ok(v) => v * volume_density_unchecked(space, r),
            Err(e) => {
                failure.lock().unwrap().get_or_insert(e);
                0.0
            }
        },
        INNER,
    );
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    Ok(est?.value)
}

/// `∫_0^{π/2} E(t; r) E(s; r) J(r) dr` against `E(t+s; 0)`.
pub fn semigroup_check(space: &SpaceDescriptor, t: f64, s: f64, tol: f64) -> VerificationReport {
    let params = with(&kernel_params(space), &[("t", t), ("s", s)]);
    let sides = (|| {
        let lhs = radial_integral(space, |r| Ok(series(space, t, r)? * series(space, s, r)?))?;
        Ok((lhs, series(space, t + s, 0.0)?))
    })();
    VerificationReport::from_result("semigroup", &params, tol, sides)
}

/// `Δ_rad E` (`lhs`) against `∂_t E` (`rhs`), both by finite differences.
pub fn heat_residual_check(
    space: &SpaceDescriptor,
    t: f64,
    r: f64,
    tol: f64,
) -> VerificationReport {
    let params = with(&kernel_params(space), &[("t", t), ("r", r)]);
    let sides = (|| {
        let dt = 1e-4 * t;
        let time_derivative = (series(space, t + dt, r)? - series(space, t - dt, r)?) / (2.0 * dt);
        let failure = std::sync::Mutex::new(None);
        let profile = |x: f64| {
            series(space, t, x).unwrap_or_else(|e| {
                failure.lock().unwrap().get_or_insert(e);
                f64::NAN
            })
        };
        let laplacian = radial_laplacian_fd(space, profile, r, 1e-3)?;
        if let Some(e) = failure.into_inner().unwrap() {
            return Err(e);
        }
        Ok((laplacian, time_derivative))
    })();
    VerificationReport::from_result("heat_residual", &params, tol, sides)
}

fn radial_eigenfunction(space: &SpaceDescriptor, l: usize) -> Result<impl Fn(f64) -> f64> {
    let params = JacobiParams::new(
        l,
        (space.k() * space.n() - 1) as f64,
        (space.k() - 1) as f64,
    )?;
    Ok(move |r: f64| jacobi_p(&params, (2.0 * r).cos()).expect("cos lies in [-1, 1]"))
}

/// `Δ_rad P_l^{(kn-1,k-1)}(cos 2r)` against `-4l(l+kn+k-1) P_l^{(kn-1,k-1)}(cos 2r)`.
pub fn eigenfunction_check(
    space: &SpaceDescriptor,
    l: usize,
    r: f64,
    tol: f64,
) -> VerificationReport {
    let params = with(&kernel_params(space), &[("l", l as f64), ("r", r)]);
    let sides = (|| {
        let f = radial_eigenfunction(space, l)?;
        let lhs = radial_laplacian_fd(space, &f, r, 1e-3)?;
        Ok((lhs, space.eigenvalue(l) * f(r)))
    })();
    VerificationReport::from_result("eigenfunction", &params, tol, sides)
}

/// Coefficient form of the radial Laplacian against `J^{-1}(J f')'`.
pub fn density_consistency_check(
    space: &SpaceDescriptor,
    l: usize,
    r: f64,
    tol: f64,
) -> VerificationReport {
    let params = with(&kernel_params(space), &[("l", l as f64), ("r", r)]);
    let sides = (|| {
        let f = radial_eigenfunction(space, l)?;
        let divergence = radial_laplacian_divergence_fd(space, &f, r, 1e-2)?;
        Ok((divergence, radial_laplacian_fd(space, &f, r, 1e-3)?))
    })();
    VerificationReport::from_result("density_consistency", &params, tol, sides)
}

/// Largest increase of `|E(t;d) − stationary|` along an increasing `t` grid;
/// the right-hand side is zero, so any increase beyond `tol` fails.
pub fn monotone_check(
    space: &SpaceDescriptor,
    d: f64,
    t_grid: &[f64],
    tol: f64,
) -> VerificationReport {
    let params = with(&kernel_params(space), &[("d", d)]);
    let limit = stationary_value(space);
    let sides = t_grid
        .iter()
        .map(|&t| series(space, t, d).map(|v| (v - limit).abs()))
        .collect::<Result<Vec<_>>>()
        .map(|gaps| {
            let worst = gaps
                .windows(2)
                .map(|w| (w[1] - w[0]).max(0.0))
                .fold(0.0, f64::max);
            (worst, 0.0)
        });
    VerificationReport::from_result("monotone", &params, tol, sides)
}

/// `L^m C_q^λ(cos u)` from the ladder identity against nested finite differences.
pub fn ladder_check(m: usize, q: usize, lambda: f64, u: f64, tol: f64) -> VerificationReport {
    let params = [
        ("m", m as f64),
        ("q", q as f64),
        ("lambda", lambda),
        ("u", u),
    ];
    let sides = (|| {
        let source = GegenbauerParams::new(q, lambda)?;
        let exact = ladder_apply(m, &source).eval(u.cos());
        let numeric = fd::apply_l(&|v: f64| gegen_value(&source, v.cos()), u, m);
        Ok((numeric, exact))
    })();
    VerificationReport::from_result("ladder", &params, tol, sides)
}

/// Check families selectable in a suite run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Lemma,
    JacobiRep,
    Theta2Relation,
    Representation,
    Stationary,
    Normalization,
    Semigroup,
    HeatResidual,
    Eigenfunction,
    DensityConsistency,
    Monotone,
    Ladder,
}

impl Family {
    pub const ALL: [Family; 12] = [
        Family::Lemma,
        Family::JacobiRep,
        Family::Theta2Relation,
        Family::Representation,
        Family::Stationary,
        Family::Normalization,
        Family::Semigroup,
        Family::HeatResidual,
        Family::Eigenfunction,
        Family::DensityConsistency,
        Family::Monotone,
        Family::Ladder,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Lemma => "lemma",
            Family::JacobiRep => "jacobi_rep",
            Family::Theta2Relation => "theta2_relation",
            Family::Representation => "representation",
            Family::Stationary => "stationary",
            Family::Normalization => "normalization",
            Family::Semigroup => "semigroup",
            Family::HeatResidual => "heat_residual",
            Family::Eigenfunction => "eigenfunction",
            Family::DensityConsistency => "density_consistency",
            Family::Monotone => "monotone",
            Family::Ladder => "ladder",
        }
    }

    /// Tolerance each family is judged at by default.
    pub fn default_tol(self) -> f64 {
        match self {
            Family::Lemma | Family::JacobiRep | Family::Representation | Family::Normalization => {
                1e-8
            }
            Family::Theta2Relation | Family::Stationary => 1e-10,
            Family::Semigroup | Family::Ladder => 1e-6,
            Family::HeatResidual => 1e-3,
            Family::Eigenfunction | Family::DensityConsistency => 1e-4,
            Family::Monotone => 1e-12,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::domain(format!("unknown check family '{s}'")))
    }
}

/// Which checks to run and how strictly to judge them.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SuiteProfile {
    /// Replaces every family's default tolerance.
    pub tol: Option<f64>,
    /// Keeps only reports carrying this field index `k`.
    pub k: Option<usize>,
    /// Runs only these families; empty means all.
    pub only: Vec<Family>,
}

impl SuiteProfile {
    fn tol_for(&self, family: Family) -> f64 {
        self.tol.unwrap_or_else(|| family.default_tol())
    }

    fn runs(&self, family: Family) -> bool {
        self.only.is_empty() || self.only.contains(&family)
    }
}

pub const LEMMA_D_GRID: [f64; 5] = [0.0, 0.3, 0.7, 1.1, 1.4];
pub const KERNEL_T_GRID: [f64; 5] = [0.05, 0.2, 0.5, 1.0, 5.0];
pub const RESIDUAL_T_GRID: [f64; 3] = [0.2, 0.5, 1.0];
pub const SEMIGROUP_PAIRS: [(f64, f64); 2] = [(0.3, 0.3), (0.2, 0.5)];

/// `count` equally spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![a],
        _ => (0..count)
            .map(|i| a + (b - a) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

pub fn kernel_d_grid() -> Vec<f64> {
    linspace(0.0, 1.5, 11)
}

pub fn kernel_spaces() -> Vec<SpaceDescriptor> {
    let mut out = Vec::new();
    for field in [Field::Complex, Field::Quaternionic] {
        for n in 1..=3 {
            out.push(SpaceDescriptor::new(n, field).expect("n >= 1"));
        }
    }
    out
}

type Job = Box<dyn Fn() -> Vec<VerificationReport> + Send + Sync>;

fn jobs_for(family: Family, tol: f64) -> Vec<Job> {
    let mut jobs: Vec<Job> = Vec::new();
    match family {
        Family::Lemma => {
            for n in 1..=3 {
                for l in 0..=8 {
                    jobs.push(Box::new(move || {
                        LEMMA_D_GRID
                            .iter()
                            .map(|&d| lemma_check(n, l, d, tol))
                            .collect()
                    }));
                }
            }
        }
        Family::JacobiRep => jobs.push(Box::new(move || jacobi_rep_suite(tol))),
        Family::Theta2Relation => {
            for n in 1..=3 {
                for t in [0.1, 0.5, 2.0] {
                    jobs.push(Box::new(move || {
                        linspace(0.0, PI, 20)
                            .into_iter()
                            .map(|x| theta2_relation_check(n, t, x, tol))
                            .collect()
                    }));
                }
            }
        }
        Family::Representation => {
            for space in kernel_spaces() {
                for t in KERNEL_T_GRID {
                    jobs.push(Box::new(move || {
                        kernel_d_grid()
                            .into_iter()
                            .map(|d| representation_check(&space, t, d, tol))
                            .collect()
                    }));
                }
            }
        }
        Family::Stationary => {
            for space in [
                SpaceDescriptor::cpn(1),
                SpaceDescriptor::cpn(2),
                SpaceDescriptor::hpn(1),
            ] {
                let space = space.expect("n >= 1");
                jobs.push(Box::new(move || {
                    [Method::Series, Method::Integral]
                        .into_iter()
                        .flat_map(|m| {
                            [0.0, 0.7, 1.4].map(|d| stationary_check(&space, 50.0, d, m, tol))
                        })
                        .collect()
                }));
            }
        }
        Family::Normalization => {
            for space in kernel_spaces() {
                jobs.push(Box::new(move || {
                    KERNEL_T_GRID
                        .iter()
                        .map(|&t| normalization_check(&space, t, tol))
                        .collect()
                }));
            }
        }
        Family::Semigroup => {
            for space in kernel_spaces() {
                jobs.push(Box::new(move || {
                    SEMIGROUP_PAIRS
                        .iter()
                        .map(|&(t, s)| semigroup_check(&space, t, s, tol))
                        .collect()
                }));
            }
        }
        Family::HeatResidual => {
            for space in kernel_spaces() {
                for t in RESIDUAL_T_GRID {
                    jobs.push(Box::new(move || {
                        linspace(0.2, 1.3, 12)
                            .into_iter()
                            .map(|r| heat_residual_check(&space, t, r, tol))
                            .collect()
                    }));
                }
            }
        }
        Family::Eigenfunction | Family::DensityConsistency => {
            for space in kernel_spaces() {
                jobs.push(Box::new(move || {
                    let mut out = Vec::new();
                    for l in 0..=6 {
                        for r in linspace(0.2, 1.3, 12) {
                            out.push(if family == Family::Eigenfunction {
                                eigenfunction_check(&space, l, r, tol)
                            } else {
                                density_consistency_check(&space, l, r, tol)
                            });
                        }
                    }
                    out
                }));
            }
        }
        Family::Monotone => {
            for space in kernel_spaces() {
                jobs.push(Box::new(move || {
                    let t_grid = linspace(1.0, 10.0, 20);
                    [0.0, 0.5, 1.0, 1.5]
                        .iter()
                        .map(|&d| monotone_check(&space, d, &t_grid, tol))
                        .collect()
                }));
            }
        }
        Family::Ladder => {
            for m in 1..=3 {
                for lambda in [0.5, 1.0, 2.5] {
                    jobs.push(Box::new(move || {
                        let mut out = Vec::new();
                        for q in 0..=8 {
                            for u in [0.4, 0.9, 1.3, 2.2] {
                                out.push(ladder_check(m, q, lambda, u, tol));
                            }
                        }
                        out
                    }));
                }
            }
        }
    }
    jobs
}

/// Runs the integral formula for `P_{l+1}^{(α,0)}` under both readings of `α`
/// on `n <= 3, l <= 8` and the distance grid. Emits the point reports of the
/// reading that passes everywhere, plus a `jacobi_rep_convention` summary whose
/// `alpha_offset` names it. When no reading (or both) passes, all point
/// reports are kept and the summary fails.
pub fn jacobi_rep_suite(tol: f64) -> Vec<VerificationReport> {
    let per_convention: Vec<(JacobiConvention, Vec<VerificationReport>)> = JacobiConvention::ALL
        .iter()
        .map(|&c| {
            let mut reports = Vec::new();
            for n in 1..=3 {
                for l in 0..=8 {
                    for d in LEMMA_D_GRID {
                        reports.push(jacobi_rep_check(n, l, d, tol, c));
                    }
                }
            }
            (c, reports)
        })
        .collect();
    let passing: Vec<&(JacobiConvention, Vec<VerificationReport>)> = per_convention
        .iter()
        .filter(|(_, r)| r.iter().all(|r| r.passed))
        .collect();
    let (offset, mut out) = match passing.as_slice() {
        [(c, reports)] => (c.offset() as f64, reports.clone()),
        _ => (
            f64::NAN,
            per_convention.iter().flat_map(|(_, r)| r.clone()).collect(),
        ),
    };
    let mut summary = VerificationReport::new(
        "jacobi_rep_convention",
        &[("alpha_offset", offset)],
        passing.len() as f64,
        1.0,
        0.5,
    );
    summary.tol = tol;
    summary.passed = passing.len() == 1;
    out.push(summary);
    out
}

/// Runs the selected checks, concurrently, and returns the reports sorted by
/// identity name and then parameters.
pub fn full_suite(profile: &SuiteProfile) -> Vec<VerificationReport> {
    let jobs: Vec<Job> = Family::ALL
        .into_iter()
        .filter(|&f| profile.runs(f))
        .flat_map(|f| jobs_for(f, profile.tol_for(f)))
        .collect();
    let mut reports: Vec<VerificationReport> = jobs.par_iter().flat_map_iter(|job| job()).collect();
    if let Some(k) = profile.k {
        reports.retain(|r| r.parameter("k") == Some(k as f64));
    }
    reports.sort_by(|a, b| a.sort_key_cmp(b));
    reports
}

/// Per identity: `(name, passed, total)`, in name order.
pub fn summarize(reports: &[VerificationReport]) -> Vec<(String, usize, usize)> {
    let mut out: Vec<(String, usize, usize)> = Vec::new();
    for r in reports {
        match out.iter_mut().find(|(name, _, _)| *name == r.identity_name) {
            Some(entry) => {
                entry.1 += r.passed as usize;
                entry.2 += 1;
            }
            None => out.push((r.identity_name.clone(), r.passed as usize, 1)),
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn report_pass_rule() {
        assert!(VerificationReport::new("x", &[], 1.0, 1.0 + 1e-9, 1e-8).passed);
        assert!(!VerificationReport::new("x", &[], 1.0, 1.0 + 1e-7, 1e-8).passed);
        // relative above one
        assert!(VerificationReport::new("x", &[], 1e6, 1e6 + 1e-3, 1e-8).passed);
        // absolute below one
        let r = VerificationReport::new("x", &[], 1e-9, 2e-9, 1e-8);
        assert!(r.passed);
        assert_relative_eq!(r.rel_err, 0.5);
        // zero tolerance fails even on exact agreement
        assert!(!VerificationReport::new("x", &[], 2.0, 2.0, 0.0).passed);
    }

    #[test]
    fn failure_reports_serialize() {
        let r = VerificationReport::failure("lemma", &[("n", 1.0)], 1e-8, &Error::domain("bad"));
        assert!(!r.passed);
        let line = r.to_json_line();
        assert!(line.contains("\"lhs\":null"));
        assert!(line.contains("\"parameters\":{\"n\":1.0}"));
        assert!(!line.contains('\n'));
    }

    #[test]
    fn lemma_analytic_case() {
        for d in [0.0, 0.5, 1.4] {
            let r = lemma_check(1, 0, d, 1e-12);
            assert!(r.passed, "{r:?}");
            assert_relative_eq!(r.lhs, 2.0 * PI, max_relative = 1e-12);
            assert_relative_eq!(r.rhs, 2.0 * PI, max_relative = 1e-15);
        }
    }

    #[test]
    fn lemma_examples() {
        assert!(lemma_check(1, 1, 0.5, 1e-9).passed);
        assert!(lemma_check(2, 3, 0.2, 1e-9).passed);
        assert!(!lemma_check(0, 1, 0.5, 1e-9).passed);
    }

    #[test]
    fn jacobi_rep_examples() {
        let pass = JacobiConvention::TwoNMinusTwo;
        let r = jacobi_rep_check(1, 0, 0.0, 1e-9, pass);
        assert!(r.passed, "{r:?}");
        // P_1^{(0,0)}(1) = 1
        assert_relative_eq!(r.lhs, 1.0);
        assert!(jacobi_rep_check(1, 2, 0.7, 1e-9, pass).passed);
        assert!(jacobi_rep_check(2, 1, 0.4, 1e-9, pass).passed);
        // The other reading gives P_1^{(1,0)}(1) = 2 on the left.
        let other = jacobi_rep_check(1, 0, 0.0, 1e-9, JacobiConvention::TwoNMinusOne);
        assert!(!other.passed);
        assert_relative_eq!(other.lhs, 2.0);
    }

    #[test]
    fn jacobi_rep_suite_names_one_convention() {
        let reports = jacobi_rep_suite(1e-8);
        let summary = reports
            .iter()
            .find(|r| r.identity_name == "jacobi_rep_convention")
            .unwrap();
        assert!(summary.passed);
        assert_eq!(summary.parameter("alpha_offset"), Some(2.0));
        assert!(reports.iter().all(|r| r.passed));
    }

    #[test]
    fn theta2_examples() {
        assert!(theta2_relation_check(1, 0.5, 0.3, 1e-11).passed);
        assert!(theta2_relation_check(2, 0.1, 0.0, 1e-11).passed);
        let r = theta2_relation_check(3, 0.7, FRAC_PI_2, 1e-11);
        assert!(r.passed);
        assert!(r.lhs.abs() < 1e-15 && r.rhs.abs() < 1e-15);
    }

    #[test]
    fn kernel_checks_pass_at_sample_points() {
        let hp1 = SpaceDescriptor::hpn(1).unwrap();
        let cp2 = SpaceDescriptor::cpn(2).unwrap();
        assert!(representation_check(&hp1, 0.5, 0.4, 1e-8).passed);
        assert!(stationary_check(&cp2, 50.0, 0.3, Method::Integral, 1e-10).passed);
        assert!(normalization_check(&cp2, 0.05, 1e-8).passed);
        assert!(semigroup_check(&hp1, 0.2, 0.5, 1e-6).passed);
        let r = heat_residual_check(&hp1, 0.2, 0.7, 1e-3);
        assert!(r.passed, "{r:?}");
        assert!(eigenfunction_check(&cp2, 1, 0.6, 1e-4).passed);
        assert!(density_consistency_check(&hp1, 3, 0.6, 1e-4).passed);
        assert!(monotone_check(&hp1, 0.3, &linspace(1.0, 10.0, 20), 1e-12).passed);
        assert!(ladder_check(2, 5, 1.5, 0.8, 1e-6).passed);
    }

    #[test]
    fn residual_detects_wrong_time_scale() {
        // Doubling t in the profile but not in the time derivative breaks the heat equation.
        let hp1 = SpaceDescriptor::hpn(1).unwrap();
        let lap = radial_laplacian_fd(&hp1, |x| series(&hp1, 0.4, x).unwrap(), 0.7, 1e-3).unwrap();
        let dt = (series(&hp1, 0.2 + 2e-5, 0.7).unwrap() - series(&hp1, 0.2 - 2e-5, 0.7).unwrap())
            / 4e-5;
        assert!(!VerificationReport::new("heat_residual", &[], lap, dt, 1e-3).passed);
    }

    #[test]
    fn family_names_roundtrip() {
        for f in Family::ALL {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
        }
        assert!("nonsense".parse::<Family>().is_err());
    }

    #[test]
    fn filtered_suite() {
        let profile = SuiteProfile {
            tol: None,
            k: Some(1),
            only: vec![Family::Normalization, Family::Lemma],
        };
        let reports = full_suite(&profile);
        assert_eq!(reports.len(), 3 * KERNEL_T_GRID.len());
        assert!(reports
            .iter()
            .all(|r| r.identity_name == "normalization" && r.parameter("k") == Some(1.0)));
        assert!(reports.iter().all(|r| r.passed));
    }

    #[test]
    fn zero_tolerance_fails_with_finite_discrepancies() {
        let profile = SuiteProfile {
            tol: Some(0.0),
            k: None,
            only: vec![Family::Lemma, Family::Theta2Relation],
        };
        let reports = full_suite(&profile);
        assert!(!reports.is_empty());
        for r in &reports {
            assert!(!r.passed && r.abs_err.is_finite(), "{r:?}");
        }
    }

    #[test]
    fn suite_output_is_sorted_and_deterministic() {
        let profile = SuiteProfile {
            tol: None,
            k: None,
            only: vec![Family::Stationary, Family::Semigroup],
        };
        let a = full_suite(&profile);
        let b = full_suite(&profile);
        assert_eq!(a, b);
        assert!(a
            .windows(2)
            .all(|w| w[0].sort_key_cmp(&w[1]) != Ordering::Greater));
    }

    #[test]
    fn summary_counts() {
        let reports = vec![
            VerificationReport::new("b", &[], 1.0, 1.0, 1e-8),
            VerificationReport::new("a", &[], 1.0, 2.0, 1e-8),
            VerificationReport::new("b", &[], 1.0, 3.0, 1e-8),
        ];
        assert_eq!(
            summarize(&reports),
            vec![("a".to_string(), 0, 1), ("b".to_string(), 1, 2)]
        );
    }
}
