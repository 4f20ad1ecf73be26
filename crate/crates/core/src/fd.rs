//! Finite-difference oracles. These exist to certify the algebraic paths
//! (the Gegenbauer ladder, the radial Laplacian eigenvalues) and are never
//! used to produce kernel values.

/// Step used when `L` is nested `m` times. Each nesting level multiplies the
/// roundoff by `1/h`, so the step grows with `m`; the `O(h^6)` truncation of
/// [`derivative`] keeps the larger steps accurate.
pub fn nested_step(m: usize) -> f64 {
    0.02 * m.saturating_sub(1).max(1) as f64
}

/// Central first derivative with two Richardson extrapolations (`O(h^6)`).
pub fn derivative<F: Fn(f64) -> f64 + ?Sized>(f: &F, x: f64, h: f64) -> f64 {
    let central = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    let (d1, d2, d4) = (central(h), central(h / 2.0), central(h / 4.0));
    let r1 = (4.0 * d2 - d1) / 3.0;
    let r2 = (4.0 * d4 - d2) / 3.0;
    (16.0 * r2 - r1) / 15.0
}

/// Central second derivative with one Richardson extrapolation.
pub fn second_derivative<F: Fn(f64) -> f64 + ?Sized>(f: &F, x: f64, h: f64) -> f64 {
    let fx = f(x);
    let central = |h: f64| (f(x + h) - 2.0 * fx + f(x - h)) / (h * h);
    (4.0 * central(h / 2.0) - central(h)) / 3.0
}

/// `L^m f(u)` with `L = -(1/sin u) d/du`, by nested central differences.
pub fn apply_l<F: Fn(f64) -> f64 + ?Sized>(f: &F, u: f64, m: usize) -> f64 {
    apply_l_with_step(f, u, m, nested_step(m))
}

pub fn apply_l_with_step<F: Fn(f64) -> f64 + ?Sized>(f: &F, u: f64, m: usize, h: f64) -> f64 {
    if m == 0 {
        return f(u);
    }
    let inner = |v: f64| apply_l_with_step(f, v, m - 1, h);
    -derivative(&inner, u, h) / u.sin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn derivatives_of_known_functions() {
        assert_relative_eq!(
            derivative(&f64::sin, 0.7, 1e-2),
            0.7f64.cos(),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            second_derivative(&f64::exp, 0.3, 1e-3),
            0.3f64.exp(),
            max_relative = 1e-9
        );
    }

    #[test]
    fn l_acts_as_derivative_in_cos() {
        // f = cos^3 u  =>  L f = 3 cos^2 u, L^2 f = 6 cos u, L^3 f = 6
        let f = |u: f64| u.cos().powi(3);
        let u = 0.9f64;
        assert_relative_eq!(
            apply_l(&f, u, 1),
            3.0 * u.cos().powi(2),
            max_relative = 1e-9
        );
        assert_relative_eq!(apply_l(&f, u, 2), 6.0 * u.cos(), max_relative = 1e-7);
        assert_relative_eq!(apply_l(&f, u, 3), 6.0, max_relative = 1e-6);
    }
}
