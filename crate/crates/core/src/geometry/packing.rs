//! Sphere-packing counts inside confidence ellipsoids and annuli, in
//! natural-log space. With `d` in the hundreds, `(chi/eps)^d` overflows any
//! float long before it means anything, so nothing here is exponentiated.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::geometry::ellipsoid::EllipsoidSummary;
use crate::scalar::{count, Scalar};

fn check_dim(d: usize) -> Result<()> {
    if d == 0 {
        Err(Error::param("dimension must be at least 1"))
    } else {
        Ok(())
    }
}

/// `ln(-expm1(x))` for `x <= 0`, i.e. `ln(1 - e^x)`, accurate at both ends.
fn ln_one_minus_exp<T: Scalar>(x: T) -> T {
    if x > -T::of(std::f64::consts::LN_2) {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

/// `ln N` for `N = (chi/eps)^d sqrt(det Σ)`: the number of radius-`eps`
/// spheres packed in the ellipsoid of Mahalanobis radius `chi`.
/// `chi = 0` yields `-inf` (no spheres).
pub fn packing_count_log<T: Scalar>(chi: T, epsilon: T, d: usize, log_sqrt_det: T) -> Result<T> {
    check_dim(d)?;
    if !(epsilon > T::zero()) {
        return Err(Error::param(format!("sphere radius must be positive, got {epsilon}")));
    }
    if !(chi >= T::zero()) {
        return Err(Error::param(format!("radius chi must be nonnegative, got {chi}")));
    }
    if chi == T::zero() {
        return Ok(T::neg_infinity());
    }
    Ok(count::<T>(d) * (chi.ln() - epsilon.ln()) + log_sqrt_det)
}

/// `ln N(A)` for the annulus between radii `chi2 <= chi1`:
/// `N(A) = ((chi1/eps)^d - (chi2/eps)^d) sqrt(det Σ)`, evaluated as
/// `ln N(E1) + ln(1 - (chi2/chi1)^d)`.
pub fn annulus_count_log<T: Scalar>(chi1: T, chi2: T, epsilon: T, d: usize, log_sqrt_det: T) -> Result<T> {
    if !(chi2 >= T::zero() && chi2 <= chi1) {
        return Err(Error::param(format!(
            "annulus radii must satisfy 0 <= chi2 <= chi1 (chi1 = {chi1}, chi2 = {chi2})"
        )));
    }
    let outer = packing_count_log(chi1, epsilon, d, log_sqrt_det)?;
    if chi2 == chi1 {
        return Ok(T::neg_infinity());
    }
    if chi2 == T::zero() {
        return Ok(outer);
    }
    let x = count::<T>(d) * (chi2.ln() - chi1.ln());
    Ok(outer + ln_one_minus_exp(x))
}

/// `N(A) / N(E1) = 1 - (chi2/chi1)^d`, free of `eps` and `Σ`.
pub fn packing_ratio<T: Scalar>(chi1: T, chi2: T, d: usize) -> Result<T> {
    check_dim(d)?;
    if !(chi1 > T::zero() && chi2 >= T::zero() && chi2 <= chi1) {
        return Err(Error::param(format!(
            "ratio needs 0 <= chi2 <= chi1 and chi1 > 0 (chi1 = {chi1}, chi2 = {chi2})"
        )));
    }
    if chi2 == T::zero() {
        return Ok(T::one());
    }
    let x = count::<T>(d) * (chi2.ln() - chi1.ln());
    Ok(-x.exp_m1())
}

/// `ln eps` such that `N(E_chi1) = n`:
/// `ln eps = ln chi1 + (ln sqrt(det Σ) - ln n) / d`.
pub fn solve_log_epsilon<T: Scalar>(chi1: T, d: usize, log_sqrt_det: T, n: usize) -> Result<T> {
    check_dim(d)?;
    if n == 0 {
        return Err(Error::param("oracle count n must be at least 1"));
    }
    if !(chi1 > T::zero()) {
        return Err(Error::param(format!("outer radius must be positive, got {chi1}")));
    }
    Ok(chi1.ln() + (log_sqrt_det - count::<T>(n).ln()) / count::<T>(d))
}

/// Sphere radius that makes the outer ellipsoid an oracle ellipsoid holding
/// exactly `n` spheres.
pub fn solve_epsilon<T: Scalar>(summary: &EllipsoidSummary<T>, n: usize) -> Result<T> {
    solve_log_epsilon(summary.chi_alpha1(), summary.dim(), summary.log_sqrt_det(), n).map(T::exp)
}

/// `ln Vol(E)` for the ellipsoid of Mahalanobis radius `chi`:
/// `Vol = (2/d) π^(d/2) / Γ(d/2) · chi^d · sqrt(det Σ)`.
/// With `log_sqrt_det = 0` this is the volume of a `d`-ball of radius `chi`.
pub fn ellipsoid_volume_log<T: Scalar>(chi: T, d: usize, log_sqrt_det: T) -> Result<T> {
    check_dim(d)?;
    if !(chi >= T::zero()) {
        return Err(Error::param(format!("radius chi must be nonnegative, got {chi}")));
    }
    if chi == T::zero() {
        return Ok(T::neg_infinity());
    }
    let df = d as f64;
    let unit = (2.0 / df).ln() + 0.5 * df * std::f64::consts::PI.ln() - ln_gamma(0.5 * df);
    Ok(T::of(unit) + count::<T>(d) * chi.ln() + log_sqrt_det)
}
