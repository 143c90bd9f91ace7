//! Normal-distribution arithmetic used to carry arrival times along a route.
//!
//! All times are seconds. A [`Gaussian`] is a (mean, variance) pair; the only
//! operations the routing model needs are independent sums, the clipped
//! maximum `max(A, e)` against a hard earliest-start bound, and upper-tail
//! probabilities for lateness.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::ops::Add;

/// A normal distribution N(mean, variance), in seconds and seconds².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gaussian {
    pub mean: f64,
    pub variance: f64,
}

impl Gaussian {
    pub const ZERO: Gaussian = Gaussian {
        mean: 0.0,
        variance: 0.0,
    };

    /// Builds a distribution, clamping tiny negative variances produced by
    /// rounding to zero.
    ///
    /// Panics if either moment is not finite or the variance is clearly negative.
    pub fn new(mean: f64, variance: f64) -> Self {
        assert!(mean.is_finite(), "gaussian mean must be finite, got {mean}");
        assert!(
            variance.is_finite() && variance > -1e-9,
            "gaussian variance must be finite and nonnegative, got {variance}"
        );
        Gaussian {
            mean,
            variance: variance.max(0.0),
        }
    }

    /// A point mass at `value`.
    pub fn point(value: f64) -> Self {
        Gaussian::new(value, 0.0)
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    pub fn is_degenerate(&self) -> bool {
        self.variance == 0.0
    }

    /// Moment-matched normal approximation of `max(self, bound)`.
    pub fn max_with(self, bound: f64) -> Gaussian {
        max_with_constant(self, bound)
    }

    /// `P(self > threshold)`.
    pub fn exceeds(&self, threshold: f64) -> f64 {
        exceed_probability(*self, threshold)
    }
}

impl Add for Gaussian {
    type Output = Gaussian;

    fn add(self, rhs: Gaussian) -> Gaussian {
        add(self, rhs)
    }
}

/// Sum of two independent normals.
pub fn add(a: Gaussian, b: Gaussian) -> Gaussian {
    Gaussian {
        mean: a.mean + b.mean,
        variance: a.variance + b.variance,
    }
}

/// Standard normal CDF Φ(z).
pub fn std_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// Standard normal density φ(z).
pub fn std_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// Moments of `Y = max(A, e)` for `A ~ N(μ, σ²)`, returned as a normal with
/// the same first two moments.
///
/// The closed forms are evaluated on the shifted variable `Y − e =
/// max(A − e, 0)`, which is algebraically identical but avoids cancelling two
/// terms of order `μ²` when the clock value is large and σ is small.
pub fn max_with_constant(a: Gaussian, e: f64) -> Gaussian {
    if a.variance == 0.0 {
        return Gaussian::point(a.mean.max(e));
    }
    let sigma = a.std_dev();
    let shift = a.mean - e;
    let alpha = shift / sigma;
    // Beyond nine standard deviations the clipping is invisible in f64.
    if alpha > TAIL_Z {
        return a;
    }
    if alpha < -TAIL_Z {
        return Gaussian::point(e);
    }
    let cdf = std_cdf(alpha);
    let pdf = std_pdf(alpha);

    let mean_shifted = shift * cdf + sigma * pdf;
    let second_shifted = (shift * shift + a.variance) * cdf + shift * sigma * pdf;
    let variance = (second_shifted - mean_shifted * mean_shifted).clamp(0.0, a.variance);

    // E[max(A, e)] can never fall below either argument's mean.
    let mean = (e + mean_shifted.max(0.0)).max(a.mean);
    Gaussian { mean, variance }
}

/// `P(A > h)`. Point masses are late exactly when their value exceeds `h`.
pub fn exceed_probability(a: Gaussian, h: f64) -> f64 {
    if a.variance == 0.0 {
        return if a.mean > h { 1.0 } else { 0.0 };
    }
    let z = (a.mean - h) / a.std_dev();
    if z > TAIL_Z {
        1.0
    } else if z < -TAIL_Z {
        0.0
    } else {
        std_cdf(z).clamp(0.0, 1.0)
    }
}

/// Standard scores past which tail masses are below 1e-18.
const TAIL_Z: f64 = 9.0;
