//! Scalar abstraction shared by every numerical routine in the crate.

use num_traits::{Float, FloatConst};
use std::fmt::{Debug, Display, LowerExp};

/// Real floating-point scalar: `f32` or `f64`.
///
/// Tolerance helpers return the documented `f64` value unless it falls below
/// what the type can resolve, in which case they widen to a small multiple of
/// machine epsilon.
pub trait Real:
    Float + FloatConst + Debug + Display + LowerExp + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn c(x: f64) -> Self {
        <Self as num_traits::NumCast>::from(x).expect("f64 literal converts to every Real")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("Real converts to f64")
    }

    /// `max(tol, factor * epsilon)`.
    fn tol(tol: f64, factor: f64) -> Self {
        Self::c(tol).max(Self::epsilon() * Self::c(factor))
    }

    /// Invariant tolerance for unit norms and tangency (1e-12 in `f64`).
    fn tight_tol() -> Self {
        Self::tol(1e-12, 64.0)
    }

    /// Largest violation auto-repaired by constructors (1e-9 in `f64`).
    fn repair_tol() -> Self {
        Self::tol(1e-9, 1e3)
    }

    /// `sin(x) / x`, continuous at zero.
    fn sinc(self) -> Self {
        if self.abs() < Self::c(1e-4) {
            let x2 = self * self;
            Self::one() - x2 / Self::c(6.0) + x2 * x2 / Self::c(120.0)
        } else {
            self.sin() / self
        }
    }

    /// `(1 - cos(x)) / x^2`, continuous at zero.
    fn versinc(self) -> Self {
        let h = self / Self::c(2.0);
        h.sinc() * h.sinc() / Self::c(2.0)
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub(crate) fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

pub(crate) fn max_abs_diff<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| acc.max((x - y).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_branches_match_closed_forms() {
        for &x in &[1e-3f64, 5e-5, 2e-4, 0.3, 2.0] {
            assert!((x.sinc() - x.sin() / x).abs() < 1e-15);
            let reference = 2.0 * (x / 2.0).sin().powi(2) / (x * x);
            assert!((x.versinc() - reference).abs() < 1e-15);
        }
        assert_eq!(0.0f64.sinc(), 1.0);
        assert_eq!(0.0f64.versinc(), 0.5);
    }

    #[test]
    fn tolerances_widen_for_single_precision() {
        assert_eq!(f64::tight_tol(), 1e-12);
        assert_eq!(f64::repair_tol(), 1e-9);
        assert!(f32::tight_tol() > 1e-6);
    }
}
