use crate::error::{Error, Result};

/// A nonnegative weight function on the line, exposed through its pointwise
/// value and its signed mass antiderivative.
///
/// Only `AbsoluteValue` exists today. Every formula in the crate reaches the
/// density through `value` / `cumulative` / `inverse_cumulative`, so adding a
/// new even density (say |x|^p) means implementing these three methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Density {
    #[default]
    AbsoluteValue,
}

impl Density {
    /// Weight at `x`. Nonnegative, even, and zero at the origin.
    #[inline]
    pub fn value(self, x: f64) -> f64 {
        match self {
            Density::AbsoluteValue => x.abs(),
        }
    }

    /// Signed antiderivative F with F(0) = 0; F(x) = x|x|/2 for |x|.
    ///
    /// Strictly increasing and odd, so `cumulative(b) - cumulative(a)` is the
    /// weighted mass of [a, b] for a <= b.
    #[inline]
    pub fn cumulative(self, x: f64) -> f64 {
        match self {
            Density::AbsoluteValue => 0.5 * x * x.abs(),
        }
    }

    /// Inverse of [`Density::cumulative`]: the coordinate at signed mass `u`.
    #[inline]
    pub fn inverse_cumulative(self, u: f64) -> f64 {
        match self {
            Density::AbsoluteValue => u.signum() * (2.0 * u.abs()).sqrt(),
        }
    }

    /// Weighted mass of [a, b].
    #[inline]
    pub fn mass(self, a: f64, b: f64) -> f64 {
        debug_assert!(a <= b);
        self.cumulative(b) - self.cumulative(a)
    }

    /// The unique b >= inner with mass([inner, b]) = m, for inner >= 0.
    ///
    /// For |x| this is sqrt(inner^2 + 2m); it underlies every endpoint
    /// construction in the crate.
    pub fn outer_endpoint(self, inner: f64, m: f64) -> Result<f64> {
        if !inner.is_finite() || inner < 0.0 {
            return Err(Error::InvalidMass(format!(
                "inner endpoint must be finite and nonnegative, got {inner}"
            )));
        }
        if !m.is_finite() || m < 0.0 {
            return Err(Error::InvalidMass(format!(
                "mass must be finite and nonnegative, got {m}"
            )));
        }
        match self {
            Density::AbsoluteValue => Ok((inner * inner + 2.0 * m).sqrt()),
        }
    }

    /// Short identifier used in serialized configurations.
    pub fn tag(self) -> &'static str {
        match self {
            Density::AbsoluteValue => "abs",
        }
    }

    pub fn from_tag(tag: &str) -> Result<Self> {
        match tag {
            "abs" => Ok(Density::AbsoluteValue),
            other => Err(Error::Parse(format!("unknown density tag {other:?}"))),
        }
    }
}
