use std::fmt::{Debug, Display};

/// Coefficient domain for polynomials, matrices and the Groebner engine.
///
/// Implemented by [`crate::gaussian::GaussianRational`] and by
/// [`crate::ratfun::RationalFunction`], so the same linear algebra and
/// Groebner code runs over Q(i) or over a rational-function field.
pub trait Field: Clone + PartialEq + Debug + Display {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn is_one(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, other: &Self) -> Self;

    /// Multiplicative inverse; `None` for zero.
    fn inv(&self) -> Option<Self>;

    fn div(&self, other: &Self) -> Option<Self> {
        other.inv().map(|i| self.mul(&i))
    }

    /// Cheap complexity score used by pivot-selection heuristics.
    fn complexity(&self) -> usize {
        1
    }

    /// Image in F_p[i] with p = 2^31 - 1, as (re, im) residues, when the
    /// element reduces mod p. Powers the fast coprimality probes; `None`
    /// opts out and exact arithmetic is used instead.
    fn to_fp2_probe(&self) -> Option<(u64, u64)> {
        None
    }

    /// Optional specialized univariate gcd on sparse (degree, coefficient)
    /// lists. Fields with integer structure override this with a
    /// growth-controlled remainder sequence; `None` selects the generic
    /// monic Euclid.
    fn univariate_gcd_hook(
        _a: &[(u32, Self)],
        _b: &[(u32, Self)],
    ) -> Option<Vec<(u32, Self)>> {
        None
    }
}
