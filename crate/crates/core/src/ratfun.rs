use crate::field::Field;
use crate::gaussian::GaussianRational;
use crate::poly::Polynomial;
use std::collections::BTreeMap;
use std::fmt;

/// Rational function in named parameters over Q(i).
///
/// Canonical representative: gcd-reduced, denominator monic in grevlex.
/// Equality is therefore structural.
#[derive(Clone, PartialEq, Eq)]
pub struct RationalFunction {
    num: Polynomial,
    den: Polynomial,
}

#[derive(Debug, thiserror::Error)]
pub enum RatFunError {
    #[error("division by zero rational function")]
    DivisionByZero,
    #[error("substitution makes a denominator vanish: {0}")]
    ZeroDenominator(String),
}

impl RationalFunction {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self, RatFunError> {
        if den.is_zero() {
            return Err(RatFunError::DivisionByZero);
        }
        Ok(Self::reduced(num, den))
    }

    fn reduced(num: Polynomial, den: Polynomial) -> Self {
        debug_assert!(!den.is_zero());
        if num.is_zero() {
            return RationalFunction {
                num: Polynomial::zero(),
                den: Polynomial::one(),
            };
        }
        let (mut num, mut den) = (num, den);
        if !den.is_constant() {
            let g = num.gcd(&den);
            if !g.is_one() {
                num = num.exact_div(&g).expect("gcd divides");
                den = den.exact_div(&g).expect("gcd divides");
            }
        }
        // make denominator monic, folding the unit into the numerator
        let lc = den
            .leading_term_grevlex()
            .expect("nonzero denominator")
            .1;
        if !lc.is_one() {
            let inv = lc.inv().expect("nonzero");
            num = num.scale(&inv);
            den = den.scale(&inv);
        }
        RationalFunction { num, den }
    }

    pub fn from_poly(p: Polynomial) -> Self {
        RationalFunction {
            num: p,
            den: Polynomial::one(),
        }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_poly(Polynomial::constant(GaussianRational::from_int(n)))
    }

    pub fn from_ratio(n: i64, d: i64) -> Self {
        Self::from_poly(Polynomial::constant(GaussianRational::from_ratio(n, d)))
    }

    pub fn var(name: &str) -> Self {
        Self::from_poly(Polynomial::var(name))
    }

    pub fn i() -> Self {
        Self::from_poly(Polynomial::constant(GaussianRational::i()))
    }

    pub fn numerator(&self) -> &Polynomial {
        &self.num
    }

    pub fn denominator(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.num.is_constant() && self.den.is_constant()
    }

    pub fn constant_value(&self) -> Option<GaussianRational> {
        if self.is_constant() {
            Field::div(&self.num.constant_value(), &self.den.constant_value())
        } else {
            None
        }
    }

    pub fn conj_coefficients(&self) -> Self {
        let conj = |p: &Polynomial| {
            Polynomial::from_terms(
                p.vars().clone(),
                p.terms().map(|(m, c)| (m.clone(), c.conj())),
            )
        };
        Self::reduced(conj(&self.num), conj(&self.den))
    }

    pub fn uses_var(&self, name: &str) -> bool {
        self.num.uses_var(name) || self.den.uses_var(name)
    }

    /// Splits into real and imaginary parts with respect to the coefficient
    /// field Q(i); `None` when the denominator has non-real coefficients.
    pub fn split_real_imag(&self) -> Option<(Self, Self)> {
        use num_traits::Zero;
        if self
            .den
            .terms()
            .any(|(_, c)| !c.im.is_zero())
        {
            return None;
        }
        let part = |take_im: bool| {
            Polynomial::from_terms(
                self.num.vars().clone(),
                self.num.terms().map(|(m, c)| {
                    let r = if take_im { c.im.clone() } else { c.re.clone() };
                    (
                        m.clone(),
                        GaussianRational::new(r, num_rational::BigRational::zero()),
                    )
                }),
            )
        };
        Some((
            Self::reduced(part(false), self.den.clone()),
            Self::reduced(part(true), self.den.clone()),
        ))
    }

    /// Substitutes rational functions for variables. Errors if a denominator
    /// vanishes identically after substitution.
    pub fn substitute(
        &self,
        assign: &BTreeMap<String, RationalFunction>,
    ) -> Result<Self, RatFunError> {
        if !self.num.vars().iter().chain(self.den.vars().iter()).any(|v| assign.contains_key(v))
        {
            return Ok(self.clone());
        }
        let sub_poly = |p: &Polynomial| -> (Polynomial, Polynomial) {
            // returns (numerator, denominator) of p after substitution
            let mut num_acc = Polynomial::zero();
            let mut den_acc = Polynomial::one();
            // process term by term over a common denominator
            for (m, c) in p.terms() {
                let mut tn = Polynomial::constant(c.clone());
                let mut td = Polynomial::one();
                for (i, &e) in m.iter().enumerate() {
                    if e == 0 {
                        continue;
                    }
                    let name = &p.vars()[i];
                    match assign.get(name) {
                        None => {
                            tn = tn.mul(&Polynomial::monomial(GaussianRational::one(), name, e));
                        }
                        Some(r) => {
                            tn = tn.mul(&r.num.pow(e));
                            td = td.mul(&r.den.pow(e));
                        }
                    }
                }
                // num_acc/den_acc + tn/td
                num_acc = num_acc.mul(&td).add(&tn.mul(&den_acc));
                den_acc = den_acc.mul(&td);
                let g = num_acc.gcd(&den_acc);
                if !g.is_one() {
                    num_acc = num_acc.exact_div(&g).unwrap();
                    den_acc = den_acc.exact_div(&g).unwrap();
                }
            }
            (num_acc, den_acc)
        };
        let (nn, nd) = sub_poly(&self.num);
        let (dn, dd) = sub_poly(&self.den);
        if dn.is_zero() {
            return Err(RatFunError::ZeroDenominator(self.to_string()));
        }
        // (nn/nd) / (dn/dd) = nn*dd / (nd*dn)
        Ok(Self::reduced(nn.mul(&dd), nd.mul(&dn)))
    }

    /// Partial derivative.
    pub fn derivative(&self, name: &str) -> Self {
        let n = self.num.derivative(name).mul(&self.den).sub(
            &self.num.mul(&self.den.derivative(name)),
        );
        Self::reduced(n, self.den.mul(&self.den))
    }
}

impl Field for RationalFunction {
    fn zero() -> Self {
        Self::from_poly(Polynomial::zero())
    }

    fn one() -> Self {
        Self::from_poly(Polynomial::one())
    }

    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    fn add(&self, other: &Self) -> Self {
        if self.den == other.den {
            return Self::reduced(self.num.add(&other.num), self.den.clone());
        }
        Self::reduced(
            self.num.mul(&other.den).add(&other.num.mul(&self.den)),
            self.den.mul(&other.den),
        )
    }

    fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    fn neg(&self) -> Self {
        RationalFunction {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    fn mul(&self, other: &Self) -> Self {
        if Field::is_zero(self) || Field::is_zero(other) {
            return Field::zero();
        }
        // cross-reduce before multiplying to keep things small
        let g1 = self.num.gcd(&other.den);
        let g2 = other.num.gcd(&self.den);
        let n1 = self.num.exact_div(&g1).unwrap_or_else(|| self.num.clone());
        let d2 = other.den.exact_div(&g1).unwrap_or_else(|| other.den.clone());
        let n2 = other.num.exact_div(&g2).unwrap_or_else(|| other.num.clone());
        let d1 = self.den.exact_div(&g2).unwrap_or_else(|| self.den.clone());
        Self::reduced(n1.mul(&n2), d1.mul(&d2))
    }

    fn inv(&self) -> Option<Self> {
        if Field::is_zero(self) {
            return None;
        }
        Some(Self::reduced(self.den.clone(), self.num.clone()))
    }

    fn complexity(&self) -> usize {
        if self.is_constant() {
            return 1;
        }
        let tc = self.num.term_count() + self.den.term_count();
        let deg = (self.num.total_degree() + self.den.total_degree()) as usize;
        let bits = self
            .num
            .terms()
            .chain(self.den.terms())
            .map(|(_, c)| c.complexity())
            .max()
            .unwrap_or(1);
        2 + tc + deg + bits / 8
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

impl fmt::Debug for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl RationalFunction {
    /// Parses `num` or `(num) / (den)` using the polynomial grammar.
    pub fn parse(s: &str) -> Result<Self, crate::poly::ParsePolyError> {
        let s = s.trim();
        if let Some((lhs, rhs)) = split_outer_division(s) {
            let num = Polynomial::parse(lhs.trim().trim_start_matches('(').trim_end_matches(')'))?;
            let den = Polynomial::parse(rhs.trim().trim_start_matches('(').trim_end_matches(')'))?;
            return RationalFunction::new(num, den)
                .map_err(|_| crate::poly::ParsePolyError(s.to_string()));
        }
        Ok(Self::from_poly(Polynomial::parse(s)?))
    }
}

/// Splits `"(...) / (...)"` at the top-level division, if present.
fn split_outer_division(s: &str) -> Option<(&str, &str)> {
    let mut depth = 0i32;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            '/' if depth == 0 => {
                // a coefficient like 1/2 has no parens around it; require the
                // left side to end with ')'
                if s[..i].trim_end().ends_with(')') {
                    return Some((&s[..i], &s[i + 1..]));
                }
            }
            _ => {}
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn rf(s: &str) -> RationalFunction {
        RationalFunction::parse(s).unwrap()
    }

    #[test]
    fn reduction_is_canonical() {
        let a = RationalFunction::new(
            Polynomial::parse("x^2 - 1").unwrap(),
            Polynomial::parse("x - 1").unwrap(),
        )
        .unwrap();
        assert_eq!(a, rf("x + 1"));
        assert!(a.is_polynomial());

        let b = RationalFunction::new(
            Polynomial::parse("2*x").unwrap(),
            Polynomial::parse("2*y").unwrap(),
        )
        .unwrap();
        assert_eq!(b.denominator(), &Polynomial::parse("y").unwrap());
        assert_eq!(b.numerator(), &Polynomial::parse("x").unwrap());
    }

    #[test]
    fn field_axioms_on_random_triples() {
        let mut rng = SplitMix64::new(0xCAFE);
        let sample = |rng: &mut SplitMix64| {
            let (n, d) = rng.small_ratio();
            let base = rf("x");
            let num = base
                .mul(&RationalFunction::from_ratio(n, d))
                .add(&RationalFunction::from_int(rng.i64_in(-3, 3)));
            let den = rf("y").add(&RationalFunction::from_int(rng.i64_in(1, 4)));
            num.div(&den).unwrap()
        };
        for _ in 0..40 {
            let a = sample(&mut rng);
            let b = sample(&mut rng);
            let c = sample(&mut rng);
            assert_eq!(a.add(&b), b.add(&a));
            assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
            if !Field::is_zero(&a) {
                assert!(a.mul(&a.inv().unwrap()).is_one());
            }
        }
    }

    #[test]
    fn substitute_lambda_relation() {
        // lambda3 = -(l1+l2)/(1+l1*l2) at l1=2, l2=1/2 evaluates to -5/4
        let l3 = RationalFunction::new(
            Polynomial::parse("-l1 - l2").unwrap(),
            Polynomial::parse("1 + l1*l2").unwrap(),
        )
        .unwrap();
        let mut m = BTreeMap::new();
        m.insert("l1".to_string(), RationalFunction::from_int(2));
        m.insert("l2".to_string(), RationalFunction::from_ratio(1, 2));
        let v = l3.substitute(&m).unwrap();
        assert_eq!(v, RationalFunction::from_ratio(-5, 4));
    }

    #[test]
    fn substitution_zero_denominator_is_an_error() {
        let f = rf("(1) / (x)");
        let mut m = BTreeMap::new();
        m.insert("x".to_string(), RationalFunction::from_int(0));
        assert!(f.substitute(&m).is_err());
    }

    #[test]
    fn derivative_quotient_rule() {
        let f = rf("(x^2) / (1 + x)");
        let d = f.derivative("x");
        // (2x(1+x) - x^2)/(1+x)^2 = (x^2 + 2x)/(x^2+2x+1)
        assert_eq!(d, rf("(x^2 + 2*x) / (x^2 + 2*x + 1)"));
    }
}
