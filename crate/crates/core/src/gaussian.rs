use crate::field::Field;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::str::FromStr;

/// Element of Q(i): `re + i*im` with exact rational parts.
///
/// `BigRational` keeps each part in lowest terms with positive denominator,
/// so equality is structural.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussianRational { re, im }
    }

    pub fn from_int(n: i64) -> Self {
        GaussianRational {
            re: BigRational::from_integer(BigInt::from(n)),
            im: BigRational::zero(),
        }
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        GaussianRational {
            re: BigRational::new(BigInt::from(num), BigInt::from(den)),
            im: BigRational::zero(),
        }
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        GaussianRational {
            re: BigRational::zero(),
            im: BigRational::one(),
        }
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussianRational {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    /// Squared modulus `re^2 + im^2` as a rational.
    pub fn norm_sq(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn to_f64(&self) -> f64 {
        rat_to_f64(&self.re)
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (rat_to_f64(&self.re), rat_to_f64(&self.im))
    }
}

fn rat_to_f64(r: &BigRational) -> f64 {
    let n = r.numer();
    let d = r.denom();
    // good enough for the numeric reports; exact values stay rational
    let nf: f64 = n.to_string().parse().unwrap_or(f64::NAN);
    let df: f64 = d.to_string().parse().unwrap_or(f64::NAN);
    nf / df
}

impl Field for GaussianRational {
    fn zero() -> Self {
        GaussianRational {
            re: BigRational::zero(),
            im: BigRational::zero(),
        }
    }

    fn one() -> Self {
        GaussianRational {
            re: BigRational::one(),
            im: BigRational::zero(),
        }
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    fn add(&self, other: &Self) -> Self {
        GaussianRational {
            re: &self.re + &other.re,
            im: &self.im + &other.im,
        }
    }

    fn sub(&self, other: &Self) -> Self {
        GaussianRational {
            re: &self.re - &other.re,
            im: &self.im - &other.im,
        }
    }

    fn neg(&self) -> Self {
        GaussianRational {
            re: -self.re.clone(),
            im: -self.im.clone(),
        }
    }

    fn mul(&self, other: &Self) -> Self {
        GaussianRational {
            re: &self.re * &other.re - &self.im * &other.im,
            im: &self.re * &other.im + &self.im * &other.re,
        }
    }

    fn inv(&self) -> Option<Self> {
        if Field::is_zero(self) {
            return None;
        }
        let n = self.norm_sq();
        Some(GaussianRational {
            re: &self.re / &n,
            im: -(&self.im / &n),
        })
    }

    fn complexity(&self) -> usize {
        let bits = |r: &BigRational| r.numer().bits() as usize + r.denom().bits() as usize;
        bits(&self.re) + bits(&self.im)
    }

    fn to_fp2_probe(&self) -> Option<(u64, u64)> {
        const P: u64 = 2_147_483_647;
        let pow_mod = |mut b: u64, mut e: u64| -> u64 {
            let mut acc: u64 = 1;
            b %= P;
            while e > 0 {
                if e & 1 == 1 {
                    acc = ((acc as u128 * b as u128) % P as u128) as u64;
                }
                b = ((b as u128 * b as u128) % P as u128) as u64;
                e >>= 1;
            }
            acc
        };
        let part = |r: &BigRational| -> Option<u64> {
            let p = BigInt::from(P);
            let dm = ((r.denom() % &p) + &p) % &p;
            let d: u64 = dm.try_into().ok()?;
            if d == 0 {
                return None;
            }
            let nm = ((r.numer() % &p) + &p) % &p;
            let n: u64 = nm.try_into().ok()?;
            Some(((n as u128 * pow_mod(d, P - 2) as u128) % P as u128) as u64)
        };
        Some((part(&self.re)?, part(&self.im)?))
    }

    /// Primitive pseudo-remainder sequence over cleared Gaussian integers:
    /// integer content is stripped at every step, which keeps coefficient
    /// growth polynomial where the monic rational Euclid explodes.
    fn univariate_gcd_hook(
        a: &[(u32, Self)],
        b: &[(u32, Self)],
    ) -> Option<Vec<(u32, Self)>> {
        use num_traits::{One, Zero};
        type UP = Vec<(u32, GaussianRational)>;
        fn clear_and_strip(p: &[(u32, GaussianRational)]) -> UP {
            use num_integer::Integer;
            if p.is_empty() {
                return Vec::new();
            }
            let mut lcm = BigInt::one();
            for (_, c) in p {
                lcm = lcm.lcm(c.re.denom());
                lcm = lcm.lcm(c.im.denom());
            }
            let ints: Vec<(u32, BigInt, BigInt)> = p
                .iter()
                .map(|(d, c)| {
                    (
                        *d,
                        (&c.re * BigRational::from_integer(lcm.clone())).to_integer(),
                        (&c.im * BigRational::from_integer(lcm.clone())).to_integer(),
                    )
                })
                .collect();
            let mut content = BigInt::zero();
            for (_, re, im) in &ints {
                content = content.gcd(re);
                content = content.gcd(im);
            }
            if content.is_zero() {
                content = BigInt::one();
            }
            ints.into_iter()
                .map(|(d, re, im)| {
                    (
                        d,
                        GaussianRational::new(
                            BigRational::from_integer(&re / &content),
                            BigRational::from_integer(&im / &content),
                        ),
                    )
                })
                .collect()
        }
        fn degree(p: &UP) -> Option<u32> {
            p.last().map(|(d, _)| *d)
        }
        let mut f = clear_and_strip(a);
        let mut g = clear_and_strip(b);
        loop {
            match (degree(&f), degree(&g)) {
                (None, None) => return Some(Vec::new()),
                (None, Some(_)) => return Some(g),
                (Some(_), None) => return Some(f),
                (Some(df), Some(dg)) => {
                    if df < dg {
                        std::mem::swap(&mut f, &mut g);
                        continue;
                    }
                    // one pseudo-division pass: r = lc(g)^k f - ... until
                    // deg r < deg g, integer arithmetic throughout
                    let lg = g.last().unwrap().1.clone();
                    let mut r: std::collections::BTreeMap<u32, GaussianRational> =
                        f.iter().cloned().collect();
                    loop {
                        let Some((&dr, _)) = r.iter().next_back() else {
                            break;
                        };
                        if dr < dg {
                            break;
                        }
                        let lr = r[&dr].clone();
                        // r := lg * r - lr * x^(dr-dg) * g
                        let mut nr: std::collections::BTreeMap<u32, GaussianRational> =
                            std::collections::BTreeMap::new();
                        for (d, c) in &r {
                            let v = c.mul(&lg);
                            if !Field::is_zero(&v) {
                                nr.insert(*d, v);
                            }
                        }
                        for (d, c) in &g {
                            let nd = d + dr - dg;
                            let delta = c.mul(&lr);
                            match nr.entry(nd) {
                                std::collections::btree_map::Entry::Vacant(e) => {
                                    let v = delta.neg();
                                    if !Field::is_zero(&v) {
                                        e.insert(v);
                                    }
                                }
                                std::collections::btree_map::Entry::Occupied(mut e) => {
                                    let v = e.get().sub(&delta);
                                    if Field::is_zero(&v) {
                                        e.remove();
                                    } else {
                                        *e.get_mut() = v;
                                    }
                                }
                            }
                        }
                        r = nr;
                    }
                    f = g;
                    g = clear_and_strip(&r.into_iter().collect::<Vec<_>>());
                }
            }
        }
    }
}

fn fmt_rat(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", fmt_rat(&self.re))
        } else {
            let sign = if self.im.is_negative() { "-" } else { "+" };
            write!(
                f,
                "({}){}({})i",
                fmt_rat(&self.re),
                sign,
                fmt_rat(&self.im.abs())
            )
        }
    }
}

impl fmt::Debug for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

#[derive(Debug, thiserror::Error)]
#[error("invalid coefficient literal: {0}")]
pub struct ParseCoeffError(pub String);

impl FromStr for GaussianRational {
    type Err = ParseCoeffError;

    /// Accepts `a`, `a/b`, `(a/b)+(c/d)i`, `(a/b)-(c/d)i`, `i`, `-i`,
    /// and `(c/d)i`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || ParseCoeffError(s.to_string());
        let parse_rat = |t: &str| -> Result<BigRational, ParseCoeffError> {
            let t = t.trim().trim_start_matches('(').trim_end_matches(')');
            BigRational::from_str(t).map_err(|_| ParseCoeffError(s.to_string()))
        };
        if s == "i" {
            return Ok(GaussianRational::i());
        }
        if s == "-i" {
            return Ok(Field::neg(&GaussianRational::i()));
        }
        if let Some(body) = s.strip_suffix('i') {
            // forms: "(a)+(b)i", "(a)-(b)i", "(b)i"
            let body = body.trim();
            // split on +/- between the two parenthesized groups
            if let Some(close) = body.find(')') {
                let rest = &body[close + 1..];
                if rest.is_empty() {
                    // "(b)i"
                    return Ok(GaussianRational::new(BigRational::zero(), parse_rat(body)?));
                }
                let op = rest.chars().next().ok_or_else(bad)?;
                let re = parse_rat(&body[..=close])?;
                let im = parse_rat(&rest[1..])?;
                let im = match op {
                    '+' => im,
                    '-' => -im,
                    _ => return Err(bad()),
                };
                return Ok(GaussianRational::new(re, im));
            }
            return Ok(GaussianRational::new(BigRational::zero(), parse_rat(body)?));
        }
        Ok(GaussianRational::new(parse_rat(s)?, BigRational::zero()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn random_gq(rng: &mut SplitMix64) -> GaussianRational {
        let a = rng.i64_in(-20, 20);
        let b = rng.i64_in(1, 9);
        let c = rng.i64_in(-20, 20);
        let d = rng.i64_in(1, 9);
        GaussianRational::new(
            BigRational::new(BigInt::from(a), BigInt::from(b)),
            BigRational::new(BigInt::from(c), BigInt::from(d)),
        )
    }

    #[test]
    fn field_axioms_hold_on_random_triples() {
        let mut rng = SplitMix64::new(0xA5A5);
        for _ in 0..200 {
            let a = random_gq(&mut rng);
            let b = random_gq(&mut rng);
            let c = random_gq(&mut rng);
            assert_eq!(a.add(&b), b.add(&a));
            assert_eq!(a.mul(&b), b.mul(&a));
            assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
            assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            assert_eq!(a.add(&b).mul(&c), a.mul(&c).add(&b.mul(&c)));
            if !Field::is_zero(&a) {
                let inv = a.inv().unwrap();
                assert!(a.mul(&inv).is_one());
            }
        }
    }

    #[test]
    fn i_squared_is_minus_one() {
        let i = GaussianRational::i();
        assert_eq!(i.mul(&i), GaussianRational::from_int(-1));
    }

    #[test]
    fn display_parse_roundtrip() {
        let mut rng = SplitMix64::new(7);
        for _ in 0..100 {
            let a = random_gq(&mut rng);
            let s = a.to_string();
            let back: GaussianRational = s.parse().unwrap();
            assert_eq!(a, back, "roundtrip failed for {s}");
        }
        let cases = ["3", "-5/7", "(1/2)+(3)i", "(0)-(2/9)i", "i", "-i"];
        for c in cases {
            let v: GaussianRational = c.parse().unwrap();
            let again: GaussianRational = v.to_string().parse().unwrap();
            assert_eq!(v, again);
        }
    }
}
