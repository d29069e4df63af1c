use crate::field::Field;
use crate::gaussian::GaussianRational;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

pub type VarSet = Arc<[String]>;
pub type Mono = Box<[u32]>;

/// Profiling counters for the non-trivial gcd path (probe misses).
pub static GCD_SLOW_CALLS: std::sync::atomic::AtomicU64 = std::sync::atomic::AtomicU64::new(0);
pub static GCD_SLOW_NANOS: std::sync::atomic::AtomicU64 = std::sync::atomic::AtomicU64::new(0);
/// Counters for every gcd entry.
pub static GCD_CALLS: std::sync::atomic::AtomicU64 = std::sync::atomic::AtomicU64::new(0);
pub static GCD_NANOS: std::sync::atomic::AtomicU64 = std::sync::atomic::AtomicU64::new(0);

/// Sparse multivariate polynomial over a coefficient field `F`.
///
/// Canonical form: variable names sorted ascending and all actually used by
/// some term, no zero coefficients. Equality is structural.
#[derive(Clone, PartialEq, Eq)]
pub struct MPoly<F: Field> {
    vars: VarSet,
    terms: BTreeMap<Mono, F>,
}

/// The workhorse polynomial type: sparse, Q(i) coefficients.
pub type Polynomial = MPoly<GaussianRational>;

pub fn varset(names: &[&str]) -> VarSet {
    let mut v: Vec<String> = names.iter().map(|s| s.to_string()).collect();
    v.sort();
    v.dedup();
    v.into()
}

impl<F: Field> MPoly<F> {
    pub fn zero() -> Self {
        MPoly {
            vars: Arc::from(Vec::<String>::new()),
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Self::constant(F::one())
    }

    pub fn constant(c: F) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Vec::new().into_boxed_slice(), c);
        }
        MPoly {
            vars: Arc::from(Vec::<String>::new()),
            terms,
        }
    }

    pub fn var(name: &str) -> Self {
        let vars: VarSet = vec![name.to_string()].into();
        let mut terms = BTreeMap::new();
        terms.insert(vec![1u32].into_boxed_slice(), F::one());
        MPoly { vars, terms }
    }

    /// Monomial `c * name^k`.
    pub fn monomial(c: F, name: &str, k: u32) -> Self {
        if c.is_zero() || k == 0 {
            return Self::constant(c);
        }
        let vars: VarSet = vec![name.to_string()].into();
        let mut terms = BTreeMap::new();
        terms.insert(vec![k].into_boxed_slice(), c);
        MPoly { vars, terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.len() <= 1 && self.terms.keys().all(|m| m.iter().all(|&e| e == 0))
    }

    pub fn is_one(&self) -> bool {
        self.is_constant() && self.constant_value().is_one()
    }

    /// Value when the polynomial is constant; zero polynomial gives 0.
    pub fn constant_value(&self) -> F {
        self.terms.values().next().cloned().unwrap_or_else(F::zero)
    }

    pub fn vars(&self) -> &VarSet {
        &self.vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &F)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|m| m.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn degree_in(&self, name: &str) -> u32 {
        match self.vars.iter().position(|v| v == name) {
            None => 0,
            Some(i) => self.terms.keys().map(|m| m[i]).max().unwrap_or(0),
        }
    }

    pub fn uses_var(&self, name: &str) -> bool {
        self.degree_in(name) > 0
    }

    /// Build from raw parts; normalizes.
    pub fn from_terms(vars: VarSet, terms: impl IntoIterator<Item = (Mono, F)>) -> Self {
        let mut map: BTreeMap<Mono, F> = BTreeMap::new();
        for (m, c) in terms {
            debug_assert_eq!(m.len(), vars.len());
            merge_term(&mut map, m, c);
        }
        MPoly { vars, terms: map }.purged()
    }

    /// Drops unused variables so equality is structural.
    fn purged(self) -> Self {
        if self.terms.is_empty() {
            return Self::zero();
        }
        let n = self.vars.len();
        let mut used = vec![false; n];
        for m in self.terms.keys() {
            for (i, &e) in m.iter().enumerate() {
                if e > 0 {
                    used[i] = true;
                }
            }
        }
        if used.iter().all(|&u| u) {
            return self;
        }
        let keep: Vec<usize> = (0..n).filter(|&i| used[i]).collect();
        let vars: VarSet = keep
            .iter()
            .map(|&i| self.vars[i].clone())
            .collect::<Vec<_>>()
            .into();
        let terms = self
            .terms
            .into_iter()
            .map(|(m, c)| {
                let nm: Mono = keep.iter().map(|&i| m[i]).collect::<Vec<_>>().into();
                (nm, c)
            })
            .collect();
        MPoly { vars, terms }
    }

    /// Remaps both polynomials onto the merged, sorted variable list.
    pub fn aligned(a: &Self, b: &Self) -> (VarSet, BTreeMap<Mono, F>, BTreeMap<Mono, F>) {
        if Arc::ptr_eq(&a.vars, &b.vars) || a.vars == b.vars {
            return (a.vars.clone(), a.terms.clone(), b.terms.clone());
        }
        let mut names: Vec<String> = a.vars.iter().chain(b.vars.iter()).cloned().collect();
        names.sort();
        names.dedup();
        let vars: VarSet = names.into();
        let ta = remap_terms(&a.terms, &a.vars, &vars);
        let tb = remap_terms(&b.terms, &b.vars, &vars);
        (vars, ta, tb)
    }

    /// Re-expresses this polynomial over a superset of its variables.
    pub fn on_vars(&self, vars: &VarSet) -> BTreeMap<Mono, F> {
        remap_terms(&self.terms, &self.vars, vars)
    }

    pub fn add(&self, other: &Self) -> Self {
        let (vars, mut ta, tb) = Self::aligned(self, other);
        for (m, c) in tb {
            merge_term(&mut ta, m, c);
        }
        MPoly { vars, terms: ta }.purged()
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        MPoly {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c.neg()))
                .collect(),
        }
    }

    pub fn scale(&self, c: &F) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        MPoly {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, k)| (m.clone(), k.mul(c)))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let (vars, ta, tb) = Self::aligned(self, other);
        let mut out: BTreeMap<Mono, F> = BTreeMap::new();
        for (ma, ca) in &ta {
            for (mb, cb) in &tb {
                let m: Mono = ma
                    .iter()
                    .zip(mb.iter())
                    .map(|(x, y)| x + y)
                    .collect::<Vec<_>>()
                    .into();
                merge_term(&mut out, m, ca.mul(cb));
            }
        }
        MPoly { vars, terms: out }.purged()
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Partial derivative.
    pub fn derivative(&self, name: &str) -> Self {
        let Some(i) = self.vars.iter().position(|v| v == name) else {
            return Self::zero();
        };
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = m[i];
            if e == 0 {
                continue;
            }
            let mut nm = m.to_vec();
            nm[i] = e - 1;
            let mut k = F::zero();
            for _ in 0..e {
                k = k.add(&F::one());
            }
            merge_term(&mut terms, nm.into_boxed_slice(), c.mul(&k));
        }
        MPoly {
            vars: self.vars.clone(),
            terms,
        }
        .purged()
    }

    /// Substitutes polynomials for variables; unlisted variables stay.
    pub fn substitute(&self, assign: &BTreeMap<String, MPoly<F>>) -> Self {
        if self.vars.iter().all(|v| !assign.contains_key(v)) {
            return self.clone();
        }
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let mut term = Self::constant(c.clone());
            for (i, &e) in m.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let name = &self.vars[i];
                let factor = match assign.get(name) {
                    Some(p) => p.pow(e),
                    None => Self::monomial(F::one(), name, e),
                };
                term = term.mul(&factor);
            }
            out = out.add(&term);
        }
        out
    }

    /// Leading term with respect to graded reverse lexicographic order.
    pub fn leading_term_grevlex(&self) -> Option<(Mono, F)> {
        use crate::order::TermOrder;
        let ord = TermOrder::GrevLex;
        self.terms
            .iter()
            .max_by(|(a, _), (b, _)| ord.cmp_monos(a, b))
            .map(|(m, c)| (m.clone(), c.clone()))
    }

    /// Exact division; `None` if `self` is not a polynomial multiple of `d`.
    pub fn exact_div(&self, d: &Self) -> Option<Self> {
        use crate::order::TermOrder;
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Self::zero());
        }
        if d.is_constant() {
            return Some(self.scale(&d.constant_value().inv()?));
        }
        let ord = TermOrder::GrevLex;
        let (vars, ta, tb) = Self::aligned(self, d);
        let mut rem: BTreeMap<Mono, F> = ta;
        let (dm, dc) = tb
            .iter()
            .max_by(|(a, _), (b, _)| ord.cmp_monos(a, b))
            .map(|(m, c)| (m.clone(), c.clone()))?;
        let mut quo: BTreeMap<Mono, F> = BTreeMap::new();
        while !rem.is_empty() {
            let (lm, lc) = rem
                .iter()
                .max_by(|(a, _), (b, _)| ord.cmp_monos(a, b))
                .map(|(m, c)| (m.clone(), c.clone()))
                .unwrap();
            let mut q = Vec::with_capacity(lm.len());
            for (x, y) in lm.iter().zip(dm.iter()) {
                if x < y {
                    return None;
                }
                q.push(x - y);
            }
            let qm: Mono = q.into();
            let qc = lc.div(&dc)?;
            // rem -= (qc * qm) * d
            for (m, c) in &tb {
                let mm: Mono = m
                    .iter()
                    .zip(qm.iter())
                    .map(|(x, y)| x + y)
                    .collect::<Vec<_>>()
                    .into();
                merge_term(&mut rem, mm, c.mul(&qc).neg());
            }
            merge_term(&mut quo, qm, qc);
        }
        Some(
            MPoly {
                vars,
                terms: quo,
            }
            .purged(),
        )
    }

    /// Divides by the grevlex leading coefficient, making it 1.
    pub fn monic(&self) -> Self {
        match self.leading_term_grevlex() {
            None => Self::zero(),
            Some((_, c)) => self.scale(&c.inv().expect("nonzero leading coefficient")),
        }
    }

    /// Multivariate gcd, normalized monic. A seeded evaluation probe
    /// certifies the (very common) coprime case cheaply; otherwise a
    /// primitive PRS over the last variable in the merged support.
    pub fn gcd(&self, other: &Self) -> Self {
        let t_all = std::time::Instant::now();
        GCD_CALLS.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        let out = self.gcd_inner(other);
        GCD_NANOS.fetch_add(
            t_all.elapsed().as_nanos() as u64,
            std::sync::atomic::Ordering::Relaxed,
        );
        out
    }

    fn gcd_inner(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.monic();
        }
        if other.is_zero() {
            return self.monic();
        }
        if self.is_constant() || other.is_constant() {
            return Self::one();
        }
        // quick outs: one divides the other
        if other.exact_div(self).is_some() {
            return self.monic();
        }
        if self.exact_div(other).is_some() {
            return other.monic();
        }
        // a common divisor only involves shared variables, so each side can
        // be collapsed to the gcd of its coefficients over the extra ones
        let shared: Vec<String> = self
            .vars
            .iter()
            .filter(|v| other.vars.contains(v))
            .cloned()
            .collect();
        if shared.len() < self.vars.len() || shared.len() < other.vars.len() {
            let a_red = self.coefficient_gcd_over(&shared);
            let b_red = other.coefficient_gcd_over(&shared);
            return a_red.gcd(&b_red);
        }
        let (vars, ta, tb) = Self::aligned(self, other);
        let main = vars.last().expect("nonconstant polys have vars").clone();
        if vars.len() == 1 {
            let flat = |t: &BTreeMap<Mono, F>| -> Vec<(u32, F)> {
                t.iter().map(|(m, c)| (m[0], c.clone())).collect()
            };
            let fa = flat(&ta);
            let fb = flat(&tb);
            // certified coprimality in the prime field image
            if modp::univariate_coprime(&fa, &fb) == Some(true) {
                return MPoly::one();
            }
            let g = F::univariate_gcd_hook(&fa, &fb)
                .unwrap_or_else(|| euclid_univariate(fa, fb));
            return MPoly::from_terms(
                vars,
                g.into_iter()
                    .map(|(d, c)| (vec![d].into_boxed_slice(), c)),
            )
            .monic();
        }
        // evaluation probe: substitute integers for the other variables and
        // take a univariate gcd; degree zero there certifies main-variable
        // coprimality of the primitive parts when the leading coefficient
        // survives the evaluation
        if let Some(g) = probe_gcd(self, other, &vars, &main) {
            return g;
        }
        let t0 = std::time::Instant::now();
        let out = (|| {
            if vars.len() == 2 {
                if let Some(g) = gcd_bivariate(self, other, &vars[0], &vars[1]) {
                    return g.monic();
                }
            }
            gcd_in_var(self, other, &main).monic()
        })();
        GCD_SLOW_CALLS.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        GCD_SLOW_NANOS.fetch_add(
            t0.elapsed().as_nanos() as u64,
            std::sync::atomic::Ordering::Relaxed,
        );
        out
    }

    /// Gcd of the coefficient polynomials obtained by grouping terms over
    /// the monomials in the variables outside `keep`.
    fn coefficient_gcd_over(&self, keep: &[String]) -> Self {
        let keep_idx: Vec<bool> = self.vars.iter().map(|v| keep.contains(v)).collect();
        let mut groups: BTreeMap<Mono, MPoly<F>> = BTreeMap::new();
        for (m, c) in &self.terms {
            let outer: Mono = m
                .iter()
                .enumerate()
                .map(|(i, &e)| if keep_idx[i] { 0 } else { e })
                .collect::<Vec<_>>()
                .into();
            let inner: Mono = m
                .iter()
                .enumerate()
                .map(|(i, &e)| if keep_idx[i] { e } else { 0 })
                .collect::<Vec<_>>()
                .into();
            let piece = MPoly::from_terms(self.vars.clone(), [(inner, c.clone())]);
            groups
                .entry(outer)
                .and_modify(|q| *q = q.add(&piece))
                .or_insert(piece);
        }
        let mut g = MPoly::zero();
        for c in groups.values() {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    /// Evaluates at field values for the given variables; all variables of
    /// the polynomial must be covered.
    pub fn eval(&self, assign: &BTreeMap<String, F>) -> Option<F> {
        let mut acc = F::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let v = assign.get(self.vars[i].as_str())?;
                for _ in 0..e {
                    t = t.mul(v);
                }
            }
            acc = acc.add(&t);
        }
        Some(acc)
    }
}

fn merge_term<F: Field>(map: &mut BTreeMap<Mono, F>, m: Mono, c: F) {
    if c.is_zero() {
        return;
    }
    match map.entry(m) {
        std::collections::btree_map::Entry::Vacant(e) => {
            e.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut e) => {
            let s = e.get().add(&c);
            if s.is_zero() {
                e.remove();
            } else {
                *e.get_mut() = s;
            }
        }
    }
}

fn remap_terms<F: Field>(
    terms: &BTreeMap<Mono, F>,
    from: &VarSet,
    to: &VarSet,
) -> BTreeMap<Mono, F> {
    let idx: Vec<usize> = from
        .iter()
        .map(|v| {
            to.iter()
                .position(|w| w == v)
                .expect("target variable set must be a superset")
        })
        .collect();
    terms
        .iter()
        .map(|(m, c)| {
            let mut nm = vec![0u32; to.len()];
            for (i, &e) in m.iter().enumerate() {
                nm[idx[i]] = e;
            }
            (nm.into_boxed_slice(), c.clone())
        })
        .collect()
}

fn int_to_field<F: Field>(n: i64) -> F {
    let neg = n < 0;
    let mut n = n.unsigned_abs();
    let mut acc = F::zero();
    let mut base = F::one();
    while n > 0 {
        if n & 1 == 1 {
            acc = acc.add(&base);
        }
        n >>= 1;
        base = base.add(&base);
    }
    if neg {
        acc.neg()
    } else {
        acc
    }
}

/// Univariate image of `p` in `main` after substituting integers for every
/// other variable; `None` when a coefficient ends up needing an absent
/// variable (cannot happen with a complete assignment).
fn eval_except<F: Field>(
    p: &MPoly<F>,
    main: &str,
    point: &BTreeMap<String, i64>,
) -> Vec<(u32, F)> {
    let mut acc: BTreeMap<u32, F> = BTreeMap::new();
    for (m, c) in &p.terms {
        let mut coeff = c.clone();
        let mut deg = 0u32;
        for (i, &e) in m.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let v = &p.vars[i];
            if v == main {
                deg = e;
            } else {
                let base: F = int_to_field(point[v.as_str()]);
                for _ in 0..e {
                    coeff = coeff.mul(&base);
                }
            }
        }
        match acc.entry(deg) {
            std::collections::btree_map::Entry::Vacant(en) => {
                if !coeff.is_zero() {
                    en.insert(coeff);
                }
            }
            std::collections::btree_map::Entry::Occupied(mut en) => {
                let s = en.get().add(&coeff);
                if s.is_zero() {
                    en.remove();
                } else {
                    *en.get_mut() = s;
                }
            }
        }
    }
    acc.into_iter().collect()
}

/// Euclidean remainder sequence over the coefficient field, with monic
/// normalization at every step to tame coefficient growth. Returns the
/// monic gcd as sparse (degree, coefficient) pairs.
fn euclid_univariate<F: Field>(
    mut a: Vec<(u32, F)>,
    mut b: Vec<(u32, F)>,
) -> Vec<(u32, F)> {
    let deg = |p: &Vec<(u32, F)>| p.last().map(|(d, _)| *d);
    let make_monic = |p: &mut Vec<(u32, F)>| {
        if let Some((_, lc)) = p.last() {
            let inv = lc.inv().expect("nonzero leading coefficient");
            if !inv.is_one() {
                for (_, c) in p.iter_mut() {
                    *c = c.mul(&inv);
                }
            }
        }
    };
    make_monic(&mut a);
    make_monic(&mut b);
    loop {
        match (deg(&a), deg(&b)) {
            (None, None) => return Vec::new(),
            (None, Some(_)) => return b,
            (Some(_), None) => return a,
            (Some(da), Some(db)) => {
                if da < db {
                    std::mem::swap(&mut a, &mut b);
                    continue;
                }
                // a -= lc(a) x^(da-db) b   (b monic)
                let la = a.last().unwrap().1.clone();
                let shift = da - db;
                let mut map: BTreeMap<u32, F> = a.into_iter().collect();
                for (d, c) in &b {
                    let nd = d + shift;
                    let delta = c.mul(&la);
                    match map.entry(nd) {
                        std::collections::btree_map::Entry::Vacant(en) => {
                            let v = delta.neg();
                            if !v.is_zero() {
                                en.insert(v);
                            }
                        }
                        std::collections::btree_map::Entry::Occupied(mut en) => {
                            let s = en.get().sub(&delta);
                            if s.is_zero() {
                                en.remove();
                            } else {
                                *en.get_mut() = s;
                            }
                        }
                    }
                }
                a = map.into_iter().collect();
                make_monic(&mut a);
            }
        }
    }
}

fn univariate_gcd_degree<F: Field>(a: Vec<(u32, F)>, b: Vec<(u32, F)>) -> u32 {
    euclid_univariate(a, b).last().map(|(d, _)| *d).unwrap_or(0)
}

/// Coprimality probe: returns `Some(gcd)` when an integer evaluation point
/// certifies that the gcd has degree zero in the main variable, reducing
/// the problem to the contents. The univariate test runs over a prime field
/// (through `FpReducible`) when the coefficients allow it, falling back to
/// exact arithmetic otherwise.
fn probe_gcd<F: Field>(
    a: &MPoly<F>,
    b: &MPoly<F>,
    vars: &VarSet,
    main: &str,
) -> Option<MPoly<F>> {
    let others: Vec<&String> = vars.iter().filter(|v| v.as_str() != main).collect();
    let lc_a = {
        let ua = univariate_coeffs(a, main);
        let (&da, _) = ua.iter().next_back()?;
        ua[&da].clone()
    };
    let seeds: [i64; 3] = [3, -5, 7];
    for (round, base) in seeds.iter().enumerate() {
        let point: BTreeMap<String, i64> = others
            .iter()
            .enumerate()
            .map(|(k, v)| ((*v).clone(), base + (k as i64) * (2 + round as i64)))
            .collect();
        // fast path: a prime-field image of the whole test
        match modp::probe_degree_zero(a, b, &lc_a, main, &point) {
            Some(true) => {
                let ca = content_wrt(a, main);
                let cb = content_wrt(b, main);
                return Some(ca.gcd(&cb).monic());
            }
            Some(false) => continue,
            // coefficients not reducible mod p: exact fallback
            None => {}
        }
        // leading coefficient must survive the evaluation for the probe to
        // certify anything
        let lc_val = eval_except(&lc_a, main, &point);
        if lc_val.is_empty() {
            continue;
        }
        let ua = eval_except(a, main, &point);
        let ub = eval_except(b, main, &point);
        if univariate_gcd_degree(ua, ub) == 0 {
            let ca = content_wrt(a, main);
            let cb = content_wrt(b, main);
            return Some(ca.gcd(&cb).monic());
        }
    }
    None
}

/// Prime-field images for the gcd probes. Elements of F_p[i] with
/// p = 2^31 - 1 (p = 3 mod 4, so i generates a quadratic extension field).
mod modp {
    use super::{Field, MPoly};
    use std::collections::BTreeMap;

    pub const P: u64 = 2_147_483_647;

    #[derive(Clone, Copy, PartialEq, Eq, Debug)]
    pub struct Fp2 {
        re: u64,
        im: u64,
    }

    pub fn pow_mod_public(b: u64, e: u64) -> u64 {
        pow_mod(b, e)
    }

    impl Fp2 {
        pub fn new(re: u64, im: u64) -> Self {
            Fp2 {
                re: re % P,
                im: im % P,
            }
        }

        pub fn is_zero(self) -> bool {
            self.re == 0 && self.im == 0
        }

        pub fn add(self, o: Self) -> Self {
            Fp2 {
                re: (self.re + o.re) % P,
                im: (self.im + o.im) % P,
            }
        }

        pub fn sub(self, o: Self) -> Self {
            Fp2 {
                re: (self.re + P - o.re) % P,
                im: (self.im + P - o.im) % P,
            }
        }

        pub fn mul(self, o: Self) -> Self {
            let rr = (self.re as u128 * o.re as u128) % P as u128;
            let ii = (self.im as u128 * o.im as u128) % P as u128;
            let ri = (self.re as u128 * o.im as u128) % P as u128;
            let ir = (self.im as u128 * o.re as u128) % P as u128;
            Fp2 {
                re: ((rr + P as u128 - ii) % P as u128) as u64,
                im: ((ri + ir) % P as u128) as u64,
            }
        }

        pub fn inv(self) -> Option<Self> {
            if self.is_zero() {
                return None;
            }
            // 1/(a+bi) = (a-bi)/(a^2+b^2)
            let n = ((self.re as u128 * self.re as u128 + self.im as u128 * self.im as u128)
                % P as u128) as u64;
            let ninv = pow_mod(n, P - 2);
            let conj = Fp2 {
                re: self.re,
                im: (P - self.im) % P,
            };
            Some(conj.mul(Fp2 { re: ninv, im: 0 }))
        }
    }

    fn pow_mod(mut b: u64, mut e: u64) -> u64 {
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
    }

    fn eval_modp<F: Field>(
        p: &MPoly<F>,
        main: &str,
        point: &BTreeMap<String, i64>,
    ) -> Option<Vec<(u32, Fp2)>> {
        let mut acc: BTreeMap<u32, Fp2> = BTreeMap::new();
        for (m, c) in p.terms() {
            let (cre, cim) = c.to_fp2_probe()?;
            let mut coeff = Fp2::new(cre, cim);
            let mut deg = 0u32;
            for (i, &e) in m.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let v = &p.vars()[i];
                if v == main {
                    deg = e;
                } else {
                    let t = point[v.as_str()];
                    let tm = if t >= 0 {
                        t as u64 % P
                    } else {
                        (P - ((-t) as u64 % P)) % P
                    };
                    coeff = coeff.mul(Fp2 {
                        re: pow_mod(tm, e as u64),
                        im: 0,
                    });
                }
            }
            let entry = acc.entry(deg).or_insert(Fp2 { re: 0, im: 0 });
            *entry = entry.add(coeff);
        }
        acc.retain(|_, v| !v.is_zero());
        Some(acc.into_iter().collect())
    }

    fn euclid_deg(mut a: Vec<(u32, Fp2)>, mut b: Vec<(u32, Fp2)>) -> u32 {
        let deg = |p: &Vec<(u32, Fp2)>| p.last().map(|(d, _)| *d);
        loop {
            match (deg(&a), deg(&b)) {
                (None, None) => return 0,
                (None, Some(d)) | (Some(d), None) => return d,
                (Some(da), Some(db)) => {
                    if da < db {
                        std::mem::swap(&mut a, &mut b);
                        continue;
                    }
                    let la = a.last().unwrap().1;
                    let lb = b.last().unwrap().1;
                    let q = la.mul(lb.inv().expect("nonzero"));
                    let shift = da - db;
                    let mut map: BTreeMap<u32, Fp2> = a.into_iter().collect();
                    for (d, c) in &b {
                        let nd = d + shift;
                        let delta = c.mul(q);
                        let e = map.entry(nd).or_insert(Fp2 { re: 0, im: 0 });
                        *e = e.sub(delta);
                    }
                    map.retain(|_, v| !v.is_zero());
                    a = map.into_iter().collect();
                }
            }
        }
    }

    /// Certified coprimality of univariate polynomials by the prime-field
    /// image: `Some(true)` only when both leading coefficients survive the
    /// reduction and the image gcd has degree zero.
    pub fn univariate_coprime<F: Field>(a: &[(u32, F)], b: &[(u32, F)]) -> Option<bool> {
        let lift = |p: &[(u32, F)]| -> Option<Vec<(u32, Fp2)>> {
            let mut out = Vec::with_capacity(p.len());
            for (d, c) in p {
                let (re, im) = c.to_fp2_probe()?;
                let v = Fp2::new(re, im);
                if !v.is_zero() {
                    out.push((*d, v));
                }
            }
            Some(out)
        };
        let ua = lift(a)?;
        let ub = lift(b)?;
        // the reductions must preserve the leading terms
        if ua.last().map(|(d, _)| d) != a.last().map(|(d, _)| d)
            || ub.last().map(|(d, _)| d) != b.last().map(|(d, _)| d)
        {
            return Some(false);
        }
        Some(euclid_deg(ua, ub) == 0)
    }

    /// `Some(true)`: certified gcd degree 0 at this point. `Some(false)`:
    /// inconclusive at this point (nonzero mod-p gcd or vanishing lc).
    /// `None`: coefficients not reducible mod p.
    pub fn probe_degree_zero<F: Field>(
        a: &MPoly<F>,
        b: &MPoly<F>,
        lc_a: &MPoly<F>,
        main: &str,
        point: &BTreeMap<String, i64>,
    ) -> Option<bool> {
        let lc = eval_modp(lc_a, main, point)?;
        if lc.is_empty() {
            return Some(false);
        }
        let ua = eval_modp(a, main, point)?;
        let ub = eval_modp(b, main, point)?;
        Some(euclid_deg(ua, ub) == 0)
    }
}

/// Views `p` as a univariate polynomial in `name`, coefficients in the rest.
fn univariate_coeffs<F: Field>(p: &MPoly<F>, name: &str) -> BTreeMap<u32, MPoly<F>> {
    let mut out: BTreeMap<u32, MPoly<F>> = BTreeMap::new();
    let pos = p.vars.iter().position(|v| v == name);
    for (m, c) in &p.terms {
        let (deg, rest): (u32, Mono) = match pos {
            None => (0, m.clone()),
            Some(i) => {
                let mut r = m.to_vec();
                let d = r.remove(i);
                (d, r.into_boxed_slice())
            }
        };
        let rest_vars: VarSet = match pos {
            None => p.vars.clone(),
            Some(i) => {
                let mut v: Vec<String> = p.vars.to_vec();
                v.remove(i);
                v.into()
            }
        };
        let piece = MPoly::from_terms(rest_vars, [(rest, c.clone())]);
        out.entry(deg)
            .and_modify(|q| *q = q.add(&piece))
            .or_insert(piece);
    }
    out.retain(|_, q| !q.is_zero());
    out
}

fn from_univariate<F: Field>(coeffs: &BTreeMap<u32, MPoly<F>>, name: &str) -> MPoly<F> {
    let mut acc = MPoly::zero();
    for (&d, c) in coeffs {
        acc = acc.add(&c.mul(&MPoly::monomial(F::one(), name, d)));
    }
    acc
}

fn content_wrt<F: Field>(p: &MPoly<F>, name: &str) -> MPoly<F> {
    let cs = univariate_coeffs(p, name);
    let mut g = MPoly::zero();
    for c in cs.values() {
        g = g.gcd(c);
        if g.is_one() {
            break;
        }
    }
    g
}

/// Bivariate gcd by evaluation and interpolation: the second variable is
/// sampled at integers, monic univariate gcds are scaled by the leading
/// coefficient gcd and interpolated back, and the candidate is certified by
/// trial division. Unlucky sample points only raise the apparent degree and
/// are discarded; failure falls back to the generic routine.
fn gcd_bivariate<F: Field>(
    f: &MPoly<F>,
    g: &MPoly<F>,
    x: &str,
    t: &str,
) -> Option<MPoly<F>> {
    let cont_f = content_wrt(f, x);
    let cont_g = content_wrt(g, x);
    let pf = f.exact_div(&cont_f)?;
    let pg = g.exact_div(&cont_g)?;
    let cont_gcd = cont_f.gcd(&cont_g);
    let lc = |p: &MPoly<F>| -> MPoly<F> {
        let d = p.degree_in(x);
        univariate_coeffs(p, x).remove(&d).expect("leading exists")
    };
    let lcf = lc(&pf);
    let lcg = lc(&pg);
    let gamma = lcf.gcd(&lcg);
    let dt_bound = gamma.degree_in(t) + pf.degree_in(t).min(pg.degree_in(t));
    let needed = (dt_bound + 1) as usize;
    let eval_at = |p: &MPoly<F>, k: i64| -> MPoly<F> {
        let mut m = BTreeMap::new();
        m.insert(t.to_string(), MPoly::constant(int_to_field::<F>(k)));
        p.substitute(&m)
    };
    let mut samples: Vec<(F, MPoly<F>)> = Vec::new();
    let mut min_deg: Option<u32> = None;
    let mut k: i64 = 0;
    let mut tried = 0;
    while samples.len() < needed && tried < needed as i64 + 40 {
        k += 1;
        tried += 1;
        let pt = if k % 2 == 0 { k / 2 } else { -(k / 2) - 1 };
        if eval_at(&lcf, pt).is_zero() || eval_at(&lcg, pt).is_zero() {
            continue;
        }
        let fi = eval_at(&pf, pt);
        let gi = eval_at(&pg, pt);
        let hi = fi.gcd(&gi);
        let d = hi.degree_in(x);
        if d == 0 {
            // primitive parts are coprime
            return Some(cont_gcd);
        }
        match min_deg {
            Some(md) if d > md => continue, // unlucky point
            Some(md) if d < md => {
                samples.clear();
                min_deg = Some(d);
            }
            None => min_deg = Some(d),
            _ => {}
        }
        let scale = eval_at(&gamma, pt).constant_value();
        samples.push((int_to_field::<F>(pt), hi.monic().scale(&scale)));
    }
    if samples.len() < needed {
        return None;
    }
    // Lagrange interpolation in t
    let mut cand = MPoly::<F>::zero();
    for (i, (ti, hi)) in samples.iter().enumerate() {
        let mut basis = MPoly::<F>::one();
        let mut denom = F::one();
        for (j, (tj, _)) in samples.iter().enumerate() {
            if i == j {
                continue;
            }
            basis = basis.mul(&MPoly::var(t).sub(&MPoly::constant(tj.clone())));
            denom = denom.mul(&ti.sub(tj));
        }
        let li = basis.scale(&denom.inv()?);
        cand = cand.add(&hi.mul(&li));
    }
    if cand.is_zero() {
        return None;
    }
    let cand_cont = content_wrt(&cand, x);
    let cand_pp = cand.exact_div(&cand_cont)?;
    // certification by trial division
    if pf.exact_div(&cand_pp).is_some() && pg.exact_div(&cand_pp).is_some() {
        Some(cont_gcd.mul(&cand_pp))
    } else {
        None
    }
}

/// Multivariate gcd through the main variable: contents split off, then a
/// primitive pseudo-remainder sequence. Only reached for three or more
/// variables after the probes and the bivariate interpolation path.
fn gcd_in_var<F: Field>(a: &MPoly<F>, b: &MPoly<F>, name: &str) -> MPoly<F> {
    let da = a.degree_in(name);
    let db = b.degree_in(name);
    if da == 0 || db == 0 {
        // gcd reduces to content computations
        if da == 0 && db == 0 {
            return MPoly::one();
        }
        let (c, p) = if da == 0 { (a, b) } else { (b, a) };
        let cont = content_wrt(p, name);
        return cont.gcd(c);
    }
    let ca = content_wrt(a, name);
    let cb = content_wrt(b, name);
    let pa = a.exact_div(&ca).expect("content divides");
    let pb = b.exact_div(&cb).expect("content divides");
    let cont_gcd = ca.gcd(&cb);
    let (mut f, mut g) = if da >= db { (pa, pb) } else { (pb, pa) };
    loop {
        if g.is_zero() {
            break;
        }
        if g.degree_in(name) == 0 {
            let c = content_wrt(&f, name).gcd(&g);
            return cont_gcd.mul(&c);
        }
        let r = pseudo_rem(&f, &g, name);
        f = g;
        g = if r.is_zero() {
            MPoly::zero()
        } else {
            let c = content_wrt(&r, name);
            r.exact_div(&c).expect("content divides")
        };
    }
    cont_gcd.mul(&f)
}

/// Pseudo-remainder of `a` by `b` in the given variable.
fn pseudo_rem<F: Field>(a: &MPoly<F>, b: &MPoly<F>, name: &str) -> MPoly<F> {
    let db = b.degree_in(name);
    debug_assert!(db > 0);
    let bc = univariate_coeffs(b, name);
    let lb = bc[&db].clone();
    let mut r = a.clone();
    loop {
        let dr = r.degree_in(name);
        if r.is_zero() || dr < db {
            return r;
        }
        let rc = univariate_coeffs(&r, name);
        let lr = rc[&dr].clone();
        let shift = MPoly::monomial(F::one(), name, dr - db);
        r = r.mul(&lb).sub(&lr.mul(&shift).mul(b));
    }
}


// ---------------------------------------------------------------------------
// parsing / printing
// ---------------------------------------------------------------------------

impl<F: Field> fmt::Display for MPoly<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use crate::order::TermOrder;
        if self.is_zero() {
            return write!(f, "0");
        }
        let ord = TermOrder::GrevLex;
        let mut items: Vec<(&Mono, &F)> = self.terms.iter().collect();
        items.sort_by(|(a, _), (b, _)| ord.cmp_monos(b, a));
        let mut first = true;
        for (m, c) in items {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let is_const_term = m.iter().all(|&e| e == 0);
            if is_const_term {
                write!(f, "{}", c)?;
                continue;
            }
            write!(f, "{}", c)?;
            for (i, &e) in m.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if e == 1 {
                    write!(f, " * {}", self.vars[i])?;
                } else {
                    write!(f, " * {}^{}", self.vars[i], e)?;
                }
            }
        }
        Ok(())
    }
}

impl<F: Field> fmt::Debug for MPoly<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

#[derive(Debug, thiserror::Error)]
#[error("invalid polynomial literal: {0}")]
pub struct ParsePolyError(pub String);

impl Polynomial {
    /// Parses the textual grammar: terms `coef * v1^e1 * v2^e2` joined by
    /// `+`/`-`; coefficients as accepted by `GaussianRational`; the
    /// coefficient may be omitted when it is 1.
    pub fn parse(s: &str) -> Result<Polynomial, ParsePolyError> {
        let bad = || ParsePolyError(s.to_string());
        let mut acc = Polynomial::zero();
        for (sign, chunk) in split_top_level(s) {
            let chunk = chunk.trim();
            if chunk.is_empty() {
                return Err(bad());
            }
            let mut term = Polynomial::one();
            let mut saw_any = false;
            for factor in chunk.split('*') {
                let factor = factor.trim();
                if factor.is_empty() {
                    return Err(bad());
                }
                saw_any = true;
                if let Ok(c) = factor.parse::<GaussianRational>() {
                    term = term.scale(&c);
                    continue;
                }
                let (name, exp) = match factor.split_once('^') {
                    None => (factor, 1u32),
                    Some((n, e)) => (n.trim(), e.trim().parse::<u32>().map_err(|_| bad())?),
                };
                if name.is_empty()
                    || !name
                        .chars()
                        .all(|c| c.is_ascii_alphanumeric() || c == '_')
                    || name.chars().next().unwrap().is_ascii_digit()
                {
                    return Err(bad());
                }
                term = term.mul(&Polynomial::monomial(GaussianRational::one(), name, exp));
            }
            if !saw_any {
                return Err(bad());
            }
            if sign < 0 {
                term = term.neg();
            }
            acc = acc.add(&term);
        }
        Ok(acc)
    }
}

/// Splits on top-level + and - (outside parentheses), yielding signed chunks.
fn split_top_level(s: &str) -> Vec<(i32, String)> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    let mut sign = 1i32;
    for (i, ch) in s.chars().enumerate() {
        match ch {
            '(' => {
                depth += 1;
                cur.push(ch);
            }
            ')' => {
                depth -= 1;
                cur.push(ch);
            }
            '+' | '-' if depth == 0 => {
                // a leading sign or a separator; '^' exponents never hit this
                if cur.trim().is_empty() && i == 0 {
                    sign = if ch == '-' { -1 } else { 1 };
                } else if cur.trim().is_empty() {
                    // consecutive sign, fold it in
                    if ch == '-' {
                        sign = -sign;
                    }
                } else {
                    out.push((sign, std::mem::take(&mut cur)));
                    sign = if ch == '-' { -1 } else { 1 };
                }
            }
            _ => cur.push(ch),
        }
    }
    if !cur.trim().is_empty() {
        out.push((sign, cur));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn p(s: &str) -> Polynomial {
        Polynomial::parse(s).unwrap()
    }

    fn random_poly(rng: &mut SplitMix64, vars: &[&str]) -> Polynomial {
        let mut acc = Polynomial::zero();
        let nterms = rng.i64_in(0, 4);
        for _ in 0..nterms {
            let (n, d) = rng.small_ratio();
            let mut t = Polynomial::constant(GaussianRational::from_ratio(n, d));
            for v in vars {
                let e = rng.i64_in(0, 2) as u32;
                if e > 0 {
                    t = t.mul(&Polynomial::monomial(GaussianRational::one(), v, e));
                }
            }
            acc = acc.add(&t);
        }
        acc
    }

    #[test]
    fn ring_axioms_on_random_triples() {
        let mut rng = SplitMix64::new(0xBEEF);
        for _ in 0..60 {
            let a = random_poly(&mut rng, &["x", "y", "z"]);
            let b = random_poly(&mut rng, &["y", "z", "w"]);
            let c = random_poly(&mut rng, &["x", "w"]);
            assert_eq!(a.add(&b), b.add(&a));
            assert_eq!(a.mul(&b), b.mul(&a));
            assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            assert_eq!(a.add(&b).mul(&c), a.mul(&c).add(&b.mul(&c)));
        }
    }

    #[test]
    fn unused_variables_are_purged() {
        let a = p("x + y").sub(&p("y"));
        assert_eq!(a, p("x"));
        assert_eq!(a.vars().len(), 1);
    }

    #[test]
    fn exact_division_and_gcd() {
        let a = p("x^2 - 1");
        let b = p("x - 1");
        assert_eq!(a.exact_div(&b).unwrap(), p("x + 1"));
        assert!(p("x^2 + 1").exact_div(&b).is_none());
        assert_eq!(a.gcd(&b), b);

        let f = p("x*y + y^2").mul(&p("x + z"));
        let g = p("x*y + y^2").mul(&p("x - z"));
        let d = f.gcd(&g);
        assert_eq!(d, p("x*y + y^2").monic());
    }

    #[test]
    fn gcd_random_products_share_factor() {
        let mut rng = SplitMix64::new(99);
        for _ in 0..25 {
            let mut f = random_poly(&mut rng, &["x", "y"]);
            if f.is_zero() {
                f = p("x");
            }
            let a = random_poly(&mut rng, &["x", "y"]);
            let b = random_poly(&mut rng, &["y"]);
            let fa = f.mul(&a);
            let fb = f.mul(&b);
            let g = fa.gcd(&fb);
            if !fa.is_zero() && !fb.is_zero() {
                assert!(fa.exact_div(&g).is_some());
                assert!(fb.exact_div(&g).is_some());
                assert!(g.exact_div(&f.monic()).is_some(), "f should divide gcd");
            }
        }
    }

    #[test]
    fn derivative_leibniz() {
        let mut rng = SplitMix64::new(3);
        for _ in 0..30 {
            let a = random_poly(&mut rng, &["x", "y"]);
            let b = random_poly(&mut rng, &["x", "y"]);
            let lhs = a.mul(&b).derivative("x");
            let rhs = a.derivative("x").mul(&b).add(&a.mul(&b.derivative("x")));
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn parse_display_roundtrip() {
        let mut rng = SplitMix64::new(11);
        for _ in 0..40 {
            let a = random_poly(&mut rng, &["x", "y", "z"]);
            let s = a.to_string();
            let back = Polynomial::parse(&s).unwrap();
            assert_eq!(a, back, "roundtrip failed for {s}");
        }
        assert_eq!(p("-x + 2*y"), p("2*y - x"));
        assert_eq!(p("(1/2)+(1/2)i * x"), p("(1/2)+(1/2)i*x"));
    }

    #[test]
    fn substitution() {
        let f = p("x^2 + y");
        let mut m = BTreeMap::new();
        m.insert("x".to_string(), p("y - 1"));
        assert_eq!(f.substitute(&m), p("y^2 - y + 1"));
    }
}
