use super::{Coframe, GenId, Scalar};
use crate::field::Field;
use crate::ratfun::RatFunError;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// Exterior form of homogeneous degree over a coframe.
///
/// Terms map strictly increasing generator-index tuples to scalar
/// coefficients; zero coefficients are never stored, so equality is
/// structural. The zero form carries a degree like any other.
#[derive(Clone)]
pub struct Form {
    coframe: Arc<Coframe>,
    degree: usize,
    terms: BTreeMap<Vec<GenId>, Scalar>,
}

#[derive(Debug, thiserror::Error)]
pub enum FormError {
    #[error("forms live over different coframes")]
    CoframeMismatch,
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("unknown generator: {0}")]
    UnknownGenerator(String),
    #[error(transparent)]
    Scalar(#[from] RatFunError),
}

impl PartialEq for Form {
    fn eq(&self, other: &Self) -> bool {
        // zero forms of different degrees are still zero
        if self.terms.is_empty() && other.terms.is_empty() {
            return true;
        }
        self.degree == other.degree
            && self.terms == other.terms
            && Arc::ptr_eq(&self.coframe, &other.coframe)
    }
}

impl Form {
    pub fn zero(coframe: Arc<Coframe>, degree: usize) -> Self {
        Form {
            coframe,
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(coframe: Arc<Coframe>, value: Scalar) -> Self {
        let mut f = Form::zero(coframe, 0);
        if !value.is_zero() {
            f.terms.insert(Vec::new(), value);
        }
        f
    }

    pub fn generator(coframe: Arc<Coframe>, id: GenId) -> Self {
        let mut f = Form::zero(coframe, 1);
        f.terms.insert(vec![id], Scalar::one());
        f
    }

    pub fn coframe(&self) -> &Arc<Coframe> {
        &self.coframe
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<GenId>, &Scalar)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, indices: &[GenId]) -> Scalar {
        self.terms
            .get(indices)
            .cloned()
            .unwrap_or_else(Scalar::zero)
    }

    /// Adds `c * e_{i1} ^ ... ^ e_{ik}` where the indices may come in any
    /// order; repeated indices kill the term, odd permutations flip the sign.
    pub fn insert_term(&mut self, indices: &[GenId], c: Scalar) {
        if c.is_zero() {
            return;
        }
        debug_assert_eq!(indices.len(), self.degree, "term degree mismatch");
        let mut idx = indices.to_vec();
        // sort with parity tracking (insertion sort; tuples are short)
        let mut sign_neg = false;
        for i in 1..idx.len() {
            let mut j = i;
            while j > 0 && idx[j - 1] > idx[j] {
                idx.swap(j - 1, j);
                sign_neg = !sign_neg;
                j -= 1;
            }
        }
        if idx.windows(2).any(|w| w[0] == w[1]) {
            return;
        }
        let c = if sign_neg { c.neg() } else { c };
        match self.terms.entry(idx) {
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

    pub fn from_terms<'a>(
        coframe: Arc<Coframe>,
        degree: usize,
        items: impl IntoIterator<Item = (&'a [GenId], Scalar)>,
    ) -> Self {
        let mut f = Form::zero(coframe, degree);
        for (idx, c) in items {
            f.insert_term(idx, c);
        }
        f
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        assert_eq!(self.degree, other.degree, "degree mismatch in add");
        let mut out = self.clone();
        for (idx, c) in &other.terms {
            out.insert_sorted(idx.clone(), c.clone());
        }
        out
    }

    fn insert_sorted(&mut self, idx: Vec<GenId>, c: Scalar) {
        match self.terms.entry(idx) {
            std::collections::btree_map::Entry::Vacant(e) => {
                if !c.is_zero() {
                    e.insert(c);
                }
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

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Form {
            coframe: self.coframe.clone(),
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .map(|(i, c)| (i.clone(), c.neg()))
                .collect(),
        }
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        if c.is_zero() {
            return Form::zero(self.coframe.clone(), self.degree);
        }
        Form {
            coframe: self.coframe.clone(),
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .map(|(i, k)| (i.clone(), k.mul(c)))
                .collect(),
        }
    }

    /// Exterior product. Degrees add; graded-commutative and associative.
    pub fn wedge(&self, other: &Self) -> Self {
        assert!(
            Arc::ptr_eq(&self.coframe, &other.coframe),
            "wedge across coframes"
        );
        let mut out = Form::zero(self.coframe.clone(), self.degree + other.degree);
        for (ia, ca) in &self.terms {
            for (ib, cb) in &other.terms {
                let mut idx = Vec::with_capacity(ia.len() + ib.len());
                idx.extend_from_slice(ia);
                idx.extend_from_slice(ib);
                out.insert_term(&idx, ca.mul(cb));
            }
        }
        out
    }

    /// Coefficient-wise scalar substitution.
    pub fn substitute_scalars(
        &self,
        assign: &BTreeMap<String, Scalar>,
    ) -> Result<Self, FormError> {
        let mut out = Form::zero(self.coframe.clone(), self.degree);
        for (idx, c) in &self.terms {
            out.insert_sorted(idx.clone(), c.substitute(assign)?);
        }
        Ok(out)
    }

    /// Replaces every occurrence of the generator by a 1-form over the same
    /// coframe.
    pub fn substitute_generator(&self, gen: GenId, replacement: &Form) -> Self {
        assert_eq!(replacement.degree, 1, "replacement must be a 1-form");
        let mut out = Form::zero(self.coframe.clone(), self.degree);
        for (idx, c) in &self.terms {
            match idx.iter().position(|&g| g == gen) {
                None => out.insert_sorted(idx.clone(), c.clone()),
                Some(pos) => {
                    let rest: Vec<GenId> = idx
                        .iter()
                        .copied()
                        .filter(|&g| g != gen)
                        .collect();
                    let sign_neg = pos % 2 == 1;
                    for (ridx, rc) in &replacement.terms {
                        let mut new_idx = Vec::with_capacity(idx.len());
                        new_idx.extend_from_slice(ridx);
                        new_idx.extend_from_slice(&rest);
                        let mut coeff = c.mul(rc);
                        if sign_neg {
                            coeff = coeff.neg();
                        }
                        out.insert_term(&new_idx, coeff);
                    }
                }
            }
        }
        out
    }

    pub fn contains_generator(&self, gen: GenId) -> bool {
        self.terms.keys().any(|idx| idx.contains(&gen))
    }

    /// Conjugates every coefficient (i -> -i).
    pub fn conj(&self) -> Self {
        Form {
            coframe: self.coframe.clone(),
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .map(|(i, c)| (i.clone(), c.conj_coefficients()))
                .collect(),
        }
    }

    /// Rebuilds the form over another coframe by generator names; scalars in
    /// coefficients are untouched. Generators must all exist in the target.
    pub fn transfer(&self, target: &Arc<Coframe>) -> Result<Form, FormError> {
        let map: Vec<Option<GenId>> = (0..self.coframe.len())
            .map(|i| target.gen_id(self.coframe.gen_name(i)))
            .collect();
        let mut out = Form::zero(target.clone(), self.degree);
        for (idx, c) in &self.terms {
            let mut nidx = Vec::with_capacity(idx.len());
            for &g in idx {
                match map[g] {
                    Some(t) => nidx.push(t),
                    None => {
                        return Err(FormError::UnknownGenerator(
                            self.coframe.gen_name(g).to_string(),
                        ))
                    }
                }
            }
            out.insert_term(&nidx, c.clone());
        }
        Ok(out)
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (idx, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if idx.is_empty() {
                write!(f, "({c})")?;
                continue;
            }
            let names: Vec<&str> = idx.iter().map(|&g| self.coframe.gen_name(g)).collect();
            write!(f, "({c}) {}", names.join("^"))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::ScalarKind;

    fn small_coframe() -> Arc<Coframe> {
        Coframe::new(
            vec!["om1".into(), "om2".into(), "om3".into(), "om4".into()],
            vec![("x".into(), ScalarKind::Constant)],
        )
    }

    fn gen(cf: &Arc<Coframe>, name: &str) -> Form {
        Form::generator(cf.clone(), cf.gen_id(name).unwrap())
    }

    #[test]
    fn wedge_alternates_and_anticommutes() {
        let cf = small_coframe();
        let w1 = gen(&cf, "om1");
        let w2 = gen(&cf, "om2");
        assert!(w1.wedge(&w1).is_zero());
        assert!(w1.wedge(&w2).add(&w2.wedge(&w1)).is_zero());
        let s = w1.add(&w2).wedge(&w2);
        assert_eq!(s, w1.wedge(&w2));
    }

    #[test]
    fn graded_commutativity_and_associativity() {
        let cf = small_coframe();
        let a = gen(&cf, "om1").add(&gen(&cf, "om3").scale(&Scalar::var("x")));
        let b = gen(&cf, "om2");
        let c = gen(&cf, "om4").add(&gen(&cf, "om1"));
        // 1-forms anticommute
        assert_eq!(a.wedge(&b), b.wedge(&a).neg());
        // 2-form and 1-form commute
        let ab = a.wedge(&b);
        assert_eq!(ab.wedge(&c), c.wedge(&ab));
        assert_eq!(a.wedge(&b.wedge(&c)), ab.wedge(&c));
    }

    #[test]
    fn insert_term_sign_normalization() {
        let cf = small_coframe();
        let mut f = Form::zero(cf.clone(), 2);
        f.insert_term(&[1, 0], Scalar::one());
        let mut g = Form::zero(cf, 2);
        g.insert_term(&[0, 1], Scalar::from_int(-1));
        assert_eq!(f, g);
    }

    #[test]
    fn substitute_generator_respects_position_sign() {
        let cf = small_coframe();
        let w1 = gen(&cf, "om1");
        let w3 = gen(&cf, "om3");
        let f = w1.wedge(&gen(&cf, "om2"));
        // replace om2 by om3: om1^om2 -> om1^om3
        let out = f.substitute_generator(cf.gen_id("om2").unwrap(), &w3);
        assert_eq!(out, w1.wedge(&w3));
        // replace om1 by om3 in om1^om2
        let out2 = f.substitute_generator(cf.gen_id("om1").unwrap(), &w3);
        assert_eq!(out2, w3.wedge(&gen(&cf, "om2")));
    }
}
