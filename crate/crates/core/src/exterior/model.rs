use super::{Coframe, Form, FormError, GenId, Scalar, ScalarKind};
use crate::field::Field;
use std::collections::BTreeMap;
use std::sync::Arc;

/// A coframe together with the exterior derivative of every generator and
/// the prescribed differentials of the dependent scalars. Encodes a frame
/// bundle through its structure equations.
#[derive(Clone, Debug)]
pub struct StructureModel {
    coframe: Arc<Coframe>,
    d_gen: Vec<Form>,
    d_scalar: BTreeMap<String, Form>,
}

/// An ideal 1-form together with the generator it is solved for. The solved
/// generator must appear with an invertible coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct SolvedOneForm {
    pub form: Form,
    pub solve_for: GenId,
}

#[derive(Debug, thiserror::Error)]
pub enum ReduceError {
    #[error("ideal form has zero coefficient on its designated generator {0}")]
    NotSolvable(String),
    #[error(transparent)]
    Form(#[from] FormError),
}

impl StructureModel {
    pub fn new(
        coframe: Arc<Coframe>,
        d_gen: Vec<Form>,
        d_scalar: BTreeMap<String, Form>,
    ) -> Self {
        assert_eq!(d_gen.len(), coframe.len(), "every generator needs its d");
        for f in &d_gen {
            assert!(f.is_zero() || f.degree() == 2, "d of a generator is a 2-form");
        }
        for (name, _) in coframe
            .scalars()
            .iter()
            .filter(|(_, k)| matches!(k, ScalarKind::Dependent))
        {
            assert!(
                d_scalar.contains_key(name),
                "dependent scalar {name} lacks a differential"
            );
        }
        StructureModel {
            coframe,
            d_gen,
            d_scalar,
        }
    }

    pub fn coframe(&self) -> &Arc<Coframe> {
        &self.coframe
    }

    pub fn d_of_generator(&self, id: GenId) -> &Form {
        &self.d_gen[id]
    }

    pub fn generator(&self, name: &str) -> Form {
        Form::generator(
            self.coframe.clone(),
            self.coframe
                .gen_id(name)
                .unwrap_or_else(|| panic!("unknown generator {name}")),
        )
    }

    pub fn scalar(&self, value: Scalar) -> Form {
        Form::scalar(self.coframe.clone(), value)
    }

    /// Differential of a named scalar as a 1-form.
    pub fn d_of_scalar_name(&self, name: &str) -> Form {
        match self.coframe.scalar_kind(name) {
            Some(ScalarKind::Free { diff }) => Form::generator(self.coframe.clone(), *diff),
            Some(ScalarKind::Dependent) => self.d_scalar[name].clone(),
            // undeclared names are treated as symbolic constants
            Some(ScalarKind::Constant) | None => Form::zero(self.coframe.clone(), 1),
        }
    }

    /// Differential of a scalar coefficient via the chain rule.
    pub fn d_of_coefficient(&self, c: &Scalar) -> Form {
        let mut vars: Vec<String> = c
            .numerator()
            .vars()
            .iter()
            .chain(c.denominator().vars().iter())
            .cloned()
            .collect();
        vars.sort();
        vars.dedup();
        let mut out = Form::zero(self.coframe.clone(), 1);
        for v in vars {
            let dv = self.d_of_scalar_name(&v);
            if dv.is_zero() {
                continue;
            }
            out = out.add(&dv.scale(&c.derivative(&v)));
        }
        out
    }

    /// Exterior derivative driven by the structure equations: linear,
    /// Leibniz on wedges, uses the declared scalar differentials on
    /// coefficients and `d_of_generator` on generators.
    pub fn d(&self, f: &Form) -> Form {
        let mut out = Form::zero(self.coframe.clone(), f.degree() + 1);
        for (idx, c) in f.terms() {
            // dc ^ e_I
            let dc = self.d_of_coefficient(c);
            if !dc.is_zero() {
                for (didx, dcoef) in dc.terms() {
                    let mut full = Vec::with_capacity(idx.len() + 1);
                    full.extend_from_slice(didx);
                    full.extend_from_slice(idx);
                    out.insert_term(&full, dcoef.clone());
                }
            }
            // c * sum_j (-1)^(j-1) e_{i1} ^ .. ^ d(e_{ij}) ^ ..
            for (j, &g) in idx.iter().enumerate() {
                let dg = &self.d_gen[g];
                if dg.is_zero() {
                    continue;
                }
                let rest: Vec<GenId> = idx
                    .iter()
                    .enumerate()
                    .filter_map(|(k, &h)| (k != j).then_some(h))
                    .collect();
                let sign_neg = j % 2 == 1;
                for (didx, dcoef) in dg.terms() {
                    let mut full = Vec::with_capacity(idx.len() + 1);
                    full.extend_from_slice(didx);
                    full.extend_from_slice(&rest);
                    let mut coeff = c.mul(dcoef);
                    if sign_neg {
                        coeff = coeff.neg();
                    }
                    out.insert_term(&full, coeff);
                }
            }
        }
        out
    }

    /// `d . d = 0` on every generator; holds for the flat models shipped
    /// here and is asserted by the identity suite.
    pub fn d_squared_zero(&self) -> bool {
        (0..self.coframe.len()).all(|g| self.d(&self.d_gen[g]).is_zero())
    }

    /// Triangularizes the ideal: rewrites each solved generator purely in
    /// terms of unsolved ones, so a single substitution pass is a normal
    /// form.
    pub fn triangularize_ideal(
        &self,
        ideal: &[SolvedOneForm],
    ) -> Result<Vec<(GenId, Form)>, ReduceError> {
        // substitution target for each solved generator:
        //   g = g - form / coeff(g)
        let mut subs: Vec<(GenId, Form)> = Vec::new();
        for item in ideal {
            let g = item.solve_for;
            let coeff = item.form.coefficient(&[g]);
            if coeff.is_zero() {
                return Err(ReduceError::NotSolvable(
                    self.coframe.gen_name(g).to_string(),
                ));
            }
            let inv = coeff.inv().expect("nonzero");
            // g = g - inv*form  (the rhs has no g term)
            let gform = Form::generator(self.coframe.clone(), g);
            let rhs = gform.sub(&item.form.scale(&inv));
            subs.push((g, rhs));
        }
        // back-substitute until each rhs avoids every solved generator
        let solved: Vec<GenId> = subs.iter().map(|(g, _)| *g).collect();
        loop {
            let mut changed = false;
            for i in 0..subs.len() {
                for (k, &g) in solved.iter().enumerate() {
                    if k == i {
                        continue;
                    }
                    if subs[i].1.contains_generator(g) {
                        let repl = subs[k].1.clone();
                        subs[i].1 = subs[i].1.substitute_generator(g, &repl);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        for (g, rhs) in &subs {
            if rhs.contains_generator(*g) {
                return Err(ReduceError::NotSolvable(
                    self.coframe.gen_name(*g).to_string(),
                ));
            }
        }
        Ok(subs)
    }

    /// Normal form of `f` modulo the algebraic ideal generated by the given
    /// 1-forms: substitutes every solved generator; the result contains none
    /// of them and is congruent to `f` modulo the ideal.
    pub fn reduce_mod(&self, f: &Form, ideal: &[SolvedOneForm]) -> Result<Form, ReduceError> {
        let subs = self.triangularize_ideal(ideal)?;
        Ok(Self::apply_substitutions(f, &subs))
    }

    pub fn apply_substitutions(f: &Form, subs: &[(GenId, Form)]) -> Form {
        let mut out = f.clone();
        for (g, rhs) in subs {
            if out.contains_generator(*g) {
                out = out.substitute_generator(*g, rhs);
            }
        }
        out
    }

    /// New model with scalars substituted away: the listed scalars are
    /// removed from the coframe and every coefficient is specialized.
    /// Free scalars being fixed lose their differential generators.
    pub fn substituted(
        &self,
        assign: &BTreeMap<String, Scalar>,
    ) -> Result<StructureModel, FormError> {
        // generators to drop: differentials of substituted free scalars
        let mut drop_gens: Vec<GenId> = Vec::new();
        for (name, kind) in self.coframe.scalars() {
            if assign.contains_key(name) {
                if let ScalarKind::Free { diff } = kind {
                    drop_gens.push(*diff);
                }
            }
        }
        let kept: Vec<GenId> =
            (0..self.coframe.len()).filter(|g| !drop_gens.contains(g)).collect();
        let new_gens: Vec<String> = kept
            .iter()
            .map(|&g| self.coframe.gen_name(g).to_string())
            .collect();
        let new_scalars: Vec<(String, ScalarKind)> = self
            .coframe
            .scalars()
            .iter()
            .filter(|(n, _)| !assign.contains_key(n))
            .map(|(n, k)| {
                let k = match k {
                    ScalarKind::Free { diff } => ScalarKind::Free {
                        diff: kept
                            .iter()
                            .position(|&g| g == *diff)
                            .expect("kept free differential"),
                    },
                    other => other.clone(),
                };
                (n.clone(), k)
            })
            .collect();
        let new_cf = Coframe::new(new_gens, new_scalars);
        let move_form = |f: &Form| -> Result<Form, FormError> {
            let specialized = f.substitute_scalars(assign)?;
            // dropped generators must not appear in any surviving form
            for &g in &drop_gens {
                if specialized.contains_generator(g) {
                    return Err(FormError::UnknownGenerator(
                        self.coframe.gen_name(g).to_string(),
                    ));
                }
            }
            specialized.transfer(&new_cf)
        };
        let d_gen: Vec<Form> = kept
            .iter()
            .map(|&g| move_form(&self.d_gen[g]))
            .collect::<Result<_, _>>()?;
        let d_scalar: BTreeMap<String, Form> = self
            .d_scalar
            .iter()
            .filter(|(n, _)| !assign.contains_key(*n))
            .map(|(n, f)| Ok((n.clone(), move_form(f)?)))
            .collect::<Result<_, FormError>>()?;
        Ok(StructureModel::new(new_cf, d_gen, d_scalar))
    }

    /// New model with one generator eliminated by the linear relation
    /// `gen = expr` (a 1-form not involving `gen`). Every stored form is
    /// rewritten and the generator removed from the coframe.
    pub fn with_generator_eliminated(
        &self,
        gen: GenId,
        expr: &Form,
    ) -> Result<StructureModel, FormError> {
        assert!(!expr.contains_generator(gen), "relation must be solved");
        let kept: Vec<GenId> = (0..self.coframe.len()).filter(|&g| g != gen).collect();
        let new_gens: Vec<String> = kept
            .iter()
            .map(|&g| self.coframe.gen_name(g).to_string())
            .collect();
        let new_scalars: Vec<(String, ScalarKind)> = self
            .coframe
            .scalars()
            .iter()
            .map(|(n, k)| {
                let k = match k {
                    ScalarKind::Free { diff } => {
                        assert!(*diff != gen, "cannot eliminate a free differential here");
                        ScalarKind::Free {
                            diff: kept.iter().position(|&g| g == *diff).unwrap(),
                        }
                    }
                    other => other.clone(),
                };
                (n.clone(), k)
            })
            .collect();
        let new_cf = Coframe::new(new_gens, new_scalars);
        let move_form = |f: &Form| -> Result<Form, FormError> {
            let rewritten = if f.contains_generator(gen) {
                f.substitute_generator(gen, expr)
            } else {
                f.clone()
            };
            rewritten.transfer(&new_cf)
        };
        let d_gen: Vec<Form> = kept
            .iter()
            .map(|&g| move_form(&self.d_gen[g]))
            .collect::<Result<_, _>>()?;
        let d_scalar: BTreeMap<String, Form> = self
            .d_scalar
            .iter()
            .map(|(n, f)| Ok((n.clone(), move_form(f)?)))
            .collect::<Result<_, FormError>>()?;
        Ok(StructureModel::new(new_cf, d_gen, d_scalar))
    }

    /// Extends the model with fresh free scalars whose differentials are new
    /// generators with `d = 0` (used by prolongation).
    pub fn with_free_scalars(&self, names: &[String]) -> StructureModel {
        let mut gens: Vec<String> = self.coframe.gen_names().to_vec();
        let mut scalars = self.coframe.scalars().to_vec();
        let base = gens.len();
        for (k, n) in names.iter().enumerate() {
            gens.push(format!("d{n}"));
            scalars.push((n.clone(), ScalarKind::Free { diff: base + k }));
        }
        let new_cf = Coframe::new(gens, scalars);
        let mut d_gen: Vec<Form> = self
            .d_gen
            .iter()
            .map(|f| f.transfer(&new_cf).expect("superset coframe"))
            .collect();
        for _ in names {
            d_gen.push(Form::zero(new_cf.clone(), 2));
        }
        let d_scalar: BTreeMap<String, Form> = self
            .d_scalar
            .iter()
            .map(|(n, f)| (n.clone(), f.transfer(&new_cf).expect("superset coframe")))
            .collect();
        StructureModel::new(new_cf, d_gen, d_scalar)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Model of R^2 with gens dx, dy, dz and z dependent? Simpler: a
    /// contact-like model: gens x-, y-differentials and a scalar u with
    /// du = p dx (p constant): checks chain rule and Leibniz.
    fn toy_model() -> StructureModel {
        let cf = Coframe::new(
            vec!["dx".into(), "dy".into()],
            vec![
                ("u".into(), ScalarKind::Dependent),
                ("p".into(), ScalarKind::Constant),
            ],
        );
        let d_gen = vec![Form::zero(cf.clone(), 2), Form::zero(cf.clone(), 2)];
        let mut d_scalar = BTreeMap::new();
        let du = Form::generator(cf.clone(), 0).scale(&Scalar::var("p"));
        d_scalar.insert("u".to_string(), du);
        StructureModel::new(cf, d_gen, d_scalar)
    }

    #[test]
    fn d_on_constants_and_scalars() {
        let m = toy_model();
        let c = m.scalar(Scalar::from_int(5));
        assert!(m.d(&c).is_zero());
        let u = m.scalar(Scalar::var("u"));
        let du = m.d(&u);
        assert_eq!(du, m.generator("dx").scale(&Scalar::var("p")));
        // d(u^2) = 2u du
        let u2 = m.scalar(Scalar::var("u").mul(&Scalar::var("u")));
        assert_eq!(
            m.d(&u2),
            m.generator("dx")
                .scale(&Scalar::var("p").mul(&Scalar::var("u")).mul(&Scalar::from_int(2)))
        );
    }

    #[test]
    fn d_leibniz_on_random_forms() {
        let m = toy_model();
        let a = m
            .generator("dx")
            .scale(&Scalar::var("u"))
            .add(&m.generator("dy").scale(&Scalar::from_int(3)));
        let b = m.generator("dy").scale(&Scalar::var("u"));
        let lhs = m.d(&a.wedge(&b));
        let rhs = m.d(&a).wedge(&b).sub(&a.wedge(&m.d(&b)));
        assert_eq!(lhs, rhs);
        assert!(m.d_squared_zero());
    }

    #[test]
    fn reduce_mod_solves_and_is_idempotent() {
        let m = toy_model();
        // ideal: alpha = dx - u dy solved for dx
        let alpha = m.generator("dx").sub(&m.generator("dy").scale(&Scalar::var("u")));
        let ideal = vec![SolvedOneForm {
            form: alpha.clone(),
            solve_for: 0,
        }];
        let red = m.reduce_mod(&alpha, &ideal).unwrap();
        assert!(red.is_zero());
        let f = m.generator("dx").wedge(&m.generator("dy"));
        let rf = m.reduce_mod(&f, &ideal).unwrap();
        // dx^dy -> (u dy)^dy = 0
        assert!(rf.is_zero());
        let g = m.generator("dx").add(&m.generator("dy"));
        let rg = m.reduce_mod(&g, &ideal).unwrap();
        let rg2 = m.reduce_mod(&rg, &ideal).unwrap();
        assert_eq!(rg, rg2);
        // congruence: f - reduce(f) reduces to zero
        let diff = g.sub(&rg);
        assert!(m.reduce_mod(&diff, &ideal).unwrap().is_zero());
    }

    #[test]
    fn triangularization_handles_chained_solves() {
        let m = toy_model();
        // alpha1 = dx - dy (solve dx), alpha2 = dy (solve dy)
        let a1 = m.generator("dx").sub(&m.generator("dy"));
        let a2 = m.generator("dy");
        let ideal = vec![
            SolvedOneForm {
                form: a1,
                solve_for: 0,
            },
            SolvedOneForm {
                form: a2,
                solve_for: 1,
            },
        ];
        // dx reduces to 0 through dy
        let red = m.reduce_mod(&m.generator("dx"), &ideal).unwrap();
        assert!(red.is_zero());
    }
}
