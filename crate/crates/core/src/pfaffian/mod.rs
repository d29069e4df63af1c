//! Linear Pfaffian systems with independence condition: the standard systems
//! on frame bundles, integral-element solving, Cartan characters and
//! Cartan's test, forced 1-forms, torsion conditions, restriction to loci,
//! characteristic varieties, quadratic obstruction systems, and first
//! prolongation.

mod charvar;

pub use charvar::{CharVarietyReport, DropLocus};

use crate::austere::SymSpace;
use crate::exterior::{Form, GenId, ReduceError, Scalar, ScalarKind, SolvedOneForm, StructureModel};
use crate::field::Field;
use crate::frames::SemiOrthoFrame;
use crate::matrix::Mat;
use crate::poly::Polynomial;
use crate::rng::SplitMix64;
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Debug, thiserror::Error)]
pub enum PfaffError {
    #[error("system is not linear; {0}")]
    NotLinear(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("ideal 1-forms are linearly dependent")]
    DependentIdeal,
    #[error("no admissible integral elements at generic points; torsion conditions: {0:?}")]
    Torsion(Vec<Polynomial>),
    #[error("restriction equation is not linear in the designated scalar {0}")]
    NotSolvableScalar(String),
    #[error("constraint differential cannot be solved for a free generator")]
    NoSolvableGenerator,
    #[error(transparent)]
    Reduce(#[from] ReduceError),
    #[error(transparent)]
    Form(#[from] crate::exterior::FormError),
    #[error(transparent)]
    Groebner(#[from] crate::groebner::GroebnerError),
    #[error(transparent)]
    Matrix(#[from] crate::matrix::MatrixError),
}

/// Symmetric-family metadata: the 2-form at `two_form_index` is the (a, i)
/// entry of a tableau that is symmetric in its lower index pair. Drives the
/// characteristic-variety reduction.
#[derive(Clone, Debug)]
pub struct SymFamily {
    pub group: usize,
    pub slot: usize,
    pub two_form_index: usize,
}

/// Linear Pfaffian exterior differential system with independence condition.
#[derive(Clone)]
pub struct PfaffSystem {
    model: Arc<StructureModel>,
    ideal: Vec<SolvedOneForm>,
    independence: Vec<GenId>,
    free_gens: Vec<GenId>,
    two_forms: Vec<Form>,
    linear: bool,
    /// For systems produced by `augment` that lost linearity: the linear
    /// part they were built from.
    linear_part: Option<Box<PfaffSystem>>,
    /// Optional symmetric-tableau structure (set by `standard_system`).
    sym_families: Vec<SymFamily>,
}

impl std::fmt::Debug for PfaffSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "PfaffSystem {{ ideal: {}, independence: {}, free: {}, linear: {} }}",
            self.ideal.len(),
            self.independence.len(),
            self.free_gens.len(),
            self.linear
        )
    }
}

impl PfaffSystem {
    /// Builds a system from solved ideal 1-forms and the independence set.
    /// Verifies independence of the ideal, computes the reduced 2-forms and
    /// the linearity flag.
    pub fn new(
        model: Arc<StructureModel>,
        ideal: Vec<SolvedOneForm>,
        independence: Vec<GenId>,
    ) -> Result<Self, PfaffError> {
        let ncf = model.coframe().len();
        // distinct solved generators, none of them independence directions
        let mut solved: Vec<GenId> = Vec::new();
        for f in &ideal {
            if solved.contains(&f.solve_for) {
                return Err(PfaffError::DependentIdeal);
            }
            if independence.contains(&f.solve_for) {
                return Err(PfaffError::Dimension(
                    "ideal solved for an independence direction".into(),
                ));
            }
            solved.push(f.solve_for);
        }
        // ideal forms linearly independent: coefficient matrix rank
        if !ideal.is_empty() {
            let m: Mat<Scalar> = Mat::from_fn(ideal.len(), ncf, |k, g| {
                ideal[k].form.coefficient(&[g])
            });
            if m.rank() != ideal.len() {
                return Err(PfaffError::DependentIdeal);
            }
        }
        let free_gens: Vec<GenId> = (0..ncf)
            .filter(|g| !solved.contains(g) && !independence.contains(g))
            .collect();
        // reduced 2-forms
        let subs = model.triangularize_ideal(&ideal)?;
        let mut two_forms = Vec::with_capacity(ideal.len());
        for f in &ideal {
            let df = model.d(&f.form);
            two_forms.push(StructureModel::apply_substitutions(&df, &subs));
        }
        // linearity: no term with two free generators
        let mut linear = true;
        'outer: for tf in &two_forms {
            for (idx, _) in tf.terms() {
                let frees = idx.iter().filter(|g| free_gens.contains(g)).count();
                if frees >= 2 {
                    linear = false;
                    break 'outer;
                }
            }
        }
        Ok(PfaffSystem {
            model,
            ideal,
            independence,
            free_gens,
            two_forms,
            linear,
            linear_part: None,
            sym_families: Vec::new(),
        })
    }

    pub fn model(&self) -> &Arc<StructureModel> {
        &self.model
    }

    pub fn ideal(&self) -> &[SolvedOneForm] {
        &self.ideal
    }

    pub fn independence(&self) -> &[GenId] {
        &self.independence
    }

    pub fn free_generators(&self) -> &[GenId] {
        &self.free_gens
    }

    pub fn is_linear(&self) -> bool {
        self.linear
    }

    pub fn linear_part(&self) -> Option<&PfaffSystem> {
        self.linear_part.as_deref()
    }

    pub fn two_forms(&self) -> &[Form] {
        &self.two_forms
    }

    pub fn sym_families(&self) -> &[SymFamily] {
        &self.sym_families
    }

    /// Reduction modulo the algebraic ideal of the system's 1-forms.
    pub fn reduce(&self, f: &Form) -> Result<Form, PfaffError> {
        Ok(self.model.reduce_mod(f, &self.ideal)?)
    }

    fn n(&self) -> usize {
        self.independence.len()
    }

    /// Position of a generator in the independence list, if any.
    fn omega_slot(&self, g: GenId) -> Option<usize> {
        self.independence.iter().position(|&w| w == g)
    }

    fn free_slot(&self, g: GenId) -> Option<usize> {
        self.free_gens.iter().position(|&f| f == g)
    }

    /// Tableau of the linear system: coefficient of pi_rho ^ omega_j in each
    /// 2-form, plus the torsion part in omega ^ omega.
    pub fn tableau(&self) -> Result<Tableau, PfaffError> {
        if !self.linear {
            return Err(PfaffError::NotLinear("tableau requires linearity".into()));
        }
        let n = self.n();
        let nf = self.free_gens.len();
        let mut pi_part: Vec<Mat<Scalar>> = Vec::with_capacity(self.two_forms.len());
        let mut torsion: Vec<BTreeMap<(usize, usize), Scalar>> = Vec::new();
        for tf in &self.two_forms {
            let mut b: Mat<Scalar> = Mat::zero(nf, n);
            let mut c: BTreeMap<(usize, usize), Scalar> = BTreeMap::new();
            for (idx, coeff) in tf.terms() {
                let (g1, g2) = (idx[0], idx[1]);
                match (self.omega_slot(g1), self.omega_slot(g2)) {
                    (Some(j), Some(k)) => {
                        c.insert((j, k), coeff.clone());
                    }
                    (None, Some(j)) => {
                        // pi ^ omega term, pi = g1
                        let r = self.free_slot(g1).expect("non-independence is free");
                        b.set(r, j, b.get(r, j).add(coeff));
                    }
                    (Some(j), None) => {
                        // omega ^ pi = -pi ^ omega
                        let r = self.free_slot(g2).expect("non-independence is free");
                        b.set(r, j, b.get(r, j).sub(coeff));
                    }
                    (None, None) => unreachable!("linearity verified"),
                }
            }
            pi_part.push(b);
            torsion.push(c);
        }
        Ok(Tableau {
            n,
            free: self.free_gens.clone(),
            pi_part,
            torsion,
        })
    }

    /// Substitutes `pi = P . omega` into the 2-forms, equates the omega ^
    /// omega coefficients to zero and solves over the fraction field.
    pub fn integral_element_space(&self) -> Result<IntegralElementSpace, PfaffError> {
        let tab = self.tableau()?;
        let n = tab.n;
        let nf = tab.free.len();
        let unknowns = nf * n;
        let col = |rho: usize, k: usize| rho * n + k;
        let mut rows: Vec<Vec<Scalar>> = Vec::new();
        let mut rhs: Vec<Scalar> = Vec::new();
        for (e, b) in tab.pi_part.iter().enumerate() {
            for j in 0..n {
                for k in (j + 1)..n {
                    let mut row = vec![Scalar::zero(); unknowns];
                    let mut nontrivial = false;
                    for rho in 0..nf {
                        let bj = b.get(rho, j);
                        let bk = b.get(rho, k);
                        if !bj.is_zero() {
                            row[col(rho, k)] = row[col(rho, k)].add(bj);
                            nontrivial = true;
                        }
                        if !bk.is_zero() {
                            row[col(rho, j)] = row[col(rho, j)].sub(bk);
                            nontrivial = true;
                        }
                    }
                    let c = tab.torsion[e]
                        .get(&(j, k))
                        .cloned()
                        .unwrap_or_else(Scalar::zero);
                    if nontrivial || !c.is_zero() {
                        rows.push(row);
                        rhs.push(c.neg());
                    }
                }
            }
        }
        let debug = std::env::var("EDS_DEBUG_ELIM").is_ok();
        let t0 = std::time::Instant::now();
        let m: Mat<Scalar> = Mat::from_rows(rows);
        let sol = m.ff_solve_affine(&rhs);
        if debug {
            eprintln!("[ies] solved in {:?}", t0.elapsed());
        }
        if !sol.residues.is_empty() {
            return Err(PfaffError::Torsion(residue_polys(&sol.residues)));
        }
        // directions outside the tableau span are Cauchy-characteristic
        // freedom: they enter no 2-form, and the classical fiber count of
        // integral elements excludes them
        let span_rank = {
            let mut rows: Vec<Vec<Scalar>> = Vec::new();
            for b in &tab.pi_part {
                for j in 0..n {
                    let col: Vec<Scalar> = (0..nf).map(|r| b.get(r, j).clone()).collect();
                    if col.iter().any(|c| !c.is_zero()) {
                        rows.push(col);
                    }
                }
            }
            if rows.is_empty() {
                0
            } else {
                Mat::from_rows(rows).ff_rank()
            }
        };
        let cauchy = nf - span_rank;
        let dim = sol.kernel.len() - n * cauchy;
        let used: Vec<String> = self
            .model
            .coframe()
            .scalars()
            .iter()
            .map(|(n, _)| n.clone())
            .collect();
        let parameters = fresh_names("ip", sol.kernel.len(), &used);
        let mut assignment: BTreeMap<GenId, Vec<Scalar>> = BTreeMap::new();
        for (rho_idx, &rho) in tab.free.iter().enumerate() {
            let mut per_k = Vec::with_capacity(n);
            for k in 0..n {
                let mut v = sol.particular[col(rho_idx, k)].clone();
                for (m_idx, kv) in sol.kernel.iter().enumerate() {
                    let c = &kv[col(rho_idx, k)];
                    if !c.is_zero() {
                        v = v.add(&c.mul(&Scalar::var(&parameters[m_idx])));
                    }
                }
                per_k.push(v);
            }
            assignment.insert(rho, per_k);
        }
        if debug {
            eprintln!("[ies] assignment built in {:?}", t0.elapsed());
        }
        Ok(IntegralElementSpace {
            parameters,
            assignment,
            dimension: dim,
            characteristic_directions: cauchy,
        })
    }

    /// Torsion conditions: polynomial conditions on the model scalars
    /// necessary for admissible integral elements to exist at a point.
    /// Empty means no torsion. For nonlinear augmented systems these are the
    /// parameter-free quadratic obstructions.
    pub fn torsion_locus(&self) -> Result<Vec<Polynomial>, PfaffError> {
        if self.linear {
            match self.integral_element_space() {
                Ok(_) => Ok(Vec::new()),
                Err(PfaffError::Torsion(polys)) => Ok(polys),
                Err(e) => Err(e),
            }
        } else {
            let obstructions = self.quadratic_obstructions()?;
            let lp = self.linear_part().ok_or_else(|| {
                PfaffError::NotLinear("nonlinear system lacks its linear part".into())
            })?;
            let params = lp.cached_space()?.parameters.clone();
            Ok(obstructions
                .distinct
                .into_iter()
                .filter(|p| params.iter().all(|t| !p.uses_var(t)))
                .collect())
        }
    }

    fn cached_space(&self) -> Result<IntegralElementSpace, PfaffError> {
        self.integral_element_space()
    }

    /// Cartan characters from the tableau, through both the coordinate flag
    /// and a seeded randomized flag, plus Cartan's test against the
    /// integral-element dimension.
    pub fn cartan_characters(&self, seed: u64) -> Result<CharacterVector, PfaffError> {
        Ok(self.analyze(seed)?.characters)
    }

    /// Full linear analysis in one pass: the integral-element space is
    /// solved once and shared by Cartan's test.
    pub fn analyze(&self, seed: u64) -> Result<SystemAnalysis, PfaffError> {
        let tab = self.tableau()?;
        let coordinate = tab.characters_for_flag(None);
        let mut rng = SplitMix64::new(seed);
        let n = tab.n;
        // random invertible rational matrix mixing the flag
        let mix: Mat<Scalar> = loop {
            let cand: Mat<Scalar> =
                Mat::from_fn(n, n, |_, _| Scalar::from_int(rng.i64_in(-9, 9)));
            if cand.rank() == n {
                break cand;
            }
        };
        let randomized = tab.characters_for_flag(Some(&mix));
        let (space, dim_integral, torsion) = match self.integral_element_space() {
            Ok(sp) => {
                let d = sp.dimension;
                (Some(sp), Some(d), Vec::new())
            }
            Err(PfaffError::Torsion(polys)) => (None, None, polys),
            Err(e) => return Err(e),
        };
        let cartan_sum: usize = randomized
            .iter()
            .enumerate()
            .map(|(k, s)| (k + 1) * s)
            .sum();
        let involutive = torsion.is_empty() && dim_integral.map_or(false, |d| d == cartan_sum);
        Ok(SystemAnalysis {
            characters: CharacterVector {
                coordinate,
                randomized,
                dim_integral_elements: dim_integral,
                involutive,
                seed,
            },
            space,
            torsion,
        })
    }

    /// Basis of 1-forms in the span of the free generators that vanish on
    /// every admissible integral element.
    pub fn forced_one_forms(&self) -> Result<Vec<Form>, PfaffError> {
        let space = self.integral_element_space()?;
        let n = self.n();
        let nf = self.free_gens.len();
        // rows: for each k and each affine coordinate (1 + params) the
        // condition sum_rho c_rho * coeff = 0
        let mut rows: Vec<Vec<Scalar>> = Vec::new();
        let coords: Vec<Option<String>> = std::iter::once(None)
            .chain(space.parameters.iter().cloned().map(Some))
            .collect();
        for k in 0..n {
            for coord in &coords {
                let mut row = Vec::with_capacity(nf);
                for &rho in &self.free_gens {
                    let val = &space.assignment[&rho][k];
                    let c = match coord {
                        None => {
                            // constant part: evaluate at all parameters zero
                            let zeros: BTreeMap<String, Scalar> = space
                                .parameters
                                .iter()
                                .map(|p| (p.clone(), Scalar::zero()))
                                .collect();
                            val.substitute(&zeros).expect("polynomial in parameters")
                        }
                        Some(p) => val.derivative(p),
                    };
                    row.push(c);
                }
                if row.iter().any(|c| !c.is_zero()) {
                    rows.push(row);
                }
            }
        }
        if rows.is_empty() {
            // every free generator vanishes on integral elements
            return Ok(self
                .free_gens
                .iter()
                .map(|&g| Form::generator(self.model.coframe().clone(), g))
                .collect());
        }
        let m: Mat<Scalar> = Mat::from_rows(rows);
        let kernel = m.ff_nullspace();
        Ok(kernel
            .into_iter()
            .map(|c| {
                let mut f = Form::zero(self.model.coframe().clone(), 1);
                for (idx, &g) in self.free_gens.iter().enumerate() {
                    if !c[idx].is_zero() {
                        f.insert_term(&[g], c[idx].clone());
                    }
                }
                normalize_form(f)
            })
            .collect())
    }

    /// Enlarges the ideal by extra 1-forms. Each is assigned a solved
    /// generator automatically (the highest-index free generator with a
    /// nonzero coefficient) unless designated. Linearity is re-checked;
    /// when it fails the result records this system as its linear part.
    pub fn augment(&self, extra: &[Form]) -> Result<PfaffSystem, PfaffError> {
        let mut ideal = self.ideal.clone();
        let mut taken: Vec<GenId> = ideal.iter().map(|f| f.solve_for).collect();
        for f in extra {
            if f.is_zero() {
                continue;
            }
            // reduce against current ideal so the designation check sees the
            // effective form
            let solve_for = self
                .free_gens
                .iter()
                .rev()
                .find(|&&g| !taken.contains(&g) && !f.coefficient(&[g]).is_zero())
                .copied()
                .ok_or(PfaffError::NoSolvableGenerator)?;
            taken.push(solve_for);
            ideal.push(SolvedOneForm {
                form: f.clone(),
                solve_for,
            });
        }
        let mut sys = PfaffSystem::new(self.model.clone(), ideal, self.independence.clone())?;
        if !sys.linear {
            sys.linear_part = Some(Box::new(self.clone()));
        }
        sys.sym_families = self.sym_families.clone();
        Ok(sys)
    }

    /// Quadratic obstruction system of a nonlinear augmented system: the
    /// linear part's integral-element parametrization substituted into the
    /// derivatives of the added 1-forms, omega ^ omega coefficients
    /// collected as polynomials in the parameters and model scalars.
    pub fn quadratic_obstructions(&self) -> Result<ObstructionSystem, PfaffError> {
        let lp = self
            .linear_part()
            .ok_or_else(|| PfaffError::NotLinear("expected an augmented system".into()))?;
        let space = lp.integral_element_space()?;
        let added = &self.two_forms[lp.ideal.len()..];
        let n = self.n();
        let mut raw: Vec<Polynomial> = Vec::new();
        for tf in added {
            // substitute every free generator of the linear part by its
            // integral-element expression
            let mut cur = tf.clone();
            for (&rho, coeffs) in &space.assignment {
                if !cur.contains_generator(rho) {
                    continue;
                }
                let mut repl = Form::zero(self.model.coframe().clone(), 1);
                for (k, &w) in lp.independence.iter().enumerate() {
                    if !coeffs[k].is_zero() {
                        repl.insert_term(&[w], coeffs[k].clone());
                    }
                }
                cur = cur.substitute_generator(rho, &repl);
            }
            for j in 0..n {
                for k in (j + 1)..n {
                    let c = cur.coefficient(&[lp.independence[j], lp.independence[k]]);
                    if !c.is_zero() {
                        raw.push(c.numerator().clone());
                    }
                }
            }
        }
        let mut distinct: Vec<Polynomial> = raw.iter().map(|p| p.monic()).collect();
        distinct.sort_by(|a, b| a.to_string().cmp(&b.to_string()));
        distinct.dedup();
        Ok(ObstructionSystem { raw, distinct })
    }

    /// Pulls the system back to the zero locus of the given equations, each
    /// solved for its designated scalar. The differential of each constraint
    /// induces a linear relation among the generators; for a dependent
    /// scalar this eliminates one free generator, for a free scalar its
    /// differential generator is rewritten away.
    pub fn restrict(&self, constraints: &[(Polynomial, String)]) -> Result<PfaffSystem, PfaffError> {
        let mut sys = self.clone();
        for (eq, sname) in constraints {
            sys = sys.restrict_one(eq, sname)?;
        }
        Ok(sys)
    }

    fn restrict_one(&self, eq: &Polynomial, sname: &str) -> Result<PfaffSystem, PfaffError> {
        // solve eq = 0 for sname: must be degree 1
        if eq.degree_in(sname) != 1 {
            return Err(PfaffError::NotSolvableScalar(sname.to_string()));
        }
        let coeff = eq.derivative(sname); // degree-1: the linear coefficient
        if coeff.uses_var(sname) {
            return Err(PfaffError::NotSolvableScalar(sname.to_string()));
        }
        let mut at_zero = BTreeMap::new();
        at_zero.insert(sname.to_string(), Polynomial::zero());
        let rest = eq.substitute(&at_zero);
        let solution = Scalar::new(rest.neg(), coeff).map_err(|_| {
            PfaffError::NotSolvableScalar(sname.to_string())
        })?;
        let mut smap: BTreeMap<String, Scalar> = BTreeMap::new();
        smap.insert(sname.to_string(), solution.clone());

        // constraint differential in the current model
        let eq_scalar = Scalar::from_poly(eq.clone());
        let delta = self
            .model
            .d(&Form::scalar(self.model.coframe().clone(), eq_scalar));

        let kind = self.model.coframe().scalar_kind(sname).cloned();
        let is_free_scalar = matches!(kind, Some(ScalarKind::Free { .. }));

        // new model with the scalar substituted away
        let new_model = Arc::new(self.model.substituted(&smap)?);

        // rewrite a form onto the restricted model
        let old_cf = self.model.coframe().clone();
        let ds_gen = match &kind {
            Some(ScalarKind::Free { diff }) => Some(*diff),
            _ => None,
        };
        let ds_replacement: Option<Form> = if let Some(_g) = ds_gen {
            // d(sname) restricts to d(solution)
            let repl = self
                .model
                .d(&Form::scalar(old_cf.clone(), solution.clone()))
                .substitute_scalars(&smap)?;
            Some(repl)
        } else {
            None
        };
        let move_form = |f: &Form| -> Result<Form, PfaffError> {
            let mut out = f.substitute_scalars(&smap)?;
            if let (Some(g), Some(repl)) = (ds_gen, ds_replacement.as_ref()) {
                if out.contains_generator(g) {
                    out = out.substitute_generator(g, repl);
                }
            }
            Ok(out.transfer(new_model.coframe())?)
        };

        // move the ideal
        let mut ideal: Vec<SolvedOneForm> = Vec::new();
        for sf in &self.ideal {
            let form = move_form(&sf.form)?;
            if form.is_zero() {
                continue;
            }
            let solve_name = old_cf.gen_name(sf.solve_for);
            let solve_for = new_model
                .coframe()
                .gen_id(solve_name)
                .ok_or_else(|| PfaffError::Dimension(format!("lost generator {solve_name}")))?;
            ideal.push(SolvedOneForm { form, solve_for });
        }
        let independence: Vec<GenId> = self
            .independence
            .iter()
            .map(|&g| {
                new_model
                    .coframe()
                    .gen_id(old_cf.gen_name(g))
                    .expect("independence survives restriction")
            })
            .collect();

        // the induced generator relation for a dependent scalar
        let model_final = new_model.clone();
        if !is_free_scalar {
            let delta_new = move_form(&delta)?;
            if !delta_new.is_zero() {
                // pick the highest free generator with a nonzero coefficient
                let solved: Vec<GenId> = ideal.iter().map(|f| f.solve_for).collect();
                let nf = model_final.coframe().len();
                let target = (0..nf)
                    .rev()
                    .find(|g| {
                        !solved.contains(g)
                            && !independence.contains(g)
                            && !delta_new.coefficient(&[*g]).is_zero()
                    })
                    .ok_or(PfaffError::NoSolvableGenerator)?;
                let c = delta_new.coefficient(&[target]);
                let inv = c.inv().expect("nonzero");
                let expr = Form::generator(model_final.coframe().clone(), target)
                    .sub(&delta_new.scale(&inv));
                let reduced_model = model_final.with_generator_eliminated(target, &expr)?;
                let reduced_cf = reduced_model.coframe().clone();
                // rewrite ideal and independence into the reduced coframe
                ideal = ideal
                    .into_iter()
                    .map(|sf| {
                        let form = if sf.form.contains_generator(target) {
                            sf.form.substitute_generator(target, &expr)
                        } else {
                            sf.form
                        };
                        let name = model_final.coframe().gen_name(sf.solve_for).to_string();
                        Ok(SolvedOneForm {
                            form: form.transfer(&reduced_cf)?,
                            solve_for: reduced_cf
                                .gen_id(&name)
                                .ok_or_else(|| PfaffError::Dimension(format!("lost {name}")))?,
                        })
                    })
                    .collect::<Result<_, PfaffError>>()?;
                let independence2: Vec<GenId> = independence
                    .iter()
                    .map(|&g| {
                        reduced_cf
                            .gen_id(model_final.coframe().gen_name(g))
                            .expect("independence survives")
                    })
                    .collect();
                let mut sys = PfaffSystem::new(Arc::new(reduced_model), ideal, independence2)?;
                sys.sym_families = self.sym_families.clone();
                return Ok(sys);
            }
        }
        let mut sys = PfaffSystem::new(model_final.clone(), ideal, independence)?;
        sys.sym_families = self.sym_families.clone();
        Ok(sys)
    }

    /// First prolongation: the integral-element parameters become free
    /// scalars of a new model and the ideal grows by `pi - P . omega`.
    pub fn prolong(&self) -> Result<PfaffSystem, PfaffError> {
        let space = self.integral_element_space()?;
        let used: Vec<String> = self
            .model
            .coframe()
            .scalars()
            .iter()
            .map(|(n, _)| n.clone())
            .collect();
        let promoted = fresh_names("pv", space.dimension, &used);
        let rename: BTreeMap<String, Scalar> = space
            .parameters
            .iter()
            .zip(promoted.iter())
            .map(|(old, new)| (old.clone(), Scalar::var(new)))
            .collect();
        let model2 = Arc::new(self.model.with_free_scalars(&promoted));
        let cf2 = model2.coframe().clone();
        let mut ideal: Vec<SolvedOneForm> = self
            .ideal
            .iter()
            .map(|sf| {
                Ok(SolvedOneForm {
                    form: sf.form.transfer(&cf2)?,
                    solve_for: cf2
                        .gen_id(self.model.coframe().gen_name(sf.solve_for))
                        .expect("generators survive"),
                })
            })
            .collect::<Result<Vec<_>, PfaffError>>()?;
        for (&rho, coeffs) in &space.assignment {
            let rho2 = cf2
                .gen_id(self.model.coframe().gen_name(rho))
                .expect("generators survive");
            let mut f = Form::generator(cf2.clone(), rho2);
            for (k, &w) in self.independence.iter().enumerate() {
                let c = coeffs[k].substitute(&rename).expect("renaming");
                if !c.is_zero() {
                    let w2 = cf2
                        .gen_id(self.model.coframe().gen_name(w))
                        .expect("generators survive");
                    f.insert_term(&[w2], c.neg());
                }
            }
            ideal.push(SolvedOneForm {
                form: f,
                solve_for: rho2,
            });
        }
        let independence: Vec<GenId> = self
            .independence
            .iter()
            .map(|&g| {
                cf2.gen_id(self.model.coframe().gen_name(g))
                    .expect("generators survive")
            })
            .collect();
        PfaffSystem::new(model2, ideal, independence)
    }

    /// Polar matrix of the system at a symbolic covector xi: rows
    /// `pi^eps_j xi_k - pi^eps_k xi_j` (j < k) expressed in the free
    /// generators. Entries are linear in the xi variables.
    pub fn polar_matrix(&self, xi_names: &[String]) -> Result<Mat<Scalar>, PfaffError> {
        let tab = self.tableau()?;
        let n = tab.n;
        assert_eq!(xi_names.len(), n);
        let xi: Vec<Scalar> = xi_names.iter().map(|s| Scalar::var(s)).collect();
        let nf = tab.free.len();
        let mut rows: Vec<Vec<Scalar>> = Vec::new();
        for b in &tab.pi_part {
            for j in 0..n {
                for k in (j + 1)..n {
                    let mut row = Vec::with_capacity(nf);
                    for rho in 0..nf {
                        row.push(
                            b.get(rho, j)
                                .mul(&xi[k])
                                .sub(&b.get(rho, k).mul(&xi[j])),
                        );
                    }
                    if row.iter().any(|c| !c.is_zero()) {
                        rows.push(row);
                    }
                }
            }
        }
        Ok(Mat::from_rows(rows))
    }
}

fn normalize_form(f: Form) -> Form {
    // scale so the lowest-index nonzero coefficient is 1
    let lead = f.terms().next().map(|(_, c)| c.clone());
    match lead {
        Some(c) => f.scale(&c.inv().expect("nonzero")),
        None => f,
    }
}

fn residue_polys(residues: &[Scalar]) -> Vec<Polynomial> {
    let mut out: Vec<Polynomial> = residues
        .iter()
        .filter(|r| !r.is_zero())
        .map(|r| r.numerator().monic())
        .collect();
    out.sort_by(|a, b| a.to_string().cmp(&b.to_string()));
    out.dedup();
    out
}

pub fn fresh_names(stem: &str, count: usize, used: &[String]) -> Vec<String> {
    let mut out = Vec::with_capacity(count);
    let mut k = 1usize;
    while out.len() < count {
        let cand = format!("{stem}{k}");
        if !used.contains(&cand) {
            out.push(cand);
        }
        k += 1;
    }
    out
}

/// Tableau data of a linear system.
pub struct Tableau {
    pub n: usize,
    pub free: Vec<GenId>,
    /// One matrix per 2-form: rows = free generators, cols = omega index.
    pub pi_part: Vec<Mat<Scalar>>,
    pub torsion: Vec<BTreeMap<(usize, usize), Scalar>>,
}

impl Tableau {
    /// Characters from polar-space dimensions along a flag; `None` uses the
    /// coordinate flag, otherwise the columns are mixed by the given matrix.
    /// Ranks of the polar filtration are computed incrementally in one
    /// elimination pass.
    pub fn characters_for_flag(&self, mix: Option<&Mat<Scalar>>) -> Vec<usize> {
        let n = self.n;
        let nf = self.free.len();
        // triangular basis of reduced rows, keyed by pivot column
        let mut basis: Vec<BTreeMap<usize, Scalar>> = Vec::new();
        let mut pivots: Vec<usize> = Vec::new();
        let mut add_row = |v: Vec<Scalar>| -> bool {
            let mut row: BTreeMap<usize, Scalar> = v
                .into_iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .collect();
            for (b, &pc) in basis.iter().zip(pivots.iter()) {
                if let Some(f) = row.get(&pc).cloned() {
                    for (&c, bv) in b {
                        let delta = bv.mul(&f);
                        match row.entry(c) {
                            std::collections::btree_map::Entry::Vacant(e) => {
                                let nv = delta.neg();
                                if !nv.is_zero() {
                                    e.insert(nv);
                                }
                            }
                            std::collections::btree_map::Entry::Occupied(mut e) => {
                                let nv = e.get().sub(&delta);
                                if nv.is_zero() {
                                    e.remove();
                                } else {
                                    *e.get_mut() = nv;
                                }
                            }
                        }
                    }
                }
            }
            if row.is_empty() {
                return false;
            }
            // normalize on the cheapest entry
            let (&pc, pv) = row
                .iter()
                .min_by_key(|(_, v)| v.complexity())
                .expect("nonempty");
            let inv = pv.inv().expect("nonzero");
            let row: BTreeMap<usize, Scalar> =
                row.iter().map(|(&c, v)| (c, v.mul(&inv))).collect();
            pivots.push(pc);
            basis.push(row);
            true
        };
        let mut chars = Vec::with_capacity(n);
        for k in 0..n {
            let mut rank_gain = 0usize;
            for b in &self.pi_part {
                let mut v = vec![Scalar::zero(); nf];
                match mix {
                    None => {
                        for rho in 0..nf {
                            v[rho] = b.get(rho, k).clone();
                        }
                    }
                    Some(a) => {
                        for j in 0..n {
                            let c = a.get(j, k);
                            if c.is_zero() {
                                continue;
                            }
                            for rho in 0..nf {
                                v[rho] = v[rho].add(&b.get(rho, j).mul(c));
                            }
                        }
                    }
                }
                if v.iter().any(|c| !c.is_zero()) && add_row(v) {
                    rank_gain += 1;
                }
            }
            chars.push(rank_gain);
        }
        chars
    }
}

/// Parametrized space of admissible integral 4-planes at a generic point.
///
/// `dimension` is the classical fiber dimension, counting only values of
/// forms in the tableau span; coframe directions that appear in no 2-form
/// (Cauchy-characteristic freedom) are excluded from it but still carry
/// parameters in `assignment`.
#[derive(Clone, Debug)]
pub struct IntegralElementSpace {
    pub parameters: Vec<String>,
    /// free generator -> coefficients of omega^k, affine in the parameters
    pub assignment: BTreeMap<GenId, Vec<Scalar>>,
    pub dimension: usize,
    pub characteristic_directions: usize,
}

/// One-pass analysis of a linear system.
#[derive(Clone, Debug)]
pub struct SystemAnalysis {
    pub characters: CharacterVector,
    /// Present when admissible integral elements exist generically.
    pub space: Option<IntegralElementSpace>,
    /// Torsion condition polynomials when they do not.
    pub torsion: Vec<Polynomial>,
}

/// Cartan characters along both flags, with Cartan's test.
#[derive(Clone, Debug, PartialEq)]
pub struct CharacterVector {
    pub coordinate: Vec<usize>,
    pub randomized: Vec<usize>,
    pub dim_integral_elements: Option<usize>,
    pub involutive: bool,
    pub seed: u64,
}

impl CharacterVector {
    pub fn cartan_sum(&self) -> usize {
        self.randomized
            .iter()
            .enumerate()
            .map(|(k, s)| (k + 1) * s)
            .sum()
    }
}

/// Quadratic obstruction polynomials of a nonlinear augmented system.
#[derive(Clone, Debug)]
pub struct ObstructionSystem {
    /// One entry per nonzero omega ^ omega coefficient.
    pub raw: Vec<Polynomial>,
    /// Deduplicated up to scalar multiples.
    pub distinct: Vec<Polynomial>,
}

/// The standard system `{theta^a, eta^a_i - S^a_ij omega^j}` on a
/// semi-orthonormal frame bundle, with independence omega^1..omega^n. When
/// the space has dimension q < r the remaining eta^beta_i join the ideal
/// bare (the submanifold's first normal space spans only the first q normal
/// directions).
pub fn standard_system(
    frame: &SemiOrthoFrame,
    space: &SymSpace,
) -> Result<PfaffSystem, PfaffError> {
    let n = frame.spec.n;
    let r = frame.spec.r;
    let q = space.dim();
    if space.n != n {
        return Err(PfaffError::Dimension(format!(
            "space is on R^{}, model tangent dimension is {n}",
            space.n
        )));
    }
    if q > r {
        return Err(PfaffError::Dimension(format!(
            "space dimension {q} exceeds codimension {r}"
        )));
    }
    let mut ideal: Vec<SolvedOneForm> = Vec::new();
    for a in 1..=r {
        ideal.push(SolvedOneForm {
            form: frame.th(a),
            solve_for: frame.th_id(a),
        });
    }
    let mut families = Vec::new();
    for a in 1..=r {
        for i in 1..=n {
            let mut f = frame.eta(a, i);
            if a <= q {
                for j in 1..=n {
                    let s = space.basis[a - 1].get(i - 1, j - 1);
                    if !s.is_zero() {
                        f.insert_term(&[frame.om_id(j)], s.neg());
                    }
                }
            }
            families.push(SymFamily {
                group: a - 1,
                slot: i - 1,
                // two-form index: r theta forms come first
                two_form_index: ideal.len(),
            });
            ideal.push(SolvedOneForm {
                form: f,
                solve_for: frame.eta_id(a, i),
            });
        }
    }
    let independence: Vec<GenId> = (1..=n).map(|i| frame.om_id(i)).collect();
    let mut sys = PfaffSystem::new(Arc::new((*frame.model).clone()), ideal, independence)?;
    sys.sym_families = families;
    Ok(sys)
}
