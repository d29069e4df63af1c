//! Characteristic variety of a linear Pfaffian system: generic polar rank
//! and the rank-drop locus in the covector variables.
//!
//! The polar matrix has rows `pi^(a,i)_j xi_k - pi^(a,i)_k xi_j`, far too
//! many maximal minors to enumerate. Writing the kernel condition as a
//! rank-one symbol problem collapses it: a covector xi is characteristic iff
//! there are v and scalars t^(a,i) with `pi^(a,i)_j(v) = t^(a,i) xi_j`.
//! When the coefficient matrix of the pi's has full column rank, the
//! symmetry pi^a_ij = pi^a_ji forces t^(a,i) = s^a xi_i, and eliminating v
//! against a left-nullspace basis leaves a small matrix R(xi), quadratic in
//! xi, one column per symmetric family; xi is characteristic iff R(xi)
//! drops rank. Its maximal minors generate the reported determinantal
//! ideal, saturated by the irrelevant ideal of the xi's.

use super::{PfaffError, PfaffSystem};
use crate::exterior::Scalar;
use crate::field::Field;
use crate::groebner::{self, GroebnerConfig};
use crate::matrix::Mat;
use crate::order::TermOrder;
use crate::poly::{MPoly, VarSet};
use crate::ratfun::RationalFunction;
use crate::rng::SplitMix64;
use std::collections::BTreeMap;

/// Polynomial in the xi variables with rational-function coefficients in
/// the surviving model parameters.
pub type XiPoly = MPoly<RationalFunction>;

#[derive(Clone, Debug)]
pub struct DropLocus {
    /// Scalar specialization this locus was computed at (empty = symbolic).
    pub specialization: BTreeMap<String, Scalar>,
    /// Reduced Groebner basis of the saturated determinantal ideal.
    pub saturated_ideal: Vec<XiPoly>,
    /// True when the saturated ideal is (1): no characteristic covectors.
    pub empty: bool,
    /// Rank of the coefficient matrix of the pi's after specialization.
    pub pi_span_rank: usize,
    /// False when the pi's fail to span: every covector is characteristic
    /// and `saturated_ideal` is meaningless.
    pub pi_span_full: bool,
}

#[derive(Clone, Debug)]
pub struct CharVarietyReport {
    pub xi_names: Vec<String>,
    pub polar_rows: usize,
    pub polar_cols: usize,
    /// Rank of the polar matrix at symbolic xi and generic parameters.
    pub generic_polar_rank: usize,
    /// Ranks at seeded random rational covectors (stability check).
    pub rank_samples: Vec<usize>,
    pub drop_loci: Vec<DropLocus>,
}

impl PfaffSystem {
    /// Builds the polar matrix, reports its generic rank, and computes the
    /// saturated determinantal drop-locus ideal at each requested parameter
    /// specialization.
    pub fn characteristic_variety(
        &self,
        specializations: &[BTreeMap<String, Scalar>],
        seed: u64,
        cfg: &GroebnerConfig,
    ) -> Result<CharVarietyReport, PfaffError> {
        let n = self.independence().len();
        let used: Vec<String> = self
            .model()
            .coframe()
            .scalars()
            .iter()
            .map(|(n, _)| n.clone())
            .collect();
        let xi_names = super::fresh_names("xi", n, &used);
        let polar = self.polar_matrix(&xi_names)?;
        let generic_polar_rank = polar.ff_rank();
        // stability across random covectors with distinct prime coordinates
        let mut rng = SplitMix64::new(seed);
        let primes = [2i64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
        let mut rank_samples = Vec::new();
        for _ in 0..3 {
            let mut assign = BTreeMap::new();
            let mut taken: Vec<i64> = Vec::new();
            for name in &xi_names {
                let p = loop {
                    let c = primes[rng.i64_in(0, primes.len() as i64 - 1) as usize];
                    if !taken.contains(&c) {
                        break c;
                    }
                };
                taken.push(p);
                assign.insert(name.clone(), Scalar::from_int(p));
            }
            let specialized: Mat<Scalar> = Mat::from_fn(polar.rows(), polar.cols(), |i, j| {
                polar.get(i, j).substitute(&assign).expect("integer point")
            });
            rank_samples.push(specialized.ff_rank());
        }
        let mut drop_loci = Vec::new();
        for spec in specializations {
            drop_loci.push(self.drop_locus(spec, &xi_names, cfg)?);
        }
        Ok(CharVarietyReport {
            xi_names,
            polar_rows: polar.rows(),
            polar_cols: polar.cols(),
            generic_polar_rank,
            rank_samples,
            drop_loci,
        })
    }

    /// Saturated determinantal ideal of the rank-drop locus at a parameter
    /// specialization, through the rank-one symbol reduction.
    fn drop_locus(
        &self,
        specialization: &BTreeMap<String, Scalar>,
        xi_names: &[String],
        cfg: &GroebnerConfig,
    ) -> Result<DropLocus, PfaffError> {
        let tab = self.tableau()?;
        let n = tab.n;
        let nf = tab.free.len();
        let fams = self.sym_families();
        if fams.is_empty() {
            return Err(PfaffError::NotLinear(
                "characteristic variety needs the symmetric tableau structure".into(),
            ));
        }
        let ngroups = fams.iter().map(|f| f.group).max().unwrap() + 1;
        // every 2-form with a nonzero tableau must belong to a family
        for (e, b) in tab.pi_part.iter().enumerate() {
            let zero = (0..nf).all(|r| (0..n).all(|j| b.get(r, j).is_zero()));
            if !zero && !fams.iter().any(|f| f.two_form_index == e) {
                return Err(PfaffError::NotLinear(
                    "2-form outside the symmetric families has a nonzero tableau".into(),
                ));
            }
        }
        let sub = |s: &Scalar| -> Result<Scalar, PfaffError> {
            Ok(s.substitute(specialization)
                .map_err(crate::exterior::FormError::from)?)
        };
        // Pi: rows (family, j), cols = free generators
        let mut pi_rows: Vec<Vec<Scalar>> = Vec::new();
        for fam in fams {
            let b = &tab.pi_part[fam.two_form_index];
            for j in 0..n {
                let mut row = Vec::with_capacity(nf);
                for rho in 0..nf {
                    row.push(sub(b.get(rho, j))?);
                }
                pi_rows.push(row);
            }
        }
        let pi: Mat<Scalar> = Mat::from_rows(pi_rows);
        let pi_span_rank = pi.ff_rank();
        if pi_span_rank < nf {
            return Ok(DropLocus {
                specialization: specialization.clone(),
                saturated_ideal: Vec::new(),
                empty: false,
                pi_span_rank,
                pi_span_full: false,
            });
        }
        // left nullspace of Pi
        let left = pi.transpose().ff_nullspace();
        // R(xi): one column per group; row l: sum over (fam, j) of
        // L_l[(fam, j)] * xi_slot(fam) * xi_j
        let xi: Vec<XiPoly> = xi_names.iter().map(|s| MPoly::var(s)).collect();
        let mut r_rows: Vec<Vec<XiPoly>> = Vec::new();
        for l in &left {
            let mut row = vec![XiPoly::zero(); ngroups];
            for (fi, fam) in fams.iter().enumerate() {
                for j in 0..n {
                    let c = &l[fi * n + j];
                    if c.is_zero() {
                        continue;
                    }
                    let term = xi[fam.slot].mul(&xi[j]).scale(c);
                    row[fam.group] = row[fam.group].add(&term);
                }
            }
            if row.iter().any(|p| !p.is_zero()) {
                r_rows.push(row);
            }
        }
        // all ngroups x ngroups minors, then a linear interreduction of the
        // equigenerated span before the Groebner step
        let minors = dense_minors(&r_rows, ngroups);
        let reduced = linear_span_reduce(&minors);
        let saturated = if reduced.is_empty() {
            // zero ideal: every covector characteristic for this symbol
            Vec::new()
        } else {
            let xi_refs: Vec<&str> = xi_names.iter().map(|s| s.as_str()).collect();
            groebner::saturate_irrelevant(&reduced, &xi_refs, cfg)?
        };
        let gb = groebner::groebner(&saturated, TermOrder::GrevLex, cfg)?;
        let empty = gb.is_trivial();
        Ok(DropLocus {
            specialization: specialization.clone(),
            saturated_ideal: gb.generators(),
            empty,
            pi_span_rank,
            pi_span_full: true,
        })
    }
}

/// All k x k minors of a dense rectangular matrix of polynomials.
fn dense_minors(rows: &[Vec<XiPoly>], k: usize) -> Vec<XiPoly> {
    let nr = rows.len();
    if nr < k {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut sel: Vec<usize> = (0..k).collect();
    loop {
        let sub: Vec<Vec<XiPoly>> = sel.iter().map(|&i| rows[i].clone()).collect();
        let d = det_poly(&sub);
        if !d.is_zero() {
            out.push(d);
        }
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if sel[i] != i + nr - k {
                break;
            }
        }
        sel[i] += 1;
        for j in i + 1..k {
            sel[j] = sel[j - 1] + 1;
        }
    }
}

fn det_poly(rows: &[Vec<XiPoly>]) -> XiPoly {
    match rows.len() {
        0 => XiPoly::one(),
        1 => rows[0][0].clone(),
        2 => rows[0][0]
            .mul(&rows[1][1])
            .sub(&rows[0][1].mul(&rows[1][0])),
        n => {
            let mut acc = XiPoly::zero();
            for j in 0..n {
                if rows[0][j].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<XiPoly>> = (1..n)
                    .map(|i| {
                        (0..n)
                            .filter(|&c| c != j)
                            .map(|c| rows[i][c].clone())
                            .collect()
                    })
                    .collect();
                let mut term = rows[0][j].mul(&det_poly(&minor));
                if j % 2 == 1 {
                    term = term.neg();
                }
                acc = acc.add(&term);
            }
            acc
        }
    }
}

/// Row-echelon reduction of a set of polynomials viewed as vectors over
/// their monomial support: returns a basis of the span. Sound as an ideal
/// pre-reduction for equigenerated sets.
fn linear_span_reduce(polys: &[XiPoly]) -> Vec<XiPoly> {
    if polys.is_empty() {
        return Vec::new();
    }
    // collect the union support on a merged variable set
    let mut all_vars: Vec<String> = Vec::new();
    for p in polys {
        for v in p.vars().iter() {
            if !all_vars.contains(v) {
                all_vars.push(v.clone());
            }
        }
    }
    all_vars.sort();
    let vs: VarSet = all_vars.into();
    let mut support: Vec<crate::poly::Mono> = Vec::new();
    let remapped: Vec<BTreeMap<crate::poly::Mono, RationalFunction>> = polys
        .iter()
        .map(|p| {
            let t = p.on_vars(&vs);
            for m in t.keys() {
                if !support.contains(m) {
                    support.push(m.clone());
                }
            }
            t
        })
        .collect();
    support.sort();
    let col: BTreeMap<&crate::poly::Mono, usize> =
        support.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let mat: Mat<RationalFunction> = Mat::from_fn(polys.len(), support.len(), |i, j| {
        remapped[i]
            .get(&support[j])
            .cloned()
            .unwrap_or_else(RationalFunction::zero)
    });
    let _ = col;
    // row-reduce by hand to recover reduced rows as polynomials
    let mut rows: Vec<Vec<RationalFunction>> = (0..mat.rows())
        .map(|i| mat.row(i).to_vec())
        .collect();
    let mut pivots: Vec<usize> = Vec::new();
    let mut out_rows: Vec<Vec<RationalFunction>> = Vec::new();
    for r in 0..rows.len() {
        let mut row = rows[r].clone();
        // reduce against existing
        for (k, &pc) in pivots.iter().enumerate() {
            let f = row[pc].clone();
            if f.is_zero() {
                continue;
            }
            let or = &out_rows[k];
            for c in 0..row.len() {
                row[c] = row[c].sub(&f.mul(&or[c]));
            }
        }
        if let Some(pc) = row.iter().position(|c| !c.is_zero()) {
            let inv = row[pc].inv().unwrap();
            for c in 0..row.len() {
                row[c] = row[c].mul(&inv);
            }
            pivots.push(pc);
            out_rows.push(row);
        }
        rows[r] = Vec::new();
    }
    out_rows
        .into_iter()
        .map(|row| {
            MPoly::from_terms(
                vs.clone(),
                row.into_iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(j, c)| (support[j].clone(), c)),
            )
        })
        .collect()
}

/// Converts a scalar whose denominator avoids the xi variables into a
/// polynomial in the xi's with rational-function coefficients.
pub fn scalar_to_xi_poly(s: &Scalar, xi_names: &[String]) -> XiPoly {
    let num = s.numerator();
    let den = s.denominator();
    for v in den.vars().iter() {
        assert!(
            !xi_names.contains(v),
            "denominator must not involve the covector variables"
        );
    }
    let den_rf = RationalFunction::new(crate::poly::Polynomial::one(), den.clone())
        .expect("nonzero denominator");
    let vars = num.vars().clone();
    let xi_pos: Vec<Option<usize>> = vars
        .iter()
        .map(|v| xi_names.iter().position(|x| x == v))
        .collect();
    let mut acc = XiPoly::zero();
    for (m, c) in num.terms() {
        let mut xi_term = XiPoly::one();
        let mut rest = crate::poly::Polynomial::constant(c.clone());
        for (i, &e) in m.iter().enumerate() {
            if e == 0 {
                continue;
            }
            match xi_pos[i] {
                Some(x) => {
                    xi_term = xi_term.mul(&XiPoly::monomial(
                        RationalFunction::one(),
                        &xi_names[x],
                        e,
                    ));
                }
                None => {
                    rest = rest.mul(
                        &crate::poly::Polynomial::monomial(
                            crate::gaussian::GaussianRational::one(),
                            &vars[i],
                            e,
                        ),
                    );
                }
            }
        }
        let coeff = RationalFunction::from_poly(rest).mul(&den_rf);
        acc = acc.add(&xi_term.scale(&coeff));
    }
    acc
}
