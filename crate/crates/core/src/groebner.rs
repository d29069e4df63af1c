use crate::field::Field;
use crate::order::TermOrder;
use crate::poly::{MPoly, Mono, VarSet};
use std::cmp::Ordering;

/// Budget for Buchberger runs: a step is one polynomial subtraction inside a
/// reduction. Exceeding the budget aborts with a retryable error instead of
/// running unbounded.
#[derive(Clone, Copy, Debug)]
pub struct GroebnerConfig {
    pub max_steps: u64,
}

impl Default for GroebnerConfig {
    fn default() -> Self {
        GroebnerConfig {
            max_steps: 20_000_000,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GroebnerError {
    #[error("step budget exceeded after {steps} reduction steps")]
    BudgetExceeded { steps: u64 },
}

/// A reduced Groebner basis, with the variable order the computation used.
#[derive(Clone, Debug)]
pub struct GroebnerBasis<F: Field> {
    pub var_order: Vec<String>,
    pub order: TermOrder,
    gens: Vec<Ordered<F>>,
}

// Internal representation: terms sorted descending in the chosen order over
// an explicit variable list.
#[derive(Clone, Debug)]
struct Ordered<F> {
    terms: Vec<(Mono, F)>,
}

impl<F: Field> Ordered<F> {
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn lm(&self) -> &Mono {
        &self.terms[0].0
    }

    fn lc(&self) -> &F {
        &self.terms[0].1
    }

    fn monic(mut self) -> Self {
        if self.is_zero() {
            return self;
        }
        let inv = self.lc().inv().expect("nonzero leading coefficient");
        if !inv.is_one() {
            for (_, c) in &mut self.terms {
                *c = c.mul(&inv);
            }
        }
        self
    }
}

fn to_ordered<F: Field>(p: &MPoly<F>, var_order: &[String], order: TermOrder) -> Ordered<F> {
    let vs: VarSet = {
        let mut v = var_order.to_vec();
        v.sort();
        v.into()
    };
    let perm: Vec<usize> = var_order
        .iter()
        .map(|n| vs.iter().position(|w| w == n).expect("var present"))
        .collect();
    let remapped = p.on_vars(&vs);
    let mut terms: Vec<(Mono, F)> = remapped
        .into_iter()
        .map(|(m, c)| {
            let nm: Mono = perm.iter().map(|&i| m[i]).collect::<Vec<_>>().into();
            (nm, c)
        })
        .collect();
    terms.sort_by(|(a, _), (b, _)| order.cmp_monos(b, a));
    Ordered { terms }
}

fn from_ordered<F: Field>(p: &Ordered<F>, var_order: &[String]) -> MPoly<F> {
    let vs: VarSet = {
        let mut v = var_order.to_vec();
        v.sort();
        v.into()
    };
    let perm: Vec<usize> = vs
        .iter()
        .map(|n| var_order.iter().position(|w| w == n).expect("var present"))
        .collect();
    MPoly::from_terms(
        vs.clone(),
        p.terms.iter().map(|(m, c)| {
            let nm: Mono = perm.iter().map(|&i| m[i]).collect::<Vec<_>>().into();
            (nm, c.clone())
        }),
    )
}

fn mono_lcm(a: &Mono, b: &Mono) -> Mono {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| *x.max(y))
        .collect::<Vec<_>>()
        .into()
}

fn mono_divides(a: &Mono, b: &Mono) -> bool {
    a.iter().zip(b.iter()).all(|(x, y)| x <= y)
}

fn mono_mul(a: &Mono, b: &Mono) -> Mono {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| x + y)
        .collect::<Vec<_>>()
        .into()
}

fn mono_div(a: &Mono, b: &Mono) -> Mono {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| x - y)
        .collect::<Vec<_>>()
        .into()
}

/// p - coeff * x^shift * g, both sides sorted descending.
fn subtract_multiple<F: Field>(
    p: &Ordered<F>,
    coeff: &F,
    shift: &Mono,
    g: &Ordered<F>,
    order: TermOrder,
) -> Ordered<F> {
    let mut out = Vec::with_capacity(p.terms.len() + g.terms.len());
    let mut i = 0;
    let mut j = 0;
    while i < p.terms.len() && j < g.terms.len() {
        let gm = mono_mul(&g.terms[j].0, shift);
        match order.cmp_monos(&p.terms[i].0, &gm) {
            Ordering::Greater => {
                out.push(p.terms[i].clone());
                i += 1;
            }
            Ordering::Less => {
                let c = g.terms[j].1.mul(coeff).neg();
                if !c.is_zero() {
                    out.push((gm, c));
                }
                j += 1;
            }
            Ordering::Equal => {
                let c = p.terms[i].1.sub(&g.terms[j].1.mul(coeff));
                if !c.is_zero() {
                    out.push((gm, c));
                }
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&p.terms[i..]);
    for (m, c) in &g.terms[j..] {
        let c = c.mul(coeff).neg();
        if !c.is_zero() {
            out.push((mono_mul(m, shift), c));
        }
    }
    Ordered { terms: out }
}

struct Steps {
    used: u64,
    max: u64,
}

impl Steps {
    fn new(cfg: &GroebnerConfig) -> Self {
        Steps {
            used: 0,
            max: cfg.max_steps,
        }
    }

    fn tick(&mut self) -> Result<(), GroebnerError> {
        self.used += 1;
        if self.used > self.max {
            Err(GroebnerError::BudgetExceeded { steps: self.used })
        } else {
            Ok(())
        }
    }
}

/// Full normal form of `p` against `basis` (each monic, sorted descending).
fn normal_form_ordered<F: Field>(
    p: Ordered<F>,
    basis: &[Ordered<F>],
    order: TermOrder,
    steps: &mut Steps,
) -> Result<Ordered<F>, GroebnerError> {
    let mut rest = p;
    let mut done: Vec<(Mono, F)> = Vec::new();
    'outer: while !rest.is_zero() {
        let (lm, lc) = (rest.lm().clone(), rest.lc().clone());
        for g in basis {
            if mono_divides(g.lm(), &lm) {
                steps.tick()?;
                let shift = mono_div(&lm, g.lm());
                let coeff = lc.div(g.lc()).expect("monic basis");
                rest = subtract_multiple(&rest, &coeff, &shift, g, order);
                continue 'outer;
            }
        }
        // head term irreducible: move it out
        done.push((lm, lc));
        rest.terms.remove(0);
    }
    Ok(Ordered { terms: done })
}

/// Buchberger with the normal selection strategy and the Gebauer-Moeller
/// pair update (both Buchberger criteria).
pub fn groebner_ordered<F: Field>(
    gens: &[MPoly<F>],
    var_order: &[String],
    order: TermOrder,
    cfg: &GroebnerConfig,
) -> Result<GroebnerBasis<F>, GroebnerError> {
    let mut steps = Steps::new(cfg);
    let mut basis: Vec<Ordered<F>> = Vec::new();
    struct Pair {
        i: usize,
        j: usize,
        lcm: Mono,
    }
    let mut pairs: Vec<Pair> = Vec::new();

    fn add_element<F: Field>(
        g: Ordered<F>,
        basis: &mut Vec<Ordered<F>>,
        pairs: &mut Vec<Pair>,
    ) {
        let n = basis.len();
        let lm_n = g.lm().clone();
        // Gebauer-Moeller: prune old pairs strictly superseded by the new lm
        pairs.retain(|p| {
            !(mono_divides(&lm_n, &p.lcm)
                && mono_lcm(basis[p.i].lm(), &lm_n) != p.lcm
                && mono_lcm(basis[p.j].lm(), &lm_n) != p.lcm)
        });
        // candidate new pairs
        let mut cand: Vec<Pair> = (0..n)
            .map(|i| Pair {
                i,
                j: n,
                lcm: mono_lcm(basis[i].lm(), &lm_n),
            })
            .collect();
        let mut keep = vec![true; cand.len()];
        // M criterion: drop pairs whose lcm is a strict multiple of another's
        for a in 0..cand.len() {
            if !keep[a] {
                continue;
            }
            for b in 0..cand.len() {
                if a == b || !keep[b] {
                    continue;
                }
                if cand[b].lcm != cand[a].lcm && mono_divides(&cand[b].lcm, &cand[a].lcm) {
                    keep[a] = false;
                    break;
                }
            }
        }
        // F criterion: among equal lcms keep one
        for a in 0..cand.len() {
            if !keep[a] {
                continue;
            }
            for b in (a + 1)..cand.len() {
                if keep[b] && cand[b].lcm == cand[a].lcm {
                    keep[b] = false;
                }
            }
        }
        // B (product) criterion
        for (a, p) in cand.iter().enumerate() {
            if keep[a] && mono_mul(basis[p.i].lm(), &lm_n) == p.lcm {
                keep[a] = false;
            }
        }
        let mut it = keep.iter();
        cand.retain(|_| *it.next().unwrap());
        pairs.extend(cand);
        basis.push(g);
    }

    for p in gens {
        let o = to_ordered(p, var_order, order).monic();
        if !o.is_zero() {
            add_element(o, &mut basis, &mut pairs);
        }
    }

    while !pairs.is_empty() {
        // normal strategy: minimal lcm in the order
        let best = pairs
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                order
                    .cmp_monos(&a.lcm, &b.lcm)
                    .then(a.i.cmp(&b.i))
                    .then(a.j.cmp(&b.j))
            })
            .map(|(k, _)| k)
            .unwrap();
        let pair = pairs.swap_remove(best);
        let (f, g) = (&basis[pair.i], &basis[pair.j]);
        // s-polynomial of monic f, g
        let sf = mono_div(&pair.lcm, f.lm());
        let sg = mono_div(&pair.lcm, g.lm());
        let lifted_f = Ordered {
            terms: f
                .terms
                .iter()
                .map(|(m, c)| (mono_mul(m, &sf), c.clone()))
                .collect(),
        };
        let spoly = subtract_multiple(&lifted_f, &F::one(), &sg, g, order);
        steps.tick()?;
        let nf = normal_form_ordered(spoly, &basis, order, &mut steps)?;
        if !nf.is_zero() {
            add_element(nf.monic(), &mut basis, &mut pairs);
        }
    }

    // interreduce to the reduced basis
    let mut keep = vec![true; basis.len()];
    for a in 0..basis.len() {
        for b in 0..basis.len() {
            if a != b
                && keep[a]
                && keep[b]
                && mono_divides(basis[b].lm(), basis[a].lm())
                && (basis[b].lm() != basis[a].lm() || b < a)
            {
                keep[a] = false;
            }
        }
    }
    let survivors: Vec<Ordered<F>> = basis
        .into_iter()
        .zip(keep)
        .filter_map(|(g, k)| k.then_some(g))
        .collect();
    let mut reduced: Vec<Ordered<F>> = Vec::new();
    for i in 0..survivors.len() {
        let others: Vec<Ordered<F>> = survivors
            .iter()
            .enumerate()
            .filter_map(|(j, g)| (j != i).then(|| g.clone()))
            .collect();
        let nf = normal_form_ordered(survivors[i].clone(), &others, order, &mut steps)?;
        if !nf.is_zero() {
            reduced.push(nf.monic());
        }
    }
    reduced.sort_by(|a, b| order.cmp_monos(a.lm(), b.lm()));
    Ok(GroebnerBasis {
        var_order: var_order.to_vec(),
        order,
        gens: reduced,
    })
}

/// Groebner basis over the union of the generators' variables, sorted by
/// name.
pub fn groebner<F: Field>(
    gens: &[MPoly<F>],
    order: TermOrder,
    cfg: &GroebnerConfig,
) -> Result<GroebnerBasis<F>, GroebnerError> {
    let var_order = union_vars(gens);
    groebner_ordered(gens, &var_order, order, cfg)
}

pub fn union_vars<F: Field>(gens: &[MPoly<F>]) -> Vec<String> {
    let mut names: Vec<String> = gens
        .iter()
        .flat_map(|g| g.vars().iter().cloned())
        .collect();
    names.sort();
    names.dedup();
    names
}

impl<F: Field> GroebnerBasis<F> {
    pub fn generators(&self) -> Vec<MPoly<F>> {
        self.gens
            .iter()
            .map(|g| from_ordered(g, &self.var_order))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    /// True when the basis is `{1}`: the ideal is the whole ring, so the
    /// generators have no common zero over the algebraic closure.
    pub fn is_trivial(&self) -> bool {
        self.gens.len() == 1 && self.gens[0].terms.len() == 1 && {
            let (m, c) = &self.gens[0].terms[0];
            m.iter().all(|&e| e == 0) && c.is_one()
        }
    }

    pub fn normal_form(&self, p: &MPoly<F>) -> MPoly<F> {
        // the input may mention variables outside the basis ring; they are
        // appended as order-trailing extras
        let mut var_order = self.var_order.clone();
        for v in p.vars().iter() {
            if !var_order.contains(v) {
                var_order.push(v.clone());
            }
        }
        let lifted: Vec<Ordered<F>> = self
            .gens
            .iter()
            .map(|g| to_ordered(&from_ordered(g, &self.var_order), &var_order, self.order))
            .collect();
        let cfg = GroebnerConfig::default();
        let mut steps = Steps::new(&cfg);
        let o = to_ordered(p, &var_order, self.order);
        let nf = normal_form_ordered(o, &lifted, self.order, &mut steps)
            .expect("normal form within default budget");
        from_ordered(&nf, &var_order)
    }

    pub fn contains(&self, p: &MPoly<F>) -> bool {
        self.normal_form(p).is_zero()
    }

    /// All generators that avoid every variable in `drop`.
    pub fn elimination_part(&self, drop: &[String]) -> Vec<MPoly<F>> {
        self.generators()
            .into_iter()
            .filter(|g| drop.iter().all(|v| !g.uses_var(v)))
            .collect()
    }
}

/// True iff the normal form of `p` against the (Groebner) basis is zero.
pub fn ideal_membership<F: Field>(p: &MPoly<F>, basis: &GroebnerBasis<F>) -> bool {
    basis.contains(p)
}

/// Generators of the elimination ideal after dropping the given variables.
pub fn eliminate<F: Field>(
    gens: &[MPoly<F>],
    drop: &[String],
    cfg: &GroebnerConfig,
) -> Result<Vec<MPoly<F>>, GroebnerError> {
    let all = union_vars(gens);
    let dropped: Vec<String> = all.iter().filter(|v| drop.contains(v)).cloned().collect();
    let kept: Vec<String> = all.iter().filter(|v| !drop.contains(v)).cloned().collect();
    let mut var_order = dropped.clone();
    var_order.extend(kept);
    let gb = groebner_ordered(
        gens,
        &var_order,
        TermOrder::Block {
            split: dropped.len(),
        },
        cfg,
    )?;
    Ok(gb.elimination_part(&dropped))
}

/// Saturation `I : f^inf` via the Rabinowitsch trick with a fresh tag
/// variable.
pub fn saturate<F: Field>(
    gens: &[MPoly<F>],
    f: &MPoly<F>,
    cfg: &GroebnerConfig,
) -> Result<Vec<MPoly<F>>, GroebnerError> {
    let tag = fresh_var(gens, "zsat");
    let mut sys: Vec<MPoly<F>> = gens.to_vec();
    sys.push(MPoly::one().sub(&f.mul(&MPoly::var(&tag))));
    eliminate(&sys, &[tag], cfg)
}

/// Saturation by the irrelevant ideal of the listed variables:
/// intersection of the saturations by each variable.
pub fn saturate_irrelevant<F: Field>(
    gens: &[MPoly<F>],
    vars: &[&str],
    cfg: &GroebnerConfig,
) -> Result<Vec<MPoly<F>>, GroebnerError> {
    let mut acc: Option<Vec<MPoly<F>>> = None;
    for v in vars {
        let s = saturate(gens, &MPoly::var(v), cfg)?;
        acc = Some(match acc {
            None => s,
            Some(prev) => intersect(&prev, &s, cfg)?,
        });
    }
    Ok(acc.unwrap_or_else(|| gens.to_vec()))
}

/// Ideal intersection via the tag-variable construction.
pub fn intersect<F: Field>(
    a: &[MPoly<F>],
    b: &[MPoly<F>],
    cfg: &GroebnerConfig,
) -> Result<Vec<MPoly<F>>, GroebnerError> {
    let mut all: Vec<MPoly<F>> = a.to_vec();
    all.extend_from_slice(b);
    let tag = fresh_var(&all, "zint");
    let t = MPoly::var(&tag);
    let one_minus_t = MPoly::one().sub(&t);
    let mut sys: Vec<MPoly<F>> = a.iter().map(|p| p.mul(&t)).collect();
    sys.extend(b.iter().map(|p| p.mul(&one_minus_t)));
    eliminate(&sys, &[tag], cfg)
}

/// True iff `p` vanishes on the variety of `gens` (radical membership),
/// decided by the Rabinowitsch trick.
pub fn radical_membership<F: Field>(
    p: &MPoly<F>,
    gens: &[MPoly<F>],
    cfg: &GroebnerConfig,
) -> Result<bool, GroebnerError> {
    let mut all = gens.to_vec();
    all.push(p.clone());
    let tag = fresh_var(&all, "zrad");
    let mut sys = gens.to_vec();
    sys.push(MPoly::one().sub(&p.mul(&MPoly::var(&tag))));
    let gb = groebner(&sys, TermOrder::GrevLex, cfg)?;
    Ok(gb.is_trivial())
}

fn fresh_var<F: Field>(gens: &[MPoly<F>], stem: &str) -> String {
    let used = union_vars(gens);
    let mut k = 0usize;
    loop {
        let cand = format!("{stem}{k}");
        if !used.contains(&cand) {
            return cand;
        }
        k += 1;
    }
}

/// Two-sided ideal containment: both inclusions between the generated
/// ideals, checked by normal forms.
pub fn same_ideal<F: Field>(
    a: &[MPoly<F>],
    b: &[MPoly<F>],
    cfg: &GroebnerConfig,
) -> Result<bool, GroebnerError> {
    let ga = groebner(a, TermOrder::GrevLex, cfg)?;
    let gb = groebner(b, TermOrder::GrevLex, cfg)?;
    Ok(a.iter().all(|p| gb.contains(p)) && b.iter().all(|p| ga.contains(p)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Polynomial;

    fn p(s: &str) -> Polynomial {
        Polynomial::parse(s).unwrap()
    }

    fn cfg() -> GroebnerConfig {
        GroebnerConfig::default()
    }

    #[test]
    fn principal_ideal_is_its_own_basis() {
        let gb = groebner(&[p("x")], TermOrder::GrevLex, &cfg()).unwrap();
        assert_eq!(gb.generators(), vec![p("x")]);
    }

    #[test]
    fn containment_collapses_generators() {
        let gb = groebner(&[p("x^2 - 1"), p("x - 1")], TermOrder::GrevLex, &cfg()).unwrap();
        assert_eq!(gb.generators(), vec![p("x - 1")]);
    }

    #[test]
    fn membership_examples() {
        let gb = groebner(&[p("x - 1")], TermOrder::GrevLex, &cfg()).unwrap();
        assert!(ideal_membership(&p("x - 1"), &gb));
        let gb2 = groebner(&[p("x")], TermOrder::GrevLex, &cfg()).unwrap();
        assert!(!ideal_membership(&p("1"), &gb2));
    }

    #[test]
    fn eliminate_parabola() {
        let out = eliminate(&[p("x - t"), p("y - t^2")], &["t".to_string()], &cfg()).unwrap();
        assert_eq!(out.len(), 1);
        let q = &out[0];
        assert!(q == &p("y - x^2") || q == &p("x^2 - y"), "got {:?}", out);
    }

    #[test]
    fn eliminate_everything_gives_empty() {
        let out = eliminate(&[p("x")], &["x".to_string()], &cfg()).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn no_common_zero_yields_trivial_basis() {
        let gb = groebner(
            &[p("x*y - 1"), p("x"), p("y + 3")],
            TermOrder::GrevLex,
            &cfg(),
        )
        .unwrap();
        assert!(gb.is_trivial());
    }

    #[test]
    fn order_independence_as_ideals() {
        use crate::rng::SplitMix64;
        let mut rng = SplitMix64::new(2024);
        for _ in 0..10 {
            let mk = |rng: &mut SplitMix64| {
                let a = rng.i64_in(1, 3);
                let b = rng.i64_in(-3, 3);
                let c = rng.i64_in(1, 2) as u32;
                p("x^2")
                    .scale(&crate::gaussian::GaussianRational::from_int(a))
                    .add(&p("y").pow(c))
                    .add(&Polynomial::constant(
                        crate::gaussian::GaussianRational::from_int(b),
                    ))
            };
            let gens = [mk(&mut rng), mk(&mut rng)];
            let g1 = groebner(&gens, TermOrder::GrevLex, &cfg()).unwrap();
            let g2 = groebner(&gens, TermOrder::Lex, &cfg()).unwrap();
            for q in g1.generators() {
                assert!(g2.contains(&q));
            }
            for q in g2.generators() {
                assert!(g1.contains(&q));
            }
        }
    }

    #[test]
    fn cyclic3_lex_basis_contains_univariate() {
        let gens = [p("a + b + c"), p("a*b + b*c + c*a"), p("a*b*c - 1")];
        let gb = groebner(&gens, TermOrder::Lex, &cfg()).unwrap();
        let last = gb
            .generators()
            .into_iter()
            .find(|g| g.vars().len() == 1 && g.uses_var("c"));
        assert!(last.is_some(), "expected a univariate generator in c");
        for g in gens.iter() {
            assert!(gb.contains(g));
        }
    }

    #[test]
    fn saturation_and_intersection() {
        let s = saturate(&[p("x*y")], &p("x"), &cfg()).unwrap();
        let gb = groebner(&s, TermOrder::GrevLex, &cfg()).unwrap();
        assert_eq!(gb.generators(), vec![p("y")]);

        let i = intersect(&[p("x")], &[p("y")], &cfg()).unwrap();
        let gbi = groebner(&i, TermOrder::GrevLex, &cfg()).unwrap();
        assert_eq!(gbi.generators(), vec![p("x*y")]);
    }

    #[test]
    fn radical_membership_detects_nilpotents() {
        assert!(radical_membership(&p("x"), &[p("x^2")], &cfg()).unwrap());
        assert!(!radical_membership(&p("y"), &[p("x^2")], &cfg()).unwrap());
    }

    #[test]
    fn budget_exceeded_is_reported() {
        let tiny = GroebnerConfig { max_steps: 3 };
        let r = groebner(
            &[p("x^3*y - 2*x*y^2 + 1"), p("y^3 - x^2 + x")],
            TermOrder::GrevLex,
            &tiny,
        );
        assert!(matches!(r, Err(GroebnerError::BudgetExceeded { .. })));
    }
}
