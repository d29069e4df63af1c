//! Builders for the concrete structure models the engine works on: the
//! semi-orthonormal frame bundle of R^(n+r), with either a symbolic normal
//! metric or the identity, and the Maurer-Cartan model of SO(N).

use crate::exterior::{Coframe, Form, GenId, Scalar, ScalarKind, StructureModel};
use crate::field::Field;
use crate::poly::Polynomial;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricMode {
    /// Normal vectors have a free symmetric Gram matrix g_ab.
    Symbolic,
    /// Orthonormal normal frame: g = I, kappa antisymmetric.
    Identity,
}

/// Specification of a semi-orthonormal frame bundle model.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FrameBundleSpec {
    pub n: usize,
    pub r: usize,
    pub metric: MetricMode,
    #[serde(default)]
    pub params: Vec<String>,
    /// Polynomial constraints among the parameters; metadata only, the
    /// algebra works over Zariski-generic points of their zero locus.
    #[serde(default)]
    pub constraints: Vec<String>,
}

impl FrameBundleSpec {
    pub fn constraint_polys(&self) -> Vec<Polynomial> {
        self.constraints
            .iter()
            .map(|s| Polynomial::parse(s).expect("constraint parses"))
            .collect()
    }
}

/// A semi-orthonormal frame bundle model with index-aware accessors.
#[derive(Clone, Debug)]
pub struct SemiOrthoFrame {
    pub model: Arc<StructureModel>,
    pub spec: FrameBundleSpec,
}

impl SemiOrthoFrame {
    pub fn coframe(&self) -> &Arc<Coframe> {
        self.model.coframe()
    }

    pub fn om_id(&self, i: usize) -> GenId {
        self.coframe().gen_id(&format!("om{i}")).expect("omega")
    }

    pub fn th_id(&self, a: usize) -> GenId {
        self.coframe().gen_id(&format!("th{a}")).expect("theta")
    }

    pub fn eta_id(&self, a: usize, i: usize) -> GenId {
        self.coframe().gen_id(&format!("et{a}_{i}")).expect("eta")
    }

    pub fn om(&self, i: usize) -> Form {
        Form::generator(self.coframe().clone(), self.om_id(i))
    }

    pub fn th(&self, a: usize) -> Form {
        Form::generator(self.coframe().clone(), self.th_id(a))
    }

    pub fn eta(&self, a: usize, i: usize) -> Form {
        Form::generator(self.coframe().clone(), self.eta_id(a, i))
    }

    /// phi^i_j with the antisymmetry convention: stored generators are
    /// phi^i_j for i < j, phi^j_i = -phi^i_j, phi^i_i = 0.
    pub fn phi(&self, i: usize, j: usize) -> Form {
        phi_like(self.coframe(), "ph", i, j)
    }

    /// kappa^a_b; antisymmetric when the metric is the identity.
    pub fn kappa(&self, a: usize, b: usize) -> Form {
        match self.spec.metric {
            MetricMode::Symbolic => Form::generator(
                self.coframe().clone(),
                self.coframe()
                    .gen_id(&format!("ka{a}_{b}"))
                    .expect("kappa"),
            ),
            MetricMode::Identity => phi_like(self.coframe(), "ka", a, b),
        }
    }

    /// Entry of the normal Gram matrix as a scalar.
    pub fn g(&self, a: usize, b: usize) -> Scalar {
        match self.spec.metric {
            MetricMode::Identity => {
                if a == b {
                    Scalar::one()
                } else {
                    Scalar::zero()
                }
            }
            MetricMode::Symbolic => {
                let (a, b) = if a <= b { (a, b) } else { (b, a) };
                Scalar::var(&g_name(a, b))
            }
        }
    }

    pub fn param_diff(&self, name: &str) -> Form {
        Form::generator(
            self.coframe().clone(),
            self.coframe().gen_id(&format!("d{name}")).expect("param"),
        )
    }
}

pub fn g_name(a: usize, b: usize) -> String {
    format!("g{a}_{b}")
}

fn phi_like(cf: &Arc<Coframe>, stem: &str, i: usize, j: usize) -> Form {
    use std::cmp::Ordering;
    match i.cmp(&j) {
        Ordering::Equal => Form::zero(cf.clone(), 1),
        Ordering::Less => Form::generator(
            cf.clone(),
            cf.gen_id(&format!("{stem}{i}_{j}")).expect("generator"),
        ),
        Ordering::Greater => Form::generator(
            cf.clone(),
            cf.gen_id(&format!("{stem}{j}_{i}")).expect("generator"),
        )
        .neg(),
    }
}

/// Builds the semi-orthonormal frame bundle of R^(n+r).
///
/// Coframe: om^i, th^a, ph^i_j (i<j), et^a_i, ka^a_b (full matrix for a
/// symbolic metric, strict upper triangle for the identity), plus the
/// differentials of any declared parameters. Scalars: g_ab (dependent,
/// dg = g kappa + kappa^T g) in symbolic mode, the parameters as free
/// scalars. All generator differentials come from the structure equations
/// of flat ambient space, so d^2 = 0.
pub fn semi_orthonormal_bundle(spec: &FrameBundleSpec) -> SemiOrthoFrame {
    let n = spec.n;
    let r = spec.r;
    let mut gens: Vec<String> = Vec::new();
    for i in 1..=n {
        gens.push(format!("om{i}"));
    }
    for a in 1..=r {
        gens.push(format!("th{a}"));
    }
    for i in 1..=n {
        for j in (i + 1)..=n {
            gens.push(format!("ph{i}_{j}"));
        }
    }
    for a in 1..=r {
        for i in 1..=n {
            gens.push(format!("et{a}_{i}"));
        }
    }
    match spec.metric {
        MetricMode::Symbolic => {
            for a in 1..=r {
                for b in 1..=r {
                    gens.push(format!("ka{a}_{b}"));
                }
            }
        }
        MetricMode::Identity => {
            for a in 1..=r {
                for b in (a + 1)..=r {
                    gens.push(format!("ka{a}_{b}"));
                }
            }
        }
    }
    let param_diff_base = gens.len();
    for p in &spec.params {
        gens.push(format!("d{p}"));
    }

    let mut scalars: Vec<(String, ScalarKind)> = Vec::new();
    if spec.metric == MetricMode::Symbolic {
        for a in 1..=r {
            for b in a..=r {
                scalars.push((g_name(a, b), ScalarKind::Dependent));
            }
        }
    }
    for (k, p) in spec.params.iter().enumerate() {
        scalars.push((p.clone(), ScalarKind::Free { diff: param_diff_base + k }));
    }

    let cf = Coframe::new(gens.clone(), scalars);
    // scalar-free shadow coframe backs the accessors while the structure
    // equations are being assembled; generator ids coincide
    let shadow = Coframe::new(gens, Vec::new());
    let frame_stub = SemiOrthoFrame {
        model: Arc::new(StructureModel::new(
            shadow.clone(),
            vec![Form::zero(shadow.clone(), 2); shadow.len()],
            BTreeMap::new(),
        )),
        spec: spec.clone(),
    };
    let f = &frame_stub;

    let mut d_gen: Vec<Form> = Vec::with_capacity(cf.len());
    // d om^i = -ph^i_j ^ om^j + g_ba et^b_i ^ th^a
    for i in 1..=n {
        let mut acc = Form::zero(cf.clone(), 2);
        for j in 1..=n {
            acc = acc.sub(&f.phi(i, j).wedge(&f.om(j)));
        }
        for a in 1..=r {
            for b in 1..=r {
                acc = acc.add(&f.eta(b, i).wedge(&f.th(a)).scale(&f.g(b, a)));
            }
        }
        d_gen.push(acc);
    }
    // d th^a = -et^a_i ^ om^i - ka^a_b ^ th^b
    for a in 1..=r {
        let mut acc = Form::zero(cf.clone(), 2);
        for i in 1..=n {
            acc = acc.sub(&f.eta(a, i).wedge(&f.om(i)));
        }
        for b in 1..=r {
            acc = acc.sub(&f.kappa(a, b).wedge(&f.th(b)));
        }
        d_gen.push(acc);
    }
    // d ph^i_j = -ph^i_k ^ ph^k_j + g_ab et^a_i ^ et^b_j
    for i in 1..=n {
        for j in (i + 1)..=n {
            let mut acc = Form::zero(cf.clone(), 2);
            for k in 1..=n {
                acc = acc.sub(&f.phi(i, k).wedge(&f.phi(k, j)));
            }
            for a in 1..=r {
                for b in 1..=r {
                    acc = acc.add(&f.eta(a, i).wedge(&f.eta(b, j)).scale(&f.g(a, b)));
                }
            }
            d_gen.push(acc);
        }
    }
    // d et^a_i = -et^a_j ^ ph^j_i - ka^a_b ^ et^b_i
    for a in 1..=r {
        for i in 1..=n {
            let mut acc = Form::zero(cf.clone(), 2);
            for j in 1..=n {
                acc = acc.sub(&f.eta(a, j).wedge(&f.phi(j, i)));
            }
            for b in 1..=r {
                acc = acc.sub(&f.kappa(a, b).wedge(&f.eta(b, i)));
            }
            d_gen.push(acc);
        }
    }
    // d ka^a_b = g_cb et^a_i ^ et^c_i - ka^a_c ^ ka^c_b
    let d_kappa = |a: usize, b: usize| -> Form {
        let mut acc = Form::zero(cf.clone(), 2);
        for i in 1..=n {
            for c in 1..=r {
                acc = acc.add(&f.eta(a, i).wedge(&f.eta(c, i)).scale(&f.g(c, b)));
            }
        }
        for c in 1..=r {
            acc = acc.sub(&f.kappa(a, c).wedge(&f.kappa(c, b)));
        }
        acc
    };
    match spec.metric {
        MetricMode::Symbolic => {
            for a in 1..=r {
                for b in 1..=r {
                    d_gen.push(d_kappa(a, b));
                }
            }
        }
        MetricMode::Identity => {
            for a in 1..=r {
                for b in (a + 1)..=r {
                    d_gen.push(d_kappa(a, b));
                }
            }
        }
    }
    for _ in &spec.params {
        d_gen.push(Form::zero(cf.clone(), 2));
    }

    // dg_ab = (g kappa + kappa^T g)_ab = g_ac ka^c_b + g_cb ka^c_a
    let mut d_scalar = BTreeMap::new();
    if spec.metric == MetricMode::Symbolic {
        for a in 1..=r {
            for b in a..=r {
                let mut acc = Form::zero(cf.clone(), 1);
                for c in 1..=r {
                    acc = acc.add(&f.kappa(c, b).scale(&f.g(a, c)));
                    acc = acc.add(&f.kappa(c, a).scale(&f.g(c, b)));
                }
                d_scalar.insert(g_name(a, b), acc);
            }
        }
    }

    let d_gen: Vec<Form> = d_gen
        .iter()
        .map(|f| f.transfer(&cf).expect("same generator names"))
        .collect();
    let d_scalar: BTreeMap<String, Form> = d_scalar
        .iter()
        .map(|(n, f)| (n.clone(), f.transfer(&cf).expect("same generator names")))
        .collect();
    let model = Arc::new(StructureModel::new(cf, d_gen, d_scalar));
    SemiOrthoFrame {
        model,
        spec: spec.clone(),
    }
}

/// The Maurer-Cartan model of SO(N): generators ps^i_j for i < j <= N with
/// d psi = -psi ^ psi.
#[derive(Clone, Debug)]
pub struct SpecialOrthogonalFrame {
    pub model: Arc<StructureModel>,
    pub dim: usize,
}

impl SpecialOrthogonalFrame {
    pub fn psi(&self, i: usize, j: usize) -> Form {
        phi_like(self.model.coframe(), "ps", i, j)
    }
}

pub fn special_orthogonal_model(dim: usize) -> SpecialOrthogonalFrame {
    assert!(dim >= 2, "need at least SO(2)");
    let mut gens = Vec::new();
    for i in 1..=dim {
        for j in (i + 1)..=dim {
            gens.push(format!("ps{i}_{j}"));
        }
    }
    let cf = Coframe::new(gens, Vec::new());
    let stub = SpecialOrthogonalFrame {
        model: Arc::new(StructureModel::new(
            cf.clone(),
            vec![Form::zero(cf.clone(), 2); cf.len()],
            BTreeMap::new(),
        )),
        dim,
    };
    let mut d_gen = Vec::with_capacity(cf.len());
    for i in 1..=dim {
        for j in (i + 1)..=dim {
            let mut acc = Form::zero(cf.clone(), 2);
            for k in 1..=dim {
                acc = acc.sub(&stub.psi(i, k).wedge(&stub.psi(k, j)));
            }
            d_gen.push(acc);
        }
    }
    let model = Arc::new(StructureModel::new(cf, d_gen, BTreeMap::new()));
    SpecialOrthogonalFrame { model, dim }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_count_for_symbolic_r6() {
        let spec = FrameBundleSpec {
            n: 4,
            r: 6,
            metric: MetricMode::Symbolic,
            params: vec![],
            constraints: vec![],
        };
        let f = semi_orthonormal_bundle(&spec);
        // 4 om + 6 th + 6 ph + 24 et + 36 ka
        assert_eq!(f.coframe().len(), 4 + 6 + 6 + 24 + 36);
        // 21 dependent scalars g_ab
        assert_eq!(f.coframe().scalars().len(), 21);
    }

    #[test]
    fn d_squared_vanishes_symbolic_r3_with_params() {
        let spec = FrameBundleSpec {
            n: 4,
            r: 3,
            metric: MetricMode::Symbolic,
            params: vec!["l1".into(), "l2".into()],
            constraints: vec![],
        };
        let f = semi_orthonormal_bundle(&spec);
        assert!(f.model.d_squared_zero());
    }

    #[test]
    fn d_squared_vanishes_identity_metric() {
        let spec = FrameBundleSpec {
            n: 4,
            r: 3,
            metric: MetricMode::Identity,
            params: vec!["l1".into()],
            constraints: vec![],
        };
        let f = semi_orthonormal_bundle(&spec);
        assert!(f.model.d_squared_zero());
        // kappa antisymmetry is a generator identification
        assert_eq!(f.kappa(2, 1), f.kappa(1, 2).neg());
        assert!(f.kappa(1, 1).is_zero());
    }

    #[test]
    fn identity_model_is_symbolic_model_at_g_eq_identity() {
        let sym = semi_orthonormal_bundle(&FrameBundleSpec {
            n: 4,
            r: 2,
            metric: MetricMode::Symbolic,
            params: vec![],
            constraints: vec![],
        });
        let idm = semi_orthonormal_bundle(&FrameBundleSpec {
            n: 4,
            r: 2,
            metric: MetricMode::Identity,
            params: vec![],
            constraints: vec![],
        });
        // substitute g = I into structure equations: should match the
        // identity model's, after rewriting ka^2_1 -> -ka^1_2, ka^a_a -> 0
        let mut assign = BTreeMap::new();
        for a in 1..=2usize {
            for b in a..=2usize {
                assign.insert(
                    g_name(a, b),
                    if a == b { Scalar::one() } else { Scalar::zero() },
                );
            }
        }
        for name in ["om1", "th1", "th2", "ph1_2"] {
            let id = sym.coframe().gen_id(name).unwrap();
            let specialized = sym
                .model
                .d_of_generator(id)
                .substitute_scalars(&assign)
                .unwrap();
            let lowered = {
                let ka21 = sym.coframe().gen_id("ka2_1").unwrap();
                let ka12 = Form::generator(
                    sym.coframe().clone(),
                    sym.coframe().gen_id("ka1_2").unwrap(),
                );
                let no21 = specialized.substitute_generator(ka21, &ka12.neg());
                let ka11 = sym.coframe().gen_id("ka1_1").unwrap();
                let no11 =
                    no21.substitute_generator(ka11, &Form::zero(sym.coframe().clone(), 1));
                let ka22 = sym.coframe().gen_id("ka2_2").unwrap();
                no11.substitute_generator(ka22, &Form::zero(sym.coframe().clone(), 1))
            };
            let target = idm
                .model
                .d_of_generator(idm.coframe().gen_id(name).unwrap());
            let transferred = lowered.transfer(idm.coframe()).unwrap();
            assert_eq!(&transferred, target, "mismatch in d({name})");
        }
    }

    #[test]
    fn so_model_small_cases() {
        let so2 = special_orthogonal_model(2);
        assert_eq!(so2.model.coframe().len(), 1);
        assert!(so2.model.d_of_generator(0).is_zero());

        let so6 = special_orthogonal_model(6);
        assert_eq!(so6.model.coframe().len(), 15);
        assert!(so6.model.d_squared_zero());
    }
}
