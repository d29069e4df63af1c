//! Exterior algebra of differential forms over a finite structured coframe,
//! with a structure-equation-driven exterior derivative and reduction modulo
//! an algebraic ideal of 1-forms.

mod form;
mod model;

pub use form::{Form, FormError};
pub use model::{ReduceError, SolvedOneForm, StructureModel};

use crate::ratfun::RationalFunction;
use std::collections::BTreeMap;
use std::sync::Arc;

/// Coefficients of forms: rational functions of the model's scalars and of
/// any auxiliary parameters (integral-element coefficients and the like).
pub type Scalar = RationalFunction;

/// Index of a coframe generator.
pub type GenId = usize;

/// How a named scalar coordinate differentiates.
#[derive(Clone, Debug, PartialEq)]
pub enum ScalarKind {
    /// The differential is itself a coframe generator (e.g. a parameter
    /// lambda whose d-lambda joins the coframe).
    Free { diff: GenId },
    /// The differential is a prescribed 1-form stored on the model.
    Dependent,
    /// A symbolic constant: differential zero.
    Constant,
}

/// Ordered list of named 1-form generators plus named scalar coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Coframe {
    gens: Vec<String>,
    scalars: Vec<(String, ScalarKind)>,
    gen_index: BTreeMap<String, GenId>,
}

impl Coframe {
    pub fn new(gens: Vec<String>, scalars: Vec<(String, ScalarKind)>) -> Arc<Self> {
        let mut gen_index = BTreeMap::new();
        for (i, g) in gens.iter().enumerate() {
            let prev = gen_index.insert(g.clone(), i);
            assert!(prev.is_none(), "duplicate generator name {g}");
        }
        for (s, kind) in &scalars {
            assert!(
                !gen_index.contains_key(s),
                "scalar {s} collides with a generator name"
            );
            if let ScalarKind::Free { diff } = kind {
                assert!(*diff < gens.len(), "free scalar {s} has invalid diff");
            }
        }
        Arc::new(Coframe {
            gens,
            scalars,
            gen_index,
        })
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn gen_name(&self, id: GenId) -> &str {
        &self.gens[id]
    }

    pub fn gen_names(&self) -> &[String] {
        &self.gens
    }

    pub fn gen_id(&self, name: &str) -> Option<GenId> {
        self.gen_index.get(name).copied()
    }

    pub fn scalars(&self) -> &[(String, ScalarKind)] {
        &self.scalars
    }

    pub fn scalar_kind(&self, name: &str) -> Option<&ScalarKind> {
        self.scalars
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, k)| k)
    }
}
