//! Symmetric-matrix-space algebra: the maximal austere subspaces of 4x4
//! symmetric matrices, the austere test via odd elementary symmetric
//! functions, prolongation of subspaces, the commutator-map nullspace
//! criterion, and the classification of 2-dimensional subspaces through the
//! complex 2x2 picture.

use crate::exterior::Scalar;
use crate::field::Field;
use crate::gaussian::GaussianRational;
use crate::matrix::Mat;
use crate::poly::Polynomial;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

pub type SMat = Mat<Scalar>;

/// Finite-dimensional space of n x n symmetric matrices with scalar entries.
#[derive(Clone, Debug)]
pub struct SymSpace {
    pub n: usize,
    pub basis: Vec<SMat>,
    pub params: Vec<String>,
    /// Optional coefficients expressing each basis element in a maximal
    /// basis.
    pub coords: Option<Vec<Vec<Scalar>>>,
}

#[derive(Debug, thiserror::Error)]
pub enum AustereError {
    #[error("basis matrix {0} is not symmetric")]
    NotSymmetric(usize),
    #[error("basis is linearly dependent over the fraction field")]
    DependentBasis,
    #[error("matrix is not in the required block form")]
    BadBlockForm,
    #[error("pair spans less than two real dimensions")]
    DegenerateSpan,
}

pub fn mat_from_i64(rows: &[[i64; 4]; 4]) -> SMat {
    Mat::from_fn(4, 4, |i, j| Scalar::from_int(rows[i][j]))
}

fn mat2_zero() -> SMat {
    Mat::zero(2, 2)
}

fn is_symmetric(m: &SMat) -> bool {
    let n = m.rows();
    (0..n).all(|i| (0..n).all(|j| m.get(i, j) == m.get(j, i)))
}

impl SymSpace {
    pub fn new(n: usize, basis: Vec<SMat>, params: Vec<String>) -> Result<Self, AustereError> {
        for (k, m) in basis.iter().enumerate() {
            if m.rows() != n || m.cols() != n || !is_symmetric(m) {
                return Err(AustereError::NotSymmetric(k));
            }
        }
        // linear independence over the fraction field
        let stacked: Mat<Scalar> = Mat::from_fn(basis.len(), n * n, |k, e| {
            basis[k].get(e / n, e % n).clone()
        });
        if stacked.ff_rank() != basis.len() {
            return Err(AustereError::DependentBasis);
        }
        Ok(SymSpace {
            n,
            basis,
            params,
            coords: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Complex structure the A-type space anticommutes with.
pub fn j_matrix() -> SMat {
    mat_from_i64(&[
        [0, 0, -1, 0],
        [0, 0, 0, -1],
        [1, 0, 0, 0],
        [0, 1, 0, 0],
    ])
}

/// The conjugate complex structure P J P^(-1), P the 1 <-> 3 transposition.
/// Squares to -I and multiplies S_x into an A-type symmetric matrix.
pub fn j_tilde_matrix() -> SMat {
    mat_from_i64(&[
        [0, 0, 1, 0],
        [0, 0, 0, -1],
        [-1, 0, 0, 0],
        [0, 1, 0, 0],
    ])
}

/// Generators of the J-anticommuting part of so(4).
pub fn t_matrix() -> SMat {
    mat_from_i64(&[
        [0, -1, 0, 0],
        [1, 0, 0, 0],
        [0, 0, 0, 1],
        [0, 0, -1, 0],
    ])
}

pub fn u_matrix() -> SMat {
    mat_from_i64(&[
        [0, 0, 0, 1],
        [0, 0, -1, 0],
        [0, 1, 0, 0],
        [-1, 0, 0, 0],
    ])
}

/// Reflection the B-type space is built around.
pub fn r_matrix() -> SMat {
    mat_from_i64(&[
        [1, 0, 0, 0],
        [0, 1, 0, 0],
        [0, 0, -1, 0],
        [0, 0, 0, -1],
    ])
}

/// Diagonal representative of a nonzero A-type element, with parameter x.
pub fn s_x_matrix(x: &Scalar) -> SMat {
    let mut m = Mat::zero(4, 4);
    m.set(0, 0, Scalar::one());
    m.set(1, 1, x.clone());
    m.set(2, 2, Scalar::from_int(-1));
    m.set(3, 3, x.neg());
    m
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MaximalKind {
    A,
    B,
    C,
}

/// The lambda solved by the cubic relation: -(l1+l2)/(1+l1*l2).
pub fn lambda3_solved(l1: &Scalar, l2: &Scalar) -> Scalar {
    let num = l1.add(l2).neg();
    let den = Scalar::one().add(&l1.mul(l2));
    num.div(&den).expect("excluded locus 1 + l1*l2 = 0")
}

/// The cubic relation among the three C-type parameters.
pub fn lambda_relation() -> Polynomial {
    Polynomial::parse("l1*l2*l3 + l1 + l2 + l3").unwrap()
}

/// Basis of one of the three maximal austere subspaces of S^2(R^4).
///
/// For kind C the two free parameters are l1, l2 and the third is stored in
/// solved form, so the cubic relation holds identically; the vanishing locus
/// of 1 + l1*l2 is excluded.
pub fn maximal_basis(kind: MaximalKind) -> SymSpace {
    match kind {
        MaximalKind::A => {
            let b = vec![
                mat_from_i64(&[[1, 0, 0, 0], [0, 0, 0, 0], [0, 0, -1, 0], [0, 0, 0, 0]]),
                mat_from_i64(&[[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, -1, 0]]),
                mat_from_i64(&[[0, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 0], [0, 0, 0, -1]]),
                mat_from_i64(&[[0, 0, 1, 0], [0, 0, 0, 0], [1, 0, 0, 0], [0, 0, 0, 0]]),
                mat_from_i64(&[[0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0], [1, 0, 0, 0]]),
                mat_from_i64(&[[0, 0, 0, 0], [0, 0, 0, 1], [0, 0, 0, 0], [0, 1, 0, 0]]),
            ];
            SymSpace::new(4, b, vec![]).expect("valid basis")
        }
        MaximalKind::B => {
            let b = vec![
                mat_from_i64(&[[0, 0, 1, 0], [0, 0, 0, 0], [1, 0, 0, 0], [0, 0, 0, 0]]),
                mat_from_i64(&[[0, 0, 0, 1], [0, 0, 0, 0], [0, 0, 0, 0], [1, 0, 0, 0]]),
                mat_from_i64(&[[0, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 0]]),
                mat_from_i64(&[[0, 0, 0, 0], [0, 0, 0, 1], [0, 0, 0, 0], [0, 1, 0, 0]]),
                r_matrix(),
            ];
            SymSpace::new(4, b, vec![]).expect("valid basis")
        }
        MaximalKind::C => {
            let l1 = Scalar::var("l1");
            let l2 = Scalar::var("l2");
            let l3 = lambda3_solved(&l1, &l2);
            let mut s =
                c_basis_with(&l1, &l2, &l3);
            s.params = vec!["l1".into(), "l2".into()];
            s
        }
    }
}

/// C-type basis with explicitly supplied parameter scalars (used both for
/// the solved form and for a free third parameter).
pub fn c_basis_with(l1: &Scalar, l2: &Scalar, l3: &Scalar) -> SymSpace {
    let zero = Scalar::zero;
    let one = Scalar::one;
    let rows = |l: &Scalar, pat: usize| -> SMat {
        // pat selects which of the three symmetric patterns to fill
        let mut m = Mat::zero(4, 4);
        match pat {
            1 => {
                m.set(0, 1, one());
                m.set(1, 0, one());
                m.set(2, 3, l.clone());
                m.set(3, 2, l.clone());
            }
            2 => {
                m.set(0, 2, one());
                m.set(2, 0, one());
                m.set(1, 3, l.clone());
                m.set(3, 1, l.clone());
            }
            3 => {
                m.set(0, 3, one());
                m.set(3, 0, one());
                m.set(1, 2, l.clone());
                m.set(2, 1, l.clone());
            }
            _ => unreachable!(),
        }
        let _ = zero;
        m
    };
    let b = vec![rows(l1, 1), rows(l2, 2), rows(l3, 3)];
    let mut params: Vec<String> = Vec::new();
    for l in [l1, l2, l3] {
        for v in l.numerator().vars().iter().chain(l.denominator().vars().iter()) {
            if !params.contains(v) {
                params.push(v.clone());
            }
        }
    }
    SymSpace {
        n: 4,
        basis: b,
        params,
        coords: None,
    }
}

pub fn commutator(a: &SMat, b: &SMat) -> SMat {
    a.mul(b).sub_mat(&b.mul(a))
}

impl SMat {
    pub fn sub_mat(&self, other: &SMat) -> SMat {
        Mat::from_fn(self.rows(), self.cols(), |i, j| {
            self.get(i, j).sub(other.get(i, j))
        })
    }

    pub fn add_mat(&self, other: &SMat) -> SMat {
        Mat::from_fn(self.rows(), self.cols(), |i, j| {
            self.get(i, j).add(other.get(i, j))
        })
    }

    pub fn scale_mat(&self, c: &Scalar) -> SMat {
        Mat::from_fn(self.rows(), self.cols(), |i, j| self.get(i, j).mul(c))
    }

    pub fn neg_mat(&self) -> SMat {
        Mat::from_fn(self.rows(), self.cols(), |i, j| self.get(i, j).neg())
    }
}

/// Anticommutator test `SJ + JS = 0`.
pub fn anticommutes(s: &SMat, j: &SMat) -> bool {
    let x = s.mul(j).add_mat(&j.mul(s));
    (0..x.rows()).all(|i| (0..x.cols()).all(|k| x.get(i, k).is_zero()))
}

/// Sum of all k x k principal minors: the k-th elementary symmetric function
/// of the eigenvalues.
fn elementary_symmetric(m: &SMat, k: usize) -> Scalar {
    let n = m.rows();
    let mut acc = Scalar::zero();
    let mut sel: Vec<usize> = (0..k).collect();
    if k == 0 {
        return Scalar::one();
    }
    loop {
        // determinant of the principal submatrix on `sel`
        let sub: Vec<Vec<Scalar>> = sel
            .iter()
            .map(|&i| sel.iter().map(|&j| m.get(i, j).clone()).collect())
            .collect();
        acc = acc.add(&det_small(&sub));
        // advance combination
        let mut i = k;
        loop {
            if i == 0 {
                return acc;
            }
            i -= 1;
            if sel[i] != i + n - k {
                break;
            }
        }
        sel[i] += 1;
        for j in i + 1..k {
            sel[j] = sel[j - 1] + 1;
        }
    }
}

fn det_small(rows: &[Vec<Scalar>]) -> Scalar {
    let n = rows.len();
    match n {
        0 => Scalar::one(),
        1 => rows[0][0].clone(),
        2 => rows[0][0].mul(&rows[1][1]).sub(&rows[0][1].mul(&rows[1][0])),
        _ => {
            let mut acc = Scalar::zero();
            for j in 0..n {
                if rows[0][j].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<Scalar>> = (1..n)
                    .map(|i| {
                        (0..n)
                            .filter(|&c| c != j)
                            .map(|c| rows[i][c].clone())
                            .collect()
                    })
                    .collect();
                let mut term = rows[0][j].mul(&det_small(&minor));
                if j % 2 == 1 {
                    term = term.neg();
                }
                acc = acc.add(&term);
            }
            acc
        }
    }
}

/// Outcome of the austere test: on failure, the first odd elementary
/// symmetric coefficient that does not vanish identically (numerator,
/// denominators cleared).
#[derive(Clone, Debug)]
pub struct AustereCertificate {
    pub austere: bool,
    pub failing_degree: Option<usize>,
    pub certificate: Option<Polynomial>,
}

/// A space is austere iff for the generic combination x_h S^h all
/// odd-degree elementary symmetric functions of the eigenvalues vanish
/// identically as polynomials in the x's and the parameters.
pub fn is_austere(space: &SymSpace) -> AustereCertificate {
    let n = space.n;
    let generic: SMat = {
        let mut acc: SMat = Mat::zero(n, n);
        for (h, s) in space.basis.iter().enumerate() {
            let x = Scalar::var(&format!("xaus{}", h + 1));
            acc = acc.add_mat(&s.scale_mat(&x));
        }
        acc
    };
    let mut k = 1;
    while k <= n {
        let e = elementary_symmetric(&generic, k);
        if !e.is_zero() {
            return AustereCertificate {
                austere: false,
                failing_degree: Some(k),
                certificate: Some(e.numerator().clone()),
            };
        }
        k += 2;
    }
    AustereCertificate {
        austere: true,
        failing_degree: None,
        certificate: None,
    }
}

/// A basis element of the prolongation: a fully symmetric 3-tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct SymTensor3 {
    pub n: usize,
    vals: BTreeMap<(usize, usize, usize), Scalar>,
}

impl SymTensor3 {
    pub fn get(&self, i: usize, j: usize, k: usize) -> Scalar {
        let mut idx = [i, j, k];
        idx.sort_unstable();
        self.vals
            .get(&(idx[0], idx[1], idx[2]))
            .cloned()
            .unwrap_or_else(Scalar::zero)
    }
}

#[derive(Clone, Debug)]
pub struct Prolongation {
    pub dimension: usize,
    pub basis: Vec<SymTensor3>,
}

/// The prolongation Q tensor V* intersected with V* tensor S^2 V*: symmetric
/// 3-tensors whose every slice lies in Q. Computed as the kernel of the
/// skew-symmetrization map on Q tensor V*.
pub fn prolongation(space: &SymSpace) -> Prolongation {
    let n = space.n;
    let q = space.dim();
    // unknowns c_{h,k}: T_{ijk} = sum_h c_{h,k} S^h_{ij}
    // conditions: T_{ijk} = T_{ikj} for all i and j < k
    let ncols = q * n;
    let col = |h: usize, k: usize| h * n + k;
    let mut rows: Vec<Vec<Scalar>> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in (j + 1)..n {
                let mut row = vec![Scalar::zero(); ncols];
                for h in 0..q {
                    // + S^h_{ij} c_{h,k} - S^h_{ik} c_{h,j}
                    row[col(h, k)] = row[col(h, k)].add(space.basis[h].get(i, j));
                    row[col(h, j)] = row[col(h, j)].sub(space.basis[h].get(i, k));
                }
                rows.push(row);
            }
        }
    }
    let m: Mat<Scalar> = Mat::from_rows(rows);
    let kernel = m.ff_nullspace();
    let basis = kernel
        .iter()
        .map(|c| {
            let mut vals = BTreeMap::new();
            for i in 0..n {
                for j in i..n {
                    for k in j..n {
                        let mut acc = Scalar::zero();
                        for h in 0..q {
                            acc = acc.add(&space.basis[h].get(i, j).mul(&c[col(h, k)]));
                        }
                        if !acc.is_zero() {
                            vals.insert((i, j, k), acc);
                        }
                    }
                }
            }
            SymTensor3 { n, vals }
        })
        .collect();
    Prolongation {
        dimension: kernel.len(),
        basis,
    }
}

/// The commutator map `S -> ([S,T] | [S,U])` as a 4 x 8 matrix.
pub fn k_map(s: &SMat) -> SMat {
    let ct = commutator(s, &t_matrix());
    let cu = commutator(s, &u_matrix());
    Mat::from_fn(4, 8, |i, j| {
        if j < 4 {
            ct.get(i, j).clone()
        } else {
            cu.get(i, j - 4).clone()
        }
    })
}

#[derive(Clone, Debug)]
pub struct KMapNullspace {
    pub dimension: usize,
    pub witness: Option<Vec<Scalar>>,
}

/// Dimension of the common nullspace of the commutator-map images of the
/// basis, i.e. the kernel of the stacked (4 dim) x 8 matrix.
pub fn k_map_nullspace(space: &SymSpace) -> KMapNullspace {
    if space.basis.is_empty() {
        return KMapNullspace {
            dimension: 8,
            witness: Some(vec![Scalar::one(); 1]),
        };
    }
    let blocks: Vec<SMat> = space.basis.iter().map(k_map).collect();
    let stacked: Mat<Scalar> = Mat::from_fn(4 * blocks.len(), 8, |i, j| {
        blocks[i / 4].get(i % 4, j).clone()
    });
    let kernel = stacked.ff_nullspace();
    KMapNullspace {
        dimension: kernel.len(),
        witness: kernel.into_iter().next(),
    }
}

// ---------------------------------------------------------------------------
// complex 2x2 picture
// ---------------------------------------------------------------------------

/// Maps an A-type matrix [[A, B], [B, -A]] to the complex symmetric A - iB.
pub fn rho_bar(s: &SMat) -> Result<SMat, AustereError> {
    if s.rows() != 4 || s.cols() != 4 || !is_symmetric(s) {
        return Err(AustereError::BadBlockForm);
    }
    // block extraction with consistency checks
    for i in 0..2 {
        for j in 0..2 {
            if s.get(i, j) != &s.get(i + 2, j + 2).neg() {
                return Err(AustereError::BadBlockForm);
            }
            if s.get(i, j + 2) != s.get(i + 2, j) {
                return Err(AustereError::BadBlockForm);
            }
        }
    }
    let i_unit = Scalar::i();
    Ok(Mat::from_fn(2, 2, |i, j| {
        s.get(i, j).sub(&i_unit.mul(s.get(i, j + 2)))
    }))
}

/// Inverse of `rho_bar`: complex symmetric V = A - iB to [[A, B], [B, -A]].
pub fn rho_bar_inverse(v: &SMat) -> Result<SMat, AustereError> {
    if v.rows() != 2 || v.cols() != 2 || v.get(0, 1) != v.get(1, 0) {
        return Err(AustereError::BadBlockForm);
    }
    let mut a = mat2_zero();
    let mut b = mat2_zero();
    for i in 0..2 {
        for j in 0..2 {
            let (re, im) = v
                .get(i, j)
                .split_real_imag()
                .ok_or(AustereError::BadBlockForm)?;
            a.set(i, j, re);
            b.set(i, j, im.neg());
        }
    }
    Ok(Mat::from_fn(4, 4, |i, j| match (i < 2, j < 2) {
        (true, true) => a.get(i, j).clone(),
        (true, false) => b.get(i, j - 2).clone(),
        (false, true) => b.get(i - 2, j).clone(),
        (false, false) => a.get(i - 2, j - 2).neg(),
    }))
}

/// Maps a J-commuting matrix [[E, F], [-F, E]] to the complex E + iF.
pub fn rho(m: &SMat) -> Result<SMat, AustereError> {
    if m.rows() != 4 || m.cols() != 4 {
        return Err(AustereError::BadBlockForm);
    }
    for i in 0..2 {
        for j in 0..2 {
            if m.get(i, j) != m.get(i + 2, j + 2) {
                return Err(AustereError::BadBlockForm);
            }
            if m.get(i, j + 2) != &m.get(i + 2, j).neg() {
                return Err(AustereError::BadBlockForm);
            }
        }
    }
    let i_unit = Scalar::i();
    Ok(Mat::from_fn(2, 2, |i, j| {
        m.get(i, j).add(&i_unit.mul(m.get(i, j + 2)))
    }))
}

/// Two complex symmetric 2x2 matrices spanning a real 2-dimensional space.
#[derive(Clone, Debug)]
pub struct ComplexSymPair {
    pub s: SMat,
    pub t: SMat,
}

impl ComplexSymPair {
    pub fn new(s: SMat, t: SMat) -> Result<Self, AustereError> {
        for m in [&s, &t] {
            if m.rows() != 2 || m.cols() != 2 || m.get(0, 1) != m.get(1, 0) {
                return Err(AustereError::BadBlockForm);
            }
        }
        Ok(ComplexSymPair { s, t })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseTag {
    OneA,
    OneB,
    TwoA,
    TwoB,
    TwoC,
    TwoD,
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CaseTag::OneA => "1.a",
            CaseTag::OneB => "1.b",
            CaseTag::TwoA => "2.a",
            CaseTag::TwoB => "2.b",
            CaseTag::TwoC => "2.c",
            CaseTag::TwoD => "2.d",
        };
        write!(f, "{s}")
    }
}

#[derive(Clone, Debug)]
pub struct CaseLabel {
    pub tag: CaseTag,
    /// The input pair when it already matches the displayed normal-form
    /// shape for its case, along with recovered parameter entries.
    pub normalized: Option<(SMat, SMat)>,
    pub parameters: BTreeMap<String, Scalar>,
}

#[derive(Clone, Debug)]
pub enum Classification {
    Classified(CaseLabel),
    /// Parametric input off the displayed normal forms where the exact
    /// real-root test cannot decide.
    Indeterminate(String),
}

fn det2(m: &SMat) -> Scalar {
    m.get(0, 0).mul(m.get(1, 1)).sub(&m.get(0, 1).mul(m.get(1, 0)))
}

fn mat2_add(a: &SMat, b: &SMat) -> SMat {
    a.add_mat(b)
}

/// Exact test: does `alpha^2 qa + alpha*beta qm + beta^2 qb = 0` have a real
/// projective root, for Gaussian-rational coefficients?
fn real_root_binary_quadratic(
    qa: &GaussianRational,
    qm: &GaussianRational,
    qb: &GaussianRational,
) -> bool {
    use num_traits::{Signed, Zero};
    // (1, 0) root
    if Field::is_zero(qa) {
        return true;
    }
    // dehomogenize at alpha = t, beta = 1: qa t^2 + qm t + qb = 0 needs a
    // real solution of both real and imaginary parts
    let re = |c: &GaussianRational| c.re.clone();
    let im = |c: &GaussianRational| c.im.clone();
    let (ra, rm, rb) = (re(qa), re(qm), re(qb));
    let (ia, imid, ib) = (im(qa), im(qm), im(qb));
    let re_zero = ra.is_zero() && rm.is_zero() && rb.is_zero();
    let im_zero = ia.is_zero() && imid.is_zero() && ib.is_zero();
    let disc_nonneg = |a: &num_rational::BigRational,
                      b: &num_rational::BigRational,
                      c: &num_rational::BigRational| {
        if a.is_zero() {
            // linear (or constant): real root iff not a nonzero constant
            return !b.is_zero() || c.is_zero();
        }
        let d = b * b - num_rational::BigRational::from_integer(4.into()) * a * c;
        !d.is_negative()
    };
    match (re_zero, im_zero) {
        (true, true) => true,
        (true, false) => disc_nonneg(&ia, &imid, &ib),
        (false, true) => disc_nonneg(&ra, &rm, &rb),
        (false, false) => {
            // common real root of two real quadratics: gcd in Q[t]
            let pr = univariate(&ra, &rm, &rb);
            let pi = univariate(&ia, &imid, &ib);
            let g = pr.gcd(&pi);
            match g.total_degree() {
                0 => false,
                1 => true, // rational root
                _ => {
                    // proportional quadratics: discriminant decides
                    disc_nonneg(&ra, &rm, &rb)
                }
            }
        }
    }
}

fn univariate(
    a: &num_rational::BigRational,
    b: &num_rational::BigRational,
    c: &num_rational::BigRational,
) -> Polynomial {
    use num_traits::Zero;
    let t = Polynomial::var("t");
    let mk = |r: &num_rational::BigRational| {
        Polynomial::constant(GaussianRational::new(r.clone(), num_rational::BigRational::zero()))
    };
    mk(a).mul(&t).mul(&t).add(&mk(b).mul(&t)).add(&mk(c))
}

/// Decision procedure over the complex 2x2 picture.
///
/// Complex-linear dependence splits case 1 from case 2; within case 1 a
/// full-rank test separates 1.a from 1.b; within case 2, a real root of
/// det(T - lambda S) = 0 gives 2.a, a common zero of the two quadrics gives
/// 2.b, commutation gives 2.c, else 2.d. All tests are exact; the real-root
/// test on parametric input that is not structurally decidable reports
/// indeterminate.
pub fn classify_pair(pair: &ComplexSymPair) -> Result<Classification, AustereError> {
    let s = &pair.s;
    let t = &pair.t;
    // real span must be 2-dimensional: split into re/im coordinate vectors
    {
        let mut rows: Vec<Vec<Scalar>> = Vec::new();
        for m in [s, t] {
            let mut row = Vec::new();
            for (i, j) in [(0, 0), (0, 1), (1, 1)] {
                let (re, im) = m
                    .get(i, j)
                    .split_real_imag()
                    .unwrap_or_else(|| (m.get(i, j).clone(), Scalar::zero()));
                row.push(re);
                row.push(im);
            }
            rows.push(row);
        }
        let m: Mat<Scalar> = Mat::from_rows(rows);
        if m.rank() < 2 {
            return Err(AustereError::DegenerateSpan);
        }
    }
    // complex dependence: rank of the 2x3 coefficient matrix
    let coeff: Mat<Scalar> = Mat::from_rows(vec![
        vec![s.get(0, 0).clone(), s.get(0, 1).clone(), s.get(1, 1).clone()],
        vec![t.get(0, 0).clone(), t.get(0, 1).clone(), t.get(1, 1).clone()],
    ]);
    if coeff.rank() <= 1 {
        // case 1
        let full_rank = !det2(s).is_zero() || !det2(t).is_zero();
        let tag = if full_rank { CaseTag::OneA } else { CaseTag::OneB };
        return Ok(Classification::Classified(normal_form_label(tag, s, t)));
    }
    // case 2.a: singular element in the real span
    let det_s = det2(s);
    let det_t = det2(t);
    if det_s.is_zero() || det_t.is_zero() {
        return Ok(Classification::Classified(normal_form_label(
            CaseTag::TwoA,
            s,
            t,
        )));
    }
    let mixed = det2(&mat2_add(s, t)).sub(&det_s).sub(&det_t);
    let consts = [&det_s, &mixed, &det_t].map(|v| v.constant_value());
    if let [Some(ca), Some(cm), Some(cb)] = consts {
        if real_root_binary_quadratic(&ca, &cm, &cb) {
            return Ok(Classification::Classified(normal_form_label(
                CaseTag::TwoA,
                s,
                t,
            )));
        }
    } else {
        return Ok(Classification::Indeterminate(
            "parametric pair off the displayed normal forms: the real-root test \
             for a singular element is not structurally decidable"
                .to_string(),
        ));
    }
    // case 2.b: quadrics share a projective zero <=> resultant vanishes
    let q = |m: &SMat| {
        (
            m.get(0, 0).clone(),
            m.get(0, 1).scale_by_int(2),
            m.get(1, 1).clone(),
        )
    };
    let (a0, a1, a2) = q(s);
    let (b0, b1, b2) = q(t);
    // resultant of two binary quadratics
    let res = {
        let d02 = a0.mul(&b2).sub(&a2.mul(&b0));
        let d01 = a0.mul(&b1).sub(&a1.mul(&b0));
        let d12 = a1.mul(&b2).sub(&a2.mul(&b1));
        d02.mul(&d02).sub(&d01.mul(&d12))
    };
    if res.is_zero() {
        return Ok(Classification::Classified(normal_form_label(
            CaseTag::TwoB,
            s,
            t,
        )));
    }
    // case 2.c: commuting matrices
    let comm = commutator(s, t);
    if (0..2).all(|i| (0..2).all(|j| comm.get(i, j).is_zero())) {
        return Ok(Classification::Classified(normal_form_label(
            CaseTag::TwoC,
            s,
            t,
        )));
    }
    Ok(Classification::Classified(normal_form_label(
        CaseTag::TwoD,
        s,
        t,
    )))
}

impl Scalar {
    fn scale_by_int(&self, k: i64) -> Scalar {
        self.mul(&Scalar::from_int(k))
    }
}

/// Shape-matches the displayed normal form for the case, recovering the
/// parameter entries when it fits; classification itself never depends on
/// this.
fn normal_form_label(tag: CaseTag, s: &SMat, t: &SMat) -> CaseLabel {
    let mut parameters = BTreeMap::new();
    let i_unit = Scalar::i();
    let matches = match tag {
        CaseTag::OneA | CaseTag::OneB => {
            // S = [[1, 0], [0, x + i y]], T = i S
            let shape = s.get(0, 0).is_one()
                && s.get(0, 1).is_zero()
                && t == &s.scale_mat(&i_unit);
            if shape {
                parameters.insert("z".to_string(), s.get(1, 1).clone());
            }
            shape
        }
        CaseTag::TwoA => {
            // S = [[1, z], [z, i u]], T = [[0, 0], [0, 1]]
            let shape = s.get(0, 0).is_one()
                && t.get(0, 0).is_zero()
                && t.get(0, 1).is_zero()
                && t.get(1, 1).is_one();
            if shape {
                parameters.insert("z".to_string(), s.get(0, 1).clone());
                parameters.insert("iu".to_string(), s.get(1, 1).clone());
            }
            shape
        }
        CaseTag::TwoB => {
            // S = [[0, 1], [1, i x]], T = [[0, i], [i, y - x]]
            let shape = s.get(0, 0).is_zero()
                && s.get(0, 1).is_one()
                && t.get(0, 0).is_zero()
                && t.get(0, 1) == &i_unit;
            if shape {
                parameters.insert("ix".to_string(), s.get(1, 1).clone());
                parameters.insert("y_minus_x".to_string(), t.get(1, 1).clone());
            }
            shape
        }
        CaseTag::TwoC => {
            // S = diag(1, i y), T = diag(i, p - y)
            let shape = s.get(0, 0).is_one()
                && s.get(0, 1).is_zero()
                && t.get(0, 1).is_zero()
                && t.get(0, 0) == &i_unit;
            if shape {
                parameters.insert("iy".to_string(), s.get(1, 1).clone());
                parameters.insert("p_minus_y".to_string(), t.get(1, 1).clone());
            }
            shape
        }
        CaseTag::TwoD => {
            // S = [[1, u], [u, x + i y]], T = [[i, i u], [i u, p - y + i x]]
            let shape = s.get(0, 0).is_one()
                && t.get(0, 0) == &i_unit
                && t.get(0, 1) == &s.get(0, 1).mul(&i_unit);
            if shape {
                parameters.insert("u".to_string(), s.get(0, 1).clone());
            }
            shape
        }
    };
    CaseLabel {
        tag,
        normalized: matches.then(|| (s.clone(), t.clone())),
        parameters,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    #[test]
    fn maximal_a_anticommutes_with_j() {
        let qa = maximal_basis(MaximalKind::A);
        assert_eq!(qa.dim(), 6);
        let j = j_matrix();
        for s in &qa.basis {
            assert!(anticommutes(s, &j));
        }
    }

    #[test]
    fn maximal_b_reflection_structure() {
        let qb = maximal_basis(MaximalKind::B);
        assert_eq!(qb.dim(), 5);
        let r = r_matrix();
        for s in &qb.basis[..4] {
            assert!(anticommutes(s, &r), "m = 0 elements anticommute with R");
        }
        assert_eq!(qb.basis[4], r);
    }

    #[test]
    fn maximal_c_at_zero_parameters() {
        let zero = Scalar::zero();
        let qc = c_basis_with(&zero, &zero, &zero);
        assert_eq!(qc.dim(), 3);
        // each basis matrix has rank <= 2 and they share no kernel vector
        for s in &qc.basis {
            assert!(s.rank() <= 2);
        }
        let stacked: Mat<Scalar> = Mat::from_fn(12, 4, |i, j| {
            qc.basis[i / 4].get(i % 4, j).clone()
        });
        assert!(stacked.nullspace().is_empty());
    }

    #[test]
    fn austere_tests_on_the_maximal_spaces() {
        assert!(is_austere(&maximal_basis(MaximalKind::A)).austere);
        assert!(is_austere(&maximal_basis(MaximalKind::B)).austere);
        assert!(is_austere(&maximal_basis(MaximalKind::C)).austere);
    }

    #[test]
    fn identity_span_is_not_austere() {
        let id: SMat = Mat::identity(4);
        let sp = SymSpace::new(4, vec![id], vec![]).unwrap();
        let cert = is_austere(&sp);
        assert!(!cert.austere);
        assert_eq!(cert.failing_degree, Some(1));
    }

    #[test]
    fn free_third_parameter_fails_with_relation_certificate() {
        let l1 = Scalar::var("l1");
        let l2 = Scalar::var("l2");
        let l3 = Scalar::var("l3");
        let qc = c_basis_with(&l1, &l2, &l3);
        let cert = is_austere(&qc);
        assert!(!cert.austere);
        let poly = cert.certificate.unwrap();
        let rel = lambda_relation();
        // certificate is divisible by the cubic relation
        assert!(
            poly.exact_div(&rel).is_some(),
            "certificate {poly} not divisible by {rel}"
        );
    }

    #[test]
    fn prolongation_dimensions() {
        assert_eq!(prolongation(&maximal_basis(MaximalKind::B)).dimension, 0);
        assert_eq!(prolongation(&maximal_basis(MaximalKind::C)).dimension, 0);
        let pa = prolongation(&maximal_basis(MaximalKind::A));
        assert_eq!(pa.dimension, 8);
        // basis members are fully symmetric
        for t in &pa.basis {
            for i in 0..4 {
                for j in 0..4 {
                    for k in 0..4 {
                        assert_eq!(t.get(i, j, k), t.get(j, i, k));
                        assert_eq!(t.get(i, j, k), t.get(i, k, j));
                    }
                }
            }
        }
        // full S^2 V*: dimension of S^3 R^4 = 20
        let mut full = Vec::new();
        for i in 0..4 {
            for j in i..4 {
                let mut m: SMat = Mat::zero(4, 4);
                m.set(i, j, Scalar::one());
                m.set(j, i, Scalar::one());
                full.push(m);
            }
        }
        let sp = SymSpace::new(4, full, vec![]).unwrap();
        assert_eq!(prolongation(&sp).dimension, 20);
    }

    #[test]
    fn prolongation_invariant_under_basis_change() {
        let qa = maximal_basis(MaximalKind::A);
        // mix the basis by the invertible circulant I + 2P
        let mixed: Vec<SMat> = (0..6)
            .map(|k| {
                qa.basis[k].add_mat(&qa.basis[(k + 1) % 6].scale_mat(&Scalar::from_int(2)))
            })
            .collect();
        let sp = SymSpace::new(4, mixed, vec![]).unwrap();
        assert_eq!(prolongation(&sp).dimension, 8);
    }

    #[test]
    fn kmap_nullspace_cases() {
        // zero space: entire domain
        let empty = SymSpace {
            n: 4,
            basis: vec![],
            params: vec![],
            coords: None,
        };
        assert_eq!(k_map_nullspace(&empty).dimension, 8);
        // full A-type space: zero
        assert_eq!(k_map_nullspace(&maximal_basis(MaximalKind::A)).dimension, 0);
        // the exceptional 2-dimensional family: positive
        let x = Scalar::var("x");
        let sx = s_x_matrix(&x);
        let jt = j_tilde_matrix();
        let jts = {
            let prod = jt.mul(&sx);
            // symmetrize check: J~ S_x is symmetric already
            assert!(is_symmetric(&prod));
            prod
        };
        let qx = SymSpace::new(4, vec![sx, jts], vec!["x".into()]).unwrap();
        assert!(k_map_nullspace(&qx).dimension > 0);
    }

    #[test]
    fn rho_bar_examples_and_equivariance() {
        let qa = maximal_basis(MaximalKind::A);
        let v = rho_bar(&qa.basis[0]).unwrap();
        assert!(v.get(0, 0).is_one());
        assert!(v.get(0, 1).is_zero());
        assert!(v.get(1, 1).is_zero());

        let zero: SMat = Mat::zero(4, 4);
        let vz = rho_bar(&zero).unwrap();
        assert!((0..2).all(|i| (0..2).all(|j| vz.get(i, j).is_zero())));

        // equivariance on seeded random pairs
        let mut rng = SplitMix64::new(42);
        for _ in 0..25 {
            let s = random_a_type(&mut rng);
            let m = random_u2_real(&mut rng);
            let lhs = rho_bar(&m.mul(&s).mul(&m.transpose())).unwrap();
            let rho_m = rho(&m).unwrap();
            let rhs = rho_m.mul(&rho_bar(&s).unwrap()).mul(&rho_m.transpose());
            assert_eq!(lhs, rhs);
        }
    }

    pub(super) fn random_a_type(rng: &mut SplitMix64) -> SMat {
        let qa = maximal_basis(MaximalKind::A);
        let mut acc: SMat = Mat::zero(4, 4);
        for s in &qa.basis {
            let (n, d) = rng.small_ratio();
            acc = acc.add_mat(&s.scale_mat(&Scalar::from_ratio(n, d)));
        }
        acc
    }

    /// Random rational element of SO(4) commuting with J, via the Cayley
    /// transform of a J-commuting skew matrix. Such skew matrices are
    /// [[P, Q], [-Q, P]] with P skew and Q symmetric.
    pub(super) fn random_u2_real(rng: &mut SplitMix64) -> SMat {
        let b1 = mat_from_i64(&[[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]]);
        let b2 = j_matrix();
        let b3 = mat_from_i64(&[[0, 0, 1, 0], [0, 0, 0, -1], [-1, 0, 0, 0], [0, 1, 0, 0]]);
        let b4 = mat_from_i64(&[[0, 0, 0, 1], [0, 0, 1, 0], [0, -1, 0, 0], [-1, 0, 0, 0]]);
        let mut a: SMat = Mat::zero(4, 4);
        for b in [b1, b2, b3, b4] {
            let (n, d) = rng.small_ratio();
            a = a.add_mat(&b.scale_mat(&Scalar::from_ratio(n, d * 4)));
        }
        let id: SMat = Mat::identity(4);
        let m = id.sub_mat(&a).inverse().expect("generic Cayley");
        id.add_mat(&a).mul(&m)
    }

    #[test]
    fn cayley_matrices_are_special_orthogonal_and_j_commuting() {
        let mut rng = SplitMix64::new(7);
        let j = j_matrix();
        for _ in 0..10 {
            let m = random_u2_real(&mut rng);
            let id: SMat = Mat::identity(4);
            assert_eq!(m.transpose().mul(&m), id);
            assert_eq!(m.mul(&j), j.mul(&m));
        }
    }

    fn c(re: i64, im: i64) -> Scalar {
        Scalar::from_int(re).add(&Scalar::i().scale_by_int(im))
    }

    fn mat2(a: Scalar, b: Scalar, d: Scalar) -> SMat {
        let mut m: SMat = Mat::zero(2, 2);
        m.set(0, 0, a);
        m.set(0, 1, b.clone());
        m.set(1, 0, b);
        m.set(1, 1, d);
        m
    }

    #[test]
    fn classify_displayed_representatives() {
        // 1.a: S = diag(1, x + i y) with symbolic nonzero entry, T = i S
        let z = Scalar::var("x").add(&Scalar::i().mul(&Scalar::var("y")));
        let s = mat2(Scalar::one(), Scalar::zero(), z);
        let t = s.scale_mat(&Scalar::i());
        let got = classify_pair(&ComplexSymPair::new(s, t).unwrap()).unwrap();
        match got {
            Classification::Classified(l) => {
                assert_eq!(l.tag, CaseTag::OneA);
                assert!(l.normalized.is_some());
            }
            _ => panic!("expected classification"),
        }

        // 1.b: x = y = 0
        let s = mat2(Scalar::one(), Scalar::zero(), Scalar::zero());
        let t = s.scale_mat(&Scalar::i());
        match classify_pair(&ComplexSymPair::new(s, t).unwrap()).unwrap() {
            Classification::Classified(l) => assert_eq!(l.tag, CaseTag::OneB),
            _ => panic!(),
        }

        // 2.a with u = x = y = 0
        let s = mat2(Scalar::one(), Scalar::zero(), Scalar::zero());
        let t = mat2(Scalar::zero(), Scalar::zero(), Scalar::one());
        match classify_pair(&ComplexSymPair::new(s, t).unwrap()).unwrap() {
            Classification::Classified(l) => assert_eq!(l.tag, CaseTag::TwoA),
            _ => panic!(),
        }

        // 2.b with x = y = 1
        let s = mat2(Scalar::zero(), Scalar::one(), c(0, 1));
        let t = mat2(Scalar::zero(), c(0, 1), Scalar::zero());
        match classify_pair(&ComplexSymPair::new(s, t).unwrap()).unwrap() {
            Classification::Classified(l) => {
                assert_eq!(l.tag, CaseTag::TwoB);
                assert!(l.normalized.is_some());
            }
            _ => panic!(),
        }

        // 2.c with y = 1, p = 3
        let s = mat2(Scalar::one(), Scalar::zero(), c(0, 1));
        let t = mat2(c(0, 1), Scalar::zero(), c(2, 0));
        match classify_pair(&ComplexSymPair::new(s, t).unwrap()).unwrap() {
            Classification::Classified(l) => assert_eq!(l.tag, CaseTag::TwoC),
            _ => panic!(),
        }

        // 2.d with u = 1, x = 1, y = 1, p = 2
        let s = mat2(Scalar::one(), Scalar::one(), c(1, 1));
        let t = mat2(c(0, 1), c(0, 1), c(1, 1));
        match classify_pair(&ComplexSymPair::new(s, t).unwrap()).unwrap() {
            Classification::Classified(l) => assert_eq!(l.tag, CaseTag::TwoD),
            _ => panic!(),
        }
    }

    #[test]
    fn classify_rejects_degenerate_spans() {
        let s = mat2(Scalar::one(), Scalar::zero(), Scalar::zero());
        let t = s.scale_mat(&Scalar::from_int(2));
        assert!(matches!(
            classify_pair(&ComplexSymPair::new(s, t).unwrap()),
            Err(AustereError::DegenerateSpan)
        ));
    }

    #[test]
    fn classification_invariant_under_unitary_action() {
        let mut rng = SplitMix64::new(99);
        // 2.b representative at x = y = 1
        let s0 = mat2(Scalar::zero(), Scalar::one(), c(0, 1));
        let t0 = mat2(Scalar::zero(), c(0, 1), Scalar::zero());
        for _ in 0..10 {
            let m = random_u2_real(&mut rng);
            let u = rho(&m).unwrap();
            let s = u.mul(&s0).mul(&u.transpose());
            let t = u.mul(&t0).mul(&u.transpose());
            // also mix the real basis
            let (a, b) = (rng.i64_in(-3, 3), rng.i64_in(1, 3));
            let s2 = s.scale_mat(&Scalar::from_int(b)).add_mat(&t.scale_mat(&Scalar::from_int(a)));
            match classify_pair(&ComplexSymPair::new(s2, t).unwrap()).unwrap() {
                Classification::Classified(l) => assert_eq!(l.tag, CaseTag::TwoB),
                _ => panic!("unitary action changed the class"),
            }
        }
    }

    #[test]
    fn kprop2_restriction_is_singular_on_the_exceptional_family() {
        // restriction of the commutator map of J~ S_x to ker K(S_x) is
        // singular, symbolically in x
        let x = Scalar::var("x");
        let sx = s_x_matrix(&x);
        let jts = j_tilde_matrix().mul(&sx);
        let ker = k_map(&sx).nullspace();
        assert_eq!(ker.len(), 4);
        let ks = k_map(&jts);
        // 4x4 matrix: K(J~S_x) applied to the kernel basis
        let restricted: Mat<Scalar> = Mat::from_fn(4, 4, |i, j| {
            let mut acc = Scalar::zero();
            for k in 0..8 {
                acc = acc.add(&ks.get(i, k).mul(&ker[j][k]));
            }
            acc
        });
        assert!(restricted.rank() < 4);
    }
}
