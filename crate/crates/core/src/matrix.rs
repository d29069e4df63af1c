use crate::field::Field;
use crate::poly::MPoly;
use crate::ratfun::RationalFunction;
use std::collections::BTreeMap;
use std::fmt;

/// Dense matrix over a coefficient field.
#[derive(Clone, PartialEq)]
pub struct Mat<F: Field> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

/// The matrix type most of the engine works with: entries are rational
/// functions of the model's scalars and parameters.
pub type ExactMatrix = Mat<RationalFunction>;

#[derive(Debug, thiserror::Error)]
pub enum MatrixError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("minor budget exceeded: {candidates} minors requested, budget {budget}")]
    MinorBudget { candidates: u128, budget: u128 },
}

impl<F: Field> Mat<F> {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![F::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.set(i, i, F::one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<F>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        Mat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &F {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: F) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Mat::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in mul");
        Mat::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = F::zero();
            for k in 0..self.cols {
                acc = acc.add(&self.get(i, k).mul(other.get(k, j)));
            }
            acc
        })
    }

    pub fn mul_vec(&self, v: &[F]) -> Vec<F> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = F::zero();
                for k in 0..self.cols {
                    acc = acc.add(&self.get(i, k).mul(&v[k]));
                }
                acc
            })
            .collect()
    }

    fn to_sparse_rows(&self) -> Vec<BTreeMap<usize, F>> {
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| !v.is_zero())
                    .map(|(j, v)| (j, v.clone()))
                    .collect()
            })
            .collect()
    }

    /// Rank over the fraction field, by sparse Gaussian elimination with a
    /// fill-reducing pivot heuristic.
    pub fn rank(&self) -> usize {
        sparse_eliminate(self.to_sparse_rows(), self.cols).pivots.len()
    }

    /// Basis of the right kernel.
    pub fn nullspace(&self) -> Vec<Vec<F>> {
        let e = sparse_eliminate(self.to_sparse_rows(), self.cols);
        e.kernel(self.cols)
    }

    /// Inverse of a square matrix, `None` when singular.
    pub fn inverse(&self) -> Option<Self> {
        assert_eq!(self.rows, self.cols, "inverse of a non-square matrix");
        let n = self.rows;
        let mut rows = self.to_sparse_rows();
        for (i, row) in rows.iter_mut().enumerate() {
            row.insert(n + i, F::one());
        }
        let e = sparse_eliminate(rows, n);
        if e.pivots.len() < n {
            return None;
        }
        let mut out = Self::zero(n, n);
        for (k, &pc) in e.pivots.iter().enumerate() {
            let r = e.row_of_pivot[k];
            for (&c, v) in &e.rows[r] {
                if c >= n {
                    out.set(pc, c - n, v.clone());
                }
            }
        }
        Some(out)
    }

    /// Solves `self * x = rhs` over the fraction field, exposing the
    /// generic-rank particular solution, kernel basis and any inconsistency
    /// residues (nonzero right-hand sides left over after elimination).
    pub fn solve_affine(&self, rhs: &[F]) -> AffineSolution<F> {
        assert_eq!(rhs.len(), self.rows);
        let n = self.cols;
        let mut rows = self.to_sparse_rows();
        for (i, r) in rhs.iter().enumerate() {
            if !r.is_zero() {
                rows[i].insert(n, r.clone());
            }
        }
        // forbid pivoting on the rhs column by eliminating only cols < n
        let e = sparse_eliminate(rows, n);
        let mut residues = Vec::new();
        for row in &e.rows {
            if row.keys().all(|&c| c >= n) {
                if let Some(v) = row.get(&n) {
                    residues.push(v.clone());
                }
            }
        }
        let mut particular = vec![F::zero(); n];
        for (r, &pc) in e.row_of_pivot.iter().zip(e.pivots.iter()) {
            // row is normalized: x_pc + sum(free) = rhs  =>  x_pc = rhs part
            if let Some(v) = e.rows[*r].get(&n) {
                particular[pc] = v.clone();
            }
        }
        AffineSolution {
            particular,
            kernel: e.kernel(n),
            residues,
        }
    }
}

/// Outcome of an affine solve over the fraction field. When `residues` is
/// nonempty the system is generically inconsistent and the residues are the
/// obstruction values; `particular`/`kernel` then describe the solution on
/// the locus where all residues vanish (generic fibers only).
#[derive(Clone, Debug)]
pub struct AffineSolution<F> {
    pub particular: Vec<F>,
    pub kernel: Vec<Vec<F>>,
    pub residues: Vec<F>,
}

impl<F: Field> AffineSolution<F> {
    pub fn is_consistent(&self) -> bool {
        self.residues.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.kernel.len()
    }
}

struct Eliminated<F> {
    rows: Vec<BTreeMap<usize, F>>,
    pivots: Vec<usize>,
    row_of_pivot: Vec<usize>,
}

impl<F: Field> Eliminated<F> {
    /// Kernel basis for the unknown columns `0..n`.
    fn kernel(&self, n: usize) -> Vec<Vec<F>> {
        let pivot_of_col: BTreeMap<usize, usize> = self
            .pivots
            .iter()
            .enumerate()
            .map(|(k, &c)| (c, self.row_of_pivot[k]))
            .collect();
        let mut basis = Vec::new();
        for free in 0..n {
            if pivot_of_col.contains_key(&free) {
                continue;
            }
            let mut v = vec![F::zero(); n];
            v[free] = F::one();
            for (&pc, &r) in &pivot_of_col {
                if let Some(c) = self.rows[r].get(&free) {
                    v[pc] = c.neg();
                }
            }
            basis.push(v);
        }
        basis
    }
}

/// Reduced row echelon form on sparse rows, eliminating only columns `< ncols`.
/// Pivot choice: minimal (row fill) * (entry complexity), deterministic.
fn sparse_eliminate<F: Field>(
    mut rows: Vec<BTreeMap<usize, F>>,
    ncols: usize,
) -> Eliminated<F> {
    let debug = std::env::var("EDS_DEBUG_ELIM").is_ok();
    let mut pivots: Vec<usize> = Vec::new();
    let mut row_of_pivot: Vec<usize> = Vec::new();
    let mut used_rows: Vec<bool> = vec![false; rows.len()];
    loop {
        if debug {
            let nnz: usize = rows.iter().map(|r| r.len()).sum();
            let worst: usize = rows
                .iter()
                .flat_map(|r| r.values().map(|v| v.complexity()))
                .max()
                .unwrap_or(0);
            eprintln!(
                "elim step {} @{:?}: nnz = {nnz}, worst entry complexity = {worst}",
                pivots.len(),
                std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .unwrap()
            );
        }
        // choose the next pivot among unused rows and uneliminated columns
        let mut best: Option<(usize, usize, usize)> = None; // (score, row, col)
        for (i, row) in rows.iter().enumerate() {
            if used_rows[i] {
                continue;
            }
            for (&c, v) in row.iter() {
                if c >= ncols || pivots.contains(&c) {
                    continue;
                }
                // constants make the cheapest pivots by far: dividing by a
                // parameter-laden entry spreads denominators everywhere
                let score = v.complexity().min(4096) * 4096 + row.len().min(4095);
                match best {
                    None => best = Some((score, i, c)),
                    Some((s, _, _)) if score < s => best = Some((score, i, c)),
                    _ => {}
                }
            }
        }
        let Some((_, pr, pc)) = best else {
            break;
        };
        // normalize pivot row
        let inv = rows[pr].get(&pc).unwrap().inv().expect("pivot nonzero");
        if !inv.is_one() {
            let row = rows[pr].clone();
            rows[pr] = row.into_iter().map(|(c, v)| (c, v.mul(&inv))).collect();
        }
        let prow = rows[pr].clone();
        for i in 0..rows.len() {
            if i == pr {
                continue;
            }
            let Some(factor) = rows[i].get(&pc).cloned() else {
                continue;
            };
            let mut out = rows[i].clone();
            for (&c, v) in &prow {
                let delta = v.mul(&factor);
                match out.entry(c) {
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
            rows[i] = out;
        }
        used_rows[pr] = true;
        pivots.push(pc);
        row_of_pivot.push(pr);
    }
    Eliminated {
        rows,
        pivots,
        row_of_pivot,
    }
}

// ---------------------------------------------------------------------------
// fraction-free (Bareiss) elimination over polynomial entries
// ---------------------------------------------------------------------------

/// Rank by fraction-free Bareiss elimination on polynomial entries.
/// Intermediate entries are minors of the input, and every division is exact.
pub fn rank_bareiss<F: Field>(rows_in: &[Vec<MPoly<F>>]) -> usize {
    let mut a: Vec<Vec<MPoly<F>>> = rows_in.to_vec();
    let nrows = a.len();
    if nrows == 0 {
        return 0;
    }
    let ncols = a[0].len();
    let mut prev = MPoly::<F>::one();
    let mut rank = 0usize;
    let mut r = 0usize;
    for c in 0..ncols {
        if r >= nrows {
            break;
        }
        // pivot search: smallest term count
        let mut piv: Option<usize> = None;
        for i in r..nrows {
            if !a[i][c].is_zero() {
                match piv {
                    None => piv = Some(i),
                    Some(p) if a[i][c].term_count() < a[p][c].term_count() => piv = Some(i),
                    _ => {}
                }
            }
        }
        let Some(p) = piv else {
            continue;
        };
        a.swap(r, p);
        for i in (r + 1)..nrows {
            for j in (c + 1)..ncols {
                let num = a[i][j].mul(&a[r][c]).sub(&a[i][c].mul(&a[r][j]));
                a[i][j] = num
                    .exact_div(&prev)
                    .expect("Bareiss division is exact");
            }
            a[i][c] = MPoly::zero();
        }
        prev = a[r][c].clone();
        rank += 1;
        r += 1;
    }
    rank
}

/// Determinant by fraction-free Bareiss; entries polynomial.
pub fn det_bareiss<F: Field>(rows_in: &[Vec<MPoly<F>>]) -> MPoly<F> {
    let n = rows_in.len();
    if n == 0 {
        return MPoly::one();
    }
    assert!(rows_in.iter().all(|r| r.len() == n), "square matrix required");
    let mut a = rows_in.to_vec();
    let mut prev = MPoly::<F>::one();
    let mut sign = false;
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else {
                return MPoly::zero();
            };
            a.swap(k, p);
            sign = !sign;
        }
        for i in (k + 1)..n {
            for j in (k + 1)..n {
                let num = a[i][j].mul(&a[k][k]).sub(&a[i][k].mul(&a[k][j]));
                a[i][j] = num.exact_div(&prev).expect("Bareiss division is exact");
            }
            a[i][k] = MPoly::zero();
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if sign {
        d.neg()
    } else {
        d
    }
}

impl ExactMatrix {
    /// Clears denominators row by row, yielding polynomial rows with the same
    /// row space.
    pub fn cleared_rows(&self) -> Vec<Vec<crate::poly::Polynomial>> {
        (0..self.rows)
            .map(|i| {
                let mut lcm = crate::poly::Polynomial::one();
                for v in self.row(i) {
                    let d = v.denominator();
                    let g = lcm.gcd(d);
                    lcm = lcm.mul(&d.exact_div(&g).expect("gcd divides"));
                }
                self.row(i)
                    .iter()
                    .map(|v| {
                        v.numerator()
                            .mul(&lcm.exact_div(v.denominator()).expect("lcm divisible"))
                    })
                    .collect()
            })
            .collect()
    }

    /// Rank over the fraction field of the parameter ring, i.e. rank at
    /// Zariski-generic parameter values, by fraction-free elimination.
    pub fn rank_generic(&self) -> usize {
        rank_bareiss(&self.cleared_rows())
    }

    /// Generators (all k-by-k minors) of the determinantal ideal, after
    /// clearing denominators. Fails when the number of minors exceeds the
    /// budget.
    pub fn minors_ideal(
        &self,
        k: usize,
        budget: u128,
    ) -> Result<Vec<crate::poly::Polynomial>, MatrixError> {
        if k > self.rows.min(self.cols) {
            return Err(MatrixError::Dimension(format!(
                "k = {k} exceeds min(rows, cols) = {}",
                self.rows.min(self.cols)
            )));
        }
        let candidates = binomial(self.rows, k) * binomial(self.cols, k);
        if candidates > budget {
            return Err(MatrixError::MinorBudget { candidates, budget });
        }
        let cleared = self.cleared_rows();
        let mut out = Vec::new();
        for rsel in combinations(self.rows, k) {
            for csel in combinations(self.cols, k) {
                let sub: Vec<Vec<crate::poly::Polynomial>> = rsel
                    .iter()
                    .map(|&i| csel.iter().map(|&j| cleared[i][j].clone()).collect())
                    .collect();
                let d = det_bareiss(&sub);
                if !d.is_zero() {
                    out.push(d);
                }
            }
        }
        out.sort_by(|a, b| a.to_string().cmp(&b.to_string()));
        out.dedup();
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// sparse fraction-free elimination for rational-function matrices
// ---------------------------------------------------------------------------

use crate::gaussian::GaussianRational;
use crate::poly::Polynomial;

struct FfEchelon {
    rows: Vec<BTreeMap<usize, Polynomial>>,
    /// (pivot column, row index) in elimination order.
    pivots: Vec<(usize, usize)>,
}

/// Sparse Bareiss elimination over polynomial rows: the two-term update
/// divides by the previous pivot, which is exact (entries stay minors of
/// the input), so no rational-function gcds ever run. Only columns below
/// `ncols` are eliminated.
fn ff_eliminate(mut rows: Vec<BTreeMap<usize, Polynomial>>, ncols: usize) -> FfEchelon {
    let debug = std::env::var("EDS_DEBUG_ELIM").is_ok();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut active: Vec<bool> = rows.iter().map(|r| !r.is_empty()).collect();
    let mut prev: Polynomial = Polynomial::one();
    loop {
        if debug {
            let nnz: usize = rows.iter().map(|r| r.len()).sum();
            let worst: usize = rows
                .iter()
                .flat_map(|r| r.values().map(|v| v.term_count() + v.total_degree() as usize))
                .max()
                .unwrap_or(0);
            eprintln!("ff step {}: nnz = {nnz}, worst = {worst}", pivots.len());
        }
        // pivot: cheapest polynomial entry, then shortest row
        let mut best: Option<(usize, usize, usize)> = None;
        for (i, row) in rows.iter().enumerate() {
            if !active[i] {
                continue;
            }
            for (&c, v) in row.iter() {
                if c >= ncols {
                    continue;
                }
                let cplx = if v.is_constant() {
                    0
                } else {
                    v.term_count() + v.total_degree() as usize
                };
                let score = cplx * 4096 + row.len().min(4095);
                match best {
                    None => best = Some((score, i, c)),
                    Some((s, _, _)) if score < s => best = Some((score, i, c)),
                    _ => {}
                }
            }
        }
        let Some((_, pr, pc)) = best else { break };
        let piv = rows[pr].get(&pc).unwrap().clone();
        let prow = rows[pr].clone();
        for i in 0..rows.len() {
            if i == pr || !active[i] {
                continue;
            }
            let factor = rows[i].get(&pc).cloned();
            let mut out: BTreeMap<usize, Polynomial> = BTreeMap::new();
            match factor {
                None => {
                    // a_ij := a_ij * piv / prev
                    for (&c, v) in &rows[i] {
                        let num = v.mul(&piv);
                        let q = num.exact_div(&prev).expect("Bareiss division exact");
                        if !q.is_zero() {
                            out.insert(c, q);
                        }
                    }
                }
                Some(f) => {
                    // a_ij := (a_ij * piv - a_ipc * a_prj) / prev
                    let mut support: Vec<usize> = rows[i].keys().copied().collect();
                    for c in prow.keys() {
                        if !rows[i].contains_key(c) {
                            support.push(*c);
                        }
                    }
                    for c in support {
                        if c == pc {
                            continue;
                        }
                        let lhs = rows[i]
                            .get(&c)
                            .map(|v| v.mul(&piv))
                            .unwrap_or_else(Polynomial::zero);
                        let rhs = prow
                            .get(&c)
                            .map(|v| v.mul(&f))
                            .unwrap_or_else(Polynomial::zero);
                        let num = lhs.sub(&rhs);
                        if num.is_zero() {
                            continue;
                        }
                        let q = num.exact_div(&prev).expect("Bareiss division exact");
                        if !q.is_zero() {
                            out.insert(c, q);
                        }
                    }
                }
            }
            rows[i] = out;
        }
        active[pr] = false;
        pivots.push((pc, pr));
        prev = piv;
    }
    FfEchelon { rows, pivots }
}

impl ExactMatrix {
    fn cleared_sparse_rows(&self, rhs: Option<&[RationalFunction]>) -> Vec<BTreeMap<usize, Polynomial>> {
        let n = self.cols;
        (0..self.rows)
            .map(|i| {
                let mut entries: Vec<(usize, &RationalFunction)> = self
                    .row(i)
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| !v.is_zero())
                    .collect();
                let rhs_v = rhs.map(|r| &r[i]);
                if let Some(v) = rhs_v {
                    if !v.is_zero() {
                        entries.push((n, v));
                    }
                }
                let mut lcm = Polynomial::one();
                for (_, v) in &entries {
                    let d = v.denominator();
                    let g = lcm.gcd(d);
                    lcm = lcm.mul(&d.exact_div(&g).expect("gcd divides"));
                }
                entries
                    .into_iter()
                    .map(|(c, v)| {
                        (
                            c,
                            v.numerator()
                                .mul(&lcm.exact_div(v.denominator()).expect("lcm divisible")),
                        )
                    })
                    .collect()
            })
            .collect()
    }

    /// Rank over the fraction field via the sparse reduced elimination on
    /// denominator-cleared rows.
    pub fn ff_rank(&self) -> usize {
        let rows = self.cleared_sparse_rows(None);
        let rat: Vec<BTreeMap<usize, RationalFunction>> = rows
            .into_iter()
            .map(|r| {
                r.into_iter()
                    .map(|(c, p)| (c, RationalFunction::from_poly(p)))
                    .collect()
            })
            .collect();
        sparse_eliminate(rat, self.cols).pivots.len()
    }

    /// Right-kernel basis over the fraction field.
    pub fn ff_nullspace(&self) -> Vec<Vec<RationalFunction>> {
        let rows = self.cleared_sparse_rows(None);
        let rat: Vec<BTreeMap<usize, RationalFunction>> = rows
            .into_iter()
            .map(|r| {
                r.into_iter()
                    .map(|(c, p)| (c, RationalFunction::from_poly(p)))
                    .collect()
            })
            .collect();
        let e = sparse_eliminate(rat, self.cols);
        e.kernel(self.cols)
    }

    /// Affine solve over the fraction field on denominator-cleared rows.
    pub fn ff_solve_affine(&self, rhs: &[RationalFunction]) -> AffineSolution<RationalFunction> {
        assert_eq!(rhs.len(), self.rows);
        let debug = std::env::var("EDS_DEBUG_ELIM").is_ok();
        let t0 = std::time::Instant::now();
        let n = self.cols;
        let rows = self.cleared_sparse_rows(Some(rhs));
        let rat: Vec<BTreeMap<usize, RationalFunction>> = rows
            .into_iter()
            .map(|r| {
                r.into_iter()
                    .map(|(c, p)| (c, RationalFunction::from_poly(p)))
                    .collect()
            })
            .collect();
        let e = sparse_eliminate(rat, n);
        if debug {
            eprintln!("[solve] eliminated in {:?}", t0.elapsed());
        }
        let mut residues = Vec::new();
        for row in &e.rows {
            if row.keys().all(|&c| c >= n) {
                if let Some(v) = row.get(&n) {
                    residues.push(v.clone());
                }
            }
        }
        let mut particular = vec![RationalFunction::zero(); n];
        if residues.is_empty() {
            for (r, &pc) in e.row_of_pivot.iter().zip(e.pivots.iter()) {
                if let Some(v) = e.rows[*r].get(&n) {
                    particular[pc] = v.clone();
                }
            }
        }
        let kernel = if residues.is_empty() {
            e.kernel(n)
        } else {
            Vec::new()
        };
        if debug {
            eprintln!("[solve] kernel ({}) in {:?}", kernel.len(), t0.elapsed());
        }
        AffineSolution {
            particular,
            kernel,
            residues,
        }
    }
}

/// Kernel basis from the echelon: one vector per free column.
fn ff_kernel(ech: &FfEchelon, n: usize) -> Vec<Vec<RationalFunction>> {
    let pivot_cols: Vec<usize> = ech.pivots.iter().map(|&(c, _)| c).collect();
    let mut basis = Vec::new();
    for free in 0..n {
        if pivot_cols.contains(&free) {
            continue;
        }
        let mut x = vec![RationalFunction::zero(); n + 1];
        x[free] = RationalFunction::one();
        back_fill(ech, n, &mut x);
        basis.push(x[..n].to_vec());
    }
    basis
}

/// Particular solution with all free variables zero: the rhs slot is seeded
/// with -1 so each pivot row picks up its right-hand entry.
fn ff_back_substitute(ech: &FfEchelon, n: usize) -> Vec<RationalFunction> {
    let mut x = vec![RationalFunction::zero(); n + 1];
    x[n] = RationalFunction::from_int(-1);
    back_fill(ech, n, &mut x);
    x[..n].to_vec()
}

/// Solves pivot variables in reverse elimination order; `x` holds values
/// for free columns (and -1 in slot `n` to activate the rhs column).
fn back_fill(ech: &FfEchelon, n: usize, x: &mut [RationalFunction]) {
    for &(pc, pr) in ech.pivots.iter().rev() {
        let row = &ech.rows[pr];
        let mut acc = RationalFunction::zero();
        for (&c, v) in row {
            if c == pc {
                continue;
            }
            let xv = &x[c.min(n)];
            if c > n || xv.is_zero() {
                continue;
            }
            acc = acc.add(&RationalFunction::from_poly(v.clone()).mul(xv));
        }
        let piv = RationalFunction::from_poly(row[&pc].clone());
        x[pc] = acc.neg().div(&piv).expect("pivot nonzero");
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        // advance
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] != i + n - k {
                break;
            }
        }
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

impl<F: Field> fmt::Debug for Mat<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  [")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            writeln!(f, "]")?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::GaussianRational;
    use crate::poly::Polynomial;
    use crate::rng::SplitMix64;

    fn rf(s: &str) -> RationalFunction {
        RationalFunction::parse(s).unwrap()
    }

    fn mat(rows: &[&[&str]]) -> ExactMatrix {
        Mat::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|s| rf(s)).collect())
                .collect(),
        )
    }

    #[test]
    fn identity_has_full_rank_and_trivial_kernel() {
        let m: ExactMatrix = Mat::identity(5);
        assert_eq!(m.rank(), 5);
        assert_eq!(m.rank_generic(), 5);
        assert!(m.nullspace().is_empty());
    }

    #[test]
    fn zero_matrix_kernel_is_everything() {
        let m: ExactMatrix = Mat::zero(2, 3);
        assert_eq!(m.rank_generic(), 0);
        assert_eq!(m.nullspace().len(), 3);
    }

    #[test]
    fn rank_agrees_between_field_and_bareiss_routes() {
        let mut rng = SplitMix64::new(77);
        for _ in 0..25 {
            let r = rng.i64_in(1, 5) as usize;
            let c = rng.i64_in(1, 5) as usize;
            let m: ExactMatrix = Mat::from_fn(r, c, |_, _| {
                if rng.i64_in(0, 2) == 0 {
                    RationalFunction::zero()
                } else {
                    let (n, d) = rng.small_ratio();
                    RationalFunction::from_ratio(n, d)
                        .mul(&rf("x"))
                        .add(&RationalFunction::from_int(rng.i64_in(-2, 2)))
                }
            });
            assert_eq!(m.rank(), m.rank_generic());
            assert_eq!(m.rank(), m.transpose().rank());
            assert_eq!(m.nullspace().len() + m.rank(), m.cols());
        }
    }

    #[test]
    fn rank_invariant_under_row_operations() {
        let mut rng = SplitMix64::new(1234);
        let m = mat(&[
            &["1", "x", "0"],
            &["0", "1", "y"],
            &["1", "x + 1", "y"],
        ]);
        let base = m.rank();
        for _ in 0..10 {
            // random invertible integer row mixing
            let mut t: Mat<RationalFunction> = Mat::identity(3);
            let i = rng.i64_in(0, 2) as usize;
            let mut j = rng.i64_in(0, 2) as usize;
            if i == j {
                j = (j + 1) % 3;
            }
            t.set(i, j, RationalFunction::from_int(rng.i64_in(-3, 3)));
            assert_eq!(t.mul(&m).rank(), base);
        }
    }

    #[test]
    fn kernel_vectors_are_annihilated() {
        let m = mat(&[
            &["1", "2", "3", "0"],
            &["0", "x", "1", "1"],
        ]);
        for v in m.nullspace() {
            let out = m.mul_vec(&v);
            assert!(out.iter().all(|e| e.is_zero()));
        }
        assert_eq!(m.nullspace().len(), 2);
    }

    #[test]
    fn affine_solve_reports_torsion_residues() {
        // x + y = a ; x + y = b  is inconsistent unless a - b = 0
        let m = mat(&[&["1", "1"], &["1", "1"]]);
        let sol = m.solve_affine(&[rf("a"), rf("b")]);
        assert_eq!(sol.residues.len(), 1);
        let r = &sol.residues[0];
        // residue should be proportional to a - b
        let diff = rf("a - b");
        assert!(
            r == &diff || r == &diff.neg() || r.div(&diff).map_or(false, |q| q.is_constant()),
            "unexpected residue {r}"
        );
    }

    #[test]
    fn affine_solve_particular_plus_kernel() {
        let m = mat(&[&["1", "1", "0"], &["0", "1", "1"]]);
        let rhs = [rf("3"), rf("x")];
        let sol = m.solve_affine(&rhs);
        assert!(sol.is_consistent());
        assert_eq!(sol.dimension(), 1);
        let out = m.mul_vec(&sol.particular);
        assert_eq!(out[0], rhs[0]);
        assert_eq!(out[1], rhs[1]);
    }

    #[test]
    fn det_bareiss_matches_cofactor_on_small_random() {
        let mut rng = SplitMix64::new(5);
        for _ in 0..10 {
            let n = 3;
            let rows: Vec<Vec<Polynomial>> = (0..n)
                .map(|_| {
                    (0..n)
                        .map(|_| {
                            Polynomial::constant(GaussianRational::from_int(rng.i64_in(-4, 4)))
                                .add(
                                    &Polynomial::var("x").scale(&GaussianRational::from_int(
                                        rng.i64_in(-2, 2),
                                    )),
                                )
                        })
                        .collect()
                })
                .collect();
            let det = det_bareiss(&rows);
            // cofactor expansion along first row
            let mut cof = Polynomial::zero();
            for j in 0..n {
                let minor: Vec<Vec<Polynomial>> = (1..n)
                    .map(|i| {
                        (0..n)
                            .filter(|&c| c != j)
                            .map(|c| rows[i][c].clone())
                            .collect()
                    })
                    .collect();
                let mut term = rows[0][j].mul(&det_bareiss(&minor));
                if j % 2 == 1 {
                    term = term.neg();
                }
                cof = cof.add(&term);
            }
            assert_eq!(det, cof);
        }
    }

    #[test]
    fn minors_ideal_examples() {
        // 2x2 generic: single minor ad - bc
        let m = mat(&[&["a", "b"], &["c", "d"]]);
        let ms = m.minors_ideal(2, 1000).unwrap();
        assert_eq!(ms.len(), 1);
        assert_eq!(ms[0], Polynomial::parse("a*d - b*c").unwrap());

        // diag(x, y), k = 1: {x, y}
        let d = mat(&[&["x", "0"], &["0", "y"]]);
        let ms1 = d.minors_ideal(1, 1000).unwrap();
        assert_eq!(ms1.len(), 2);

        // budget
        let big: ExactMatrix = Mat::zero(30, 30);
        assert!(matches!(
            big.minors_ideal(15, 10),
            Err(MatrixError::MinorBudget { .. })
        ));
    }
}
