//! Floating-point verification that explicit immersions are austere of the
//! stated type: second fundamental forms from closed-form parametrizations,
//! eigenvalue-symmetry tests, and the J-linearity check for holomorphic
//! charts.
//!
//! Derivatives are closed-form, built alongside each immersion; floating
//! point enters only in evaluation, orthonormalization and the symmetric
//! function evaluations, which keeps a 1e-9 tolerance meaningful.

use crate::rng::SplitMix64;

/// Parametrized submanifold with exact first and second partials.
pub struct Immersion {
    pub domain_dim: usize,
    pub ambient_dim: usize,
    pub name: String,
    value: Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>,
    partial: Box<dyn Fn(&[f64], usize) -> Vec<f64> + Send + Sync>,
    second: Box<dyn Fn(&[f64], usize, usize) -> Vec<f64> + Send + Sync>,
}

#[derive(Debug, thiserror::Error)]
pub enum GeometryError {
    #[error("Jacobian is rank-deficient at the sample point (condition {0:.3e})")]
    RankDeficient(f64),
    #[error("point lies outside the chart")]
    OutsideChart,
}

impl Immersion {
    pub fn value(&self, x: &[f64]) -> Vec<f64> {
        (self.value)(x)
    }

    pub fn partial(&self, x: &[f64], i: usize) -> Vec<f64> {
        (self.partial)(x, i)
    }

    pub fn second(&self, x: &[f64], i: usize, j: usize) -> Vec<f64> {
        (self.second)(x, i, j)
    }
}

/// The screw-motion-invariant submanifold of R^(2n-1):
/// (x0, .., x_{n-1}) -> (x0, x1 cos(l1 x0), x1 sin(l1 x0), ..,
///  xs cos(ls x0), xs sin(ls x0), x_{s+1}, .., x_{n-1}).
pub fn helicoid(lambdas: &[f64], n: usize) -> Immersion {
    let s = lambdas.len();
    assert!(s < n, "need fewer pitches than domain dimensions");
    let ambient = 1 + 2 * s + (n - 1 - s);
    let ls: Vec<f64> = lambdas.to_vec();
    let ls2 = ls.clone();
    let ls3 = ls.clone();
    let val = move |x: &[f64]| -> Vec<f64> {
        let mut out = Vec::with_capacity(ambient);
        out.push(x[0]);
        for (k, &l) in ls.iter().enumerate() {
            let r = x[k + 1];
            out.push(r * (l * x[0]).cos());
            out.push(r * (l * x[0]).sin());
        }
        for k in (s + 1)..n {
            out.push(x[k]);
        }
        out
    };
    // first partials
    let part = move |x: &[f64], i: usize| -> Vec<f64> {
        let mut out = vec![0.0; ambient];
        if i == 0 {
            out[0] = 1.0;
            for (k, &l) in ls2.iter().enumerate() {
                let r = x[k + 1];
                out[1 + 2 * k] = -r * l * (l * x[0]).sin();
                out[2 + 2 * k] = r * l * (l * x[0]).cos();
            }
        } else if i <= s {
            let l = ls2[i - 1];
            out[1 + 2 * (i - 1)] = (l * x[0]).cos();
            out[2 + 2 * (i - 1)] = (l * x[0]).sin();
        } else {
            out[2 * s + (i - s)] = 1.0;
        }
        out
    };
    let sec = move |x: &[f64], i: usize, j: usize| -> Vec<f64> {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        let mut out = vec![0.0; ambient];
        if i == 0 && j == 0 {
            for (k, &l) in ls3.iter().enumerate() {
                let r = x[k + 1];
                out[1 + 2 * k] = -r * l * l * (l * x[0]).cos();
                out[2 + 2 * k] = -r * l * l * (l * x[0]).sin();
            }
        } else if i == 0 && j <= s {
            let l = ls3[j - 1];
            out[1 + 2 * (j - 1)] = -l * (l * x[0]).sin();
            out[2 + 2 * (j - 1)] = l * (l * x[0]).cos();
        }
        out
    };
    Immersion {
        domain_dim: n,
        ambient_dim: ambient,
        name: format!("helicoid(s={s})"),
        value: Box::new(val),
        partial: Box::new(part),
        second: Box::new(sec),
    }
}

/// Product-of-projective-lines chart: (v, w) in C^2 viewed as R^4 mapped to
/// the affine chart (w, v, v w, v^2, v^2 w, ..., v^n, v^n w) of the image
/// in complex projective space.
pub fn segre_chart(n: usize) -> Immersion {
    // complex coordinates packed as [re v, im v, re w, im w]
    let ambient_c = 2 * n + 1;
    let ambient = 2 * ambient_c;
    // monomials: w, then v^k, v^k w for k = 1..n
    // entry list: (a, b) meaning v^a w^b
    let mut monos = vec![(0usize, 1usize)];
    for k in 1..=n {
        monos.push((k, 0));
        monos.push((k, 1));
    }
    let monos2 = monos.clone();
    let monos3 = monos.clone();
    let cpow = |re: f64, im: f64, k: usize| -> (f64, f64) {
        let mut ar = 1.0;
        let mut ai = 0.0;
        for _ in 0..k {
            let nr = ar * re - ai * im;
            ai = ar * im + ai * re;
            ar = nr;
        }
        (ar, ai)
    };
    let cmul = |a: (f64, f64), b: (f64, f64)| (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0);
    let eval_m = move |x: &[f64], a: usize, b: usize| -> (f64, f64) {
        let v = (x[0], x[1]);
        let w = (x[2], x[3]);
        let va = cpow(v.0, v.1, a);
        let wb = cpow(w.0, w.1, b);
        cmul(va, wb)
    };
    let em2 = eval_m;
    let em3 = eval_m;
    let val = move |x: &[f64]| -> Vec<f64> {
        let mut out = Vec::with_capacity(ambient);
        for &(a, b) in &monos {
            let (re, im) = eval_m(x, a, b);
            out.push(re);
            out.push(im);
        }
        out
    };
    // complex derivative of v^a w^b wrt v is a v^(a-1) w^b; the real partials
    // follow from holomorphy: d/d(re v) = complex derivative, d/d(im v) = i *
    // complex derivative
    let deriv = move |x: &[f64], a: usize, b: usize, wrt_v: bool, order2: Option<(bool,)>| -> Vec<(f64, f64)> {
        let _ = order2;
        let _ = wrt_v;
        let _ = x;
        let _ = (a, b);
        vec![]
    };
    let _ = deriv;
    let part = move |x: &[f64], i: usize| -> Vec<f64> {
        let mut out = Vec::with_capacity(ambient);
        for &(a, b) in &monos2 {
            // complex partial wrt v or w
            let dc: (f64, f64) = match i {
                0 | 1 => {
                    if a == 0 {
                        (0.0, 0.0)
                    } else {
                        let (re, im) = em2(x, a - 1, b);
                        (a as f64 * re, a as f64 * im)
                    }
                }
                _ => {
                    if b == 0 {
                        (0.0, 0.0)
                    } else {
                        let (re, im) = em2(x, a, b - 1);
                        (b as f64 * re, b as f64 * im)
                    }
                }
            };
            // multiply by i for imaginary-direction partials
            let dc = if i == 1 || i == 3 { (-dc.1, dc.0) } else { dc };
            out.push(dc.0);
            out.push(dc.1);
        }
        out
    };
    let sec = move |x: &[f64], i: usize, j: usize| -> Vec<f64> {
        let mut out = Vec::with_capacity(ambient);
        let var = |k: usize| k / 2; // 0: v, 1: w
        let imag = |k: usize| k % 2 == 1;
        for &(a, b) in &monos3 {
            // complex second derivative
            let (mut da, mut db) = (a, b);
            let mut coef = 1.0;
            for &k in &[i, j] {
                if var(k) == 0 {
                    if da == 0 {
                        coef = 0.0;
                    } else {
                        coef *= da as f64;
                        da -= 1;
                    }
                } else if db == 0 {
                    coef = 0.0;
                } else {
                    coef *= db as f64;
                    db -= 1;
                }
            }
            let mut dc = if coef == 0.0 {
                (0.0, 0.0)
            } else {
                let (re, im) = em3(x, da, db);
                (coef * re, coef * im)
            };
            let rotations = [i, j].iter().filter(|&&k| imag(k)).count();
            for _ in 0..rotations {
                dc = (-dc.1, dc.0);
            }
            out.push(dc.0);
            out.push(dc.1);
        }
        out
    };
    Immersion {
        domain_dim: 4,
        ambient_dim: ambient,
        name: format!("segre_chart(n={n})"),
        value: Box::new(val),
        partial: Box::new(part),
        second: Box::new(sec),
    }
}

/// Graph of a quadratic bump: z = x1^2 + x2^2 + x3^2 + x4^2, not austere.
pub fn paraboloid_graph() -> Immersion {
    Immersion {
        domain_dim: 4,
        ambient_dim: 5,
        name: "paraboloid_graph".into(),
        value: Box::new(|x| {
            vec![x[0], x[1], x[2], x[3], x.iter().map(|v| v * v).sum()]
        }),
        partial: Box::new(|x, i| {
            let mut out = vec![0.0; 5];
            out[i] = 1.0;
            out[4] = 2.0 * x[i];
            out
        }),
        second: Box::new(|_x, i, j| {
            let mut out = vec![0.0; 5];
            if i == j {
                out[4] = 2.0;
            }
            out
        }),
    }
}

/// Graph of x1^2 alone inside R^5: one nonzero eigenvalue, not austere.
pub fn cylinder_graph() -> Immersion {
    Immersion {
        domain_dim: 4,
        ambient_dim: 5,
        name: "cylinder_graph".into(),
        value: Box::new(|x| vec![x[0], x[1], x[2], x[3], x[0] * x[0]]),
        partial: Box::new(|x, i| {
            let mut out = vec![0.0; 5];
            out[i] = 1.0;
            if i == 0 {
                out[4] = 2.0 * x[0];
            }
            out
        }),
        second: Box::new(|_x, i, j| {
            let mut out = vec![0.0; 5];
            if i == 0 && j == 0 {
                out[4] = 2.0;
            }
            out
        }),
    }
}

/// Anti-holomorphic graph (z1, z2) -> (z1, z2, conj(z1)^2): breaks the
/// J-linearity of the second fundamental form.
pub fn antiholomorphic_graph() -> Immersion {
    // coordinates [re z1, im z1, re z2, im z2]
    Immersion {
        domain_dim: 4,
        ambient_dim: 6,
        name: "antiholomorphic_graph".into(),
        value: Box::new(|x| {
            let (a, b) = (x[0], x[1]);
            vec![x[0], x[1], x[2], x[3], a * a - b * b, -2.0 * a * b]
        }),
        partial: Box::new(|x, i| {
            let (a, b) = (x[0], x[1]);
            let mut out = vec![0.0; 6];
            out[i] = 1.0;
            match i {
                0 => {
                    out[4] = 2.0 * a;
                    out[5] = -2.0 * b;
                }
                1 => {
                    out[4] = -2.0 * b;
                    out[5] = -2.0 * a;
                }
                _ => {}
            }
            out
        }),
        second: Box::new(|_x, i, j| {
            let mut out = vec![0.0; 6];
            match (i.min(j), i.max(j)) {
                (0, 0) => out[4] = 2.0,
                (1, 1) => out[4] = -2.0,
                (0, 1) => out[5] = -2.0,
                _ => {}
            }
            out
        }),
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Second-fundamental-form data at a point: orthonormal tangent frame,
/// orthonormal normal frame, shape matrices and the normal-rank estimate.
pub struct SecondFundamentalData {
    pub point: Vec<f64>,
    pub tangent_frame: Vec<Vec<f64>>,
    /// change of basis: e_i = sum_k G[k][i] d_k (columns over partials)
    pub tangent_coords: Vec<Vec<f64>>,
    pub normal_frame: Vec<Vec<f64>>,
    pub shape_matrices: Vec<Vec<Vec<f64>>>,
    pub normal_rank: usize,
}

const RANK_TOL: f64 = 1e-7;

/// Orthonormal tangent frame by Gram-Schmidt on the partials, a normal
/// frame by completing and re-orthonormalizing the standard basis, and
/// S^a_ij = nu_a . II(e_i, e_j) from projected second partials.
pub fn second_fundamental_form(
    imm: &Immersion,
    x: &[f64],
) -> Result<SecondFundamentalData, GeometryError> {
    let n = imm.domain_dim;
    let m = imm.ambient_dim;
    let partials: Vec<Vec<f64>> = (0..n).map(|i| imm.partial(x, i)).collect();
    // condition guard on the Gram matrix
    {
        let mut min_d = f64::INFINITY;
        let mut max_d = 0.0f64;
        for p in &partials {
            let d = norm(p);
            min_d = min_d.min(d);
            max_d = max_d.max(d);
        }
        if min_d <= 0.0 || max_d / min_d > 1e6 {
            return Err(GeometryError::RankDeficient(max_d / min_d));
        }
    }
    // Gram-Schmidt with coefficient tracking: e_i = sum G[k][i] partial_k
    let mut frame: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut coords: Vec<Vec<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut v = partials[i].clone();
        let mut coef = vec![0.0; n];
        coef[i] = 1.0;
        for (e, c) in frame.iter().zip(&coords) {
            let proj = dot(&v, e);
            axpy(&mut v, -proj, e);
            for k in 0..n {
                coef[k] -= proj * c[k];
            }
        }
        let nv = norm(&v);
        if nv < 1e-9 {
            return Err(GeometryError::RankDeficient(f64::INFINITY));
        }
        for vi in v.iter_mut() {
            *vi /= nv;
        }
        for ck in coef.iter_mut() {
            *ck /= nv;
        }
        frame.push(v);
        coords.push(coef);
    }
    // normal frame: project the standard basis, keep independent directions
    let mut normals: Vec<Vec<f64>> = Vec::new();
    for k in 0..m {
        if normals.len() == m - n {
            break;
        }
        let mut v = vec![0.0; m];
        v[k] = 1.0;
        for e in frame.iter().chain(normals.iter()) {
            let proj = dot(&v, e);
            axpy(&mut v, -proj, e);
        }
        let nv = norm(&v);
        if nv > 1e-6 {
            for vi in v.iter_mut() {
                *vi /= nv;
            }
            normals.push(v);
        }
    }
    if normals.len() != m - n {
        return Err(GeometryError::RankDeficient(f64::INFINITY));
    }
    // second partials projected: S^a_ij = nu_a . II(e_i, e_j)
    let seconds: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|i| (0..n).map(|j| imm.second(x, i, j)).collect())
        .collect();
    let mut shapes = Vec::with_capacity(normals.len());
    for nu in &normals {
        let mut s = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                // II(e_i, e_j) = sum_{k,l} G[k][i] G[l][j] d2F/dk dl
                let mut acc = 0.0;
                for k in 0..n {
                    if coords[i][k] == 0.0 {
                        continue;
                    }
                    for l in 0..n {
                        if coords[j][l] == 0.0 {
                            continue;
                        }
                        acc += coords[i][k] * coords[j][l] * dot(nu, &seconds[k][l]);
                    }
                }
                s[i][j] = acc;
            }
        }
        shapes.push(s);
    }
    // normal rank: numerical rank of the stacked shape matrices
    let vectors: Vec<Vec<f64>> = shapes
        .iter()
        .map(|s| s.iter().flatten().copied().collect())
        .collect();
    let normal_rank = numeric_rank(&vectors, RANK_TOL);
    Ok(SecondFundamentalData {
        point: x.to_vec(),
        tangent_frame: frame,
        tangent_coords: coords,
        normal_frame: normals,
        shape_matrices: shapes,
        normal_rank,
    })
}

/// Rank by Gram-Schmidt with a relative tolerance.
pub fn numeric_rank(vectors: &[Vec<f64>], tol: f64) -> usize {
    let scale = vectors
        .iter()
        .map(|v| norm(v))
        .fold(0.0f64, f64::max)
        .max(1e-300);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for e in &basis {
            let p = dot(&w, e);
            axpy(&mut w, -p, e);
        }
        let nw = norm(&w);
        if nw > tol * scale {
            for wi in w.iter_mut() {
                *wi /= nw;
            }
            basis.push(w);
        }
    }
    basis.len()
}

/// Worst absolute value of the odd elementary symmetric functions (degrees
/// 1 and 3) over the basis shape matrices, their pairwise sums and seeded
/// random unit combinations.
pub fn austere_residual(data: &SecondFundamentalData, samples: usize, rng: &mut SplitMix64) -> f64 {
    let n = data.shape_matrices.first().map_or(0, |s| s.len());
    let odd = |s: &Vec<Vec<f64>>| -> f64 {
        // e1 = trace; e3 = sum of principal 3x3 minors
        let e1: f64 = (0..n).map(|i| s[i][i]).sum();
        let mut e3 = 0.0;
        for a in 0..n {
            for b in (a + 1)..n {
                for c in (b + 1)..n {
                    let m = [
                        [s[a][a], s[a][b], s[a][c]],
                        [s[b][a], s[b][b], s[b][c]],
                        [s[c][a], s[c][b], s[c][c]],
                    ];
                    e3 += m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
                }
            }
        }
        e1.abs().max(e3.abs())
    };
    let combos = |coeffs: &[f64]| -> Vec<Vec<f64>> {
        let mut s = vec![vec![0.0; n]; n];
        for (c, sm) in coeffs.iter().zip(&data.shape_matrices) {
            for i in 0..n {
                for j in 0..n {
                    s[i][j] += c * sm[i][j];
                }
            }
        }
        s
    };
    let q = data.shape_matrices.len();
    let mut worst = 0.0f64;
    for s in &data.shape_matrices {
        worst = worst.max(odd(s));
    }
    for a in 0..q {
        for b in (a + 1)..q {
            let mut coeffs = vec![0.0; q];
            coeffs[a] = 1.0;
            coeffs[b] = 1.0;
            worst = worst.max(odd(&combos(&coeffs)));
        }
    }
    for _ in 0..samples {
        let mut coeffs: Vec<f64> = (0..q).map(|_| rng.f64_in(-1.0, 1.0)).collect();
        let nc = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt().max(1e-12);
        for c in coeffs.iter_mut() {
            *c /= nc;
        }
        worst = worst.max(odd(&combos(&coeffs)));
    }
    worst
}

pub struct AustereCheck {
    pub passed: bool,
    pub worst_residual: f64,
    pub points: usize,
}

/// Runs the eigenvalue-symmetry test at seeded random points of the domain.
pub fn austere_check(
    imm: &Immersion,
    points: usize,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<AustereCheck, GeometryError> {
    let mut rng = SplitMix64::new(seed);
    let mut worst = 0.0f64;
    let mut used = 0;
    let mut attempts = 0;
    while used < points && attempts < points * 20 {
        attempts += 1;
        let x: Vec<f64> = (0..imm.domain_dim)
            .map(|_| rng.f64_in(0.35, 1.8))
            .collect();
        match second_fundamental_form(imm, &x) {
            Ok(data) => {
                worst = worst.max(austere_residual(&data, samples, &mut rng));
                used += 1;
            }
            // resample ill-conditioned points
            Err(GeometryError::RankDeficient(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(AustereCheck {
        passed: worst <= tol,
        worst_residual: worst,
        points: used,
    })
}

pub struct TypeACheck {
    pub passed: bool,
    pub worst_residual: f64,
}

/// For a holomorphic chart: adapts the tangent frame so the ambient complex
/// structure acts as the standard J (J e1 = e3, J e2 = e4) and verifies
/// S J + J S = 0 for every shape matrix.
pub fn type_a_check(imm: &Immersion, points: usize, tol: f64, seed: u64) -> Result<TypeACheck, GeometryError> {
    assert_eq!(imm.domain_dim, 4);
    assert_eq!(imm.ambient_dim % 2, 0);
    let mut rng = SplitMix64::new(seed);
    // ambient multiplication by i in the packed (re, im) coordinates
    let jmul = |v: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for k in 0..v.len() / 2 {
            out[2 * k] = -v[2 * k + 1];
            out[2 * k + 1] = v[2 * k];
        }
        out
    };
    let mut worst = 0.0f64;
    let mut used = 0;
    let mut attempts = 0;
    while used < points && attempts < points * 20 {
        attempts += 1;
        let x: Vec<f64> = (0..4).map(|_| rng.f64_in(-0.9, 0.9)).collect();
        let partials: Vec<Vec<f64>> = (0..4).map(|i| imm.partial(&x, i)).collect();
        // e1 = unit first partial, e3 = J e1; e2 = unit projection of the
        // third partial, e4 = J e2
        let mut e1 = partials[0].clone();
        let n1 = norm(&e1);
        if n1 < 1e-8 {
            continue;
        }
        for v in e1.iter_mut() {
            *v /= n1;
        }
        let e3 = jmul(&e1);
        let mut e2 = partials[2].clone();
        for e in [&e1, &e3] {
            let p = dot(&e2, e);
            axpy(&mut e2, -p, e);
        }
        let n2 = norm(&e2);
        if n2 < 1e-8 {
            continue;
        }
        for v in e2.iter_mut() {
            *v /= n2;
        }
        let e4 = jmul(&e2);
        let frame = [e1, e2, e3, e4];
        // tangency check: frame vectors must lie in the span of partials
        let mut tan_basis: Vec<Vec<f64>> = Vec::new();
        for p in &partials {
            let mut v = p.clone();
            for e in &tan_basis {
                let pr = dot(&v, e);
                axpy(&mut v, -pr, e);
            }
            let nv = norm(&v);
            if nv > 1e-10 {
                for vi in v.iter_mut() {
                    *vi /= nv;
                }
                tan_basis.push(v);
            }
        }
        if tan_basis.len() != 4 {
            continue;
        }
        let mut chart_ok = true;
        for e in &frame {
            let mut v = e.clone();
            for b in &tan_basis {
                let pr = dot(&v, b);
                axpy(&mut v, -pr, b);
            }
            if norm(&v) > 1e-7 {
                chart_ok = false;
            }
        }
        if !chart_ok {
            // J does not preserve the tangent space: J-linearity residual is
            // reported as the defect of tangency
            worst = worst.max(1.0);
            used += 1;
            continue;
        }
        // normals
        let m = imm.ambient_dim;
        let mut normals: Vec<Vec<f64>> = Vec::new();
        for k in 0..m {
            if normals.len() == m - 4 {
                break;
            }
            let mut v = vec![0.0; m];
            v[k] = 1.0;
            for e in frame.iter().map(|e| e as &Vec<f64>).chain(normals.iter()) {
                let p = dot(&v, e);
                axpy(&mut v, -p, e);
            }
            let nv = norm(&v);
            if nv > 1e-6 {
                for vi in v.iter_mut() {
                    *vi /= nv;
                }
                normals.push(v);
            }
        }
        // express frame in partial coordinates: solve partials^T c = e via
        // Gram-Schmidt coefficients (partials are generically independent)
        // S^a_ij = nu_a . d2F(c_i, c_j)
        let coords: Vec<Vec<f64>> = frame
            .iter()
            .map(|e| solve_in_span(&partials, e))
            .collect();
        let seconds: Vec<Vec<Vec<f64>>> = (0..4)
            .map(|i| (0..4).map(|j| imm.second(&x, i, j)).collect())
            .collect();
        let jmat = [
            [0.0, 0.0, -1.0, 0.0],
            [0.0, 0.0, 0.0, -1.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
        ];
        for nu in &normals {
            let mut s = [[0.0; 4]; 4];
            for i in 0..4 {
                for j in 0..4 {
                    let mut acc = 0.0;
                    for k in 0..4 {
                        for l in 0..4 {
                            acc += coords[i][k] * coords[j][l] * dot(nu, &seconds[k][l]);
                        }
                    }
                    s[i][j] = acc;
                }
            }
            // SJ + JS
            for i in 0..4 {
                for j in 0..4 {
                    let mut v = 0.0;
                    for k in 0..4 {
                        v += s[i][k] * jmat[k][j] + jmat[i][k] * s[k][j];
                    }
                    worst = worst.max(v.abs());
                }
            }
        }
        used += 1;
    }
    Ok(TypeACheck {
        passed: worst <= tol,
        worst_residual: worst,
    })
}

/// Least-squares coefficients expressing `target` in the span of `basis`
/// (normal equations; the basis is well-conditioned by construction).
fn solve_in_span(basis: &[Vec<f64>], target: &[f64]) -> Vec<f64> {
    let n = basis.len();
    let mut g = vec![vec![0.0; n + 1]; n];
    for i in 0..n {
        for j in 0..n {
            g[i][j] = dot(&basis[i], &basis[j]);
        }
        g[i][n] = dot(&basis[i], target);
    }
    // Gaussian elimination with partial pivoting
    for c in 0..n {
        let piv = (c..n)
            .max_by(|&a, &b| g[a][c].abs().partial_cmp(&g[b][c].abs()).unwrap())
            .unwrap();
        g.swap(c, piv);
        let p = g[c][c];
        for j in c..=n {
            g[c][j] /= p;
        }
        for r in 0..n {
            if r != c && g[r][c] != 0.0 {
                let f = g[r][c];
                for j in c..=n {
                    g[r][j] -= f * g[c][j];
                }
            }
        }
    }
    (0..n).map(|i| g[i][n]).collect()
}

/// Direction shared by all shape matrices when each factors through a
/// common linear form: returns the worst residual of
/// P(perp l) S^a P(perp l) over candidate directions from column-space
/// intersections.
pub fn common_factor_residual(data: &SecondFundamentalData) -> f64 {
    let n = data.shape_matrices.first().map_or(0, |s| s.len());
    // candidate: dominant direction of sum of S^a S^a^T via power iteration
    let mut acc = vec![vec![0.0; n]; n];
    for s in &data.shape_matrices {
        for i in 0..n {
            for j in 0..n {
                let mut v = 0.0;
                for k in 0..n {
                    v += s[i][k] * s[j][k];
                }
                acc[i][j] += v;
            }
        }
    }
    let mut v = vec![1.0; n];
    for _ in 0..200 {
        let mut w = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                w[i] += acc[i][j] * v[j];
            }
        }
        let nw = norm(&w);
        if nw < 1e-300 {
            return f64::INFINITY;
        }
        for wi in w.iter_mut() {
            *wi /= nw;
        }
        v = w;
    }
    // residual: components of S^a orthogonal to the candidate direction
    let mut worst = 0.0f64;
    for s in &data.shape_matrices {
        let mut scale = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                scale = scale.max(s[i][j].abs());
            }
        }
        for i in 0..n {
            for j in 0..n {
                // (P s P)_{ij} with P = I - v v^T
                let mut val = s[i][j];
                let mut svj = 0.0;
                let mut siv = 0.0;
                let mut svv = 0.0;
                for k in 0..n {
                    svj += v[k] * s[k][j];
                    siv += s[i][k] * v[k];
                    for l in 0..n {
                        svv += v[k] * s[k][l] * v[l];
                    }
                }
                val -= v[i] * svj + siv * v[j] - v[i] * svv * v[j];
                if scale > 0.0 {
                    worst = worst.max(val.abs() / scale);
                }
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_graph_has_zero_shape_operators() {
        // affine helicoid: no pitches
        let imm = helicoid(&[], 4);
        let data = second_fundamental_form(&imm, &[0.5, 1.0, 0.7, 1.3]).unwrap();
        for s in &data.shape_matrices {
            for row in s {
                for v in row {
                    assert!(v.abs() < 1e-12);
                }
            }
        }
        assert_eq!(data.normal_rank, 0);
    }

    #[test]
    fn helicoid_is_austere_to_tolerance() {
        let imm = helicoid(&[1.0, 2.0, 3.0], 4);
        let out = austere_check(&imm, 10, 20, 1e-9, 20240817).unwrap();
        assert!(out.passed, "worst residual {}", out.worst_residual);
        // shape matrices are traceless individually
        let data = second_fundamental_form(&imm, &[0.4, 0.9, 1.1, 0.8]).unwrap();
        for s in &data.shape_matrices {
            let tr: f64 = (0..4).map(|i| s[i][i]).sum();
            assert!(tr.abs() < 1e-9);
        }
    }

    #[test]
    fn single_pitch_normal_rank_is_one() {
        let imm = helicoid(&[1.0], 4);
        let mut rng = SplitMix64::new(5);
        for _ in 0..5 {
            let x: Vec<f64> = (0..4).map(|_| rng.f64_in(0.4, 1.5)).collect();
            let data = second_fundamental_form(&imm, &x).unwrap();
            assert_eq!(data.normal_rank, 1);
        }
    }

    #[test]
    fn paraboloid_fails_austerity_loudly() {
        let imm = paraboloid_graph();
        let out = austere_check(&imm, 5, 10, 1e-9, 7).unwrap();
        assert!(!out.passed);
        assert!(out.worst_residual > 1e-3);
        let cyl = cylinder_graph();
        let out2 = austere_check(&cyl, 5, 10, 1e-9, 7).unwrap();
        assert!(out2.worst_residual > 1e-3);
    }

    #[test]
    fn segre_chart_passes_type_a() {
        let imm = segre_chart(1);
        let out = type_a_check(&imm, 8, 1e-9, 99).unwrap();
        assert!(out.passed, "worst {}", out.worst_residual);
    }

    #[test]
    fn antiholomorphic_graph_fails_type_a() {
        let imm = antiholomorphic_graph();
        let out = type_a_check(&imm, 8, 1e-9, 99).unwrap();
        assert!(!out.passed);
        assert!(out.worst_residual > 1e-3);
    }

    #[test]
    fn equal_pitch_helicoid_shapes_share_a_common_factor() {
        let imm = helicoid(&[1.0, 1.0, 1.0], 4);
        let mut rng = SplitMix64::new(31);
        for _ in 0..5 {
            let x: Vec<f64> = (0..4).map(|_| rng.f64_in(0.4, 1.4)).collect();
            let data = second_fundamental_form(&imm, &x).unwrap();
            assert!(common_factor_residual(&data) < 1e-8);
        }
    }

    #[test]
    fn austere_residual_invariant_under_ambient_rotation() {
        // rotate the helicoid by a fixed orthogonal map of R^7
        let base = helicoid(&[1.0, 2.0, 3.0], 4);
        let angle: f64 = 0.7;
        let (c, s) = (angle.cos(), angle.sin());
        let rot = move |v: Vec<f64>| -> Vec<f64> {
            let mut w = v.clone();
            // rotate in the (0, 3) and (2, 5) planes
            w[0] = c * v[0] - s * v[3];
            w[3] = s * v[0] + c * v[3];
            w[2] = c * v[2] - s * v[5];
            w[5] = s * v[2] + c * v[5];
            w
        };
        let r1 = rot.clone();
        let r2 = rot.clone();
        let rotated = Immersion {
            domain_dim: 4,
            ambient_dim: 7,
            name: "rotated_helicoid".into(),
            value: Box::new(move |x| rot(base.value(x))),
            partial: {
                let b = helicoid(&[1.0, 2.0, 3.0], 4);
                Box::new(move |x, i| r1(b.partial(x, i)))
            },
            second: {
                let b = helicoid(&[1.0, 2.0, 3.0], 4);
                Box::new(move |x, i, j| r2(b.second(x, i, j)))
            },
        };
        let out = austere_check(&rotated, 6, 10, 1e-9, 424242).unwrap();
        assert!(out.passed, "worst {}", out.worst_residual);
    }
}
