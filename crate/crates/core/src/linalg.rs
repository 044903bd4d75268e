//! Small dense complex linear algebra: Hessenberg QR eigenvalues, companion-matrix
//! polynomial roots, null vectors and the matrix exponential.
//!
//! Everything here works on tiny matrices (3×3 pencils, 9×9 augmented exponentials)
//! so the routines favour clarity over blocking or cache tricks.

use num_complex::Complex64;

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);

/// Row-major dense square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    n: usize,
    data: Vec<C>,
}

impl CMat {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![ZERO; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_rows<const N: usize>(rows: [[C; N]; N]) -> Self {
        let mut m = Self::zeros(N);
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn norm1(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, s: C) -> Self {
        Self { n: self.n, data: self.data.iter().map(|v| v * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        Self {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[C]) -> Vec<C> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// Copy of the `size`×`size` block starting at (`row`, `col`).
    pub fn block(&self, row: usize, col: usize, size: usize) -> Self {
        let mut out = Self::zeros(size);
        for i in 0..size {
            for j in 0..size {
                out[(i, j)] = self[(row + i, col + j)];
            }
        }
        out
    }

    pub fn set_block(&mut self, row: usize, col: usize, b: &Self) {
        for i in 0..b.n {
            for j in 0..b.n {
                self[(row + i, col + j)] = b[(i, j)];
            }
        }
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = C;
    fn index(&self, (i, j): (usize, usize)) -> &C {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C {
        &mut self.data[i * self.n + j]
    }
}

/// Reduce to upper Hessenberg form by Householder similarity transforms.
fn hessenberg(mut h: CMat) -> CMat {
    let n = h.n;
    for k in 0..n.saturating_sub(2) {
        let x: Vec<C> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xnorm = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { ONE };
        let alpha = -phase * xnorm;
        let mut v = x.clone();
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // H <- (I - 2 v v^H) H
        for j in 0..n {
            let dot: C = v.iter().enumerate().map(|(a, vi)| vi.conj() * h[(k + 1 + a, j)]).sum();
            for (a, vi) in v.iter().enumerate() {
                h[(k + 1 + a, j)] -= 2.0 * vi * dot;
            }
        }
        // H <- H (I - 2 v v^H)
        for i in 0..n {
            let dot: C = v.iter().enumerate().map(|(a, vi)| h[(i, k + 1 + a)] * vi).sum();
            for (a, vi) in v.iter().enumerate() {
                h[(i, k + 1 + a)] -= 2.0 * dot * vi.conj();
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    h
}

fn givens(a: C, b: C) -> (f64, C) {
    let an = a.norm();
    let r = (an * an + b.norm_sqr()).sqrt();
    if r == 0.0 {
        (1.0, ZERO)
    } else if an == 0.0 {
        (0.0, b.conj() / b.norm())
    } else {
        (an / r, (a / an) * b.conj() / r)
    }
}

/// Eigenvalues of a general complex matrix by the shifted Hessenberg QR algorithm.
///
/// Returned in deflation order (unsorted).
pub fn eigenvalues(m: &CMat) -> Vec<C> {
    let n = m.n;
    if n == 0 {
        return Vec::new();
    }
    let mut h = hessenberg(m.clone());
    let mut eig = vec![ZERO; n];
    let mut hi = n - 1;
    let mut iter = 0usize;
    let eps = f64::EPSILON;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let off = h[(l, l - 1)].norm();
            let diag = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            if off <= eps * diag || off < f64::MIN_POSITIVE {
                h[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            eig[hi] = h[(hi, hi)];
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > 500 {
            // Give up refining this block: take the diagonal as the best estimate.
            for i in l..=hi {
                eig[i] = h[(i, i)];
            }
            if l == 0 {
                return eig;
            }
            hi = l - 1;
            iter = 0;
            continue;
        }
        let a = h[(hi - 1, hi - 1)];
        let b = h[(hi - 1, hi)];
        let c = h[(hi, hi - 1)];
        let d = h[(hi, hi)];
        let mu = if iter % 11 == 10 {
            // exceptional shift
            d + C::new(0.75 * c.norm(), 0.25 * c.norm())
        } else {
            let half_tr = (a + d) * 0.5;
            let disc = (half_tr * half_tr - (a * d - b * c)).sqrt();
            let m1 = half_tr + disc;
            let m2 = half_tr - disc;
            if (m1 - d).norm() < (m2 - d).norm() {
                m1
            } else {
                m2
            }
        };
        for i in l..=hi {
            h[(i, i)] -= mu;
        }
        let mut rots = Vec::with_capacity(hi - l);
        for k in l..hi {
            let (cs, sn) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..=hi {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = x * cs + sn * y;
                h[(k + 1, j)] = -sn.conj() * x + y * cs;
            }
            rots.push((cs, sn));
        }
        for (idx, (cs, sn)) in rots.into_iter().enumerate() {
            let k = l + idx;
            for i in l..=(k + 1).min(hi) {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * cs + y * sn.conj();
                h[(i, k + 1)] = -x * sn + y * cs;
            }
        }
        for i in l..=hi {
            h[(i, i)] += mu;
        }
    }
    eig[0] = h[(0, 0)];
    eig
}

/// Evaluate a polynomial given by coefficients in ascending order.
pub fn poly_eval(coeffs: &[C], x: C) -> C {
    coeffs.iter().rev().fold(ZERO, |acc, c| acc * x + c)
}

fn poly_eval_with_derivative(coeffs: &[C], x: C) -> (C, C) {
    let mut p = ZERO;
    let mut dp = ZERO;
    for c in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

/// Roots of `Σ coeffs[i] xⁱ` (ascending order, nonzero leading coefficient) from the
/// eigenvalues of the companion matrix, each polished by a guarded Newton step.
pub fn companion_roots(coeffs: &[C]) -> Vec<C> {
    let deg = coeffs.len() - 1;
    let lead = coeffs[deg];
    assert!(lead != ZERO, "leading coefficient must be nonzero");
    let mut comp = CMat::zeros(deg);
    for i in 1..deg {
        comp[(i, i - 1)] = ONE;
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -coeffs[i] / lead;
    }
    eigenvalues(&comp)
        .into_iter()
        .map(|mut z| {
            for _ in 0..3 {
                let (p, dp) = poly_eval_with_derivative(coeffs, z);
                if dp == ZERO {
                    break;
                }
                let cand = z - p / dp;
                if poly_eval(coeffs, cand).norm() < p.norm() {
                    z = cand;
                } else {
                    break;
                }
            }
            z
        })
        .collect()
}

/// Characteristic polynomial det(λI − M) of a 3×3 matrix, ascending coefficients.
pub fn char_poly3(m: &CMat) -> [C; 4] {
    assert_eq!(m.n, 3);
    let tr = m[(0, 0)] + m[(1, 1)] + m[(2, 2)];
    let minors = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
        + m[(0, 0)] * m[(2, 2)]
        - m[(0, 2)] * m[(2, 0)]
        + m[(1, 1)] * m[(2, 2)]
        - m[(1, 2)] * m[(2, 1)];
    [-det3(m), minors, -tr, ONE]
}

pub fn det3(m: &CMat) -> C {
    m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
        - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
        + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)])
}

/// Unit null vector of a (numerically) rank-deficient 3×3 matrix.
///
/// Takes the largest cross product of conjugated row pairs, which is orthogonal to
/// the row space when the rank is two; falls back to the smallest-norm column
/// direction when the matrix has rank one or zero.
pub fn null_vector3(m: &CMat) -> [C; 3] {
    let row = |i: usize| [m[(i, 0)], m[(i, 1)], m[(i, 2)]];
    let cross = |a: [C; 3], b: [C; 3]| {
        [
            (a[1] * b[2] - a[2] * b[1]).conj(),
            (a[2] * b[0] - a[0] * b[2]).conj(),
            (a[0] * b[1] - a[1] * b[0]).conj(),
        ]
    };
    let norm = |v: &[C; 3]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let cands = [cross(row(0), row(1)), cross(row(0), row(2)), cross(row(1), row(2))];
    let best = cands
        .iter()
        .max_by(|a, b| norm(a).total_cmp(&norm(b)))
        .copied()
        .unwrap();
    let bn = norm(&best);
    let scale = (0..3).map(|i| norm(&row(i))).fold(0.0, f64::max).max(1e-300);
    if bn > 1e-12 * scale * scale {
        return [best[0] / bn, best[1] / bn, best[2] / bn];
    }
    // Rank <= 1: any vector orthogonal to the dominant row works.
    let r = (0..3).map(row).max_by(|a, b| norm(a).total_cmp(&norm(b))).unwrap();
    if norm(&r) == 0.0 {
        return [ONE, ZERO, ZERO];
    }
    let e = if r[0].norm() <= r[1].norm() && r[0].norm() <= r[2].norm() {
        [ONE, ZERO, ZERO]
    } else if r[1].norm() <= r[2].norm() {
        [ZERO, ONE, ZERO]
    } else {
        [ZERO, ZERO, ONE]
    };
    let v = cross([r[0].conj(), r[1].conj(), r[2].conj()], e);
    let vn = norm(&v);
    [v[0] / vn, v[1] / vn, v[2] / vn]
}

/// Matrix exponential by scaling and squaring with a truncated Taylor series.
pub fn expm(a: &CMat) -> CMat {
    let n = a.n;
    let norm = a.norm1();
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scaled = a.scale(C::new(0.5f64.powi(squarings as i32), 0.0));
    let mut sum = CMat::identity(n);
    let mut term = CMat::identity(n);
    for j in 1..=30 {
        term = term.matmul(&scaled).scale(C::new(1.0 / j as f64, 0.0));
        sum = sum.add(&term);
        if term.norm1() <= 1e-18 * sum.norm1() {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum.matmul(&sum);
    }
    sum
}

/// `(e^{A}, φ₁(A), φ₂(A))` for a square matrix `A`, read off the exponential of the
/// block matrix `[[A, I, 0], [0, 0, I], [0, 0, 0]]`.
pub fn exp_phi12(a: &CMat) -> (CMat, CMat, CMat) {
    let n = a.n;
    let mut big = CMat::zeros(3 * n);
    big.set_block(0, 0, a);
    let id = CMat::identity(n);
    big.set_block(0, n, &id);
    big.set_block(n, 2 * n, &id);
    let e = expm(&big);
    (e.block(0, 0, n), e.block(0, n, n), e.block(0, 2 * n, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn sorted(mut v: Vec<C>) -> Vec<C> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn triangular_eigenvalues_are_the_diagonal() {
        let m = CMat::from_rows([
            [c(-3.0, 1.0), c(2.0, 0.0), c(0.0, 5.0)],
            [ZERO, c(-1.0, 0.0), c(1.0, 1.0)],
            [ZERO, ZERO, c(-1.0, 0.0)],
        ]);
        let e = sorted(eigenvalues(&m));
        assert!((e[0] - c(-3.0, 1.0)).norm() < 1e-14);
        assert!((e[1] - c(-1.0, 0.0)).norm() < 1e-14);
        assert!((e[2] - c(-1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn eigenvalues_of_dense_matrix_satisfy_char_poly() {
        let m = CMat::from_rows([
            [c(1.0, 2.0), c(-0.5, 0.3), c(2.0, -1.0)],
            [c(0.7, 0.0), c(-2.0, 0.5), c(0.1, 0.1)],
            [c(3.0, -1.0), c(0.2, 0.9), c(0.0, -4.0)],
        ]);
        let p = char_poly3(&m);
        for z in eigenvalues(&m) {
            assert!(poly_eval(&p, z).norm() < 1e-11, "{z}");
        }
    }

    #[test]
    fn companion_roots_of_known_cubic() {
        // (x-1)(x+2)(x-i) = x^3 + (1-i)x^2 + (-2-i)x + 2i
        let coeffs = [c(0.0, 2.0), c(-2.0, -1.0), c(1.0, -1.0), ONE];
        let r = sorted(companion_roots(&coeffs));
        let want = sorted(vec![c(1.0, 0.0), c(-2.0, 0.0), c(0.0, 1.0)]);
        for (a, b) in r.iter().zip(&want) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn null_vector_of_singular_matrix() {
        let m = CMat::from_rows([
            [c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)],
            [c(0.0, 1.0), c(1.0, 1.0), c(2.0, 1.0)],
            [c(1.0, 1.0), c(3.0, 1.0), c(5.0, 1.0)],
        ]);
        let v = null_vector3(&m);
        let r = m.matvec(&v);
        assert!(r.iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn phi_functions_of_scalar_match_closed_form() {
        let z = c(-2.5, 0.7);
        let (e, p1, p2) = exp_phi12(&CMat::from_rows([[z]]));
        let ez = z.exp();
        assert!((e[(0, 0)] - ez).norm() < 1e-14);
        assert!((p1[(0, 0)] - (ez - 1.0) / z).norm() < 1e-14);
        assert!((p2[(0, 0)] - (ez - 1.0 - z) / (z * z)).norm() < 1e-14);
    }
}
