//! Dense complex linear algebra helpers.
//!
//! Conventions used everywhere in the crate:
//! * vectorization is row-major, so `vec(A X B) = (A ⊗ Bᵀ) vec(X)`;
//! * rank decisions compare singular values against `tol · σ_max`.

use crate::scalar::{cr, CMat, CVec, Real, C};
use nalgebra::{Complex, ComplexField, DMatrix, DVector};

pub fn zeros<R: Real>(r: usize, c: usize) -> CMat<R> {
    DMatrix::zeros(r, c)
}

pub fn eye<R: Real>(n: usize) -> CMat<R> {
    DMatrix::identity(n, n)
}

pub fn kron<R: Real>(a: &CMat<R>, b: &CMat<R>) -> CMat<R> {
    a.kronecker(b)
}

pub fn conj<R: Real>(a: &CMat<R>) -> CMat<R> {
    a.map(|z| z.conj())
}

/// Row-major vectorization.
pub fn vec_rm<R: Real>(a: &CMat<R>) -> CVec<R> {
    let (r, c) = a.shape();
    DVector::from_fn(r * c, |k, _| a[(k / c, k % c)])
}

pub fn unvec_rm<R: Real>(v: &[C<R>], rows: usize, cols: usize) -> CMat<R> {
    assert_eq!(v.len(), rows * cols, "unvec length");
    DMatrix::from_fn(rows, cols, |i, j| v[i * cols + j])
}

pub fn col_unvec<R: Real>(m: &CMat<R>, col: usize, rows: usize, cols: usize) -> CMat<R> {
    DMatrix::from_fn(rows, cols, |i, j| m[(i * cols + j, col)])
}

pub fn hermitian_part<R: Real>(a: &CMat<R>) -> CMat<R> {
    (a + a.adjoint()) * cr(R::lit(0.5))
}

pub fn max_abs<R: Real>(a: &CMat<R>) -> R {
    a.iter().fold(R::zero(), |m, z| m.max(z.modulus()))
}

pub fn max_abs_diff<R: Real>(a: &CMat<R>, b: &CMat<R>) -> R {
    if a.shape() != b.shape() {
        return R::max_value().unwrap_or(R::one());
    }
    max_abs(&(a - b))
}

/// Hermitian eigendecomposition with eigenvalues sorted ascending.
pub struct HermEig<R: Real> {
    pub values: Vec<R>,
    pub vectors: CMat<R>,
}

pub fn herm_eig<R: Real>(a: &CMat<R>) -> HermEig<R> {
    let n = a.nrows();
    if n == 0 {
        return HermEig { values: vec![], vectors: zeros(0, 0) };
    }
    let h = hermitian_part(a);
    let eig = h.symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap_or(std::cmp::Ordering::Equal));
    let values = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, k| eig.eigenvectors[(r, idx[k])]);
    HermEig { values, vectors }
}

/// `V f(Λ) V†` for a Hermitian matrix.
pub fn herm_apply<R: Real>(e: &HermEig<R>, f: impl Fn(R) -> C<R>) -> CMat<R> {
    let n = e.values.len();
    let mut scaled = e.vectors.clone();
    for k in 0..n {
        let s = f(e.values[k]);
        for r in 0..n {
            scaled[(r, k)] *= s;
        }
    }
    scaled * e.vectors.adjoint()
}

/// Largest eigenvalue magnitude used as the scale for relative thresholds.
fn spectral_scale<R: Real>(values: &[R]) -> R {
    values.iter().fold(R::zero(), |m, v| m.max(v.abs()))
}

/// Real power of a positive-definite matrix; rejects eigenvalues at or below
/// `1e-12 · λ_max`.
pub fn pd_power<R: Real>(a: &CMat<R>, s: R) -> Option<CMat<R>> {
    let e = herm_eig(a);
    let top = spectral_scale(&e.values);
    if e.values.iter().any(|&v| v <= R::lit(1e-12) * top) || top <= R::zero() {
        return None;
    }
    Some(herm_apply(&e, |v| cr(v.powf(s))))
}

/// Real power of a positive-semidefinite matrix restricted to its support
/// (eigenvalues ≤ tol·λ_max are treated as zero and mapped to zero).
pub fn psd_power_on_support<R: Real>(a: &CMat<R>, s: R, tol: R) -> CMat<R> {
    let e = herm_eig(a);
    let cut = tol * spectral_scale(&e.values);
    herm_apply(&e, |v| if v > cut { cr(v.powf(s)) } else { cr(R::zero()) })
}

pub fn support_projection<R: Real>(a: &CMat<R>, tol: R) -> CMat<R> {
    let e = herm_eig(a);
    let cut = tol * spectral_scale(&e.values);
    herm_apply(&e, |v| if v.abs() > cut { cr(R::one()) } else { cr(R::zero()) })
}

pub fn min_eigenvalue<R: Real>(a: &CMat<R>) -> R {
    herm_eig(a).values.first().copied().unwrap_or(R::zero())
}

/// Singular values and singular vectors; `v` is always square (`ncols × ncols`).
pub struct Svd<R: Real> {
    pub u: CMat<R>,
    pub s: Vec<R>,
    pub v: CMat<R>,
}

/// One-sided (Hestenes) Jacobi SVD. Returns `u` with `ncols` columns (zero
/// columns where `σ = 0`), the singular values, and a square unitary `v`, with
/// `a v = u diag(s)`. Unsorted.
///
/// Tall inputs are first reduced by a Householder QR; `R` has the same
/// singular values and right singular vectors.
fn jacobi_svd<R: Real>(a: &CMat<R>) -> Svd<R> {
    let (m, n) = a.shape();
    if m > n && n > 0 {
        let qr = a.clone().qr();
        let (q, r) = (qr.q(), qr.r());
        let inner = jacobi_core(&r);
        return Svd { u: q * inner.u, s: inner.s, v: inner.v };
    }
    jacobi_core(a)
}

/// Columns `p < q` of a column-major slice: `(x, y) ← (c x − ps̄ y, ps x + c y)`.
fn rotate_columns<R: Real>(data: &mut [C<R>], rows: usize, p: usize, q: usize, c: R, ps: C<R>) {
    let (head, tail) = data.split_at_mut(q * rows);
    let xp = &mut head[p * rows..(p + 1) * rows];
    let xq = &mut tail[..rows];
    let psc = ps.conj();
    for (x, y) in xp.iter_mut().zip(xq.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = a.scale(c) - b * psc;
        *y = a * ps + b.scale(c);
    }
}

fn jacobi_core<R: Real>(a: &CMat<R>) -> Svd<R> {
    let (m, n) = a.shape();
    let mut w = a.clone();
    let mut v: CMat<R> = eye(n);
    let eps = R::default_epsilon();
    // Pairs whose overlap is below the noise floor are left alone; rotating
    // them only churns (and can lose unitarity in subnormal arithmetic).
    let fro2 = a.iter().fold(R::zero(), |acc, z| acc + z.norm_sqr());
    let floor = eps * eps * fro2;
    // Convergence threshold as in LAPACK's one-sided Jacobi.
    let conv = eps * R::lit((m.max(1) as f64).sqrt());
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (alpha, beta, gamma) = {
                    let data = w.as_slice();
                    let (xp, xq) = (&data[p * m..(p + 1) * m], &data[q * m..(q + 1) * m]);
                    let mut acc = (R::zero(), R::zero(), Complex::new(R::zero(), R::zero()));
                    for (x, y) in xp.iter().zip(xq) {
                        acc.0 += x.norm_sqr();
                        acc.1 += y.norm_sqr();
                        acc.2 += x.conj() * y;
                    }
                    acc
                };
                let g = gamma.modulus();
                if g <= conv * (alpha * beta).sqrt() || g <= floor {
                    continue;
                }
                rotated = true;
                // Rotate so that columns p and q become orthogonal.
                let phase = Complex::new(gamma.re / g, gamma.im / g);
                let zeta = (beta - alpha) / (R::lit(2.0) * g);
                let t = zeta.signum() / (zeta.abs() + (R::one() + zeta * zeta).sqrt());
                let t = if zeta == R::zero() { R::one() } else { t };
                let c = R::one() / (R::one() + t * t).sqrt();
                let s = c * t;
                let ps = phase.scale(s);
                rotate_columns(w.as_mut_slice(), m, p, q, c, ps);
                rotate_columns(v.as_mut_slice(), n, p, q, c, ps);
            }
        }
        if !rotated {
            break;
        }
    }
    let mut s = vec![R::zero(); n];
    let mut u = zeros(m, n);
    for k in 0..n {
        let norm = w.column(k).iter().fold(R::zero(), |acc, z| acc + z.norm_sqr()).sqrt();
        s[k] = norm;
        if norm > R::zero() {
            for i in 0..m {
                u[(i, k)] = w[(i, k)] / cr(norm);
            }
        }
    }
    Svd { u, s, v }
}

/// SVD with `v` square (`ncols × ncols`) and `s[k]` paired with `v[:, k]`.
pub fn svd_full_v<R: Real>(a: &CMat<R>) -> Svd<R> {
    jacobi_svd(a)
}

pub fn singular_values<R: Real>(a: &CMat<R>) -> Vec<R> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return vec![];
    }
    // Work on the thinner side.
    if a.nrows() < a.ncols() {
        jacobi_svd(&a.adjoint()).s
    } else {
        jacobi_svd(a).s
    }
}

pub fn opnorm<R: Real>(a: &CMat<R>) -> R {
    singular_values(a).into_iter().fold(R::zero(), |m, v| m.max(v))
}

pub fn rank<R: Real>(a: &CMat<R>, tol: R) -> usize {
    let s = singular_values(a);
    let top = s.iter().fold(R::zero(), |m, &v| m.max(v));
    s.iter().filter(|&&v| v > tol * top && v > R::zero()).count()
}

/// Orthonormal basis (as columns) of the column space of `a`. Singular values
/// at or below `max(tol·σ_max, floor)` are treated as zero.
pub fn range_basis<R: Real>(a: &CMat<R>, tol: R, floor: R) -> CMat<R> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return zeros(m, 0);
    }
    // Left singular vectors of `a` are right singular vectors of `a†`; using
    // the square `v` keeps the basis orthonormal even when `n > m`.
    let svd = jacobi_svd(&a.adjoint());
    let top = svd.s.iter().fold(R::zero(), |acc, &v| acc.max(v));
    let cut = (tol * top).max(floor);
    let keep: Vec<usize> = (0..svd.s.len()).filter(|&k| svd.s[k] > cut && svd.s[k] > R::zero()).collect();
    DMatrix::from_fn(m, keep.len(), |i, k| svd.v[(i, keep[k])])
}

/// Orthonormal basis (as columns) of the nullspace of `a`.
pub fn nullspace<R: Real>(a: &CMat<R>, tol: R) -> CMat<R> {
    let (m, n) = a.shape();
    if n == 0 {
        return zeros(0, 0);
    }
    if m == 0 {
        return eye(n);
    }
    let svd = svd_full_v(a);
    let top = svd.s.iter().fold(R::zero(), |acc, &v| acc.max(v));
    let cut = tol * top;
    let keep: Vec<usize> = (0..n).filter(|&k| svd.s[k] <= cut).collect();
    DMatrix::from_fn(n, keep.len(), |i, k| svd.v[(i, keep[k])])
}

/// Moore–Penrose pseudo-inverse with relative cutoff.
pub fn pinv<R: Real>(a: &CMat<R>, tol: R) -> CMat<R> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return zeros(n, m);
    }
    let svd = jacobi_svd(a);
    let top = svd.s.iter().fold(R::zero(), |acc, &v| acc.max(v));
    let mut out = zeros(n, m);
    for (k, &s) in svd.s.iter().enumerate() {
        if s > tol * top && s > R::zero() {
            out += (svd.v.column(k) * svd.u.column(k).adjoint()) * cr(R::one() / s);
        }
    }
    out
}

/// All `v` (shape `Y.nrows × X.ncols`) with `Y v = v X` for every pair, as an
/// HS-orthonormal list.
///
/// The Gram operator of the stacked system has Kronecker structure, so it is
/// assembled cheaply; its near-null eigenspace is then refined with an SVD of
/// the actual residual map, which restores the `tol·σ_max` decision that the
/// squared Gram spectrum cannot resolve on its own.
pub fn intertwiners<R: Real>(pairs: &[(CMat<R>, CMat<R>)], tol: R) -> Vec<CMat<R>> {
    assert!(!pairs.is_empty(), "at least one pair");
    let p = pairs[0].0.nrows();
    let q = pairs[0].1.ncols();
    let d = p * q;
    if d == 0 {
        return vec![];
    }
    let mut yy = zeros::<R>(p, p);
    let mut xx = zeros::<R>(q, q);
    let mut gram = zeros::<R>(d, d);
    for (y, x) in pairs {
        debug_assert_eq!(y.shape(), (p, p));
        debug_assert_eq!(x.shape(), (q, q));
        yy += y.adjoint() * y;
        xx += conj(x) * x.transpose();
        gram -= kron(&y.adjoint(), &x.transpose());
        gram -= kron(y, &conj(x));
    }
    gram += kron(&yy, &eye(q));
    gram += kron(&eye(p), &xx);
    let e = herm_eig(&gram);
    // Scale from the inputs, not the Gram spectrum: when every pair is
    // (nearly) trivially satisfied the spectrum is pure rounding noise.
    let top = pairs.iter().fold(R::zero(), |acc, (y, x)| {
        let s = max_abs(y) + max_abs(x);
        acc + s * s
    });
    if top <= R::zero() {
        return (0..d).map(|k| unit_matrix(p, q, k)).collect();
    }
    let loose = R::default_epsilon().sqrt() * top;
    let cand: Vec<usize> = (0..d).filter(|&k| e.values[k] <= loose).collect();
    if cand.is_empty() {
        return vec![];
    }
    let n0 = DMatrix::from_fn(d, cand.len(), |i, k| e.vectors[(i, cand[k])]);
    let mut resid = zeros::<R>(pairs.len() * d, cand.len());
    for k in 0..cand.len() {
        let v = col_unvec(&n0, k, p, q);
        for (t, (y, x)) in pairs.iter().enumerate() {
            let r = y * &v - &v * x;
            for i in 0..d {
                resid[(t * d + i, k)] = r[(i / q, i % q)];
            }
        }
    }
    let svd = svd_full_v(&resid);
    let cut = tol * top.sqrt();
    let keep: Vec<usize> = (0..cand.len()).filter(|&k| svd.s[k] <= cut).collect();
    let basis = &n0 * DMatrix::from_fn(cand.len(), keep.len(), |i, k| svd.v[(i, keep[k])]);
    (0..keep.len()).map(|k| col_unvec(&basis, k, p, q)).collect()
}

pub fn unit_matrix<R: Real>(rows: usize, cols: usize, k: usize) -> CMat<R> {
    let mut m = zeros(rows, cols);
    m[(k / cols, k % cols)] = cr(R::one());
    m
}

pub fn matrix_unit<R: Real>(n: usize, i: usize, j: usize) -> CMat<R> {
    let mut m = zeros(n, n);
    m[(i, j)] = cr(R::one());
    m
}

/// Block-diagonal assembly.
pub fn block_diag<R: Real>(blocks: &[CMat<R>]) -> CMat<R> {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(rows, cols);
    let (mut r0, mut c0) = (0, 0);
    for b in blocks {
        out.view_mut((r0, c0), b.shape()).copy_from(b);
        r0 += b.nrows();
        c0 += b.ncols();
    }
    out
}

pub fn hs_inner<R: Real>(a: &CMat<R>, b: &CMat<R>) -> C<R> {
    a.iter().zip(b.iter()).fold(cr(R::zero()), |acc, (x, y)| acc + x.conj() * y)
}

pub fn frob<R: Real>(a: &CMat<R>) -> R {
    a.norm()
}

pub fn trace<R: Real>(a: &CMat<R>) -> C<R> {
    a.trace()
}

/// Columns stacked into a matrix.
pub fn hstack<R: Real>(rows: usize, cols: &[CVec<R>]) -> CMat<R> {
    DMatrix::from_fn(rows, cols.len(), |i, k| cols[k][i])
}

pub fn is_unitary<R: Real>(u: &CMat<R>, tol: R) -> bool {
    u.is_square() && max_abs_diff(&(u.adjoint() * u), &eye(u.ncols())) <= tol
}

pub fn cast<R: Real, S: Real>(a: &CMat<R>) -> CMat<S> {
    a.map(|z| Complex::new(S::lit(z.re.to_f64_lossy()), S::lit(z.im.to_f64_lossy())))
}
