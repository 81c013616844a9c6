//! Maximizing the smallest eigenvalue over an affine family of Hermitian
//! matrices.
//!
//! `t ↦ λ_min(H₀ + Σ t_k H_k)` is concave, so plain ascent on a smoothed
//! soft-min converges to the global maximum; the smoothing is annealed and the
//! best exact value seen is returned.

use crate::linalg::{self, herm_eig};
use crate::scalar::{CMat, Real};

pub struct MinEigMax<R: Real> {
    pub t: Vec<R>,
    pub value: R,
}

fn assemble<R: Real>(h0: &CMat<R>, dirs: &[CMat<R>], t: &[R]) -> CMat<R> {
    let mut h = h0.clone();
    for (d, &s) in dirs.iter().zip(t) {
        h += d * crate::scalar::cr(s);
    }
    linalg::hermitian_part(&h)
}

/// Soft-min `−μ log Σ exp(−λ_i/μ)` and its gradient.
fn smoothed<R: Real>(h0: &CMat<R>, dirs: &[CMat<R>], t: &[R], mu: R) -> (R, R, Vec<R>) {
    let e = herm_eig(&assemble(h0, dirs, t));
    let lmin = e.values[0];
    let weights: Vec<R> = e.values.iter().map(|&l| (-(l - lmin) / mu).exp()).collect();
    let z = weights.iter().fold(R::zero(), |a, &w| a + w);
    let value = lmin - mu * z.ln();
    let mut grad = vec![R::zero(); dirs.len()];
    for (i, &w) in weights.iter().enumerate() {
        if w < R::lit(1e-14) * z {
            continue;
        }
        let v = e.vectors.column(i);
        for (g, d) in grad.iter_mut().zip(dirs) {
            *g += w / z * (v.adjoint() * d * v)[(0, 0)].re;
        }
    }
    (value, lmin, grad)
}

fn project<R: Real>(t: &mut [R], radius: Option<R>) {
    if let Some(r) = radius {
        let n = t.iter().fold(R::zero(), |a, &x| a + x * x).sqrt();
        if n > r {
            t.iter_mut().for_each(|x| *x *= r / n);
        }
    }
}

/// Maximizes `λ_min(H₀ + Σ t_k H_k)`, optionally over the ball `‖t‖ ≤ radius`.
pub fn maximize_min_eigenvalue<R: Real>(h0: &CMat<R>, dirs: &[CMat<R>], radius: Option<R>, start: Vec<R>) -> MinEigMax<R> {
    let mut t = start;
    project(&mut t, radius);
    let mut best = MinEigMax { value: linalg::min_eigenvalue(&assemble(h0, dirs, &t)), t: t.clone() };
    if dirs.is_empty() {
        return best;
    }
    let scale = dirs.iter().fold(linalg::opnorm(h0), |m, d| m.max(linalg::opnorm(d))).max(R::lit(1e-12));
    let mut mu = scale * R::lit(0.1);
    let mut step = R::one();
    for _round in 0..12 {
        for _ in 0..60 {
            let (val, lmin, grad) = smoothed(h0, dirs, &t, mu);
            if lmin > best.value {
                best = MinEigMax { t: t.clone(), value: lmin };
            }
            let gnorm = grad.iter().fold(R::zero(), |a, &g| a + g * g).sqrt();
            if gnorm <= R::lit(1e-14) {
                break;
            }
            let mut accepted = false;
            let mut s = step;
            for _ in 0..30 {
                let mut cand: Vec<R> = t.iter().zip(&grad).map(|(&x, &g)| x + s * g / gnorm).collect();
                project(&mut cand, radius);
                let (cval, clmin, _) = smoothed(h0, dirs, &cand, mu);
                if cval > val {
                    if clmin > best.value {
                        best = MinEigMax { t: cand.clone(), value: clmin };
                    }
                    t = cand;
                    step = s * R::lit(1.5);
                    accepted = true;
                    break;
                }
                s *= R::lit(0.5);
            }
            if !accepted {
                break;
            }
        }
        mu *= R::lit(0.25);
    }
    best
}
