//! Small Bernstein-form helpers: de Casteljau evaluation, products and
//! antiderivatives of scalar and vector polynomials on `[0, 1]`.

use std::ops::{Add, Mul};

use crate::scalar::Real;

/// de Casteljau evaluation of a Bernstein polynomial with coefficients `c`.
pub fn de_casteljau<T, V, const N: usize>(c: &[V; N], t: T) -> V
where
    T: Real,
    V: Copy + Add<Output = V> + Mul<T, Output = V>,
{
    let mut b = *c;
    let s = T::one() - t;
    for r in 1..N {
        for i in 0..N - r {
            b[i] = b[i] * s + b[i + 1] * t;
        }
    }
    b[0]
}

/// Binomial coefficient as a real number (small arguments only).
pub fn binomial<T: Real>(n: usize, k: usize) -> T {
    let mut r = 1u64;
    for i in 0..k {
        r = r * (n - i) as u64 / (i + 1) as u64;
    }
    T::lit(r as f64)
}

/// Bernstein coefficients (degree 8) of the product of two quartics.
pub fn product_quartic<T: Real>(a: &[T; 5], b: &[T; 5]) -> [T; 9] {
    let mut out = [T::zero(); 9];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] = out[i + j] + binomial::<T>(4, i) * binomial::<T>(4, j) * ai * bj;
        }
    }
    for (k, o) in out.iter_mut().enumerate() {
        *o = *o / binomial::<T>(8, k);
    }
    out
}

/// Bernstein coefficients of `int_0^t p` for a quartic `p`; the result is a
/// quintic with a zero leading coefficient.
pub fn antiderivative_quartic<T: Real>(p: &[T; 5]) -> [T; 6] {
    let fifth = T::one() / T::lit(5.0);
    let mut out = [T::zero(); 6];
    for k in 1..6 {
        out[k] = out[k - 1] + p[k - 1] * fifth;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn monomial_eval(c: &[f64], t: f64) -> f64 {
        // expand the Bernstein basis directly
        let n = c.len() - 1;
        c.iter()
            .enumerate()
            .map(|(i, &ci)| ci * binomial::<f64>(n, i) * t.powi(i as i32) * (1.0 - t).powi((n - i) as i32))
            .sum()
    }

    #[test]
    fn casteljau_matches_basis_expansion() {
        let c = [1.0, -2.0, 0.5, 3.0, 4.0];
        for &t in &[0.0, 0.2, 0.5, 0.9, 1.0] {
            assert!((de_casteljau(&c, t) - monomial_eval(&c, t)).abs() < 1e-14);
        }
    }

    #[test]
    fn product_and_antiderivative() {
        let a: [f64; 5] = [1.0, 2.0, -1.0, 0.5, 3.0];
        let b: [f64; 5] = [0.3, -0.7, 2.0, 1.0, -1.5];
        let p = product_quartic(&a, &b);
        for &t in &[0.1, 0.37, 0.8] {
            let lhs = de_casteljau(&p, t);
            let rhs = de_casteljau(&a, t) * de_casteljau(&b, t);
            assert!((lhs - rhs).abs() < 1e-13);
        }
        // antiderivative checked against composite Simpson
        let s = antiderivative_quartic(&a);
        let n = 2000;
        let h = 0.6 / n as f64;
        let mut acc = de_casteljau(&a, 0.0) + de_casteljau(&a, 0.6);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * de_casteljau(&a, i as f64 * h);
        }
        assert!((de_casteljau(&s, 0.6) - acc * h / 3.0).abs() < 1e-12);
        assert_eq!(s[0], 0.0);
    }
}
