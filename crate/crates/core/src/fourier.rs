//! Fourier coefficients of anchored-box indicators.
//!
//! The continuous coefficients expand `1_[0,b)` on the torus over `Z^s`; the
//! discrete ones expand it on the grid `Γ^s` over `{0, ..., N-1}^s`. Both
//! factor over coordinates, so everything here is built from the 1-d values.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::modmath::PrimeContext;
use crate::{checked_pow, Error, Limits, Result};

/// The anchored box `J(b) = [0, b)` with corner `b ∈ [0, 1]^s`.
///
/// Grid boxes additionally carry the integer numerators of `b` over `N`, so
/// counting and volumes on them are exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchoredBox {
    corner: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    numerators: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n_prime: Option<u64>,
}

impl AnchoredBox {
    pub fn new(corner: Vec<f64>) -> Result<Self> {
        if corner.is_empty() {
            return Err(Error::invalid("box corner must have at least one coordinate"));
        }
        if let Some(bad) = corner.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::invalid(format!("box corner coordinate {bad} outside [0, 1]")));
        }
        Ok(AnchoredBox {
            corner,
            numerators: None,
            n_prime: None,
        })
    }

    /// A box with corner in `Γ̄^s`, i.e. `b_j = numerators[j] / N` with
    /// numerators in `0..=N`.
    pub fn grid(numerators: Vec<u32>, n_prime: u64) -> Result<Self> {
        if numerators.is_empty() {
            return Err(Error::invalid("box corner must have at least one coordinate"));
        }
        if let Some(bad) = numerators.iter().find(|&&m| u64::from(m) > n_prime) {
            return Err(Error::invalid(format!("box numerator {bad} outside 0..={n_prime}")));
        }
        let n = n_prime as f64;
        Ok(AnchoredBox {
            corner: numerators.iter().map(|&m| f64::from(m) / n).collect(),
            numerators: Some(numerators),
            n_prime: Some(n_prime),
        })
    }

    /// The unit cube `[0, 1)^s`.
    pub fn unit(dim: usize) -> Self {
        AnchoredBox {
            corner: vec![1.0; dim],
            numerators: None,
            n_prime: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.corner.len()
    }

    pub fn corner(&self) -> &[f64] {
        &self.corner
    }

    /// Grid numerators and modulus, when the corner lies on `Γ̄^s`.
    pub fn grid_numerators(&self) -> Option<(&[u32], u64)> {
        match (&self.numerators, self.n_prime) {
            (Some(m), Some(n)) => Some((m.as_slice(), n)),
            _ => None,
        }
    }

    /// Grid numerators over `n`, or an error when the box is not a grid box for
    /// that modulus.
    pub(crate) fn numerators_for(&self, n: u64) -> Result<&[u32]> {
        match self.grid_numerators() {
            Some((m, bn)) if bn == n => Ok(m),
            Some((_, bn)) => Err(Error::invalid(format!(
                "box lies on the grid of modulus {bn}, expected {n}"
            ))),
            None => Err(Error::invalid("box corner is not on the grid Γ̄^s")),
        }
    }

    /// Lebesgue measure `Π b_j`, from exact numerators on grid boxes.
    pub fn volume(&self) -> f64 {
        if let Some((m, n)) = self.grid_numerators() {
            let denom = checked_pow(n, m.len()).map(u128::from);
            let numer = m
                .iter()
                .try_fold(1u128, |acc, &v| acc.checked_mul(u128::from(v)));
            if let (Some(numer), Some(denom)) = (numer, denom) {
                return numer as f64 / denom as f64;
            }
        }
        self.corner.iter().product()
    }
}

/// `e^{-2πi m / N}` with the exponent reduced mod `N` first.
#[inline]
pub fn unit_root(m: i64, n: u64) -> Complex64 {
    let r = m.rem_euclid(n as i64) as f64;
    Complex64::from_polar(1.0, -2.0 * PI * r / n as f64)
}

/// Continuous 1-d coefficient `c_k(b)`: `b` for `k = 0`, else
/// `(1 - e^{-2πikb}) / (2πik)`.
pub fn cont_coeff_1d(k: i64, b: f64) -> Result<Complex64> {
    if !(0.0..=1.0).contains(&b) {
        return Err(Error::invalid(format!("box coordinate {b} outside [0, 1]")));
    }
    Ok(cont_coeff_1d_unchecked(k, b))
}

#[inline]
fn cont_coeff_1d_unchecked(k: i64, b: f64) -> Complex64 {
    if k == 0 {
        return Complex64::new(b, 0.0);
    }
    // e^{-2πikb} only depends on kb mod 1
    let phase = (k as f64 * b).rem_euclid(1.0);
    let numer = Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -2.0 * PI * phase);
    numer / Complex64::new(0.0, 2.0 * PI * k as f64)
}

/// `|c_k(b)|^2 = sin^2(πkb) / (πk)^2` for `k != 0`, `b^2` for `k = 0`.
#[inline]
pub fn cont_coeff_sq_1d(k: i64, b: f64) -> f64 {
    if k == 0 {
        return b * b;
    }
    let phase = (k as f64 * b).rem_euclid(1.0);
    let s = (PI * phase).sin() / (PI * k as f64);
    s * s
}

pub fn cont_coeff(k: &[i64], b: &AnchoredBox) -> Result<Complex64> {
    if k.len() != b.dim() {
        return Err(Error::invalid(format!(
            "frequency has dimension {} but box has dimension {}",
            k.len(),
            b.dim()
        )));
    }
    Ok(k.iter()
        .zip(b.corner())
        .map(|(&kj, &bj)| cont_coeff_1d_unchecked(kj, bj))
        .product())
}

/// Discrete 1-d coefficient `C_k(m/N)`.
pub fn disc_coeff_1d(k: u64, b_num: u64, n_prime: u64) -> Result<Complex64> {
    if n_prime < 2 {
        return Err(Error::invalid("modulus must be at least 2"));
    }
    if k >= n_prime {
        return Err(Error::invalid(format!("frequency {k} outside 0..{n_prime}")));
    }
    if b_num > n_prime {
        return Err(Error::invalid(format!("box numerator {b_num} outside 0..={n_prime}")));
    }
    Ok(disc_coeff_1d_unchecked(k, b_num, n_prime))
}

#[inline]
fn disc_coeff_1d_unchecked(k: u64, b_num: u64, n: u64) -> Complex64 {
    let nf = n as f64;
    if k == 0 {
        return Complex64::new(b_num as f64 / nf, 0.0);
    }
    let one = Complex64::new(1.0, 0.0);
    let top = one - unit_root((k * b_num % n) as i64, n);
    let bottom = one - unit_root(k as i64, n);
    top / bottom / nf
}

pub fn disc_coeff(k: &[u64], b: &AnchoredBox, n_prime: u64) -> Result<Complex64> {
    let m = b.numerators_for(n_prime)?;
    if k.len() != m.len() {
        return Err(Error::invalid(format!(
            "frequency has dimension {} but box has dimension {}",
            k.len(),
            m.len()
        )));
    }
    if let Some(bad) = k.iter().find(|&&kj| kj >= n_prime) {
        return Err(Error::invalid(format!("frequency component {bad} outside 0..{n_prime}")));
    }
    Ok(k.iter()
        .zip(m)
        .map(|(&kj, &mj)| disc_coeff_1d_unchecked(kj, u64::from(mj), n_prime))
        .product())
}

/// Odometer over `{0, ..., n-1}^dim`, calling `f` on each index vector in
/// lexicographic order (last coordinate fastest).
pub(crate) fn for_each_index(n: u64, dim: usize, mut f: impl FnMut(&[u64])) {
    let mut idx = vec![0u64; dim];
    loop {
        f(&idx);
        let mut j = dim;
        loop {
            if j == 0 {
                return;
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < n {
                break;
            }
            idx[j] = 0;
        }
    }
}

/// `|Σ_{k ∈ D_N^s \ {0}} |C_k(b)|^2 - λ(b)(1 - λ(b))|`, by exhaustive sum.
pub fn parseval_discrete_residual(b: &AnchoredBox, ctx: &PrimeContext, limits: &Limits) -> Result<f64> {
    let n = ctx.n_prime();
    let m = b.numerators_for(n)?;
    if m.len() != ctx.dim() {
        return Err(Error::invalid("box dimension does not match context"));
    }
    let total = checked_pow(n, ctx.dim()).filter(|&t| t <= limits.frequencies);
    if total.is_none() {
        return Err(Error::capacity(
            "discrete Parseval sum",
            format!("{n}^{}", ctx.dim()),
            limits.frequencies,
        ));
    }
    // 1-d tables of |C_k(b_j)|^2
    let tables: Vec<Vec<f64>> = m
        .iter()
        .map(|&mj| {
            (0..n)
                .map(|k| disc_coeff_1d_unchecked(k, u64::from(mj), n).norm_sqr())
                .collect()
        })
        .collect();
    let mut sum = 0.0;
    for_each_index(n, ctx.dim(), |k| {
        if k.iter().all(|&kj| kj == 0) {
            return;
        }
        sum += k
            .iter()
            .zip(&tables)
            .map(|(&kj, t)| t[kj as usize])
            .product::<f64>();
    });
    let vol = b.volume();
    Ok((sum - vol * (1.0 - vol)).abs())
}

/// `Σ_{k ∈ {-K..K}^s \ {0}} |c_k(b)|^2`, a lower bound for `λ(b)(1 - λ(b))`.
///
/// Evaluated as `Π_j (Σ_{|k| ≤ K} |c_k(b_j)|^2) - Π_j b_j^2`, which equals the
/// box sum term by term.
pub fn parseval_continuous_truncated(b: &AnchoredBox, k_max: u64) -> f64 {
    let k_max = k_max as i64;
    let full: f64 = b
        .corner()
        .iter()
        .map(|&bj| {
            let tail: f64 = (1..=k_max).map(|k| cont_coeff_sq_1d(k, bj)).sum();
            bj * bj + 2.0 * tail
        })
        .product();
    let zero: f64 = b.corner().iter().map(|&bj| bj * bj).product();
    (full - zero).max(0.0)
}

/// Truncated aliasing remainder
/// `Σ_{h ∈ {-H..H}^{|u|} \ {0}} Π_{j ∈ u} |c_{N h_j}(b_j)|^2`, where `u` is
/// the set of coordinates with `b_j < 1`.
///
/// The per-coordinate tail beyond `H` is at most `2 / (π^2 N^2 H)`; callers
/// that need a rigorous upper bound add it themselves.
pub fn remainder_term(b: &AnchoredBox, n_prime: u64, h_max: u64) -> f64 {
    let n = n_prime as i64;
    let h_max = h_max as i64;
    let active: Vec<f64> = b.corner().iter().copied().filter(|&bj| bj < 1.0).collect();
    if active.is_empty() {
        return 0.0;
    }
    let full: f64 = active
        .iter()
        .map(|&bj| {
            let aliased: f64 = (1..=h_max).map(|h| cont_coeff_sq_1d(n * h, bj)).sum();
            bj * bj + 2.0 * aliased
        })
        .product();
    let zero: f64 = active.iter().map(|&bj| bj * bj).product();
    (full - zero).max(0.0)
}
