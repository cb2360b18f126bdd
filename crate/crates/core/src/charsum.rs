//! Character sums of Korobov lattices.
//!
//! `S_N(z, k) = (1/N) Σ_n e^{2πi n (k · a(z)) / N}` is a full sum of `N`-th
//! roots of unity, so it equals 1 when `k · a(z) ≡ 0 (mod N)` and 0 otherwise.
//! For `k ≢ 0` the congruence is a nonzero polynomial of degree below `s` in
//! `z`, hence has at most `s - 1` roots in `Z_N`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::modmath::{korobov_vector, mul_mod, reduce, PrimeContext};
use crate::pointset::generate_korobov;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CharSumResult {
    /// 1 iff `dot_product_residue == 0`.
    pub value: u8,
    /// `k · a(z) mod N`.
    pub dot_product_residue: u64,
}

fn check_dim(k: &[i64], ctx: &PrimeContext) -> Result<()> {
    if k.len() != ctx.dim() {
        return Err(Error::invalid(format!(
            "frequency has dimension {} but the context has dimension {}",
            k.len(),
            ctx.dim()
        )));
    }
    Ok(())
}

/// `k · a(z) mod N`, with `k` reduced componentwise.
fn dot_residue(k: &[i64], a: &[u64], n: u64) -> u64 {
    k.iter()
        .zip(a)
        .fold(0u64, |acc, (&kj, &aj)| (acc + mul_mod(reduce(kj, n), aj, n)) % n)
}

/// Indicator form of `S_N(z, k)`. Frequencies in `Z^s` are reduced mod `N`.
pub fn char_sum(z: u64, k: &[i64], ctx: &PrimeContext) -> Result<CharSumResult> {
    check_dim(k, ctx)?;
    let a = korobov_vector(z, ctx)?;
    let r = dot_residue(k, &a.components, ctx.n_prime());
    Ok(CharSumResult {
        value: u8::from(r == 0),
        dot_product_residue: r,
    })
}

/// `S_N(z, k)` summed directly over the lattice points `x_n` as
/// `(1/N) Σ_n e^{2πi k · x_n}`.
pub fn char_sum_oracle(z: u64, k: &[i64], ctx: &PrimeContext) -> Result<Complex64> {
    check_dim(k, ctx)?;
    let lattice = generate_korobov(z, ctx)?;
    let n = ctx.n_prime() as i64;
    let total: Complex64 = lattice
        .points()
        .map(|x| {
            let phase = k
                .iter()
                .zip(x)
                .fold(0i64, |acc, (&kj, &xj)| (acc + kj.rem_euclid(n) * i64::from(xj)).rem_euclid(n));
            Complex64::from_polar(1.0, 2.0 * PI * phase as f64 / n as f64)
        })
        .sum();
    Ok(total / n as f64)
}

/// `Σ_{r=1}^{M} 1{k · a(r) ≡ 0 mod N}` for a frequency not congruent to zero.
pub fn count_generator_hits(k: &[i64], ctx: &PrimeContext) -> Result<u64> {
    check_dim(k, ctx)?;
    let n = ctx.n_prime();
    let reduced: Vec<u64> = k.iter().map(|&kj| reduce(kj, n)).collect();
    if reduced.iter().all(|&kj| kj == 0) {
        return Err(Error::invalid(
            "frequency is congruent to zero mod N; the root bound does not apply",
        ));
    }
    Ok(count_hits_reduced(&reduced, ctx))
}

/// Root count for a frequency already in `D_N^s`. Horner evaluation of
/// `Σ_j k_j r^j` over `r = 1..=M`.
pub(crate) fn count_hits_reduced(k: &[u64], ctx: &PrimeContext) -> u64 {
    let n = ctx.n_prime();
    (1..=ctx.num_lattices())
        .filter(|&r| k.iter().rev().fold(0u64, |acc, &kj| (mul_mod(acc, r, n) + kj) % n) == 0)
        .count() as u64
}

/// `E_z |S_N(z, k)|^2` for `z` uniform on `{1, ..., M}`.
pub fn expected_sq_char_sum(k: &[i64], ctx: &PrimeContext) -> Result<f64> {
    Ok(count_generator_hits(k, ctx)? as f64 / ctx.num_lattices() as f64)
}
