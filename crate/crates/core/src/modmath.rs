//! Arithmetic in the prime field `Z_N` and Korobov generating vectors.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest admissible modulus (exclusive). Keeps every product of two residues
/// inside a `u64`.
pub const MAX_PRIME: u64 = 1 << 31;

/// Deterministic primality by trial division.
pub fn is_prime(n: u64) -> Result<bool> {
    if n < 2 {
        return Err(Error::invalid(format!("primality is defined for n >= 2, got {n}")));
    }
    if n < 4 {
        return Ok(true);
    }
    if n % 2 == 0 {
        return Ok(false);
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return Ok(false);
        }
        d += 2;
    }
    Ok(true)
}

#[inline]
pub fn mul_mod(a: u64, b: u64, n: u64) -> u64 {
    // n < 2^31 so (a mod n)(b mod n) < 2^62
    ((a % n) * (b % n)) % n
}

pub fn pow_mod(base: u64, mut exp: u64, n: u64) -> u64 {
    if n == 1 {
        return 0;
    }
    let mut acc = 1u64;
    let mut b = base % n;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, b, n);
        }
        b = mul_mod(b, b, n);
        exp >>= 1;
    }
    acc
}

/// Reduce a signed integer into `{0, ..., n-1}`.
#[inline]
pub fn reduce(k: i64, n: u64) -> u64 {
    k.rem_euclid(n as i64) as u64
}

/// The prime modulus `N`, dimension `s`, and lattice count `M` shared by every
/// construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawContext", into = "RawContext")]
pub struct PrimeContext {
    n_prime: u64,
    dim: usize,
    num_lattices: u64,
}

#[derive(Serialize, Deserialize)]
struct RawContext {
    n_prime: u64,
    dim: usize,
    num_lattices: Option<u64>,
    #[serde(default, skip_deserializing)]
    n_tot: u64,
}

impl TryFrom<RawContext> for PrimeContext {
    type Error = Error;

    fn try_from(raw: RawContext) -> Result<Self> {
        match raw.num_lattices {
            Some(m) => PrimeContext::new(raw.n_prime, raw.dim, m),
            None => PrimeContext::with_default_lattices(raw.n_prime, raw.dim),
        }
    }
}

impl From<PrimeContext> for RawContext {
    fn from(ctx: PrimeContext) -> Self {
        RawContext {
            n_prime: ctx.n_prime,
            dim: ctx.dim,
            num_lattices: Some(ctx.num_lattices),
            n_tot: ctx.n_tot(),
        }
    }
}

impl PrimeContext {
    pub fn new(n_prime: u64, dim: usize, num_lattices: u64) -> Result<Self> {
        if n_prime >= MAX_PRIME {
            return Err(Error::invalid(format!("modulus {n_prime} must be below 2^31")));
        }
        if n_prime < 2 || !is_prime(n_prime)? {
            return Err(Error::invalid(format!("{n_prime} is not prime")));
        }
        if dim == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        if num_lattices == 0 || num_lattices > n_prime - 1 {
            return Err(Error::invalid(format!(
                "number of lattices must lie in 1..={}, got {num_lattices}",
                n_prime - 1
            )));
        }
        Ok(PrimeContext {
            n_prime,
            dim,
            num_lattices,
        })
    }

    /// `M = N - 1`, the setting of the main theorems.
    pub fn with_default_lattices(n_prime: u64, dim: usize) -> Result<Self> {
        if n_prime < 2 {
            return Err(Error::invalid(format!("{n_prime} is not prime")));
        }
        Self::new(n_prime, dim, n_prime - 1)
    }

    pub fn n_prime(&self) -> u64 {
        self.n_prime
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_lattices(&self) -> u64 {
        self.num_lattices
    }

    /// Total point count `M * N` of a multiset union, counting multiplicity.
    pub fn n_tot(&self) -> u64 {
        self.num_lattices * self.n_prime
    }

    pub(crate) fn check_generator(&self, z: u64) -> Result<()> {
        if z == 0 || z >= self.n_prime {
            return Err(Error::invalid(format!(
                "generator z = {z} outside 1..={}",
                self.n_prime - 1
            )));
        }
        Ok(())
    }
}

/// `a(z) = (1, z, z^2, ..., z^{s-1}) mod N`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GeneratorVector {
    pub z: u64,
    pub components: Vec<u64>,
}

pub fn korobov_vector(z: u64, ctx: &PrimeContext) -> Result<GeneratorVector> {
    ctx.check_generator(z)?;
    let n = ctx.n_prime();
    let mut components = Vec::with_capacity(ctx.dim());
    let mut power = 1u64;
    for _ in 0..ctx.dim() {
        components.push(power);
        power = mul_mod(power, z, n);
    }
    Ok(GeneratorVector { z, components })
}
