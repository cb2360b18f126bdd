//! Korobov lattice point sets, random shifts and multiset unions.
//!
//! Grid points are stored as integer numerators over `N`; real coordinates
//! appear only after a continuous shift. Point sets are multisets: duplicates
//! are kept and every count includes multiplicity.
//!
//! # Random streams
//!
//! All randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`). A
//! construction with master seed `seed` and trial index `t` draws lattice
//! `r` (0-based) from the generator seeded with `seed_from_u64(seed)` and
//! positioned on stream `t * M + r`. Each lattice stream first yields its
//! generator (when generators are random, uniform on `1..=M`) and then its
//! shift coordinates in order. Streams are independent, so trials and
//! lattices can be generated in any order or in parallel.

use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::modmath::{korobov_vector, PrimeContext};
use crate::{Error, Result};

/// Point set on the grid `{0, 1/N, ..., (N-1)/N}^s`, stored as numerators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridPointSet {
    n_prime: u64,
    dim: usize,
    numerators: Vec<u32>,
}

impl GridPointSet {
    /// Build from a flat row-major numerator buffer.
    pub fn from_flat(n_prime: u64, dim: usize, numerators: Vec<u32>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        if numerators.len() % dim != 0 {
            return Err(Error::invalid("numerator buffer is not a whole number of points"));
        }
        if let Some(bad) = numerators.iter().find(|&&v| u64::from(v) >= n_prime) {
            return Err(Error::invalid(format!("numerator {bad} outside 0..{n_prime}")));
        }
        Ok(GridPointSet {
            n_prime,
            dim,
            numerators,
        })
    }

    pub fn n_prime(&self) -> u64 {
        self.n_prime
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.numerators.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.numerators.is_empty()
    }

    pub fn points(&self) -> std::slice::ChunksExact<'_, u32> {
        self.numerators.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[u32] {
        &self.numerators
    }

    pub fn to_real(&self) -> RealPointSet {
        let n = self.n_prime as f64;
        RealPointSet {
            dim: self.dim,
            coords: self.numerators.iter().map(|&v| f64::from(v) / n).collect(),
        }
    }
}

/// Point set with real coordinates in `[0, 1)^s`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealPointSet {
    dim: usize,
    coords: Vec<f64>,
}

impl RealPointSet {
    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        if coords.len() % dim != 0 {
            return Err(Error::invalid("coordinate buffer is not a whole number of points"));
        }
        if let Some(bad) = coords.iter().find(|v| !(0.0..1.0).contains(*v)) {
            return Err(Error::invalid(format!("coordinate {bad} outside [0, 1)")));
        }
        Ok(RealPointSet { dim, coords })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn points(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.coords
    }
}

/// A homogeneous multiset of points.
#[derive(Debug, Clone, PartialEq)]
pub enum PointSet {
    Grid(GridPointSet),
    Real(RealPointSet),
}

impl PointSet {
    pub fn dim(&self) -> usize {
        match self {
            PointSet::Grid(g) => g.dim(),
            PointSet::Real(r) => r.dim(),
        }
    }

    /// Cardinality counting multiplicity.
    pub fn len(&self) -> usize {
        match self {
            PointSet::Grid(g) => g.len(),
            PointSet::Real(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_grid(&self) -> bool {
        matches!(self, PointSet::Grid(_))
    }

    /// Real coordinates of every point, converting grid numerators to `v / N`.
    pub fn to_real(&self) -> RealPointSet {
        match self {
            PointSet::Grid(g) => g.to_real(),
            PointSet::Real(r) => r.clone(),
        }
    }
}

/// Shift by a vector in `[0, 1)^s`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousShift(Vec<f64>);

impl ContinuousShift {
    pub fn new(delta: Vec<f64>) -> Result<Self> {
        if let Some(bad) = delta.iter().find(|v| !(0.0..1.0).contains(*v)) {
            return Err(Error::invalid(format!("shift coordinate {bad} outside [0, 1)")));
        }
        Ok(ContinuousShift(delta))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Shift by a grid vector, given by numerators over `N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteShift {
    n_prime: u64,
    numerators: Vec<u32>,
}

impl DiscreteShift {
    pub fn new(n_prime: u64, numerators: Vec<u32>) -> Result<Self> {
        if let Some(bad) = numerators.iter().find(|&&v| u64::from(v) >= n_prime) {
            return Err(Error::invalid(format!("shift numerator {bad} outside 0..{n_prime}")));
        }
        Ok(DiscreteShift {
            n_prime,
            numerators,
        })
    }

    pub fn numerators(&self) -> &[u32] {
        &self.numerators
    }

    /// The shift that undoes this one.
    pub fn inverse(&self) -> DiscreteShift {
        let n = self.n_prime as u32;
        DiscreteShift {
            n_prime: self.n_prime,
            numerators: self.numerators.iter().map(|&v| (n - v) % n).collect(),
        }
    }
}

/// `P_N(z)`: the `N` points `n * a(z) mod N` for `n = 0, ..., N-1`.
pub fn generate_korobov(z: u64, ctx: &PrimeContext) -> Result<GridPointSet> {
    let a = korobov_vector(z, ctx)?;
    let n = ctx.n_prime();
    let dim = ctx.dim();
    let mut numerators = Vec::with_capacity(n as usize * dim);
    for i in 0..n {
        for &aj in &a.components {
            numerators.push((i * aj % n) as u32);
        }
    }
    Ok(GridPointSet {
        n_prime: n,
        dim,
        numerators,
    })
}

pub fn shift_discrete(p: &GridPointSet, d: &DiscreteShift) -> Result<GridPointSet> {
    if d.n_prime != p.n_prime || d.numerators.len() != p.dim {
        return Err(Error::invalid(format!(
            "shift (N = {}, s = {}) does not match point set (N = {}, s = {})",
            d.n_prime,
            d.numerators.len(),
            p.n_prime,
            p.dim
        )));
    }
    let n = p.n_prime as u32;
    let numerators = p
        .numerators
        .iter()
        .zip(d.numerators.iter().cycle())
        .map(|(&x, &dx)| {
            let y = x + dx;
            if y >= n {
                y - n
            } else {
                y
            }
        })
        .collect();
    Ok(GridPointSet {
        n_prime: p.n_prime,
        dim: p.dim,
        numerators,
    })
}

/// Fractional part of `x + d`, kept inside `[0, 1)`.
#[inline]
pub fn wrap_add(x: f64, d: f64) -> f64 {
    let y = x + d;
    let r = y - y.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

pub fn shift_continuous(p: &PointSet, d: &ContinuousShift) -> Result<RealPointSet> {
    if d.0.len() != p.dim() {
        return Err(Error::invalid(format!(
            "shift has dimension {} but points have dimension {}",
            d.0.len(),
            p.dim()
        )));
    }
    let dim = p.dim();
    let coords = match p {
        PointSet::Grid(g) => {
            let n = g.n_prime as f64;
            g.numerators
                .iter()
                .zip(d.0.iter().cycle())
                .map(|(&v, &dj)| wrap_add(f64::from(v) / n, dj))
                .collect()
        }
        PointSet::Real(r) => r
            .coords
            .iter()
            .zip(d.0.iter().cycle())
            .map(|(&x, &dj)| wrap_add(x, dj))
            .collect(),
    };
    Ok(RealPointSet { dim, coords })
}

/// Concatenate point sets, keeping multiplicity.
pub fn multiset_union(parts: &[PointSet]) -> Result<PointSet> {
    let first = parts
        .first()
        .ok_or_else(|| Error::invalid("multiset union of zero parts"))?;
    let dim = first.dim();
    match first {
        PointSet::Grid(g0) => {
            let mut numerators = Vec::new();
            for part in parts {
                match part {
                    PointSet::Grid(g) if g.n_prime == g0.n_prime && g.dim == dim => {
                        numerators.extend_from_slice(&g.numerators)
                    }
                    _ => return Err(Error::invalid("union parts differ in representation, modulus or dimension")),
                }
            }
            Ok(PointSet::Grid(GridPointSet {
                n_prime: g0.n_prime,
                dim,
                numerators,
            }))
        }
        PointSet::Real(_) => {
            let mut coords = Vec::new();
            for part in parts {
                match part {
                    PointSet::Real(r) if r.dim == dim => coords.extend_from_slice(&r.coords),
                    _ => return Err(Error::invalid("union parts differ in representation or dimension")),
                }
            }
            Ok(PointSet::Real(RealPointSet { dim, coords }))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorMode {
    /// `z_1, ..., z_M` i.i.d. uniform on `{1, ..., M}`.
    Random,
    /// `z_r = r` for `r = 1, ..., M`.
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ShiftMode {
    /// Uniform on `[0, 1)^s`.
    Continuous,
    /// Uniform on the grid `Γ^s`.
    Discrete,
}

impl FromStr for GeneratorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(GeneratorMode::Random),
            "fixed" => Ok(GeneratorMode::Fixed),
            _ => Err(Error::Parse(format!("unknown generator mode `{s}`"))),
        }
    }
}

impl FromStr for ShiftMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "continuous" => Ok(ShiftMode::Continuous),
            "discrete" => Ok(ShiftMode::Discrete),
            _ => Err(Error::Parse(format!("unknown shift mode `{s}`"))),
        }
    }
}

/// The ChaCha8 stream for one lattice of one trial.
pub fn lattice_rng(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

/// One sampled construction: the generators used and the resulting union.
#[derive(Debug, Clone, PartialEq)]
pub struct Construction {
    pub generators: Vec<u64>,
    pub points: PointSet,
}

/// Draw one randomized construction; identical to trial 0 of
/// [`sample_trial_construction`].
pub fn sample_construction(
    ctx: &PrimeContext,
    generator_mode: GeneratorMode,
    shift_mode: ShiftMode,
    seed: u64,
) -> Result<PointSet> {
    sample_trial_construction(ctx, generator_mode, shift_mode, seed, 0).map(|c| c.points)
}

pub fn sample_trial_construction(
    ctx: &PrimeContext,
    generator_mode: GeneratorMode,
    shift_mode: ShiftMode,
    master_seed: u64,
    trial_index: u64,
) -> Result<Construction> {
    let m = ctx.num_lattices();
    let n = ctx.n_prime();
    let dim = ctx.dim();
    let mut generators = Vec::with_capacity(m as usize);
    let mut parts = Vec::with_capacity(m as usize);
    for r in 0..m {
        let stream = trial_index.wrapping_mul(m).wrapping_add(r);
        let mut rng = lattice_rng(master_seed, stream);
        let z = match generator_mode {
            GeneratorMode::Random => rng.gen_range(1..=m),
            GeneratorMode::Fixed => r + 1,
        };
        let lattice = generate_korobov(z, ctx)?;
        let shifted = match shift_mode {
            ShiftMode::Discrete => {
                let d: Vec<u32> = (0..dim).map(|_| rng.gen_range(0..n) as u32).collect();
                PointSet::Grid(shift_discrete(&lattice, &DiscreteShift::new(n, d)?)?)
            }
            ShiftMode::Continuous => {
                let d: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
                PointSet::Real(shift_continuous(
                    &PointSet::Grid(lattice),
                    &ContinuousShift::new(d)?,
                )?)
            }
        };
        generators.push(z);
        parts.push(shifted);
    }
    Ok(Construction {
        generators,
        points: multiset_union(&parts)?,
    })
}

const CSV_MAGIC: &str = "# korobov-pointset";

/// Write a point set as CSV.
///
/// The first line is a metadata comment
/// `# korobov-pointset representation=<grid|real> n_prime=<N> dim=<s> count=<n>`
/// (`n_prime` is omitted for real sets when unknown), followed by a header
/// `x1,...,xs` and one row per point. Grid rows hold integer numerators; real
/// rows hold shortest round-trip decimal floats.
pub fn write_csv<W: Write>(mut out: W, points: &PointSet, n_prime: Option<u64>) -> Result<()> {
    let dim = points.dim();
    let (kind, n) = match points {
        PointSet::Grid(g) => ("grid", Some(g.n_prime)),
        PointSet::Real(_) => ("real", n_prime),
    };
    write!(out, "{CSV_MAGIC} representation={kind}")?;
    if let Some(n) = n {
        write!(out, " n_prime={n}")?;
    }
    writeln!(out, " dim={dim} count={}", points.len())?;
    let header: Vec<String> = (1..=dim).map(|j| format!("x{j}")).collect();
    writeln!(out, "{}", header.join(","))?;
    match points {
        PointSet::Grid(g) => {
            for p in g.points() {
                let row: Vec<String> = p.iter().map(u32::to_string).collect();
                writeln!(out, "{}", row.join(","))?;
            }
        }
        PointSet::Real(r) => {
            for p in r.points() {
                let row: Vec<String> = p.iter().map(f64::to_string).collect();
                writeln!(out, "{}", row.join(","))?;
            }
        }
    }
    Ok(())
}

/// Parse CSV written by [`write_csv`]. Returns the point set and the modulus
/// recorded in the metadata line, if any.
pub fn read_csv<R: BufRead>(input: R) -> Result<(PointSet, Option<u64>)> {
    let mut lines = input.lines();
    let meta = lines
        .next()
        .ok_or_else(|| Error::Parse("empty point-set file".into()))??;
    let rest = meta
        .strip_prefix(CSV_MAGIC)
        .ok_or_else(|| Error::Parse("missing `# korobov-pointset` metadata line".into()))?;
    let mut kind = None;
    let mut n_prime = None;
    let mut dim = None;
    let mut count = None;
    for field in rest.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("malformed metadata field `{field}`")))?;
        let num = || {
            value
                .parse::<u64>()
                .map_err(|_| Error::Parse(format!("bad value for `{key}`: `{value}`")))
        };
        match key {
            "representation" => kind = Some(value.to_string()),
            "n_prime" => n_prime = Some(num()?),
            "dim" => dim = Some(num()? as usize),
            "count" => count = Some(num()? as usize),
            _ => {}
        }
    }
    let dim = dim.ok_or_else(|| Error::Parse("metadata lacks `dim`".into()))?;
    lines
        .next()
        .ok_or_else(|| Error::Parse("missing column header".into()))??;

    let rows = lines.filter(|l| l.as_ref().map_or(true, |l| !l.trim().is_empty()));
    let points = match kind.as_deref() {
        Some("grid") => {
            let n = n_prime.ok_or_else(|| Error::Parse("grid file lacks `n_prime`".into()))?;
            let mut flat = Vec::new();
            for line in rows {
                let line = line?;
                let before = flat.len();
                for cell in line.split(',') {
                    flat.push(
                        cell.trim()
                            .parse::<u32>()
                            .map_err(|_| Error::Parse(format!("bad numerator `{cell}`")))?,
                    );
                }
                if flat.len() - before != dim {
                    return Err(Error::Parse(format!("row `{line}` does not have {dim} columns")));
                }
            }
            PointSet::Grid(GridPointSet::from_flat(n, dim, flat)?)
        }
        Some("real") => {
            let mut flat = Vec::new();
            for line in rows {
                let line = line?;
                let before = flat.len();
                for cell in line.split(',') {
                    flat.push(
                        cell.trim()
                            .parse::<f64>()
                            .map_err(|_| Error::Parse(format!("bad coordinate `{cell}`")))?,
                    );
                }
                if flat.len() - before != dim {
                    return Err(Error::Parse(format!("row `{line}` does not have {dim} columns")));
                }
            }
            PointSet::Real(RealPointSet::from_flat(dim, flat)?)
        }
        _ => return Err(Error::Parse("metadata lacks a valid `representation`".into())),
    };
    if let Some(count) = count {
        if count != points.len() {
            return Err(Error::Parse(format!(
                "metadata says {count} points but {} rows were read",
                points.len()
            )));
        }
    }
    Ok((points, n_prime))
}
