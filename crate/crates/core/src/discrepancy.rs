//! Local discrepancy, the grid-restricted maximization with its `+ s/N`
//! bound, and an exact star discrepancy oracle over critical boxes.

use serde::Serialize;

use crate::fourier::AnchoredBox;
use crate::modmath::PrimeContext;
use crate::pointset::PointSet;
use crate::{checked_pow, Error, Limits, Result};

/// Result of a grid sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscrepancyReport {
    /// `max_{b ∈ Γ̄^s} |disc(P, J(b))|`.
    pub grid_max: f64,
    /// `grid_max + s/N`, an upper bound on the star discrepancy.
    pub upper_bound: f64,
    /// Exact star discrepancy, when requested.
    pub exact: Option<f64>,
    /// First corner (lexicographic) attaining `grid_max`.
    pub argmax_box: AnchoredBox,
}

pub fn volume(b: &AnchoredBox) -> f64 {
    b.volume()
}

/// `disc(P, J(b)) = #{x ∈ P : x ∈ [0, b)} / |P| - λ(b)`, with multiplicity.
///
/// Grid points against a grid box of the same modulus compare integer
/// numerators; otherwise coordinates are compared as floats.
pub fn local_disc(p: &PointSet, b: &AnchoredBox) -> Result<f64> {
    if p.is_empty() {
        return Err(Error::invalid("local discrepancy of an empty point set"));
    }
    if p.dim() != b.dim() {
        return Err(Error::invalid(format!(
            "point set has dimension {} but box has dimension {}",
            p.dim(),
            b.dim()
        )));
    }
    let total = p.len() as u64;
    match p {
        PointSet::Grid(g) if b.grid_numerators().is_some_and(|(_, n)| n == g.n_prime()) => {
            let m = b.numerators_for(g.n_prime())?;
            let count = g
                .points()
                .filter(|x| x.iter().zip(m).all(|(xj, mj)| xj < mj))
                .count() as u64;
            Ok(grid_disc(count, total, m, g.n_prime()))
        }
        _ => {
            let real = p.to_real();
            let corner = b.corner();
            let count = real
                .points()
                .filter(|x| x.iter().zip(corner).all(|(xj, bj)| xj < bj))
                .count();
            Ok(count as f64 / total as f64 - b.volume())
        }
    }
}

/// `count/total - Π m_j / N^s`, rounded once when the integers fit.
fn grid_disc(count: u64, total: u64, m: &[u32], n: u64) -> f64 {
    let exact = || -> Option<f64> {
        let ns = i128::from(checked_pow(n, m.len())?);
        let prod = m
            .iter()
            .try_fold(1i128, |acc, &v| acc.checked_mul(i128::from(v)))?;
        let diff = i128::from(count)
            .checked_mul(ns)?
            .checked_sub(i128::from(total).checked_mul(prod)?)?;
        let denom = i128::from(total).checked_mul(ns)?;
        Some(diff as f64 / denom as f64)
    };
    exact().unwrap_or_else(|| {
        let vol: f64 = m.iter().map(|&v| f64::from(v) / n as f64).product();
        count as f64 / total as f64 - vol
    })
}

/// Smallest `m ∈ {1..=N}` with `x < m/N` (floats compared exactly as the box
/// corners `m as f64 / N as f64` are).
fn real_bin(x: f64, n: u64) -> usize {
    let nf = n as f64;
    let mut m = ((x * nf).floor() as i64 + 1).clamp(1, n as i64) as u64;
    while m > 1 && x < (m - 1) as f64 / nf {
        m -= 1;
    }
    while m < n && x >= m as f64 / nf {
        m += 1;
    }
    m as usize
}

/// Exhaustive maximization of `|disc|` over corners `b ∈ Γ̄^s`.
///
/// Points are binned once; an `s`-fold prefix sum then gives the count of
/// every grid box, so the sweep costs `O((N+1)^s s)` after an `O(|P| s)` pass.
pub fn star_disc_grid(p: &PointSet, ctx: &PrimeContext, limits: &Limits) -> Result<DiscrepancyReport> {
    let n = ctx.n_prime();
    let dim = ctx.dim();
    if p.is_empty() {
        return Err(Error::invalid("star discrepancy of an empty point set"));
    }
    if p.dim() != dim {
        return Err(Error::invalid(format!(
            "point set has dimension {} but the context has dimension {dim}",
            p.dim()
        )));
    }
    let side = n + 1;
    let cells = checked_pow(side, dim).filter(|&c| c <= limits.grid_boxes);
    let Some(cells) = cells else {
        return Err(Error::capacity("grid sweep", format!("({n}+1)^{dim}"), limits.grid_boxes));
    };
    let side = side as usize;
    let mut counts = vec![0u64; cells as usize];

    // strides for row-major indexing, last coordinate fastest
    let mut strides = vec![1usize; dim];
    for j in (0..dim.saturating_sub(1)).rev() {
        strides[j] = strides[j + 1] * side;
    }
    match p {
        PointSet::Grid(g) if g.n_prime() == n => {
            for x in g.points() {
                let idx: usize = x.iter().zip(&strides).map(|(&v, st)| (v as usize + 1) * st).sum();
                counts[idx] += 1;
            }
        }
        PointSet::Grid(g) => {
            return Err(Error::invalid(format!(
                "grid point set has modulus {} but the context has {n}",
                g.n_prime()
            )))
        }
        PointSet::Real(r) => {
            for x in r.points() {
                let idx: usize = x.iter().zip(&strides).map(|(&v, st)| real_bin(v, n) * st).sum();
                counts[idx] += 1;
            }
        }
    }
    // cumulative sums along each axis: counts[m] = #{x : bin(x) <= m}
    for &stride in &strides {
        for idx in 0..counts.len() {
            if (idx / stride) % side != 0 {
                counts[idx] += counts[idx - stride];
            }
        }
    }

    let total = p.len() as i128;
    let ns = i128::from(checked_pow(n, dim).expect("N^s below the grid cap"));
    let mut best = -1i128;
    let mut best_idx = 0usize;
    let mut m = vec![0u64; dim];
    for (idx, &count) in counts.iter().enumerate() {
        let mut rem = idx;
        let mut prod = 1i128;
        for (mj, &stride) in m.iter_mut().zip(&strides) {
            *mj = (rem / stride) as u64;
            rem %= stride;
            prod *= i128::from(*mj);
        }
        let diff = (i128::from(count) * ns - total * prod).abs();
        if diff > best {
            best = diff;
            best_idx = idx;
        }
    }
    let grid_max = best as f64 / (total * ns) as f64;
    let argmax: Vec<u32> = strides
        .iter()
        .scan(best_idx, |rem, &stride| {
            let v = *rem / stride;
            *rem %= stride;
            Some(v as u32)
        })
        .collect();
    Ok(DiscrepancyReport {
        grid_max,
        upper_bound: grid_max + dim as f64 / n as f64,
        exact: None,
        argmax_box: AnchoredBox::grid(argmax, n)?,
    })
}

/// Exact star discrepancy `sup_b |disc(P, J(b))|` over all `b ∈ [0, 1]^s`.
///
/// The supremum is attained (or approached) at corners whose coordinates are
/// point coordinates or 1. At each such corner the routine evaluates
/// `λ(b) - #{x < b}/n` with the open count and `#{x ≤ b}/n - λ(b)` with the
/// closed count, the latter being the limit of open boxes shrinking onto `b`.
pub fn star_disc_exact(p: &PointSet, limits: &Limits) -> Result<f64> {
    if p.is_empty() {
        return Err(Error::invalid("star discrepancy of an empty point set"));
    }
    let real = p.to_real();
    let dim = real.dim();
    let n_pts = real.len();

    let mut candidates: Vec<Vec<f64>> = vec![Vec::new(); dim];
    for x in real.points() {
        for (c, &v) in candidates.iter_mut().zip(x) {
            c.push(v);
        }
    }
    for c in &mut candidates {
        c.push(1.0);
        c.sort_by(f64::total_cmp);
        c.dedup();
    }
    let boxes = candidates
        .iter()
        .try_fold(1u64, |acc, c| acc.checked_mul(c.len() as u64))
        .filter(|&b| b <= limits.critical_boxes);
    let Some(boxes) = boxes else {
        return Err(Error::capacity(
            "critical-box enumeration",
            format!("{} candidate corners", candidates.iter().map(|c| c.len().to_string()).collect::<Vec<_>>().join("x")),
            limits.critical_boxes,
        ));
    };

    let mut strides = vec![1usize; dim];
    for j in (0..dim.saturating_sub(1)).rev() {
        strides[j] = strides[j + 1] * candidates[j + 1].len();
    }
    // closed[i] = #{x : rank_j(x) <= i_j for all j}
    let mut closed = vec![0u64; boxes as usize];
    for x in real.points() {
        let idx: usize = x
            .iter()
            .zip(&candidates)
            .zip(&strides)
            .map(|((v, c), st)| {
                c.binary_search_by(|probe| probe.total_cmp(v)).expect("coordinate is a candidate") * st
            })
            .sum();
        closed[idx] += 1;
    }
    for (j, &stride) in strides.iter().enumerate() {
        let len = candidates[j].len();
        for idx in 0..closed.len() {
            if (idx / stride) % len != 0 {
                closed[idx] += closed[idx - stride];
            }
        }
    }

    let nf = n_pts as f64;
    let mut best = 0.0f64;
    let mut pos = vec![0usize; dim];
    for idx in 0..closed.len() {
        let mut rem = idx;
        let mut vol = 1.0;
        for ((pj, &stride), c) in pos.iter_mut().zip(&strides).zip(&candidates) {
            *pj = rem / stride;
            rem %= stride;
            vol *= c[*pj];
        }
        // open count: corners one rank lower in every coordinate
        let strict = if pos.contains(&0) {
            0
        } else {
            closed[idx - strides.iter().sum::<usize>()]
        };
        let over = closed[idx] as f64 / nf - vol;
        let under = vol - strict as f64 / nf;
        best = best.max(over).max(under);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::for_each_index;
    use crate::pointset::{
        generate_korobov, sample_construction, GeneratorMode, GridPointSet, RealPointSet, ShiftMode,
    };
    use proptest::prelude::*;

    fn grid(n: u64, dim: usize, v: Vec<u32>) -> PointSet {
        PointSet::Grid(GridPointSet::from_flat(n, dim, v).unwrap())
    }

    fn real(dim: usize, v: Vec<f64>) -> PointSet {
        PointSet::Real(RealPointSet::from_flat(dim, v).unwrap())
    }

    // recount every grid box from scratch
    fn naive_grid_max(p: &PointSet, n: u64, dim: usize) -> f64 {
        let mut best = 0.0f64;
        for_each_index(n + 1, dim, |m| {
            let b = AnchoredBox::grid(m.iter().map(|&v| v as u32).collect(), n).unwrap();
            best = best.max(local_disc(p, &b).unwrap().abs());
        });
        best
    }

    #[test]
    fn volume_examples() {
        assert_eq!(volume(&AnchoredBox::unit(3)), 1.0);
        assert_eq!(volume(&AnchoredBox::new(vec![0.0, 0.9]).unwrap()), 0.0);
        assert_eq!(volume(&AnchoredBox::grid(vec![3, 5], 7).unwrap()), 15.0 / 49.0);
    }

    #[test]
    fn local_disc_examples() {
        let gamma = grid(7, 1, (0..7).collect());
        for m in 0..=7 {
            let b = AnchoredBox::grid(vec![m], 7).unwrap();
            assert_eq!(local_disc(&gamma, &b).unwrap(), 0.0);
        }
        let single = grid(2, 1, vec![0]);
        assert_eq!(local_disc(&single, &AnchoredBox::new(vec![0.5]).unwrap()).unwrap(), 0.5);

        let p = real(2, vec![0.1, 0.2, 0.7, 0.99, 0.5, 0.0]);
        assert_eq!(local_disc(&p, &AnchoredBox::unit(2)).unwrap(), 0.0);
        assert!(local_disc(&real(2, vec![]), &AnchoredBox::unit(2)).is_err());
        assert!(local_disc(&p, &AnchoredBox::unit(3)).is_err());
    }

    #[test]
    fn half_open_boundary() {
        // a point on the upper face is outside
        let p = grid(5, 1, vec![2]);
        let b = AnchoredBox::grid(vec![2], 5).unwrap();
        assert_eq!(local_disc(&p, &b).unwrap(), -0.4);
        let b = AnchoredBox::grid(vec![3], 5).unwrap();
        assert!((local_disc(&p, &b).unwrap() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn grid_sweep_one_dimensional_lattice() {
        for n in [3u64, 5, 7, 13] {
            let c = PrimeContext::with_default_lattices(n, 1).unwrap();
            for z in 1..n {
                let p = PointSet::Grid(generate_korobov(z, &c).unwrap());
                let rep = star_disc_grid(&p, &c, &Limits::default()).unwrap();
                assert_eq!(rep.grid_max, 0.0);
                assert_eq!(rep.upper_bound, 1.0 / n as f64);
            }
        }
    }

    #[test]
    fn grid_sweep_single_point() {
        // brute force over the 9 corners of Γ̄^2 for N = 2: b = (1/2, 1/2)
        // contains the origin with volume 1/4, giving 3/4; b = (1/2, 1) and
        // (1, 1/2) give 1/2; the corners with a zero coordinate give 0.
        let p = grid(2, 2, vec![0, 0]);
        let c = PrimeContext::with_default_lattices(2, 2).unwrap();
        let rep = star_disc_grid(&p, &c, &Limits::default()).unwrap();
        assert_eq!(rep.grid_max, 0.75);
        assert_eq!(rep.grid_max, naive_grid_max(&p, 2, 2));
        assert_eq!(rep.argmax_box.grid_numerators().unwrap().0, &[1, 1]);
        assert_eq!(rep.upper_bound - rep.grid_max, 1.0);
    }

    #[test]
    fn grid_sweep_matches_naive_recount() {
        for n in [2u64, 3, 5, 7] {
            for dim in 1..=2 {
                let c = PrimeContext::with_default_lattices(n, dim).unwrap();
                for seed in 0..6u64 {
                    for (gm, sm) in [
                        (GeneratorMode::Fixed, ShiftMode::Discrete),
                        (GeneratorMode::Random, ShiftMode::Discrete),
                        (GeneratorMode::Random, ShiftMode::Continuous),
                    ] {
                        let p = sample_construction(&c, gm, sm, seed).unwrap();
                        assert!(p.len() <= 50);
                        let rep = star_disc_grid(&p, &c, &Limits::default()).unwrap();
                        let naive = naive_grid_max(&p, n, dim);
                        assert!((rep.grid_max - naive).abs() < 1e-14, "n={n} s={dim}");
                        let at = local_disc(&p, &rep.argmax_box).unwrap().abs();
                        assert!((at - rep.grid_max).abs() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn real_bins_are_consistent_with_float_corners() {
        for n in [2u64, 3, 7, 13, 31] {
            for i in 0..1000 {
                let x = i as f64 / 1000.0;
                let m = real_bin(x, n);
                assert!(x < m as f64 / n as f64);
                assert!(m == 1 || x >= (m - 1) as f64 / n as f64);
            }
            for a in 0..n {
                let x = a as f64 / n as f64;
                assert_eq!(real_bin(x, n), a as usize + 1);
            }
        }
    }

    #[test]
    fn grid_sweep_capacity_and_mismatch() {
        let c = PrimeContext::with_default_lattices(101, 4).unwrap();
        let p = real(4, vec![0.1, 0.2, 0.3, 0.4]);
        assert!(matches!(
            star_disc_grid(&p, &c, &Limits::default()),
            Err(Error::Capacity { .. })
        ));
        let c5 = PrimeContext::with_default_lattices(5, 1).unwrap();
        assert!(star_disc_grid(&grid(7, 1, vec![1]), &c5, &Limits::default()).is_err());
        assert!(star_disc_grid(&real(2, vec![0.1, 0.1]), &c5, &Limits::default()).is_err());
    }

    #[test]
    fn exact_examples() {
        let limits = Limits::default();
        for n in [1usize, 2, 5, 10] {
            let p = real(1, (0..n).map(|i| i as f64 / n as f64).collect());
            assert!((star_disc_exact(&p, &limits).unwrap() - 1.0 / n as f64).abs() < 1e-15);
        }
        for dim in 1..=3 {
            let p = real(dim, vec![0.0; dim]);
            assert_eq!(star_disc_exact(&p, &limits).unwrap(), 1.0);
        }
        // centred points: 1/(2n)
        let p = real(1, vec![0.125, 0.375, 0.625, 0.875]);
        assert!((star_disc_exact(&p, &limits).unwrap() - 0.125).abs() < 1e-15);
    }

    #[test]
    fn exact_matches_brute_force_critical_boxes() {
        // direct per-box recount over the same candidate grid
        fn brute(p: &RealPointSet) -> f64 {
            let dim = p.dim();
            let mut cand: Vec<Vec<f64>> = (0..dim)
                .map(|j| p.points().map(|x| x[j]).chain([1.0]).collect())
                .collect();
            for c in &mut cand {
                c.sort_by(f64::total_cmp);
                c.dedup();
            }
            let sizes: Vec<usize> = cand.iter().map(Vec::len).collect();
            let mut best = 0.0f64;
            let mut idx = vec![0usize; dim];
            loop {
                let b: Vec<f64> = idx.iter().zip(&cand).map(|(&i, c)| c[i]).collect();
                let vol: f64 = b.iter().product();
                let open = p.points().filter(|x| x.iter().zip(&b).all(|(a, c)| a < c)).count();
                let closed = p.points().filter(|x| x.iter().zip(&b).all(|(a, c)| a <= c)).count();
                let n = p.len() as f64;
                best = best.max(vol - open as f64 / n).max(closed as f64 / n - vol);
                let mut j = dim;
                loop {
                    if j == 0 {
                        return best;
                    }
                    j -= 1;
                    idx[j] += 1;
                    if idx[j] < sizes[j] {
                        break;
                    }
                    idx[j] = 0;
                }
            }
        }
        use rand::Rng;
        let mut rng = crate::pointset::lattice_rng(5, 5);
        for dim in 1..=3 {
            for n in [1usize, 3, 8, 15] {
                let coords: Vec<f64> = (0..n * dim).map(|_| rng.gen::<f64>()).collect();
                let p = RealPointSet::from_flat(dim, coords).unwrap();
                let exact = star_disc_exact(&PointSet::Real(p.clone()), &Limits::default()).unwrap();
                assert_eq!(exact, brute(&p));
            }
        }
        // duplicates and shared coordinates
        let p = RealPointSet::from_flat(2, vec![0.5, 0.5, 0.5, 0.5, 0.5, 0.25, 0.0, 0.5]).unwrap();
        let exact = star_disc_exact(&PointSet::Real(p.clone()), &Limits::default()).unwrap();
        assert_eq!(exact, brute(&p));
    }

    #[test]
    fn sandwich_on_fixed_discrete_constructions() {
        let limits = Limits::default();
        for n in [3u64, 5, 7, 11, 13] {
            for dim in 1..=2 {
                let c = PrimeContext::with_default_lattices(n, dim).unwrap();
                for seed in 0..4 {
                    let p = sample_construction(&c, GeneratorMode::Fixed, ShiftMode::Discrete, seed).unwrap();
                    let rep = star_disc_grid(&p, &c, &limits).unwrap();
                    let exact = star_disc_exact(&p, &limits).unwrap();
                    assert!(rep.grid_max <= exact + 1e-15);
                    assert!(exact <= rep.upper_bound + 1e-15);
                }
            }
        }
    }

    #[test]
    fn exact_capacity() {
        let coords: Vec<f64> = (0..300).map(|i| i as f64 / 301.0).collect();
        let p = real(3, coords);
        let limits = Limits {
            critical_boxes: 1000,
            ..Limits::default()
        };
        assert!(matches!(star_disc_exact(&p, &limits), Err(Error::Capacity { .. })));
    }

    proptest! {
        #[test]
        fn local_disc_is_bounded_by_exact(
            coords in proptest::collection::vec(0.0f64..1.0, 2..24),
            corner in proptest::collection::vec(0.0f64..=1.0, 2),
        ) {
            let len = coords.len() / 2 * 2;
            let p = real(2, coords[..len].to_vec());
            let b = AnchoredBox::new(corner).unwrap();
            let d = local_disc(&p, &b).unwrap();
            prop_assert!((-1.0..=1.0).contains(&d));
            prop_assert!(d.abs() <= star_disc_exact(&p, &Limits::default()).unwrap() + 1e-12);
        }

        #[test]
        fn exact_is_invariant_under_coordinate_permutation(
            coords in proptest::collection::vec(0.0f64..1.0, 3..30),
        ) {
            let len = coords.len() / 3 * 3;
            let coords = &coords[..len];
            let swapped: Vec<f64> = coords.chunks(3).flat_map(|x| [x[2], x[0], x[1]]).collect();
            let a = star_disc_exact(&real(3, coords.to_vec()), &Limits::default()).unwrap();
            let b = star_disc_exact(&real(3, swapped), &Limits::default()).unwrap();
            prop_assert!((a - b).abs() < 1e-14);
        }
    }
}
