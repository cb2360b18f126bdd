//! Closed-form probabilistic discrepancy bounds.
//!
//! For each of the four constructions the star discrepancy is bounded, outside
//! an event of probability `failure_prob`, by
//! `C * (s log(N+1) + log 2 + log(1/failure_prob)) / M` with `C = 1.83`
//! (continuous shifts) or `C = 1.73` (grid shifts). The pipeline behind it:
//! per-box variance cap `σ²`, Bernstein tail, union bound over `(N+1)^s`
//! grid corners giving the log term `L`, and the positive root `t₀` of
//! `t² - 2Lt/3 - 2σ²L = 0`. All logarithms are natural.

use serde::{Deserialize, Serialize};

use crate::modmath::PrimeContext;
use crate::pointset::{GeneratorMode, ShiftMode};
use crate::{Error, Result};

/// Rounded leading constant for continuous shifts.
pub const CONTINUOUS_CONSTANT: f64 = 1.83;
/// Rounded leading constant for grid shifts.
pub const DISCRETE_CONSTANT: f64 = 1.73;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum TheoremCase {
    RandomContinuous,
    FixedContinuous,
    RandomDiscrete,
    FixedDiscrete,
}

impl TheoremCase {
    pub const ALL: [TheoremCase; 4] = [
        TheoremCase::RandomContinuous,
        TheoremCase::FixedContinuous,
        TheoremCase::RandomDiscrete,
        TheoremCase::FixedDiscrete,
    ];

    pub fn generator_mode(self) -> GeneratorMode {
        match self {
            TheoremCase::RandomContinuous | TheoremCase::RandomDiscrete => GeneratorMode::Random,
            TheoremCase::FixedContinuous | TheoremCase::FixedDiscrete => GeneratorMode::Fixed,
        }
    }

    pub fn shift_mode(self) -> ShiftMode {
        match self {
            TheoremCase::RandomContinuous | TheoremCase::FixedContinuous => ShiftMode::Continuous,
            TheoremCase::RandomDiscrete | TheoremCase::FixedDiscrete => ShiftMode::Discrete,
        }
    }

    pub fn is_continuous(self) -> bool {
        self.shift_mode() == ShiftMode::Continuous
    }

    pub fn name(self) -> &'static str {
        match self {
            TheoremCase::RandomContinuous => "random-continuous",
            TheoremCase::FixedContinuous => "fixed-continuous",
            TheoremCase::RandomDiscrete => "random-discrete",
            TheoremCase::FixedDiscrete => "fixed-discrete",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundSpec {
    pub case: TheoremCase,
    /// Probability mass allowed for the bad event. Success probability is
    /// `1 - failure_prob`.
    pub failure_prob: f64,
    #[serde(flatten)]
    pub ctx: PrimeContext,
}

impl BoundSpec {
    pub fn new(case: TheoremCase, failure_prob: f64, ctx: PrimeContext) -> Result<Self> {
        check_failure_prob(failure_prob)?;
        Ok(BoundSpec {
            case,
            failure_prob,
            ctx,
        })
    }
}

fn check_failure_prob(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("failure probability {p} outside (0, 1)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundBreakdown {
    pub case: TheoremCase,
    /// Cap on `Var[Σ_r Y_r(b)]`.
    pub variance_cap: f64,
    /// `L = s log(N+1) + log 2 + log(1/failure_prob)`.
    pub log_term: f64,
    pub t_zero: f64,
    /// `t₀/M + s/N`, the bound before the constant is rounded and the grid
    /// term absorbed.
    pub unrounded_bound: f64,
    /// `rounded_constant * L / M`.
    pub final_bound: f64,
    /// Universal constant before rounding.
    pub constant: f64,
    pub rounded_constant: f64,
}

/// `s(1 + 1/(3N))` for continuous shifts, `s` for grid shifts.
pub fn variance_cap(case: TheoremCase, ctx: &PrimeContext) -> f64 {
    let s = ctx.dim() as f64;
    if case.is_continuous() {
        s * (1.0 + 1.0 / (3.0 * ctx.n_prime() as f64))
    } else {
        s
    }
}

/// `log(2 (N+1)^s) - log(failure_prob)`.
pub fn log_term(ctx: &PrimeContext, failure_prob: f64) -> Result<f64> {
    check_failure_prob(failure_prob)?;
    let s = ctx.dim() as f64;
    Ok(s * ((ctx.n_prime() + 1) as f64).ln() + 2f64.ln() - failure_prob.ln())
}

/// Positive root of `t² - (2L/3) t - 2 σ² L = 0` with `σ²` the case's
/// variance cap.
pub fn t_zero(log_term: f64, case: TheoremCase, ctx: &PrimeContext) -> Result<f64> {
    if log_term <= 0.0 || !log_term.is_finite() {
        return Err(Error::invalid(format!("log term {log_term} must be positive")));
    }
    let var = variance_cap(case, ctx);
    Ok(log_term / 3.0 * (1.0 + (1.0 + 18.0 * var / log_term).sqrt()))
}

/// Unrounded universal constant, obtained from `t₀` at the worst case
/// `N = 2, s = 1` where `L ≥ log 3`.
pub fn universal_constant(case: TheoremCase) -> f64 {
    let factor = if case.is_continuous() { 7.0 / 6.0 } else { 1.0 };
    (1.0 + (1.0 + 18.0 * factor / 3f64.ln()).sqrt()) / 3.0
}

pub fn rounded_constant(case: TheoremCase) -> f64 {
    if case.is_continuous() {
        CONTINUOUS_CONSTANT
    } else {
        DISCRETE_CONSTANT
    }
}

pub fn theorem_bound(spec: &BoundSpec) -> Result<BoundBreakdown> {
    let ctx = &spec.ctx;
    let l = log_term(ctx, spec.failure_prob)?;
    let t0 = t_zero(l, spec.case, ctx)?;
    let m = ctx.num_lattices() as f64;
    let s = ctx.dim() as f64;
    let rounded = rounded_constant(spec.case);
    Ok(BoundBreakdown {
        case: spec.case,
        variance_cap: variance_cap(spec.case, ctx),
        log_term: l,
        t_zero: t0,
        unrounded_bound: t0 / m + s / ctx.n_prime() as f64,
        final_bound: rounded * l / m,
        constant: universal_constant(spec.case),
        rounded_constant: rounded,
    })
}

/// Bernstein tail `2 exp(-t² / (2 σ² + 2 t b / 3))` for summands bounded by
/// `b` in absolute value.
pub fn bernstein_tail(t: f64, variance: f64, bound_one: f64) -> Result<f64> {
    if t <= 0.0 {
        return Err(Error::invalid(format!("deviation {t} must be positive")));
    }
    if variance < 0.0 || bound_one < 0.0 {
        return Err(Error::invalid("variance and summand bound must be nonnegative"));
    }
    Ok(2.0 * (-t * t / (2.0 * variance + 2.0 * t * bound_one / 3.0)).exp())
}
