//! Secret-key capacity bounds: the infinite-energy closed forms `B0`, the
//! fixed-purity bound `B_mu` and its second-order finite-`n` expansion.

mod golden;
mod normal;

use std::f64::consts::LN_2;

use serde::Serialize;

pub use golden::{golden_section, GoldenResult};
pub use normal::{inverse_gaussian_cdf, normal_cdf};

use crate::channels::{ChannelKind, PhaseInsensitiveChannel};
use crate::error::{Error, Result};
use crate::relent::{closest_separable_candidate, ree_upper, relative_entropy_variance, StatePair};
use crate::resource::{feasible_interval, resource_for_channel, ResourceSpectrum, ResourceState};

pub const DEFAULT_TOL: f64 = 1e-6;
pub const COARSE_GRID: usize = 64;
pub const MAX_EVALUATIONS: usize = 10_000;

/// Entropy of a thermal mode with mean photon number `x`, in bits.
pub fn h(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::InvalidInput(format!("h(x) needs x >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok(((x + 1.0) * x.ln_1p() - x * x.ln()) / LN_2)
}

/// Infinite-energy bound `B0` in bits per channel use.
pub fn b0(ch: &PhaseInsensitiveChannel) -> Result<f64> {
    let tau = ch.tau();
    let value = match ch.kind() {
        ChannelKind::Identity => {
            return Err(Error::UnsupportedChannel(
                "identity channel has unbounded capacity".into(),
            ))
        }
        ChannelKind::Loss => {
            let nbar = ch.nbar().unwrap_or(0.0);
            if nbar < tau / (1.0 - tau) {
                (-(-tau).ln_1p() - nbar * tau.ln()) / LN_2 - h(nbar)?
            } else {
                0.0
            }
        }
        ChannelKind::Amplifier => {
            let nbar = ch.nbar().unwrap_or(0.0);
            if nbar < 1.0 / (tau - 1.0) {
                (-(tau - 1.0).ln() + (nbar + 1.0) * tau.ln()) / LN_2 - h(nbar)?
            } else {
                0.0
            }
        }
        ChannelKind::AdditiveNoise => {
            let v = ch.v();
            if v < 2.0 {
                // (v-2)/(2 ln 2) - log2(v/2), written in x = (v-2)/2
                let x = (v - 2.0) / 2.0;
                (x - x.ln_1p()) / LN_2
            } else {
                0.0
            }
        }
    };
    Ok(value.max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundResult {
    pub value: f64,
    pub argmin_nu_minus: Option<f64>,
    pub feasible_interval: (f64, f64),
    pub evaluations: usize,
    pub converged: bool,
}

/// Fixed-purity bound `B_mu`: the smallest `E_R*` over resource states of
/// purity `mu` that simulate `ch`.
pub fn b_mu(ch: &PhaseInsensitiveChannel, mu: f64, tol: f64) -> Result<BoundResult> {
    b_mu_with_state(ch, mu, tol).map(|(r, _)| r)
}

/// `E_R*` of the purity-`mu` resource with smaller symplectic eigenvalue
/// `nu_minus`.
pub fn resource_ree(ch: &PhaseInsensitiveChannel, mu: f64, nu_minus: f64) -> Result<f64> {
    let state = resource_for_channel(ch, ResourceSpectrum::from_purity(nu_minus, mu)?)?;
    ree_upper(&state.cm)
}

/// As [`b_mu`], also returning the optimal resource state.
pub fn b_mu_with_state(
    ch: &PhaseInsensitiveChannel,
    mu: f64,
    tol: f64,
) -> Result<(BoundResult, ResourceState)> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!(
            "tolerance must be > 0, got {tol}"
        )));
    }
    if ch.kind() == ChannelKind::Identity {
        return Err(Error::UnsupportedChannel("identity channel".into()));
    }
    let (lo, hi) = feasible_interval(ch, mu)?.ok_or_else(|| {
        Error::Infeasible(format!("no resource of purity {mu} simulates the channel"))
    })?;
    let objective = |x: f64| resource_ree(ch, mu, x);

    let (value, argmin, evaluations) = if hi - lo <= f64::EPSILON * hi {
        (objective(lo)?, lo, 1)
    } else {
        let step = (hi - lo) / (COARSE_GRID - 1) as f64;
        let grid: Vec<f64> = (0..COARSE_GRID)
            .map(|i| {
                if i == COARSE_GRID - 1 {
                    hi
                } else {
                    lo + step * i as f64
                }
            })
            .collect();
        let mut best = (f64::INFINITY, 0usize);
        for (i, &x) in grid.iter().enumerate() {
            let fx = objective(x)?;
            if fx < best.0 - 1e-12 {
                best = (fx, i);
            }
        }
        let i = best.1;
        let left = grid[i.saturating_sub(1)];
        let right = grid[(i + 1).min(COARSE_GRID - 1)];
        let refined = golden_section(objective, left, right, tol, MAX_EVALUATIONS - COARSE_GRID)?;
        let evaluations = COARSE_GRID + refined.evaluations;
        if refined.fx < best.0 || (refined.fx == best.0 && refined.x < grid[i]) {
            (refined.fx, refined.x, evaluations)
        } else {
            (best.0, grid[i], evaluations)
        }
    };
    let state = resource_for_channel(ch, ResourceSpectrum::from_purity(argmin, mu)?)?;
    let result = BoundResult {
        value,
        argmin_nu_minus: Some(argmin),
        feasible_interval: (lo, hi),
        evaluations,
        converged: true,
    };
    Ok((result, state))
}

/// Parameters of an `(n, epsilon)` key-generation protocol at purity `mu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NonAsymptoticSpec {
    pub n: u64,
    pub epsilon: f64,
    pub mu: f64,
}

impl NonAsymptoticSpec {
    pub fn new(n: u64, epsilon: f64, mu: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidInput("n must be >= 1".into()));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidInput(format!(
                "epsilon must lie in (0, 1), got {epsilon}"
            )));
        }
        if !(mu > 0.0 && mu <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "purity must be in (0, 1], got {mu}"
            )));
        }
        Ok(Self { n, epsilon, mu })
    }
}

/// The `n`-independent ingredients of `Phi_n`.
///
/// `Phi_n = B_mu + √(V/n) F(eps)`; the `O(log n / n)` remainder is not
/// included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecondOrder {
    pub bound: BoundResult,
    /// Relative entropy variance of the optimal resource against its
    /// separable candidate, bits².
    pub variance: f64,
    pub quantile: f64,
}

impl SecondOrder {
    pub fn new(ch: &PhaseInsensitiveChannel, mu: f64, epsilon: f64, tol: f64) -> Result<Self> {
        let quantile = inverse_gaussian_cdf(epsilon)?;
        let (bound, state) = b_mu_with_state(ch, mu, tol)?;
        let sep = closest_separable_candidate(&state.cm)?;
        let variance = relative_entropy_variance(&StatePair::new(state.cm, sep)?)?;
        Ok(Self {
            bound,
            variance,
            quantile,
        })
    }

    pub fn phi(&self, n: u64) -> f64 {
        self.bound.value + (self.variance / n as f64).sqrt() * self.quantile
    }
}

pub fn phi_n(ch: &PhaseInsensitiveChannel, spec: &NonAsymptoticSpec, tol: f64) -> Result<f64> {
    Ok(SecondOrder::new(ch, spec.mu, spec.epsilon, tol)?.phi(spec.n))
}
