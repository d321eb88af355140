//! Finite-energy resource states whose CV teleportation (gain `tau`)
//! reproduces a phase-insensitive channel `(tau, v)`.
//!
//! The class is parametrised by the resource's symplectic spectrum
//! `(nu_-, nu_+)`, so for a fixed channel the purity `1/(nu_- nu_+)` is a free
//! knob. Covariance matrices have standard form with `c1 = c`, `c2 = -c`.

use serde::Serialize;

use crate::channels::{ChannelKind, PhaseInsensitiveChannel};
use crate::error::{ensure_finite, Error, Result};
use crate::symplectic::{is_physical, standard_form_cm, CovarianceMatrix};

const SPECTRUM_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResourceSpectrum {
    nu_minus: f64,
    nu_plus: f64,
}

impl ResourceSpectrum {
    pub fn new(nu_minus: f64, nu_plus: f64) -> Result<Self> {
        if !nu_minus.is_finite() || !nu_plus.is_finite() {
            return Err(Error::NumericGuard(
                "non-finite symplectic eigenvalue".into(),
            ));
        }
        if nu_minus < 1.0 - SPECTRUM_SLACK || nu_plus < nu_minus * (1.0 - SPECTRUM_SLACK) {
            return Err(Error::Infeasible(format!(
                "spectrum must satisfy 1 <= nu- <= nu+ (got {nu_minus}, {nu_plus})"
            )));
        }
        Ok(Self {
            nu_minus: nu_minus.max(1.0),
            nu_plus: nu_plus.max(nu_minus.max(1.0)),
        })
    }

    /// `nu_+ = 1/(mu nu_-)`.
    pub fn from_purity(nu_minus: f64, mu: f64) -> Result<Self> {
        Self::new(nu_minus, 1.0 / (mu * nu_minus))
    }

    pub fn nu_minus(&self) -> f64 {
        self.nu_minus
    }

    pub fn nu_plus(&self) -> f64 {
        self.nu_plus
    }

    pub fn mu(&self) -> f64 {
        1.0 / (self.nu_minus * self.nu_plus)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResourceState {
    pub cm: CovarianceMatrix,
    pub spectrum: ResourceSpectrum,
    pub channel: PhaseInsensitiveChannel,
}

/// `gamma = √(tau (v - |1-tau| nu_-)(v + |1-tau| nu_+))`.
pub fn gamma(tau: f64, v: f64, nu_minus: f64, nu_plus: f64) -> Result<f64> {
    let gap = (1.0 - tau).abs();
    let first = v - gap * nu_minus;
    let second = v + gap * nu_plus;
    // rounding at the boundary nu_- = 2 nbar + 1
    let first = if first < 0.0 && first > -SPECTRUM_SLACK * v.max(1.0) {
        0.0
    } else {
        first
    };
    let radicand = tau * first * second;
    if !(radicand >= 0.0) {
        return Err(Error::Infeasible(format!(
            "spectrum ({nu_minus}, {nu_plus}) cannot simulate channel (tau = {tau}, v = {v})"
        )));
    }
    Ok(radicand.sqrt())
}

/// Resource state for a loss or amplifier channel.
pub fn resource_state(tau: f64, v: f64, nu_minus: f64, nu_plus: f64) -> Result<ResourceState> {
    resource_state_with(tau, v, nu_minus, nu_plus, gamma)
}

/// As [`resource_state`] with a caller-supplied `gamma`; lets the
/// verification suite check that a corrupted parametrisation is caught.
pub fn resource_state_with(
    tau: f64,
    v: f64,
    nu_minus: f64,
    nu_plus: f64,
    gamma_fn: fn(f64, f64, f64, f64) -> Result<f64>,
) -> Result<ResourceState> {
    let channel = PhaseInsensitiveChannel::from_params(tau, v)?;
    match channel.kind() {
        ChannelKind::Loss | ChannelKind::Amplifier => {}
        ChannelKind::AdditiveNoise => {
            return Err(Error::InvalidInput(
                "tau = 1: use additive_resource_state".into(),
            ))
        }
        ChannelKind::Identity => return Err(Error::UnsupportedChannel("identity channel".into())),
    }
    let spectrum = ResourceSpectrum::new(nu_minus, nu_plus)?;
    let nbar = channel.nbar().unwrap_or(0.0);
    if spectrum.nu_minus() > (2.0 * nbar + 1.0) * (1.0 + SPECTRUM_SLACK) {
        return Err(Error::Infeasible(format!(
            "nu- = {} exceeds 2 nbar + 1 = {}",
            spectrum.nu_minus(),
            2.0 * nbar + 1.0
        )));
    }
    let (nm, np) = (spectrum.nu_minus(), spectrum.nu_plus());
    let g = gamma_fn(tau, v, nm, np)?;
    let gap = (1.0 - tau).abs();
    let denom = (1.0 - tau) * (1.0 - tau);
    let spread = gap * (np - nm);
    let a = (spread + (1.0 + tau) * v - 2.0 * g) / denom;
    let b = (tau * spread + (1.0 + tau) * v - 2.0 * g) / denom;
    let c = (tau * spread + 2.0 * tau * v - (1.0 + tau) * g) / (tau.sqrt() * denom);
    let (a, b, c) = (
        ensure_finite("a", a)?,
        ensure_finite("b", b)?,
        ensure_finite("c", c)?,
    );
    // a or b may land a hair below 1 for pure product resources
    let cm = standard_form_cm(snap_unit(a), snap_unit(b), c, -c)?;
    Ok(ResourceState {
        cm,
        spectrum,
        channel,
    })
}

fn snap_unit(x: f64) -> f64 {
    if x < 1.0 && x > 1.0 - 1e-9 {
        1.0
    } else {
        x
    }
}

/// Resource state for the additive-noise channel (`tau = 1`).
pub fn additive_resource_state(v: f64, nu_minus: f64, nu_plus: f64) -> Result<ResourceState> {
    let channel = PhaseInsensitiveChannel::additive(v)?;
    let spectrum = ResourceSpectrum::new(nu_minus, nu_plus)?;
    let (nm, np) = (spectrum.nu_minus(), spectrum.nu_plus());
    let a = (nm * nm + 2.0 * nm * (np - v) + (np + v) * (np + v)) / (4.0 * v);
    let b = (nm * nm + 2.0 * nm * (np + v) + (np - v) * (np - v)) / (4.0 * v);
    let c = (nm + np - v) * (nm + np + v) / (4.0 * v);
    let (a, b, c) = (
        ensure_finite("a", a)?,
        ensure_finite("b", b)?,
        ensure_finite("c", c)?,
    );
    let cm = standard_form_cm(snap_unit(a), snap_unit(b), c, -c)
        .map_err(|e| Error::Infeasible(format!("additive resource: {e}")))?;
    if !is_physical(&cm) {
        return Err(Error::Infeasible(format!(
            "additive resource for v = {v}, spectrum ({nm}, {np}) is unphysical"
        )));
    }
    Ok(ResourceState {
        cm,
        spectrum,
        channel,
    })
}

/// Builds the resource state of whichever class simulates `ch`.
pub fn resource_for_channel(
    ch: &PhaseInsensitiveChannel,
    spectrum: ResourceSpectrum,
) -> Result<ResourceState> {
    match ch.kind() {
        ChannelKind::Loss | ChannelKind::Amplifier => {
            resource_state(ch.tau(), ch.v(), spectrum.nu_minus(), spectrum.nu_plus())
        }
        ChannelKind::AdditiveNoise => {
            additive_resource_state(ch.v(), spectrum.nu_minus(), spectrum.nu_plus())
        }
        ChannelKind::Identity => Err(Error::UnsupportedChannel("identity channel".into())),
    }
}

/// Channel induced by CV teleportation with gain `gain` over `cm`:
/// `tau = gain`, `v = gain a - 2 √gain c + b`.
pub fn simulated_channel_params(cm: &CovarianceMatrix, gain: f64) -> Result<(f64, f64)> {
    if !(gain > 0.0) || !gain.is_finite() {
        return Err(Error::InvalidInput(format!("gain must be > 0, got {gain}")));
    }
    let (a, b, c1, c2) = cm.standard_form_entries()?;
    let scale = c1.abs().max(1.0);
    if (c1 + c2).abs() > 1e-12 * scale {
        return Err(Error::InvalidInput(
            "teleportation resource needs c2 = -c1".into(),
        ));
    }
    Ok((gain, gain * a - 2.0 * gain.sqrt() * c1 + b))
}

/// Range of `nu_-` over which a resource of purity `mu` simulates `ch`.
/// `None` when no such resource exists.
pub fn feasible_interval(ch: &PhaseInsensitiveChannel, mu: f64) -> Result<Option<(f64, f64)>> {
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "purity must be in (0, 1], got {mu}"
        )));
    }
    let cap = 1.0 / mu.sqrt();
    match ch.kind() {
        ChannelKind::Identity => Err(Error::UnsupportedChannel("identity channel".into())),
        ChannelKind::Loss | ChannelKind::Amplifier => {
            let nbar = ch.nbar().unwrap_or(0.0);
            let hi = (2.0 * nbar + 1.0).min(cap);
            Ok(if hi >= 1.0 { Some((1.0, hi)) } else { None })
        }
        ChannelKind::AdditiveNoise => {
            let physical = |nm: f64| additive_resource_state(ch.v(), nm, 1.0 / (mu * nm)).is_ok();
            if !physical(1.0) {
                return Ok(None);
            }
            if cap <= 1.0 || physical(cap) {
                return Ok(Some((1.0, cap.max(1.0))));
            }
            // largest physical nu_- by bisection on [1, cap]
            let (mut lo, mut hi) = (1.0, cap);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if physical(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-13 * hi {
                    break;
                }
            }
            Ok(Some((1.0, lo)))
        }
    }
}
