//! Phase-insensitive one-mode Gaussian channels `U = √τ I`, `V = v I`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::symplectic::{tmsv_cm, CovarianceMatrix};

/// Transmissivities within this distance of 1 are treated as additive noise.
pub const UNIT_TAU_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    Loss,
    Amplifier,
    AdditiveNoise,
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseInsensitiveChannel {
    kind: ChannelKind,
    tau: f64,
    v: f64,
    nbar: Option<f64>,
}

impl PhaseInsensitiveChannel {
    /// Classifies `(tau, v)`. Noise below the quantum-limited floor
    /// `|1 - tau|` is rejected.
    pub fn from_params(tau: f64, v: f64) -> Result<Self> {
        if !tau.is_finite() || !v.is_finite() {
            return Err(Error::InvalidInput("non-finite channel parameter".into()));
        }
        if tau <= 0.0 {
            return Err(Error::UnphysicalChannel(format!(
                "tau must be > 0, got {tau}"
            )));
        }
        if v < 0.0 {
            return Err(Error::UnphysicalChannel(format!("v must be >= 0, got {v}")));
        }
        let gap = (1.0 - tau).abs();
        if gap <= UNIT_TAU_TOL {
            let kind = if v == 0.0 {
                ChannelKind::Identity
            } else {
                ChannelKind::AdditiveNoise
            };
            return Ok(Self {
                kind,
                tau: 1.0,
                v,
                nbar: None,
            });
        }
        // small relative slack so that noise_from_nbar(tau, 0) is accepted
        if v < gap * (1.0 - 1e-12) {
            return Err(Error::UnphysicalChannel(format!(
                "noise {v} below the quantum limit {gap}"
            )));
        }
        let nbar = (v / (2.0 * gap) - 0.5).max(0.0);
        let kind = if tau < 1.0 {
            ChannelKind::Loss
        } else {
            ChannelKind::Amplifier
        };
        Ok(Self {
            kind,
            tau,
            v,
            nbar: Some(nbar),
        })
    }

    /// Thermal loss or amplifier channel from its environment photon number.
    pub fn thermal(tau: f64, nbar: f64) -> Result<Self> {
        let v = noise_from_nbar(tau, nbar)?;
        let mut ch = Self::from_params(tau, v)?;
        if ch.nbar.is_some() {
            ch.nbar = Some(nbar);
        }
        Ok(ch)
    }

    pub fn additive(v: f64) -> Result<Self> {
        if v <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "additive noise must be > 0, got {v}"
            )));
        }
        Self::from_params(1.0, v)
    }

    pub fn identity() -> Self {
        Self {
            kind: ChannelKind::Identity,
            tau: 1.0,
            v: 0.0,
            nbar: None,
        }
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    /// Environment mean photon number; `None` for additive and identity.
    pub fn nbar(&self) -> Option<f64> {
        self.nbar
    }

    pub fn is_quantum_limited(&self) -> bool {
        self.nbar == Some(0.0)
    }
}

/// `v = |1 - tau| (2 nbar + 1)`.
pub fn noise_from_nbar(tau: f64, nbar: f64) -> Result<f64> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidInput(format!("tau must be > 0, got {tau}")));
    }
    if !(nbar >= 0.0) || !nbar.is_finite() {
        return Err(Error::InvalidInput(format!(
            "nbar must be >= 0, got {nbar}"
        )));
    }
    if (1.0 - tau).abs() <= UNIT_TAU_TOL {
        return Err(Error::InvalidInput(
            "tau = 1 has no environment; give the added noise v directly".into(),
        ));
    }
    Ok((1.0 - tau).abs() * (2.0 * nbar + 1.0))
}

/// Applies the channel to the second mode of a two-mode covariance matrix.
pub fn apply_channel(
    cm: &CovarianceMatrix,
    ch: &PhaseInsensitiveChannel,
) -> Result<CovarianceMatrix> {
    if cm.modes() != 2 {
        return Err(Error::InvalidInput(
            "channel input must be a two-mode state".into(),
        ));
    }
    let g = ch.tau().sqrt();
    let x = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.0, g, g]));
    let noise =
        DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.0, 0.0, ch.v(), ch.v()]));
    CovarianceMatrix::new(&x * cm.matrix() * &x + noise)
}

/// The channel's quasi-Choi state: half of a TMSV of variance `omega`
/// sent through it.
pub fn choi_quasi_state(ch: &PhaseInsensitiveChannel, omega: f64) -> Result<CovarianceMatrix> {
    apply_channel(&tmsv_cm(omega)?, ch)
}
