//! Relative entropy between Gaussian states, its variance, and the REE upper
//! bound obtained from a fixed separable candidate.
//!
//! All outputs are in bits (variance in bits²).

use std::f64::consts::LN_2;

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::symplectic::{
    gibbs_matrix, physical_spectrum, spectrum_entropy, standard_form_cm, symplectic_form,
    CovarianceMatrix,
};

/// Slack allowed below zero for relative entropies and variances.
pub const NEGATIVITY_SLACK: f64 = 1e-9;

/// Two zero-mean-referenced Gaussian states; `delta` is the first-moment
/// difference `u2 - u1`.
#[derive(Debug, Clone, PartialEq)]
pub struct StatePair {
    pub sigma1: CovarianceMatrix,
    pub sigma2: CovarianceMatrix,
    pub delta: DVector<f64>,
}

impl StatePair {
    pub fn new(sigma1: CovarianceMatrix, sigma2: CovarianceMatrix) -> Result<Self> {
        let dim = sigma1.dim();
        Self::with_displacement(sigma1, sigma2, DVector::zeros(dim))
    }

    pub fn with_displacement(
        sigma1: CovarianceMatrix,
        sigma2: CovarianceMatrix,
        delta: DVector<f64>,
    ) -> Result<Self> {
        if sigma1.dim() != sigma2.dim() || delta.len() != sigma1.dim() {
            return Err(Error::InvalidInput("state pair dimensions differ".into()));
        }
        Ok(Self {
            sigma1,
            sigma2,
            delta,
        })
    }
}

/// `ln det((sigma + iΩ)/2)` from the eigenvalues of the Hermitian matrix
/// `(sigma + iΩ)/2`, together with the imaginary residue of the complex
/// determinant computed independently by LU.
pub fn log_det_shifted(cm: &CovarianceMatrix) -> Result<(f64, f64)> {
    let om = symplectic_form(cm.modes());
    let m: DMatrix<Complex<f64>> = DMatrix::from_fn(cm.dim(), cm.dim(), |i, j| {
        Complex::new(cm.get(i, j) / 2.0, om[(i, j)] / 2.0)
    });
    let eig = SymmetricEigen::new(m.clone());
    let mut log_det = 0.0;
    for &l in eig.eigenvalues.iter() {
        if l < -1e-10 {
            return Err(Error::NumericGuard(format!(
                "(sigma + iΩ)/2 has negative eigenvalue {l}"
            )));
        }
        log_det += l.max(1e-300).ln();
    }
    let det = m.lu().determinant();
    let residue = if det.norm() > 0.0 {
        (det.im / det.norm()).abs()
    } else {
        0.0
    };
    Ok((log_det, residue))
}

/// `Σ(σ1, σj, δ) = -tr(ρ1 log2 ρj)` for zero-mean `ρ1` and `ρj` displaced by `δ`.
pub fn sigma_functional(
    sigma1: &CovarianceMatrix,
    sigma_j: &CovarianceMatrix,
    delta: &DVector<f64>,
) -> Result<f64> {
    if sigma1.dim() != sigma_j.dim() || delta.len() != sigma1.dim() {
        return Err(Error::InvalidInput("dimension mismatch".into()));
    }
    let g = gibbs_matrix(sigma_j)?;
    let g = g.matrix();
    let (log_det, residue) = log_det_shifted(sigma_j)?;
    if residue > 1e-9 {
        return Err(Error::NumericGuard(format!(
            "complex determinant has imaginary residue {residue}"
        )));
    }
    let trace = (sigma1.matrix() * g).trace();
    let shift = (delta.transpose() * g * delta)[(0, 0)];
    Ok((log_det + trace / 2.0 + shift / 2.0) / (2.0 * LN_2))
}

/// `S(ρ1 || ρ2) = -Σ(σ1, σ1, 0) + Σ(σ1, σ2, δ)`, with the first term taken
/// as the von Neumann entropy of `σ1` so pure modes contribute exactly 0.
pub fn relative_entropy(pair: &StatePair) -> Result<f64> {
    let entropy = spectrum_entropy(&physical_spectrum(&pair.sigma1)?);
    physical_spectrum(&pair.sigma2)?;
    let cross = sigma_functional(&pair.sigma1, &pair.sigma2, &pair.delta)?;
    let s = cross - entropy;
    check_nonnegative("relative entropy", s, cross)
}

/// `V(ρ1 || ρ2) = tr[ρ1 (log2 ρ1 - log2 ρ2 - S)²]`.
pub fn relative_entropy_variance(pair: &StatePair) -> Result<f64> {
    let g1 = gibbs_matrix(&pair.sigma1)?;
    let g2 = gibbs_matrix(&pair.sigma2)?;
    let gt = g1.matrix() - g2.matrix();
    let s1 = pair.sigma1.matrix();
    let om = symplectic_form(pair.sigma1.modes());
    let quad = (s1 * &gt * s1 * &gt).trace();
    let comm = (&gt * &om * &gt * &om).trace();
    let b = g2.matrix() * s1 * g2.matrix() * 2.0;
    let shift = (pair.delta.transpose() * b * &pair.delta)[(0, 0)];
    let denom = 2.0 * (2.0 * LN_2) * (2.0 * LN_2);
    let v = (quad + comm + shift) / denom;
    check_nonnegative("relative entropy variance", v, quad.abs() / denom)
}

fn check_nonnegative(what: &str, value: f64, scale: f64) -> Result<f64> {
    // cancellation error grows with the magnitude of the terms being subtracted;
    // values inside that band are rounding noise around zero
    if value < -NEGATIVITY_SLACK * scale.abs().max(1.0) {
        return Err(Error::NumericGuard(format!("{what} is negative ({value})")));
    }
    Ok(value.max(0.0))
}

/// Separable candidate with the same local blocks and off-diagonals replaced
/// by `±√((a-1)(b-1))`, keeping the input's sign pattern (zero maps to `+`
/// for `c1` and `-` for `c2`).
pub fn closest_separable_candidate(cm: &CovarianceMatrix) -> Result<CovarianceMatrix> {
    let (a, b, c1, c2) = cm.standard_form_entries()?;
    if a <= 1.0 || b <= 1.0 {
        return Err(Error::InvalidInput(format!(
            "separable candidate needs a, b > 1 (a = {a}, b = {b})"
        )));
    }
    let c = ((a - 1.0) * (b - 1.0)).sqrt();
    let s1 = if c1 < 0.0 { -c } else { c };
    let s2 = if c2 > 0.0 { c } else { -c };
    standard_form_cm(a, b, s1, s2)
}

/// `E_R* = S(ρ || ρ_sep*)`, an upper bound on the relative entropy of
/// entanglement. Product states with a vacuum factor (`a = 1` or `b = 1`)
/// are separable and give 0.
pub fn ree_upper(cm: &CovarianceMatrix) -> Result<f64> {
    let (a, b, c1, c2) = cm.standard_form_entries()?;
    physical_spectrum(cm)?;
    if a <= 1.0 + 1e-12 || b <= 1.0 + 1e-12 {
        if c1.abs().max(c2.abs()) > 1e-6 {
            return Err(Error::Unphysical(1.0 - (c1 * c1).max(c2 * c2)));
        }
        return Ok(0.0);
    }
    let sep = closest_separable_candidate(cm)?;
    relative_entropy(&StatePair::new(cm.clone(), sep)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resource::resource_state;
    use crate::symplectic::{is_physical, tmsv_cm, von_neumann_entropy};

    fn thermal(nbar: f64) -> CovarianceMatrix {
        CovarianceMatrix::thermal(2.0 * nbar + 1.0).unwrap()
    }

    #[test]
    fn functional_matches_entropy() {
        let s = thermal(1.0);
        let z = DVector::zeros(2);
        assert!((sigma_functional(&s, &s, &z).unwrap() - 2.0).abs() < 1e-12);
        let x = sigma_functional(&thermal(1.0), &thermal(2.0), &z).unwrap();
        assert!((x - 2.169925001442312).abs() < 1e-9, "{x}");
    }

    #[test]
    fn displacement_term() {
        let (s1, s2) = (thermal(1.0), thermal(2.0));
        let d = DVector::from_vec(vec![0.3, -1.1]);
        let base = sigma_functional(&s1, &s2, &DVector::zeros(2)).unwrap();
        let shifted = sigma_functional(&s1, &s2, &d).unwrap();
        let g2 = gibbs_matrix(&s2).unwrap();
        let expect = (d.transpose() * g2.matrix() * &d)[(0, 0)] / (4.0 * LN_2);
        assert!((shifted - base - expect).abs() < 1e-12);
    }

    #[test]
    fn thermal_pair_values() {
        let pair = StatePair::new(thermal(1.0), thermal(2.0)).unwrap();
        assert!((relative_entropy(&pair).unwrap() - 0.169925001442312).abs() < 1e-9);
        let d = (4.0f64 / 3.0).ln();
        let v_expect = d * d * 8.0 / (4.0 * LN_2 * LN_2);
        let v = relative_entropy_variance(&pair).unwrap();
        assert!((v - v_expect).abs() < 1e-12 && (v - 0.3445).abs() < 1e-4);

        let same = StatePair::new(thermal(1.0), thermal(1.0)).unwrap();
        assert!(relative_entropy(&same).unwrap().abs() < 1e-12);
        assert!(relative_entropy_variance(&same).unwrap().abs() < 1e-15);
    }

    #[test]
    fn variance_displacement_scales_quadratically() {
        let (s1, s2) = (thermal(0.5), thermal(3.0));
        let v = |k: f64| {
            let d = DVector::from_vec(vec![0.4 * k, 0.7 * k]);
            relative_entropy_variance(
                &StatePair::with_displacement(s1.clone(), s2.clone(), d).unwrap(),
            )
            .unwrap()
        };
        let (v0, v1, v2) = (v(0.0), v(1.0), v(2.0));
        assert!(((v2 - v0) - 4.0 * (v1 - v0)).abs() < 1e-12);
    }

    #[test]
    fn pure_first_argument() {
        let pure = tmsv_cm(2.0).unwrap();
        let other = standard_form_cm(2.5, 2.5, 1.0, -1.0).unwrap();
        let s = relative_entropy(&StatePair::new(pure.clone(), other.clone()).unwrap()).unwrap();
        assert!(s.is_finite() && s > 0.0);
        // approach the pure state from the mixed side
        let eps = 1e-7;
        let near = standard_form_cm(2.0 + eps, 2.0 + eps, 3f64.sqrt(), -3f64.sqrt()).unwrap();
        let s_near = relative_entropy(&StatePair::new(near, other.clone()).unwrap()).unwrap();
        assert!((s - s_near).abs() < 1e-4, "{s} vs {s_near}");
        assert!(matches!(
            relative_entropy(&StatePair::new(other, pure).unwrap()),
            Err(Error::NearPure(_))
        ));
    }

    #[test]
    fn candidate_signs() {
        let c =
            closest_separable_candidate(&standard_form_cm(3.0, 2.0, 0.0, 0.0).unwrap()).unwrap();
        let (_, _, c1, c2) = c.standard_form_entries().unwrap();
        assert!((c1 - 2f64.sqrt()).abs() < 1e-15 && (c2 + 2f64.sqrt()).abs() < 1e-15);

        let r = resource_state(0.5, 0.5, 1.0, 4.0).unwrap();
        let sep = closest_separable_candidate(&r.cm).unwrap();
        let (a, b, c1, c2) = sep.standard_form_entries().unwrap();
        assert!((a - 9.0).abs() < 1e-12 && (b - 6.0).abs() < 1e-12);
        assert!((c1 - 40f64.sqrt()).abs() < 1e-12 && (c2 + 40f64.sqrt()).abs() < 1e-12);
        assert!(is_physical(&sep));

        let same = standard_form_cm(3.0, 2.0, 1.0, 1.0).unwrap();
        let (_, _, c1, c2) = closest_separable_candidate(&same)
            .unwrap()
            .standard_form_entries()
            .unwrap();
        assert!(c1 > 0.0 && c2 > 0.0);

        assert!(closest_separable_candidate(&CovarianceMatrix::vacuum(2).unwrap()).is_err());
    }

    #[test]
    fn ree_examples() {
        let prod = CovarianceMatrix::diagonal(&[3., 3., 2., 2.]).unwrap();
        assert!(ree_upper(&prod).unwrap() >= 0.0);

        let tmsv3 = resource_state(0.5, 0.5, 1.0, 1.0).unwrap();
        let b1 = ree_upper(&tmsv3.cm).unwrap();
        assert!(b1 > 1.0 && b1.is_finite());

        assert_eq!(
            ree_upper(&CovarianceMatrix::vacuum(2).unwrap()).unwrap(),
            0.0
        );
    }

    #[test]
    fn entropy_consistency() {
        let cm = standard_form_cm(4.0, 3.0, 2.0, -1.5).unwrap();
        let sigma = sigma_functional(&cm, &cm, &DVector::zeros(4)).unwrap();
        assert!((sigma - von_neumann_entropy(&cm).unwrap()).abs() < 1e-8);
        let (_, residue) = log_det_shifted(&cm).unwrap();
        assert!(residue < 1e-9);
    }
}
