//! Covariance matrices, symplectic spectra and Gibbs matrices of one- and
//! two-mode Gaussian states.
//!
//! Quadratures are normalised so that the vacuum covariance matrix is the
//! identity. Mode ordering is `(x1, p1, x2, p2)`.

use nalgebra::{Complex, DMatrix, SymmetricEigen};
use rand::Rng;

use crate::bounds::h;
use crate::error::{Error, Result};

/// Slack on the uncertainty principle `nu >= 1`.
pub const PHYSICAL_TOL: f64 = 1e-10;
/// Symplectic eigenvalues at or below `1 + PURE_TOL` are treated as pure modes.
pub const PURE_TOL: f64 = 1e-10;
const SYMMETRY_TOL: f64 = 1e-12;

/// Real symmetric second-moment matrix of a one- or two-mode Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix(DMatrix<f64>);

impl CovarianceMatrix {
    /// Wraps a matrix, checking shape, finiteness and symmetry. Off-diagonal
    /// asymmetry below the tolerance is averaged away.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        let dim = m.nrows();
        if dim != m.ncols() || !(dim == 2 || dim == 4) {
            return Err(Error::InvalidInput(format!(
                "covariance matrix must be 2x2 or 4x4, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite covariance entry".into()));
        }
        let scale = m.amax().max(1.0);
        for i in 0..dim {
            for j in i + 1..dim {
                if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::InvalidInput(format!(
                        "covariance matrix not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        let sym = (&m + m.transpose()) * 0.5;
        Ok(Self(sym))
    }

    pub fn from_row_slice(dim: usize, data: &[f64]) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::InvalidInput("wrong number of entries".into()));
        }
        Self::new(DMatrix::from_row_slice(dim, dim, data))
    }

    /// Diagonal covariance matrix, e.g. a product of thermal states.
    pub fn diagonal(values: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(
            &nalgebra::DVector::from_column_slice(values),
        ))
    }

    /// One-mode thermal state with variance `nu = 2 nbar + 1`.
    pub fn thermal(nu: f64) -> Result<Self> {
        Self::diagonal(&[nu, nu])
    }

    pub fn vacuum(modes: usize) -> Result<Self> {
        Self::new(DMatrix::identity(2 * modes, 2 * modes))
    }

    pub fn modes(&self) -> usize {
        self.0.nrows() / 2
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    /// `S sigma S^T`.
    pub fn conjugate(&self, s: &DMatrix<f64>) -> Result<Self> {
        if s.nrows() != self.dim() || s.ncols() != self.dim() {
            return Err(Error::InvalidInput("dimension mismatch".into()));
        }
        Self::new(s * &self.0 * s.transpose())
    }

    /// Reads `(a, b, c1, c2)` from a two-mode matrix in standard form.
    pub fn standard_form_entries(&self) -> Result<(f64, f64, f64, f64)> {
        if self.modes() != 2 {
            return Err(Error::InvalidInput("standard form needs two modes".into()));
        }
        let m = &self.0;
        let scale = m.amax().max(1.0);
        let tol = 1e-12 * scale;
        let zeros = [(0, 1), (0, 3), (1, 2), (2, 3)];
        let off_ok = zeros.iter().all(|&(i, j)| m[(i, j)].abs() <= tol);
        let a = m[(0, 0)];
        let b = m[(2, 2)];
        if !off_ok || (m[(1, 1)] - a).abs() > tol || (m[(3, 3)] - b).abs() > tol {
            return Err(Error::InvalidInput("matrix is not in standard form".into()));
        }
        Ok((a, b, m[(0, 2)], m[(1, 3)]))
    }
}

/// `Omega = ⊕_j [[0, 1], [-1, 0]]`.
pub fn symplectic_form(modes: usize) -> DMatrix<f64> {
    let mut om = DMatrix::zeros(2 * modes, 2 * modes);
    for j in 0..modes {
        om[(2 * j, 2 * j + 1)] = 1.0;
        om[(2 * j + 1, 2 * j)] = -1.0;
    }
    om
}

/// Sorted symplectic eigenvalues `nu_1 <= nu_2 <= ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticSpectrum(Vec<f64>);

impl SymplecticSpectrum {
    pub fn new(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        Self(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn min(&self) -> f64 {
        self.0[0]
    }

    pub fn max(&self) -> f64 {
        self.0[self.0.len() - 1]
    }

    pub fn purity(&self) -> f64 {
        1.0 / self.0.iter().product::<f64>()
    }
}

/// Williamson normal form `sigma = S (⊕ nu_j I) S^T` with `S` symplectic.
#[derive(Debug, Clone)]
pub struct Williamson {
    pub spectrum: SymplecticSpectrum,
    /// Columns ordered to match `spectrum`.
    pub symplectic: DMatrix<f64>,
}

fn sym_sqrt(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = SymmetricEigen::new(m.clone());
    let scale = eig.eigenvalues.amax().max(f64::MIN_POSITIVE);
    if eig.eigenvalues.iter().any(|&l| l <= 1e-15 * scale) {
        return Err(Error::NotPositiveDefinite);
    }
    let root = eig.eigenvalues.map(f64::sqrt);
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&root) * eig.eigenvectors.transpose())
}

/// Williamson decomposition of a positive-definite matrix.
///
/// `K = L Omega L` with `L = m^{1/2}` is antisymmetric, so `iK` is Hermitian
/// with eigenvalues `±nu_j`. For an eigenvector `u = (x + i p)/√2` of `+nu`
/// the real pair `(p, x)` block-diagonalises `K` into `nu ω`, which gives
/// `S = L O D^{-1/2}`. Degenerate eigenspaces need no special care: any
/// orthonormal eigenbasis yields a valid `O`.
pub fn williamson(m: &DMatrix<f64>) -> Result<Williamson> {
    let dim = m.nrows();
    let modes = dim / 2;
    let l = sym_sqrt(m)?;
    let omega = symplectic_form(modes);
    let k = &l * &omega * &l;
    let herm: DMatrix<Complex<f64>> = k.map(|x| Complex::new(0.0, x));
    let eig = SymmetricEigen::new(herm);

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    // the upper half carries the positive eigenvalues
    let positive = &order[modes..];

    let mut o = DMatrix::zeros(dim, dim);
    let mut nus = Vec::with_capacity(modes);
    for (j, &idx) in positive.iter().enumerate() {
        let nu = eig.eigenvalues[idx];
        if nu <= 0.0 {
            return Err(Error::NotPositiveDefinite);
        }
        nus.push(nu);
        let u = eig.eigenvectors.column(idx);
        for r in 0..dim {
            o[(r, 2 * j)] = std::f64::consts::SQRT_2 * u[r].im;
            o[(r, 2 * j + 1)] = std::f64::consts::SQRT_2 * u[r].re;
        }
    }
    let mut d_inv_sqrt = DMatrix::zeros(dim, dim);
    for (j, nu) in nus.iter().enumerate() {
        d_inv_sqrt[(2 * j, 2 * j)] = 1.0 / nu.sqrt();
        d_inv_sqrt[(2 * j + 1, 2 * j + 1)] = 1.0 / nu.sqrt();
    }
    let s = l * o * d_inv_sqrt;
    Ok(Williamson {
        spectrum: SymplecticSpectrum(nus),
        symplectic: s,
    })
}

/// Inverse of a symplectic matrix, `S^{-1} = -Omega S^T Omega`.
pub fn symplectic_inverse(s: &DMatrix<f64>) -> DMatrix<f64> {
    let om = symplectic_form(s.nrows() / 2);
    -(&om * s.transpose() * &om)
}

pub fn symplectic_eigenvalues(cm: &CovarianceMatrix) -> Result<SymplecticSpectrum> {
    Ok(williamson(cm.matrix())?.spectrum)
}

/// Closed-form `(nu_-, nu_+)` of a two-mode standard-form matrix:
/// `nu^2 = (Δ ± √(Δ² - 4 det)) / 2`, `Δ = a² + b² + 2 c1 c2`.
pub fn standard_form_spectrum(a: f64, b: f64, c1: f64, c2: f64) -> (f64, f64) {
    let delta = a * a + b * b + 2.0 * c1 * c2;
    let det = (a * b - c1 * c1) * (a * b - c2 * c2);
    let disc = (delta * delta - 4.0 * det).max(0.0).sqrt();
    let plus_sq = (delta + disc) / 2.0;
    // product form avoids cancellation in the smaller root
    let minus_sq = if plus_sq > 0.0 { det / plus_sq } else { 0.0 };
    (minus_sq.max(0.0).sqrt(), plus_sq.sqrt())
}

pub fn purity(cm: &CovarianceMatrix) -> Result<f64> {
    let spec = physical_spectrum(cm)?;
    Ok(spec.purity())
}

/// Physicality threshold for `cm`: `PHYSICAL_TOL`, widened to the shift in
/// `nu_-` that rounding the entries alone can cause (`~ eps |sigma|^2 / nu_max`).
pub fn physical_tolerance(cm: &CovarianceMatrix, spec: &SymplecticSpectrum) -> f64 {
    let scale = cm.matrix().amax();
    PHYSICAL_TOL.max(64.0 * f64::EPSILON * scale * scale / spec.max())
}

pub fn is_physical(cm: &CovarianceMatrix) -> bool {
    symplectic_eigenvalues(cm)
        .map(|s| s.min() >= 1.0 - physical_tolerance(cm, &s))
        .unwrap_or(false)
}

/// Spectrum of a physical state, with values inside the rounding band below
/// 1 snapped to 1.
pub(crate) fn physical_spectrum(cm: &CovarianceMatrix) -> Result<SymplecticSpectrum> {
    let spec = symplectic_eigenvalues(cm)?;
    if spec.min() < 1.0 - physical_tolerance(cm, &spec) {
        return Err(Error::Unphysical(spec.min()));
    }
    Ok(SymplecticSpectrum::new(
        spec.values().iter().map(|&nu| nu.max(1.0)).collect(),
    ))
}

/// Von Neumann entropy in bits, `Σ_j h((nu_j - 1)/2)`.
pub fn von_neumann_entropy(cm: &CovarianceMatrix) -> Result<f64> {
    let spec = physical_spectrum(cm)?;
    Ok(spectrum_entropy(&spec))
}

pub(crate) fn spectrum_entropy(spec: &SymplecticSpectrum) -> f64 {
    spec.values()
        .iter()
        .map(|&nu| {
            if nu <= 1.0 + PURE_TOL {
                0.0
            } else {
                h((nu - 1.0) / 2.0).unwrap_or(0.0)
            }
        })
        .sum()
}

/// Exponent matrix `G` of `rho ∝ exp(-q^T G q / 4)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsMatrix(DMatrix<f64>);

impl GibbsMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        if n != m.ncols() || !(n == 2 || n == 4) {
            return Err(Error::InvalidInput(
                "Gibbs matrix must be 2x2 or 4x4".into(),
            ));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite Gibbs entry".into()));
        }
        Ok(Self((&m + m.transpose()) * 0.5))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }
}

/// `g(nu) = ln((nu + 1)/(nu - 1)) = 2 arccoth(nu)`.
pub(crate) fn gibbs_weight(nu: f64) -> f64 {
    (2.0 / (nu - 1.0)).ln_1p()
}

/// `G = 2iΩ arccoth(iσΩ)`, evaluated as `S^{-T} (⊕ g(nu_j) I) S^{-1}`.
pub fn gibbs_matrix(cm: &CovarianceMatrix) -> Result<GibbsMatrix> {
    let w = williamson(cm.matrix())?;
    if w.spectrum.min() <= 1.0 + PURE_TOL {
        return Err(Error::NearPure(w.spectrum.min()));
    }
    let s_inv = symplectic_inverse(&w.symplectic);
    let weights: Vec<f64> = w
        .spectrum
        .values()
        .iter()
        .flat_map(|&nu| {
            let g = gibbs_weight(nu);
            [g, g]
        })
        .collect();
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(weights));
    GibbsMatrix::new(s_inv.transpose() * d * s_inv)
}

/// Inverse of [`gibbs_matrix`]: `σ = coth(iΩG/2) iΩ`.
pub fn cm_from_gibbs(g: &GibbsMatrix) -> Result<CovarianceMatrix> {
    let w = williamson(g.matrix()).map_err(|_| Error::SingularGibbs)?;
    if w.spectrum.min() < 1e-12 {
        return Err(Error::SingularGibbs);
    }
    // G = W diag(g) W^T, so the CM's Williamson matrix is W^{-T} = -Ω W Ω.
    let om = symplectic_form(g.matrix().nrows() / 2);
    let s = -(&om * &w.symplectic * &om);
    let nus: Vec<f64> = w
        .spectrum
        .values()
        .iter()
        .flat_map(|&x| {
            let nu = 1.0 / (x / 2.0).tanh();
            [nu, nu]
        })
        .collect();
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(nus));
    CovarianceMatrix::new(&s * d * s.transpose())
}

pub fn standard_form_cm(a: f64, b: f64, c1: f64, c2: f64) -> Result<CovarianceMatrix> {
    if ![a, b, c1, c2].iter().all(|x| x.is_finite()) {
        return Err(Error::InvalidInput("non-finite standard-form entry".into()));
    }
    if a < 1.0 || b < 1.0 {
        return Err(Error::InvalidInput(format!(
            "standard form needs a, b >= 1 (a = {a}, b = {b})"
        )));
    }
    CovarianceMatrix::from_row_slice(
        4,
        &[
            a, 0.0, c1, 0.0, //
            0.0, a, 0.0, c2, //
            c1, 0.0, b, 0.0, //
            0.0, c2, 0.0, b,
        ],
    )
}

/// Two-mode squeezed vacuum with local variance `omega`.
pub fn tmsv_cm(omega: f64) -> Result<CovarianceMatrix> {
    if !omega.is_finite() || omega < 1.0 {
        return Err(Error::InvalidInput(format!(
            "TMSV variance must be >= 1, got {omega}"
        )));
    }
    let c = (omega * omega - 1.0).sqrt();
    standard_form_cm(omega, omega, c, -c)
}

/// Phase rotation of each mode followed by single-mode squeezing and, for two
/// modes, a beam splitter. Used to probe symplectic invariance.
pub fn random_symplectic<R: Rng + ?Sized>(rng: &mut R, modes: usize) -> DMatrix<f64> {
    let dim = 2 * modes;
    let mut s = DMatrix::identity(dim, dim);
    let local = |s: &mut DMatrix<f64>, rng: &mut R| {
        let mut m = DMatrix::zeros(dim, dim);
        for j in 0..modes {
            let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let r: f64 = rng.random_range(-1.0..1.0);
            let (sn, cs) = theta.sin_cos();
            let (e, ei) = (r.exp(), (-r).exp());
            // squeeze(r) * rotation(theta)
            m[(2 * j, 2 * j)] = e * cs;
            m[(2 * j, 2 * j + 1)] = e * sn;
            m[(2 * j + 1, 2 * j)] = -ei * sn;
            m[(2 * j + 1, 2 * j + 1)] = ei * cs;
        }
        *s = &m * &*s;
    };
    local(&mut s, rng);
    if modes == 2 {
        let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let (sn, cs) = phi.sin_cos();
        let mut bs = DMatrix::zeros(4, 4);
        for q in 0..2 {
            bs[(q, q)] = cs;
            bs[(q, 2 + q)] = sn;
            bs[(2 + q, q)] = -sn;
            bs[(2 + q, 2 + q)] = cs;
        }
        s = bs * s;
        local(&mut s, rng);
    }
    s
}
