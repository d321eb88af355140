//! Golden-section minimisation of a 1-D function on a closed interval.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldenResult {
    pub x: f64,
    pub fx: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Shrinks `[lo, hi]` until its width is below `tol`. Returns the best point
/// seen, preferring the smaller abscissa on exact ties.
pub fn golden_section<F>(
    mut f: F,
    lo: f64,
    hi: f64,
    tol: f64,
    max_evals: usize,
) -> Result<GoldenResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(lo <= hi) || !(tol > 0.0) {
        return Err(Error::InvalidInput(format!(
            "bad bracket [{lo}, {hi}] or tol {tol}"
        )));
    }
    let (mut a, mut b) = (lo, hi);
    let mut evals = 0;
    let mut best = (f64::INFINITY, f64::NAN);
    let mut eval = |x: f64, evals: &mut usize, best: &mut (f64, f64)| -> Result<f64> {
        if *evals >= max_evals {
            return Err(Error::NonConvergence(*evals));
        }
        *evals += 1;
        let fx = f(x)?;
        if fx < best.0 || (fx == best.0 && x < best.1) || best.1.is_nan() {
            *best = (fx, x);
        }
        Ok(fx)
    };

    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = eval(x1, &mut evals, &mut best)?;
    let mut f2 = eval(x2, &mut evals, &mut best)?;
    while b - a >= tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = eval(x1, &mut evals, &mut best)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = eval(x2, &mut evals, &mut best)?;
        }
    }
    Ok(GoldenResult {
        x: best.1,
        fx: best.0,
        evaluations: evals,
        converged: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabola() {
        let r = golden_section(|x| Ok((x - 0.3).powi(2)), -1.0, 2.0, 1e-9, 1000).unwrap();
        assert!((r.x - 0.3).abs() < 1e-9 && r.fx < 1e-18);
        assert!(r.converged && r.evaluations < 60);
    }

    #[test]
    fn boundary_minimum() {
        let r = golden_section(Ok, 1.0, 3.0, 1e-8, 1000).unwrap();
        assert!((r.x - 1.0).abs() < 1e-7);
    }

    #[test]
    fn evaluation_cap() {
        assert_eq!(
            golden_section(|x| Ok(x * x), -1.0, 1.0, 1e-12, 5),
            Err(Error::NonConvergence(5))
        );
    }

    #[test]
    fn degenerate_interval() {
        let r = golden_section(|x| Ok(x * x), 2.0, 2.0, 1e-6, 10).unwrap();
        assert_eq!(r.x, 2.0);
    }
}
