//! Poisson algebra of the spin components.
//!
//! `[S_ab, S_cd] = 1/2 (d_ac S_bd + d_bd S_ac - d_ad S_bc - d_bc S_ad)`.
//!
//! An antisymmetric coefficient matrix `A` stands for the linear spin
//! function `f_A(S) = sum_{a<b} A_ab S_ab`, so the basis function `S_12` is
//! `A = E_12 - E_21`. In that representation `[f_A, f_B] = f_C` with
//! `C = 1/2 (BA - AB)`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

fn delta(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

/// The structure relation itself, evaluated on a (full) spin matrix.
pub fn basis_bracket(a: usize, b: usize, c: usize, d: usize, spin: &DMatrix<f64>) -> f64 {
    0.5 * (delta(a, c) * spin[(b, d)] + delta(b, d) * spin[(a, c)]
        - delta(a, d) * spin[(b, c)]
        - delta(b, c) * spin[(a, d)])
}

fn check_antisymmetric(m: &DMatrix<f64>, label: &str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "{label} is {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let defect = (m + m.transpose()).amax();
    if defect > 1e-12 * m.amax().max(1.0) {
        return Err(Error::ShapeMismatch(format!(
            "{label} is not antisymmetric ({defect:e})"
        )));
    }
    Ok(())
}

/// Bracket of two linear spin functions given by antisymmetric coefficient
/// matrices; the result is again a coefficient matrix.
pub fn spin_bracket(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_antisymmetric(a, "left operand")?;
    check_antisymmetric(b, "right operand")?;
    if a.nrows() != b.nrows() {
        return Err(Error::ShapeMismatch(format!(
            "operands have dimensions {} and {}",
            a.nrows(),
            b.nrows()
        )));
    }
    Ok((b * a - a * b) * 0.5)
}

/// Lie-Poisson bracket `{F, G}(S) = sum dF/dS_ab dG/dS_cd [S_ab, S_cd]` with
/// the gradients taken over all `n^2` components.
pub fn lie_poisson(grad_f: &DMatrix<f64>, grad_g: &DMatrix<f64>, spin: &DMatrix<f64>) -> f64 {
    let n = spin.nrows();
    let mut total = 0.0;
    for a in 0..n {
        for b in 0..n {
            let fa = grad_f[(a, b)];
            if fa == 0.0 {
                continue;
            }
            for c in 0..n {
                for d in 0..n {
                    total += fa * grad_g[(c, d)] * basis_bracket(a, b, c, d, spin);
                }
            }
        }
    }
    total
}

/// `1/2 sum_ab S_ab S_ab`
pub fn casimir(spin: &DMatrix<f64>) -> f64 {
    0.5 * spin.iter().map(|s| s * s).sum::<f64>()
}

/// Basis element `E_ab - E_ba`, i.e. the linear function `S_ab` (for `a < b`).
pub fn basis(dim: usize, a: usize, b: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(dim, dim);
    m[(a, b)] += 1.0;
    m[(b, a)] -= 1.0;
    m
}
