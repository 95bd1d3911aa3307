//! First structure equation.
//!
//! Conventions (fixed once, used everywhere):
//!
//! * `d theta^a = -1/2 C^a_bc theta^b ^ theta^c`, computed as
//!   `C^a_bc = e^i_b e^j_c (d_j e^a_i - d_i e^a_j)`.
//! * `d theta^a = omega_b^a ^ theta^b` with `omega_b^c = gamma_abc theta^a`,
//!   so `gamma_abc` is the component along `theta^a` of the antisymmetric
//!   connection matrix `omega_bc`.
//! * Solving gives `gamma_cab = 1/2 (C_cab - C_abc + C_bac)` with
//!   `C_xyz = C^x_yz`.
//!
//! Antisymmetry in the last two slots is built in: only `b < c` (resp.
//! `a < b`) entries are computed and the rest are filled by negation.

use nalgebra::DMatrix;

use super::jet::FrameJet;
use crate::error::Result;
use crate::tensor::Tensor3;

/// Connection coefficients `gamma_abc` at a point, antisymmetric in `(b, c)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionCoeffs(pub Tensor3);

impl ConnectionCoeffs {
    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.0[(a, b, c)]
    }

    /// `omega_bc(v) = gamma_abc v^a` for a frame vector `v`.
    pub fn contract_first(&self, v: &[f64]) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |b, c| (0..n).map(|a| v[a] * self.0[(a, b, c)]).sum())
    }

    /// Largest `|gamma_abc + gamma_acb|`.
    pub fn antisymmetry_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0_f64;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    worst = worst.max((self.0[(a, b, c)] + self.0[(a, c, b)]).abs());
                }
            }
        }
        worst
    }
}

fn commutation_from(inverse: &DMatrix<f64>, first: &[DMatrix<f64>]) -> Tensor3 {
    let n = inverse.nrows();
    let mut c = Tensor3::zeros(n);
    for a in 0..n {
        for b in 0..n {
            for cc in (b + 1)..n {
                let mut sum = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        sum += inverse[(i, b)]
                            * inverse[(j, cc)]
                            * (first[j][(a, i)] - first[i][(a, j)]);
                    }
                }
                c[(a, b, cc)] = sum;
                c[(a, cc, b)] = -sum;
            }
        }
    }
    c
}

/// `C^a_bc` stored as `[a, b, c]`.
pub fn commutation_coefficients(jet: &FrameJet) -> Tensor3 {
    commutation_from(&jet.inverse, &jet.first)
}

/// Coordinate derivatives `d_k C^a_bc`, one tensor per chart coordinate.
pub fn commutation_derivatives(jet: &FrameJet) -> Result<Vec<Tensor3>> {
    let n = jet.dim();
    let second = jet.second()?;
    let d_inverse = jet.inverse_derivatives();
    let e = &jet.inverse;
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let de = &d_inverse[k];
        let mut dc = Tensor3::zeros(n);
        for a in 0..n {
            for b in 0..n {
                for cc in (b + 1)..n {
                    let mut sum = 0.0;
                    for i in 0..n {
                        for j in 0..n {
                            let curl = jet.first[j][(a, i)] - jet.first[i][(a, j)];
                            let dcurl = second[k * n + j][(a, i)] - second[k * n + i][(a, j)];
                            sum += (de[(i, b)] * e[(j, cc)] + e[(i, b)] * de[(j, cc)]) * curl
                                + e[(i, b)] * e[(j, cc)] * dcurl;
                        }
                    }
                    dc[(a, b, cc)] = sum;
                    dc[(a, cc, b)] = -sum;
                }
            }
        }
        out.push(dc);
    }
    Ok(out)
}

/// Linear solve of the first structure equation for `gamma` given `C`.
pub fn gamma_from_commutation(c: &Tensor3) -> Tensor3 {
    let n = c.dim();
    let mut g = Tensor3::zeros(n);
    for k in 0..n {
        for a in 0..n {
            for b in (a + 1)..n {
                let v = 0.5 * (c[(k, a, b)] - c[(a, b, k)] + c[(b, a, k)]);
                g[(k, a, b)] = v;
                g[(k, b, a)] = -v;
            }
        }
    }
    g
}

pub fn connection_at(jet: &FrameJet) -> ConnectionCoeffs {
    ConnectionCoeffs(gamma_from_commutation(&commutation_coefficients(jet)))
}

/// `d_k gamma_abc` (coordinate derivatives), one tensor per coordinate `k`.
pub fn connection_derivatives_at(jet: &FrameJet) -> Result<Vec<Tensor3>> {
    Ok(commutation_derivatives(jet)?
        .iter()
        .map(gamma_from_commutation)
        .collect())
}
