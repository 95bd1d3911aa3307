//! Second structure equation.
//!
//! `Omega_ab = d omega_ab + omega_ac ^ omega_cb` and the Riemann components are
//! taken with the half-factor expansion
//! `Omega_ab = 1/2 R_cdab theta^c ^ theta^d`, so that `R_1212 = K` on a surface
//! of Gaussian curvature `K` (the round sphere of radius `R` gives `1/R^2`).
//! Storage order is `[c, d, a, b]`: the 2-form pair first, the matrix pair last.

use nalgebra::DMatrix;

use super::connection::{commutation_coefficients, ConnectionCoeffs};
use super::jet::FrameJet;
use crate::tensor::{Tensor3, Tensor4};

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureTensor(pub Tensor4);

impl CurvatureTensor {
    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    #[inline]
    pub fn get(&self, c: usize, d: usize, a: usize, b: usize) -> f64 {
        self.0[(c, d, a, b)]
    }

    /// Sectional curvature of the frame plane spanned by `e_a`, `e_b`.
    pub fn sectional(&self, a: usize, b: usize) -> f64 {
        self.0[(a, b, a, b)]
    }

    /// Largest defects of the two antisymmetries `(c,d)` and `(a,b)`.
    pub fn antisymmetry_defects(&self) -> (f64, f64) {
        let n = self.dim();
        let (mut form, mut matrix) = (0.0_f64, 0.0_f64);
        for c in 0..n {
            for d in 0..n {
                for a in 0..n {
                    for b in 0..n {
                        let r = self.0[(c, d, a, b)];
                        form = form.max((r + self.0[(d, c, a, b)]).abs());
                        matrix = matrix.max((r + self.0[(c, d, b, a)]).abs());
                    }
                }
            }
        }
        (form, matrix)
    }

    /// Largest `|R_cdab + R_dacb + R_acdb|`.
    pub fn bianchi_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0_f64;
        for c in 0..n {
            for d in 0..n {
                for a in 0..n {
                    for b in 0..n {
                        let s = self.0[(c, d, a, b)] + self.0[(d, a, c, b)] + self.0[(a, c, d, b)];
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }

    /// Curvature force `F_a = R_cdab v^b S^cd` summed over all `b, c, d`.
    pub fn spin_force(&self, velocity: &[f64], spin: &DMatrix<f64>) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|a| {
                let mut f = 0.0;
                for b in 0..n {
                    for c in 0..n {
                        for d in 0..n {
                            f += self.0[(c, d, a, b)] * velocity[b] * spin[(c, d)];
                        }
                    }
                }
                f
            })
            .collect()
    }
}

/// Coordinate components `omega_ab,j = gamma_cab e^c_j`.
fn connection_form(jet: &FrameJet, gamma: &Tensor3) -> Tensor3 {
    let n = jet.dim();
    Tensor3::from_fn(n, |a, b, j| {
        (0..n).map(|c| gamma[(c, a, b)] * jet.coframe[(c, j)]).sum()
    })
}

/// Exterior-derivative path: build `Omega` in coordinate components, then
/// project onto the frame.
pub fn curvature_exterior(
    jet: &FrameJet,
    gamma: &ConnectionCoeffs,
    dgamma: &[Tensor3],
) -> CurvatureTensor {
    let n = jet.dim();
    let g = &gamma.0;
    let omega = connection_form(jet, g);
    // d_i omega_ab,j
    let domega: Vec<Tensor3> = (0..n)
        .map(|i| {
            Tensor3::from_fn(n, |a, b, j| {
                (0..n)
                    .map(|c| {
                        dgamma[i][(c, a, b)] * jet.coframe[(c, j)]
                            + g[(c, a, b)] * jet.first[i][(c, j)]
                    })
                    .sum()
            })
        })
        .collect();

    let mut r = Tensor4::zeros(n);
    for a in 0..n {
        for b in 0..n {
            let coord = DMatrix::from_fn(n, n, |i, j| {
                let mut v = domega[i][(a, b, j)] - domega[j][(a, b, i)];
                for e in 0..n {
                    v += omega[(a, e, i)] * omega[(e, b, j)] - omega[(a, e, j)] * omega[(e, b, i)];
                }
                v
            });
            let frame = jet.inverse.transpose() * coord * &jet.inverse;
            for c in 0..n {
                for d in 0..n {
                    r[(c, d, a, b)] = frame[(c, d)];
                }
            }
        }
    }
    CurvatureTensor(r)
}

/// Frame-component path:
/// `R_cdab = d_c gamma_dab - d_d gamma_cab - gamma_eab C^e_cd
///           + gamma_cae gamma_deb - gamma_dae gamma_ceb`
/// with `d_c = e^i_c d_i`.
pub fn curvature_frame(
    jet: &FrameJet,
    gamma: &ConnectionCoeffs,
    dgamma: &[Tensor3],
) -> CurvatureTensor {
    let n = jet.dim();
    let g = &gamma.0;
    let comm = commutation_coefficients(jet);
    // frame derivative d_c gamma_xab
    let frame_dgamma: Vec<Tensor3> = (0..n)
        .map(|c| {
            Tensor3::from_fn(n, |x, a, b| {
                (0..n)
                    .map(|i| jet.inverse[(i, c)] * dgamma[i][(x, a, b)])
                    .sum()
            })
        })
        .collect();
    CurvatureTensor(Tensor4::from_fn(n, |c, d, a, b| {
        let mut v = frame_dgamma[c][(d, a, b)] - frame_dgamma[d][(c, a, b)];
        for e in 0..n {
            v -= g[(e, a, b)] * comm[(e, c, d)];
            v += g[(c, a, e)] * g[(d, e, b)] - g[(d, a, e)] * g[(c, e, b)];
        }
        v
    }))
}
