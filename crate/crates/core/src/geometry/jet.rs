use nalgebra::DMatrix;

use super::fd::{self, FiniteDifference};
use super::{Derivatives, FrameField};
use crate::error::{Error, Result};

/// Frames whose condition number exceeds this are treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

/// How many coordinate derivatives of the coframe to gather.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum JetOrder {
    First,
    Second,
}

/// Coframe, its inverse and its coordinate derivatives at one chart point.
#[derive(Debug, Clone)]
pub struct FrameJet {
    pub point: Vec<f64>,
    /// `e^a_i`, row = frame label.
    pub coframe: DMatrix<f64>,
    /// `e^i_a`, row = coordinate label.
    pub inverse: DMatrix<f64>,
    /// `first[j] = d_j e^a_i`
    pub first: Vec<DMatrix<f64>>,
    /// `second[j * n + k] = d_j d_k e^a_i`
    pub second: Option<Vec<DMatrix<f64>>>,
}

impl FrameJet {
    pub fn evaluate<F: FrameField + ?Sized>(
        frame: &F,
        x: &[f64],
        derivatives: &Derivatives,
        order: JetOrder,
    ) -> Result<Self> {
        let n = frame.dim();
        check_point(frame, x)?;
        let coframe = frame.coframe(x);
        if coframe.nrows() != n || coframe.ncols() != n {
            return Err(Error::ShapeMismatch(format!(
                "coframe is {}x{}, expected {n}x{n}",
                coframe.nrows(),
                coframe.ncols()
            )));
        }
        let inverse = invert_coframe(&coframe, x)?;

        let (first, second) = match derivatives {
            Derivatives::Analytic => {
                let first = frame.coframe_derivatives(x).ok_or_else(|| {
                    Error::DerivativeUnavailable("frame has no analytic coframe derivatives".into())
                })?;
                let second = if order == JetOrder::Second {
                    match frame.coframe_second_derivatives(x) {
                        Some(d2) => Some(d2),
                        None => {
                            fd::coframe_second_from_first(frame, x, &FiniteDifference::default())
                        }
                    }
                } else {
                    None
                };
                (first, second)
            }
            Derivatives::FiniteDifference(steps) => {
                let first = fd::coframe_first(frame, x, steps);
                let second =
                    (order == JetOrder::Second).then(|| fd::coframe_second(frame, x, steps));
                (first, second)
            }
        };
        if first.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "{} coframe derivative matrices, expected {n}",
                first.len()
            )));
        }
        if let Some(d2) = &second {
            if d2.len() != n * n {
                return Err(Error::ShapeMismatch(format!(
                    "{} second-derivative matrices, expected {}",
                    d2.len(),
                    n * n
                )));
            }
        }

        Ok(Self {
            point: x.to_vec(),
            coframe,
            inverse,
            first,
            second,
        })
    }

    pub fn dim(&self) -> usize {
        self.coframe.nrows()
    }

    /// `d_k e^i_a = -e^i_b (d_k e^b_j) e^j_a`
    pub fn inverse_derivatives(&self) -> Vec<DMatrix<f64>> {
        self.first
            .iter()
            .map(|d| -(&self.inverse * d * &self.inverse))
            .collect()
    }

    pub fn second(&self) -> Result<&[DMatrix<f64>]> {
        self.second.as_deref().ok_or_else(|| {
            Error::DerivativeUnavailable("second coframe derivatives were not gathered".into())
        })
    }

    /// `g_ij = delta_ab e^a_i e^b_j`
    pub fn metric(&self) -> DMatrix<f64> {
        let g = self.coframe.transpose() * &self.coframe;
        // exact symmetry
        (&g + g.transpose()) * 0.5
    }
}

pub(crate) fn check_point<F: FrameField + ?Sized>(frame: &F, x: &[f64]) -> Result<()> {
    let n = frame.dim();
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: x.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) || !frame.in_chart(x) {
        return Err(Error::OutOfChart(x.to_vec()));
    }
    Ok(())
}

pub(crate) fn invert_coframe(coframe: &DMatrix<f64>, x: &[f64]) -> Result<DMatrix<f64>> {
    let sv = coframe.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    if !condition.is_finite() || condition > MAX_CONDITION {
        return Err(Error::SingularFrame {
            point: x.to_vec(),
            condition,
        });
    }
    coframe.clone().try_inverse().ok_or(Error::SingularFrame {
        point: x.to_vec(),
        condition,
    })
}
