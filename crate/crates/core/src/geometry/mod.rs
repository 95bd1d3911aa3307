//! Frame-field geometry: metric, connection coefficients and curvature from an
//! orthonormal coframe via the two structure equations.

mod connection;
mod curvature;
pub mod fd;
mod frame;
mod jet;

use nalgebra::DMatrix;
use serde::Serialize;

pub use connection::{
    commutation_derivatives, connection_at, connection_derivatives_at, gamma_from_commutation,
    ConnectionCoeffs,
};
pub use curvature::{curvature_exterior, curvature_frame, CurvatureTensor};
pub use fd::FiniteDifference;
pub use frame::{ClosureFrame, CoframeOnly, FrameField};
pub use jet::{FrameJet, JetOrder, MAX_CONDITION};

use crate::error::Result;
use crate::tensor::Tensor3;

/// Source of coframe derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Derivatives {
    /// Use the frame's closed-form derivatives. Second derivatives fall back
    /// to differencing the analytic first derivatives when absent.
    #[default]
    Analytic,
    FiniteDifference(FiniteDifference),
}

impl Derivatives {
    pub fn finite_difference() -> Self {
        Derivatives::FiniteDifference(FiniteDifference::default())
    }
}

/// Everything the dynamics needs at one chart point.
#[derive(Debug, Clone)]
pub struct PointGeometry {
    pub jet: FrameJet,
    pub gamma: ConnectionCoeffs,
    /// `d_k gamma_abc`, present when the jet was built to second order.
    pub dgamma: Option<Vec<Tensor3>>,
}

impl PointGeometry {
    pub fn evaluate<F: FrameField + ?Sized>(
        frame: &F,
        x: &[f64],
        derivatives: &Derivatives,
        order: JetOrder,
    ) -> Result<Self> {
        let jet = FrameJet::evaluate(frame, x, derivatives, order)?;
        let gamma = connection_at(&jet);
        let dgamma = match order {
            JetOrder::Second => Some(connection_derivatives_at(&jet)?),
            JetOrder::First => None,
        };
        Ok(Self { jet, gamma, dgamma })
    }

    pub fn dim(&self) -> usize {
        self.jet.dim()
    }

    pub fn dgamma(&self) -> Result<&[Tensor3]> {
        self.dgamma.as_deref().ok_or_else(|| {
            crate::error::Error::DerivativeUnavailable(
                "connection derivatives were not gathered".into(),
            )
        })
    }

    pub fn curvature(&self) -> Result<CurvatureTensor> {
        Ok(curvature_exterior(&self.jet, &self.gamma, self.dgamma()?))
    }
}

/// `g_ij = delta_ab e^a_i e^b_j`.
pub fn metric_at<F: FrameField + ?Sized>(frame: &F, x: &[f64]) -> Result<DMatrix<f64>> {
    jet::check_point(frame, x)?;
    let e = frame.coframe(x);
    jet::invert_coframe(&e, x)?;
    let g = e.transpose() * &e;
    Ok((&g + g.transpose()) * 0.5)
}

/// `(e^a_i, e^i_a)` at `x`, with the chart and singularity checks.
pub fn coframe_with_inverse<F: FrameField + ?Sized>(
    frame: &F,
    x: &[f64],
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    jet::check_point(frame, x)?;
    let e = frame.coframe(x);
    let inv = jet::invert_coframe(&e, x)?;
    Ok((e, inv))
}

pub fn commutation_coefficients<F: FrameField + ?Sized>(
    frame: &F,
    x: &[f64],
    derivatives: &Derivatives,
) -> Result<Tensor3> {
    let jet = FrameJet::evaluate(frame, x, derivatives, JetOrder::First)?;
    Ok(connection::commutation_coefficients(&jet))
}

pub fn connection_from_frame<F: FrameField + ?Sized>(
    frame: &F,
    x: &[f64],
    derivatives: &Derivatives,
) -> Result<ConnectionCoeffs> {
    let jet = FrameJet::evaluate(frame, x, derivatives, JetOrder::First)?;
    Ok(connection_at(&jet))
}

pub fn curvature_from_connection<F: FrameField + ?Sized>(
    frame: &F,
    x: &[f64],
    derivatives: &Derivatives,
) -> Result<CurvatureTensor> {
    PointGeometry::evaluate(frame, x, derivatives, JetOrder::Second)?.curvature()
}

/// Max-norm residuals of the two structure equations at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StructureResiduals {
    /// `|d theta^a - omega_b^a ^ theta^b|` in coordinate components.
    pub first: f64,
    /// `|Omega (exterior path) - Omega (frame-component path)|`.
    pub second: f64,
}

/// Checks both structure equations. The connection and curvature under test
/// come from `derivatives`; the reference side (the exterior derivative of
/// the coframe, and the frame-component curvature) uses the frame's analytic
/// derivatives whenever it has them, so a finite-difference backend shows
/// its truncation error here.
pub fn verify_structure_equations<F: FrameField + ?Sized>(
    frame: &F,
    x: &[f64],
    derivatives: &Derivatives,
) -> Result<StructureResiduals> {
    let tested = PointGeometry::evaluate(frame, x, derivatives, JetOrder::Second)?;
    let reference = if frame.coframe_derivatives(x).is_some() {
        PointGeometry::evaluate(frame, x, &Derivatives::Analytic, JetOrder::Second)?
    } else {
        tested.clone()
    };

    let n = tested.dim();
    let e = &tested.jet.coframe;
    let g = &tested.gamma.0;
    let mut first = 0.0_f64;
    for a in 0..n {
        for i in 0..n {
            for j in (i + 1)..n {
                let d_theta = reference.jet.first[i][(a, j)] - reference.jet.first[j][(a, i)];
                let mut wedge = 0.0;
                for b in 0..n {
                    let (mut w_i, mut w_j) = (0.0, 0.0);
                    for c in 0..n {
                        w_i += g[(c, b, a)] * e[(c, i)];
                        w_j += g[(c, b, a)] * e[(c, j)];
                    }
                    wedge += w_i * e[(b, j)] - w_j * e[(b, i)];
                }
                first = first.max((d_theta - wedge).abs());
            }
        }
    }

    let exterior = tested.curvature()?;
    let frame_path = curvature_frame(&reference.jet, &reference.gamma, reference.dgamma()?);
    let second = exterior.0.max_abs_diff(&frame_path.0);
    Ok(StructureResiduals { first, second })
}
