use nalgebra::DMatrix;

/// An orthonormal coframe `theta^a = e^a_i(x) dx^i` on a single chart.
///
/// `coframe` returns the matrix with row `a` (frame label) and column `i`
/// (coordinate label). Analytic derivatives are optional; the finite-difference
/// backend only ever calls `coframe`.
pub trait FrameField: Send + Sync {
    fn dim(&self) -> usize;

    fn coframe(&self, x: &[f64]) -> DMatrix<f64>;

    /// `d[j]` holds `d_j e^a_i` (same layout as `coframe`).
    fn coframe_derivatives(&self, _x: &[f64]) -> Option<Vec<DMatrix<f64>>> {
        None
    }

    /// `d2[j * n + k]` holds `d_j d_k e^a_i`.
    fn coframe_second_derivatives(&self, _x: &[f64]) -> Option<Vec<DMatrix<f64>>> {
        None
    }

    fn in_chart(&self, _x: &[f64]) -> bool {
        true
    }
}

impl<T: FrameField + ?Sized> FrameField for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn coframe(&self, x: &[f64]) -> DMatrix<f64> {
        (**self).coframe(x)
    }
    fn coframe_derivatives(&self, x: &[f64]) -> Option<Vec<DMatrix<f64>>> {
        (**self).coframe_derivatives(x)
    }
    fn coframe_second_derivatives(&self, x: &[f64]) -> Option<Vec<DMatrix<f64>>> {
        (**self).coframe_second_derivatives(x)
    }
    fn in_chart(&self, x: &[f64]) -> bool {
        (**self).in_chart(x)
    }
}

impl<T: FrameField + ?Sized> FrameField for std::sync::Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn coframe(&self, x: &[f64]) -> DMatrix<f64> {
        (**self).coframe(x)
    }
    fn coframe_derivatives(&self, x: &[f64]) -> Option<Vec<DMatrix<f64>>> {
        (**self).coframe_derivatives(x)
    }
    fn coframe_second_derivatives(&self, x: &[f64]) -> Option<Vec<DMatrix<f64>>> {
        (**self).coframe_second_derivatives(x)
    }
    fn in_chart(&self, x: &[f64]) -> bool {
        (**self).in_chart(x)
    }
}

/// Frame supplied as plain closures. Handy for programmatic frames in tests
/// and library use.
pub struct ClosureFrame<E, D, DD, C>
where
    E: Fn(&[f64]) -> DMatrix<f64> + Send + Sync,
    D: Fn(&[f64]) -> Vec<DMatrix<f64>> + Send + Sync,
    DD: Fn(&[f64]) -> Vec<DMatrix<f64>> + Send + Sync,
    C: Fn(&[f64]) -> bool + Send + Sync,
{
    pub dim: usize,
    pub coframe: E,
    pub first: Option<D>,
    pub second: Option<DD>,
    pub domain: C,
}

impl<E, D, DD, C> FrameField for ClosureFrame<E, D, DD, C>
where
    E: Fn(&[f64]) -> DMatrix<f64> + Send + Sync,
    D: Fn(&[f64]) -> Vec<DMatrix<f64>> + Send + Sync,
    DD: Fn(&[f64]) -> Vec<DMatrix<f64>> + Send + Sync,
    C: Fn(&[f64]) -> bool + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn coframe(&self, x: &[f64]) -> DMatrix<f64> {
        (self.coframe)(x)
    }
    fn coframe_derivatives(&self, x: &[f64]) -> Option<Vec<DMatrix<f64>>> {
        self.first.as_ref().map(|f| f(x))
    }
    fn coframe_second_derivatives(&self, x: &[f64]) -> Option<Vec<DMatrix<f64>>> {
        self.second.as_ref().map(|f| f(x))
    }
    fn in_chart(&self, x: &[f64]) -> bool {
        (self.domain)(x)
    }
}

/// Wraps a frame and hides its analytic derivatives, forcing every consumer
/// onto finite differences.
pub struct CoframeOnly<F>(pub F);

impl<F: FrameField> FrameField for CoframeOnly<F> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn coframe(&self, x: &[f64]) -> DMatrix<f64> {
        self.0.coframe(x)
    }
    fn in_chart(&self, x: &[f64]) -> bool {
        self.0.in_chart(x)
    }
}
