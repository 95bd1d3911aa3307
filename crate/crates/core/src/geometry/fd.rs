//! Central-difference stencils in chart coordinates.
//!
//! Steps are `max(|x^i|, 1) * rel` rounded down to a power of two so that
//! `x +- h` is exact and coframe entries linear in a coordinate are
//! differentiated without rounding error.

use nalgebra::DMatrix;

use super::FrameField;

/// Relative step sizes for the finite-difference backend.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteDifference {
    pub first_rel_step: f64,
    pub second_rel_step: f64,
}

impl Default for FiniteDifference {
    fn default() -> Self {
        Self {
            first_rel_step: f64::EPSILON.cbrt(),
            second_rel_step: f64::EPSILON.powf(0.25),
        }
    }
}

impl FiniteDifference {
    /// Same relative step for first and second derivatives; used by
    /// convergence studies.
    pub fn with_step(rel_step: f64) -> Self {
        Self {
            first_rel_step: rel_step,
            second_rel_step: rel_step,
        }
    }

    pub fn first_step(&self, coord: f64) -> f64 {
        step_for(coord, self.first_rel_step)
    }

    pub fn second_step(&self, coord: f64) -> f64 {
        step_for(coord, self.second_rel_step)
    }
}

pub fn step_for(coord: f64, rel: f64) -> f64 {
    let raw = coord.abs().max(1.0) * rel;
    2f64.powi(raw.log2().floor() as i32)
}

fn shifted(x: &[f64], shifts: &[(usize, f64)]) -> Vec<f64> {
    let mut y = x.to_vec();
    for &(i, h) in shifts {
        y[i] += h;
    }
    y
}

/// `d[j] = d_j e^a_i` by second-order central differences of the coframe.
pub fn coframe_first<F: FrameField + ?Sized>(
    frame: &F,
    x: &[f64],
    fd: &FiniteDifference,
) -> Vec<DMatrix<f64>> {
    (0..x.len())
        .map(|j| {
            let h = fd.first_step(x[j]);
            let plus = frame.coframe(&shifted(x, &[(j, h)]));
            let minus = frame.coframe(&shifted(x, &[(j, -h)]));
            (plus - minus) / (2.0 * h)
        })
        .collect()
}

/// `d2[j * n + k] = d_j d_k e^a_i` from coframe values only.
pub fn coframe_second<F: FrameField + ?Sized>(
    frame: &F,
    x: &[f64],
    fd: &FiniteDifference,
) -> Vec<DMatrix<f64>> {
    let n = x.len();
    let center = frame.coframe(x);
    let mut out = vec![DMatrix::zeros(n, n); n * n];
    for j in 0..n {
        let hj = fd.second_step(x[j]);
        let plus = frame.coframe(&shifted(x, &[(j, hj)]));
        let minus = frame.coframe(&shifted(x, &[(j, -hj)]));
        out[j * n + j] = (plus + minus - &center * 2.0) / (hj * hj);
        for k in (j + 1)..n {
            let hk = fd.second_step(x[k]);
            let pp = frame.coframe(&shifted(x, &[(j, hj), (k, hk)]));
            let pm = frame.coframe(&shifted(x, &[(j, hj), (k, -hk)]));
            let mp = frame.coframe(&shifted(x, &[(j, -hj), (k, hk)]));
            let mm = frame.coframe(&shifted(x, &[(j, -hj), (k, -hk)]));
            let mixed = (pp - pm - mp + mm) / (4.0 * hj * hk);
            out[k * n + j] = mixed.clone();
            out[j * n + k] = mixed;
        }
    }
    out
}

/// Second derivatives by differencing analytic first derivatives.
pub fn coframe_second_from_first<F: FrameField + ?Sized>(
    frame: &F,
    x: &[f64],
    fd: &FiniteDifference,
) -> Option<Vec<DMatrix<f64>>> {
    let n = x.len();
    let mut out = vec![DMatrix::zeros(n, n); n * n];
    for k in 0..n {
        let h = fd.first_step(x[k]);
        let plus = frame.coframe_derivatives(&shifted(x, &[(k, h)]))?;
        let minus = frame.coframe_derivatives(&shifted(x, &[(k, -h)]))?;
        for j in 0..n {
            out[k * n + j] = (&plus[j] - &minus[j]) / (2.0 * h);
        }
    }
    // symmetrize: d_j d_k = d_k d_j
    for j in 0..n {
        for k in (j + 1)..n {
            let avg = (&out[j * n + k] + &out[k * n + j]) * 0.5;
            out[j * n + k] = avg.clone();
            out[k * n + j] = avg;
        }
    }
    Some(out)
}

/// Central-difference gradient of a scalar function of the chart point.
pub fn gradient<E>(
    f: impl Fn(&[f64]) -> Result<f64, E>,
    x: &[f64],
    rel_step: f64,
) -> Result<Vec<f64>, E> {
    (0..x.len())
        .map(|i| {
            let h = step_for(x[i], rel_step);
            let plus = f(&shifted(x, &[(i, h)]))?;
            let minus = f(&shifted(x, &[(i, -h)]))?;
            Ok((plus - minus) / (2.0 * h))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn steps_are_powers_of_two() {
        for &x in &[0.0, 0.3, 1.0, 2.5, -17.0, 1e3] {
            let h = step_for(x, f64::EPSILON.cbrt());
            assert_eq!(h, 2f64.powi(h.log2() as i32));
            assert!(h <= x.abs().max(1.0) * f64::EPSILON.cbrt());
            assert!(h > 0.5 * x.abs().max(1.0) * f64::EPSILON.cbrt());
        }
    }

    #[test]
    fn gradient_of_quadratic() {
        let f = |x: &[f64]| -> Result<f64, ()> { Ok(x[0] * x[0] + 3.0 * x[0] * x[1]) };
        let g = gradient(f, &[1.5, -2.0], 1e-4).unwrap();
        assert!((g[0] - (3.0 - 6.0)).abs() < 1e-9);
        assert!((g[1] - 4.5).abs() < 1e-9);
    }
}
