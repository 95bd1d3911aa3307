#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use tangent_body::dynamics::{AngularVelocity, SpinTensor};
use tangent_body::geometry::FrameField;
use tangent_body::scenarios::Scenario;

/// Metric-only geodesic vector field `(dx^i/dt, dp_i/dt)` for
/// `H = g^ij p_i p_j / 2m`, built from `g = E^T E` and its analytic
/// derivative without touching connection coefficients.
pub fn geodesic_field(
    frame: &dyn FrameField,
    x: &[f64],
    p: &[f64],
    mass: f64,
) -> (Vec<f64>, Vec<f64>) {
    let e = frame.coframe(x);
    let de = frame.coframe_derivatives(x).expect("analytic derivatives");
    let g = e.transpose() * &e;
    let ginv = g.clone().try_inverse().unwrap();
    let pv = DVector::from_column_slice(p);
    let xdot = (&ginv * &pv) / mass;
    let pdot: Vec<f64> = (0..x.len())
        .map(|k| {
            let dg = de[k].transpose() * &e + e.transpose() * &de[k];
            let dginv = -(&ginv * dg * &ginv);
            -0.5 * (pv.transpose() * dginv * &pv)[(0, 0)] / mass
        })
        .collect();
    (xdot.as_slice().to_vec(), pdot)
}

pub fn random_point(rng: &mut impl Rng, scenario: &Scenario) -> Vec<f64> {
    scenario
        .sample_box
        .iter()
        .map(|&(lo, hi)| rng.gen_range(lo..hi))
        .collect()
}

pub fn random_vector(rng: &mut impl Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-scale..scale)).collect()
}

pub fn random_antisymmetric(rng: &mut impl Rng, n: usize, scale: f64) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in (a + 1)..n {
            let v = rng.gen_range(-scale..scale);
            m[(a, b)] = v;
            m[(b, a)] = -v;
        }
    }
    m
}

pub fn random_spin(rng: &mut impl Rng, n: usize, scale: f64) -> SpinTensor {
    SpinTensor::from_matrix(&random_antisymmetric(rng, n, scale)).unwrap()
}

pub fn random_eta(rng: &mut impl Rng, n: usize, scale: f64) -> AngularVelocity {
    AngularVelocity::new(random_antisymmetric(rng, n, scale)).unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
