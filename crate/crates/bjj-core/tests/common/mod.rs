// not every test binary uses every helper
#![allow(dead_code)]

use bjj_core::fock_lattice::LatticeShape;
use bjj_core::propagation::AmplitudeField;
use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;

/// Haar-ish random normalized field: i.i.d. complex gaussian components.
pub fn random_field<R: Rng>(shape: LatticeShape, rng: &mut R) -> AmplitudeField {
    let n = shape.site_count();
    let mut v = DVector::from_element(n, Complex64::new(0.0, 0.0));
    for i in 0..n {
        // Box-Muller
        let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
        let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let r = (-2.0 * u1.ln()).sqrt();
        v[i] = Complex64::new(r * u2.cos(), r * u2.sin());
    }
    AmplitudeField::normalized(shape, v).expect("non-zero random vector")
}

pub fn max_prob_deviation(a: &AmplitudeField, b: &AmplitudeField) -> f64 {
    a.amplitudes()
        .iter()
        .zip(b.amplitudes().iter())
        .map(|(x, y)| (x.norm_sqr() - y.norm_sqr()).abs())
        .fold(0.0, f64::max)
}

pub fn max_amplitude_deviation(a: &AmplitudeField, b: &AmplitudeField) -> f64 {
    a.amplitudes()
        .iter()
        .zip(b.amplitudes().iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
