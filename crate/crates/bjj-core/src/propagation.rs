//! Exact time evolution by spectral decomposition.
//!
//! The lattice is small by construction, so `dc/dt = i M c` is solved
//! exactly: M = Q diag(lambda) Q^T once, then
//! `c(t) = Q exp(i lambda t) Q^T c(0)` for arbitrary t at O(n^2) per
//! sample. Trajectories are always sampled from t = 0 via the
//! decomposition, never step-chained.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock_lattice::{EffectiveHamiltonian, FockLabel, LatticeShape};

/// Tolerance on Sum |c|^2 = 1 when a field is constructed from raw amplitudes.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Normalized complex amplitudes over the full lattice; the quantum state.
#[derive(Debug, Clone)]
pub struct AmplitudeField {
    shape: LatticeShape,
    amplitudes: DVector<Complex64>,
}

impl AmplitudeField {
    /// Requires the amplitudes to be normalized within [`NORM_TOLERANCE`].
    pub fn new(shape: LatticeShape, amplitudes: DVector<Complex64>) -> Result<Self> {
        if amplitudes.len() != shape.site_count() {
            return Err(Error::Config(format!(
                "amplitude vector of length {} does not match the {}-site lattice",
                amplitudes.len(),
                shape.site_count()
            )));
        }
        let norm_sqr: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Domain(format!(
                "field not normalized: sum |c|^2 = {norm_sqr}"
            )));
        }
        Ok(Self { shape, amplitudes })
    }

    /// Rescales an arbitrary non-zero vector to unit norm.
    pub fn normalized(shape: LatticeShape, amplitudes: DVector<Complex64>) -> Result<Self> {
        if amplitudes.len() != shape.site_count() {
            return Err(Error::Config(format!(
                "amplitude vector of length {} does not match the {}-site lattice",
                amplitudes.len(),
                shape.site_count()
            )));
        }
        let norm_sqr: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum();
        if norm_sqr <= 0.0 || !norm_sqr.is_finite() {
            return Err(Error::Domain(format!(
                "cannot normalize a field with sum |c|^2 = {norm_sqr}"
            )));
        }
        let scale = Complex64::new(1.0 / norm_sqr.sqrt(), 0.0);
        Ok(Self { shape, amplitudes: amplitudes * scale })
    }

    /// Delta excitation at a single lattice site.
    pub fn from_fock(shape: LatticeShape, label: FockLabel) -> Result<Self> {
        shape.validate(label)?;
        let mut amplitudes = DVector::from_element(shape.site_count(), Complex64::new(0.0, 0.0));
        amplitudes[shape.index_of(label)] = Complex64::new(1.0, 0.0);
        Ok(Self { shape, amplitudes })
    }

    pub(crate) fn from_parts_unchecked(shape: LatticeShape, amplitudes: DVector<Complex64>) -> Self {
        Self { shape, amplitudes }
    }

    pub fn shape(&self) -> LatticeShape {
        self.shape
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, label: FockLabel) -> Complex64 {
        self.amplitudes[self.shape.index_of(label)]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Inner product <self|other>.
    pub fn overlap(&self, other: &AmplitudeField) -> Result<Complex64> {
        if self.shape != other.shape {
            return Err(Error::Config("overlap of fields on different shapes".into()));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// |<self|other>|^2.
    pub fn fidelity_with(&self, other: &AmplitudeField) -> Result<f64> {
        Ok(self.overlap(other)?.norm_sqr())
    }
}

/// Eigendecomposition M = Q diag(lambda) Q^T of an effective Hamiltonian.
#[derive(Debug, Clone)]
pub struct SpectralPropagator {
    shape: LatticeShape,
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

impl SpectralPropagator {
    pub fn shape(&self) -> LatticeShape {
        self.shape
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }
}

const RECONSTRUCTION_TOLERANCE: f64 = 1e-10;
const ORTHOGONALITY_TOLERANCE: f64 = 1e-10;

/// Diagonalizes the Hamiltonian and verifies the decomposition:
/// ||Q diag(lambda) Q^T - M||_max <= 1e-10 ||M||_max and
/// ||Q^T Q - I||_max <= 1e-10.
pub fn decompose(h: &EffectiveHamiltonian) -> Result<SpectralPropagator> {
    let m = h.matrix();
    let n = m.nrows();
    let eig = m.clone().symmetric_eigen();
    let q = eig.eigenvectors;
    let lambda = eig.eigenvalues;

    let m_max = m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let recon = &q * DMatrix::from_diagonal(&lambda) * q.transpose();
    let recon_err = (&recon - m).iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if recon_err > RECONSTRUCTION_TOLERANCE * m_max {
        return Err(Error::Numerical(format!(
            "eigendecomposition of {n}x{n} matrix failed reconstruction: \
             max deviation {recon_err:.3e} vs allowance {:.3e} (||M||_max = {m_max:.3e})",
            RECONSTRUCTION_TOLERANCE * m_max
        )));
    }
    let gram = q.transpose() * &q;
    let mut ortho_err = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            ortho_err = ortho_err.max((gram[(i, j)] - target).abs());
        }
    }
    if ortho_err > ORTHOGONALITY_TOLERANCE {
        return Err(Error::Numerical(format!(
            "eigenvectors of {n}x{n} matrix not orthogonal: max deviation {ortho_err:.3e}"
        )));
    }

    Ok(SpectralPropagator { shape: h.shape(), eigenvalues: lambda, eigenvectors: q })
}

/// c(t) = Q exp(i lambda t) Q^T c(0). Negative t runs the evolution backwards.
pub fn evolve(prop: &SpectralPropagator, initial: &AmplitudeField, t: f64) -> Result<AmplitudeField> {
    if initial.shape() != prop.shape {
        return Err(Error::Config(
            "initial field shape does not match the propagator shape".into(),
        ));
    }
    let n = prop.dim();
    let q = &prop.eigenvectors;
    let c0 = initial.amplitudes();

    // w = Q^T c0
    let mut w = vec![Complex64::new(0.0, 0.0); n];
    for (j, wj) in w.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            acc += q[(i, j)] * c0[i];
        }
        *wj = acc;
    }
    for (j, wj) in w.iter_mut().enumerate() {
        *wj *= Complex64::from_polar(1.0, prop.eigenvalues[j] * t);
    }
    let mut out = DVector::from_element(n, Complex64::new(0.0, 0.0));
    for i in 0..n {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, wj) in w.iter().enumerate() {
            acc += q[(i, j)] * *wj;
        }
        out[i] = acc;
    }
    Ok(AmplitudeField::from_parts_unchecked(prop.shape, out))
}

/// Samples the evolution on a strictly increasing grid of propagation
/// distances. Each sample is computed independently from the same
/// decomposition.
pub fn evolve_trajectory(
    prop: &SpectralPropagator,
    initial: &AmplitudeField,
    t_grid: &[f64],
) -> Result<Vec<AmplitudeField>> {
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("trajectory grid must be strictly increasing".into()));
    }
    t_grid.iter().map(|&t| evolve(prop, initial, t)).collect()
}

/// Uniform grid of `samples` points covering [0, t_final].
pub fn uniform_grid(t_final: f64, samples: usize) -> Result<Vec<f64>> {
    if samples < 2 {
        return Err(Error::Config(format!(
            "a trajectory needs at least 2 samples, got {samples}"
        )));
    }
    if t_final.is_nan() || t_final <= 0.0 {
        return Err(Error::Config(format!("t_final must be positive, got {t_final}")));
    }
    let step = t_final / (samples - 1) as f64;
    Ok((0..samples).map(|i| i as f64 * step).collect())
}
