//! Fock-lattice index space and effective tight-binding Hamiltonians.
//!
//! Two bosonic species A and B in a double well are encoded by the Fock
//! states `|k,l>` with `k` A-particles and `l` B-particles in the left
//! mode. The amplitudes `c_{k,l}` live on a square lattice of
//! `(N_A+1) x (N_B+1)` sites and obey
//!
//! ```text
//!   dc/dt = i M c,
//! ```
//!
//! where the real symmetric matrix `M` carries the hopping amplitudes
//!
//! ```text
//!   kappa_k^A = (Omega_A/2) sqrt((k+1)(N_A-k))      (vertical bonds)
//!   kappa_l^B = (Omega_B/2) sqrt((l+1)(N_B-l))      (horizontal bonds)
//! ```
//!
//! on the off-diagonal and the on-site detunings
//!
//! ```text
//!   V_{k,l} = -(U_A/2)(k^2 + (N_A-k)^2 - N_A)
//!             -(U_B/2)(l^2 + (N_B-l)^2 - N_B)
//!             - U_AB (kl + (N_A-k)(N_B-l))
//! ```
//!
//! on the diagonal. All rates are in cm^-1 and the evolution parameter is
//! the propagation distance in cm (hbar = 1). This matches Schroedinger
//! evolution with H = -M, so `exp(iMt)` is the physical propagator.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Hard cap on the lattice dimension; dense storage is intentional and
/// anything past this size is almost certainly a misconfiguration.
pub const MAX_SITES: usize = 10_000;

/// Particle content of the two species; fixes the lattice extent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LatticeShape {
    n_a: usize,
    n_b: usize,
}

impl LatticeShape {
    /// `n_a` and `n_b` are the total particle numbers of species A and B.
    pub fn new(n_a: usize, n_b: usize) -> Result<Self> {
        let sites = (n_a + 1) * (n_b + 1);
        if sites > MAX_SITES {
            return Err(Error::Config(format!(
                "lattice of {}x{} = {} sites exceeds the dense-storage cap of {}",
                n_a + 1,
                n_b + 1,
                sites,
                MAX_SITES
            )));
        }
        Ok(Self { n_a, n_b })
    }

    pub fn n_a(&self) -> usize {
        self.n_a
    }

    pub fn n_b(&self) -> usize {
        self.n_b
    }

    /// Total particle number N = N_A + N_B.
    pub fn total_particles(&self) -> usize {
        self.n_a + self.n_b
    }

    /// Number of rows, i.e. distinct values of `k`.
    pub fn rows(&self) -> usize {
        self.n_a + 1
    }

    /// Number of columns, i.e. distinct values of `l`.
    pub fn cols(&self) -> usize {
        self.n_b + 1
    }

    pub fn site_count(&self) -> usize {
        self.rows() * self.cols()
    }

    pub fn contains(&self, label: FockLabel) -> bool {
        label.k <= self.n_a && label.l <= self.n_b
    }

    pub fn validate(&self, label: FockLabel) -> Result<()> {
        if self.contains(label) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "Fock label (k={}, l={}) outside lattice of shape ({}, {})",
                label.k, label.l, self.n_a, self.n_b
            )))
        }
    }

    /// Linear index, k-major: `idx(k,l) = k (N_B+1) + l`.
    pub fn index_of(&self, label: FockLabel) -> usize {
        debug_assert!(self.contains(label));
        label.k * self.cols() + label.l
    }

    /// Inverse of [`index_of`](Self::index_of).
    pub fn label_at(&self, index: usize) -> FockLabel {
        debug_assert!(index < self.site_count());
        FockLabel::new(index / self.cols(), index % self.cols())
    }

    /// All labels in index order.
    pub fn labels(&self) -> impl Iterator<Item = FockLabel> + '_ {
        (0..self.site_count()).map(|i| self.label_at(i))
    }

    /// Simultaneous relabeling k -> N_A - k, l -> N_B - l.
    pub fn mirror(&self, label: FockLabel) -> FockLabel {
        FockLabel::new(self.n_a - label.k, self.n_b - label.l)
    }

    /// Doubled spin projection of species A, 2 m_A = 2k - N_A.
    pub fn two_m_a(&self, label: FockLabel) -> i64 {
        2 * label.k as i64 - self.n_a as i64
    }

    /// Doubled spin projection of species B, 2 m_B = 2l - N_B.
    pub fn two_m_b(&self, label: FockLabel) -> i64 {
        2 * label.l as i64 - self.n_b as i64
    }
}

/// One lattice site: `k` A-particles and `l` B-particles in the left well.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FockLabel {
    pub k: usize,
    pub l: usize,
}

impl FockLabel {
    pub fn new(k: usize, l: usize) -> Self {
        Self { k, l }
    }
}

/// Tunneling rates and interaction strengths, all in cm^-1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub omega_a: f64,
    pub omega_b: f64,
    pub u_a: f64,
    pub u_b: f64,
    pub u_ab: f64,
}

impl ModelParams {
    pub fn new(omega_a: f64, omega_b: f64, u_a: f64, u_b: f64, u_ab: f64) -> Result<Self> {
        for (name, v) in [
            ("omega_a", omega_a),
            ("omega_b", omega_b),
            ("u_a", u_a),
            ("u_b", u_b),
            ("u_ab", u_ab),
        ] {
            if !v.is_finite() {
                return Err(Error::Config(format!("{name} must be finite, got {v}")));
            }
        }
        if omega_a < 0.0 || omega_b < 0.0 {
            return Err(Error::Config(format!(
                "tunneling rates must be non-negative, got omega_a={omega_a}, omega_b={omega_b}"
            )));
        }
        Ok(Self { omega_a, omega_b, u_a, u_b, u_ab })
    }

    /// Equal tunneling rate and interaction strength for every particle.
    pub fn isospecific(omega: f64, u: f64) -> Result<Self> {
        Self::new(omega, omega, u, u, u)
    }

    pub fn non_interacting(omega_a: f64, omega_b: f64) -> Result<Self> {
        Self::new(omega_a, omega_b, 0.0, 0.0, 0.0)
    }

    /// Exact equality of the configured values, not a tolerance check.
    pub fn is_isospecific(&self) -> bool {
        self.omega_a == self.omega_b && self.u_a == self.u_b && self.u_b == self.u_ab
    }

    pub fn is_non_interacting(&self) -> bool {
        self.u_a == 0.0 && self.u_b == 0.0 && self.u_ab == 0.0
    }

    /// Same tunneling, all interaction strengths negated.
    pub fn with_flipped_interactions(&self) -> Self {
        Self {
            omega_a: self.omega_a,
            omega_b: self.omega_b,
            u_a: -self.u_a,
            u_b: -self.u_b,
            u_ab: -self.u_ab,
        }
    }
}

/// Choice of on-site detuning profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetuningMode {
    /// V_{k,l} exactly as derived from the interaction terms.
    Raw,
    /// V_{k,l} minus the midpoint (max V + min V)/2 over the lattice;
    /// dynamics of |c|^2 are identical, only a global phase changes.
    Shifted,
}

/// Extra symmetric couplings between diagonal neighbours (k,l) <-> (k+-1,l+-1),
/// produced by the physical-layout model in [`crate::photonics`].
#[derive(Debug, Clone)]
pub struct CouplingOverlay {
    shape: LatticeShape,
    matrix: DMatrix<f64>,
}

impl CouplingOverlay {
    /// Validates symmetry and the diagonal-neighbours-only sparsity pattern.
    pub fn new(shape: LatticeShape, matrix: DMatrix<f64>) -> Result<Self> {
        let n = shape.site_count();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::Config(format!(
                "overlay is {}x{} but the lattice has {} sites",
                matrix.nrows(),
                matrix.ncols(),
                n
            )));
        }
        for i in 0..n {
            for j in 0..n {
                let v = matrix[(i, j)];
                if v != matrix[(j, i)] {
                    return Err(Error::Config(format!(
                        "overlay not symmetric at ({i}, {j})"
                    )));
                }
                if v != 0.0 {
                    let a = shape.label_at(i);
                    let b = shape.label_at(j);
                    let dk = a.k.abs_diff(b.k);
                    let dl = a.l.abs_diff(b.l);
                    if !(dk == 1 && dl == 1) {
                        return Err(Error::Config(format!(
                            "overlay entry at ({},{}) -> ({},{}) is not a diagonal neighbour pair",
                            a.k, a.l, b.k, b.l
                        )));
                    }
                }
            }
        }
        Ok(Self { shape, matrix })
    }

    pub fn empty(shape: LatticeShape) -> Self {
        let n = shape.site_count();
        Self { shape, matrix: DMatrix::zeros(n, n) }
    }

    pub fn shape(&self) -> LatticeShape {
        self.shape
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.iter().all(|&v| v == 0.0)
    }

    /// Coupled pairs, each listed once with ascending site index:
    /// `((k1,l1), (k2,l2), kappa)`.
    pub fn pairs(&self) -> Vec<(FockLabel, FockLabel, f64)> {
        let n = self.shape.site_count();
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = self.matrix[(i, j)];
                if v != 0.0 {
                    out.push((self.shape.label_at(i), self.shape.label_at(j), v));
                }
            }
        }
        out
    }

    /// CSV export, columns `k1,l1,k2,l2,kappa_per_cm`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k1,l1,k2,l2,kappa_per_cm\n");
        for (a, b, v) in self.pairs() {
            s.push_str(&format!("{},{},{},{},{:.16e}\n", a.k, a.l, b.k, b.l, v));
        }
        s
    }
}

/// Real symmetric matrix M with dc/dt = i M c.
#[derive(Debug, Clone)]
pub struct EffectiveHamiltonian {
    shape: LatticeShape,
    matrix: DMatrix<f64>,
    includes_diagonal: bool,
}

impl EffectiveHamiltonian {
    pub fn shape(&self) -> LatticeShape {
        self.shape
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Whether diagonal-neighbour couplings were folded in.
    pub fn includes_diagonal(&self) -> bool {
        self.includes_diagonal
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Row-major, headerless CSV dump of the full dense matrix.
    pub fn to_csv(&self) -> String {
        let n = self.dim();
        let mut s = String::new();
        for i in 0..n {
            for j in 0..n {
                if j > 0 {
                    s.push(',');
                }
                s.push_str(&format!("{:.16e}", self.matrix[(i, j)]));
            }
            s.push('\n');
        }
        s
    }
}

/// Vertical hopping amplitude kappa_k^A = (Omega_A/2) sqrt((k+1)(N_A-k)),
/// defined for bonds k -> k+1 with 0 <= k <= N_A - 1.
pub fn coupling_a(k: usize, shape: &LatticeShape, omega_a: f64) -> Result<f64> {
    if shape.n_a == 0 || k > shape.n_a - 1 {
        return Err(Error::Domain(format!(
            "bond index k={} out of range for N_A={}",
            k, shape.n_a
        )));
    }
    let product = ((k + 1) * (shape.n_a - k)) as f64;
    Ok(0.5 * omega_a * product.sqrt())
}

/// Horizontal hopping amplitude kappa_l^B = (Omega_B/2) sqrt((l+1)(N_B-l)).
pub fn coupling_b(l: usize, shape: &LatticeShape, omega_b: f64) -> Result<f64> {
    if shape.n_b == 0 || l > shape.n_b - 1 {
        return Err(Error::Domain(format!(
            "bond index l={} out of range for N_B={}",
            l, shape.n_b
        )));
    }
    let product = ((l + 1) * (shape.n_b - l)) as f64;
    Ok(0.5 * omega_b * product.sqrt())
}

/// The combinatorial brackets are evaluated in integer arithmetic so that
/// detunings with equal brackets compare exactly equal as floats. In the
/// isospecific case V depends on k+l only, through a single bracket.
fn detuning_unchecked(label: FockLabel, shape: &LatticeShape, params: &ModelParams) -> f64 {
    let n_a = shape.n_a as i64;
    let n_b = shape.n_b as i64;
    let k = label.k as i64;
    let l = label.l as i64;
    if params.is_isospecific() {
        let n = n_a + n_b;
        let s = k + l;
        let bracket = s * s + (n - s) * (n - s) - n;
        return -0.5 * params.u_a * bracket as f64;
    }
    let bracket_a = k * k + (n_a - k) * (n_a - k) - n_a;
    let bracket_b = l * l + (n_b - l) * (n_b - l) - n_b;
    let bracket_ab = k * l + (n_a - k) * (n_b - l);
    -0.5 * params.u_a * bracket_a as f64
        - 0.5 * params.u_b * bracket_b as f64
        - params.u_ab * bracket_ab as f64
}

/// On-site detuning V_{k,l}.
pub fn detuning(label: FockLabel, shape: &LatticeShape, params: &ModelParams) -> Result<f64> {
    shape.validate(label)?;
    Ok(detuning_unchecked(label, shape, params))
}

/// Detuning shifted by the lattice midpoint, so that max V̄ = -min V̄.
///
/// For isospecific parameters the shift reduces to a closed form in the
/// single bracket (k+l)^2 + (N-k-l)^2, evaluated so that sites with
/// opposite brackets get exactly opposite detunings. For general
/// parameters the midpoint (max V + min V)/2 is taken over the actual
/// lattice values.
pub fn shifted_detuning(label: FockLabel, shape: &LatticeShape, params: &ModelParams) -> Result<f64> {
    shape.validate(label)?;
    if params.is_isospecific() {
        let n = shape.total_particles() as i64;
        let s = (label.k + label.l) as i64;
        let bracket = (s * s + (n - s) * (n - s)) as f64;
        // extremes of s^2 + (N-s)^2 over integer s in [0, N]
        let b_max = (n * n) as f64;
        let b_min = {
            let lo = n / 2;
            let hi = n - lo;
            (lo * lo + hi * hi) as f64
        };
        let half_span = 0.5 * (b_max + b_min);
        return Ok(-0.5 * params.u_a * (bracket - half_span));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for other in shape.labels() {
        let v = detuning_unchecked(other, shape, params);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    // (v - hi + v - lo)/2 equals v - (hi + lo)/2 but keeps the extremes
    // exactly opposite
    let v = detuning_unchecked(label, shape, params);
    Ok(0.5 * ((v - hi) + (v - lo)))
}

/// Assembles the dense effective Hamiltonian: hoppings from
/// [`coupling_a`]/[`coupling_b`], on-site terms from the chosen
/// [`DetuningMode`], and, optionally, diagonal-neighbour entries copied
/// from a [`CouplingOverlay`].
pub fn build_hamiltonian(
    shape: &LatticeShape,
    params: &ModelParams,
    mode: DetuningMode,
    overlay: Option<&CouplingOverlay>,
) -> Result<EffectiveHamiltonian> {
    if let Some(ov) = overlay {
        if ov.shape() != *shape {
            return Err(Error::Config(format!(
                "overlay built for shape ({}, {}) applied to shape ({}, {})",
                ov.shape().n_a(),
                ov.shape().n_b(),
                shape.n_a,
                shape.n_b
            )));
        }
    }
    let n = shape.site_count();
    let mut m = DMatrix::<f64>::zeros(n, n);

    for label in shape.labels() {
        let i = shape.index_of(label);
        m[(i, i)] = match mode {
            DetuningMode::Raw => detuning_unchecked(label, shape, params),
            DetuningMode::Shifted => shifted_detuning(label, shape, params)?,
        };
        if label.k < shape.n_a {
            let kappa = coupling_a(label.k, shape, params.omega_a)?;
            let j = shape.index_of(FockLabel::new(label.k + 1, label.l));
            m[(i, j)] = kappa;
            m[(j, i)] = kappa;
        }
        if label.l < shape.n_b {
            let kappa = coupling_b(label.l, shape, params.omega_b)?;
            let j = shape.index_of(FockLabel::new(label.k, label.l + 1));
            m[(i, j)] = kappa;
            m[(j, i)] = kappa;
        }
    }

    let mut includes_diagonal = false;
    if let Some(ov) = overlay {
        for (a, b, kappa) in ov.pairs() {
            let i = shape.index_of(a);
            let j = shape.index_of(b);
            m[(i, j)] = kappa;
            m[(j, i)] = kappa;
            includes_diagonal = true;
        }
    }

    Ok(EffectiveHamiltonian { shape: *shape, matrix: m, includes_diagonal })
}
