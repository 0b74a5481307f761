//! Physical waveguide geometry for the abstract tight-binding model.
//!
//! Evanescent couplings decay exponentially with the waveguide distance,
//! kappa(d) = C exp(-alpha d), possibly anisotropically. Inverting that
//! law turns the target coupling distribution kappa_k into transverse
//! positions; the same law then estimates the undesired diagonal
//! couplings between sites (k,l) and (k+-1, l+-1).

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fock_lattice::{coupling_a, coupling_b, CouplingOverlay, LatticeShape, ModelParams};

/// Exponential coupling-distance law kappa(d) = c0 exp(-alpha d),
/// c0 in cm^-1, alpha in um^-1, d in um.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingLaw {
    c0: f64,
    alpha: f64,
}

impl CouplingLaw {
    pub fn new(c0: f64, alpha: f64) -> Result<Self> {
        if !(c0 > 0.0 && c0.is_finite()) {
            return Err(Error::Config(format!("coupling prefactor must be positive, got {c0}")));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Config(format!("decay constant must be positive, got {alpha}")));
        }
        Ok(Self { c0, alpha })
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// kappa(d) in cm^-1 for a separation d in um.
    pub fn kappa_at(&self, d: f64) -> f64 {
        self.c0 * (-self.alpha * d).exp()
    }

    /// Geometric mean of two laws; reduces to either when they coincide.
    pub fn geometric_mean(a: &CouplingLaw, b: &CouplingLaw) -> CouplingLaw {
        CouplingLaw {
            c0: (a.c0 * b.c0).sqrt(),
            alpha: (a.alpha * b.alpha).sqrt(),
        }
    }
}

/// Separation realizing a target coupling: d = ln(c0/kappa)/alpha.
///
/// Couplings at or above the prefactor would require coincident or
/// overlapping waveguides and are rejected as infeasible geometry.
pub fn distance_for_coupling(law: &CouplingLaw, kappa: f64) -> Result<f64> {
    if kappa.is_nan() || kappa <= 0.0 || !kappa.is_finite() {
        return Err(Error::Domain(format!("target coupling must be positive, got {kappa}")));
    }
    if kappa >= law.c0 {
        return Err(Error::InfeasibleGeometry(format!(
            "coupling {kappa} cm^-1 >= law prefactor {} cm^-1; waveguides would coincide or overlap",
            law.c0
        )));
    }
    Ok((law.c0 / kappa).ln() / law.alpha)
}

/// Transverse positions (um) of all waveguides plus the coupling laws and
/// array metadata needed to rederive every coupling in the device.
///
/// The bond spacings are the authoritative geometry; positions are their
/// partial sums anchored at the (k=0, l=0) corner. Keeping the spacings
/// preserves the exact mirror symmetry of the coupling distribution, which
/// cumulative sums would blur by rounding.
#[derive(Debug, Clone)]
pub struct WaveguideLayout {
    shape: LatticeShape,
    /// Horizontal spacing per bond l -> l+1.
    dx: Vec<f64>,
    /// Vertical spacing per bond k -> k+1.
    dy: Vec<f64>,
    /// Horizontal position per column l.
    x: Vec<f64>,
    /// Vertical position per row k.
    y: Vec<f64>,
    law_a: CouplingLaw,
    law_b: CouplingLaw,
    wavelength_nm: f64,
    length_cm: f64,
}

impl WaveguideLayout {
    pub fn shape(&self) -> LatticeShape {
        self.shape
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Horizontal bond spacings x_{l+1} - x_l in um.
    pub fn horizontal_spacings(&self) -> &[f64] {
        &self.dx
    }

    /// Vertical bond spacings y_{k+1} - y_k in um.
    pub fn vertical_spacings(&self) -> &[f64] {
        &self.dy
    }

    pub fn law_a(&self) -> &CouplingLaw {
        &self.law_a
    }

    pub fn law_b(&self) -> &CouplingLaw {
        &self.law_b
    }

    pub fn wavelength_nm(&self) -> f64 {
        self.wavelength_nm
    }

    pub fn length_cm(&self) -> f64 {
        self.length_cm
    }

    /// Vertical coupling on bond k -> k+1 as realized by the geometry.
    pub fn realized_coupling_a(&self, k: usize) -> f64 {
        self.law_a.kappa_at(self.dy[k])
    }

    /// Horizontal coupling on bond l -> l+1 as realized by the geometry.
    pub fn realized_coupling_b(&self, l: usize) -> f64 {
        self.law_b.kappa_at(self.dx[l])
    }

    /// CSV export, columns `k,l,x_um,y_um`, one row per waveguide.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,l,x_um,y_um\n");
        for label in self.shape.labels() {
            s.push_str(&format!(
                "{},{},{:.16e},{:.16e}\n",
                label.k, label.l, self.x[label.l], self.y[label.k]
            ));
        }
        s
    }
}

/// Positions every waveguide so that the nearest-neighbour couplings
/// reproduce the target distribution of the effective Hamiltonian,
/// anchored at x_0 = y_0 = 0.
pub fn build_layout(
    shape: &LatticeShape,
    params: &ModelParams,
    law_a: &CouplingLaw,
    law_b: &CouplingLaw,
    wavelength_nm: f64,
    length_cm: f64,
) -> Result<WaveguideLayout> {
    let mut dy = Vec::with_capacity(shape.n_a());
    for k in 0..shape.n_a() {
        let kappa = coupling_a(k, shape, params.omega_a)?;
        let d = distance_for_coupling(law_a, kappa).map_err(|e| match e {
            Error::InfeasibleGeometry(msg) => {
                Error::InfeasibleGeometry(format!("vertical bond k={k}: {msg}"))
            }
            other => other,
        })?;
        dy.push(d);
    }
    let mut dx = Vec::with_capacity(shape.n_b());
    for l in 0..shape.n_b() {
        let kappa = coupling_b(l, shape, params.omega_b)?;
        let d = distance_for_coupling(law_b, kappa).map_err(|e| match e {
            Error::InfeasibleGeometry(msg) => {
                Error::InfeasibleGeometry(format!("horizontal bond l={l}: {msg}"))
            }
            other => other,
        })?;
        dx.push(d);
    }
    let accumulate = |spacings: &[f64]| {
        let mut pos = vec![0.0];
        for &d in spacings {
            pos.push(pos.last().unwrap() + d);
        }
        pos
    };
    Ok(WaveguideLayout {
        shape: *shape,
        x: accumulate(&dx),
        y: accumulate(&dy),
        dx,
        dy,
        law_a: *law_a,
        law_b: *law_b,
        wavelength_nm,
        length_cm,
    })
}

/// Diagonal-neighbour couplings estimated with the geometric-mean law
/// C_diag = sqrt(C_A C_B), alpha_diag = sqrt(alpha_A alpha_B).
pub fn diagonal_overlay(layout: &WaveguideLayout) -> CouplingOverlay {
    let law = CouplingLaw::geometric_mean(&layout.law_a, &layout.law_b);
    diagonal_overlay_with_law(layout, &law)
}

/// Same as [`diagonal_overlay`] but with an explicit diagonal law, for
/// probing alternative assumptions about the diagonal decay.
pub fn diagonal_overlay_with_law(layout: &WaveguideLayout, law: &CouplingLaw) -> CouplingOverlay {
    let shape = layout.shape();
    let n = shape.site_count();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for k in 0..shape.n_a() {
        for l in 0..=shape.n_b() {
            let dy = layout.dy[k];
            for l2 in [l.wrapping_sub(1), l + 1] {
                if l2 > shape.n_b() {
                    continue;
                }
                let dx = layout.dx[l.min(l2)];
                let d = dx.hypot(dy);
                let kappa = law.kappa_at(d);
                let i = shape.index_of(crate::fock_lattice::FockLabel::new(k, l));
                let j = shape.index_of(crate::fock_lattice::FockLabel::new(k + 1, l2));
                m[(i, j)] = kappa;
                m[(j, i)] = kappa;
            }
        }
    }
    CouplingOverlay::new(shape, m).expect("overlay built with the diagonal pattern")
}

/// Mean over all diagonal pairs of kappa_diag divided by the mean of the
/// plaquette's straight couplings (kappa^A_k + kappa^B_l)/2. None when the
/// lattice has no diagonal pairs.
pub fn mean_diagonal_ratio(layout: &WaveguideLayout, overlay: &CouplingOverlay) -> Option<f64> {
    let pairs = overlay.pairs();
    if pairs.is_empty() {
        return None;
    }
    let mut total = 0.0;
    for (a, b, kappa) in &pairs {
        let k = a.k.min(b.k);
        let l = a.l.min(b.l);
        let straight = 0.5 * (layout.realized_coupling_a(k) + layout.realized_coupling_b(l));
        total += kappa / straight;
    }
    Some(total / pairs.len() as f64)
}

/// A complete physical design context: per-axis coupling laws plus array
/// metadata. The tunneling rate is tied to the array length through
/// Omega = pi/(2L), which puts the balanced-beam-splitter distance
/// T = pi/(2 Omega) exactly at the output facet.
#[derive(Debug, Clone, Copy)]
pub struct DesignPreset {
    pub law_a: CouplingLaw,
    pub law_b: CouplingLaw,
    pub wavelength_nm: f64,
    pub length_cm: f64,
}

impl DesignPreset {
    /// Typical parameters for laser-inscribed waveguides in fused silica
    /// at 633 nm: C_A = 20 cm^-1, C_B = 30 cm^-1, alpha_A = 0.20 um^-1,
    /// alpha_B = 0.18 um^-1, L = 15 cm.
    pub fn fused_silica_633nm() -> Self {
        Self {
            law_a: CouplingLaw::new(20.0, 0.20).expect("static preset"),
            law_b: CouplingLaw::new(30.0, 0.18).expect("static preset"),
            wavelength_nm: 633.0,
            length_cm: 15.0,
        }
    }

    /// Omega = pi/(2L).
    pub fn tunneling_rate(&self) -> f64 {
        PI / (2.0 * self.length_cm)
    }

    pub fn build(&self, shape: &LatticeShape, params: &ModelParams) -> Result<WaveguideLayout> {
        build_layout(shape, params, &self.law_a, &self.law_b, self.wavelength_nm, self.length_cm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn silica_layout() -> WaveguideLayout {
        let preset = DesignPreset::fused_silica_633nm();
        let shape = LatticeShape::new(6, 6).unwrap();
        let params = ModelParams::isospecific(preset.tunneling_rate(), 0.0).unwrap();
        preset.build(&shape, &params).unwrap()
    }

    #[test]
    fn one_decay_length() {
        let law = CouplingLaw::new(20.0, 0.20).unwrap();
        let d = distance_for_coupling(&law, 20.0 * (-1.0_f64).exp()).unwrap();
        assert!((d - 5.0).abs() < 1e-12);
    }

    #[test]
    fn silica_distances_match_hand_evaluation() {
        // kappa_2 = (Omega/2) sqrt(12) -> 23.51 um, kappa_0 -> 25.25 um
        let preset = DesignPreset::fused_silica_633nm();
        let shape = LatticeShape::new(6, 0).unwrap();
        let omega = preset.tunneling_rate();
        let kappa2 = coupling_a(2, &shape, omega).unwrap();
        let kappa0 = coupling_a(0, &shape, omega).unwrap();
        let d2 = distance_for_coupling(&preset.law_a, kappa2).unwrap();
        let d0 = distance_for_coupling(&preset.law_a, kappa0).unwrap();
        assert!((d2 - 23.514468125163457).abs() < 1e-9, "d2 = {d2}");
        assert!((d0 - 25.24733607656332).abs() < 1e-9, "d0 = {d0}");
    }

    #[test]
    fn infeasible_and_invalid_targets() {
        let law = CouplingLaw::new(20.0, 0.20).unwrap();
        assert!(matches!(
            distance_for_coupling(&law, 20.0),
            Err(Error::InfeasibleGeometry(_))
        ));
        assert!(matches!(
            distance_for_coupling(&law, 25.0),
            Err(Error::InfeasibleGeometry(_))
        ));
        assert!(matches!(distance_for_coupling(&law, 0.0), Err(Error::Domain(_))));
        assert!(matches!(distance_for_coupling(&law, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn round_trip_through_the_law() {
        let law = CouplingLaw::new(30.0, 0.18).unwrap();
        for kappa in [0.01, 0.1, 1.0, 10.0, 29.9] {
            let d = distance_for_coupling(&law, kappa).unwrap();
            assert!(
                (law.kappa_at(d) - kappa).abs() <= 1e-12 * kappa,
                "kappa = {kappa}"
            );
        }
    }

    #[test]
    fn two_waveguide_layout() {
        let law = CouplingLaw::new(20.0, 0.20).unwrap();
        let shape = LatticeShape::new(1, 0).unwrap();
        let params = ModelParams::new(2.0, 2.0, 0.0, 0.0, 0.0).unwrap();
        let layout = build_layout(&shape, &params, &law, &law, 633.0, 15.0).unwrap();
        // kappa = Omega/2 = 1: d = ln(20)/0.2
        assert_eq!(layout.y().len(), 2);
        assert!((layout.y()[1] - 20.0_f64.ln() / 0.2).abs() < 1e-12);
        // no diagonal pairs exist
        assert!(diagonal_overlay(&layout).is_empty());
    }

    #[test]
    fn uniform_targets_give_uniform_spacing() {
        // Both bonds of a 2-particle species share the same kappa by mirror
        // symmetry of the coupling distribution.
        let shape = LatticeShape::new(2, 0).unwrap();
        let law = CouplingLaw::new(20.0, 0.2).unwrap();
        let params = ModelParams::new(0.3, 0.3, 0.0, 0.0, 0.0).unwrap();
        let layout = build_layout(&shape, &params, &law, &law, 633.0, 15.0).unwrap();
        let dy = layout.vertical_spacings();
        assert_eq!(dy[0], dy[1]);
    }

    #[test]
    fn layout_positions_increase_and_edges_spread() {
        let layout = silica_layout();
        for w in layout.x().windows(2) {
            assert!(w[1] > w[0]);
        }
        for w in layout.y().windows(2) {
            assert!(w[1] > w[0]);
        }
        // weakest couplings at the array edge -> largest spacings there,
        // and the spacing sequence is an exact palindrome
        let dy = layout.vertical_spacings();
        assert!(dy[0] > dy[2]);
        assert!(dy[5] > dy[3]);
        assert_eq!(dy[0], dy[5]);
        assert_eq!(dy[1], dy[4]);
    }

    #[test]
    fn layout_round_trips_every_target_coupling() {
        let preset = DesignPreset::fused_silica_633nm();
        let shape = LatticeShape::new(5, 3).unwrap();
        let omega = preset.tunneling_rate();
        let params = ModelParams::new(omega, 1.2 * omega, 0.0, 0.0, 0.0).unwrap();
        let layout = preset.build(&shape, &params).unwrap();
        for k in 0..5 {
            let target = coupling_a(k, &shape, params.omega_a).unwrap();
            let realized = layout.realized_coupling_a(k);
            assert!((realized - target).abs() <= 1e-10 * target, "bond k={k}");
        }
        for l in 0..3 {
            let target = coupling_b(l, &shape, params.omega_b).unwrap();
            let realized = layout.realized_coupling_b(l);
            assert!((realized - target).abs() <= 1e-10 * target, "bond l={l}");
        }
    }

    #[test]
    fn stronger_coupling_means_smaller_spacing() {
        let law = CouplingLaw::new(20.0, 0.2).unwrap();
        let mut last = f64::INFINITY;
        for kappa in [0.05, 0.1, 0.2, 0.4] {
            let d = distance_for_coupling(&law, kappa).unwrap();
            assert!(d < last);
            last = d;
        }
    }

    #[test]
    fn silica_diagonal_ratio_is_about_ten_percent() {
        let layout = silica_layout();
        let overlay = diagonal_overlay(&layout);
        let ratio = mean_diagonal_ratio(&layout, &overlay).unwrap();
        assert!((0.05..=0.20).contains(&ratio), "ratio = {ratio}");
    }

    #[test]
    fn ratio_shrinks_for_better_separated_waveguides() {
        // halving Omega at fixed laws doubles nothing but pushes all
        // waveguides further apart, so the diagonal ratio must drop
        let preset = DesignPreset::fused_silica_633nm();
        let shape = LatticeShape::new(6, 6).unwrap();
        let omega = preset.tunneling_rate();
        let near = preset
            .build(&shape, &ModelParams::isospecific(omega, 0.0).unwrap())
            .unwrap();
        let far = preset
            .build(&shape, &ModelParams::isospecific(omega / 2.0, 0.0).unwrap())
            .unwrap();
        let r_near = mean_diagonal_ratio(&near, &diagonal_overlay(&near)).unwrap();
        let r_far = mean_diagonal_ratio(&far, &diagonal_overlay(&far)).unwrap();
        assert!(r_far < r_near, "{r_far} vs {r_near}");
    }

    #[test]
    fn isotropic_uniform_ratio_follows_the_closed_form() {
        // With one isotropic law and uniform spacing d the ratio is exactly
        // exp(-alpha (sqrt(2) - 1) d).
        let law = CouplingLaw::new(20.0, 0.2).unwrap();
        let shape = LatticeShape::new(1, 1).unwrap();
        let params = ModelParams::new(0.3, 0.3, 0.0, 0.0, 0.0).unwrap();
        let layout = build_layout(&shape, &params, &law, &law, 633.0, 15.0).unwrap();
        let overlay = diagonal_overlay(&layout);
        let ratio = mean_diagonal_ratio(&layout, &overlay).unwrap();
        let d = layout.y()[1] - layout.y()[0];
        let expected = (-law.alpha() * (2.0_f64.sqrt() - 1.0) * d).exp();
        assert!((ratio - expected).abs() < 1e-12, "{ratio} vs {expected}");
    }

    #[test]
    fn overlay_respects_anisotropic_distances() {
        let layout = silica_layout();
        let overlay = diagonal_overlay(&layout);
        let law = CouplingLaw::geometric_mean(layout.law_a(), layout.law_b());
        for (a, b, kappa) in overlay.pairs() {
            let dy = layout.vertical_spacings()[a.k.min(b.k)];
            let dx = layout.horizontal_spacings()[a.l.min(b.l)];
            let expected = law.kappa_at(dx.hypot(dy));
            assert_eq!(kappa, expected);
            assert_eq!(a.k.abs_diff(b.k), 1);
            assert_eq!(a.l.abs_diff(b.l), 1);
        }
        // 2 diagonals per plaquette, 6x6 plaquettes
        assert_eq!(overlay.pairs().len(), 72);
    }

    #[test]
    fn overlay_law_override() {
        let layout = silica_layout();
        let mean_law = CouplingLaw::geometric_mean(layout.law_a(), layout.law_b());
        let default = diagonal_overlay(&layout);
        let explicit = diagonal_overlay_with_law(&layout, &mean_law);
        assert_eq!(default.matrix(), explicit.matrix());
        // a faster decay must weaken every diagonal coupling
        let faster = CouplingLaw::new(mean_law.c0(), 2.0 * mean_law.alpha()).unwrap();
        let weaker = diagonal_overlay_with_law(&layout, &faster);
        for ((_, _, k1), (_, _, k2)) in default.pairs().iter().zip(weaker.pairs().iter()) {
            assert!(k2 < k1);
        }
    }

    #[test]
    fn layout_csv_schema() {
        let layout = silica_layout();
        let csv = layout.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("k,l,x_um,y_um"));
        assert_eq!(csv.lines().count(), 50);
    }
}
