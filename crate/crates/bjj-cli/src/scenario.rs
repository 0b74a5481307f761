//! Scenario configuration: flat key/value config files with dotted keys,
//! named presets, initial-state resolution and the simulation driver.
//!
//! Config keys (`key = value`, `#` comments, later entries win):
//!
//! ```text
//! shape.n_a, shape.n_b        particle numbers (required)
//! model.omega                 sets both tunneling rates (cm^-1)
//! model.omega_a, model.omega_b
//! model.u_iso                 sets all three interaction strengths
//! model.u_a, model.u_b, model.u_ab
//! scenario.initial            single_species_center | mixed_center |
//!                             separated_corner | coupled:J,M | fock:K,L |
//!                             amplitudes:PATH        (required)
//! scenario.detuning           raw | shifted          (default raw)
//! scenario.overlay            on | off               (default off)
//! scenario.t_final            propagation distance in cm
//!                             (default pi/(2 Omega))
//! scenario.t_samples          trajectory samples     (default 201)
//! sweep.u_iso                 comma-separated interaction strengths
//! layout.c_a, layout.alpha_a  vertical coupling law  (default 20, 0.20)
//! layout.c_b, layout.alpha_b  horizontal coupling law (default 30, 0.18)
//! layout.wavelength_nm        (default 633)
//! layout.length_cm            (default 15)
//! ```
//!
//! Rates are in cm^-1, decay constants in um^-1, distances along the
//! array in cm. When no tunneling rate is given it defaults to
//! pi/(2 layout.length_cm), which puts the balanced-beam-splitter distance
//! at the output facet.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use bjj_core::angular::coupled_state;
use bjj_core::error::{Error, Result};
use bjj_core::fock_lattice::{
    build_hamiltonian, CouplingOverlay, DetuningMode, FockLabel, LatticeShape, ModelParams,
};
use bjj_core::observables::{
    imbalance_distribution, mean_imbalance, odd_suppression_metric, site_probabilities,
    variance_imbalance, ImbalanceDistribution, ProbabilityGrid,
};
use bjj_core::photonics::{diagonal_overlay, CouplingLaw, DesignPreset, WaveguideLayout};
use bjj_core::propagation::{
    decompose, evolve, evolve_trajectory, uniform_grid, AmplitudeField,
};
use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;

/// How the light is injected into the array.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialStateSpec {
    /// Centre excitation of a 1 x (N+1) array; requires n_a = 0, n_b even.
    SingleSpeciesCenter,
    /// Centre excitation of a square array; requires n_a = n_b, both even.
    MixedCenter,
    /// Corner excitation (k, l) = (N_A, 0).
    SeparatedCorner,
    /// Total-spin eigenstate |j, m>, injected along an antidiagonal.
    Coupled { two_j: i64, two_m: i64 },
    /// Delta excitation at an explicit site.
    Fock { k: usize, l: usize },
    /// Amplitudes loaded from a CSV file with columns `k,l,re,im`.
    Amplitudes(PathBuf),
}

impl InitialStateSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        match text {
            "single_species_center" => return Ok(Self::SingleSpeciesCenter),
            "mixed_center" => return Ok(Self::MixedCenter),
            "separated_corner" => return Ok(Self::SeparatedCorner),
            _ => {}
        }
        if let Some(rest) = text.strip_prefix("coupled:") {
            let (j, m) = rest.split_once(',').ok_or_else(|| {
                Error::Config(format!("expected coupled:J,M, got `{text}`"))
            })?;
            return Ok(Self::Coupled {
                two_j: parse_half_integer(j, "coupled j")?,
                two_m: parse_half_integer(m, "coupled m")?,
            });
        }
        if let Some(rest) = text.strip_prefix("fock:") {
            let (k, l) = rest
                .split_once(',')
                .ok_or_else(|| Error::Config(format!("expected fock:K,L, got `{text}`")))?;
            let k = k.trim().parse::<usize>().map_err(|e| {
                Error::Config(format!("bad fock k `{k}`: {e}"))
            })?;
            let l = l.trim().parse::<usize>().map_err(|e| {
                Error::Config(format!("bad fock l `{l}`: {e}"))
            })?;
            return Ok(Self::Fock { k, l });
        }
        if let Some(path) = text.strip_prefix("amplitudes:") {
            return Ok(Self::Amplitudes(PathBuf::from(path.trim())));
        }
        Err(Error::Config(format!("unknown initial state `{text}`")))
    }

    fn echo(&self) -> String {
        match self {
            Self::SingleSpeciesCenter => "single_species_center".into(),
            Self::MixedCenter => "mixed_center".into(),
            Self::SeparatedCorner => "separated_corner".into(),
            Self::Coupled { two_j, two_m } => {
                format!("coupled:{},{}", half_integer_echo(*two_j), half_integer_echo(*two_m))
            }
            Self::Fock { k, l } => format!("fock:{k},{l}"),
            Self::Amplitudes(path) => format!("amplitudes:{}", path.display()),
        }
    }
}

fn parse_half_integer(text: &str, what: &str) -> Result<i64> {
    let value: f64 = text
        .trim()
        .parse()
        .map_err(|e| Error::Config(format!("bad {what} `{text}`: {e}")))?;
    let doubled = 2.0 * value;
    if (doubled - doubled.round()).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "{what} must be integer or half-integer, got {value}"
        )));
    }
    Ok(doubled.round() as i64)
}

fn half_integer_echo(doubled: i64) -> String {
    if doubled % 2 == 0 {
        format!("{}", doubled / 2)
    } else {
        format!("{}", doubled as f64 / 2.0)
    }
}

/// A fully resolved simulation request.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub shape: LatticeShape,
    pub params: ModelParams,
    pub detuning_mode: DetuningMode,
    pub overlay_enabled: bool,
    pub initial_state: InitialStateSpec,
    pub t_final: f64,
    pub t_samples: usize,
    /// Optional sweep over the isospecific interaction strength.
    pub sweep_u_iso: Option<Vec<f64>>,
    pub design: DesignPreset,
}

const KNOWN_KEYS: &[&str] = &[
    "shape.n_a",
    "shape.n_b",
    "model.omega",
    "model.omega_a",
    "model.omega_b",
    "model.u_iso",
    "model.u_a",
    "model.u_b",
    "model.u_ab",
    "scenario.initial",
    "scenario.detuning",
    "scenario.overlay",
    "scenario.t_final",
    "scenario.t_samples",
    "sweep.u_iso",
    "layout.c_a",
    "layout.alpha_a",
    "layout.c_b",
    "layout.alpha_b",
    "layout.wavelength_nm",
    "layout.length_cm",
];

/// Parses `key = value` lines into a map; `#` starts a comment line.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected `key = value`, got `{raw}`", lineno + 1))
        })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn get_f64(map: &BTreeMap<String, String>, key: &str) -> Result<Option<f64>> {
    match map.get(key) {
        None => Ok(None),
        Some(raw) => raw
            .parse::<f64>()
            .map(Some)
            .map_err(|e| Error::Config(format!("{key}: bad number `{raw}`: {e}"))),
    }
}

fn get_usize(map: &BTreeMap<String, String>, key: &str) -> Result<Option<usize>> {
    match map.get(key) {
        None => Ok(None),
        Some(raw) => raw
            .parse::<usize>()
            .map(Some)
            .map_err(|e| Error::Config(format!("{key}: bad integer `{raw}`: {e}"))),
    }
}

impl ScenarioConfig {
    /// Builds a config from a key/value map, applying defaults.
    pub fn from_kv(map: &BTreeMap<String, String>) -> Result<Self> {
        let unknown: Vec<&str> = map
            .keys()
            .map(String::as_str)
            .filter(|k| !KNOWN_KEYS.contains(k))
            .collect();
        if !unknown.is_empty() {
            return Err(Error::Config(format!(
                "unrecognized config keys: {}",
                unknown.join(", ")
            )));
        }

        let n_a = get_usize(map, "shape.n_a")?
            .ok_or_else(|| Error::Config("missing shape.n_a".into()))?;
        let n_b = get_usize(map, "shape.n_b")?
            .ok_or_else(|| Error::Config("missing shape.n_b".into()))?;
        let shape = LatticeShape::new(n_a, n_b)?;

        let silica = DesignPreset::fused_silica_633nm();
        let length_cm = get_f64(map, "layout.length_cm")?.unwrap_or(silica.length_cm);
        let design = DesignPreset {
            law_a: CouplingLaw::new(
                get_f64(map, "layout.c_a")?.unwrap_or(silica.law_a.c0()),
                get_f64(map, "layout.alpha_a")?.unwrap_or(silica.law_a.alpha()),
            )?,
            law_b: CouplingLaw::new(
                get_f64(map, "layout.c_b")?.unwrap_or(silica.law_b.c0()),
                get_f64(map, "layout.alpha_b")?.unwrap_or(silica.law_b.alpha()),
            )?,
            wavelength_nm: get_f64(map, "layout.wavelength_nm")?.unwrap_or(silica.wavelength_nm),
            length_cm,
        };
        if length_cm.is_nan() || length_cm <= 0.0 {
            return Err(Error::Config(format!(
                "layout.length_cm must be positive, got {length_cm}"
            )));
        }

        let omega_common = get_f64(map, "model.omega")?.unwrap_or(design.tunneling_rate());
        let omega_a = get_f64(map, "model.omega_a")?.unwrap_or(omega_common);
        let omega_b = get_f64(map, "model.omega_b")?.unwrap_or(omega_common);
        let u_iso = get_f64(map, "model.u_iso")?.unwrap_or(0.0);
        let params = ModelParams::new(
            omega_a,
            omega_b,
            get_f64(map, "model.u_a")?.unwrap_or(u_iso),
            get_f64(map, "model.u_b")?.unwrap_or(u_iso),
            get_f64(map, "model.u_ab")?.unwrap_or(u_iso),
        )?;

        let initial_state = InitialStateSpec::parse(
            map.get("scenario.initial")
                .ok_or_else(|| Error::Config("missing scenario.initial".into()))?,
        )?;

        let detuning_mode = match map.get("scenario.detuning").map(String::as_str) {
            None | Some("raw") => DetuningMode::Raw,
            Some("shifted") => DetuningMode::Shifted,
            Some(other) => {
                return Err(Error::Config(format!(
                    "scenario.detuning must be raw or shifted, got `{other}`"
                )))
            }
        };
        let overlay_enabled = match map.get("scenario.overlay").map(String::as_str) {
            None | Some("off") => false,
            Some("on") => true,
            Some(other) => {
                return Err(Error::Config(format!(
                    "scenario.overlay must be on or off, got `{other}`"
                )))
            }
        };

        let t_final = match get_f64(map, "scenario.t_final")? {
            Some(t) if t > 0.0 => t,
            Some(t) => {
                return Err(Error::Config(format!(
                    "scenario.t_final must be positive, got {t}"
                )))
            }
            None => {
                let omega_ref = if omega_a == omega_b {
                    omega_a
                } else if n_a == 0 {
                    omega_b
                } else if n_b == 0 {
                    omega_a
                } else {
                    return Err(Error::Config(
                        "scenario.t_final is required when the tunneling rates differ".into(),
                    ));
                };
                if omega_ref <= 0.0 {
                    return Err(Error::Config(
                        "cannot derive scenario.t_final from a zero tunneling rate".into(),
                    ));
                }
                std::f64::consts::PI / (2.0 * omega_ref)
            }
        };

        let t_samples = get_usize(map, "scenario.t_samples")?.unwrap_or(201);
        if t_samples < 2 {
            return Err(Error::Config(format!(
                "scenario.t_samples must be at least 2, got {t_samples}"
            )));
        }

        let sweep_u_iso = match map.get("sweep.u_iso") {
            None => None,
            Some(raw) => {
                let values: Result<Vec<f64>> = raw
                    .split(',')
                    .map(|v| {
                        v.trim().parse::<f64>().map_err(|e| {
                            Error::Config(format!("sweep.u_iso: bad number `{v}`: {e}"))
                        })
                    })
                    .collect();
                let values = values?;
                if values.is_empty() {
                    return Err(Error::Config("sweep.u_iso must list at least one value".into()));
                }
                Some(values)
            }
        };

        Ok(Self {
            shape,
            params,
            detuning_mode,
            overlay_enabled,
            initial_state,
            t_final,
            t_samples,
            sweep_u_iso,
            design,
        })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_kv(&parse_key_values(&text)?)
    }

    /// The full key set this config resolves to; feeding it back through
    /// [`from_kv`](Self::from_kv) reproduces the config.
    pub fn to_kv(&self) -> BTreeMap<String, String> {
        let mut map = BTreeMap::new();
        map.insert("shape.n_a".into(), self.shape.n_a().to_string());
        map.insert("shape.n_b".into(), self.shape.n_b().to_string());
        map.insert("model.omega_a".into(), self.params.omega_a.to_string());
        map.insert("model.omega_b".into(), self.params.omega_b.to_string());
        map.insert("model.u_a".into(), self.params.u_a.to_string());
        map.insert("model.u_b".into(), self.params.u_b.to_string());
        map.insert("model.u_ab".into(), self.params.u_ab.to_string());
        map.insert("scenario.initial".into(), self.initial_state.echo());
        map.insert(
            "scenario.detuning".into(),
            match self.detuning_mode {
                DetuningMode::Raw => "raw".into(),
                DetuningMode::Shifted => "shifted".into(),
            },
        );
        map.insert(
            "scenario.overlay".into(),
            if self.overlay_enabled { "on" } else { "off" }.into(),
        );
        map.insert("scenario.t_final".into(), self.t_final.to_string());
        map.insert("scenario.t_samples".into(), self.t_samples.to_string());
        if let Some(values) = &self.sweep_u_iso {
            let joined: Vec<String> = values.iter().map(f64::to_string).collect();
            map.insert("sweep.u_iso".into(), joined.join(","));
        }
        map.insert("layout.c_a".into(), self.design.law_a.c0().to_string());
        map.insert("layout.alpha_a".into(), self.design.law_a.alpha().to_string());
        map.insert("layout.c_b".into(), self.design.law_b.c0().to_string());
        map.insert("layout.alpha_b".into(), self.design.law_b.alpha().to_string());
        map.insert("layout.wavelength_nm".into(), self.design.wavelength_nm.to_string());
        map.insert("layout.length_cm".into(), self.design.length_cm.to_string());
        map
    }

    pub fn layout(&self) -> Result<WaveguideLayout> {
        self.design.build(&self.shape, &self.params)
    }
}

/// Named presets; `list_presets` documents the family.
pub fn preset(name: &str) -> Result<ScenarioConfig> {
    let omega = DesignPreset::fused_silica_633nm().tunneling_rate();
    let mut kv: BTreeMap<String, String> = BTreeMap::new();
    let mut set = |k: &str, v: String| {
        kv.insert(k.to_string(), v);
    };
    set("scenario.overlay", "on".into());
    match name {
        // waveguide-design reference array (used mostly by `layout`)
        "fig2" => {
            set("shape.n_a", "6".into());
            set("shape.n_b", "6".into());
            set("scenario.initial", "mixed_center".into());
        }
        // non-interacting imbalance distributions
        "fig3a" => {
            set("shape.n_a", "0".into());
            set("shape.n_b", "12".into());
            set("scenario.initial", "single_species_center".into());
        }
        "fig3b" => {
            set("shape.n_a", "6".into());
            set("shape.n_b", "6".into());
            set("scenario.initial", "mixed_center".into());
        }
        "fig3c" => {
            set("shape.n_a", "6".into());
            set("shape.n_b", "6".into());
            set("scenario.initial", "separated_corner".into());
        }
        // coupled-basis inputs: fully symmetric state and the singlet
        "fig3d" => {
            set("shape.n_a", "6".into());
            set("shape.n_b", "6".into());
            set("scenario.initial", "coupled:6,0".into());
        }
        "fig3e" => {
            set("shape.n_a", "6".into());
            set("shape.n_b", "6".into());
            set("scenario.initial", "coupled:0,0".into());
        }
        // moderate and strong interactions
        "fig4a" | "fig4a-strong" | "fig4b" | "fig4b-strong" | "fig4c" | "fig4c-strong" => {
            let strong = name.ends_with("-strong");
            let u = if strong { omega } else { 0.125 * omega };
            set("model.u_iso", u.to_string());
            match &name[..5] {
                "fig4a" => {
                    set("shape.n_a", "0".into());
                    set("shape.n_b", "12".into());
                    set("scenario.initial", "single_species_center".into());
                }
                "fig4b" => {
                    set("shape.n_a", "6".into());
                    set("shape.n_b", "6".into());
                    set("scenario.initial", "mixed_center".into());
                }
                _ => {
                    set("shape.n_a", "6".into());
                    set("shape.n_b", "6".into());
                    set("scenario.initial", "separated_corner".into());
                }
            }
        }
        // variance against interaction strength, -2 Omega .. 2 Omega
        "fig5a" | "fig5b" | "fig5c" => {
            match name {
                "fig5a" => {
                    set("shape.n_a", "0".into());
                    set("shape.n_b", "12".into());
                    set("scenario.initial", "single_species_center".into());
                }
                "fig5b" => {
                    set("shape.n_a", "6".into());
                    set("shape.n_b", "6".into());
                    set("scenario.initial", "mixed_center".into());
                }
                _ => {
                    set("shape.n_a", "6".into());
                    set("shape.n_b", "6".into());
                    set("scenario.initial", "separated_corner".into());
                }
            }
            let values: Vec<String> =
                (-20..=20).map(|i| (i as f64 * 0.1 * omega).to_string()).collect();
            set("sweep.u_iso", values.join(","));
        }
        other => {
            return Err(Error::Config(format!(
                "unknown preset `{other}`; available: {}",
                list_presets().join(", ")
            )))
        }
    }
    ScenarioConfig::from_kv(&kv)
}

pub fn list_presets() -> Vec<&'static str> {
    vec![
        "fig2", "fig3a", "fig3b", "fig3c", "fig3d", "fig3e", "fig4a", "fig4a-strong", "fig4b",
        "fig4b-strong", "fig4c", "fig4c-strong", "fig5a", "fig5b", "fig5c",
    ]
}

fn load_amplitudes(shape: &LatticeShape, path: &Path) -> Result<AmplitudeField> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut amplitudes = DVector::from_element(shape.site_count(), Complex64::new(0.0, 0.0));
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("k,") {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(Error::Config(format!(
                "{}: line {}: expected k,l,re,im",
                path.display(),
                lineno + 1
            )));
        }
        let parse_err = |what: &str, v: &str| {
            Error::Config(format!("{}: line {}: bad {what} `{v}`", path.display(), lineno + 1))
        };
        let k: usize = fields[0].parse().map_err(|_| parse_err("k", fields[0]))?;
        let l: usize = fields[1].parse().map_err(|_| parse_err("l", fields[1]))?;
        let re: f64 = fields[2].parse().map_err(|_| parse_err("re", fields[2]))?;
        let im: f64 = fields[3].parse().map_err(|_| parse_err("im", fields[3]))?;
        let label = FockLabel::new(k, l);
        shape.validate(label)?;
        amplitudes[shape.index_of(label)] = Complex64::new(re, im);
    }
    AmplitudeField::normalized(*shape, amplitudes)
}

/// Produces the injection field for a config, enforcing the preset
/// constraints by name.
pub fn resolve_initial_state(config: &ScenarioConfig) -> Result<AmplitudeField> {
    let shape = config.shape;
    match &config.initial_state {
        InitialStateSpec::SingleSpeciesCenter => {
            if shape.n_a() != 0 {
                return Err(Error::Config(format!(
                    "single_species_center requires shape.n_a = 0, got {}",
                    shape.n_a()
                )));
            }
            if !shape.n_b().is_multiple_of(2) {
                return Err(Error::Config(format!(
                    "single_species_center requires an even shape.n_b, got {}",
                    shape.n_b()
                )));
            }
            AmplitudeField::from_fock(shape, FockLabel::new(0, shape.n_b() / 2))
        }
        InitialStateSpec::MixedCenter => {
            if shape.n_a() != shape.n_b() {
                return Err(Error::Config(format!(
                    "mixed_center requires shape.n_a = shape.n_b, got {} and {}",
                    shape.n_a(),
                    shape.n_b()
                )));
            }
            if !shape.n_a().is_multiple_of(2) {
                return Err(Error::Config(format!(
                    "mixed_center requires even particle numbers, got {}",
                    shape.n_a()
                )));
            }
            AmplitudeField::from_fock(shape, FockLabel::new(shape.n_a() / 2, shape.n_b() / 2))
        }
        InitialStateSpec::SeparatedCorner => {
            AmplitudeField::from_fock(shape, FockLabel::new(shape.n_a(), 0))
        }
        InitialStateSpec::Coupled { two_j, two_m } => coupled_state(&shape, *two_j, *two_m),
        InitialStateSpec::Fock { k, l } => AmplitudeField::from_fock(shape, FockLabel::new(*k, *l)),
        InitialStateSpec::Amplitudes(path) => load_amplitudes(&shape, path),
    }
}

/// Trajectory, final grid and summary moments for one Hamiltonian branch.
#[derive(Debug, Clone)]
pub struct BranchResults {
    pub trajectory: Vec<ImbalanceDistribution>,
    pub final_grid: ProbabilityGrid,
    pub mean: f64,
    pub variance: f64,
    /// None for odd N, where the even/odd split is undefined.
    pub odd_suppression: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct SweepRow {
    pub u: f64,
    pub var_no_overlay: f64,
    pub var_overlay: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ScenarioResults {
    pub config_echo: BTreeMap<String, String>,
    pub t_grid: Vec<f64>,
    pub base: BranchResults,
    pub overlay: Option<BranchResults>,
    pub sweep: Option<Vec<SweepRow>>,
}

fn run_branch(
    config: &ScenarioConfig,
    initial: &AmplitudeField,
    t_grid: &[f64],
    overlay: Option<&CouplingOverlay>,
) -> Result<BranchResults> {
    let h = build_hamiltonian(&config.shape, &config.params, config.detuning_mode, overlay)?;
    let prop = decompose(&h)?;
    let fields = evolve_trajectory(&prop, initial, t_grid)?;
    let trajectory: Vec<ImbalanceDistribution> =
        fields.iter().map(imbalance_distribution).collect();
    let final_field = fields.last().expect("grid is non-empty");
    let final_dist = trajectory.last().expect("grid is non-empty");
    let odd_suppression = if config.shape.total_particles().is_multiple_of(2) {
        Some(odd_suppression_metric(final_dist)?)
    } else {
        None
    };
    Ok(BranchResults {
        final_grid: site_probabilities(final_field),
        mean: mean_imbalance(final_dist),
        variance: variance_imbalance(final_dist),
        odd_suppression,
        trajectory,
    })
}

fn variance_at(
    config: &ScenarioConfig,
    params: &ModelParams,
    initial: &AmplitudeField,
    overlay: Option<&CouplingOverlay>,
) -> Result<f64> {
    let h = build_hamiltonian(&config.shape, params, config.detuning_mode, overlay)?;
    let prop = decompose(&h)?;
    let final_field = evolve(&prop, initial, config.t_final)?;
    Ok(variance_imbalance(&imbalance_distribution(&final_field)))
}

/// Runs the configured scenario: trajectory sampling on a uniform grid,
/// an independent overlay branch when enabled, and the optional
/// interaction-strength sweep (sweep points evaluate in parallel; output
/// order follows input order).
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioResults> {
    let initial = resolve_initial_state(config)?;
    let t_grid = uniform_grid(config.t_final, config.t_samples)?;

    let overlay = if config.overlay_enabled {
        Some(diagonal_overlay(&config.layout()?))
    } else {
        None
    };

    let base = run_branch(config, &initial, &t_grid, None)?;
    let overlay_branch = overlay
        .as_ref()
        .map(|ov| run_branch(config, &initial, &t_grid, Some(ov)))
        .transpose()?;

    let sweep = config
        .sweep_u_iso
        .as_ref()
        .map(|values| {
            values
                .par_iter()
                .map(|&u| {
                    let params = ModelParams::new(
                        config.params.omega_a,
                        config.params.omega_b,
                        u,
                        u,
                        u,
                    )?;
                    Ok(SweepRow {
                        u,
                        var_no_overlay: variance_at(config, &params, &initial, None)?,
                        var_overlay: overlay
                            .as_ref()
                            .map(|ov| variance_at(config, &params, &initial, Some(ov)))
                            .transpose()?,
                    })
                })
                .collect::<Result<Vec<SweepRow>>>()
        })
        .transpose()?;

    Ok(ScenarioResults {
        config_echo: config.to_kv(),
        t_grid,
        base,
        overlay: overlay_branch,
        sweep,
    })
}
