//! Run configuration: one JSON file with per-command sections, all
//! optional, plus flag overrides.  Validation collects every violation
//! before any compute starts, so a bad config is reported in full.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use gibbsdisc_core::io::Fnv1a;
use gibbsdisc_core::measure::default_s;
use gibbsdisc_core::{Basis64, FlowConfig64, Integrator, NonlinearityKind, Spec64};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Directory for cached basis files, checked before building from scratch.
pub const CACHE_ENV: &str = "GIBBSDISC_CACHE";

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub basis: BasisSection,
    pub measure: MeasureSection,
    pub nonlinearity: NonlinSection,
    pub flow: FlowSection,
    pub output_dir: PathBuf,
    pub zeros: ZerosSection,
    pub evolve: EvolveSection,
    pub invariance: InvarianceSection,
    pub checks: ChecksSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            basis: BasisSection::default(),
            measure: MeasureSection::default(),
            nonlinearity: NonlinSection::default(),
            flow: FlowSection::default(),
            output_dir: PathBuf::from("out"),
            zeros: ZerosSection::default(),
            evolve: EvolveSection::default(),
            invariance: InvarianceSection::default(),
            checks: ChecksSection::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BasisSection {
    pub n_modes: usize,
    /// Quadrature order; defaults to 4 * n_modes, which keeps products of
    /// the top modes fully resolved.
    pub quad_order: Option<usize>,
}

impl Default for BasisSection {
    fn default() -> Self {
        BasisSection { n_modes: 64, quad_order: None }
    }
}

impl BasisSection {
    pub fn quad_order(&self) -> usize {
        self.quad_order.unwrap_or(4 * self.n_modes)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeasureSection {
    /// Sampling regularity; defaults to 0.9 * alpha / (alpha + 2).
    pub s: Option<f64>,
    pub r_cutoff: f64,
    pub n_samples: usize,
    pub seed: u64,
    /// Sobolev index for tail curves and per-sample norm columns.
    pub tail_sigma: f64,
}

impl Default for MeasureSection {
    fn default() -> Self {
        MeasureSection {
            s: None,
            r_cutoff: 1.0,
            n_samples: 4096,
            seed: 0,
            tail_sigma: 0.45,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NonlinSection {
    pub kind: NonlinearityKind,
    pub alpha: f64,
    pub sign: f64,
    pub normalize_at_zero: bool,
}

impl Default for NonlinSection {
    fn default() -> Self {
        NonlinSection {
            kind: NonlinearityKind::SmoothPower,
            alpha: 1.0,
            sign: 1.0,
            normalize_at_zero: true,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowSection {
    pub t_final: f64,
    pub dt: f64,
    pub integrator: Integrator,
    pub conservation_tol_h: f64,
    pub conservation_tol_l2: f64,
    pub record_stride: usize,
    pub nonlinear_scale: f64,
}

impl Default for FlowSection {
    fn default() -> Self {
        let f = FlowConfig64::default();
        FlowSection {
            t_final: f.t_final,
            dt: f.dt,
            integrator: f.integrator,
            conservation_tol_h: f.conservation_tol_h,
            conservation_tol_l2: f.conservation_tol_l2,
            record_stride: f.record_stride,
            nonlinear_scale: f.nonlinear_scale,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ZerosSection {
    pub n_max: usize,
}

impl Default for ZerosSection {
    fn default() -> Self {
        ZerosSection { n_max: 200 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveSection {
    /// Ensemble file to integrate; a fresh ensemble is drawn from the
    /// measure section when absent.
    pub ensemble: Option<PathBuf>,
    /// Sample whose full trajectory is written out.
    pub trajectory_index: usize,
    pub sigma: f64,
}

impl Default for EvolveSection {
    fn default() -> Self {
        EvolveSection { ensemble: None, trajectory_index: 0, sigma: 0.45 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InvarianceSection {
    /// |z| above this counts as a detected shift.
    pub z_threshold: f64,
}

impl Default for InvarianceSection {
    fn default() -> Self {
        InvarianceSection { z_threshold: 3.0 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChecksSection {
    /// Largest mode index in the bilinear tables; defaults to basis.n_modes.
    pub bilinear_max: Option<usize>,
    /// Dyadic block sizes for the resonance-count sweep.
    pub counting_blocks: Vec<u64>,
    /// Window half-size parameters; L1 = L2 = this value.
    pub counting_l: u64,
    /// Largest lattice value scanned for representation counts.
    pub repr_l_max: u64,
}

impl Default for ChecksSection {
    fn default() -> Self {
        ChecksSection {
            bilinear_max: None,
            counting_blocks: vec![16, 32, 64, 128, 256, 512, 1024],
            counting_l: 1,
            repr_l_max: 100_000,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Vec<String>> {
        let text = fs::read_to_string(path)
            .map_err(|e| vec![format!("cannot read config {}: {e}", path.display())])?;
        serde_json::from_str(&text)
            .map_err(|e| vec![format!("cannot parse config {}: {e}", path.display())])
    }

    /// Resolved sampling regularity.
    pub fn s(&self) -> f64 {
        self.measure.s.unwrap_or_else(|| default_s(self.nonlinearity.alpha))
    }

    pub fn nonlinearity_spec(&self) -> Spec64 {
        Spec64 {
            kind: self.nonlinearity.kind,
            alpha: self.nonlinearity.alpha,
            sign: self.nonlinearity.sign,
            normalize_at_zero: self.nonlinearity.normalize_at_zero,
        }
    }

    pub fn flow_config(&self) -> FlowConfig64 {
        FlowConfig64 {
            t_final: self.flow.t_final,
            dt: self.flow.dt,
            integrator: self.flow.integrator,
            conservation_tol_h: self.flow.conservation_tol_h,
            conservation_tol_l2: self.flow.conservation_tol_l2,
            record_stride: self.flow.record_stride,
            nonlinear_scale: self.flow.nonlinear_scale,
        }
    }

    /// Every violation across all sections; empty means admissible.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.basis.n_modes == 0 {
            v.push("basis.n_modes must be at least 1".into());
        }
        if self.basis.quad_order() < self.basis.n_modes {
            v.push(format!(
                "basis.quad_order = {} is below n_modes = {}",
                self.basis.quad_order(),
                self.basis.n_modes
            ));
        }
        let s = self.s();
        if !(s > 0.0 && s < 0.5) {
            v.push(format!("measure.s must lie in (0, 0.5), got {s}"));
        }
        if !(self.measure.r_cutoff > 0.0) || !self.measure.r_cutoff.is_finite() {
            v.push(format!(
                "measure.r_cutoff must be a positive finite number, got {}",
                self.measure.r_cutoff
            ));
        }
        if self.measure.n_samples < 2 {
            v.push(format!(
                "measure.n_samples must be at least 2, got {}",
                self.measure.n_samples
            ));
        }
        if !self.measure.tail_sigma.is_finite() {
            v.push("measure.tail_sigma must be finite".into());
        }
        v.extend(self.nonlinearity_spec().validate());
        v.extend(self.flow_config().violations());
        if self.zeros.n_max == 0 {
            v.push("zeros.n_max must be at least 1".into());
        }
        if self.invariance.z_threshold <= 0.0 {
            v.push("invariance.z_threshold must be positive".into());
        }
        if self.checks.counting_l == 0 {
            v.push("checks.counting_l must be at least 1".into());
        }
        if self.checks.counting_blocks.is_empty() {
            v.push("checks.counting_blocks must not be empty".into());
        }
        for &b in &self.checks.counting_blocks {
            if !b.is_power_of_two() || b > 4096 {
                v.push(format!(
                    "checks.counting_blocks entries must be powers of two up to 4096, got {b}"
                ));
            }
        }
        if self.checks.repr_l_max == 0 {
            v.push("checks.repr_l_max must be at least 1".into());
        }
        if self.output_dir.as_os_str().is_empty() {
            v.push("output_dir must not be empty".into());
        }
        v
    }

    /// FNV-1a over the canonical JSON form, so any semantic change to the
    /// run (including flag overrides) changes the hash.  The output
    /// directory says where results go, not what they are, and is left out.
    pub fn content_hash(&self) -> u64 {
        let mut canon = self.clone();
        canon.output_dir = PathBuf::new();
        let bytes = serde_json::to_vec(&canon).expect("config serializes");
        let mut h = Fnv1a::new();
        h.update(&bytes);
        h.finish()
    }
}

/// Build the basis, going through the `GIBBSDISC_CACHE` directory when it
/// is set.  Cache misses and unreadable cache files fall back to a fresh
/// build; writing the cache back is best effort.
pub fn load_or_build_basis(n_modes: usize, quad_order: usize) -> gibbsdisc_core::error::Result<Basis64> {
    let Some(dir) = std::env::var_os(CACHE_ENV) else {
        return Basis64::build(n_modes, quad_order);
    };
    let dir = PathBuf::from(dir);
    let path = dir.join(format!("basis_N{n_modes}_K{quad_order}.bin"));
    if let Ok(basis) = Basis64::load(&path) {
        if basis.n_modes() == n_modes && basis.quad_order() == quad_order {
            return Ok(basis);
        }
    }
    let basis = Basis64::build(n_modes, quad_order)?;
    if fs::create_dir_all(&dir).is_ok() {
        let _ = basis.save(&path);
    }
    Ok(basis)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_admissible() {
        assert!(RunConfig::default().violations().is_empty());
    }

    #[test]
    fn default_s_follows_alpha() {
        let mut cfg = RunConfig::default();
        cfg.nonlinearity.alpha = 1.0;
        assert!((cfg.s() - 0.3).abs() < 1e-15);
        cfg.measure.s = Some(0.2);
        assert_eq!(cfg.s(), 0.2);
    }

    #[test]
    fn violations_are_collected_not_short_circuited() {
        let mut cfg = RunConfig::default();
        cfg.basis.n_modes = 0;
        cfg.measure.r_cutoff = -1.0;
        cfg.nonlinearity.alpha = 5.0;
        cfg.flow.dt = 0.0;
        cfg.zeros.n_max = 0;
        let v = cfg.violations();
        assert!(v.len() >= 5, "expected at least 5 violations, got {v:?}");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let err = serde_json::from_str::<RunConfig>(r#"{"basis": {"modes": 4}}"#);
        assert!(err.is_err());
    }

    #[test]
    fn hash_tracks_semantic_changes() {
        let a = RunConfig::default();
        let mut b = RunConfig::default();
        assert_eq!(a.content_hash(), b.content_hash());
        b.measure.seed = 7;
        assert_ne!(a.content_hash(), b.content_hash());
    }

    #[test]
    fn quad_order_defaults_to_four_n() {
        let sect = BasisSection { n_modes: 16, quad_order: None };
        assert_eq!(sect.quad_order(), 64);
        let sect = BasisSection { n_modes: 16, quad_order: Some(40) };
        assert_eq!(sect.quad_order(), 40);
    }
}
