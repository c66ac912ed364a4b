//! One TOML record holding every threshold of the pipeline.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::{GravityPrior, RansacParams};
use crate::labeling::{QipConstants, DEFAULT_EXACT_CAP};
use crate::patterns::PatternConfig;
use crate::support::SupportConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SolverMode {
    /// Exact when every component fits under the cap, heuristic otherwise.
    #[default]
    Auto,
    Exact,
    Heuristic,
}

/// Knobs of plane extraction beyond the named thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtractionConfig {
    pub max_iterations: usize,
    pub min_inliers: usize,
    pub min_inlier_fraction: f64,
    pub normal_radius: f64,
    pub normal_tolerance_deg: f64,
    pub cluster_tolerance: f64,
    pub sample_cell: f64,
    pub score_sample: usize,
    pub max_failures: usize,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        let r = RansacParams::default();
        Self {
            max_iterations: r.max_iterations,
            min_inliers: r.min_inliers,
            min_inlier_fraction: r.min_inlier_fraction,
            normal_radius: r.normal_radius,
            normal_tolerance_deg: r.normal_tolerance_deg,
            cluster_tolerance: r.cluster_tolerance,
            sample_cell: r.sample_cell,
            score_sample: r.score_sample,
            max_failures: r.max_failures,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub gravity: [f64; 3],
    pub theta_adj: f64,
    pub theta_angle_deg: f64,
    pub tau: f64,
    pub delta: f64,
    pub w_d: f64,
    pub w_r: f64,
    pub d0: f64,
    pub f0: f64,
    pub f1: f64,
    pub eps_ransac: f64,
    pub eps_gap: f64,
    pub rho_min: f64,
    /// Vertical tolerance of the pattern classifier; `None` means `theta_adj`.
    pub eps_z: Option<f64>,
    pub dilation_px: u32,
    pub solver: SolverMode,
    pub exact_cap: usize,
    pub ground_min_area: f64,
    pub ground_id: Option<usize>,
    pub min_half_extent: f64,
    pub extraction: ExtractionConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let q = QipConstants::default();
        let p = PatternConfig::default();
        let s = SupportConfig::default();
        let r = RansacParams::default();
        Self {
            seed: 0,
            gravity: [0.0, 0.0, 1.0],
            theta_adj: p.theta_adj,
            theta_angle_deg: r.horizontal_tolerance_deg,
            tau: p.tau,
            delta: q.delta,
            w_d: q.w_d,
            w_r: q.w_r,
            d0: q.d0,
            f0: q.f0,
            f1: q.f1,
            eps_ransac: r.distance_threshold,
            eps_gap: s.eps_gap,
            rho_min: s.rho_min,
            eps_z: None,
            dilation_px: 2,
            solver: SolverMode::Auto,
            exact_cap: DEFAULT_EXACT_CAP,
            ground_min_area: s.ground_min_area,
            ground_id: None,
            min_half_extent: s.min_half_extent,
            extraction: ExtractionConfig::default(),
        }
    }
}

impl PipelineConfig {
    /// Reads a TOML file; keys left out take their default values.
    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if (self.w_d + self.w_r - 1.0).abs() > 1e-9 || self.w_d < 0.0 || self.w_r < 0.0 {
            return bad("w_d and w_r must be non-negative and sum to 1");
        }
        if !(0.0 < self.delta && self.delta < self.tau && self.tau < 1.0) {
            return bad("need 0 < delta < tau < 1");
        }
        if !(self.d0 == self.f0 && self.f0 < self.f1) {
            return bad("need d0 = f0 < f1");
        }
        let positive = [
            ("theta_adj", self.theta_adj),
            ("eps_ransac", self.eps_ransac),
            ("eps_gap", self.eps_gap),
            ("rho_min", self.rho_min),
            ("min_half_extent", self.min_half_extent),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if !(self.theta_angle_deg > 0.0 && self.theta_angle_deg < 90.0) {
            return bad("theta_angle_deg must lie in (0, 90)");
        }
        if self.rho_min > 1.0 {
            return bad("rho_min must not exceed 1");
        }
        if self.eps_z.is_some_and(|e| !(e > 0.0)) {
            return bad("eps_z must be positive");
        }
        self.gravity_prior()?;
        Ok(())
    }

    /// Hex SHA-256 of the serialized config.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn gravity_prior(&self) -> Result<GravityPrior> {
        GravityPrior::new(nalgebra::Vector3::from(self.gravity))
    }

    pub fn ransac(&self) -> RansacParams {
        let e = &self.extraction;
        RansacParams {
            distance_threshold: self.eps_ransac,
            max_iterations: e.max_iterations,
            min_inliers: e.min_inliers,
            min_inlier_fraction: e.min_inlier_fraction,
            seed: self.seed,
            horizontal_tolerance_deg: self.theta_angle_deg,
            normal_radius: e.normal_radius,
            normal_tolerance_deg: e.normal_tolerance_deg,
            cluster_tolerance: e.cluster_tolerance,
            sample_cell: e.sample_cell,
            score_sample: e.score_sample,
            max_failures: e.max_failures,
        }
    }

    pub fn patterns(&self) -> PatternConfig {
        PatternConfig {
            theta_adj: self.theta_adj,
            tau: self.tau,
            eps_z: self.eps_z.unwrap_or(self.theta_adj),
        }
    }

    pub fn qip(&self) -> QipConstants {
        QipConstants {
            d0: self.d0,
            f0: self.f0,
            f1: self.f1,
            w_d: self.w_d,
            w_r: self.w_r,
            delta: self.delta,
            theta_adj: self.theta_adj,
        }
    }

    pub fn support(&self) -> SupportConfig {
        SupportConfig {
            eps_gap: self.eps_gap,
            rho_min: self.rho_min,
            ground_min_area: self.ground_min_area,
            ground_id: self.ground_id,
            min_half_extent: self.min_half_extent,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_defaults_file_matches() {
        let text = include_str!("../../../config/defaults.toml");
        assert_eq!(PipelineConfig::from_toml(text).unwrap(), PipelineConfig::default());
    }

    #[test]
    fn defaults_validate_and_round_trip() {
        let cfg = PipelineConfig::default();
        cfg.validate().unwrap();
        assert_eq!(PipelineConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
        assert_eq!(PipelineConfig::from_toml("").unwrap(), cfg);
        assert_eq!(cfg.patterns(), PatternConfig::default());
        assert_eq!(cfg.qip(), QipConstants::default());
        assert_eq!(cfg.support(), SupportConfig::default());
        assert_eq!(cfg.ransac(), RansacParams::default());
    }

    #[test]
    fn invariants_enforced() {
        for text in [
            "w_d = 0.5",
            "delta = 0.9",
            "tau = 1.0",
            "f0 = 2.0",
            "f1 = 0.5",
            "theta_adj = 0.0",
            "gravity = [0.0, 0.0, 0.0]",
            "unknown_key = 1",
        ] {
            assert!(PipelineConfig::from_toml(text).is_err(), "{text}");
        }
        let ok = PipelineConfig::from_toml("w_d = 0.4\nw_r = 0.6\nseed = 9").unwrap();
        assert_eq!(ok.seed, 9);
    }

    #[test]
    fn hash_tracks_values() {
        let a = PipelineConfig::default();
        let b = PipelineConfig { seed: 1, ..a.clone() };
        assert_eq!(a.hash(), PipelineConfig::default().hash());
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
