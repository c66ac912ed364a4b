//! Dataset evaluation: per-scene scores from prediction and ground-truth
//! directories, written as CSV rows and a JSON summary.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::artifacts::{read_hierarchy, HIERARCHY, MASK};
use crate::config::PipelineConfig;
use crate::error::Result;
use crate::eval::{score_scene, SceneInput, SceneScore, SegmentationMask};
use crate::labeling::fsum::fsum;

pub const EVAL_CSV: &str = "eval.csv";
pub const SUMMARY: &str = "summary.json";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self { mean: 0.0, std: 0.0 };
        }
        let n = values.len() as f64;
        let mean = fsum(values.iter().copied()) / n;
        let var = fsum(values.iter().map(|v| (v - mean) * (v - mean))) / n;
        Self { mean, std: var.sqrt() }
    }
}

/// Mean precision, recall and F over scenes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrfMean {
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "F")]
    pub f: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skipped {
    pub scene: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub scenes: usize,
    pub skipped: Vec<Skipped>,
    pub overlap: PrfMean,
    pub boundary: PrfMean,
    pub cheeger_section: MeanStd,
    pub spectral_section: MeanStd,
    /// Fraction of scenes whose support edges match exactly.
    pub support_exact: f64,
    /// Ground-truth object-to-object support edges recovered, pooled.
    pub support_recall: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub rows: Vec<(String, SceneScore)>,
    pub summary: EvalSummary,
}

impl EvalReport {
    pub fn from_rows(rows: Vec<(String, SceneScore)>, skipped: Vec<Skipped>) -> Self {
        let scores: Vec<&SceneScore> = rows.iter().map(|(_, s)| s).collect();
        let mean = |f: &dyn Fn(&SceneScore) -> f64| MeanStd::of(&scores.iter().map(|s| f(s)).collect::<Vec<_>>()).mean;
        let boundary = |s: &SceneScore| s.boundary.unwrap_or(s.overlap);
        let hits: usize = scores.iter().map(|s| s.support.hits).sum();
        let gt_edges: usize = scores.iter().map(|s| s.support.gt_edges).sum();
        let summary = EvalSummary {
            scenes: rows.len(),
            skipped,
            overlap: PrfMean {
                p: mean(&|s| s.overlap.p),
                r: mean(&|s| s.overlap.r),
                f: mean(&|s| s.overlap.f),
            },
            boundary: PrfMean {
                p: mean(&|s| boundary(s).p),
                r: mean(&|s| boundary(s).r),
                f: mean(&|s| boundary(s).f),
            },
            cheeger_section: MeanStd::of(&scores.iter().map(|s| s.cheeger_section).collect::<Vec<_>>()),
            spectral_section: MeanStd::of(&scores.iter().map(|s| s.spectral_section).collect::<Vec<_>>()),
            support_exact: mean(&|s| s.support.exact as u8 as f64),
            support_recall: if gt_edges == 0 {
                1.0
            } else {
                hits as f64 / gt_edges as f64
            },
        };
        Self { rows, summary }
    }

    pub fn csv(&self) -> String {
        let mut out = String::from(
            "scene,overlap_p,overlap_r,overlap_f,boundary_p,boundary_r,boundary_f,cheeger_section,\
             spectral_section,support_exact,support_hits,support_gt_edges,pred_objects,gt_objects,matched\n",
        );
        for (name, s) in &self.rows {
            let b = s.boundary.unwrap_or(s.overlap);
            let _ = writeln!(
                out,
                "{name},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                s.overlap.p,
                s.overlap.r,
                s.overlap.f,
                b.p,
                b.r,
                b.f,
                s.cheeger_section,
                s.spectral_section,
                s.support.exact as u8,
                s.support.hits,
                s.support.gt_edges,
                s.pred_objects,
                s.gt_objects,
                s.matched
            );
        }
        out
    }
}

/// Scores one prediction directory against its ground truth: both hold
/// `hierarchy.json` and a `mask.png` label image.
pub fn score_dirs(pred: &Path, gt: &Path, dilation_px: u32) -> Result<SceneScore> {
    let pm = SegmentationMask::read_png(&pred.join(MASK))?;
    let gm = SegmentationMask::read_png(&gt.join(MASK))?;
    let pg = read_hierarchy(pred)?;
    let gg = read_hierarchy(gt)?;
    score_scene(&SceneInput {
        pred_labels: &pm.labels,
        gt_labels: &gm.labels,
        pred_graph: &pg,
        gt_graph: &gg,
        masks: Some((&pm, &gm)),
        dilation_px,
    })
}

/// Scene directories under `pred`: `pred` itself when it holds a
/// hierarchy, otherwise its subdirectories that do, sorted by name.
fn pred_scenes(pred: &Path) -> Result<Vec<(String, PathBuf)>> {
    if pred.join(HIERARCHY).is_file() {
        return Ok(vec![(".".into(), pred.to_path_buf())]);
    }
    let mut out = Vec::new();
    for entry in fs::read_dir(pred)? {
        let path = entry?.path();
        if path.join(HIERARCHY).is_file() {
            out.push((entry_name(&path), path));
        }
    }
    out.sort();
    Ok(out)
}

fn entry_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Evaluates every predicted scene in parallel. Scenes without ground
/// truth, or whose files fail to load, are skipped with a warning.
pub fn evaluate(pred: &Path, gt: &Path, cfg: &PipelineConfig) -> Result<EvalReport> {
    let scenes = pred_scenes(pred)?;
    let results: Vec<(String, std::result::Result<SceneScore, String>)> = scenes
        .par_iter()
        .map(|(name, dir)| {
            let gt_dir = if name == "." { gt.to_path_buf() } else { gt.join(name) };
            let r = if !gt_dir.join(HIERARCHY).is_file() {
                Err("no ground truth".to_string())
            } else {
                score_dirs(dir, &gt_dir, cfg.dilation_px).map_err(|e| e.to_string())
            };
            (name.clone(), r)
        })
        .collect();
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for (scene, r) in results {
        match r {
            Ok(s) => rows.push((scene, s)),
            Err(reason) => {
                log::warn!("skipping {scene}: {reason}");
                skipped.push(Skipped { scene, reason });
            }
        }
    }
    Ok(EvalReport::from_rows(rows, skipped))
}

/// [`evaluate`], then writes `eval.csv` and `summary.json` to `out`.
pub fn run_eval(pred: &Path, gt: &Path, cfg: &PipelineConfig, out: &Path) -> Result<EvalReport> {
    let report = evaluate(pred, gt, cfg)?;
    fs::create_dir_all(out)?;
    fs::write(out.join(EVAL_CSV), report.csv())?;
    let mut text = serde_json::to_string_pretty(&report.summary)?;
    text.push('\n');
    fs::write(out.join(SUMMARY), text)?;
    Ok(report)
}
