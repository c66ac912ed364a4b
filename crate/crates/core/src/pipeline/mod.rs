//! Stage functions chaining extraction, patterns, labeling and support.

pub mod artifacts;
pub mod report;

use std::time::Instant;

use crate::config::{PipelineConfig, SolverMode};
use crate::error::Result;
use crate::eval::{score_scene, SceneInput, SceneScore};
use crate::geometry::{fit_planes_ransac, PlanePrimitive, PointCloud};
use crate::labeling::{build_qip, solve_auto, solve_exact, solve_heuristic, LabelAssignment, QipInstance};
use crate::patterns::PatternGraph;
use crate::support::{assemble_objects, infer_hierarchy, SceneHierarchyGraph};
use crate::synth::SynthScene;

#[derive(Debug, Clone)]
pub struct Analysis {
    pub primitives: Vec<PlanePrimitive>,
    pub patterns: PatternGraph,
    pub qip: QipInstance,
    pub assignment: LabelAssignment,
    pub hierarchy: SceneHierarchyGraph,
}

pub fn extract(cloud: &PointCloud, cfg: &PipelineConfig) -> Result<Vec<PlanePrimitive>> {
    fit_planes_ransac(cloud, &cfg.gravity_prior()?, &cfg.ransac())
}

pub fn patterns(prims: &[PlanePrimitive], cfg: &PipelineConfig) -> Result<PatternGraph> {
    Ok(PatternGraph::build(prims, &cfg.gravity_prior()?, &cfg.patterns()))
}

pub fn segment(graph: &PatternGraph, cfg: &PipelineConfig) -> Result<(QipInstance, LabelAssignment)> {
    let inst = build_qip(graph, &cfg.qip())?;
    let assignment = segment_instance(&inst, cfg)?;
    Ok((inst, assignment))
}

/// Solves a built instance with the configured solver.
pub fn segment_instance(inst: &QipInstance, cfg: &PipelineConfig) -> Result<LabelAssignment> {
    Ok(match cfg.solver {
        SolverMode::Auto => solve_auto(inst, cfg.exact_cap, cfg.seed)?,
        SolverMode::Exact => solve_exact(inst, cfg.exact_cap)?,
        SolverMode::Heuristic => solve_heuristic(inst, cfg.seed),
    })
}

pub fn infer(
    prims: &[PlanePrimitive],
    graph: &PatternGraph,
    inst: &QipInstance,
    assignment: &LabelAssignment,
    cfg: &PipelineConfig,
) -> Result<SceneHierarchyGraph> {
    let gravity = cfg.gravity_prior()?;
    let support = cfg.support();
    let objects = assemble_objects(assignment, inst, prims, graph, &gravity, &support)?;
    infer_hierarchy(objects, graph, prims, &gravity, &support)
}

/// Runs all four stages in memory, logging the time of each.
pub fn analyze(cloud: &PointCloud, cfg: &PipelineConfig) -> Result<Analysis> {
    cfg.validate()?;
    let t = Instant::now();
    let primitives = extract(cloud, cfg)?;
    log::info!("extract: {} primitives in {:.2?}", primitives.len(), t.elapsed());
    let t = Instant::now();
    let graph = patterns(&primitives, cfg)?;
    log::info!("patterns: {} edges in {:.2?}", graph.edges.len(), t.elapsed());
    let t = Instant::now();
    let (qip, assignment) = segment(&graph, cfg)?;
    log::info!("segment: {:.2?}", t.elapsed());
    let t = Instant::now();
    let hierarchy = infer(&primitives, &graph, &qip, &assignment, cfg)?;
    log::info!("infer: {} objects in {:.2?}", hierarchy.objects.len(), t.elapsed());
    Ok(Analysis {
        primitives,
        patterns: graph,
        qip,
        assignment,
        hierarchy,
    })
}

impl Analysis {
    /// Object id + 1 of every point of the analysed cloud, 0 for points in
    /// no primitive.
    pub fn point_labels(&self, n_points: usize) -> Vec<u32> {
        artifacts::point_labels(n_points, &self.primitives, &self.hierarchy)
    }
}

/// Scores an analysis of a synthetic scene: matching and overlap over
/// points, boundary over label images rendered from the scene camera.
pub fn score_synthetic(scene: &SynthScene, analysis: &Analysis, cfg: &PipelineConfig) -> Result<SceneScore> {
    let pred = analysis.point_labels(scene.cloud.len());
    let gt: Vec<u32> = scene.gt.point_object.iter().map(|&o| o as u32 + 1).collect();
    let pred_mask = scene.camera.render_labels(&scene.cloud.points, &pred);
    let gt_mask = scene.gt_mask();
    score_scene(&SceneInput {
        pred_labels: &pred,
        gt_labels: &gt,
        pred_graph: &analysis.hierarchy,
        gt_graph: &scene.gt.hierarchy,
        masks: Some((&pred_mask, &gt_mask)),
        dilation_px: cfg.dilation_px,
    })
}
