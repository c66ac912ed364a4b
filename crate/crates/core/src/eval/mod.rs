//! Segmentation and scene-graph scores against ground truth.

pub mod graph;
pub mod mask;
pub mod matching;
pub mod prf;
pub mod scene;
pub mod spectral;
pub mod support;

pub use graph::{apply_significance_rules, GraphMatrix};
pub use mask::SegmentationMask;
pub use matching::{match_labels, match_objects, Matching};
pub use prf::{prf_boundary, prf_overlap, prf_overlap_labels, Prf};
pub use scene::{score_scene, SceneInput, SceneScore};
pub use spectral::{
    cheeger_bounds, cheeger_constant, cheeger_section, fiedler_pair, jacobi_eigen, normalized_laplacian,
    spectral_section,
};
pub use support::{support_agreement, SupportAgreement};
