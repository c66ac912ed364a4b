//! Synthetic tabletop scenes with exact ground truth.

pub mod camera;
pub mod dataset;
pub mod fixtures;
pub mod occlusion;
pub mod scene;

pub use camera::Camera;
pub use dataset::{manifest_scenes, write_dataset, write_scene, Manifest, ManifestEntry};
pub use fixtures::{canonical_pattern_fixture, perturbed_pattern_fixture};
pub use occlusion::{render_occlusion, visible_points, Viewpoint};
pub use scene::{
    generate_scene, random_layout, scene_from_layout, BoxSpec, GroundTruth, SceneLayout, SceneSpec, SynthScene,
};
