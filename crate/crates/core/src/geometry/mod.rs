//! Point clouds, plane primitives and the planar geometry used downstream.

pub mod bbox;
pub mod cloud;
pub mod distance;
pub(crate) mod grid;
pub mod hull;
pub mod io;
pub mod plane;
pub mod ransac;

pub use bbox::{object_bbox, Bbox};
pub use cloud::{GravityPrior, PointCloud};
pub use distance::{primitive_distance, segment_hull_intersections, Segment3};
pub use plane::{fit_plane, PlaneFrame, PlanePrimitive};
pub use ransac::{fit_planes_ransac, RansacParams};
