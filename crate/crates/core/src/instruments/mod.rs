//! Procedural articulated instrument models: two rigid point-set parts
//! joined by a hinge, 12 canonical keypoints, and a dense surface sample.
//!
//! Everything downstream consumes only points, keypoints, hinge, and
//! diameter, so point-set instruments stand in for scanned meshes. Shapes
//! mimic scissor and forceps families, including deliberately near-duplicate
//! classes that differ only in scale.

mod gen;
mod io;

pub use gen::make_instrument_set;
pub use io::{read_model_set, write_model_set};

use crate::math::{self, Vec3};
use crate::scalar::Real;
use crate::KEYPOINT_COUNT;

#[derive(Debug, thiserror::Error)]
pub enum InstrumentError {
    #[error("model has no surface points")]
    EmptyModel,
    #[error("model set io: {0}")]
    Io(#[from] std::io::Error),
    #[error("model set parse: {0}")]
    Parse(String),
    #[error("invalid model: {0}")]
    Invalid(String),
}

/// The rigid component a point belongs to. Part A is the reference part;
/// articulation rotates part B about the hinge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Keypoint<R> {
    pub part: Part,
    pub position: Vec3<R>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint<R> {
    pub part: Part,
    pub position: Vec3<R>,
}

/// Canonical-frame articulated instrument model.
#[derive(Debug, Clone, PartialEq)]
pub struct InstrumentModel<R> {
    pub class_id: usize,
    pub name: String,
    pub part_a: Vec<Vec3<R>>,
    pub part_b: Vec<Vec3<R>>,
    pub hinge_point: Vec3<R>,
    pub hinge_axis: Vec3<R>,
    pub keypoints: [Keypoint<R>; KEYPOINT_COUNT],
    pub surface: Vec<SurfacePoint<R>>,
    /// Max pairwise surface distance at zero articulation, mm.
    pub diameter: R,
}

impl<R: Real> InstrumentModel<R> {
    /// Checks the structural invariants: unit hinge axis, 6 keypoints per
    /// part each coinciding with a declared part point, stored diameter.
    pub fn validate(&self) -> Result<(), InstrumentError> {
        if (math::norm(&self.hinge_axis) - R::one()).abs().as_f64() > 1e-9 {
            return Err(InstrumentError::Invalid("hinge axis not unit".into()));
        }
        let on_a = self.keypoints.iter().filter(|k| k.part == Part::A).count();
        if on_a != KEYPOINT_COUNT / 2 {
            return Err(InstrumentError::Invalid(format!(
                "expected {} part-A keypoints, got {on_a}",
                KEYPOINT_COUNT / 2
            )));
        }
        for (i, kp) in self.keypoints.iter().enumerate() {
            let pool = match kp.part {
                Part::A => &self.part_a,
                Part::B => &self.part_b,
            };
            let hit = pool
                .iter()
                .any(|p| math::dist(p, &kp.position).as_f64() < 1e-9);
            if !hit {
                return Err(InstrumentError::Invalid(format!(
                    "keypoint {i} not among its part's points"
                )));
            }
        }
        let d = diameter(self)?;
        if (d - self.diameter).abs().as_f64() > 1e-6 {
            return Err(InstrumentError::Invalid("stored diameter stale".into()));
        }
        Ok(())
    }
}

/// Max pairwise distance over the surface sample at zero articulation.
pub fn diameter<R: Real>(model: &InstrumentModel<R>) -> Result<R, InstrumentError> {
    if model.surface.is_empty() {
        return Err(InstrumentError::EmptyModel);
    }
    let pts = &model.surface;
    let mut best = R::zero();
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            let d = math::dist(&pts[i].position, &pts[j].position);
            if d > best {
                best = d;
            }
        }
    }
    Ok(best)
}
