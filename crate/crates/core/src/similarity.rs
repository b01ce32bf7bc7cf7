use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point2;

/// A direct (orientation-preserving) similarity of the plane,
/// `p -> scale * R(rotation) p + translation`.
///
/// `side_flip` records whether the map carries the region below the base
/// chord onto the outside of the domain. It is geometric bookkeeping for the
/// membership classifier and plays no part in `apply`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMap {
    pub scale: f64,
    pub rotation: f64,
    pub translation: Point2,
    pub side_flip: bool,
    // scale * (cos, sin) of the rotation
    re: f64,
    im: f64,
}

impl SimilarityMap {
    pub fn new(scale: f64, rotation: f64, translation: Point2, side_flip: bool) -> Self {
        SimilarityMap {
            scale,
            rotation,
            translation,
            side_flip,
            re: scale * rotation.cos(),
            im: scale * rotation.sin(),
        }
    }

    pub fn identity() -> Self {
        SimilarityMap::new(1.0, 0.0, Point2::ORIGIN, false)
    }

    /// The unique direct similarity sending `p1 -> q1` and `p2 -> q2`.
    ///
    /// Treats the plane as the complex line: `z -> c z + t` with
    /// `c = (q2 - q1) / (p2 - p1)`. The flip flag starts out false.
    pub fn from_pairs(p1: Point2, q1: Point2, p2: Point2, q2: Point2) -> Result<Self> {
        let dp = p2 - p1;
        let dq = q2 - q1;
        let den = dp.dot(dp);
        if den == 0.0 {
            return Err(Error::DegenerateMap("source points coincide"));
        }
        if dq.dot(dq) == 0.0 {
            return Err(Error::DegenerateMap("target points coincide (zero scale)"));
        }
        let re = (dq.x * dp.x + dq.y * dp.y) / den;
        let im = (dq.y * dp.x - dq.x * dp.y) / den;
        let translation = Point2::new(q1.x - (re * p1.x - im * p1.y), q1.y - (im * p1.x + re * p1.y));
        Ok(SimilarityMap {
            scale: re.hypot(im),
            rotation: im.atan2(re),
            translation,
            side_flip: false,
            re,
            im,
        })
    }

    pub fn with_side_flip(mut self, flip: bool) -> Self {
        self.side_flip = flip;
        self
    }

    #[inline]
    pub fn apply(&self, p: Point2) -> Point2 {
        Point2::new(
            self.re * p.x - self.im * p.y + self.translation.x,
            self.im * p.x + self.re * p.y + self.translation.y,
        )
    }

    #[inline]
    pub fn inverse_apply(&self, p: Point2) -> Point2 {
        let d = p - self.translation;
        let s2 = self.re * self.re + self.im * self.im;
        Point2::new(
            (self.re * d.x + self.im * d.y) / s2,
            (self.re * d.y - self.im * d.x) / s2,
        )
    }
}
