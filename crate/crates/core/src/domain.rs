//! The F2(θ) and F3(θ) fractal domains.
//!
//! Each domain is the inner square `[-1, 1]²` with its four sides replaced
//! by rotated copies of a self-similar edge curve. The edge curve joins
//! `(-1, 1)` to `(1, 1)` and is the attractor of `n` direct similarities with
//! common ratio `r = sin θ / sin nθ`. The construction points `P_0..P_n` lie
//! on a circle centred at `O` below the base chord, consecutive points
//! subtending `2θ` at `O`.
//!
//! Membership folds a query into the top quadrant `|x| <= y` and then walks
//! down the similarity tree. The sub-copy responsible for a point is the one
//! whose angular sector at `O` (between the rays through `P_i` and
//! `P_{i+1}`) contains it.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_6};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::similarity::SimilarityMap;

pub const DEFAULT_MAX_DEPTH: u32 = 64;
pub const DEFAULT_VERTEX_BUDGET: usize = 1 << 24;
/// Distance kept from the degenerate upper end of each family's θ range.
pub const THETA_GUARD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub enum Family {
    F2,
    F3,
}

impl Family {
    pub fn n(self) -> usize {
        match self {
            Family::F2 => 2,
            Family::F3 => 3,
        }
    }

    /// Supremum of the open θ interval.
    pub fn theta_limit(self) -> f64 {
        match self {
            Family::F2 => FRAC_PI_4,
            Family::F3 => FRAC_PI_6,
        }
    }

    pub fn theta_max(self) -> f64 {
        self.theta_limit() - THETA_GUARD
    }
}

impl TryFrom<u32> for Family {
    type Error = Error;
    fn try_from(n: u32) -> Result<Self> {
        match n {
            2 => Ok(Family::F2),
            3 => Ok(Family::F3),
            other => Err(Error::UnsupportedFamily(other)),
        }
    }
}

impl From<Family> for u32 {
    fn from(f: Family) -> u32 {
        f.n() as u32
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.n())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FractalSpec {
    pub family: Family,
    pub theta: f64,
}

impl FractalSpec {
    pub fn new(family: Family, theta: f64) -> Result<Self> {
        let spec = FractalSpec { family, theta };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let max = self.family.theta_max();
        if !(self.theta > 0.0 && self.theta <= max) {
            return Err(Error::DegenerateAngle {
                family: self.family.n() as u32,
                theta: self.theta,
                max,
                limit: self.family.theta_limit(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Membership {
    Inside,
    Outside,
}

impl Membership {
    pub fn is_inside(self) -> bool {
        self == Membership::Inside
    }
}

/// A fully derived fractal domain. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractalDomain {
    pub spec: FractalSpec,
    /// Common contraction ratio of the edge-curve similarities.
    pub r: f64,
    /// Similarity dimension of the boundary.
    pub dimension: f64,
    /// Enclosed area.
    pub area: f64,
    /// Height of the highest boundary point in the top quadrant.
    pub y_max: f64,
    pub maps: Vec<SimilarityMap>,
    pub base_points: Vec<Point2>,
    pub circle_center: Point2,
    pub circle_radius: f64,
    // P_k - O, used for the sector half-plane tests
    sector_dirs: Vec<Point2>,
}

/// Similarity dimension from the closed forms.
pub fn similarity_dimension(family: Family, theta: f64) -> f64 {
    match family {
        Family::F2 => 2f64.ln() / (2.0 * theta.cos()).ln(),
        Family::F3 => {
            let c = theta.cos();
            3f64.ln() / (4.0 * c * c - 1.0).ln()
        }
    }
}

/// Area between the base chord and the edge curve.
pub fn lobe_area(family: Family, theta: f64) -> f64 {
    match family {
        Family::F2 => (2.0 * theta).sin() / (2.0 + (2.0 * theta).cos()),
        Family::F3 => {
            let s2 = (2.0 * theta).sin();
            let s3 = (3.0 * theta).sin();
            let s1 = theta.sin();
            2.0 * s2 * s2 * s2 / (s3 * s3 + s1 * s1)
        }
    }
}

impl FractalDomain {
    pub fn new(spec: FractalSpec) -> Result<Self> {
        spec.validate()?;
        let n = spec.family.n();
        let theta = spec.theta;
        let n_theta = n as f64 * theta;

        let r = theta.sin() / n_theta.sin();
        let dimension = similarity_dimension(spec.family, theta);
        let area = 4.0 + 4.0 * lobe_area(spec.family, theta);
        let y_max = 1.0 + ((n - 1) as f64 * theta).tan();

        let circle_radius = 1.0 / n_theta.sin();
        let circle_center = Point2::new(0.0, 1.0 - n_theta.cos() / n_theta.sin());
        let mut base_points: Vec<Point2> = (0..=n)
            .map(|k| {
                let a = (n as f64 - 2.0 * k as f64) * theta;
                circle_center + Point2::new(-a.sin(), a.cos()) * circle_radius
            })
            .collect();
        base_points[0] = Point2::new(-1.0, 1.0);
        base_points[n] = Point2::new(1.0, 1.0);

        let p = &base_points;
        let (start, end) = (p[0], p[n]);
        let maps = match spec.family {
            Family::F2 => vec![
                SimilarityMap::from_pairs(start, p[1], end, p[0])?.with_side_flip(true),
                SimilarityMap::from_pairs(start, p[2], end, p[1])?.with_side_flip(true),
            ],
            Family::F3 => vec![
                SimilarityMap::from_pairs(start, p[1], end, p[0])?.with_side_flip(true),
                SimilarityMap::from_pairs(start, p[1], end, p[2])?.with_side_flip(false),
                SimilarityMap::from_pairs(start, p[3], end, p[2])?.with_side_flip(true),
            ],
        };
        let sector_dirs = base_points.iter().map(|&b| b - circle_center).collect();

        Ok(FractalDomain {
            spec,
            r,
            dimension,
            area,
            y_max,
            maps,
            base_points,
            circle_center,
            circle_radius,
            sector_dirs,
        })
    }

    pub fn n(&self) -> usize {
        self.spec.family.n()
    }

    /// Side of the bounding square `[-y_max, y_max]²`.
    pub fn bounding_side(&self) -> f64 {
        2.0 * self.y_max
    }

    /// Signed half-plane value of `p` against the ray `O -> P_k`:
    /// non-negative on or counter-clockwise of the ray.
    #[inline]
    pub(crate) fn ray_side(&self, k: usize, p: Point2) -> f64 {
        self.sector_dirs[k].cross(p - self.circle_center)
    }

    #[inline]
    pub(crate) fn sector_dir(&self, k: usize) -> Point2 {
        self.sector_dirs[k]
    }

    /// Index of the angular sector at `O` holding `p`; rays belong to the
    /// lower-indexed sector. Points beyond the outer rays are clamped.
    pub fn region_index(&self, p: Point2) -> usize {
        let n = self.n();
        (0..n - 1)
            .find(|&i| self.ray_side(i + 1, p) >= 0.0)
            .unwrap_or(n - 1)
    }

    /// Fold-and-recurse membership classifier.
    pub fn contains(&self, p: Point2, max_depth: u32) -> Membership {
        let (q, _) = fold_to_top(p);
        if self.below_edge_curve(q, max_depth) {
            Membership::Inside
        } else {
            Membership::Outside
        }
    }

    /// Side of `p`, in the top-edge frame, relative to the edge curve
    /// extended by the rays `y = 1, |x| >= 1`. True means the domain side.
    pub fn below_edge_curve(&self, mut q: Point2, max_depth: u32) -> bool {
        let mut flipped = false;
        for _ in 0..max_depth {
            if q.y < 1.0 {
                return !flipped;
            }
            if q.y > self.y_max || q.x.abs() > 1.0 {
                return flipped;
            }
            let map = &self.maps[self.region_index(q)];
            q = map.inverse_apply(q);
            flipped ^= map.side_flip;
        }
        // remaining piece approximated by its chord
        (q.y < 1.0) != flipped
    }

    pub fn is_inside(&self, p: Point2) -> bool {
        self.contains(p, DEFAULT_MAX_DEPTH).is_inside()
    }

    /// Level-`level` approximation of the top edge curve, `n^level + 1`
    /// vertices from `(-1, 1)` to `(1, 1)` in traversal order.
    pub fn curve_polyline(&self, level: u32, vertex_budget: usize) -> Result<Vec<Point2>> {
        let requested = (self.n() as u128).pow(level) + 1;
        if requested > vertex_budget as u128 {
            return Err(Error::VertexBudget {
                requested,
                budget: vertex_budget,
            });
        }
        let mut curve = vec![self.base_points[0], self.base_points[self.n()]];
        for _ in 0..level {
            let mut next = Vec::with_capacity((curve.len() - 1) * self.n() + 1);
            next.push(curve[0]);
            for map in &self.maps {
                let image = curve.iter().map(|&v| map.apply(v));
                if map.side_flip {
                    next.extend(image.rev().skip(1));
                } else {
                    next.extend(image.skip(1));
                }
            }
            curve = next;
        }
        Ok(curve)
    }

    /// Closed boundary: four rotated copies of the edge curve, counter-clockwise,
    /// starting at `(1, 1)`. Holds `4 n^level` vertices; the closing edge back
    /// to the first vertex is implicit.
    pub fn domain_boundary_polyline(&self, level: u32, vertex_budget: usize) -> Result<Vec<Point2>> {
        let requested = 4 * (self.n() as u128).pow(level);
        if requested > vertex_budget as u128 {
            return Err(Error::VertexBudget {
                requested,
                budget: vertex_budget,
            });
        }
        let mut top = self.curve_polyline(level, vertex_budget)?;
        top.reverse();
        top.pop();
        let mut out = Vec::with_capacity(4 * top.len());
        for k in 0..4u8 {
            out.extend(top.iter().map(|v| v.rotate_quarter_turns(k)));
        }
        Ok(out)
    }
}

/// Rotates `p` by `k` counter-clockwise quarter turns so the result lies in
/// the top quadrant `|x| <= y`. Ties go to the smallest `k`.
pub fn fold_to_top(p: Point2) -> (Point2, u8) {
    for k in 0..4u8 {
        let q = p.rotate_quarter_turns(k);
        if q.x.abs() <= q.y {
            return (q, k);
        }
    }
    // only the origin (or NaN) gets here
    (p, 0)
}
