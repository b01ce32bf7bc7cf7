//! Line-of-sight tests against the fractal boundary.
//!
//! A segment is tested against one edge curve at a time, in that edge's
//! folded frame. The segment is clipped to the angular sector at the
//! construction-circle centre that contains the curve, split along the rays
//! separating the `n` sub-copies, and each piece is pulled back through the
//! inverse of its sub-copy's similarity. Inside the sector the curve
//! separates the side holding the base chord from the side beyond it, so a
//! piece whose endpoints classify on opposite sides must cross it, and a
//! piece wholly below or above the band `1 <= y <= y_max` cannot. Only
//! pieces with both ends on one side need splitting.

use serde::{Deserialize, Serialize};

use crate::domain::FractalDomain;
use crate::geometry::{Point2, Segment2};

/// Pieces shorter than this are dropped during splitting.
pub const MIN_PIECE_LENGTH: f64 = 1e-12;
/// Upper bound on pieces explored for a single edge query. Exceeding it
/// resolves the remaining pieces by the chord rule, like the depth cap.
pub const MAX_PIECES: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct VisibilityVerdict {
    pub blocked: bool,
    /// Some branch hit the depth cap (or piece budget) and used the chord.
    pub depth_exhausted: bool,
}

struct Walker<'a> {
    domain: &'a FractalDomain,
    pieces: usize,
    exhausted: bool,
}

impl Walker<'_> {
    // Parameter interval of a + t (b - a), t in [0, 1], inside the cone
    // between rays `hi` (counter-clockwise bound) and `lo` (clockwise bound).
    fn clip(&self, a: Point2, b: Point2, hi: usize, lo: usize) -> Option<(f64, f64)> {
        let d = b - a;
        let mut t0 = 0.0f64;
        let mut t1 = 1.0f64;
        // ray_side(lo) >= 0 and -ray_side(hi) >= 0
        for (k, sign) in [(lo, 1.0), (hi, -1.0)] {
            let f0 = sign * self.domain.ray_side(k, a);
            let f1 = sign * self.domain.sector_dir(k).cross(d);
            if f1 == 0.0 {
                if f0 < 0.0 {
                    return None;
                }
            } else {
                let t = -f0 / f1;
                if f1 > 0.0 {
                    t0 = t0.max(t);
                } else {
                    t1 = t1.min(t);
                }
            }
        }
        (t0 <= t1).then_some((t0, t1))
    }

    fn hits(&mut self, a: Point2, b: Point2, depth: u32) -> bool {
        let y_max = self.domain.y_max;
        if (a.y < 1.0 && b.y < 1.0) || (a.y > y_max && b.y > y_max) {
            return false;
        }
        if a.x.max(b.x) < -1.0 || a.x.min(b.x) > 1.0 || a.y.max(b.y) < 1.0 || a.y.min(b.y) > y_max {
            return false;
        }
        if depth == 0 || self.pieces >= MAX_PIECES {
            self.exhausted = true;
            let chord = Segment2::new(Point2::new(-1.0, 1.0), Point2::new(1.0, 1.0));
            return Segment2::new(a, b).intersects(&chord);
        }

        let n = self.domain.n();
        let Some((t0, t1)) = self.clip(a, b, 0, n) else {
            return false;
        };
        let (ca, cb) = (a.lerp(b, t0), a.lerp(b, t1));
        if (ca.y < 1.0 && cb.y > y_max) || (cb.y < 1.0 && ca.y > y_max) {
            return true;
        }
        if (ca.y < 1.0 && cb.y < 1.0) || (ca.y > y_max && cb.y > y_max) {
            return false;
        }
        // Inside the sector the curve splits the plane in two, so endpoints
        // on opposite sides settle it.
        if self.domain.below_edge_curve(ca, depth) != self.domain.below_edge_curve(cb, depth) {
            return true;
        }

        for i in 0..n {
            let Some((s0, s1)) = self.clip(ca, cb, i, i + 1) else {
                continue;
            };
            let (pa, pb) = (ca.lerp(cb, s0), ca.lerp(cb, s1));
            if pa.distance(pb) < MIN_PIECE_LENGTH {
                continue;
            }
            self.pieces += 1;
            let map = &self.domain.maps[i];
            if self.hits(map.inverse_apply(pa), map.inverse_apply(pb), depth - 1) {
                return true;
            }
        }
        false
    }
}

/// Does `segment`, given in the folded frame of the top edge, meet the top
/// edge curve?
pub fn segment_hits_edge_curve(
    domain: &FractalDomain,
    segment: &Segment2,
    max_depth: u32,
) -> VisibilityVerdict {
    let mut walker = Walker {
        domain,
        pieces: 0,
        exhausted: false,
    };
    let blocked = walker.hits(segment.a, segment.b, max_depth);
    VisibilityVerdict {
        blocked,
        depth_exhausted: walker.exhausted,
    }
}

/// Line-of-sight test between two points of the domain, reporting whether
/// the depth cap was reached on any branch.
pub fn line_of_sight_verdict(
    domain: &FractalDomain,
    p: Point2,
    q: Point2,
    max_depth: u32,
) -> VisibilityVerdict {
    let mut verdict = VisibilityVerdict::default();
    if p == q {
        return verdict;
    }
    let in_square = |v: Point2| v.x.abs() < 1.0 && v.y.abs() < 1.0;
    if in_square(p) && in_square(q) {
        return verdict;
    }
    // fixed endpoint order keeps the test exactly symmetric
    let (p, q) = if (p.x, p.y) <= (q.x, q.y) { (p, q) } else { (q, p) };
    for k in 0..4u8 {
        let seg = Segment2::new(p, q).rotate_quarter_turns(k);
        if seg.a.y < 1.0 && seg.b.y < 1.0 {
            continue;
        }
        let v = segment_hits_edge_curve(domain, &seg, max_depth);
        verdict.depth_exhausted |= v.depth_exhausted;
        if v.blocked {
            verdict.blocked = true;
            break;
        }
    }
    verdict
}

pub fn line_of_sight(domain: &FractalDomain, p: Point2, q: Point2, max_depth: u32) -> bool {
    !line_of_sight_verdict(domain, p, q, max_depth).blocked
}
