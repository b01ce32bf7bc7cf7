//! Independent oracles: brute-force polygon tests and graph searches that
//! share nothing with the recursive classifiers beyond the polyline vertices.
#![allow(dead_code)]

use std::collections::VecDeque;

use fracnet::{Family, FractalDomain, FractalSpec, Point2, Segment2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const ORACLE_LEVEL: u32 = 12;
pub const EXCLUSION: f64 = 1e-6;

pub const REFERENCE: [(Family, f64); 4] = [
    (Family::F2, 0.4),
    (Family::F2, 0.7),
    (Family::F3, 0.3),
    (Family::F3, 0.5),
];

pub fn domain(family: Family, theta: f64) -> FractalDomain {
    FractalDomain::new(FractalSpec::new(family, theta).unwrap()).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Closed polygon with a coarse bucket index over its edges so the
/// brute-force queries stay affordable at level 12.
pub struct PolygonOracle {
    pub vertices: Vec<Point2>,
    min: Point2,
    cell: f64,
    dim: usize,
    buckets: Vec<Vec<u32>>,
}

impl PolygonOracle {
    pub fn new(vertices: Vec<Point2>) -> Self {
        let min_x = vertices.iter().map(|v| v.x).fold(f64::INFINITY, f64::min);
        let min_y = vertices.iter().map(|v| v.y).fold(f64::INFINITY, f64::min);
        let max_x = vertices.iter().map(|v| v.x).fold(f64::NEG_INFINITY, f64::max);
        let max_y = vertices.iter().map(|v| v.y).fold(f64::NEG_INFINITY, f64::max);
        let dim = 256usize;
        let cell = (max_x - min_x).max(max_y - min_y) / dim as f64 * 1.0001;
        let min = Point2::new(min_x, min_y);
        let mut oracle = PolygonOracle {
            vertices,
            min,
            cell,
            dim,
            buckets: vec![Vec::new(); dim * dim],
        };
        for i in 0..oracle.vertices.len() {
            let s = oracle.edge(i);
            let (x0, y0) = oracle.cell_of(Point2::new(s.a.x.min(s.b.x), s.a.y.min(s.b.y)));
            let (x1, y1) = oracle.cell_of(Point2::new(s.a.x.max(s.b.x), s.a.y.max(s.b.y)));
            for y in y0..=y1 {
                for x in x0..=x1 {
                    oracle.buckets[y * dim + x].push(i as u32);
                }
            }
        }
        oracle
    }

    pub fn edge(&self, i: usize) -> Segment2 {
        let j = (i + 1) % self.vertices.len();
        Segment2::new(self.vertices[i], self.vertices[j])
    }

    fn cell_of(&self, p: Point2) -> (usize, usize) {
        let c = |v: f64, m: f64| (((v - m) / self.cell).floor().max(0.0) as usize).min(self.dim - 1);
        (c(p.x, self.min.x), c(p.y, self.min.y))
    }

    /// Edges whose bucket overlaps the box `[lo, hi]` grown by `pad`.
    fn edges_near(&self, lo: Point2, hi: Point2, pad: f64) -> Vec<usize> {
        let (x0, y0) = self.cell_of(Point2::new(lo.x - pad, lo.y - pad));
        let (x1, y1) = self.cell_of(Point2::new(hi.x + pad, hi.y + pad));
        let mut out: Vec<usize> = Vec::new();
        for y in y0..=y1 {
            for x in x0..=x1 {
                out.extend(self.buckets[y * self.dim + x].iter().map(|&i| i as usize));
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Even-odd ray casting (W. R. Franklin's pnpoly) along +x. Only edges
    /// bucketed in the query row, at or right of the query column, can
    /// cross the ray.
    pub fn contains(&self, p: Point2) -> bool {
        let (cx, cy) = self.cell_of(p);
        let mut edges: Vec<usize> = (cx..self.dim)
            .flat_map(|x| self.buckets[cy * self.dim + x].iter().map(|&i| i as usize))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        let mut inside = false;
        for i in edges {
            let s = self.edge(i);
            let (vi, vj) = (s.b, s.a);
            if (vi.y > p.y) != (vj.y > p.y)
                && p.x < (vj.x - vi.x) * (p.y - vi.y) / (vj.y - vi.y) + vi.x
            {
                inside = !inside;
            }
        }
        inside
    }

    /// Plain O(V) pnpoly, for cross-checking the bucketed version.
    pub fn contains_slow(&self, p: Point2) -> bool {
        let v = &self.vertices;
        let mut inside = false;
        let mut j = v.len() - 1;
        for i in 0..v.len() {
            if (v[i].y > p.y) != (v[j].y > p.y)
                && p.x < (v[j].x - v[i].x) * (p.y - v[i].y) / (v[j].y - v[i].y) + v[i].x
            {
                inside = !inside;
            }
            j = i;
        }
        inside
    }

    /// Distance from `p` to the polygon boundary, or `pad` if farther.
    pub fn distance_to_point(&self, p: Point2, pad: f64) -> f64 {
        self.edges_near(p, p, pad)
            .into_iter()
            .map(|i| self.edge(i).distance_to_point(p))
            .fold(pad, f64::min)
    }

    pub fn segment_crosses(&self, s: &Segment2) -> bool {
        let lo = Point2::new(s.a.x.min(s.b.x), s.a.y.min(s.b.y));
        let hi = Point2::new(s.a.x.max(s.b.x), s.a.y.max(s.b.y));
        self.edges_near(lo, hi, 0.0)
            .into_iter()
            .any(|i| self.edge(i).intersects(s))
    }

    pub fn distance_to_segment(&self, s: &Segment2, pad: f64) -> f64 {
        let lo = Point2::new(s.a.x.min(s.b.x), s.a.y.min(s.b.y));
        let hi = Point2::new(s.a.x.max(s.b.x), s.a.y.max(s.b.y));
        self.edges_near(lo, hi, pad)
            .into_iter()
            .map(|i| self.edge(i).distance_to_segment(s))
            .fold(pad, f64::min)
    }
}

/// A sight query the polyline cannot settle robustly: a near miss within
/// `EXCLUSION`, or a crossing with an endpoint that close to the boundary.
pub fn ambiguous_sight_query(poly: &PolygonOracle, s: &Segment2) -> bool {
    let near = |p| poly.distance_to_point(p, EXCLUSION) < EXCLUSION;
    if poly.segment_crosses(s) {
        near(s.a) || near(s.b)
    } else {
        poly.distance_to_segment(s, EXCLUSION) < EXCLUSION
    }
}

/// Bound on the distance between the level-`level` polyline and the limit
/// curve: each level segment of length `2 r^m` is replaced by a copy of the
/// limit curve, which stays within `y_max - 1` of its chord.
pub fn limit_gap(domain: &FractalDomain, level: u32) -> f64 {
    domain.r.powi(level as i32) * (domain.y_max - 1.0) * 1.01 + 1e-12
}

pub fn polygon(domain: &FractalDomain, level: u32) -> PolygonOracle {
    PolygonOracle::new(domain.domain_boundary_polyline(level, 1 << 24).unwrap())
}

/// Uniform point in the bounding square.
pub fn uniform_in_box(domain: &FractalDomain, rng: &mut impl Rng) -> Point2 {
    let h = domain.y_max;
    Point2::new(rng.random_range(-h..h), rng.random_range(-h..h))
}

/// Random point of the polygon interior by rejection.
pub fn uniform_inside(poly: &PolygonOracle, domain: &FractalDomain, rng: &mut impl Rng) -> Point2 {
    loop {
        let p = uniform_in_box(domain, rng);
        if poly.contains(p) {
            return p;
        }
    }
}

/// Random query segment between polygon-interior points: a mix of short
/// hops (within range 1) and long chords.
pub fn random_inside_segment(poly: &PolygonOracle, domain: &FractalDomain, rng: &mut impl Rng) -> Segment2 {
    let p = uniform_inside(poly, domain, rng);
    if rng.random_bool(0.5) {
        return Segment2::new(p, uniform_inside(poly, domain, rng));
    }
    loop {
        let ang = rng.random_range(0.0..std::f64::consts::TAU);
        let len = rng.random_range(0.0..1.0f64);
        let q = p + Point2::new(ang.cos(), ang.sin()) * len;
        if poly.contains(q) {
            return Segment2::new(p, q);
        }
    }
}

/// All-pairs edge list under an arbitrary sight predicate.
pub fn brute_force_edges(
    points: &[Point2],
    r0: f64,
    mut sees: impl FnMut(Point2, Point2) -> bool,
) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if points[i].distance(points[j]) <= r0 && sees(points[i], points[j]) {
                edges.push((i, j));
            }
        }
    }
    edges
}

/// Component label per node by breadth-first search, labels numbered in
/// order of their smallest member.
pub fn bfs_labels(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    for s in 0..n {
        if label[s] != usize::MAX {
            continue;
        }
        label[s] = next;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if label[v] == usize::MAX {
                    label[v] = next;
                    queue.push_back(v);
                }
            }
        }
        next += 1;
    }
    label
}
