//! Range-plus-line-of-sight graphs on a node set.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::domain::FractalDomain;
use crate::geometry::Point2;
use crate::sampling::NodeSet;
use crate::union_find::DisjointSet;
use crate::visibility::line_of_sight_verdict;

pub const DEFAULT_RANGE: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub node_count: usize,
    /// Undirected edges `(i, j)` with `i < j`, sorted.
    pub edges: Vec<(usize, usize)>,
    pub r0: f64,
    /// Line-of-sight evaluations that resolved a branch by the depth cap.
    pub depth_exhausted_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectivityReport {
    pub fully_connected: bool,
    pub component_count: usize,
    pub isolated_count: usize,
    pub node_count: usize,
    pub depth_exhausted_count: usize,
}

/// Uniform grid with cell side `r0`, stored as a counting-sorted index list.
struct CellGrid {
    cols: usize,
    rows: usize,
    starts: Vec<usize>,
    items: Vec<usize>,
    cell_of: Vec<(usize, usize)>,
}

impl CellGrid {
    fn new(points: &[Point2], r0: f64) -> Self {
        let key = |p: &Point2| ((p.x / r0).floor() as i64, (p.y / r0).floor() as i64);
        let keys: Vec<(i64, i64)> = points.iter().map(key).collect();
        let min_x = keys.iter().map(|k| k.0).min().unwrap_or(0);
        let min_y = keys.iter().map(|k| k.1).min().unwrap_or(0);
        let max_x = keys.iter().map(|k| k.0).max().unwrap_or(0);
        let max_y = keys.iter().map(|k| k.1).max().unwrap_or(0);
        let cols = (max_x - min_x + 1) as usize;
        let rows = (max_y - min_y + 1) as usize;

        let cell_of: Vec<(usize, usize)> = keys
            .iter()
            .map(|&(x, y)| ((x - min_x) as usize, (y - min_y) as usize))
            .collect();
        let mut starts = vec![0usize; cols * rows + 1];
        for &(cx, cy) in &cell_of {
            starts[cy * cols + cx + 1] += 1;
        }
        for c in 0..cols * rows {
            starts[c + 1] += starts[c];
        }
        let mut fill = starts.clone();
        let mut items = vec![0usize; points.len()];
        for (i, &(cx, cy)) in cell_of.iter().enumerate() {
            let c = cy * cols + cx;
            items[fill[c]] = i;
            fill[c] += 1;
        }
        CellGrid {
            cols,
            rows,
            starts,
            items,
            cell_of,
        }
    }

    /// Calls `f(i, j)` once for every unordered pair in adjacent cells, `i < j`.
    fn for_each_candidate(&self, mut f: impl FnMut(usize, usize)) {
        for (i, &(cx, cy)) in self.cell_of.iter().enumerate() {
            for ny in cy.saturating_sub(1)..=(cy + 1).min(self.rows - 1) {
                for nx in cx.saturating_sub(1)..=(cx + 1).min(self.cols - 1) {
                    let c = ny * self.cols + nx;
                    for &j in &self.items[self.starts[c]..self.starts[c + 1]] {
                        if j > i {
                            f(i, j);
                        }
                    }
                }
            }
        }
    }
}

/// All edges of the range-and-sight graph.
pub fn build_network(domain: &FractalDomain, nodes: &NodeSet, r0: f64, max_depth: u32) -> Network {
    let pts = &nodes.points;
    let r2 = r0 * r0;
    let mut edges = Vec::new();
    let mut exhausted = 0usize;
    if !pts.is_empty() {
        CellGrid::new(pts, r0).for_each_candidate(|i, j| {
            if pts[i].distance_squared(pts[j]) > r2 {
                return;
            }
            let v = line_of_sight_verdict(domain, pts[i], pts[j], max_depth);
            exhausted += v.depth_exhausted as usize;
            if !v.blocked {
                edges.push((i, j));
            }
        });
    }
    edges.sort_unstable();
    Network {
        node_count: pts.len(),
        edges,
        r0,
        depth_exhausted_count: exhausted,
    }
}

pub fn analyze(net: &Network) -> ConnectivityReport {
    let mut ds = DisjointSet::new(net.node_count);
    let mut degree = vec![0usize; net.node_count];
    for &(i, j) in &net.edges {
        ds.union(i, j);
        degree[i] += 1;
        degree[j] += 1;
    }
    let component_count = ds.set_count();
    ConnectivityReport {
        // N <= 1 counts as connected
        fully_connected: component_count <= 1,
        component_count,
        isolated_count: degree.iter().filter(|&&d| d == 0).count(),
        node_count: net.node_count,
        depth_exhausted_count: net.depth_exhausted_count,
    }
}

/// Same component structure as `analyze(&build_network(..))`, but skips the
/// sight test for pairs already joined through other edges. Isolated nodes
/// are exactly the singleton components, so they come out unchanged.
pub fn connectivity_report(
    domain: &FractalDomain,
    nodes: &NodeSet,
    r0: f64,
    max_depth: u32,
) -> ConnectivityReport {
    let pts = &nodes.points;
    let r2 = r0 * r0;
    let mut ds = DisjointSet::new(pts.len());
    let mut exhausted = 0usize;
    if !pts.is_empty() {
        CellGrid::new(pts, r0).for_each_candidate(|i, j| {
            if pts[i].distance_squared(pts[j]) > r2 || ds.same(i, j) {
                return;
            }
            let v = line_of_sight_verdict(domain, pts[i], pts[j], max_depth);
            exhausted += v.depth_exhausted as usize;
            if !v.blocked {
                ds.union(i, j);
            }
        });
    }
    let isolated_count = (0..pts.len()).filter(|&i| ds.set_size(i) == 1).count();
    let component_count = ds.set_count();
    ConnectivityReport {
        fully_connected: component_count <= 1,
        component_count,
        isolated_count,
        node_count: pts.len(),
        depth_exhausted_count: exhausted,
    }
}

/// Expected number of isolated nodes when every node sees a full disc of
/// radius `r0`: `ρ V exp(-ρ π r0²)`.
pub fn expected_isolated(domain: &FractalDomain, rho: f64, r0: f64) -> f64 {
    rho * domain.area * (-rho * PI * r0 * r0).exp()
}
