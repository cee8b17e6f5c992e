//! Uniform bucket grid on a square torus for nearest-neighbour queries.

use super::{Point, TorusMetric};

/// Points bucketed into a `cells × cells` grid covering the torus.
///
/// Queries expand square rings of cells around the query cell until no
/// unvisited cell can hold a closer point. Expected cost is O(1) per query
/// when the cell side is on the order of the mean point spacing.
#[derive(Debug, Clone)]
pub struct TorusGrid {
    metric: TorusMetric,
    cells: usize,
    cell_side: f64,
    // CSR layout: bucket b holds indices[starts[b]..starts[b + 1]].
    starts: Vec<u32>,
    indices: Vec<u32>,
}

impl TorusGrid {
    /// Buckets `points` with a target cell side of `target_cell` meters.
    pub fn build(points: &[Point], metric: TorusMetric, target_cell: f64) -> Self {
        let side = metric.side();
        let max_cells = ((points.len() as f64).sqrt().ceil() as usize * 2).max(1);
        let cells = ((side / target_cell).floor() as usize).clamp(1, max_cells.max(1));
        let cell_side = side / cells as f64;

        let mut counts = vec![0u32; cells * cells + 1];
        let buckets: Vec<usize> = points
            .iter()
            .map(|p| {
                let b = Self::bucket_of(cells, cell_side, p);
                counts[b + 1] += 1;
                b
            })
            .collect();
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let starts = counts.clone();
        let mut fill = counts;
        let mut indices = vec![0u32; points.len()];
        for (i, b) in buckets.into_iter().enumerate() {
            indices[fill[b] as usize] = i as u32;
            fill[b] += 1;
        }

        Self {
            metric,
            cells,
            cell_side,
            starts,
            indices,
        }
    }

    fn bucket_of(cells: usize, cell_side: f64, p: &Point) -> usize {
        let cx = ((p.x / cell_side) as usize).min(cells - 1);
        let cy = ((p.y / cell_side) as usize).min(cells - 1);
        cy * cells + cx
    }

    fn bucket(&self, cx: usize, cy: usize) -> &[u32] {
        let b = cy * self.cells + cx;
        &self.indices[self.starts[b] as usize..self.starts[b + 1] as usize]
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Nearest indexed point to `q` as `(index, squared distance)`. Ties go to
    /// the lower index. `None` only when the grid is empty.
    pub fn nearest(&self, points: &[Point], q: &Point) -> Option<(usize, f64)> {
        if self.indices.is_empty() {
            return None;
        }
        let n = self.cells as isize;
        let qx = ((q.x / self.cell_side) as isize).min(n - 1);
        let qy = ((q.y / self.cell_side) as isize).min(n - 1);
        let mut best: Option<(usize, f64)> = None;
        // A ring of radius r wraps onto itself once 2r + 1 >= cells.
        let max_ring = n / 2 + 1;

        let visit = |cx: isize, cy: isize, best: &mut Option<(usize, f64)>| {
            let cx = cx.rem_euclid(n) as usize;
            let cy = cy.rem_euclid(n) as usize;
            for &i in self.bucket(cx, cy) {
                let i = i as usize;
                let d2 = self.metric.distance_sq(q, &points[i]);
                let better = match *best {
                    None => true,
                    Some((bi, bd)) => d2 < bd || (d2 == bd && i < bi),
                };
                if better {
                    *best = Some((i, d2));
                }
            }
        };

        for r in 0..=max_ring {
            if r == 0 {
                visit(qx, qy, &mut best);
            } else {
                for dx in -r..=r {
                    visit(qx + dx, qy - r, &mut best);
                    visit(qx + dx, qy + r, &mut best);
                }
                for dy in (-r + 1)..r {
                    visit(qx - r, qy + dy, &mut best);
                    visit(qx + r, qy + dy, &mut best);
                }
            }
            // Anything outside rings 0..=r is at least r cell sides away.
            if let Some((_, bd)) = best {
                let reach = r as f64 * self.cell_side;
                if bd < reach * reach {
                    break;
                }
            }
        }
        best
    }
}
