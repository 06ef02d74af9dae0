use super::{BBox, ProjectedPoint};

/// Bucket-grid nearest-neighbour index over a fixed point set. Ties go to
/// the lowest point index.
#[derive(Debug, Clone)]
pub struct SiteIndex {
    points: Vec<ProjectedPoint>,
    origin: ProjectedPoint,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<u32>>,
}

impl SiteIndex {
    pub fn new(points: &[ProjectedPoint]) -> Self {
        let bbox = BBox::of_points(points);
        let n = points.len().max(1);
        let (w, h) = if points.is_empty() {
            (1.0, 1.0)
        } else {
            (bbox.width().max(1e-9), bbox.height().max(1e-9))
        };
        // about two points per bucket
        let cell = ((w * h * 2.0) / n as f64).sqrt().max(w.max(h) / 4096.0);
        let nx = ((w / cell).floor() as usize + 1).min(4096);
        let ny = ((h / cell).floor() as usize + 1).min(4096);
        let origin = if points.is_empty() { ProjectedPoint::default() } else { bbox.min };
        let mut buckets = vec![Vec::new(); nx * ny];
        let mut idx = SiteIndex {
            points: points.to_vec(),
            origin,
            cell,
            nx,
            ny,
            buckets: Vec::new(),
        };
        for (i, &p) in points.iter().enumerate() {
            let (bx, by) = idx.bucket_of(p);
            buckets[by * nx + bx].push(i as u32);
        }
        idx.buckets = buckets;
        idx
    }

    pub fn points(&self) -> &[ProjectedPoint] {
        &self.points
    }

    fn bucket_of(&self, p: ProjectedPoint) -> (usize, usize) {
        let bx = ((p.x - self.origin.x) / self.cell).floor();
        let by = ((p.y - self.origin.y) / self.cell).floor();
        (
            bx.clamp(0.0, (self.nx - 1) as f64) as usize,
            by.clamp(0.0, (self.ny - 1) as f64) as usize,
        )
    }

    /// Index of the nearest point and its squared distance.
    pub fn nearest(&self, p: ProjectedPoint) -> Option<(usize, f64)> {
        if self.points.is_empty() {
            return None;
        }
        let (bx, by) = self.bucket_of(p);
        let (bx, by) = (bx as i64, by as i64);
        let mut best: Option<(usize, f64)> = None;
        let max_ring = self.nx.max(self.ny) as i64;
        for r in 0..=max_ring {
            if let Some((_, d2)) = best {
                // everything unvisited lies at least (r - 1) cells away
                let reach = (r - 1).max(0) as f64 * self.cell;
                if d2.sqrt() < reach {
                    break;
                }
            }
            for y in (by - r)..=(by + r) {
                if y < 0 || y >= self.ny as i64 {
                    continue;
                }
                let on_edge_row = y == by - r || y == by + r;
                let step = if on_edge_row { 1 } else { (2 * r).max(1) };
                let mut x = bx - r;
                while x <= bx + r {
                    if x >= 0 && x < self.nx as i64 {
                        for &i in &self.buckets[y as usize * self.nx + x as usize] {
                            let i = i as usize;
                            let d2 = self.points[i].dist_sq(p);
                            best = match best {
                                Some((bi, bd)) if bd < d2 || (bd == d2 && bi < i) => Some((bi, bd)),
                                _ => Some((i, d2)),
                            };
                        }
                    }
                    x += step;
                }
            }
        }
        best
    }
}

/// Linear-scan nearest neighbour with the same tie rule as [`SiteIndex`].
pub fn nearest_brute_force(points: &[ProjectedPoint], p: ProjectedPoint) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, q) in points.iter().enumerate() {
        let d2 = q.dist_sq(p);
        if best.is_none_or(|(_, bd)| d2 < bd) {
            best = Some((i, d2));
        }
    }
    best.map(|b| b.0)
}
