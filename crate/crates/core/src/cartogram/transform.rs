use super::density::DensityField;
use super::solver::SolveStats;
use crate::geo::{PlanarRegion, Polygon, ProjectedPoint, Projection};
use crate::ingest::{BoundarySet, PopulationRaster};
use crate::{Error, Result};

/// Displaced lattice of cell corners. Off-lattice points are mapped by
/// bilinear interpolation inside their original cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CartogramTransform {
    pub nx: usize,
    pub ny: usize,
    pub origin: ProjectedPoint,
    pub cell_km: f64,
    /// `(nx + 1) * (ny + 1)` corner positions in cells, row-major.
    pub nodes: Vec<(f64, f64)>,
    pub stats: SolveStats,
}

impl CartogramTransform {
    pub(crate) fn new(field: &DensityField, nodes: Vec<(f64, f64)>, stats: SolveStats) -> Self {
        CartogramTransform {
            nx: field.nx,
            ny: field.ny,
            origin: field.origin,
            cell_km: field.cell_km,
            nodes,
            stats,
        }
    }

    fn node(&self, i: usize, j: usize) -> (f64, f64) {
        self.nodes[j * (self.nx + 1) + i]
    }

    /// Largest node displacement, cells.
    pub fn max_displacement(&self) -> f64 {
        self.nodes
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let (i, j) = (k % (self.nx + 1), k / (self.nx + 1));
                (p.0 - i as f64).hypot(p.1 - j as f64)
            })
            .fold(0.0, f64::max)
    }

    fn to_grid(&self, p: ProjectedPoint) -> (f64, f64) {
        ((p.x - self.origin.x) / self.cell_km, (p.y - self.origin.y) / self.cell_km)
    }

    fn from_grid(&self, (u, v): (f64, f64)) -> ProjectedPoint {
        ProjectedPoint::new(self.origin.x + u * self.cell_km, self.origin.y + v * self.cell_km)
    }

    /// Side length of the computational domain, km.
    pub fn domain_km(&self) -> f64 {
        self.nx.max(self.ny) as f64 * self.cell_km
    }

    /// The cell holding grid position (u, v) and the local coordinates in it.
    fn locate(&self, u: f64, v: f64) -> (usize, usize, f64, f64) {
        let i = (u.floor().max(0.0) as usize).min(self.nx - 1);
        let j = (v.floor().max(0.0) as usize).min(self.ny - 1);
        (i, j, u - i as f64, v - j as f64)
    }

    fn bilinear(&self, i: usize, j: usize, s: f64, r: f64) -> (f64, f64) {
        let a = self.node(i, j);
        let b = self.node(i + 1, j);
        let c = self.node(i + 1, j + 1);
        let d = self.node(i, j + 1);
        (
            (1.0 - s) * (1.0 - r) * a.0 + s * (1.0 - r) * b.0 + s * r * c.0 + (1.0 - s) * r * d.0,
            (1.0 - s) * (1.0 - r) * a.1 + s * (1.0 - r) * b.1 + s * r * c.1 + (1.0 - s) * r * d.1,
        )
    }

    /// Maps a projected point onto the cartogram.
    pub fn forward(&self, p: ProjectedPoint) -> Result<ProjectedPoint> {
        let (u, v) = self.to_grid(p);
        if !(u >= 0.0 && v >= 0.0 && u <= self.nx as f64 && v <= self.ny as f64) {
            return Err(Error::OutsideDomain { x: p.x, y: p.y });
        }
        let (i, j, s, r) = self.locate(u, v);
        Ok(self.from_grid(self.bilinear(i, j, s, r)))
    }

    pub fn transform_points(&self, points: &[ProjectedPoint]) -> Result<Vec<ProjectedPoint>> {
        points.iter().map(|&p| self.forward(p)).collect()
    }

    /// Maps a polygon after densifying its edges to half a cell, so that
    /// straight edges follow the curved image of the grid.
    pub fn transform_polygon(&self, poly: &Polygon) -> Result<Polygon> {
        let dense = poly.densified(self.cell_km / 2.0);
        Ok(Polygon {
            exterior: self.transform_points(&dense.exterior)?,
            holes: dense
                .holes
                .iter()
                .map(|h| self.transform_points(h))
                .collect::<Result<_>>()?,
        })
    }

    pub fn transform_region(&self, region: &PlanarRegion) -> Result<PlanarRegion> {
        Ok(PlanarRegion {
            name: region.name.clone(),
            polygons: region
                .polygons
                .iter()
                .map(|p| self.transform_polygon(p))
                .collect::<Result<_>>()?,
        })
    }

    /// Solves the bilinear map of cell (i, j) for local coordinates hitting
    /// `q` (grid units), by Newton iteration.
    fn invert_in_cell(&self, i: usize, j: usize, q: (f64, f64)) -> Option<(f64, f64)> {
        let a = self.node(i, j);
        let b = self.node(i + 1, j);
        let c = self.node(i + 1, j + 1);
        let d = self.node(i, j + 1);
        let (mut s, mut r) = (0.5, 0.5);
        for _ in 0..30 {
            let f = self.bilinear(i, j, s, r);
            let (ex, ey) = (f.0 - q.0, f.1 - q.1);
            let dsx = (1.0 - r) * (b.0 - a.0) + r * (c.0 - d.0);
            let dsy = (1.0 - r) * (b.1 - a.1) + r * (c.1 - d.1);
            let drx = (1.0 - s) * (d.0 - a.0) + s * (c.0 - b.0);
            let dry = (1.0 - s) * (d.1 - a.1) + s * (c.1 - b.1);
            let det = dsx * dry - dsy * drx;
            if det.abs() < 1e-300 {
                return None;
            }
            // damped so that a poor start cannot throw the iterate far off
            let ds = ((ex * dry - ey * drx) / det).clamp(-0.5, 0.5);
            let dr = ((dsx * ey - dsy * ex) / det).clamp(-0.5, 0.5);
            s -= ds;
            r -= dr;
            if ds.abs() < 1e-13 && dr.abs() < 1e-13 {
                break;
            }
        }
        const SLACK: f64 = 1e-9;
        let f = self.bilinear(i, j, s, r);
        let converged = (f.0 - q.0).hypot(f.1 - q.1) < 1e-9;
        let inside = (-SLACK..=1.0 + SLACK).contains(&s) && (-SLACK..=1.0 + SLACK).contains(&r);
        (converged && inside).then_some((s, r))
    }

    fn quad_contains(&self, i: usize, j: usize, q: (f64, f64)) -> bool {
        let pts = [self.node(i, j), self.node(i + 1, j), self.node(i + 1, j + 1), self.node(i, j + 1)];
        let (mut lo, mut hi) = ((f64::INFINITY, f64::INFINITY), (f64::NEG_INFINITY, f64::NEG_INFINITY));
        for p in pts {
            lo = (lo.0.min(p.0), lo.1.min(p.1));
            hi = (hi.0.max(p.0), hi.1.max(p.1));
        }
        q.0 >= lo.0 && q.0 <= hi.0 && q.1 >= lo.1 && q.1 <= hi.1
    }

    /// Maps a cartogram point back to projected coordinates.
    pub fn inverse(&self, q: ProjectedPoint) -> Result<ProjectedPoint> {
        let g = self.to_grid(q);
        if !(g.0 >= 0.0 && g.1 >= 0.0 && g.0 <= self.nx as f64 && g.1 <= self.ny as f64) {
            return Err(Error::OutsideDomain { x: q.x, y: q.y });
        }
        // walk from the cell under q in growing rings
        let (ci, cj, _, _) = self.locate(g.0, g.1);
        let reach = self.nx.max(self.ny);
        for ring in 0..=reach {
            let i_lo = ci.saturating_sub(ring);
            let i_hi = (ci + ring).min(self.nx - 1);
            let j_lo = cj.saturating_sub(ring);
            let j_hi = (cj + ring).min(self.ny - 1);
            for j in j_lo..=j_hi {
                for i in i_lo..=i_hi {
                    let on_ring = i == i_lo || i == i_hi || j == j_lo || j == j_hi;
                    if !on_ring || i.abs_diff(ci).max(j.abs_diff(cj)) != ring {
                        continue;
                    }
                    if self.quad_contains(i, j, g) {
                        if let Some((s, r)) = self.invert_in_cell(i, j, g) {
                            return Ok(self.from_grid((i as f64 + s, j as f64 + r)));
                        }
                    }
                }
            }
        }
        Err(Error::OutsideDomain { x: q.x, y: q.y })
    }

    fn cell_image(&self, i: usize, j: usize) -> [(f64, f64); 4] {
        [self.node(i, j), self.node(i + 1, j), self.node(i + 1, j + 1), self.node(i, j + 1)]
    }

    /// Number of cells whose image has non-positive signed area, i.e. that
    /// were turned inside out.
    pub fn inverted_cells(&self) -> usize {
        let mut n = 0;
        for j in 0..self.ny {
            for i in 0..self.nx {
                let q = self.cell_image(i, j);
                let a: f64 = (0..4).map(|k| q[k].0 * q[(k + 1) % 4].1 - q[(k + 1) % 4].0 * q[k].1).sum();
                if !(a > 0.0) {
                    n += 1;
                }
            }
        }
        n
    }

    /// Number of cells whose bilinear image is not one-to-one: the Jacobian
    /// must be positive at all four corners, which for a quadrilateral means
    /// it is convex and positively oriented. Includes the inverted cells.
    pub fn folded_cells(&self) -> usize {
        let mut n = 0;
        for j in 0..self.ny {
            for i in 0..self.nx {
                let q = self.cell_image(i, j);
                let convex = (0..4).all(|k| {
                    let (a, b, c) = (q[(k + 3) % 4], q[k], q[(k + 1) % 4]);
                    (b.0 - a.0) * (c.1 - b.1) - (b.1 - a.1) * (c.0 - b.0) > 0.0
                });
                if !convex {
                    n += 1;
                }
            }
        }
        n
    }
}

/// Population and area shares of one region before and after the transform.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionShare {
    pub name: String,
    pub population: f64,
    pub population_fraction: f64,
    pub area_fraction_before: f64,
    pub area_fraction_after: f64,
}

impl RegionShare {
    pub fn error(&self) -> f64 {
        (self.area_fraction_after - self.population_fraction).abs()
    }
}

/// Shares for each subdivision, or for the outline alone when there are
/// none. Population is counted from raster cells whose centre falls in the
/// region; fractions are relative to the sum over the reported regions.
pub fn region_shares(
    t: &CartogramTransform,
    raster: &PopulationRaster,
    boundary: &BoundarySet,
    proj: &Projection,
) -> Result<Vec<RegionShare>> {
    let mut regions: Vec<PlanarRegion> = boundary.subdivisions().map(|r| PlanarRegion::project(r, proj)).collect();
    if regions.is_empty() {
        regions.push(PlanarRegion::project(boundary.outline(), proj));
    }
    let cells: Vec<(ProjectedPoint, f64)> = raster
        .populated_cells()
        .map(|((lon, lat), v)| (proj.forward(lon, lat), v))
        .collect();
    let mut rows = Vec::with_capacity(regions.len());
    for r in &regions {
        let pop: f64 = cells.iter().filter(|(p, _)| r.contains(*p)).map(|(_, v)| v).sum();
        let after = t.transform_region(r)?.area();
        rows.push((r.name.clone(), pop, r.area(), after));
    }
    let (tp, tb, ta) = rows.iter().fold((0.0, 0.0, 0.0), |acc, r| (acc.0 + r.1, acc.1 + r.2, acc.2 + r.3));
    if !(tp > 0.0) {
        return Err(Error::Invalid("regions hold no population".into()));
    }
    Ok(rows
        .into_iter()
        .map(|(name, pop, before, after)| RegionShare {
            name,
            population: pop,
            population_fraction: pop / tp,
            area_fraction_before: before / tb,
            area_fraction_after: after / ta,
        })
        .collect())
}
