use rayon::prelude::*;

use super::polygon::{clip_halfplane, convex_contains, ring_signed_area};
use super::{BBox, PlanarRegion, ProjectedPoint, Projection, SiteIndex};
use crate::ingest::PopulationRaster;
use crate::{Error, Result};

/// Coverage cell of one site, clipped to the boundary.
#[derive(Debug, Clone)]
pub struct VoronoiCell {
    pub site_index: usize,
    pub site: ProjectedPoint,
    /// Unclipped cell, bounded by a box around boundary and sites. CCW.
    pub convex: Vec<ProjectedPoint>,
    /// Cell intersected with the boundary.
    pub region: PlanarRegion,
    /// Persons assigned by [`cell_populations`]; zero until then.
    pub population: f64,
}

impl VoronoiCell {
    pub fn area(&self) -> f64 {
        self.region.area()
    }
}

#[derive(Debug, Clone)]
pub struct VoronoiDiagram {
    pub cells: Vec<VoronoiCell>,
    pub boundary: PlanarRegion,
    cell_boxes: Vec<BBox>,
}

impl VoronoiDiagram {
    /// Index of the cell containing `p`, or `None` outside the boundary.
    pub fn locate(&self, p: ProjectedPoint) -> Option<usize> {
        if !self.boundary.contains(p) {
            return None;
        }
        self.cells
            .iter()
            .zip(&self.cell_boxes)
            .find(|(c, b)| b.contains(p) && convex_contains(&c.convex, p))
            .map(|(c, _)| c.site_index)
    }

    pub fn total_area(&self) -> f64 {
        self.cells.iter().map(VoronoiCell::area).sum()
    }

    pub fn sites(&self) -> Vec<ProjectedPoint> {
        self.cells.iter().map(|c| c.site).collect()
    }

    /// Copies assigned populations into the cells.
    pub fn with_populations(mut self, pops: &CellPopulations) -> Self {
        for (c, &p) in self.cells.iter_mut().zip(&pops.per_cell) {
            c.population = p;
        }
        self
    }
}

/// Voronoi tessellation of `boundary` by `sites`, computed per site by
/// half-plane clipping against the perpendicular bisectors of its nearest
/// neighbours.
pub fn voronoi(sites: &[ProjectedPoint], boundary: &PlanarRegion) -> Result<VoronoiDiagram> {
    if sites.is_empty() {
        return Err(Error::Invalid("voronoi needs at least one site".into()));
    }
    let mut order: Vec<usize> = (0..sites.len()).collect();
    order.sort_by(|&a, &b| sites[a].x.total_cmp(&sites[b].x).then(sites[a].y.total_cmp(&sites[b].y)));
    for w in order.windows(2) {
        if sites[w[0]] == sites[w[1]] {
            let (a, b) = (w[0].min(w[1]), w[0].max(w[1]));
            return Err(Error::CoincidentSites(a, b));
        }
    }
    let outside = sites.iter().filter(|&&s| !boundary.contains(s)).count();
    if outside > 0 {
        log::warn!("{outside} Voronoi sites lie outside the boundary");
    }

    let frame = boundary.bbox().union(BBox::of_points(sites));
    let frame = frame.expanded(frame.width().max(frame.height()) * 0.01 + 1.0);
    let frame_ring = frame.ring();

    let cells: Vec<VoronoiCell> = (0..sites.len())
        .into_par_iter()
        .map(|i| {
            let convex = convex_cell(i, sites, &frame_ring);
            let region = boundary.clip_convex(&convex);
            VoronoiCell {
                site_index: i,
                site: sites[i],
                convex,
                region,
                population: 0.0,
            }
        })
        .collect();
    let cell_boxes = cells.iter().map(|c| BBox::of_points(&c.convex)).collect();
    Ok(VoronoiDiagram {
        cells,
        boundary: boundary.clone(),
        cell_boxes,
    })
}

fn convex_cell(i: usize, sites: &[ProjectedPoint], frame: &[ProjectedPoint]) -> Vec<ProjectedPoint> {
    let s = sites[i];
    // work relative to the site to limit cancellation
    let mut cell: Vec<ProjectedPoint> = frame.iter().map(|&p| p - s).collect();
    let mut others: Vec<(f64, usize)> = sites
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(j, &p)| (p.dist_sq(s), j))
        .collect();
    others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut reach_sq = cell.iter().map(|p| p.norm_sq()).fold(0.0, f64::max);
    for (d2, j) in others {
        // bisector at distance d/2 cannot cut a cell of radius < d/2
        if d2 / 4.0 > reach_sq {
            break;
        }
        let d = sites[j] - s;
        cell = clip_halfplane(&cell, d, d.norm_sq() / 2.0);
        if cell.is_empty() {
            break;
        }
        reach_sq = cell.iter().map(|p| p.norm_sq()).fold(0.0, f64::max);
    }
    let mut out: Vec<ProjectedPoint> = cell.into_iter().map(|p| p + s).collect();
    if ring_signed_area(&out) < 0.0 {
        out.reverse();
    }
    out
}

/// Raster population summed per Voronoi cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellPopulations {
    pub per_cell: Vec<f64>,
    /// Population of raster cells whose centroid lies inside the boundary.
    pub assigned: f64,
    /// Population of raster cells whose centroid lies outside.
    pub outside: f64,
}

/// Assigns each raster cell's population to the Voronoi cell containing its
/// centroid. Membership is resolved by nearest site, which is equivalent to
/// cell containment and ties to the lowest site index.
pub fn cell_populations(
    diagram: &VoronoiDiagram,
    raster: &PopulationRaster,
    proj: &Projection,
) -> CellPopulations {
    let index = SiteIndex::new(&diagram.sites());
    let bbox = diagram.boundary.bbox();
    let mut per_cell = vec![0.0; diagram.cells.len()];
    let mut assigned = 0.0;
    let mut outside = 0.0;
    for ((lon, lat), pop) in raster.populated_cells() {
        let p = proj.forward(lon, lat);
        if bbox.contains(p) && diagram.boundary.contains(p) {
            let (k, _) = index.nearest(p).expect("diagram has sites");
            per_cell[k] += pop;
            assigned += pop;
        } else {
            outside += pop;
        }
    }
    if assigned == 0.0 {
        log::warn!("population raster does not overlap the boundary; all cells get zero");
    }
    CellPopulations {
        per_cell,
        assigned,
        outside,
    }
}

#[cfg(test)]
mod tests {
    use super::super::index::nearest_brute_force;
    use super::super::Polygon;
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn square(side: f64) -> PlanarRegion {
        PlanarRegion::from_polygon(
            "sq",
            Polygon::new(
                BBox {
                    min: ProjectedPoint::new(0.0, 0.0),
                    max: ProjectedPoint::new(side, side),
                }
                .ring(),
            ),
        )
    }

    #[test]
    fn single_site_gets_whole_boundary() {
        let b = square(10.0);
        let d = voronoi(&[ProjectedPoint::new(3.0, 4.0)], &b).unwrap();
        assert_eq!(d.cells.len(), 1);
        assert!((d.cells[0].area() - 100.0).abs() < 1e-9);
    }

    #[test]
    fn symmetric_pair_splits_square_in_half() {
        let b = square(10.0);
        let d = voronoi(&[ProjectedPoint::new(2.5, 5.0), ProjectedPoint::new(7.5, 5.0)], &b).unwrap();
        assert!((d.cells[0].area() - 50.0).abs() < 1e-9);
        assert!((d.cells[1].area() - 50.0).abs() < 1e-9);
    }

    #[test]
    fn coincident_sites_rejected() {
        let b = square(10.0);
        let p = ProjectedPoint::new(1.0, 1.0);
        let err = voronoi(&[p, ProjectedPoint::new(2.0, 2.0), p], &b).unwrap_err();
        assert!(matches!(err, Error::CoincidentSites(0, 2)));
    }

    #[test]
    fn membership_matches_nearest_site_and_area_is_conserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b = square(100.0);
        let sites: Vec<_> = (0..50)
            .map(|_| ProjectedPoint::new(rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0)))
            .collect();
        let d = voronoi(&sites, &b).unwrap();
        assert!((d.total_area() - 1e4).abs() / 1e4 < 1e-6);
        for _ in 0..10_000 {
            let q = ProjectedPoint::new(rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0));
            assert_eq!(d.locate(q), nearest_brute_force(&sites, q));
        }
    }

    #[test]
    fn concave_boundary_area_is_conserved() {
        // L-shaped country
        let l = PlanarRegion::from_polygon(
            "L",
            Polygon::new(vec![
                ProjectedPoint::new(0.0, 0.0),
                ProjectedPoint::new(60.0, 0.0),
                ProjectedPoint::new(60.0, 20.0),
                ProjectedPoint::new(20.0, 20.0),
                ProjectedPoint::new(20.0, 60.0),
                ProjectedPoint::new(0.0, 60.0),
            ]),
        );
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut sites = Vec::new();
        while sites.len() < 40 {
            let p = ProjectedPoint::new(rng.gen_range(0.0..60.0), rng.gen_range(0.0..60.0));
            if l.contains(p) {
                sites.push(p);
            }
        }
        let d = voronoi(&sites, &l).unwrap();
        assert!((d.total_area() - l.area()).abs() / l.area() < 1e-6);
    }

    #[test]
    fn uniform_raster_splits_evenly_between_equal_cells() {
        let proj = Projection::new(0.0, 0.0);
        // 10x10 raster of 0.1 degree cells, 7 persons each, around the origin
        let raster = PopulationRaster::new(10, 10, -0.5, -0.5, 0.1, -9999.0, vec![7.0; 100]).unwrap();
        let lo = proj.forward(-0.5, -0.5);
        let hi = proj.forward(0.5, 0.5);
        let b = PlanarRegion::from_polygon("b", Polygon::new(BBox { min: lo, max: hi }.ring()));
        let sites = [proj.forward(-0.25, 0.0), proj.forward(0.25, 0.0)];
        let d = voronoi(&sites, &b).unwrap();
        let pops = cell_populations(&d, &raster, &proj);
        assert_eq!(pops.per_cell, vec![350.0, 350.0]);
        assert_eq!(pops.assigned, 700.0);
    }

    #[test]
    fn raster_outside_boundary_gives_zeros() {
        let proj = Projection::new(0.0, 0.0);
        let raster = PopulationRaster::new(2, 2, 10.0, 10.0, 0.1, -9999.0, vec![5.0; 4]).unwrap();
        let d = voronoi(&[ProjectedPoint::new(5.0, 5.0)], &square(10.0)).unwrap();
        let pops = cell_populations(&d, &raster, &proj);
        assert_eq!(pops.per_cell, vec![0.0]);
        assert_eq!(pops.outside, 20.0);
    }
}
