use rayon::prelude::*;

use crate::geo::{PlanarRegion, ProjectedPoint, Projection};
use crate::ingest::{BoundarySet, PopulationRaster};
use crate::{Error, Result};

/// Land zero-density cells are lifted to this fraction of the mean land
/// density so that `-grad(rho)/rho` stays finite.
pub const DENSITY_FLOOR: f64 = 1e-4;

/// Population density (persons per km²) on a padded grid of square cells.
/// Cell `(i, j)` has its lower-left corner at `origin + (i, j) * cell_km`;
/// values are row-major, `j * nx + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    pub nx: usize,
    pub ny: usize,
    pub origin: ProjectedPoint,
    pub cell_km: f64,
    pub rho: Vec<f64>,
    /// Fraction of each cell inside the outline.
    pub land: Vec<f64>,
    /// Density given to sea and padding cells: the mean land density.
    pub background: f64,
}

impl DensityField {
    /// Field from explicit values. `rho` must be strictly positive.
    pub fn from_values(
        nx: usize,
        ny: usize,
        origin: ProjectedPoint,
        cell_km: f64,
        rho: Vec<f64>,
    ) -> Result<Self> {
        check_dims(nx, ny)?;
        if rho.len() != nx * ny {
            return Err(Error::Invalid(format!("{} densities for a {nx}x{ny} grid", rho.len())));
        }
        if let Some(v) = rho.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
            return Err(Error::Invalid(format!("density {v} is not strictly positive")));
        }
        let background = rho.iter().sum::<f64>() / rho.len() as f64;
        Ok(DensityField {
            nx,
            ny,
            origin,
            cell_km,
            land: vec![1.0; rho.len()],
            rho,
            background,
        })
    }

    pub fn cell_area(&self) -> f64 {
        self.cell_km * self.cell_km
    }

    /// Total mass, persons.
    pub fn mass(&self) -> f64 {
        self.rho.iter().sum::<f64>() * self.cell_area()
    }

    pub fn cell_center(&self, i: usize, j: usize) -> ProjectedPoint {
        ProjectedPoint::new(
            self.origin.x + (i as f64 + 0.5) * self.cell_km,
            self.origin.y + (j as f64 + 0.5) * self.cell_km,
        )
    }

    /// Position in grid units (cells from the origin).
    pub fn to_grid(&self, p: ProjectedPoint) -> (f64, f64) {
        ((p.x - self.origin.x) / self.cell_km, (p.y - self.origin.y) / self.cell_km)
    }

    pub fn from_grid(&self, u: f64, v: f64) -> ProjectedPoint {
        ProjectedPoint::new(self.origin.x + u * self.cell_km, self.origin.y + v * self.cell_km)
    }
}

fn check_dims(nx: usize, ny: usize) -> Result<()> {
    if !nx.is_power_of_two() || !ny.is_power_of_two() || nx < 4 || ny < 4 {
        return Err(Error::Invalid(format!("cartogram grid {nx}x{ny} must be powers of two, at least 4")));
    }
    Ok(())
}

/// Raster density (persons per km² in the projected plane) at a point;
/// no-data and uncovered points read as zero.
fn raster_density(raster: &PopulationRaster, proj: &Projection, p: ProjectedPoint, cell_area: f64) -> f64 {
    let (lon, lat) = proj.inverse(p);
    match raster.cell_at(lon, lat).and_then(|(r, c)| raster.value(r, c)) {
        Some(v) => v / cell_area,
        None => 0.0,
    }
}

/// Sub-samples per side used to measure the land fraction of coastal cells.
const COAST_SAMPLES: usize = 8;

/// Builds the density grid for a boundary's outline.
///
/// The outline's bounding box is padded by its own width and height on each
/// side and covered by `nx` x `ny` square cells. Land density is the raster
/// density averaged over sub-samples inside the outline, rescaled so that
/// land mass equals the raster population with centroids inside the
/// outline. Sea takes the mean land density, and coastal cells blend the
/// two by their land fraction.
pub fn build_density(
    raster: &PopulationRaster,
    boundary: &BoundarySet,
    proj: &Projection,
    nx: usize,
    ny: usize,
) -> Result<DensityField> {
    check_dims(nx, ny)?;
    let outline = PlanarRegion::project(boundary.outline(), proj);
    let bb = outline.bbox();
    let (w, h) = (bb.width(), bb.height());
    if !(w > 0.0 && h > 0.0) {
        return Err(Error::Invalid("outline has no area".into()));
    }
    let cell_km = (3.0 * w / nx as f64).max(3.0 * h / ny as f64);
    let center = ProjectedPoint::new((bb.min.x + bb.max.x) / 2.0, (bb.min.y + bb.max.y) / 2.0);
    let origin = ProjectedPoint::new(
        center.x - cell_km * nx as f64 / 2.0,
        center.y - cell_km * ny as f64 / 2.0,
    );

    let target: f64 = raster
        .populated_cells()
        .filter(|&((lon, lat), _)| outline.contains(proj.forward(lon, lat)))
        .map(|(_, v)| v)
        .sum();
    if !(target > 0.0) {
        return Err(Error::Invalid("raster holds no population inside the outline".into()));
    }

    // projected size of a raster cell near the outline's centre
    let (clon, clat) = proj.inverse(center);
    let rc = proj.forward(clon + raster.cellsize, clat + raster.cellsize) - proj.forward(clon, clat);
    let raster_area = (rc.x * rc.y).abs();
    let raster_side = raster_area.sqrt();
    let sub = ((2.0 * cell_km / raster_side).ceil() as usize).clamp(2, 16);

    let mut field = DensityField {
        nx,
        ny,
        origin,
        cell_km,
        rho: vec![0.0; nx * ny],
        land: vec![0.0; nx * ny],
        background: 0.0,
    };
    let inside: Vec<bool> = (0..nx * ny)
        .into_par_iter()
        .map(|k| outline.contains(field.cell_center(k % nx, k / nx)))
        .collect();
    let coastal = |i: usize, j: usize| {
        let here = inside[j * nx + i];
        (j.saturating_sub(1)..=(j + 1).min(ny - 1))
            .any(|jj| (i.saturating_sub(1)..=(i + 1).min(nx - 1)).any(|ii| inside[jj * nx + ii] != here))
    };
    // (land fraction, mean density over the land part)
    let sampled: Vec<(f64, f64)> = (0..nx * ny)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k % nx, k / nx);
            let coast = coastal(i, j);
            if !coast && !inside[k] {
                return (0.0, 0.0);
            }
            let m = if coast { sub.max(COAST_SAMPLES) } else { sub };
            let (mut acc, mut n) = (0.0, 0usize);
            for a in 0..m {
                for b in 0..m {
                    let p = ProjectedPoint::new(
                        origin.x + (i as f64 + (a as f64 + 0.5) / m as f64) * cell_km,
                        origin.y + (j as f64 + (b as f64 + 0.5) / m as f64) * cell_km,
                    );
                    if !coast || outline.contains(p) {
                        acc += raster_density(raster, proj, p, raster_area);
                        n += 1;
                    }
                }
            }
            if n == 0 {
                (0.0, 0.0)
            } else {
                (n as f64 / (m * m) as f64, acc / n as f64)
            }
        })
        .collect();

    let land_area: f64 = sampled.iter().map(|s| s.0).sum();
    if !(land_area > 0.0) {
        return Err(Error::Invalid("the outline covers no grid cell; use a finer grid".into()));
    }
    let raw_mean = sampled.iter().map(|s| s.0 * s.1).sum::<f64>() / land_area;
    if !(raw_mean > 0.0) {
        return Err(Error::Invalid("raster density is zero over the whole outline".into()));
    }
    let floor = DENSITY_FLOOR * raw_mean;
    let land_density: Vec<f64> = sampled.iter().map(|s| if s.0 > 0.0 { s.1.max(floor) } else { 0.0 }).collect();
    let raw_mass: f64 = sampled.iter().zip(&land_density).map(|(s, d)| s.0 * d).sum::<f64>() * field.cell_area();
    let scale = target / raw_mass;
    field.background = target / (land_area * field.cell_area());
    for k in 0..nx * ny {
        let f = sampled[k].0;
        field.land[k] = f;
        field.rho[k] = f * land_density[k] * scale + (1.0 - f) * field.background;
    }
    Ok(field)
}
