use std::io::Write;

use geojson::{Feature, FeatureCollection, Geometry, JsonObject, Value};

use super::{PlanarRegion, Projection, RankPlot, VoronoiDiagram};

/// Converts a planar region back to a lon/lat GeoJSON geometry.
pub fn region_geometry(region: &PlanarRegion, proj: &Projection) -> Option<Geometry> {
    let polys: Vec<Vec<Vec<Vec<f64>>>> = region
        .polygons
        .iter()
        .map(|p| {
            std::iter::once(&p.exterior)
                .chain(&p.holes)
                .map(|ring| {
                    let mut coords: Vec<Vec<f64>> = ring
                        .iter()
                        .map(|&q| {
                            let (lon, lat) = proj.inverse(q);
                            vec![lon, lat]
                        })
                        .collect();
                    if let Some(first) = coords.first().cloned() {
                        coords.push(first);
                    }
                    coords
                })
                .collect()
        })
        .collect();
    match polys.len() {
        0 => None,
        1 => Some(Geometry::new(Value::Polygon(polys.into_iter().next().unwrap()))),
        _ => Some(Geometry::new(Value::MultiPolygon(polys))),
    }
}

/// Voronoi cells as polygons carrying `site`, `station`, `population` and
/// `area_km2` properties. `labels[i]` names site `i`.
pub fn voronoi_geojson(diagram: &VoronoiDiagram, proj: &Projection, labels: &[u32]) -> FeatureCollection {
    let features = diagram
        .cells
        .iter()
        .map(|c| {
            let mut props = JsonObject::new();
            props.insert("site".into(), c.site_index.into());
            if let Some(&id) = labels.get(c.site_index) {
                props.insert("station".into(), id.into());
            }
            props.insert("population".into(), c.population.into());
            props.insert("area_km2".into(), c.area().into());
            Feature {
                geometry: region_geometry(&c.region, proj),
                properties: Some(props),
                ..Default::default()
            }
        })
        .collect();
    FeatureCollection {
        bbox: None,
        features,
        foreign_members: None,
    }
}

pub fn write_rank_csv<W: Write>(mut w: W, plot: &RankPlot) -> std::io::Result<()> {
    writeln!(w, "rank,population")?;
    for (rank, v) in &plot.series {
        writeln!(w, "{rank},{v}")?;
    }
    Ok(())
}
