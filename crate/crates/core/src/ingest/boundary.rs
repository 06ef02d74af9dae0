use std::path::Path;

use geojson::{Feature, FeatureCollection, GeoJson, Geometry, JsonObject, Value};

use crate::{Error, Result};

/// A closed ring of (lon, lat) vertices; first vertex equals last.
#[derive(Debug, Clone, PartialEq)]
pub struct Ring(Vec<(f64, f64)>);

impl Ring {
    /// Builds a ring, closing it if the input is open.
    pub fn new(mut vertices: Vec<(f64, f64)>) -> Result<Self> {
        if vertices.first() != vertices.last() {
            if let Some(&first) = vertices.first() {
                vertices.push(first);
            }
        }
        if vertices.len() < 4 {
            return Err(Error::Invalid(format!(
                "ring needs at least 4 vertices (closed), got {}",
                vertices.len()
            )));
        }
        Ok(Ring(vertices))
    }

    /// Vertices including the closing repeat.
    pub fn vertices(&self) -> &[(f64, f64)] {
        &self.0
    }

    /// Vertices without the closing repeat.
    pub fn open(&self) -> &[(f64, f64)] {
        &self.0[..self.0.len() - 1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionRole {
    /// The country outline that clips Voronoi cells and defines land.
    Outline,
    /// Administrative subdivisions, drawn for orientation.
    Subdivision,
}

/// A named region made of one or more polygons. In each polygon the first
/// ring is the exterior and any further rings are holes.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub name: String,
    pub role: RegionRole,
    pub polygons: Vec<Vec<Ring>>,
}

impl Region {
    pub fn simple(name: &str, role: RegionRole, exterior: Vec<(f64, f64)>) -> Result<Self> {
        Ok(Region {
            name: name.to_string(),
            role,
            polygons: vec![vec![Ring::new(exterior)?]],
        })
    }

    /// (min_lon, min_lat, max_lon, max_lat)
    pub fn bbox(&self) -> (f64, f64, f64, f64) {
        let mut b = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for ring in self.polygons.iter().flatten() {
            for &(x, y) in ring.vertices() {
                b = (b.0.min(x), b.1.min(y), b.2.max(x), b.3.max(y));
            }
        }
        b
    }
}

/// Named boundary polygons (country outline plus subdivisions).
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySet {
    pub regions: Vec<Region>,
}

impl BoundarySet {
    pub fn new(regions: Vec<Region>) -> Result<Self> {
        if regions.is_empty() {
            return Err(Error::Invalid("boundary set has no regions".into()));
        }
        Ok(BoundarySet { regions })
    }

    /// The region flagged as outline, or the first region.
    pub fn outline(&self) -> &Region {
        self.regions
            .iter()
            .find(|r| r.role == RegionRole::Outline)
            .unwrap_or(&self.regions[0])
    }

    pub fn subdivisions(&self) -> impl Iterator<Item = &Region> {
        self.regions.iter().filter(|r| r.role == RegionRole::Subdivision)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_geojson_str(&text)
    }

    /// Reads Polygon and MultiPolygon features. The `name` property names a
    /// region; `role: "outline"` marks the outline.
    pub fn from_geojson_str(text: &str) -> Result<Self> {
        let gj: GeoJson = text.parse()?;
        let features = match gj {
            GeoJson::FeatureCollection(fc) => fc.features,
            GeoJson::Feature(f) => vec![f],
            GeoJson::Geometry(g) => vec![Feature {
                geometry: Some(g),
                ..Default::default()
            }],
        };
        let mut regions = Vec::new();
        for (i, f) in features.into_iter().enumerate() {
            let name = f
                .property("name")
                .and_then(|v| v.as_str())
                .map(str::to_string)
                .unwrap_or_else(|| format!("region-{i}"));
            let role = match f.property("role").and_then(|v| v.as_str()) {
                Some("outline") => RegionRole::Outline,
                _ => RegionRole::Subdivision,
            };
            let Some(geom) = f.geometry else { continue };
            let raw = match geom.value {
                Value::Polygon(p) => vec![p],
                Value::MultiPolygon(mp) => mp,
                _ => continue,
            };
            let polygons = raw
                .into_iter()
                .map(|poly| {
                    poly.into_iter()
                        .map(|ring| Ring::new(ring.into_iter().map(|p| (p[0], p[1])).collect()))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            regions.push(Region { name, role, polygons });
        }
        if !regions.iter().any(|r| r.role == RegionRole::Outline) {
            if let Some(first) = regions.first_mut() {
                first.role = RegionRole::Outline;
            }
        }
        Self::new(regions)
    }

    pub fn to_geojson(&self) -> FeatureCollection {
        let features = self
            .regions
            .iter()
            .map(|r| {
                let polys: Vec<Vec<Vec<Vec<f64>>>> = r
                    .polygons
                    .iter()
                    .map(|p| {
                        p.iter()
                            .map(|ring| ring.vertices().iter().map(|&(x, y)| vec![x, y]).collect())
                            .collect()
                    })
                    .collect();
                let value = if polys.len() == 1 {
                    Value::Polygon(polys.into_iter().next().unwrap())
                } else {
                    Value::MultiPolygon(polys)
                };
                let mut props = JsonObject::new();
                props.insert("name".into(), r.name.clone().into());
                let role = match r.role {
                    RegionRole::Outline => "outline",
                    RegionRole::Subdivision => "subdivision",
                };
                props.insert("role".into(), role.into());
                Feature {
                    geometry: Some(Geometry::new(value)),
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
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(x0: f64, y0: f64, s: f64) -> Vec<(f64, f64)> {
        vec![(x0, y0), (x0 + s, y0), (x0 + s, y0 + s), (x0, y0 + s), (x0, y0)]
    }

    #[test]
    fn ring_closes_and_validates() {
        let r = Ring::new(vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)]).unwrap();
        assert_eq!(r.vertices().len(), 4);
        assert_eq!(r.open().len(), 3);
        assert!(Ring::new(vec![(0.0, 0.0), (1.0, 0.0)]).is_err());
    }

    #[test]
    fn geojson_round_trip() {
        let set = BoundarySet::new(vec![
            Region::simple("country", RegionRole::Outline, square(-8.0, 4.0, 4.0)).unwrap(),
            Region::simple("west", RegionRole::Subdivision, square(-8.0, 4.0, 2.0)).unwrap(),
        ])
        .unwrap();
        let text = set.to_geojson().to_string();
        let back = BoundarySet::from_geojson_str(&text).unwrap();
        assert_eq!(back, set);
        assert_eq!(back.outline().name, "country");
        assert_eq!(back.subdivisions().count(), 1);
    }

    #[test]
    fn first_region_defaults_to_outline() {
        let text = r#"{"type":"FeatureCollection","features":[
            {"type":"Feature","properties":{"name":"a"},"geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,0]]]}}]}"#;
        let set = BoundarySet::from_geojson_str(text).unwrap();
        assert_eq!(set.outline().role, RegionRole::Outline);
    }

    #[test]
    fn unclosed_short_ring_is_rejected() {
        let text = r#"{"type":"Polygon","coordinates":[[[0,0],[1,0],[0,0]]]}"#;
        assert!(BoundarySet::from_geojson_str(text).is_err());
    }
}
