use std::fmt::Write as _;

use geojson::{Feature, FeatureCollection, Geometry, JsonObject, Value};

use crate::geo::{region_geometry, BBox, PlanarRegion, ProjectedPoint, Projection};

/// One station drawn on a map panel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationMark {
    pub id: u32,
    pub position: ProjectedPoint,
    /// Outgoing calls handled by the station.
    pub calls: u64,
}

/// A map panel: region outlines plus station dots.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MapLayer {
    pub regions: Vec<PlanarRegion>,
    pub stations: Vec<StationMark>,
}

/// Stations as points and regions as polygons, in lon/lat.
pub fn layer_geojson(layer: &MapLayer, proj: &Projection) -> FeatureCollection {
    let mut features = Vec::new();
    for r in &layer.regions {
        let mut props = JsonObject::new();
        props.insert("name".into(), r.name.clone().into());
        props.insert("area_km2".into(), r.area().into());
        features.push(Feature {
            geometry: region_geometry(r, proj),
            properties: Some(props),
            ..Default::default()
        });
    }
    for s in &layer.stations {
        let (lon, lat) = proj.inverse(s.position);
        let mut props = JsonObject::new();
        props.insert("station".into(), s.id.into());
        props.insert("calls".into(), s.calls.into());
        features.push(Feature {
            geometry: Some(Geometry::new(Value::Point(vec![lon, lat]))),
            properties: Some(props),
            ..Default::default()
        });
    }
    FeatureCollection {
        bbox: None,
        features,
        foreign_members: None,
    }
}

const PANEL: f64 = 480.0;
const MARGIN: f64 = 20.0;

// dark blue to yellow, evenly spaced stops
const RAMP: [(f64, f64, f64); 5] = [
    (68.0, 1.0, 84.0),
    (59.0, 82.0, 139.0),
    (33.0, 145.0, 140.0),
    (94.0, 201.0, 98.0),
    (253.0, 231.0, 37.0),
];

fn ramp(f: f64) -> String {
    let f = f.clamp(0.0, 1.0) * (RAMP.len() - 1) as f64;
    let k = (f.floor() as usize).min(RAMP.len() - 2);
    let w = f - k as f64;
    let (a, b) = (RAMP[k], RAMP[k + 1]);
    let c = |x: f64, y: f64| (x + (y - x) * w).round() as u8;
    format!("#{:02x}{:02x}{:02x}", c(a.0, b.0), c(a.1, b.1), c(a.2, b.2))
}

fn layer_bbox(layer: &MapLayer) -> BBox {
    let mut bb = layer.regions.iter().fold(BBox::empty(), |b, r| b.union(r.bbox()));
    for s in &layer.stations {
        bb.include(s.position);
    }
    bb
}

fn draw_panel(out: &mut String, layer: &MapLayer, x_off: f64, title: &str, color_of: &dyn Fn(u64) -> String) {
    let bb = layer_bbox(layer);
    let span = bb.width().max(bb.height()).max(1e-9);
    let scale = (PANEL - 2.0 * MARGIN) / span;
    let px = |p: ProjectedPoint| {
        (
            x_off + MARGIN + (p.x - bb.min.x) * scale,
            MARGIN + 24.0 + (bb.max.y - p.y) * scale,
        )
    };
    let _ = writeln!(out, r#"<text x="{:.1}" y="18" font-size="14">{title}</text>"#, x_off + MARGIN);
    for r in &layer.regions {
        let mut d = String::new();
        for poly in &r.polygons {
            for ring in std::iter::once(&poly.exterior).chain(&poly.holes) {
                for (k, &p) in ring.iter().enumerate() {
                    let (x, y) = px(p);
                    let _ = write!(d, "{}{x:.2},{y:.2} ", if k == 0 { "M" } else { "L" });
                }
                d.push_str("Z ");
            }
        }
        let _ = writeln!(
            out,
            r##"<path d="{}" fill="#f4f1ea" fill-rule="evenodd" stroke="#555" stroke-width="0.6"/>"##,
            d.trim_end()
        );
    }
    for s in &layer.stations {
        let (x, y) = px(s.position);
        let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="1.6" fill="{}"/>"#, color_of(s.calls));
    }
}

/// Side-by-side SVG of the original map and the cartogram. Dot colour
/// follows the log of each station's outgoing call count.
pub fn side_by_side_svg(original: &MapLayer, cartogram: &MapLayer) -> String {
    let max_calls = original
        .stations
        .iter()
        .chain(&cartogram.stations)
        .map(|s| s.calls)
        .max()
        .unwrap_or(0);
    let top = ((max_calls + 1) as f64).ln().max(1e-12);
    let color_of = |c: u64| ramp(((c + 1) as f64).ln() / top);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" font-family="sans-serif">"#,
        2.0 * PANEL,
        PANEL + 60.0
    );
    draw_panel(&mut out, original, 0.0, "original", &color_of);
    draw_panel(&mut out, cartogram, PANEL, "cartogram", &color_of);
    // colour legend
    let y = PANEL + 40.0;
    for k in 0..=20 {
        let f = k as f64 / 20.0;
        let _ = writeln!(
            out,
            r#"<rect x="{:.1}" y="{y}" width="10" height="10" fill="{}"/>"#,
            MARGIN + 10.0 * k as f64,
            ramp(f)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" font-size="11">outgoing calls, log scale, 0 to {max_calls}</text>"#,
        MARGIN + 220.0,
        y + 9.0
    );
    out.push_str("</svg>\n");
    out
}
