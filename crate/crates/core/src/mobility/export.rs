use std::collections::HashMap;
use std::io::Write;

use geojson::{Feature, FeatureCollection, Geometry, JsonObject, Value};

use super::{Heatmap, RoadSegment};
use crate::ingest::BaseStation;

/// Segments as LineStrings between station coordinates, with `weight` and
/// `component` properties. Segments with an unknown endpoint are skipped.
pub fn segments_geojson(segments: &[RoadSegment], stations: &[BaseStation]) -> FeatureCollection {
    let by_id: HashMap<u32, &BaseStation> = stations.iter().map(|s| (s.id, s)).collect();
    let features = segments
        .iter()
        .filter_map(|s| {
            let (a, b) = (by_id.get(&s.from)?, by_id.get(&s.to)?);
            let mut props = JsonObject::new();
            props.insert("from".into(), s.from.into());
            props.insert("to".into(), s.to.into());
            props.insert("weight".into(), s.weight.into());
            props.insert("component".into(), s.component.into());
            Some(Feature {
                geometry: Some(Geometry::new(Value::LineString(vec![
                    vec![a.lon, a.lat],
                    vec![b.lon, b.lat],
                ]))),
                properties: Some(props),
                ..Default::default()
            })
        })
        .collect();
    FeatureCollection {
        bbox: None,
        features,
        foreign_members: None,
    }
}

pub fn write_segments_csv<W: Write>(mut w: W, segments: &[RoadSegment]) -> std::io::Result<()> {
    writeln!(w, "from,to,weight,component")?;
    for s in segments {
        writeln!(w, "{},{},{},{}", s.from, s.to, s.weight, s.component)?;
    }
    Ok(())
}

/// Matrix layout: header row of time-bin lower edges, then one row per
/// distance bin starting with its lower edge.
pub fn write_heatmap_csv<W: Write>(mut w: W, h: &Heatmap) -> std::io::Result<()> {
    let te = h.time.edges();
    write!(w, "distance_km\\dt_s")?;
    for e in &te[..te.len() - 1] {
        write!(w, ",{e}")?;
    }
    writeln!(w)?;
    let de = h.distance.edges();
    for (i, row) in h.counts.iter().enumerate() {
        write!(w, "{}", de[i])?;
        for c in row {
            write!(w, ",{c}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}
