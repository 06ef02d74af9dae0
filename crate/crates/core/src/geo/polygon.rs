use super::ProjectedPoint;
use crate::ingest::Region;
use super::Projection;

/// Axis-aligned box `(min, max)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub min: ProjectedPoint,
    pub max: ProjectedPoint,
}

impl BBox {
    pub fn empty() -> Self {
        BBox {
            min: ProjectedPoint::new(f64::INFINITY, f64::INFINITY),
            max: ProjectedPoint::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    pub fn of_points<'a>(pts: impl IntoIterator<Item = &'a ProjectedPoint>) -> Self {
        let mut b = BBox::empty();
        for p in pts {
            b.include(*p);
        }
        b
    }

    pub fn include(&mut self, p: ProjectedPoint) {
        self.min.x = self.min.x.min(p.x);
        self.min.y = self.min.y.min(p.y);
        self.max.x = self.max.x.max(p.x);
        self.max.y = self.max.y.max(p.y);
    }

    pub fn union(mut self, o: BBox) -> Self {
        self.include(o.min);
        self.include(o.max);
        self
    }

    pub fn contains(&self, p: ProjectedPoint) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn expanded(&self, margin: f64) -> Self {
        BBox {
            min: ProjectedPoint::new(self.min.x - margin, self.min.y - margin),
            max: ProjectedPoint::new(self.max.x + margin, self.max.y + margin),
        }
    }

    /// Counter-clockwise corner ring.
    pub fn ring(&self) -> Vec<ProjectedPoint> {
        vec![
            self.min,
            ProjectedPoint::new(self.max.x, self.min.y),
            self.max,
            ProjectedPoint::new(self.min.x, self.max.y),
        ]
    }
}

/// Shoelace area, positive for counter-clockwise rings. Rings are open (no
/// closing repeat).
pub fn ring_signed_area(ring: &[ProjectedPoint]) -> f64 {
    let n = ring.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        acc += ring[i].cross(ring[(i + 1) % n]);
    }
    acc / 2.0
}

/// Even-odd crossing test.
pub fn ring_contains(ring: &[ProjectedPoint], p: ProjectedPoint) -> bool {
    let n = ring.len();
    let mut inside = false;
    let mut j = n.wrapping_sub(1);
    for i in 0..n {
        let (a, b) = (ring[i], ring[j]);
        if (a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x {
            inside = !inside;
        }
        j = i;
    }
    inside
}

/// Inclusive containment for a counter-clockwise convex ring.
pub fn convex_contains(ring: &[ProjectedPoint], p: ProjectedPoint) -> bool {
    let n = ring.len();
    (0..n).all(|i| (ring[(i + 1) % n] - ring[i]).cross(p - ring[i]) >= 0.0)
}

/// Sutherland-Hodgman step: keeps the part of `ring` where
/// `dot(p, normal) <= offset`.
pub fn clip_halfplane(ring: &[ProjectedPoint], normal: ProjectedPoint, offset: f64) -> Vec<ProjectedPoint> {
    let n = ring.len();
    let mut out = Vec::with_capacity(n + 2);
    for i in 0..n {
        let cur = ring[i];
        let next = ring[(i + 1) % n];
        let dc = cur.dot(normal) - offset;
        let dn = next.dot(normal) - offset;
        if dc <= 0.0 {
            out.push(cur);
        }
        if (dc < 0.0 && dn > 0.0) || (dc > 0.0 && dn < 0.0) {
            let t = dc / (dc - dn);
            out.push(cur + (next - cur) * t);
        }
    }
    out
}

/// Clips an arbitrary ring against a counter-clockwise convex ring. The
/// result may contain zero-width bridges when the subject is concave; its
/// area is still exact.
pub fn clip_ring_convex(subject: &[ProjectedPoint], convex: &[ProjectedPoint]) -> Vec<ProjectedPoint> {
    let mut out = subject.to_vec();
    let n = convex.len();
    for i in 0..n {
        if out.is_empty() {
            break;
        }
        let a = convex[i];
        let b = convex[(i + 1) % n];
        let edge = b - a;
        // outward normal of a CCW edge
        let normal = ProjectedPoint::new(edge.y, -edge.x);
        out = clip_halfplane(&out, normal, a.dot(normal));
    }
    out
}

/// Polygon with optional holes; rings are open.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    pub exterior: Vec<ProjectedPoint>,
    pub holes: Vec<Vec<ProjectedPoint>>,
}

impl Polygon {
    pub fn new(exterior: Vec<ProjectedPoint>) -> Self {
        Polygon {
            exterior,
            holes: Vec::new(),
        }
    }

    pub fn area(&self) -> f64 {
        ring_signed_area(&self.exterior).abs()
            - self.holes.iter().map(|h| ring_signed_area(h).abs()).sum::<f64>()
    }

    pub fn contains(&self, p: ProjectedPoint) -> bool {
        ring_contains(&self.exterior, p) && !self.holes.iter().any(|h| ring_contains(h, p))
    }

    pub fn bbox(&self) -> BBox {
        BBox::of_points(&self.exterior)
    }

    pub fn clip_convex(&self, convex: &[ProjectedPoint]) -> Option<Polygon> {
        let ext = clip_ring_convex(&self.exterior, convex);
        if ext.len() < 3 {
            return None;
        }
        let holes = self
            .holes
            .iter()
            .map(|h| clip_ring_convex(h, convex))
            .filter(|h| h.len() >= 3)
            .collect();
        Some(Polygon { exterior: ext, holes })
    }

    /// Inserts vertices so that no edge is longer than `max_len`.
    pub fn densified(&self, max_len: f64) -> Polygon {
        Polygon {
            exterior: densify_ring(&self.exterior, max_len),
            holes: self.holes.iter().map(|h| densify_ring(h, max_len)).collect(),
        }
    }
}

pub fn densify_ring(ring: &[ProjectedPoint], max_len: f64) -> Vec<ProjectedPoint> {
    let n = ring.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        let steps = ((a.dist(b) / max_len).ceil() as usize).max(1);
        for k in 0..steps {
            out.push(a + (b - a) * (k as f64 / steps as f64));
        }
    }
    out
}

/// A region in planar coordinates: a union of disjoint polygons.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarRegion {
    pub name: String,
    pub polygons: Vec<Polygon>,
}

impl PlanarRegion {
    pub fn from_polygon(name: &str, polygon: Polygon) -> Self {
        PlanarRegion {
            name: name.to_string(),
            polygons: vec![polygon],
        }
    }

    pub fn project(region: &Region, proj: &Projection) -> Self {
        let ring_of = |r: &crate::ingest::Ring| -> Vec<ProjectedPoint> {
            r.open().iter().map(|&(lon, lat)| proj.forward(lon, lat)).collect()
        };
        let polygons = region
            .polygons
            .iter()
            .map(|rings| Polygon {
                exterior: ring_of(&rings[0]),
                holes: rings[1..].iter().map(ring_of).collect(),
            })
            .collect();
        PlanarRegion {
            name: region.name.clone(),
            polygons,
        }
    }

    pub fn area(&self) -> f64 {
        self.polygons.iter().map(Polygon::area).sum()
    }

    pub fn contains(&self, p: ProjectedPoint) -> bool {
        self.polygons.iter().any(|poly| poly.contains(p))
    }

    pub fn bbox(&self) -> BBox {
        self.polygons.iter().fold(BBox::empty(), |b, p| b.union(p.bbox()))
    }

    pub fn clip_convex(&self, convex: &[ProjectedPoint]) -> PlanarRegion {
        PlanarRegion {
            name: self.name.clone(),
            polygons: self.polygons.iter().filter_map(|p| p.clip_convex(convex)).collect(),
        }
    }
}
