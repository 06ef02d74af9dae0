use std::ops::{Add, Mul, Sub};

/// Mean Earth radius used by the projection and haversine distance.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// Planar point in kilometres.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ProjectedPoint {
    pub x: f64,
    pub y: f64,
}

impl ProjectedPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        ProjectedPoint { x, y }
    }

    pub fn dot(self, o: ProjectedPoint) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: ProjectedPoint) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn dist(self, o: ProjectedPoint) -> f64 {
        (self - o).norm_sq().sqrt()
    }

    pub fn dist_sq(self, o: ProjectedPoint) -> f64 {
        (self - o).norm_sq()
    }
}

impl Add for ProjectedPoint {
    type Output = ProjectedPoint;
    fn add(self, o: ProjectedPoint) -> ProjectedPoint {
        ProjectedPoint::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for ProjectedPoint {
    type Output = ProjectedPoint;
    fn sub(self, o: ProjectedPoint) -> ProjectedPoint {
        ProjectedPoint::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for ProjectedPoint {
    type Output = ProjectedPoint;
    fn mul(self, k: f64) -> ProjectedPoint {
        ProjectedPoint::new(self.x * k, self.y * k)
    }
}

/// Equirectangular projection about a reference point:
/// `x = R cos(ref_lat) (lon - ref_lon)`, `y = R (lat - ref_lat)`, angles in
/// radians, R = 6371 km.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    ref_lon: f64,
    ref_lat: f64,
    cos_ref: f64,
}

impl Projection {
    pub fn new(ref_lon: f64, ref_lat: f64) -> Self {
        assert!(ref_lat.abs() < 89.0, "reference latitude too close to a pole");
        Projection {
            ref_lon,
            ref_lat,
            cos_ref: ref_lat.to_radians().cos(),
        }
    }

    /// Projection centred on the middle of a lon/lat bounding box
    /// `(min_lon, min_lat, max_lon, max_lat)`.
    pub fn centered_on(bbox: (f64, f64, f64, f64)) -> Self {
        Projection::new((bbox.0 + bbox.2) / 2.0, (bbox.1 + bbox.3) / 2.0)
    }

    pub fn reference(&self) -> (f64, f64) {
        (self.ref_lon, self.ref_lat)
    }

    pub fn forward(&self, lon: f64, lat: f64) -> ProjectedPoint {
        debug_assert!(lat.abs() < 89.0);
        ProjectedPoint::new(
            EARTH_RADIUS_KM * self.cos_ref * (lon - self.ref_lon).to_radians(),
            EARTH_RADIUS_KM * (lat - self.ref_lat).to_radians(),
        )
    }

    pub fn inverse(&self, p: ProjectedPoint) -> (f64, f64) {
        (
            self.ref_lon + (p.x / (EARTH_RADIUS_KM * self.cos_ref)).to_degrees(),
            self.ref_lat + (p.y / EARTH_RADIUS_KM).to_degrees(),
        )
    }
}

/// Great-circle distance between two (lon, lat) points in km.
pub fn haversine_km(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (lat1, lat2) = (a.1.to_radians(), b.1.to_radians());
    let dlat = lat2 - lat1;
    let dlon = (b.0 - a.0).to_radians();
    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().asin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn reference_point_maps_to_origin() {
        let p = Projection::new(-5.5, 7.5);
        assert_eq!(p.forward(-5.5, 7.5), ProjectedPoint::new(0.0, 0.0));
    }

    #[test]
    fn one_degree_of_latitude() {
        let p = Projection::new(-5.5, 7.5);
        let dy = p.forward(-5.5, 8.0).y - p.forward(-5.5, 7.0).y;
        // R * pi / 180
        let expected = 6371.0 * std::f64::consts::PI / 180.0;
        assert!((dy - expected).abs() < 1e-9);
        assert!((dy - 111.19).abs() < 0.01);
    }

    #[test]
    fn inverse_round_trip() {
        let p = Projection::new(-5.5, 7.5);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let lon = rng.gen_range(-180.0..180.0);
            let lat = rng.gen_range(-88.0..88.0);
            let (lo, la) = p.inverse(p.forward(lon, lat));
            worst = worst.max((lo - lon).abs()).max((la - lat).abs());
        }
        assert!(worst < 1e-9, "max error {worst}");
    }

    #[test]
    fn short_distances_match_haversine_in_band() {
        // latitude band 4..11 N, reference at the band centre
        let p = Projection::new(-5.5, 7.5);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..500 {
            let a = (rng.gen_range(-8.6..-2.5), rng.gen_range(4.3..10.8));
            let b = (a.0 + rng.gen_range(-0.3..0.3), a.1 + rng.gen_range(-0.3..0.3));
            let planar = p.forward(a.0, a.1).dist(p.forward(b.0, b.1));
            let sphere = haversine_km(a, b);
            assert!((planar - sphere).abs() <= 0.01 * sphere, "{planar} vs {sphere}");
        }
    }
}
