//! Deployment planning and spatial math for the square grid world.
//!
//! The area is an `n × n` grid of square cells with side `D = 2r`, origin at
//! the south-west corner. Sensors sit at cell centers, the area is split into
//! four half-open quadrants, and each quadrant owns one cluster head (at its
//! outer corner) and one actor (at its center).

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("invalid grid spec: {0}")]
    InvalidSpec(String),
    #[error("point ({x}, {y}) lies outside the area [0, {side}) x [0, {side})")]
    OutOfBounds { x: f64, y: f64, side: f64 },
    #[error("heading is undefined for a zero displacement")]
    UndefinedHeading,
}

/// A point in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        actor_travel_distance(other.x - self.x, other.y - self.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Cell side for a sensing range: `D = 2r`.
pub fn derive_cell_side(r: f64) -> Result<f64, GeometryError> {
    if !(r.is_finite() && r > 0.0) {
        return Err(GeometryError::InvalidSpec(format!(
            "sensing range must be a positive finite number, got {r}"
        )));
    }
    Ok(2.0 * r)
}

/// Sensors needed when each one sits at a cell center.
pub fn node_count_center(n: u32) -> Result<u64, GeometryError> {
    if n < 1 {
        return Err(GeometryError::InvalidSpec("n must be at least 1".into()));
    }
    let n = u64::from(n);
    Ok(n * n)
}

/// Sensors needed when each one sits at a grid-line intersection.
pub fn node_count_intersection(n: u32) -> Result<u64, GeometryError> {
    if n < 1 {
        return Err(GeometryError::InvalidSpec("n must be at least 1".into()));
    }
    let n = u64::from(n);
    Ok(n * n + 2 * n + 1)
}

/// Grid dimensions. Construct through [`GridSpec::new`] so the invariants hold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    n: u32,
    r: f64,
    cell_side: f64,
}

impl GridSpec {
    pub fn new(n: u32, r: f64) -> Result<Self, GeometryError> {
        let cell_side = derive_cell_side(r)?;
        if n < 2 {
            return Err(GeometryError::InvalidSpec(format!("n must be at least 2, got {n}")));
        }
        if !n.is_multiple_of(2) {
            return Err(GeometryError::InvalidSpec(format!(
                "n must be even so the area splits into four equal quadrants, got {n}"
            )));
        }
        Ok(Self { n, r, cell_side })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Sensing range in meters.
    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn cell_side(&self) -> f64 {
        self.cell_side
    }

    /// Side length of the whole square area, `n·D`.
    pub fn side(&self) -> f64 {
        f64::from(self.n) * self.cell_side
    }

    pub fn area(&self) -> f64 {
        self.side() * self.side()
    }

    /// Coordinate of the quadrant midlines.
    pub fn midline(&self) -> f64 {
        self.side() / 2.0
    }

    pub fn contains(&self, p: Point) -> bool {
        let side = self.side();
        p.x >= 0.0 && p.x < side && p.y >= 0.0 && p.y < side
    }

    pub fn cell_center(&self, i: u32, j: u32) -> Point {
        Point::new(
            (f64::from(i) + 0.5) * self.cell_side,
            (f64::from(j) + 0.5) * self.cell_side,
        )
    }

    pub fn quadrant(&self, qno: QuadrantNo) -> Quadrant {
        let m = self.midline();
        let x0 = if qno.0 & 1 == 1 { m } else { 0.0 };
        let y0 = if qno.0 & 2 == 2 { m } else { 0.0 };
        Quadrant {
            qno,
            min: Point::new(x0, y0),
            max: Point::new(x0 + m, y0 + m),
        }
    }
}

/// Quadrant number: x-bit + 2·y-bit, so 0 = SW, 1 = SE, 2 = NW, 3 = NE.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct QuadrantNo(pub u16);

impl QuadrantNo {
    pub const ALL: [QuadrantNo; 4] = [QuadrantNo(0), QuadrantNo(1), QuadrantNo(2), QuadrantNo(3)];
}

/// Half-open rectangle `[min.x, max.x) × [min.y, max.y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadrant {
    pub qno: QuadrantNo,
    pub min: Point,
    pub max: Point,
}

impl Quadrant {
    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min.x && p.x < self.max.x && p.y >= self.min.y && p.y < self.max.y
    }

    pub fn center(&self) -> Point {
        Point::new((self.min.x + self.max.x) / 2.0, (self.min.y + self.max.y) / 2.0)
    }

    /// The quadrant corner that is also a corner of the whole area.
    pub fn outer_corner(&self) -> Point {
        let x = if self.qno.0 & 1 == 1 { self.max.x } else { self.min.x };
        let y = if self.qno.0 & 2 == 2 { self.max.y } else { self.min.y };
        Point::new(x, y)
    }
}

pub fn quadrant_of(p: Point, spec: &GridSpec) -> Result<QuadrantNo, GeometryError> {
    if !spec.contains(p) {
        return Err(GeometryError::OutOfBounds {
            x: p.x,
            y: p.y,
            side: spec.side(),
        });
    }
    let m = spec.midline();
    let xbit = u16::from(p.x >= m);
    let ybit = u16::from(p.y >= m);
    Ok(QuadrantNo(xbit + 2 * ybit))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorSite {
    pub id: u32,
    pub position: Point,
    /// Cluster head serving the sensor's quadrant.
    pub chno: u16,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterHeadSite {
    pub chno: u16,
    pub position: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActorSite {
    pub aa: u16,
    pub home: Point,
}

/// Static node placement for a grid. Sensor ids run row-major from the
/// south-west cell: `id = j·n + i` for the cell in column `i`, row `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deployment {
    pub spec: GridSpec,
    pub sensors: Vec<SensorSite>,
    pub cluster_heads: Vec<ClusterHeadSite>,
    pub actors: Vec<ActorSite>,
}

impl Deployment {
    pub fn actor(&self, aa: u16) -> Option<&ActorSite> {
        self.actors.iter().find(|a| a.aa == aa)
    }

    pub fn cluster_head(&self, chno: u16) -> Option<&ClusterHeadSite> {
        self.cluster_heads.iter().find(|c| c.chno == chno)
    }

    /// Actor address responsible for a quadrant (initially AA = QNO).
    pub fn actor_for(&self, qno: QuadrantNo) -> Option<u16> {
        self.actor(qno.0).map(|a| a.aa)
    }
}

pub fn plan_deployment(spec: &GridSpec) -> Deployment {
    let n = spec.n();
    let mut sensors = Vec::with_capacity((n * n) as usize);
    for j in 0..n {
        for i in 0..n {
            let position = spec.cell_center(i, j);
            // cell centers are always in-area for a valid spec
            let chno = quadrant_of(position, spec).map(|q| q.0).unwrap_or(0);
            sensors.push(SensorSite { id: j * n + i, position, chno });
        }
    }
    let cluster_heads = QuadrantNo::ALL
        .iter()
        .map(|&q| ClusterHeadSite { chno: q.0, position: spec.quadrant(q).outer_corner() })
        .collect();
    let actors = QuadrantNo::ALL
        .iter()
        .map(|&q| ActorSite { aa: q.0, home: spec.quadrant(q).center() })
        .collect();
    Deployment { spec: *spec, sensors, cluster_heads, actors }
}

/// Straight-line travel distance for axis-aligned displacement components
/// (the right angle between them kills the cosine term).
pub fn actor_travel_distance(b: f64, c: f64) -> f64 {
    b.hypot(c)
}

/// Full-circle heading in radians, range (−π, π], measured from +x.
pub fn actor_heading(dx: f64, dy: f64) -> Result<f64, GeometryError> {
    if dx == 0.0 && dy == 0.0 {
        return Err(GeometryError::UndefinedHeading);
    }
    Ok(dy.atan2(dx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn cell_side_is_twice_the_range() {
        assert_eq!(derive_cell_side(50.0).unwrap(), 100.0);
        assert_eq!(derive_cell_side(0.5).unwrap(), 1.0);
        assert!(derive_cell_side(0.0).is_err());
        assert!(derive_cell_side(-1.0).is_err());
        assert!(derive_cell_side(f64::NAN).is_err());
    }

    #[test]
    fn node_counts() {
        assert_eq!(node_count_center(2).unwrap(), 4);
        assert_eq!(node_count_center(4).unwrap(), 16);
        assert_eq!(node_count_center(1).unwrap(), 1);
        assert_eq!(node_count_intersection(2).unwrap(), 9);
        assert_eq!(node_count_intersection(4).unwrap(), 25);
        assert!(node_count_center(0).is_err());
        assert!(node_count_intersection(0).is_err());
        for n in 1..=64u32 {
            let diff = node_count_intersection(n).unwrap() - node_count_center(n).unwrap();
            assert_eq!(diff, 2 * u64::from(n) + 1);
        }
    }

    #[test]
    fn plan_two_by_two() {
        let spec = GridSpec::new(2, 50.0).unwrap();
        let d = plan_deployment(&spec);
        let pos: Vec<_> = d.sensors.iter().map(|s| (s.position.x, s.position.y)).collect();
        assert_eq!(pos, vec![(50.0, 50.0), (150.0, 50.0), (50.0, 150.0), (150.0, 150.0)]);
        let homes: Vec<_> = d.actors.iter().map(|a| (a.home.x, a.home.y)).collect();
        assert_eq!(homes, vec![(50.0, 50.0), (150.0, 50.0), (50.0, 150.0), (150.0, 150.0)]);
        let chs: Vec<_> = d.cluster_heads.iter().map(|c| (c.position.x, c.position.y)).collect();
        assert_eq!(chs, vec![(0.0, 0.0), (200.0, 0.0), (0.0, 200.0), (200.0, 200.0)]);
        for (q, a) in d.actors.iter().enumerate() {
            assert_eq!(a.aa as usize, q);
            assert_eq!(d.cluster_heads[q].chno as usize, q);
        }
    }

    #[test]
    fn odd_or_tiny_grid_rejected() {
        assert!(GridSpec::new(3, 50.0).is_err());
        assert!(GridSpec::new(0, 50.0).is_err());
        assert!(GridSpec::new(1, 50.0).is_err());
    }

    #[test]
    fn quadrant_rule() {
        let spec = GridSpec::new(4, 50.0).unwrap();
        assert_eq!(quadrant_of(Point::new(50.0, 50.0), &spec).unwrap(), QuadrantNo(0));
        assert_eq!(quadrant_of(Point::new(200.0, 200.0), &spec).unwrap(), QuadrantNo(3));
        assert_eq!(quadrant_of(Point::new(350.0, 120.0), &spec).unwrap(), QuadrantNo(1));
        assert_eq!(quadrant_of(Point::new(10.0, 399.0), &spec).unwrap(), QuadrantNo(2));
        assert!(matches!(
            quadrant_of(Point::new(400.0, 10.0), &spec),
            Err(GeometryError::OutOfBounds { .. })
        ));
        assert!(quadrant_of(Point::new(-0.1, 10.0), &spec).is_err());
    }

    #[test]
    fn quadrant_bounds_agree_with_rule() {
        let spec = GridSpec::new(6, 10.0).unwrap();
        for s in plan_deployment(&spec).sensors {
            let q = quadrant_of(s.position, &spec).unwrap();
            assert!(spec.quadrant(q).contains(s.position));
            assert_eq!(q.0, s.chno);
        }
    }

    #[test]
    fn movement_math() {
        assert_eq!(actor_travel_distance(3.0, 4.0), 5.0);
        assert_eq!(actor_travel_distance(0.0, 0.0), 0.0);
        assert_eq!(actor_travel_distance(-7.5, 0.0), 7.5);
        assert!((actor_heading(1.0, 1.0).unwrap() - FRAC_PI_4).abs() < 1e-15);
        assert!((actor_heading(0.0, 1.0).unwrap() - FRAC_PI_2).abs() < 1e-15);
        // agrees with bare arctan for dx > 0
        assert!((actor_heading(50.0, 20.0).unwrap() - (20.0f64 / 50.0).atan()).abs() < 1e-15);
        assert!((actor_heading(50.0, 20.0).unwrap() - 0.380506377112365).abs() < 1e-12);
        assert!(matches!(actor_heading(0.0, 0.0), Err(GeometryError::UndefinedHeading)));
        let back = actor_heading(-1.0, 0.0).unwrap();
        assert_eq!(back, std::f64::consts::PI);
    }
}
