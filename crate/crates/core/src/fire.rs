//! Fire ignition, constant-speed radial spread, detection geometry and
//! burned-area accounting.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::geometry::{GridSpec, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FireId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FireEvent {
    pub fire_id: FireId,
    pub ignition: Point,
    /// Front speed in m/s.
    pub speed: f64,
    pub t0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FireState {
    pub event: FireEvent,
    pub contained_at: Option<f64>,
}

impl FireState {
    pub fn new(event: FireEvent) -> Self {
        Self { event, contained_at: None }
    }

    pub fn is_contained(&self) -> bool {
        self.contained_at.is_some()
    }

    /// Freezes the front at `t`. Only the first containment counts.
    pub fn contain(&mut self, t: f64) -> bool {
        if self.contained_at.is_some() {
            return false;
        }
        self.contained_at = Some(t.max(self.event.t0));
        true
    }

    pub fn radius(&self, t: f64) -> f64 {
        fire_radius(self, t)
    }

    /// Whether a sensor at `pos` with range `r` sees this fire at `t`.
    ///
    /// Uses the closed-form detection instant instead of comparing the front
    /// against the range, so sampled detection agrees bit-for-bit with
    /// [`first_detection_time`].
    pub fn detectable_at(&self, pos: Point, r: f64, t: f64) -> bool {
        match first_detection_time(&self.event, pos, r) {
            None => false,
            Some(td) => t >= td && self.contained_at.is_none_or(|c| td <= c),
        }
    }
}

pub fn fire_radius(f: &FireState, t: f64) -> f64 {
    let t0 = f.event.t0;
    if t < t0 {
        return 0.0;
    }
    let until = f.contained_at.map_or(t, |c| t.min(c));
    f.event.speed * (until - t0)
}

/// Earliest instant the front comes within `r` of `sensor_pos`, or `None`
/// when a static fire is out of range.
pub fn first_detection_time(f: &FireEvent, sensor_pos: Point, r: f64) -> Option<f64> {
    let gap = sensor_pos.distance(&f.ignition) - r;
    if gap <= 0.0 {
        return Some(f.t0);
    }
    if f.speed <= 0.0 {
        return None;
    }
    Some(f.t0 + gap / f.speed)
}

/// Area of the fire disk at `t`, clipped to the simulation area.
pub fn burned_area(f: &FireState, t: f64, spec: &GridSpec) -> f64 {
    let side = spec.side();
    circle_rect_intersection(
        f.event.ignition,
        fire_radius(f, t),
        Point::new(0.0, 0.0),
        Point::new(side, side),
    )
}

/// Exact area of a disk intersected with the axis-aligned rectangle `[min, max]`.
pub fn circle_rect_intersection(center: Point, radius: f64, min: Point, max: Point) -> f64 {
    if radius <= 0.0 || max.x <= min.x || max.y <= min.y {
        return 0.0;
    }
    let (x0, x1) = (min.x - center.x, max.x - center.x);
    let (y0, y1) = (min.y - center.y, max.y - center.y);
    let a = below_left(x1, y1, radius) - below_left(x0, y1, radius) - below_left(x1, y0, radius)
        + below_left(x0, y0, radius);
    a.clamp(0.0, PI * radius * radius)
}

/// Antiderivative of `sqrt(R² − u²)`.
fn half_chord_integral(u: f64, r: f64) -> f64 {
    let u = u.clamp(-r, r);
    let s = (r * r - u * u).max(0.0).sqrt();
    0.5 * (u * s + r * r * (u / r).clamp(-1.0, 1.0).asin())
}

/// Area of the origin-centered disk inside the quarter plane `u ≤ x, v ≤ y`.
fn below_left(x: f64, y: f64, r: f64) -> f64 {
    let hi = x.min(r);
    if hi <= -r {
        return 0.0;
    }
    // the chord length below y changes form where sqrt(R² − u²) = |y|
    let mut cuts = vec![-r, hi];
    if y.abs() < r {
        let w = (r * r - y * y).sqrt();
        for c in [-w, w] {
            if c > -r && c < hi {
                cuts.push(c);
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                return 0.0;
            }
            let mid = 0.5 * (a + b);
            let s = (r * r - mid * mid).max(0.0).sqrt();
            let prim = half_chord_integral(b, r) - half_chord_integral(a, r);
            if y >= s {
                2.0 * prim
            } else if y <= -s {
                0.0
            } else {
                y * (b - a) + prim
            }
        })
        .sum()
}
