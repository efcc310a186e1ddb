//! The closed set `F ⊂ span(e₁, e₂)`: a union of lines through the origin,
//! encoded by closed direction sets. Real mode stores arcs and isolated
//! angles on the direction circle (angles in rational turns, period 1/2);
//! complex mode stores disks and points in the slope chart `c₂/c₁`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_rational::Rational64;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::vector::PlanePoint;
use crate::Cplx;

/// Tolerance for float membership decisions, relative to the point's size.
const MEMBER_TOL: f64 = 1e-12;
/// Sample count for distance minimization over arcs and disk boundaries.
const DIST_SAMPLES: usize = 1024;

/// A closed arc `[lo, hi]` of direction angles, in turns; `0 ≤ lo ≤ hi < 1/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub lo: Rational64,
    pub hi: Rational64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LineUnion {
    Real {
        arcs: Vec<Arc>,
        /// Isolated unoriented line angles, in turns in `[0, 1/2)`.
        lines: Vec<Rational64>,
    },
    Complex {
        /// Closed disks `{|s - center| ≤ radius}` in the slope chart.
        disks: Vec<(Cplx, f64)>,
        /// Isolated slopes.
        points: Vec<Cplx>,
        /// Whether the line `c₁ = 0` (slope ∞) belongs to F.
        includes_vertical: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseClass {
    InF,
    NotInF,
}

fn half() -> Rational64 {
    Rational64::new(1, 2)
}

pub fn turns_to_radians(t: Rational64) -> f64 {
    t.to_f64().expect("small rational") * core::f64::consts::TAU
}

impl LineUnion {
    pub fn real(arcs: Vec<Arc>, lines: Vec<Rational64>) -> Result<Self> {
        if arcs.is_empty() && lines.is_empty() {
            return Err(Error::InvalidParameter(String::from(
                "F must be non-empty",
            )));
        }
        for a in &arcs {
            if a.lo > a.hi {
                return Err(Error::InvalidParameter(format!(
                    "arc with lo {} > hi {}",
                    a.lo, a.hi
                )));
            }
            if a.lo < Rational64::new(0, 1) || a.hi >= half() {
                return Err(Error::InvalidParameter(format!(
                    "arc [{}, {}] outside [0, 1/2)",
                    a.lo, a.hi
                )));
            }
        }
        for l in &lines {
            if *l < Rational64::new(0, 1) || *l >= half() {
                return Err(Error::InvalidParameter(format!(
                    "line angle {l} outside [0, 1/2)"
                )));
            }
        }
        Ok(LineUnion::Real { arcs, lines })
    }

    /// A single isolated line at the given angle (in turns).
    pub fn single_line(turns: Rational64) -> Result<Self> {
        LineUnion::real(Vec::new(), alloc::vec![turns])
    }

    pub fn complex(disks: Vec<(Cplx, f64)>, points: Vec<Cplx>, includes_vertical: bool) -> Result<Self> {
        if disks.is_empty() && points.is_empty() && !includes_vertical {
            return Err(Error::InvalidParameter(String::from(
                "F must be non-empty",
            )));
        }
        for (_, r) in &disks {
            if *r < 0.0 {
                return Err(Error::InvalidParameter(format!("disk radius {r} < 0")));
            }
        }
        Ok(LineUnion::Complex {
            disks,
            points,
            includes_vertical,
        })
    }

    /// Whether the direction set contains at least two distinct lines.
    pub fn more_than_one_line(&self) -> bool {
        match self {
            LineUnion::Real { arcs, lines } => {
                let mut singles: Vec<Rational64> = lines.clone();
                for a in arcs {
                    if a.lo < a.hi {
                        return true;
                    }
                    singles.push(a.lo);
                }
                singles.sort();
                singles.dedup();
                singles.len() > 1
            }
            LineUnion::Complex {
                disks,
                points,
                includes_vertical,
            } => {
                if disks.iter().any(|(_, r)| *r > 0.0) {
                    return true;
                }
                let mut n = points.len() + disks.len();
                if *includes_vertical {
                    n += 1;
                }
                n > 1
            }
        }
    }

    /// Exact membership of a rational direction angle (real mode only).
    pub fn contains_turns(&self, t: Rational64) -> bool {
        match self {
            LineUnion::Real { arcs, lines } => {
                lines.contains(&t) || arcs.iter().any(|a| a.lo <= t && t <= a.hi)
            }
            LineUnion::Complex { .. } => false,
        }
    }
}

/// Distance from `c` to the (complexified) line with real direction angle
/// `phi`: the modulus of the component along the unit normal.
pub fn dist_to_real_line(c: &PlanePoint, phi: f64) -> f64 {
    let (s, co) = (libm::sin(phi), libm::cos(phi));
    (-c.c1 * s + c.c2 * co).norm()
}

/// Distance from `c` to the complex line of slope `s` through the origin.
pub fn dist_to_slope_line(c: &PlanePoint, s: Cplx) -> f64 {
    (c.c2 - s * c.c1).norm() / libm::sqrt(1.0 + s.norm_sqr())
}

/// The direction of `c` as an angle in turns in `[0, 1/2)`, when `c` spans a
/// complexified real line (i.e. `c = z·u` for a real unit vector `u`).
fn real_direction_turns(c: &PlanePoint) -> Option<f64> {
    let scale = c.c1.norm() * c.c2.norm();
    if libm::fabs((c.c1 * c.c2.conj()).im) > MEMBER_TOL * (scale + c.norm2() * c.norm2()) {
        return None;
    }
    // Phase-normalize by the larger coordinate, then read the real direction.
    let w = if c.c1.norm() >= c.c2.norm() { c.c1 } else { c.c2 };
    let (a, b) = ((c.c1 / w).re, (c.c2 / w).re);
    let mut phi = libm::atan2(b, a);
    let pi = core::f64::consts::PI;
    while phi < 0.0 {
        phi += pi;
    }
    while phi >= pi {
        phi -= pi;
    }
    Some(phi / core::f64::consts::TAU)
}

/// Circular distance between two angles on the line circle (period 1/2 turns).
fn line_circle_delta(a: f64, b: f64) -> f64 {
    let mut d = libm::fabs(a - b) % 0.5;
    if d > 0.25 {
        d = 0.5 - d;
    }
    d
}

fn refine_min<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    // Ternary search; the sampled bracket is locally unimodal.
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) <= f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    f(0.5 * (lo + hi))
}

fn dist_to_arc(c: &PlanePoint, arc: &Arc) -> f64 {
    let lo = turns_to_radians(arc.lo);
    let hi = turns_to_radians(arc.hi);
    if hi <= lo {
        return dist_to_real_line(c, lo);
    }
    let step = (hi - lo) / DIST_SAMPLES as f64;
    let mut best_j = 0usize;
    let mut best = f64::INFINITY;
    for j in 0..=DIST_SAMPLES {
        let d = dist_to_real_line(c, lo + step * j as f64);
        if d < best {
            best = d;
            best_j = j;
        }
    }
    let wlo = lo + step * best_j.saturating_sub(1) as f64;
    let whi = lo + step * (best_j + 1).min(DIST_SAMPLES) as f64;
    refine_min(|phi| dist_to_real_line(c, phi), wlo, whi).min(best)
}

fn dist_to_disk(c: &PlanePoint, center: Cplx, radius: f64) -> f64 {
    let at = |s: Cplx| dist_to_slope_line(c, s);
    if radius == 0.0 {
        return at(center);
    }
    // Zero iff the slope of c is inside the disk.
    if c.c1.norm() > 0.0 {
        let s = c.c2 / c.c1;
        if (s - center).norm() <= radius {
            return 0.0;
        }
    }
    let mut best = at(center);
    let mut best_j = 0usize;
    let mut found_boundary = f64::INFINITY;
    for j in 0..DIST_SAMPLES {
        let tau = core::f64::consts::TAU * j as f64 / DIST_SAMPLES as f64;
        let s = center + Cplx::from_polar(radius, tau);
        let d = at(s);
        if d < found_boundary {
            found_boundary = d;
            best_j = j;
        }
    }
    let step = core::f64::consts::TAU / DIST_SAMPLES as f64;
    let tau0 = step * best_j as f64;
    let refined = refine_min(
        |tau| at(center + Cplx::from_polar(radius, tau)),
        tau0 - step,
        tau0 + step,
    );
    best = best.min(found_boundary).min(refined);
    best
}

/// Classifies the base point against `F` and estimates `d(c, F)`.
///
/// The origin is always `InF` (F is a union of lines through 0). The distance
/// is exact for isolated lines and accurate to about 1e-9 for arcs and disks
/// (dense sampling plus ternary refinement); it is 0 iff the point is `InF`.
pub fn classify_base_point(c: &PlanePoint, f: &LineUnion) -> (BaseClass, f64) {
    if c.is_zero() {
        return (BaseClass::InF, 0.0);
    }
    let scale = c.norm2();
    let mut dist = f64::INFINITY;
    match f {
        LineUnion::Real { arcs, lines } => {
            let dir = real_direction_turns(c);
            for l in lines {
                let phi = turns_to_radians(*l);
                let d = dist_to_real_line(c, phi);
                if d <= MEMBER_TOL * scale {
                    return (BaseClass::InF, 0.0);
                }
                dist = dist.min(d);
            }
            for a in arcs {
                if let Some(t) = dir {
                    let lo = a.lo.to_f64().expect("turns");
                    let hi = a.hi.to_f64().expect("turns");
                    let inside = (t >= lo - MEMBER_TOL && t <= hi + MEMBER_TOL)
                        || line_circle_delta(t, lo) <= MEMBER_TOL
                        || line_circle_delta(t, hi) <= MEMBER_TOL;
                    if inside {
                        return (BaseClass::InF, 0.0);
                    }
                }
                dist = dist.min(dist_to_arc(c, a));
            }
        }
        LineUnion::Complex {
            disks,
            points,
            includes_vertical,
        } => {
            if *includes_vertical {
                let d = c.c1.norm();
                if d <= MEMBER_TOL * scale {
                    return (BaseClass::InF, 0.0);
                }
                dist = dist.min(d);
            }
            let slope = if c.c1.norm() > MEMBER_TOL * scale {
                Some(c.c2 / c.c1)
            } else {
                None
            };
            for s0 in points {
                if let Some(s) = slope {
                    if (s - s0).norm() <= MEMBER_TOL * (1.0 + s0.norm()) * (1.0 + s.norm()) {
                        return (BaseClass::InF, 0.0);
                    }
                }
                dist = dist.min(dist_to_slope_line(c, *s0));
            }
            for (center, radius) in disks {
                if let Some(s) = slope {
                    if (s - center).norm() <= radius + MEMBER_TOL * (1.0 + center.norm() + radius)
                    {
                        return (BaseClass::InF, 0.0);
                    }
                }
                dist = dist.min(dist_to_disk(c, *center, *radius));
            }
        }
    }
    (BaseClass::NotInF, dist)
}
