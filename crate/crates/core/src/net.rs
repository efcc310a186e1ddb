//! Nets on `C = S ∩ F` (unit directions inside the line union) and their
//! enumeration into a single sequence: first every point of the 2^{-1}-net,
//! then every point of the 2^{-2}-net, and so on.

use alloc::format;
use alloc::vec::Vec;

use num_rational::Rational64;

use crate::error::{Error, Result};
use crate::lines::{turns_to_radians, LineUnion};
use crate::vector::{Field, PlanePoint};
use crate::Cplx;

const MAX_LEVEL: u32 = 40;
const MAX_LEVEL_POINTS: usize = 1 << 22;

/// Where a net point's line sits inside `F`; carries everything needed to
/// build a form vanishing on that line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelDir {
    /// Real mode: the line's direction angle in exact rational turns.
    RealTurns(Rational64),
    /// Complex mode: the line `{(z, s·z)}` for slope `s`.
    Slope(Cplx),
    /// Complex mode: the line `c₁ = 0`.
    Vertical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetPoint {
    pub point: PlanePoint,
    pub dir: KernelDir,
}

/// One `2^{-k}`-net of `C`.
#[derive(Debug, Clone)]
pub struct NetLevel {
    pub k: u32,
    pub mesh: f64,
    pub points: Vec<NetPoint>,
}

fn real_unit(turns: Rational64, negate: bool) -> NetPoint {
    let phi = turns_to_radians(turns);
    let sign = if negate { -1.0 } else { 1.0 };
    NetPoint {
        point: PlanePoint::real(sign * libm::cos(phi), sign * libm::sin(phi)),
        dir: KernelDir::RealTurns(turns),
    }
}

fn slope_unit(s: Cplx, phase: f64) -> NetPoint {
    let scale = 1.0 / libm::sqrt(1.0 + s.norm_sqr());
    let z = Cplx::from_polar(scale, phase);
    NetPoint {
        point: PlanePoint {
            c1: z,
            c2: s * z,
            field: Field::Complex,
        },
        dir: KernelDir::Slope(s),
    }
}

fn vertical_unit(phase: f64) -> NetPoint {
    NetPoint {
        point: PlanePoint {
            c1: Cplx::new(0.0, 0.0),
            c2: Cplx::from_polar(1.0, phase),
            field: Field::Complex,
        },
        dir: KernelDir::Vertical,
    }
}

/// Phase circle of one complex line, sampled at arc spacing ≤ `mesh`.
fn push_phase_circle(out: &mut Vec<NetPoint>, mesh: f64, make: impl Fn(f64) -> NetPoint) {
    let n = libm::ceil(core::f64::consts::TAU / mesh) as usize;
    for j in 0..n {
        out.push(make(core::f64::consts::TAU * j as f64 / n as f64));
    }
}

/// Builds the `2^{-k}`-net of `C = S ∩ F`.
///
/// Real mode: each arc contributes angles spaced ≤ `2^{-k}` in arc length
/// including both endpoints, each angle as its two antipodal unit vectors;
/// isolated lines contribute their two unit vectors at every level.
/// Complex mode: each line's phase circle at matching resolution; slope disks
/// as a product grid (slope plane × phase) with per-dimension spacing
/// `2^{-k}/2`, which keeps the image mesh below `2^{-k}`.
pub fn build_net(f: &LineUnion, k: u32) -> Result<NetLevel> {
    if k == 0 || k > MAX_LEVEL {
        return Err(Error::InvalidParameter(format!(
            "net level k = {k} outside 1..={MAX_LEVEL}"
        )));
    }
    let mesh = libm::pow(2.0, -(k as f64));
    let mut points = Vec::new();
    match f {
        LineUnion::Real { arcs, lines } => {
            for a in arcs {
                if a.lo == a.hi {
                    points.push(real_unit(a.lo, false));
                    points.push(real_unit(a.lo, true));
                    continue;
                }
                let span = a.hi - a.lo;
                let span_rad = turns_to_radians(span);
                let nseg = libm::ceil(span_rad / mesh) as i64;
                for j in 0..=nseg {
                    let t = a.lo + span * Rational64::new(j, nseg);
                    points.push(real_unit(t, false));
                    points.push(real_unit(t, true));
                }
            }
            for l in lines {
                points.push(real_unit(*l, false));
                points.push(real_unit(*l, true));
            }
        }
        LineUnion::Complex {
            disks,
            points: slope_points,
            includes_vertical,
        } => {
            for (center, radius) in disks {
                if *radius == 0.0 {
                    push_phase_circle(&mut points, mesh, |ph| slope_unit(*center, ph));
                    continue;
                }
                let h = mesh / 2.0;
                let steps = libm::ceil(radius / h) as i64;
                let mut slopes: Vec<Cplx> = Vec::new();
                for a in -steps..=steps {
                    for b in -steps..=steps {
                        let off = Cplx::new(a as f64 * h, b as f64 * h);
                        if off.norm() <= *radius {
                            slopes.push(center + off);
                        }
                    }
                }
                // Boundary circle so the closed disk stays covered.
                let nb = libm::ceil(core::f64::consts::TAU * radius / h) as usize;
                for j in 0..nb.max(1) {
                    let tau = core::f64::consts::TAU * j as f64 / nb.max(1) as f64;
                    slopes.push(center + Cplx::from_polar(*radius, tau));
                }
                for s in slopes {
                    push_phase_circle(&mut points, h, |ph| slope_unit(s, ph));
                    if points.len() > MAX_LEVEL_POINTS {
                        return Err(Error::SizeCapExceeded(format!(
                            "net level {k} exceeds {MAX_LEVEL_POINTS} points"
                        )));
                    }
                }
            }
            for s in slope_points {
                push_phase_circle(&mut points, mesh, |ph| slope_unit(*s, ph));
            }
            if *includes_vertical {
                push_phase_circle(&mut points, mesh, vertical_unit);
            }
        }
    }
    if points.len() > MAX_LEVEL_POINTS {
        return Err(Error::SizeCapExceeded(format!(
            "net level {k} exceeds {MAX_LEVEL_POINTS} points"
        )));
    }
    Ok(NetLevel { k, mesh, points })
}

/// The concatenation H₁, H₂, … truncated to `n` points, together with the
/// cumulative level sizes actually used (one entry per completed level).
pub fn enumerate_points(f: &LineUnion, n: usize) -> Result<(Vec<NetPoint>, Vec<usize>)> {
    if n == 0 {
        return Err(Error::InvalidParameter(format!("N must be >= 1")));
    }
    let mut out = Vec::with_capacity(n);
    let mut cumulative = Vec::new();
    let mut k = 1;
    while out.len() < n {
        let level = build_net(f, k)?;
        for p in level.points {
            out.push(p);
            if out.len() == n {
                break;
            }
        }
        cumulative.push(out.len().min(n));
        k += 1;
    }
    Ok((out, cumulative))
}
