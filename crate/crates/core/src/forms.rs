//! The separating sequence of linear forms over a line union: forms `f_n`
//! with `f_n(u_n) = 0`, `Ker f_n ⊂ F` and `‖f_n‖ = n^α`, so that `|f_n(x)|`
//! diverges off `F` and is recurrently small on `F`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lines::{classify_base_point, turns_to_radians, BaseClass, LineUnion};
use crate::net::{build_net, enumerate_points, KernelDir, NetPoint};
use crate::vector::{Field, PlanePoint};
use crate::Cplx;

/// A linear form `f(c) = a₁c₁ + a₂c₂` on the base plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearForm {
    pub a1: Cplx,
    pub a2: Cplx,
    /// Dual-Euclidean norm `√(|a₁|² + |a₂|²)`.
    pub norm: f64,
}

impl LinearForm {
    fn new(a1: Cplx, a2: Cplx) -> Self {
        LinearForm {
            a1,
            a2,
            norm: libm::hypot(a1.norm(), a2.norm()),
        }
    }

    pub fn eval(&self, c: &PlanePoint) -> Cplx {
        self.a1 * c.c1 + self.a2 * c.c2
    }
}

/// The forms `(f_n)` built over the enumerated net of `C = S ∩ F`.
#[derive(Debug, Clone)]
pub struct SeparatingSequence {
    f_set: LineUnion,
    points: Vec<NetPoint>,
    forms: Vec<LinearForm>,
    /// Norm exponent: `‖f_n‖ = n^α`.
    alpha: f64,
    /// Net decay exponent: the prefix of length `n` reaches every point of
    /// `C` within `K_net / n^decay`.
    decay: f64,
    k_net: f64,
    mode: Field,
}

impl SeparatingSequence {
    pub fn len(&self) -> usize {
        self.forms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forms.is_empty()
    }

    /// `f_n`, 1-based.
    pub fn form(&self, n: usize) -> Result<&LinearForm> {
        self.forms.get(n.wrapping_sub(1)).ok_or(Error::DepthExceeded {
            requested: n,
            available: self.forms.len(),
        })
    }

    /// `u_n`, 1-based.
    pub fn point(&self, n: usize) -> Result<&NetPoint> {
        self.points.get(n.wrapping_sub(1)).ok_or(Error::DepthExceeded {
            requested: n,
            available: self.points.len(),
        })
    }

    pub fn eval(&self, n: usize, c: &PlanePoint) -> Result<Cplx> {
        Ok(self.form(n)?.eval(c))
    }

    /// The analytic norm `n^α`, valid beyond the built prefix.
    pub fn norm_of(&self, n: usize) -> f64 {
        libm::pow(n as f64, self.alpha)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn k_net(&self) -> f64 {
        self.k_net
    }

    pub fn decay_exponent(&self) -> f64 {
        self.decay
    }

    pub fn f_set(&self) -> &LineUnion {
        &self.f_set
    }

    pub fn mode(&self) -> Field {
        self.mode
    }

    /// The best prefix index `p ≤ n` for a base direction: the net point
    /// closest to `c/‖c‖` in the Euclidean metric of the plane, ties broken
    /// toward the larger index. Returns `(p, distance)`, 1-based.
    pub fn best_prefix_index(&self, c: &PlanePoint, n: usize) -> Result<(usize, f64)> {
        if c.is_zero() {
            return Err(Error::InvalidParameter(format!(
                "best_prefix_index needs a nonzero base point"
            )));
        }
        let n = n.min(self.points.len());
        if n == 0 {
            return Err(Error::DepthExceeded {
                requested: 1,
                available: 0,
            });
        }
        let scale = 1.0 / c.norm2();
        let mut best = (1usize, f64::INFINITY);
        for (idx, p) in self.points[..n].iter().enumerate() {
            let d = libm::hypot(
                (c.c1 * scale - p.point.c1).norm(),
                (c.c2 * scale - p.point.c2).norm(),
            );
            if d <= best.1 {
                best = (idx + 1, d);
            }
        }
        Ok(best)
    }
}

fn form_for(dir: &KernelDir, scale: f64) -> LinearForm {
    match dir {
        KernelDir::RealTurns(t) => {
            let phi = turns_to_radians(*t);
            LinearForm::new(
                Cplx::new(-scale * libm::sin(phi), 0.0),
                Cplx::new(scale * libm::cos(phi), 0.0),
            )
        }
        KernelDir::Slope(s) => {
            let z = scale / libm::sqrt(1.0 + s.norm_sqr());
            LinearForm::new(s * z, Cplx::new(-z, 0.0))
        }
        KernelDir::Vertical => LinearForm::new(Cplx::new(scale, 0.0), Cplx::new(0.0, 0.0)),
    }
}

/// Builds the separating sequence of length `n_forms` over `F`.
///
/// The kernel of `f_n` is exactly the line through `u_n`, which lies inside
/// `F` by construction. Norm exponents: `α = 1/2` in real mode (d = 2),
/// `α = 1/6` in complex mode.
pub fn make_forms(f: &LineUnion, n_forms: usize) -> Result<SeparatingSequence> {
    let (mode, alpha, decay) = match f {
        LineUnion::Real { .. } => (Field::Real, 0.5, 1.0),
        LineUnion::Complex { .. } => (Field::Complex, 1.0 / 6.0, 1.0 / 3.0),
    };
    let (points, _) = enumerate_points(f, n_forms)?;
    let forms: Vec<LinearForm> = points
        .iter()
        .enumerate()
        .map(|(i, p)| form_for(&p.dir, libm::pow((i + 1) as f64, alpha)))
        .collect();
    let k_net = covering_constant(f, n_forms, decay)?;
    Ok(SeparatingSequence {
        f_set: f.clone(),
        points,
        forms,
        alpha,
        decay,
        k_net,
        mode,
    })
}

/// The empirical covering constant: the smallest `K` with the guarantee that
/// every `x ∈ C` has `min_{p ≤ n} ‖x - u_p‖ ≤ K / n^decay` for all `n ≤ N`.
/// Derived exactly from the level sizes: once level `k` is fully enumerated,
/// every point of `C` is within `2^{-k}` of the prefix.
fn covering_constant(f: &LineUnion, n: usize, decay: f64) -> Result<f64> {
    let mut cumulative: Vec<usize> = Vec::new();
    let mut total = 0usize;
    let mut k = 1u32;
    while total < n {
        total += build_net(f, k)?.points.len();
        cumulative.push(total);
        k += 1;
    }
    // One level beyond, so the band containing N is bounded.
    total += build_net(f, k)?.points.len();
    cumulative.push(total);

    // Before level 1 completes, only the diameter bound (≤ 2) is available.
    let mut k_net: f64 = 2.0 * libm::pow((cumulative[0].saturating_sub(1)).max(1) as f64, decay);
    for (i, window) in cumulative.windows(2).enumerate() {
        let k_level = (i + 1) as f64;
        let top = (window[1] - 1).min(n.max(window[0]));
        let bound = libm::pow(top as f64, decay) * libm::pow(2.0, -k_level);
        k_net = k_net.max(bound);
    }
    Ok(k_net)
}

/// Result of one sample check in [`verify_separation`].
#[derive(Debug, Clone, Copy)]
pub struct SampleCheck {
    pub min_value: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct SeparationReport {
    /// Off-F samples: `min_{N/2 ≤ n ≤ N} |f_n(x)| ≥ (N/2)^α · d(x, F)`.
    pub out_checks: Vec<SampleCheck>,
    /// On-F samples: `min_{n ≤ N} |f_n(x)| ≤ K_net · ‖x‖ · N^{α - decay}`.
    pub in_checks: Vec<SampleCheck>,
    /// Indices (into the given sample lists) violating the preconditions.
    pub misclassified_in: Vec<usize>,
    pub misclassified_out: Vec<usize>,
}

impl SeparationReport {
    pub fn all_pass(&self) -> bool {
        self.misclassified_in.is_empty()
            && self.misclassified_out.is_empty()
            && self.out_checks.iter().all(|c| c.pass)
            && self.in_checks.iter().all(|c| c.pass)
    }
}

/// Slack absorbing the documented 1e-9 accuracy of the distance estimate.
const DIST_SLACK: f64 = 1e-7;

pub fn verify_separation(
    seq: &SeparatingSequence,
    samples_in: &[PlanePoint],
    samples_out: &[PlanePoint],
    n: usize,
) -> Result<SeparationReport> {
    let n = n.min(seq.len());
    if n == 0 {
        return Err(Error::InvalidParameter(format!("N must be >= 1")));
    }
    let mut report = SeparationReport {
        out_checks: Vec::new(),
        in_checks: Vec::new(),
        misclassified_in: Vec::new(),
        misclassified_out: Vec::new(),
    };
    for (i, x) in samples_out.iter().enumerate() {
        let (class, dist) = classify_base_point(x, seq.f_set());
        if class != BaseClass::NotInF {
            report.misclassified_out.push(i);
            continue;
        }
        let lo = (n / 2).max(1);
        let min_value = (lo..=n)
            .map(|j| seq.form(j).expect("j <= len").eval(x).norm())
            .fold(f64::INFINITY, f64::min);
        let bound = libm::pow(lo as f64, seq.alpha()) * dist;
        report.out_checks.push(SampleCheck {
            min_value,
            bound,
            pass: min_value + DIST_SLACK * (1.0 + x.norm2()) >= bound,
        });
    }
    for (i, x) in samples_in.iter().enumerate() {
        let (class, _) = classify_base_point(x, seq.f_set());
        if class != BaseClass::InF {
            report.misclassified_in.push(i);
            continue;
        }
        if x.is_zero() {
            report.in_checks.push(SampleCheck {
                min_value: 0.0,
                bound: 0.0,
                pass: true,
            });
            continue;
        }
        let min_value = (1..=n)
            .map(|j| seq.form(j).expect("j <= len").eval(x).norm())
            .fold(f64::INFINITY, f64::min);
        let bound =
            seq.k_net() * x.norm2() * libm::pow(n as f64, seq.alpha() - seq.decay_exponent());
        report.in_checks.push(SampleCheck {
            min_value,
            bound,
            pass: min_value <= bound * (1.0 + 1e-9),
        });
    }
    Ok(report)
}
