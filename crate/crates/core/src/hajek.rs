//! Cycle-and-bump operators over symmetric norms: block cycles of length
//! `H_k = 2(m_k + m_{k+1})`, bump vectors
//! `v_k = ε_k (Σ_{i≤m_k} e_{i,k} − Σ_{m_k<i≤2m_k} e_{i,k})`, and the
//! partial-sum profiles `w_t = (I + S + … + S^{t−1}) w`.
//!
//! Everything reduces to the tent map `W(x) = prefix sum of w`: the cycle
//! shift gives `w_t(j) = W(j) − W((j − t) mod H)` exactly, so both explicit
//! coefficients and closed-form norm profiles are O(m) or better at any
//! block size.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::forms::SeparatingSequence;
use crate::lines::{classify_base_point, BaseClass};
use crate::powersum::power_sum_arith;
use crate::vector::{Field, NormSpec, PlanePoint, SparseVector};

/// Cycles longer than this are never materialized coordinate by coordinate.
pub const MATERIALIZE_CAP: u64 = 1 << 20;

/// Exhaustion cap for [`bump_norm_check`].
const EXHAUSTION_CAP: u64 = 100_000;

/// The tent map: prefix sums of `w` on one cycle, `W(x) = x` on `[0, m]`,
/// `2m − x` on `[m, 2m]`, `0` on `[2m, H]`.
fn tent(x: u64, m: u64) -> i64 {
    if x <= m {
        x as i64
    } else if x <= 2 * m {
        (2 * m - x) as i64
    } else {
        0
    }
}

/// The explicit vector `w_t` on one cycle of length `H` (coordinates
/// `1..=H`), with `t` reduced mod `H`.
pub fn cycle_w_t(m: u64, h: u64, t: &BigUint) -> Result<SparseVector> {
    if m == 0 || h < 4 * m {
        return Err(Error::InvalidParameter(format!(
            "cycle needs H >= 4m >= 4, got m = {m}, H = {h}"
        )));
    }
    if h > MATERIALIZE_CAP {
        return Err(Error::SizeCapExceeded(format!(
            "cycle of length {h} exceeds the materialization cap"
        )));
    }
    let tr = (t % h).to_u64().expect("reduced mod u64 cycle");
    let mut v = SparseVector::new(Field::Real);
    if tr == 0 {
        return Ok(v);
    }
    for j in 1..=h {
        let shifted = (j + h - tr % h) % h;
        let c = tent(j, m) - tent(shifted, m);
        if c != 0 {
            v.set(j, num_complex::Complex64::new(c as f64, 0.0))?;
        }
    }
    Ok(v)
}

/// One signed arithmetic run of profile values.
#[derive(Debug, Clone, Copy)]
struct Run {
    start: f64,
    step: f64,
    count: f64,
}

/// The `Σ|v|^p` mass (or max for p = ∞) of a signed arithmetic run.
fn run_mass(run: Run, p: NormSpec) -> Result<f64> {
    if run.count < 1.0 {
        return Ok(0.0);
    }
    let (s0, s) = if run.step < 0.0 {
        (run.start + (run.count - 1.0) * run.step, -run.step)
    } else {
        (run.start, run.step)
    };
    let end = s0 + (run.count - 1.0) * s.max(0.0);
    if p.is_sup() {
        return Ok(libm::fabs(s0).max(libm::fabs(end)));
    }
    if s == 0.0 {
        return Ok(run.count * p.mass(libm::fabs(s0)));
    }
    let mut mass = 0.0;
    let nneg = if s0 < 0.0 {
        libm::ceil(-s0 / s).min(run.count)
    } else {
        0.0
    };
    if nneg > 0.0 {
        let last_neg = s0 + (nneg - 1.0) * s;
        mass += power_sum_arith(-last_neg, -s0, s, p.p())?;
    }
    if end >= 0.0 {
        mass += power_sum_arith(s0 + nneg * s, end, s, p.p())?;
    }
    Ok(mass)
}

/// The signed value runs of `w_t` for `0 ≤ t ≤ H/2` with `H ≥ 4m`, so the
/// two tent windows never wrap.
fn profile_runs(m: f64, t: f64) -> Vec<Run> {
    if t == 0.0 {
        return Vec::new();
    }
    if t >= 2.0 * m {
        // Two disjoint tents.
        return alloc::vec![
            Run { start: 1.0, step: 1.0, count: m - 1.0 },
            Run { start: 1.0, step: 1.0, count: m - 1.0 },
            Run { start: 1.0, step: 1.0, count: m - 1.0 },
            Run { start: 1.0, step: 1.0, count: m - 1.0 },
            Run { start: m, step: 0.0, count: 2.0 },
        ];
    }
    if t <= m {
        alloc::vec![
            Run { start: 1.0, step: 1.0, count: t },
            Run { start: t, step: 0.0, count: m - t },
            Run { start: t - 2.0, step: -2.0, count: t },
            Run { start: -t, step: 0.0, count: m - t },
            Run { start: 1.0, step: 1.0, count: t - 1.0 },
        ]
    } else {
        alloc::vec![
            Run { start: 1.0, step: 1.0, count: m },
            Run { start: 2.0 * m - t, step: 1.0, count: t - m },
            Run { start: 2.0 * m - t - 2.0, step: -2.0, count: 2.0 * m - t },
            Run { start: 2.0 * m + 1.0 - t, step: 1.0, count: t - m },
            Run { start: 1.0, step: 1.0, count: m - 1.0 },
        ]
    }
}

/// `‖w_t‖_p` on the cycle `(m, H)` via the closed profile, valid at every
/// block size. Uses the reflection `w_t = −S^t w_{H−t}` (equal profile) to
/// keep the windows wrap-free.
pub fn norm_w_t(m: &BigUint, h: &BigUint, t: &BigUint, p: NormSpec) -> Result<f64> {
    if m.is_zero() || h < &(m * 4u32) {
        return Err(Error::InvalidParameter(alloc::string::String::from(
            "cycle needs H >= 4m >= 4",
        )));
    }
    let mut tr = t % h;
    if &(&tr * 2u32) > h {
        tr = h - tr;
    }
    let m_f = m.to_f64().unwrap_or(f64::INFINITY);
    let t_f = tr.to_f64().unwrap_or(f64::INFINITY);
    let runs = profile_runs(m_f, t_f);
    let masses: Result<Vec<f64>> = runs.into_iter().map(|r| run_mass(r, p)).collect();
    Ok(p.of_masses(masses?.into_iter()))
}

/// Exhaustive report of Lemma-style bump facts over one small cycle.
#[derive(Debug, Clone)]
pub struct BumpReport {
    pub norm_w: f64,
    pub min_in_window: f64,
    pub max_in_window: f64,
    pub max_overall: f64,
    /// `‖w_t‖ ≥ (m/2)·‖w‖` holds across the whole window.
    pub lower_bound_holds: bool,
    /// The overall maximum of `t ↦ ‖w_t‖` is attained inside the window.
    pub max_attained_in_window: bool,
    /// The decreasing rearrangement is one fixed multiset across the window.
    pub rearrangement_constant: bool,
    /// `w_H = 0` exactly.
    pub w_h_is_zero: bool,
}

impl BumpReport {
    pub fn all_pass(&self) -> bool {
        self.lower_bound_holds
            && self.max_attained_in_window
            && self.rearrangement_constant
            && self.w_h_is_zero
    }
}

/// Sweeps every `t ∈ [1, H]` on a small cycle and checks the window facts:
/// `‖w_t‖ ≥ (m/2)‖w‖` and a constant rearrangement for `2m ≤ t ≤ H − 2m`,
/// with the overall max inside that window.
pub fn bump_norm_check(m: u64, h: u64, p: NormSpec) -> Result<BumpReport> {
    if h > EXHAUSTION_CAP {
        return Err(Error::SizeCapExceeded(format!(
            "exhaustive sweep capped at H = {EXHAUSTION_CAP}, got {h}"
        )));
    }
    let w = cycle_w_t(m, h, &BigUint::one())?;
    let norm_w = crate::vector::lp_norm(&w, p);
    let window_profile = crate::vector::decreasing_rearrangement(&cycle_w_t(
        m,
        h,
        &BigUint::from(2 * m),
    )?);
    let mut report = BumpReport {
        norm_w,
        min_in_window: f64::INFINITY,
        max_in_window: 0.0,
        max_overall: 0.0,
        lower_bound_holds: true,
        max_attained_in_window: true,
        rearrangement_constant: true,
        w_h_is_zero: cycle_w_t(m, h, &BigUint::from(h))?.is_zero(),
    };
    for t in 1..=h {
        let wt = cycle_w_t(m, h, &BigUint::from(t))?;
        let norm = crate::vector::lp_norm(&wt, p);
        report.max_overall = report.max_overall.max(norm);
        if t >= 2 * m && t <= h - 2 * m {
            report.min_in_window = report.min_in_window.min(norm);
            report.max_in_window = report.max_in_window.max(norm);
            if norm + 1e-12 < m as f64 / 2.0 * norm_w {
                report.lower_bound_holds = false;
            }
            let u = crate::vector::decreasing_rearrangement(&wt);
            if u != window_profile {
                report.rearrangement_constant = false;
            }
        }
    }
    if report.max_overall > report.max_in_window + 1e-12 {
        report.max_attained_in_window = false;
    }
    Ok(report)
}

/// The block layout: `a₁ = 1`, `1 + a_{k+1} = (1 + a_k)·max(2,
/// ⌈(k+1)²‖f_{k+1}‖⌉)`, `m_k = a₁⋯a_k`, `H_k = 2(m_k + m_{k+1})`, with the
/// normalizers `ε_k = 1/‖w_{2m_k}‖_p` making each bump plateau at norm 1.
#[derive(Debug, Clone)]
pub struct HSLayout {
    a: Vec<BigUint>,
    m: Vec<BigUint>,
    h: Vec<BigUint>,
    eps: Vec<f64>,
    p: NormSpec,
}

impl HSLayout {
    /// Number of built blocks.
    pub fn blocks(&self) -> usize {
        self.h.len()
    }

    pub fn p(&self) -> NormSpec {
        self.p
    }

    /// `a_k`, 1-based, `k ≤ blocks + 1`.
    pub fn a(&self, k: usize) -> Result<&BigUint> {
        self.a.get(k.wrapping_sub(1)).ok_or(Error::DepthExceeded {
            requested: k,
            available: self.a.len(),
        })
    }

    pub fn m(&self, k: usize) -> Result<&BigUint> {
        self.m.get(k.wrapping_sub(1)).ok_or(Error::DepthExceeded {
            requested: k,
            available: self.m.len(),
        })
    }

    pub fn h(&self, k: usize) -> Result<&BigUint> {
        self.h.get(k.wrapping_sub(1)).ok_or(Error::DepthExceeded {
            requested: k,
            available: self.h.len(),
        })
    }

    pub fn eps(&self, k: usize) -> Result<f64> {
        self.eps
            .get(k.wrapping_sub(1))
            .copied()
            .ok_or(Error::DepthExceeded {
                requested: k,
                available: self.eps.len(),
            })
    }

    /// `‖v_{k,t}‖_p = ε_k·‖w_t‖_p` on block `k`, any `t`.
    pub fn bump_orbit_norm(&self, k: usize, t: &BigUint) -> Result<f64> {
        Ok(self.eps(k)? * norm_w_t(self.m(k)?, self.h(k)?, t, self.p)?)
    }
}

/// Builds `depth` blocks; errors if any `H_k` would exceed the configured
/// digit budget implied by `f64` norm evaluation (the profile norms go
/// infinite first, which is rejected here).
pub fn build_hs_layout(forms: &SeparatingSequence, depth: usize, p: NormSpec) -> Result<HSLayout> {
    if depth < 2 {
        return Err(Error::InvalidParameter(format!(
            "layout depth must be >= 2, got {depth}"
        )));
    }
    let mut a: Vec<BigUint> = alloc::vec![BigUint::one()];
    let mut one_plus = BigUint::from(2u32);
    for k in 1..=depth {
        let mult = libm::ceil(((k + 1) * (k + 1)) as f64 * forms.norm_of(k + 1)).max(2.0);
        let mult = BigUint::from(mult as u64);
        let next_one_plus = &one_plus * &mult;
        a.push(&next_one_plus - 1u32);
        one_plus = next_one_plus;
    }
    let mut m: Vec<BigUint> = Vec::with_capacity(a.len());
    let mut acc = BigUint::one();
    for ak in &a {
        acc *= ak;
        m.push(acc.clone());
    }
    let mut h: Vec<BigUint> = Vec::with_capacity(depth);
    for k in 0..depth {
        h.push((&m[k] + &m[k + 1]) * 2u32);
    }
    // Divisibility is a consequence of the recipe; verify rather than assume.
    for k in 0..depth - 1 {
        if !(&h[k + 1] % &h[k]).is_zero() {
            return Err(Error::InvalidParameter(format!(
                "layout recipe failed H_{} | H_{}",
                k + 1,
                k + 2
            )));
        }
    }
    let mut eps = Vec::with_capacity(depth);
    for k in 0..depth {
        let norm = norm_w_t(&m[k], &h[k], &(&m[k] * 2u32), p)?;
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::SizeCapExceeded(format!(
                "block {} profile norm is not representable",
                k + 1
            )));
        }
        eps.push(1.0 / norm);
    }
    Ok(HSLayout { a, m, h, eps, p })
}

/// A vector over the plane plus lazily materialized blocks; block
/// coordinates are 0-based local cycle positions.
#[derive(Debug, Clone, PartialEq)]
pub struct HsVector {
    pub plane: (f64, f64),
    blocks: BTreeMap<usize, BTreeMap<BigUint, f64>>,
}

impl HsVector {
    pub fn new() -> Self {
        HsVector {
            plane: (0.0, 0.0),
            blocks: BTreeMap::new(),
        }
    }

    pub fn plane_point(&self) -> PlanePoint {
        PlanePoint::real(self.plane.0, self.plane.1)
    }

    pub fn set_block_entry(&mut self, k: usize, local: BigUint, value: f64) {
        let block = self.blocks.entry(k).or_default();
        if value == 0.0 {
            block.remove(&local);
            if block.is_empty() {
                self.blocks.remove(&k);
            }
        } else {
            block.insert(local, value);
        }
    }

    pub fn add_block_entry(&mut self, k: usize, local: BigUint, value: f64) {
        let current = self
            .blocks
            .get(&k)
            .and_then(|b| b.get(&local))
            .copied()
            .unwrap_or(0.0);
        self.set_block_entry(k, local, current + value);
    }

    pub fn block(&self, k: usize) -> Option<&BTreeMap<BigUint, f64>> {
        self.blocks.get(&k)
    }

    pub fn block_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.blocks.keys().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.plane == (0.0, 0.0) && self.blocks.is_empty()
    }

    pub fn sub(&self, other: &HsVector) -> HsVector {
        let mut out = self.clone();
        out.plane.0 -= other.plane.0;
        out.plane.1 -= other.plane.1;
        for (&k, block) in &other.blocks {
            for (local, v) in block {
                out.add_block_entry(k, local.clone(), -v);
            }
        }
        out
    }

    /// `‖x‖_p` over the plane and all materialized block entries.
    pub fn norm(&self, p: NormSpec) -> f64 {
        let mut masses = alloc::vec![p.mass(libm::fabs(self.plane.0)), p.mass(libm::fabs(self.plane.1))];
        for block in self.blocks.values() {
            for v in block.values() {
                masses.push(p.mass(libm::fabs(*v)));
            }
        }
        p.of_masses(masses.into_iter())
    }
}

impl Default for HsVector {
    fn default() -> Self {
        HsVector::new()
    }
}

/// `S^t x`: plane fixed, each block entry shifted `t` positions around its
/// cycle (exact big-integer reduction per block).
pub fn s_power_hs(x: &HsVector, t: &BigUint, layout: &HSLayout) -> Result<HsVector> {
    let mut out = HsVector::new();
    out.plane = x.plane;
    for (&k, block) in &x.blocks {
        let h = layout.h(k)?;
        let shift = t % h;
        for (local, v) in block {
            out.set_block_entry(k, (local + &shift) % h, *v);
        }
    }
    Ok(out)
}

pub fn apply_s_hs(x: &HsVector, layout: &HSLayout) -> Result<HsVector> {
    s_power_hs(x, &BigUint::one(), layout)
}

/// Adds `scale · w_t` of block `k` into `out` (0-based local coordinates).
fn add_bump(
    out: &mut HsVector,
    layout: &HSLayout,
    k: usize,
    t: &BigUint,
    scale: f64,
) -> Result<()> {
    let m = layout
        .m(k)?
        .to_u64()
        .filter(|&m| 4 * m <= MATERIALIZE_CAP)
        .ok_or_else(|| {
            Error::SizeCapExceeded(format!("block {k} too large to materialize"))
        })?;
    let h = layout.h(k)?;
    let tr = t % h;
    if tr.is_zero() {
        return Ok(());
    }
    // Nonzero coefficients live where either tent is nonzero: local
    // positions [0, 2m−2] and [t̃, t̃+2m−2] mod H.
    let mut positions: Vec<BigUint> = Vec::new();
    for j in 0..(2 * m).min(h.to_u64().unwrap_or(u64::MAX)) {
        positions.push(BigUint::from(j));
    }
    for j in 0..(2 * m) {
        positions.push((&tr + BigUint::from(j)) % h);
    }
    positions.sort();
    positions.dedup();
    for local in positions {
        // Global 1-based cycle coordinate is local + 1.
        let x1 = &local + 1u32;
        let shifted = (&x1 + h - &tr) % h;
        let tent_at = |v: &BigUint| -> i64 {
            v.to_u64().map(|u| tent(u, m)).unwrap_or(0)
        };
        let c = tent_at(&x1) - tent_at(&shifted);
        if c != 0 {
            out.add_block_entry(k, local, scale * c as f64);
        }
    }
    Ok(())
}

/// `R^t x = S^t x + Σ_k f_k(Px)·v_{k,t}` with blocks `k ≤ trunc_blocks`
/// explicit and the rest bounded through `‖v_{k,t}‖ ≤ min(1, 2t/m_k)`.
pub fn iterate_r_hs(
    x: &HsVector,
    t: &BigUint,
    layout: &HSLayout,
    forms: &SeparatingSequence,
    trunc_blocks: usize,
) -> Result<(HsVector, f64)> {
    let mut out = s_power_hs(x, t, layout)?;
    let base = x.plane_point();
    if base.is_zero() || t.is_zero() {
        return Ok((out, 0.0));
    }
    let top = trunc_blocks.min(layout.blocks()).min(forms.len());
    let mut tail = 0.0;
    for k in 1..=top {
        let f_val = forms.eval(k, &base)?.re;
        if f_val != 0.0 {
            match add_bump(&mut out, layout, k, t, f_val * layout.eps(k)?) {
                Ok(()) => {}
                // A block too large to materialize still has an exact
                // closed-profile norm; charge it to the tail.
                Err(Error::SizeCapExceeded(_)) => {
                    tail += libm::fabs(f_val) * layout.bump_orbit_norm(k, t)?;
                }
                Err(e) => return Err(e),
            }
        }
    }
    tail += bump_tail_bound(layout, forms, top, t, base.norm2());
    Ok((out, tail))
}

/// `Σ_{k > from_k} ‖f_k‖·scale·min(1, 2t/m_k)`, extended beyond the layout
/// with the growth floor `m_{k+1} ≥ 2·m_k`.
fn bump_tail_bound(
    layout: &HSLayout,
    forms: &SeparatingSequence,
    from_k: usize,
    t: &BigUint,
    scale: f64,
) -> f64 {
    if scale == 0.0 || t.is_zero() {
        return 0.0;
    }
    // m_k is known up to blocks + 1; beyond that the recipe guarantees at
    // least a doubling per step, a crude but valid floor.
    let known = layout.m.len();
    let t2 = t * 2u32;
    let t_f = t.to_f64().unwrap_or(f64::INFINITY);
    let inv_last = layout.m[known - 1].to_f64().map(|v| 1.0 / v).unwrap_or(0.0);
    let mut sum = 0.0;
    for k in (from_k + 1)..(from_k + 1 + 10_000) {
        let amp = if k <= known {
            let m_k = &layout.m[k - 1];
            if m_k <= &t2 {
                1.0
            } else {
                2.0 * t_f / m_k.to_f64().unwrap_or(f64::INFINITY)
            }
        } else {
            2.0 * t_f * inv_last / libm::pow(2.0, (k - known) as f64)
        };
        let term = amp.min(1.0) * forms.norm_of(k) * scale;
        sum += term;
        if k > known && (term <= sum * 1e-18 || term == 0.0) {
            break;
        }
    }
    sum
}

/// Certified interval for `‖R^t x‖_p`, exploiting disjoint block supports:
/// untouched blocks contribute the closed-profile mass exactly even when far
/// beyond any materialization cap.
pub fn hs_orbit_norm(
    x: &HsVector,
    t: &BigUint,
    layout: &HSLayout,
    forms: &SeparatingSequence,
    trunc_blocks: usize,
) -> Result<(f64, f64)> {
    let p = layout.p();
    let base = x.plane_point();
    let shifted = s_power_hs(x, t, layout)?;
    let top = trunc_blocks.min(layout.blocks()).min(forms.len());
    let mut lo_masses: Vec<f64> = alloc::vec![
        p.mass(libm::fabs(x.plane.0)),
        p.mass(libm::fabs(x.plane.1)),
    ];
    let mut hi_masses = lo_masses.clone();
    for k in 1..=top {
        let f_val = if base.is_zero() || t.is_zero() {
            0.0
        } else {
            forms.eval(k, &base)?.re
        };
        let has_support = shifted.block(k).is_some();
        if !has_support {
            if f_val != 0.0 {
                let mass = p.mass(libm::fabs(f_val) * layout.bump_orbit_norm(k, t)?);
                lo_masses.push(mass);
                hi_masses.push(mass);
            }
            continue;
        }
        let block_norm = {
            let mut masses = Vec::new();
            if let Some(b) = shifted.block(k) {
                for v in b.values() {
                    masses.push(p.mass(libm::fabs(*v)));
                }
            }
            p.of_masses(masses.into_iter())
        };
        if f_val == 0.0 {
            lo_masses.push(p.mass(block_norm));
            hi_masses.push(p.mass(block_norm));
            continue;
        }
        // Try the exact combination; fall back to a triangle interval when
        // the bump cannot be materialized.
        let mut combined = HsVector::new();
        if let Some(b) = shifted.block(k) {
            for (local, v) in b {
                combined.set_block_entry(k, local.clone(), *v);
            }
        }
        match add_bump(&mut combined, layout, k, t, f_val * layout.eps(k)?) {
            Ok(()) => {
                let mut masses = Vec::new();
                if let Some(b) = combined.block(k) {
                    for v in b.values() {
                        masses.push(p.mass(libm::fabs(*v)));
                    }
                }
                let norm = p.of_masses(masses.into_iter());
                lo_masses.push(p.mass(norm));
                hi_masses.push(p.mass(norm));
            }
            Err(Error::SizeCapExceeded(_)) => {
                let bump = libm::fabs(f_val) * layout.bump_orbit_norm(k, t)?;
                lo_masses.push(p.mass((block_norm - bump).max(0.0)));
                hi_masses.push(p.mass(block_norm + bump));
            }
            Err(e) => return Err(e),
        }
    }
    let tail = if base.is_zero() || t.is_zero() {
        0.0
    } else {
        bump_tail_bound(layout, forms, top, t, base.norm2())
    };
    let lo = (p.of_masses(lo_masses.into_iter()) - tail).max(0.0);
    let hi = p.of_masses(hi_masses.into_iter()) + tail;
    Ok((lo, hi))
}

/// One row of [`hs_divergence_recurrence_report`].
#[derive(Debug, Clone)]
pub enum HsTraceRow {
    /// `t` in block `k`'s plateau window: `‖R^t x‖ ≥ |f_k(Px)| − ‖x‖`.
    Divergent {
        t: BigUint,
        k: usize,
        lower_bound: f64,
        orbit_lo: f64,
    },
    /// Return time `t = H_{k_n−1}` with a certified bound on `‖R^t x − x‖`.
    Recurrent { t: BigUint, k_n: usize, bound: f64 },
}

#[derive(Debug, Clone)]
pub struct HsReport {
    pub in_f: bool,
    pub rows: Vec<HsTraceRow>,
}

/// Divergence/recurrence trace over the first `horizon` blocks.
///
/// Off `F`, each row takes `t = 2m_k` (inside the plateau window
/// `[2m_k, H_k − 2m_k]`, where `‖v_{k,t}‖ = 1`) and records the
/// disjoint-support lower bound next to the certified orbit norm. On `F`,
/// each row takes the return time `H_{k_n−1}`: blocks below `k_n` come back
/// exactly (`H_j | H_{k_n−1}`), the rest is summed explicitly plus tail.
pub fn hs_divergence_recurrence_report(
    x: &HsVector,
    layout: &HSLayout,
    forms: &SeparatingSequence,
    horizon: usize,
) -> Result<HsReport> {
    let p = layout.p();
    let base = x.plane_point();
    let (class, _) = classify_base_point(&base, forms.f_set());
    let horizon = horizon.min(layout.blocks()).min(forms.len());
    let mut rows = Vec::new();
    if class == BaseClass::NotInF {
        let x_norm = x.norm(p);
        for k in 1..=horizon {
            let t = layout.m(k)? * 2u32;
            let lower_bound = forms.eval(k, &base)?.norm() - x_norm;
            let (orbit_lo, _) = hs_orbit_norm(x, &t, layout, forms, horizon)?;
            rows.push(HsTraceRow::Divergent {
                t,
                k,
                lower_bound,
                orbit_lo,
            });
        }
        return Ok(HsReport { in_f: false, rows });
    }
    for n in 1..=horizon {
        let (k_n, t) = if base.is_zero() {
            (0, layout.h(n)?.clone())
        } else {
            let (k_n, _) = forms.best_prefix_index(&base, n)?;
            (k_n, layout.h(k_n.max(2) - 1)?.clone())
        };
        // S^t x - x, exact per block.
        let s_t = s_power_hs(x, &t, layout)?;
        let mut bound = s_t.sub(x).norm(p);
        if !base.is_zero() {
            for k in 1..=horizon {
                let f_val = forms.eval(k, &base)?.norm();
                if f_val != 0.0 {
                    bound += f_val * layout.bump_orbit_norm(k, &t)?;
                }
            }
            bound += bump_tail_bound(layout, forms, horizon, &t, base.norm2());
        }
        rows.push(HsTraceRow::Recurrent { t, k_n, bound });
    }
    Ok(HsReport { in_f: true, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::make_forms;
    use crate::lines::{Arc, LineUnion};
    use crate::vector::lp_norm;
    use num_rational::Rational64;
    use rand::{Rng, SeedableRng};

    fn rat(a: i64, b: i64) -> Rational64 {
        Rational64::new(a, b)
    }

    fn arc_forms(n: usize) -> SeparatingSequence {
        let f = LineUnion::real(vec![Arc { lo: rat(0, 1), hi: rat(1, 4) }], vec![]).unwrap();
        make_forms(&f, n).unwrap()
    }

    fn brute_w_t(m: u64, h: u64, t: u64) -> SparseVector {
        // [DERIVED] oracle: literally sum t shifted copies of w.
        let mut acc: Vec<f64> = alloc::vec![0.0; h as usize];
        for l in 0..t {
            for i in 0..h {
                let pos = ((i + l) % h) as usize;
                let idx = i + 1;
                if idx <= m {
                    acc[pos] += 1.0;
                } else if idx <= 2 * m {
                    acc[pos] -= 1.0;
                }
            }
        }
        let mut v = SparseVector::new(Field::Real);
        for (i, &c) in acc.iter().enumerate() {
            if c != 0.0 {
                v.set(i as u64 + 1, num_complex::Complex64::new(c, 0.0)).unwrap();
            }
        }
        v
    }

    #[test]
    fn cycle_w_t_matches_brute_force() {
        for m in [1u64, 2, 3, 5] {
            for h in [(4 * m).max(4), 4 * m + 2, 24, 40] {
                if h < 4 * m {
                    continue;
                }
                for t in 0..=h + 5 {
                    let got = cycle_w_t(m, h, &BigUint::from(t)).unwrap();
                    let want = brute_w_t(m, h, t);
                    assert_eq!(got, want, "m = {m}, H = {h}, t = {t}");
                }
            }
        }
    }

    #[test]
    fn two_bump_profile_for_m_two() {
        let h = 24u64;
        for t in [4u64, 10, h - 4] {
            let wt = cycle_w_t(2, h, &BigUint::from(t)).unwrap();
            let p1 = NormSpec::new(1.0).unwrap();
            assert_eq!(lp_norm(&wt, p1), 8.0, "t = {t}");
            assert_eq!(wt.get(1).re, 1.0);
            assert_eq!(wt.get(2).re, 2.0);
            assert_eq!(wt.get(3).re, 1.0);
            assert_eq!(wt.get(t + 1).re, -1.0);
            assert_eq!(wt.get(t + 2).re, -2.0);
            assert_eq!(wt.get(t + 3).re, -1.0);
        }
    }

    #[test]
    fn w_is_h_periodic_and_vanishes_at_h() {
        let m = 3u64;
        let h = 20u64;
        assert!(cycle_w_t(m, h, &BigUint::from(h)).unwrap().is_zero());
        for s in 1..h {
            let a = cycle_w_t(m, h, &BigUint::from(s)).unwrap();
            let b = cycle_w_t(m, h, &BigUint::from(h + s)).unwrap();
            assert_eq!(a, b, "s = {s}");
        }
    }

    #[test]
    fn norm_profile_matches_materialized_cycles() {
        // [DERIVED] oracle: closed-profile norms against explicit vectors.
        for m in [1u64, 2, 3, 5, 8] {
            let h = 6 * m + 4;
            for p in [1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
                let spec = if p.is_infinite() {
                    NormSpec::sup()
                } else {
                    NormSpec::new(p).unwrap()
                };
                for t in 0..=h {
                    let direct = lp_norm(&cycle_w_t(m, h, &BigUint::from(t)).unwrap(), spec);
                    let closed = norm_w_t(
                        &BigUint::from(m),
                        &BigUint::from(h),
                        &BigUint::from(t),
                        spec,
                    )
                    .unwrap();
                    assert!(
                        (direct - closed).abs() <= 1e-9 * (1.0 + direct),
                        "m = {m}, H = {h}, t = {t}, p = {p}: {direct} vs {closed}"
                    );
                }
            }
        }
    }

    #[test]
    fn norm_profile_scales_to_huge_blocks() {
        // Plateau value at t = 2m for p = 1 is exactly 2m² (two bumps of
        // height m and ℓ¹ mass m² each).
        let m = BigUint::from(10_000_000_000u64);
        let h = &m * 6u32;
        let p1 = NormSpec::new(1.0).unwrap();
        let got = norm_w_t(&m, &h, &(&m * 2u32), p1).unwrap();
        let want = 2.0e20;
        assert!((got - want).abs() <= 1e-9 * want, "{got}");
    }

    #[test]
    fn bump_norm_check_small_cases() {
        for (m, h) in [(1u64, 8u64), (2, 16), (3, 16), (5, 28)] {
            for p in [1.0, 2.0, f64::INFINITY] {
                let spec = if p.is_infinite() {
                    NormSpec::sup()
                } else {
                    NormSpec::new(p).unwrap()
                };
                let report = bump_norm_check(m, h, spec).unwrap();
                assert!(report.all_pass(), "m = {m}, H = {h}, p = {p}: {report:?}");
            }
        }
    }

    #[test]
    fn layout_algebra() {
        let forms = arc_forms(16);
        let p = NormSpec::new(2.0).unwrap();
        let layout = build_hs_layout(&forms, 6, p).unwrap();
        assert_eq!(layout.a(1).unwrap(), &BigUint::one());
        for k in 1..=6usize {
            // H_k = 2(m_k + m_{k+1}) and H_k >= 4 m_k.
            let expect = (layout.m(k).unwrap() + layout.m(k + 1).unwrap()) * 2u32;
            assert_eq!(layout.h(k).unwrap(), &expect);
            assert!(layout.h(k).unwrap() >= &(layout.m(k).unwrap() * 4u32));
        }
        for k in 1..6usize {
            assert!((layout.h(k + 1).unwrap() % layout.h(k).unwrap()).is_zero());
            let one_plus_k = layout.a(k).unwrap() + 1u32;
            let one_plus_next = layout.a(k + 1).unwrap() + 1u32;
            assert!((&one_plus_next % &one_plus_k).is_zero());
        }
        // Summability witness: ||f_k|| / a_k <= 1/(k-1)^2 for k >= 2.
        for k in 2..=6usize {
            let ak = layout.a(k).unwrap().to_f64().unwrap();
            assert!(forms.norm_of(k) / ak <= 1.0 / (((k - 1) * (k - 1)) as f64) + 1e-12);
        }
    }

    #[test]
    fn eps_normalizes_the_plateau() {
        let forms = arc_forms(16);
        for p in [1.0, 2.0, 3.0, f64::INFINITY] {
            let spec = if p.is_infinite() {
                NormSpec::sup()
            } else {
                NormSpec::new(p).unwrap()
            };
            let layout = build_hs_layout(&forms, 6, spec).unwrap();
            for k in 1..=6usize {
                let t = layout.m(k).unwrap() * 2u32;
                let norm = layout.bump_orbit_norm(k, &t).unwrap();
                assert!((norm - 1.0).abs() <= 1e-12, "k = {k}, p = {p}: {norm}");
                // ||v_k|| <= 2/m_k after normalization.
                let v_norm = layout.eps(k).unwrap()
                    * norm_w_t(layout.m(k).unwrap(), layout.h(k).unwrap(), &BigUint::one(), spec)
                        .unwrap();
                let cap = 2.0 / layout.m(k).unwrap().to_f64().unwrap();
                assert!(v_norm <= cap * (1.0 + 1e-12), "k = {k}, p = {p}: {v_norm} > {cap}");
            }
        }
    }

    #[test]
    fn shift_is_an_isometry() {
        let forms = arc_forms(8);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for p in [1.0, 2.0, f64::INFINITY] {
            let spec = if p.is_infinite() {
                NormSpec::sup()
            } else {
                NormSpec::new(p).unwrap()
            };
            let layout = build_hs_layout(&forms, 4, spec).unwrap();
            for _ in 0..1000 {
                let mut x = HsVector::new();
                x.plane = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                for _ in 0..5 {
                    let k = rng.gen_range(1..=3usize);
                    let h = layout.h(k).unwrap().to_u64().unwrap();
                    x.add_block_entry(
                        k,
                        BigUint::from(rng.gen_range(0..h)),
                        rng.gen_range(-3.0..3.0),
                    );
                }
                let y = apply_s_hs(&x, &layout).unwrap();
                assert!((y.norm(spec) - x.norm(spec)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn plateau_and_linear_growth_of_bumps() {
        let forms = arc_forms(16);
        let p = NormSpec::new(2.0).unwrap();
        let layout = build_hs_layout(&forms, 5, p).unwrap();
        for k in 1..=4usize {
            let m_k = layout.m(k).unwrap();
            let h_k = layout.h(k).unwrap();
            // Norm 1 across the plateau window.
            for t in [m_k * 2u32, m_k * 3u32, h_k - m_k * 2u32] {
                let norm = layout.bump_orbit_norm(k, &t).unwrap();
                assert!((norm - 1.0).abs() <= 1e-12, "k = {k}: {norm}");
            }
            // ||v_{k,t}|| <= 2t/m_k everywhere.
            let m_f = m_k.to_f64().unwrap();
            for t_step in 1..=20u64 {
                let t = h_k * t_step / 20u32 + 1u32;
                let norm = layout.bump_orbit_norm(k, &t).unwrap();
                let cap = 2.0 * t.to_f64().unwrap() / m_f;
                assert!(norm <= cap * (1.0 + 1e-12), "k = {k}, t = {t}");
            }
        }
    }

    #[test]
    fn iterate_matches_repeated_application() {
        let forms = arc_forms(8);
        let p = NormSpec::new(2.0).unwrap();
        let layout = build_hs_layout(&forms, 3, p).unwrap();
        let mut x = HsVector::new();
        x.plane = (0.8, -0.4);
        x.add_block_entry(1, BigUint::from(3u32), 1.5);
        let mut iterated = x.clone();
        for t in 1..=60u32 {
            // One application: S then add the bumps at t = 1... R is affine
            // in the plane only through f_k(Px), and Px is S-invariant, so
            // repeated application of the t = 1 rule is the true orbit.
            let (next, _) = iterate_r_hs(&iterated, &BigUint::one(), &layout, &forms, 3).unwrap();
            iterated = next;
            let (closed, _) = iterate_r_hs(&x, &BigUint::from(t), &layout, &forms, 3).unwrap();
            let diff = iterated.sub(&closed).norm(p);
            assert!(diff <= 1e-9 * t as f64 + 1e-12, "t = {t}: {diff}");
        }
    }

    #[test]
    fn orbit_norm_interval_contains_materialized_norm() {
        let forms = arc_forms(8);
        let p = NormSpec::new(2.0).unwrap();
        let layout = build_hs_layout(&forms, 4, p).unwrap();
        let mut x = HsVector::new();
        x.plane = (1.0, 0.25);
        x.add_block_entry(2, BigUint::from(7u32), -0.5);
        for t in [1u64, 5, 44, 1000] {
            let t = BigUint::from(t);
            let (v, tail) = iterate_r_hs(&x, &t, &layout, &forms, 4).unwrap();
            let (lo, hi) = hs_orbit_norm(&x, &t, &layout, &forms, 4).unwrap();
            let norm = v.norm(p);
            assert!(norm >= lo - tail - 1e-9 && norm <= hi + 1e-9, "t = {t}");
        }
    }

    #[test]
    fn report_windows_tile_and_diverge() {
        let forms = arc_forms(8);
        let p = NormSpec::new(2.0).unwrap();
        let layout = build_hs_layout(&forms, 5, p).unwrap();
        // Window tiling: H_k - 2m_k = 2m_{k+1}.
        for k in 1..=4usize {
            let lhs = layout.h(k).unwrap() - layout.m(k).unwrap() * 2u32;
            assert_eq!(lhs, layout.m(k + 1).unwrap() * 2u32);
        }
        let mut x = HsVector::new();
        x.plane = (-0.3, 1.0);
        let report = hs_divergence_recurrence_report(&x, &layout, &forms, 5).unwrap();
        assert!(!report.in_f);
        let mut lowers = Vec::new();
        for row in &report.rows {
            match row {
                HsTraceRow::Divergent { lower_bound, orbit_lo, .. } => {
                    assert!(lower_bound <= &(orbit_lo + 1e-9), "{row:?}");
                    lowers.push(*lower_bound);
                }
                _ => panic!("expected divergent rows"),
            }
        }
        // |f_k(Px)| grows like sqrt(k)·d(Px, F), so the floor climbs.
        assert!(lowers.last().unwrap() > lowers.first().unwrap());
    }

    #[test]
    fn report_recurrence_on_f() {
        let forms = arc_forms(16);
        let p = NormSpec::new(2.0).unwrap();
        let layout = build_hs_layout(&forms, 6, p).unwrap();
        let phi = core::f64::consts::TAU / 16.0;
        let mut x = HsVector::new();
        x.plane = (libm::cos(phi), libm::sin(phi));
        x.add_block_entry(1, BigUint::from(2u32), 0.5);
        let report = hs_divergence_recurrence_report(&x, &layout, &forms, 6).unwrap();
        assert!(report.in_f);
        let best = report
            .rows
            .iter()
            .map(|row| match row {
                HsTraceRow::Recurrent { bound, .. } => *bound,
                _ => panic!("expected recurrent rows"),
            })
            .fold(f64::INFINITY, f64::min);
        assert!(best.is_finite() && best < 1.0, "best bound {best}");
    }

    #[test]
    fn s_return_exact_once_h_covers_support() {
        let forms = arc_forms(8);
        let p = NormSpec::new(2.0).unwrap();
        let layout = build_hs_layout(&forms, 4, p).unwrap();
        let mut x = HsVector::new();
        x.add_block_entry(1, BigUint::from(1u32), 1.0);
        x.add_block_entry(2, BigUint::from(5u32), -2.0);
        let t = layout.h(2).unwrap();
        let y = s_power_hs(&x, t, &layout).unwrap();
        assert_eq!(y, x);
    }
}
