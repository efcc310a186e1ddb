//! The real variant of the operator: block-diagonal rotations by `θ_k = π/m_k`
//! on `span{e_{2k−1}, e_{2k}}`, perturbed along the bump vectors
//! `μ_{k,t} = (Σ_{l<t} cos lθ_k) e_{2k} − (Σ_{l<t} sin lθ_k) e_{2k−1}`.
//!
//! Indices 1 and 2 carry the fixed plane of `P`; the `k = 2` block starts at
//! index 3, so block `k` occupies `{2k−1, 2k}`. Every μ-quantity comes from
//! the complex geometric sum `λ_{k,t}`, giving exact zeros at recurrence
//! times and O(1) evaluation.

use alloc::collections::BTreeMap;
use alloc::format;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::diagonal::coeff_tail_bound;
use crate::error::{Error, Result};
use crate::forms::SeparatingSequence;
use crate::schedule::ModulusSchedule;
use crate::vector::{lp_norm, project_p, Field, NormSpec, PlanePoint, SparseVector};
use crate::Cplx;

pub use crate::diagonal::{TRUNC_CAP, TRUNC_DEFAULT};

/// One rotation block: the 2×2 orthogonal matrix for angle `θ_k = π/m_k`.
#[derive(Debug, Clone, Copy)]
pub struct RotationBlock {
    pub k: usize,
    pub cos: f64,
    pub sin: f64,
}

impl RotationBlock {
    pub fn from_schedule(schedule: &ModulusSchedule, k: usize) -> Result<Self> {
        let (cos, sin) = rotation_trig(schedule, k, &BigUint::one())?;
        Ok(RotationBlock { k, cos, sin })
    }

    pub fn det(&self) -> f64 {
        self.cos * self.cos + self.sin * self.sin
    }
}

/// `(cos, sin)` of `t·θ_k` with `t` reduced mod `2m_k` exactly; the identity
/// pair `(1, 0)` is exact whenever `2m_k | t`.
fn rotation_trig(schedule: &ModulusSchedule, k: usize, t: &BigUint) -> Result<(f64, f64)> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "rotation blocks start at k = 2, got {k}"
        )));
    }
    let m = schedule.m(k)?;
    let tr = t % (m * 2u32);
    if tr.is_zero() {
        return Ok((1.0, 0.0));
    }
    if &tr == m {
        return Ok((-1.0, 0.0));
    }
    let r = BigRational::new(BigInt::from(tr), BigInt::from(m.clone()))
        .to_f64()
        .unwrap_or(0.0);
    let angle = core::f64::consts::PI * r;
    Ok((libm::cos(angle), libm::sin(angle)))
}

/// The geometric sum `Σ_{l<t} e^{ilθ_k}` for `k ≥ 2` (the real blocks also
/// rotate at `k = 2`, unlike the complex diagonal where `λ₂ = 1`).
fn rotation_geom_sum(schedule: &ModulusSchedule, k: usize, t: &BigUint) -> Result<Cplx> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "rotation blocks start at k = 2, got {k}"
        )));
    }
    let m = schedule.m(k)?;
    let tr = t % (m * 2u32);
    if tr.is_zero() {
        return Ok(Cplx::new(0.0, 0.0));
    }
    let half = core::f64::consts::FRAC_PI_2;
    let r = BigRational::new(BigInt::from(tr), BigInt::from(m.clone()))
        .to_f64()
        .unwrap_or(0.0);
    let a_recip = BigRational::new(BigInt::one(), BigInt::from(m.clone()))
        .to_f64()
        .unwrap_or(0.0);
    let a = half * a_recip;
    let sinc = if a < 1e-8 {
        1.0 - a * a / 6.0
    } else {
        libm::sin(a) / a
    };
    // |λ_{k,t}| = sin((π/2)r) / sin(a), written through sinc to survive huge m.
    let m_f = m.to_f64().unwrap_or(f64::INFINITY);
    let amp = libm::sin(half * r) / (sinc * half) * m_f;
    Ok(Cplx::from_polar(amp, half * (r - a_recip)))
}

/// The bump coefficients of `μ_{k,t}`: `(coefficient of e_{2k−1}, of e_{2k})
/// = (−Im λ_{k,t}, Re λ_{k,t})`, so `‖μ_{k,t}‖₂ = |λ_{k,t}|` exactly.
pub fn mu_kt(schedule: &ModulusSchedule, k: usize, t: &BigUint) -> Result<(f64, f64)> {
    let lam = rotation_geom_sum(schedule, k, t)?;
    Ok((-lam.im, lam.re))
}

fn require_real(x: &SparseVector) -> Result<()> {
    if x.field() != Field::Real {
        return Err(Error::FieldMismatch);
    }
    Ok(())
}

/// `S^t x` in the real model: identity on `e₁, e₂`, block `k` rotated by
/// `t·θ_k`.
pub fn s_power_real(
    x: &SparseVector,
    t: &BigUint,
    schedule: &ModulusSchedule,
) -> Result<SparseVector> {
    require_real(x)?;
    let mut out = SparseVector::new(Field::Real);
    let mut blocks: BTreeMap<usize, (f64, f64)> = BTreeMap::new();
    for (i, z) in x.iter() {
        if i <= 2 {
            out.set(i, z)?;
            continue;
        }
        let k = ((i + 1) / 2) as usize;
        let entry = blocks.entry(k).or_insert((0.0, 0.0));
        if i % 2 == 1 {
            entry.0 = z.re;
        } else {
            entry.1 = z.re;
        }
    }
    for (k, (a, b)) in blocks {
        let (c, s) = rotation_trig(schedule, k, t)?;
        out.set(2 * k as u64 - 1, Cplx::new(c * a - s * b, 0.0))?;
        out.set(2 * k as u64, Cplx::new(s * a + c * b, 0.0))?;
    }
    Ok(out)
}

pub fn apply_s_real(x: &SparseVector, schedule: &ModulusSchedule) -> Result<SparseVector> {
    s_power_real(x, &BigUint::one(), schedule)
}

/// The symbolic state `R^t x₀` of the real model.
#[derive(Debug, Clone)]
pub struct RealOrbitState<'a> {
    pub t: BigUint,
    pub x0: SparseVector,
    pub base: PlanePoint,
    pub trunc_k: usize,
    pub schedule: &'a ModulusSchedule,
    pub forms: &'a SeparatingSequence,
}

/// Packages `R^t x = S^t x + Σ_{k≥2} (f_k(Px)/m_{k−1}) μ_{k,t}` symbolically.
/// `m₁` is read as `m₂` (the paper leaves the first denominator implicit).
pub fn iterate_closed_form_real<'a>(
    x: &SparseVector,
    t: BigUint,
    schedule: &'a ModulusSchedule,
    forms: &'a SeparatingSequence,
    trunc_k: usize,
) -> Result<RealOrbitState<'a>> {
    require_real(x)?;
    Ok(RealOrbitState {
        t,
        base: project_p(x),
        x0: x.clone(),
        trunc_k,
        schedule,
        forms,
    })
}

impl<'a> RealOrbitState<'a> {
    fn effective_cap(&self) -> usize {
        TRUNC_CAP.min(self.schedule.depth()).min(self.forms.len())
    }

    pub fn materialize(&self) -> Result<(SparseVector, f64)> {
        self.materialize_at(self.trunc_k)
    }

    fn materialize_at(&self, trunc_k: usize) -> Result<(SparseVector, f64)> {
        let mut v = s_power_real(&self.x0, &self.t, self.schedule)?;
        if self.base.is_zero() {
            return Ok((v, 0.0));
        }
        let top = trunc_k.max(2).min(self.effective_cap());
        for k in 2..=top {
            let f_val = self.forms.eval(k, &self.base)?;
            if f_val == Cplx::new(0.0, 0.0) {
                continue;
            }
            let m_prev = self.schedule.m(k.max(3) - 1)?;
            let recip = BigRational::new(BigInt::one(), BigInt::from(m_prev.clone()))
                .to_f64()
                .unwrap_or(0.0);
            let (mu_odd, mu_even) = mu_kt(self.schedule, k, &self.t)?;
            let scale = f_val.re * recip;
            v.add(2 * k as u64 - 1, Cplx::new(scale * mu_odd, 0.0))?;
            v.add(2 * k as u64, Cplx::new(scale * mu_even, 0.0))?;
        }
        // ‖μ_{k,t}‖_p ≤ |Re λ| + |Im λ| ≤ √2·|λ_{k,t}| for every p ≥ 1.
        let tail = coeff_tail_bound(
            self.schedule,
            self.forms,
            top,
            &self.t,
            libm::sqrt(2.0) * self.base.norm2(),
        );
        Ok((v, tail))
    }
}

/// One application of the real `R`, truncated, with the dropped-tail bound.
pub fn apply_r_real(
    x: &SparseVector,
    schedule: &ModulusSchedule,
    forms: &SeparatingSequence,
    trunc_k: usize,
) -> Result<(SparseVector, f64)> {
    iterate_closed_form_real(x, BigUint::one(), schedule, forms, trunc_k)?.materialize()
}

/// Certified interval `lo ≤ ‖R^t x‖_p ≤ hi` for the real model; same
/// adaptive-truncation contract as the complex `orbit_norm`.
pub fn orbit_norm_real(state: &RealOrbitState<'_>, n: NormSpec) -> Result<(f64, f64)> {
    let cap = state.effective_cap();
    let mut k = state.trunc_k.clamp(2, cap.max(2));
    loop {
        let (v, tail) = state.materialize_at(k)?;
        let norm = lp_norm(&v, n);
        let lo = (norm - tail).max(0.0);
        let hi = norm + tail;
        if tail <= 1e-6 * lo || tail == 0.0 {
            return Ok((lo, hi));
        }
        if k >= cap {
            return Err(Error::UnusableInterval { lo, hi });
        }
        k = (k * 2).min(cap);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::make_forms;
    use crate::lines::{Arc, LineUnion};
    use crate::schedule::{build_schedule, ModulusSchedule};
    use num_rational::Rational64;
    use rand::{Rng, SeedableRng};

    fn rat(a: i64, b: i64) -> Rational64 {
        Rational64::new(a, b)
    }

    fn arc_setup(depth: usize) -> (SeparatingSequence, ModulusSchedule) {
        let f = LineUnion::real(vec![Arc { lo: rat(0, 1), hi: rat(1, 4) }], vec![]).unwrap();
        let forms = make_forms(&f, depth.max(64)).unwrap();
        let schedule = build_schedule(&forms, depth, None).unwrap();
        (forms, schedule)
    }

    #[test]
    fn rotation_blocks_are_orthogonal() {
        let (_, schedule) = arc_setup(10);
        for k in 2..=10usize {
            let b = RotationBlock::from_schedule(&schedule, k).unwrap();
            assert!((b.det() - 1.0).abs() < 1e-14, "k = {k}");
        }
    }

    #[test]
    fn plane_is_fixed() {
        let (_, schedule) = arc_setup(8);
        let x = SparseVector::from_real(&[(1, 2.0), (2, -0.5)]);
        let y = apply_s_real(&x, &schedule).unwrap();
        assert_eq!(y, x);
    }

    #[test]
    fn single_block_rotation_toy_modulus() {
        // m₃ = 4 → block 3 (indices 5, 6) rotates by π/4.
        let schedule = ModulusSchedule::from_ratios(&[4], false).unwrap();
        let x = SparseVector::from_real(&[(5, 1.0)]);
        let y = apply_s_real(&x, &schedule).unwrap();
        let c = libm::sqrt(2.0) / 2.0;
        assert!((y.get(5).re - c).abs() < 1e-15);
        assert!((y.get(6).re - c).abs() < 1e-15);
    }

    #[test]
    fn rotation_preserves_l2_norm() {
        let (_, schedule) = arc_setup(10);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let p = NormSpec::new(2.0).unwrap();
        for _ in 0..50 {
            let mut x = SparseVector::new(Field::Real);
            for _ in 0..6 {
                let i = rng.gen_range(1..=18u64);
                x.add(i, Cplx::new(rng.gen_range(-3.0..3.0), 0.0)).unwrap();
            }
            let y = apply_s_real(&x, &schedule).unwrap();
            assert!((lp_norm(&y, p) - lp_norm(&x, p)).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_complex_input() {
        let (_, schedule) = arc_setup(8);
        let mut x = SparseVector::new(Field::Complex);
        x.set(3, Cplx::new(0.0, 1.0)).unwrap();
        assert_eq!(apply_s_real(&x, &schedule), Err(Error::FieldMismatch));
    }

    #[test]
    fn mu_vanishes_exactly_at_recurrence_times() {
        let (_, schedule) = arc_setup(10);
        for n in 3..=9usize {
            let t = schedule.m(n).unwrap() * 2u32;
            for k in 3..=n {
                assert_eq!(mu_kt(&schedule, k, &t).unwrap(), (0.0, 0.0), "k = {k}, n = {n}");
            }
        }
    }

    #[test]
    fn mu_lambda_bridge() {
        // ‖μ‖₂ = |λ_{k,t}| exactly; both halves of the √2 sandwich follow.
        let (_, schedule) = arc_setup(10);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10_000 {
            let k = rng.gen_range(3..=9usize);
            let t = BigUint::from(rng.gen_range(0..=1_000_000u64));
            let (a, b) = mu_kt(&schedule, k, &t).unwrap();
            let norm2 = libm::hypot(a, b);
            let lam = schedule.abs_lambda_kt(k, &t).unwrap();
            assert!((norm2 - lam).abs() <= 1e-10 * (1.0 + lam), "k = {k}, t = {t}");
            assert!(norm2 >= lam / libm::sqrt(2.0) - 1e-10);
            assert!(norm2 <= libm::sqrt(2.0) * lam + 1e-10);
            assert!(norm2 <= 2.0 * t.to_f64().unwrap() + 1e-10);
        }
    }

    #[test]
    fn closed_form_matches_iterated_application() {
        // [DERIVED] oracle: t-fold explicit application.
        let (forms, schedule) = arc_setup(14);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let p = NormSpec::new(2.0).unwrap();
        for _ in 0..8 {
            let mut x = SparseVector::new(Field::Real);
            for _ in 0..4 {
                let i = rng.gen_range(1..=12u64);
                x.add(i, Cplx::new(rng.gen_range(-2.0..2.0), 0.0)).unwrap();
            }
            let mut iterated = x.clone();
            for t in 1..=200u32 {
                iterated = apply_r_real(&iterated, &schedule, &forms, 14).unwrap().0;
                if t % 50 != 0 {
                    continue;
                }
                let state =
                    iterate_closed_form_real(&x, BigUint::from(t), &schedule, &forms, 14).unwrap();
                let (closed, _) = state.materialize().unwrap();
                let diff = lp_norm(&iterated.sub(&closed), p);
                assert!(diff <= 1e-9 * t as f64 + 1e-12, "t = {t}: drift {diff}");
            }
        }
    }

    #[test]
    fn closed_form_t_zero_and_pure_rotation() {
        let (forms, schedule) = arc_setup(10);
        let x = SparseVector::from_real(&[(1, 0.5), (5, 1.5)]);
        let state =
            iterate_closed_form_real(&x, BigUint::zero(), &schedule, &forms, 10).unwrap();
        let (v, tail) = state.materialize().unwrap();
        assert_eq!(tail, 0.0);
        assert_eq!(v, x);

        // Px = 0: the orbit stays a rotation, so the ℓ² norm interval is a
        // point at ‖x‖.
        let y = SparseVector::from_real(&[(5, 1.0), (8, -2.0)]);
        let p = NormSpec::new(2.0).unwrap();
        for t in [3u32, 77, 4096] {
            let st =
                iterate_closed_form_real(&y, BigUint::from(t), &schedule, &forms, 10).unwrap();
            let (lo, hi) = orbit_norm_real(&st, p).unwrap();
            assert_eq!(lo, hi);
            assert!((lo - lp_norm(&y, p)).abs() < 1e-12);
        }
    }

    #[test]
    fn real_dichotomy_mirrors_complex() {
        let (forms, schedule) = arc_setup(10);
        let p = NormSpec::new(2.0).unwrap();
        // Base off F: the coefficient bound with the √2 factor stays under lo.
        let x = SparseVector::from_real(&[(1, -1.0), (2, 1.0)]);
        let base = project_p(&x);
        for k in 3..=6usize {
            let t = schedule.m(k - 1).unwrap().clone();
            let state = iterate_closed_form_real(&x, t, &schedule, &forms, 64).unwrap();
            let (lo, _) = orbit_norm_real(&state, p).unwrap();
            let bound = 2.0 / (core::f64::consts::PI * libm::sqrt(2.0))
                * forms.eval(k, &base).unwrap().norm()
                - lp_norm(&x, p);
            assert!(bound <= lo + 1e-9, "k = {k}: {bound} > {lo}");
        }
    }
}
