//! The complex diagonal-plus-rank-tail operator
//! `R x = S x + Σ_{k≥3} (1/m_{k−1}) f_k(Px) e_k` and its exact closed-form
//! iterates `R^t x = S^t x + Σ (λ_{k,t}/m_{k−1}) f_k(Px) e_k`.
//!
//! States are kept symbolic; only norms are truncated, and every truncation
//! carries an explicit tail bound so norm queries return certified intervals.

use alloc::format;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::forms::SeparatingSequence;
use crate::lines::{classify_base_point, BaseClass};
use crate::schedule::ModulusSchedule;
use crate::vector::{lp_norm, project_p, Field, NormSpec, PlanePoint, SparseVector};
use crate::Cplx;

/// Hard ceiling on the number of explicit tail terms.
pub const TRUNC_CAP: usize = 4096;

/// Default number of explicit tail terms.
pub const TRUNC_DEFAULT: usize = 64;

pub(crate) fn big_ratio_f64(num: &BigUint, den: &BigUint) -> f64 {
    BigRational::new(BigInt::from(num.clone()), BigInt::from(den.clone()))
        .to_f64()
        .unwrap_or(f64::INFINITY)
}

/// `λ_{k,t} / m_{k−1}` for `k ≥ 3`, stable for arbitrarily large moduli:
/// `sin(πt̃/(2m_k)) / (sinc(π/(2m_k)) · (π/2)) · r_{k−1} · e^{iπ(t̃−1)/(2m_k)}`
/// with `t̃ = t mod 2m_k`, so no intermediate under- or overflows.
fn lambda_over_prev(schedule: &ModulusSchedule, k: usize, t: &BigUint) -> Result<Cplx> {
    let m = schedule.m(k)?;
    let tr = t % (m * 2u32);
    if tr.is_zero() {
        return Ok(Cplx::new(0.0, 0.0));
    }
    let half = core::f64::consts::FRAC_PI_2;
    let r = big_ratio_f64(&tr, m);
    let a_recip = big_ratio_f64(&BigUint::one(), m);
    let a = half * a_recip;
    let sinc = if a < 1e-8 {
        1.0 - a * a / 6.0
    } else {
        libm::sin(a) / a
    };
    let ratio = schedule.ratio(k - 1)?.to_f64().unwrap_or(f64::INFINITY);
    let amp = libm::sin(half * r) / (sinc * half) * ratio;
    Ok(Cplx::from_polar(amp, half * (r - a_recip)))
}

/// `S^t x`: identity on `e₁, e₂`, coordinate `k` multiplied by `λ_k^t`.
pub fn s_power(x: &SparseVector, t: &BigUint, schedule: &ModulusSchedule) -> Result<SparseVector> {
    let mut out = SparseVector::new(Field::Complex);
    for (i, z) in x.iter() {
        if i <= 2 {
            out.set(i, z)?;
        } else {
            out.set(i, z * schedule.lambda_pow(i as usize, t)?)?;
        }
    }
    Ok(out)
}

pub fn apply_s(x: &SparseVector, schedule: &ModulusSchedule) -> Result<SparseVector> {
    s_power(x, &BigUint::one(), schedule)
}

/// Certified bound on `Σ_{k > from_k} (|λ_{k,t}|/m_{k−1})·‖f_k‖·scale`, using
/// `|λ_{k,t}| ≤ min(t, m_k)` exactly within the built depth and the growth
/// floor `m_{k+1} ≥ 15·m_k` beyond it (strict schedules only; non-strict
/// schedules give up beyond the depth).
pub(crate) fn coeff_tail_bound(
    schedule: &ModulusSchedule,
    forms: &SeparatingSequence,
    from_k: usize,
    t: &BigUint,
    scale: f64,
) -> f64 {
    if scale == 0.0 || t.is_zero() {
        return 0.0;
    }
    let depth = schedule.depth();
    let t_f = t.to_f64().unwrap_or(f64::INFINITY);
    let mut sum = 0.0f64;
    let mut beyond_scale = None;
    for k in (from_k + 1)..(from_k + 1 + 10_000) {
        let term = if k <= depth {
            let m_k = schedule.m(k).expect("k <= depth");
            let m_prev = schedule.m(k - 1).expect("k - 1 >= 2");
            let amp = if t < m_k {
                big_ratio_f64(t, m_prev)
            } else {
                big_ratio_f64(m_k, m_prev)
            };
            amp * forms.norm_of(k) * scale
        } else {
            if !schedule.strict() {
                return f64::INFINITY;
            }
            let base = *beyond_scale.get_or_insert_with(|| {
                // 1 / m_depth, zero when the modulus exceeds f64 range.
                let md = schedule.m(depth).expect("depth").to_f64();
                md.map(|v| 1.0 / v).unwrap_or(0.0)
            });
            let denom_recip = base / libm::pow(15.0, (k - 1 - depth) as f64);
            let t_amp = if t_f.is_finite() { t_f } else { f64::INFINITY };
            let raw = t_amp * denom_recip;
            if raw.is_nan() {
                0.0
            } else {
                raw * forms.norm_of(k) * scale
            }
        };
        sum += term;
        if k > depth && (term <= sum * 1e-18 || term == 0.0) {
            break;
        }
    }
    sum
}

/// The symbolic state `R^t x₀`, exact by construction; `trunc_k` only sets
/// where explicit tail terms stop when the state is materialized.
#[derive(Debug, Clone)]
pub struct OrbitState<'a> {
    pub t: BigUint,
    pub x0: SparseVector,
    pub base: PlanePoint,
    pub trunc_k: usize,
    pub schedule: &'a ModulusSchedule,
    pub forms: &'a SeparatingSequence,
}

/// Packages `R^t x` as an exact symbolic state.
pub fn iterate_closed_form<'a>(
    x: &SparseVector,
    t: BigUint,
    schedule: &'a ModulusSchedule,
    forms: &'a SeparatingSequence,
    trunc_k: usize,
) -> OrbitState<'a> {
    OrbitState {
        t,
        base: project_p(x),
        x0: x.clone(),
        trunc_k,
        schedule,
        forms,
    }
}

impl<'a> OrbitState<'a> {
    fn effective_cap(&self) -> usize {
        TRUNC_CAP.min(self.schedule.depth()).min(self.forms.len())
    }

    /// The explicit vector truncated at `trunc_k`, with a bound on the norm
    /// of everything dropped.
    pub fn materialize(&self) -> Result<(SparseVector, f64)> {
        self.materialize_at(self.trunc_k)
    }

    fn materialize_at(&self, trunc_k: usize) -> Result<(SparseVector, f64)> {
        let mut v = s_power(&self.x0, &self.t, self.schedule)?;
        let trunc_k = trunc_k.max(2);
        if self.base.is_zero() {
            return Ok((v, 0.0));
        }
        let top = trunc_k.min(self.effective_cap());
        for k in 3..=top {
            let f_val = self.forms.eval(k, &self.base)?;
            if f_val != Cplx::new(0.0, 0.0) {
                v.add(k as u64, lambda_over_prev(self.schedule, k, &self.t)? * f_val)?;
            }
        }
        let tail = coeff_tail_bound(self.schedule, self.forms, top, &self.t, self.base.norm2());
        Ok((v, tail))
    }
}

/// One application of `R` truncated at `trunc_k` explicit tail terms; also
/// returns the norm bound of the dropped remainder.
pub fn apply_r(
    x: &SparseVector,
    schedule: &ModulusSchedule,
    forms: &SeparatingSequence,
    trunc_k: usize,
) -> Result<(SparseVector, f64)> {
    iterate_closed_form(x, BigUint::one(), schedule, forms, trunc_k).materialize()
}

/// Certified interval `lo ≤ ‖R^t x‖_p ≤ hi`.
///
/// Starts at the state's `trunc_k` and doubles the explicit-term count until
/// the tail bound drops below `10⁻⁶·lo`; errors with the last interval when
/// the cap is reached first.
pub fn orbit_norm(state: &OrbitState<'_>, n: NormSpec) -> Result<(f64, f64)> {
    let cap = state.effective_cap();
    let mut k = state.trunc_k.clamp(3, cap.max(3));
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

/// The coefficient-k lower bound `(2/π)|f_k(Px)| − ‖x‖_p`, valid for
/// `m_{k−1} ≤ t ≤ m_k`.
pub fn divergence_lower_bound(
    x: &SparseVector,
    k: usize,
    t: &BigUint,
    schedule: &ModulusSchedule,
    forms: &SeparatingSequence,
    n: NormSpec,
) -> Result<f64> {
    if k < 3 {
        return Err(Error::InvalidParameter(format!("divergence window needs k >= 3")));
    }
    let lo = schedule.m(k - 1)?;
    let hi = schedule.m(k)?;
    if t < lo || t > hi {
        return Err(Error::InvalidParameter(format!(
            "t outside the window [m_{}, m_{}]",
            k - 1,
            k
        )));
    }
    let f_val = forms.eval(k, &project_p(x))?;
    Ok(2.0 / core::f64::consts::PI * f_val.norm() - lp_norm(x, n))
}

/// Output of [`recurrence_estimate`].
#[derive(Debug, Clone)]
pub struct Recurrence {
    /// The return time `2·m_{k_n − 1}`.
    pub t: BigUint,
    /// The net index realized by the length-`n` prefix; 0 when `Px = 0` and
    /// the prefix plays no role.
    pub k_n: usize,
    /// Certified bound on `‖R^t x − x‖_p`.
    pub bound: f64,
}

/// The return time and bound for a vector with `Px ∈ F`: every tail block
/// below the chosen net index vanishes exactly at `t = 2m_{k_n−1}`, the
/// blocks at and above it are summed explicitly up to `trunc_k`, and the far
/// tail uses the schedule's growth floor.
pub fn recurrence_estimate(
    x: &SparseVector,
    n: usize,
    schedule: &ModulusSchedule,
    forms: &SeparatingSequence,
    trunc_k: usize,
    norm: NormSpec,
) -> Result<Recurrence> {
    let base = project_p(x);
    let (class, dist) = classify_base_point(&base, forms.f_set());
    if class != BaseClass::InF {
        return Err(Error::InvalidParameter(format!(
            "recurrence_estimate needs Px in F, but d(Px, F) = {dist}"
        )));
    }
    let (k_n, t) = if base.is_zero() {
        (0, schedule.m(n.max(2).min(schedule.depth()))? * 2u32)
    } else {
        let (k_n, _) = forms.best_prefix_index(&base, n)?;
        (k_n, schedule.m(k_n.saturating_sub(1).max(2))? * 2u32)
    };
    let mut bound = s_diff_norm(x, &t, schedule, norm)?;
    if !base.is_zero() {
        let top = trunc_k
            .max(3)
            .min(schedule.depth())
            .min(forms.len());
        for k in 3..=top {
            let f_val = forms.eval(k, &base)?;
            if f_val != Cplx::new(0.0, 0.0) {
                bound += lambda_over_prev(schedule, k, &t)?.norm() * f_val.norm();
            }
        }
        bound += coeff_tail_bound(schedule, forms, top, &t, base.norm2());
    }
    Ok(Recurrence { t, k_n, bound })
}

/// `‖S^t x − x‖_p`, exact on finite support.
fn s_diff_norm(
    x: &SparseVector,
    t: &BigUint,
    schedule: &ModulusSchedule,
    norm: NormSpec,
) -> Result<f64> {
    let mut abs: Vec<f64> = Vec::with_capacity(x.support_len());
    for (i, z) in x.iter() {
        if i <= 2 {
            continue;
        }
        let lam = schedule.lambda_pow(i as usize, t)?;
        abs.push(((lam - Cplx::new(1.0, 0.0)) * z).norm());
    }
    Ok(norm.of_abs(abs.iter().copied()))
}

/// `‖S^{2m_n} x − x‖_p`: coefficients with `k ≤ n` are unchanged exactly.
pub fn s_power_convergence(
    x: &SparseVector,
    n: usize,
    schedule: &ModulusSchedule,
    norm: NormSpec,
) -> Result<f64> {
    let t = schedule.m(n.max(2))? * 2u32;
    s_diff_norm(x, &t, schedule, norm)
}
