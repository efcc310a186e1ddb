//! Modulus schedules: the divisibility-chained big integers `(m_k)` that set
//! the rotation angles `π/m_k` and the recurrence times `2m_k`, plus the
//! geometric sums `λ_{k,t} = Σ_{l<t} λ_k^l` evaluated with exact integer
//! reduction of `t` modulo `2m_k` before any trigonometry.

use alloc::format;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::forms::SeparatingSequence;
use crate::Cplx;

/// Decimal-digit cap on any single `m_k`.
const MAX_DIGITS: f64 = 1_000_000.0;
const LOG10_2: f64 = 0.301_029_995_663_981_2;

fn digits_of(m: &BigUint) -> f64 {
    m.bits() as f64 * LOG10_2
}

/// The sequence `(m_k)_{k ≥ 2}` with `m₂ = 1` (sentinel; `λ₁ = λ₂ = 1`) and
/// integer ratios `r_k = m_{k+1}/m_k`, so divisibility holds by construction.
///
/// When `strict`, the growth floor `r_k ≥ 15` holds for every ratio and the
/// series `Σ_{k≥3} (m_{k−2}/m_{k−1})‖f_k‖` is summable with per-term majorant
/// `1/(k−1)²`; toy schedules drop the floor but keep divisibility.
#[derive(Debug, Clone)]
pub struct ModulusSchedule {
    /// `m[i] = m_{i+2}`.
    m: Vec<BigUint>,
    /// `ratios[i] = m_{i+3}/m_{i+2}`.
    ratios: Vec<BigUint>,
    strict: bool,
}

impl ModulusSchedule {
    /// Largest index `k` with `m_k` built.
    pub fn depth(&self) -> usize {
        self.m.len() + 1
    }

    pub fn strict(&self) -> bool {
        self.strict
    }

    /// `m_k` for `2 ≤ k ≤ depth`.
    pub fn m(&self, k: usize) -> Result<&BigUint> {
        if k < 2 {
            return Err(Error::InvalidParameter(format!("m_k starts at k = 2, got {k}")));
        }
        self.m.get(k - 2).ok_or(Error::DepthExceeded {
            requested: k,
            available: self.depth(),
        })
    }

    /// `r_k = m_{k+1}/m_k` for `2 ≤ k < depth`.
    pub fn ratio(&self, k: usize) -> Result<&BigUint> {
        if k < 2 {
            return Err(Error::InvalidParameter(format!("ratios start at k = 2, got {k}")));
        }
        self.ratios.get(k - 2).ok_or(Error::DepthExceeded {
            requested: k,
            available: self.depth(),
        })
    }

    /// Toy constructor from explicit ratios: `m₂ = 1`, `m_{k+1} = r_k · m_k`.
    pub fn from_ratios(ratios: &[u64], strict: bool) -> Result<Self> {
        let mut m = Vec::with_capacity(ratios.len() + 1);
        let mut big_ratios = Vec::with_capacity(ratios.len());
        m.push(BigUint::one());
        for (i, &r) in ratios.iter().enumerate() {
            if r == 0 {
                return Err(Error::InvalidParameter(format!("ratio r_{} = 0", i + 2)));
            }
            if strict && r < 15 {
                return Err(Error::InvalidParameter(format!(
                    "strict schedule needs r_k >= 15, got r_{} = {r}",
                    i + 2
                )));
            }
            let next = m.last().expect("nonempty") * r;
            if digits_of(&next) > MAX_DIGITS {
                return Err(Error::SizeCapExceeded(format!(
                    "m_{} exceeds {MAX_DIGITS} decimal digits",
                    i + 3
                )));
            }
            big_ratios.push(BigUint::from(r));
            m.push(next);
        }
        Ok(ModulusSchedule {
            m,
            ratios: big_ratios,
            strict,
        })
    }

    /// `λ_k`: `1` for `k ∈ {1, 2}`, `e^{iπ/m_k}` for `k ≥ 3`.
    pub fn lambda_k(&self, k: usize) -> Result<Cplx> {
        if k == 0 {
            return Err(Error::InvalidParameter(format!("k must be >= 1")));
        }
        if k <= 2 {
            return Ok(Cplx::new(1.0, 0.0));
        }
        let m = self.m(k)?;
        let recip = BigRational::new(BigInt::one(), BigInt::from(m.clone()))
            .to_f64()
            .unwrap_or(0.0);
        Ok(Cplx::from_polar(1.0, core::f64::consts::PI * recip))
    }

    /// `t mod 2m_k`, exact.
    pub fn reduce_mod_period(&self, k: usize, t: &BigUint) -> Result<BigUint> {
        let m = self.m(k)?;
        Ok(t % (m * 2u32))
    }

    /// `λ_k^t = e^{iπt/m_k}` with exact reduction; exactly `1` when
    /// `t ≡ 0 (mod 2m_k)` and exactly `−1` when `t ≡ m_k`.
    pub fn lambda_pow(&self, k: usize, t: &BigUint) -> Result<Cplx> {
        if k == 0 {
            return Err(Error::InvalidParameter(format!("k must be >= 1")));
        }
        if k <= 2 {
            return Ok(Cplx::new(1.0, 0.0));
        }
        let m = self.m(k)?;
        let tr = t % (m * 2u32);
        if tr.is_zero() {
            return Ok(Cplx::new(1.0, 0.0));
        }
        if &tr == m {
            return Ok(Cplx::new(-1.0, 0.0));
        }
        let ratio = BigRational::new(BigInt::from(tr), BigInt::from(m.clone()))
            .to_f64()
            .unwrap_or(0.0);
        Ok(Cplx::from_polar(1.0, core::f64::consts::PI * ratio))
    }

    /// `λ_{k,t} = Σ_{l<t} λ_k^l` for `k ≥ 3`, via the stable polar form
    /// `sin(a t̃)/sin(a) · e^{ia(t̃−1)}` with `a = π/(2m_k)` and `t̃ = t mod
    /// 2m_k`. Exactly `0` when `t ≡ 0 (mod 2m_k)`.
    pub fn lambda_kt(&self, k: usize, t: &BigUint) -> Result<Cplx> {
        let (modulus, phase) = self.lambda_kt_polar(k, t)?;
        Ok(Cplx::from_polar(modulus, phase))
    }

    /// `|λ_{k,t}|`, the sine ratio `|sin(πt̃/(2m_k))| / sin(π/(2m_k))`.
    pub fn abs_lambda_kt(&self, k: usize, t: &BigUint) -> Result<f64> {
        Ok(self.lambda_kt_polar(k, t)?.0)
    }

    fn lambda_kt_polar(&self, k: usize, t: &BigUint) -> Result<(f64, f64)> {
        if k < 3 {
            return Err(Error::InvalidParameter(format!(
                "lambda_kt needs k >= 3, got {k}"
            )));
        }
        let m = self.m(k)?;
        let tr = t % (m * 2u32);
        if tr.is_zero() {
            return Ok((0.0, 0.0));
        }
        // r = t̃/m_k in (0, 2); both half-angles below come from r so the
        // reduction error is a single f64 rounding.
        let r = BigRational::new(BigInt::from(tr), BigInt::from(m.clone()))
            .to_f64()
            .unwrap_or(0.0);
        let half = core::f64::consts::FRAC_PI_2;
        let a = half
            * BigRational::new(BigInt::one(), BigInt::from(m.clone()))
                .to_f64()
                .unwrap_or(0.0);
        let modulus = libm::fabs(libm::sin(half * r)) / libm::sin(a);
        let phase = half * r - a;
        Ok((modulus, phase))
    }

    /// Upper bound for the nuclear norm of `N = R − I`:
    /// `Σ_{k=3}^{depth} (|λ_k − 1| + ‖f_k‖/m_{k−1})` plus an analytic tail
    /// majorant from the growth floor `m_{k+1} ≥ 15·m_k`.
    pub fn nuclear_norm_bound(&self, forms: &SeparatingSequence, depth: usize) -> Result<f64> {
        let depth = depth.min(self.depth());
        if depth < 3 {
            return Err(Error::InvalidParameter(format!("depth must be >= 3")));
        }
        let mut bound = 0.0f64;
        for k in 3..=depth {
            let lam = self.lambda_k(k)?;
            let prev = self.m(k - 1)?;
            let recip_prev = BigRational::new(BigInt::one(), BigInt::from(prev.clone()))
                .to_f64()
                .unwrap_or(0.0);
            bound += (lam - Cplx::new(1.0, 0.0)).norm() + forms.norm_of(k) * recip_prev;
        }
        // Tail: m_{k−1} ≥ m_depth · 15^{k−1−depth} for k > depth.
        let md = self
            .m(depth)?
            .to_f64()
            .unwrap_or(f64::INFINITY);
        if md.is_finite() {
            let floor = if self.strict { 15.0 } else { 1.0 };
            let mut scale = 1.0 / md;
            for k in (depth + 1)..(depth + 600) {
                let term = (core::f64::consts::PI / floor + forms.norm_of(k)) * scale;
                if !(term > bound * 1e-18) {
                    break;
                }
                bound += term;
                scale /= floor;
                if scale == 0.0 {
                    break;
                }
            }
        }
        Ok(bound)
    }
}

fn ratio_recipe(forms: &SeparatingSequence, k: usize) -> u64 {
    let raw = libm::ceil(((k + 2) * (k + 2)) as f64 * forms.norm_of(k + 2));
    (raw as u64).max(15)
}

/// Builds the strict schedule `r_k = max(15, ⌈(k+2)²·‖f_{k+2}‖⌉)` up to
/// `m_depth`.
///
/// With `epsilon` given, every `m_k` (the sentinel `m₂` included) is further
/// multiplied by a uniform integer factor so that [`ModulusSchedule::nuclear_norm_bound`]
/// comes out ≤ `epsilon`; the ratios are unchanged, so divisibility and the
/// growth floor survive the scaling.
pub fn build_schedule(
    forms: &SeparatingSequence,
    depth: usize,
    epsilon: Option<f64>,
) -> Result<ModulusSchedule> {
    build_schedule_capped(forms, depth, epsilon, MAX_DIGITS)
}

/// [`build_schedule`] with an explicit decimal-digit cap on every `m_k`.
pub fn build_schedule_capped(
    forms: &SeparatingSequence,
    depth: usize,
    epsilon: Option<f64>,
    max_digits: f64,
) -> Result<ModulusSchedule> {
    if depth < 3 {
        return Err(Error::InvalidParameter(format!(
            "schedule depth must be >= 3, got {depth}"
        )));
    }
    let mut scale = BigUint::one();
    if let Some(eps) = epsilon {
        if !(eps > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive, got {eps}"
            )));
        }
        let base = assemble(forms, depth, &BigUint::one(), max_digits)?;
        let raw = base.nuclear_norm_bound(forms, depth)?;
        scale = BigUint::from_f64(libm::ceil(raw / eps)).ok_or_else(|| {
            Error::InvalidParameter(format!("epsilon {eps} too small to scale for"))
        })?;
        if scale.is_zero() {
            scale = BigUint::one();
        }
        // The bound scales as 1/c; one doubling absorbs any float slack.
        loop {
            let scaled = assemble(forms, depth, &scale, max_digits)?;
            if scaled.nuclear_norm_bound(forms, depth)? <= eps {
                return Ok(scaled);
            }
            scale *= 2u32;
        }
    }
    assemble(forms, depth, &scale, max_digits)
}

fn assemble(
    forms: &SeparatingSequence,
    depth: usize,
    scale: &BigUint,
    max_digits: f64,
) -> Result<ModulusSchedule> {
    let mut m = Vec::with_capacity(depth - 1);
    let mut ratios = Vec::with_capacity(depth - 2);
    m.push(scale.clone());
    for k in 2..depth {
        let r = ratio_recipe(forms, k);
        let next = m.last().expect("nonempty") * r;
        if digits_of(&next) > max_digits {
            return Err(Error::SizeCapExceeded(format!(
                "m_{} exceeds {max_digits} decimal digits",
                k + 1
            )));
        }
        ratios.push(BigUint::from(r));
        m.push(next);
    }
    Ok(ModulusSchedule {
        m,
        ratios,
        strict: true,
    })
}
