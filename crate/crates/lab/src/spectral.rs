//! Spectral diagnostics: spectra of the truncations, a kernel probe for the
//! compact part, the circle-restoring perturbation, the backward-shift
//! contrast, and partial sums of inverse power norms.

use anyhow::{bail, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use wildorbit_core::forms::SeparatingSequence;
use wildorbit_core::lines::{classify_base_point, BaseClass};
use wildorbit_core::schedule::ModulusSchedule;
use wildorbit_core::vector::PlanePoint;

use crate::matrices::{operator_norm, TruncatedMatrix};

/// `{1, 1, λ₃, …, λ_depth}`, the diagonal of the complex-model truncation.
pub fn diagonal_spectrum(schedule: &ModulusSchedule, depth: usize) -> Result<Vec<Complex64>> {
    let depth = depth.min(schedule.depth());
    let mut out = vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)];
    for k in 3..=depth {
        out.push(schedule.lambda_k(k)?);
    }
    Ok(out)
}

/// Greedy matching of two unordered spectra; returns the largest pairing
/// distance.
pub fn spectrum_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let mut remaining: Vec<Complex64> = b.to_vec();
    let mut worst = if a.len() == b.len() { 0.0 } else { f64::INFINITY };
    for z in a {
        if remaining.is_empty() {
            return f64::INFINITY;
        }
        let (idx, dist) = remaining
            .iter()
            .enumerate()
            .map(|(i, w)| (i, (z - w).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .expect("nonempty");
        worst = worst.max(dist);
        remaining.swap_remove(idx);
    }
    worst
}

/// The `h`-th roots of unity, which are exactly the eigenvalues of the
/// length-`h` cycle permutation; the eigensolve cross-check lives in the
/// test suites.
pub fn hs_block_spectrum(h: usize) -> Result<Vec<Complex64>> {
    if h == 0 || h > crate::matrices::DENSE_CAP {
        bail!("cycle length {h} outside (0, {}]", crate::matrices::DENSE_CAP);
    }
    Ok((0..h)
        .map(|j| Complex64::from_polar(1.0, core::f64::consts::TAU * j as f64 / h as f64))
        .collect())
}

/// Output of [`kernel_triviality_probe`].
#[derive(Debug, Clone)]
pub struct KernelProbe {
    /// Set when F is a single line through e₁'s direction: the compact part
    /// genuinely kills e₁ and the kernel is nontrivial.
    pub degenerate_direction: Option<(f64, f64)>,
    /// `(k, 15·|f_k(Px)|/π)` along the subsequence where `|f_k(Px)| ≥ threshold`.
    pub forced_bounds: Vec<(usize, f64)>,
    pub threshold: f64,
    /// Smallest forced coefficient bound along the subsequence.
    pub min_forced: f64,
}

/// Probes whether a kernel vector of the compact part can exist with
/// `Px ≠ 0`: any such vector needs `|x_k| ≥ 15|f_k(Px)|/π`, incompatible
/// with decay whenever the forced bounds stay away from zero.
pub fn kernel_triviality_probe(
    forms: &SeparatingSequence,
    base: &PlanePoint,
    depth: usize,
    threshold: f64,
) -> Result<KernelProbe> {
    let mut probe = KernelProbe {
        degenerate_direction: None,
        forced_bounds: Vec::new(),
        threshold,
        min_forced: f64::INFINITY,
    };
    if !forms.f_set().more_than_one_line() {
        let e1 = PlanePoint::real(1.0, 0.0);
        let (class, _) = classify_base_point(&e1, forms.f_set());
        if class == BaseClass::InF {
            // All net points lie on span(e₁), so every f_k kills e₁.
            probe.degenerate_direction = Some((1.0, 0.0));
        }
    }
    let depth = depth.min(forms.len());
    for k in 1..=depth {
        let f_val = forms.eval(k, base)?.norm();
        if f_val >= threshold {
            let bound = 15.0 * f_val / core::f64::consts::PI;
            probe.min_forced = probe.min_forced.min(bound);
            probe.forced_bounds.push((k, bound));
        }
    }
    Ok(probe)
}

/// `R + 2ελI` on a truncation, with `|λ| = 1`.
#[derive(Debug, Clone)]
pub struct PerturbedOp {
    pub base: TruncatedMatrix,
    pub epsilon: f64,
    pub lambda: Complex64,
}

pub fn prajitura_perturbation(
    base: &TruncatedMatrix,
    epsilon: f64,
    lambda: Complex64,
) -> Result<PerturbedOp> {
    if !(epsilon >= 0.0) {
        bail!("epsilon must be nonnegative, got {epsilon}");
    }
    if (lambda.norm() - 1.0).abs() > 1e-12 {
        bail!("lambda must lie on the unit circle, got |lambda| = {}", lambda.norm());
    }
    Ok(PerturbedOp {
        base: base.clone(),
        epsilon,
        lambda,
    })
}

impl PerturbedOp {
    pub fn matrix(&self) -> DMatrix<Complex64> {
        let shift = self.lambda * Complex64::new(2.0 * self.epsilon, 0.0);
        &self.base.entries + DMatrix::<Complex64>::identity(self.base.n, self.base.n) * shift
    }

    pub fn spectral_radius(&self) -> Result<f64> {
        TruncatedMatrix {
            n: self.base.n,
            entries: self.matrix(),
            provenance: format!("{} + 2e·lambda·I", self.base.provenance),
        }
        .spectral_radius()
    }

    /// `‖R − R_ε‖ = 2ε` in every ℓ^p (scalar multiple of the identity).
    pub fn distance_to_base(&self, p: f64) -> f64 {
        operator_norm(&(self.matrix() - &self.base.entries), p)
    }

    /// Geometric growth rate of one sampled orbit, measured as the average
    /// per-step norm ratio over the second half of the horizon.
    pub fn orbit_growth_rate(&self, start: &[Complex64], horizon: usize) -> Result<f64> {
        if start.len() != self.base.n {
            bail!("start vector dimension mismatch");
        }
        let a = self.matrix();
        let mut x = nalgebra::DVector::<Complex64>::from_column_slice(start);
        let mut log_sum = 0.0;
        let mut counted = 0usize;
        for t in 0..horizon {
            let norm = x.norm();
            if norm == 0.0 {
                bail!("orbit hit zero");
            }
            x /= Complex64::new(norm, 0.0);
            x = &a * x;
            if t >= horizon / 2 {
                log_sum += x.norm().ln();
                counted += 1;
            }
        }
        Ok((log_sum / counted.max(1) as f64).exp())
    }
}

/// Partial sums `Σ_{k ≤ T} 1/‖A^k‖_p` on a truncation.
pub fn mv_partial_sums(a: &DMatrix<Complex64>, t_max: usize, p: f64) -> Result<Vec<f64>> {
    if a.nrows() > 512 {
        bail!("partial-sum truncations capped at dimension 512");
    }
    let mut power = a.clone();
    let mut sums = Vec::with_capacity(t_max);
    let mut acc = 0.0;
    for _ in 1..=t_max {
        let norm = operator_norm(&power, p);
        if norm == 0.0 {
            bail!("nilpotent truncation: power norm hit zero");
        }
        acc += 1.0 / norm;
        sums.push(acc);
        power = &power * a;
        if power.iter().any(|z| !z.norm().is_finite()) {
            bail!("power overflow before reaching T");
        }
    }
    Ok(sums)
}

/// Orbit report for the weighted backward shift `B e_i = (i/(i−1))^{1/p} e_{i−1}`.
#[derive(Debug, Clone)]
pub struct BackwardShiftReport {
    pub p: f64,
    /// `‖B^t e_{t+1}‖ = (t+1)^{1/p}`, also the truncated operator norm.
    pub power_norms: Vec<f64>,
    /// Partial sums `Σ_{k ≤ T} 1/‖B^k‖`, which keep growing.
    pub inverse_norm_sums: Vec<f64>,
    /// `B^t x = 0` for every probed finitely supported x once t covers its
    /// support.
    pub annihilation_verified: bool,
}

pub fn backward_shift_demo(p: f64, horizon: usize) -> Result<BackwardShiftReport> {
    if !(p >= 1.0) || p.is_infinite() {
        bail!("demo needs 1 <= p < infinity, got {p}");
    }
    if horizon == 0 {
        bail!("horizon must be positive");
    }
    let weight = |i: u64| -> f64 { (i as f64 / (i as f64 - 1.0)).powf(1.0 / p) };
    // B^t x for sparse x = {(index, coeff)}.
    let shift_t = |x: &[(u64, f64)], t: u64| -> Vec<(u64, f64)> {
        x.iter()
            .filter(|(i, _)| *i > t)
            .map(|&(i, c)| {
                let mut c = c;
                for s in 0..t {
                    c *= weight(i - s);
                }
                (i - t, c)
            })
            .collect()
    };
    let mut annihilation_verified = true;
    for top in [1u64, 3, 5, 9] {
        let x: Vec<(u64, f64)> = (1..=top).map(|i| (i, 1.0 / i as f64)).collect();
        if !shift_t(&x, top).is_empty() {
            annihilation_verified = false;
        }
        // One step short of the support max must still be nonzero.
        if shift_t(&x, top - 1).is_empty() {
            annihilation_verified = false;
        }
    }
    let mut power_norms = Vec::with_capacity(horizon);
    let mut inverse_norm_sums = Vec::with_capacity(horizon);
    let mut acc = 0.0;
    for t in 1..=horizon as u64 {
        // sup over i > t of Π weights = ((t+1)/1)^{1/p}, attained at i = t+1.
        let norm = ((t + 1) as f64).powf(1.0 / p);
        let single = shift_t(&[(t + 1, 1.0)], t);
        let direct = single.first().map(|&(_, c)| c.abs()).unwrap_or(0.0);
        if (direct - norm).abs() > 1e-9 * norm {
            bail!("telescoping check failed at t = {t}: {direct} vs {norm}");
        }
        acc += 1.0 / norm;
        power_norms.push(norm);
        inverse_norm_sums.push(acc);
    }
    Ok(BackwardShiftReport {
        p,
        power_norms,
        inverse_norm_sums,
        annihilation_verified,
    })
}

/// Max eigenvalue modulus of a truncation.
pub fn spectral_radius_check(t: &TruncatedMatrix) -> Result<f64> {
    t.spectral_radius()
}

/// `‖K‖ = ‖R − I‖` on the truncation, as the largest singular value when
/// p = 2.
pub fn compact_part_norm(t: &TruncatedMatrix, p: f64) -> f64 {
    let k = &t.entries - DMatrix::<Complex64>::identity(t.n, t.n);
    operator_norm(&k, p)
}

/// Density diagnostic for the union of root-of-unity groups: the largest
/// angular gap once all `H_k`-th roots for the given lengths are merged.
pub fn max_root_gap(cycle_lengths: &[usize]) -> Result<f64> {
    let mut args: Vec<f64> = Vec::new();
    for &h in cycle_lengths {
        for z in hs_block_spectrum(h)? {
            args.push(z.arg());
        }
    }
    if args.is_empty() {
        bail!("no cycle lengths given");
    }
    args.sort_by(f64::total_cmp);
    args.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let mut gap: f64 = 0.0;
    for w in args.windows(2) {
        gap = gap.max(w[1] - w[0]);
    }
    gap = gap.max(args[0] + core::f64::consts::TAU - args[args.len() - 1]);
    Ok(gap)
}

/// Schedule lambda helper re-exported for reports.
pub fn lambda_of(schedule: &ModulusSchedule, k: usize) -> Result<Complex64> {
    Ok(schedule.lambda_k(k)?)
}

#[allow(unused)]
fn big_to_f64(v: &num_bigint::BigUint) -> f64 {
    v.to_f64().unwrap_or(f64::INFINITY)
}
