//! Dense truncations of the operators and the operator-norm toolbox used by
//! the spectral diagnostics.

use anyhow::{bail, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use wildorbit_core::forms::SeparatingSequence;
use wildorbit_core::rotation::mu_kt;
use wildorbit_core::schedule::ModulusSchedule;
use wildorbit_core::vector::PlanePoint;

/// Dense eigensolves are capped here.
pub const DENSE_CAP: usize = 4096;

/// A finite section of one of the operators, with a note on where it came
/// from.
#[derive(Debug, Clone)]
pub struct TruncatedMatrix {
    pub n: usize,
    pub entries: DMatrix<Complex64>,
    pub provenance: String,
}

/// A deterministic random unitary, used to conjugate structured matrices
/// before the QR iteration: permutation and rotation blocks are unitary and
/// can cycle forever under unshifted QR, while a generic dense similarity
/// converges and leaves the eigenvalues untouched.
fn scrambling_unitary(n: usize) -> DMatrix<Complex64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
    let g = DMatrix::<Complex64>::from_fn(n, n, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    g.qr().q()
}

impl TruncatedMatrix {
    pub fn eigenvalues(&self) -> Result<Vec<Complex64>> {
        let q = scrambling_unitary(self.n);
        let conjugated = q.adjoint() * &self.entries * &q;
        let schur = nalgebra::linalg::Schur::try_new(conjugated, 1e-14, 1_000_000)
            .ok_or_else(|| anyhow::anyhow!("Schur iteration stalled for {}", self.provenance))?;
        schur
            .eigenvalues()
            .map(|v| v.iter().copied().collect())
            .ok_or_else(|| anyhow::anyhow!("eigensolve failed for {}", self.provenance))
    }

    pub fn spectral_radius(&self) -> Result<f64> {
        Ok(self
            .eigenvalues()?
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max))
    }
}

/// The complex-model truncation on span(e₁, …, e_n): unit diagonal on the
/// plane, λ_k beyond, plus the rank-two bump `f_k(Pe_j)/m_{k−1}` in columns
/// 1 and 2.
pub fn diagonal_truncation(
    schedule: &ModulusSchedule,
    forms: &SeparatingSequence,
    n: usize,
) -> Result<TruncatedMatrix> {
    if n > DENSE_CAP {
        bail!("truncation dimension {n} exceeds the dense cap {DENSE_CAP}");
    }
    if n > schedule.depth() || n > forms.len() {
        bail!(
            "truncation dimension {n} exceeds depth {} / forms {}",
            schedule.depth(),
            forms.len()
        );
    }
    let mut a = DMatrix::<Complex64>::zeros(n, n);
    for j in 1..=n.min(2) {
        a[(j - 1, j - 1)] = Complex64::new(1.0, 0.0);
    }
    for k in 3..=n {
        a[(k - 1, k - 1)] = schedule.lambda_k(k)?;
        let m_prev = schedule.m(k - 1)?.to_f64().unwrap_or(f64::INFINITY);
        for j in 1..=2usize {
            let base = if j == 1 {
                PlanePoint::real(1.0, 0.0)
            } else {
                PlanePoint::real(0.0, 1.0)
            };
            a[(k - 1, j - 1)] = forms.eval(k, &base)? / m_prev;
        }
    }
    Ok(TruncatedMatrix {
        n,
        entries: a,
        provenance: format!("complex model, dimension {n}"),
    })
}

/// The real-model truncation on span(e₁, …, e_{2K}): identity on the plane,
/// 2×2 rotation by π/m_k on block k, plus the bump `(f_k(Pe_j)/m_{k−1})·μ_{k,1}`
/// in columns 1 and 2.
pub fn rotation_truncation(
    schedule: &ModulusSchedule,
    forms: &SeparatingSequence,
    blocks: usize,
) -> Result<TruncatedMatrix> {
    let n = 2 * blocks;
    if n > DENSE_CAP {
        bail!("truncation dimension {n} exceeds the dense cap {DENSE_CAP}");
    }
    if blocks > schedule.depth() || blocks > forms.len() {
        bail!("block count {blocks} exceeds depth");
    }
    let mut a = DMatrix::<Complex64>::zeros(n, n);
    a[(0, 0)] = Complex64::new(1.0, 0.0);
    a[(1, 1)] = Complex64::new(1.0, 0.0);
    let one = num_bigint::BigUint::from(1u32);
    for k in 2..=blocks {
        let lam = schedule.lambda_k(k)?;
        let (c, s) = (lam.re, lam.im);
        let (r, c0) = (2 * k - 2, 2 * k - 2);
        a[(r, c0)] = Complex64::new(c, 0.0);
        a[(r, c0 + 1)] = Complex64::new(-s, 0.0);
        a[(r + 1, c0)] = Complex64::new(s, 0.0);
        a[(r + 1, c0 + 1)] = Complex64::new(c, 0.0);
        let m_prev = schedule
            .m(k.max(3) - 1)?
            .to_f64()
            .unwrap_or(f64::INFINITY);
        let (mu_odd, mu_even) = mu_kt(schedule, k, &one)?;
        for j in 1..=2usize {
            let base = if j == 1 {
                PlanePoint::real(1.0, 0.0)
            } else {
                PlanePoint::real(0.0, 1.0)
            };
            let f_val = forms.eval(k, &base)?.re / m_prev;
            a[(r, j - 1)] = Complex64::new(f_val * mu_odd, 0.0);
            a[(r + 1, j - 1)] = Complex64::new(f_val * mu_even, 0.0);
        }
    }
    Ok(TruncatedMatrix {
        n,
        entries: a,
        provenance: format!("real model, {blocks} blocks"),
    })
}

/// The cycle permutation on one block of length `h`.
pub fn cycle_truncation(h: usize) -> Result<TruncatedMatrix> {
    if h > DENSE_CAP {
        bail!("cycle length {h} exceeds the dense cap {DENSE_CAP}");
    }
    if h == 0 {
        bail!("cycle length must be positive");
    }
    let mut a = DMatrix::<Complex64>::zeros(h, h);
    for j in 0..h {
        a[((j + 1) % h, j)] = Complex64::new(1.0, 0.0);
    }
    Ok(TruncatedMatrix {
        n: h,
        entries: a,
        provenance: format!("cycle of length {h}"),
    })
}

/// `‖A‖` as an operator on ℓ^p coordinates: exact column/row sums at
/// p ∈ {1, ∞}, the largest singular value at p = 2, and a fixed-point power
/// method (lower-biased estimate) otherwise.
pub fn operator_norm(a: &DMatrix<Complex64>, p: f64) -> f64 {
    let (rows, cols) = a.shape();
    if p == 1.0 {
        return (0..cols)
            .map(|j| (0..rows).map(|i| a[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max);
    }
    if p.is_infinite() {
        return (0..rows)
            .map(|i| (0..cols).map(|j| a[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max);
    }
    if p == 2.0 {
        let svd = a.clone().svd(false, false);
        return svd.singular_values.iter().copied().fold(0.0, f64::max);
    }
    // Boyd's p-norm power method.
    let q = p / (p - 1.0);
    let mut x: Vec<f64> = vec![1.0 / (cols as f64).powf(1.0 / p); cols];
    let mut norm = 0.0;
    for _ in 0..200 {
        let y: Vec<f64> = (0..rows)
            .map(|i| (0..cols).map(|j| a[(i, j)].norm() * x[j]).sum::<f64>())
            .collect();
        let y_norm = y.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p);
        if y_norm == 0.0 {
            return 0.0;
        }
        // Dual step: z_j = (Aᵀ (y/‖y‖)^{p−1})_j, renormalized in ℓ^q sense.
        let z: Vec<f64> = (0..cols)
            .map(|j| {
                (0..rows)
                    .map(|i| a[(i, j)].norm() * (y[i] / y_norm).powf(p - 1.0))
                    .sum::<f64>()
            })
            .collect();
        let z_norm = z.iter().map(|v| v.abs().powf(q)).sum::<f64>().powf(1.0 / q);
        if z_norm == 0.0 {
            return y_norm;
        }
        let next: Vec<f64> = z
            .iter()
            .map(|v| (v / z_norm).powf(q - 1.0))
            .collect();
        let next_norm = next.iter().map(|v| v.powf(p)).sum::<f64>().powf(1.0 / p);
        x = next.iter().map(|v| v / next_norm).collect();
        if (y_norm - norm).abs() <= 1e-12 * y_norm {
            return y_norm;
        }
        norm = y_norm;
    }
    norm
}
