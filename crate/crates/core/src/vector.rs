//! Finitely supported coordinate vectors over the real or complex field,
//! their ℓ^p norms, the base-plane projection and decreasing rearrangements.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::Cplx;

/// Scalar field tag. Real-mode values must have an exactly zero imaginary
/// part; every constructor enforces this.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    pub fn admits(&self, z: Cplx) -> bool {
        match self {
            Field::Real => z.im == 0.0,
            Field::Complex => true,
        }
    }
}

/// The exponent of an ℓ^p norm, `1 ≤ p ≤ ∞` (`f64::INFINITY` is the
/// supremum norm).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormSpec {
    p: f64,
}

impl NormSpec {
    pub fn new(p: f64) -> Result<Self> {
        if p >= 1.0 {
            Ok(NormSpec { p })
        } else {
            Err(Error::InvalidParameter(format!("p = {p} must be >= 1")))
        }
    }

    pub fn sup() -> Self {
        NormSpec { p: f64::INFINITY }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn is_sup(&self) -> bool {
        self.p.is_infinite()
    }

    /// Norm of a list of absolute values. Scaled by the maximum before
    /// exponentiation so that large entries do not overflow `|v|^p`.
    pub fn of_abs(&self, abs: impl Iterator<Item = f64> + Clone) -> f64 {
        let max = abs.clone().fold(0.0f64, f64::max);
        if max == 0.0 {
            return 0.0;
        }
        if self.is_sup() {
            return max;
        }
        let sum: f64 = abs.map(|a| libm::pow(a / max, self.p)).sum();
        max * libm::pow(sum, 1.0 / self.p)
    }

    /// Combine p-th-power masses of disjointly supported parts back into a
    /// norm. `masses` are values of `Σ |v_i|^p` (or maxima when p = ∞).
    pub fn of_masses(&self, masses: impl Iterator<Item = f64>) -> f64 {
        if self.is_sup() {
            masses.fold(0.0, f64::max)
        } else {
            libm::pow(masses.sum(), 1.0 / self.p)
        }
    }

    /// The p-th-power mass of one absolute value (the value itself for p = ∞).
    pub fn mass(&self, a: f64) -> f64 {
        if self.is_sup() {
            a
        } else {
            libm::pow(a, self.p)
        }
    }
}

/// A finitely supported vector: a map from positive coordinate index to a
/// nonzero scalar. Entries that are exactly zero are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVector {
    field: Field,
    entries: BTreeMap<u64, Cplx>,
}

impl SparseVector {
    pub fn new(field: Field) -> Self {
        SparseVector {
            field,
            entries: BTreeMap::new(),
        }
    }

    pub fn from_entries(field: Field, entries: &[(u64, Cplx)]) -> Result<Self> {
        let mut v = SparseVector::new(field);
        for &(i, z) in entries {
            v.set(i, z)?;
        }
        Ok(v)
    }

    /// Real-mode convenience constructor.
    pub fn from_real(entries: &[(u64, f64)]) -> Self {
        let mut v = SparseVector::new(Field::Real);
        for &(i, x) in entries {
            v.set(i, Cplx::new(x, 0.0)).expect("real entry");
        }
        v
    }

    /// The basis vector `e_i`.
    pub fn basis(field: Field, i: u64) -> Self {
        let mut v = SparseVector::new(field);
        v.set(i, Cplx::new(1.0, 0.0)).expect("unit entry");
        v
    }

    pub fn field(&self) -> Field {
        self.field
    }

    /// Writes one coordinate; a zero value removes the entry.
    pub fn set(&mut self, index: u64, value: Cplx) -> Result<()> {
        if index == 0 {
            return Err(Error::InvalidParameter(format!(
                "coordinate indices start at 1, got 0"
            )));
        }
        if !self.field.admits(value) {
            return Err(Error::FieldMismatch);
        }
        if value == Cplx::new(0.0, 0.0) {
            self.entries.remove(&index);
        } else {
            self.entries.insert(index, value);
        }
        Ok(())
    }

    /// Adds `value` into one coordinate.
    pub fn add(&mut self, index: u64, value: Cplx) -> Result<()> {
        let current = self.get(index);
        self.set(index, current + value)
    }

    pub fn get(&self, index: u64) -> Cplx {
        self.entries
            .get(&index)
            .copied()
            .unwrap_or(Cplx::new(0.0, 0.0))
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, Cplx)> + Clone + '_ {
        self.entries.iter().map(|(&i, &z)| (i, z))
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn max_support(&self) -> Option<u64> {
        self.entries.keys().next_back().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scaled(&self, by: Cplx) -> Self {
        let mut out = SparseVector::new(if by.im != 0.0 {
            Field::Complex
        } else {
            self.field
        });
        if by == Cplx::new(0.0, 0.0) {
            return out;
        }
        for (i, z) in self.iter() {
            out.set(i, z * by).expect("scaled entry");
        }
        out
    }

    pub fn sub(&self, other: &SparseVector) -> SparseVector {
        let field = if self.field == Field::Complex || other.field == Field::Complex {
            Field::Complex
        } else {
            Field::Real
        };
        let mut out = SparseVector::new(field);
        for (i, z) in self.iter() {
            out.set(i, z).expect("entry");
        }
        for (i, z) in other.iter() {
            out.add(i, -z).expect("entry");
        }
        out
    }

    pub fn plus(&self, other: &SparseVector) -> SparseVector {
        out_sum(self, other)
    }
}

fn out_sum(a: &SparseVector, b: &SparseVector) -> SparseVector {
    let field = if a.field == Field::Complex || b.field == Field::Complex {
        Field::Complex
    } else {
        Field::Real
    };
    let mut out = SparseVector::new(field);
    for (i, z) in a.iter() {
        out.set(i, z).expect("entry");
    }
    for (i, z) in b.iter() {
        out.add(i, z).expect("entry");
    }
    out
}

/// `(Σ |v_i|^p)^{1/p}`, or `max |v_i|` when p = ∞; 0 for the empty vector.
pub fn lp_norm(v: &SparseVector, n: NormSpec) -> f64 {
    n.of_abs(v.iter().map(|(_, z)| z.norm()))
}

/// The coordinates of `x` in the base plane `span(e₁, e₂)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanePoint {
    pub c1: Cplx,
    pub c2: Cplx,
    pub field: Field,
}

impl PlanePoint {
    pub fn new(field: Field, c1: Cplx, c2: Cplx) -> Result<Self> {
        if field.admits(c1) && field.admits(c2) {
            Ok(PlanePoint { c1, c2, field })
        } else {
            Err(Error::FieldMismatch)
        }
    }

    pub fn real(c1: f64, c2: f64) -> Self {
        PlanePoint {
            c1: Cplx::new(c1, 0.0),
            c2: Cplx::new(c2, 0.0),
            field: Field::Real,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.c1 == Cplx::new(0.0, 0.0) && self.c2 == Cplx::new(0.0, 0.0)
    }

    /// Euclidean norm of the pair.
    pub fn norm2(&self) -> f64 {
        libm::hypot(self.c1.norm(), self.c2.norm())
    }

    /// The vector `c1·e₁ + c2·e₂` this point came from.
    pub fn to_vector(&self) -> SparseVector {
        let mut v = SparseVector::new(self.field);
        v.set(1, self.c1).expect("plane entry");
        v.set(2, self.c2).expect("plane entry");
        v
    }

    pub fn scaled(&self, by: Cplx) -> PlanePoint {
        PlanePoint {
            c1: self.c1 * by,
            c2: self.c2 * by,
            field: if by.im != 0.0 {
                Field::Complex
            } else {
                self.field
            },
        }
    }
}

/// The projection `P` onto `span(e₁, e₂)`: coordinate read-off at indices 1
/// and 2. With the unit coordinate basis, ‖P‖ = 1.
pub fn project_p(x: &SparseVector) -> PlanePoint {
    PlanePoint {
        c1: x.get(1),
        c2: x.get(2),
        field: x.field(),
    }
}

/// The multiset `{|v_i|}` sorted non-increasingly. Any symmetric norm of `v`
/// equals the same norm of this profile.
pub fn decreasing_rearrangement(v: &SparseVector) -> Vec<f64> {
    let mut abs: Vec<f64> = v.iter().map(|(_, z)| z.norm()).collect();
    abs.sort_by(|a, b| b.partial_cmp(a).expect("finite magnitudes"));
    abs
}
