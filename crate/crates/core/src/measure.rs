//! Finite positive measures represented as lists of weighted atoms.
//!
//! Every integral against an [`AtomicMeasure`] is a finite sum, which is what
//! makes box suprema and `L^q` norms exactly computable.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CarlesonError, Result};
use crate::geometry::{is_finite, CarlesonSquare, CircularDomain, MobiusMap};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub z: Complex64,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "MeasureSpec", into = "MeasureSpec")]
pub struct AtomicMeasure {
    atoms: Vec<Atom>,
}

/// Wire form: `{ "atoms": [ {"z":[x,y], "w":w}, ... ] }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasureSpec {
    pub atoms: Vec<AtomSpec>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AtomSpec {
    pub z: [f64; 2],
    pub w: f64,
}

impl TryFrom<MeasureSpec> for AtomicMeasure {
    type Error = CarlesonError;

    fn try_from(spec: MeasureSpec) -> Result<Self> {
        AtomicMeasure::new(
            spec.atoms.into_iter().map(|a| Atom { z: Complex64::new(a.z[0], a.z[1]), w: a.w }).collect(),
        )
    }
}

impl From<AtomicMeasure> for MeasureSpec {
    fn from(m: AtomicMeasure) -> Self {
        MeasureSpec { atoms: m.atoms.iter().map(|a| AtomSpec { z: [a.z.re, a.z.im], w: a.w }).collect() }
    }
}

impl AtomicMeasure {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        for (i, a) in atoms.iter().enumerate() {
            if !is_finite(a.z) {
                return Err(CarlesonError::InvalidMeasure(format!("atom {i} has a non-finite location")));
            }
            if !(a.w.is_finite() && a.w > 0.0) {
                return Err(CarlesonError::InvalidMeasure(format!("atom {i} has non-positive weight {}", a.w)));
            }
        }
        Ok(Self { atoms })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn point_mass(z: Complex64, w: f64) -> Result<Self> {
        Self::new(vec![Atom { z, w }])
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.w).sum()
    }

    /// `∫ g dμ`.
    pub fn integrate(&self, g: impl Fn(Complex64) -> f64) -> f64 {
        self.atoms.iter().map(|a| a.w * g(a.z)).sum()
    }

    /// Checks that every atom lies in the open domain (boundary atoms are rejected).
    pub fn validate_in(&self, domain: &CircularDomain) -> Result<()> {
        self.validate_with(|z| domain.contains(z))
    }

    pub fn validate_with(&self, inside: impl Fn(Complex64) -> bool) -> Result<()> {
        match self.atoms.iter().position(|a| !inside(a.z)) {
            Some(index) => Err(CarlesonError::AtomOutsideDomain { index, z: self.atoms[index].z }),
            None => Ok(()),
        }
    }

    /// `μ ∘ map^{-1}`: every atom moves to `map(z)` keeping its weight.
    pub fn pushforward(&self, map: impl Fn(Complex64) -> Result<Complex64>) -> Result<Self> {
        let atoms = self
            .atoms
            .iter()
            .map(|a| map(a.z).map(|z| Atom { z, w: a.w }))
            .collect::<Result<Vec<_>>>()?;
        Self::new(atoms)
    }

    pub fn pushforward_mobius(&self, map: &MobiusMap) -> Result<Self> {
        self.pushforward(|z| map.apply(z))
    }

    pub fn restrict(&self, keep: impl Fn(Complex64) -> bool) -> Self {
        Self { atoms: self.atoms.iter().copied().filter(|a| keep(a.z)).collect() }
    }

    pub fn sum<'a>(parts: impl IntoIterator<Item = &'a AtomicMeasure>) -> Self {
        Self { atoms: parts.into_iter().flat_map(|m| m.atoms.iter().copied()).collect() }
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(CarlesonError::InvalidParameter(format!("scale factor {c} must be positive")));
        }
        Ok(Self { atoms: self.atoms.iter().map(|a| Atom { z: a.z, w: a.w * c }).collect() })
    }

    /// `μ(S)` for a Carleson square on a circular domain.
    pub fn mass_in_square(&self, domain: &CircularDomain, square: &CarlesonSquare) -> f64 {
        self.restrict(|z| crate::geometry::square_contains(domain, square, z)).total_mass()
    }

    /// Quasi–Monte Carlo atomization of `density · dA` on `G`.
    ///
    /// Points come from the 2-D Halton sequence (bases 2 and 3, index starting
    /// at 1) scaled to the bounding square of the outer circle; points outside
    /// `G` are dropped and each kept point carries `density(z) · (cell area)`
    /// with cell area `(2 r_0)^2 / samples`. Points with zero density are
    /// dropped.
    pub fn atomize_area(
        domain: &CircularDomain,
        samples: usize,
        density: impl Fn(Complex64) -> f64,
    ) -> Result<Self> {
        let outer = domain.outer();
        let side = 2.0 * outer.radius;
        let cell = side * side / samples as f64;
        let mut atoms = Vec::new();
        for k in 1..=samples {
            let z = outer.center
                + Complex64::new((halton(k, 2) - 0.5) * side, (halton(k, 3) - 0.5) * side);
            if domain.contains(z) {
                let w = density(z) * cell;
                if w > 0.0 {
                    atoms.push(Atom { z, w });
                }
            }
        }
        Self::new(atoms)
    }
}

/// Radical inverse of `index` in `base`.
fn halton(mut index: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= base as f64;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}
