//! Open sets with finitely many components and the weighted criterion.
//!
//! Component order is part of the input: the default weights `2^{-n}`
//! (`n = 1, 2, …`) attach to components in the order given, and changing the
//! order changes the composite harmonic measure `Σ w_n ω_n`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::boxes::box_ratio_circular;
use crate::conformal::{pushforward_measure, PresentedDomain};
use crate::error::{CarlesonError, Result};
use crate::harmonic::mutually_singular_check;
use crate::measure::AtomicMeasure;
use crate::norms::{ConstantEstimate, ConstantEstimator, NormConfig};

const WEIGHT_SUM_TOL: f64 = 1e-12;
/// Relative slack on `C*` in the composite check.
pub const COMPOSITE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OpenSetSpec", into = "OpenSetSpec")]
pub struct OpenSetDomain {
    components: Vec<PresentedDomain>,
    weights: Vec<f64>,
}

/// Wire form: `{"components": [...], "weights": [...]}`; weights default to `2^{-n}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OpenSetSpec {
    pub components: Vec<PresentedDomain>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

impl TryFrom<OpenSetSpec> for OpenSetDomain {
    type Error = CarlesonError;

    fn try_from(spec: OpenSetSpec) -> Result<Self> {
        OpenSetDomain::new(spec.components, spec.weights)
    }
}

impl From<OpenSetDomain> for OpenSetSpec {
    fn from(o: OpenSetDomain) -> Self {
        OpenSetSpec { components: o.components, weights: Some(o.weights) }
    }
}

pub fn default_weights(n: usize) -> Vec<f64> {
    (1..=n).map(|k| 0.5f64.powi(k as i32)).collect()
}

fn check_weights(weights: &[f64], n: usize) -> Result<()> {
    if weights.len() != n {
        return Err(CarlesonError::InvalidWeights(format!("{} weights for {n} components", weights.len())));
    }
    if let Some(k) = weights.iter().position(|&b| !(b.is_finite() && b > 0.0)) {
        return Err(CarlesonError::InvalidWeights(format!("weight {} = {} is not positive", k + 1, weights[k])));
    }
    let total: f64 = weights.iter().sum();
    if total > 1.0 + WEIGHT_SUM_TOL {
        return Err(CarlesonError::InvalidWeights(format!("weights sum to {total} > 1")));
    }
    Ok(())
}

impl OpenSetDomain {
    /// Rejects open sets whose component closures are not certified disjoint.
    pub fn new(components: Vec<PresentedDomain>, weights: Option<Vec<f64>>) -> Result<Self> {
        if components.is_empty() {
            return Err(CarlesonError::InvalidOpenSet("no components".into()));
        }
        let weights = weights.unwrap_or_else(|| default_weights(components.len()));
        check_weights(&weights, components.len())?;
        let cert = mutually_singular_check(&components);
        if !cert.is_singular() {
            let (i, j) = cert.pair.unwrap_or((0, 0));
            return Err(CarlesonError::InvalidOpenSet(format!(
                "closures of components {} and {} are not certified disjoint",
                i + 1,
                j + 1
            )));
        }
        Ok(Self { components, weights })
    }

    pub fn components(&self) -> &[PresentedDomain] {
        &self.components
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// The same open set with weights `b_n`; requires `b_n > 0`, `Σ b_n ≤ 1`.
    pub fn with_weights(&self, b: Vec<f64>) -> Result<Self> {
        check_weights(&b, self.components.len())?;
        Ok(Self { components: self.components.clone(), weights: b })
    }

    pub fn component_of(&self, z: Complex64) -> Option<usize> {
        self.components.iter().position(|c| c.contains(z))
    }

    /// `μ|G_n` for every component.
    pub fn restrict(&self, measure: &AtomicMeasure) -> Result<Vec<AtomicMeasure>> {
        let mut parts = vec![Vec::new(); self.components.len()];
        for (index, a) in measure.atoms().iter().enumerate() {
            let n = self.component_of(a.z).ok_or(CarlesonError::AtomInNoComponent { index, z: a.z })?;
            parts[n].push(*a);
        }
        parts.into_iter().map(AtomicMeasure::new).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentEntry {
    pub index: usize,
    pub weight: f64,
    pub mass: f64,
    /// Box ratio of `μ|G_n` pulled back to the circular base.
    pub kappa: f64,
    pub c_hat: f64,
    pub c_hat_stderr: f64,
    pub witness_label: String,
    /// `c_hat_n / weight_n`.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentReport {
    pub q: f64,
    pub level: u8,
    pub components: Vec<ComponentEntry>,
    /// The least `C` with `c_n ≤ C · weight_n` for every `n`.
    pub c_star: f64,
    pub c_star_component: usize,
}

/// Per-component estimators, built once per open set and exponent.
pub struct OpenSetAnalyzer<'a> {
    open_set: &'a OpenSetDomain,
    level: u8,
    estimators: Vec<ConstantEstimator>,
}

impl<'a> OpenSetAnalyzer<'a> {
    pub fn new(open_set: &'a OpenSetDomain, q: f64, level: u8, config: &NormConfig) -> Result<Self> {
        let estimators = open_set
            .components
            .iter()
            .map(|c| ConstantEstimator::new(c, level, q, config))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { open_set, level, estimators })
    }

    pub fn q(&self) -> f64 {
        self.estimators[0].q()
    }

    /// Runs the box tester and the constant estimator on each `μ|G_n`
    /// against that component's own harmonic measure.
    pub fn component_constants(&self, measure: &AtomicMeasure) -> Result<ComponentReport> {
        let parts = self.open_set.restrict(measure)?;
        let mut components = Vec::with_capacity(parts.len());
        for (n, part) in parts.iter().enumerate() {
            let component = &self.open_set.components[n];
            let pulled = pushforward_measure(component, part)?;
            let kappa = box_ratio_circular(component.base(), &pulled)?.kappa;
            let est: ConstantEstimate = self.estimators[n].estimate(part)?;
            let weight = self.open_set.weights[n];
            components.push(ComponentEntry {
                index: n,
                weight,
                mass: part.total_mass(),
                kappa,
                c_hat: est.c_hat,
                c_hat_stderr: est.c_hat_stderr,
                witness_label: est.witness_label,
                margin: est.c_hat / weight,
            });
        }
        let mut best = 0;
        for (n, e) in components.iter().enumerate() {
            if e.margin > components[best].margin {
                best = n;
            }
        }
        Ok(ComponentReport {
            q: self.q(),
            level: self.level,
            c_star: components[best].margin,
            c_star_component: best,
            components,
        })
    }

    /// Compares the constant against the composite `ω = Σ w_n ω_n` with the
    /// per-component bound `C*`.
    ///
    /// Composite test functions are the per-component families extended by
    /// zero to the other components, plus the global constant. For such `r`,
    /// `‖r‖_{L^q(μ)}^q = Σ_n ∫ |r|^q dμ|G_n` and `‖r‖_{L^q(ω)}^q = Σ_n w_n ∫ |r|^q dω_n`.
    pub fn weighted_criterion(&self, measure: &AtomicMeasure) -> Result<WeightedVerdict> {
        let report = self.component_constants(measure)?;
        let parts = self.open_set.restrict(measure)?;
        let q = self.q();
        let mut composite = 0.0f64;
        let mut sigma = 0.0f64;
        let mut label = String::from("1");
        let (mut mu_one, mut omega_one) = (0.0, 0.0);
        for (n, part) in parts.iter().enumerate() {
            let w = self.open_set.weights[n];
            for t in self.estimators[n].terms(part)? {
                let ratio = (t.mu / (w * t.omega.integral)).powf(1.0 / q);
                if ratio > composite {
                    composite = ratio;
                    sigma = ratio * t.omega.variance.sqrt() / (q * t.omega.integral);
                    label = format!("component {}: {}", n + 1, t.label);
                }
                if t.index == 0 {
                    mu_one += t.mu;
                    omega_one += w * t.omega.integral;
                }
            }
        }
        let global = (mu_one / omega_one).powf(1.0 / q);
        if global > composite {
            composite = global;
            sigma = 0.0;
            label = "1 (all components)".into();
        }
        let sigma = sigma.max(report.components.iter().map(|e| e.c_hat_stderr / e.weight).fold(0.0, f64::max));
        let bound = report.c_star * (1.0 + COMPOSITE_TOLERANCE) + 3.0 * sigma;
        Ok(WeightedVerdict {
            c_star: report.c_star,
            composite_c_hat: composite,
            composite_witness: label,
            sigma,
            bound,
            passed: composite <= bound,
            report,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedVerdict {
    pub c_star: f64,
    pub composite_c_hat: f64,
    pub composite_witness: String,
    pub sigma: f64,
    pub bound: f64,
    pub passed: bool,
    pub report: ComponentReport,
}

pub fn component_constants(
    open_set: &OpenSetDomain,
    measure: &AtomicMeasure,
    q: f64,
    level: u8,
    config: &NormConfig,
) -> Result<ComponentReport> {
    OpenSetAnalyzer::new(open_set, q, level, config)?.component_constants(measure)
}

pub fn weighted_criterion(
    open_set: &OpenSetDomain,
    measure: &AtomicMeasure,
    q: f64,
    level: u8,
    config: &NormConfig,
) -> Result<WeightedVerdict> {
    OpenSetAnalyzer::new(open_set, q, level, config)?.weighted_criterion(measure)
}
