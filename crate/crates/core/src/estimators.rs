//! Student estimators: functionals `J` of an empirical measure, and their
//! numerical Gateaux gradients.

use std::fmt;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::measure::{empirical_measure, EmpiricalMeasure, SampleSequence, StateSpace};

/// Default perturbation step of [`numerical_gradient`].
pub const DEFAULT_GRADIENT_STEP: f64 = 1e-5;

/// A finite parameter vector `theta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamRepr", into = "ParamRepr")]
pub struct ParameterVector(Vec<f64>);

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ParamRepr {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl TryFrom<ParamRepr> for ParameterVector {
    type Error = Error;
    fn try_from(r: ParamRepr) -> Result<Self> {
        match r {
            ParamRepr::Scalar(v) => Self::new(vec![v]),
            ParamRepr::Vector(v) => Self::new(v),
        }
    }
}

impl From<ParameterVector> for ParamRepr {
    fn from(p: ParameterVector) -> Self {
        if p.0.len() == 1 {
            ParamRepr::Scalar(p.0[0])
        } else {
            ParamRepr::Vector(p.0)
        }
    }
}

impl ParameterVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return invalid("parameter vector is empty");
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return invalid(format!("parameter value {v} is not finite"));
        }
        Ok(Self(values))
    }

    pub fn scalar(v: f64) -> Result<Self> {
        Self::new(vec![v])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Euclidean distance `||self - other||`.
    pub fn distance(&self, other: &ParameterVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

impl fmt::Display for ParameterVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| format!("{v}")).collect();
        write!(f, "{}", parts.join(";"))
    }
}

/// A permutation-invariant estimator: a deterministic functional of the
/// empirical measure of the observations.
pub trait Estimator: Send + Sync {
    fn name(&self) -> String;

    fn evaluate(&self, measure: &EmpiricalMeasure) -> Result<ParameterVector>;

    /// Whether `J` is affine in the measure.
    fn is_linear(&self) -> bool {
        false
    }

    /// Rejects states outside the estimator's domain.
    fn check_state(&self, _state: &[f64]) -> Result<()> {
        Ok(())
    }

    /// `J` applied to the empirical measure of `seq`.
    fn estimate(&self, seq: &SampleSequence) -> Result<ParameterVector> {
        self.evaluate(&empirical_measure(seq))
    }
}

/// Atoms with positive mass in lexicographic order of their coordinates.
///
/// Every estimator sums in this order, which makes its value a bit-exact
/// function of the measure: neither the listing order of the support nor
/// zero-weight states affect the result.
fn canonical_atoms(measure: &EmpiricalMeasure) -> Vec<(&[f64], f64)> {
    let mut atoms: Vec<(&[f64], f64)> = measure.iter().filter(|(_, w)| *w > 0.0).collect();
    atoms.sort_by(|a, b| {
        a.0.iter()
            .zip(b.0)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    atoms
}

fn weighted_mean(atoms: &[(&[f64], f64)], coord: usize) -> f64 {
    atoms.iter().map(|(s, w)| w * s[coord]).sum()
}

/// Plug-in variance `sum_i w_i s_i^2 - (sum_i w_i s_i)^2`, per coordinate.
#[derive(Debug, Clone, Copy, Default)]
pub struct VarianceEstimator;

impl Estimator for VarianceEstimator {
    fn name(&self) -> String {
        "variance".into()
    }

    fn evaluate(&self, measure: &EmpiricalMeasure) -> Result<ParameterVector> {
        let atoms = canonical_atoms(measure);
        // Centered two-pass form of the same quantity; never negative.
        let values = (0..measure.dim())
            .map(|k| {
                let mu = weighted_mean(&atoms, k);
                atoms
                    .iter()
                    .map(|(s, w)| w * (s[k] - mu) * (s[k] - mu))
                    .sum()
            })
            .collect();
        ParameterVector::new(values)
    }
}

/// Weighted mean `sum_i w_i s_i`, per coordinate.
#[derive(Debug, Clone, Copy, Default)]
pub struct MeanEstimator;

impl Estimator for MeanEstimator {
    fn name(&self) -> String {
        "mean".into()
    }

    fn evaluate(&self, measure: &EmpiricalMeasure) -> Result<ParameterVector> {
        let atoms = canonical_atoms(measure);
        ParameterVector::new((0..measure.dim()).map(|k| weighted_mean(&atoms, k)).collect())
    }

    fn is_linear(&self) -> bool {
        true
    }
}

/// Maximum-likelihood Weibull scale for a known shape `k`:
/// `(sum_i w_i s_i^k)^(1/k)`.
#[derive(Debug, Clone, Copy)]
pub struct WeibullScaleEstimator {
    shape_k: f64,
}

impl WeibullScaleEstimator {
    pub fn new(shape_k: f64) -> Result<Self> {
        if !(shape_k.is_finite() && shape_k > 0.0) {
            return invalid(format!("Weibull shape must be positive, got {shape_k}"));
        }
        Ok(Self { shape_k })
    }

    pub fn shape_k(&self) -> f64 {
        self.shape_k
    }
}

impl Estimator for WeibullScaleEstimator {
    fn name(&self) -> String {
        "weibull_scale".into()
    }

    fn evaluate(&self, measure: &EmpiricalMeasure) -> Result<ParameterVector> {
        let k = self.shape_k;
        let atoms = canonical_atoms(measure);
        let mut values = Vec::with_capacity(measure.dim());
        for c in 0..measure.dim() {
            let mut top = 0.0f64;
            for (s, _) in &atoms {
                if s[c] < 0.0 {
                    return invalid(format!("Weibull scale needs nonnegative samples, got {}", s[c]));
                }
                top = top.max(s[c]);
            }
            if top == 0.0 {
                values.push(0.0);
                continue;
            }
            // factor out the largest point so that s^k cannot overflow
            let moment: f64 = atoms.iter().map(|(s, w)| w * (s[c] / top).powf(k)).sum();
            values.push(top * moment.powf(1.0 / k));
        }
        ParameterVector::new(values)
    }

    fn check_state(&self, state: &[f64]) -> Result<()> {
        if state.iter().any(|&v| v < 0.0) {
            return invalid(format!("state {state:?} is outside the Weibull domain"));
        }
        Ok(())
    }
}

/// Reward-weight update `theta_hat + beta * (sum original - sum corrected)`.
pub fn irl_weight_update(
    theta_hat: f64,
    original_counts: &SampleSequence,
    corrected_counts: &SampleSequence,
    beta: f64,
) -> Result<f64> {
    if !(beta < 0.0) {
        return invalid(format!("beta must be negative, got {beta}"));
    }
    if original_counts.len() != corrected_counts.len() {
        return invalid(format!(
            "feature count sequences have lengths {} and {}",
            original_counts.len(),
            corrected_counts.len()
        ));
    }
    if original_counts.dim() != 1 || corrected_counts.dim() != 1 {
        return invalid("feature counts must be scalar observations");
    }
    let before: f64 = original_counts.as_flat().iter().sum();
    let after: f64 = corrected_counts.as_flat().iter().sum();
    Ok(theta_hat + beta * (before - after))
}

/// The weight update viewed as a functional of the corrected counts'
/// empirical measure: `theta_hat + beta * (S - N * mean(p))`, with `S` and
/// `N` the total and length of the original counts.
#[derive(Debug, Clone)]
pub struct IrlUpdateEstimator {
    theta_hat: f64,
    beta: f64,
    original_total: Vec<f64>,
    len: usize,
}

impl IrlUpdateEstimator {
    pub fn new(theta_hat: f64, beta: f64, original_counts: &SampleSequence) -> Result<Self> {
        if !(beta < 0.0) {
            return invalid(format!("beta must be negative, got {beta}"));
        }
        if !theta_hat.is_finite() {
            return invalid("theta_hat must be finite");
        }
        let d = original_counts.dim();
        let mut total = vec![0.0; d];
        for x in original_counts.iter() {
            for (t, v) in total.iter_mut().zip(x) {
                *t += v;
            }
        }
        Ok(Self {
            theta_hat,
            beta,
            original_total: total,
            len: original_counts.len(),
        })
    }
}

impl Estimator for IrlUpdateEstimator {
    fn name(&self) -> String {
        "irl_update".into()
    }

    fn evaluate(&self, measure: &EmpiricalMeasure) -> Result<ParameterVector> {
        if measure.dim() != self.original_total.len() {
            return invalid("measure dimension differs from the original feature counts");
        }
        let n = self.len as f64;
        let atoms = canonical_atoms(measure);
        ParameterVector::new(
            self.original_total
                .iter()
                .enumerate()
                .map(|(k, total)| {
                    self.theta_hat + self.beta * (total - n * weighted_mean(&atoms, k))
                })
                .collect(),
        )
    }

    fn is_linear(&self) -> bool {
        true
    }
}

/// Config-level estimator selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "estimator", rename_all = "snake_case")]
pub enum EstimatorSpec {
    Variance,
    WeibullScale { shape_k: f64 },
    Mean,
    IrlUpdate { beta: f64, theta_hat: f64 },
}

impl EstimatorSpec {
    /// Builds an estimator from its identifier and the optional parameters
    /// that identifier requires.
    pub fn from_id(
        id: &str,
        shape_k: Option<f64>,
        beta: Option<f64>,
        theta_hat: Option<f64>,
    ) -> Result<Self> {
        let need = |v: Option<f64>, key: &str| {
            v.ok_or_else(|| Error::InvalidInput(format!("estimator {id:?} requires {key:?}")))
        };
        Ok(match id {
            "variance" => Self::Variance,
            "mean" => Self::Mean,
            "weibull_scale" => Self::WeibullScale {
                shape_k: need(shape_k, "shape_k")?,
            },
            "irl_update" => Self::IrlUpdate {
                beta: need(beta, "beta")?,
                theta_hat: need(theta_hat, "theta_hat")?,
            },
            other => {
                return invalid(format!(
                    "unknown estimator {other:?} (expected variance, weibull_scale, mean or irl_update)"
                ))
            }
        })
    }

    pub fn id(&self) -> &'static str {
        match self {
            Self::Variance => "variance",
            Self::WeibullScale { .. } => "weibull_scale",
            Self::Mean => "mean",
            Self::IrlUpdate { .. } => "irl_update",
        }
    }

    /// Instantiates the estimator. The weight update is anchored at the
    /// original observations, so it needs them.
    pub fn build(&self, original: &SampleSequence) -> Result<Box<dyn Estimator>> {
        Ok(match *self {
            Self::Variance => Box::new(VarianceEstimator),
            Self::Mean => Box::new(MeanEstimator),
            Self::WeibullScale { shape_k } => Box::new(WeibullScaleEstimator::new(shape_k)?),
            Self::IrlUpdate { beta, theta_hat } => {
                Box::new(IrlUpdateEstimator::new(theta_hat, beta, original)?)
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DifferenceScheme {
    /// `[J(p_eps) - J(p)] / eps`.
    #[default]
    Forward,
    /// `[-3 J(p) + 4 J(p_eps) - J(p_2eps)] / (2 eps)`; both mixtures stay
    /// inside the simplex, and the quotient is exact for functionals that are
    /// quadratic along the mixing direction.
    SecondOrderForward,
}

/// Gateaux derivative of `J` along `delta_s - p`, sampled on a state space.
#[derive(Debug, Clone)]
pub struct GradientField {
    /// `values[[j, k]]`: derivative toward state `j`, parameter coordinate `k`.
    pub values: Array2<f64>,
    pub epsilon: f64,
    pub scheme: DifferenceScheme,
}

impl GradientField {
    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.nrows() == 0
    }

    pub fn param_dim(&self) -> usize {
        self.values.ncols()
    }

    pub fn at(&self, state: usize, coord: usize) -> f64 {
        self.values[[state, coord]]
    }
}

/// Forward-difference Gateaux gradient: for each target state `s`,
/// `g(s) = [J((1 - eps) p + eps delta_s) - J(p)] / eps`.
pub fn numerical_gradient(
    estimator: &dyn Estimator,
    base: &EmpiricalMeasure,
    targets: &StateSpace,
    epsilon: f64,
) -> Result<GradientField> {
    numerical_gradient_with(estimator, base, targets, epsilon, DifferenceScheme::Forward)
}

pub fn numerical_gradient_with(
    estimator: &dyn Estimator,
    base: &EmpiricalMeasure,
    targets: &StateSpace,
    epsilon: f64,
    scheme: DifferenceScheme,
) -> Result<GradientField> {
    let max_eps = match scheme {
        DifferenceScheme::Forward => 1.0,
        DifferenceScheme::SecondOrderForward => 0.5,
    };
    if !(epsilon > 0.0 && epsilon < max_eps) {
        return invalid(format!("gradient step {epsilon} must lie in (0, {max_eps})"));
    }
    if targets.dim() != base.dim() {
        return invalid("target states and measure have different dimensions");
    }
    let j0 = estimator.evaluate(base)?;
    let dim = j0.dim();
    let mut values = Array2::zeros((targets.len(), dim));
    for (j, s) in targets.iter().enumerate() {
        estimator.check_state(s)?;
        let j1 = estimator.evaluate(&base.mix_with_point(epsilon, s)?)?;
        match scheme {
            DifferenceScheme::Forward => {
                for k in 0..dim {
                    values[[j, k]] = (j1.values()[k] - j0.values()[k]) / epsilon;
                }
            }
            DifferenceScheme::SecondOrderForward => {
                let j2 = estimator.evaluate(&base.mix_with_point(2.0 * epsilon, s)?)?;
                for k in 0..dim {
                    values[[j, k]] = (-3.0 * j0.values()[k] + 4.0 * j1.values()[k]
                        - j2.values()[k])
                        / (2.0 * epsilon);
                }
            }
        }
    }
    if values.iter().any(|v| !v.is_finite()) {
        return invalid("numerical gradient is not finite");
    }
    Ok(GradientField {
        values,
        epsilon,
        scheme,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn measure(states: &[f64], weights: &[f64]) -> EmpiricalMeasure {
        EmpiricalMeasure::new(StateSpace::from_scalars(states).unwrap(), weights.to_vec()).unwrap()
    }

    fn scalar(p: ParameterVector) -> f64 {
        p.values()[0]
    }

    #[test]
    fn variance_examples() {
        let v = VarianceEstimator;
        assert_eq!(scalar(v.evaluate(&measure(&[-1.0, 1.0], &[0.5, 0.5])).unwrap()), 1.0);
        assert_eq!(scalar(v.evaluate(&EmpiricalMeasure::point_mass(&[3.3]).unwrap()).unwrap()), 0.0);
        let third = 1.0 / 3.0;
        assert_relative_eq!(
            scalar(v.evaluate(&measure(&[0.0, 1.0, 2.0], &[third, third, third])).unwrap()),
            2.0 / 3.0,
            epsilon = 1e-15
        );
        assert!(!v.is_linear());
    }

    #[test]
    fn weibull_examples() {
        let w8 = WeibullScaleEstimator::new(8.0).unwrap();
        assert_eq!(scalar(w8.evaluate(&EmpiricalMeasure::point_mass(&[2.0]).unwrap()).unwrap()), 2.0);
        let w1 = WeibullScaleEstimator::new(1.0).unwrap();
        assert_eq!(scalar(w1.evaluate(&measure(&[1.0, 2.0], &[0.5, 0.5])).unwrap()), 1.5);
        let w2 = WeibullScaleEstimator::new(2.0).unwrap();
        assert_relative_eq!(
            scalar(w2.evaluate(&measure(&[1.0, 3.0], &[0.5, 0.5])).unwrap()),
            5f64.sqrt(),
            epsilon = 1e-15
        );
        assert!(w2.evaluate(&measure(&[-1.0, 3.0], &[0.5, 0.5])).is_err());
        assert!(WeibullScaleEstimator::new(0.0).is_err());
    }

    #[test]
    fn mean_examples() {
        let m = MeanEstimator;
        assert_eq!(scalar(m.evaluate(&EmpiricalMeasure::point_mass(&[7.0]).unwrap()).unwrap()), 7.0);
        assert_eq!(scalar(m.evaluate(&measure(&[-1.0, 1.0], &[0.5, 0.5])).unwrap()), 0.0);
        assert_eq!(scalar(m.evaluate(&measure(&[0.0, 4.0], &[0.25, 0.75])).unwrap()), 3.0);
        assert!(m.is_linear());
    }

    #[test]
    fn irl_update_examples() {
        let phi1 = SampleSequence::from_scalars(&[100.0, 75.0, 50.0, 20.0, 5.0]).unwrap();
        let phi1_corr = SampleSequence::from_scalars(&[100.0, 75.0, 50.0, 20.0, 50.0]).unwrap();
        assert_eq!(irl_weight_update(0.5, &phi1, &phi1, -0.001).unwrap(), 0.5);
        assert_relative_eq!(
            irl_weight_update(0.5, &phi1, &phi1_corr, -0.001).unwrap(),
            0.545,
            epsilon = 1e-12
        );
        let phi3 = SampleSequence::from_scalars(&[50.0, 20.0, 3.0, 5.0, 10.0]).unwrap();
        let phi3_corr = SampleSequence::from_scalars(&[20.0, 20.0, 3.0, 5.0, 10.0]).unwrap();
        assert_relative_eq!(
            irl_weight_update(0.5, &phi3, &phi3_corr, -0.001).unwrap(),
            0.47,
            epsilon = 1e-12
        );
        let short = SampleSequence::from_scalars(&[1.0]).unwrap();
        assert!(irl_weight_update(0.5, &phi1, &short, -0.001).is_err());
        assert!(irl_weight_update(0.5, &phi1, &phi1, 0.001).is_err());
    }

    #[test]
    fn irl_estimator_matches_direct_formula() {
        let phi = SampleSequence::from_scalars(&[90.0, 200.0, 10.0, 2.0, 30.0]).unwrap();
        let corrected = SampleSequence::from_scalars(&[30.0, 200.0, 10.0, 2.0, 30.0]).unwrap();
        let est = IrlUpdateEstimator::new(0.5, -0.001, &phi).unwrap();
        assert_relative_eq!(scalar(est.estimate(&phi).unwrap()), 0.5, epsilon = 1e-12);
        assert_relative_eq!(
            scalar(est.estimate(&corrected).unwrap()),
            irl_weight_update(0.5, &phi, &corrected, -0.001).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn spec_from_id() {
        assert_eq!(EstimatorSpec::from_id("variance", None, None, None).unwrap(), EstimatorSpec::Variance);
        assert!(EstimatorSpec::from_id("weibull_scale", None, None, None).is_err());
        assert!(EstimatorSpec::from_id("median", None, None, None).is_err());
        let spec = EstimatorSpec::from_id("irl_update", None, Some(-0.001), Some(0.5)).unwrap();
        assert_eq!(spec.id(), "irl_update");
    }

    #[test]
    fn gradient_of_linear_estimator_is_exact() {
        let base = measure(&[0.0, 1.0, 5.0], &[0.2, 0.3, 0.5]);
        let mu = 0.3 + 2.5;
        let targets = StateSpace::from_scalars(&[0.0, 1.0, 5.0, -2.0]).unwrap();
        for eps in [1e-5, 1e-3, 0.1] {
            let g = numerical_gradient(&MeanEstimator, &base, &targets, eps).unwrap();
            for (j, s) in targets.iter().enumerate() {
                assert_relative_eq!(g.at(j, 0), s[0] - mu, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn variance_gradient_examples() {
        let sym = measure(&[-1.0, 1.0], &[0.5, 0.5]);
        let g = numerical_gradient(&VarianceEstimator, &sym, sym.support(), 1e-7).unwrap();
        assert!(g.at(0, 0).abs() < 1e-6 && g.at(1, 0).abs() < 1e-6);
        let exact = numerical_gradient_with(
            &VarianceEstimator,
            &sym,
            sym.support(),
            1e-3,
            DifferenceScheme::SecondOrderForward,
        )
        .unwrap();
        assert!(exact.at(0, 0).abs() < 1e-10);

        let point = EmpiricalMeasure::point_mass(&[2.0]).unwrap();
        let t = StateSpace::from_scalars(&[3.0]).unwrap();
        let g = numerical_gradient(&VarianceEstimator, &point, &t, 1e-7).unwrap();
        assert_relative_eq!(g.at(0, 0), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn gradient_rejects_bad_inputs() {
        let base = measure(&[1.0, 2.0], &[0.5, 0.5]);
        let neg = StateSpace::from_scalars(&[-1.0]).unwrap();
        let w = WeibullScaleEstimator::new(8.0).unwrap();
        assert!(numerical_gradient(&w, &base, &neg, 1e-5).is_err());
        assert!(numerical_gradient(&VarianceEstimator, &base, &neg, 1e-5).is_ok());
        assert!(numerical_gradient(&VarianceEstimator, &base, &neg, 0.0).is_err());
        assert!(numerical_gradient(&VarianceEstimator, &base, &neg, 1.0).is_err());
    }

    #[test]
    fn parameter_vector_json_forms() {
        let p: ParameterVector = serde_json::from_str("1.5").unwrap();
        assert_eq!(p.values(), &[1.5]);
        let q: ParameterVector = serde_json::from_str("[0.1, 1, 0.8]").unwrap();
        assert_eq!(q.dim(), 3);
        assert!(serde_json::from_str::<ParameterVector>("[]").is_err());
        assert_eq!(serde_json::to_string(&p).unwrap(), "1.5");
    }

    proptest! {
        #[test]
        fn estimators_are_permutation_invariant(
            xs in prop::collection::vec(0.0f64..10.0, 1..25),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut shuffled = xs.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let a = SampleSequence::from_scalars(&xs).unwrap();
            let b = SampleSequence::from_scalars(&shuffled).unwrap();
            let ests: Vec<Box<dyn Estimator>> = vec![
                Box::new(VarianceEstimator),
                Box::new(MeanEstimator),
                Box::new(WeibullScaleEstimator::new(8.0).unwrap()),
            ];
            for est in &ests {
                prop_assert_eq!(
                    est.estimate(&a).unwrap().values()[0].to_bits(),
                    est.estimate(&b).unwrap().values()[0].to_bits()
                );
            }
        }

        #[test]
        fn weibull_scale_equivariance(
            xs in prop::collection::vec(0.01f64..5.0, 1..20),
            a in 0.1f64..10.0,
            k in 0.5f64..10.0,
        ) {
            let est = WeibullScaleEstimator::new(k).unwrap();
            let scaled: Vec<f64> = xs.iter().map(|x| a * x).collect();
            let base = est.estimate(&SampleSequence::from_scalars(&xs).unwrap()).unwrap().values()[0];
            let out = est.estimate(&SampleSequence::from_scalars(&scaled).unwrap()).unwrap().values()[0];
            prop_assert!((out - a * base).abs() <= 1e-12 * a * base.max(1e-300) * 10.0);
        }

        #[test]
        fn irl_update_without_correction_is_identity(
            xs in prop::collection::vec(0.0f64..300.0, 1..10),
            theta in -2.0f64..2.0,
            beta in -1.0f64..-1e-6,
        ) {
            let s = SampleSequence::from_scalars(&xs).unwrap();
            prop_assert_eq!(irl_weight_update(theta, &s, &s, beta).unwrap(), theta);
        }
    }
}
