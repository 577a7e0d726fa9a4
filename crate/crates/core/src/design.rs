//! Designs, design intervals, reduced parameters, priors and parameter sets.
//!
//! A [`Design`] is an approximate design: a finitely supported probability
//! measure on a compact [`DesignInterval`]. Constructors keep the support
//! sorted and fold points closer than [`MERGE_TOLERANCE`] into one atom.

use serde::Deserialize;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Points closer than this are treated as one support point.
pub const MERGE_TOLERANCE: f64 = 1e-10;

/// Tolerance on `Σ ω_i = 1`.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignInterval {
    lower: f64,
    upper: f64,
}

impl DesignInterval {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite() && lower < upper) {
            return Err(Error::InvalidInterval { lower, upper });
        }
        Ok(Self { lower, upper })
    }

    /// The symmetric interval `[-r, r]`.
    pub fn symmetric(half_width: f64) -> Result<Self> {
        Self::new(-half_width, half_width)
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lower && x <= self.upper
    }

    /// Half-width when the interval is symmetric about zero.
    pub fn symmetric_half_width(&self) -> Option<f64> {
        let r = 0.5 * self.width();
        ((self.lower + self.upper).abs() <= 1e-12 * r).then_some(r)
    }

    /// `n` equally spaced points including both endpoints.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        assert!(n >= 2, "grid needs at least two points");
        let h = self.width() / (n - 1) as f64;
        (0..n)
            .map(|i| {
                if i == n - 1 {
                    self.upper
                } else {
                    self.lower + h * i as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    support: Vec<f64>,
    weights: Vec<f64>,
}

impl Design {
    /// Builds a design, sorting the support and merging near-duplicate points
    /// by summing their weights. Weight positivity and normalisation are
    /// checked by [`Design::validate`], not here.
    pub fn new(support: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let raw = Self::from_raw(support, weights)?;
        let mut atoms: Vec<(f64, f64)> = raw.support.into_iter().zip(raw.weights).collect();
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut support: Vec<f64> = Vec::with_capacity(atoms.len());
        let mut weights: Vec<f64> = Vec::with_capacity(atoms.len());
        for (x, w) in atoms {
            match support.last() {
                Some(&last) if (x - last).abs() < MERGE_TOLERANCE => {
                    *weights.last_mut().unwrap() += w;
                }
                _ => {
                    support.push(x);
                    weights.push(w);
                }
            }
        }
        Ok(Self { support, weights })
    }

    /// Keeps the given order and values; only lengths and finiteness are checked.
    pub fn from_raw(support: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidDesign("empty support".into()));
        }
        if support.len() != weights.len() {
            return Err(Error::InvalidDesign(format!(
                "{} support points but {} weights",
                support.len(),
                weights.len()
            )));
        }
        if support.iter().chain(weights.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidDesign("non-finite entry".into()));
        }
        Ok(Self { support, weights })
    }

    pub fn point_mass(x: f64) -> Self {
        Self {
            support: vec![x],
            weights: vec![1.0],
        }
    }

    /// Equal weights on the given points.
    pub fn uniform(points: Vec<f64>) -> Result<Self> {
        let n = points.len() as f64;
        let w = vec![1.0 / n; points.len()];
        Self::new(points, w)
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.support.iter().copied().zip(self.weights.iter().copied())
    }

    /// `Σ ω_i g(x_i)`.
    pub fn integrate(&self, mut g: impl FnMut(f64) -> f64) -> f64 {
        self.iter().map(|(x, w)| w * g(x)).sum()
    }

    pub fn validate(&self, interval: &DesignInterval) -> Result<()> {
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::WeightSum { sum });
        }
        for (index, &weight) in self.weights.iter().enumerate() {
            if weight <= 0.0 {
                return Err(Error::NonpositiveWeight { index, weight });
            }
        }
        for &point in &self.support {
            if !interval.contains(point) {
                return Err(Error::PointOutOfRange {
                    point,
                    lower: interval.lower(),
                    upper: interval.upper(),
                });
            }
        }
        for (index, pair) in self.support.windows(2).enumerate() {
            if (pair[1] - pair[0]).abs() < MERGE_TOLERANCE {
                return Err(Error::DuplicatePoint {
                    first: pair[0],
                    second: pair[1],
                });
            }
            if pair[1] < pair[0] {
                return Err(Error::UnsortedSupport { index: index + 1 });
            }
        }
        Ok(())
    }

    /// Drops atoms with weight below `threshold` and renormalises.
    pub fn pruned(&self, threshold: f64) -> Result<Self> {
        let (support, weights): (Vec<f64>, Vec<f64>) =
            self.iter().filter(|&(_, w)| w >= threshold).unzip();
        let total: f64 = weights.iter().sum();
        if support.is_empty() || total <= 0.0 {
            return Err(Error::InvalidDesign("all weights pruned".into()));
        }
        Self::new(support, weights.into_iter().map(|w| w / total).collect())
    }

    /// `α ξ + (1 - α) other` on the union of supports.
    pub fn mix(&self, other: &Design, alpha: f64) -> Result<Self> {
        let mut support = self.support.clone();
        support.extend_from_slice(&other.support);
        let mut weights: Vec<f64> = self.weights.iter().map(|w| alpha * w).collect();
        weights.extend(other.weights.iter().map(|w| (1.0 - alpha) * w));
        let filtered: (Vec<f64>, Vec<f64>) = support
            .into_iter()
            .zip(weights)
            .filter(|&(_, w)| w > 0.0)
            .unzip();
        Self::new(filtered.0, filtered.1)
    }

    /// Serialises to `{"interval":[lo,hi],"support":[...],"weights":[...]}`
    /// with 17 significant digits per number.
    pub fn to_json(&self, interval: &DesignInterval) -> String {
        let mut out = String::from("{\"interval\":[");
        push_number(&mut out, interval.lower());
        out.push(',');
        push_number(&mut out, interval.upper());
        out.push_str("],\"support\":");
        push_array(&mut out, &self.support);
        out.push_str(",\"weights\":");
        push_array(&mut out, &self.weights);
        out.push('}');
        out
    }

    /// Parses the design JSON format and validates the design against its interval.
    pub fn from_json(text: &str) -> Result<(Design, DesignInterval)> {
        let file: DesignFile = serde_json::from_str(text)?;
        let interval = DesignInterval::new(file.interval[0], file.interval[1])?;
        let design = Design::from_raw(file.support, file.weights)?;
        design.validate(&interval)?;
        Ok((design, interval))
    }
}

#[derive(Deserialize)]
struct DesignFile {
    interval: [f64; 2],
    support: Vec<f64>,
    weights: Vec<f64>,
}

fn push_number(out: &mut String, v: f64) {
    let _ = write!(out, "{v:.16e}");
}

fn push_array(out: &mut String, values: &[f64]) {
    out.push('[');
    for (i, &v) in values.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        push_number(out, v);
    }
    out.push(']');
}

pub fn validate_design(design: &Design, interval: &DesignInterval) -> Result<()> {
    design.validate(interval)
}

/// Ratios `b_i = θ_{2,m-s+i} / θ_{2,m}` of the larger model's leading coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedParameter(Vec<f64>);

impl ReducedParameter {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("reduced parameter must be finite".into()));
        }
        Ok(Self(values))
    }

    pub fn scalar(b: f64) -> Self {
        assert!(b.is_finite(), "reduced parameter must be finite");
        Self(vec![b])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The vector `(bᵀ, 1)ᵀ`.
    pub fn extended(&self) -> Vec<f64> {
        let mut v = self.0.clone();
        v.push(1.0);
        v
    }
}

/// Optional analytic description attached to a discretised prior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PriorDensity {
    /// Density proportional to `1 / R̄(b)` on `[-a, a]` (constant vs quadratic
    /// on `[-1, 1]`), i.e. uniform weighting of efficiencies.
    UniformEfficiency { a: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prior {
    atoms: Vec<(ReducedParameter, f64)>,
    density: Option<PriorDensity>,
}

impl Prior {
    /// Discrete prior. Atoms are stored in lexicographic order of `b`, so the
    /// input order does not affect any downstream sum.
    pub fn new(atoms: Vec<(ReducedParameter, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidPrior("no atoms".into()));
        }
        let dim = atoms[0].0.len();
        if atoms.iter().any(|(b, _)| b.len() != dim) {
            return Err(Error::InvalidPrior("atoms have different dimensions".into()));
        }
        if let Some((_, m)) = atoms.iter().find(|(_, m)| !(*m > 0.0) || !m.is_finite()) {
            return Err(Error::InvalidPrior(format!("mass {m} is not positive")));
        }
        let total: f64 = atoms.iter().map(|(_, m)| m).sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::InvalidPrior(format!("masses sum to {total}")));
        }
        let mut atoms = atoms;
        atoms.sort_by(|a, b| {
            a.0.values()
                .iter()
                .zip(b.0.values())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        if atoms.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidPrior("duplicate atoms".into()));
        }
        Ok(Self {
            atoms,
            density: None,
        })
    }

    pub fn point_mass(b: ReducedParameter) -> Self {
        Self {
            atoms: vec![(b, 1.0)],
            density: None,
        }
    }

    pub fn with_density(mut self, density: PriorDensity) -> Self {
        self.density = Some(density);
        self
    }

    pub fn atoms(&self) -> &[(ReducedParameter, f64)] {
        &self.atoms
    }

    pub fn density(&self) -> Option<PriorDensity> {
        self.density
    }

    pub fn dimension(&self) -> usize {
        self.atoms[0].0.len()
    }

    /// `∫ b² dπ` for scalar priors, from the atoms.
    pub fn second_moment(&self) -> f64 {
        self.atoms
            .iter()
            .map(|(b, m)| m * b.values().iter().map(|v| v * v).sum::<f64>())
            .sum()
    }

    /// Symmetric about zero: every atom `b` has a mirror `-b` of equal mass.
    pub fn is_symmetric(&self) -> bool {
        let n = self.atoms.len();
        (0..n).all(|i| {
            let (b, m) = &self.atoms[i];
            let (c, k) = &self.atoms[n - 1 - i];
            (m - k).abs() <= 1e-12
                && b
                    .values()
                    .iter()
                    .zip(c.values())
                    .all(|(x, y)| (x + y).abs() <= 1e-12 * (1.0 + x.abs()))
        })
    }
}

/// Half-width `d` of a symmetric parameter interval, possibly unbounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HalfWidth {
    Finite(f64),
    Infinite,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BSet {
    /// `[-d, d]` for a scalar `b` (s = 2).
    Interval(HalfWidth),
    /// Finitely many parameter vectors.
    Finite(Vec<ReducedParameter>),
}

impl BSet {
    pub fn interval(d: f64) -> Result<Self> {
        if !(d > 0.0) || d.is_nan() {
            return Err(Error::InvalidParameterSet(format!("half-width {d} must be positive")));
        }
        if d.is_infinite() {
            return Ok(Self::Interval(HalfWidth::Infinite));
        }
        Ok(Self::Interval(HalfWidth::Finite(d)))
    }

    pub fn unbounded() -> Self {
        Self::Interval(HalfWidth::Infinite)
    }

    pub fn finite(points: Vec<ReducedParameter>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameterSet("empty set".into()));
        }
        Ok(Self::Finite(points))
    }

    /// Dimension of `b`, i.e. `s - 1`.
    pub fn dimension(&self) -> usize {
        match self {
            BSet::Interval(_) => 1,
            BSet::Finite(p) => p[0].len(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> DesignInterval {
        DesignInterval::new(-1.0, 1.0).unwrap()
    }

    #[test]
    fn symmetric_three_point_design_is_valid() {
        let d = Design::new(vec![-1.0, 0.0, 1.0], vec![0.25, 0.5, 0.25]).unwrap();
        assert!(validate_design(&d, &unit()).is_ok());
    }

    #[test]
    fn weight_sum_error() {
        let d = Design::from_raw(vec![-1.0, 1.0], vec![0.5, 0.6]).unwrap();
        assert!(matches!(d.validate(&unit()), Err(Error::WeightSum { .. })));
    }

    #[test]
    fn out_of_range_point() {
        let d = Design::from_raw(vec![-2.0, 0.0], vec![0.5, 0.5]).unwrap();
        assert!(matches!(d.validate(&unit()), Err(Error::PointOutOfRange { .. })));
    }

    #[test]
    fn nonpositive_and_duplicate() {
        let d = Design::from_raw(vec![-1.0, 1.0], vec![1.0, 0.0]).unwrap();
        assert!(matches!(d.validate(&unit()), Err(Error::NonpositiveWeight { index: 1, .. })));
        let d = Design::from_raw(vec![0.0, 1e-12], vec![0.5, 0.5]).unwrap();
        assert!(matches!(d.validate(&unit()), Err(Error::DuplicatePoint { .. })));
        let d = Design::from_raw(vec![0.5, 0.0], vec![0.5, 0.5]).unwrap();
        assert!(matches!(d.validate(&unit()), Err(Error::UnsortedSupport { index: 1 })));
    }

    #[test]
    fn constructor_sorts_and_merges() {
        let d = Design::new(vec![1.0, -1.0, 1.0 + 1e-12], vec![0.25, 0.5, 0.25]).unwrap();
        assert_eq!(d.support(), &[-1.0, 1.0]);
        assert_eq!(d.weights(), &[0.5, 0.5]);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let d = Design::new(
            vec![-1.0, 1.0 / 3.0, 0.1 + 0.2],
            vec![23.0 / 76.0, 15.0 / 38.0, 1.0 - 23.0 / 76.0 - 15.0 / 38.0],
        )
        .unwrap();
        let interval = unit();
        let text = d.to_json(&interval);
        assert!(text.starts_with("{\"interval\":[-1.0000000000000000e0,"));
        let (back, iv) = Design::from_json(&text).unwrap();
        assert_eq!(iv, interval);
        for (a, b) in back.iter().zip(d.iter()) {
            assert_eq!(a.0.to_bits(), b.0.to_bits());
            assert_eq!(a.1.to_bits(), b.1.to_bits());
        }
    }

    #[test]
    fn prior_sorting_and_symmetry() {
        let p = Prior::new(vec![
            (ReducedParameter::scalar(1.0), 0.5),
            (ReducedParameter::scalar(-1.0), 0.5),
        ])
        .unwrap();
        assert_eq!(p.atoms()[0].0.values(), &[-1.0]);
        assert!(p.is_symmetric());
        assert_eq!(p.second_moment(), 1.0);
        let q = Prior::new(vec![
            (ReducedParameter::scalar(1.0), 0.7),
            (ReducedParameter::scalar(-1.0), 0.3),
        ])
        .unwrap();
        assert!(!q.is_symmetric());
        assert!(Prior::new(vec![(ReducedParameter::scalar(0.0), 0.9)]).is_err());
    }

    #[test]
    fn bset_constructors() {
        assert_eq!(BSet::interval(f64::INFINITY).unwrap(), BSet::unbounded());
        assert!(BSet::interval(0.0).is_err());
        assert!(BSet::finite(vec![]).is_err());
    }
}
