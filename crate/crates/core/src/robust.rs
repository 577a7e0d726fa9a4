//! Bayesian and standardized maximin criteria for linear pairs, their
//! trace forms `tr L M_(s)(ξ)`, and least-favourable certificates.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::chebdesign::{beta_bayes, hstar_solve, rbar_quadratic, xi_m_beta};
use crate::design::{BSet, Design, DesignInterval, HalfWidth, Prior, ReducedParameter};
use crate::error::{Error, Result};
use crate::lp::maximin_weights;
use crate::models::LinearModelPair;
use crate::moments::{info_matrix, schur_complement, schur_quadratic_form, schur_trace_form, SchurBlock};
use crate::numeric::{golden_min, scan_max};
use crate::optimizer::{
    optimize, reflected_parameter, symmetrize, BayesLinear, Criterion, LocalLinear, Maximin,
    OptimizerConfig,
};
use crate::tcrit::r_value_linear;

/// Relative tolerance for treating a parameter as least favourable.
pub const ACTIVE_TOLERANCE: f64 = 1e-6;
/// Candidate points for directional derivatives, besides the support.
pub const CERTIFICATE_GRID: usize = 2001;
const B_SCAN: usize = 1001;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentKind {
    Bayes,
    Standardized,
}

/// `L = Σ ω_i (b_iᵀ, 1)ᵀ (b_iᵀ, 1) / R̄_i`, with `R̄_i = 1` in the Bayesian case.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorMomentMatrix {
    l: DMatrix<f64>,
    kind: MomentKind,
}

impl PriorMomentMatrix {
    pub fn bayes(prior: &Prior) -> Result<Self> {
        let ones = vec![1.0; prior.atoms().len()];
        Self::build(prior.atoms(), &ones, MomentKind::Bayes)
    }

    pub fn standardized(atoms: &[(ReducedParameter, f64)], rbars: &[f64]) -> Result<Self> {
        if atoms.len() != rbars.len() || rbars.iter().any(|r| !(*r > 0.0)) {
            return Err(Error::InvalidArgument("need one positive R̄ per atom".into()));
        }
        Self::build(atoms, rbars, MomentKind::Standardized)
    }

    fn build(atoms: &[(ReducedParameter, f64)], rbars: &[f64], kind: MomentKind) -> Result<Self> {
        let s = atoms
            .first()
            .map(|(b, _)| b.len() + 1)
            .ok_or_else(|| Error::InvalidPrior("no atoms".into()))?;
        let mut l = DMatrix::zeros(s, s);
        for ((b, w), r) in atoms.iter().zip(rbars) {
            let v = DVector::from_vec(b.extended());
            l += (w / r) * &v * v.transpose();
        }
        let corner: f64 = atoms.iter().zip(rbars).map(|((_, w), r)| w / r).sum();
        if (l[(s - 1, s - 1)] - corner).abs() > 1e-12 * corner.abs().max(1.0) {
            return Err(Error::Domain("moment matrix corner does not match the masses".into()));
        }
        let eig = l.clone().symmetric_eigen().eigenvalues;
        if eig.iter().any(|&e| e < -1e-12 * l.amax().max(1.0)) {
            return Err(Error::Domain("moment matrix is not positive semidefinite".into()));
        }
        Ok(Self { l, kind })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.l
    }

    pub fn kind(&self) -> MomentKind {
        self.kind
    }
}

fn defined_block(design: &Design, pair: &LinearModelPair) -> Result<SchurBlock> {
    let block = schur_complement(&info_matrix(design, pair));
    if !block.is_defined() {
        return Err(Error::UndefinedSchur);
    }
    Ok(block)
}

/// `Σ π_a T(ξ, b_a)`, cross-checked against `tr L M_(s)(ξ)`.
pub fn bayes_value(design: &Design, pair: &LinearModelPair, prior: &Prior) -> Result<f64> {
    let block = defined_block(design, pair)?;
    // summing in a canonical atom order makes the value independent of how
    // the prior lists its atoms
    let mut terms = prior
        .atoms()
        .iter()
        .map(|(b, w)| Ok((b.values().to_vec(), *w, w * schur_quadratic_form(&block, b)?)))
        .collect::<Result<Vec<_>>>()?;
    terms.sort_by(|p, q| {
        p.0.iter()
            .zip(&q.0)
            .map(|(a, b)| a.total_cmp(b))
            .find(|o| o.is_ne())
            .unwrap_or(p.1.total_cmp(&q.1))
    });
    let sum: f64 = terms.iter().map(|t| t.2).sum();
    let trace = schur_trace_form(&block, PriorMomentMatrix::bayes(prior)?.matrix())?;
    let scale = sum.abs().max(trace.abs()).max(1e-300);
    if (sum - trace).abs() > 1e-9 * scale && (sum - trace).abs() > 1e-14 {
        return Err(Error::Domain(format!(
            "Bayesian criterion {sum} disagrees with its trace form {trace}"
        )));
    }
    Ok(sum)
}

/// Position of a least-favourable parameter; `Infinite` is the limit
/// `b → ±∞` of a scalar parameter.
#[derive(Debug, Clone, PartialEq)]
pub enum AtomLocation {
    Finite(ReducedParameter),
    Infinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeastFavorableAtom {
    pub location: AtomLocation,
    pub mass: f64,
    pub efficiency: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaximinCertificate {
    pub design: Design,
    pub interval: DesignInterval,
    pub least_favorable: Vec<LeastFavorableAtom>,
    pub value: f64,
    /// `max_x Σ ω_i ψ_i(x)/R̄_i - value`, where `ψ_i` is the squared residual
    /// of the best fit for atom `i`; nonpositive up to rounding at an optimum.
    pub directional_slack: f64,
}

/// Efficiencies `T(ξ, b)/R̄(b)` for one design, with the `b → ∞` limit where
/// the pair allows it.
struct EfficiencyProfile<'a> {
    pair: &'a LinearModelPair,
    interval: &'a DesignInterval,
    block: SchurBlock,
    quadratic: Option<f64>,
}

impl<'a> EfficiencyProfile<'a> {
    fn new(design: &Design, pair: &'a LinearModelPair, interval: &'a DesignInterval) -> Result<Self> {
        let quadratic = (pair.is_monomial() && pair.m() == 2 && pair.s() == 2)
            .then(|| interval.symmetric_half_width())
            .flatten();
        Ok(Self {
            pair,
            interval,
            block: defined_block(design, pair)?,
            quadratic,
        })
    }

    fn rbar(&self, b: &ReducedParameter) -> Result<f64> {
        match self.quadratic {
            Some(r) => Ok(rbar_quadratic(b.values()[0], r)),
            None => Ok(r_value_linear(self.pair, b, self.interval)?.value),
        }
    }

    fn at(&self, b: &ReducedParameter) -> Result<f64> {
        let t = schur_quadratic_form(&self.block, b)?;
        let r = self.rbar(b)?;
        Ok(if r > 0.0 { t / r } else { 1.0 })
    }

    fn at_scalar(&self, b: f64) -> f64 {
        self.at(&ReducedParameter::scalar(b)).unwrap_or(f64::NAN)
    }

    /// `lim_{b→∞} T(ξ, b)/R̄(b) = M_(s)[0][0] / r²` for the constant vs
    /// quadratic pair on `[-r, r]`.
    fn at_infinity(&self) -> Result<f64> {
        let r = self.quadratic.ok_or_else(|| {
            Error::InvalidParameterSet(
                "unbounded ℬ is only defined for the constant vs quadratic pair".into(),
            )
        })?;
        Ok(self.block.ms()?[(0, 0)] / (r * r))
    }

    /// Local minima of the efficiency over `ℬ`, sorted by value.
    fn minima(&self, bset: &BSet) -> Result<Vec<(AtomLocation, f64)>> {
        let mut out: Vec<(AtomLocation, f64)> = Vec::new();
        match bset {
            BSet::Finite(points) => {
                for p in points {
                    out.push((AtomLocation::Finite(p.clone()), self.at(p)?));
                }
            }
            BSet::Interval(hw) => {
                // b = d·t on [-1, 1], or b = tan(πt/2) when ℬ is unbounded
                let map = |t: f64| match hw {
                    HalfWidth::Finite(d) => d * t,
                    HalfWidth::Infinite => (0.5 * std::f64::consts::PI * t).tan(),
                };
                let inner = |t: f64| -> f64 {
                    if matches!(hw, HalfWidth::Infinite) && t.abs() >= 1.0 {
                        self.at_infinity().unwrap_or(f64::NAN)
                    } else {
                        self.at_scalar(map(t))
                    }
                };
                let ts: Vec<f64> = (0..B_SCAN)
                    .map(|i| -1.0 + 2.0 * i as f64 / (B_SCAN - 1) as f64)
                    .collect();
                let vals: Vec<f64> = ts.par_iter().map(|&t| inner(t)).collect();
                if vals.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Domain("efficiency is not finite on ℬ".into()));
                }
                for i in 0..B_SCAN {
                    let left = if i == 0 { f64::INFINITY } else { vals[i - 1] };
                    let right = if i + 1 == B_SCAN { f64::INFINITY } else { vals[i + 1] };
                    if !(vals[i] <= left && vals[i] <= right) {
                        continue;
                    }
                    let lo = ts[i.saturating_sub(1)];
                    let hi = ts[(i + 1).min(B_SCAN - 1)];
                    let (t, v) = golden_min(inner, lo, hi, 1e-13);
                    let (t, v) = if v < vals[i] { (t, v) } else { (ts[i], vals[i]) };
                    // far atoms carry the limit direction and would only
                    // duplicate it in the certificate LP
                    let far = self.quadratic.map_or(f64::INFINITY, |r| 1e6 * r);
                    let loc = if matches!(hw, HalfWidth::Infinite) && map(t).abs() >= far {
                        AtomLocation::Infinite
                    } else {
                        AtomLocation::Finite(ReducedParameter::scalar(map(t)))
                    };
                    if !out.iter().any(|(l, _)| *l == loc) {
                        out.push((loc, v));
                    }
                }
            }
        }
        out.sort_by(|a, b| a.1.total_cmp(&b.1));
        Ok(out)
    }

    /// `ψ(x)/R̄` for an atom, the derivative of its efficiency toward `δ_x`
    /// shifted by the current efficiency.
    fn residual_ratio(&self, loc: &AtomLocation) -> Result<Box<dyn Fn(f64) -> f64 + Sync + '_>> {
        let x_mat = self.block.x()?;
        match loc {
            AtomLocation::Finite(b) => {
                let q = self.block.best_fit(b)?;
                let r = self.rbar(b)?;
                let b = b.clone();
                Ok(Box::new(move |x| {
                    let fit: f64 = self.pair.eval_small(x).iter().zip(&q).map(|(f, c)| f * c).sum();
                    let d = self.pair.extra_part(&b, x).unwrap_or(f64::NAN) - fit;
                    d * d / r
                }))
            }
            AtomLocation::Infinite => {
                let r = self.quadratic.ok_or(Error::UndefinedSchur)?;
                let q: Vec<f64> = x_mat.column(0).iter().copied().collect();
                Ok(Box::new(move |x| {
                    let fit: f64 = self.pair.eval_small(x).iter().zip(&q).map(|(f, c)| f * c).sum();
                    let d = self.pair.eval_extra(x)[0] - fit;
                    d * d / (r * r)
                }))
            }
        }
    }
}

/// `inf_{b ∈ ℬ} T(ξ, b)/R̄(b)`.
pub fn maximin_value(
    design: &Design,
    pair: &LinearModelPair,
    bset: &BSet,
    interval: &DesignInterval,
) -> Result<f64> {
    check_bset(pair, bset)?;
    let profile = EfficiencyProfile::new(design, pair, interval)?;
    Ok(profile.minima(bset)?.first().map(|m| m.1).unwrap_or(f64::NAN))
}

fn check_bset(pair: &LinearModelPair, bset: &BSet) -> Result<()> {
    if bset.dimension() + 1 != pair.s() {
        return Err(Error::InvalidParameterSet(format!(
            "ℬ has dimension {}, the pair needs s - 1 = {}",
            bset.dimension(),
            pair.s() - 1
        )));
    }
    Ok(())
}

/// Design maximising the Bayesian criterion, with the closed form for
/// monomial pairs of degree difference two under symmetric scalar priors
/// checked against the numeric optimum.
pub fn optimize_bayes(
    pair: &LinearModelPair,
    prior: &Prior,
    interval: &DesignInterval,
    config: &OptimizerConfig,
) -> Result<Design> {
    if prior.dimension() + 1 != pair.s() {
        return Err(Error::InvalidPrior(format!(
            "prior has dimension {}, the pair needs s - 1 = {}",
            prior.dimension(),
            pair.s() - 1
        )));
    }
    let numeric = optimize_bayes_numeric(pair, prior, interval, config)?;
    let closed = match interval.symmetric_half_width() {
        Some(r) if pair.is_monomial() && pair.s() == 2 && prior.is_symmetric() => {
            Some(xi_m_beta(pair.m(), beta_bayes(prior, r)?, r)?.design)
        }
        _ => None,
    };
    let Some(closed) = closed else {
        return Ok(numeric);
    };
    let vc = BayesLinear {
        pair: pair.clone(),
        prior: prior.clone(),
    }
    .evaluate(&closed)?
    .value;
    let vn = bayes_value(&numeric, pair, prior)?;
    if (vn - vc).abs() > 1e-6 * vn.max(vc) {
        return Err(Error::ConvergenceFailure(format!(
            "closed-form Bayesian design ({vc}) and numeric optimum ({vn}) disagree"
        )));
    }
    Ok(closed)
}

/// The general cutting-plane path of [`optimize_bayes`].
pub fn optimize_bayes_numeric(
    pair: &LinearModelPair,
    prior: &Prior,
    interval: &DesignInterval,
    config: &OptimizerConfig,
) -> Result<Design> {
    let criterion = BayesLinear {
        pair: pair.clone(),
        prior: prior.clone(),
    };
    let mut result = optimize(&criterion, interval, config)?;
    if interval.symmetric_half_width().is_some() && reflection_invariant(pair, prior) {
        symmetrize(&criterion, interval, &mut result)?;
    }
    if !(result.value > 0.0) {
        return Err(Error::ConvergenceFailure("Bayesian criterion is zero".into()));
    }
    if result.gap > 1e-4 {
        return Err(Error::IterationLimit(result.iterations));
    }
    Ok(result.design)
}

fn reflection_invariant(pair: &LinearModelPair, prior: &Prior) -> bool {
    prior.atoms().iter().all(|(b, w)| {
        reflected_parameter(pair, b).is_some_and(|rb| {
            prior
                .atoms()
                .iter()
                .any(|(c, v)| (v - w).abs() <= 1e-12 && close_parameters(c, &rb))
        })
    })
}

fn close_parameters(a: &ReducedParameter, b: &ReducedParameter) -> bool {
    a.values()
        .iter()
        .zip(b.values())
        .all(|(p, q)| (p - q).abs() <= 1e-12 * (1.0 + q.abs()))
}

/// Standardized maximin design over `ℬ` with a least-favourable certificate.
pub fn optimize_maximin(
    pair: &LinearModelPair,
    bset: &BSet,
    interval: &DesignInterval,
    config: &OptimizerConfig,
) -> Result<MaximinCertificate> {
    check_bset(pair, bset)?;
    let design = match interval.symmetric_half_width() {
        Some(r) if pair.is_monomial() && pair.s() == 2 => hstar_solve(bset, r, pair.m())?.design,
        _ => maximin_numeric(pair, bset, interval, config)?,
    };
    certify(&design, pair, bset, interval)
}

fn maximin_numeric(
    pair: &LinearModelPair,
    bset: &BSet,
    interval: &DesignInterval,
    config: &OptimizerConfig,
) -> Result<Design> {
    let points: Vec<ReducedParameter> = match bset {
        BSet::Finite(p) => p.clone(),
        BSet::Interval(HalfWidth::Finite(d)) => (0..201)
            .map(|i| ReducedParameter::scalar(-d + 2.0 * d * i as f64 / 200.0))
            .collect(),
        BSet::Interval(HalfWidth::Infinite) => {
            return Err(Error::InvalidParameterSet(
                "unbounded ℬ is only defined for the constant vs quadratic pair".into(),
            ))
        }
    };
    let rbars: Vec<f64> = points
        .par_iter()
        .map(|b| Ok(r_value_linear(pair, b, interval)?.value))
        .collect::<Result<_>>()?;
    let members: Vec<(Box<dyn Criterion>, f64)> = points
        .into_iter()
        .zip(rbars)
        .map(|(b, r)| {
            let c: Box<dyn Criterion> = Box::new(LocalLinear { pair: pair.clone(), b });
            (c, r)
        })
        .collect();
    let result = optimize(&Maximin::new(members)?, interval, config)?;
    if !(result.value > 0.0) {
        return Err(Error::ConvergenceFailure("maximin value is zero".into()));
    }
    Ok(result.design)
}

/// Builds the certificate of Theorem-type optimality conditions for `design`:
/// atoms within [`ACTIVE_TOLERANCE`] of the worst efficiency, and masses
/// minimising the largest directional derivative.
pub fn certify(
    design: &Design,
    pair: &LinearModelPair,
    bset: &BSet,
    interval: &DesignInterval,
) -> Result<MaximinCertificate> {
    check_bset(pair, bset)?;
    let profile = EfficiencyProfile::new(design, pair, interval)?;
    let minima = profile.minima(bset)?;
    let value = minima
        .first()
        .map(|m| m.1)
        .ok_or_else(|| Error::InvalidParameterSet("ℬ is empty".into()))?;
    let active: Vec<(AtomLocation, f64)> = minima
        .into_iter()
        .filter(|(_, v)| *v <= value * (1.0 + ACTIVE_TOLERANCE) + 1e-15)
        .collect();
    let ratios = active
        .iter()
        .map(|(loc, _)| profile.residual_ratio(loc))
        .collect::<Result<Vec<_>>>()?;
    let mut xs = interval.grid(CERTIFICATE_GRID);
    xs.extend_from_slice(design.support());
    let table: Vec<Vec<f64>> = xs
        .par_iter()
        .map(|&x| ratios.iter().map(|f| f(x)).collect())
        .collect();
    // min_ω max_x Σ ω_i ψ_i(x) is the dual side of the maximin LP with
    // atoms as rows and candidate points as columns
    let costs: Vec<Vec<f64>> = (0..ratios.len())
        .map(|i| table.iter().map(|row| row[i]).collect())
        .collect();
    let (_, _, omega) = maximin_weights(&costs)?;
    let mix = |x: f64| ratios.iter().zip(&omega).map(|(f, w)| w * f(x)).sum::<f64>();
    let (_, peak) = scan_max(mix, interval.lower(), interval.upper(), CERTIFICATE_GRID);
    let peak = design.support().iter().map(|&x| mix(x)).fold(peak, f64::max);
    let slack = peak - value;
    if slack > ACTIVE_TOLERANCE * value.max(1e-300) {
        return Err(Error::CertificateFailure(format!(
            "directional derivative {slack:e} exceeds the tolerance"
        )));
    }
    let least_favorable = active
        .into_iter()
        .zip(omega)
        .filter(|(_, w)| *w > 0.0)
        .map(|((location, efficiency), mass)| LeastFavorableAtom {
            location,
            mass,
            efficiency,
        })
        .collect();
    Ok(MaximinCertificate {
        design: design.clone(),
        interval: *interval,
        least_favorable,
        value,
        directional_slack: slack,
    })
}

/// Checks the guaranteed efficiency `inf_b eff ≥ 1/s` of a certified design.
pub fn efficiency_bound_check(cert: &MaximinCertificate, pair: &LinearModelPair) -> Result<()> {
    if cert.directional_slack > ACTIVE_TOLERANCE * cert.value.max(1e-300) {
        return Err(Error::CertificateFailure(
            "design does not satisfy the maximin optimality conditions".into(),
        ));
    }
    let bound = 1.0 / pair.s() as f64;
    if cert.value < bound - 1e-9 {
        return Err(Error::BoundViolation {
            value: cert.value,
            bound,
        });
    }
    Ok(())
}
