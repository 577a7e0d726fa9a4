//! Closed-form robust designs for polynomial pairs whose degrees differ by two.
//!
//! The designs `ξ_{m,β}` on `[-r, r]` put mass at `±r` and at the roots of
//! `U_{m-1}(x/r) + β U_{m-3}(x/r)`. Bayesian designs take `β = β_B`, the prior
//! second moment of `b` over `r²` clipped to 1; standardized maximin designs
//! take `β = 1 - 2h*`.

use crate::design::{BSet, Design, DesignInterval, HalfWidth, Prior, PriorDensity, ReducedParameter};
use crate::error::{Error, Result};
use crate::models::LinearModelPair;
use crate::moments::{info_matrix, schur_complement, schur_quadratic_form};
use crate::numeric::{adaptive_simpson, bisect, gauss_legendre, golden_max, golden_min};
use crate::tcrit::r_value_linear;

/// Prior half-width where the uniform-efficiency prior reaches `∫ b² dπ = 1`.
pub fn uniform_eff_threshold() -> f64 {
    (7.0 + 33f64.sqrt()) / 4.0
}

/// `U_n(x)` by the three-term recurrence, with `U_{-1} = 0`.
pub fn chebyshev_u(n: i64, x: f64) -> f64 {
    assert!(n >= -1, "U_n needs n >= -1");
    if n == -1 {
        return 0.0;
    }
    let (mut prev, mut cur) = (0.0, 1.0);
    for _ in 0..n {
        let next = 2.0 * x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

// U_n for any n, with U_{-2} = -1 so that U_{n+1} = 2xU_n - U_{n-1} holds throughout
fn u(n: i64, x: f64) -> f64 {
    match n {
        n if n < -2 => panic!("U_{n} is not used"),
        -2 => -1.0,
        n => chebyshev_u(n, x),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct XiMBeta {
    pub m: usize,
    pub beta: f64,
    pub halfwidth: f64,
    pub design: Design,
}

/// The design `ξ_{m,β}` on `[-r, r]`.
pub fn xi_m_beta(m: usize, beta: f64, r: f64) -> Result<XiMBeta> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("m = {m} must be at least 2")));
    }
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidArgument(format!("β = {beta} must lie in [0, 1]")));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!("half-width {r} must be positive")));
    }
    let mi = m as i64;
    let (points, weights) = if beta == 1.0 {
        let roots = positive_roots(m - 2, |t| u(mi - 2, t))?;
        let inner = 1.0 / (m - 1) as f64;
        let mut pts = vec![-1.0, 1.0];
        let mut ws = vec![0.5 * inner, 0.5 * inner];
        push_symmetric(&mut pts, &mut ws, &roots, m % 2 == 1, |_| inner);
        (pts, ws)
    } else {
        let p = |t: f64| u(mi - 1, t) + beta * u(mi - 3, t);
        let roots = positive_roots(m - 1, p)?;
        let end = (1.0 + beta) / (2.0 * (m as f64 + beta * (m as f64 - 2.0)));
        let interior = |t: f64| {
            let ratio = u(mi - 2, t) / (u(mi, t) + beta * u(mi - 2, t));
            1.0 / ((m - 1) as f64 - (1.0 + beta) * ratio)
        };
        let mut pts = vec![-1.0, 1.0];
        let mut ws = vec![end, end];
        push_symmetric(&mut pts, &mut ws, &roots, m.is_multiple_of(2), interior);
        (pts, ws)
    };
    let design = Design::new(points.iter().map(|t| r * t).collect(), weights)?;
    Ok(XiMBeta {
        m,
        beta,
        halfwidth: r,
        design,
    })
}

fn push_symmetric(
    pts: &mut Vec<f64>,
    ws: &mut Vec<f64>,
    positive: &[f64],
    has_zero: bool,
    weight: impl Fn(f64) -> f64,
) {
    if has_zero {
        pts.push(0.0);
        ws.push(weight(0.0));
    }
    for &t in positive {
        let w = weight(t);
        pts.extend([-t, t]);
        ws.extend([w, w]);
    }
}

/// Positive roots in `(0, 1)` of a polynomial of degree `deg` with parity
/// `(-1)^deg`. Odd polynomials are divided by `t` so the root at 0 is skipped.
/// Brackets come from a Chebyshev-angle grid plus a geometric grid near 0,
/// where roots of `U_{m-1} + β U_{m-3}` collide as `β → 1`.
fn positive_roots(deg: usize, p: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
    let expected = deg / 2;
    if expected == 0 {
        return Ok(vec![]);
    }
    let h = |t: f64| if deg % 2 == 1 { p(t) / t } else { p(t) };
    let n = 10 * (deg + 1);
    let mut grid: Vec<f64> = (1..n)
        .map(|k| (std::f64::consts::FRAC_PI_2 * k as f64 / n as f64).cos())
        .collect();
    let smallest = grid[grid.len() - 1];
    grid.extend((1..=30).map(|k| 0.5f64.powi(k) * smallest));
    grid.sort_by(f64::total_cmp);
    let mut roots = Vec::with_capacity(expected);
    for w in grid.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (h(a), h(b));
        if fa == 0.0 {
            roots.push(a);
        } else if fa.signum() != fb.signum() && fb != 0.0 {
            roots.push(bisect(&h, a, b, 1e-15)?);
        }
    }
    if roots.len() != expected {
        return Err(Error::RootBracketFailure(format!(
            "found {} of {expected} positive roots",
            roots.len()
        )));
    }
    Ok(roots)
}

/// `β_B = min(1, ∫ b² dπ / r²)` for a symmetric scalar prior.
pub fn beta_bayes(prior: &Prior, r: f64) -> Result<f64> {
    if prior.dimension() != 1 {
        return Err(Error::InvalidPrior("β_B needs a scalar reduced parameter".into()));
    }
    if !prior.is_symmetric() {
        return Err(Error::AsymmetricPrior);
    }
    let mu2 = match prior.density() {
        Some(PriorDensity::UniformEfficiency { a }) => prior_second_moment_uniform_eff(a),
        None => prior.second_moment(),
    };
    Ok((mu2 / (r * r)).min(1.0))
}

/// `R̄(b)` for the constant vs quadratic pair on `[-r, r]`.
pub fn rbar_quadratic(b: f64, r: f64) -> f64 {
    let u = b.abs() / r;
    let unit = if u <= 2.0 {
        0.25 * (1.0 + 0.5 * u).powi(4)
    } else {
        u * u
    };
    r.powi(4) * unit
}

/// Efficiency `(h + b²)(1 - h)/R̄(b)` of the design with masses
/// `(1-h)/2, h, (1-h)/2` at `-1, 0, 1`.
pub fn k_function(h: f64, b: f64) -> f64 {
    (h + b * b) * (1.0 - h) / rbar_quadratic(b, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaximinRegime {
    /// `d ≤ 1/2`: the infimum sits at the boundary `b = ±d`.
    Boundary,
    /// `1/2 < d ≤ 5√10/4`: `h* = 3/8`, `b* = 1/2`.
    Interior,
    /// `d > 5√10/4` (including `d = ∞`): `b*` solves the quartic.
    Quartic,
    /// Solved by numeric maximisation of the scanned inner infimum.
    Numeric,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaximinPolySolution {
    pub d: HalfWidth,
    pub hstar: f64,
    pub bstar: Option<f64>,
    pub beta_m: f64,
    pub regime: MaximinRegime,
    pub design: Design,
}

impl MaximinPolySolution {
    /// True when `h*` sits on an end of `[0, 1/2]`.
    pub fn is_boundary_solution(&self) -> bool {
        self.hstar <= 1e-9 || self.hstar >= 0.5 - 1e-9
    }
}

fn quartic(x: f64, d2: f64) -> f64 {
    (((x + 6.0) * x + (12.0 - 2.0 * d2)) * x + (8.0 - 16.0 * d2)) * x + 8.0 * d2
}

/// Standardized maximin `h*` for the polynomial pair of degrees `m - 2` and
/// `m` on `[-r, r]` over `ℬ`.
pub fn hstar_solve(bset: &BSet, r: f64, m: usize) -> Result<MaximinPolySolution> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("m = {m} must be at least 2")));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!("half-width {r} must be positive")));
    }
    if bset.dimension() != 1 {
        return Err(Error::InvalidParameterSet("b must be scalar".into()));
    }
    let (hstar, bstar, regime, d) = match (m, bset) {
        (2, BSet::Interval(hw)) => {
            let (h, b, regime) = quadratic_closed_form(*hw, r)?;
            (h, Some(b), regime, *hw)
        }
        (2, BSet::Finite(points)) => {
            let bs: Vec<f64> = points.iter().map(|p| p.values()[0] / r).collect();
            let (h, b) = maximize_over_h(|h| finite_inf(&bs, |b| k_function(h, b)));
            let d = bs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            (h, Some(b * r), MaximinRegime::Numeric, HalfWidth::Finite(d * r))
        }
        (_, BSet::Interval(HalfWidth::Infinite)) => {
            return Err(Error::InvalidParameterSet(
                "unbounded ℬ is only defined for the constant vs quadratic pair".into(),
            ))
        }
        (_, set) => {
            let bs: Vec<f64> = match set {
                BSet::Interval(HalfWidth::Finite(d)) => {
                    (0..1001).map(|i| d * i as f64 / 1000.0).collect()
                }
                BSet::Finite(points) => points.iter().map(|p| p.values()[0]).collect(),
                BSet::Interval(HalfWidth::Infinite) => unreachable!(),
            };
            let refine = matches!(set, BSet::Interval(_));
            let eff = EfficiencyOfXi::new(m, r, bs)?;
            let (h, _) = maximize_over_h(|h| eff.inf(h, false));
            let (_, b) = eff.inf(h, refine);
            (h, Some(b), MaximinRegime::Numeric, d_of(set))
        }
    };
    let beta_m = 1.0 - 2.0 * hstar;
    let design = xi_m_beta(m, beta_m.clamp(0.0, 1.0), r)?.design;
    Ok(MaximinPolySolution {
        d,
        hstar,
        bstar,
        beta_m,
        regime,
        design,
    })
}

fn quadratic_closed_form(hw: HalfWidth, r: f64) -> Result<(f64, f64, MaximinRegime)> {
    let threshold = 5.0 * 10f64.sqrt() / 4.0;
    let lower = 2.0 * 5f64.sqrt() - 4.0;
    match hw {
        HalfWidth::Infinite => Ok((lower - lower * lower / 2.0, lower * r, MaximinRegime::Quartic)),
        HalfWidth::Finite(d) => {
            let d = d / r;
            if d <= 0.5 {
                Ok(((1.0 - d * d) / 2.0, d * r, MaximinRegime::Boundary))
            } else if d <= threshold {
                Ok((3.0 / 8.0, 0.5 * r, MaximinRegime::Interior))
            } else {
                let d2 = d * d;
                let b = bisect(|x| quartic(x, d2), lower, 0.5, 1e-16)?;
                Ok((b - b * b / 2.0, b * r, MaximinRegime::Quartic))
            }
        }
    }
}

fn finite_inf(bs: &[f64], f: impl Fn(f64) -> f64) -> (f64, f64) {
    bs.iter()
        .map(|&b| (f(b), b))
        .fold((f64::INFINITY, 0.0), |acc, c| if c.0 < acc.0 { c } else { acc })
}

/// Maximises `h ↦ inf_b` over `[0, 1/2]`; `inner` returns `(inf, argmin b)`.
fn maximize_over_h(inner: impl Fn(f64) -> (f64, f64)) -> (f64, f64) {
    let n = 201;
    let hs: Vec<f64> = (0..n).map(|i| 0.5 * i as f64 / (n - 1) as f64).collect();
    let vals: Vec<f64> = hs.iter().map(|&h| inner(h).0).collect();
    let k = (0..n).max_by(|&i, &j| vals[i].total_cmp(&vals[j])).unwrap();
    let lo = hs[k.saturating_sub(1)];
    let hi = hs[(k + 1).min(n - 1)];
    let (h, v) = golden_max(|h| inner(h).0, lo, hi, 1e-12);
    let h = if v >= vals[k] { h } else { hs[k] };
    (h, inner(h).1)
}

fn d_of(set: &BSet) -> HalfWidth {
    match set {
        BSet::Interval(hw) => *hw,
        BSet::Finite(p) => {
            HalfWidth::Finite(p.iter().fold(0.0f64, |a, b| a.max(b.values()[0].abs())))
        }
    }
}

/// Efficiency `T(ξ_{m,1-2h}, b)/R̄(b)` for general `m` and `r`, with `R̄`
/// cached on a fixed list of `b` values.
struct EfficiencyOfXi {
    m: usize,
    r: f64,
    pair: LinearModelPair,
    interval: DesignInterval,
    bs: Vec<f64>,
    rbars: Vec<f64>,
}

impl EfficiencyOfXi {
    fn new(m: usize, r: f64, bs: Vec<f64>) -> Result<Self> {
        let interval = DesignInterval::symmetric(r)?;
        let pair = LinearModelPair::polynomial(m - 2, m, &interval)?;
        let rbars = bs
            .iter()
            .map(|&b| Ok(r_value_linear(&pair, &ReducedParameter::scalar(b), &interval)?.value))
            .collect::<Result<Vec<f64>>>()?;
        Ok(Self {
            m,
            r,
            pair,
            interval,
            bs,
            rbars,
        })
    }

    fn rbar(&self, b: f64) -> f64 {
        r_value_linear(&self.pair, &ReducedParameter::scalar(b), &self.interval)
            .map(|v| v.value)
            .unwrap_or(f64::NAN)
    }

    /// `(inf_b, argmin b)` over the cached list; with `refine`, the scan
    /// minimum is polished by golden section between its neighbours (the
    /// list is then an ordered grid of `[0, d]`, using symmetry in `b`).
    fn inf(&self, h: f64, refine: bool) -> (f64, f64) {
        let Ok(xi) = xi_m_beta(self.m, (1.0 - 2.0 * h).clamp(0.0, 1.0), self.r) else {
            return (f64::NAN, 0.0);
        };
        let block = schur_complement(&info_matrix(&xi.design, &self.pair));
        let t = |b: f64| schur_quadratic_form(&block, &ReducedParameter::scalar(b)).unwrap_or(f64::NAN);
        let n = self.bs.len();
        let vals: Vec<f64> = (0..n).map(|i| t(self.bs[i]) / self.rbars[i]).collect();
        let k = (0..n).min_by(|&i, &j| vals[i].total_cmp(&vals[j])).unwrap();
        if !refine || n < 2 {
            return (vals[k], self.bs[k]);
        }
        let lo = self.bs[k.saturating_sub(1)];
        let hi = self.bs[(k + 1).min(n - 1)];
        let (b, v) = golden_min(|b| t(b) / self.rbar(b), lo, hi, 1e-10);
        if v < vals[k] {
            (v, b)
        } else {
            (vals[k], self.bs[k])
        }
    }
}

/// Bayesian design for the constant vs quadratic pair on `[-1, 1]` under the
/// prior with density proportional to `1/R̄(b)` on `[-a, a]`.
pub fn bayes_quadratic_uniform_eff(a: f64) -> Result<Design> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidArgument(format!("prior half-width {a} must be positive")));
    }
    if a >= uniform_eff_threshold() {
        return Design::new(vec![-1.0, 1.0], vec![0.5, 0.5]);
    }
    let (end, mid) = if a <= 2.0 {
        let den = 12.0 + 6.0 * a + a * a;
        (
            (5.0 * a * a + 6.0 * a + 12.0) / (4.0 * den),
            (-3.0 * a * a + 6.0 * a + 12.0) / (2.0 * den),
        )
    } else {
        let den = 17.0 * a - 6.0;
        (
            (6.0 * a * a + 13.0 * a - 6.0) / (4.0 * den),
            (-6.0 * a * a + 21.0 * a - 6.0) / (2.0 * den),
        )
    };
    Design::new(vec![-1.0, 0.0, 1.0], vec![end, mid, end])
}

/// Normalising constant `1/∫_{-a}^{a} db/R̄(b)` of the uniform-efficiency prior.
pub fn uniform_eff_normalizer(a: f64) -> f64 {
    if a <= 2.0 {
        3.0 * (2.0 + a).powi(3) / (16.0 * a * (12.0 + 6.0 * a + a * a))
    } else {
        3.0 * a / (17.0 * a - 6.0)
    }
}

/// Density of the uniform-efficiency prior at `b`.
pub fn uniform_eff_density(a: f64, b: f64) -> f64 {
    if b.abs() > a {
        return 0.0;
    }
    uniform_eff_normalizer(a) / rbar_quadratic(b, 1.0)
}

/// `∫ b² dπ` of the uniform-efficiency prior on `[-a, a]`.
pub fn prior_second_moment_uniform_eff(a: f64) -> f64 {
    if a <= 2.0 {
        4.0 * a * a / (12.0 + 6.0 * a + a * a)
    } else {
        (6.0 * a * a - 4.0 * a) / (17.0 * a - 6.0)
    }
}

/// `∫ b² dπ` and `∫ dπ` of the uniform-efficiency prior by adaptive Simpson
/// quadrature of the unnormalised density, split at the kinks `0` and `±2`.
pub fn prior_second_moment_uniform_eff_quadrature(a: f64) -> (f64, f64) {
    let pieces: Vec<(f64, f64)> = if a <= 2.0 {
        vec![(0.0, a)]
    } else {
        vec![(0.0, 2.0), (2.0, a)]
    };
    let mut mass = 0.0;
    let mut moment = 0.0;
    for (lo, hi) in pieces {
        mass += 2.0 * adaptive_simpson(&|b: f64| 1.0 / rbar_quadratic(b, 1.0), lo, hi, 1e-14);
        moment += 2.0 * adaptive_simpson(&|b: f64| b * b / rbar_quadratic(b, 1.0), lo, hi, 1e-14);
    }
    (moment / mass, mass)
}

/// Discretises the uniform-efficiency prior by `nodes`-point Gauss–Legendre
/// rules on each smooth piece, mirrored exactly about 0.
pub fn uniform_efficiency_prior(a: f64, nodes: usize) -> Result<Prior> {
    if !(a > 0.0 && a.is_finite()) || nodes == 0 {
        return Err(Error::InvalidPrior(format!("invalid half-width {a} or node count")));
    }
    let pieces: Vec<(f64, f64)> = if a <= 2.0 {
        vec![(0.0, a)]
    } else {
        vec![(0.0, 2.0), (2.0, a)]
    };
    let mut half: Vec<(f64, f64)> = Vec::new();
    for (lo, hi) in pieces {
        for (b, w) in gauss_legendre(nodes, lo, hi) {
            half.push((b, w / rbar_quadratic(b, 1.0)));
        }
    }
    let total: f64 = 2.0 * half.iter().map(|(_, w)| w).sum::<f64>();
    let mut atoms = Vec::with_capacity(2 * half.len());
    for &(b, w) in &half {
        atoms.push((ReducedParameter::scalar(b), w / total));
        atoms.push((ReducedParameter::scalar(-b), w / total));
    }
    let sum: f64 = atoms.iter().map(|(_, m)| m).sum();
    let k = atoms.len() - 1;
    atoms[k].1 += 1.0 - sum;
    Ok(Prior::new(atoms)?.with_density(PriorDensity::UniformEfficiency { a }))
}

/// `β` of the `φ_p`-optimal design for `p ∈ (-1, ∞]`: the root in `[0, 1]` of
/// `((1 - β)/2)^{p+1} = r^{-2p} β`.
pub fn phi_p_beta(p: f64, r: f64) -> Result<f64> {
    if !(p > -1.0) || !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!("need p > -1 and r > 0, got p = {p}, r = {r}")));
    }
    if p.is_infinite() {
        return Ok((1.0 - 2.0 / (r * r)).max(0.0));
    }
    let ln_r = r.ln();
    let g = |beta: f64| (p + 1.0) * ((1.0 - beta) / 2.0).ln() + 2.0 * p * ln_r - beta.ln();
    bisect(g, f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0, 1e-15)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_weights(d: &Design, support: &[f64], weights: &[f64], tol: f64) {
        assert_eq!(d.len(), support.len(), "{d:?}");
        for ((x, w), (ex, ew)) in d.iter().zip(support.iter().zip(weights)) {
            assert!((x - ex).abs() <= tol && (w - ew).abs() <= tol, "{d:?}");
        }
    }

    #[test]
    fn chebyshev_values() {
        assert_eq!(chebyshev_u(2, 0.0), -1.0);
        assert_eq!(chebyshev_u(1, 0.5), 1.0);
        assert!(chebyshev_u(3, std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(chebyshev_u(-1, 0.3), 0.0);
        assert_eq!(chebyshev_u(2, 2.0), 15.0);
        let t: f64 = 0.3;
        let th = t.acos();
        assert!((chebyshev_u(7, t) - (8.0 * th).sin() / th.sin()).abs() < 1e-13);
    }

    #[test]
    fn xi_examples() {
        let x = xi_m_beta(2, 1.0 / 3.0, 1.0).unwrap();
        assert_weights(&x.design, &[-1.0, 0.0, 1.0], &[1.0 / 3.0; 3], 1e-15);
        let x = xi_m_beta(2, 1.0, 1.0).unwrap();
        assert_weights(&x.design, &[-1.0, 1.0], &[0.5, 0.5], 0.0);
        let x = xi_m_beta(3, 1.0, 1.0).unwrap();
        assert_weights(&x.design, &[-1.0, 0.0, 1.0], &[0.25, 0.5, 0.25], 1e-15);
    }

    #[test]
    fn xi_weights_sum_to_one_and_support_is_symmetric() {
        for m in 2..=8 {
            for beta in [0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 0.999_999, 1.0] {
                for r in [0.5, 1.0, 3.0] {
                    let x = xi_m_beta(m, beta, r).unwrap();
                    let d = &x.design;
                    let sum: f64 = d.weights().iter().sum();
                    assert!((sum - 1.0).abs() < 1e-12, "m={m} β={beta}: {sum}");
                    let n = d.len();
                    let expect = if beta == 1.0 { m } else { m + 1 };
                    if !(m == 2 && beta == 1.0) {
                        assert_eq!(n, expect, "m={m} β={beta}");
                    }
                    for i in 0..n {
                        assert!((d.support()[i] + d.support()[n - 1 - i]).abs() < 1e-12 * r);
                        assert!(d.weights()[i] > 0.0);
                    }
                    assert_eq!(d.support()[0], -r);
                }
            }
        }
    }

    #[test]
    fn xi_two_beta_matches_h_parametrisation() {
        for h in [0.0, 0.125, 0.375, 0.5] {
            let x = xi_m_beta(2, 1.0 - 2.0 * h, 1.0).unwrap();
            if h == 0.0 {
                assert_eq!(x.design.weights(), &[0.5, 0.5]);
                continue;
            }
            assert_eq!(x.design.weights()[1], h);
            assert_eq!(x.design.weights()[0], (1.0 - h) / 2.0);
        }
    }

    #[test]
    fn beta_bayes_examples() {
        let p = Prior::point_mass(ReducedParameter::scalar(0.0));
        assert_eq!(beta_bayes(&p, 1.0).unwrap(), 0.0);
        let p = Prior::new(vec![
            (ReducedParameter::scalar(-1.0), 0.5),
            (ReducedParameter::scalar(1.0), 0.5),
        ])
        .unwrap();
        assert_eq!(beta_bayes(&p, 1.0).unwrap(), 1.0);
        let p = uniform_efficiency_prior(1.0, 16).unwrap();
        assert!((beta_bayes(&p, 1.0).unwrap() - 4.0 / 19.0).abs() < 1e-15);
        assert!((p.second_moment() - 4.0 / 19.0).abs() < 1e-12);
        let q = Prior::new(vec![
            (ReducedParameter::scalar(-1.0), 0.4),
            (ReducedParameter::scalar(1.0), 0.6),
        ])
        .unwrap();
        assert_eq!(beta_bayes(&q, 1.0).unwrap_err(), Error::AsymmetricPrior);
    }

    #[test]
    fn rbar_values_and_scaling() {
        assert_eq!(rbar_quadratic(0.0, 1.0), 0.25);
        assert_eq!(rbar_quadratic(2.0, 1.0), 4.0);
        assert_eq!(rbar_quadratic(0.5, 1.0), 625.0 / 1024.0);
        assert_eq!(rbar_quadratic(3.0, 1.0), 9.0);
        assert!((rbar_quadratic(1.0, 2.0) - 16.0 * rbar_quadratic(0.5, 1.0)).abs() < 1e-14);
    }

    #[test]
    fn rbar_matches_remez_for_general_r() {
        use crate::models::BasisFunction;
        for r in [0.5, 2.0] {
            let iv = DesignInterval::symmetric(r).unwrap();
            let basis = vec![
                BasisFunction::new(|_| 1.0),
                BasisFunction::new(|x| x),
                BasisFunction::new(|x| x * x),
            ];
            let pair = LinearModelPair::new(basis, 1, &iv).unwrap();
            for b in [0.0, 0.3, 1.0, 4.5] {
                let v = r_value_linear(&pair, &ReducedParameter::scalar(b), &iv).unwrap().value;
                let cf = rbar_quadratic(b, r);
                assert!((v - cf).abs() < 1e-9 * cf, "r={r} b={b}: {v} vs {cf}");
            }
        }
    }

    fn three(d: &Design) -> [f64; 3] {
        [d.weights()[0], d.weights()[1], d.weights()[2]]
    }

    #[test]
    fn hstar_closed_forms() {
        let s = hstar_solve(&BSet::interval(0.5).unwrap(), 1.0, 2).unwrap();
        assert!((s.hstar - 0.375).abs() < 1e-15);
        let s = hstar_solve(&BSet::interval(2.0).unwrap(), 1.0, 2).unwrap();
        assert_eq!(s.hstar, 0.375);
        assert_eq!(s.bstar, Some(0.5));
        assert_eq!(three(&s.design), [5.0 / 16.0, 3.0 / 8.0, 5.0 / 16.0]);
        let s = hstar_solve(&BSet::unbounded(), 1.0, 2).unwrap();
        let r5 = 5f64.sqrt();
        assert!((s.bstar.unwrap() - (2.0 * r5 - 4.0)).abs() < 1e-15);
        assert!((s.hstar - (10.0 * r5 - 22.0)).abs() < 1e-14);
        let w = three(&s.design);
        assert!((w[0] - (11.5 - 5.0 * r5)).abs() < 1e-14);
        assert_eq!(s.regime, MaximinRegime::Quartic);
    }

    #[test]
    fn hstar_case_boundaries_are_continuous() {
        let t = 5.0 * 10f64.sqrt() / 4.0;
        let a = hstar_solve(&BSet::interval(t).unwrap(), 1.0, 2).unwrap();
        let b = hstar_solve(&BSet::interval(t * (1.0 + 1e-12)).unwrap(), 1.0, 2).unwrap();
        assert!((a.hstar - b.hstar).abs() < 1e-10);
        assert!(quartic(0.5, t * t).abs() < 1e-12);
        let a = hstar_solve(&BSet::interval(0.5).unwrap(), 1.0, 2).unwrap();
        let b = hstar_solve(&BSet::interval(0.5 + 1e-12).unwrap(), 1.0, 2).unwrap();
        assert!((a.hstar - b.hstar).abs() < 1e-10);
    }

    #[test]
    fn hstar_attains_inner_infimum() {
        for d in [0.1, 0.5, 1.0, 3.0, 5.0, 20.0] {
            let s = hstar_solve(&BSet::interval(d).unwrap(), 1.0, 2).unwrap();
            let n = 20001;
            let inf = (0..n)
                .map(|i| k_function(s.hstar, d * i as f64 / (n - 1) as f64))
                .fold(f64::INFINITY, f64::min);
            let at = k_function(s.hstar, s.bstar.unwrap());
            assert!(at <= inf + 1e-12 && inf - at < 1e-6, "d={d}: {at} vs {inf}");
        }
    }

    #[test]
    fn hstar_numeric_path_matches_closed_form() {
        // finite ℬ grid approximates the interval; general-m solver at m=2 too
        let pts: Vec<ReducedParameter> = (0..=400)
            .map(|i| ReducedParameter::scalar(-2.0 + 4.0 * i as f64 / 400.0))
            .collect();
        let s = hstar_solve(&BSet::finite(pts).unwrap(), 1.0, 2).unwrap();
        assert!((s.hstar - 0.375).abs() < 1e-6);
        let s = hstar_solve(&BSet::interval(4.0).unwrap(), 2.0, 2).unwrap();
        assert_eq!(s.hstar, 0.375);
        assert_eq!(s.bstar, Some(1.0));
    }

    #[test]
    fn hstar_general_m_interior_solution() {
        let s = hstar_solve(&BSet::interval(1.0).unwrap(), 1.0, 3).unwrap();
        assert_eq!(s.regime, MaximinRegime::Numeric);
        assert!(s.hstar > 0.0 && s.hstar < 0.5);
        assert_eq!(s.design.len(), 4);
        assert!(hstar_solve(&BSet::unbounded(), 1.0, 3).is_err());
    }

    #[test]
    fn uniform_eff_designs() {
        let d = bayes_quadratic_uniform_eff(1.0).unwrap();
        let w = three(&d);
        assert!((w[0] - 23.0 / 76.0).abs() < 1e-15 && (w[1] - 15.0 / 38.0).abs() < 1e-15);
        let d = bayes_quadratic_uniform_eff(3.0).unwrap();
        let w = three(&d);
        assert!((w[0] - 29.0 / 60.0).abs() < 1e-15 && (w[1] - 1.0 / 30.0).abs() < 1e-15);
        let d = bayes_quadratic_uniform_eff(10.0).unwrap();
        assert_eq!(d.support(), &[-1.0, 1.0]);
    }

    #[test]
    fn uniform_eff_designs_agree_with_xi() {
        for a in [0.5, 1.0, 2.0, 2.5, 3.0, 3.1] {
            let d = bayes_quadratic_uniform_eff(a).unwrap();
            let beta = prior_second_moment_uniform_eff(a).min(1.0);
            let x = xi_m_beta(2, beta, 1.0).unwrap();
            for (p, q) in d.weights().iter().zip(x.design.weights()) {
                assert!((p - q).abs() < 1e-14, "a = {a}");
            }
        }
    }

    #[test]
    fn second_moment_closed_form_matches_quadrature() {
        for a in [0.5, 1.0, 2.0, 3.0] {
            let (q, mass) = prior_second_moment_uniform_eff_quadrature(a);
            assert!((q - prior_second_moment_uniform_eff(a)).abs() < 1e-9, "a = {a}");
            assert!((mass * uniform_eff_normalizer(a) - 1.0).abs() < 1e-9);
        }
        assert!((prior_second_moment_uniform_eff(2.0) - 4.0 / 7.0).abs() < 1e-15);
        let a0 = uniform_eff_threshold();
        assert!((prior_second_moment_uniform_eff(a0) - 1.0).abs() < 1e-14);
        let root = bisect(|a| prior_second_moment_uniform_eff(a) - 1.0, 2.0, 4.0, 1e-14).unwrap();
        assert!((root - a0).abs() < 1e-12);
    }

    #[test]
    fn phi_p_examples() {
        assert!((phi_p_beta(0.0, 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert!((phi_p_beta(1.0, 1.0).unwrap() - (3.0 - 2.0 * 2f64.sqrt())).abs() < 1e-12);
        assert!((phi_p_beta(0.0, 2f64.sqrt()).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        let big = phi_p_beta(1e6, 2.0).unwrap();
        assert!((big - phi_p_beta(f64::INFINITY, 2.0).unwrap()).abs() < 1e-5);
        assert!(phi_p_beta(-1.0, 1.0).is_err());
    }
}
