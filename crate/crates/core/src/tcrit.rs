//! The local criterion `T(ξ, θ₂)`, the optimal value `R(θ₂)` and T-efficiency.
//!
//! Linear pairs are normalised to `θ₂,m = 1`, so both quantities depend on the
//! reduced parameter `b` only. For the Michaelis–Menten pair the linear
//! parameter `θ₁₁` is always profiled out in closed form and the search runs
//! over the shift `θ₁₂` alone.

use nalgebra::{DMatrix, DVector};

use crate::chebdesign::rbar_quadratic;
use crate::design::{Design, DesignInterval, ReducedParameter};
use crate::error::{Error, Result};
use crate::models::{LinearModelPair, MichaelisMentenEmax, ShiftPiece};
use crate::moments::{info_matrix, schur_complement, schur_quadratic_form, RANK_TOLERANCE};
use crate::numeric::{golden_max, golden_min};

/// Lattice points per piece of the shift domain in the inner search.
pub const SHIFT_LATTICE: usize = 24;

/// Grid used for sup-norm evaluations.
pub const SUP_GRID: usize = 2001;

const REMEZ_TOLERANCE: f64 = 1e-10;
const REMEZ_MAX_EXCHANGES: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct TValue {
    pub value: f64,
    /// Best-fitting θ₁. For linear pairs these are the coefficients `q` of the
    /// smaller model against `(bᵀ, 1) f_(2)`.
    pub minimizer: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RValue {
    pub value: f64,
    pub bestapprox: Vec<f64>,
    /// Points where the deviation attains its sup-norm (within 1e-7 relative).
    pub extremals: Vec<f64>,
}

/// `T(ξ, b) = min_q ∫ (qᵀ f_(1) - (bᵀ, 1) f_(2))² dξ`.
pub fn t_value_linear(design: &Design, pair: &LinearModelPair, b: &ReducedParameter) -> Result<TValue> {
    let block = schur_complement(&info_matrix(design, pair));
    if block.is_defined() {
        let value = schur_quadratic_form(&block, b)?.max(0.0);
        let minimizer = block.best_fit(b)?;
        return Ok(TValue { value, minimizer });
    }
    least_squares_t(design, pair, b)
}

/// The direct weighted least-squares evaluation of `T(ξ, b)`.
pub fn least_squares_t(design: &Design, pair: &LinearModelPair, b: &ReducedParameter) -> Result<TValue> {
    let n = design.len();
    let m1 = pair.m1();
    let mut a = DMatrix::<f64>::zeros(n, m1);
    let mut y = DVector::<f64>::zeros(n);
    for (i, (x, w)) in design.iter().enumerate() {
        let sw = w.sqrt();
        for (j, v) in pair.eval_small(x).into_iter().enumerate() {
            a[(i, j)] = sw * v;
        }
        y[i] = sw * pair.extra_part(b, x)?;
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let q = if smax > 0.0 {
        svd.solve(&y, RANK_TOLERANCE * smax)
            .map_err(|e| Error::SingularFit(e.to_string()))?
    } else {
        DVector::zeros(m1)
    };
    let r = &a * &q - &y;
    Ok(TValue {
        value: r.norm_squared(),
        minimizer: q.iter().copied().collect(),
    })
}

/// Profiled inner problem of the Michaelis–Menten fit on a finite point set.
struct MmProfile<'a> {
    pair: &'a MichaelisMentenEmax,
    points: Vec<f64>,
    weights: Vec<f64>,
    targets: Vec<f64>,
    yy: f64,
}

impl<'a> MmProfile<'a> {
    fn new(pair: &'a MichaelisMentenEmax, design: &Design) -> Self {
        let points = design.support().to_vec();
        let weights = design.weights().to_vec();
        let targets: Vec<f64> = points.iter().map(|&x| pair.emax(x)).collect();
        let yy = weights.iter().zip(&targets).map(|(w, y)| w * y * y).sum();
        Self {
            pair,
            points,
            weights,
            targets,
            yy,
        }
    }

    /// `(min_A Σ ω (A g - y)², A)` for shift `c`.
    fn at(&self, c: f64) -> (f64, f64) {
        let mut gg = 0.0;
        let mut gy = 0.0;
        for ((&x, &w), &y) in self.points.iter().zip(&self.weights).zip(&self.targets) {
            let g = x / (c + x);
            gg += w * g * g;
            gy += w * g * y;
        }
        if !(gg > 0.0) || !gg.is_finite() {
            return (self.yy, 0.0);
        }
        let a = gy / gg;
        ((self.yy - gy * a).max(0.0), a)
    }

    fn minimize(&self) -> Result<TValue> {
        let mut best: Option<(f64, f64, f64)> = None;
        for piece in self.pair.shift_domain().pieces() {
            let found = minimize_over_piece(piece, SHIFT_LATTICE, |c| self.at(c).0);
            if let Some((c, v)) = found {
                if best.is_none_or(|(_, bv, _)| v < bv) {
                    best = Some((c, v, self.at(c).1));
                }
            }
        }
        let (c, _, a) = best.ok_or_else(|| {
            Error::ConvergenceFailure("inner Michaelis–Menten fit found no finite value".into())
        })?;
        let theta1 = [a, c];
        // report the integral at the returned minimizer
        let value: f64 = self
            .points
            .iter()
            .zip(&self.weights)
            .zip(&self.targets)
            .map(|((&x, &w), &y)| {
                let d = a * x / (c + x) - y;
                w * d * d
            })
            .sum();
        Ok(TValue {
            value,
            minimizer: theta1.to_vec(),
        })
    }
}

/// Minimises `f(c)` over one piece of the shift domain: a log-spaced lattice
/// in the distance from the pole, then golden section (in log distance)
/// around every lattice local minimum.
pub(crate) fn minimize_over_piece(
    piece: &ShiftPiece,
    lattice: usize,
    mut f: impl FnMut(f64) -> f64,
) -> Option<(f64, f64)> {
    let ls = piece.lattice(lattice);
    let vs: Vec<f64> = ls.iter().map(|&s| f(piece.at(s))).collect();
    let n = ls.len();
    let mut best: Option<(f64, f64)> = None;
    for i in 0..n {
        if !vs[i].is_finite() {
            continue;
        }
        let left = if i == 0 { f64::INFINITY } else { vs[i - 1] };
        let right = if i + 1 == n { f64::INFINITY } else { vs[i + 1] };
        if !(vs[i] <= left && vs[i] <= right) {
            continue;
        }
        let lo = ls[i.saturating_sub(1)].ln();
        let hi = ls[(i + 1).min(n - 1)].ln();
        let (t, v) = golden_min(|t| f(piece.at(t.exp())), lo, hi, 1e-13);
        let cand = if v < vs[i] {
            (piece.at(t.exp()), v)
        } else {
            (piece.at(ls[i]), vs[i])
        };
        if best.is_none_or(|(_, bv)| cand.1 < bv) {
            best = Some(cand);
        }
    }
    best
}

/// `T(ξ, θ₂)` for the Michaelis–Menten / EMAX pair.
pub fn t_value_nonlinear(design: &Design, pair: &MichaelisMentenEmax) -> Result<TValue> {
    MmProfile::new(pair, design).minimize()
}

/// `R̄(b) = inf_q sup_x |qᵀ f_(1) - (bᵀ, 1) f_(2)|²` on `interval`.
pub fn r_value_linear(
    pair: &LinearModelPair,
    b: &ReducedParameter,
    interval: &DesignInterval,
) -> Result<RValue> {
    if pair.is_monomial() && pair.m() == 2 && pair.s() == 2 {
        if let Some(r) = interval.symmetric_half_width() {
            return Ok(constant_vs_quadratic_r(b.values()[0], r, interval));
        }
    }
    remez(pair, b, interval)
}

fn constant_vs_quadratic_r(b: f64, r: f64, interval: &DesignInterval) -> RValue {
    let g = |x: f64| b * x + x * x;
    let mut cands = vec![-r, r];
    if (-b / 2.0).abs() < r {
        cands.push(-b / 2.0);
    }
    let hi = cands.iter().map(|&x| g(x)).fold(f64::NEG_INFINITY, f64::max);
    let lo = cands.iter().map(|&x| g(x)).fold(f64::INFINITY, f64::min);
    let c = 0.5 * (hi + lo);
    let value = rbar_quadratic(b, r);
    let e = (value.sqrt()).max(f64::MIN_POSITIVE);
    let mut extremals: Vec<f64> = cands
        .into_iter()
        .filter(|&x| interval.contains(x) && ((g(x) - c).abs() - e).abs() <= 1e-7 * e)
        .collect();
    extremals.sort_by(f64::total_cmp);
    RValue {
        value,
        bestapprox: vec![c],
        extremals,
    }
}

/// Best uniform approximation of `(bᵀ, 1) f_(2)` by `span f_(1)` via the
/// multi-point Remez exchange.
fn remez(pair: &LinearModelPair, b: &ReducedParameter, interval: &DesignInterval) -> Result<RValue> {
    let n = pair.m1();
    let (lo, hi) = (interval.lower(), interval.upper());
    let target = |x: f64| pair.extra_part(b, x).unwrap_or(f64::NAN);
    let mid = interval.midpoint();
    let half = 0.5 * interval.width();
    let mut reference: Vec<f64> = (0..=n)
        .map(|i| mid - half * (std::f64::consts::PI * i as f64 / n as f64).cos())
        .collect();
    let grid = interval.grid(SUP_GRID);
    let mut last_q = vec![0.0; n];
    for _ in 0..REMEZ_MAX_EXCHANGES {
        let (q, level) = solve_reference(pair, &reference, &target)?;
        last_q = q.clone();
        let err = |x: f64| target(x) - dot(&pair.eval_small(x), &q);
        let extrema = signed_extrema(&grid, &err, lo, hi);
        let emax = extrema.iter().map(|(_, e)| e.abs()).fold(0.0, f64::max);
        if emax <= 1e-300 {
            return Ok(RValue {
                value: 0.0,
                bestapprox: q,
                extremals: vec![],
            });
        }
        if (emax - level.abs()) <= REMEZ_TOLERANCE * emax {
            return Ok(finish(q, emax, &extrema));
        }
        reference = exchange(&reference, &extrema, n + 1, &err);
    }
    let err = |x: f64| target(x) - dot(&pair.eval_small(x), &last_q);
    let extrema = signed_extrema(&grid, &err, lo, hi);
    let emax = extrema.iter().map(|(_, e)| e.abs()).fold(0.0, f64::max);
    let (_, level) = solve_reference(pair, &reference, &target)?;
    if (emax - level.abs()) <= 1e-6 * emax {
        return Ok(finish(last_q, emax, &extrema));
    }
    Err(Error::ConvergenceFailure(format!(
        "Remez exchange did not level after {REMEZ_MAX_EXCHANGES} exchanges"
    )))
}

fn finish(q: Vec<f64>, emax: f64, extrema: &[(f64, f64)]) -> RValue {
    let extremals = extrema
        .iter()
        .filter(|(_, e)| (e.abs() - emax).abs() <= 1e-7 * emax)
        .map(|(x, _)| *x)
        .collect();
    RValue {
        value: emax * emax,
        bestapprox: q,
        extremals,
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `Σ q_j f_j(x_i) + (-1)^i E = g(x_i)` on the reference.
fn solve_reference(
    pair: &LinearModelPair,
    reference: &[f64],
    target: &impl Fn(f64) -> f64,
) -> Result<(Vec<f64>, f64)> {
    let n = pair.m1();
    let mut a = DMatrix::<f64>::zeros(n + 1, n + 1);
    let mut rhs = DVector::<f64>::zeros(n + 1);
    for (i, &x) in reference.iter().enumerate() {
        for (j, v) in pair.eval_small(x).into_iter().enumerate() {
            a[(i, j)] = v;
        }
        a[(i, n)] = if i % 2 == 0 { 1.0 } else { -1.0 };
        rhs[i] = target(x);
    }
    let sol = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::ConvergenceFailure("singular Remez reference".into()))?;
    Ok((sol.iter().take(n).copied().collect(), sol[n]))
}

/// Extremum of each constant-sign run of `err` on the grid, polished by
/// golden section. Returns `(x, err(x))` in increasing `x`.
fn signed_extrema(grid: &[f64], err: &impl Fn(f64) -> f64, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let vals: Vec<f64> = grid.iter().map(|&x| err(x)).collect();
    let mut out: Vec<(f64, f64)> = Vec::new();
    let mut start = 0;
    while start < grid.len() {
        let sign = vals[start] >= 0.0;
        let mut end = start;
        while end + 1 < grid.len() && (vals[end + 1] >= 0.0) == sign {
            end += 1;
        }
        let k = (start..=end)
            .max_by(|&i, &j| vals[i].abs().total_cmp(&vals[j].abs()))
            .unwrap();
        let a = if k == 0 { lo } else { grid[k - 1] };
        let b = if k + 1 == grid.len() { hi } else { grid[k + 1] };
        let s = if sign { 1.0 } else { -1.0 };
        let (x, v) = golden_max(|t| s * err(t), a, b, 1e-14);
        let best = if v > s * vals[k] { (x, s * v) } else { (grid[k], vals[k]) };
        out.push(best);
        start = end + 1;
    }
    out
}

/// New reference of `size` alternating points containing the global extremum.
fn exchange(
    old: &[f64],
    extrema: &[(f64, f64)],
    size: usize,
    err: &impl Fn(f64) -> f64,
) -> Vec<f64> {
    if extrema.len() >= size {
        let mut ext: Vec<(f64, f64)> = extrema.to_vec();
        while ext.len() > size {
            if ext[0].1.abs() < ext[ext.len() - 1].1.abs() {
                ext.remove(0);
            } else {
                ext.pop();
            }
        }
        return ext.into_iter().map(|(x, _)| x).collect();
    }
    // too few sign changes: single-point exchange of the global extremum
    let (xg, eg) = extrema
        .iter()
        .copied()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .unwrap();
    let mut reference = old.to_vec();
    let pos = reference.partition_point(|&x| x < xg);
    let same_sign = |x: f64| (err(x) >= 0.0) == (eg >= 0.0);
    if pos == 0 {
        if same_sign(reference[0]) {
            reference[0] = xg;
        } else {
            reference.insert(0, xg);
            reference.pop();
        }
    } else if pos == reference.len() {
        let last = reference.len() - 1;
        if same_sign(reference[last]) {
            reference[last] = xg;
        } else {
            reference.push(xg);
            reference.remove(0);
        }
    } else if same_sign(reference[pos - 1]) {
        reference[pos - 1] = xg;
    } else {
        reference[pos] = xg;
    }
    reference
}

/// `R(θ₂) = inf_{θ₁} sup_x |η₁(x, θ₁) - η₂(x, θ₂)|²` for the
/// Michaelis–Menten / EMAX pair.
pub fn r_value_nonlinear(pair: &MichaelisMentenEmax) -> Result<RValue> {
    let interval = pair.interval();
    let grid = interval.grid(SUP_GRID);
    let targets: Vec<f64> = grid.iter().map(|&x| pair.emax(x)).collect();
    let sup_at = |c: f64| sup_fit(&grid, &targets, c);
    let mut best: Option<(f64, f64)> = None;
    for piece in pair.shift_domain().pieces() {
        if let Some((c, v)) = minimize_over_piece(piece, SHIFT_LATTICE, |c| sup_at(c).0) {
            if best.is_none_or(|(_, bv)| v < bv) {
                best = Some((c, v));
            }
        }
    }
    let (c, _) = best.ok_or_else(|| {
        Error::ConvergenceFailure("no finite sup-norm fit over the shift domain".into())
    })?;
    let (_, a) = sup_at(c);
    let theta1 = [a, c];
    let err = |x: f64| a * x / (c + x) - pair.emax(x);
    let extrema = signed_extrema(&grid, &err, interval.lower(), interval.upper());
    let emax = extrema.iter().map(|(_, e)| e.abs()).fold(0.0, f64::max);
    Ok(finish(theta1.to_vec(), emax, &extrema))
}

/// `(min_A max_i |A g_i - y_i|, A)` for shift `c`.
fn sup_fit(grid: &[f64], targets: &[f64], c: f64) -> (f64, f64) {
    let g: Vec<f64> = grid.iter().map(|&x| x / (c + x)).collect();
    if g.iter().any(|v| !v.is_finite()) {
        return (f64::INFINITY, 0.0);
    }
    let ratios = g
        .iter()
        .zip(targets)
        .filter(|(g, _)| g.abs() > 0.0)
        .map(|(g, y)| y / g);
    let (lo, hi) = ratios.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), r| {
        (l.min(r), h.max(r))
    });
    let dev = |a: f64| {
        g.iter()
            .zip(targets)
            .map(|(g, y)| (a * g - y).abs())
            .fold(0.0, f64::max)
    };
    if !lo.is_finite() {
        return (dev(0.0), 0.0);
    }
    let span = (hi - lo).max(1e-300);
    let (a, _) = golden_min(dev, lo - 1e-9 * span, hi + 1e-9 * span, 1e-15);
    let v = dev(a);
    (v, a)
}

/// `T(ξ, b) / R̄(b)`; errors if `T` exceeds `R̄` by more than `1e-6` relative.
pub fn t_efficiency_linear(
    design: &Design,
    pair: &LinearModelPair,
    b: &ReducedParameter,
    interval: &DesignInterval,
) -> Result<f64> {
    let t = t_value_linear(design, pair, b)?.value;
    let r = r_value_linear(pair, b, interval)?.value;
    efficiency_ratio(t, r)
}

/// `T(ξ, θ₂) / R(θ₂)` for the Michaelis–Menten / EMAX pair.
pub fn t_efficiency_nonlinear(design: &Design, pair: &MichaelisMentenEmax) -> Result<f64> {
    let t = t_value_nonlinear(design, pair)?.value;
    let r = r_value_nonlinear(pair)?.value;
    efficiency_ratio(t, r)
}

pub(crate) fn efficiency_ratio(t: f64, r: f64) -> Result<f64> {
    if t > r * (1.0 + 1e-6) && t > 1e-300 {
        return Err(Error::InconsistentEfficiency { t, r });
    }
    if r <= 0.0 {
        return Ok(if t <= 0.0 { 1.0 } else { 0.0 });
    }
    Ok(t / r)
}
