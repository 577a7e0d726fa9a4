//! Cutting-plane maximisation of concave design criteria.
//!
//! Every criterion handled here is a minimum of linear functionals of the
//! design, `Φ(ξ) = min_k ∫ c_k dξ`, where each cut `c_k` comes from a best fit
//! θ̂₁ (and, for maximin criteria, a parameter candidate). The outer loop
//! alternates a weight LP over the accumulated cuts with column generation:
//! the LP duals `λ` give the mixture `φ = Σ λ_k c_k`, whose maximiser over the
//! design interval joins the support, and `max φ` is a global upper bound.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::design::{Design, DesignInterval, Prior, ReducedParameter};
use crate::error::{Error, Result};
use crate::lp::maximin_weights;
use crate::models::{LinearModelPair, MichaelisMentenEmax};
use crate::numeric::scan_max;
use crate::tcrit::{r_value_nonlinear, t_value_linear, t_value_nonlinear};

pub type Cut = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A cut together with its integral under the evaluated design.
#[derive(Clone)]
pub struct ActiveCut {
    pub cut: Cut,
    pub level: f64,
}

#[derive(Clone)]
pub struct Evaluation {
    pub value: f64,
    pub cuts: Vec<ActiveCut>,
}

impl Evaluation {
    /// Cuts whose level is within `rel` of the criterion value.
    pub fn active(&self, rel: f64) -> Vec<Cut> {
        let bound = self.value * (1.0 + rel) + f64::MIN_POSITIVE;
        self.cuts
            .iter()
            .filter(|c| c.level <= bound)
            .map(|c| c.cut.clone())
            .collect()
    }
}

pub trait Criterion: Send + Sync {
    fn evaluate(&self, design: &Design) -> Result<Evaluation>;

    /// The criterion has a unique, smoothly varying best fit near the optimum,
    /// so the optimality conditions can be polished by Newton's method.
    fn smooth(&self) -> bool {
        false
    }
}

/// Local criterion `T(ξ, b)` of a linear pair.
#[derive(Debug, Clone)]
pub struct LocalLinear {
    pub pair: LinearModelPair,
    pub b: ReducedParameter,
}

impl LocalLinear {
    fn cut(&self, q: Vec<f64>) -> Cut {
        let pair = self.pair.clone();
        let b = self.b.clone();
        Arc::new(move |x| {
            let fit: f64 = pair.eval_small(x).iter().zip(&q).map(|(f, c)| f * c).sum();
            let d = fit - pair.extra_part(&b, x).unwrap_or(f64::NAN);
            d * d
        })
    }
}

impl Criterion for LocalLinear {
    fn evaluate(&self, design: &Design) -> Result<Evaluation> {
        let t = t_value_linear(design, &self.pair, &self.b)?;
        Ok(Evaluation {
            value: t.value,
            cuts: vec![ActiveCut {
                cut: self.cut(t.minimizer),
                level: t.value,
            }],
        })
    }

    fn smooth(&self) -> bool {
        true
    }
}

/// Local criterion `T(ξ, θ₂)` of the Michaelis–Menten / EMAX pair.
#[derive(Debug, Clone)]
pub struct LocalNonlinear {
    pub pair: MichaelisMentenEmax,
}

impl Criterion for LocalNonlinear {
    fn evaluate(&self, design: &Design) -> Result<Evaluation> {
        let t = t_value_nonlinear(design, &self.pair)?;
        let (a, c) = (t.minimizer[0], t.minimizer[1]);
        let pair = self.pair.clone();
        let cut: Cut = Arc::new(move |x| {
            let d = a * x / (c + x) - pair.emax(x);
            d * d
        });
        Ok(Evaluation {
            value: t.value,
            cuts: vec![ActiveCut { cut, level: t.value }],
        })
    }

    fn smooth(&self) -> bool {
        true
    }
}

/// Bayesian criterion `Σ π_a T(ξ, b_a)` of a linear pair.
#[derive(Debug, Clone)]
pub struct BayesLinear {
    pub pair: LinearModelPair,
    pub prior: Prior,
}

impl Criterion for BayesLinear {
    fn evaluate(&self, design: &Design) -> Result<Evaluation> {
        let mut value = 0.0;
        let mut parts: Vec<(f64, Cut)> = Vec::with_capacity(self.prior.atoms().len());
        for (b, mass) in self.prior.atoms() {
            let local = LocalLinear {
                pair: self.pair.clone(),
                b: b.clone(),
            };
            let t = t_value_linear(design, &self.pair, b)?;
            value += mass * t.value;
            parts.push((*mass, local.cut(t.minimizer)));
        }
        let cut: Cut = Arc::new(move |x| parts.iter().map(|(m, c)| m * c(x)).sum());
        Ok(Evaluation {
            value,
            cuts: vec![ActiveCut { cut, level: value }],
        })
    }

    fn smooth(&self) -> bool {
        true
    }
}

/// Standardized maximin criterion `min_j T_j(ξ)/R_j` over finitely many
/// local criteria with precomputed optimal values `R_j`.
pub struct Maximin {
    members: Vec<(Box<dyn Criterion>, f64)>,
    /// Members with efficiency within this relative window of the minimum
    /// contribute cuts.
    pub window: f64,
    /// At most this many members contribute cuts per evaluation.
    pub max_cuts: usize,
}

impl Maximin {
    pub fn new(members: Vec<(Box<dyn Criterion>, f64)>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidParameterSet("no candidates".into()));
        }
        if let Some((_, r)) = members.iter().find(|(_, r)| !(*r > 0.0) || !r.is_finite()) {
            return Err(Error::InvalidParameterSet(format!(
                "optimal value R = {r} must be positive"
            )));
        }
        Ok(Self {
            members,
            window: 0.1,
            max_cuts: 40,
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Efficiency of `design` for every member, in member order.
    pub fn efficiencies(&self, design: &Design) -> Result<Vec<f64>> {
        self.members
            .par_iter()
            .map(|(c, r)| Ok(c.evaluate(design)?.value / r))
            .collect()
    }
}

impl Criterion for Maximin {
    fn evaluate(&self, design: &Design) -> Result<Evaluation> {
        let evals: Vec<(Evaluation, f64)> = self
            .members
            .par_iter()
            .map(|(c, r)| Ok((c.evaluate(design)?, *r)))
            .collect::<Result<_>>()?;
        let mut scaled: Vec<(f64, &Evaluation, f64)> =
            evals.iter().map(|(e, r)| (e.value / r, e, *r)).collect();
        scaled.sort_by(|a, b| a.0.total_cmp(&b.0));
        let value = scaled[0].0;
        let bound = value * (1.0 + self.window) + f64::MIN_POSITIVE;
        let mut cuts = Vec::new();
        for (eff, e, r) in scaled.into_iter().take(self.max_cuts) {
            if eff > bound {
                break;
            }
            for c in &e.cuts {
                let inner = c.cut.clone();
                let cut: Cut = Arc::new(move |x| inner(x) / r);
                cuts.push(ActiveCut {
                    cut,
                    level: c.level / r,
                });
            }
        }
        Ok(Evaluation { value, cuts })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub candidate_grid_size: usize,
    pub max_outer_iterations: usize,
    pub weight_solver_tolerance: f64,
    pub support_merge_tolerance: f64,
    /// Stop when the relative gap between the global upper bound and the best
    /// criterion value falls below this.
    pub convergence: f64,
    pub prune_threshold: f64,
    pub initial_grid_size: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            candidate_grid_size: 401,
            max_outer_iterations: 200,
            weight_solver_tolerance: 1e-9,
            support_merge_tolerance: 1e-6,
            convergence: 1e-8,
            prune_threshold: 1e-7,
            initial_grid_size: 11,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.weight_solver_tolerance,
            self.support_merge_tolerance,
            self.convergence,
            self.prune_threshold,
        ];
        if self.candidate_grid_size < 11
            || self.max_outer_iterations == 0
            || self.initial_grid_size < 2
            || positive.iter().any(|v| !(*v > 0.0))
        {
            return Err(Error::InvalidArgument("invalid optimizer configuration".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub design: Design,
    pub value: f64,
    /// Global upper bound `max_x Σ λ_k c_k(x)` on the criterion.
    pub upper_bound: f64,
    /// `(upper_bound - value) / upper_bound`.
    pub gap: f64,
    pub iterations: usize,
    /// Best criterion value after each outer iteration.
    pub history: Vec<f64>,
    pub converged: bool,
}

/// Maximises `criterion` over designs on `interval`.
pub fn optimize(
    criterion: &dyn Criterion,
    interval: &DesignInterval,
    config: &OptimizerConfig,
) -> Result<OptimizationResult> {
    config.validate()?;
    let start = Design::uniform(interval.grid(config.initial_grid_size))?;
    let mut state = CuttingPlane::new(criterion, interval, config, start.support().to_vec())?;
    state.run(config.max_outer_iterations)?;

    // polish: prune, merge, and restart from the reduced support
    for _ in 0..2 {
        let merged = merge_clusters(
            &state.best.pruned(config.prune_threshold)?,
            config.support_merge_tolerance * interval.width(),
        )?;
        let polished = if criterion.smooth() {
            newton_polish(criterion, interval, &merged).unwrap_or(merged)
        } else {
            merged
        };
        state.offer(polished.clone())?;
        state.reset_support(polished.support().to_vec());
        state.run(config.max_outer_iterations / 4)?;
    }
    let design = merge_clusters(
        &state.best.pruned(config.prune_threshold)?,
        config.support_merge_tolerance * interval.width(),
    )?;
    let merged = merge_clusters(&design, 1e-3 * interval.width())?;
    let design = if criterion.smooth() {
        match newton_polish(criterion, interval, &merged) {
            Some(p) if criterion.evaluate(&p)?.value >= state.best_value * (1.0 - 1e-12) => p,
            _ => design,
        }
    } else if merged.len() < design.len()
        && criterion.evaluate(&merged)?.value >= state.best_value * (1.0 - 1e-7)
    {
        merged
    } else {
        design
    };
    let value = criterion.evaluate(&design)?.value;
    let upper = state.upper_bound.max(value);
    let gap = if upper > 0.0 { (upper - value) / upper } else { 0.0 };
    Ok(OptimizationResult {
        design,
        value,
        upper_bound: upper,
        gap,
        iterations: state.iterations,
        history: state.history,
        converged: gap <= config.convergence.max(1e-6),
    })
}

struct CuttingPlane<'a> {
    criterion: &'a dyn Criterion,
    interval: &'a DesignInterval,
    config: &'a OptimizerConfig,
    support: Vec<f64>,
    idle_points: Vec<usize>,
    cuts: Vec<Cut>,
    idle_cuts: Vec<usize>,
    best: Design,
    best_value: f64,
    upper_bound: f64,
    iterations: usize,
    history: Vec<f64>,
}

const IDLE_LIMIT: usize = 8;

impl<'a> CuttingPlane<'a> {
    fn new(
        criterion: &'a dyn Criterion,
        interval: &'a DesignInterval,
        config: &'a OptimizerConfig,
        support: Vec<f64>,
    ) -> Result<Self> {
        let start = Design::uniform(support.clone())?;
        let eval = criterion.evaluate(&start)?;
        let cuts: Vec<Cut> = eval.cuts.iter().map(|c| c.cut.clone()).collect();
        Ok(Self {
            criterion,
            interval,
            config,
            idle_points: vec![0; support.len()],
            support,
            idle_cuts: vec![0; cuts.len()],
            cuts,
            best: start,
            best_value: eval.value,
            upper_bound: f64::INFINITY,
            iterations: 0,
            history: vec![eval.value],
        })
    }

    fn offer(&mut self, design: Design) -> Result<()> {
        let eval = self.criterion.evaluate(&design)?;
        for c in eval.cuts {
            self.cuts.push(c.cut);
            self.idle_cuts.push(0);
        }
        if eval.value > self.best_value {
            self.best_value = eval.value;
            self.best = design;
        }
        Ok(())
    }

    fn reset_support(&mut self, support: Vec<f64>) {
        self.idle_points = vec![0; support.len()];
        self.support = support;
    }

    fn run(&mut self, iterations: usize) -> Result<()> {
        let grid = self.config.candidate_grid_size;
        for _ in 0..iterations {
            self.iterations += 1;
            let costs: Vec<Vec<f64>> = self
                .cuts
                .par_iter()
                .map(|c| self.support.iter().map(|&x| c(x)).collect())
                .collect();
            let (_, w, lambda) = maximin_weights(&costs)?;
            let (pts, ws): (Vec<f64>, Vec<f64>) = self
                .support
                .iter()
                .zip(&w)
                .filter(|(_, &w)| w > 0.0)
                .map(|(&x, &w)| (x, w))
                .unzip();
            let total: f64 = ws.iter().sum();
            let design = Design::new(pts, ws.iter().map(|v| v / total).collect())?;
            self.offer(design)?;

            let mixture: Vec<(f64, Cut)> = lambda
                .iter()
                .zip(&self.cuts)
                .filter(|(&l, _)| l > 0.0)
                .map(|(&l, c)| (l, c.clone()))
                .collect();
            let phi = |x: f64| mixture.iter().map(|(l, c)| l * c(x)).sum::<f64>();
            let (xs, ub) = scan_max(phi, self.interval.lower(), self.interval.upper(), grid);
            self.upper_bound = self.upper_bound.min(ub);
            self.history.push(self.best_value);

            for (i, &wi) in w.iter().enumerate() {
                self.idle_points[i] = if wi > 0.0 { 0 } else { self.idle_points[i] + 1 };
            }
            for (k, &l) in lambda.iter().enumerate() {
                self.idle_cuts[k] = if l > 0.0 { 0 } else { self.idle_cuts[k] + 1 };
            }
            self.drop_idle();

            let gap = if self.upper_bound > 0.0 {
                (self.upper_bound - self.best_value) / self.upper_bound
            } else {
                0.0
            };
            if gap <= self.config.convergence {
                break;
            }
            let tol = 1e-12 * self.interval.width();
            if self.support.iter().all(|&x| (x - xs).abs() > tol) {
                let pos = self.support.partition_point(|&x| x < xs);
                self.support.insert(pos, xs);
                self.idle_points.insert(pos, 0);
            }
        }
        Ok(())
    }

    fn drop_idle(&mut self) {
        let keep: Vec<bool> = self.idle_points.iter().map(|&n| n < IDLE_LIMIT).collect();
        if keep.iter().filter(|&&k| k).count() >= 2 {
            let mut i = 0;
            self.support.retain(|_| {
                i += 1;
                keep[i - 1]
            });
            self.idle_points.retain(|&n| n < IDLE_LIMIT);
        }
        let keep: Vec<bool> = self.idle_cuts.iter().map(|&n| n < IDLE_LIMIT).collect();
        if keep.iter().any(|&k| k) {
            let mut i = 0;
            self.cuts.retain(|_| {
                i += 1;
                keep[i - 1]
            });
            self.idle_cuts.retain(|&n| n < IDLE_LIMIT);
        }
    }
}

/// Merges support points closer than `tol` into their weighted mean.
pub fn merge_clusters(design: &Design, tol: f64) -> Result<Design> {
    let mut pts: Vec<f64> = Vec::new();
    let mut ws: Vec<f64> = Vec::new();
    for (x, w) in design.iter() {
        match (pts.last_mut(), ws.last_mut()) {
            (Some(p), Some(q)) if (x - *p).abs() <= tol => {
                *p = (*p * *q + x * w) / (*q + w);
                *q += w;
            }
            _ => {
                pts.push(x);
                ws.push(w);
            }
        }
    }
    Design::new(pts, ws)
}

/// Newton's method on the equivalence conditions of a smooth criterion with
/// fixed support size: `φ(x_i)` equal across the support, `φ'(x_j) = 0` at
/// interior points and `Σ ω = 1`, where `φ` is the single cut at the design.
fn newton_polish(criterion: &dyn Criterion, interval: &DesignInterval, start: &Design) -> Option<Design> {
    let n = start.len();
    if n < 2 {
        return None;
    }
    let width = interval.width();
    let edge = 1e-9 * width;
    let movable: Vec<usize> = (0..n)
        .filter(|&i| {
            let x = start.support()[i];
            x - interval.lower() > edge && interval.upper() - x > edge
        })
        .collect();
    let dim = n + movable.len();
    let pack = |d: &Design| -> DVector<f64> {
        let mut z = DVector::zeros(dim);
        for i in 0..n {
            z[i] = d.weights()[i];
        }
        for (k, &i) in movable.iter().enumerate() {
            z[n + k] = d.support()[i];
        }
        z
    };
    let unpack = |z: &DVector<f64>| -> Option<Design> {
        let mut pts = start.support().to_vec();
        for (k, &i) in movable.iter().enumerate() {
            pts[i] = z[n + k];
        }
        let ws: Vec<f64> = (0..n).map(|i| z[i]).collect();
        if ws.iter().any(|&w| !(w > 0.0)) || pts.iter().any(|&x| !interval.contains(x)) {
            return None;
        }
        if pts.windows(2).any(|p| p[1] - p[0] <= 1e-9 * width) {
            return None;
        }
        Design::from_raw(pts, ws).ok()
    };
    let h = 1e-6 * width;
    let residual = |z: &DVector<f64>| -> Option<DVector<f64>> {
        let d = unpack(z)?;
        let e = criterion.evaluate(&d).ok()?;
        if e.cuts.len() != 1 {
            return None;
        }
        let phi = &e.cuts[0].cut;
        let mut f = DVector::zeros(dim);
        f[0] = d.weights().iter().sum::<f64>() - 1.0;
        let p0 = phi(d.support()[0]);
        for i in 1..n {
            f[i] = phi(d.support()[i]) - p0;
        }
        for (k, &i) in movable.iter().enumerate() {
            let x = d.support()[i];
            f[n + k] = (phi(x + h) - phi(x - h)) / (2.0 * h);
        }
        Some(f)
    };
    let mut z = pack(start);
    let mut f = residual(&z)?;
    let scale = criterion.evaluate(start).ok()?.value.abs().max(f64::MIN_POSITIVE);
    for _ in 0..30 {
        let norm = f.amax();
        if norm <= 1e-14 * scale.max(1.0) {
            break;
        }
        let mut jac = DMatrix::zeros(dim, dim);
        for j in 0..dim {
            let step = 1e-7 * if j < n { 1.0 } else { width };
            let mut zp = z.clone();
            zp[j] += step;
            let fp = residual(&zp)?;
            jac.set_column(j, &((fp - &f) / step));
        }
        let delta = jac.lu().solve(&(-&f))?;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..20 {
            let zt = &z + t * &delta;
            if let Some(ft) = residual(&zt) {
                if ft.amax() < norm {
                    z = zt;
                    f = ft;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let d = unpack(&z)?;
    let total: f64 = d.weights().iter().sum();
    Design::new(d.support().to_vec(), d.weights().iter().map(|w| w / total).collect()).ok()
}

/// Relative equivalence gap `1 - Φ(ξ)/M`, where `M = min_λ max_x Σ λ_k c_k(x)`
/// over mixtures of the cuts active at `ξ`, on a grid refined by golden
/// section. `Φ(ξ)/M` is a lower bound on the efficiency of `ξ`; the gap is 0
/// exactly when the equivalence conditions hold.
pub fn equivalence_gap(
    design: &Design,
    criterion: &dyn Criterion,
    interval: &DesignInterval,
    grid_size: usize,
) -> Result<f64> {
    let eval = criterion.evaluate(design)?;
    let (m, _) = equivalence_bound(&eval, design, interval, grid_size)?;
    if m <= 0.0 {
        return Ok(0.0);
    }
    Ok(((m - eval.value) / m).max(0.0))
}

/// `(M, λ)` of [`equivalence_gap`], with `λ` over the active cuts.
pub(crate) fn equivalence_bound(
    eval: &Evaluation,
    design: &Design,
    interval: &DesignInterval,
    grid_size: usize,
) -> Result<(f64, Vec<f64>)> {
    let active = eval.active(1e-6);
    if active.is_empty() {
        return Err(Error::ConvergenceFailure("no active cut".into()));
    }
    let mut grid = interval.grid(grid_size);
    grid.extend_from_slice(design.support());
    grid.sort_by(f64::total_cmp);
    let costs: Vec<Vec<f64>> = active
        .par_iter()
        .map(|c| grid.iter().map(|&x| c(x)).collect())
        .collect();
    let (_, _, lambda) = maximin_weights(&costs)?;
    let phi = |x: f64| {
        lambda
            .iter()
            .zip(&active)
            .map(|(l, c)| l * c(x))
            .sum::<f64>()
    };
    let (_, m) = scan_max(phi, interval.lower(), interval.upper(), grid_size);
    Ok((m, lambda))
}

/// Locally optimal design for a linear pair at `b`.
pub fn optimize_local_linear(
    pair: &LinearModelPair,
    b: &ReducedParameter,
    interval: &DesignInterval,
    config: &OptimizerConfig,
) -> Result<OptimizationResult> {
    let criterion = LocalLinear {
        pair: pair.clone(),
        b: b.clone(),
    };
    let mut result = optimize(&criterion, interval, config)?;
    if interval.symmetric_half_width().is_some() && reflected_parameter(pair, b) == Some(b.clone()) {
        symmetrize(&criterion, interval, &mut result)?;
    }
    checked(result)
}

/// The parameter `b'` with `T(ξ(−·), b) = T(ξ, b')` for monomial pairs.
pub(crate) fn reflected_parameter(
    pair: &LinearModelPair,
    b: &ReducedParameter,
) -> Option<ReducedParameter> {
    if !pair.is_monomial() {
        return None;
    }
    let values = b
        .values()
        .iter()
        .enumerate()
        .map(|(j, &bj)| if (pair.m1() + j) % 2 == pair.m() % 2 { bj } else { -bj })
        .map(|v| if v == 0.0 { 0.0 } else { v })
        .collect();
    ReducedParameter::new(values).ok()
}

/// Replaces the design by the average with its reflection when that does not
/// lower the criterion; only valid for reflection-invariant criteria.
pub(crate) fn symmetrize(
    criterion: &dyn Criterion,
    interval: &DesignInterval,
    result: &mut OptimizationResult,
) -> Result<()> {
    let flipped = Design::new(
        result.design.support().iter().map(|x| -x).collect(),
        result.design.weights().to_vec(),
    )?;
    let sym = merge_clusters(&result.design.mix(&flipped, 0.5)?, 1e-9 * interval.width())?;
    let value = criterion.evaluate(&sym)?.value;
    if value >= result.value * (1.0 - 1e-12) {
        result.design = sym;
        result.value = value;
        result.upper_bound = result.upper_bound.max(value);
        result.gap = (result.upper_bound - value) / result.upper_bound;
    }
    Ok(())
}

/// Locally optimal design for the Michaelis–Menten / EMAX pair.
pub fn optimize_local_nonlinear(
    pair: &MichaelisMentenEmax,
    config: &OptimizerConfig,
) -> Result<OptimizationResult> {
    let criterion = LocalNonlinear { pair: pair.clone() };
    checked(optimize(&criterion, pair.interval(), config)?)
}

fn checked(result: OptimizationResult) -> Result<OptimizationResult> {
    if !(result.value > 0.0) {
        return Err(Error::ConvergenceFailure(
            "criterion is zero for every design found".into(),
        ));
    }
    if result.gap > 1e-4 {
        return Err(Error::IterationLimit(result.iterations));
    }
    Ok(result)
}

/// Box of EMAX parameters `(θ₂₀, θ₂₁, θ₂₂)` with a grid resolution per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaRegion {
    axes: [(f64, f64, usize); 3],
}

impl ThetaRegion {
    /// `axes[i] = (lo, hi, points)`; `lo == hi` marks a fixed axis.
    pub fn new(axes: [(f64, f64, usize); 3]) -> Result<Self> {
        for &(lo, hi, n) in &axes {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::InvalidParameterSet(format!("empty axis [{lo}, {hi}]")));
            }
            if lo < hi && n < 2 {
                return Err(Error::InvalidParameterSet(
                    "a free axis needs at least two grid points".into(),
                ));
            }
        }
        Ok(Self { axes })
    }

    /// Default resolution of 10 points per free axis.
    pub fn with_default_grid(bounds: [(f64, f64); 3]) -> Result<Self> {
        Self::new(bounds.map(|(lo, hi)| (lo, hi, 10)))
    }

    pub fn axes(&self) -> &[(f64, f64, usize); 3] {
        &self.axes
    }

    pub fn grid(&self) -> Vec<[f64; 3]> {
        let axis = |&(lo, hi, n): &(f64, f64, usize)| -> Vec<f64> {
            if lo == hi {
                vec![lo]
            } else {
                (0..n)
                    .map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
                    .collect()
            }
        };
        let (a, b, c) = (axis(&self.axes[0]), axis(&self.axes[1]), axis(&self.axes[2]));
        let mut out = Vec::with_capacity(a.len() * b.len() * c.len());
        for &x in &a {
            for &y in &b {
                for &z in &c {
                    out.push([x, y, z]);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaximinGeneralResult {
    pub result: OptimizationResult,
    pub candidates: Vec<[f64; 3]>,
    pub r_values: Vec<f64>,
    pub efficiencies: Vec<f64>,
}

/// Standardized maximin design for the Michaelis–Menten / EMAX pair over the
/// grid of `region`; `template` fixes the interval and the shift domain.
pub fn optimize_maximin_general(
    template: &MichaelisMentenEmax,
    region: &ThetaRegion,
    config: &OptimizerConfig,
) -> Result<MaximinGeneralResult> {
    let candidates = region.grid();
    let pairs: Vec<MichaelisMentenEmax> = candidates
        .iter()
        .map(|&t| template.with_theta2(t))
        .collect::<Result<_>>()?;
    let r_values: Vec<f64> = pairs
        .par_iter()
        .map(|p| Ok(r_value_nonlinear(p)?.value))
        .collect::<Result<_>>()?;
    let members: Vec<(Box<dyn Criterion>, f64)> = pairs
        .into_iter()
        .zip(&r_values)
        .map(|(pair, &r)| (Box::new(LocalNonlinear { pair }) as Box<dyn Criterion>, r))
        .collect();
    let criterion = Maximin::new(members)?;
    let result = optimize(&criterion, template.interval(), config)?;
    if !(result.value > 0.0) {
        return Err(Error::ConvergenceFailure("maximin value is zero".into()));
    }
    let efficiencies = criterion.efficiencies(&result.design)?;
    Ok(MaximinGeneralResult {
        result,
        candidates,
        r_values,
        efficiencies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> DesignInterval {
        DesignInterval::new(-1.0, 1.0).unwrap()
    }

    fn quad() -> LinearModelPair {
        LinearModelPair::polynomial(0, 2, &unit()).unwrap()
    }

    #[test]
    fn local_linear_three_point_design() {
        let res = optimize_local_linear(
            &quad(),
            &ReducedParameter::scalar(0.0),
            &unit(),
            &OptimizerConfig::default(),
        )
        .unwrap();
        let d = &res.design;
        assert_eq!(d.len(), 3, "{d:?}");
        for ((x, w), (ex, ew)) in d.iter().zip([(-1.0, 0.25), (0.0, 0.5), (1.0, 0.25)]) {
            assert!((x - ex).abs() < 1e-6 && (w - ew).abs() < 1e-6, "{d:?}");
        }
        assert!(res.history.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        assert!(res.gap <= 1e-6);
    }

    #[test]
    fn gap_detects_suboptimal_designs() {
        let c = LocalLinear {
            pair: quad(),
            b: ReducedParameter::scalar(0.0),
        };
        let two = Design::new(vec![-1.0, 1.0], vec![0.5, 0.5]).unwrap();
        assert!(equivalence_gap(&two, &c, &unit(), 2001).unwrap() > 0.5);
        let three = Design::new(vec![-1.0, 0.0, 1.0], vec![0.25, 0.5, 0.25]).unwrap();
        assert!(equivalence_gap(&three, &c, &unit(), 2001).unwrap() < 1e-12);
        let pm = Design::point_mass(0.2);
        assert!(equivalence_gap(&pm, &c, &unit(), 2001).unwrap() > 0.9);
    }

    #[test]
    fn region_grid() {
        let r = ThetaRegion::new([(-1.1, -0.2, 10), (1.0, 1.0, 1), (2.0, 6.0, 17)]).unwrap();
        let g = r.grid();
        assert_eq!(g.len(), 170);
        assert_eq!(g[0], [-1.1, 1.0, 2.0]);
        assert_eq!(g[169], [-0.2, 1.0, 6.0]);
        assert!(ThetaRegion::new([(1.0, 0.0, 3), (1.0, 1.0, 1), (2.0, 6.0, 17)]).is_err());
    }

    #[test]
    fn config_validation() {
        let mut c = OptimizerConfig::default();
        assert!(c.validate().is_ok());
        c.candidate_grid_size = 5;
        assert!(c.validate().is_err());
    }
}
