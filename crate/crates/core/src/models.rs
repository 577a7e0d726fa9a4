//! Competing regression families.
//!
//! [`LinearModelPair`] covers nested linear models `η₁ = Σ_{i<m₁} θ₁ᵢ fᵢ` and
//! `η₂ = Σ_{i<m₂} θ₂ᵢ fᵢ`. [`MichaelisMentenEmax`] is the Michaelis–Menten
//! family against a fixed EMAX model.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::design::{DesignInterval, ReducedParameter};
use crate::error::{Error, Result};

type BasisFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A regression function, optionally tagged as the monomial `x^k`.
#[derive(Clone)]
pub struct BasisFunction {
    eval: BasisFn,
    monomial_degree: Option<usize>,
}

impl BasisFunction {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            eval: Arc::new(f),
            monomial_degree: None,
        }
    }

    pub fn monomial(degree: usize) -> Self {
        let k = degree as i32;
        Self {
            eval: Arc::new(move |x: f64| x.powi(k)),
            monomial_degree: Some(degree),
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    pub fn monomial_degree(&self) -> Option<usize> {
        self.monomial_degree
    }
}

impl fmt::Debug for BasisFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.monomial_degree {
            Some(k) => write!(f, "x^{k}"),
            None => f.write_str("<fn>"),
        }
    }
}

/// Nested linear pair with basis `f_0, …, f_m` (`m₂ = m + 1` functions),
/// smaller model spanned by the first `m₁`.
#[derive(Debug, Clone)]
pub struct LinearModelPair {
    basis: Vec<BasisFunction>,
    m1: usize,
}

impl LinearModelPair {
    pub fn new(basis: Vec<BasisFunction>, m1: usize, interval: &DesignInterval) -> Result<Self> {
        let m2 = basis.len();
        if m1 < 1 || m2 <= m1 {
            return Err(Error::InvalidModel(format!(
                "need m2 > m1 >= 1, got m1 = {m1}, m2 = {m2}"
            )));
        }
        let pair = Self { basis, m1 };
        let cond = pair.gram_condition(interval);
        if !(cond < 1e12) {
            return Err(Error::InvalidModel(format!(
                "basis is numerically dependent on the interval (Gram condition {cond:e})"
            )));
        }
        Ok(pair)
    }

    /// Monomials `1, x, …, x^large`; the smaller model has degree `small`.
    pub fn polynomial(small: usize, large: usize, interval: &DesignInterval) -> Result<Self> {
        if large <= small {
            return Err(Error::InvalidModel(format!(
                "degree {large} must exceed degree {small}"
            )));
        }
        let basis = (0..=large).map(BasisFunction::monomial).collect();
        Self::new(basis, small + 1, interval)
    }

    fn gram_condition(&self, interval: &DesignInterval) -> f64 {
        let grid = interval.grid(201);
        let n = self.basis.len();
        let mut g = DMatrix::<f64>::zeros(n, n);
        for &x in &grid {
            let f = self.eval(x);
            for i in 0..n {
                for j in 0..n {
                    g[(i, j)] += f[i] * f[j];
                }
            }
        }
        let sv = g.singular_values();
        let max = sv.max();
        let min = sv.min();
        if min <= 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }

    pub fn m1(&self) -> usize {
        self.m1
    }

    pub fn m2(&self) -> usize {
        self.basis.len()
    }

    /// Highest basis index `m = m₂ - 1`.
    pub fn m(&self) -> usize {
        self.basis.len() - 1
    }

    /// `s = m₂ - m₁`.
    pub fn s(&self) -> usize {
        self.basis.len() - self.m1
    }

    pub fn basis(&self) -> &[BasisFunction] {
        &self.basis
    }

    /// `f(x) = (f_0(x), …, f_m(x))`.
    pub fn eval(&self, x: f64) -> Vec<f64> {
        self.basis.iter().map(|f| f.eval(x)).collect()
    }

    /// `f_(1)(x)`, the smaller model's regressors.
    pub fn eval_small(&self, x: f64) -> Vec<f64> {
        self.basis[..self.m1].iter().map(|f| f.eval(x)).collect()
    }

    /// `f_(2)(x)`, the `s` extra regressors.
    pub fn eval_extra(&self, x: f64) -> Vec<f64> {
        self.basis[self.m1..].iter().map(|f| f.eval(x)).collect()
    }

    /// All basis functions are monomials `x^0, …, x^m` in order.
    pub fn is_monomial(&self) -> bool {
        self.basis
            .iter()
            .enumerate()
            .all(|(k, f)| f.monomial_degree == Some(k))
    }

    fn check_reduced(&self, b: &ReducedParameter) -> Result<()> {
        if b.len() + 1 != self.s() {
            return Err(Error::InvalidArgument(format!(
                "reduced parameter has length {}, expected s - 1 = {}",
                b.len(),
                self.s() - 1
            )));
        }
        Ok(())
    }

    /// `(bᵀ, 1) f_(2)(x)`, the part of η₂ the smaller model cannot represent.
    pub fn extra_part(&self, b: &ReducedParameter, x: f64) -> Result<f64> {
        self.check_reduced(b)?;
        let v = b.extended();
        Ok(self.basis[self.m1..]
            .iter()
            .zip(&v)
            .map(|(f, c)| c * f.eval(x))
            .sum())
    }

    /// `η₁(x, θ₁) - η₂(x, θ₂)`.
    pub fn difference(&self, theta1: &[f64], theta2: &[f64], x: f64) -> Result<f64> {
        if theta1.len() != self.m1 || theta2.len() != self.m2() {
            return Err(Error::InvalidArgument(format!(
                "expected θ₁ of length {} and θ₂ of length {}",
                self.m1,
                self.m2()
            )));
        }
        let f = self.eval(x);
        let eta1: f64 = theta1.iter().zip(&f).map(|(t, v)| t * v).sum();
        let eta2: f64 = theta2.iter().zip(&f).map(|(t, v)| t * v).sum();
        Ok(eta1 - eta2)
    }

    /// The reduced difference `Σ q_i f_i(x) - (b_1 f_{m-s+1} + … + f_m)(x) θ_{2,m}`.
    pub fn reduced_difference(
        &self,
        q: &[f64],
        b: &ReducedParameter,
        theta2m: f64,
        x: f64,
    ) -> Result<f64> {
        if q.len() != self.m1 {
            return Err(Error::InvalidArgument(format!("q must have length {}", self.m1)));
        }
        let small: f64 = self.basis[..self.m1]
            .iter()
            .zip(q)
            .map(|(f, c)| c * f.eval(x))
            .sum();
        Ok(small - self.extra_part(b, x)? * theta2m)
    }
}

/// One connected piece of the admissible set for the Michaelis–Menten shift
/// `θ₁₂`, parametrised by its distance `s` from a pole: `θ₁₂ = pole + direction·s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftPiece {
    pub pole: f64,
    pub direction: f64,
    pub min_distance: f64,
    pub max_distance: f64,
}

impl ShiftPiece {
    pub fn at(&self, s: f64) -> f64 {
        self.pole + self.direction * s
    }

    /// Distance-from-pole coordinate of a shift value inside the piece.
    pub fn distance(&self, shift: f64) -> f64 {
        (shift - self.pole) * self.direction
    }

    /// `n` log-spaced distances from `min_distance` to `max_distance`.
    pub fn lattice(&self, n: usize) -> Vec<f64> {
        let (a, b) = (self.min_distance.ln(), self.max_distance.ln());
        (0..n)
            .map(|i| (a + (b - a) * i as f64 / (n - 1).max(1) as f64).exp())
            .collect()
    }
}

/// Admissible values of `θ₁₂`, kept away from `-x` for every design point.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftDomain {
    pieces: Vec<ShiftPiece>,
}

impl ShiftDomain {
    /// Both half-lines left of `-upper` and right of `-lower`, from `1e-8·w`
    /// to `1e4·w` away from the pole (`w` the interval width).
    pub fn pole_free(interval: &DesignInterval) -> Self {
        let w = interval.width();
        let (near, far) = (1e-8 * w, 1e4 * w.max(1.0));
        Self {
            pieces: vec![
                ShiftPiece {
                    pole: -interval.lower(),
                    direction: 1.0,
                    min_distance: near,
                    max_distance: far,
                },
                ShiftPiece {
                    pole: -interval.upper(),
                    direction: -1.0,
                    min_distance: near,
                    max_distance: far,
                },
            ],
        }
    }

    /// A single box `[lo, hi]` for `θ₁₂`, which must not meet `[-upper, -lower]`.
    pub fn bounded(lo: f64, hi: f64, interval: &DesignInterval) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidModel(format!("invalid shift box [{lo}, {hi}]")));
        }
        let right_pole = -interval.lower();
        let left_pole = -interval.upper();
        let piece = if lo > right_pole {
            ShiftPiece {
                pole: right_pole,
                direction: 1.0,
                min_distance: lo - right_pole,
                max_distance: hi - right_pole,
            }
        } else if hi < left_pole {
            ShiftPiece {
                pole: left_pole,
                direction: -1.0,
                min_distance: left_pole - hi,
                max_distance: left_pole - lo,
            }
        } else {
            return Err(Error::InvalidModel(format!(
                "shift box [{lo}, {hi}] meets the poles [{left_pole}, {right_pole}]"
            )));
        };
        Ok(Self { pieces: vec![piece] })
    }

    pub fn pieces(&self) -> &[ShiftPiece] {
        &self.pieces
    }
}

/// Michaelis–Menten `θ₁₁ x / (θ₁₂ + x)` against EMAX `θ₂₀ + θ₂₁ x / (θ₂₂ + x)`
/// with `θ₂` fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct MichaelisMentenEmax {
    theta2: [f64; 3],
    interval: DesignInterval,
    shift_domain: ShiftDomain,
}

impl MichaelisMentenEmax {
    pub fn new(theta2: [f64; 3], interval: DesignInterval) -> Result<Self> {
        let domain = ShiftDomain::pole_free(&interval);
        Self::with_shift_domain(theta2, interval, domain)
    }

    pub fn with_shift_domain(
        theta2: [f64; 3],
        interval: DesignInterval,
        shift_domain: ShiftDomain,
    ) -> Result<Self> {
        if theta2.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidModel("θ₂ must be finite".into()));
        }
        if interval.contains(-theta2[2]) {
            return Err(Error::InvalidModel(format!(
                "EMAX denominator θ₂₂ + x vanishes at x = {}",
                -theta2[2]
            )));
        }
        for p in shift_domain.pieces() {
            let (a, b) = (p.at(p.min_distance), p.at(p.max_distance));
            if interval.contains(-a) || interval.contains(-b) || p.min_distance <= 0.0 {
                return Err(Error::InvalidModel("shift domain touches a pole".into()));
            }
        }
        Ok(Self {
            theta2,
            interval,
            shift_domain,
        })
    }

    pub fn theta2(&self) -> [f64; 3] {
        self.theta2
    }

    pub fn interval(&self) -> &DesignInterval {
        &self.interval
    }

    pub fn shift_domain(&self) -> &ShiftDomain {
        &self.shift_domain
    }

    /// Same family and domain with a different EMAX parameter.
    pub fn with_theta2(&self, theta2: [f64; 3]) -> Result<Self> {
        Self::with_shift_domain(theta2, self.interval, self.shift_domain.clone())
    }

    #[inline]
    pub fn emax(&self, x: f64) -> f64 {
        let [t0, t1, t2] = self.theta2;
        t0 + t1 * x / (t2 + x)
    }

    pub fn michaelis_menten(theta1: [f64; 2], x: f64) -> Result<f64> {
        let den = theta1[1] + x;
        if den == 0.0 {
            return Err(Error::Domain(format!("θ₁₂ + x = 0 at x = {x}")));
        }
        Ok(theta1[0] * x / den)
    }

    /// `η₁(x, θ₁) - η₂(x, θ₂)`.
    pub fn difference(&self, theta1: [f64; 2], x: f64) -> Result<f64> {
        if self.theta2[2] + x == 0.0 {
            return Err(Error::Domain(format!("θ₂₂ + x = 0 at x = {x}")));
        }
        Ok(Self::michaelis_menten(theta1, x)? - self.emax(x))
    }
}

/// Either kind of model pair, for operations defined on both.
#[derive(Debug, Clone)]
pub enum ModelPair {
    Linear(LinearModelPair),
    Nonlinear(MichaelisMentenEmax),
}

/// `η₁(x, θ₁) - η₂(x, θ₂)`. For the nonlinear pair `θ₂` must match the
/// parameter fixed in the pair.
pub fn model_difference(pair: &ModelPair, theta1: &[f64], theta2: &[f64], x: f64) -> Result<f64> {
    match pair {
        ModelPair::Linear(p) => p.difference(theta1, theta2, x),
        ModelPair::Nonlinear(p) => {
            if theta1.len() != 2 || theta2.len() != 3 {
                return Err(Error::InvalidArgument(
                    "Michaelis–Menten takes 2 parameters and EMAX 3".into(),
                ));
            }
            let p = if theta2 == p.theta2() {
                p.clone()
            } else {
                p.with_theta2([theta2[0], theta2[1], theta2[2]])?
            };
            p.difference([theta1[0], theta1[1]], x)
        }
    }
}
