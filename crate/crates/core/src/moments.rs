//! Information matrices and the Schur complement `M_(s) = M22 - Xᵀ M11 X`.

use nalgebra::{DMatrix, DVector};

use crate::design::{Design, ReducedParameter};
use crate::error::{Error, Result};
use crate::models::LinearModelPair;

/// Relative singular-value cutoff for the rank decision in `M11 X = M12`.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// Moment matrix `M(ξ) = ∫ f fᵀ dξ` split after the first `m₁` rows/columns.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoMatrix {
    m: DMatrix<f64>,
    m1: usize,
}

impl InfoMatrix {
    /// Wraps a symmetric PSD matrix; `m1` is the size of the upper-left block.
    pub fn new(m: DMatrix<f64>, m1: usize) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n || m1 == 0 || m1 >= n {
            return Err(Error::InvalidArgument(format!(
                "need a square matrix with 0 < m1 < {n}"
            )));
        }
        let scale = m.amax().max(1.0);
        if (&m - m.transpose()).amax() > 1e-12 * scale {
            return Err(Error::InvalidArgument("information matrix is not symmetric".into()));
        }
        let min_eig = m.clone().symmetric_eigenvalues().min();
        if min_eig < -1e-10 * m.trace().abs().max(f64::MIN_POSITIVE) {
            return Err(Error::InvalidArgument(format!(
                "information matrix is not positive semidefinite (eigenvalue {min_eig:e})"
            )));
        }
        Ok(Self { m, m1 })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn m1(&self) -> usize {
        self.m1
    }

    pub fn s(&self) -> usize {
        self.m.nrows() - self.m1
    }

    pub fn m11(&self) -> DMatrix<f64> {
        self.m.view((0, 0), (self.m1, self.m1)).into_owned()
    }

    pub fn m12(&self) -> DMatrix<f64> {
        self.m.view((0, self.m1), (self.m1, self.s())).into_owned()
    }

    pub fn m22(&self) -> DMatrix<f64> {
        let s = self.s();
        self.m.view((self.m1, self.m1), (s, s)).into_owned()
    }
}

/// `M(ξ)` for the basis of `pair`.
pub fn info_matrix(design: &Design, pair: &LinearModelPair) -> InfoMatrix {
    let n = pair.m2();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for (x, w) in design.iter() {
        let f = pair.eval(x);
        for i in 0..n {
            for j in i..n {
                m[(i, j)] += w * f[i] * f[j];
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            m[(i, j)] = m[(j, i)];
        }
    }
    InfoMatrix { m, m1: pair.m1() }
}

/// Schur complement of `M11` in `M(ξ)`, with the minimum-norm `X`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchurBlock {
    ms: DMatrix<f64>,
    x: DMatrix<f64>,
    defined: bool,
}

impl SchurBlock {
    pub fn is_defined(&self) -> bool {
        self.defined
    }

    /// `M_(s)`, or [`Error::UndefinedSchur`].
    pub fn ms(&self) -> Result<&DMatrix<f64>> {
        if self.defined {
            Ok(&self.ms)
        } else {
            Err(Error::UndefinedSchur)
        }
    }

    /// The solution `X` of `M11 X = M12`.
    pub fn x(&self) -> Result<&DMatrix<f64>> {
        if self.defined {
            Ok(&self.x)
        } else {
            Err(Error::UndefinedSchur)
        }
    }

    /// Errors with [`Error::InconsistentSystem`] when undefined.
    pub fn require(&self) -> Result<&Self> {
        if self.defined {
            Ok(self)
        } else {
            Err(Error::InconsistentSystem)
        }
    }

    /// Coefficients `q = X (bᵀ, 1)ᵀ` of the best approximation by the smaller model.
    pub fn best_fit(&self, b: &ReducedParameter) -> Result<Vec<f64>> {
        let v = extended_vector(b, self.ms.nrows())?;
        Ok((self.x()? * v).iter().copied().collect())
    }
}

fn extended_vector(b: &ReducedParameter, s: usize) -> Result<DVector<f64>> {
    if b.len() + 1 != s {
        return Err(Error::InvalidArgument(format!(
            "reduced parameter has length {}, expected {}",
            b.len(),
            s - 1
        )));
    }
    Ok(DVector::from_vec(b.extended()))
}

/// Solves `M11 X = M12` by SVD with relative cutoff [`RANK_TOLERANCE`]; the
/// block is undefined when the residual exceeds `1e-9 (1 + ‖M12‖_max)`.
pub fn schur_complement(info: &InfoMatrix) -> SchurBlock {
    let m11 = info.m11();
    let m12 = info.m12();
    let m22 = info.m22();
    let svd = m11.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let x = if smax > 0.0 {
        svd.solve(&m12, RANK_TOLERANCE * smax)
            .unwrap_or_else(|_| DMatrix::zeros(m11.ncols(), m12.ncols()))
    } else {
        DMatrix::zeros(m11.ncols(), m12.ncols())
    };
    let residual = (&m11 * &x - &m12).amax();
    let defined = residual <= 1e-9 * (1.0 + m12.amax());
    let ms = &m22 - x.transpose() * &m11 * &x;
    let ms = 0.5 * (&ms + ms.transpose());
    SchurBlock { ms, x, defined }
}

/// `(bᵀ, 1) M_(s) (bᵀ, 1)ᵀ`.
pub fn schur_quadratic_form(block: &SchurBlock, b: &ReducedParameter) -> Result<f64> {
    let ms = block.ms()?;
    let v = extended_vector(b, ms.nrows())?;
    Ok((v.transpose() * ms * &v)[(0, 0)])
}

/// `tr(L M_(s))`.
pub fn schur_trace_form(block: &SchurBlock, l: &DMatrix<f64>) -> Result<f64> {
    let ms = block.ms()?;
    if l.shape() != ms.shape() {
        return Err(Error::InvalidArgument("L and M_(s) differ in shape".into()));
    }
    Ok(l.component_mul(ms).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::DesignInterval;

    fn quad() -> LinearModelPair {
        LinearModelPair::polynomial(0, 2, &DesignInterval::new(-1.0, 1.0).unwrap()).unwrap()
    }

    fn close(a: &DMatrix<f64>, b: &[f64]) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-14)
    }

    #[test]
    fn moments_of_symmetric_designs() {
        let d = Design::new(vec![-1.0, 1.0], vec![0.5, 0.5]).unwrap();
        let m = info_matrix(&d, &quad());
        assert!(close(m.matrix(), &[1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0]));

        let d = Design::new(vec![-1.0, 0.0, 1.0], vec![0.25, 0.5, 0.25]).unwrap();
        let m = info_matrix(&d, &quad());
        assert_eq!(m.matrix()[(0, 2)], 0.5);
        assert_eq!(m.matrix()[(2, 2)], 0.5);

        let m = info_matrix(&Design::point_mass(0.0), &quad());
        assert_eq!(m.matrix()[(0, 0)], 1.0);
        assert_eq!(m.matrix().sum(), 1.0);
    }

    #[test]
    fn schur_of_three_point_design() {
        let d = Design::new(vec![-1.0, 0.0, 1.0], vec![0.25, 0.5, 0.25]).unwrap();
        let s = schur_complement(&info_matrix(&d, &quad()));
        assert!(s.is_defined());
        assert!(close(s.ms().unwrap(), &[0.5, 0.0, 0.0, 0.25]));
        let q0 = schur_quadratic_form(&s, &ReducedParameter::scalar(0.0)).unwrap();
        let q1 = schur_quadratic_form(&s, &ReducedParameter::scalar(1.0)).unwrap();
        assert!((q0 - 0.25).abs() < 1e-15);
        assert!((q1 - 0.75).abs() < 1e-15);
    }

    #[test]
    fn schur_of_degenerate_designs() {
        let s = schur_complement(&info_matrix(&Design::point_mass(0.0), &quad()));
        assert!(close(s.ms().unwrap(), &[0.0; 4]));
        assert_eq!(schur_quadratic_form(&s, &ReducedParameter::scalar(3.0)).unwrap(), 0.0);

        let d = Design::new(vec![-1.0, 1.0], vec![0.5, 0.5]).unwrap();
        let s = schur_complement(&info_matrix(&d, &quad()));
        assert!(close(s.ms().unwrap(), &[1.0, 0.0, 0.0, 0.0]));
    }

    #[test]
    fn info_matrix_rejects_indefinite_input() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(InfoMatrix::new(m, 1).is_err());
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(InfoMatrix::new(m, 1).is_err());
    }

    #[test]
    fn inconsistent_system_is_undefined() {
        // M11 singular with M12 outside its range: not a moment matrix, but it
        // exercises the consistency branch
        let m = DMatrix::from_row_slice(
            3,
            3,
            &[0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 2.0],
        );
        let info = InfoMatrix { m, m1: 1 };
        let s = schur_complement(&info);
        assert!(!s.is_defined());
        assert_eq!(s.require().unwrap_err(), Error::InconsistentSystem);
        assert_eq!(
            schur_quadratic_form(&s, &ReducedParameter::scalar(0.0)).unwrap_err(),
            Error::UndefinedSchur
        );
    }
}
