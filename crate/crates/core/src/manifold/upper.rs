use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::manifold::{ManifoldKind, TangentVector};
use crate::Scalar;

/// Square matrix whose strictly-lower entries are exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct UpperTriangular<T: Scalar> {
    matrix: DMatrix<T>,
}

impl<T: Scalar> UpperTriangular<T> {
    /// Rejects any matrix with a nonzero strictly-lower entry.
    pub fn new(matrix: DMatrix<T>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Dimension(format!(
                "upper-triangular factor must be square, got {:?}",
                matrix.shape()
            )));
        }
        for j in 0..matrix.ncols() {
            for i in (j + 1)..matrix.nrows() {
                if matrix[(i, j)] != T::zero() {
                    return Err(Error::Infeasible(format!(
                        "entry ({i}, {j}) below the diagonal is nonzero"
                    )));
                }
            }
        }
        Ok(Self { matrix })
    }

    pub fn identity(k: usize) -> Self {
        Self {
            matrix: DMatrix::identity(k, k),
        }
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.matrix
    }

    pub fn order(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn tangent(&self, direction: &UpperTriangular<T>) -> Result<TangentVector<T>> {
        TangentVector::new(
            ManifoldKind::UpperTriangular,
            self.matrix.clone(),
            direction.matrix.clone(),
        )
    }

    /// Linear-space exponential: `S + V` with the strictly-lower part of `V` dropped.
    pub fn exp(&self, v: &TangentVector<T>) -> Result<Self> {
        if v.kind() != ManifoldKind::UpperTriangular {
            return Err(Error::InvalidTangent(format!(
                "{:?} tangent passed to the upper-triangular update",
                v.kind()
            )));
        }
        if !v.is_based_at(&self.matrix) {
            return Err(Error::StaleGradient);
        }
        Ok(upper_project(&(&self.matrix + v.ambient())))
    }

    /// `‖S⁻¹‖`-free conditioning proxy: smallest absolute diagonal entry.
    pub fn min_abs_diagonal(&self) -> T {
        self.matrix
            .diagonal()
            .iter()
            .fold(T::max_value().unwrap_or_else(T::one), |acc, &v| acc.min(v.abs()))
    }
}

/// Copy of `g` with the strictly-lower entries zeroed.
pub fn upper_project<T: Scalar>(g: &DMatrix<T>) -> UpperTriangular<T> {
    let mut m = g.clone();
    for j in 0..m.ncols() {
        for i in (j + 1)..m.nrows() {
            m[(i, j)] = T::zero();
        }
    }
    UpperTriangular { matrix: m }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_keeps_upper_part() {
        let ones = DMatrix::<f64>::from_element(3, 3, 1.0);
        let u = upper_project(&ones);
        assert_eq!(u.matrix().iter().filter(|&&v| v != 0.0).count(), 6);
        assert_eq!(upper_project(u.matrix()), u);

        let g = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0]);
        let p = upper_project(&g);
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i > j { 0.0 } else { g[(i, j)] };
                assert_eq!(p.matrix()[(i, j)], expected);
            }
        }
    }

    #[test]
    fn rejects_lower_entries() {
        let mut m = DMatrix::<f64>::identity(2, 2);
        m[(1, 0)] = 1e-300;
        assert!(UpperTriangular::new(m).is_err());
    }

    #[test]
    fn exp_is_addition() {
        let s = UpperTriangular::<f64>::identity(2);
        let d = upper_project(&DMatrix::from_row_slice(2, 2, &[0.5, 1.0, 3.0, -0.5]));
        let next = s.exp(&s.tangent(&d).unwrap()).unwrap();
        assert_eq!(next.matrix(), &DMatrix::from_row_slice(2, 2, &[1.5, 1.0, 0.0, 0.5]));
    }
}
