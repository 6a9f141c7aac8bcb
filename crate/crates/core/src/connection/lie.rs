//! Matrix Lie groups acting linearly on ℝⁿ.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixGroup {
    So2,
    So3,
}

impl MatrixGroup {
    /// Size of the matrices, which is also the carrier dimension.
    pub fn n(&self) -> usize {
        match self {
            MatrixGroup::So2 => 2,
            MatrixGroup::So3 => 3,
        }
    }

    pub fn dim(&self) -> usize {
        self.basis().len()
    }

    /// SO(2): J = [[0,-1],[1,0]]. SO(3): (L_i)_jk = -ε_ijk.
    pub fn basis(&self) -> Vec<Mat> {
        match self {
            MatrixGroup::So2 => vec![rotation_generator()],
            MatrixGroup::So3 => (0..3).map(so3_generator).collect(),
        }
    }

    pub fn basis_names(&self) -> Vec<&'static str> {
        match self {
            MatrixGroup::So2 => vec!["J"],
            MatrixGroup::So3 => vec!["Lx", "Ly", "Lz"],
        }
    }

    pub fn generator(&self, name: &str) -> Option<Mat> {
        let idx = self.basis_names().iter().position(|n| *n == name)?;
        Some(self.basis().swap_remove(idx))
    }

    pub fn identity(&self) -> Mat {
        Mat::identity(self.n(), self.n())
    }

    /// Σ cᴬ t_A.
    pub fn hat(&self, coeffs: &[f64]) -> Mat {
        let mut x = Mat::zeros(self.n(), self.n());
        for (c, t) in coeffs.iter().zip(self.basis()) {
            x += t * *c;
        }
        x
    }

    /// Coordinates in the basis; the basis is Frobenius-orthogonal.
    pub fn coords(&self, x: &Mat) -> Vector {
        Vector::from_iterator(
            self.dim(),
            self.basis().iter().map(|t| x.dot(t) / t.dot(t)),
        )
    }

    /// Euclidean norm of the basis coordinates.
    pub fn norm(&self, x: &Mat) -> f64 {
        self.coords(x).norm()
    }

    /// Distance of `x` from the span of the basis.
    pub fn off_algebra(&self, x: &Mat) -> f64 {
        (x - self.hat(self.coords(x).as_slice())).norm()
    }

    /// f_AB^C with [t_A, t_B] = f_AB^C t_C.
    pub fn structure_constants(&self) -> Vec<Vec<Vector>> {
        let b = self.basis();
        b.iter()
            .map(|x| b.iter().map(|y| self.coords(&commutator(x, y))).collect())
            .collect()
    }
}

pub fn rotation_generator() -> Mat {
    Mat::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0])
}

pub fn so3_generator(i: usize) -> Mat {
    let mut l = Mat::zeros(3, 3);
    for j in 0..3 {
        for k in 0..3 {
            l[(j, k)] = -levi_civita(i, j, k);
        }
    }
    l
}

fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

pub fn commutator(x: &Mat, y: &Mat) -> Mat {
    x * y - y * x
}

/// Matrix exponential (scaling and squaring with Padé approximants).
pub fn expm(x: &Mat) -> Mat {
    x.exp()
}

pub fn rotation(theta: f64) -> Mat {
    let (s, c) = theta.sin_cos();
    Mat::from_row_slice(2, 2, &[c, -s, s, c])
}

pub fn inverse(x: &Mat) -> Mat {
    x.clone().try_inverse().expect("group elements are invertible")
}

/// Ad_g X = g X g⁻¹.
pub fn adjoint(g: &Mat, x: &Mat) -> Mat {
    g * x * inverse(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn so3_brackets() {
        let g = MatrixGroup::So3;
        let [lx, ly, lz]: [Mat; 3] = g.basis().try_into().unwrap();
        assert!((commutator(&lx, &ly) - &lz).norm() < 1e-15);
        assert!((commutator(&ly, &lz) - &lx).norm() < 1e-15);
        assert_eq!(lz, Mat::from_row_slice(3, 3, &[0., -1., 0., 1., 0., 0., 0., 0., 0.]));
        let f = g.structure_constants();
        assert_eq!(f[0][1].as_slice(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn exp_of_generators() {
        let j = rotation_generator();
        assert!((expm(&(&j * 0.7)) - rotation(0.7)).norm() < 1e-14);
        let lz = so3_generator(2);
        let r = expm(&(&lz * 0.3));
        assert!((r.view((0, 0), (2, 2)) - rotation(0.3)).norm() < 1e-14);
        assert!((r[(2, 2)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn coords_round_trip() {
        let g = MatrixGroup::So3;
        let x = g.hat(&[0.3, -1.2, 2.0]);
        assert_eq!(g.coords(&x).as_slice(), &[0.3, -1.2, 2.0]);
        assert!(g.off_algebra(&x) < 1e-15);
        assert!((g.norm(&g.basis()[2]) - 1.0).abs() < 1e-15);
    }
}
