//! Scalar arithmetic over K in {R, C, H} and realification of matrices.
//!
//! Vectors over K are stored as flat real coordinate slices (dim_r(K) reals
//! per K-entry). The horospherical bracket on K^{n-1} is
//! [x, y] = 2 Im <x, y> = 2 Im (sum_j x_j conj(y_j)), valued in Im K.

use nalgebra::DMatrix;
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KField {
    Real,
    Complex,
    Quaternion,
}

impl KField {
    /// Real dimension of one K-scalar.
    pub fn dim(self) -> usize {
        match self {
            KField::Real => 1,
            KField::Complex => 2,
            KField::Quaternion => 4,
        }
    }

    /// Real dimension of Im K.
    pub fn im_dim(self) -> usize {
        self.dim() - 1
    }
}

/// Quaternion q = w + xi + yj + zk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    pub fn conj(self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn mul(self, o: Self) -> Self {
        Self::new(
            self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        )
    }

    /// 2x2 complex block [[w + xi, y + zi], [-(y - zi), w - xi]].
    pub fn complex_block(self) -> [[Complex64; 2]; 2] {
        let a = Complex64::new(self.w, self.x);
        let b = Complex64::new(self.y, self.z);
        [[a, b], [-b.conj(), a.conj()]]
    }
}

/// 2 Im <x, y> for x, y in K^m given as flat real coordinates; the result is
/// the Im K coordinate vector (empty for K = R).
pub fn im_bracket(field: KField, x: &[f64], y: &[f64]) -> Vec<f64> {
    let d = field.dim();
    assert_eq!(x.len() % d, 0);
    assert_eq!(x.len(), y.len());
    match field {
        KField::Real => vec![],
        KField::Complex => {
            // Im(x conj(y)) per entry, summed.
            let mut im = 0.0;
            for j in (0..x.len()).step_by(2) {
                let (xr, xi) = (x[j], x[j + 1]);
                let (yr, yi) = (y[j], y[j + 1]);
                im += xi * yr - xr * yi;
            }
            vec![2.0 * im]
        }
        KField::Quaternion => {
            let mut acc = Quaternion::new(0.0, 0.0, 0.0, 0.0);
            for j in (0..x.len()).step_by(4) {
                let qx = Quaternion::new(x[j], x[j + 1], x[j + 2], x[j + 3]);
                let qy = Quaternion::new(y[j], y[j + 1], y[j + 2], y[j + 3]);
                let p = qx.mul(qy.conj());
                acc = Quaternion::new(acc.w + p.w, acc.x + p.x, acc.y + p.y, acc.z + p.z);
            }
            vec![2.0 * acc.x, 2.0 * acc.y, 2.0 * acc.z]
        }
    }
}

/// Realification of a complex matrix: each entry a + bi becomes the 2x2 block
/// [[a, -b], [b, a]]. Transposition then corresponds to conjugate transpose.
pub fn realify_complex(m: &DMatrix<Complex64>) -> DMatrix<f64> {
    let (rows, cols) = m.shape();
    let mut out = DMatrix::zeros(2 * rows, 2 * cols);
    for i in 0..rows {
        for j in 0..cols {
            let z = m[(i, j)];
            out[(2 * i, 2 * j)] = z.re;
            out[(2 * i, 2 * j + 1)] = -z.im;
            out[(2 * i + 1, 2 * j)] = z.im;
            out[(2 * i + 1, 2 * j + 1)] = z.re;
        }
    }
    out
}

/// Quaternionic matrix to complex matrix via 2x2 complex blocks.
pub fn complexify_quaternion(m: &[Vec<Quaternion>]) -> DMatrix<Complex64> {
    let rows = m.len();
    let cols = m[0].len();
    let mut out = DMatrix::zeros(2 * rows, 2 * cols);
    for i in 0..rows {
        for j in 0..cols {
            let b = m[i][j].complex_block();
            for (bi, row) in b.iter().enumerate() {
                for (bj, z) in row.iter().enumerate() {
                    out[(2 * i + bi, 2 * j + bj)] = *z;
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn complex_bracket_of_one_and_i() {
        // [1, i] = 2 Im(1 * conj(i)) = 2 Im(-i) = -2i.
        let z = im_bracket(KField::Complex, &[1.0, 0.0], &[0.0, 1.0]);
        assert_eq!(z, vec![-2.0]);
    }

    #[test]
    fn real_bracket_is_trivial() {
        assert!(im_bracket(KField::Real, &[1.5], &[-0.5]).is_empty());
    }

    #[test]
    fn bracket_antisymmetric() {
        let x = [0.3, -1.2, 0.7, 2.0];
        let y = [1.1, 0.4, -0.6, 0.9];
        let xy = im_bracket(KField::Quaternion, &x, &y);
        let yx = im_bracket(KField::Quaternion, &y, &x);
        for (a, b) in xy.iter().zip(&yx) {
            assert_relative_eq!(*a, -*b, epsilon = 1e-14);
        }
    }

    #[test]
    fn quaternion_units() {
        let i = Quaternion::new(0.0, 1.0, 0.0, 0.0);
        let j = Quaternion::new(0.0, 0.0, 1.0, 0.0);
        let k = Quaternion::new(0.0, 0.0, 0.0, 1.0);
        assert_eq!(i.mul(j), k);
        assert_eq!(j.mul(i), Quaternion::new(0.0, 0.0, 0.0, -1.0));
        assert_eq!(i.mul(i), Quaternion::new(-1.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn realified_transpose_is_conjugate_transpose() {
        let m = DMatrix::from_row_slice(
            1,
            2,
            &[Complex64::new(1.0, 2.0), Complex64::new(-0.5, 0.25)],
        );
        let adj = DMatrix::from_fn(2, 1, |i, j| m[(j, i)].conj());
        assert_eq!(realify_complex(&m).transpose(), realify_complex(&adj));
    }
}
