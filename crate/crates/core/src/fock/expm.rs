//! Dense matrix exponential by scaling and squaring with a degree-13 Padé approximant.

use ndarray::{s, Array2, LinalgScalar, ScalarOperand};
use num_complex::Complex64;

/// Scalars the exponential is defined for.
pub trait ExpmScalar: LinalgScalar + ScalarOperand + std::ops::Neg<Output = Self> + std::ops::SubAssign {
    fn from_real(x: f64) -> Self;
    fn modulus(self) -> f64;
}

impl ExpmScalar for f64 {
    fn from_real(x: f64) -> Self {
        x
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl ExpmScalar for Complex64 {
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
}

// b_0..b_13 of the [13/13] approximant
const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

// largest 1-norm for which the [13/13] approximant is accurate to double precision
const THETA13: f64 = 5.371_920_351_148_152;

fn one_norm<T: ExpmScalar>(a: &Array2<T>) -> f64 {
    a.columns()
        .into_iter()
        .map(|c| c.iter().map(|x| x.modulus()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn scaled<T: ExpmScalar>(a: &Array2<T>, c: f64) -> Array2<T> {
    let c = T::from_real(c);
    a.mapv(|x| x * c)
}

/// `exp(a)` for a square matrix.
///
/// # Panics
/// If `a` is not square.
pub fn expm<T: ExpmScalar>(a: &Array2<T>) -> Array2<T> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    if n == 0 {
        return Array2::zeros((0, 0));
    }

    let norm = one_norm(a);
    let squarings = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let a = scaled(a, 0.5f64.powi(squarings));

    let eye = Array2::<T>::eye(n);
    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);
    let b = |k: usize| T::from_real(PADE13[k]);

    let u_inner = &a6 * b(13) + &a4 * b(11) + &a2 * b(9);
    let u_poly = a6.dot(&u_inner) + &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &eye * b(1);
    let u = a.dot(&u_poly);
    let v_inner = &a6 * b(12) + &a4 * b(10) + &a2 * b(8);
    let v = a6.dot(&v_inner) + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &eye * b(0);

    let mut r = solve(&v - &u, &v + &u);
    for _ in 0..squarings {
        r = r.dot(&r);
    }
    r
}

/// Solve `a x = rhs` by Gaussian elimination with partial pivoting.
fn solve<T: ExpmScalar>(a: Array2<T>, rhs: Array2<T>) -> Array2<T> {
    let n = a.nrows();
    let m = rhs.ncols();
    let mut aug = Array2::<T>::zeros((n, n + m));
    aug.slice_mut(s![.., ..n]).assign(&a);
    aug.slice_mut(s![.., n..]).assign(&rhs);

    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| aug[[i, col]].modulus().total_cmp(&aug[[j, col]].modulus()))
            .unwrap_or(col);
        if pivot_row != col {
            for j in 0..n + m {
                aug.swap([col, j], [pivot_row, j]);
            }
        }
        let pivot = aug[[col, col]];
        // q(A) is well conditioned after scaling; a zero pivot means the input was not finite
        assert!(pivot.modulus() > 0.0, "singular Padé denominator");
        for row in col + 1..n {
            let factor = aug[[row, col]] / pivot;
            if factor.modulus() == 0.0 {
                continue;
            }
            for j in col..n + m {
                let v = aug[[col, j]];
                aug[[row, j]] -= factor * v;
            }
        }
    }

    let mut x = Array2::<T>::zeros((n, m));
    for row in (0..n).rev() {
        let pivot = aug[[row, row]];
        for j in 0..m {
            let mut acc = aug[[row, n + j]];
            for k in row + 1..n {
                acc -= aug[[row, k]] * x[[k, j]];
            }
            x[[row, j]] = acc / pivot;
        }
    }
    x
}
