//! Fixed-size complex matrices used for the mode transforms.

use num_complex::Complex;

use crate::scalar::Real;

pub type Mat2<T = f64> = [[Complex<T>; 2]; 2];
pub type Mat3<T = f64> = [[Complex<T>; 3]; 3];

/// Largest entry of `|M†M − I|`.
pub fn unitarity_residual<T: Real, const N: usize>(m: &[[Complex<T>; N]; N]) -> T {
    let mut worst = T::zero();
    for i in 0..N {
        for j in 0..N {
            let mut acc = Complex::new(T::zero(), T::zero());
            for k in 0..N {
                acc = acc + m[k][i].conj() * m[k][j];
            }
            if i == j {
                acc = acc - Complex::new(T::one(), T::zero());
            }
            worst = worst.max(acc.norm());
        }
    }
    worst
}

/// `M v`.
pub fn apply<T: Real, const N: usize>(m: &[[Complex<T>; N]; N], v: &[Complex<T>; N]) -> [Complex<T>; N] {
    let mut out = [Complex::new(T::zero(), T::zero()); N];
    for (i, row) in m.iter().enumerate() {
        for (a, b) in row.iter().zip(v) {
            out[i] = out[i] + *a * *b;
        }
    }
    out
}
