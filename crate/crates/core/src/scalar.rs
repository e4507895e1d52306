//! Scalar abstraction. All numerical kernels are generic over [`Real`];
//! the crate root exposes `f64` aliases for everyday use.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar used throughout the engine (implemented for `f32` and `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Conversion from a count.
    #[inline]
    fn of(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Machine epsilon scaled tolerance helper.
    #[inline]
    fn eps() -> Self {
        Self::epsilon()
    }

    /// Row-major `c = a b` with `a` of shape `m x k` and `b` of shape `k x n`.
    fn gemm(m: usize, k: usize, n: usize, a: &[Self], b: &[Self], c: &mut [Self]) {
        for (row, out) in c.chunks_mut(n).enumerate().take(m) {
            out.fill(Self::zero());
            for (p, &w) in a[row * k..(row + 1) * k].iter().enumerate() {
                if w != Self::zero() {
                    for (o, v) in out.iter_mut().zip(&b[p * n..(p + 1) * n]) {
                        *o = *o + w * *v;
                    }
                }
            }
        }
    }
}

macro_rules! blas_gemm {
    ($t:ty, $f:ident) => {
        impl Real for $t {
            fn gemm(m: usize, k: usize, n: usize, a: &[Self], b: &[Self], c: &mut [Self]) {
                assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
                // SAFETY: the slices cover the row-major extents checked above.
                unsafe {
                    matrixmultiply::$f(m, k, n, 1.0, a.as_ptr(), k as isize, 1, b.as_ptr(), n as isize, 1, 0.0, c.as_mut_ptr(), n as isize, 1);
                }
            }
        }
    };
}

blas_gemm!(f32, sgemm);
blas_gemm!(f64, dgemm);

/// `sin(x)/x` with the removable singularity handled.
#[inline]
pub fn sinc<T: Real>(x: T) -> T {
    if x.abs() < T::lit(1e-4) {
        let x2 = x * x;
        T::one() - x2 / T::lit(6.0) + x2 * x2 / T::lit(120.0)
    } else {
        x.sin() / x
    }
}

/// Three-component vector in lattice units.
pub type Vec3<T> = [T; 3];
