use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, NumCast, ToPrimitive};

/// Real scalar usable by every numerical routine in the crate: `f32` or `f64`.
///
/// Besides the usual float arithmetic the trait carries a dense
/// matrix-multiply kernel. The default is a plain triple loop; the `f32`
/// and `f64` impls route through `matrixmultiply`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumCast
    + Debug
    + Display
    + Default
    + Sum
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Panics only if the value is not representable
    /// at all, which cannot happen for finite constants and the float types here.
    #[inline]
    fn of(x: f64) -> Self {
        <Self as NumCast>::from(x).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn of_usize(x: usize) -> Self {
        <Self as NumCast>::from(x).expect("usize representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `c <- a * b` where `a` is `m x k`, `b` is `k x n` and `c` is a row-major
    /// `m x n` buffer with row stride `rsc`. Operand layouts are described by
    /// (row stride, column stride) pairs, so transposes come for free.
    #[allow(clippy::too_many_arguments)]
    fn gemm(
        m: usize,
        k: usize,
        n: usize,
        a: &[Self],
        a_strides: (usize, usize),
        b: &[Self],
        b_strides: (usize, usize),
        c: &mut [Self],
        rsc: usize,
    ) {
        naive_gemm(m, k, n, a, a_strides, b, b_strides, c, rsc)
    }
}

#[allow(clippy::too_many_arguments)]
fn naive_gemm<T: Float + AddAssign>(
    m: usize,
    k: usize,
    n: usize,
    a: &[T],
    (rsa, csa): (usize, usize),
    b: &[T],
    (rsb, csb): (usize, usize),
    c: &mut [T],
    rsc: usize,
) {
    for i in 0..m {
        let row = &mut c[i * rsc..i * rsc + n];
        row.iter_mut().for_each(|x| *x = T::zero());
        for p in 0..k {
            let aip = a[i * rsa + p * csa];
            if aip == T::zero() {
                continue;
            }
            for (j, cij) in row.iter_mut().enumerate() {
                *cij += aip * b[p * rsb + j * csb];
            }
        }
    }
}

fn span(rows: usize, cols: usize, (rs, cs): (usize, usize)) -> usize {
    if rows == 0 || cols == 0 {
        0
    } else {
        (rows - 1) * rs + (cols - 1) * cs + 1
    }
}

macro_rules! blas_scalar {
    ($t:ty, $kernel:path) => {
        impl Scalar for $t {
            fn gemm(
                m: usize,
                k: usize,
                n: usize,
                a: &[Self],
                a_strides: (usize, usize),
                b: &[Self],
                b_strides: (usize, usize),
                c: &mut [Self],
                rsc: usize,
            ) {
                if m == 0 || n == 0 {
                    return;
                }
                assert!(a.len() >= span(m, k, a_strides), "gemm: lhs buffer too short");
                assert!(b.len() >= span(k, n, b_strides), "gemm: rhs buffer too short");
                assert!(c.len() >= span(m, n, (rsc, 1)), "gemm: output buffer too short");
                if k == 0 {
                    for i in 0..m {
                        c[i * rsc..i * rsc + n].iter_mut().for_each(|x| *x = 0.0);
                    }
                    return;
                }
                // SAFETY: the three asserts above bound every offset the kernel
                // touches; `c` is uniquely borrowed and cannot alias `a` or `b`.
                unsafe {
                    $kernel(
                        m,
                        k,
                        n,
                        1.0,
                        a.as_ptr(),
                        a_strides.0 as isize,
                        a_strides.1 as isize,
                        b.as_ptr(),
                        b_strides.0 as isize,
                        b_strides.1 as isize,
                        0.0,
                        c.as_mut_ptr(),
                        rsc as isize,
                        1,
                    );
                }
            }
        }
    };
}

blas_scalar!(f64, matrixmultiply::dgemm);
blas_scalar!(f32, matrixmultiply::sgemm);
