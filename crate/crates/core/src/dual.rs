//! Forward-mode dual numbers and the scalar trait every chart is generic over.
//!
//! A `Dual<T, N>` carries a value and `N` first partial derivatives, both of
//! type `T`. Nesting (`Dual<Dual<f64, N>, N>`) yields exact second
//! derivatives, and so on; charts evaluated on nested duals give the
//! derivative data the shape operator and the Christoffel symbols need
//! without finite differencing.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, RemAssign, Sub, SubAssign};

use num_complex::Complex;
use num_traits::{Num, NumAssign, One, Zero};

/// Scalar field used by all generic chart code.
pub trait Real:
    Copy + Debug + PartialEq + Send + Sync + 'static + Num + NumAssign + Neg<Output = Self>
{
    fn cst(x: f64) -> Self;
    /// The underlying floating-point value (derivative parts dropped).
    fn val(&self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    fn sqrt(self) -> Self;
    fn atan2(self, x: Self) -> Self;
    fn powi(self, n: i32) -> Self;

    fn powf(self, p: Self) -> Self {
        (self.ln() * p).exp()
    }
    fn abs(self) -> Self {
        if self.val() < 0.0 {
            -self
        } else {
            self
        }
    }
}

impl Real for f64 {
    fn cst(x: f64) -> Self {
        x
    }
    fn val(&self) -> f64 {
        *self
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn atan2(self, x: Self) -> Self {
        f64::atan2(self, x)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    fn powf(self, p: Self) -> Self {
        f64::powf(self, p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T, const N: usize> {
    pub v: T,
    pub d: [T; N],
}

impl<T: Real, const N: usize> Dual<T, N> {
    pub fn constant(v: T) -> Self {
        Self { v, d: [T::zero(); N] }
    }

    /// Independent variable number `k`.
    pub fn var(v: T, k: usize) -> Self {
        let mut d = [T::zero(); N];
        d[k] = T::one();
        Self { v, d }
    }

    /// Applies a scalar function with value `f0` and derivative `f1` at `self.v`.
    fn chain(self, f0: T, f1: T) -> Self {
        let mut d = self.d;
        for x in d.iter_mut() {
            *x *= f1;
        }
        Self { v: f0, d }
    }
}

/// Seeds `N` independent variables.
pub fn seed<T: Real, const N: usize>(x: [T; N]) -> [Dual<T, N>; N] {
    std::array::from_fn(|k| Dual::var(x[k], k))
}

impl<T: Real, const N: usize> Add for Dual<T, N> {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        self.v += o.v;
        for k in 0..N {
            self.d[k] += o.d[k];
        }
        self
    }
}

impl<T: Real, const N: usize> Sub for Dual<T, N> {
    type Output = Self;
    fn sub(mut self, o: Self) -> Self {
        self.v -= o.v;
        for k in 0..N {
            self.d[k] -= o.d[k];
        }
        self
    }
}

impl<T: Real, const N: usize> Mul for Dual<T, N> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let d = std::array::from_fn(|k| self.d[k] * o.v + self.v * o.d[k]);
        Self { v: self.v * o.v, d }
    }
}

impl<T: Real, const N: usize> Div for Dual<T, N> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let inv = T::one() / o.v;
        let v = self.v * inv;
        let d = std::array::from_fn(|k| (self.d[k] - v * o.d[k]) * inv);
        Self { v, d }
    }
}

impl<T: Real, const N: usize> Rem for Dual<T, N> {
    type Output = Self;
    // Only the value is reduced; the remainder is locally a shift.
    fn rem(self, o: Self) -> Self {
        let q = (self.v.val() / o.v.val()).trunc();
        self - o * Self::constant(T::cst(q))
    }
}

impl<T: Real, const N: usize> Neg for Dual<T, N> {
    type Output = Self;
    fn neg(self) -> Self {
        Self { v: -self.v, d: self.d.map(|x| -x) }
    }
}

macro_rules! assign_ops {
    ($($tr:ident $m:ident $op:tt),*) => {$(
        impl<T: Real, const N: usize> $tr for Dual<T, N> {
            fn $m(&mut self, o: Self) {
                *self = *self $op o;
            }
        }
    )*};
}
assign_ops!(AddAssign add_assign +, SubAssign sub_assign -, MulAssign mul_assign *, DivAssign div_assign /, RemAssign rem_assign %);

impl<T: Real, const N: usize> Zero for Dual<T, N> {
    fn zero() -> Self {
        Self::constant(T::zero())
    }
    fn is_zero(&self) -> bool {
        self.v.is_zero() && self.d.iter().all(|x| x.is_zero())
    }
}

impl<T: Real, const N: usize> One for Dual<T, N> {
    fn one() -> Self {
        Self::constant(T::one())
    }
}

impl<T: Real, const N: usize> Num for Dual<T, N> {
    type FromStrRadixErr = T::FromStrRadixErr;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        T::from_str_radix(s, radix).map(Self::constant)
    }
}

impl<T: Real, const N: usize> Real for Dual<T, N> {
    fn cst(x: f64) -> Self {
        Self::constant(T::cst(x))
    }
    fn val(&self) -> f64 {
        self.v.val()
    }
    fn sin(self) -> Self {
        self.chain(self.v.sin(), self.v.cos())
    }
    fn cos(self) -> Self {
        self.chain(self.v.cos(), -self.v.sin())
    }
    fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e)
    }
    fn ln(self) -> Self {
        self.chain(self.v.ln(), T::one() / self.v)
    }
    fn sinh(self) -> Self {
        self.chain(self.v.sinh(), self.v.cosh())
    }
    fn cosh(self) -> Self {
        self.chain(self.v.cosh(), self.v.sinh())
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, T::one() / (T::cst(2.0) * s))
    }
    fn atan2(self, x: Self) -> Self {
        let r2 = self.v * self.v + x.v * x.v;
        let v = self.v.atan2(x.v);
        let d = std::array::from_fn(|k| (x.v * self.d[k] - self.v * x.d[k]) / r2);
        Self { v, d }
    }
    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::one();
        }
        let f1 = T::cst(n as f64) * self.v.powi(n - 1);
        self.chain(self.v.powi(n), f1)
    }
}

/// Second-order jet in `N` variables: value, gradient and Hessian.
pub type Jet2<const N: usize> = Dual<Dual<f64, N>, N>;

/// Seeds a second-order jet at `x`.
pub fn seed2<const N: usize>(x: [f64; N]) -> [Jet2<N>; N] {
    std::array::from_fn(|k| Dual {
        v: Dual::var(x[k], k),
        d: std::array::from_fn(|j| if j == k { Dual::constant(1.0) } else { Dual::constant(0.0) }),
    })
}

impl<const N: usize> Dual<Dual<f64, N>, N> {
    pub fn value(&self) -> f64 {
        self.v.v
    }
    pub fn grad(&self, i: usize) -> f64 {
        self.v.d[i]
    }
    pub fn hess(&self, i: usize, j: usize) -> f64 {
        self.d[i].d[j]
    }
}

/// Complex scalar built on a real scalar.
pub type Cx<T> = Complex<T>;

pub fn cx<T: Real>(re: f64, im: f64) -> Cx<T> {
    Complex::new(T::cst(re), T::cst(im))
}

pub fn cx_real<T: Real>(re: T) -> Cx<T> {
    Complex::new(re, T::zero())
}

/// Re and Im of a complex jet value.
pub fn cx_val<T: Real>(z: &Cx<T>) -> num_complex::Complex64 {
    num_complex::Complex64::new(z.re.val(), z.im.val())
}
