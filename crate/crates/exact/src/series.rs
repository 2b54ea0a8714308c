//! Truncated power series about `z = 0` and the moment functional against the
//! normalised differential `D_{N,p}`.
//!
//! With one-site weight `F(z) = 1 + z` every contour integral around the origin is a
//! coefficient extraction, so `∮ D_{N,p}(z) z^k = C(N, p-k)/C(N, p)`.

use std::fmt::Debug;
use std::ops::Neg;

use num_traits::{FromPrimitive, Num};

use crate::ExactError;

/// Field elements the series code works over (`f64` and `BigRational` in practice).
pub trait Scalar: Num + Clone + Neg<Output = Self> + FromPrimitive + Debug {}
impl<T: Num + Clone + Neg<Output = T> + FromPrimitive + Debug> Scalar for T {}

pub(crate) fn int<T: Scalar>(x: usize) -> T {
    T::from_usize(x).expect("integer fits the scalar type")
}

pub(crate) fn pow<T: Scalar>(x: &T, k: usize) -> T {
    num_traits::pow(x.clone(), k)
}

/// Coefficients `c_0 … c_K`; `K` is the truncation order.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSeries<T> {
    pub coeffs: Vec<T>,
}

impl<T: Scalar> TruncatedSeries<T> {
    pub fn zero(order: usize) -> Self {
        TruncatedSeries { coeffs: vec![T::zero(); order + 1] }
    }

    pub fn constant(c: T, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = c;
        s
    }

    pub fn monomial(k: usize, order: usize) -> Self {
        let mut s = Self::zero(order.max(k));
        s.coeffs[k] = T::one();
        s
    }

    pub fn from_fn(order: usize, f: impl Fn(usize) -> T) -> Self {
        TruncatedSeries { coeffs: (0..=order).map(f).collect() }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> T {
        self.coeffs.get(k).cloned().unwrap_or_else(T::zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        Self::from_fn(order, |k| self.coeffs[k].clone() + other.coeffs[k].clone())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-T::one()))
    }

    pub fn scale(&self, c: &T) -> Self {
        TruncatedSeries { coeffs: self.coeffs.iter().map(|x| x.clone() * c.clone()).collect() }
    }

    /// Cauchy product truncated at the smaller order.
    pub fn mul(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        let mut out = Self::zero(order);
        for (i, a) in self.coeffs.iter().enumerate().take(order + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(order + 1 - i) {
                out.coeffs[i + j] = out.coeffs[i + j].clone() + a.clone() * b.clone();
            }
        }
        out
    }

    /// `s(z) ↦ s(cz)`.
    pub fn dilate(&self, c: &T) -> Self {
        let mut pw = T::one();
        let mut out = Vec::with_capacity(self.coeffs.len());
        for x in &self.coeffs {
            out.push(x.clone() * pw.clone());
            pw = pw * c.clone();
        }
        TruncatedSeries { coeffs: out }
    }

    /// Multiply by `z`; the truncation order stays fixed, so the top coefficient drops.
    pub fn times_z(&self) -> Self {
        let mut out = Self::zero(self.order());
        for k in 1..=self.order() {
            out.coeffs[k] = self.coeffs[k - 1].clone();
        }
        out
    }

    /// Formal derivative; loses one order.
    pub fn derivative(&self) -> Self {
        let order = self.order().saturating_sub(1);
        Self::from_fn(order, |k| self.coeff(k + 1) * int::<T>(k + 1))
    }
}

/// `g(z) = -(1/(1-q)) Σ_{k≥1} (-z)^k/[k]_q`, so the `z^k` coefficient is `(-1)^{k-1}/(1-q^k)`.
pub fn g_series<T: Scalar>(q: &T, order: usize) -> TruncatedSeries<T> {
    TruncatedSeries::from_fn(order, |k| {
        if k == 0 {
            return T::zero();
        }
        let c = T::one() / (T::one() - pow(q, k));
        if k % 2 == 1 {
            c
        } else {
            -c
        }
    })
}

/// `z/(1+z) = Σ_{k≥1} (-1)^{k-1} z^k`.
pub fn z_over_one_plus_z<T: Scalar>(order: usize) -> TruncatedSeries<T> {
    TruncatedSeries::from_fn(order, |k| match k {
        0 => T::zero(),
        k if k % 2 == 1 => T::one(),
        _ => -T::one(),
    })
}

/// Moment weights of `D_{N,p}`: `w_k = C(N, p-k)/C(N, p)` for `k = 0..=p`; zero beyond.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionData<T> {
    pub n: usize,
    pub p: usize,
    pub weights: Vec<T>,
}

impl<T: Scalar> PartitionData<T> {
    pub fn new(n: usize, p: usize) -> Self {
        assert!(p <= n, "p exceeds N");
        let mut weights = Vec::with_capacity(p + 1);
        let mut w = T::one();
        weights.push(w.clone());
        // C(N, p-k-1)/C(N, p-k) = (p-k)/(N-p+k+1)
        for k in 0..p {
            w = w * int::<T>(p - k) / int::<T>(n - p + k + 1);
            weights.push(w.clone());
        }
        PartitionData { n, p, weights }
    }

    #[inline]
    pub fn w(&self, k: usize) -> T {
        self.weights.get(k).cloned().unwrap_or_else(T::zero)
    }

    /// `∮ D_{N,p}(t) t^{-m} = C(N, p+m)/C(N, p)`, for `m = 0..=N-p`.
    pub fn inverse_moments(&self) -> Vec<T> {
        self.inverse_moments_upto(self.n - self.p)
    }

    /// The first `m_max + 1` of [`Self::inverse_moments`].
    pub fn inverse_moments_upto(&self, m_max: usize) -> Vec<T> {
        let (n, p) = (self.n, self.p);
        let m_max = m_max.min(n - p);
        let mut out = Vec::with_capacity(m_max + 1);
        let mut t = T::one();
        out.push(t.clone());
        for m in 0..m_max {
            t = t * int::<T>(n - p - m) / int::<T>(p + m + 1);
            out.push(t.clone());
        }
        out
    }
}

/// `∮_{Γ_0} D_{N,p}(z) s(z) = Σ_{k=0}^{p} c_k w_k`.
pub fn contour_moment<T: Scalar>(s: &TruncatedSeries<T>, pd: &PartitionData<T>) -> Result<T, ExactError> {
    if s.order() < pd.p {
        return Err(ExactError::Truncation { order: s.order(), p: pd.p });
    }
    Ok((0..=pd.p).fold(T::zero(), |acc, k| acc + s.coeffs[k].clone() * pd.weights[k].clone()))
}

/// `C(n, k)` in the scalar type, by a running product.
pub fn binomial<T: Scalar>(n: usize, k: usize) -> T {
    if k > n {
        return T::zero();
    }
    let k = k.min(n - k);
    (0..k).fold(T::one(), |acc, i| acc * int::<T>(n - i) / int::<T>(i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn rat(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn g_coefficients_at_half() {
        let g = g_series(&rat(-1, 2), 4);
        assert_eq!(g.coeff(0), rat(0, 1));
        // 1/(1-q) and -1/(1-q^2) at q = -1/2
        assert_eq!(g.coeff(1), rat(2, 3));
        assert_eq!(g.coeff(2), rat(-4, 3));
    }

    #[test]
    fn g_matches_sum_form() {
        // g(z) = Σ_i q^i z/(1+q^i z), evaluated at a small z in floats
        let (q, z) = (-0.4_f64, 0.1_f64);
        let direct: f64 = (0..200).map(|i| q.powi(i) * z / (1.0 + q.powi(i) * z)).sum();
        let g = g_series(&q, 60);
        let series: f64 = g.coeffs.iter().enumerate().map(|(k, c)| c * z.powi(k as i32)).sum();
        assert!((direct - series).abs() < 1e-15);
    }

    #[test]
    fn moment_examples() {
        let pd = PartitionData::<BigRational>::new(4, 2);
        let one = TruncatedSeries::constant(rat(1, 1), 2);
        assert_eq!(contour_moment(&one, &pd).unwrap(), rat(1, 1));
        assert_eq!(contour_moment(&TruncatedSeries::monomial(1, 2), &pd).unwrap(), rat(2, 3));
        assert_eq!(contour_moment(&TruncatedSeries::monomial(3, 3), &pd).unwrap(), rat(0, 1));
        assert!(matches!(
            contour_moment(&TruncatedSeries::<BigRational>::monomial(0, 1), &pd),
            Err(ExactError::Truncation { order: 1, p: 2 })
        ));
    }

    #[test]
    fn weights_are_binomial_ratios() {
        let pd = PartitionData::<BigRational>::new(9, 4);
        for k in 0..=4 {
            assert_eq!(pd.w(k), binomial::<BigRational>(9, 4 - k) / binomial::<BigRational>(9, 4));
        }
        assert_eq!(pd.w(5), rat(0, 1));
        let inv = pd.inverse_moments();
        assert_eq!(inv.len(), 6);
        assert_eq!(inv[2], binomial::<BigRational>(9, 6) / binomial::<BigRational>(9, 4));
    }

    #[test]
    fn series_algebra() {
        let a = TruncatedSeries::from_fn(3, |k| rat(k as i64 + 1, 1));
        let b = z_over_one_plus_z::<BigRational>(3);
        // (1+z) * z/(1+z) = z
        let one_plus_z = TruncatedSeries::from_fn(3, |k| if k < 2 { rat(1, 1) } else { rat(0, 1) });
        assert_eq!(one_plus_z.mul(&b), TruncatedSeries::monomial(1, 3));
        assert_eq!(a.dilate(&rat(2, 1)).coeff(3), rat(32, 1));
        assert_eq!(a.derivative().coeff(0), rat(2, 1));
        assert_eq!(a.times_z().coeff(1), rat(1, 1));
        assert_eq!(a.sub(&a), TruncatedSeries::zero(3));
    }
}
