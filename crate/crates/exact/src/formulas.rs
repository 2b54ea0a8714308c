//! Current and diffusion coefficient as finite sums of moments, generic over the
//! scalar type. With `BigRational` this is the ground-truth backend; with `f64` it is
//! only trustworthy at small `N` (the alternating coefficient sums cancel badly once
//! the saddle point `ρ/(1-ρ)` exceeds one), see [`crate::float`] for the stable route.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::series::{binomial, contour_moment, g_series, int, pow, z_over_one_plus_z, PartitionData, Scalar, TruncatedSeries};
use crate::Side;

/// `(N, p, q, R, L)` in the chosen scalar type.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactInput<T> {
    pub n: usize,
    pub p: usize,
    pub q: T,
    pub r: T,
    pub l: T,
}

pub type RationalInput = ExactInput<BigRational>;

impl<T: Scalar> ExactInput<T> {
    pub fn new(n: usize, p: usize, q: T, r: T) -> Self {
        assert!(n >= 2 && p >= 1 && p <= n, "invalid (N, p)");
        let l = T::one() - r.clone();
        ExactInput { n, p, q, r, l }
    }

    pub fn rho(&self) -> T {
        int::<T>(self.p) / int::<T>(self.n)
    }

    /// Same q and rates at another size, e.g. `(2N, 2p)` for the doubling identity.
    pub fn resized(&self, n: usize, p: usize) -> Self {
        ExactInput { n, p, q: self.q.clone(), r: self.r.clone(), l: self.l.clone() }
    }
}

impl RationalInput {
    /// Exact binary value of each float, so nothing is rounded on the way in.
    pub fn from_model(m: &aap_model::ModelParams) -> Self {
        let q = BigRational::from_float(m.q).expect("finite q");
        let r = BigRational::from_float(m.r).expect("finite R");
        ExactInput::new(m.n, m.p, q, r)
    }
}

impl ExactInput<f64> {
    pub fn from_model(m: &aap_model::ModelParams) -> Self {
        ExactInput::new(m.n, m.p, m.q, m.r)
    }
}

/// Parses `-1/2`, `-0.25`, `3` or `-1e-3` into an exact rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let a: BigInt = a.trim().parse().ok()?;
        let b: BigInt = b.trim().parse().ok()?;
        if b.is_zero() {
            return None;
        }
        return Some(BigRational::new(a, b));
    }
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (ip, fp) = mant.split_once('.').unwrap_or((mant, ""));
    if ip.is_empty() && fp.is_empty() {
        return None;
    }
    if !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{ip}{fp}").parse().ok()?;
    let scale = exp - fp.len() as i32;
    let ten = BigInt::from(10);
    let mut v = BigRational::from_integer(digits);
    if scale >= 0 {
        v *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        v /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(if neg { -v } else { v })
}

/// `(1-q) z g'(qz)` for the right jumps, `(1-q) z g'(z)` for the left ones.
pub fn jump_series<T: Scalar>(q: &T, side: Side, order: usize) -> TruncatedSeries<T> {
    let g = g_series(q, order + 1);
    let one_minus_q = T::one() - q.clone();
    TruncatedSeries::from_fn(order, |k| {
        if k == 0 {
            return T::zero();
        }
        // z g'(cz) has z^k coefficient k c_k c^{k-1}
        let base = g.coeffs[k].clone() * int::<T>(k) * one_minus_q.clone();
        match side {
            Side::Right => base * pow(q, k - 1),
            Side::Left => base,
        }
    })
}

/// `j^R_N` or `j^L_N` via the moment functional.
pub fn jump_current<T: Scalar>(inp: &ExactInput<T>, side: Side) -> T {
    let pd = PartitionData::new(inp.n, inp.p);
    contour_moment(&jump_series(&inp.q, side, inp.p), &pd).expect("order p series")
}

/// `J = N(R j^R - L j^L)`.
pub fn current_integral<T: Scalar>(inp: &ExactInput<T>) -> T {
    let jr = jump_current(inp, Side::Right);
    let jl = jump_current(inp, Side::Left);
    int::<T>(inp.n) * (inp.r.clone() * jr - inp.l.clone() * jl)
}

/// Closed sum `N(1-q)/C(N,p) Σ_{m<p} (m+1)(-1)^m C(N,p-m-1)/(1-q^{m+1}) (R q^m - L)`.
pub fn current_sum<T: Scalar>(inp: &ExactInput<T>) -> T {
    let (n, p, q) = (inp.n, inp.p, &inp.q);
    let mut acc = T::zero();
    for m in 0..p {
        let mut term = int::<T>(m + 1) * binomial::<T>(n, p - m - 1) / (T::one() - pow(q, m + 1))
            * (inp.r.clone() * pow(q, m) - inp.l.clone());
        if m % 2 == 1 {
            term = -term;
        }
        acc = acc + term;
    }
    int::<T>(n) * (T::one() - q.clone()) * acc / binomial::<T>(n, p)
}

/// The mirrored current: roles of `g'(qz)` and `g'(z)` exchanged.
pub fn current_mirror<T: Scalar>(inp: &ExactInput<T>) -> T {
    let jr = jump_current(inp, Side::Right);
    let jl = jump_current(inp, Side::Left);
    int::<T>(inp.n) * (inp.r.clone() * jl - inp.l.clone() * jr)
}

/// `a^I(y) = (1-q) y g'(·) - (j^I/ρ) y/(1+y)`, truncated at `order`.
pub fn a_series<T: Scalar>(inp: &ExactInput<T>, side: Side, j: &T, order: usize) -> TruncatedSeries<T> {
    let coef = j.clone() / inp.rho();
    jump_series(&inp.q, side, order).sub(&z_over_one_plus_z::<T>(order).scale(&coef))
}

/// `∮ D_{N,p} a^I`, identically zero.
pub fn a_moment<T: Scalar>(inp: &ExactInput<T>, side: Side) -> T {
    let j = jump_current(inp, side);
    let pd = PartitionData::new(inp.n, inp.p);
    contour_moment(&a_series(inp, side, &j, inp.p), &pd).expect("order p series")
}

/// `∮ D_{2N,2p} a^I - (j^I_{2N} - j^I_N)`, with `a^I` built at `(N, p)`.
pub fn doubling_residual<T: Scalar>(inp: &ExactInput<T>, side: Side) -> T {
    let j = jump_current(inp, side);
    let big = inp.resized(2 * inp.n, 2 * inp.p);
    let pd2 = PartitionData::new(big.n, big.p);
    let lhs = contour_moment(&a_series(inp, side, &j, big.p), &pd2).expect("order 2p series");
    lhs - (jump_current(&big, side) - j)
}

/// `I_{N,p,k} = [z^{p-1}] (1+z)^N (1+qz)^{-k}`.
pub fn i_npk<T: Scalar>(n: usize, p: usize, k: usize, q: &T) -> T {
    // [z^j](1+qz)^{-k} = C(k+j-1, j) (-q)^j
    let mq = -q.clone();
    (0..p).fold(T::zero(), |acc, j| {
        let neg_binom = if k == 0 {
            if j == 0 {
                T::one()
            } else {
                T::zero()
            }
        } else {
            binomial::<T>(k + j - 1, j)
        };
        acc + binomial::<T>(n, p - 1 - j) * neg_binom * pow(&mq, j)
    })
}

/// Per-side pieces of the diffusion coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionParts<T> {
    pub j: T,
    pub delta_side: T,
    /// Nested-contour value of the `i = 0` double integral.
    pub i0: T,
}

/// `Y_m = ∮ D(y) y^m a(y)` for `m = 0..p`.
fn y_moments<T: Scalar>(a: &TruncatedSeries<T>, pd: &PartitionData<T>) -> Vec<T> {
    (0..pd.p)
        .map(|m| (1..=pd.p - m).fold(T::zero(), |acc, k| acc + a.coeff(k) * pd.w(k + m)))
        .collect()
}

/// `Δ^I` with the geometric series in `q^i` summed in closed form.
///
/// Expanding `1/(t - q^i y)` for `|q^i y| < |t|` turns every double integral into
/// `Σ_m q^{im} T_m (…)` with `T_m = ∮ D(t) t^{-m}`, and the `i` sums become
/// `1/(1-q^m)` factors. The `m = 0` part of the first sum multiplies `∮ D a = 0`
/// and is dropped.
pub fn diffusion_side<T: Scalar>(inp: &ExactInput<T>, side: Side) -> DiffusionParts<T> {
    let (n, p, q) = (inp.n, inp.p, &inp.q);
    let pd = PartitionData::new(n, p);
    let m_max = (p - 1).min(n - p);
    let t = pd.inverse_moments_upto(m_max);
    let j = jump_current(inp, side);
    let a = a_series(inp, side, &j, p);
    let y = y_moments(&a, &pd);

    let mut i0 = T::zero();
    let mut first = T::zero();
    for m in 1..=m_max {
        let ty = t[m].clone() * y[m].clone();
        let qm = pow(q, m);
        i0 = i0 + ty.clone();
        first = first + ty * qm.clone() / (T::one() - qm);
    }
    let mut second = T::zero();
    for (m, tm) in t.iter().enumerate().take(m_max + 1) {
        let mut inner = T::zero();
        for k in 1..=p - m {
            let qs = pow(q, k + m);
            inner = inner + a.coeff(k) * pd.w(k + m) * qs.clone() / (T::one() - qs);
        }
        second = second + tm.clone() * inner;
    }
    let eps = match side {
        Side::Right => T::one(),
        Side::Left => -T::one(),
    };
    let nn = int::<T>(n);
    let delta_side = eps * int::<T>(p) * nn.clone() * j.clone()
        + int::<T>(2) * nn.clone() * nn * (i0.clone() + first + second);
    DiffusionParts { j, delta_side, i0 }
}

/// `Δ = R Δ^R - L Δ^L`.
pub fn diffusion<T: Scalar>(inp: &ExactInput<T>) -> T {
    let dr = diffusion_side(inp, Side::Right).delta_side;
    let dl = diffusion_side(inp, Side::Left).delta_side;
    inp.r.clone() * dr - inp.l.clone() * dl
}

/// The `i = 0` double integral through the symmetric/antisymmetric split:
/// `½(∮∮ D D (t a(y) - y a(t))/(t-y) + C(2N,2p)/C(N,p)² ∮ D_{2N,2p} a)`.
pub fn i0_symmetrized<T: Scalar>(inp: &ExactInput<T>, side: Side) -> T {
    let (n, p) = (inp.n, inp.p);
    let pd = PartitionData::<T>::new(n, p);
    let j = jump_current(inp, side);
    let a = a_series(inp, side, &j, 2 * p);
    // (t y^k - y t^k)/(t-y) = -t y Σ_{s=0}^{k-2} t^s y^{k-2-s}
    let mut sym = T::zero();
    for k in 2..=2 * p {
        let ak = a.coeff(k);
        if ak.is_zero() {
            continue;
        }
        let mut inner = T::zero();
        for s in 0..=k - 2 {
            inner = inner + pd.w(s + 1) * pd.w(k - 1 - s);
        }
        sym = sym - ak * inner;
    }
    let pd2 = PartitionData::new(2 * n, 2 * p);
    let doubled = contour_moment(&a, &pd2).expect("order 2p series");
    let zr = binomial::<T>(2 * n, 2 * p) / (binomial::<T>(n, p) * binomial::<T>(n, p));
    (sym + zr * doubled) / int::<T>(2)
}

pub fn rational_to_f64(x: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn rat(a: i64, b: i64) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}
