//! Perturbative solution of the T-Q relation
//! `T(x) Q(x) = e^{-γN} (1+x)^N Q(qx) + (1+qx)^N q^p Q(x/q)`
//! to second order in γ, checked as exact polynomial identities.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::OracleError;

type Q = BigRational;

/// Dense polynomial, coefficient `k` multiplies `x^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly(pub Vec<Q>);

fn int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

fn pow(x: &Q, k: i64) -> Q {
    if k >= 0 {
        num_traits::pow(x.clone(), k as usize)
    } else {
        num_traits::pow(x.recip(), (-k) as usize)
    }
}

fn binom(n: usize, k: usize) -> Q {
    (0..k).fold(Q::one(), |acc, i| acc * int((n - i) as i64) / int((i + 1) as i64))
}

impl Poly {
    pub fn zero() -> Self {
        Poly(Vec::new())
    }

    pub fn monomial(k: usize) -> Self {
        let mut c = vec![Q::zero(); k + 1];
        c[k] = Q::one();
        Poly(c)
    }

    /// `(1 + c x)^n`.
    pub fn binomial(c: &Q, n: usize) -> Self {
        Poly((0..=n).map(|k| binom(n, k) * pow(c, k as i64)).collect())
    }

    pub fn coeff(&self, k: usize) -> Q {
        self.0.get(k).cloned().unwrap_or_else(Q::zero)
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let len = self.0.len().max(o.0.len());
        Poly((0..len).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.scale(&-Q::one()))
    }

    pub fn scale(&self, c: &Q) -> Poly {
        Poly(self.0.iter().map(|a| a * c).collect())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.0.is_empty() || o.0.is_empty() {
            return Poly::zero();
        }
        let mut out = vec![Q::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out)
    }

    /// `P(c x)`.
    pub fn dilate(&self, c: &Q) -> Poly {
        Poly(self.0.iter().enumerate().map(|(k, a)| a * pow(c, k as i64)).collect())
    }

    pub fn eval(&self, x: &Q) -> Q {
        self.0.iter().rev().fold(Q::zero(), |acc, a| acc * x + a)
    }

    pub fn derivative(&self) -> Poly {
        Poly(self.0.iter().enumerate().skip(1).map(|(k, a)| a * int(k as i64)).collect())
    }

    /// Coefficients below `x^p`.
    pub fn low(&self, p: usize) -> Vec<Q> {
        (0..p).map(|k| self.coeff(k)).collect()
    }

    /// `P / x^p`, discarding the low part (callers check it separately).
    pub fn shift_down(&self, p: usize) -> Poly {
        Poly(self.0.iter().skip(p).cloned().collect())
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.iter().rposition(|a| !a.is_zero())
    }
}

/// Result of the order-by-order T-Q construction.
#[derive(Debug, Clone)]
pub struct TQCheck {
    pub n: usize,
    pub p: usize,
    pub q: Q,
    pub q0: Poly,
    pub q1: Poly,
    pub q2: Poly,
    pub t1: Poly,
    pub t2: Poly,
    /// Coefficients of `x^0..x^{p-1}` of the order-1 identity.
    pub residual1: Vec<Q>,
    /// Order-1 translation-invariance condition.
    pub normalization1: Q,
    /// Order-2 identity plus its normalization; `Q2` is solved from these `p+1` equations
    /// in `p` unknowns, so a zero residual is a genuine consistency check.
    pub residual2: Vec<Q>,
    pub lambda1: Q,
    pub lambda2: Q,
}

impl TQCheck {
    pub fn residual_max(&self) -> Q {
        self.residual1
            .iter()
            .chain(&self.residual2)
            .chain(std::iter::once(&self.normalization1))
            .map(|r| r.abs())
            .fold(Q::zero(), |a, b| if b > a { b } else { a })
    }

    pub fn is_exact(&self) -> bool {
        self.residual_max().is_zero()
    }

    pub fn degree_q1(&self) -> Option<usize> {
        self.q1.degree()
    }
}

struct Setup {
    q: Q,
    qp: Q,
    one_x: Poly,
    one_qx: Poly,
    t0: Poly,
}

impl Setup {
    /// The parts of the T-Q relation that are linear in the unknown `Q_k`:
    /// `(1+x)^N Q(qx) + (1+qx)^N q^p Q(x/q) - T0 Q`.
    fn linear(&self, poly: &Poly) -> Poly {
        let a = self.one_x.mul(&poly.dilate(&self.q));
        let b = self.one_qx.mul(&poly.dilate(&self.q.recip())).scale(&self.qp);
        a.add(&b).sub(&self.t0.mul(poly))
    }

    /// `e^{-γp} Q(-1) - q^p Q(-1/q)` is linear too.
    fn norm(&self, poly: &Poly) -> Q {
        let m1 = -Q::one();
        poly.eval(&m1) - &self.qp * poly.eval(&(m1 / &self.q))
    }
}

/// Solves `A c = b` for `p` unknowns from `p + 1` equations; returns the solution and the
/// residual of every equation.
fn solve_overdetermined(a: &[Vec<Q>], b: &[Q]) -> Result<(Vec<Q>, Vec<Q>), OracleError> {
    let rows = a.len();
    let cols = a[0].len();
    let mut m: Vec<Vec<Q>> = a.iter().zip(b).map(|(r, v)| r.iter().cloned().chain(std::iter::once(v.clone())).collect()).collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        let Some(pr) = (row..rows).find(|&r| !m[r][col].is_zero()) else { continue };
        m.swap(row, pr);
        let inv = m[row][col].recip();
        for k in col..=cols {
            m[row][k] = &m[row][k] * &inv;
        }
        for r in 0..rows {
            if r != row && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for k in col..=cols {
                    let d = &f * &m[row][k];
                    m[r][k] -= d;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    if pivots.len() < cols {
        return Err(OracleError::TqSingular { rank: pivots.len(), unknowns: cols });
    }
    let x: Vec<Q> = (0..cols).map(|c| m[c][cols].clone()).collect();
    let res = a.iter().zip(b).map(|(r, v)| r.iter().zip(&x).fold(Q::zero(), |acc, (ai, xi)| acc + ai * xi) - v).collect();
    Ok((x, res))
}

/// `(1-q) [R q^{-2} h(-1/q) - L h(-1)]`.
fn lambda_from(q: &Q, r: &Q, h: impl Fn(&Q) -> Q) -> Q {
    let l = Q::one() - r;
    let m1 = -Q::one();
    (Q::one() - q) * (r * pow(q, -2) * h(&(&m1 / q)) - l * h(&m1))
}

/// Builds `Q_0, Q_1, Q_2` and `T_1, T_2` and checks the identities; `λ_1`, `λ_2` are the
/// first two Taylor coefficients of the eigenvalue at rates `(R, 1-R)`.
pub fn verify_tq(n: usize, p: usize, q: &Q, r: &Q) -> Result<TQCheck, OracleError> {
    if p == 0 || p > n || !(q.is_negative() && q > &-Q::one()) {
        return Err(OracleError::TqInput);
    }
    let qp = pow(q, p as i64);
    let one_x = Poly::binomial(&Q::one(), n);
    let one_qx = Poly::binomial(q, n);
    let t0 = one_x.scale(&qp).add(&one_qx);
    let s = Setup { q: q.clone(), qp: qp.clone(), one_x, one_qx, t0 };
    let nn = int(n as i64);
    let q0 = Poly::monomial(p);

    // Q1 by coefficient extraction: b_i = N C(N,i)/C(N,p) and b_i = (q^{p-i} - 1) q_i
    let z = binom(n, p);
    let q1 = Poly((0..p).map(|i| &nn * binom(n, i) / &z / (pow(q, (p - i) as i64) - Q::one())).collect());

    let full1 = s.linear(&q1).sub(&s.one_x.mul(&q0.dilate(q)).scale(&nn));
    let residual1 = full1.low(p);
    let t1 = full1.shift_down(p);
    let pp = int(p as i64);
    let normalization1 = s.norm(&q1) - &pp * q0.eval(&-Q::one());

    // order 2: linear(Q2) = T1 Q1 + N (1+x)^N Q1(qx) - N²/2 (1+x)^N Q0(qx) (+ T2 x^p)
    let source = t1
        .mul(&q1)
        .add(&s.one_x.mul(&q1.dilate(q)).scale(&nn))
        .sub(&s.one_x.mul(&q0.dilate(q)).scale(&(&nn * &nn / int(2))));
    let basis: Vec<Poly> = (0..p).map(|k| s.linear(&Poly::monomial(k))).collect();
    let mut a: Vec<Vec<Q>> = (0..p).map(|row| basis.iter().map(|b| b.coeff(row)).collect()).collect();
    let mut b: Vec<Q> = source.low(p);
    a.push((0..p).map(|k| s.norm(&Poly::monomial(k))).collect());
    // Q2(-1) - p Q1(-1) + p²/2 Q0(-1) - q^p Q2(-1/q) = 0
    let m1 = -Q::one();
    b.push(&pp * q1.eval(&m1) - &pp * &pp / int(2) * q0.eval(&m1));
    let (coeffs, residual2) = solve_overdetermined(&a, &b)?;
    let q2 = Poly(coeffs);
    let full2 = s.linear(&q2).sub(&source);
    let t2 = full2.shift_down(p);

    // λ(γ) = (1-q)[R q^{-2} (ln Q)'(-1/q) - L (ln Q)'(-1)] + const; with u = Q1/Q0 and
    // v = Q2/Q0, ln Q = ln Q0 + γ u + γ²(v - u²/2) + …
    let log_deriv = |f: &Poly, x: &Q| -> Q {
        let g0 = q0.eval(x);
        (f.derivative().eval(x) * &g0 - f.eval(x) * q0.derivative().eval(x)) / (&g0 * &g0)
    };
    let lambda1 = lambda_from(q, r, |x| log_deriv(&q1, x));
    let lambda2 = lambda_from(q, r, |x| log_deriv(&q2, x) - q1.eval(x) / q0.eval(x) * log_deriv(&q1, x));

    Ok(TQCheck { n, p, q: q.clone(), q0, q1, q2, t1, t2, residual1, normalization1, residual2, lambda1, lambda2 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(a: i64, b: i64) -> Q {
        Q::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn four_two() {
        let c = verify_tq(4, 2, &rat(-1, 2), &rat(1, 1)).unwrap();
        assert!(c.is_exact(), "{:?}", c.residual_max());
        assert_eq!(c.lambda1, rat(4, 1));
    }

    #[test]
    fn one_particle() {
        let c = verify_tq(3, 1, &rat(-1, 3), &rat(7, 10)).unwrap();
        assert!(c.is_exact());
        assert_eq!(c.degree_q1(), Some(0));
        assert_eq!(c.lambda1, rat(2, 5));
        assert_eq!(c.lambda2, rat(1, 2));
    }

    #[test]
    fn poly_basics() {
        let p = Poly::binomial(&rat(1, 1), 3);
        assert_eq!(p.0, vec![rat(1, 1), rat(3, 1), rat(3, 1), rat(1, 1)]);
        assert_eq!(p.eval(&rat(-1, 1)), rat(0, 1));
        assert_eq!(p.derivative().coeff(0), rat(3, 1));
        assert_eq!(p.dilate(&rat(2, 1)).coeff(3), rat(8, 1));
    }
}
