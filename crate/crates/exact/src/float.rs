//! `f64` evaluation of `J` and `Δ` that stays accurate for `N` in the thousands.
//!
//! Plain coefficient sums alternate in sign and lose everything once `ρ/(1-ρ) > 1`.
//! Instead every series is split into atoms `y/(1+cy)^k` with `c = q^l`, whose
//! moments against `D_{N,p}` obey a short forward recurrence,
//!
//! `U^{(k)}_n = U^{(k-1)}_n - c U^{(k)}_{n-1}`, `U^{(0)}_n = C(N,n)/C(N,p)`,
//!
//! with `∮ D(y) y^{m+1} (1+cy)^{-k} = U^{(k)}_{p-1-m}`. For odd `l` every term is
//! positive. For even `l` the rounding error stays below the size of the odd neighbour,
//! which dominates the sum anyway.

use aap_model::ModelParams;

use crate::{ExactError, Side};

/// `j^R`, `j^L` and `J = N(R j^R - L j^L)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloatCurrent {
    pub j_r: f64,
    pub j_l: f64,
    pub current: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionReport {
    pub current: FloatCurrent,
    pub delta: f64,
    pub delta_r: f64,
    pub delta_l: f64,
    /// Largest `i` kept in the `q^i` series (over both sides).
    pub truncation_i: usize,
    /// Larger of `|∮ D a^I| / |j^I|` over both sides, as evaluated by the same atoms.
    pub vanishing_residual: f64,
}

const CUT: f64 = 1e-20;
pub const DEFAULT_I_CAP: usize = 2000;

/// Atom moments for one `(N, p, q)`.
struct Atoms {
    n: usize,
    p: usize,
    q: f64,
    lcut: usize,
    /// `r_n = C(N,n)/C(N,p)`, `n = 0..=p`.
    r: Vec<f64>,
    /// `U^{(1)}` for `c = q^L`, `L = 0..=lcut`.
    u1: Vec<Vec<f64>>,
    /// `S(L0)_n = Σ_l q^l U^{(2)}_n(q^{l+L0})`, `L0 = 0..=lcut+1`.
    s2: Vec<Vec<f64>>,
    /// `(U^{(2)}_{p-1}, U^{(2)}_{p-2})` for `c = q^L`, the two moments the symmetric kernel needs.
    u2_top: Vec<(f64, f64)>,
}

fn ratio_row(n: usize, p: usize) -> Vec<f64> {
    let mut r = vec![0.0; p + 1];
    r[p] = 1.0;
    for k in (1..=p).rev() {
        r[k - 1] = r[k] * k as f64 / (n - k + 1) as f64;
    }
    r
}

fn recur(prev: &[f64], c: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(prev.len());
    let mut last = 0.0;
    for &x in prev {
        last = x - c * last;
        out.push(last);
    }
    out
}

impl Atoms {
    fn new(n: usize, p: usize, q: f64) -> Self {
        let lcut = ((CUT.ln() / q.abs().ln()).ceil() as usize).max(2);
        let r = ratio_row(n, p);
        let rows = &r[..p];
        let (nf, pn) = (n as f64, p);
        let mut u1 = Vec::with_capacity(lcut + 1);
        let mut u2 = Vec::with_capacity(lcut + 1);
        // c = 1 has the closed form C(N-k, n)/C(N, p)
        u1.push((0..pn).map(|k| rows[k] * (nf - k as f64) / nf).collect::<Vec<_>>());
        u2.push(if n >= 2 {
            (0..pn).map(|k| rows[k] * (nf - k as f64) * (nf - k as f64 - 1.0) / (nf * (nf - 1.0))).collect()
        } else {
            vec![0.0; pn]
        });
        let mut c = 1.0;
        for _ in 1..=lcut {
            c *= q;
            let a = recur(rows, c);
            let b = recur(&a, c);
            u1.push(a);
            u2.push(b);
        }
        let u2_top = u2
            .iter()
            .map(|v| (v[p - 1], if p >= 2 { v[p - 2] } else { 0.0 }))
            .collect();
        // beyond lcut the atoms equal the c = 0 ones, U = r, and the tail sums to r/(1-q)
        let mut s2 = vec![Vec::new(); lcut + 2];
        s2[lcut + 1] = rows.iter().map(|x| x / (1.0 - q)).collect();
        for l0 in (0..=lcut).rev() {
            s2[l0] = u2[l0].iter().zip(&s2[l0 + 1]).map(|(u, s)| u + q * s).collect();
        }
        Atoms { n, p, q, lcut, r, u1, s2, u2_top }
    }

    fn s2(&self, l0: usize, m: usize) -> f64 {
        self.s2[l0.min(self.lcut + 1)][self.p - 1 - m]
    }

    /// `∮ D(y) y^{m+1}/(1 + q^i y)`.
    fn phi1(&self, i: usize, m: usize) -> f64 {
        if i > self.lcut {
            self.r[self.p - 1 - m]
        } else {
            self.u1[i][self.p - 1 - m]
        }
    }

    fn shift(side: Side) -> usize {
        match side {
            Side::Right => 1,
            Side::Left => 0,
        }
    }

    fn jump_current(&self, side: Side) -> f64 {
        (1.0 - self.q) * self.s2(Self::shift(side), 0)
    }

    fn rho(&self) -> f64 {
        self.p as f64 / self.n as f64
    }

    /// `Y^{(i)}_m = ∮ D(y) y^m a(q^i y)`; `i = 0` gives the plain moments.
    fn y_moment(&self, side: Side, j: f64, i: usize, m: usize) -> f64 {
        let qi = self.q.powi(i as i32);
        qi * ((1.0 - self.q) * self.s2(Self::shift(side) + i, m) - j / self.rho() * self.phi1(i, m))
    }

    /// `∮∮ D D (t a(y) - y a(t))/(t - y)`, summed atom by atom.
    fn symmetric_kernel(&self, side: Side, j: f64) -> f64 {
        let s = Self::shift(side);
        let mut acc = 0.0;
        let mut ql = 1.0;
        for l in 0..=self.lcut {
            let idx = l + s;
            if idx > self.lcut {
                break;
            }
            let c = self.q.powi(idx as i32);
            let (m0, m1) = self.u2_top[idx];
            acc += ql * c * (2.0 * m0 * m0 + 2.0 * c * m0 * m1);
            ql *= self.q;
        }
        // the y/(1+y) atom contributes ρ² times its weight
        (1.0 - self.q) * acc - j * self.rho()
    }
}

fn check(x: f64, what: &'static str) -> Result<f64, ExactError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(ExactError::Overflow(what))
    }
}

/// `ln C(n, k)` by a sum of logs; accurate to a few ulps of the result.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (1..=k).map(|i| ((n - k + i) as f64 / i as f64).ln()).sum()
}

fn jump_currents(n: usize, p: usize, q: f64) -> (f64, f64) {
    let a = Atoms::new(n, p, q);
    (a.jump_current(Side::Right), a.jump_current(Side::Left))
}

pub fn current(m: &ModelParams) -> Result<FloatCurrent, ExactError> {
    let (j_r, j_l) = jump_currents(m.n, m.p, m.q);
    let current = check(m.n as f64 * (m.r * j_r - m.l * j_l), "current")?;
    Ok(FloatCurrent { j_r, j_l, current })
}

/// `Δ` with the `i ≥ 1` series truncated once a term drops below `tol` times the
/// running total (two terms in a row), capped at [`DEFAULT_I_CAP`] terms.
pub fn diffusion(m: &ModelParams, tol: f64) -> Result<DiffusionReport, ExactError> {
    diffusion_with_cap(m, tol, DEFAULT_I_CAP)
}

pub fn diffusion_with_cap(m: &ModelParams, tol: f64, cap: usize) -> Result<DiffusionReport, ExactError> {
    let (n, p, q) = (m.n, m.p, m.q);
    let atoms = Atoms::new(n, p, q);
    let (j_r, j_l) = (atoms.jump_current(Side::Right), atoms.jump_current(Side::Left));
    let current = FloatCurrent { j_r, j_l, current: check(n as f64 * (m.r * j_r - m.l * j_l), "current")? };

    let (j2_r, j2_l) = jump_currents(2 * n, 2 * p, q);
    let zratio = (ln_binomial(2 * n, 2 * p) - 2.0 * ln_binomial(n, p)).exp();

    let m_max = (p - 1).min(n - p);
    let mut t = Vec::with_capacity(m_max + 1);
    let mut tm = 1.0;
    for k in 0..=m_max {
        t.push(tm);
        tm *= (n - p - k) as f64 / (p + k + 1) as f64;
    }

    let mut truncation_i = 0;
    let mut vanishing_residual: f64 = 0.0;
    let mut side_delta = |side: Side, j: f64, j2: f64| -> Result<f64, ExactError> {
        let mut y0: Vec<f64> = (0..=m_max).map(|mm| atoms.y_moment(side, j, 0, mm)).collect();
        vanishing_residual = vanishing_residual.max(y0[0].abs() / j.abs().max(f64::MIN_POSITIVE));
        y0[0] = 0.0;
        let i0 = 0.5 * (atoms.symmetric_kernel(side, j) + zratio * (j2 - j));
        let mut total = i0;
        let mut scale = i0.abs();
        let mut small = 0;
        let mut i = 0;
        loop {
            i += 1;
            if i > cap {
                return Err(ExactError::NotConverged { tol, cap, last: small as f64 });
            }
            let qi = q.powi(i as i32);
            let mut qim = 1.0;
            let mut term = 0.0;
            for mm in 0..=m_max {
                term += qim * t[mm] * (y0[mm] + atoms.y_moment(side, j, i, mm));
                qim *= qi;
            }
            total += term;
            scale += term.abs();
            if term.abs() <= tol * total.abs().max(f64::MIN_POSITIVE) || term.abs() <= tol * 1e-3 * scale {
                small += 1;
                if small >= 2 {
                    break;
                }
            } else {
                small = 0;
            }
        }
        truncation_i = truncation_i.max(i);
        let eps = if side == Side::Right { 1.0 } else { -1.0 };
        let nf = n as f64;
        check(eps * p as f64 * nf * j + 2.0 * nf * nf * total, "diffusion")
    };
    let delta_r = side_delta(Side::Right, j_r, j2_r)?;
    let delta_l = side_delta(Side::Left, j_l, j2_l)?;
    let delta = check(m.r * delta_r - m.l * delta_l, "diffusion")?;
    Ok(DiffusionReport { current, delta, delta_r, delta_l, truncation_i, vanishing_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulas::{self, rational_to_f64, RationalInput};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn four_two() {
        let m = ModelParams::new(4, 2, -0.5, 1.0).unwrap();
        assert!(rel(current(&m).unwrap().current, 4.0) < 1e-14);
    }

    #[test]
    fn single_particle() {
        for n in [2usize, 4, 8, 16] {
            for q in [-0.1, -0.5, -0.9] {
                for r in [1.0, 0.7] {
                    let m = ModelParams::new(n, 1, q, r).unwrap();
                    let d = diffusion(&m, 1e-14).unwrap();
                    assert!((d.current.current - (2.0 * r - 1.0)).abs() < 1e-13);
                    assert!((d.delta - 1.0).abs() < 1e-12, "N={n} q={q} R={r} Δ={}", d.delta);
                }
            }
        }
    }

    #[test]
    fn matches_rational_small() {
        for (n, p) in [(4usize, 2usize), (6, 3), (7, 6), (10, 5), (12, 9), (5, 5)] {
            for q in [-0.1, -0.5, -0.9] {
                let m = ModelParams::new(n, p, q, 0.7).unwrap();
                let exact = RationalInput::from_model(&m);
                let jd = rational_to_f64(&formulas::current_sum(&exact));
                let dd = rational_to_f64(&formulas::diffusion(&exact));
                let f = diffusion(&m, 1e-15).unwrap();
                assert!(rel(f.current.current, jd) < 1e-12, "J N={n} p={p} q={q}");
                assert!(rel(f.delta, dd) < 1e-10, "Δ N={n} p={p} q={q}: {} vs {}", f.delta, dd);
            }
        }
    }

    #[test]
    fn ln_binomial_small() {
        assert!((ln_binomial(10, 3) - 120f64.ln()).abs() < 1e-14);
        assert_eq!(ln_binomial(5, 0), 0.0);
    }
}
