//! The γ-deformed generator over stable configurations and its Perron root.

use aap_model::{ModelParams, StableConfig, TopplingTable};
use nalgebra::{DMatrix, DVector};

use crate::avalanche::{AvalancheGraph, AvalancheResolvent, Direction, Target};
use crate::OracleError;

pub const DEFAULT_STABLE_CAP: usize = 5000;
pub const DEFAULT_UNSTABLE_CAP: usize = 3000;
pub const GAMMA_WINDOW: f64 = 1e-2;

/// Rows are indexed by the initial configuration, columns by the final one.
#[derive(Debug, Clone)]
pub struct DeformedGenerator {
    pub gamma: f64,
    pub masks: Vec<u64>,
    pub n: usize,
    pub matrix: DMatrix<f64>,
    /// Transfer-operator spectral radius of the avalanche solve.
    pub radius: f64,
}

impl DeformedGenerator {
    pub fn states(&self) -> Vec<StableConfig> {
        self.masks.iter().map(|&m| StableConfig::from_mask(self.n, m)).collect()
    }
}

/// Everything the oracle needs for one parameter set; the avalanche graph is shared by all γ.
#[derive(Debug, Clone)]
pub struct Oracle {
    pub params: ModelParams,
    pub graph: AvalancheGraph,
}

impl Oracle {
    pub fn new(params: &ModelParams) -> Result<Self, OracleError> {
        Self::with_table(params, &params.toppling_table(), DEFAULT_STABLE_CAP)
    }

    /// Any toppling table, e.g. a deliberately broken one.
    pub fn with_table(params: &ModelParams, mu: &TopplingTable, stable_cap: usize) -> Result<Self, OracleError> {
        let graph = AvalancheGraph::build(params.n, params.p, mu, stable_cap, DEFAULT_UNSTABLE_CAP)?;
        Ok(Oracle { params: *params, graph })
    }

    pub fn state_count(&self) -> usize {
        self.graph.stable.len()
    }

    /// Accumulates `Σ_seeds rate · e^{±γ} X[seed]` into a matrix, given the three
    /// per-seed blocks (value, first and second derivative in γ).
    fn assemble(&self, res: &AvalancheResolvent, order: usize) -> DMatrix<f64> {
        let g = &self.graph;
        let s = g.stable.len();
        let mut q = DMatrix::zeros(s, s);
        for (c, &mask) in g.stable.iter().enumerate() {
            for site in (0..g.n).filter(|&i| mask >> i & 1 == 1) {
                for (dir, rate) in [(Direction::Right, self.params.r), (Direction::Left, self.params.l)] {
                    if rate == 0.0 {
                        continue;
                    }
                    let eps = dir.sign() as f64;
                    let e = (eps * res.gamma).exp();
                    match g.seed(c, site, dir) {
                        Target::Stable(t) => q[(c, t)] += rate * e * eps.powi(order as i32),
                        Target::Unstable(u) => {
                            for t in 0..s {
                                let (x, dx, d2x) = (res.x[(u, t)], res.dx[(u, t)], res.d2x[(u, t)]);
                                // derivatives of e^{εγ} X(γ)
                                let v = match order {
                                    0 => x,
                                    1 => eps * x + dx,
                                    _ => x + 2.0 * eps * dx + d2x,
                                };
                                q[(c, t)] += rate * e * v;
                            }
                        }
                    }
                }
            }
        }
        if order == 0 {
            for c in 0..s {
                q[(c, c)] -= self.params.p as f64;
            }
        }
        q
    }

    pub fn build_generator(&self, gamma: f64) -> Result<DeformedGenerator, OracleError> {
        let res = AvalancheResolvent::solve(&self.graph, gamma)?;
        Ok(DeformedGenerator {
            gamma,
            masks: self.graph.stable.clone(),
            n: self.graph.n,
            matrix: self.assemble(&res, 0),
            radius: res.radius,
        })
    }

    /// Max over columns of `|(u Q(0))_j|` for the uniform row vector `u`.
    pub fn stationarity_residual(&self) -> Result<f64, OracleError> {
        let gen = self.build_generator(0.0)?;
        let s = gen.matrix.nrows() as f64;
        let row = gen.matrix.row_sum() / s;
        Ok(row.amax())
    }

    pub fn row_sum_residual(&self) -> Result<f64, OracleError> {
        let gen = self.build_generator(0.0)?;
        Ok(gen.matrix.column_sum().amax())
    }

    /// `J/p`: mean signed displacement per seeding jump under the uniform measure,
    /// from the derivative of the avalanche weights.
    pub fn mean_avalanche_size(&self) -> Result<f64, OracleError> {
        let res = AvalancheResolvent::solve(&self.graph, 0.0)?;
        let g = &self.graph;
        let mut acc = 0.0;
        for (c, &mask) in g.stable.iter().enumerate() {
            for site in (0..g.n).filter(|&i| mask >> i & 1 == 1) {
                for (dir, rate) in [(Direction::Right, self.params.r), (Direction::Left, self.params.l)] {
                    acc += rate * crate::avalanche::expected_displacement(g, &res, c, site, dir);
                }
            }
        }
        Ok(acc / (g.stable.len() * g.p) as f64)
    }

    pub fn lambda(&self, gamma: f64) -> Result<f64, OracleError> {
        lambda_of_gamma(&self.build_generator(gamma)?)
    }

    /// Central differences at `h` and `h/2`, Richardson-extrapolated.
    pub fn cumulants_fd(&self, h: f64) -> Result<FdCumulants, OracleError> {
        if h <= 0.0 || h > GAMMA_WINDOW {
            return Err(OracleError::GammaWindow { h, window: GAMMA_WINDOW });
        }
        let l0 = self.lambda(0.0)?;
        let stencil = |h: f64| -> Result<(f64, f64), OracleError> {
            let (lp, lm) = (self.lambda(h)?, self.lambda(-h)?);
            Ok(((lp - lm) / (2.0 * h), (lp - 2.0 * l0 + lm) / (h * h)))
        };
        let (j1, d1) = stencil(h)?;
        let (j2, d2) = stencil(h / 2.0)?;
        let j = (4.0 * j2 - j1) / 3.0;
        let delta = (4.0 * d2 - d1) / 3.0;
        Ok(FdCumulants { j, delta, err_j: (j - j2).abs(), err_delta: (delta - d2).abs(), lambda0: l0 })
    }

    /// `λ'(0)` and `λ''(0)` from first- and second-order perturbation of the Perron root,
    /// with the derivative matrices built from exact avalanche-weight derivatives.
    pub fn cumulants_perturbative(&self) -> Result<(f64, f64), OracleError> {
        let res = AvalancheResolvent::solve(&self.graph, 0.0)?;
        let q0 = self.assemble(&res, 0);
        let q1 = self.assemble(&res, 1);
        let q2 = self.assemble(&res, 2);
        let s = q0.nrows();
        let pi = DVector::from_element(s, 1.0 / s as f64);
        let one = DVector::from_element(s, 1.0);
        let j = pi.dot(&(&q1 * &one));
        // Q0 v = j 1 - Q1 1 with π v = 0, solved through the rank-one completion Q0 + 1 π^T
        let rhs = &one * j - &q1 * &one;
        let completed = &q0 + &one * pi.transpose();
        let v = completed.lu().solve(&rhs).ok_or(OracleError::Singular)?;
        let delta = pi.dot(&(&q2 * &one)) + 2.0 * pi.dot(&(&q1 * &v));
        Ok((j, delta))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdCumulants {
    pub j: f64,
    pub delta: f64,
    pub err_j: f64,
    pub err_delta: f64,
    pub lambda0: f64,
}

/// Eigenvalue of maximal real part, refined by one Rayleigh quotient with left and right
/// vectors from inverse iteration.
pub fn lambda_of_gamma(gen: &DeformedGenerator) -> Result<f64, OracleError> {
    let m = &gen.matrix;
    let s = m.nrows();
    if s == 1 {
        return Ok(m[(0, 0)]);
    }
    let eig = m.clone().complex_eigenvalues();
    let mut best = eig.iter().max_by(|a, b| a.re.total_cmp(&b.re)).ok_or(OracleError::Eigen)?.re;
    if !best.is_finite() {
        return Err(OracleError::Eigen);
    }
    // keep the shift off the eigenvalue itself so the iteration matrix stays invertible
    let shift = best + 1e-9 * (1.0 + best.abs());
    let lu = (m - DMatrix::identity(s, s) * shift).lu();
    let lut = (m.transpose() - DMatrix::identity(s, s) * shift).lu();
    let mut v = DVector::from_element(s, 1.0);
    let mut u = DVector::from_element(s, 1.0);
    for _ in 0..3 {
        v = lu.solve(&v).ok_or(OracleError::Eigen)?;
        v /= v.norm();
        u = lut.solve(&u).ok_or(OracleError::Eigen)?;
        u /= u.norm();
    }
    let denom = u.dot(&v);
    if denom.abs() > 1e-8 {
        best = u.dot(&(m * &v)) / denom;
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oracle(n: usize, p: usize, q: f64, r: f64) -> Oracle {
        Oracle::new(&ModelParams::new(n, p, q, r).unwrap()).unwrap()
    }

    #[test]
    fn stochastic_at_zero() {
        for (n, p, q, r) in [(4, 2, -0.5, 1.0), (6, 3, -0.4, 0.7), (7, 5, -0.9, 0.2)] {
            let o = oracle(n, p, q, r);
            assert!(o.row_sum_residual().unwrap() < 1e-13);
            assert!(o.stationarity_residual().unwrap() < 1e-12);
            assert!(o.lambda(0.0).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn four_two_current() {
        let o = oracle(4, 2, -0.5, 1.0);
        let lam = o.lambda(1e-4).unwrap();
        assert!((lam / 1e-4 - 4.0).abs() < 1e-2);
        let fd = o.cumulants_fd(1e-3).unwrap();
        assert!((fd.j - 4.0).abs() < 1e-8, "{fd:?}");
        assert!((o.mean_avalanche_size().unwrap() * 2.0 - 4.0).abs() < 1e-12);
        let (j, d) = o.cumulants_perturbative().unwrap();
        assert!((j - 4.0).abs() < 1e-12);
        assert!((d - fd.delta).abs() < 1e-6 * d, "{d} vs {}", fd.delta);
    }

    #[test]
    fn one_particle() {
        for n in [4, 8] {
            let (j, d) = oracle(n, 1, -0.5, 0.7).cumulants_perturbative().unwrap();
            assert!((j - 0.4).abs() < 1e-13);
            assert!((d - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn any_admissible_table_keeps_uniform_measure() {
        let m = ModelParams::new(5, 3, -0.5, 1.0).unwrap();
        for t in [[0.0, 0.9, 0.1], [0.0, 0.5, 0.999]] {
            let o = Oracle::with_table(&m, &TopplingTable::from_values(&t), DEFAULT_STABLE_CAP).unwrap();
            assert!(o.stationarity_residual().unwrap() < 1e-13);
        }
    }

    #[test]
    fn broken_table_never_terminates() {
        // μ_2 = 1: a pair always moves together and the avalanche runs forever
        let m = ModelParams::new(5, 3, -0.5, 1.0).unwrap();
        let o = Oracle::with_table(&m, &TopplingTable::from_values(&[0.0, 1.0, 0.25]), DEFAULT_STABLE_CAP).unwrap();
        assert!(matches!(o.stationarity_residual(), Err(OracleError::NotConvergent { .. })));
    }

    #[test]
    fn window_enforced() {
        assert!(matches!(oracle(4, 2, -0.5, 1.0).cumulants_fd(0.5), Err(OracleError::GammaWindow { .. })));
    }
}
