//! Euler-Maruyama estimate of the first two area moments.
//!
//! Near the absorbing wall the step shrinks like `X²`: `h(X) = dt·clamp((X/x_ref)², floor, 1)`.
//! Without this a start at `α ≪ √dt` overshoots the wall on the first step and the area is
//! dominated by discretisation. All step sizes scale with `dt`, so the absorption bias is
//! still `O(√dt)` and is removed by Richardson over `dt` and `dt/2`.

use std::f64::consts::SQRT_2;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::quad::VasicekParams;
use crate::OuError;

pub const MIN_PATHS: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McOptions {
    pub x_ref: f64,
    pub floor: f64,
    /// Paths still alive after this many steps are dropped and counted.
    pub max_steps: u64,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions { x_ref: 0.3, floor: 1e-6, max_steps: 50_000_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McResult {
    pub alpha: f64,
    pub beta: f64,
    pub dt: f64,
    pub n_paths: u64,
    /// Richardson-extrapolated moments.
    pub a1: f64,
    pub a2: f64,
    pub a1_se: f64,
    pub a2_se: f64,
    /// Raw `(A1, A2)` at `dt` and at `dt/2`.
    pub coarse: [f64; 2],
    pub fine: [f64; 2],
    pub excluded: u64,
}

fn path(v: &VasicekParams, dt: f64, opt: &McOptions, rng: &mut ChaCha8Rng) -> Option<f64> {
    let (mut x, mut area) = (v.alpha, 0.0);
    let inv_ref2 = 1.0 / (opt.x_ref * opt.x_ref);
    for _ in 0..opt.max_steps {
        let h = dt * (x * x * inv_ref2).clamp(opt.floor, 1.0);
        let z: f64 = StandardNormal.sample(rng);
        let next = x - (v.beta + x) * h + (2.0 * h).sqrt() * z;
        if next <= 0.0 {
            // linear interpolation of the crossing inside the step
            area += 0.5 * x * h * x / (x - next);
            return Some(area);
        }
        area += 0.5 * (x + next) * h;
        x = next;
    }
    None
}

struct Level {
    m1: f64,
    m2: f64,
    se1: f64,
    se2: f64,
    excluded: u64,
}

fn level(v: &VasicekParams, dt: f64, n_paths: u64, seed: u64, stream_base: u64, opt: &McOptions) -> Result<Level, OuError> {
    let areas: Vec<Option<f64>> = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream_base + i);
            path(v, dt, opt, &mut rng)
        })
        .collect();
    let kept: Vec<f64> = areas.iter().flatten().copied().collect();
    if kept.len() < 2 {
        return Err(OuError::BadInput(format!("{} of {n_paths} paths hit the step cap", n_paths - kept.len() as u64)));
    }
    let n = kept.len() as f64;
    let moments = |f: &dyn Fn(f64) -> f64| {
        let m = kept.iter().map(|&a| f(a)).sum::<f64>() / n;
        let var = kept.iter().map(|&a| (f(a) - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, (var / n).sqrt())
    };
    let (m1, se1) = moments(&|a| a);
    let (m2, se2) = moments(&|a| a * a);
    Ok(Level { m1, m2, se1, se2, excluded: n_paths - kept.len() as u64 })
}

/// [`area_mc_with`] under the default step-size rule.
pub fn area_mc(alpha: f64, beta: f64, dt: f64, n_paths: u64, seed: u64) -> Result<McResult, OuError> {
    area_mc_with(alpha, beta, dt, n_paths, seed, &McOptions::default())
}

pub fn area_mc_with(alpha: f64, beta: f64, dt: f64, n_paths: u64, seed: u64, opt: &McOptions) -> Result<McResult, OuError> {
    let v = VasicekParams::new(alpha, beta)?;
    let dt_max = 1e-3 * (1.0 / (beta + alpha).abs()).max(1.0);
    if !(dt > 0.0 && dt <= dt_max) {
        return Err(OuError::BadInput(format!("dt must lie in (0, {dt_max:e}] (got {dt:e})")));
    }
    if n_paths < MIN_PATHS {
        return Err(OuError::BadInput(format!("need at least {MIN_PATHS} paths (got {n_paths})")));
    }
    // independent streams for the two levels
    let coarse = level(&v, dt, n_paths, seed, 0, opt)?;
    let fine = level(&v, dt / 2.0, n_paths, seed, n_paths, opt)?;
    let w = 1.0 / (SQRT_2 - 1.0);
    let ext = |c: f64, f: f64| w * (SQRT_2 * f - c);
    let ext_se = |c: f64, f: f64| w * (2.0 * f * f + c * c).sqrt();
    Ok(McResult {
        alpha,
        beta,
        dt,
        n_paths,
        a1: ext(coarse.m1, fine.m1),
        a2: ext(coarse.m2, fine.m2),
        a1_se: ext_se(coarse.se1, fine.se1),
        a2_se: ext_se(coarse.se2, fine.se2),
        coarse: [coarse.m1, coarse.m2],
        fine: [fine.m1, fine.m2],
        excluded: coarse.excluded + fine.excluded,
    })
}
