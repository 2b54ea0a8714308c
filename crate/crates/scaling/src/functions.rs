//! `erfcx` and the three crossover functions.

use std::f64::consts::PI;

use errorfunctions::RealErrorFunctions;

use crate::ScalingError;

/// Below this `F(β)` exceeds the double range.
pub const F_BETA_MIN: f64 = -38.0;

const SQRT_2: f64 = std::f64::consts::SQRT_2;
/// Above this `F` and `G` come from their asymptotic series; the closed forms cancel.
const ASYMPTOTIC_BETA: f64 = 20.0;
const J_SERIES_CUT: f64 = 1e-6;
const TAIL_LENGTH: f64 = 40.0;
const TAIL_PANELS: usize = 20;
const TAIL_RTOL: f64 = 1e-10;

/// `e^{x²} erfc(x)`.
pub fn erfcx(x: f64) -> f64 {
    x.erfcx()
}

/// `F(β) = 1 - √(π/2) β e^{β²/2} erfc(β/√2)`.
pub fn f_beta(beta: f64) -> Result<f64, ScalingError> {
    if beta.is_nan() {
        return Err(ScalingError::Domain("beta is NaN".into()));
    }
    if beta < F_BETA_MIN {
        return Err(ScalingError::Overflow(beta));
    }
    if beta >= ASYMPTOTIC_BETA {
        return Ok(large_beta_series(beta, |_| 1.0));
    }
    let f = 1.0 - (PI / 2.0).sqrt() * beta * erfcx(beta / SQRT_2);
    if f.is_finite() {
        Ok(f)
    } else {
        Err(ScalingError::Overflow(beta))
    }
}

/// `G(β) = √π (2F(√2 β) - F(β))`.
pub fn g_beta(beta: f64) -> Result<f64, ScalingError> {
    if beta >= ASYMPTOTIC_BETA {
        // the k = 1 terms of 2F(√2β) and F(β) cancel exactly
        return Ok(PI.sqrt() * large_beta_series(beta, |k| 2f64.powi(1 - k) - 1.0));
    }
    Ok(PI.sqrt() * (2.0 * f_beta(SQRT_2 * beta)? - f_beta(beta)?))
}

/// `Σ_{k>=1} (-1)^{k+1} (2k-1)!! w(k) β^{-2k}`, summed until the terms stop shrinking.
fn large_beta_series(beta: f64, w: impl Fn(i32) -> f64) -> f64 {
    let x = 1.0 / (beta * beta);
    let (mut sum, mut t, mut last) = (0.0f64, 1.0f64, f64::INFINITY);
    for k in 1..200 {
        t *= -(2 * k - 1) as f64 * x;
        let term = -t * w(k);
        if term.abs() > last || (sum != 0.0 && term.abs() <= 1e-17 * sum.abs()) {
            break;
        }
        if term != 0.0 {
            last = term.abs();
        }
        sum += term;
    }
    sum
}

/// `e^{β²/2} ∫_β^∞ e^{x²/2} erfc(x/√2)² dx`, integrated as `∫ e^{(β²-x²)/2} erfcx(x/√2)²`
/// panel by panel over `[β, β+40]`.
fn tail_integral(beta: f64) -> Result<f64, ScalingError> {
    let g = |x: f64| ((beta * beta - x * x) / 2.0).exp() * erfcx(x / SQRT_2).powi(2);
    let scale = g(beta);
    if !scale.is_finite() {
        return Err(ScalingError::Overflow(beta));
    }
    let h = TAIL_LENGTH / TAIL_PANELS as f64;
    let (mut total, mut err) = (0.0, 0.0);
    for k in 0..TAIL_PANELS {
        let a = beta + k as f64 * h;
        let o = quadrature::double_exponential::integrate(g, a, a + h, 1e-15 * scale);
        total += o.integral;
        err += o.error_estimate;
    }
    if err > TAIL_RTOL * total.abs() {
        return Err(ScalingError::Quadrature { beta, error: err });
    }
    Ok(total)
}

/// `J(β) = 2(1-F)/β - 4βF + πβ² e^{β²/2} ∫_β^∞ e^{x²/2} erfc(x/√2)² dx`; near zero the
/// removable singularity is replaced by `√(2π) - 6β`.
pub fn j_beta(beta: f64) -> Result<f64, ScalingError> {
    if beta.abs() < J_SERIES_CUT {
        return Ok((2.0 * PI).sqrt() - 6.0 * beta);
    }
    let f = f_beta(beta)?;
    // 2(1-F)/β written without the cancellation
    let first = (2.0 * PI).sqrt() * erfcx(beta / SQRT_2);
    let v = first - 4.0 * beta * f + PI * beta * beta * tail_integral(beta)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ScalingError::Overflow(beta))
    }
}

fn xlogx_ratio(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * (x / y).ln()
    }
}

/// Bernoulli relative entropy `s(ρ|ρ_c) = (1-ρ) ln((1-ρ)/(1-ρ_c)) + ρ ln(ρ/ρ_c)`.
pub fn rel_entropy(rho: f64, rho_c: f64) -> Result<f64, ScalingError> {
    if !(0.0..=1.0).contains(&rho) || !(rho_c > 0.0 && rho_c < 1.0) {
        return Err(ScalingError::Domain(format!("need 0 <= rho <= 1 and 0 < rho_c < 1 (got {rho}, {rho_c})")));
    }
    Ok(xlogx_ratio(1.0 - rho, 1.0 - rho_c) + xlogx_ratio(rho, rho_c))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erfcx_anchors() {
        assert_eq!(erfcx(0.0), 1.0);
        let x: f64 = 50.0;
        let series = (1.0 - 1.0 / (2.0 * x * x) + 3.0 / (4.0 * x.powi(4)) - 15.0 / (8.0 * x.powi(6))) / (x * PI.sqrt());
        assert!((erfcx(x) / series - 1.0).abs() < 1e-10);
        assert!((erfcx(1e4) * 1e4 * PI.sqrt() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn f_edges() {
        assert_eq!(f_beta(0.0).unwrap(), 1.0);
        assert!(matches!(f_beta(-38.5), Err(ScalingError::Overflow(_))));
        assert!(f_beta(-37.0).unwrap().is_finite());
        assert!(f_beta(1e4).unwrap() > 0.0);
    }

    #[test]
    fn j_is_continuous_across_series_cut() {
        for b in [J_SERIES_CUT, -J_SERIES_CUT] {
            let outer = j_beta(1.01 * b).unwrap();
            let series = (2.0 * PI).sqrt() - 6.0 * 1.01 * b;
            assert!((series - outer).abs() < 1e-10, "{series} vs {outer}");
        }
    }

    #[test]
    fn series_and_closed_forms_agree_at_switch() {
        let b = ASYMPTOTIC_BETA;
        let closed_f = 1.0 - (PI / 2.0).sqrt() * b * erfcx(b / SQRT_2);
        assert!((f_beta(b).unwrap() / closed_f - 1.0).abs() < 1e-12);
        let closed_g = PI.sqrt() * (2.0 * f_beta(SQRT_2 * b).unwrap() - (1.0 - (PI / 2.0).sqrt() * b * erfcx(b / SQRT_2)));
        assert!((g_beta(b).unwrap() / closed_g - 1.0).abs() < 1e-7);
    }

    #[test]
    fn entropy_limits() {
        assert_eq!(rel_entropy(0.3, 0.3).unwrap(), 0.0);
        assert!((rel_entropy(1.0, 2.0 / 3.0).unwrap() - 1.5f64.ln()).abs() < 1e-15);
        assert!(rel_entropy(0.5, 1.0).is_err());
    }
}
