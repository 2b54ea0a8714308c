//! The acceptance checks. Each returns a [`CheckResult`] with what was measured and what
//! was required; `Level::Quick` trims the sampling-heavy parts to keep the suite near a
//! minute, `Level::Full` runs everything at the stated tolerances.

use std::f64::consts::PI;
use std::time::Instant;

use aap_exact::formulas::{self, i_npk, rat, rational_to_f64};
use aap_exact::series::{contour_moment, PartitionData, TruncatedSeries};
use aap_exact::{float, RationalInput, Side};
use aap_model::{ModelParams, TopplingTable};
use aap_oracle::generator::DEFAULT_STABLE_CAP;
use aap_oracle::{verify_tq, Oracle};
use aap_ou::{area_mc, area_moments};
use aap_scaling::{
    asymptotic_current_with, asymptotic_diffusion_with, crossover_current_correction, f_beta, g_beta, j_beta, kpz_finite_size_check,
    kpz_invariant_check, rel_entropy, Mode, Regime,
};
use aap_sim::{chi_walk_stats, daap_balance, daap_limit, estimate_cumulants, estimate_cumulants_with, SimConfig};

use crate::record::Record;

/// Seed shared by every sampling check; fixed before any result was looked at.
pub const SUITE_SEED: u64 = 12345;

pub const ALL_IDS: &[&str] = &["stationarity", "C1", "C2", "C3", "C4", "C5", "C6", "C7", "C8", "C9", "C10", "C11", "C12"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Quick,
    Full,
}

impl Level {
    pub fn as_str(&self) -> &'static str {
        match self {
            Level::Quick => "quick",
            Level::Full => "full",
        }
    }
}

pub fn ids_for(level: Level) -> &'static [&'static str] {
    match level {
        // Monte Carlo moments and the 10⁵-avalanche walk are left to the full suite
        Level::Quick => &["stationarity", "C1", "C2", "C3", "C4", "C5", "C6", "C7", "C8", "C9", "C10", "C11"],
        Level::Full => ALL_IDS,
    }
}

/// Deliberate defects for testing the suite itself.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Faults {
    /// Replaces `μ_2` in the table used by the stationarity check. Any admissible value
    /// leaves the uniform measure stationary; `1` makes avalanches run forever.
    pub mu2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub rows: Vec<Record>,
}

impl Table {
    pub fn render(&self) -> Vec<String> {
        let mut out = vec![format!("  table {}", self.name)];
        for r in &self.rows {
            let cells: Vec<String> = r
                .0
                .iter()
                .filter(|(k, _)| k != "table")
                .map(|(k, v)| match v {
                    crate::Value::Float(x) => format!("{k}={x:.6e}"),
                    crate::Value::Int(i) => format!("{k}={i}"),
                    crate::Value::Str(s) => format!("{k}={s}"),
                    other => format!("{k}={other:?}"),
                })
                .collect();
            out.push(format!("    {}", cells.join("  ")));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub id: String,
    pub name: &'static str,
    pub passed: bool,
    pub measured: String,
    pub expected: String,
    pub seconds: f64,
    pub tables: Vec<Table>,
}

impl CheckResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:<12} {:<34} measured: {} | expected: {} ({:.1} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.measured,
            self.expected,
            self.seconds
        )
    }

    pub fn to_record(&self) -> Record {
        Record::new()
            .with("table", "checks")
            .with("id", self.id.as_str())
            .with("name", self.name)
            .with("passed", self.passed)
            .with("measured", self.measured.as_str())
            .with("expected", self.expected.as_str())
            .with("seconds", self.seconds)
    }
}

/// Outcome of a check body; any library error counts as a failure.
struct Body {
    passed: bool,
    measured: String,
    expected: String,
    tables: Vec<Table>,
}

type BodyResult = Result<Body, String>;

fn body(passed: bool, measured: String, expected: &str) -> BodyResult {
    Ok(Body { passed, measured, expected: expected.to_string(), tables: vec![] })
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn rel(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs()
}

fn decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

fn params(n: usize, p: usize, q: f64, r: f64) -> Result<ModelParams, String> {
    ModelParams::new(n, p, q, r).map_err(err)
}

pub fn run_check(id: &str, level: Level, faults: &Faults) -> CheckResult {
    let start = Instant::now();
    let (name, out): (&'static str, BodyResult) = match id {
        "stationarity" => ("uniform measure is stationary", stationarity(faults)),
        "C1" => ("p=1 closed forms", c1()),
        "C2" => ("three-way agreement at (4,2)", c2()),
        "C3" => ("contour identity suite", c3()),
        "C4" => ("T-Q polynomial identities", c4()),
        "C5" => ("crossover convergence, current", c5()),
        "C6" => ("crossover convergence, diffusion", c6()),
        "C7" => ("three-regime asymptotics", c7()),
        "C8" => ("KPZ consistency", c8()),
        "C9" => ("scaling-function anchors", c9()),
        "C10" => ("OU area moments vs F and J", c10(level)),
        "C11" => ("discrete-time variant", c11()),
        "C12" => ("avalanche-walk statistics", c12()),
        _ => ("unknown check", Err(format!("no check named {id:?}"))),
    };
    let seconds = start.elapsed().as_secs_f64();
    match out {
        Ok(b) => CheckResult { id: id.into(), name, passed: b.passed, measured: b.measured, expected: b.expected, seconds, tables: b.tables },
        Err(e) => CheckResult { id: id.into(), name, passed: false, measured: format!("error: {e}"), expected: "no error".into(), seconds, tables: vec![] },
    }
}

fn table_with(mu2: Option<f64>, p: usize, q: f64) -> TopplingTable {
    let t = TopplingTable::integrable(p, q);
    match mu2 {
        None => t,
        Some(v) => {
            let mut vals: Vec<f64> = (1..=t.max_n()).map(|n| t.mu(n)).collect();
            if vals.len() > 1 {
                vals[1] = v;
            }
            TopplingTable::from_values(&vals)
        }
    }
}

fn stationarity(faults: &Faults) -> BodyResult {
    let mut worst = 0.0f64;
    for (n, p) in [(4, 2), (5, 3), (6, 3), (7, 4)] {
        for r in [1.0, 0.7] {
            let m = params(n, p, -0.5, r)?;
            let table = table_with(faults.mu2, p, m.q);
            table.validate().map_err(err)?;
            let o = Oracle::with_table(&m, &table, DEFAULT_STABLE_CAP).map_err(err)?;
            worst = worst.max(o.stationarity_residual().map_err(err)?);
        }
    }
    body(worst < 1e-12, format!("max |u·Q| = {worst:.2e}"), "< 1e-12 on (4,2),(5,3),(6,3),(7,4) x R in {1, 0.7}")
}

fn c1() -> BodyResult {
    let (mut worst_exact, mut worst_oracle, mut worst_z) = (0.0f64, 0.0f64, 0.0f64);
    let mut idx = 0;
    for n in [4usize, 8, 16] {
        for q in [-0.1, -0.5, -0.9] {
            for r in [1.0, 0.7] {
                let m = params(n, 1, q, r)?;
                let (j0, d0) = (m.r - m.l, m.r + m.l);
                let inp = RationalInput::from_model(&m);
                let (je, de) = (rational_to_f64(&formulas::current_sum(&inp)), rational_to_f64(&formulas::diffusion(&inp)));
                worst_exact = worst_exact.max(rel(je, j0)).max(rel(de, d0));
                let fd = Oracle::new(&m).map_err(err)?.cumulants_fd(1e-3).map_err(err)?;
                worst_oracle = worst_oracle.max(rel(fd.j, j0)).max(rel(fd.delta, d0));
                let c = estimate_cumulants(&m, 2e5, 100, SUITE_SEED + idx).map_err(err)?;
                worst_z = worst_z.max((c.j_hat - j0).abs() / c.j_se).max((c.delta_hat - d0).abs() / c.delta_se);
                idx += 1;
            }
        }
    }
    body(
        worst_exact < 1e-8 && worst_oracle < 1e-8 && worst_z <= 3.0,
        format!("exact rel {worst_exact:.1e}, oracle rel {worst_oracle:.1e}, simulation max |z| {worst_z:.2}"),
        "J = R-L, Delta = R+L; exact/oracle rel < 1e-8; simulation |z| <= 3",
    )
}

fn c2() -> BodyResult {
    let m = params(4, 2, -0.5, 1.0)?;
    let inp = RationalInput::new(4, 2, rat(-1, 2), rat(1, 1));
    let j_exact = formulas::current_sum(&inp);
    let d_exact = rational_to_f64(&formulas::diffusion(&inp));
    let o = Oracle::new(&m).map_err(err)?;
    let j_avg = o.mean_avalanche_size().map_err(err)? * 2.0;
    let fd = o.cumulants_fd(1e-3).map_err(err)?;
    let c = estimate_cumulants_with(&m, 5e5, 200, SUITE_SEED, 4, &SimConfig::default()).map_err(err)?;
    let zj = (c.j_hat - 4.0).abs() / c.j_se;
    let zd = (c.delta_hat - d_exact).abs() / c.delta_se;
    let ok = j_exact == rat(4, 1) && (j_avg - 4.0).abs() < 1e-10 && (fd.j - 4.0).abs() < 1e-8 && zj <= 3.0 && rel(fd.delta, d_exact) < 1e-6 && zd <= 4.0;
    body(
        ok,
        format!(
            "J: exact {j_exact}, stationary avg {j_avg:.12}, oracle {:.12}, sim z {zj:.2}; Delta: exact {d_exact:.10}, oracle rel {:.1e}, sim z {zd:.2}",
            fd.j,
            rel(fd.delta, d_exact)
        ),
        "J = 4 four ways (sim within 3 s.e.); Delta oracle rel < 1e-6, sim within 4 s.e.",
    )
}

fn choose(n: usize, k: usize) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i + 1) as i64)
}

fn c3() -> BodyResult {
    let zero = rat(0, 1);
    let mut failures = vec![];
    for (n, p) in [(4usize, 2usize), (6, 4), (9, 6), (10, 3)] {
        let pd = PartitionData::new(n, p);
        if contour_moment(&TruncatedSeries::constant(rat(1, 1), p), &pd).map_err(err)? != rat(1, 1) {
            failures.push(format!("normalisation at ({n},{p})"));
        }
    }
    for (n, p, q, r) in [(4usize, 2usize, rat(-1, 2), rat(1, 2)), (6, 4, rat(-3, 10), rat(1, 2)), (7, 3, rat(-1, 2), rat(1, 1)), (9, 6, rat(-1, 2), rat(3, 10))] {
        let inp = RationalInput::new(n, p, q, r);
        for side in [Side::Right, Side::Left] {
            if formulas::a_moment(&inp, side) != zero {
                failures.push(format!("vanishing moment at ({n},{p},{side:?})"));
            }
            if formulas::doubling_residual(&inp, side) != zero {
                failures.push(format!("doubling at ({n},{p},{side:?})"));
            }
        }
    }
    let q = rat(-1, 2);
    for (n, p) in [(3usize, 2usize), (6, 4), (9, 6)] {
        let expect = rat(p as i64 * choose(n, p), 1) / (rat(1, 1) - q.clone());
        if i_npk(n, p, 2, &q) != expect {
            failures.push(format!("critical identity at ({n},{p})"));
        }
    }
    let measured = if failures.is_empty() { "all residuals exactly 0 in rational arithmetic".to_string() } else { failures.join("; ") };
    body(failures.is_empty(), measured, "normalisation = 1, vanishing and doubling residuals = 0, I_{N,p,2} = pC(N,p)/(1-q)")
}

fn c4() -> BodyResult {
    let mut failures = vec![];
    let mut count = 0;
    for (n, p) in [(3usize, 1usize), (4, 2), (5, 2), (6, 3)] {
        for (a, b) in [(-1i64, 2i64), (-1, 3)] {
            for (rn, rd) in [(1i64, 1i64), (3, 10)] {
                let (q, r) = (rat(a, b), rat(rn, rd));
                let check = verify_tq(n, p, &q, &r).map_err(err)?;
                let inp = RationalInput::new(n, p, q, r);
                count += 1;
                if !check.is_exact() {
                    failures.push(format!("residual at ({n},{p},{a}/{b})"));
                }
                if check.lambda1 != formulas::current_sum(&inp) || check.lambda2.clone() * rat(2, 1) != formulas::diffusion(&inp) {
                    failures.push(format!("cumulants at ({n},{p},{a}/{b},R={rn}/{rd})"));
                }
            }
        }
    }
    let measured = if failures.is_empty() { format!("{count} cases: residuals 0, lambda1 = J and 2 lambda2 = Delta exactly") } else { failures.join("; ") };
    body(failures.is_empty(), measured, "order-1 and order-2 residuals identically zero; cumulants equal exactly")
}

const Q: f64 = -0.5;
const RC: f64 = 2.0 / 3.0;
const LADDER: [usize; 3] = [99, 399, 1599];

fn at_beta(n: usize, beta: f64, r: f64) -> Result<ModelParams, String> {
    let rho = RC - beta * (RC * (1.0 - RC) / n as f64).sqrt();
    params(n, (rho * n as f64).round() as usize, Q, r)
}

fn c5() -> BodyResult {
    let mut ok = true;
    let mut parts = vec![];
    for r in [1.0, 0.3] {
        for beta in [1.0, 0.0] {
            let mut dev = vec![];
            for n in LADDER {
                let m = at_beta(n, beta, r)?;
                let b = m.beta();
                let corr = crossover_current_correction(n, b, Q).map_err(err)?;
                if beta == 0.0 {
                    ok &= b == 0.0 && corr == 0.0;
                }
                let scaled = float::current(&m).map_err(err)?.current / (n as f64 * n as f64 * m.k_factor());
                let raw = scaled - f_beta(b).map_err(err)?;
                dev.push((raw - corr).abs());
                if beta != 0.0 && n == 1599 {
                    // the correction has to absorb the O(N^{-1/2}) part
                    ok &= (raw - corr).abs() < 0.2 * raw.abs();
                }
            }
            let n_dev: Vec<f64> = dev.iter().zip(LADDER).map(|(d, n)| d * n as f64).collect();
            ok &= decreasing(&dev) && n_dev.iter().all(|&x| x < 1.0);
            parts.push(format!("R={r} beta={beta}: N*dev {:.3}/{:.3}/{:.3}", n_dev[0], n_dev[1], n_dev[2]));
        }
    }
    body(ok, parts.join("; "), "dev decreasing, N*dev < 1, correction removes >= 80% of the beta=1 deviation at N=1599")
}

fn c6() -> BodyResult {
    let mut ok = true;
    let mut parts = vec![];
    for beta in [0.0, 1.0, -1.0] {
        let mut dev = vec![];
        for n in LADDER {
            let m = at_beta(n, beta, 1.0)?;
            let nf = n as f64;
            let d = float::diffusion(&m, 1e-13).map_err(err)?.delta / (nf * nf);
            let scaled = d / (nf.powf(1.5) * m.k_factor() * (RC * (1.0 - RC)).sqrt());
            dev.push((scaled / g_beta(m.beta()).map_err(err)? - 1.0).abs());
        }
        let s_dev: Vec<f64> = dev.iter().zip(LADDER).map(|(d, n)| d * (n as f64).sqrt()).collect();
        ok &= decreasing(&dev) && s_dev.iter().all(|&x| x < 2.0) && dev[0] / dev[2] > 3.0;
        parts.push(format!("beta={beta}: sqrt(N)*dev {:.3}/{:.3}/{:.3}", s_dev[0], s_dev[1], s_dev[2]));
    }
    body(ok, parts.join("; "), "dev decreasing, sqrt(N)*dev < 2, dev(99)/dev(1599) > 3")
}

fn regime_row(n: usize, m: &ModelParams, regime: Regime, quantity: &str, exact: f64, log_asym: f64) -> Record {
    Record::new()
        .with("table", "regimes")
        .with("N", n)
        .with("p", m.p)
        .with("rho", m.rho)
        .with("regime", regime.as_str())
        .with("quantity", quantity)
        .with("exact_log", exact.ln())
        .with("asymptotic_log", log_asym)
        .with("rel_error", (exact.ln() - log_asym).exp_m1().abs())
}

fn c7() -> BodyResult {
    let mut rows = vec![];
    let (mut sub_j, mut sub_d, mut sup_j, mut sup_d, mut logs) = (vec![], vec![], vec![], vec![], vec![]);
    let exact = |m: &ModelParams| -> Result<(f64, f64), String> {
        let nf = m.n as f64;
        Ok((float::current(m).map_err(err)?.current / nf, float::diffusion(m, 1e-13).map_err(err)?.delta / (nf * nf)))
    };
    for n in [100usize, 200, 400] {
        for (regime, p) in [(Regime::Sub, 2 * n / 5), (Regime::Super, 4 * n / 5)] {
            let m = params(n, p, Q, 1.0)?;
            let (j, d) = exact(&m)?;
            let aj = asymptotic_current_with(&m, Mode::Force(regime)).map_err(err)?.log_value;
            let ad = asymptotic_diffusion_with(&m, Mode::Force(regime)).map_err(err)?.log_value;
            let (ej, ed) = ((j.ln() - aj).abs(), (d.ln() - ad).abs());
            if regime == Regime::Sub {
                sub_j.push(ej.exp_m1());
                sub_d.push(ed.exp_m1());
            } else {
                sup_j.push(ej);
                sup_d.push(ed);
                logs.push((j.ln() - 1.5 * (n as f64).ln(), d.ln() - 2.0 * (n as f64).ln()));
            }
            rows.push(regime_row(n, &m, regime, "j", j, aj));
            rows.push(regime_row(n, &m, regime, "Delta", d, ad));
        }
    }
    // critical rows for the table only
    for n in [99usize, 201, 399] {
        let m = params(n, 2 * n / 3, Q, 1.0)?;
        let (j, d) = exact(&m)?;
        let aj = asymptotic_current_with(&m, Mode::Force(Regime::Critical)).map_err(err)?.log_value;
        let ad = asymptotic_diffusion_with(&m, Mode::Force(Regime::Critical)).map_err(err)?.log_value;
        rows.push(regime_row(n, &m, Regime::Critical, "j", j, aj));
        rows.push(regime_row(n, &m, Regime::Critical, "Delta", d, ad));
    }
    let s = rel_entropy(0.8, RC).map_err(err)?;
    let slope_j = (logs[2].0 - logs[1].0) / 200.0;
    let slope_d = (logs[2].1 - logs[1].1) / 200.0;
    let (ej, ed) = (rel(slope_j, s), rel(slope_d, 2.0 * s));
    let ok = [&sub_j, &sub_d, &sup_j, &sup_d].iter().all(|v| decreasing(v)) && ej < 0.01 && ed < 0.01;
    let measured = format!(
        "sub rel err j {:.1e}->{:.1e}, Delta {:.1e}->{:.1e}; super log err j {:.1e}->{:.1e}, Delta {:.1e}->{:.1e}; slope/s - 1 = {ej:.1e}, {ed:.1e}",
        sub_j[0], sub_j[2], sub_d[0], sub_d[2], sup_j[0], sup_j[2], sup_d[0], sup_d[2]
    );
    let mut b = body(ok, measured, "errors shrink along N in {100,200,400}; log-slopes within 1% of s and 2s")?;
    b.tables.push(Table { name: "regimes".into(), rows });
    Ok(b)
}

fn c8() -> BodyResult {
    let mut worst = 0.0f64;
    for rho in [0.3, 0.4, 0.5] {
        worst = worst.max(kpz_invariant_check(rho, Q, 1.0, 0.0).map_err(err)?.residual);
    }
    let f = kpz_finite_size_check(400, 200, Q, 1.0).map_err(err)?;
    body(
        worst < 1e-3 && f.residual < 0.01,
        format!("amplitude residual {worst:.1e}; b estimate {:.6} vs -A lambda/2 = {:.6} (rel {:.1e})", f.b_estimate, f.b_predicted, f.residual),
        "amplitude residual < 1e-3 at rho in {0.3,0.4,0.5}; b within 1% at rho = 0.5 (N = 400, 800, 1600)",
    )
}

fn c9() -> BodyResult {
    let e = |x: Result<f64, aap_scaling::ScalingError>| x.map_err(err);
    let anchors = [(e(f_beta(0.0))? - 1.0).abs(), (e(g_beta(0.0))? - PI.sqrt()).abs(), (e(j_beta(0.0))? - (2.0 * PI).sqrt()).abs()];
    let worst_anchor = anchors.iter().cloned().fold(0.0, f64::max);
    let b = 8.0f64;
    // (remainder, bound) pairs: the next omitted order of each expansion. The two-term
    // negative-side form of G is taken at -3, where e^{β²} still leaves the O(1) remainder
    // above round-off.
    let g3 = e(g_beta(-3.0))?;
    let g_two = -4.0 * PI * -3.0 * 9f64.exp() + 2f64.sqrt() * PI * -3.0 * 4.5f64.exp();
    let checks = [
        ((e(f_beta(b))? - (1.0 / (b * b) - 3.0 / b.powi(4))).abs(), 15.0 / b.powi(6)),
        ((e(g_beta(b))? - 1.5 * PI.sqrt() / b.powi(4)).abs(), 50.0 * PI.sqrt() / b.powi(6)),
        ((e(j_beta(b))? - 10.0 / b.powi(5)).abs(), 130.0 / b.powi(7)),
        ((e(j_beta(-b))? / e(g_beta(-b))? - 1.0).abs(), 3.0 / b),
        ((g3 - g_two).abs(), 2.0 * PI.sqrt()),
    ];
    let ok = worst_anchor < 1e-10 && checks.iter().all(|(v, bound)| v < bound);
    let ratios: Vec<String> = checks.iter().map(|(v, bound)| format!("{:.2}", v / bound)).collect();
    body(
        ok,
        format!("anchor error {worst_anchor:.1e}; |remainder|/bound for F(8), G(8), J(8), J/G(-8), G(-3): {}", ratios.join(", ")),
        "anchors to 1e-10; every ratio < 1",
    )
}

fn c10(level: Level) -> BodyResult {
    let alpha = 1e-3;
    let (mut worst_q, mut worst_z) = (0.0f64, 0.0f64);
    for (i, beta) in [-1.0, 0.0, 1.0, 3.0].into_iter().enumerate() {
        let m = area_moments(alpha, beta, 1e-8).map_err(err)?;
        worst_q = worst_q.max(rel(m.a1 / alpha, f_beta(beta).map_err(err)?)).max(rel(m.a2 / alpha, j_beta(beta).map_err(err)?));
        if level == Level::Full {
            let dt = 1e-3 / (beta + alpha).abs().max(1.0);
            let r = area_mc(alpha, beta, dt, 100_000, SUITE_SEED + i as u64).map_err(err)?;
            worst_z = worst_z.max((r.a1 - m.a1).abs() / r.a1_se).max((r.a2 - m.a2).abs() / r.a2_se);
        }
    }
    let mc = if level == Level::Full { format!(", MC max |z| {worst_z:.2} (1e5 paths)") } else { ", MC skipped in quick".into() };
    body(worst_q < 0.01 && worst_z <= 3.0, format!("quadrature max rel {worst_q:.1e}{mc}"), "quadrature rel < 1%; MC within 3 s.e.")
}

fn c11() -> BodyResult {
    let m = params(4, 2, Q, 1.0)?;
    let tv = daap_balance(&m, 0.1).map_err(err)?.total_variation;
    let lim = daap_limit(&m, &[0.2, 0.1, 0.05]).map_err(err)?;
    let j = float::current(&m).map_err(err)?.current;
    let errs: Vec<f64> = lim.scaled.iter().map(|s| (s - j).abs()).collect();
    let linear_trend = lim.difference_ratios.iter().all(|r| (1.5..2.5).contains(r));
    let ok = tv < 1e-12 && decreasing(&errs) && linear_trend && rel(lim.linear, j) < 0.01;
    body(
        ok,
        format!("TV {tv:.1e}; p J/delta = {:?}, difference ratios {:?}, linear extrapolation {:.6} vs J = {j}", lim.scaled, lim.difference_ratios, lim.linear),
        "TV < 1e-12; errors shrink, difference ratios near 2, extrapolation within 1% of J",
    )
}

fn c12() -> BodyResult {
    let n = 512;
    let m = params(n, (n as f64 * RC).round() as usize, Q, 1.0)?;
    let st = chi_walk_stats(&m, 100_000, SUITE_SEED, 8).map_err(err)?;
    let rows: Vec<_> = (2..=6).map(|a| st.compare(&m, a, 0.99)).collect();
    let outside: Vec<String> = rows.iter().filter(|r| !r.inside).map(|r| format!("a={}", r.a)).collect();
    let worst = rows
        .iter()
        .flat_map(|r| (0..3).map(move |k| (r.observed[k] - r.predicted[k]).abs() / ((r.upper[k] - r.lower[k]) / 2.0)))
        .fold(0.0, f64::max);
    let measured = format!(
        "{} of 5 rows inside 99% Wilson intervals{}; worst |obs-pred|/half-width {worst:.2}",
        5 - outside.len(),
        if outside.is_empty() { String::new() } else { format!(" (outside: {})", outside.join(", ")) }
    );
    body(outside.is_empty(), measured, "all transition frequencies for a in 2..6 inside 99% intervals")
}
