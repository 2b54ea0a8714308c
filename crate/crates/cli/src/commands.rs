//! Thin drivers from a resolved configuration to records.

use std::time::Instant;

use aap_exact::formulas::{self, rational_to_f64};
use aap_exact::{float, parse_rational, RationalInput};
use aap_model::{validate, ModelParams};
use aap_oracle::Oracle;
use aap_ou::{area_mc, area_moments};
use aap_scaling::{f_beta, g_beta, j_beta};
use aap_sim::{estimate_cumulants_with, SimConfig};

use crate::checks::{self, Faults, Level};
use crate::config::{Command, LevelArg, ModelArgs, Resolver};
use crate::record::{Document, Record, Value};
use crate::{CliError, Outcome, EXIT_CHECK_FAILED, EXIT_NUMERICAL, EXIT_OK};

pub fn dispatch(cmd: &Command, res: &mut Resolver) -> Result<Outcome, CliError> {
    match cmd {
        Command::Exact(a) => cmd_exact(res, &a.model, a.backend.as_ref(), a.tol.as_ref()),
        Command::Oracle(a) => cmd_oracle(res, &a.model, a.h.as_ref()),
        Command::Simulate(a) => cmd_simulate(res, a),
        Command::Scaling(a) => cmd_scaling(res, a),
        Command::Ou(a) => cmd_ou(res, a),
        Command::Selftest(a) => cmd_selftest(res, a),
    }
}

fn outcome(command: &str, res: &Resolver, records: Vec<Record>, status: i32) -> Outcome {
    Outcome { doc: Document { command: command.into(), config: res.resolved.clone(), records }, status, report: vec![] }
}

/// A real that may be written as a decimal or as `a/b`.
fn real(res: &mut Resolver, key: &str, flag: Option<&String>, default: &str) -> Result<(f64, String), CliError> {
    let text = res.text(key, flag).unwrap_or_else(|| default.to_string());
    let x = match text.trim().parse::<f64>() {
        Ok(x) => x,
        Err(_) => rational_to_f64(&parse_rational(&text).ok_or_else(|| CliError::config(key, format!("cannot parse {text:?} as a number")))?),
    };
    if !x.is_finite() {
        return Err(CliError::config(key, format!("{text:?} is not finite")));
    }
    res.record(key, x);
    Ok((x, text))
}

struct Model {
    params: ModelParams,
    q_text: String,
    r_text: String,
}

fn model(res: &mut Resolver, a: &ModelArgs) -> Result<Model, CliError> {
    let n = res.get("N", a.n.as_ref(), 4usize)?;
    let p = res.get("p", a.p.as_ref(), 2usize)?;
    let (q, q_text) = real(res, "q", a.q.as_ref(), "-0.5")?;
    let (r, r_text) = real(res, "R", a.r.as_ref(), "1")?;
    let l = match res.text("L", a.l.as_ref()) {
        Some(_) => Some(real(res, "L", a.l.as_ref(), "0")?.0),
        None => None,
    };
    let params = validate(n, p, q, r, l)?;
    res.record("L", params.l);
    Ok(Model { params, q_text, r_text })
}

fn model_fields(m: &ModelParams) -> Record {
    Record::new()
        .with("N", m.n)
        .with("p", m.p)
        .with("q", m.q)
        .with("R", m.r)
        .with("L", m.l)
        .with("rho", m.rho)
        .with("rho_c", m.rho_c)
        .with("beta", m.beta())
}

fn per_site(mut r: Record, n: usize, j: f64, d: f64) -> Record {
    let nf = n as f64;
    r.push("J", j);
    r.push("Delta", d);
    r.push("j_per_site", j / nf);
    r.push("delta_per_site", d / (nf * nf));
    r
}

fn cmd_exact(res: &mut Resolver, a: &ModelArgs, backend: Option<&String>, tol: Option<&String>) -> Result<Outcome, CliError> {
    let m = model(res, a)?;
    let backend: String = res.get("backend", backend, "float".to_string())?;
    let rec = match backend.as_str() {
        "float" => {
            let tol = res.get("tol", tol, 1e-13f64)?;
            if !(tol > 0.0) {
                return Err(CliError::config("tol", "must be positive"));
            }
            let d = float::diffusion(&m.params, tol)?;
            let mut r = per_site(model_fields(&m.params).with("backend", "float"), m.params.n, d.current.current, d.delta);
            r.push("J_R", d.current.j_r);
            r.push("J_L", d.current.j_l);
            r.push("Delta_R", d.delta_r);
            r.push("Delta_L", d.delta_l);
            r.push("truncation_i", d.truncation_i);
            r.push("vanishing_residual", d.vanishing_residual);
            r
        }
        "exact" => {
            let q = parse_rational(&m.q_text).ok_or_else(|| CliError::config("q", "not a rational number"))?;
            let r = parse_rational(&m.r_text).ok_or_else(|| CliError::config("R", "not a rational number"))?;
            let inp = RationalInput::new(m.params.n, m.params.p, q, r);
            let (j, d) = (formulas::current_sum(&inp), formulas::diffusion(&inp));
            let mut rec = per_site(model_fields(&m.params).with("backend", "exact"), m.params.n, rational_to_f64(&j), rational_to_f64(&d));
            rec.push("J_exact", j.to_string());
            rec.push("Delta_exact", d.to_string());
            rec
        }
        other => return Err(CliError::config("backend", format!("expected exact or float (got {other:?})"))),
    };
    Ok(outcome("exact", res, vec![rec], EXIT_OK))
}

fn cmd_oracle(res: &mut Resolver, a: &ModelArgs, h: Option<&String>) -> Result<Outcome, CliError> {
    let m = model(res, a)?;
    let h = res.get("h", h, 1e-3f64)?;
    let o = Oracle::new(&m.params)?;
    let fd = o.cumulants_fd(h)?;
    let (jp, dp) = o.cumulants_perturbative()?;
    let mut r = per_site(model_fields(&m.params), m.params.n, fd.j, fd.delta);
    r.push("J_err", fd.err_j);
    r.push("Delta_err", fd.err_delta);
    r.push("J_perturbative", jp);
    r.push("Delta_perturbative", dp);
    r.push("mean_avalanche_size", o.mean_avalanche_size()?);
    r.push("stationarity_residual", o.stationarity_residual()?);
    r.push("states", o.state_count());
    Ok(outcome("oracle", res, vec![r], EXIT_OK))
}

fn cmd_simulate(res: &mut Resolver, a: &crate::config::SimulateArgs) -> Result<Outcome, CliError> {
    let m = model(res, &a.model)?;
    let t_max = res.get("t-max", a.t_max.as_ref(), 1e5f64)?;
    let seed = res.get("seed", a.seed.as_ref(), 1u64)?;
    let batches = res.get("batches", a.batches.as_ref(), 100usize)?;
    let replicas = res.get("replicas", a.replicas.as_ref(), 1u64)?;
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(CliError::config("t-max", "must be positive"));
    }
    if replicas == 0 {
        return Err(CliError::config("replicas", "must be at least 1"));
    }
    let c = estimate_cumulants_with(&m.params, t_max, batches, seed, replicas, &SimConfig::default())?;
    let r = model_fields(&m.params)
        .with("seed", c.seed)
        .with("replicas", c.replicas)
        .with("rng", c.rng)
        .with("t_max", c.t_max)
        .with("n_events", c.n_events)
        .with("Y", c.y)
        .with("J_hat", c.j_hat)
        .with("J_se", c.j_se)
        .with("Delta_hat", c.delta_hat)
        .with("Delta_se", c.delta_se)
        .with("mean_S", c.mean_s)
        .with("var_S", c.var_s)
        .with("n_batches", c.n_batches)
        .with("batch_time", c.batch_time)
        .with("tainted", c.tainted);
    let status = if c.tainted { EXIT_NUMERICAL } else { EXIT_OK };
    let mut out = outcome("simulate", res, vec![r], status);
    if c.tainted {
        out.report.push("aap: an avalanche hit the step cap; estimates are tainted".into());
    }
    Ok(out)
}

fn cmd_scaling(res: &mut Resolver, a: &crate::config::ScalingArgs) -> Result<Outcome, CliError> {
    let curve: String = res.get("curve", a.curve.as_ref(), "F".to_string())?;
    let f: fn(f64) -> Result<f64, aap_scaling::ScalingError> = match curve.as_str() {
        "F" => f_beta,
        "G" => g_beta,
        "J" => j_beta,
        other => return Err(CliError::config("curve", format!("expected F, G or J (got {other:?})"))),
    };
    let lo = res.get("beta-min", a.beta_min.as_ref(), -3.0f64)?;
    let hi = res.get("beta-max", a.beta_max.as_ref(), 3.0f64)?;
    let steps = res.get("steps", a.steps.as_ref(), 61usize)?;
    if !(lo.is_finite() && hi.is_finite()) || hi < lo {
        return Err(CliError::config("beta-max", format!("need beta-min <= beta-max (got {lo}, {hi})")));
    }
    if steps == 0 || (steps > 1 && hi == lo) {
        return Err(CliError::config("steps", "need steps >= 1, and steps = 1 when beta-min = beta-max"));
    }
    let rows = (0..steps)
        .map(|i| {
            let beta = if steps == 1 { lo } else { lo + (hi - lo) * i as f64 / (steps - 1) as f64 };
            Ok(Record::new().with("beta", beta).with(curve.as_str(), f(beta)?))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(outcome("scaling", res, rows, EXIT_OK))
}

fn cmd_ou(res: &mut Resolver, a: &crate::config::OuArgs) -> Result<Outcome, CliError> {
    let alpha = res.get("alpha", a.alpha.as_ref(), 1e-3f64)?;
    let beta = res.get("beta", a.beta.as_ref(), 0.0f64)?;
    let tol = res.get("tol", a.tol.as_ref(), 1e-8f64)?;
    let mc_flag = a.mc.then(|| "true".to_string());
    let mc = res.get("mc", mc_flag.as_ref(), false)?;
    let mut m = area_moments(alpha, beta, tol)?;
    if mc {
        let dt = res.get("dt", a.dt.as_ref(), 1e-3 / (beta + alpha).abs().max(1.0))?;
        let n_paths = res.get("n-paths", a.n_paths.as_ref(), 100_000u64)?;
        let seed = res.get("seed", a.seed.as_ref(), 1u64)?;
        let r = area_mc(alpha, beta, dt, n_paths, seed)?;
        m.mc_a1 = Some(r.a1);
        m.mc_a2 = Some(r.a2);
        m.mc_se = Some([r.a1_se, r.a2_se]);
        m.n_paths = Some(n_paths);
        m.dt = Some(dt);
    }
    let mc_se = m.mc_se.map_or(Value::Null, |[a, b]| Value::List(vec![a.into(), b.into()]));
    let rec = Record::new()
        .with("alpha", m.alpha)
        .with("beta", m.beta)
        .with("A1", m.a1)
        .with("A2", m.a2)
        .with("quad_error", m.quad_error)
        .with("mc_A1", m.mc_a1)
        .with("mc_A2", m.mc_a2)
        .with("mc_se", mc_se)
        .with("n_paths", m.n_paths)
        .with("dt", m.dt)
        .with("A1_over_alpha", m.a1 / alpha)
        .with("A2_over_alpha", m.a2 / alpha)
        .with("F", f_beta(beta)?)
        .with("J", j_beta(beta)?);
    Ok(outcome("ou", res, vec![rec], EXIT_OK))
}

fn cmd_selftest(res: &mut Resolver, a: &crate::config::SelftestArgs) -> Result<Outcome, CliError> {
    let level = match a.level {
        LevelArg::Quick => Level::Quick,
        LevelArg::Full => Level::Full,
    };
    res.record("level", level.as_str());
    let faults = Faults { mu2: a.break_mu2 };
    if let Some(mu2) = faults.mu2 {
        res.record("break-mu2", mu2);
    }
    let ids: Vec<String> = match &a.only {
        Some(list) => {
            res.record("only", list.as_str());
            let ids: Vec<String> = list.split(',').map(|s| s.trim().to_string()).collect();
            if let Some(bad) = ids.iter().find(|id| !checks::ALL_IDS.contains(&id.as_str())) {
                return Err(CliError::config("only", format!("unknown check {bad:?}; known: {}", checks::ALL_IDS.join(", "))));
            }
            ids
        }
        None => checks::ids_for(level).iter().map(|s| s.to_string()).collect(),
    };
    let start = Instant::now();
    let mut records = vec![];
    let mut report = vec![];
    let mut failed = 0;
    for id in &ids {
        let c = checks::run_check(id, level, &faults);
        report.push(c.line());
        failed += usize::from(!c.passed);
        records.push(c.to_record());
        for t in &c.tables {
            report.extend(t.render());
            records.extend(t.rows.iter().cloned());
        }
    }
    report.push(format!("selftest {}: {} of {} checks passed in {:.1} s", level.as_str(), ids.len() - failed, ids.len(), start.elapsed().as_secs_f64()));
    let mut out = outcome("selftest", res, records, if failed == 0 { EXIT_OK } else { EXIT_CHECK_FAILED });
    out.report = report;
    Ok(out)
}
