//! Subcommand bodies. Each writes its artifacts into the output directory
//! and returns the text printed on stdout.

use std::fmt::Write as _;
use std::path::Path;

use qhedge::simulation::{hedging_error, simulate_paths, FourierHedge, HedgeComparison, HedgeRule, ZeroHedge};
use qhedge::{
    mvh_strategies, ClaimKind, ClaimSpec, FourierEngine, HedgeReport, LevyModel, MmmTransform,
    ModelSpec, ObservedPath, TransformSummary, ValidationReport,
};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::ingest::ingest_csv;
use crate::manifest::OutDir;

/// What a subcommand hands back to the dispatcher.
pub struct Outcome {
    pub stdout: String,
    /// Set by `validate` when the model fails the assumptions.
    pub model_ok: Option<bool>,
}

impl Outcome {
    fn text(stdout: String) -> Self {
        Self { stdout, model_ok: None }
    }
}

fn num(x: f64) -> String {
    x.to_string()
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// File-name label of a claim: `K2000` or `S` for the underlying.
pub fn claim_label(claim: &ClaimSpec) -> String {
    match claim.kind {
        ClaimKind::Call => format!("K{}", claim.strike),
        ClaimKind::Underlying => "S".into(),
    }
}

fn engine(cfg: &RunConfig, model: LevyModel) -> Result<FourierEngine> {
    Ok(FourierEngine::new(MmmTransform::new(model)?, cfg.grid)?)
}

fn observed(cfg: &RunConfig) -> Result<ObservedPath> {
    let path = cfg
        .path
        .as_deref()
        .ok_or_else(|| CliError::Config("this subcommand needs `path` (a price file)".into()))?;
    ingest_csv(path)
}

#[derive(Serialize)]
struct Validation<'a> {
    model: &'a ModelSpec,
    report: ValidationReport,
    transform: Option<TransformSummary>,
}

pub fn validate(cfg: &RunConfig, out: &mut OutDir) -> Result<Outcome> {
    let model = cfg.build_model()?;
    let report = model.validate();
    let ok = report.ok;
    let transform = MmmTransform::new(model).ok().map(|t| t.summary());
    let v = Validation {
        model: &cfg.model,
        report,
        transform,
    };
    out.json("validation.json", &v)?;
    let stdout = serde_json::to_string_pretty(&v).map_err(|e| CliError::Numerical(e.to_string()))? + "\n";
    Ok(Outcome {
        stdout,
        model_ok: Some(ok),
    })
}

pub fn price(cfg: &RunConfig, out: &mut OutDir) -> Result<Outcome> {
    let model = cfg.build_model()?;
    let eng = engine(cfg, model)?;
    let s0 = model.s0();
    let mut rows = Vec::new();
    let mut stdout = String::from("strike,c_tilde\n");
    for claim in cfg.claims()? {
        let c = match claim.kind {
            ClaimKind::Call => eng.call_value(s0, claim.maturity, claim.strike)?,
            ClaimKind::Underlying => s0,
        };
        let _ = writeln!(stdout, "{},{}", claim.strike, c);
        rows.push(vec![num(claim.strike), num(c)]);
    }
    out.csv("prices.csv", &["strike", "c_tilde"], &rows)?;
    Ok(Outcome::text(stdout))
}

fn reports(cfg: &RunConfig) -> Result<Vec<HedgeReport>> {
    let model = cfg.build_model()?;
    let eng = engine(cfg, model)?;
    let path = observed(cfg)?;
    let at = cfg.report_time.unwrap_or_else(|| path.next_date());
    Ok(mvh_strategies(&eng, &path, &cfg.claims()?, at)?)
}

pub fn lrm(cfg: &RunConfig, out: &mut OutDir) -> Result<Outcome> {
    let reports = reports(cfg)?;
    let mut rows = Vec::new();
    let mut stdout = String::from("strike,t,xi_tilde\n");
    for r in &reports {
        let strike = num(r.claim.strike);
        for pair in r.records.windows(2) {
            rows.push(vec![strike.clone(), num(pair[1].t), num(pair[0].s), opt(pair[1].xi)]);
        }
        let last = r.records.last().map(|d| d.s).unwrap_or(f64::NAN);
        rows.push(vec![strike.clone(), num(r.report_time), num(last), num(r.xi_tilde)]);
        let _ = writeln!(stdout, "{},{},{}", strike, r.report_time, r.xi_tilde);
    }
    out.csv("lrm.csv", &["strike", "t", "s_prev", "xi_tilde"], &rows)?;
    Ok(Outcome::text(stdout))
}

pub fn mvh(cfg: &RunConfig, out: &mut OutDir) -> Result<Outcome> {
    let reports = reports(cfg)?;
    let mut table = Vec::new();
    let mut diff = Vec::new();
    let mut stdout = String::from("strike,c_tilde,xi_tilde,theta_tilde\n");
    for r in &reports {
        let label = claim_label(&r.claim);
        let rows: Vec<Vec<String>> = r
            .records
            .iter()
            .map(|d| vec![num(d.t), num(d.s), num(d.h), opt(d.i), opt(d.k), opt(d.xi), num(d.e)])
            .collect();
        out.csv(&format!("hedge_{label}.csv"), &["t", "s", "h", "i", "k", "xi_tilde", "e"], &rows)?;
        out.json(&format!("hedge_{label}.json"), r)?;
        table.push(vec![num(r.claim.strike), num(r.c_tilde), num(r.xi_tilde), num(r.theta_tilde)]);
        diff.push(vec![num(r.claim.strike), num(r.theta_tilde - r.xi_tilde)]);
        let _ = writeln!(stdout, "{},{},{},{}", r.claim.strike, r.c_tilde, r.xi_tilde, r.theta_tilde);
    }
    out.csv(
        "strategy_vs_strike.csv",
        &["strike", "c_tilde", "xi_tilde", "theta_tilde"],
        &table,
    )?;
    out.csv("mvh_minus_lrm.csv", &["strike", "theta_minus_xi"], &diff)?;
    Ok(Outcome::text(stdout))
}

pub fn simulate(cfg: &RunConfig, out: &mut OutDir) -> Result<Outcome> {
    let model = cfg.build_model()?;
    let e = simulate_paths(&model, cfg.mc.paths, cfg.mc.steps, cfg.mc.seed, cfg.mc.measure)?;
    let stats = e.stats();
    out.json("simulate.json", &stats)?;
    let rows: Vec<Vec<String>> = stats
        .dates
        .iter()
        .map(|d| {
            vec![
                num(d.t),
                num(d.relative_price.mean),
                num(d.relative_price.se),
                opt(d.density.map(|z| z.mean)),
                opt(d.density.map(|z| z.se)),
            ]
        })
        .collect();
    out.csv(
        "simulate.csv",
        &["t", "relative_price", "relative_price_se", "density", "density_se"],
        &rows,
    )?;
    let sample: Vec<Vec<String>> = e
        .times()
        .iter()
        .zip(e.prices(0))
        .map(|(t, s)| vec![num(*t), num(s)])
        .collect();
    out.csv("sample_path.csv", &["t", "price"], &sample)?;
    let last = stats.dates.last().expect("at least one step");
    let mut stdout = format!(
        "{} paths, {} steps under {:?}: E[S_T/S_0] = {} ± {}",
        e.n_paths(),
        e.n_steps(),
        e.measure(),
        last.relative_price.mean,
        last.relative_price.se
    );
    if let Some(z) = last.density {
        let _ = write!(stdout, ", E[Z_T] = {} ± {}", z.mean, z.se);
    }
    stdout.push('\n');
    Ok(Outcome::text(stdout))
}

pub fn hedge_error(cfg: &RunConfig, out: &mut OutDir) -> Result<Outcome> {
    let model = cfg.build_model()?;
    let eng = engine(cfg, model)?;
    let steps = cfg.mc.steps;
    let t = model.maturity();
    let times: Vec<f64> = (0..=steps).map(|k| t * k as f64 / steps as f64).collect();
    let mut all: Vec<HedgeComparison> = Vec::new();
    let mut rows = Vec::new();
    let mut paired = Vec::new();
    let mut stdout = String::from("strike,rule,mse,se\n");
    for claim in cfg.claims()? {
        let lrm = FourierHedge::lrm(&eng, claim, &times)?;
        let mvh = FourierHedge::mvh(&eng, claim, &times)?;
        let rules: [&dyn HedgeRule; 3] = [&ZeroHedge, &lrm, &mvh];
        let c = mvh.initial_capital();
        let cmp = hedging_error(&model, &rules, &claim, c, cfg.mc.paths, steps, cfg.mc.seed)?;
        for r in &cmp.rules {
            rows.push(vec![num(claim.strike), r.rule.clone(), num(r.mse), num(r.se), num(r.mean_error)]);
            let _ = writeln!(stdout, "{},{},{},{}", claim.strike, r.rule, r.mse, r.se);
        }
        for p in &cmp.paired {
            paired.push(vec![num(claim.strike), p.a.clone(), p.b.clone(), num(p.mean), num(p.se)]);
        }
        all.push(cmp);
    }
    out.csv("hedge_error.csv", &["strike", "rule", "mse", "se", "mean_error"], &rows)?;
    out.csv("hedge_error_paired.csv", &["strike", "a", "b", "mse_difference", "se"], &paired)?;
    out.json("hedge_error.json", &all)?;
    Ok(Outcome::text(stdout))
}

/// Absolute form of an existing file or a directory to be created.
pub(crate) fn absolute(p: &Path) -> Result<std::path::PathBuf> {
    if p.exists() {
        p.canonicalize().map_err(|e| CliError::io(p, e))
    } else if p.is_absolute() {
        Ok(p.to_path_buf())
    } else {
        let cwd = std::env::current_dir().map_err(|e| CliError::io(p, e))?;
        Ok(cwd.join(p))
    }
}
