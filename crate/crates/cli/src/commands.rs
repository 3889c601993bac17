use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use stochord_core::combinators::{product_of_independent, sum_of_independent};
use stochord_core::distribution::spec::{parse_distribution, parse_distribution_list, to_json};
use stochord_core::harness::{
    reproduce_remark2, reproduce_remark5, reproduce_table1, verify_additivity, verify_axioms,
    verify_multiplicativity, CurveTable, Outcome, PropertyReport, SuiteSpec,
};
use stochord_core::orders::{self, OrderKind};
use stochord_core::{Distribution, Error, OrderVerdict, Status, ToleranceConfig};

use crate::args::{Cli, Command, CombineOp, Format, PropertyArg, Reproduction, ToleranceArgs};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REFUTED: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

/// Failure that maps to the usage/input exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}")]
    Input(String),
}

type CliResult<T> = Result<T, CliError>;

pub fn run(cli: Cli) -> CliResult<i32> {
    let cfg = tolerance(&cli.tolerance)?;
    let default_format = match cli.command {
        Command::PlotCdf { .. } => Format::Csv,
        _ => Format::Json,
    };
    let out = Output {
        format: cli.format.unwrap_or(default_format),
        path: cli.output,
    };
    match cli.command {
        Command::Check { order, x, y } => check(order, &x, &y, &cfg, &out),
        Command::Combine { op, x, z } => combine(op, &x, &z, &cfg, &out),
        Command::Property {
            property,
            order,
            x,
            y,
            z,
        } => property_cmd(property, order, &x, &y, &z, &cfg, &out),
        Command::Axioms { order, pool } => axioms(order, &pool, &cfg, &out),
        Command::Reproduce { what, suite } => reproduce(what, suite.as_deref(), &cfg, &out),
        Command::PlotCdf {
            specs,
            from,
            to,
            step,
        } => plot_cdf(&specs, from, to, step, &out),
    }
}

fn tolerance(args: &ToleranceArgs) -> CliResult<ToleranceConfig> {
    let mut cfg = ToleranceConfig::default();
    if let Some(e) = args.eps {
        cfg.eps_ineq = e;
    }
    if let Some(n) = args.grid {
        cfg.grid_size = n;
    }
    if let Some(n) = args.max_deriv {
        cfg.max_deriv_order = n;
    }
    if let Some(m) = args.moments {
        cfg.moment_horizon = m;
    }
    cfg.validate()?;
    Ok(cfg)
}

struct Output {
    format: Format,
    path: Option<PathBuf>,
}

impl Output {
    fn write(&self, text: &str) -> CliResult<()> {
        match &self.path {
            Some(p) => std::fs::write(p, text)
                .map_err(|e| CliError::Input(format!("cannot write {}: {e}", p.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    fn json<T: Serialize>(&self, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value).expect("report serializes");
        text.push('\n');
        self.write(&text)
    }

    fn unsupported(&self, what: &str) -> CliError {
        CliError::Input(format!("--format {:?} is not available for {what}", self.format).to_lowercase())
    }
}

/// Inline JSON, or the contents of a file together with its directory
/// (relative grid paths resolve against it).
fn read_source(arg: &str) -> CliResult<(String, PathBuf)> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        return Ok((arg.to_string(), PathBuf::from(".")));
    }
    let path = Path::new(arg);
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read spec `{arg}`: {e}")))?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((text, dir))
}

fn load(arg: &str) -> CliResult<Distribution> {
    let (text, dir) = read_source(arg)?;
    Ok(parse_distribution(&text, &dir)?)
}

fn load_many(args: &[String]) -> CliResult<Vec<Distribution>> {
    let mut out = Vec::new();
    for arg in args {
        let (text, dir) = read_source(arg)?;
        if text.trim_start().starts_with('[') {
            out.extend(parse_distribution_list(&text, &dir)?);
        } else {
            out.push(parse_distribution(&text, &dir)?);
        }
    }
    if out.is_empty() {
        return Err(CliError::Input("no distributions given".into()));
    }
    Ok(out)
}

fn status_code(status: Status) -> i32 {
    match status {
        Status::Holds => EXIT_OK,
        Status::Violated => EXIT_REFUTED,
        Status::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

/// Skipped means the premise failed, so nothing was decided.
fn outcome_code(outcome: Outcome) -> i32 {
    match outcome {
        Outcome::Confirmed => EXIT_OK,
        Outcome::Refuted => EXIT_REFUTED,
        Outcome::Skipped | Outcome::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn worst(outcomes: impl IntoIterator<Item = Outcome>) -> i32 {
    let mut code = EXIT_OK;
    for o in outcomes {
        match o {
            Outcome::Refuted => return EXIT_REFUTED,
            Outcome::Inconclusive => code = EXIT_INCONCLUSIVE,
            _ => {}
        }
    }
    code
}

fn verdict_line(v: &OrderVerdict) -> String {
    let mut line = format!("{}: {}", v.label, v.status);
    if v.margin.is_finite() {
        let _ = write!(line, " (margin {:.6e})", v.margin);
    }
    if let Some(w) = &v.witness {
        let _ = write!(line, " at {}: lhs {:.6} rhs {:.6}", w.location, w.lhs, w.rhs);
    }
    if let Some(r) = &v.reason {
        let _ = write!(line, " [{r}]");
    }
    line
}

fn check(kind: OrderKind, x: &str, y: &str, cfg: &ToleranceConfig, out: &Output) -> CliResult<i32> {
    let (x, y) = (load(x)?, load(y)?);
    let v = orders::check(kind, &x, &y, cfg)?;
    match out.format {
        Format::Json => out.json(&v)?,
        Format::Pretty => out.write(&format!("{kind}: {}\n", verdict_line(&v)))?,
        Format::Csv => {
            let (loc, lhs, rhs) = match &v.witness {
                Some(w) => (w.location.to_string(), w.lhs.to_string(), w.rhs.to_string()),
                None => Default::default(),
            };
            out.write(&format!(
                "order,status,margin,location,lhs,rhs\n{kind},{},{},{loc},{lhs},{rhs}\n",
                v.status, v.margin
            ))?
        }
    }
    Ok(status_code(v.status))
}

fn combine(op: CombineOp, x: &str, z: &str, cfg: &ToleranceConfig, out: &Output) -> CliResult<i32> {
    let (x, z) = (load(x)?, load(z)?);
    let d = match op {
        CombineOp::Sum => sum_of_independent(&x, &z, cfg)?,
        CombineOp::Product => product_of_independent(&x, &z, cfg)?,
    };
    match out.format {
        Format::Json => out.json(&to_json(&d))?,
        Format::Pretty => out.write(&format!("{d}\n"))?,
        Format::Csv => match &d {
            Distribution::Grid(g) => {
                let mut text = String::from("t,cdf,atom\n");
                for ((t, f), a) in g.points().iter().zip(g.cdf_values()).zip(g.atom_flags()) {
                    let _ = writeln!(text, "{t},{f},{}", u8::from(*a));
                }
                out.write(&text)?
            }
            _ => return Err(out.unsupported("closed-form results")),
        },
    }
    Ok(EXIT_OK)
}

fn report_line(r: &PropertyReport) -> String {
    let mut line = format!("{:?} {} [{}]: {}", r.property, r.order, r.triple.join(", "), r.outcome);
    if let Some(c) = &r.conclusion {
        let _ = write!(line, "; conclusion {}", verdict_line(c));
    }
    if let Some(n) = &r.note {
        let _ = write!(line, "; {n}");
    }
    line
}

fn property_cmd(
    property: PropertyArg,
    order: OrderKind,
    x: &str,
    y: &str,
    z: &str,
    cfg: &ToleranceConfig,
    out: &Output,
) -> CliResult<i32> {
    let (x, y, z) = (load(x)?, load(y)?, load(z)?);
    let r = match property {
        PropertyArg::Additivity => verify_additivity(order, &x, &y, &z, cfg)?,
        PropertyArg::Multiplicativity => verify_multiplicativity(order, &x, &y, &z, cfg)?,
    };
    match out.format {
        Format::Json => out.json(&r)?,
        Format::Pretty => out.write(&format!("{}\n", report_line(&r)))?,
        Format::Csv => return Err(out.unsupported("property reports")),
    }
    Ok(outcome_code(r.outcome))
}

fn axioms(order: OrderKind, pool: &[String], cfg: &ToleranceConfig, out: &Output) -> CliResult<i32> {
    let pool = load_many(pool)?;
    let reports = verify_axioms(order, &pool, cfg);
    match out.format {
        Format::Json => out.json(&reports)?,
        Format::Pretty => {
            let text: String = reports.iter().map(|r| report_line(r) + "\n").collect();
            out.write(&text)?
        }
        Format::Csv => return Err(out.unsupported("axiom reports")),
    }
    Ok(worst(reports.iter().map(|r| r.outcome)))
}

fn reproduce(what: Reproduction, suite: Option<&Path>, cfg: &ToleranceConfig, out: &Output) -> CliResult<i32> {
    if suite.is_some() && what != Reproduction::Table1 {
        return Err(CliError::Input("--suite only applies to table1".into()));
    }
    match what {
        Reproduction::Remark2 => {
            let r = reproduce_remark2(cfg)?;
            match out.format {
                Format::Json => out.json(&r)?,
                Format::Csv => out.write(&r.curves.to_csv())?,
                Format::Pretty => out.write(&format!(
                    "{}\nreverse: {}\n",
                    report_line(&r.report),
                    verdict_line(&r.reverse)
                ))?,
            }
            let reproduced = r.report.outcome == Outcome::Refuted;
            Ok(if reproduced { EXIT_OK } else { EXIT_REFUTED })
        }
        Reproduction::Remark5 => {
            let r = reproduce_remark5(cfg)?;
            match out.format {
                Format::Json => out.json(&r)?,
                Format::Pretty => {
                    let mut text = format!("premise: {}\n", verdict_line(&r.premise));
                    let _ = writeln!(text, "phi_XY = {}", r.phi_xy);
                    let _ = writeln!(text, "phi_XZ,YZ = {}", r.phi_products);
                    for (s, v) in &r.phi_prime {
                        let _ = writeln!(text, "phi'({s}) = {v}");
                    }
                    let _ = writeln!(text, "{}", report_line(&r.report));
                    out.write(&text)?
                }
                Format::Csv => return Err(out.unsupported("remark5")),
            }
            let reproduced = r.premise.is_holds() && r.report.outcome == Outcome::Refuted;
            Ok(if reproduced { EXIT_OK } else { EXIT_REFUTED })
        }
        Reproduction::Table1 => {
            let spec = match suite {
                Some(p) => {
                    let text = std::fs::read_to_string(p)
                        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", p.display())))?;
                    SuiteSpec::from_json(&text)?
                }
                None => SuiteSpec::default(),
            };
            let table = reproduce_table1(&spec, cfg)?;
            let matches = table.matches_published();
            match out.format {
                Format::Json => out.json(&serde_json::json!({
                    "matches_published": matches,
                    "cells": table.cells,
                    "reports": table.reports,
                }))?,
                Format::Pretty => out.write(&table.render())?,
                Format::Csv => return Err(out.unsupported("table1")),
            }
            Ok(if matches { EXIT_OK } else { EXIT_REFUTED })
        }
    }
}

fn plot_cdf(specs: &[String], from: f64, to: f64, step: f64, out: &Output) -> CliResult<i32> {
    if !(from.is_finite() && to.is_finite()) || to < from {
        return Err(CliError::Input(format!("empty range [{from}, {to}]")));
    }
    let dists = load_many(specs)?;
    let names: Vec<String> = (1..=dists.len()).map(|i| format!("F_{i}")).collect();
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    let refs: Vec<&Distribution> = dists.iter().collect();
    let table = CurveTable::sample(&names, &refs, from, to, step)?;
    match out.format {
        Format::Json => out.json(&table)?,
        Format::Csv | Format::Pretty => out.write(&table.to_csv())?,
    }
    Ok(EXIT_OK)
}
