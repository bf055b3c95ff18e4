use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use levy_bounds::bounds::{density_envelope, ConstantLedger};
use levy_bounds::exponents::{catalog_list, CatalogEntry};
use levy_bounds::harness::{
    entry_certificates, plot_columns, verify_doubling, verify_nu, verify_sandwich,
    verify_surrogate, CsvRecord, Format, Verdict, VerificationReport, SCHEMA,
};
use levy_bounds::oracle::DensityOracle;
use levy_bounds::scaling::{certify, Direction, GridSpec};
use levy_bounds::Error;

use crate::{Command, DirectionArg, FormatArg, GridArgs};

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParameter(_)
            | Error::UnknownEntry(_)
            | Error::UnsupportedDimension(_)
            | Error::MissingCertificate(_)
            | Error::PreconditionViolation(_)
            | Error::InvalidExponent(_) => 2,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<u8, Failure>;

fn entry(id: &str) -> Result<CatalogEntry, Failure> {
    Ok(CatalogEntry::from_id(id)?)
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Failure::usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn is_csv(f: Option<FormatArg>) -> bool {
    matches!(f, Some(FormatArg::Csv))
}

pub fn run(command: Command) -> Outcome {
    match command {
        Command::Catalog { format } => catalog(format),
        Command::Eval { entry, u, format } => eval(&entry, &u, format),
        Command::Certify {
            entry: id,
            direction,
            alpha,
            theta,
            grid_min,
            grid_max,
            grid_points,
        } => certify_cmd(
            &id,
            direction,
            alpha,
            theta,
            GridSpec::new(grid_min, grid_max, grid_points),
        ),
        Command::Bounds { entry, format } => bounds(&entry, format),
        Command::Oracle(args) => oracle(&args),
        Command::Verify {
            grid,
            sandwich,
            doubling,
            nu,
            surrogate,
        } => verify(&grid, [sandwich, doubling, nu, surrogate]),
        Command::Report(args) => report(&args),
    }
}

fn catalog(format: Option<FormatArg>) -> Outcome {
    let entries = catalog_list()?;
    if is_csv(format) {
        let mut s = String::from("id,dimension,label\n");
        for e in &entries {
            let _ = writeln!(s, "{},{},\"{}\"", e.id, e.dimension(), e.label);
        }
        emit(&s, None)?;
    } else {
        let list: Vec<Value> = entries
            .iter()
            .map(|e| json!({ "id": e.id, "label": e.label, "dimension": e.dimension(), "expected": e.expected }))
            .collect();
        emit(&pretty(&json!({ "schema": SCHEMA, "entries": list })), None)?;
    }
    Ok(0)
}

#[derive(Serialize)]
struct EvalRow {
    u: f64,
    psi: f64,
    error: f64,
    star: f64,
    inverse: f64,
}

fn eval(id: &str, us: &[f64], format: Option<FormatArg>) -> Outcome {
    let e = entry(id)?;
    let mut rows = Vec::with_capacity(us.len());
    for &u in us {
        if !(u >= 0.0 && u.is_finite()) {
            return Err(Failure::usage(format!(
                "arguments must be finite and nonnegative, got {u}"
            )));
        }
        let v = e.exponent.evaluate(u)?;
        rows.push(EvalRow {
            u,
            psi: v.value,
            error: v.error,
            star: e.exponent.star(u),
            inverse: e.exponent.inverse(u),
        });
    }
    if is_csv(format) {
        let mut s = String::from("u,psi,error,star,inverse\n");
        for r in &rows {
            let _ = writeln!(
                s,
                "{:e},{:e},{:e},{:e},{:e}",
                r.u, r.psi, r.error, r.star, r.inverse
            );
        }
        emit(&s, None)?;
    } else {
        emit(
            &pretty(&json!({ "schema": SCHEMA, "entry": e.id, "values": rows })),
            None,
        )?;
    }
    Ok(0)
}

fn certify_cmd(
    id: &str,
    direction: DirectionArg,
    alpha: Option<f64>,
    theta: Option<f64>,
    grid: GridSpec,
) -> Outcome {
    let e = entry(id)?;
    let dir = match direction {
        DirectionArg::Lower => Direction::Lower,
        DirectionArg::Upper => Direction::Upper,
    };
    let declared = e.expected(dir);
    let alpha = alpha.or(declared.map(|x| x.alpha)).ok_or_else(|| {
        Failure::usage(format!("{} declares no {dir} scaling; pass --alpha", e.id))
    })?;
    let theta = theta.or(declared.map(|x| x.theta)).unwrap_or(0.0);
    let cert = certify(&|u: f64| e.exponent.psi(u), dir, alpha, theta, grid)?;
    emit(
        &pretty(&json!({ "schema": SCHEMA, "entry": e.id, "certificate": cert })),
        None,
    )?;
    Ok(if cert.valid { 0 } else { 1 })
}

fn ledger_for(e: &CatalogEntry) -> Result<ConstantLedger, Failure> {
    let (lo, up) = entry_certificates(e, GridSpec::default())?;
    Ok(density_envelope(&e.exponent, lo.as_ref(), up.as_ref())?
        .ledger()
        .clone())
}

fn bounds(id: &str, format: Option<FormatArg>) -> Outcome {
    let e = entry(id)?;
    let ledger = ledger_for(&e)?;
    match format {
        Some(FormatArg::Json) => emit(
            &pretty(&json!({ "schema": SCHEMA, "entry": e.id, "ledger": ledger })),
            None,
        )?,
        Some(FormatArg::Csv) => {
            let mut s = String::from("constant,value,step,formula\n");
            for x in &ledger.entries {
                let _ = writeln!(
                    s,
                    "{},{:e},\"{}\",\"{}\"",
                    x.constant_name, x.value, x.proof_step, x.formula
                );
            }
            emit(&s, None)?;
        }
        None => {
            let mut s = format!("constant ledger for {} (d = {})\n", e.id, ledger.d);
            let w = ledger
                .entries
                .iter()
                .map(|x| x.constant_name.chars().count())
                .max()
                .unwrap_or(0);
            for x in &ledger.entries {
                let pad = w - x.constant_name.chars().count();
                let _ = writeln!(
                    s,
                    "  {}{} = {:<24.10e} [{}] {}",
                    x.constant_name,
                    " ".repeat(pad),
                    x.value,
                    x.proof_step,
                    x.formula
                );
            }
            emit(&s, None)?;
        }
    }
    Ok(0)
}

fn oracle(args: &GridArgs) -> Outcome {
    let (cfg, format_given) = args.resolve()?;
    let e = entry(&cfg.entry_id())?;
    let o = DensityOracle::new(&e.exponent)?;
    let mut rows = Vec::new();
    for &t in &cfg.t.nodes() {
        for &r in &cfg.r.nodes() {
            rows.push(o.density(t, r)?);
        }
    }
    let text = if !format_given || cfg.format == Format::Csv {
        let mut s = String::from("t,r,value,err,method\n");
        for p in &rows {
            let _ = writeln!(
                s,
                "{:e},{:e},{:e},{:e},{}",
                p.t, p.r, p.value, p.error, p.method
            );
        }
        s
    } else {
        pretty(&json!({ "schema": SCHEMA, "entry": e.id, "records": rows }))
    };
    emit(&text, cfg.out.as_deref())?;
    Ok(0)
}

fn render<R: Serialize + CsvRecord, S: Serialize>(
    rep: &VerificationReport<R, S>,
    format: Format,
) -> String {
    match format {
        Format::Json => pretty(rep),
        Format::Csv => rep.to_csv(),
    }
}

fn verify(args: &GridArgs, flags: [bool; 4]) -> Outcome {
    let (cfg, _) = args.resolve()?;
    let mut checks: Vec<usize> = (0..4).filter(|&i| flags[i]).collect();
    if checks.is_empty() {
        checks.push(0);
    }
    let mut parts = Vec::new();
    let mut all_pass = true;
    for &c in &checks {
        let (text, pass, name) = match c {
            0 => {
                let r = verify_sandwich(&cfg)?;
                (render(&r, cfg.format), r.summary.pass(), "sandwich")
            }
            1 => {
                let r = verify_doubling(&cfg)?;
                (render(&r, cfg.format), r.summary.pass(), "doubling")
            }
            2 => {
                let r = verify_nu(&cfg)?;
                (render(&r, cfg.format), r.summary.pass(), "nu")
            }
            _ => {
                let r = verify_surrogate(&cfg)?;
                (render(&r, cfg.format), r.summary.pass(), "surrogate")
            }
        };
        eprintln!("{name}: {}", if pass { "pass" } else { "FAIL" });
        all_pass &= pass;
        parts.push((name, text));
    }
    let text = match (cfg.format, parts.len()) {
        (_, 1) => parts.pop().map(|p| p.1).unwrap_or_default(),
        (Format::Json, _) => {
            let values: Vec<Value> = parts
                .iter()
                .map(|(_, t)| serde_json::from_str(t).expect("round trip of own output"))
                .collect();
            pretty(&values)
        }
        (Format::Csv, _) => parts
            .iter()
            .map(|(n, t)| format!("# {n}\n{t}"))
            .collect::<Vec<_>>()
            .join("\n"),
    };
    emit(&text, cfg.out.as_deref())?;
    Ok(if all_pass { 0 } else { 1 })
}

fn report(args: &GridArgs) -> Outcome {
    let (cfg, _) = args.resolve()?;
    let rep = verify_sandwich(&cfg)?;
    emit(&plot_columns(&rep), cfg.out.as_deref())?;
    Ok(if rep.pass() { 0 } else { 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn configuration_errors_map_to_two() {
        assert_eq!(Failure::from(Error::UnknownEntry("x".into())).code, 2);
        assert_eq!(Failure::from(Error::QuadratureFailure("x".into())).code, 1);
    }
}
