use std::fmt;
use std::path::Path;
use std::process::ExitCode;

use roal_core::algebra::{diagonal, find_identity, AlgebraFile};
use roal_core::catalog::{self, Check, Expected, Status, Verdict};
use roal_core::cones::{f_transform, in_f, inverse_f_transform, is_real_positive, ConeContext};
use roal_core::error::Error;
use roal_core::maps::{classify_map, map_norm_levels, MapFile};
use roal_core::matcore::{operator_norm, RealMatrix, ToleranceConfig};
use serde_json::{json, Value};

/// A failure with its process exit code: 1 check failure or invalid data,
/// 2 unreadable input, 3 unknown scenario.
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn input(message: impl fmt::Display) -> Self {
        Self {
            code: 2,
            message: message.to_string(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Json(_) | Error::Io(_) => 2,
            Error::UnknownScenario(_) => 3,
            _ => 1,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

pub fn exit_code(e: &CliError) -> u8 {
    e.code
}

type Outcome = Result<ExitCode, CliError>;

fn checked_tol(tol: &ToleranceConfig) -> Result<(), CliError> {
    tol.validate().map_err(CliError::input)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    std::fs::write(path, text + "\n").map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn matrix_rows(m: &RealMatrix) -> String {
    (0..m.dim())
        .map(|i| {
            let row: Vec<String> = (0..m.dim()).map(|j| format!("{:.6}", m[(i, j)])).collect();
            format!("[{}]", row.join(", "))
        })
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn check_algebra(path: &Path, tol: &ToleranceConfig, json_out: Option<&Path>) -> Outcome {
    checked_tol(tol)?;
    let file: AlgebraFile = read_json(path)?;
    let algebra = file.materialize()?;
    let s = &algebra.subspace;
    let flags = s.flags();
    let delta = diagonal(s);
    let identity = find_identity(s, tol);
    println!("algebra {} ({:?}) in M_{}", algebra.name, algebra.kind, s.ambient_dim());
    println!("  dimension            {}", s.dim());
    println!("  diagonal dimension   {}", delta.dim());
    println!("  selfadjoint space    {}", flags.is_selfadjoint_space);
    println!("  jordan closed        {}", flags.is_jordan_closed);
    println!("  associative closed   {}", flags.is_assoc_closed);
    match &identity {
        Some(e) => {
            println!("  identity             {}", matrix_rows(e));
            println!("  approximate identities converge to this identity, so they are treated as unital");
        }
        None => println!("  identity             none"),
    }
    if let Some(out) = json_out {
        let report = json!({
            "name": algebra.name,
            "kind": algebra.kind,
            "ambient_dim": s.ambient_dim(),
            "dimension": s.dim(),
            "diagonal_dimension": delta.dim(),
            "flags": {
                "selfadjoint_space": flags.is_selfadjoint_space,
                "jordan_closed": flags.is_jordan_closed,
                "assoc_closed": flags.is_assoc_closed,
                "unital": flags.is_unital,
            },
            "identity": identity,
        });
        write_json(out, &report)?;
    }
    Ok(ExitCode::SUCCESS)
}

pub fn check_map(
    domain_path: &Path,
    map_path: &Path,
    levels: &[usize],
    seed: u64,
    tol: &ToleranceConfig,
    json_out: Option<&Path>,
) -> Outcome {
    checked_tol(tol)?;
    if levels.is_empty() || levels.contains(&0) {
        return Err(CliError::input("levels must be positive integers"));
    }
    let domain: AlgebraFile = read_json(domain_path)?;
    let file: MapFile = read_json(map_path)?;
    let t = file.build(&domain)?;
    println!(
        "map on {} (dimension {} in M_{}) into M_{}, seed {seed}",
        domain.name,
        t.domain.dim(),
        t.domain.ambient_dim(),
        t.codomain_dim
    );
    let flags = match classify_map(&t, levels, seed, tol) {
        Ok(f) => Some(f),
        Err(Error::NotUnital) => {
            println!("  domain has no identity; positivity flags are not defined");
            None
        }
        Err(e) => return Err(e.into()),
    };
    if let Some(f) = &flags {
        let opt = |b: Option<bool>| b.map_or("n/a".to_string(), |v| v.to_string());
        println!(
            "  selfadjoint          {} (residual {:.3e})",
            f.selfadjoint, f.selfadjoint_residual
        );
        println!("  positive             {}", f.positive);
        println!("  real positive        {}", f.real_positive);
        println!("  srp                  {}", f.srp);
        println!("  rcp (sampled)        {}", f.rcp);
        println!("  cp (Choi)            {}", opt(f.cp));
        println!("  srp equivalence      {}", opt(f.srp_equivalence));
        for l in &f.levels {
            println!(
                "  level {}: positive {} (margin {:.3e}{}), real positive {} (margin {:.3e}), {} samples",
                l.level,
                l.positive,
                l.worst_positive_margin,
                if l.positive_exact { ", exact" } else { "" },
                l.real_positive,
                l.worst_real_positive_margin,
                l.samples
            );
        }
    }
    let norms = map_norm_levels(&t, levels, seed);
    for (k, c) in levels.iter().zip(&norms) {
        println!(
            "  norm level {k}: {:.9} (gap ≤ {:.3e}{})",
            c.value,
            c.gap_estimate,
            if c.exact { ", exact" } else { "" }
        );
    }
    if let Some(out) = json_out {
        let report = json!({
            "seed": seed,
            "levels": levels,
            "flags": flags,
            "norms": norms,
        });
        write_json(out, &report)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn check_json(name: &str, value: f64, limit: f64, pass: bool) -> Value {
    json!({"name": name, "value": value, "limit": limit, "pass": pass})
}

pub fn transform(
    algebra_path: &Path,
    element: Option<usize>,
    matrix: Option<&str>,
    inverse: bool,
    tol: &ToleranceConfig,
    out: Option<&Path>,
) -> Outcome {
    checked_tol(tol)?;
    let file: AlgebraFile = read_json(algebra_path)?;
    let input: RealMatrix = match (element, matrix) {
        (Some(i), _) => file.generators.get(i).cloned().ok_or_else(|| {
            CliError::input(format!(
                "element {i} out of range ({} generators)",
                file.generators.len()
            ))
        })?,
        (None, Some(text)) => serde_json::from_str(text).map_err(|e| CliError::input(format!("--matrix: {e}")))?,
        (None, None) => return Err(CliError::input("either --element or --matrix is required")),
    };
    let ctx = ConeContext::new(file.materialize()?, *tol)?;
    let scale = 1.0 + operator_norm(&input);
    let mut checks = Vec::new();
    let output = if inverse {
        let doubled = in_f(&ctx, &input.scale(2.0))?;
        checks.push(check_json(
            "input_in_half_f",
            doubled.distance,
            1.0,
            doubled.in_f && doubled.distance < 1.0,
        ));
        let x = inverse_f_transform(&ctx, &input)?;
        let rp = is_real_positive(&ctx, &x)?;
        checks.push(check_json(
            "output_real_positive",
            rp.min_eig,
            -tol.psd_tol,
            rp.real_positive,
        ));
        let back = f_transform(&ctx, &x)?.value;
        let err = back.max_abs_diff(&input);
        checks.push(check_json("roundtrip", err, 1e-9 * scale, err <= 1e-9 * scale));
        x
    } else {
        let ft = f_transform(&ctx, &input)?;
        checks.push(check_json(
            "output_in_half_f",
            ft.half_f_margin,
            -1e-9,
            ft.half_f_margin >= -1e-9,
        ));
        checks.push(check_json(
            "output_in_algebra",
            ft.membership_residual,
            1e-8,
            ft.membership_residual <= 1e-8 * (1.0 + ft.value.frobenius_norm()),
        ));
        let back = inverse_f_transform(&ctx, &ft.value)?;
        let err = back.max_abs_diff(&input);
        checks.push(check_json("roundtrip", err, 1e-9 * scale, err <= 1e-9 * scale));
        ft.value
    };
    let pass = checks.iter().all(|c| c["pass"] == Value::Bool(true));
    let report = json!({
        "transform": if inverse { "inverse_f" } else { "f" },
        "input": input,
        "output": output,
        "checks": checks,
    });
    match out {
        Some(path) => write_json(path, &report)?,
        None => println!("{}", serde_json::to_string_pretty(&report).map_err(Error::from)?),
    }
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

pub fn catalog_list() -> Outcome {
    let width = catalog::list().iter().map(|s| s.name.len()).max().unwrap_or(0);
    for s in catalog::list() {
        println!("{:width$}  {}", s.name, s.description);
    }
    Ok(ExitCode::SUCCESS)
}

fn expected_text(c: &Check) -> String {
    match c.expected {
        Expected::Value(v) => format!("{v} ± {:e}", c.tolerance),
        Expected::Interval { lo, hi } => match (lo, hi) {
            (Some(lo), Some(hi)) => format!("[{lo}, {hi}]"),
            (Some(lo), None) => format!("≥ {lo} - {:e}", c.tolerance),
            (None, Some(hi)) => format!("≤ {hi} + {:e}", c.tolerance),
            (None, None) => "any".to_string(),
        },
    }
}

fn print_verdict(v: &Verdict) {
    let head = if v.overall { "PASS" } else { "FAIL" };
    println!("{head} {} (seed {})", v.scenario, v.seed);
    for note in &v.notes {
        println!("  note: {note}");
    }
    for c in &v.checks {
        let status = match c.status {
            Status::Pass => "ok  ",
            Status::Fail => "FAIL",
            Status::Skipped => "skip",
        };
        println!(
            "  {status} {}: {:.6e} (expected {}) [{}]",
            c.name,
            c.value,
            expected_text(c),
            c.anchor
        );
        if let Some(d) = &c.detail {
            println!("       {d}");
        }
        if c.status == Status::Fail {
            if let Some(w) = &c.witness {
                println!("       witness {}", matrix_rows(w));
            }
        }
    }
}

pub fn catalog_run(
    name: Option<&str>,
    all: bool,
    seed: u64,
    tol: &ToleranceConfig,
    json_out: Option<&Path>,
) -> Outcome {
    checked_tol(tol)?;
    let verdicts = if all {
        catalog::run_all(seed, tol)?
    } else {
        let name = name.ok_or_else(|| CliError::input("a scenario name or --all is required"))?;
        vec![catalog::run(name, seed, tol)?]
    };
    for v in &verdicts {
        print_verdict(v);
    }
    let failed: Vec<&str> = verdicts
        .iter()
        .filter(|v| !v.overall)
        .map(|v| v.scenario.as_str())
        .collect();
    if all {
        println!(
            "{} of {} scenarios passed{}",
            verdicts.len() - failed.len(),
            verdicts.len(),
            if failed.is_empty() {
                String::new()
            } else {
                format!("; failed: {}", failed.join(", "))
            }
        );
    }
    if let Some(out) = json_out {
        if all {
            write_json(out, &verdicts)?;
        } else {
            write_json(out, &verdicts[0])?;
        }
    }
    Ok(if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
