//! `susyva`: command-line front end for the Λ-bracket engine.
//!
//! Exit codes: 0 success, 1 an identity check found a violation, 2 input error. Errors
//! are reported as `error[<category>]: <message>` on stderr, or as a JSON object when
//! `--format json` is given.

use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use rayon::prelude::*;
use serde_json::{json, Value};

use susyva::distoracle;
use susyva::engine::{parity_check, weight_homogeneity_check, Engine};
use susyva::expr::{Algebra, Atom, FieldExpr};
use susyva::library;
use susyva::modes::{self, ComponentField, Method};
use susyva::params::Case;
use susyva::parse::{parse_algebra, parse_expr_with};
use susyva::{Error, Result};

/// Environment variable listing directories searched for `NAME.alg` files.
const PATH_VAR: &str = "SUSYVA_PATH";

#[derive(Parser)]
#[command(name = "susyva", version, about = "Lambda-bracket calculus for SUSY vertex algebras")]
struct Cli {
    /// Output rendering.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CaseArg {
    W,
    K,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Closed,
    Ope,
}

#[derive(Subcommand)]
enum Command {
    /// Λ-bracket [a_Λ b].
    Bracket { alg: String, a: String, b: String },
    /// Normally ordered product :ab:.
    Nprod { alg: String, a: String, b: String },
    /// Canonical form of an expression.
    Normalize { alg: String, expr: String },
    /// Skew-symmetry residuals on all generator pairs, or on one pair.
    SkewCheck { alg: String, a: Option<String>, b: Option<String> },
    /// Jacobi residuals on all generator triples (default) or on one triple.
    Jacobi {
        alg: String,
        #[arg(long, conflicts_with = "triple")]
        all: bool,
        #[arg(long, num_args = 3, value_names = ["A", "B", "C"])]
        triple: Option<Vec<String>>,
    },
    /// Quasi-commutativity on generator pairs and quasi-associativity on triples.
    QuasiCheck { alg: String },
    /// Central charge of the conformal vector, or of the given fields.
    CentralCharge { alg: String, fields: Vec<String> },
    /// Weight homogeneity and parity of the structure constants.
    Weights { alg: String },
    /// Mode bracket table over a window `lo..hi` of (possibly half-integer) indices.
    Modes {
        alg: String,
        #[arg(long, allow_hyphen_values = true)]
        window: String,
        #[arg(long, value_enum, default_value_t = MethodArg::Closed)]
        method: MethodArg,
    },
    /// Component fields of a generator's superfield.
    Expand { alg: String, generator: String },
    /// Distribution-calculus identity suite on truncated series.
    DeltaCheck {
        #[arg(long, value_enum, ignore_case = true)]
        case: CaseArg,
        #[arg(long = "N")]
        n: u8,
        /// Half-width of the window [-w, w].
        #[arg(long, default_value_t = 8)]
        window: i64,
    },
    /// Catalog of built-in algebras.
    List,
}

/// Result of a command: rendered text, structured document, and whether it found a
/// violation.
struct Outcome {
    text: String,
    json: Value,
    violation: bool,
}

impl Outcome {
    fn ok(text: String, json: Value) -> Outcome {
        Outcome { text, json, violation: false }
    }
}

fn load_algebra(spec: &str) -> Result<Algebra> {
    let path = Path::new(spec);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| Error::invalid(format!("{spec}: {e}")))?;
        return parse_algebra(&text);
    }
    if let Ok(dirs) = std::env::var(PATH_VAR) {
        for dir in std::env::split_paths(&dirs) {
            for candidate in [dir.join(format!("{spec}.alg")), dir.join(spec)] {
                if candidate.is_file() {
                    let text = std::fs::read_to_string(&candidate)
                        .map_err(|e| Error::invalid(format!("{}: {e}", candidate.display())))?;
                    return parse_algebra(&text);
                }
            }
        }
    }
    library::get(spec)
}

fn generators(alg: &Algebra) -> Vec<FieldExpr> {
    (0..alg.gens.len() as u16)
        .filter(|g| !alg.gen(*g).central)
        .map(|g| FieldExpr::atom(Atom::gen(g)))
        .collect()
}

fn parse_rational(s: &str) -> Result<BigRational> {
    s.trim().parse::<BigRational>().map_err(|_| Error::invalid(format!("not a rational number: {s}")))
}

fn parse_window(s: &str) -> Result<(BigRational, BigRational)> {
    let (lo, hi) = s
        .split_once("..")
        .ok_or_else(|| Error::invalid(format!("window must be lo..hi, got {s}")))?;
    Ok((parse_rational(lo)?, parse_rational(hi)?))
}

/// Component fields tabulated by `modes`: the Neveu–Schwarz pair for the K case with
/// `N = 1`, the twisted N = 2 fields for the W case with `N = 1` and a conformal pair,
/// and all superfield components otherwise.
fn table_fields(alg: &Algebra) -> Result<Vec<ComponentField>> {
    match (alg.case, alg.n, alg.conformal.len()) {
        (Case::K, 1, 1) => modes::presets::neveu_schwarz_k1(alg),
        (Case::W, 1, 2) => modes::presets::n2_from_w1(alg),
        _ => {
            let mut out = Vec::new();
            for g in 0..alg.gens.len() as u16 {
                if alg.gen(g).central {
                    continue;
                }
                for d in modes::component_expand(alg, &alg.gen(g).name)? {
                    out.push(d.field);
                }
            }
            Ok(out)
        }
    }
}

fn run(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Bracket { alg, a, b } => {
            let alg = load_algebra(&alg)?;
            let eng = Engine::new(&alg);
            let (x, y) = (parse_expr_with(&eng, &a)?, parse_expr_with(&eng, &b)?);
            let (br, _) = eng.bracket_checked(&x, &y)?;
            let text = alg.render_bracket(&br);
            Ok(Outcome::ok(text.clone(), json!({"bracket": text, "a": a, "b": b})))
        }
        Command::Nprod { alg, a, b } => {
            let alg = load_algebra(&alg)?;
            let eng = Engine::new(&alg);
            let e = eng.nprod(&parse_expr_with(&eng, &a)?, &parse_expr_with(&eng, &b)?);
            let text = alg.render_expr(&e);
            Ok(Outcome::ok(text.clone(), json!({"nprod": text})))
        }
        Command::Normalize { alg, expr } => {
            let alg = load_algebra(&alg)?;
            let eng = Engine::new(&alg);
            let e = eng.normalize(&parse_expr_with(&eng, &expr)?);
            let text = alg.render_expr(&e);
            Ok(Outcome::ok(text.clone(), json!({"normal_form": text})))
        }
        Command::SkewCheck { alg, a, b } => {
            let alg = load_algebra(&alg)?;
            let eng = Engine::new(&alg);
            let pairs: Vec<(String, FieldExpr, String, FieldExpr)> = match (a, b) {
                (Some(a), Some(b)) => {
                    vec![(a.clone(), parse_expr_with(&eng, &a)?, b.clone(), parse_expr_with(&eng, &b)?)]
                }
                (None, None) => {
                    let gs = generators(&alg);
                    let mut v = Vec::new();
                    for x in &gs {
                        for y in &gs {
                            v.push((alg.render_expr(x), x.clone(), alg.render_expr(y), y.clone()));
                        }
                    }
                    v
                }
                _ => return Err(Error::invalid("skew-check takes zero or two expressions")),
            };
            let mut lines = Vec::new();
            let mut entries = Vec::new();
            let mut violation = false;
            for (na, x, nb, y) in pairs {
                let r = eng.skew_residual(&x, &y)?;
                let text = alg.render_bracket(&r);
                violation |= !r.is_zero();
                lines.push(format!("({na}, {nb}): {text}"));
                entries.push(json!({"pair": [na, nb], "residual": text}));
            }
            Ok(Outcome { text: lines.join("\n"), json: json!({"skew": entries}), violation })
        }
        Command::Jacobi { alg, all: _, triple } => {
            let alg = load_algebra(&alg)?;
            let triples: Vec<[FieldExpr; 3]> = match triple {
                Some(t) => {
                    let eng = Engine::new(&alg);
                    vec![[parse_expr_with(&eng, &t[0])?, parse_expr_with(&eng, &t[1])?, parse_expr_with(&eng, &t[2])?]]
                }
                None => {
                    let gs = generators(&alg);
                    let mut v = Vec::new();
                    for x in &gs {
                        for y in &gs {
                            for z in &gs {
                                v.push([x.clone(), y.clone(), z.clone()]);
                            }
                        }
                    }
                    v
                }
            };
            let results: Vec<Result<(String, String, bool)>> = triples
                .par_iter()
                .map(|[x, y, z]| {
                    let eng = Engine::new(&alg);
                    let r = eng.jacobi_residual(x, y, z)?;
                    let r = r.map_coeffs(|e| alg.quotient(e));
                    let names = format!("({}, {}, {})", alg.render_expr(x), alg.render_expr(y), alg.render_expr(z));
                    Ok((names, alg.render_mixed(&r), r.is_zero()))
                })
                .collect();
            let mut lines = Vec::new();
            let mut entries = Vec::new();
            let mut bad = 0;
            let total = results.len();
            for r in results {
                let (names, text, zero) = r?;
                if !zero {
                    bad += 1;
                    lines.push(format!("{names}: {text}"));
                }
                entries.push(json!({"triple": names, "residual": text}));
            }
            lines.push(format!("{} of {total} triples have zero residual", total - bad));
            Ok(Outcome { text: lines.join("\n"), json: json!({"jacobi": entries, "nonzero": bad}), violation: bad > 0 })
        }
        Command::QuasiCheck { alg } => {
            let alg = load_algebra(&alg)?;
            let eng = Engine::new(&alg);
            let gs = generators(&alg);
            let mut lines = Vec::new();
            let mut entries = Vec::new();
            let mut violation = false;
            for x in &gs {
                for y in &gs {
                    let r = alg.quotient(&eng.quasi_comm_residual(x, y)?);
                    let names = format!("({}, {})", alg.render_expr(x), alg.render_expr(y));
                    violation |= !r.is_zero();
                    lines.push(format!("commutativity {names}: {}", alg.render_expr(&r)));
                    entries.push(json!({"kind": "commutativity", "args": names, "residual": alg.render_expr(&r)}));
                }
            }
            for x in &gs {
                for y in &gs {
                    for z in &gs {
                        let r = alg.quotient(&eng.quasi_assoc_residual(x, y, z)?);
                        let names =
                            format!("({}, {}, {})", alg.render_expr(x), alg.render_expr(y), alg.render_expr(z));
                        violation |= !r.is_zero();
                        lines.push(format!("associativity {names}: {}", alg.render_expr(&r)));
                        entries.push(json!({"kind": "associativity", "args": names, "residual": alg.render_expr(&r)}));
                    }
                }
            }
            Ok(Outcome { text: lines.join("\n"), json: json!({"quasi": entries}), violation })
        }
        Command::CentralCharge { alg, fields } => {
            let alg = load_algebra(&alg)?;
            let eng = Engine::new(&alg);
            let fs = if fields.is_empty() {
                library::conformal_vector(&alg)?
            } else {
                fields.iter().map(|f| parse_expr_with(&eng, f)).collect::<Result<Vec<_>>>()?
            };
            let c = eng.central_charge(&fs)?;
            Ok(Outcome::ok(c.to_string(), json!({"central_charge": c.to_string()})))
        }
        Command::Weights { alg } => {
            let alg = load_algebra(&alg)?;
            let defects = weight_homogeneity_check(&alg)?;
            let parity = parity_check(&alg);
            let mut lines = Vec::new();
            for d in &defects {
                lines.push(format!(
                    "weight [{}_Λ {}]: {} has weight {} (expected {})",
                    d.pair.0,
                    d.pair.1,
                    d.monomial,
                    d.found.as_ref().map(|w| w.to_string()).unwrap_or_else(|| "undefined".into()),
                    d.expected
                ));
            }
            for p in &parity {
                lines.push(format!("parity: {p}"));
            }
            if lines.is_empty() {
                lines.push("all structure constants are homogeneous".into());
            }
            let json = json!({
                "weight_defects": defects.iter().map(|d| json!({"pair": [d.pair.0, d.pair.1], "monomial": d.monomial})).collect::<Vec<_>>(),
                "parity_defects": parity,
            });
            Ok(Outcome { text: lines.join("\n"), json, violation: !defects.is_empty() || !parity.is_empty() })
        }
        Command::Modes { alg, window, method } => {
            let alg = load_algebra(&alg)?;
            let eng = Engine::new(&alg);
            let (lo, hi) = parse_window(&window)?;
            let fields = table_fields(&alg)?;
            let method = match method {
                MethodArg::Closed => Method::ClosedForm,
                MethodArg::Ope => Method::Ope,
            };
            let table = modes::mode_table(&eng, &fields, &lo, &hi, method)?;
            let lines: Vec<String> = table.entries.iter().map(|e| table.render_entry(e)).collect();
            let entries: Vec<Value> = table
                .entries
                .iter()
                .map(|e| {
                    json!({
                        "left": format!("{}_{}", fields[e.left.0].name, e.left.1),
                        "right": format!("{}_{}", fields[e.right.0].name, e.right.1),
                        "value": e.value.render(&fields),
                    })
                })
                .collect();
            Ok(Outcome::ok(lines.join("\n"), json!({"modes": entries})))
        }
        Command::Expand { alg, generator } => {
            let alg = load_algebra(&alg)?;
            let decls = modes::component_expand(&alg, &generator)?;
            let mut lines = Vec::new();
            let mut entries = Vec::new();
            for d in &decls {
                let theta = if d.theta == 0 {
                    "1".to_string()
                } else {
                    susyva::superindex::mask_elems(d.theta)
                        .iter()
                        .map(|i| if alg.n == 1 { "theta".to_string() } else { format!("theta{i}") })
                        .collect::<Vec<_>>()
                        .join("*")
                };
                let (neg, coef) = d.factor.fmt_coefficient();
                let coef = format!("{}{}", if neg { "-" } else { "" }, if coef.is_empty() { String::new() } else { format!("{coef}*") });
                lines.push(format!("{theta}: {coef}{}(z)  weight {}", d.field.name, d.field.weight));
                entries.push(json!({"theta": theta, "factor": d.factor.to_string(), "field": d.field.name, "weight": d.field.weight.to_string()}));
            }
            Ok(Outcome::ok(lines.join("\n"), json!({"components": entries})))
        }
        Command::DeltaCheck { case, n, window } => {
            if n > 3 {
                return Err(Error::invalid("delta-check supports N ≤ 3"));
            }
            if window < 4 {
                return Err(Error::invalid("delta-check needs a window half-width of at least 4"));
            }
            let case = match case {
                CaseArg::W => Case::W,
                CaseArg::K => Case::K,
            };
            let reports = distoracle::run_suite(case, n, (-window, window));
            let violation = reports.iter().any(|r| !r.passed);
            let lines: Vec<String> = reports
                .iter()
                .map(|r| format!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail))
                .collect();
            let entries: Vec<Value> = reports
                .iter()
                .map(|r| json!({"check": r.name, "passed": r.passed, "detail": r.detail}))
                .collect();
            Ok(Outcome { text: lines.join("\n"), json: json!({"delta_check": entries}), violation })
        }
        Command::List => {
            let names = library::names();
            let lines: Vec<String> = names.iter().map(|(n, d)| format!("{n:<14} {d}")).collect();
            let entries: Vec<Value> = names.iter().map(|(n, d)| json!({"name": n, "description": d})).collect();
            Ok(Outcome::ok(lines.join("\n"), json!({"algebras": entries})))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.format;
    match run(cli.command) {
        Ok(out) => {
            let body = match format {
                Format::Text => out.text,
                Format::Json => serde_json::to_string_pretty(&out.json).expect("serializable"),
            };
            // A closed pipe (e.g. `| head`) is not an error for a report printer.
            let _ = writeln!(std::io::stdout().lock(), "{body}");
            if out.violation {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            match format {
                Format::Text => eprintln!("error[{}]: {e}", e.category()),
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({"error": {"category": e.category(), "message": e.to_string()}}))
                        .expect("serializable")
                ),
            }
            ExitCode::from(2)
        }
    }
}
