use std::collections::HashMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use nilcap_core::capability::{
    build_extraspecial_p5, capable_extraspecial, capable_nilprod, capable_nilprod_witnessed, capable_presentation11,
    witness_presentation11, witness_search_budget, ExtraspecialType,
};
use nilcap_core::oracle::{
    verify_center_theorem, verify_exponent_bounds, verify_free_collection, verify_struik_order, IdentityRunner,
};
use nilcap_core::*;
use serde_json::{json, Map, Value};

mod render;

#[derive(Parser)]
#[command(name = "nilcap", version, about = "Nilpotent products of cyclic p-groups: normal forms, centers and capability")]
struct Cli {
    /// Group spec file (JSON).
    #[arg(long, global = true)]
    spec: Option<PathBuf>,
    /// Largest group order that may be enumerated.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// Seed for sampled checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Emit one JSON record instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Exit 1 on NOT_CAPABLE and reject non-canonical presentation parameters.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Basis listing, moduli and order.
    Describe,
    /// Product of two words, in normal form.
    Mul { a: String, b: String },
    /// Center by enumeration.
    Center,
    /// Lower central series by enumeration.
    Lcs,
    /// Quotient by the normal closure of the given words.
    Quotient {
        #[arg(long = "by", required = true)]
        by: Vec<String>,
    },
    /// Capability verdict.
    Capable {
        /// Also search for and verify a witness.
        #[arg(long)]
        witness: bool,
    },
    /// Witness search: K is the next-class nilpotent product.
    Witness {
        /// Generator order exponents of K, comma separated.
        #[arg(long, value_delimiter = ',')]
        k_orders: Option<Vec<u32>>,
    },
    /// Two-generator class-two presentation with parameters alpha, beta, gamma, sigma.
    Presentation11 {
        #[arg(long)]
        prime: u64,
        #[arg(long)]
        alpha: u32,
        #[arg(long)]
        beta: u32,
        #[arg(long)]
        gamma: u32,
        #[arg(long)]
        sigma: u32,
        /// Run the explicit witness construction (needs alpha = beta).
        #[arg(long)]
        witness: bool,
    },
    /// Extra-special group verdict.
    Extraspecial {
        #[arg(long)]
        prime: u64,
        #[arg(long, default_value_t = 5)]
        order_exp: u32,
        #[arg(long, value_enum)]
        kind: Option<Kind>,
    },
    /// Verification suites.
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        /// Random instances per sampled check.
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Exponent-bound check: first element.
        #[arg(long, default_value = "x2")]
        y: String,
        /// Exponent-bound check: second element.
        #[arg(long, default_value = "x1")]
        z: String,
        /// Exponent-bound check: exponent; the least applicable one when omitted.
        #[arg(long)]
        a: Option<u32>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    ExponentP,
    ExponentP2,
    Plus,
    Minus,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    All,
    Order,
    Center,
    Identities,
    Exponent,
    Free,
}

enum Failure {
    Input(String),
    Budget(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::BudgetExceeded { .. } => Failure::Budget(e.to_string()),
            e => Failure::Input(e.to_string()),
        }
    }
}

type Outcome = Result<(Value, u8), Failure>;

fn load_spec(cli: &Cli) -> Result<GroupSpec, Failure> {
    let path = cli.spec.as_ref().ok_or_else(|| Failure::Input("this command needs --spec FILE".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let spec = parse_group_spec(&text)?;
    if cli.strict {
        if let Some(params) = &spec.presentation11 {
            params.validate_canonical(spec.prime)?;
        }
    }
    Ok(spec)
}

fn power(p: u64, e: u32) -> String {
    format!("{p}^{e}")
}

/// Spec index of each generator of the ascending-order basis.
fn basis_names(spec: &GroupSpec) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..spec.rank()).collect();
    perm.sort_by_key(|&i| (spec.orders[i], i));
    perm
}

fn words(g: &GroupView, ids: &[Id]) -> Result<Vec<String>, Failure> {
    Ok(ids.iter().map(|&x| g.render(x)).collect::<Result<_>>()?)
}

fn eval(g: &GroupView, text: &str) -> Result<Id, Failure> {
    Ok(g.evaluate(&parse_word(text)?, &HashMap::new())?)
}

fn describe(spec: &GroupSpec) -> Outcome {
    let names = basis_names(spec);
    let sorted: Vec<u32> = names.iter().map(|&i| spec.orders[i]).collect();
    let basis = HallBasis::build(spec.prime, spec.class, &sorted, spec.variant)?;
    let entries: Vec<Value> = (0..basis.len())
        .map(|i| {
            json!({
                "entry": nilcap_core::engine::rename_generators(&basis.render_entry(i), &names),
                "weight": basis.weight(i),
                "modulus": basis.moduli()[i],
            })
        })
        .collect();
    let order_exp = nilcap_core::capability::spec_order_exp(spec)?;
    Ok((
        json!({
            "basis": entries,
            "nilpotent_product_order": power(spec.prime, basis.order_exp()),
            "order": power(spec.prime, order_exp),
        }),
        0,
    ))
}

fn mul(spec: &GroupSpec, budget: u64, a: &str, b: &str) -> Outcome {
    let g = build_group(spec, budget)?;
    let (x, y) = (eval(&g, a)?, eval(&g, b)?);
    Ok((
        json!({
            "a": g.render(x)?,
            "b": g.render(y)?,
            "product": g.render(g.mul(x, y))?,
        }),
        0,
    ))
}

fn center(spec: &GroupSpec, budget: u64) -> Outcome {
    let g = build_group(spec, budget)?;
    let z = g.center()?;
    Ok((
        json!({
            "order": power(g.prime(), g.order_exp()),
            "center_order": power(g.prime(), nilcap_core::arith::floor_log(z.order(), g.prime())),
            "center_generators": words(&g, z.gens())?,
        }),
        0,
    ))
}

fn lcs(spec: &GroupSpec, budget: u64) -> Outcome {
    let g = build_group(spec, budget)?;
    let series = g.lower_central_series();
    let terms: Vec<Value> = series
        .iter()
        .enumerate()
        .map(|(i, s)| {
            Ok(json!({
                "term": i + 1,
                "order": power(g.prime(), nilcap_core::arith::floor_log(s.order(), g.prime())),
                "generators": words(&g, s.gens())?,
            }))
        })
        .collect::<Result<_, Failure>>()?;
    Ok((json!({ "class": series.len() - 1, "terms": terms }), 0))
}

fn quotient(spec: &GroupSpec, budget: u64, by: &[String]) -> Outcome {
    let g = build_group(spec, budget)?;
    let ids = by.iter().map(|w| eval(&g, w)).collect::<Result<Vec<_>, _>>()?;
    let n = g.normal_closure(&ids);
    let q = Arc::new(g.quotient(&n)?);
    let z = q.center()?;
    let p = g.prime();
    let images = g.generators().iter().map(|&x| g.project_to(&q, x)).collect::<Result<Vec<_>>>()?;
    let orders: Vec<u64> = images.iter().map(|&x| q.element_order(x)).collect();
    Ok((
        json!({
            "normal_closure_order": power(p, nilcap_core::arith::floor_log(n.order(), p)),
            "normal_closure_generators": words(&g, n.gens())?,
            "quotient_order": power(p, q.order_exp()),
            "quotient_center_order": power(p, nilcap_core::arith::floor_log(z.order(), p)),
            "generator_orders": orders,
        }),
        0,
    ))
}

fn verdict_outcome(v: &Verdict, strict: bool) -> Outcome {
    let code = if strict && v.status == Status::NotCapable { 1 } else { 0 };
    Ok((json!({ "verdict": v }), code))
}

fn capable(spec: &GroupSpec, budget: u64, witness: bool, strict: bool) -> Outcome {
    spec.validate()?;
    let verdict = if let Some(params) = spec.presentation11 {
        capable_presentation11(spec.prime, params)?
    } else if !spec.relators.is_empty() {
        let w = witness_search_budget(spec, None, budget)?;
        let (status, justification) = if w.verified {
            (Status::Capable, Justification::VerifiedWitness)
        } else {
            (Status::Unknown, Justification::WitnessInconclusive)
        };
        Verdict { status, justification, witness: Some(w) }
    } else if witness {
        capable_nilprod_witnessed(spec.prime, spec.class, &spec.orders)?
    } else {
        capable_nilprod(spec.prime, spec.class, &spec.orders)?
    };
    verdict_outcome(&verdict, strict)
}

fn witness(spec: &GroupSpec, budget: u64, k_orders: Option<&[u32]>) -> Outcome {
    let w = witness_search_budget(spec, k_orders, budget)?;
    Ok((json!({ "witness": w }), 0))
}

fn presentation11(cli: &Cli, p: u64, params: Presentation11, run_witness: bool) -> Outcome {
    if cli.strict {
        params.validate_canonical(p)?;
    }
    let verdict = capable_presentation11(p, params)?;
    let (mut out, code) = verdict_outcome(&verdict, cli.strict)?;
    let g_order = nilcap_core::capability::spec_order_exp(&GroupSpec::presentation11(p, params))?;
    out["order"] = json!(power(p, g_order));
    if run_witness {
        if params.alpha != params.beta {
            return Err(Failure::Input("the witness construction needs alpha = beta".into()));
        }
        let w = witness_presentation11(p, params.alpha, params.gamma, params.sigma, cli.budget)?;
        out["witness"] = serde_json::to_value(w).expect("serializable");
    }
    Ok((out, code))
}

fn extraspecial(cli: &Cli, p: u64, order_exp: u32, kind: Option<Kind>) -> Outcome {
    let kind = match kind {
        Some(Kind::ExponentP) => ExtraspecialType::ExponentP,
        Some(Kind::ExponentP2) => ExtraspecialType::ExponentP2,
        Some(Kind::Plus) => ExtraspecialType::Plus,
        Some(Kind::Minus) => ExtraspecialType::Minus,
        None if p == 2 => ExtraspecialType::Plus,
        None => ExtraspecialType::ExponentP,
    };
    let verdict = capable_extraspecial(p, order_exp, kind)?;
    let (mut out, code) = verdict_outcome(&verdict, cli.strict)?;
    if order_exp == 5 && p > 2 && kind == ExtraspecialType::ExponentP {
        out["construction"] = match build_extraspecial_p5(p, cli.budget) {
            Ok(g) => {
                let z = g.center()?;
                json!({
                    "order": power(p, g.order_exp()),
                    "center_order": power(p, nilcap_core::arith::floor_log(z.order(), p)),
                    "generator_orders": g.generators().iter().map(|&x| g.element_order(x)).collect::<Vec<_>>(),
                    "necessary_condition": nilcap_core::capability::necessity_check(p, 2, &[1, 1, 1, 1]),
                })
            }
            Err(e @ Error::BudgetExceeded { .. }) => json!({ "skipped": e.to_string() }),
            Err(e) => return Err(e.into()),
        };
    }
    Ok((out, code))
}

fn skipped(check: &str, e: Error) -> Value {
    json!({ "check": check, "status": "NOT_APPLICABLE", "note": e.to_string() })
}

fn report_value(r: &CheckReport) -> Value {
    serde_json::to_value(r).expect("serializable")
}

fn verify(cli: &Cli, spec: &GroupSpec, suite: Suite, samples: usize, y: &str, z: &str, a: Option<u32>) -> Outcome {
    let wants = |s: Suite| suite == Suite::All || suite == s;
    let mut reports: Vec<Value> = Vec::new();
    if wants(Suite::Order) {
        let base = GroupSpec::nilprod(spec.prime, spec.class, &spec.orders).with_variant(spec.variant);
        reports.push(match verify_struik_order(&base, cli.budget) {
            Ok(r) => report_value(&r),
            Err(e) => skipped("normal-form-order", e),
        });
    }
    if wants(Suite::Center) {
        reports.push(match verify_center_theorem(spec, cli.budget) {
            Ok(r) => report_value(&r),
            Err(e) => skipped("center-formula", e),
        });
    }
    if wants(Suite::Identities) || wants(Suite::Exponent) {
        match build_group(spec, cli.budget) {
            Ok(g) => {
                if wants(Suite::Identities) {
                    let runner = IdentityRunner::new(&g);
                    for check in IdentityCheck::ALL {
                        reports.push(report_value(&runner.run(check, samples, cli.seed)?));
                    }
                }
                if wants(Suite::Exponent) {
                    let (y, z) = (eval(&g, y)?, eval(&g, z)?);
                    let r = match a {
                        Some(a) => verify_exponent_bounds(&g, y, z, a)?,
                        None => {
                            let mut last = verify_exponent_bounds(&g, y, z, 1)?;
                            for a in 2..=12 {
                                if last.status != CheckStatus::NotApplicable {
                                    break;
                                }
                                last = verify_exponent_bounds(&g, y, z, a)?;
                            }
                            last
                        }
                    };
                    reports.push(report_value(&r));
                }
            }
            Err(e) => reports.push(skipped("identities", e)),
        }
    }
    if wants(Suite::Free) {
        reports.push(report_value(&verify_free_collection(spec.rank(), spec.class, samples, cli.seed)?));
    }
    let failed = reports.iter().filter(|r| r["status"] == "FAIL").count();
    let passed = reports.iter().filter(|r| r["status"] == "PASS").count();
    let code = if failed > 0 { 1 } else { 0 };
    Ok((json!({ "passed": passed, "failed": failed, "reports": reports }), code))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Describe => "describe",
        Command::Mul { .. } => "mul",
        Command::Center => "center",
        Command::Lcs => "lcs",
        Command::Quotient { .. } => "quotient",
        Command::Capable { .. } => "capable",
        Command::Witness { .. } => "witness",
        Command::Presentation11 { .. } => "presentation11",
        Command::Extraspecial { .. } => "extraspecial",
        Command::Verify { .. } => "verify",
    }
}

fn run(cli: &Cli, inputs: &mut Map<String, Value>) -> Outcome {
    let budget = cli.budget;
    let args = match &cli.command {
        Command::Mul { a, b } => json!({ "a": a, "b": b }),
        Command::Quotient { by } => json!({ "by": by }),
        Command::Capable { witness } => json!({ "witness": witness }),
        Command::Witness { k_orders } => json!({ "k_orders": k_orders }),
        Command::Presentation11 { prime, alpha, beta, gamma, sigma, witness } => json!({
            "prime": prime, "alpha": alpha, "beta": beta, "gamma": gamma, "sigma": sigma, "witness": witness,
        }),
        Command::Extraspecial { prime, order_exp, kind } => json!({
            "prime": prime,
            "order_exp": order_exp,
            "kind": kind.map(|k| k.to_possible_value().expect("named").get_name().to_string()),
        }),
        Command::Verify { suite, samples, y, z, a } => json!({
            "suite": suite.to_possible_value().expect("named").get_name(),
            "samples": samples, "y": y, "z": z, "a": a,
        }),
        Command::Describe | Command::Center | Command::Lcs => json!({}),
    };
    if let Value::Object(map) = args {
        inputs.extend(map);
    }
    if cli.strict {
        inputs.insert("strict".into(), json!(true));
    }
    let mut spec = || -> Result<GroupSpec, Failure> {
        let s = load_spec(cli)?;
        inputs.insert("spec".into(), serde_json::to_value(&s).expect("serializable"));
        Ok(s)
    };
    match &cli.command {
        Command::Describe => describe(&spec()?),
        Command::Mul { a, b } => mul(&spec()?, budget, a, b),
        Command::Center => center(&spec()?, budget),
        Command::Lcs => lcs(&spec()?, budget),
        Command::Quotient { by } => quotient(&spec()?, budget, by),
        Command::Capable { witness } => capable(&spec()?, budget, *witness, cli.strict),
        Command::Witness { k_orders } => witness(&spec()?, budget, k_orders.as_deref()),
        Command::Presentation11 { prime, alpha, beta, gamma, sigma, witness } => {
            presentation11(cli, *prime, Presentation11::new(*alpha, *beta, *gamma, *sigma), *witness)
        }
        Command::Extraspecial { prime, order_exp, kind } => extraspecial(cli, *prime, *order_exp, *kind),
        Command::Verify { suite, samples, y, z, a } => verify(cli, &spec()?, *suite, *samples, y, z, *a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut inputs = Map::new();
    inputs.insert("budget".into(), json!(cli.budget));
    let outcome = run(&cli, &mut inputs);
    let (outputs, code) = match outcome {
        Ok(x) => x,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(Failure::Budget(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(3);
        }
    };
    let report = json!({
        "command": command_name(&cli.command),
        "inputs": inputs,
        "outputs": outputs,
        "seed": cli.seed,
    });
    if cli.json {
        println!("{report}");
    } else {
        print!("{}", render::text(&report));
    }
    ExitCode::from(code)
}
