mod input;

use std::io::Write;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use starlab::cochain::{solve_coboundary, AssocWitness};
use starlab::equiv::{gauge, solve_equivalence, star_bch, Equivalence};
use starlab::error::Category;
use starlab::kontsevich::{kontsevich_star, WeightMode, WeightOptions, WeightTable};
use starlab::liestar::cbh_star;
use starlab::moyal::moyal_star;
use starlab::schema::{to_versioned_json, to_versioned_value};
use starlab::{Exec, MultiDiffOp, NuSeries, Polynomial, StarProduct};

/// Exit status when a `check` finds a violation.
const EXIT_CHECK_FAILED: u8 = 1;

#[derive(Parser)]
#[command(name = "starlab", version, about = "Exact star products and their verification calculus")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Run data-parallel loops sequentially.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Build a star product and multiply two polynomials or dump its cochains.
    #[command(subcommand)]
    Star(StarCmd),
    /// Hochschild coboundary and coboundary solver.
    #[command(subcommand)]
    Hochschild(HochschildCmd),
    /// Jacobi and associativity checks; exit status 1 on a violation.
    #[command(subcommand)]
    Check(CheckCmd),
    /// Equivalences: solver, gauge action and the ∘_* composition.
    #[command(subcommand)]
    Equiv(EquivCmd),
    /// Kontsevich graph weights.
    #[command(subcommand)]
    Weights(WeightsCmd),
}

#[derive(Args)]
struct ProductArgs {
    #[arg(long, default_value_t = 2)]
    order: usize,
    #[arg(long)]
    u: Option<String>,
    #[arg(long)]
    v: Option<String>,
    /// Print the cochains C_1..C_N instead of a product.
    #[arg(long)]
    emit_cochains: bool,
}

#[derive(Subcommand)]
enum StarCmd {
    /// Moyal product of a constant Poisson tensor.
    Moyal {
        #[arg(long)]
        dim: Option<usize>,
        /// `symplectic` or a Poisson tensor JSON file.
        #[arg(long = "P")]
        p: String,
        #[command(flatten)]
        args: ProductArgs,
    },
    /// Standard (CBH) product on the dual of a Lie algebra.
    Cbh {
        /// heisenberg3, so3, sl2, abelian(n) or a Lie algebra JSON file.
        #[arg(long)]
        algebra: String,
        #[command(flatten)]
        args: ProductArgs,
    },
    /// Kontsevich's graph formula, order ≤ 2.
    Kontsevich {
        #[arg(long)]
        algebra: Option<String>,
        #[arg(long = "P")]
        p: Option<String>,
        #[arg(long)]
        dim: Option<usize>,
        /// Weight table (default: $STARLAB_WEIGHT_TABLE, then the shipped table).
        #[arg(long)]
        weights: Option<String>,
        /// Use floating-point weight values instead of exact entries.
        #[arg(long)]
        numeric: bool,
        #[command(flatten)]
        args: ProductArgs,
    },
}

#[derive(Subcommand)]
enum HochschildCmd {
    /// ∂C for a MultiDiffOp JSON file.
    D {
        #[arg(long)]
        op: String,
    },
    /// Find B with ∂B = C on a bounded ansatz.
    Solve {
        #[arg(long)]
        op: String,
        #[arg(long, default_value_t = 4)]
        max_order: usize,
        #[arg(long, default_value_t = 4)]
        max_degree: usize,
    },
}

#[derive(Subcommand)]
enum CheckCmd {
    /// Jacobi identity on monomial triples.
    Jacobi {
        #[arg(long = "P")]
        p: Option<String>,
        #[arg(long)]
        algebra: Option<String>,
        #[arg(long)]
        dim: Option<usize>,
        /// Monomial degree bound (default: the complete family bound).
        #[arg(long)]
        max_degree: Option<u32>,
    },
    /// Associativity defects of a star product on monomial triples.
    Assoc {
        #[arg(long)]
        star: String,
        #[arg(long, default_value_t = 3)]
        max_degree: u32,
        /// Tolerated defect coefficient magnitude.
        #[arg(long, default_value_t = 0.0)]
        tol: f64,
    },
}

#[derive(Subcommand)]
enum EquivCmd {
    /// Find E with gauge(s1, E) = s2.
    Solve {
        #[arg(long)]
        s1: String,
        #[arg(long)]
        s2: String,
        #[arg(long, default_value_t = 4)]
        max_order: usize,
        #[arg(long, default_value_t = 4)]
        max_degree: usize,
    },
    /// Apply an equivalence to a star product.
    Gauge {
        #[arg(long)]
        star: String,
        #[arg(long)]
        equiv: String,
    },
    /// a ∘_* b truncated at the order of the star product.
    Bch {
        #[arg(long)]
        star: String,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
}

#[derive(Subcommand)]
enum WeightsCmd {
    /// Integrate all graphs with 1..=k aerial vertices.
    Compute {
        /// Largest number of aerial vertices (at most 2)
        #[arg(long)]
        k: usize,
        /// Quasi-Monte Carlo samples per graph
        #[arg(long, value_parser = input::parse_count, default_value = "1e6")]
        samples: usize,
        /// Seed for the random shifts
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Fail when a weight's error bound exceeds this
        #[arg(long, default_value_t = starlab::kontsevich::DEFAULT_ERROR_THRESHOLD)]
        threshold: f64,
    },
}

/// A successful run: the rendered document and whether a check failed.
struct Output {
    text: String,
    json: Value,
    failed: bool,
}

impl Output {
    fn ok(text: String, json: Value) -> Output {
        Output { text, json, failed: false }
    }
}

fn versioned<T: serde::Serialize>(x: &T) -> Result<Value> {
    Ok(to_versioned_value(x)?)
}

fn paren(p: &Polynomial) -> String {
    if p.terms().count() > 1 {
        format!("({p})")
    } else {
        p.to_string()
    }
}

fn cochains_text(s: &StarProduct) -> String {
    let mut out = String::new();
    for (r, c) in s.cochains().iter().enumerate() {
        out.push_str(&format!("C_{} = {}\n", r + 1, c));
    }
    out.trim_end().to_string()
}

fn product_output(s: &StarProduct, args: &ProductArgs) -> Result<Output> {
    if args.emit_cochains {
        return Ok(Output::ok(cochains_text(s), versioned(s)?));
    }
    let (Some(u), Some(v)) = (&args.u, &args.v) else {
        bail!(starlab::Error::Invalid("give --u and --v, or --emit-cochains".into()));
    };
    let u = input::poly(u, s.dim())?;
    let v = input::poly(v, s.dim())?;
    let prod = s.star_poly(&u, &v)?;
    let text = format!("{}*{} = {}", paren(&u), paren(&v), prod);
    let json = versioned(&json!({ "u": u, "v": v, "order": s.order(), "product": prod }))?;
    Ok(Output::ok(text, json))
}

fn witness_json(w: &AssocWitness) -> Value {
    json!({ "order": w.order, "u": w.u, "v": w.v, "w": w.w, "defect": w.defect })
}

fn run(cli: &Cli) -> Result<Output> {
    let exec = if cli.sequential { Exec::Sequential } else { Exec::default() };
    match &cli.command {
        Command::Star(StarCmd::Moyal { dim, p, args }) => {
            let p = input::poisson(p, *dim)?;
            product_output(&moyal_star(&p, args.order)?, args)
        }
        Command::Star(StarCmd::Cbh { algebra, args }) => {
            let g = input::algebra(algebra)?;
            product_output(&cbh_star(&g, args.order)?, args)
        }
        Command::Star(StarCmd::Kontsevich {
            algebra,
            p,
            dim,
            weights,
            numeric,
            args,
        }) => {
            let p = input::poisson_or_algebra(p.as_deref(), algebra.as_deref(), *dim)?;
            let table = input::weight_table(weights.as_deref())?;
            let mode = if *numeric { WeightMode::Numeric } else { WeightMode::Exact };
            let a = kontsevich_star(&p, args.order, &table, mode)?;
            product_output(&a.star, args)
        }
        Command::Hochschild(HochschildCmd::D { op }) => {
            let c: MultiDiffOp = input::read_json(op)?;
            let d = c.hochschild_d();
            Ok(Output::ok(d.to_string(), versioned(&d)?))
        }
        Command::Hochschild(HochschildCmd::Solve {
            op,
            max_order,
            max_degree,
        }) => {
            let c: MultiDiffOp = input::read_json(op)?;
            let b = solve_coboundary(&c, *max_order, *max_degree)?;
            Ok(Output::ok(b.to_string(), versioned(&b)?))
        }
        Command::Check(CheckCmd::Jacobi {
            p,
            algebra,
            dim,
            max_degree,
        }) => {
            let p = input::poisson_or_algebra(p.as_deref(), algebra.as_deref(), *dim)?;
            let (bound, total) = match max_degree {
                Some(d) => (*d, 3 * d),
                None => (p.jacobi_family_degree(), p.jacobi_family_degree()),
            };
            let w = p.jacobi_witness(bound, total, exec);
            Ok(match w {
                None => Output::ok(
                    format!("Jacobi identity holds on monomial triples of degree ≤ {bound}"),
                    versioned(&json!({ "ok": true, "max_degree": bound }))?,
                ),
                Some(w) => Output {
                    text: format!("Jacobi identity fails: u = {}, v = {}, w = {}, defect = {}", w.u, w.v, w.w, w.defect),
                    json: versioned(&json!({
                        "ok": false,
                        "max_degree": bound,
                        "witness": { "u": w.u, "v": w.v, "w": w.w, "defect": w.defect },
                    }))?,
                    failed: true,
                },
            })
        }
        Command::Check(CheckCmd::Assoc { star, max_degree, tol }) => {
            let s: StarProduct = input::read_json(star)?;
            Ok(match s.assoc_witness_within(*max_degree, *tol, exec) {
                None => Output::ok(
                    format!(
                        "associative through order {} on monomial triples of degree ≤ {max_degree}",
                        s.order()
                    ),
                    versioned(&json!({ "ok": true, "max_degree": max_degree, "tol": tol }))?,
                ),
                Some(w) => Output {
                    text: format!(
                        "order-{} defect at u = {}, v = {}, w = {}: {}",
                        w.order, w.u, w.v, w.w, w.defect
                    ),
                    json: versioned(&json!({
                        "ok": false,
                        "max_degree": max_degree,
                        "tol": tol,
                        "witness": witness_json(&w),
                    }))?,
                    failed: true,
                },
            })
        }
        Command::Equiv(EquivCmd::Solve {
            s1,
            s2,
            max_order,
            max_degree,
        }) => {
            let s1: StarProduct = input::read_json(s1)?;
            let s2: StarProduct = input::read_json(s2)?;
            let e = solve_equivalence(&s1, &s2, *max_order, *max_degree)?;
            let mut text = String::new();
            if let Some(f) = e.param() {
                let f: Vec<String> = f.iter().map(ToString::to_string).collect();
                text.push_str(&format!("f = [{}]\n", f.join(", ")));
            }
            for (r, t) in e.ops().iter().enumerate() {
                text.push_str(&format!("T_{} = {}\n", r + 1, t));
            }
            if e.is_identity() {
                text = "identity".into();
            }
            Ok(Output::ok(text.trim_end().into(), versioned(&e)?))
        }
        Command::Equiv(EquivCmd::Gauge { star, equiv }) => {
            let s: StarProduct = input::read_json(star)?;
            let e: Equivalence = input::read_json(equiv)?;
            let g = gauge(&s, &e)?;
            Ok(Output::ok(cochains_text(&g), versioned(&g)?))
        }
        Command::Equiv(EquivCmd::Bch { star, a, b }) => {
            let s: StarProduct = input::read_json(star)?;
            let n = s.order();
            let a = NuSeries::from_poly(input::poly(a, s.dim())?, n);
            let b = NuSeries::from_poly(input::poly(b, s.dim())?, n);
            let c = star_bch(&s, &a, &b)?;
            Ok(Output::ok(c.to_string(), versioned(&c)?))
        }
        Command::Weights(WeightsCmd::Compute {
            k,
            samples,
            seed,
            threshold,
        }) => {
            let opts = WeightOptions {
                samples: *samples,
                seed: *seed,
                threshold: *threshold,
                exec,
            };
            let t = WeightTable::compute(*k, opts)?;
            let mut text = String::new();
            for w in t.iter() {
                let exact = w.exact.as_ref().map(|x| format!("  = {x}")).unwrap_or_default();
                text.push_str(&format!("{}  {:+.6} ± {:.1e}{exact}\n", w.graph, w.value, w.error));
            }
            let mut json: Value = serde_json::from_str(&t.to_json())?;
            json["job"] = json!({ "k": k, "samples": samples, "seed": seed, "threshold": threshold });
            Ok(Output::ok(text.trim_end().into(), json))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.chain().find_map(|c| c.downcast_ref::<starlab::Error>()).map(starlab::Error::category) {
        Some(Category::Parse) => 2,
        Some(Category::Validation) | None => 3,
        Some(Category::Computation) => 4,
        Some(Category::Io) => 5,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            let doc = match cli.format {
                Format::Text => out.text,
                Format::Json => serde_json::to_string_pretty(&out.json).expect("serializable"),
            };
            // a closed pipe downstream is not an error of ours
            let _ = writeln!(std::io::stdout(), "{doc}");
            if out.failed {
                ExitCode::from(EXIT_CHECK_FAILED)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            let code = exit_code(&e);
            match cli.format {
                Format::Text => eprintln!("error: {e:#}"),
                Format::Json => {
                    let category = e
                        .chain()
                        .find_map(|c| c.downcast_ref::<starlab::Error>())
                        .map(|x| format!("{:?}", x.category()).to_lowercase())
                        .unwrap_or_else(|| "validation".into());
                    let doc = json!({ "error": format!("{e:#}"), "category": category });
                    let doc = to_versioned_json(&doc).expect("serializable");
                    println!("{doc}");
                }
            }
            ExitCode::from(code)
        }
    }
}
