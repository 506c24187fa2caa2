//! Command-line driver: argument model, input parsing and command dispatch.
//!
//! Every command writes exactly one JSON document to standard output (or to
//! `--out`). Exit status 0 means success, 2 a negative verdict, 1 an error.

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use rofsum::analyze::{
    f_family_report, match_f_family, match_m_family, match_sym4, refute_read_once_3var,
    refute_sum2, structural_report, RopVerdict, Sum2Verdict,
};
use rofsum::decompose::{
    decompose_f, decompose_generic, decompose_m, decompose_sym4, verify_decomposition,
    Decomposition, FOutcome,
};
use rofsum::mpoly::parse_poly;
use rofsum::oracle::{cross_check_f_family, OracleLimits, RopSet};
use rofsum::{gen_f, gen_m, gen_symmetric, Error, FieldCtx, Poly, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NEGATIVE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "rofsum",
    version,
    about = "Sums of read-once polynomials: constructions, checks and exhaustive search"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalOpts {
    /// Field: `q`, `q-reals` or `fp:<p>`.
    #[arg(long, global = true, default_value = "q")]
    pub field: String,
    /// Write the JSON result here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Directory for cached search tables.
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    /// Largest variable count the search tables may use.
    #[arg(long, global = true, default_value_t = 5)]
    pub max_n: usize,
    /// Largest prime the search tables may use.
    #[arg(long, global = true, default_value_t = 5)]
    pub max_p: u64,
    /// Worker threads for the exhaustive search (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Ambient variable count for parsed polynomials (default: largest index
    /// used); also selects the table size for `oracle`.
    #[arg(long, global = true)]
    pub n: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print a generated polynomial, e.g. `gen:S:4,2`.
    Gen { spec: String },
    /// Emit a verified decomposition into read-once summands.
    Decompose {
        poly: String,
        /// auto, generic, symmetric-m, sym4-table or f-family.
        #[arg(long, default_value = "auto")]
        construction: String,
    },
    /// Report the scalar and structural conditions for a polynomial.
    Check { poly: String },
    /// Re-verify a decomposition document (`-` reads standard input).
    Verify { file: String },
    /// Exhaustive tables over a small prime field.
    Oracle {
        #[arg(long)]
        p: u64,
        /// Allow sum queries on the largest tables.
        #[arg(long)]
        force: bool,
        #[command(subcommand)]
        action: OracleAction,
    },
    /// Try to refute membership in the two-summand class (4 variables) or
    /// read-onceness (3 variables).
    Refute { poly: String },
}

#[derive(Subcommand, Debug)]
pub enum OracleAction {
    /// Build (or load) the table and print its size.
    Build,
    /// Is the polynomial a sum of at most `k` read-once polynomials?
    Member {
        #[arg(long, default_value_t = 1)]
        k: usize,
        poly: String,
    },
    /// Compare the scalar conditions against search for every weight triple.
    CrossCheck,
}

/// Result of running a command: a JSON document and an exit status.
pub struct Outcome {
    pub json: Value,
    pub status: i32,
}

impl Outcome {
    fn ok(json: Value) -> Self {
        Outcome {
            json,
            status: EXIT_OK,
        }
    }

    fn negative(json: Value) -> Self {
        Outcome {
            json,
            status: EXIT_NEGATIVE,
        }
    }
}

/// Parses a polynomial or generator shorthand (`gen:S:n,k`, `gen:M:n,a,b`,
/// `gen:f:a,b,c`). A leading `@` reads the text from a file.
pub fn parse_input(ctx: FieldCtx, text: &str, nvars: Option<usize>) -> Result<Poly> {
    let owned;
    let text = match text.strip_prefix('@') {
        Some(path) => {
            owned = fs::read_to_string(path)?;
            owned.trim()
        }
        None => text.trim(),
    };
    let Some(rest) = text.strip_prefix("gen:") else {
        return parse_poly(ctx, text, nvars);
    };
    let (kind, args) = rest.split_once(':').ok_or_else(|| Error::Syntax {
        pos: 4,
        msg: "expected `gen:<kind>:<args>`".into(),
    })?;
    let args: Vec<&str> = args.split(',').map(str::trim).collect();
    let arity = |k: usize| {
        if args.len() == k {
            Ok(())
        } else {
            Err(Error::WrongArity {
                expected: k,
                found: args.len(),
            })
        }
    };
    let count = |s: &str| {
        s.parse::<usize>().map_err(|_| Error::Syntax {
            pos: 0,
            msg: format!("expected a count, found `{s}`"),
        })
    };
    let p = match kind {
        "S" => {
            arity(2)?;
            let (n, k) = (count(args[0])?, count(args[1])?);
            if k > n {
                return Err(Error::DegreeTooHigh {
                    found: k as u32,
                    max: n as u32,
                });
            }
            gen_symmetric(ctx, n, k)?
        }
        "M" => {
            arity(3)?;
            gen_m(
                ctx,
                count(args[0])?,
                &ctx.parse_scalar(args[1])?,
                &ctx.parse_scalar(args[2])?,
            )?
        }
        "f" => {
            arity(3)?;
            let w: Vec<_> = args
                .iter()
                .map(|a| ctx.parse_scalar(a))
                .collect::<Result<_>>()?;
            gen_f(ctx, &w[0], &w[1], &w[2])?
        }
        other => {
            return Err(Error::Syntax {
                pos: 4,
                msg: format!("unknown generator `{other}`"),
            })
        }
    };
    match nvars {
        Some(n) if n != p.nvars() => p.embed(n),
        _ => Ok(p),
    }
}

fn limits(g: &GlobalOpts, force: bool) -> OracleLimits {
    OracleLimits {
        max_n: g.max_n,
        max_p: g.max_p,
        allow_large_sum_queries: force,
    }
}

/// Picks the most specific construction that matches the input.
pub fn auto_decompose(p: &Poly) -> Result<std::result::Result<Decomposition, Value>> {
    let ctx = *p.ctx();
    if let Some([a, b, c]) = match_f_family(p) {
        return Ok(match decompose_f(ctx, &a, &b, &c)? {
            FOutcome::Expressible(d) => Ok(d),
            FOutcome::NotExpressible(r) => Err(r.to_json()),
        });
    }
    if let Some((a, b)) = match_m_family(p) {
        return Ok(Ok(decompose_m(ctx, p.nvars(), &a, &b)?));
    }
    if let Some(a) = match_sym4(p) {
        return Ok(Ok(decompose_sym4(ctx, &a)?));
    }
    Ok(Ok(decompose_generic(p)?))
}

fn decompose_cmd(ctx: FieldCtx, p: &Poly, construction: &str) -> Result<Outcome> {
    let not_matching = |what: &str| Error::Format(format!("input is not a {what} polynomial"));
    let result = match construction {
        "auto" => auto_decompose(p)?,
        "generic" => Ok(decompose_generic(p)?),
        "symmetric-m" => {
            let (a, b) = match_m_family(p).ok_or_else(|| not_matching("A*S_n^n + B*S_n^(n-1)"))?;
            Ok(decompose_m(ctx, p.nvars(), &a, &b)?)
        }
        "sym4-table" => Ok(decompose_sym4(
            ctx,
            &match_sym4(p).ok_or_else(|| not_matching("4-variate symmetric"))?,
        )?),
        "f-family" => {
            let [a, b, c] = match_f_family(p).ok_or_else(|| not_matching("weighted quadratic"))?;
            match decompose_f(ctx, &a, &b, &c)? {
                FOutcome::Expressible(d) => Ok(d),
                FOutcome::NotExpressible(r) => Err(r.to_json()),
            }
        }
        other => return Err(Error::Format(format!("unknown construction `{other}`"))),
    };
    Ok(match result {
        Ok(d) => Outcome::ok(d.to_json()),
        Err(report) => {
            Outcome::negative(json!({ "verdict": "NotExpressible", "conditions": report }))
        }
    })
}

fn check_cmd(ctx: FieldCtx, p: &Poly) -> Result<Outcome> {
    if let Some([a, b, c]) = match_f_family(p) {
        let mut v = f_family_report(ctx, &a, &b, &c)?.to_json();
        v["family"] = json!("f");
        v["weights"] = json!([a.to_string(), b.to_string(), c.to_string()]);
        return Ok(Outcome::ok(v));
    }
    let mut v = structural_report(p)?.to_json();
    v["family"] = Value::Null;
    Ok(Outcome::ok(v))
}

fn verify_cmd(ctx: Option<FieldCtx>, file: &str) -> Result<Outcome> {
    let text = if file == "-" {
        std::io::read_to_string(std::io::stdin())?
    } else {
        fs::read_to_string(file)?
    };
    let doc: Value = serde_json::from_str(&text).map_err(|e| Error::Format(e.to_string()))?;
    let mut d = Decomposition::from_json(&doc, ctx)?;
    let ok = verify_decomposition(&mut d);
    let v = json!({
        "verified": ok,
        "construction": d.construction.as_str(),
        "summands": d.len(),
        "target": d.target.to_string(),
    });
    Ok(if ok {
        Outcome::ok(v)
    } else {
        Outcome::negative(v)
    })
}

fn refute_cmd(p: &Poly) -> Result<Outcome> {
    if p.nvars() == 4 && p.vars().len() != 3 {
        let verdict = refute_sum2(p)?;
        let v = verdict.to_json();
        return Ok(match verdict {
            Sum2Verdict::RefutedNotSum2(_) => Outcome::negative(v),
            _ => Outcome::ok(v),
        });
    }
    match refute_read_once_3var(p)? {
        RopVerdict::NotRop => Ok(Outcome::negative(json!({ "verdict": "NotROP" }))),
        RopVerdict::Inconclusive { var, value } => Ok(Outcome::ok(json!({
            "verdict": "Inconclusive",
            "linearizing_restriction": { "var": var, "value": value.to_string() },
        }))),
    }
}

fn oracle_cmd(g: &GlobalOpts, p: u64, force: bool, action: &OracleAction) -> Result<Outcome> {
    let lim = limits(g, force);
    let ctx = FieldCtx::prime(p)?;
    let n = match (g.n, action) {
        (Some(n), _) => n,
        (None, OracleAction::CrossCheck) => 4,
        (None, OracleAction::Member { poly, .. }) => parse_input(ctx, poly, None)?.nvars(),
        (None, OracleAction::Build) => {
            return Err(Error::Format("`oracle build` needs --n".into()))
        }
    };
    let rs = RopSet::load_or_build(p, n, &lim, g.cache_dir.as_deref())?;
    match action {
        OracleAction::Build => Ok(Outcome::ok(rs.summary_json())),
        OracleAction::Member { k, poly } => {
            let poly = parse_input(ctx, poly, Some(n))?;
            let found = rs.sum_membership(&poly, *k, &lim)?;
            let v = json!({
                "p": p,
                "n": n,
                "k": k,
                "poly": poly.to_string(),
                "member": found.is_some(),
                "summands": found.as_ref().map(|parts| parts.iter().map(ToString::to_string).collect::<Vec<_>>()),
            });
            Ok(if found.is_some() {
                Outcome::ok(v)
            } else {
                Outcome::negative(v)
            })
        }
        OracleAction::CrossCheck => {
            let report = cross_check_f_family(&rs, &lim)?;
            let v = report.to_json();
            Ok(if report.disagreements.is_empty() {
                Outcome::ok(v)
            } else {
                Outcome::negative(v)
            })
        }
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let g = &cli.global;
    if g.threads > 0 {
        // Only the first configuration wins; later calls in one process are harmless.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(g.threads)
            .build_global();
    }
    let field_given = std::env::args().any(|a| a == "--field" || a.starts_with("--field="));
    let ctx: FieldCtx = g.field.parse()?;
    match &cli.command {
        Command::Gen { spec } => {
            let p = parse_input(ctx, spec, g.n)?;
            Ok(Outcome::ok(
                json!({ "field": ctx.to_string(), "nvars": p.nvars(), "poly": p.to_string() }),
            ))
        }
        Command::Decompose { poly, construction } => {
            let p = parse_input(ctx, poly, g.n)?;
            decompose_cmd(ctx, &p, construction)
        }
        Command::Check { poly } => check_cmd(ctx, &parse_input(ctx, poly, g.n)?),
        Command::Verify { file } => verify_cmd(field_given.then_some(ctx), file),
        Command::Oracle { p, force, action } => oracle_cmd(g, *p, *force, action),
        Command::Refute { poly } => refute_cmd(&parse_input(ctx, poly, g.n)?),
    }
}

/// Parses arguments, runs, prints, and returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let status = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return status;
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            let text = serde_json::to_string_pretty(&outcome.json).expect("serializable");
            match &cli.global.out {
                Some(path) => {
                    if let Err(e) = fs::write(path, format!("{text}\n")) {
                        let e = Error::from(e);
                        eprintln!("error[{}]: {e}", e.code());
                        return EXIT_ERROR;
                    }
                }
                None => println!("{text}"),
            }
            outcome.status
        }
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            EXIT_ERROR
        }
    }
}
