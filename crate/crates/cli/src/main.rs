use std::fs;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde_json::{json, Value as Json};

use hypercalc_core::filters::{self, FilterError, SetFamily};
use hypercalc_core::topology::{compact_by_monads, set_report};
use hypercalc_core::transfer::{Model, Prop, TransferError};
use hypercalc_core::{
    parse_rational, star_member, Analyzer, Backend, Context, DerivativeOutcome, Env, Error, Exponent, Expr,
    IntervalSet, LcNumber, LcValue, LimitOutcome, LimitTarget, Mode, ProbeCatalog, Side, Verdict,
};

const OK: u8 = 0;
const REFUTED: u8 = 1;
const USAGE: u8 = 2;
const FAILURE: u8 = 3;

/// Levi-Civita calculator for non-standard analysis. The infinitesimal is
/// written `d`.
#[derive(Parser)]
#[command(name = "hypercalc", version)]
struct Cli {
    #[command(flatten)]
    config: Config,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Config {
    /// Order bound given to new values (a rational, at least 2).
    #[arg(long, global = true, env = "HYPERCALC_ORDER", default_value = "16")]
    order: String,
    /// Decimal digits for the decimal backend (at least 16).
    #[arg(long, global = true, default_value_t = 50)]
    digits: u32,
    #[arg(long, global = true, value_enum, default_value_t = BackendArg::Exact)]
    backend: BackendArg,
    /// JSON file with `infinitesimals` and `infinite` probe lists.
    #[arg(long, global = true)]
    probes: Option<String>,
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Exact,
    Decimal,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Both,
    Left,
    Right,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Pointwise,
    Uniform,
}

#[derive(Clone, Copy, ValueEnum)]
enum SetOp {
    Union,
    Intersect,
    Difference,
    Complement,
}

#[derive(Args)]
struct Bindings {
    /// Value bound to `x` (an expression in `d`).
    #[arg(long)]
    x: Option<String>,
    /// Value bound to `n` (an expression in `d`).
    #[arg(long)]
    n: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate an expression.
    Eval {
        #[arg(long)]
        expr: String,
        #[command(flatten)]
        bind: Bindings,
    },
    /// Standard part of an expression.
    St {
        #[arg(long)]
        expr: String,
        #[command(flatten)]
        bind: Bindings,
    },
    /// Magnitude class of an expression.
    Classify {
        #[arg(long)]
        expr: String,
        #[command(flatten)]
        bind: Bindings,
    },
    /// Order and infinite closeness of two expressions.
    Compare {
        #[arg(long)]
        lhs: String,
        #[arg(long)]
        rhs: String,
    },
    /// Derivative of a function of `x` at a rational point.
    Derive {
        #[arg(long)]
        expr: String,
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        #[arg(long, default_value_t = 1)]
        nth: u32,
    },
    /// Limit of a function of `x` at a point or at infinity.
    Limit {
        #[arg(long)]
        expr: String,
        /// A rational point, `inf` or `-inf`.
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        #[arg(long, value_enum, default_value_t = SideArg::Both)]
        side: SideArg,
        #[arg(long, default_value = "R")]
        domain: String,
    },
    /// Limit of a sequence in `n`.
    Seqlimit {
        #[arg(long)]
        expr: String,
    },
    /// Continuity at a rational point.
    Cont {
        #[arg(long)]
        expr: String,
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        #[arg(long, default_value = "R")]
        domain: String,
    },
    /// Uniform continuity on a set.
    Ucont {
        #[arg(long)]
        expr: String,
        #[arg(long, default_value = "R")]
        domain: String,
    },
    /// Convergence of a family in `n` and `x` to a limit function.
    Converge {
        #[arg(long)]
        family: String,
        #[arg(long, default_value = "0")]
        limit: String,
        #[arg(long, default_value = "R")]
        domain: String,
        #[arg(long, value_enum, default_value_t = ModeArg::Uniform)]
        mode: ModeArg,
    },
    /// Topological report for a finite union of intervals.
    Set {
        #[arg(long)]
        set: String,
        /// Test whether a value lies in the extension of the set.
        #[arg(long, allow_hyphen_values = true)]
        member: Option<String>,
        #[arg(long, value_enum)]
        op: Option<SetOp>,
        #[arg(long)]
        with: Option<String>,
    },
    /// Filters on a finite universe.
    Filters {
        #[command(subcommand)]
        action: FilterAction,
    },
    /// Bounded propositions and the star transform.
    Transfer {
        #[command(subcommand)]
        action: TransferAction,
    },
}

#[derive(Subcommand)]
enum FilterAction {
    /// Check the filter and ultrafilter properties of a family.
    Check {
        #[arg(long)]
        universe: u32,
        #[arg(long)]
        family: String,
    },
    /// Which part of a partition belongs to an ultrafilter.
    Partition {
        #[arg(long)]
        universe: u32,
        #[arg(long)]
        family: String,
        #[arg(long)]
        parts: String,
    },
    /// List every ultrafilter on a small universe.
    Enumerate {
        #[arg(long)]
        universe: u32,
    },
}

#[derive(Subcommand)]
enum TransferAction {
    /// Star every constant of a proposition.
    Star {
        #[arg(long)]
        prop: String,
    },
    /// Warn about bounds that do not transfer as written.
    Lint {
        #[arg(long)]
        prop: String,
    },
    /// Evaluate a proposition in a finite model.
    Eval {
        #[arg(long)]
        prop: String,
        #[arg(long)]
        model: String,
    },
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e.root() {
            Error::Syntax { .. } | Error::UnknownIdentifier(_) | Error::UnboundVariable(_) => USAGE,
            _ => FAILURE,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<TransferError> for Failure {
    fn from(e: TransferError) -> Self {
        let code = match e {
            TransferError::Syntax { .. }
            | TransferError::UnboundedQuantifier(_)
            | TransferError::FreeVariable(_)
            | TransferError::VariableInBound(_)
            | TransferError::Model(_) => USAGE,
            _ => FAILURE,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<FilterError> for Failure {
    fn from(e: FilterError) -> Self {
        let code = match e {
            FilterError::Syntax { .. }
            | FilterError::UniverseSize(_)
            | FilterError::OutOfUniverse(_)
            | FilterError::TooLargeToEnumerate => USAGE,
            _ => FAILURE,
        };
        Failure { code, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: USAGE, message: message.into() }
}

/// Text and JSON renderings of a result, with its exit code.
struct Output {
    code: u8,
    text: String,
    json: Json,
}

impl Output {
    fn new(code: u8, kind: &str, text: impl Into<String>, mut fields: Json) -> Self {
        let text = text.into();
        fields["schema"] = json!(1);
        fields["kind"] = json!(kind);
        Output { code, text, json: fields }
    }

    fn value(kind: &str, text: impl Into<String>) -> Self {
        let text = text.into();
        Output::new(OK, kind, text.clone(), json!({ "value": text }))
    }

    fn verdict(v: &Verdict) -> Self {
        let code = match v {
            Verdict::Holds { .. } => OK,
            Verdict::Refuted { .. } => REFUTED,
            Verdict::Inconclusive { .. } => FAILURE,
        };
        Output { code, text: v.to_string(), json: v.to_json() }
    }
}

struct Session {
    ctx: Context,
    analyzer: Analyzer,
}

impl Session {
    fn new(config: &Config) -> Result<Self, Failure> {
        let order = parse_rational(&config.order)
            .ok()
            .and_then(|q| hypercalc_core::value::rational_to_exponent(&q))
            .ok_or_else(|| usage(format!("invalid order bound `{}`", config.order)))?;
        if order < Exponent::from_integer(2) {
            return Err(usage("order bound must be at least 2"));
        }
        if config.digits < 16 {
            return Err(usage("digits must be at least 16"));
        }
        let backend = match config.backend {
            BackendArg::Exact => Backend::Exact,
            BackendArg::Decimal => Backend::Decimal { digits: config.digits },
        };
        let ctx = Context::default().with_order(order).with_backend(backend);
        let analyzer = match &config.probes {
            None => Analyzer::new(ctx),
            Some(path) => {
                let src = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {path}: {e}")))?;
                Analyzer::with_catalog(ctx, ProbeCatalog::from_json(&src, backend)?)
            }
        };
        Ok(Session { ctx, analyzer })
    }

    fn value(&self, src: &str) -> Result<LcValue, Failure> {
        Ok(Expr::parse(src)?.eval(&Env::default(), &self.ctx)?)
    }

    fn eval(&self, src: &str, bind: &Bindings) -> Result<LcValue, Failure> {
        let mut env = Env::default();
        if let Some(x) = &bind.x {
            env.x = Some(self.value(x)?);
        }
        if let Some(n) = &bind.n {
            env.n = Some(self.value(n)?);
        }
        Ok(Expr::parse(src)?.eval(&env, &self.ctx)?)
    }
}

fn rational(src: &str) -> Result<BigRational, Failure> {
    parse_rational(src).map_err(|_| usage(format!("`{src}` is not a rational number")))
}

fn set(src: &str) -> Result<IntervalSet, Failure> {
    Ok(IntervalSet::parse(src)?)
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    let s = Session::new(&cli.config)?;
    let a = &s.analyzer;
    Ok(match &cli.command {
        Command::Eval { expr, bind } => Output::value("Value", s.eval(expr, bind)?.to_string()),
        Command::St { expr, bind } => Output::value("StandardPart", s.eval(expr, bind)?.standard_part()?.to_string()),
        Command::Classify { expr, bind } => {
            let v = s.eval(expr, bind)?;
            let token = v.escape_token().map(|t| t.to_string());
            match (v.classify(), token) {
                (Ok(class), token) => {
                    Output::new(OK, "Class", class.to_string(), json!({ "value": class.to_string(), "escape": token }))
                }
                (Err(_), Some(token)) => Output::new(OK, "Class", token.clone(), json!({ "value": null, "escape": token })),
                (Err(e), None) => return Err(e.into()),
            }
        }
        Command::Compare { lhs, rhs } => {
            let (x, y) = (s.value(lhs)?, s.value(rhs)?);
            let symbol = match x.compare(&y)? {
                std::cmp::Ordering::Less => "<",
                std::cmp::Ordering::Equal => "=",
                std::cmp::Ordering::Greater => ">",
            };
            let close = x.approx(&y)?;
            let text = format!("{symbol}{}", if close { " (infinitely close)" } else { "" });
            Output::new(OK, "Comparison", text, json!({ "order": symbol, "infinitely_close": close }))
        }
        Command::Derive { expr, at, nth } => match a.derivative(&Expr::parse(expr)?, &rational(at)?, *nth)? {
            DerivativeOutcome::Value(v) => Output::value("Derivative", v.to_string()),
            DerivativeOutcome::NoDerivative { witnesses } => {
                let text = witnesses.iter().map(|(p, v)| format!("{p} -> {v}")).collect::<Vec<_>>().join(", ");
                Output::new(REFUTED, "NoDerivative", format!("no derivative: {text}"), json!({ "witnesses": witnesses }))
            }
        },
        Command::Limit { expr, at, side, domain } => {
            let target = match at.as_str() {
                "inf" | "+inf" => LimitTarget::PosInf,
                "-inf" => LimitTarget::NegInf,
                c => LimitTarget::Point(
                    rational(c)?,
                    match side {
                        SideArg::Both => Side::Both,
                        SideArg::Left => Side::Left,
                        SideArg::Right => Side::Right,
                    },
                ),
            };
            limit_output(a.limit(&Expr::parse(expr)?, &target, &set(domain)?)?)
        }
        Command::Seqlimit { expr } => limit_output(a.seq_limit(&Expr::parse(expr)?)?),
        Command::Cont { expr, at, domain } => Output::verdict(&a.continuity_at(&Expr::parse(expr)?, &rational(at)?, &set(domain)?)?),
        Command::Ucont { expr, domain } => Output::verdict(&a.uniform_continuity(&Expr::parse(expr)?, &set(domain)?)?),
        Command::Converge { family, limit, domain, mode } => {
            let mode = match mode {
                ModeArg::Pointwise => Mode::Pointwise,
                ModeArg::Uniform => Mode::Uniform,
            };
            Output::verdict(&a.convergence(&Expr::parse(family)?, &set(domain)?, &Expr::parse(limit)?, mode)?)
        }
        Command::Set { set: src, member, op, with } => set_command(&s, &set(src)?, member.as_deref(), *op, with.as_deref())?,
        Command::Filters { action } => filters_command(action)?,
        Command::Transfer { action } => transfer_command(action)?,
    })
}

fn limit_output(outcome: LimitOutcome) -> Output {
    match outcome {
        LimitOutcome::Value(v) => Output::value("Limit", v.to_string()),
        LimitOutcome::NoLimit { witnesses } => {
            let pairs: Vec<(String, String)> = witnesses.iter().map(|(p, v)| (p.clone(), v.to_string())).collect();
            let text = pairs.iter().map(|(p, v)| format!("{p} -> {v}")).collect::<Vec<_>>().join(", ");
            Output::new(REFUTED, "NoLimit", format!("no limit: {text}"), json!({ "witnesses": pairs }))
        }
        LimitOutcome::Inconclusive(reason) => {
            Output::new(FAILURE, "Inconclusive", format!("inconclusive: {reason}"), json!({ "message": reason }))
        }
    }
}

fn set_command(s: &Session, set: &IntervalSet, member: Option<&str>, op: Option<SetOp>, with: Option<&str>) -> Result<Output, Failure> {
    if let Some(src) = member {
        let x = match LcNumber::parse(src, s.ctx.backend) {
            Ok(n) => LcValue::Series(n),
            Err(_) => s.value(src)?,
        };
        let inside = star_member(&x, set)?;
        return Ok(Output::new(OK, "Membership", inside.to_string(), json!({ "member": inside })));
    }
    if let Some(op) = op {
        let other = match (op, with) {
            (SetOp::Complement, _) => IntervalSet::empty(),
            (_, Some(w)) => IntervalSet::parse(w)?,
            (_, None) => return Err(usage("--with is required for this operation")),
        };
        let result = match op {
            SetOp::Union => set.union(&other),
            SetOp::Intersect => set.intersect(&other),
            SetOp::Difference => set.difference(&other),
            SetOp::Complement => set.complement(),
        };
        return Ok(Output::value("Set", result.to_string()));
    }
    let r = set_report(set);
    debug_assert_eq!(r.compact, compact_by_monads(set));
    let text = format!(
        "open: {}\nclosed: {}\nbounded: {}\ncompact: {}\nclosure: {}\ninterior: {}",
        r.open, r.closed, r.bounded, r.compact, r.closure, r.interior
    );
    let fields = serde_json::to_value(&r).expect("report serializes");
    Ok(Output::new(OK, "SetReport", text, fields))
}

fn filters_command(action: &FilterAction) -> Result<Output, Failure> {
    Ok(match action {
        FilterAction::Check { universe, family } => {
            let f = SetFamily::parse(*universe, family)?;
            match f.check_filter() {
                Err(v) => Output::new(REFUTED, "NotAFilter", format!("not a filter: {v}"), json!({ "violation": v.to_string() })),
                Ok(()) => {
                    let ultra = f.is_ultrafilter()?;
                    let principal = f.principal_element();
                    let text = format!(
                        "filter: yes\nultrafilter: {}{}",
                        if ultra { "yes" } else { "no" },
                        principal.map(|i| format!(" (principal at {i})")).unwrap_or_default()
                    );
                    Output::new(OK, "Filter", text, json!({ "ultrafilter": ultra, "principal": principal }))
                }
            }
        }
        FilterAction::Partition { universe, family, parts } => {
            let f = SetFamily::parse(*universe, family)?;
            let parts = filters::parse_masks(*universe, parts)?;
            let i = f.partition_check(&parts)?;
            let text = format!("part {} {}", i + 1, filters::format_mask(parts[i]));
            Output::new(OK, "Partition", text, json!({ "index": i + 1, "part": filters::format_mask(parts[i]) }))
        }
        FilterAction::Enumerate { universe } => {
            let all = filters::all_ultrafilters(*universe)?;
            let lines: Vec<String> = all.iter().map(|u| u.to_string()).collect();
            Output::new(OK, "Ultrafilters", lines.join("\n"), json!({ "count": all.len(), "ultrafilters": lines }))
        }
    })
}

fn transfer_command(action: &TransferAction) -> Result<Output, Failure> {
    Ok(match action {
        TransferAction::Star { prop } => Output::value("Proposition", Prop::parse(prop)?.star_transform()?.to_string()),
        TransferAction::Lint { prop } => {
            let warnings = Prop::parse(prop)?.lint();
            let text = if warnings.is_empty() {
                "no warnings".to_string()
            } else {
                warnings.iter().map(|w| format!("warning: {w}")).collect::<Vec<_>>().join("\n")
            };
            Output::new(OK, "Lint", text, json!({ "warnings": warnings }))
        }
        TransferAction::Eval { prop, model } => {
            let src = fs::read_to_string(model).map_err(|e| usage(format!("cannot read {model}: {e}")))?;
            let truth = Model::from_json(&src)?.eval(&Prop::parse(prop)?)?;
            let code = if truth { OK } else { REFUTED };
            Output::new(code, "Truth", truth.to_string(), json!({ "value": truth }))
        }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { USAGE } else { OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(out) => {
            if cli.config.json {
                println!("{}", out.json);
            } else {
                println!("{}", out.text);
            }
            ExitCode::from(out.code)
        }
        Err(f) => {
            if cli.config.json {
                println!("{}", json!({ "schema": 1, "kind": "Error", "message": f.message }));
            }
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
