//! Command-line front end. `run` takes argv and writers so tests can drive it.
//!
//! Exit codes: 0 ok, 2 a check failed, 3 search exhausted, 4 bad input.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_rational::Rational64;
use num_traits::{One, Zero};

use crate::bigraded::LineBundleSum;
use crate::certify::{coh_table_with, describe_record, theorem_certify, CertifyConfig, TableFormat, Window};
use crate::document::{fmt_q, parse_q, MonadDocument, ParamsDoc};
use crate::error::NatcohError;
use crate::fixture;
use crate::linalg::DEFAULT_PRIME;
use crate::monad::HilbertParams;
use crate::search::{monad_shape, search, SearchConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 2;
pub const EXIT_EXHAUSTED: i32 = 3;
pub const EXIT_INPUT: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "natcoh", version, about = "Monads with natural cohomology on P1 x P1")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Search for a monad with χ(E(x,y)) = r(xy - γ) and certify it
    Search(SearchArgs),
    /// Recheck a monad document from scratch
    Verify(VerifyArgs),
    /// Print the cohomology table of a monad document
    Table(VerifyArgs),
    /// Write the Serre dual of a monad document
    Dual(DualArgs),
    /// Derive the monad shape for P = (x-α)(y-β) - γ
    Shape(ShapeArgs),
    /// Emit and verify a built-in worked example
    Example(ExampleArgs),
}

#[derive(Debug, Args)]
struct Tuning {
    /// Random seed (falls back to NATCOH_SEED, then 0)
    #[arg(long, env = "NATCOH_SEED", default_value_t = 0)]
    seed: u64,
    /// Coefficient height for random draws
    #[arg(long, default_value_t = 100)]
    height: u64,
    /// Attempts before giving up
    #[arg(long, default_value_t = 10)]
    retries: u32,
    /// Screening prime, below 2^32
    #[arg(long, default_value_t = DEFAULT_PRIME)]
    prime: u64,
    /// Twist window a0:a1:b0:b1
    #[arg(long, default_value = "-6:6:-6:6", allow_hyphen_values = true)]
    window: String,
}

#[derive(Debug, Args)]
struct SearchArgs {
    #[arg(long, allow_hyphen_values = true)]
    gamma: String,
    /// Rank r of E (default: smallest r clearing denominators, at least 2)
    #[arg(long)]
    rank_multiple: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    path: PathBuf,
    #[arg(long, default_value = "text")]
    format: String,
    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Debug, Args)]
struct DualArgs {
    path: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ShapeArgs {
    #[arg(long, allow_hyphen_values = true, default_value = "0")]
    alpha: String,
    #[arg(long, allow_hyphen_values = true, default_value = "0")]
    beta: String,
    #[arg(long, allow_hyphen_values = true)]
    gamma: String,
    #[arg(long)]
    rank_multiple: Option<u32>,
    #[arg(long, default_value_t = 3)]
    shift_bound: i64,
}

#[derive(Debug, Args)]
struct ExampleArgs {
    name: String,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "text")]
    format: String,
    #[command(flatten)]
    tuning: Tuning,
}

/// Result of a command: exit code plus the stdout and stderr text.
struct Outcome {
    code: i32,
    out: String,
    err: String,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            code: EXIT_OK,
            out: String::new(),
            err: String::new(),
        }
    }

    fn fail(code: i32, msg: impl std::fmt::Display) -> Self {
        Outcome {
            code,
            out: String::new(),
            err: format!("error: {msg}\n"),
        }
    }
}

pub fn exit_code_for(e: &NatcohError) -> i32 {
    match e {
        NatcohError::RetriesExhausted { .. } => EXIT_EXHAUSTED,
        NatcohError::CompositionNonzero(..)
        | NatcohError::MixedMonadCohomology(_)
        | NatcohError::NotAMonad(..)
        | NatcohError::SplitTypeMismatch(_) => EXIT_FAIL,
        _ => EXIT_INPUT,
    }
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

impl Tuning {
    fn config(&self) -> Result<CertifyConfig, Outcome> {
        if !is_prime(self.prime) || self.prime < 3 || self.prime >= 1 << 32 {
            return Err(Outcome::fail(EXIT_INPUT, format!("--prime {} must be an odd prime below 2^32", self.prime)));
        }
        let window: Window = self.window.parse().map_err(|e| Outcome::fail(EXIT_INPUT, e))?;
        Ok(CertifyConfig {
            search: SearchConfig {
                seed: self.seed,
                max_retries: self.retries,
                height: self.height.max(1),
                prime: self.prime,
                ..SearchConfig::default()
            },
            window,
            t_bound: None,
        })
    }
}

fn read_doc(path: &Path) -> Result<MonadDocument, Outcome> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Outcome::fail(EXIT_INPUT, format!("cannot read {}: {e}", path.display())))?;
    MonadDocument::parse(&text).map_err(|e| Outcome::fail(EXIT_INPUT, e))
}

fn write_or_print(out: &mut Outcome, path: Option<&Path>, text: &str) {
    match path {
        Some(p) => {
            if let Err(e) = std::fs::write(p, text) {
                *out = Outcome::fail(EXIT_INPUT, format!("cannot write {}: {e}", p.display()));
            }
        }
        None => out.out.push_str(text),
    }
}

fn default_r(gamma: Rational64) -> u32 {
    HilbertParams::minimal_r(Rational64::zero(), Rational64::zero(), gamma)
}

fn cmd_search(a: &SearchArgs) -> Outcome {
    let cfg = match a.tuning.config() {
        Ok(c) => c,
        Err(o) => return o,
    };
    let gamma = match parse_q(&a.gamma) {
        Ok(g) => g,
        Err(e) => return Outcome::fail(EXIT_INPUT, e),
    };
    let r = a.rank_multiple.unwrap_or_else(|| default_r(gamma));
    let p = match HilbertParams::new(r, gamma) {
        Ok(p) => p,
        Err(e) => return Outcome::fail(EXIT_INPUT, e),
    };
    let (m, report) = match search(&p, &cfg.search) {
        Ok(x) => x,
        Err(NatcohError::RetriesExhausted { attempts, last_report }) => {
            let mut o = Outcome::fail(EXIT_EXHAUSTED, format!("no monad after {attempts} attempts"));
            if let Some(f) = last_report.as_deref().and_then(|r| r.first_failure()) {
                let _ = writeln!(o.err, "last failure: {}", describe_record(f));
            }
            return o;
        }
        Err(e) => return Outcome::fail(exit_code_for(&e), e),
    };
    let cert = theorem_certify(&m, &p, &cfg);
    let mut o = Outcome::new();
    let _ = writeln!(
        o.out,
        "r={} gamma={} seed={} attempt={} A={} B={} C={}",
        p.r,
        fmt_q(p.gamma),
        cfg.search.seed,
        report.attempt.unwrap_or(0),
        shown(m.a()),
        shown(m.b()),
        shown(m.c())
    );
    let _ = writeln!(
        o.out,
        "certificate: {} digest={}",
        if cert.passed() { "pass" } else { "fail" },
        cert.digest
    );
    if let Some(f) = cert.first_failure() {
        o.code = EXIT_FAIL;
        let _ = writeln!(o.err, "first violation: {f}");
    }
    let doc = MonadDocument::from_monad(&m, Some(ParamsDoc::from_params(&p, Some(cfg.search.seed))), Some(cert));
    let json = doc.to_json();
    match &a.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, json) {
                return Outcome::fail(EXIT_INPUT, format!("cannot write {}: {e}", path.display()));
            }
        }
        None => o.out.push_str(&json),
    }
    o
}

fn shown(s: &LineBundleSum) -> String {
    if s.is_empty() {
        "0".into()
    } else {
        s.to_string()
    }
}

/// Everything `verify` recomputes; shared with `example`.
fn verify_document(doc: &MonadDocument, cfg: &CertifyConfig, fmt: TableFormat) -> Outcome {
    let m = match doc.to_monad() {
        Ok(m) => m,
        Err(e) => return Outcome::fail(EXIT_INPUT, e),
    };
    let mut o = Outcome::new();
    let mut first: Option<String> = None;
    let mut line = |o: &mut Outcome, ok: bool, what: String| {
        let _ = writeln!(o.out, "{} {what}", if ok { "PASS" } else { "FAIL" });
        if !ok && first.is_none() {
            first = Some(what);
        }
    };

    if let Some((i, j)) = m.composition_defect() {
        line(&mut o, false, format!("g∘f = 0: entry ({i},{j}) is nonzero"));
        o.code = EXIT_FAIL;
        let _ = writeln!(o.err, "first violation: {}", first.unwrap_or_default());
        return o;
    }
    line(&mut o, true, "g∘f = 0".into());

    let p = match doc.params_or_infer(&m) {
        Ok(p) => p,
        Err(e) => return Outcome::fail(EXIT_INPUT, e),
    };
    let _ = writeln!(o.out, "params: r={} gamma={}", p.r, fmt_q(p.gamma));

    let cert = theorem_certify(&m, &p, cfg);
    for r in &cert.conditions.records {
        if r.name != "g∘f = 0" {
            line(&mut o, r.passed, describe_record(r));
        }
    }
    for c in &cert.points {
        let h = c.h.map(|h| format!("{h:?}")).unwrap_or_else(|| c.error.clone().unwrap_or_default());
        line(&mut o, c.passed, format!("natural at {} ({}): h = {h}", c.twist, c.role));
    }

    match coh_table_with(&m, cfg.window, &cfg.search.rank_config()) {
        Ok(t) => {
            let v = t.violations();
            line(&mut o, v.is_empty(), format!("table {} natural, violations: {v:?}", cfg.window));
            o.out.push_str(&t.render(fmt));
        }
        Err(e) => line(&mut o, false, format!("table {}: {e}", cfg.window)),
    }
    line(
        &mut o,
        cert.passed(),
        format!("theorem certificate (window check {:?})", cert.window_check.status).to_lowercase(),
    );
    if let Some(stored) = &doc.certificate {
        line(
            &mut o,
            stored.digest == cert.digest,
            format!("stored digest matches ({})", cert.digest),
        );
    }
    if let Some(f) = first {
        o.code = EXIT_FAIL;
        let _ = writeln!(o.err, "first violation: {f}");
    }
    o
}

fn cmd_verify(a: &VerifyArgs) -> Outcome {
    let cfg = match a.tuning.config() {
        Ok(c) => c,
        Err(o) => return o,
    };
    let fmt: TableFormat = match a.format.parse() {
        Ok(f) => f,
        Err(e) => return Outcome::fail(EXIT_INPUT, e),
    };
    match read_doc(&a.path) {
        Ok(doc) => verify_document(&doc, &cfg, fmt),
        Err(o) => o,
    }
}

fn cmd_table(a: &VerifyArgs) -> Outcome {
    let cfg = match a.tuning.config() {
        Ok(c) => c,
        Err(o) => return o,
    };
    let fmt: TableFormat = match a.format.parse() {
        Ok(f) => f,
        Err(e) => return Outcome::fail(EXIT_INPUT, e),
    };
    let doc = match read_doc(&a.path) {
        Ok(d) => d,
        Err(o) => return o,
    };
    let m = match doc.to_monad() {
        Ok(m) => m,
        Err(e) => return Outcome::fail(EXIT_INPUT, e),
    };
    if let Some((i, j)) = m.composition_defect() {
        return Outcome::fail(EXIT_FAIL, format!("g∘f is nonzero at entry ({i},{j})"));
    }
    match coh_table_with(&m, cfg.window, &cfg.search.rank_config()) {
        Ok(t) => {
            let mut o = Outcome::new();
            o.out = t.render(fmt);
            if !t.all_natural() {
                o.code = EXIT_FAIL;
                let _ = writeln!(o.err, "natural cohomology fails at {:?}", t.violations());
            }
            o
        }
        Err(e) => Outcome::fail(exit_code_for(&e), e),
    }
}

fn cmd_dual(a: &DualArgs) -> Outcome {
    let doc = match read_doc(&a.path) {
        Ok(d) => d,
        Err(o) => return o,
    };
    match doc.dual() {
        Ok(d) => {
            let mut o = Outcome::new();
            write_or_print(&mut o, a.out.as_deref(), &d.to_json());
            o
        }
        Err(e) => Outcome::fail(EXIT_INPUT, e),
    }
}

fn cmd_shape(a: &ShapeArgs) -> Outcome {
    let parsed = (parse_q(&a.alpha), parse_q(&a.beta), parse_q(&a.gamma));
    let (alpha, beta, gamma) = match parsed {
        (Ok(x), Ok(y), Ok(z)) => (x, y, z),
        (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => return Outcome::fail(EXIT_INPUT, e),
    };
    let r = a
        .rank_multiple
        .unwrap_or_else(|| HilbertParams::minimal_r(alpha, beta, gamma));
    let p = match HilbertParams::general(r, alpha, beta, gamma) {
        Ok(p) => p,
        Err(e) => return Outcome::fail(EXIT_INPUT, e),
    };
    match monad_shape(&p, a.shift_bound) {
        Ok(s) => {
            let mut o = Outcome::new();
            let kind = serde_json::to_value(s.kind).expect("serializable");
            let _ = writeln!(o.out, "P(x,y) = {}{} - {}", factor('x', alpha), factor('y', beta), fmt_q(gamma));
            let _ = writeln!(o.out, "r: {}", s.r);
            let _ = writeln!(o.out, "shape: {}", kind.as_str().unwrap_or("?"));
            let _ = writeln!(o.out, "shift: ({},{})", s.shift.0, s.shift.1);
            let _ = writeln!(o.out, "corners rQ(-1,-1), rQ(0,-1), rQ(-1,0), rQ(0,0): {:?}", s.corners);
            let _ = writeln!(o.out, "A: {}", shown(&s.a));
            let _ = writeln!(o.out, "B: {}", shown(&s.b));
            let _ = writeln!(o.out, "C: {}", shown(&s.c));
            if alpha.is_zero() && beta.is_zero() && gamma > Rational64::one() && s.shift == (0, 0) {
                let _ = writeln!(o.out, "(this is the searched γ > 1 monad)");
            }
            o
        }
        Err(e) => Outcome::fail(EXIT_INPUT, e),
    }
}

/// "x", "(x - 1/2)" or "(x + 1/2)"
fn factor(var: char, shift: Rational64) -> String {
    if shift.is_zero() {
        var.to_string()
    } else if shift > Rational64::zero() {
        format!("({var} - {})", fmt_q(shift))
    } else {
        format!("({var} + {})", fmt_q(-shift))
    }
}

fn cmd_example(a: &ExampleArgs) -> Outcome {
    if a.name != fixture::NAME {
        return Outcome::fail(EXIT_INPUT, format!("unknown example {:?}; available: {}", a.name, fixture::NAME));
    }
    let cfg = match a.tuning.config() {
        Ok(c) => c,
        Err(o) => return o,
    };
    let fmt: TableFormat = match a.format.parse() {
        Ok(f) => f,
        Err(e) => return Outcome::fail(EXIT_INPUT, e),
    };
    let doc = fixture::document();
    let mut o = Outcome::new();
    if let Some(path) = &a.out {
        if let Err(e) = std::fs::write(path, doc.to_json()) {
            return Outcome::fail(EXIT_INPUT, format!("cannot write {}: {e}", path.display()));
        }
    }
    let m = match doc.to_monad() {
        Ok(m) => m,
        Err(e) => return Outcome::fail(EXIT_INPUT, e),
    };
    let _ = writeln!(
        o.out,
        "example {}: A={} B={} C={}",
        fixture::NAME,
        shown(m.a()),
        shown(m.b()),
        shown(m.c())
    );
    let (v, k, l, sys) = fixture::l_counts(m.f(), m.c());
    let per_col = k / m.f().cols().max(1);
    let _ = writeln!(o.out, "L-system: dim V = {v}, conditions = {k} ({per_col} per column of f), dim L = {l}");
    let _ = writeln!(o.out, "first condition: {}", fixture::condition_text(&sys, 0, m.b().len() / 2));
    let check = verify_document(&doc, &cfg, fmt);
    o.out.push_str(&check.out);
    o.err.push_str(&check.err);
    o.code = check.code;
    let _ = writeln!(o.out, "example result: {}", if o.code == EXIT_OK { "pass" } else { "fail" });
    o
}

/// Parses argv, runs the command, writes its output, returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_INPUT,
            };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let o = match &cli.cmd {
        Cmd::Search(a) => cmd_search(a),
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Table(a) => cmd_table(a),
        Cmd::Dual(a) => cmd_dual(a),
        Cmd::Shape(a) => cmd_shape(a),
        Cmd::Example(a) => cmd_example(a),
    };
    let _ = stdout.write_all(o.out.as_bytes());
    let _ = stderr.write_all(o.err.as_bytes());
    o.code
}
