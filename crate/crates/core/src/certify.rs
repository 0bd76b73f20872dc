//! Cohomology tables over a window, the finite sets T±, and theorem-level
//! certification of naturality.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bigraded::Bidegree;
use crate::document::monad_digest;
use crate::error::{NatcohError, Result};
use crate::monad::{certify_injective, certify_surjective, HilbertParams, Monad, RankConfig};
use crate::search::{
    check_conditions, check_kernel_conditions, kernel_terms, standard_terms, surj_record, ConditionRecord, ConditionReport,
    SearchConfig,
};

/// Inclusive rectangle [a0,a1] x [b0,b1].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub a0: i64,
    pub a1: i64,
    pub b0: i64,
    pub b1: i64,
}

impl Default for Window {
    fn default() -> Self {
        Window::square(6)
    }
}

impl Window {
    pub fn square(k: i64) -> Self {
        Window {
            a0: -k,
            a1: k,
            b0: -k,
            b1: k,
        }
    }

    pub fn contains(&self, t: Bidegree) -> bool {
        (self.a0..=self.a1).contains(&t.a) && (self.b0..=self.b1).contains(&t.b)
    }

    /// Twists ordered by b descending, then a ascending.
    pub fn twists(&self) -> Vec<Bidegree> {
        (self.b0..=self.b1)
            .rev()
            .flat_map(|b| (self.a0..=self.a1).map(move |a| Bidegree::new(a, b)))
            .collect()
    }
}

impl FromStr for Window {
    type Err = NatcohError;

    /// "a0:a1:b0:b1"
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<i64> = s
            .split(':')
            .map(|x| x.trim().parse::<i64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| NatcohError::Parse(format!("window {s:?} is not a0:a1:b0:b1")))?;
        match parts[..] {
            [a0, a1, b0, b1] if a0 <= a1 && b0 <= b1 => Ok(Window { a0, a1, b0, b1 }),
            _ => Err(NatcohError::Parse(format!("window {s:?} is not a0:a1:b0:b1 with a0<=a1, b0<=b1"))),
        }
    }
}

impl std::fmt::Display for Window {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}:{}:{}", self.a0, self.a1, self.b0, self.b1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flag {
    Natural,
    Zero,
    Violation,
}

impl Flag {
    pub fn of(h: [usize; 3]) -> Flag {
        match h.iter().filter(|&&x| x != 0).count() {
            0 => Flag::Zero,
            1 => Flag::Natural,
            _ => Flag::Violation,
        }
    }

    pub fn is_natural(self) -> bool {
        self != Flag::Violation
    }

    fn as_str(self) -> &'static str {
        match self {
            Flag::Natural => "natural",
            Flag::Zero => "zero",
            Flag::Violation => "violation",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableEntry {
    pub twist: Bidegree,
    pub h: [usize; 3],
    pub chi: i64,
    pub flag: Flag,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohTable {
    pub window: Window,
    /// Sorted by b descending, then a ascending.
    pub entries: Vec<TableEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Json,
    Text,
}

impl FromStr for TableFormat {
    type Err = NatcohError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(TableFormat::Csv),
            "json" => Ok(TableFormat::Json),
            "text" => Ok(TableFormat::Text),
            _ => Err(NatcohError::Parse(format!("unknown format {s:?}"))),
        }
    }
}

impl CohTable {
    pub fn get(&self, t: Bidegree) -> Option<&TableEntry> {
        if !self.window.contains(t) {
            return None;
        }
        let w = &self.window;
        let width = (w.a1 - w.a0 + 1) as usize;
        let idx = (w.b1 - t.b) as usize * width + (t.a - w.a0) as usize;
        self.entries.get(idx)
    }

    pub fn violations(&self) -> Vec<Bidegree> {
        self.entries.iter().filter(|e| !e.flag.is_natural()).map(|e| e.twist).collect()
    }

    pub fn all_natural(&self) -> bool {
        self.entries.iter().all(|e| e.flag.is_natural())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("a,b,h0,h1,h2,chi,flag\n");
        for e in &self.entries {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                e.twist.a,
                e.twist.b,
                e.h[0],
                e.h[1],
                e.h[2],
                e.chi,
                e.flag.as_str()
            );
        }
        s
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    /// Grid with b running down and a across; a cell "i:h" means only h^i = h
    /// is nonzero, "." means all vanish, "X" marks a violation.
    pub fn to_text(&self) -> String {
        let w = &self.window;
        let cell = |e: &TableEntry| -> String {
            match e.flag {
                Flag::Zero => ".".into(),
                Flag::Violation => "X".into(),
                Flag::Natural => {
                    let i = e.h.iter().position(|&x| x != 0).expect("one nonzero");
                    format!("{i}:{}", e.h[i])
                }
            }
        };
        let width = self.entries.iter().map(|e| cell(e).len()).max().unwrap_or(1).max(3);
        let mut s = format!("{:>4} |", "b\\a");
        for a in w.a0..=w.a1 {
            let _ = write!(s, " {a:>width$}");
        }
        s.push('\n');
        for b in (w.b0..=w.b1).rev() {
            let _ = write!(s, "{b:>4} |");
            for a in w.a0..=w.a1 {
                let e = self.get(Bidegree::new(a, b)).expect("in window");
                let _ = write!(s, " {:>width$}", cell(e));
            }
            s.push('\n');
        }
        s
    }

    pub fn render(&self, fmt: TableFormat) -> String {
        match fmt {
            TableFormat::Csv => self.to_csv(),
            TableFormat::Json => self.to_json(),
            TableFormat::Text => self.to_text(),
        }
    }
}

pub fn coh_table(m: &Monad, window: Window) -> Result<CohTable> {
    coh_table_with(m, window, &RankConfig::default())
}

pub fn coh_table_with(m: &Monad, window: Window, cfg: &RankConfig) -> Result<CohTable> {
    let entries = window
        .twists()
        .into_par_iter()
        .map(|t| {
            let h = m.bundle_coh_with(t, cfg)?;
            Ok(TableEntry {
                twist: t,
                h,
                chi: m.euler_char(t),
                flag: Flag::of(h),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CohTable { window, entries })
}

pub fn default_t_bound(p: &HilbertParams) -> i64 {
    p.gamma.ceil().to_integer() + 2
}

/// Twists where χ changes sign across a unit step outward, in both open quadrants.
pub fn t_sets(p: &HilbertParams, bound: i64) -> (Vec<Bidegree>, Vec<Bidegree>) {
    let chi = |a: i64, b: i64| p.chi(a, b);
    let zero = Rational64::zero();
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for a in 1..=bound {
        for b in 1..=bound {
            if chi(a, b) <= zero && (chi(a + 1, b) > zero || chi(a, b + 1) > zero) {
                plus.push(Bidegree::new(a, b));
            }
            if chi(-a, -b) <= zero && (chi(-a - 1, -b) > zero || chi(-a, -b - 1) > zero) {
                minus.push(Bidegree::new(-a, -b));
            }
        }
    }
    plus.sort();
    minus.sort();
    (plus, minus)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointCheck {
    pub role: String,
    pub twist: Bidegree,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<[usize; 3]>,
    pub chi: i64,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Passed,
    Failed,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowCrossCheck {
    pub window: Window,
    pub status: CheckStatus,
    pub twists: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub violations: Vec<Bidegree>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CertVerdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub digest: String,
    /// The surjectivity window R used for V0/W0.
    pub surjectivity_window: usize,
    pub conditions: ConditionReport,
    pub t_plus: Vec<Bidegree>,
    pub t_minus: Vec<Bidegree>,
    pub points: Vec<PointCheck>,
    pub window_check: WindowCrossCheck,
    pub verdict: CertVerdict,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        self.verdict == CertVerdict::Pass
    }

    /// Human-readable name of the first failing check.
    pub fn first_failure(&self) -> Option<String> {
        if let Some(r) = self.conditions.first_failure() {
            return Some(describe_record(r));
        }
        if let Some(p) = self.points.iter().find(|p| !p.passed) {
            return Some(match (&p.error, p.h) {
                (Some(e), _) => format!("{} at {}: {e}", p.role, p.twist),
                (None, Some(h)) => format!("{} at {}: h = {:?} is not natural", p.role, p.twist, h),
                _ => format!("{} at {}", p.role, p.twist),
            });
        }
        match self.window_check.status {
            CheckStatus::Failed => Some(format!(
                "window {} cross-check: violations at {:?}{}",
                self.window_check.window,
                self.window_check.violations,
                self.window_check.error.as_deref().map(|e| format!(" ({e})")).unwrap_or_default()
            )),
            _ => None,
        }
    }
}

pub fn describe_record(r: &ConditionRecord) -> String {
    let mut s = r.name.clone();
    if let Some(t) = r.twist {
        let _ = write!(s, " at {t}");
    }
    for (k, want) in &r.required {
        let got = r.observed.get(k).map(|v| v.to_string()).unwrap_or_else(|| "?".into());
        let _ = write!(s, "; {k}: required {want}, observed {got}");
    }
    if let Some(d) = &r.detail {
        let _ = write!(s, " ({d})");
    }
    s
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertifyConfig {
    pub search: SearchConfig,
    pub window: Window,
    pub t_bound: Option<i64>,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        CertifyConfig {
            search: SearchConfig::default(),
            window: Window::default(),
            t_bound: None,
        }
    }
}

/// The construction's conditions when the terms have one of the searched
/// shapes, otherwise composition plus the bundle-map certificates.
pub fn monad_conditions(m: &Monad, p: &HilbertParams, cfg: &SearchConfig) -> ConditionReport {
    if p.is_standard() {
        if let Ok((a, b, c)) = standard_terms(p) {
            if (m.a(), m.b(), m.c()) == (&a, &b, &c) {
                return check_conditions(m.f(), m.g(), p, cfg);
            }
        }
        if let Ok((b, c)) = kernel_terms(p) {
            if m.a().is_empty() && (m.b(), m.c()) == (&b, &c) {
                let mut rep = check_kernel_conditions(m.g(), p, cfg);
                rep.records.insert(0, composition_record(m));
                return rep;
            }
        }
    }
    let surj = cfg.surjectivity(p);
    let mut rep = ConditionReport::default();
    rep.records.push(composition_record(m));
    if !m.c().is_empty() {
        rep.records.push(surj_record("V0 (g surjective)", &certify_surjective(m.g(), &surj)));
    }
    if !m.a().is_empty() {
        rep.records.push(surj_record("W0 (f injective)", &certify_injective(m.f(), &surj)));
    }
    rep
}

fn composition_record(m: &Monad) -> ConditionRecord {
    let bad = m.composition_defect();
    let mut rec = ConditionRecord {
        name: "g∘f = 0".into(),
        twist: None,
        required: BTreeMap::new(),
        observed: BTreeMap::new(),
        passed: bad.is_none(),
        detail: bad.map(|(i, j)| format!("entry ({i},{j}) of g∘f is nonzero")),
    };
    let nonzero = m
        .g()
        .compose(m.f())
        .map(|h| h.entries().iter().flatten().filter(|e| !e.is_zero()).count() as i64)
        .unwrap_or(-1);
    rec.required.insert("nonzero_entries".into(), 0);
    rec.observed.insert("nonzero_entries".into(), nonzero);
    rec
}

fn point_check(m: &Monad, role: &str, t: Bidegree, cfg: &RankConfig) -> PointCheck {
    let chi = m.euler_char(t);
    match m.bundle_coh_with(t, cfg) {
        Ok(h) => PointCheck {
            role: role.into(),
            twist: t,
            h: Some(h),
            chi,
            passed: Flag::of(h).is_natural(),
            error: None,
        },
        Err(e) => PointCheck {
            role: role.into(),
            twist: t,
            h: None,
            chi,
            passed: false,
            error: Some(e.to_string()),
        },
    }
}

/// Conditions, naturality on the axes, at (1,1), at (-2,-2) (the dual (2,2)),
/// and on T±, then a cross-check of "natural everywhere" on the window.
pub fn theorem_certify(m: &Monad, p: &HilbertParams, cfg: &CertifyConfig) -> Certificate {
    let rank = cfg.search.rank_config();
    let conditions = monad_conditions(m, p, &cfg.search);
    let composes = m.composition_defect().is_none();
    let bound = cfg.t_bound.unwrap_or_else(|| default_t_bound(p));
    let (t_plus, t_minus) = t_sets(p, bound);

    let mut points = Vec::new();
    if composes {
        let fixed = [
            ("axis", Bidegree::new(0, 0)),
            ("axis", Bidegree::new(1, 0)),
            ("axis", Bidegree::new(-1, 0)),
            ("axis", Bidegree::new(0, 1)),
            ("axis", Bidegree::new(0, -1)),
            ("(1,1)", Bidegree::new(1, 1)),
            ("dual (2,2)", Bidegree::new(-2, -2)),
        ];
        for (role, t) in fixed {
            points.push(point_check(m, role, t, &rank));
        }
        for t in &t_plus {
            points.push(point_check(m, "T+", *t, &rank));
        }
        for t in &t_minus {
            points.push(point_check(m, "T-", *t, &rank));
        }
    }

    let earlier_ok = composes && conditions.passed() && points.iter().all(|c| c.passed);
    let twists = cfg.window.twists().len();
    let window_check = if !earlier_ok {
        WindowCrossCheck {
            window: cfg.window,
            status: CheckStatus::Skipped,
            twists,
            violations: vec![],
            error: None,
        }
    } else {
        match coh_table_with(m, cfg.window, &rank) {
            Ok(table) => {
                let violations = table.violations();
                // the point checks must agree with the table wherever they overlap
                let disagree = points
                    .iter()
                    .any(|c| table.get(c.twist).is_some_and(|e| Some(e.h) != c.h));
                WindowCrossCheck {
                    window: cfg.window,
                    status: if violations.is_empty() && !disagree {
                        CheckStatus::Passed
                    } else {
                        CheckStatus::Failed
                    },
                    twists,
                    violations,
                    error: disagree.then(|| "point checks disagree with the table".into()),
                }
            }
            Err(e) => WindowCrossCheck {
                window: cfg.window,
                status: CheckStatus::Failed,
                twists,
                violations: vec![],
                error: Some(e.to_string()),
            },
        }
    };
    let verdict = if earlier_ok && window_check.status == CheckStatus::Passed {
        CertVerdict::Pass
    } else {
        CertVerdict::Fail
    };
    Certificate {
        digest: monad_digest(m),
        surjectivity_window: cfg.search.window.unwrap_or(p.n() + 2),
        conditions,
        t_plus,
        t_minus,
        points,
        window_check,
        verdict,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// The row E(m', n), m' varying.
    First,
    /// The column E(n, m'), m' varying.
    Second,
}

/// Fits the pushforward along a line of twists as O(-2)^s + O(-1)^t and checks
/// every window entry of that line against the model.
pub fn pushforward_split_type(m: &Monad, axis: Axis, n: i64, window: Window) -> Result<(i64, i64)> {
    let at = |k: i64| match axis {
        Axis::First => Bidegree::new(k, n),
        Axis::Second => Bidegree::new(n, k),
    };
    let s = -m.euler_char(at(0));
    let t = m.euler_char(at(1)) - m.euler_char(at(0)) - s;
    if s < 0 || t < 0 {
        return Err(NatcohError::InvalidParams(format!(
            "line {n} gives (s,t) = ({s},{t}); it must lie at or beyond γ"
        )));
    }
    let range = match axis {
        Axis::First => window.a0..=window.a1,
        Axis::Second => window.b0..=window.b1,
    };
    let mut bad = Vec::new();
    for k in range {
        let h = m.bundle_coh(at(k))?;
        let h0 = s * (k - 1).max(0) + t * k.max(0);
        let h1 = s * (1 - k).max(0) + t * (-k).max(0);
        if h != [h0 as usize, h1 as usize, 0] {
            bad.push(k);
        }
    }
    if bad.is_empty() {
        Ok((s, t))
    } else {
        Err(NatcohError::SplitTypeMismatch(bad))
    }
}
