//! JSON form of a monad: summand lists, maps as rows of polynomial text,
//! optional parameters and certificate.

use num_rational::Rational64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bigraded::{BiPoly, LineBundleSum};
use crate::certify::Certificate;
use crate::error::{NatcohError, Result};
use crate::monad::{HilbertParams, Monad, SheafMap};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsDoc {
    pub r: u32,
    pub gamma: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

pub fn fmt_q(q: Rational64) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

pub fn parse_q(s: &str) -> Result<Rational64> {
    let s = s.trim();
    let parsed = match s.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.trim().parse().map_err(|_| NatcohError::Parse(format!("bad rational {s:?}")))?;
            let d: i64 = d.trim().parse().map_err(|_| NatcohError::Parse(format!("bad rational {s:?}")))?;
            if d == 0 {
                return Err(NatcohError::Parse(format!("zero denominator in {s:?}")));
            }
            Rational64::new(n, d)
        }
        None => Rational64::from_integer(s.parse().map_err(|_| NatcohError::Parse(format!("bad rational {s:?}")))?),
    };
    Ok(parsed)
}

impl ParamsDoc {
    pub fn from_params(p: &HilbertParams, seed: Option<u64>) -> Self {
        let opt = |q: Rational64| (!q.is_zero()).then(|| fmt_q(q));
        ParamsDoc {
            r: p.r,
            gamma: fmt_q(p.gamma),
            alpha: opt(p.alpha),
            beta: opt(p.beta),
            seed,
        }
    }

    pub fn to_params(&self) -> Result<HilbertParams> {
        let get = |s: &Option<String>| s.as_deref().map(parse_q).transpose().map(|v| v.unwrap_or_default());
        HilbertParams::general(self.r, get(&self.alpha)?, get(&self.beta)?, parse_q(&self.gamma)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonadDocument {
    #[serde(rename = "A")]
    pub a: LineBundleSum,
    #[serde(rename = "B")]
    pub b: LineBundleSum,
    #[serde(rename = "C")]
    pub c: LineBundleSum,
    pub f: Vec<Vec<String>>,
    pub g: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ParamsDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
}

fn map_rows(m: &SheafMap) -> Vec<Vec<String>> {
    m.entries().iter().map(|r| r.iter().map(|e| e.to_string()).collect()).collect()
}

fn parse_map(name: &str, rows: &[Vec<String>], src: &LineBundleSum, tgt: &LineBundleSum) -> Result<SheafMap> {
    if rows.len() != tgt.len() {
        return Err(NatcohError::ShapeMismatch(format!(
            "{name} has {} rows, expected {}",
            rows.len(),
            tgt.len()
        )));
    }
    let mut entries = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        if row.len() != src.len() {
            return Err(NatcohError::ShapeMismatch(format!(
                "{name} row {i} has {} entries, expected {}",
                row.len(),
                src.len()
            )));
        }
        let parsed = row
            .iter()
            .enumerate()
            .map(|(j, text)| {
                BiPoly::parse(text, tgt[i] - src[j])
                    .map_err(|e| NatcohError::Parse(format!("{name}[{i}][{j}] = {text:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        entries.push(parsed);
    }
    SheafMap::new(src.clone(), tgt.clone(), entries)
}

impl MonadDocument {
    pub fn from_monad(m: &Monad, params: Option<ParamsDoc>, certificate: Option<Certificate>) -> Self {
        MonadDocument {
            a: m.a().clone(),
            b: m.b().clone(),
            c: m.c().clone(),
            f: map_rows(m.f()),
            g: map_rows(m.g()),
            params,
            certificate,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| NatcohError::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    /// The monad without checking g∘f = 0; callers report that separately.
    pub fn to_monad(&self) -> Result<Monad> {
        let f = parse_map("f", &self.f, &self.a, &self.b)?;
        let g = parse_map("g", &self.g, &self.b, &self.c)?;
        Monad::from_parts_unchecked(self.a.clone(), self.b.clone(), self.c.clone(), f, g)
    }

    /// Stated parameters, or parameters read off χ when none are given.
    pub fn params_or_infer(&self, m: &Monad) -> Result<HilbertParams> {
        match &self.params {
            Some(p) => p.to_params(),
            None => m.infer_params(),
        }
    }

    /// The Serre dual; the certificate describes E, not E*, and is dropped.
    pub fn dual(&self) -> Result<MonadDocument> {
        let m = self.to_monad()?;
        Ok(MonadDocument::from_monad(&m.serre_dual(), self.params.clone(), None))
    }
}

/// sha256 over the certificate-free JSON of the bare monad (no parameters).
pub fn monad_digest(m: &Monad) -> String {
    let doc = MonadDocument::from_monad(m, None, None);
    let bytes = serde_json::to_vec(&doc).expect("serializable");
    hex::encode(Sha256::digest(&bytes))
}
