//! Sheaf maps between line-bundle sums, monads A -> B -> C, and the cohomology
//! of E = ker g / im f read off from the induced maps.

use std::collections::BTreeSet;

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bigraded::{BiPoly, Bidegree, LineBundleSum};
use crate::cohomology::{coh_dim_sum, induced_map, induced_map_modp};
use crate::error::{NatcohError, Result};
use crate::linalg::{primes_below, ModpMatrix, DEFAULT_PRIME};

/// Matrix of bihomogeneous polynomials; entry (i,j) maps source[j] to target[i].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SheafMap {
    pub source: LineBundleSum,
    pub target: LineBundleSum,
    entries: Vec<Vec<BiPoly>>,
}

impl SheafMap {
    pub fn new(source: LineBundleSum, target: LineBundleSum, entries: Vec<Vec<BiPoly>>) -> Result<Self> {
        if entries.len() != target.len() {
            return Err(NatcohError::ShapeMismatch(format!(
                "{} rows for {} target summands",
                entries.len(),
                target.len()
            )));
        }
        let mut entries = entries;
        for (i, row) in entries.iter_mut().enumerate() {
            if row.len() != source.len() {
                return Err(NatcohError::ShapeMismatch(format!(
                    "row {i} has {} entries for {} source summands",
                    row.len(),
                    source.len()
                )));
            }
            for (j, e) in row.iter_mut().enumerate() {
                let want = target[i] - source[j];
                if e.is_zero() {
                    *e = BiPoly::zero(want);
                } else if e.bidegree() != want {
                    return Err(NatcohError::EntryBidegree {
                        row: i,
                        col: j,
                        found: e.bidegree(),
                        expected: want,
                    });
                }
            }
        }
        Ok(SheafMap {
            source,
            target,
            entries,
        })
    }

    pub fn zero(source: LineBundleSum, target: LineBundleSum) -> Self {
        let entries = target
            .iter()
            .map(|t| source.iter().map(|s| BiPoly::zero(*t - *s)).collect())
            .collect();
        SheafMap {
            source,
            target,
            entries,
        }
    }

    /// Constant identity on a sum.
    pub fn identity(sum: &LineBundleSum) -> Self {
        let mut m = SheafMap::zero(sum.clone(), sum.clone());
        for i in 0..sum.len() {
            m.entries[i][i] = BiPoly::constant(num_rational::BigRational::one());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.target.len()
    }

    pub fn cols(&self) -> usize {
        self.source.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> &BiPoly {
        &self.entries[i][j]
    }

    pub fn entries(&self) -> &[Vec<BiPoly>] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().flatten().all(|e| e.is_zero())
    }

    /// First nonzero entry, row-major.
    pub fn first_nonzero(&self) -> Option<(usize, usize)> {
        for (i, row) in self.entries.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                if !e.is_zero() {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// self ∘ f.
    pub fn compose(&self, f: &SheafMap) -> Result<SheafMap> {
        if f.target != self.source {
            return Err(NatcohError::ShapeMismatch(format!(
                "cannot compose: {} vs {}",
                f.target, self.source
            )));
        }
        let mut out = SheafMap::zero(f.source.clone(), self.target.clone());
        for i in 0..self.rows() {
            for k in 0..f.cols() {
                let mut acc = BiPoly::zero(self.target[i] - f.source[k]);
                for j in 0..self.cols() {
                    let (a, b) = (&self.entries[i][j], &f.entries[j][k]);
                    if a.is_zero() || b.is_zero() {
                        continue;
                    }
                    acc = acc.add(&a.mul(b))?;
                }
                out.entries[i][k] = acc;
            }
        }
        Ok(out)
    }

    /// Transpose read as a map target^* -> source^*, same polynomials.
    pub fn transpose(&self) -> SheafMap {
        let entries = (0..self.cols())
            .map(|j| (0..self.rows()).map(|i| self.entries[i][j].clone()).collect())
            .collect();
        SheafMap {
            source: self.target.serre_dual(),
            target: self.source.serre_dual(),
            entries,
        }
    }

    /// Fiber matrix at a point of P1 x P1 over F_p.
    pub fn eval_modp(&self, pt: [u64; 4], p: u64) -> Option<ModpMatrix> {
        let mut m = ModpMatrix::zeros(self.rows(), self.cols(), p);
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                m.set(i, j, self.entries[i][j].eval_modp(pt, p)?);
            }
        }
        Some(m)
    }

    fn reduces_mod(&self, p: u64) -> bool {
        self.entries
            .iter()
            .flatten()
            .all(|e| e.terms().values().all(|c| crate::bigraded::rational_mod(c, p).is_some()))
    }
}

/// Screening primes for rank computations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankConfig {
    pub primes: Vec<u64>,
}

impl Default for RankConfig {
    fn default() -> Self {
        RankConfig::with_prime(DEFAULT_PRIME)
    }
}

impl RankConfig {
    pub fn with_prime(p: u64) -> Self {
        let mut primes = vec![p];
        primes.extend(primes_below(p.saturating_sub(1), 2));
        RankConfig { primes }
    }
}

/// Exact rank of H^i(φ(t)) given a proven upper bound.
///
/// rank_p never exceeds the rational rank, so a prime that reaches the bound
/// settles it. Otherwise the rank is recomputed over Q.
pub fn induced_rank(phi: &SheafMap, i: usize, t: Bidegree, bound: usize, cfg: &RankConfig) -> usize {
    let rows = coh_dim_sum(i, &phi.target, t);
    let cols = coh_dim_sum(i, &phi.source, t);
    let bound = bound.min(rows).min(cols);
    if bound == 0 {
        return 0;
    }
    for &p in &cfg.primes {
        if let Ok(m) = induced_map_modp(phi, i, t, p) {
            if m.rank() == bound {
                return bound;
            }
        }
    }
    induced_map(phi, i, t).rank()
}

/// P(x,y) = (x-α)(y-β) - γ scaled by the rank multiplier r.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HilbertParams {
    pub r: u32,
    pub gamma: Rational64,
    pub alpha: Rational64,
    pub beta: Rational64,
}

impl HilbertParams {
    /// P = xy - γ with r·γ integral.
    pub fn new(r: u32, gamma: Rational64) -> Result<Self> {
        Self::general(r, Rational64::zero(), Rational64::zero(), gamma)
    }

    pub fn general(r: u32, alpha: Rational64, beta: Rational64, gamma: Rational64) -> Result<Self> {
        if r == 0 {
            return Err(NatcohError::InvalidParams("r must be positive".into()));
        }
        if !gamma.is_positive() {
            return Err(NatcohError::InvalidParams(format!("gamma must be positive, got {gamma}")));
        }
        let p = HilbertParams {
            r,
            gamma,
            alpha,
            beta,
        };
        for (name, v) in [("r*alpha", p.rq() * alpha), ("r*beta", p.rq() * beta), ("r*(alpha*beta-gamma)", p.rq() * (alpha * beta - gamma))] {
            if !v.is_integer() {
                return Err(NatcohError::NonIntegral(format!("{name} = {v} with r = {r}")));
            }
        }
        Ok(p)
    }

    /// Smallest r clearing the denominators, doubled when that gives r = 1.
    pub fn minimal_r(alpha: Rational64, beta: Rational64, gamma: Rational64) -> u32 {
        let l = [alpha, beta, alpha * beta - gamma]
            .iter()
            .fold(1i64, |acc, x| num_integer::lcm(acc, *x.denom()));
        let r = u32::try_from(l).expect("denominator fits u32");
        if r == 1 {
            2
        } else {
            r
        }
    }

    fn rq(&self) -> Rational64 {
        Rational64::from_integer(self.r as i64)
    }

    pub fn is_standard(&self) -> bool {
        self.alpha.is_zero() && self.beta.is_zero()
    }

    /// rγ
    pub fn n(&self) -> usize {
        (self.rq() * self.gamma).to_integer() as usize
    }

    /// r(γ-1), for γ >= 1
    pub fn m(&self) -> Option<usize> {
        let v = self.rq() * (self.gamma - Rational64::one());
        (!v.is_negative()).then(|| v.to_integer() as usize)
    }

    /// r(1-γ), for γ <= 1
    pub fn kernel_extra(&self) -> Option<usize> {
        let v = self.rq() * (Rational64::one() - self.gamma);
        (!v.is_negative()).then(|| v.to_integer() as usize)
    }

    pub fn chi(&self, x: i64, y: i64) -> Rational64 {
        let (x, y) = (Rational64::from_integer(x), Rational64::from_integer(y));
        self.rq() * ((x - self.alpha) * (y - self.beta) - self.gamma)
    }

    pub fn chi_int(&self, x: i64, y: i64) -> i64 {
        let v = self.chi(x, y);
        debug_assert!(v.is_integer());
        v.to_integer()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monad {
    a: LineBundleSum,
    b: LineBundleSum,
    c: LineBundleSum,
    f: SheafMap,
    g: SheafMap,
}

impl Monad {
    /// Checks shapes and g∘f = 0 exactly.
    pub fn new(a: LineBundleSum, b: LineBundleSum, c: LineBundleSum, f: SheafMap, g: SheafMap) -> Result<Self> {
        let m = Monad::from_parts_unchecked(a, b, c, f, g)?;
        if let Some((i, j)) = m.composition_defect() {
            return Err(NatcohError::CompositionNonzero(i, j));
        }
        Ok(m)
    }

    /// Shape checks only; g∘f may be nonzero. Rank-based queries on such a
    /// monad are meaningless, so callers are expected to check
    /// `composition_defect` first.
    pub fn from_parts_unchecked(
        a: LineBundleSum,
        b: LineBundleSum,
        c: LineBundleSum,
        f: SheafMap,
        g: SheafMap,
    ) -> Result<Self> {
        if f.source != a || f.target != b || g.source != b || g.target != c {
            return Err(NatcohError::ShapeMismatch(
                "f must map A -> B and g must map B -> C".into(),
            ));
        }
        Ok(Monad { a, b, c, f, g })
    }

    /// Kernel-case monad: empty A.
    pub fn kernel(b: LineBundleSum, c: LineBundleSum, g: SheafMap) -> Result<Self> {
        let f = SheafMap::zero(LineBundleSum::empty(), b.clone());
        Monad::new(LineBundleSum::empty(), b, c, f, g)
    }

    pub fn composition_defect(&self) -> Option<(usize, usize)> {
        self.g.compose(&self.f).ok()?.first_nonzero()
    }

    pub fn a(&self) -> &LineBundleSum {
        &self.a
    }
    pub fn b(&self) -> &LineBundleSum {
        &self.b
    }
    pub fn c(&self) -> &LineBundleSum {
        &self.c
    }
    pub fn f(&self) -> &SheafMap {
        &self.f
    }
    pub fn g(&self) -> &SheafMap {
        &self.g
    }

    pub fn rank(&self) -> i64 {
        self.b.len() as i64 - self.a.len() as i64 - self.c.len() as i64
    }

    pub fn twist(&self, t: Bidegree) -> Monad {
        let shift = |m: &SheafMap| SheafMap {
            source: m.source.twist(t),
            target: m.target.twist(t),
            entries: m.entries.clone(),
        };
        Monad {
            a: self.a.twist(t),
            b: self.b.twist(t),
            c: self.c.twist(t),
            f: shift(&self.f),
            g: shift(&self.g),
        }
    }

    /// 0 -> C^* -> B^* -> A^* -> 0 with transposed maps.
    pub fn serre_dual(&self) -> Monad {
        Monad {
            a: self.c.serre_dual(),
            b: self.b.serre_dual(),
            c: self.a.serre_dual(),
            f: self.g.transpose(),
            g: self.f.transpose(),
        }
    }

    /// χ(E(t)) = χ(B(t)) - χ(A(t)) - χ(C(t)).
    pub fn euler_char(&self, t: Bidegree) -> i64 {
        let chi = |s: &LineBundleSum| -> i64 {
            s.iter().map(|d| (d.a + t.a + 1) * (d.b + t.b + 1)).sum()
        };
        chi(&self.b) - chi(&self.a) - chi(&self.c)
    }

    pub fn coh_degrees(&self, t: Bidegree) -> BTreeSet<usize> {
        (0..3)
            .filter(|&i| [&self.a, &self.b, &self.c].iter().any(|s| coh_dim_sum(i, s, t) > 0))
            .collect()
    }

    pub fn bundle_coh(&self, t: Bidegree) -> Result<[usize; 3]> {
        self.bundle_coh_with(t, &RankConfig::default())
    }

    /// (h0,h1,h2) of E(t) when the monad's terms have cohomology in a single
    /// degree i at t: h^{i-1} = ker H^i(f), h^i = ker H^i(g)/im H^i(f),
    /// h^{i+1} = coker H^i(g).
    pub fn bundle_coh_with(&self, t: Bidegree, cfg: &RankConfig) -> Result<[usize; 3]> {
        let degs = self.coh_degrees(t);
        if degs.len() > 1 {
            return Err(NatcohError::MixedMonadCohomology(t));
        }
        let mut h = [0usize; 3];
        let Some(&i) = degs.iter().next() else {
            return Ok(h);
        };
        let ha = coh_dim_sum(i, &self.a, t);
        let hb = coh_dim_sum(i, &self.b, t);
        let hc = coh_dim_sum(i, &self.c, t);
        let rf = induced_rank(&self.f, i, t, ha.min(hb), cfg);
        let rg = induced_rank(&self.g, i, t, hc.min(hb - rf), cfg);
        let (ker_f, mid, coker_g) = (ha - rf, hb - rf - rg, hc - rg);
        if i == 0 && ker_f > 0 {
            return Err(NatcohError::NotAMonad(t, format!("H^0(f) has a {ker_f}-dimensional kernel")));
        }
        if i == 2 && coker_g > 0 {
            return Err(NatcohError::NotAMonad(t, format!("H^2(g) has a {coker_g}-dimensional cokernel")));
        }
        if i > 0 {
            h[i - 1] += ker_f;
        }
        h[i] += mid;
        if i < 2 {
            h[i + 1] += coker_g;
        }
        Ok(h)
    }

    /// Recovers (r, α, β, γ) from χ(E(x,y)) = r((x-α)(y-β) - γ).
    pub fn infer_params(&self) -> Result<HilbertParams> {
        let r = self.rank();
        if r <= 0 {
            return Err(NatcohError::InvalidParams(format!("bundle rank {r} is not positive")));
        }
        let chi = |a, b| self.euler_char(Bidegree::new(a, b));
        let (c00, c10, c01, c11) = (chi(0, 0), chi(1, 0), chi(0, 1), chi(1, 1));
        if c11 - c10 - c01 + c00 != r {
            return Err(NatcohError::InvalidParams(
                "Euler characteristic is not r((x-α)(y-β)-γ)".into(),
            ));
        }
        let rq = Rational64::from_integer(r);
        let beta = -Rational64::from_integer(c10 - c00) / rq;
        let alpha = -Rational64::from_integer(c01 - c00) / rq;
        let gamma = alpha * beta - Rational64::from_integer(c00) / rq;
        HilbertParams::general(r as u32, alpha, beta, gamma)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Certified,
    Probable,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiberCheck {
    pub point: [u64; 4],
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowCheck {
    pub twist: Bidegree,
    pub coker: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurjectivityCertificate {
    pub required_rank: usize,
    pub prime: u64,
    pub fiber_checks: Vec<FiberCheck>,
    pub window_checks: Vec<WindowCheck>,
    pub verdict: Verdict,
}

impl SurjectivityCertificate {
    pub fn min_fiber_rank(&self) -> Option<usize> {
        self.fiber_checks.iter().map(|c| c.rank).min()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurjectivityConfig {
    /// Number of diagonal twists scanned past the first globally generated one.
    /// None skips the window, so the best possible verdict is `probable`.
    pub window: Option<usize>,
    pub samples: usize,
    pub prime: u64,
    pub seed: u64,
    pub rank: RankConfig,
}

impl Default for SurjectivityConfig {
    fn default() -> Self {
        SurjectivityConfig {
            window: Some(4),
            samples: 50,
            prime: DEFAULT_PRIME,
            seed: 0,
            rank: RankConfig::default(),
        }
    }
}

/// Bundle-map surjectivity of g.
///
/// Fibers at random F_p points give a quick refutation. The proof is a twist
/// (k,k) at which every summand of C(k,k) is globally generated and H^0(g(k,k))
/// is onto: the image of g(k,k) then contains generating sections. The scan
/// starts at the smallest such k and stops at the first onto twist.
pub fn certify_surjective(g: &SheafMap, cfg: &SurjectivityConfig) -> SurjectivityCertificate {
    let rows = g.rows();
    let mut cert = SurjectivityCertificate {
        required_rank: rows,
        prime: cfg.prime,
        fiber_checks: Vec::new(),
        window_checks: Vec::new(),
        verdict: Verdict::Failed,
    };
    if rows == 0 {
        cert.verdict = Verdict::Certified;
        return cert;
    }
    if rows > g.cols() {
        return cert;
    }
    let p = std::iter::once(cfg.prime)
        .chain(primes_below(cfg.prime.saturating_sub(1), 8))
        .find(|&p| g.reduces_mod(p))
        .unwrap_or(cfg.prime);
    cert.prime = p;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let pair = |rng: &mut ChaCha8Rng| loop {
        let (x, y) = (rng.gen_range(0..p), rng.gen_range(0..p));
        if x != 0 || y != 0 {
            return (x, y);
        }
    };
    for _ in 0..cfg.samples {
        let (z0, z1) = pair(&mut rng);
        let (w0, w1) = pair(&mut rng);
        let point = [z0, z1, w0, w1];
        let rank = g.eval_modp(point, p).map_or(0, |m| m.rank());
        cert.fiber_checks.push(FiberCheck { point, rank });
    }
    if cert.fiber_checks.iter().any(|c| c.rank < rows) {
        return cert;
    }
    let Some(window) = cfg.window else {
        cert.verdict = Verdict::Probable;
        return cert;
    };
    let k0 = g.target.iter().map(|d| (-d.a).max(-d.b)).max().unwrap_or(0);
    for k in k0..=k0 + window as i64 {
        let t = Bidegree::new(k, k);
        let h_rows = coh_dim_sum(0, &g.target, t);
        let rank = induced_rank(g, 0, t, h_rows, &cfg.rank);
        let coker = h_rows - rank;
        cert.window_checks.push(WindowCheck { twist: t, coker });
        if coker == 0 {
            cert.verdict = Verdict::Certified;
            return cert;
        }
    }
    cert
}

/// Bundle-map injectivity of f, as surjectivity of its transpose.
pub fn certify_injective(f: &SheafMap, cfg: &SurjectivityConfig) -> SurjectivityCertificate {
    certify_surjective(&f.transpose(), cfg)
}
