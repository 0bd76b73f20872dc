//! Bidegrees, (Laurent) monomials in z0,z1,w0,w1, bihomogeneous polynomials
//! with exact rational coefficients, and ordered sums of line bundles.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{NatcohError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "(i64, i64)", into = "(i64, i64)")]
pub struct Bidegree {
    pub a: i64,
    pub b: i64,
}

impl Bidegree {
    pub const fn new(a: i64, b: i64) -> Self {
        Bidegree { a, b }
    }

    pub fn is_effective(self) -> bool {
        self.a >= 0 && self.b >= 0
    }

    /// O(a,b)^* = O(-2-a, -2-b), i.e. Hom(O(a,b), ω).
    pub fn serre_dual(self) -> Self {
        Bidegree::new(-2 - self.a, -2 - self.b)
    }

    pub fn swap(self) -> Self {
        Bidegree::new(self.b, self.a)
    }
}

impl From<(i64, i64)> for Bidegree {
    fn from((a, b): (i64, i64)) -> Self {
        Bidegree { a, b }
    }
}

impl From<Bidegree> for (i64, i64) {
    fn from(d: Bidegree) -> Self {
        (d.a, d.b)
    }
}

impl Add for Bidegree {
    type Output = Bidegree;
    fn add(self, o: Bidegree) -> Bidegree {
        Bidegree::new(self.a + o.a, self.b + o.b)
    }
}

impl Sub for Bidegree {
    type Output = Bidegree;
    fn sub(self, o: Bidegree) -> Bidegree {
        Bidegree::new(self.a - o.a, self.b - o.b)
    }
}

impl Neg for Bidegree {
    type Output = Bidegree;
    fn neg(self) -> Bidegree {
        Bidegree::new(-self.a, -self.b)
    }
}

impl fmt::Display for Bidegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.a, self.b)
    }
}

/// z0^za z1^zb w0^wa w1^wb. Negative exponents only show up in cohomology bases.
///
/// Ordering: z0 exponent descending, then w0 exponent descending, then the
/// remaining exponents ascending. Within one bidegree this is exactly the
/// basis order used everywhere else.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub za: i64,
    pub zb: i64,
    pub wa: i64,
    pub wb: i64,
}

impl Monomial {
    pub const fn new(za: i64, zb: i64, wa: i64, wb: i64) -> Self {
        Monomial { za, zb, wa, wb }
    }

    pub const fn one() -> Self {
        Monomial::new(0, 0, 0, 0)
    }

    pub fn bidegree(&self) -> Bidegree {
        Bidegree::new(self.za + self.zb, self.wa + self.wb)
    }

    pub fn is_polynomial(&self) -> bool {
        self.za >= 0 && self.zb >= 0 && self.wa >= 0 && self.wb >= 0
    }

    pub fn mul(&self, o: &Monomial) -> Monomial {
        Monomial::new(self.za + o.za, self.zb + o.zb, self.wa + o.wa, self.wb + o.wb)
    }

    fn key(&self) -> (i64, i64, i64, i64) {
        (-self.za, -self.wa, self.zb, self.wb)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (name, e) in [("z0", self.za), ("z1", self.zb), ("w0", self.wa), ("w1", self.wb)] {
            if e == 0 {
                continue;
            }
            if !first {
                f.write_str("*")?;
            }
            first = false;
            if e == 1 {
                f.write_str(name)?;
            } else {
                write!(f, "{name}^{e}")?;
            }
        }
        if first {
            f.write_str("1")?;
        }
        Ok(())
    }
}

/// All monomials of bidegree d with nonnegative exponents, z0 descending then w0 descending.
pub fn monomial_basis(d: Bidegree) -> Vec<Monomial> {
    if !d.is_effective() {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(((d.a + 1) * (d.b + 1)) as usize);
    for za in (0..=d.a).rev() {
        for wa in (0..=d.b).rev() {
            out.push(Monomial::new(za, d.a - za, wa, d.b - wa));
        }
    }
    out
}

/// Position of m inside monomial_basis(m.bidegree()), if m is a polynomial monomial.
pub fn basis_index(m: &Monomial) -> Option<usize> {
    if !m.is_polynomial() {
        return None;
    }
    let d = m.bidegree();
    Some(((d.a - m.za) * (d.b + 1) + (d.b - m.wa)) as usize)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BiPoly {
    bidegree: Bidegree,
    terms: BTreeMap<Monomial, BigRational>,
}

impl BiPoly {
    pub fn zero(d: Bidegree) -> Self {
        BiPoly {
            bidegree: d,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: BigRational) -> Self {
        let mut p = BiPoly::zero(Bidegree::new(0, 0));
        if !c.is_zero() {
            p.terms.insert(Monomial::one(), c);
        }
        p
    }

    pub fn from_monomial(m: Monomial, c: BigRational) -> Result<Self> {
        BiPoly::from_terms(m.bidegree(), [(m, c)])
    }

    /// Builds a polynomial, merging repeated monomials and dropping zeros.
    pub fn from_terms(
        d: Bidegree,
        terms: impl IntoIterator<Item = (Monomial, BigRational)>,
    ) -> Result<Self> {
        let mut p = BiPoly::zero(d);
        for (m, c) in terms {
            if m.bidegree() != d {
                return Err(NatcohError::BidegreeMismatch(m.bidegree(), d));
            }
            if !m.is_polynomial() {
                return Err(NatcohError::NegativeBidegree(m.bidegree()));
            }
            p.add_term(m, c);
        }
        Ok(p)
    }

    /// Integer coefficients against monomial_basis(d).
    pub fn from_basis_coeffs(d: Bidegree, coeffs: &[BigRational]) -> Self {
        let basis = monomial_basis(d);
        assert_eq!(basis.len(), coeffs.len(), "coefficient count");
        let mut p = BiPoly::zero(d);
        for (m, c) in basis.into_iter().zip(coeffs) {
            p.add_term(m, c.clone());
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn bidegree(&self) -> Bidegree {
        self.bidegree
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, BigRational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Coefficients against monomial_basis(bidegree).
    pub fn basis_coeffs(&self) -> Vec<BigRational> {
        monomial_basis(self.bidegree).iter().map(|m| self.coeff(m)).collect()
    }

    pub fn add(&self, o: &BiPoly) -> Result<BiPoly> {
        if self.bidegree != o.bidegree {
            return Err(NatcohError::BidegreeMismatch(self.bidegree, o.bidegree));
        }
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(*m, c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> BiPoly {
        BiPoly {
            bidegree: self.bidegree,
            terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect(),
        }
    }

    pub fn sub(&self, o: &BiPoly) -> Result<BiPoly> {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &BigRational) -> BiPoly {
        if c.is_zero() {
            return BiPoly::zero(self.bidegree);
        }
        BiPoly {
            bidegree: self.bidegree,
            terms: self.terms.iter().map(|(m, x)| (*m, x * c)).collect(),
        }
    }

    pub fn mul(&self, o: &BiPoly) -> BiPoly {
        let mut out = BiPoly::zero(self.bidegree + o.bidegree);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    /// Value mod p at (z0,z1,w0,w1); None if some denominator vanishes mod p.
    pub fn eval_modp(&self, pt: [u64; 4], p: u64) -> Option<u64> {
        let mut acc = 0u64;
        for (m, c) in &self.terms {
            let c = rational_mod(c, p)?;
            let mut v = c;
            for (x, e) in pt.iter().zip([m.za, m.zb, m.wa, m.wb]) {
                v = v * pow_mod(*x, e as u64, p) % p;
            }
            acc = (acc + v) % p;
        }
        Some(acc)
    }

    /// Parses the text form; `d` pins the bidegree (needed for the zero polynomial).
    pub fn parse(text: &str, d: Bidegree) -> Result<BiPoly> {
        let terms = parse_terms(text)?;
        BiPoly::from_terms(d, terms.into_iter().filter(|(_, c)| !c.is_zero()))
    }
}

impl fmt::Display for BiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if neg {
                f.write_str("-")?;
            } else if k > 0 {
                f.write_str("+")?;
            }
            let is_const = *m == Monomial::one();
            if is_const {
                write!(f, "{}", fmt_rational(&abs))?;
            } else if abs.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{}*{m}", fmt_rational(&abs))?;
            }
        }
        Ok(())
    }
}

pub fn fmt_rational(c: &BigRational) -> String {
    if c.denom().is_one() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || NatcohError::Parse(format!("bad rational {s:?}"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}

fn parse_terms(text: &str) -> Result<Vec<(Monomial, BigRational)>> {
    let s: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(NatcohError::Parse("empty polynomial".into()));
    }
    let err = |msg: &str| NatcohError::Parse(format!("{msg} in {text:?}"));
    let mut out = Vec::new();
    let mut i = 0;
    while i < s.len() {
        let mut sign = BigRational::one();
        while i < s.len() && (s[i] == '+' || s[i] == '-') {
            if s[i] == '-' {
                sign = -sign;
            }
            i += 1;
        }
        if i >= s.len() {
            return Err(err("dangling sign"));
        }
        let mut coeff = sign;
        let mut mono = Monomial::one();
        loop {
            if i >= s.len() {
                return Err(err("missing factor"));
            }
            if s[i].is_ascii_digit() {
                let start = i;
                while i < s.len() && (s[i].is_ascii_digit() || s[i] == '/') {
                    i += 1;
                }
                let lit: String = s[start..i].iter().collect();
                coeff *= parse_rational(&lit)?;
            } else if s[i] == 'z' || s[i] == 'w' {
                if i + 1 >= s.len() || !(s[i + 1] == '0' || s[i + 1] == '1') {
                    return Err(err("bad variable"));
                }
                let (v, idx) = (s[i], s[i + 1]);
                i += 2;
                let mut e = 1i64;
                if i < s.len() && s[i] == '^' {
                    i += 1;
                    let start = i;
                    while i < s.len() && s[i].is_ascii_digit() {
                        i += 1;
                    }
                    if start == i {
                        return Err(err("missing exponent"));
                    }
                    let lit: String = s[start..i].iter().collect();
                    e = lit.parse().map_err(|_| err("bad exponent"))?;
                }
                match (v, idx) {
                    ('z', '0') => mono.za += e,
                    ('z', '1') => mono.zb += e,
                    ('w', '0') => mono.wa += e,
                    _ => mono.wb += e,
                }
            } else {
                return Err(err("unexpected character"));
            }
            if i < s.len() && s[i] == '*' {
                i += 1;
                continue;
            }
            break;
        }
        if i < s.len() && s[i] != '+' && s[i] != '-' {
            return Err(err("unexpected character"));
        }
        out.push((mono, coeff));
    }
    Ok(out)
}

/// Uniform integer coefficients in [-height, height] on every basis monomial.
pub fn random_bipoly<R: Rng + ?Sized>(d: Bidegree, height: u64, rng: &mut R) -> Result<BiPoly> {
    if !d.is_effective() {
        return Err(NatcohError::NegativeBidegree(d));
    }
    let h = height as i64;
    let coeffs: Vec<BigRational> = monomial_basis(d)
        .iter()
        .map(|_| BigRational::from_integer(BigInt::from(rng.gen_range(-h..=h))))
        .collect();
    Ok(BiPoly::from_basis_coeffs(d, &coeffs))
}

/// Ordered direct sum of line bundles; the order indexes matrix rows and columns.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LineBundleSum {
    pub summands: Vec<Bidegree>,
}

impl LineBundleSum {
    pub fn new(summands: Vec<Bidegree>) -> Self {
        LineBundleSum { summands }
    }

    pub fn empty() -> Self {
        LineBundleSum::default()
    }

    pub fn repeated(d: Bidegree, k: usize) -> Self {
        LineBundleSum::new(vec![d; k])
    }

    pub fn concat(mut self, other: &LineBundleSum) -> Self {
        self.summands.extend_from_slice(&other.summands);
        self
    }

    pub fn len(&self) -> usize {
        self.summands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.summands.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Bidegree> {
        self.summands.iter()
    }

    pub fn twist(&self, t: Bidegree) -> Self {
        LineBundleSum::new(self.summands.iter().map(|d| *d + t).collect())
    }

    pub fn serre_dual(&self) -> Self {
        LineBundleSum::new(self.summands.iter().map(|d| d.serre_dual()).collect())
    }
}

impl std::ops::Index<usize> for LineBundleSum {
    type Output = Bidegree;
    fn index(&self, i: usize) -> &Bidegree {
        &self.summands[i]
    }
}

impl fmt::Display for LineBundleSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.summands.is_empty() {
            return f.write_str("0");
        }
        // run-length: O(0,-1)^4 + O(-1,0)^4
        let mut k = 0;
        let mut first = true;
        while k < self.summands.len() {
            let d = self.summands[k];
            let mut n = 1;
            while k + n < self.summands.len() && self.summands[k + n] == d {
                n += 1;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            if n == 1 {
                write!(f, "O{d}")?;
            } else {
                write!(f, "O{d}^{n}")?;
            }
            k += n;
        }
        Ok(())
    }
}

pub(crate) fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

/// c mod p for p < 2^32; None when p divides the denominator.
pub fn rational_mod(c: &BigRational, p: u64) -> Option<u64> {
    let pb = BigInt::from(p);
    let reduce = |x: &BigInt| -> u64 {
        let r = ((x % &pb) + &pb) % &pb;
        r.try_into().expect("residue fits u64")
    };
    let d = reduce(c.denom());
    if d == 0 {
        return None;
    }
    let n = reduce(c.numer());
    Some(n * pow_mod(d, p - 2, p) % p)
}
