//! H^i(O(a,b)) on P1 x P1 through Laurent monomials (the Čech model).
//!
//! Basis conventions, fixed once:
//! * H^0: monomials with all exponents >= 0.
//! * H^1: the (+,-) block (z exponents >= 0, w exponents <= -1) or the (-,+)
//!   block; a given bidegree never has both.
//! * H^2: all exponents <= -1.
//!
//! Inside a block monomials run z0 exponent descending, then w0 exponent
//! descending. A polynomial acts by exponent addition; a product that leaves
//! the sign pattern of the target block is zero in cohomology.

use num_rational::BigRational;

use crate::bigraded::{rational_mod, Bidegree, LineBundleSum, Monomial};
use crate::error::{NatcohError, Result};
use crate::linalg::{ExactMatrix, ModpMatrix};
use crate::monad::SheafMap;

pub fn coh_dim(i: usize, d: Bidegree) -> usize {
    let (a, b) = (d.a, d.b);
    let v = match i {
        0 if a >= 0 && b >= 0 => (a + 1) * (b + 1),
        1 if a >= 0 && b <= -2 => (a + 1) * (-b - 1),
        1 if a <= -2 && b >= 0 => (-a - 1) * (b + 1),
        2 if a <= -2 && b <= -2 => (a + 1) * (b + 1),
        0..=2 => 0,
        _ => panic!("cohomological degree {i} out of range"),
    };
    v as usize
}

pub fn coh_dim_sum(i: usize, sum: &LineBundleSum, t: Bidegree) -> usize {
    sum.iter().map(|d| coh_dim(i, *d + t)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sign {
    Pos,
    Neg,
}

/// Sign class of one P1 factor: both exponents >= 0, both <= -1, or neither.
fn sign(e0: i64, e1: i64) -> Option<Sign> {
    if e0 >= 0 && e1 >= 0 {
        Some(Sign::Pos)
    } else if e0 <= -1 && e1 <= -1 {
        Some(Sign::Neg)
    } else {
        None
    }
}

fn pattern(i: usize, d: Bidegree) -> Option<(Sign, Sign)> {
    match i {
        0 => Some((Sign::Pos, Sign::Pos)),
        1 if d.a >= 0 => Some((Sign::Pos, Sign::Neg)),
        1 => Some((Sign::Neg, Sign::Pos)),
        2 => Some((Sign::Neg, Sign::Neg)),
        _ => None,
    }
}

/// (index, count) of one factor's exponent e0 inside degree deg.
fn factor_slot(s: Sign, e0: i64, deg: i64) -> (i64, i64) {
    match s {
        Sign::Pos => (deg - e0, deg + 1),
        Sign::Neg => (-1 - e0, -deg - 1),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CohBasis {
    pub twist: Bidegree,
    pub degree: usize,
    pub basis: Vec<Monomial>,
}

impl CohBasis {
    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn index_of(&self, m: &Monomial) -> Option<usize> {
        index_of(self.degree, self.twist, m)
    }
}

/// Position of a Laurent monomial in coh_basis(i, d), None if it is zero there.
pub fn index_of(i: usize, d: Bidegree, m: &Monomial) -> Option<usize> {
    if m.bidegree() != d || coh_dim(i, d) == 0 {
        return None;
    }
    let (sz, sw) = pattern(i, d)?;
    if sign(m.za, m.zb)? != sz || sign(m.wa, m.wb)? != sw {
        return None;
    }
    let (zi, _) = factor_slot(sz, m.za, d.a);
    let (wi, wn) = factor_slot(sw, m.wa, d.b);
    Some((zi * wn + wi) as usize)
}

pub fn coh_basis(i: usize, d: Bidegree) -> CohBasis {
    let mut basis = Vec::with_capacity(coh_dim(i, d));
    if coh_dim(i, d) > 0 {
        let (sz, sw) = pattern(i, d).expect("nonzero cohomology has a pattern");
        let range = |s: Sign, deg: i64| -> Vec<i64> {
            match s {
                Sign::Pos => (0..=deg).rev().collect(),
                Sign::Neg => (deg + 1..=-1).rev().collect(),
            }
        };
        for za in range(sz, d.a) {
            for wa in range(sw, d.b) {
                basis.push(Monomial::new(za, d.a - za, wa, d.b - wa));
            }
        }
    }
    CohBasis {
        twist: d,
        degree: i,
        basis,
    }
}

fn assemble<C>(
    phi: &SheafMap,
    i: usize,
    t: Bidegree,
    reduce: impl Fn(&BigRational) -> Result<C>,
    mut add: impl FnMut(usize, usize, &C),
) -> Result<(usize, usize)> {
    let src: Vec<CohBasis> = phi.source.iter().map(|d| coh_basis(i, *d + t)).collect();
    let tgt_twists: Vec<Bidegree> = phi.target.iter().map(|d| *d + t).collect();
    let tgt_dims: Vec<usize> = tgt_twists.iter().map(|d| coh_dim(i, *d)).collect();
    let mut row_off = 0;
    for (k, tk) in tgt_twists.iter().enumerate() {
        let mut col_off = 0;
        for (j, sb) in src.iter().enumerate() {
            let entry = phi.entry(k, j);
            if tgt_dims[k] > 0 && !sb.is_empty() && !entry.is_zero() {
                let terms: Vec<(Monomial, C)> = entry
                    .terms()
                    .iter()
                    .map(|(m, c)| Ok((*m, reduce(c)?)))
                    .collect::<Result<_>>()?;
                for (col, mu) in sb.basis.iter().enumerate() {
                    for (nu, c) in &terms {
                        if let Some(row) = index_of(i, *tk, &mu.mul(nu)) {
                            add(row_off + row, col_off + col, c);
                        }
                    }
                }
            }
            col_off += sb.len();
        }
        row_off += tgt_dims[k];
    }
    Ok((row_off, src.iter().map(|b| b.len()).sum()))
}

/// Exact matrix of H^i(φ(t)): columns index the source basis, rows the target basis.
pub fn induced_map(phi: &SheafMap, i: usize, t: Bidegree) -> ExactMatrix {
    let rows = coh_dim_sum(i, &phi.target, t);
    let cols = coh_dim_sum(i, &phi.source, t);
    let mut m = ExactMatrix::zeros(rows, cols);
    assemble(phi, i, t, |c| Ok(c.clone()), |r, c, v| m.add_at(r, c, v))
        .expect("rational reduction cannot fail");
    m
}

/// Same matrix reduced mod p.
pub fn induced_map_modp(phi: &SheafMap, i: usize, t: Bidegree, p: u64) -> Result<ModpMatrix> {
    let rows = coh_dim_sum(i, &phi.target, t);
    let cols = coh_dim_sum(i, &phi.source, t);
    let mut m = ModpMatrix::zeros(rows, cols, p);
    assemble(
        phi,
        i,
        t,
        |c| rational_mod(c, p).ok_or(NatcohError::DenominatorDivisibleByP(p)),
        |r, c, v| m.add_at(r, c, *v),
    )?;
    Ok(m)
}
