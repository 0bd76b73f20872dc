//! The worked r = 2, γ = 2 example, transcribed verbatim.

use num_rational::Rational64;
use num_traits::{Signed, Zero};

use crate::bigraded::{fmt_rational, Bidegree, LineBundleSum, Monomial};
use crate::document::{MonadDocument, ParamsDoc};
use crate::monad::{HilbertParams, SheafMap};
use crate::search::{l_system, LSystem};

/// Columns of f; each lists the four z-linear entries, then the four w-linear ones.
const F_COLUMNS: [[&str; 8]; 2] = [
    [
        "z0", "2*z0+3*z1", "5*z0+7*z1", "8*z0+9*z1",
        "9*w0+w1", "3*w0+8*w1", "2*w0+5*w1", "7*w0+6*w1",
    ],
    [
        "z0+7*z1", "2*z0+9*z1", "8*z0+5*z1", "6*z0+z1",
        "3*w0+5*w1", "7*w0+2*w1", "w0+11*w1", "w0",
    ],
];

const G1: [[&str; 4]; 4] = [
    ["-18860*w0-19145*w1", "26215/2*w0+34705/2*w1", "3120*w0-4385*w1", "-16725/2*w0-8455/2*w1"],
    ["-4110*w0+10690*w1", "-1258*w0-12466*w1", "4758*w0+1916*w1", "-7433*w0-2296*w1"],
    ["-13845*w0-4450*w1", "8830*w0+1476*w1", "2015*w0-3506*w1", "-6025*w0-1029*w1"],
    ["-3035*w0+850*w1", "-711*w0-2793*w1", "1921*w0-302*w1", "-4756*w0-2803*w1"],
];

const G2: [[&str; 4]; 4] = [
    ["1880*z0", "940*z0+705*z1", "3055*z0+235*z1", "2585*z0+1645*z1"],
    ["2350*z0+940*z1", "470*z0+2350*z1", "1880*z1", "2820*z0+2585*z1"],
    ["2115*z0", "940*z0+1410*z1", "2115*z0+3055*z1", "1175*z0+470*z1"],
    ["1645*z0+1175*z1", "1410*z0+2350*z1", "1175*z0+1175*z1", "1645*z0+1645*z1"],
];

pub const NAME: &str = "paper-g2r2";

pub fn params() -> HilbertParams {
    HilbertParams::new(2, Rational64::from_integer(2)).expect("valid")
}

/// O(-1,-1)^2 -> O(0,-1)^4 + O(-1,0)^4 -> O^4 with the transcribed f and g.
pub fn document() -> MonadDocument {
    let rep = |a, b, k| LineBundleSum::repeated(Bidegree::new(a, b), k);
    let f = (0..8)
        .map(|i| F_COLUMNS.iter().map(|col| col[i].to_string()).collect())
        .collect();
    let g = (0..4)
        .map(|i| G1[i].iter().chain(G2[i].iter()).map(|s| s.to_string()).collect())
        .collect();
    MonadDocument {
        a: rep(-1, -1, 2),
        b: rep(0, -1, 4).concat(&rep(-1, 0, 4)),
        c: rep(0, 0, 4),
        f,
        g,
        params: Some(ParamsDoc::from_params(&params(), None)),
        certificate: None,
    }
}

/// Coefficient names of g: a^k_{ij} for the w-linear block (k = 0 for w0,
/// 1 for w1) and b^k_{ij} for the z-linear block, indices from 1.
pub fn unknown_name(i: usize, j: usize, m: &Monomial, half: usize) -> String {
    let k = if m.za + m.wa > 0 { 0 } else { 1 };
    if j < half {
        format!("a{k}_{}{}", i + 1, j + 1)
    } else {
        format!("b{k}_{}{}", i + 1, j + 1 - half)
    }
}

/// Row `row` of the L-system as "c1*x1 + c2*x2 + ... = 0".
pub fn condition_text(sys: &LSystem, row: usize, half: usize) -> String {
    let m = &sys.matrix;
    let mut s = String::new();
    for (col, (i, j, mono)) in sys.unknowns.iter().enumerate() {
        let c = m.get(row, col);
        if c.is_zero() {
            continue;
        }
        let name = unknown_name(*i, *j, mono, half);
        let neg = c.is_negative();
        let mag = fmt_rational(&c.abs());
        if !s.is_empty() {
            s.push_str(if neg { " - " } else { " + " });
        } else if neg {
            s.push('-');
        }
        if mag != "1" {
            s.push_str(&mag);
            s.push('*');
        }
        s.push_str(&name);
    }
    if s.is_empty() {
        s.push('0');
    }
    s.push_str(" = 0");
    s
}

/// dim V, number of conditions, and dim L for ψ∘f = 0.
pub fn l_counts(f: &SheafMap, target: &LineBundleSum) -> (usize, usize, usize, LSystem) {
    let sys = l_system(f, target);
    let v = sys.unknowns.len();
    let k = sys.conditions.len();
    let l = v - sys.matrix.rank();
    (v, k, l, sys)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transcription_parses() {
        let doc = document();
        let m = doc.to_monad().unwrap();
        assert_eq!((m.a().len(), m.b().len(), m.c().len()), (2, 8, 4));
        assert_eq!(m.f().entry(1, 0).to_string(), "2*z0+3*z1");
        assert_eq!(m.g().entry(0, 1).to_string(), "26215/2*w0+34705/2*w1");
    }

    #[test]
    fn first_condition() {
        let m = document().to_monad().unwrap();
        let (v, k, l, sys) = l_counts(m.f(), m.c());
        assert_eq!((v, k, l), (64, 32, 32));
        assert_eq!(
            condition_text(&sys, 0, 4),
            "a0_11 + 2*a0_12 + 5*a0_13 + 8*a0_14 + 9*b0_11 + 3*b0_12 + 2*b0_13 + 7*b0_14 = 0"
        );
    }
}
