//! Dense exact linear algebra over Q, plus a prime-field twin used for screening.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::bigraded::{pow_mod, rational_mod};
use crate::error::{NatcohError, Result};

pub const DEFAULT_PRIME: u64 = 2_147_483_647;

#[derive(Clone, PartialEq, Eq)]
pub struct ExactMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigRational>,
}

impl fmt::Debug for ExactMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ExactMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(|c| c.to_string()).collect();
            writeln!(f, "  [{}]", row.join(" "))?;
        }
        Ok(())
    }
}

impl ExactMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ExactMatrix {
            rows,
            cols,
            data: vec![BigRational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = ExactMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigRational::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<BigRational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        ExactMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        ExactMatrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| BigRational::from_integer(x.into())).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &BigRational {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: BigRational) {
        self.data[r * self.cols + c] = v;
    }

    pub fn add_at(&mut self, r: usize, c: usize, v: &BigRational) {
        let e = &mut self.data[r * self.cols + c];
        *e += v;
    }

    pub fn row(&self, r: usize) -> &[BigRational] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn transpose(&self) -> ExactMatrix {
        let mut t = ExactMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c).clone());
            }
        }
        t
    }

    pub fn mul(&self, o: &ExactMatrix) -> Result<ExactMatrix> {
        if self.cols != o.rows {
            return Err(NatcohError::ShapeMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, o.rows, o.cols
            )));
        }
        let mut out = ExactMatrix::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if !b.is_zero() {
                        out.add_at(i, j, &(a * b));
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[BigRational]) -> Vec<BigRational> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .filter(|(a, _)| !a.is_zero())
                    .fold(BigRational::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    /// Rows scaled by the lcm of their denominators.
    fn integer_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows)
            .map(|r| {
                let row = self.row(r);
                let l = row
                    .iter()
                    .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
                row.iter()
                    .map(|x| x.numer() * (&l / x.denom()))
                    .collect()
            })
            .collect()
    }

    /// Exact rank via fraction-free (Bareiss) elimination.
    pub fn rank(&self) -> usize {
        let mut m = self.integer_rows();
        let (rows, cols) = (self.rows, self.cols);
        let mut prev = BigInt::one();
        let mut rank = 0;
        for c in 0..cols {
            if rank == rows {
                break;
            }
            let Some(p) = (rank..rows).find(|&r| !m[r][c].is_zero()) else {
                continue;
            };
            m.swap(rank, p);
            let (top, rest) = m.split_at_mut(rank + 1);
            let pivot_row = &top[rank];
            let piv = pivot_row[c].clone();
            for row in rest.iter_mut() {
                let lead = std::mem::take(&mut row[c]);
                for j in c + 1..cols {
                    let v = &row[j] * &piv - &lead * &pivot_row[j];
                    // exact by Sylvester's identity
                    row[j] = v / &prev;
                }
            }
            prev = piv;
            rank += 1;
        }
        rank
    }

    /// Reduced row echelon form; returns (rref, pivot columns). Pivots are
    /// chosen as the first nonzero entry scanning columns left to right.
    pub fn rref(&self) -> (ExactMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else {
                continue;
            };
            if p != r {
                for j in 0..m.cols {
                    m.data.swap(p * m.cols + j, r * m.cols + j);
                }
            }
            let inv = m.get(r, c).recip();
            for j in c..m.cols {
                let v = m.get(r, j) * &inv;
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i == r || m.get(i, c).is_zero() {
                    continue;
                }
                let factor = m.get(i, c).clone();
                for j in c..m.cols {
                    let rv = m.get(r, j);
                    if rv.is_zero() {
                        continue;
                    }
                    let v = m.get(i, j) - &factor * rv;
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    /// Basis of the right kernel, one vector per free column (in column order).
    pub fn nullspace(&self) -> Vec<Vec<BigRational>> {
        let (r, pivots) = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let mut out = Vec::new();
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = vec![BigRational::zero(); self.cols];
            v[free] = BigRational::one();
            for (row, &p) in pivots.iter().enumerate() {
                v[p] = -r.get(row, free).clone();
            }
            out.push(v);
        }
        out
    }

    /// Some x with self·x = b, or None if inconsistent.
    pub fn solve(&self, b: &[BigRational]) -> Option<Vec<BigRational>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = ExactMatrix::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, self.cols, b[i].clone());
        }
        let (r, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![BigRational::zero(); self.cols];
        for (row, &p) in pivots.iter().enumerate() {
            x[p] = r.get(row, self.cols).clone();
        }
        Some(x)
    }

    pub fn to_modp(&self, p: u64) -> Result<ModpMatrix> {
        let data = self
            .data
            .iter()
            .map(|x| rational_mod(x, p).ok_or(NatcohError::DenominatorDivisibleByP(p)))
            .collect::<Result<Vec<_>>>()?;
        Ok(ModpMatrix {
            rows: self.rows,
            cols: self.cols,
            p,
            data,
        })
    }
}

/// rank of M mod p; never exceeds the rational rank.
pub fn rank_modp(m: &ExactMatrix, p: u64) -> Result<usize> {
    Ok(m.to_modp(p)?.rank())
}

/// Scale a rational vector to a primitive integer vector (positive first nonzero entry kept as is).
pub fn primitive_integer(v: &[BigRational]) -> Vec<BigInt> {
    let l = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| x.numer() * (&l / x.denom())).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return ints;
    }
    ints.into_iter().map(|x| x / &g).collect()
}

/// Matrix over F_p, p < 2^32 so products fit in u64.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModpMatrix {
    rows: usize,
    cols: usize,
    p: u64,
    data: Vec<u64>,
}

impl ModpMatrix {
    pub fn zeros(rows: usize, cols: usize, p: u64) -> Self {
        assert!(p >= 2 && p < (1 << 32), "modulus out of range");
        ModpMatrix {
            rows,
            cols,
            p,
            data: vec![0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        self.data[r * self.cols + c] = v % self.p;
    }

    pub fn add_at(&mut self, r: usize, c: usize, v: u64) {
        let e = &mut self.data[r * self.cols + c];
        *e = (*e + v % self.p) % self.p;
    }

    pub fn rank(&self) -> usize {
        let p = self.p;
        let (rows, cols) = (self.rows, self.cols);
        let mut m = self.data.clone();
        let mut rank = 0;
        for c in 0..cols {
            if rank == rows {
                break;
            }
            let Some(piv) = (rank..rows).find(|&r| m[r * cols + c] != 0) else {
                continue;
            };
            if piv != rank {
                for j in 0..cols {
                    m.swap(piv * cols + j, rank * cols + j);
                }
            }
            let inv = pow_mod(m[rank * cols + c], p - 2, p);
            for j in c..cols {
                m[rank * cols + j] = m[rank * cols + j] * inv % p;
            }
            for r in rank + 1..rows {
                let f = m[r * cols + c];
                if f == 0 {
                    continue;
                }
                for j in c..cols {
                    let sub = f * m[rank * cols + j] % p;
                    let e = &mut m[r * cols + j];
                    *e = (*e + p - sub) % p;
                }
            }
            rank += 1;
        }
        rank
    }
}

/// Largest primes not exceeding `start`, found by trial division.
pub fn primes_below(start: u64, count: usize) -> Vec<u64> {
    fn is_prime(n: u64) -> bool {
        if n < 2 {
            return false;
        }
        let mut d = 2;
        while d * d <= n {
            if n % d == 0 {
                return false;
            }
            d += 1;
        }
        true
    }
    let mut out = Vec::with_capacity(count);
    let mut n = start;
    while out.len() < count && n >= 2 {
        if is_prime(n) {
            out.push(n);
        }
        n -= 1;
    }
    out
}

pub fn is_zero_vec(v: &[BigRational]) -> bool {
    v.iter().all(|x| x.is_zero())
}

pub fn abs_max(v: &[BigInt]) -> BigInt {
    v.iter().map(|x| x.abs()).max().unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize, rank: usize) -> ExactMatrix {
        // product of rows x rank and rank x cols integer matrices
        let a: Vec<Vec<i64>> = (0..rows).map(|_| (0..rank).map(|_| rng.gen_range(-9..=9)).collect()).collect();
        let b: Vec<Vec<i64>> = (0..rank).map(|_| (0..cols).map(|_| rng.gen_range(-9..=9)).collect()).collect();
        let mut m = ExactMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                let s: i64 = (0..rank).map(|k| a[i][k] * b[k][j]).sum();
                m.set(i, j, BigRational::new(s.into(), (1 + (i as i64 % 3)).into()));
            }
        }
        m
    }

    #[test]
    fn small_ranks() {
        assert_eq!(ExactMatrix::identity(3).rank(), 3);
        assert_eq!(ExactMatrix::zeros(4, 7).rank(), 0);
        let m = ExactMatrix::from_i64(&[&[2, 4], &[1, 2]]);
        assert_eq!(m.rank(), 1);
        assert_eq!(rank_modp(&m, 101).unwrap(), 1);
        assert_eq!(rank_modp(&ExactMatrix::identity(5), 101).unwrap(), 5);
        let p = 101;
        let m = ExactMatrix::from_i64(&[&[p, 0], &[0, 1]]);
        assert_eq!(m.rank(), 2);
        assert_eq!(rank_modp(&m, p as u64).unwrap(), 1);
    }

    #[test]
    fn modp_rejects_denominator() {
        let m = ExactMatrix::from_rows(vec![vec![BigRational::new(1.into(), 7.into())]]);
        assert_eq!(rank_modp(&m, 7), Err(NatcohError::DenominatorDivisibleByP(7)));
    }

    #[test]
    fn nullspace_examples() {
        assert!(ExactMatrix::identity(4).nullspace().is_empty());
        let ns = ExactMatrix::from_i64(&[&[1, 1]]).nullspace();
        assert_eq!(ns, vec![vec![q(-1), q(1)]]);
    }

    #[test]
    fn solve_examples() {
        let m = ExactMatrix::from_i64(&[&[1, 2], &[3, 4]]);
        let x = m.solve(&[q(5), q(6)]).unwrap();
        assert_eq!(m.mul_vec(&x), vec![q(5), q(6)]);
        let s = ExactMatrix::from_i64(&[&[1, 1], &[2, 2]]);
        assert!(s.solve(&[q(1), q(3)]).is_none());
    }

    #[test]
    fn bareiss_with_skipped_columns() {
        // zero column in the middle forces a skipped pivot
        let m = ExactMatrix::from_i64(&[&[0, 0, 1, 2], &[0, 0, 2, 5], &[3, 0, 1, 1]]);
        assert_eq!(m.rank(), 3);
        assert_eq!(m.rank(), m.transpose().rank());
    }

    #[test]
    fn primes() {
        assert_eq!(primes_below(DEFAULT_PRIME, 3), vec![2147483647, 2147483629, 2147483587]);
        assert_eq!(primes_below(10, 4), vec![7, 5, 3, 2]);
    }

    #[test]
    fn modp_agrees_with_rational_rank_statistically() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let trials = 200;
        let mut agree = 0;
        for _ in 0..trials {
            let (r, c) = (rng.gen_range(1..9), rng.gen_range(1..9));
            let k = rng.gen_range(0..=r.min(c));
            let m = random_matrix(&mut rng, r, c, k);
            let exact = m.rank();
            let modp = rank_modp(&m, DEFAULT_PRIME).unwrap();
            assert!(modp <= exact);
            agree += usize::from(modp == exact);
        }
        assert!(agree * 100 >= trials * 95, "agreement {agree}/{trials}");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn matrix() -> impl Strategy<Value = ExactMatrix> {
            (1usize..7, 1usize..7, 0usize..7, any::<u64>()).prop_map(|(r, c, k, seed)| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                random_matrix(&mut rng, r, c, k.min(r).min(c))
            })
        }

        proptest! {
            #[test]
            fn rank_of_transpose(m in matrix()) {
                prop_assert_eq!(m.rank(), m.transpose().rank());
            }

            #[test]
            fn rank_nullity(m in matrix()) {
                prop_assert_eq!(m.rank() + m.nullspace().len(), m.cols());
            }

            #[test]
            fn nullspace_vectors_vanish(m in matrix()) {
                for v in m.nullspace() {
                    prop_assert!(is_zero_vec(&m.mul_vec(&v)));
                }
            }

            #[test]
            fn modp_never_exceeds(m in matrix(), pi in 0usize..3) {
                let p = [DEFAULT_PRIME, 101, 3][pi];
                if let Ok(r) = rank_modp(&m, p) {
                    prop_assert!(r <= m.rank());
                }
            }

            #[test]
            fn rref_rank_matches_bareiss(m in matrix()) {
                prop_assert_eq!(m.rref().1.len(), m.rank());
            }
        }
    }
}
