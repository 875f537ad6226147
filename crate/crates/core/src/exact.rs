//! Exact dense linear algebra: fraction-free elimination over big
//! integers with rational back-substitution, and Gaussian elimination over
//! GF(p). No floating point anywhere.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Row echelon data from fraction-free (Bareiss) elimination.
pub struct Echelon {
    pub rows: Vec<Vec<BigInt>>,
    /// Column of the pivot in each of the first `rank` rows.
    pub pivot_cols: Vec<usize>,
    pub rank: usize,
    /// Sign accumulated from row swaps.
    pub sign: i8,
}

/// Fraction-free Gaussian elimination. Entries stay integral: every
/// division by the previous pivot is exact.
pub fn bareiss_echelon(mut rows: Vec<Vec<BigInt>>) -> Echelon {
    let n_rows = rows.len();
    let n_cols = rows.first().map(|r| r.len()).unwrap_or(0);
    let mut pivot_cols = Vec::new();
    let mut prev_pivot = BigInt::one();
    let mut sign = 1i8;
    let mut rank = 0;
    for col in 0..n_cols {
        if rank == n_rows {
            break;
        }
        let Some(src) = (rank..n_rows).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        if src != rank {
            rows.swap(rank, src);
            sign = -sign;
        }
        let pivot = rows[rank][col].clone();
        for i in rank + 1..n_rows {
            if rows[i][col].is_zero() {
                // rescale to keep the minor form: a_ij <- a_ij * pivot / prev
                for j in 0..n_cols {
                    if !rows[i][j].is_zero() {
                        let value = &rows[i][j] * &pivot;
                        debug_assert!((&value % &prev_pivot).is_zero(), "inexact pivot division");
                        rows[i][j] = value / &prev_pivot;
                    }
                }
                continue;
            }
            let lead = rows[i][col].clone();
            for j in 0..n_cols {
                let value = &rows[i][j] * &pivot - &lead * &rows[rank][j];
                debug_assert!((&value % &prev_pivot).is_zero(), "inexact pivot division");
                rows[i][j] = value / &prev_pivot;
            }
        }
        prev_pivot = pivot;
        pivot_cols.push(col);
        rank += 1;
    }
    Echelon {
        rows,
        pivot_cols,
        rank,
        sign,
    }
}

/// Determinant of a square integer matrix by fraction-free elimination.
pub fn bareiss_determinant(rows: Vec<Vec<BigInt>>) -> BigInt {
    let n = rows.len();
    assert!(rows.iter().all(|r| r.len() == n), "square matrix required");
    if n == 0 {
        return BigInt::one();
    }
    let ech = bareiss_echelon(rows);
    if ech.rank < n {
        return BigInt::zero();
    }
    // the final pivot of full-rank elimination is the determinant
    let det = ech.rows[n - 1][ech.pivot_cols[n - 1]].clone();
    if ech.sign < 0 {
        -det
    } else {
        det
    }
}

/// Solution data for `A x = b` over the rationals.
#[derive(Debug, Clone)]
pub struct AffineSolution {
    pub consistent: bool,
    pub rank: usize,
    pub nullity: usize,
    pub particular: Option<Vec<BigRational>>,
    pub basis: Vec<Vec<BigRational>>,
}

impl AffineSolution {
    pub fn unique(&self) -> bool {
        self.consistent && self.nullity == 0
    }
}

fn back_substitute(
    ech: &Echelon,
    n_cols: usize,
    rhs_col: usize,
    free_values: &dyn Fn(usize) -> BigRational,
) -> Vec<BigRational> {
    let mut x = vec![BigRational::zero(); n_cols];
    for c in 0..n_cols {
        if !ech.pivot_cols.contains(&c) {
            x[c] = free_values(c);
        }
    }
    for (r, &pc) in ech.pivot_cols.iter().enumerate().rev() {
        let mut acc = BigRational::from(ech.rows[r][rhs_col].clone());
        for c in pc + 1..n_cols {
            if !ech.rows[r][c].is_zero() {
                acc -= BigRational::from(ech.rows[r][c].clone()) * &x[c];
            }
        }
        x[pc] = acc / BigRational::from(ech.rows[r][pc].clone());
    }
    x
}

fn solve_affine_dense(a: &[Vec<BigInt>], b: &[BigInt]) -> AffineSolution {
    let n_rows = a.len();
    let n_cols = a.first().map(|r| r.len()).unwrap_or(0);
    let mut augmented: Vec<Vec<BigInt>> = Vec::with_capacity(n_rows);
    for (row, rhs) in a.iter().zip(b.iter()) {
        let mut r = row.clone();
        r.push(rhs.clone());
        augmented.push(r);
    }
    let ech = bareiss_echelon(augmented);
    // a pivot in the rhs column signals inconsistency
    let consistent = ech.pivot_cols.iter().all(|&c| c < n_cols);
    let rank = if consistent { ech.rank } else { ech.rank - 1 };
    let nullity = n_cols - rank;
    if !consistent {
        return AffineSolution {
            consistent,
            rank,
            nullity,
            particular: None,
            basis: Vec::new(),
        };
    }
    let particular = back_substitute(&ech, n_cols, n_cols, &|_| BigRational::zero());
    let mut basis = Vec::new();
    let free_cols: Vec<usize> = (0..n_cols)
        .filter(|c| !ech.pivot_cols.contains(c))
        .collect();
    for &f in &free_cols {
        // homogeneous solve with the free variable at one
        let mut hom = ech.rows.clone();
        for row in hom.iter_mut() {
            row[n_cols] = BigInt::zero();
        }
        let hom_ech = Echelon {
            rows: hom,
            pivot_cols: ech.pivot_cols.clone(),
            rank: ech.rank,
            sign: ech.sign,
        };
        let v = back_substitute(&hom_ech, n_cols, n_cols, &|c| {
            if c == f {
                BigRational::one()
            } else {
                BigRational::zero()
            }
        });
        basis.push(v);
    }
    AffineSolution {
        consistent,
        rank,
        nullity,
        particular: Some(particular),
        basis,
    }
}

/// Exact rational solve of `A x = b`.
///
/// The nonzero pattern is first split into connected components over rows
/// and columns, and each diagonal block is eliminated fraction-free on its
/// own, so entries never grow past the block's own minors. Columns touching
/// no row contribute free variables.
pub fn solve_affine_exact(a: &[Vec<BigInt>], b: &[BigInt]) -> AffineSolution {
    let n_rows = a.len();
    let n_cols = a.first().map(|r| r.len()).unwrap_or(0);
    assert_eq!(n_rows, b.len(), "rhs length");
    let mut parent: Vec<usize> = (0..n_rows + n_cols).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut root = x;
        while parent[root] != root {
            root = parent[root];
        }
        let mut cur = x;
        while parent[cur] != root {
            let next = parent[cur];
            parent[cur] = root;
            cur = next;
        }
        root
    }
    for (r, row) in a.iter().enumerate() {
        for (c, entry) in row.iter().enumerate() {
            if !entry.is_zero() {
                let rr = find(&mut parent, r);
                let rc = find(&mut parent, n_rows + c);
                if rr != rc {
                    parent[rr] = rc;
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, (Vec<usize>, Vec<usize>)> =
        std::collections::BTreeMap::new();
    for r in 0..n_rows {
        let root = find(&mut parent, r);
        groups.entry(root).or_default().0.push(r);
    }
    for c in 0..n_cols {
        let root = find(&mut parent, n_rows + c);
        groups.entry(root).or_default().1.push(c);
    }

    let mut consistent = true;
    let mut rank = 0;
    let mut nullity = 0;
    let mut particular = vec![BigRational::zero(); n_cols];
    let mut basis: Vec<Vec<BigRational>> = Vec::new();
    for (rows, cols) in groups.values() {
        if rows.is_empty() {
            // isolated columns are free variables
            for &c in cols {
                nullity += 1;
                let mut v = vec![BigRational::zero(); n_cols];
                v[c] = BigRational::one();
                basis.push(v);
            }
            continue;
        }
        let sub_a: Vec<Vec<BigInt>> = rows
            .iter()
            .map(|&r| cols.iter().map(|&c| a[r][c].clone()).collect())
            .collect();
        let sub_b: Vec<BigInt> = rows.iter().map(|&r| b[r].clone()).collect();
        let sol = solve_affine_dense(&sub_a, &sub_b);
        rank += sol.rank;
        nullity += sol.nullity;
        if !sol.consistent {
            consistent = false;
            continue;
        }
        let p = sol.particular.as_ref().unwrap();
        for (i, &c) in cols.iter().enumerate() {
            particular[c] = p[i].clone();
        }
        for v in &sol.basis {
            let mut w = vec![BigRational::zero(); n_cols];
            for (i, &c) in cols.iter().enumerate() {
                w[c] = v[i].clone();
            }
            basis.push(w);
        }
    }
    AffineSolution {
        consistent,
        rank,
        nullity,
        particular: consistent.then_some(particular),
        basis: if consistent { basis } else { Vec::new() },
    }
}

/// Dense matrix over GF(p).
#[derive(Debug, Clone)]
pub struct GfMatrix {
    p: u64,
    n_cols: usize,
    rows: Vec<Vec<u64>>,
}

impl GfMatrix {
    pub fn new(p: u64, n_cols: usize, rows: Vec<Vec<u64>>) -> Result<Self> {
        if !crate::counting::is_prime(p) {
            return Err(Error::NotPrime { value: p });
        }
        let rows = rows
            .into_iter()
            .map(|r| {
                debug_assert_eq!(r.len(), n_cols);
                r.into_iter().map(|x| x % p).collect()
            })
            .collect();
        Ok(GfMatrix { p, n_cols, rows })
    }

    fn inv_mod(&self, a: u64) -> u64 {
        let mut result = 1u64;
        let mut base = a % self.p;
        let mut e = self.p - 2;
        while e > 0 {
            if e & 1 == 1 {
                result = result * base % self.p;
            }
            base = base * base % self.p;
            e >>= 1;
        }
        result
    }

    /// In-place reduction to reduced row echelon form; returns the rank.
    pub fn rank(&mut self) -> usize {
        let p = self.p;
        let mut rank = 0;
        for col in 0..self.n_cols {
            if rank == self.rows.len() {
                break;
            }
            let Some(src) = (rank..self.rows.len()).find(|&r| self.rows[r][col] != 0) else {
                continue;
            };
            self.rows.swap(rank, src);
            let inv = self.inv_mod(self.rows[rank][col]);
            for x in self.rows[rank].iter_mut() {
                *x = *x * inv % p;
            }
            let pivot_row = self.rows[rank].clone();
            for (r, row) in self.rows.iter_mut().enumerate() {
                if r == rank || row[col] == 0 {
                    continue;
                }
                let factor = row[col];
                for (x, &pv) in row.iter_mut().zip(pivot_row.iter()) {
                    *x = (*x + (p - factor) * pv) % p;
                }
            }
            rank += 1;
        }
        rank
    }

    pub fn nullity(&mut self) -> usize {
        self.n_cols - self.rank()
    }

    pub fn determinant(&self) -> u64 {
        assert_eq!(self.rows.len(), self.n_cols);
        let p = self.p;
        let mut m = self.rows.clone();
        let n = m.len();
        let mut det = 1u64;
        for col in 0..n {
            let Some(src) = (col..n).find(|&r| m[r][col] != 0) else {
                return 0;
            };
            if src != col {
                m.swap(col, src);
                det = (p - det) % p;
            }
            det = det * m[col][col] % p;
            let inv = self.inv_mod(m[col][col]);
            let pivot_row: Vec<u64> = m[col].iter().map(|&x| x * inv % p).collect();
            for row in m.iter_mut().skip(col + 1) {
                if row[col] == 0 {
                    continue;
                }
                let factor = row[col];
                for (x, &pv) in row.iter_mut().zip(pivot_row.iter()) {
                    *x = (*x + (p - factor) * pv) % p;
                }
            }
        }
        det
    }
}
