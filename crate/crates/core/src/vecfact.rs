//! Finite-field linear algebra and the poset of complementary-subspace
//! pairs of V = GF(q)^k for small q and k <= 3.

use std::fmt;

use num_bigint::BigUint;
use num_traits::One;

use crate::counting::is_prime;
use crate::error::{Error, Result};
use crate::omp::{AtomKind, FactorPair, OmpStructure};
use crate::partition::{GroundSet, Partition};

/// A small finite field given by explicit operation tables.
///
/// Prime orders use modular arithmetic; order 4 uses the tables of
/// GF(4) = {0, 1, x, x+1} with x^2 = x + 1. The axioms are re-checked from
/// the tables at construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiniteField {
    q: u8,
    add: Vec<Vec<u8>>,
    mul: Vec<Vec<u8>>,
}

impl FiniteField {
    pub fn new(q: u64) -> Result<Self> {
        let field = if is_prime(q) && q <= 31 {
            let q8 = q as u8;
            let add = (0..q8)
                .map(|a| (0..q8).map(|b| (a + b) % q8).collect())
                .collect();
            let mul = (0..q8)
                .map(|a| (0..q8).map(|b| (a as u16 * b as u16 % q as u16) as u8).collect())
                .collect();
            FiniteField { q: q8, add, mul }
        } else if q == 4 {
            // addition is xor; multiplication from x^2 = x + 1
            let add = (0..4u8).map(|a| (0..4).map(|b| a ^ b).collect()).collect();
            let mul = vec![
                vec![0, 0, 0, 0],
                vec![0, 1, 2, 3],
                vec![0, 2, 3, 1],
                vec![0, 3, 1, 2],
            ];
            FiniteField { q: 4, add, mul }
        } else {
            return Err(Error::BadDimension {
                detail: format!("unsupported field order {q}"),
            });
        };
        field.check_axioms()?;
        Ok(field)
    }

    fn check_axioms(&self) -> Result<()> {
        let q = self.q as usize;
        let bad = |detail: String| Error::BadDimension { detail };
        for a in 0..q as u8 {
            if self.add(a, 0) != a || self.mul(a, 1) != a || self.mul(a, 0) != 0 {
                return Err(bad(format!("identity axioms fail at {a}")));
            }
            if a != 0 && (0..self.q).all(|b| self.mul(a, b) != 1) {
                return Err(bad(format!("{a} has no multiplicative inverse")));
            }
            for b in 0..q as u8 {
                if self.add(a, b) != self.add(b, a) || self.mul(a, b) != self.mul(b, a) {
                    return Err(bad("commutativity fails".into()));
                }
                for c in 0..q as u8 {
                    if self.add(self.add(a, b), c) != self.add(a, self.add(b, c))
                        || self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c))
                        || self.mul(a, self.add(b, c)) != self.add(self.mul(a, b), self.mul(a, c))
                    {
                        return Err(bad("associativity/distributivity fails".into()));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn order(&self) -> u8 {
        self.q
    }

    pub fn add(&self, a: u8, b: u8) -> u8 {
        self.add[a as usize][b as usize]
    }

    pub fn mul(&self, a: u8, b: u8) -> u8 {
        self.mul[a as usize][b as usize]
    }

    pub fn neg(&self, a: u8) -> u8 {
        (0..self.q).find(|&b| self.add(a, b) == 0).unwrap()
    }

    pub fn sub(&self, a: u8, b: u8) -> u8 {
        self.add(a, self.neg(b))
    }

    pub fn inv(&self, a: u8) -> u8 {
        assert!(a != 0, "zero has no inverse");
        (0..self.q).find(|&b| self.mul(a, b) == 1).unwrap()
    }
}

/// Reduce `rows` to reduced row echelon form, dropping zero rows.
fn rref(field: &FiniteField, mut rows: Vec<Vec<u8>>) -> Vec<Vec<u8>> {
    let cols = rows.first().map(|r| r.len()).unwrap_or(0);
    let mut pivot_row = 0;
    for col in 0..cols {
        let Some(src) = (pivot_row..rows.len()).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(pivot_row, src);
        let inv = field.inv(rows[pivot_row][col]);
        for x in rows[pivot_row].iter_mut() {
            *x = field.mul(*x, inv);
        }
        for r in 0..rows.len() {
            if r != pivot_row && rows[r][col] != 0 {
                let factor = rows[r][col];
                for c in 0..cols {
                    let delta = field.mul(factor, rows[pivot_row][c]);
                    rows[r][c] = field.sub(rows[r][c], delta);
                }
            }
        }
        pivot_row += 1;
        if pivot_row == rows.len() {
            break;
        }
    }
    rows.truncate(pivot_row);
    rows
}

/// Subspace of GF(q)^k held as a canonical reduced-echelon row basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    field: FiniteField,
    ambient: u32,
    basis: Vec<Vec<u8>>,
}

impl Subspace {
    pub fn from_spanning(field: &FiniteField, ambient: u32, vectors: &[Vec<u8>]) -> Result<Self> {
        for v in vectors {
            if v.len() != ambient as usize {
                return Err(Error::BadDimension {
                    detail: format!("vector length {} in ambient {ambient}", v.len()),
                });
            }
        }
        Ok(Subspace {
            field: field.clone(),
            ambient,
            basis: rref(field, vectors.to_vec()),
        })
    }

    pub fn zero(field: &FiniteField, ambient: u32) -> Self {
        Subspace {
            field: field.clone(),
            ambient,
            basis: Vec::new(),
        }
    }

    pub fn full(field: &FiniteField, ambient: u32) -> Self {
        let basis = (0..ambient as usize)
            .map(|i| {
                let mut row = vec![0u8; ambient as usize];
                row[i] = 1;
                row
            })
            .collect();
        Subspace {
            field: field.clone(),
            ambient,
            basis,
        }
    }

    pub fn dim(&self) -> u32 {
        self.basis.len() as u32
    }

    pub fn ambient_dim(&self) -> u32 {
        self.ambient
    }

    pub fn field(&self) -> &FiniteField {
        &self.field
    }

    pub fn basis(&self) -> &[Vec<u8>] {
        &self.basis
    }

    /// Reduce a vector modulo the subspace; zero means membership.
    pub fn residue(&self, v: &[u8]) -> Vec<u8> {
        let mut v = v.to_vec();
        for row in &self.basis {
            let pivot = row.iter().position(|&x| x != 0).unwrap();
            if v[pivot] != 0 {
                let factor = v[pivot];
                for c in 0..v.len() {
                    let delta = self.field.mul(factor, row[c]);
                    v[c] = self.field.sub(v[c], delta);
                }
            }
        }
        v
    }

    pub fn contains(&self, v: &[u8]) -> bool {
        self.residue(v).iter().all(|&x| x == 0)
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        other.basis.iter().all(|row| self.contains(row))
    }
}

impl fmt::Display for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.basis.is_empty() {
            return write!(f, "0");
        }
        let rows: Vec<String> = self
            .basis
            .iter()
            .map(|row| row.iter().map(|d| d.to_string()).collect::<String>())
            .collect();
        write!(f, "{}", rows.join(";"))
    }
}

/// Parse the `100;010` basis text format.
pub fn parse_subspace(field: &FiniteField, ambient: u32, text: &str) -> Result<Subspace> {
    let text = text.trim();
    if text == "0" {
        return Ok(Subspace::zero(field, ambient));
    }
    let mut rows = Vec::new();
    for part in text.split(';') {
        let mut row = Vec::new();
        for (pos, ch) in part.trim().char_indices() {
            let d = ch.to_digit(10).ok_or(Error::Parse {
                position: pos,
                detail: format!("expected digit, found {ch:?}"),
            })? as u8;
            if d >= field.order() {
                return Err(Error::Parse {
                    position: pos,
                    detail: format!("digit {d} outside field of order {}", field.order()),
                });
            }
            row.push(d);
        }
        rows.push(row);
    }
    Subspace::from_spanning(field, ambient, &rows)
}

/// Ordered pair of complementary subspaces.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubspacePair {
    s: Subspace,
    t: Subspace,
}

impl SubspacePair {
    pub fn new(s: Subspace, t: Subspace) -> Result<Self> {
        if s.ambient != t.ambient || s.field != t.field {
            return Err(Error::GroundMismatch {
                left: s.ambient as usize,
                right: t.ambient as usize,
            });
        }
        if s.dim() + t.dim() != s.ambient {
            return Err(Error::ShapeMismatch {
                detail: format!("dims {} + {} != {}", s.dim(), t.dim(), s.ambient),
            });
        }
        let mut stacked = s.basis.clone();
        stacked.extend(t.basis.iter().cloned());
        let rank = rref(&s.field, stacked).len() as u32;
        if rank != s.ambient {
            return Err(Error::ShapeMismatch {
                detail: "subspaces are not complementary".into(),
            });
        }
        Ok(SubspacePair { s, t })
    }

    pub fn s(&self) -> &Subspace {
        &self.s
    }

    pub fn t(&self) -> &Subspace {
        &self.t
    }

    pub fn orthocomplement(&self) -> SubspacePair {
        SubspacePair {
            s: self.t.clone(),
            t: self.s.clone(),
        }
    }

    pub fn leq(&self, other: &SubspacePair) -> bool {
        other.s.contains_subspace(&self.s) && self.t.contains_subspace(&other.t)
    }

    pub fn perp(&self, other: &SubspacePair) -> bool {
        other.t.contains_subspace(&self.s) && self.t.contains_subspace(&other.s)
    }
}

impl fmt::Display for SubspacePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ; {}", self.s, self.t)
    }
}

/// Order and orthogonality in one call: inclusion of the first spots with
/// reverse inclusion of the second, and the complement-swapped variant.
pub fn order_and_orthogonality(x: &SubspacePair, y: &SubspacePair) -> Result<(bool, bool)> {
    if x.s().ambient_dim() != y.s().ambient_dim() || x.s().field() != y.s().field() {
        return Err(Error::GroundMismatch {
            left: x.s().ambient_dim() as usize,
            right: y.s().ambient_dim() as usize,
        });
    }
    Ok((x.leq(y), x.perp(y)))
}

/// Gaussian binomial coefficient: the number of d-dimensional subspaces of
/// a k-dimensional space over a q-element field.
pub fn gaussian_binomial(q: u64, k: u32, d: u32) -> BigUint {
    if d > k {
        return BigUint::ZERO;
    }
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..d {
        num *= BigUint::from(q).pow(k - i) - BigUint::one();
        den *= BigUint::from(q).pow(i + 1) - BigUint::one();
    }
    num / den
}

/// All d-dimensional subspaces in canonical order, generated directly in
/// reduced-echelon form, one output per subspace.
pub fn enumerate_subspaces(field: &FiniteField, k: u32, d: u32) -> Result<Vec<Subspace>> {
    if d > k {
        return Err(Error::BadDimension {
            detail: format!("dimension {d} exceeds ambient {k}"),
        });
    }
    let q = field.order();
    let k = k as usize;
    let d = d as usize;
    let mut out = Vec::new();
    if d == 0 {
        out.push(Subspace::zero(field, k as u32));
        return Ok(out);
    }
    let mut pivots: Vec<usize> = (0..d).collect();
    loop {
        // free positions: row i, cols > pivots[i] that are not pivot columns
        let mut free: Vec<(usize, usize)> = Vec::new();
        for (i, &p) in pivots.iter().enumerate() {
            for c in p + 1..k {
                if !pivots.contains(&c) {
                    free.push((i, c));
                }
            }
        }
        let mut assignment = vec![0u8; free.len()];
        loop {
            let mut basis = vec![vec![0u8; k]; d];
            for (i, &p) in pivots.iter().enumerate() {
                basis[i][p] = 1;
            }
            for (slot, &(i, c)) in free.iter().enumerate() {
                basis[i][c] = assignment[slot];
            }
            out.push(Subspace {
                field: field.clone(),
                ambient: k as u32,
                basis,
            });
            let mut i = 0;
            loop {
                if i == assignment.len() {
                    break;
                }
                assignment[i] += 1;
                if assignment[i] < q {
                    break;
                }
                assignment[i] = 0;
                i += 1;
            }
            if assignment.is_empty() || assignment.iter().all(|&x| x == 0) {
                break;
            }
        }
        // next pivot combination
        let mut i = d;
        let advanced = loop {
            if i == 0 {
                break false;
            }
            i -= 1;
            if pivots[i] != i + k - d {
                pivots[i] += 1;
                for j in i + 1..d {
                    pivots[j] = pivots[j - 1] + 1;
                }
                break true;
            }
        };
        if !advanced {
            return Ok(out);
        }
    }
}

/// Build the poset structure of complementary-subspace pairs of GF(q)^k:
/// atoms are the pairs with one-dimensional first spot, blocks the spanning
/// sets of k lines.
pub fn fact_v_structure(q: u64, k: u32) -> Result<OmpStructure> {
    let field = FiniteField::new(q)?;
    if k < 2 {
        return Err(Error::BadDimension {
            detail: format!("need dimension >= 2, got {k}"),
        });
    }
    let points = q.pow(k);
    if points > 400 {
        return Err(Error::SizeGuard {
            size: points as usize,
            cap: 400,
        });
    }
    let lines = enumerate_subspaces(&field, k, 1)?;
    let hyper = enumerate_subspaces(&field, k, k - 1)?;
    let mut atoms: Vec<SubspacePair> = Vec::new();
    let mut atom_index = std::collections::HashMap::new();
    for line in &lines {
        for h in &hyper {
            if let Ok(pair) = SubspacePair::new(line.clone(), h.clone()) {
                atom_index.insert((line.clone(), h.clone()), atoms.len());
                atoms.push(pair);
            }
        }
    }
    // blocks: k-subsets of lines with full span
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let n_lines = lines.len();
    let kk = k as usize;
    if n_lines >= kk {
        let mut chosen: Vec<usize> = (0..kk).collect();
        loop {
            let rows: Vec<Vec<u8>> = chosen
                .iter()
                .flat_map(|&i| lines[i].basis.iter().cloned())
                .collect();
            if rref(&field, rows).len() as u32 == k {
                let mut atom_ids = Vec::with_capacity(kk);
                for &i in &chosen {
                    let others: Vec<Vec<u8>> = chosen
                        .iter()
                        .filter(|&&j| j != i)
                        .flat_map(|&j| lines[j].basis.iter().cloned())
                        .collect();
                    let span = Subspace::from_spanning(&field, k, &others)?;
                    let id = atom_index
                        .get(&(lines[i].clone(), span))
                        .copied()
                        .expect("complement of a spanning set is enumerated");
                    atom_ids.push(id);
                }
                atom_ids.sort_unstable();
                blocks.push(atom_ids);
            }
            // next combination
            let mut i = kk;
            let advanced = loop {
                if i == 0 {
                    break false;
                }
                i -= 1;
                if chosen[i] != i + n_lines - kk {
                    chosen[i] += 1;
                    for j in i + 1..kk {
                        chosen[j] = chosen[j - 1] + 1;
                    }
                    break true;
                }
            };
            if !advanced {
                break;
            }
        }
    }
    OmpStructure::from_parts(points as usize, AtomKind::Vector(atoms), blocks)
}

/// Point labeling of GF(q)^k by base-q digits of the point index, least
/// significant digit first.
pub fn standard_labeling(q: u64, k: u32) -> Vec<Vec<u8>> {
    let points = q.pow(k);
    (0..points)
        .map(|mut p| {
            (0..k)
                .map(|_| {
                    let d = (p % q) as u8;
                    p /= q;
                    d
                })
                .collect()
        })
        .collect()
}

/// Bijection between subspace pairs and coset-partition factor pairs of a
/// labeled ground set of q^k points.
pub struct CosetEmbedding {
    field: FiniteField,
    k: u32,
    ground: GroundSet,
    labels: Vec<Vec<u8>>,
}

impl CosetEmbedding {
    pub fn new(q: u64, k: u32, labels: Vec<Vec<u8>>) -> Result<Self> {
        let field = FiniteField::new(q)?;
        let points = q.pow(k);
        if points > 32 {
            return Err(Error::SizeGuard {
                size: points as usize,
                cap: 32,
            });
        }
        let ground = GroundSet::new(points as usize)?;
        if labels.len() != points as usize {
            return Err(Error::BadDimension {
                detail: format!("expected {points} labels, got {}", labels.len()),
            });
        }
        let mut seen = std::collections::HashSet::new();
        for v in &labels {
            if v.len() != k as usize || v.iter().any(|&d| d >= q as u8) {
                return Err(Error::BadDimension {
                    detail: format!("bad label {v:?}"),
                });
            }
            if !seen.insert(v.clone()) {
                return Err(Error::BadDimension {
                    detail: format!("label {v:?} repeated; labeling is not bijective"),
                });
            }
        }
        Ok(CosetEmbedding {
            field,
            k,
            ground,
            labels,
        })
    }

    pub fn ground(&self) -> GroundSet {
        self.ground
    }

    /// Partition of the labeled points into cosets of a subspace.
    pub fn coset_partition(&self, s: &Subspace) -> Partition {
        let mut groups: std::collections::HashMap<Vec<u8>, usize> =
            std::collections::HashMap::new();
        let mut blocks: Vec<u32> = Vec::new();
        for (point, label) in self.labels.iter().enumerate() {
            let key = s.residue(label);
            let idx = *groups.entry(key).or_insert_with(|| {
                blocks.push(0);
                blocks.len() - 1
            });
            blocks[idx] |= 1 << point;
        }
        Partition::from_blocks(self.ground, &blocks).expect("cosets partition the points")
    }

    pub fn to_factor_pair(&self, pair: &SubspacePair) -> Result<FactorPair> {
        FactorPair::new(
            self.coset_partition(pair.s()),
            self.coset_partition(pair.t()),
        )
    }

    /// Recognize a factor pair as a pair of coset partitions; both spots
    /// must be coset partitions of subspaces under this labeling.
    pub fn to_subspace_pair(&self, fp: &FactorPair) -> Option<SubspacePair> {
        let s = self.subspace_of_partition(fp.first())?;
        let t = self.subspace_of_partition(fp.second())?;
        SubspacePair::new(s, t).ok()
    }

    fn subspace_of_partition(&self, p: &Partition) -> Option<Subspace> {
        let zero_point = self
            .labels
            .iter()
            .position(|v| v.iter().all(|&d| d == 0))?;
        let block = p.block_containing(zero_point as u32);
        let vectors: Vec<Vec<u8>> = crate::partition::bits(block)
            .map(|pt| self.labels[pt as usize].clone())
            .collect();
        let s = Subspace::from_spanning(&self.field, self.k, &vectors).ok()?;
        let q = self.field.order() as u64;
        if q.pow(s.dim()) != vectors.len() as u64 {
            return None; // the zero block is not a subspace
        }
        if self.coset_partition(&s) != *p {
            return None;
        }
        Some(s)
    }
}

/// The sub-poset induced by a linear structure on a labeled ground set: the
/// image of the complementary-subspace atoms under the coset embedding,
/// with the same block structure, represented over set partitions.
pub fn zp_subalgebra(q: u64, k: u32, labels: Vec<Vec<u8>>) -> Result<OmpStructure> {
    let embedding = CosetEmbedding::new(q, k, labels)?;
    let vec_structure = fact_v_structure(q, k)?;
    let AtomKind::Vector(pairs) = vec_structure.atoms() else {
        unreachable!("fact_v_structure builds vector atoms");
    };
    let atoms: Vec<FactorPair> = pairs
        .iter()
        .map(|p| embedding.to_factor_pair(p))
        .collect::<Result<_>>()?;
    OmpStructure::from_parts(
        embedding.ground.size() as usize,
        AtomKind::Set(atoms),
        vec_structure.blocks().to_vec(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::{cf_vec_atoms, cf_vec_blocks, cf_vec_blocks_per_atom};
    use num_traits::ToPrimitive;

    #[test]
    fn field_tables_are_fields() {
        for q in [2u64, 3, 4, 5, 7] {
            FiniteField::new(q).unwrap();
        }
        assert!(FiniteField::new(6).is_err());
    }

    #[test]
    fn subspace_counts_match_gaussian_binomials() {
        for q in [2u64, 3, 4, 5] {
            let field = FiniteField::new(q).unwrap();
            for k in 1..=3u32 {
                for d in 0..=k {
                    let listed = enumerate_subspaces(&field, k, d).unwrap();
                    let expected = gaussian_binomial(q, k, d).to_u64().unwrap();
                    assert_eq!(listed.len() as u64, expected, "q={q} k={k} d={d}");
                    let set: std::collections::HashSet<_> = listed.iter().cloned().collect();
                    assert_eq!(set.len(), listed.len());
                }
            }
        }
    }

    #[test]
    fn subspace_count_examples() {
        let f2 = FiniteField::new(2).unwrap();
        assert_eq!(enumerate_subspaces(&f2, 3, 1).unwrap().len(), 7);
        let f3 = FiniteField::new(3).unwrap();
        assert_eq!(enumerate_subspaces(&f3, 3, 2).unwrap().len(), 13);
        assert_eq!(enumerate_subspaces(&f3, 3, 0).unwrap().len(), 1);
    }

    #[test]
    fn duality_of_dimension_counts() {
        for q in [2u64, 3, 4, 5] {
            for k in 1..=3u32 {
                for d in 0..=k {
                    assert_eq!(gaussian_binomial(q, k, d), gaussian_binomial(q, k, k - d));
                }
            }
        }
    }

    #[test]
    fn structure_counts() {
        for (q, k, atoms, blocks, per_atom) in [
            (2u64, 3u32, 28usize, 28usize, 3usize),
            (3, 3, 117, 234, 6),
            (2, 2, 6, 3, 1),
            (3, 2, 12, 6, 1),
        ] {
            let s = fact_v_structure(q, k).unwrap();
            assert_eq!(s.n_atoms(), atoms, "atoms at ({q},{k})");
            assert_eq!(s.n_blocks(), blocks, "blocks at ({q},{k})");
            for i in 0..s.n_atoms() {
                assert_eq!(s.blocks_of_atom(i).len(), per_atom, "atom {i} at ({q},{k})");
            }
            assert_eq!(cf_vec_atoms(q, k).to_usize().unwrap(), atoms);
            assert_eq!(cf_vec_blocks(q, k).to_usize().unwrap(), blocks);
            assert_eq!(cf_vec_blocks_per_atom(q, k).to_usize().unwrap(), per_atom);
        }
    }

    #[test]
    fn order_and_orthogonality_examples() {
        let field = FiniteField::new(2).unwrap();
        let bottom =
            SubspacePair::new(Subspace::zero(&field, 3), Subspace::full(&field, 3)).unwrap();
        let s = fact_v_structure(2, 3).unwrap();
        let AtomKind::Vector(pairs) = s.atoms() else {
            unreachable!()
        };
        for p in pairs {
            assert!(bottom.leq(p), "bottom below {p}");
            assert!(p.leq(&p.orthocomplement().orthocomplement()));
        }
        // distinct atoms with the same first spot are incomparable
        for (i, a) in pairs.iter().enumerate() {
            for b in pairs.iter().skip(i + 1) {
                if a.s() == b.s() {
                    assert!(!a.leq(b) && !b.leq(a));
                }
            }
        }
    }

    #[test]
    fn combined_order_call_matches_parts() {
        let s = fact_v_structure(2, 3).unwrap();
        let AtomKind::Vector(pairs) = s.atoms() else {
            unreachable!()
        };
        for a in pairs.iter().take(8) {
            for b in pairs.iter().take(8) {
                let (leq, perp) = order_and_orthogonality(a, b).unwrap();
                assert_eq!(leq, a.leq(b));
                assert_eq!(perp, a.perp(b));
            }
        }
    }

    #[test]
    fn coset_embedding_roundtrip() {
        let embedding = CosetEmbedding::new(2, 3, standard_labeling(2, 3)).unwrap();
        let s = fact_v_structure(2, 3).unwrap();
        let AtomKind::Vector(pairs) = s.atoms() else {
            unreachable!()
        };
        let mut images = std::collections::HashSet::new();
        for pair in pairs {
            let fp = embedding.to_factor_pair(pair).unwrap();
            assert!(images.insert(fp.clone()), "embedding must be injective");
            let back = embedding.to_subspace_pair(&fp).unwrap();
            assert_eq!(&back, pair);
        }
        assert_eq!(images.len(), 28);
    }

    #[test]
    fn coset_embedding_preserves_order_and_orthogonality() {
        let embedding = CosetEmbedding::new(2, 3, standard_labeling(2, 3)).unwrap();
        let s = fact_v_structure(2, 3).unwrap();
        let AtomKind::Vector(pairs) = s.atoms() else {
            unreachable!()
        };
        let images: Vec<FactorPair> = pairs
            .iter()
            .map(|p| embedding.to_factor_pair(p).unwrap())
            .collect();
        for (i, a) in pairs.iter().enumerate() {
            for (j, b) in pairs.iter().enumerate() {
                assert_eq!(
                    a.perp(b),
                    images[i].orthogonal(&images[j]).unwrap(),
                    "orthogonality at ({i},{j})"
                );
                assert_eq!(
                    a.leq(b),
                    images[i].leq(&images[j]).unwrap(),
                    "order at ({i},{j})"
                );
            }
        }
    }

    #[test]
    fn subspace_text_roundtrip() {
        let field = FiniteField::new(3).unwrap();
        for s in enumerate_subspaces(&field, 3, 2).unwrap() {
            let text = s.to_string();
            let back = parse_subspace(&field, 3, &text).unwrap();
            assert_eq!(back, s);
        }
    }
}
