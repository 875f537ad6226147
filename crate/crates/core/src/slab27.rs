//! Local machinery on the 27-point ground set: slabs of 36 atoms, the
//! 1024-element completion set, both kinds of nearness, near-chains, and
//! the spot maps extracted from a black-box automorphism.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::autom::{gamma_apply, PointPermutation};
use crate::error::{Error, Result};
use crate::omp::FactorPair;
use crate::partition::{bits, GroundSet, Partition, ShapeSignature};

pub fn ground27() -> GroundSet {
    GroundSet::new(27).expect("27 <= 32")
}

/// Partition of 27 points into 9 blocks of 3.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SmallRel(Partition);

/// Partition of 27 points into 3 blocks of 9.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LargeRel(Partition);

impl SmallRel {
    pub fn new(p: Partition) -> Result<Self> {
        if p.size() != 27 || p.shape() != ShapeSignature::from_pairs(&[(3, 9)]) {
            return Err(Error::ShapeMismatch {
                detail: format!("expected 9 blocks of 3, got {}", p.shape()),
            });
        }
        Ok(SmallRel(p))
    }

    pub fn partition(&self) -> &Partition {
        &self.0
    }

    pub fn into_partition(self) -> Partition {
        self.0
    }
}

impl LargeRel {
    pub fn new(p: Partition) -> Result<Self> {
        if p.size() != 27 || p.shape() != ShapeSignature::from_pairs(&[(9, 3)]) {
            return Err(Error::ShapeMismatch {
                detail: format!("expected 3 blocks of 9, got {}", p.shape()),
            });
        }
        Ok(LargeRel(p))
    }

    pub fn partition(&self) -> &Partition {
        &self.0
    }

    pub fn into_partition(self) -> Partition {
        self.0
    }
}

pub fn is_small(p: &Partition) -> bool {
    p.size() == 27 && p.shape() == ShapeSignature::from_pairs(&[(3, 9)])
}

pub fn is_large(p: &Partition) -> bool {
    p.size() == 27 && p.shape() == ShapeSignature::from_pairs(&[(9, 3)])
}

/// Atom with the given small first spot: the transversal picking the j-th
/// smallest element of every block as the j-th large block.
pub fn canonical_atom_for_small(a: &SmallRel) -> FactorPair {
    let mut larges = [0u32; 3];
    for &block in a.partition().blocks() {
        for (rank, point) in bits(block).enumerate() {
            larges[rank] |= 1 << point;
        }
    }
    FactorPair::new(
        a.partition().clone(),
        Partition::from_blocks(ground27(), &larges).expect("transversals partition"),
    )
    .expect("transversal large meets the small trivially")
}

/// A second atom with the same first spot, shifting the transversal rank
/// by the block index.
pub fn shifted_atom_for_small(a: &SmallRel) -> FactorPair {
    let mut larges = [0u32; 3];
    for (bi, &block) in a.partition().blocks().iter().enumerate() {
        for (rank, point) in bits(block).enumerate() {
            larges[(rank + bi) % 3] |= 1 << point;
        }
    }
    FactorPair::new(
        a.partition().clone(),
        Partition::from_blocks(ground27(), &larges).expect("transversals partition"),
    )
    .expect("shifted transversal")
}

/// Atom with the given large second spot: rows of the three sorted blocks.
pub fn canonical_atom_for_large(a: &LargeRel) -> FactorPair {
    let cols: Vec<Vec<u32>> = a.partition().blocks().iter().map(|&b| bits(b).collect()).collect();
    let mut rows = Vec::with_capacity(9);
    for i in 0..9 {
        rows.push(vec![cols[0][i], cols[1][i], cols[2][i]]);
    }
    FactorPair::new(
        Partition::from_point_blocks(ground27(), &rows).expect("rows partition"),
        a.partition().clone(),
    )
    .expect("row transversals meet the large trivially")
}

/// A second atom with the same second spot, shifting rows per column.
pub fn shifted_atom_for_large(a: &LargeRel) -> FactorPair {
    let cols: Vec<Vec<u32>> = a.partition().blocks().iter().map(|&b| bits(b).collect()).collect();
    let mut rows = Vec::with_capacity(9);
    for i in 0..9 {
        rows.push(vec![cols[0][i], cols[1][(i + 1) % 9], cols[2][(i + 2) % 9]]);
    }
    FactorPair::new(
        Partition::from_point_blocks(ground27(), &rows).expect("rows partition"),
        a.partition().clone(),
    )
    .expect("shifted rows")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlabKind {
    XSide,
    YSide,
}

/// The 36 atoms sharing a small first spot whose second spots contain a
/// fixed permuting partner.
#[derive(Debug, Clone)]
pub struct Slab {
    pub kind: SlabKind,
    pub atoms: Vec<FactorPair>,
    pub first_spot: SmallRel,
    pub second_meet: SmallRel,
}

/// Build the slab of atoms with first spot `a` whose second spots contain
/// `b`. Requires `a`, `b` permuting smalls with trivial meet; the result
/// always has 36 atoms whose second spots meet in exactly `b`.
pub fn build_slab(a: &SmallRel, b: &SmallRel) -> Result<Slab> {
    build_slab_kind(a, b, SlabKind::XSide)
}

/// The companion slab with the roles of the two spots exchanged.
pub fn build_y_slab(a: &SmallRel, b: &SmallRel) -> Result<Slab> {
    build_slab_kind(b, a, SlabKind::YSide)
}

fn build_slab_kind(first: &SmallRel, contained: &SmallRel, kind: SlabKind) -> Result<Slab> {
    let a = first.partition();
    let b = contained.partition();
    if !a.meet(b)?.is_identity() {
        return Err(Error::ShapeMismatch {
            detail: "the two small relations must meet trivially".into(),
        });
    }
    let Some(planes) = a.compose(b)? else {
        return Err(Error::ShapeMismatch {
            detail: "the two small relations must permute".into(),
        });
    };
    if !is_large(&planes) {
        return Err(Error::ShapeMismatch {
            detail: format!("composition has shape {}", planes.shape()),
        });
    }
    // group the 9 blocks of b by the plane containing them
    let mut groups: Vec<Vec<u32>> = vec![Vec::new(); 3];
    for &bb in b.blocks() {
        let plane = planes
            .blocks()
            .iter()
            .position(|&p| bb & p == bb)
            .expect("b refines the composition");
        groups[plane].push(bb);
    }
    debug_assert!(groups.iter().all(|g| g.len() == 3));
    // a large second spot takes one b-block per plane into each of its
    // three blocks; enumerate the 36 pairings
    let perms: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut atoms = Vec::with_capacity(36);
    for f in &perms {
        for g in &perms {
            let blocks: Vec<u32> = (0..3)
                .map(|i| groups[0][i] | groups[1][f[i]] | groups[2][g[i]])
                .collect();
            let large = Partition::from_blocks(ground27(), &blocks)?;
            atoms.push(FactorPair::new(a.clone(), large)?);
        }
    }
    atoms.sort();
    atoms.dedup();
    assert_eq!(atoms.len(), 36, "slab construction must give 36 atoms");
    let mut meet = atoms[0].second().clone();
    for atom in &atoms[1..] {
        meet = meet.meet(atom.second())?;
    }
    assert_eq!(&meet, b, "second spots must meet in the partner");
    Ok(Slab {
        kind,
        atoms,
        first_spot: first.clone(),
        second_meet: contained.clone(),
    })
}

/// Are the two atom sets fully orthogonal?
pub fn slab_orthogonality(x: &Slab, y: &Slab) -> bool {
    x.atoms.iter().all(|xa| {
        y.atoms
            .iter()
            .all(|ya| xa.orthogonal(ya).unwrap_or(false))
    })
}

/// Recover the two defining small relations from a slab's atom set: the
/// shared first spot and the meet of the second spots. The set is rebuilt
/// from the recovered pair and must reproduce the input exactly.
pub fn recover_slab(atoms: &[FactorPair]) -> Result<(SmallRel, SmallRel)> {
    if atoms.len() != 36 {
        return Err(Error::NotASlab {
            detail: format!("expected 36 atoms, got {}", atoms.len()),
        });
    }
    let first = atoms[0].first().clone();
    if atoms.iter().any(|a| a.first() != &first) {
        return Err(Error::NotASlab {
            detail: "atoms do not share a first spot".into(),
        });
    }
    let a = SmallRel::new(first).map_err(|_| Error::NotASlab {
        detail: "shared first spot is not small".into(),
    })?;
    let mut meet = atoms[0].second().clone();
    for atom in &atoms[1..] {
        meet = meet.meet(atom.second())?;
    }
    let b = SmallRel::new(meet).map_err(|_| Error::NotASlab {
        detail: "second spots do not meet in a small relation".into(),
    })?;
    let rebuilt = build_slab(&a, &b)?;
    let mut sorted: Vec<&FactorPair> = atoms.iter().collect();
    sorted.sort();
    sorted.dedup();
    if sorted.len() != 36 || !sorted.iter().zip(rebuilt.atoms.iter()).all(|(x, y)| *x == y) {
        return Err(Error::NotASlab {
            detail: "atom set does not match the rebuilt slab".into(),
        });
    }
    Ok((a, b))
}

/// Pairwise-permuting with all three mixed meets trivial.
pub fn orthogonal_triple(a: &Partition, b: &Partition, c: &Partition) -> Result<bool> {
    let Some(ab) = a.compose(b)? else {
        return Ok(false);
    };
    let Some(ac) = a.compose(c)? else {
        return Ok(false);
    };
    let Some(bc) = b.compose(c)? else {
        return Ok(false);
    };
    Ok(a.meet(&bc)?.is_identity()
        && b.meet(&ac)?.is_identity()
        && c.meet(&ab)?.is_identity())
}

/// The completion set: atoms `(c, a o b)` where `(a, b, c)` is an
/// orthogonal triple, found through the second spots of the two slabs.
pub fn build_z(a: &SmallRel, b: &SmallRel) -> Result<Vec<FactorPair>> {
    let x = build_slab(a, b)?;
    let y = build_y_slab(a, b)?;
    let composition = a
        .partition()
        .compose(b.partition())?
        .expect("slab construction verified permutability");
    let mut out = std::collections::BTreeSet::new();
    for xa in &x.atoms {
        for ya in &y.atoms {
            let c = xa.second().meet(ya.second())?;
            if !is_small(&c) {
                continue;
            }
            if !orthogonal_triple(a.partition(), b.partition(), &c)? {
                continue;
            }
            out.insert(FactorPair::new(c, composition.clone())?);
        }
    }
    Ok(out.into_iter().collect())
}

/// Nearness for atoms with the same first spot: the meet of the second
/// spots has one block of 9, two of 6, and two of 3.
pub fn near_first(x: &FactorPair, y: &FactorPair) -> Result<bool> {
    if x.first() != y.first() {
        return Err(Error::ShapeMismatch {
            detail: "atoms have different first spots".into(),
        });
    }
    if x == y {
        return Ok(false);
    }
    let meet = x.second().meet(y.second())?;
    Ok(meet.shape() == ShapeSignature::from_pairs(&[(9, 1), (6, 2), (3, 2)]))
}

/// A small relation whose slab holds both members of a near pair over the
/// same first spot: group the first spot's blocks by the switch structure
/// (the switched rows, then the remaining rows split canonically) and take
/// the per-column traces of the three row groups.
pub fn near_first_witness(x: &FactorPair, y: &FactorPair) -> Result<SmallRel> {
    if !near_first(x, y)? {
        return Err(Error::ShapeMismatch {
            detail: "atoms are not near".into(),
        });
    }
    let a = x.first();
    let meet = x.second().meet(y.second())?;
    // the two 3-blocks of the meet are the switched trios; their rows are
    // the switched row group
    let switched_rows: Vec<u32> = meet
        .blocks()
        .iter()
        .filter(|b| b.count_ones() == 3)
        .flat_map(|&b| bits(b))
        .map(|p| a.block_containing(p))
        .collect::<std::collections::BTreeSet<u32>>()
        .into_iter()
        .collect();
    debug_assert_eq!(switched_rows.len(), 3);
    let switched_mask: u32 = switched_rows.iter().copied().fold(0, |acc, b| acc | b);
    let mut other_rows: Vec<u32> = a
        .blocks()
        .iter()
        .copied()
        .filter(|b| b & switched_mask == 0)
        .collect();
    other_rows.sort_unstable_by_key(|b| b.trailing_zeros());
    let mut groups: Vec<u32> = vec![switched_mask];
    groups.push(other_rows[..3].iter().fold(0u32, |acc, &b| acc | b));
    groups.push(other_rows[3..].iter().fold(0u32, |acc, &b| acc | b));
    let mut blocks = Vec::with_capacity(9);
    for &g in &groups {
        for &col in x.second().blocks() {
            blocks.push(g & col);
        }
    }
    let d = SmallRel::new(Partition::from_blocks(ground27(), &blocks)?)?;
    debug_assert!(d.partition().refines(x.second())?);
    debug_assert!(d.partition().refines(y.second())?);
    Ok(d)
}

/// Nearness for atoms with the same second spot: the first spots differ by
/// three non-overlapping element swaps inside one block of the second
/// spot, pairing six distinct blocks.
pub fn near_second(x: &FactorPair, y: &FactorPair) -> Result<bool> {
    if x.second() != y.second() {
        return Err(Error::ShapeMismatch {
            detail: "atoms have different second spots".into(),
        });
    }
    if x == y {
        return Ok(false);
    }
    let a_blocks: std::collections::HashSet<u32> = x.first().blocks().iter().copied().collect();
    let b_blocks: std::collections::HashSet<u32> = y.first().blocks().iter().copied().collect();
    let diff_a: Vec<u32> = x
        .first()
        .blocks()
        .iter()
        .copied()
        .filter(|b| !b_blocks.contains(b))
        .collect();
    let diff_b: std::collections::HashSet<u32> = y
        .first()
        .blocks()
        .iter()
        .copied()
        .filter(|b| !a_blocks.contains(b))
        .collect();
    if diff_a.len() != 6 || diff_b.len() != 6 {
        return Ok(false);
    }
    // find the swapped pair between two differing blocks, if any
    let swap_of = |p: u32, q: u32| -> Option<(u32, u32)> {
        for u in bits(p) {
            for v in bits(q) {
                let p2 = (p & !(1 << u)) | (1 << v);
                let q2 = (q & !(1 << v)) | (1 << u);
                if diff_b.contains(&p2) && diff_b.contains(&q2) {
                    return Some((u, v));
                }
            }
        }
        None
    };
    // match the six touched blocks into three swap pairs
    fn pair_up(
        remaining: &[u32],
        swap_of: &dyn Fn(u32, u32) -> Option<(u32, u32)>,
        moved: &mut Vec<u32>,
    ) -> bool {
        if remaining.is_empty() {
            return true;
        }
        let p = remaining[0];
        for (k, &q) in remaining.iter().enumerate().skip(1) {
            if let Some((u, v)) = swap_of(p, q) {
                let rest: Vec<u32> = remaining[1..]
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != k - 1)
                    .map(|(_, &b)| b)
                    .collect();
                moved.push(u);
                moved.push(v);
                if pair_up(&rest, swap_of, moved) {
                    return true;
                }
                moved.pop();
                moved.pop();
            }
        }
        false
    }
    let mut moved = Vec::new();
    if !pair_up(&diff_a, &swap_of, &mut moved) {
        return Ok(false);
    }
    // all six swapped elements must lie in a single block of the second spot
    let mask = moved.iter().fold(0u32, |acc, &p| acc | (1 << p));
    Ok(x.second().blocks().iter().any(|&b| mask & !b == 0))
}

// column-switch template realizing one same-row element swap as five
// nearness steps; rows are templated as t0 (the swap row) then t1..t8
const FIRST_SPOT_MOVES: [[usize; 3]; 5] = [
    [6, 7, 8],
    [3, 4, 5],
    [0, 1, 6],
    [4, 5, 7],
    [1, 3, 8],
];

/// Path of atoms from `x` to `y` sharing a first spot, every consecutive
/// pair near; empty when the atoms are equal.
pub fn chain_same_first(x: &FactorPair, y: &FactorPair) -> Result<Vec<FactorPair>> {
    if x.first() != y.first() {
        return Err(Error::ShapeMismatch {
            detail: "atoms have different first spots".into(),
        });
    }
    if x == y {
        return Ok(Vec::new());
    }
    let a = x.first().clone();
    let rows: Vec<Vec<u32>> = a.blocks().iter().map(|&b| bits(b).collect()).collect();
    // column assignment of each point, and target assignment from y;
    // columns of the two spots are aligned by largest overlap so that
    // close pairs get short chains
    let col_of = |large: &Partition, point: u32| -> usize {
        large
            .blocks()
            .iter()
            .position(|&b| b & (1 << point) != 0)
            .unwrap()
    };
    let perms: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let sigma = perms
        .iter()
        .max_by_key(|perm| {
            (0..3)
                .map(|i| (x.second().blocks()[i] & y.second().blocks()[perm[i]]).count_ones())
                .sum::<u32>()
        })
        .unwrap();
    let mut sigma_inv = [0usize; 3];
    for (i, &j) in sigma.iter().enumerate() {
        sigma_inv[j] = i;
    }
    let mut assign: Vec<usize> = (0..27).map(|p| col_of(x.second(), p as u32)).collect();
    let target: Vec<usize> = (0..27)
        .map(|p| sigma_inv[col_of(y.second(), p as u32)])
        .collect();

    let rebuild = |assign: &[usize]| -> FactorPair {
        let mut blocks = [0u32; 3];
        for (p, &c) in assign.iter().enumerate() {
            blocks[c] |= 1 << p;
        }
        FactorPair::new(
            a.clone(),
            Partition::from_blocks(ground27(), &blocks).unwrap(),
        )
        .expect("columns stay transversal")
    };

    let mut chain = vec![x.clone()];
    for r0 in 0..9 {
        // put this row's points into their target columns with swaps
        loop {
            let row = &rows[r0];
            let Some(&u) = row.iter().find(|&&p| assign[p as usize] != target[p as usize])
            else {
                break;
            };
            let want = target[u as usize];
            let &v = row
                .iter()
                .find(|&&p| assign[p as usize] == want)
                .expect("columns are a bijection on each row");
            // realize the swap of u and v between their columns through the
            // five-step template
            let c = assign[u as usize];
            let d = assign[v as usize];
            let others: Vec<usize> = (0..9).filter(|&r| r != r0).collect();
            let template_row = |t: usize| -> usize {
                if t == 0 {
                    r0
                } else {
                    others[t - 1]
                }
            };
            for mv in &FIRST_SPOT_MOVES {
                for &t in mv {
                    let r = template_row(t);
                    for &p in &rows[r] {
                        let pc = assign[p as usize];
                        if pc == c {
                            assign[p as usize] = d;
                        } else if pc == d {
                            assign[p as usize] = c;
                        }
                    }
                }
                chain.push(rebuild(&assign));
            }
        }
    }
    debug_assert_eq!(chain.last(), Some(y));
    Ok(chain)
}

// row-pair switch template realizing one same-column element swap as three
// nearness steps; rows templated as w0, w1 (the swap rows) then w2..w8
const SECOND_SPOT_MOVES: [[(usize, usize); 3]; 3] = [
    [(1, 2), (5, 6), (7, 8)],
    [(1, 2), (3, 4), (5, 6)],
    [(0, 1), (3, 4), (7, 8)],
];

/// Path of atoms from `x` to `y` sharing a second spot, every consecutive
/// pair near; empty when the atoms are equal.
pub fn chain_same_second(x: &FactorPair, y: &FactorPair) -> Result<Vec<FactorPair>> {
    if x.second() != y.second() {
        return Err(Error::ShapeMismatch {
            detail: "atoms have different second spots".into(),
        });
    }
    if x == y {
        return Ok(Vec::new());
    }
    let large = x.second().clone();
    let cols: Vec<Vec<u32>> = large.blocks().iter().map(|&b| bits(b).collect()).collect();
    // rows of the two spots aligned by largest overlap (greedy), so close
    // pairs get short chains; any bijection keeps the chain valid
    let mut current_rows: Vec<u32> = x.first().blocks().to_vec();
    let y_rows: Vec<u32> = y.first().blocks().to_vec();
    let mut pairs: Vec<(u32, usize, usize)> = Vec::new();
    for (xi, &xr) in current_rows.iter().enumerate() {
        for (yi, &yr) in y_rows.iter().enumerate() {
            pairs.push(((xr & yr).count_ones(), xi, yi));
        }
    }
    pairs.sort_by(|a, b| (b.0, a.1, a.2).cmp(&(a.0, b.1, b.2)));
    let mut x_taken = [false; 9];
    let mut y_to_x = [usize::MAX; 9];
    for (_, xi, yi) in pairs {
        if !x_taken[xi] && y_to_x[yi] == usize::MAX {
            x_taken[xi] = true;
            y_to_x[yi] = xi;
        }
    }
    let target_index: Vec<usize> = (0..27u32)
        .map(|p| {
            let b = y.first().block_containing(p);
            let yi = y_rows.iter().position(|&r| r == b).unwrap();
            y_to_x[yi]
        })
        .collect();

    let rebuild = |rows: &[u32]| -> FactorPair {
        FactorPair::new(
            Partition::from_blocks(ground27(), rows).unwrap(),
            large.clone(),
        )
        .expect("rows stay transversal")
    };

    let mut chain = vec![x.clone()];
    for col in &cols {
        // inside this column, move each point to its target row
        loop {
            let mismatch = col.iter().find(|&&p| {
                let cur_row = current_rows
                    .iter()
                    .position(|&r| r & (1 << p) != 0)
                    .unwrap();
                cur_row != target_index[p as usize]
            });
            let Some(&u) = mismatch else { break };
            let r_u = current_rows.iter().position(|&r| r & (1 << u) != 0).unwrap();
            let r_v = target_index[u as usize];
            // template rows: w0 = r_u, w1 = r_v, then the others
            let mut template_rows = vec![r_u, r_v];
            template_rows.extend((0..9).filter(|r| *r != r_u && *r != r_v));
            for mv in &SECOND_SPOT_MOVES {
                for &(i, j) in mv {
                    let (ri, rj) = (template_rows[i], template_rows[j]);
                    // swap the column elements of rows ri and rj
                    let pi = col
                        .iter()
                        .copied()
                        .find(|&p| current_rows[ri] & (1 << p) != 0)
                        .unwrap();
                    let pj = col
                        .iter()
                        .copied()
                        .find(|&p| current_rows[rj] & (1 << p) != 0)
                        .unwrap();
                    current_rows[ri] = (current_rows[ri] & !(1 << pi)) | (1 << pj);
                    current_rows[rj] = (current_rows[rj] & !(1 << pj)) | (1 << pi);
                }
                chain.push(rebuild(&current_rows));
            }
        }
    }
    debug_assert_eq!(chain.last().map(|f| f.first().clone()), Some(y.first().clone()));
    Ok(chain)
}

/// Default number of randomized validity probes for a black-box oracle.
pub const DEFAULT_ORACLE_PROBES: usize = 64;

/// Black-box automorphism on atoms, with its inverse. Both directions are
/// spot-checked for orthogonality preservation before heavy use.
pub struct AtomOracle {
    forward: Box<dyn Fn(&FactorPair) -> FactorPair + Send + Sync>,
    inverse: Box<dyn Fn(&FactorPair) -> FactorPair + Send + Sync>,
}

impl AtomOracle {
    pub fn from_permutation(alpha: &PointPermutation) -> Self {
        let a = alpha.clone();
        let ainv = alpha.inverse();
        AtomOracle {
            forward: Box::new(move |x| gamma_apply(&a, x)),
            inverse: Box::new(move |x| gamma_apply(&ainv, x)),
        }
    }

    pub fn from_fns(
        forward: Box<dyn Fn(&FactorPair) -> FactorPair + Send + Sync>,
        inverse: Box<dyn Fn(&FactorPair) -> FactorPair + Send + Sync>,
    ) -> Self {
        AtomOracle { forward, inverse }
    }

    pub fn apply(&self, x: &FactorPair) -> FactorPair {
        (self.forward)(x)
    }

    pub fn apply_inverse(&self, x: &FactorPair) -> FactorPair {
        (self.inverse)(x)
    }

    /// Randomized probes: orthogonality of sampled atom pairs must be
    /// preserved and the inverse must undo the forward map.
    pub fn validate(&self, seed: u64, probes: usize) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in 0..probes {
            let (a, b) = random_orthogonal_pair(&mut rng);
            let fa = self.apply(&a);
            let fb = self.apply(&b);
            if !fa.orthogonal(&fb).unwrap_or(false) {
                return Err(Error::Oracle {
                    detail: format!("orthogonality lost at probe {i}"),
                });
            }
            if self.apply_inverse(&fa) != a {
                return Err(Error::Oracle {
                    detail: format!("inverse fails at probe {i}"),
                });
            }
        }
        Ok(())
    }
}

/// Random small relation under a seeded generator.
pub fn random_small<R: Rng>(rng: &mut R) -> SmallRel {
    let mut points: Vec<u32> = (0..27).collect();
    points.shuffle(rng);
    let blocks: Vec<Vec<u32>> = points.chunks(3).map(|c| c.to_vec()).collect();
    SmallRel::new(Partition::from_point_blocks(ground27(), &blocks).unwrap()).unwrap()
}

/// Random atom with the given small first spot.
pub fn random_atom_with_first<R: Rng>(a: &SmallRel, rng: &mut R) -> FactorPair {
    let mut larges = [0u32; 3];
    for &block in a.partition().blocks() {
        let mut ranks = [0usize, 1, 2];
        ranks.shuffle(rng);
        for (i, point) in bits(block).enumerate() {
            larges[ranks[i]] |= 1 << point;
        }
    }
    FactorPair::new(
        a.partition().clone(),
        Partition::from_blocks(ground27(), &larges).unwrap(),
    )
    .expect("random transversal")
}

/// Random atom (small, large) on 27 points.
pub fn random_atom<R: Rng>(rng: &mut R) -> FactorPair {
    let a = random_small(rng);
    random_atom_with_first(&a, rng)
}

/// Random orthogonal pair of atoms: a permuting small pair with random
/// completing second spots drawn from the two slabs.
pub fn random_orthogonal_pair<R: Rng>(rng: &mut R) -> (FactorPair, FactorPair) {
    let (a, b) = random_permuting_smalls(rng);
    let planes = a
        .partition()
        .compose(b.partition())
        .unwrap()
        .expect("permuting smalls");
    // a random second spot over `a` containing `b`: one block of `b` per
    // plane goes into each large block, shuffled
    let random_second = |first: &SmallRel, contained: &SmallRel, rng: &mut R| -> Partition {
        let mut groups: Vec<Vec<u32>> = vec![Vec::new(); 3];
        for &bb in contained.partition().blocks() {
            let plane = planes
                .blocks()
                .iter()
                .position(|&p| bb & p == bb)
                .expect("refines the composition");
            groups[plane].push(bb);
        }
        for g in groups.iter_mut() {
            g.shuffle(rng);
        }
        let blocks: Vec<u32> = (0..3)
            .map(|i| groups[0][i] | groups[1][i] | groups[2][i])
            .collect();
        let large = Partition::from_blocks(ground27(), &blocks).unwrap();
        debug_assert!(first.partition().meet(&large).unwrap().is_identity());
        large
    };
    let x = FactorPair::new(a.partition().clone(), random_second(&a, &b, rng)).unwrap();
    let y = FactorPair::new(b.partition().clone(), random_second(&b, &a, rng)).unwrap();
    debug_assert!(x.orthogonal(&y).unwrap());
    (x, y)
}

/// Random permuting pair of smalls with trivial meet: a random small, a
/// random grouping of its blocks into planes, and per-plane transversal
/// matchings.
pub fn random_permuting_smalls<R: Rng>(rng: &mut R) -> (SmallRel, SmallRel) {
    let a = random_small(rng);
    let mut block_order: Vec<usize> = (0..9).collect();
    block_order.shuffle(rng);
    let mut b_blocks = Vec::with_capacity(9);
    for plane in block_order.chunks(3) {
        let cells: Vec<Vec<u32>> = plane
            .iter()
            .map(|&i| bits(a.partition().blocks()[i]).collect())
            .collect();
        let mut f = [0usize, 1, 2];
        let mut g = [0usize, 1, 2];
        f.shuffle(rng);
        g.shuffle(rng);
        for t in 0..3 {
            b_blocks.push(vec![cells[0][t], cells[1][f[t]], cells[2][g[t]]]);
        }
    }
    let b = SmallRel::new(Partition::from_point_blocks(ground27(), &b_blocks).unwrap()).unwrap();
    debug_assert!(a.partition().permutes(b.partition()).unwrap());
    debug_assert!(a.partition().meet(b.partition()).unwrap().is_identity());
    (a, b)
}

/// Random permuting partner of a fixed small relation with trivial meet.
pub fn random_partner_of<R: Rng>(a: &SmallRel, rng: &mut R) -> SmallRel {
    let mut block_order: Vec<usize> = (0..9).collect();
    block_order.shuffle(rng);
    let mut b_blocks = Vec::with_capacity(9);
    for plane in block_order.chunks(3) {
        let cells: Vec<Vec<u32>> = plane
            .iter()
            .map(|&i| bits(a.partition().blocks()[i]).collect())
            .collect();
        let mut f = [0usize, 1, 2];
        let mut g = [0usize, 1, 2];
        f.shuffle(rng);
        g.shuffle(rng);
        for t in 0..3 {
            b_blocks.push(vec![cells[0][t], cells[1][f[t]], cells[2][g[t]]]);
        }
    }
    SmallRel::new(Partition::from_point_blocks(ground27(), &b_blocks).unwrap()).unwrap()
}

/// First spot of the image of any atom with the given first spot; the
/// image is probed on two atoms and must agree.
pub fn phi_small(oracle: &AtomOracle, a: &SmallRel) -> Result<SmallRel> {
    let img1 = oracle.apply(&canonical_atom_for_small(a));
    let img2 = oracle.apply(&shifted_atom_for_small(a));
    if img1.first() != img2.first() {
        return Err(Error::Oracle {
            detail: "images of same-first-spot atoms have different first spots".into(),
        });
    }
    SmallRel::new(img1.first().clone()).map_err(|_| Error::Oracle {
        detail: "image first spot is not small".into(),
    })
}

/// Second spot of the image of any atom with the given second spot.
pub fn phi_large(oracle: &AtomOracle, a: &LargeRel) -> Result<LargeRel> {
    let img1 = oracle.apply(&canonical_atom_for_large(a));
    let img2 = oracle.apply(&shifted_atom_for_large(a));
    if img1.second() != img2.second() {
        return Err(Error::Oracle {
            detail: "images of same-second-spot atoms have different second spots".into(),
        });
    }
    LargeRel::new(img1.second().clone()).map_err(|_| Error::Oracle {
        detail: "image second spot is not large".into(),
    })
}

/// The induced map on regular relations: small spots through the first
/// projection, large spots through the second, bounds fixed.
pub struct ReqAutomorphism<'a> {
    oracle: &'a AtomOracle,
}

pub fn phi_req(oracle: &AtomOracle) -> ReqAutomorphism<'_> {
    ReqAutomorphism { oracle }
}

impl ReqAutomorphism<'_> {
    pub fn apply(&self, x: &Partition) -> Result<Partition> {
        self.apply_with(x, false)
    }

    pub fn apply_inverse(&self, x: &Partition) -> Result<Partition> {
        self.apply_with(x, true)
    }

    fn apply_with(&self, x: &Partition, inverse: bool) -> Result<Partition> {
        if x.is_identity() || x.is_single_block() {
            return Ok(x.clone());
        }
        let map_atom = |atom: &FactorPair| -> FactorPair {
            if inverse {
                self.oracle.apply_inverse(atom)
            } else {
                self.oracle.apply(atom)
            }
        };
        if is_small(x) {
            let a = SmallRel::new(x.clone())?;
            let img1 = map_atom(&canonical_atom_for_small(&a));
            let img2 = map_atom(&shifted_atom_for_small(&a));
            if img1.first() != img2.first() {
                return Err(Error::Oracle {
                    detail: "first spot not well defined".into(),
                });
            }
            return Ok(img1.first().clone());
        }
        if is_large(x) {
            let a = LargeRel::new(x.clone())?;
            let img1 = map_atom(&canonical_atom_for_large(&a));
            let img2 = map_atom(&shifted_atom_for_large(&a));
            if img1.second() != img2.second() {
                return Err(Error::Oracle {
                    detail: "second spot not well defined".into(),
                });
            }
            return Ok(img1.second().clone());
        }
        Err(Error::Unsupported {
            detail: format!("not a regular relation shape: {}", x.shape()),
        })
    }

    /// Sampled order preservation: small below large is preserved.
    pub fn verify_order_preservation(&self, seed: u64, samples: usize) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in 0..samples {
            let a = random_small(&mut rng);
            let coarsenings = crate::omp::equal_coarsenings(a.partition(), 3);
            let big = &coarsenings[rng.gen_range(0..coarsenings.len())];
            let fa = self.apply(a.partition())?;
            let fbig = self.apply(big)?;
            if !fa.refines(&fbig)? {
                return Err(Error::Oracle {
                    detail: format!("order lost at sample {i}"),
                });
            }
        }
        Ok(())
    }
}
