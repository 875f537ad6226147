//! The orthomodular poset of factor pairs of a finite set: elements,
//! order, orthocomplement, atoms, maximal Boolean blocks, axiom checking,
//! and horizontal-sum decomposition.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::canon::{canonical_form, ColoredGraph};
use crate::counting::is_prime;
use crate::error::{Error, Result};
use crate::partition::{
    enumerate_companions, enumerate_regular, parse_partition, Companions, FactorTuple,
    GroundSet, Partition, RegularPartitions,
};
use crate::vecfact::SubspacePair;

/// Ordered pair of partitions whose natural map to the product of
/// quotients is a bijection. The element type of the poset.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FactorPair {
    first: Partition,
    second: Partition,
}

impl FactorPair {
    pub fn new(first: Partition, second: Partition) -> Result<Self> {
        if first.ground() != second.ground() {
            return Err(Error::GroundMismatch {
                left: first.size() as usize,
                right: second.size() as usize,
            });
        }
        let product = first.block_count() as u64 * second.block_count() as u64;
        if product != first.size() as u64 {
            return Err(Error::ShapeMismatch {
                detail: format!(
                    "block counts {} x {} do not multiply to {}",
                    first.block_count(),
                    second.block_count(),
                    first.size()
                ),
            });
        }
        if !first.meet(&second)?.is_identity() {
            return Err(Error::ShapeMismatch {
                detail: "meet of the two spots is not trivial".into(),
            });
        }
        Ok(FactorPair { first, second })
    }

    pub fn bottom(ground: GroundSet) -> Self {
        FactorPair {
            first: Partition::identity(ground),
            second: Partition::single_block(ground),
        }
    }

    pub fn top(ground: GroundSet) -> Self {
        FactorPair {
            first: Partition::single_block(ground),
            second: Partition::identity(ground),
        }
    }

    pub fn first(&self) -> &Partition {
        &self.first
    }

    pub fn second(&self) -> &Partition {
        &self.second
    }

    pub fn ground(&self) -> GroundSet {
        self.first.ground()
    }

    pub fn orthocomplement(&self) -> FactorPair {
        FactorPair {
            first: self.second.clone(),
            second: self.first.clone(),
        }
    }

    /// Orthogonality: first spot refines the other's second spot both ways
    /// and the first spots permute.
    pub fn orthogonal(&self, other: &FactorPair) -> Result<bool> {
        Ok(self.first.refines(&other.second)?
            && other.first.refines(&self.second)?
            && self.first.permutes(&other.first)?)
    }

    /// Order via the complement: `x <= y` iff `x` is orthogonal to `y'`.
    pub fn leq(&self, other: &FactorPair) -> Result<bool> {
        self.orthogonal(&other.orthocomplement())
    }

    /// Atoms are the pairs whose first spot has prime-size blocks.
    pub fn is_atom(&self) -> bool {
        let sizes: HashSet<u32> = self.first.blocks().iter().map(|b| b.count_ones()).collect();
        sizes.len() == 1 && is_prime(*sizes.iter().next().unwrap() as u64)
    }

    pub fn apply_permutation(&self, image: &[u32]) -> FactorPair {
        FactorPair {
            first: self.first.apply_permutation(image),
            second: self.second.apply_permutation(image),
        }
    }
}

impl fmt::Display for FactorPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ; {}", self.first, self.second)
    }
}

/// Parse the `blocks ; blocks` factor-pair text format.
pub fn parse_factor_pair(ground: GroundSet, text: &str) -> Result<FactorPair> {
    let (a, b) = text.split_once(';').ok_or(Error::Parse {
        position: 0,
        detail: "expected `first ; second`".into(),
    })?;
    FactorPair::new(parse_partition(ground, a)?, parse_partition(ground, b)?)
}

fn prime_factor_multiset(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        while n % d == 0 {
            out.push(d);
            n /= d;
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Stream of all atoms: for each prime `p` dividing the ground size, the
/// factor pairs whose first spot has blocks of size `p`. Empty for prime
/// ground sizes, where the poset has just its two bounds.
pub struct AtomIter {
    ground: GroundSet,
    flavors: Vec<u64>,
    flavor_idx: usize,
    relations: Option<RegularPartitions>,
    inner: Option<(Partition, Companions)>,
}

pub fn enumerate_atoms(ground: GroundSet) -> AtomIter {
    let n = ground.size() as u64;
    let mut flavors: Vec<u64> = prime_factor_multiset(n);
    flavors.dedup();
    flavors.retain(|&p| n / p >= 2);
    AtomIter {
        ground,
        flavors,
        flavor_idx: 0,
        relations: None,
        inner: None,
    }
}

impl Iterator for AtomIter {
    type Item = FactorPair;

    fn next(&mut self) -> Option<FactorPair> {
        loop {
            if let Some((first, companions)) = &mut self.inner {
                if let Some(second) = companions.next() {
                    return Some(FactorPair {
                        first: first.clone(),
                        second,
                    });
                }
                self.inner = None;
            }
            if let Some(relations) = &mut self.relations {
                if let Some(first) = relations.next() {
                    let companions = enumerate_companions(&first).expect("regular by stream");
                    self.inner = Some((first, companions));
                    continue;
                }
                self.relations = None;
            }
            if self.flavor_idx >= self.flavors.len() {
                return None;
            }
            let p = self.flavors[self.flavor_idx];
            self.flavor_idx += 1;
            let m = self.ground.size() as u64 / p;
            self.relations =
                Some(enumerate_regular(self.ground, m as u32, p as u32).expect("m*p = size"));
        }
    }
}

/// Stream of all blocks: unordered factor tuples whose parts have prime
/// block counts, one per maximal Boolean subalgebra. Parts with equal block
/// counts are emitted in strictly increasing canonical order.
pub struct BlockIter {
    ground: GroundSet,
    counts: Vec<u64>, // prime block counts per level, ascending
    stack: Vec<LevelIter>,
    chosen: Vec<Partition>,
    meets: Vec<Partition>, // prefix meets; meets[i] after i+1 parts
    done: bool,
}

enum LevelIter {
    Reg(RegularPartitions),
    Comp(Companions),
}

impl LevelIter {
    fn next(&mut self) -> Option<Partition> {
        match self {
            LevelIter::Reg(it) => it.next(),
            LevelIter::Comp(it) => it.next(),
        }
    }
}

pub fn enumerate_blocks(ground: GroundSet) -> Result<BlockIter> {
    let n = ground.size() as u64;
    let counts = prime_factor_multiset(n);
    if counts.len() < 2 {
        // prime ground: block stream is empty, matching the two-element poset
        return Ok(BlockIter {
            ground,
            counts,
            stack: Vec::new(),
            chosen: Vec::new(),
            meets: Vec::new(),
            done: true,
        });
    }
    Ok(BlockIter {
        ground,
        counts,
        stack: Vec::new(),
        chosen: Vec::new(),
        meets: Vec::new(),
        done: false,
    })
}

impl BlockIter {
    fn open_level(&mut self) {
        let i = self.stack.len();
        let last = i + 1 == self.counts.len();
        let iter = if last {
            let prefix = &self.meets[i - 1];
            LevelIter::Comp(enumerate_companions(prefix).expect("prefix meet is regular"))
        } else {
            let m = self.counts[i] as u32;
            let n = self.ground.size() / m;
            LevelIter::Reg(enumerate_regular(self.ground, m, n).expect("count divides size"))
        };
        self.stack.push(iter);
    }
}

impl Iterator for BlockIter {
    type Item = FactorTuple;

    fn next(&mut self) -> Option<FactorTuple> {
        if self.done {
            return None;
        }
        if self.stack.is_empty() {
            self.open_level();
        }
        let levels = self.counts.len();
        loop {
            let depth = self.stack.len();
            if depth == 0 {
                self.done = true;
                return None;
            }
            let Some(part) = self.stack[depth - 1].next() else {
                self.stack.pop();
                self.chosen.truncate(depth.saturating_sub(1));
                self.meets.truncate(depth.saturating_sub(1));
                continue;
            };
            // equal block counts must come in strictly increasing order
            if depth >= 2 && self.counts[depth - 1] == self.counts[depth - 2] {
                let prev = &self.chosen[depth - 2];
                if part <= *prev {
                    continue;
                }
            }
            if depth == levels {
                // last level came from companions of the prefix meet, so the
                // tuple meet is trivial by construction
                let mut parts = self.chosen.clone();
                parts.push(part);
                return Some(FactorTuple::new(parts).expect("valid factor tuple"));
            }
            let meet = if depth == 1 {
                part.clone()
            } else {
                self.meets[depth - 2].meet(&part).expect("same ground")
            };
            let expected_blocks: u64 = self.counts[..depth].iter().product();
            if meet.block_count() as u64 != expected_blocks || !meet.is_regular() {
                continue;
            }
            self.chosen.truncate(depth - 1);
            self.meets.truncate(depth - 1);
            self.chosen.push(part);
            self.meets.push(meet);
            self.open_level();
        }
    }
}

/// The atoms of a block: for each part, the pair (meet of the other parts,
/// that part). They are pairwise orthogonal.
pub fn atoms_of_block(t: &FactorTuple) -> Result<Vec<FactorPair>> {
    if !t.is_factor_tuple() {
        return Err(Error::ShapeMismatch {
            detail: "not a factor tuple".into(),
        });
    }
    for part in t.parts() {
        if !is_prime(part.block_count() as u64) {
            return Err(Error::ShapeMismatch {
                detail: format!("part has composite block count {}", part.block_count()),
            });
        }
    }
    let mut out = Vec::with_capacity(t.parts().len());
    for (i, part) in t.parts().iter().enumerate() {
        let mut meet: Option<Partition> = None;
        for (j, other) in t.parts().iter().enumerate() {
            if i == j {
                continue;
            }
            meet = Some(match meet {
                None => other.clone(),
                Some(m) => m.meet(other)?,
            });
        }
        out.push(FactorPair::new(meet.unwrap(), part.clone())?);
    }
    Ok(out)
}

/// Atom payloads of an enumerated structure.
#[derive(Debug, Clone)]
pub enum AtomKind {
    Set(Vec<FactorPair>),
    Vector(Vec<SubspacePair>),
}

impl AtomKind {
    pub fn len(&self) -> usize {
        match self {
            AtomKind::Set(v) => v.len(),
            AtomKind::Vector(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn label(&self, i: usize) -> String {
        match self {
            AtomKind::Set(v) => v[i].to_string(),
            AtomKind::Vector(v) => v[i].to_string(),
        }
    }
}

/// Fully enumerated poset of factor pairs (or subspace pairs): atoms,
/// blocks, and their incidence. Elements beyond atoms are bounds and the
/// atom complements.
#[derive(Debug, Clone)]
pub struct OmpStructure {
    ground: usize,
    atoms: AtomKind,
    blocks: Vec<Vec<usize>>,
    atom_blocks: Vec<Vec<usize>>,
}

impl OmpStructure {
    pub fn from_parts(ground: usize, atoms: AtomKind, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let n = atoms.len();
        let mut atom_blocks = vec![Vec::new(); n];
        for (b, block) in blocks.iter().enumerate() {
            for &a in block {
                if a >= n {
                    return Err(Error::BadBlockIndex { index: a });
                }
                atom_blocks[a].push(b);
            }
        }
        Ok(OmpStructure {
            ground,
            atoms,
            blocks,
            atom_blocks,
        })
    }

    /// Enumerate the full structure of the factor-pair poset of a set.
    /// Prime sizes give the two-element poset (no atoms, no blocks).
    pub fn build_fact_set(ground: GroundSet, atom_cap: usize) -> Result<Self> {
        let mut atoms = Vec::new();
        for atom in enumerate_atoms(ground) {
            atoms.push(atom);
            if atoms.len() > atom_cap {
                return Err(Error::SizeGuard {
                    size: atoms.len(),
                    cap: atom_cap,
                });
            }
        }
        atoms.sort();
        let index: HashMap<&FactorPair, usize> =
            atoms.iter().enumerate().map(|(i, a)| (a, i)).collect();
        let mut blocks = Vec::new();
        for tuple in enumerate_blocks(ground)? {
            let mut ids: Vec<usize> = atoms_of_block(&tuple)?
                .iter()
                .map(|a| *index.get(a).expect("block atom was enumerated"))
                .collect();
            ids.sort_unstable();
            blocks.push(ids);
        }
        blocks.sort();
        drop(index);
        OmpStructure::from_parts(ground.size() as usize, AtomKind::Set(atoms), blocks)
    }

    pub fn ground_size(&self) -> usize {
        self.ground
    }

    pub fn atoms(&self) -> &AtomKind {
        &self.atoms
    }

    pub fn set_atoms(&self) -> Result<&[FactorPair]> {
        match &self.atoms {
            AtomKind::Set(v) => Ok(v),
            AtomKind::Vector(_) => Err(Error::Unsupported {
                detail: "structure is represented over subspaces".into(),
            }),
        }
    }

    pub fn n_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn blocks_of_atom(&self, atom: usize) -> &[usize] {
        &self.atom_blocks[atom]
    }

    /// Two atoms are orthogonal exactly when they share a block; this is
    /// cross-checked against the element-level test in the test suite.
    pub fn coblocked(&self, a: usize, b: usize) -> bool {
        a != b && self.atom_blocks[a].iter().any(|x| self.blocks[*x].contains(&b))
    }

    /// Connected components of the atom/block incidence.
    pub fn components(&self) -> Vec<Component> {
        let n = self.n_atoms();
        let mut comp = vec![usize::MAX; n];
        let mut components = Vec::new();
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = components.len();
            let mut atoms = Vec::new();
            let mut block_set = HashSet::new();
            let mut stack = vec![start];
            comp[start] = id;
            while let Some(a) = stack.pop() {
                atoms.push(a);
                for &b in &self.atom_blocks[a] {
                    block_set.insert(b);
                    for &other in &self.blocks[b] {
                        if comp[other] == usize::MAX {
                            comp[other] = id;
                            stack.push(other);
                        }
                    }
                }
            }
            atoms.sort_unstable();
            let mut blocks: Vec<usize> = block_set.into_iter().collect();
            blocks.sort_unstable();
            components.push(Component { atoms, blocks });
        }
        components
    }

    /// Canonical certificate of a component's atom/block incidence graph.
    pub fn component_certificate(&self, component: &Component) -> Vec<u64> {
        let atom_pos: HashMap<usize, usize> = component
            .atoms
            .iter()
            .enumerate()
            .map(|(i, &a)| (a, i))
            .collect();
        let na = component.atoms.len();
        let n = na + component.blocks.len();
        let mut adj = vec![Vec::new(); n];
        for (bi, &b) in component.blocks.iter().enumerate() {
            for &a in &self.blocks[b] {
                let ai = atom_pos[&a];
                adj[ai].push(na + bi);
                adj[na + bi].push(ai);
            }
        }
        let colors = (0..n).map(|v| u32::from(v >= na)).collect();
        canonical_form(&ColoredGraph::new(adj, colors))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let components: Vec<Vec<usize>> = self.components().into_iter().map(|c| c.atoms).collect();
        let atoms: Vec<Vec<String>> = match &self.atoms {
            AtomKind::Set(v) => v
                .iter()
                .map(|a| vec![a.first().to_string(), a.second().to_string()])
                .collect(),
            AtomKind::Vector(v) => v
                .iter()
                .map(|p| vec![p.s().to_string(), p.t().to_string()])
                .collect(),
        };
        let mut obj = serde_json::json!({
            "ground": self.ground,
            "atoms": atoms,
            "blocks": self.blocks,
            "components": components,
        });
        if let AtomKind::Vector(v) = &self.atoms {
            if let Some(p) = v.first() {
                obj["field"] = serde_json::json!(p.s().field().order());
                obj["dim"] = serde_json::json!(p.s().ambient_dim());
            }
        }
        obj
    }

    /// Rebuild a set-represented structure from its JSON form.
    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let parse_err = |detail: &str| Error::Parse {
            position: 0,
            detail: detail.into(),
        };
        let ground = value["ground"]
            .as_u64()
            .ok_or_else(|| parse_err("missing ground"))? as usize;
        let gs = GroundSet::new(ground)?;
        let atom_texts = value["atoms"]
            .as_array()
            .ok_or_else(|| parse_err("missing atoms"))?;
        let mut atoms = Vec::with_capacity(atom_texts.len());
        for entry in atom_texts {
            let pair = entry.as_array().ok_or_else(|| parse_err("atom entry"))?;
            let first = pair[0].as_str().ok_or_else(|| parse_err("atom text"))?;
            let second = pair[1].as_str().ok_or_else(|| parse_err("atom text"))?;
            atoms.push(FactorPair::new(
                parse_partition(gs, first)?,
                parse_partition(gs, second)?,
            )?);
        }
        let blocks: Vec<Vec<usize>> =
            serde_json::from_value(value["blocks"].clone()).map_err(|e| Error::Parse {
                position: 0,
                detail: format!("blocks: {e}"),
            })?;
        OmpStructure::from_parts(ground, AtomKind::Set(atoms), blocks)
    }

    /// Build the explicit element table: bounds, atoms, and complements.
    pub fn poset_table(&self) -> PosetTable {
        match &self.atoms {
            AtomKind::Set(atoms) => {
                let ground = GroundSet::new(self.ground).expect("valid ground");
                let mut elems: Vec<FactorPair> =
                    vec![FactorPair::bottom(ground), FactorPair::top(ground)];
                let mut index: HashMap<FactorPair, usize> =
                    elems.iter().cloned().zip(0..).collect();
                let mut atom_ids = Vec::with_capacity(atoms.len());
                for a in atoms {
                    let id = *index.entry(a.clone()).or_insert_with(|| {
                        elems.push(a.clone());
                        elems.len() - 1
                    });
                    atom_ids.push(id);
                }
                for a in atoms {
                    let c = a.orthocomplement();
                    if !index.contains_key(&c) {
                        index.insert(c.clone(), elems.len());
                        elems.push(c);
                    }
                }
                let comp: Vec<usize> = elems.iter().map(|e| index[&e.orthocomplement()]).collect();
                let labels: Vec<String> = elems.iter().map(|e| e.to_string()).collect();
                PosetTable::build(elems.len(), comp, labels, atom_ids, |i, j| {
                    elems[i].leq(&elems[j]).expect("same ground")
                })
            }
            AtomKind::Vector(atoms) => {
                let field = atoms[0].s().field().clone();
                let k = atoms[0].s().ambient_dim();
                let zero = crate::vecfact::Subspace::zero(&field, k);
                let full = crate::vecfact::Subspace::full(&field, k);
                let bottom = SubspacePair::new(zero.clone(), full.clone()).expect("bounds");
                let top = SubspacePair::new(full, zero).expect("bounds");
                let mut elems: Vec<SubspacePair> = vec![bottom, top];
                let mut index: HashMap<SubspacePair, usize> =
                    elems.iter().cloned().zip(0..).collect();
                let mut atom_ids = Vec::with_capacity(atoms.len());
                for a in atoms {
                    let id = *index.entry(a.clone()).or_insert_with(|| {
                        elems.push(a.clone());
                        elems.len() - 1
                    });
                    atom_ids.push(id);
                }
                for a in atoms {
                    let c = a.orthocomplement();
                    if !index.contains_key(&c) {
                        index.insert(c.clone(), elems.len());
                        elems.push(c);
                    }
                }
                let comp: Vec<usize> = elems.iter().map(|e| index[&e.orthocomplement()]).collect();
                let labels: Vec<String> = elems.iter().map(|e| e.to_string()).collect();
                PosetTable::build(elems.len(), comp, labels, atom_ids, |i, j| {
                    elems[i].leq(&elems[j])
                })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub atoms: Vec<usize>,
    pub blocks: Vec<usize>,
}

/// Explicit bounded poset with an orthocomplement map, held as bit rows.
#[derive(Debug, Clone)]
pub struct PosetTable {
    pub n: usize,
    words: usize,
    /// `leq[x]` is the bit row of elements above `x` (including `x`).
    leq: Vec<Vec<u64>>,
    pub comp: Vec<usize>,
    pub labels: Vec<String>,
    pub atom_ids: Vec<usize>,
    pub bottom: usize,
    pub top: usize,
}

impl PosetTable {
    fn build<F>(n: usize, comp: Vec<usize>, labels: Vec<String>, atom_ids: Vec<usize>, leq_fn: F) -> Self
    where
        F: Fn(usize, usize) -> bool,
    {
        let words = n.div_ceil(64);
        let mut leq = vec![vec![0u64; words]; n];
        for i in 0..n {
            for j in 0..n {
                if leq_fn(i, j) {
                    leq[i][j / 64] |= 1 << (j % 64);
                }
            }
        }
        PosetTable {
            n,
            words,
            leq,
            comp,
            labels,
            atom_ids,
            bottom: 0,
            top: 1,
        }
    }

    pub fn leq(&self, x: usize, y: usize) -> bool {
        self.leq[x][y / 64] & (1 << (y % 64)) != 0
    }

    /// Flip one order bit; used to build corrupted structures in tests.
    pub fn flip_leq(&mut self, x: usize, y: usize) {
        self.leq[x][y / 64] ^= 1 << (y % 64);
    }

    fn up_row(&self, x: usize) -> &[u64] {
        &self.leq[x]
    }

    fn down_row(&self, x: usize, cache: &mut Option<Vec<Vec<u64>>>) -> Vec<u64> {
        if cache.is_none() {
            let mut down = vec![vec![0u64; self.words]; self.n];
            for i in 0..self.n {
                for j in 0..self.n {
                    if self.leq(j, i) {
                        down[i][j / 64] |= 1 << (j % 64);
                    }
                }
            }
            *cache = Some(down);
        }
        cache.as_ref().unwrap()[x].clone()
    }

    fn members(&self, row: &[u64]) -> Vec<usize> {
        let mut out = Vec::new();
        for (w, &word) in row.iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                out.push(w * 64 + bits.trailing_zeros() as usize);
                bits &= bits - 1;
            }
        }
        out
    }

    /// Greatest lower bound, if it exists.
    pub fn meet(&self, x: usize, y: usize, down: &mut Option<Vec<Vec<u64>>>) -> Option<usize> {
        let dx = self.down_row(x, down);
        let dy = self.down_row(y, down);
        let common: Vec<u64> = dx.iter().zip(dy.iter()).map(|(a, b)| a & b).collect();
        self.members(&common).into_iter().find(|&z| {
            let dz = self.down_row(z, down);
            common.iter().zip(dz.iter()).all(|(c, d)| c & !d == 0)
        })
    }

    /// Least upper bound, if it exists.
    pub fn join(&self, x: usize, y: usize) -> Option<usize> {
        let common: Vec<u64> = self.up_row(x)
            .iter()
            .zip(self.up_row(y).iter())
            .map(|(a, b)| a & b)
            .collect();
        self.members(&common)
            .into_iter()
            .find(|&z| common.iter().zip(self.up_row(z).iter()).all(|(c, u)| c & !u == 0))
    }
}

/// Outcome of the axiom suite, with the first witness of each failure.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AxiomReport {
    pub involution_ok: bool,
    pub order_inverting_ok: bool,
    pub complement_ok: bool,
    pub ortho_join_ok: bool,
    pub orthomodular_ok: bool,
    /// Status of the alternative reading `x <= y implies x v (x v y)' = y'`;
    /// reported, never asserted.
    pub alt_condition_holds: bool,
    pub alt_condition_witness: Option<String>,
    pub violations: Vec<String>,
}

impl AxiomReport {
    pub fn all_ok(&self) -> bool {
        self.involution_ok
            && self.order_inverting_ok
            && self.complement_ok
            && self.ortho_join_ok
            && self.orthomodular_ok
    }
}

/// Check the orthomodular-poset axioms on an explicit table: the
/// complement is an order-inverting involution, complements meet at the
/// bottom and join at the top, orthogonal joins exist, and the
/// orthomodular law `x <= y implies y = x v (y ^ x')` holds.
pub fn verify_omp_axioms(t: &PosetTable) -> Result<AxiomReport> {
    for x in 0..t.n {
        if t.comp[x] >= t.n {
            return Err(Error::Unsupported {
                detail: "structure is not closed under complement".into(),
            });
        }
    }
    let mut down = None;
    let mut report = AxiomReport {
        involution_ok: true,
        order_inverting_ok: true,
        complement_ok: true,
        ortho_join_ok: true,
        orthomodular_ok: true,
        alt_condition_holds: true,
        alt_condition_witness: None,
        violations: Vec::new(),
    };
    for x in 0..t.n {
        if t.comp[t.comp[x]] != x {
            report.involution_ok = false;
            report
                .violations
                .push(format!("complement not an involution at {}", t.labels[x]));
        }
    }
    'outer: for x in 0..t.n {
        for y in 0..t.n {
            if t.leq(x, y) != t.leq(t.comp[y], t.comp[x]) {
                report.order_inverting_ok = false;
                report.violations.push(format!(
                    "complement not order inverting at ({}, {})",
                    t.labels[x], t.labels[y]
                ));
                break 'outer;
            }
        }
    }
    for x in 0..t.n {
        let c = t.comp[x];
        if t.meet(x, c, &mut down) != Some(t.bottom) || t.join(x, c) != Some(t.top) {
            report.complement_ok = false;
            report
                .violations
                .push(format!("complement laws fail at {}", t.labels[x]));
        }
    }
    for x in 0..t.n {
        for y in 0..t.n {
            if !t.leq(x, t.comp[y]) {
                continue; // only orthogonal pairs
            }
            if t.join(x, y).is_none() {
                report.ortho_join_ok = false;
                report.violations.push(format!(
                    "orthogonal join missing for ({}, {})",
                    t.labels[x], t.labels[y]
                ));
            }
        }
    }
    for x in 0..t.n {
        for y in 0..t.n {
            if !t.leq(x, y) {
                continue;
            }
            let ok = t
                .meet(y, t.comp[x], &mut down)
                .and_then(|m| t.join(x, m))
                .map(|j| j == y)
                .unwrap_or(false);
            if !ok {
                report.orthomodular_ok = false;
                report.violations.push(format!(
                    "orthomodular law fails at ({}, {})",
                    t.labels[x], t.labels[y]
                ));
            }
            if report.alt_condition_holds {
                // alternative reading: x v (x v y)' should equal y'
                let holds = t
                    .join(x, y)
                    .and_then(|j| t.join(x, t.comp[j]))
                    .map(|j2| j2 == t.comp[y])
                    .unwrap_or(false);
                if !holds {
                    report.alt_condition_holds = false;
                    report.alt_condition_witness =
                        Some(format!("({}, {})", t.labels[x], t.labels[y]));
                }
            }
        }
    }
    Ok(report)
}

/// If every block has exactly two atoms that are complements of each other
/// and each atom lies in exactly one block, the structure is MO_n; returns
/// n (the number of blocks).
pub fn mo_index(s: &OmpStructure) -> Option<u64> {
    if s.n_atoms() == 0 || s.blocks().iter().any(|b| b.len() != 2) {
        return None;
    }
    if (0..s.n_atoms()).any(|a| s.blocks_of_atom(a).len() != 1) {
        return None;
    }
    match s.atoms() {
        AtomKind::Set(atoms) => {
            for block in s.blocks() {
                if atoms[block[0]].orthocomplement() != atoms[block[1]] {
                    return None;
                }
            }
        }
        AtomKind::Vector(atoms) => {
            for block in s.blocks() {
                if atoms[block[0]].orthocomplement() != atoms[block[1]] {
                    return None;
                }
            }
        }
    }
    Some(s.n_blocks() as u64)
}

/// Decompose into horizontal summands and certify that all components are
/// pairwise isomorphic; returns the components and the shared certificate.
pub fn horizontal_sum_decomposition(s: &OmpStructure) -> (Vec<Component>, bool) {
    let components = s.components();
    if components.len() <= 1 {
        return (components, true);
    }
    let first = s.component_certificate(&components[0]);
    let all_isomorphic = components[1..]
        .iter()
        .all(|c| s.component_certificate(c) == first);
    (components, all_isomorphic)
}

/// Count the orthocomplementations compatible with the order structure:
/// order-inverting involutions where every element meets its image at the
/// bottom and joins it at the top. Backtracking over candidate images.
pub fn enumerate_orthocomplementations(t: &PosetTable) -> Result<u64> {
    if t.n > 64 {
        return Err(Error::SizeGuard { size: t.n, cap: 64 });
    }
    let n = t.n;
    let mut down_cache = None;
    // degree profiles must swap under an order-inverting bijection
    let below: Vec<usize> = (0..n)
        .map(|x| (0..n).filter(|&y| t.leq(y, x)).count())
        .collect();
    let above: Vec<usize> = (0..n)
        .map(|x| (0..n).filter(|&y| t.leq(x, y)).count())
        .collect();
    let mut candidates: Vec<Vec<usize>> = (0..n)
        .map(|x| {
            (0..n)
                .filter(|&y| below[x] == above[y] && above[x] == below[y])
                .filter(|&y| {
                    t.meet(x, y, &mut down_cache) == Some(t.bottom)
                        && t.join(x, y) == Some(t.top)
                })
                .collect()
        })
        .collect();
    // fix the bounds
    candidates[t.bottom] = vec![t.top];
    candidates[t.top] = vec![t.bottom];

    fn consistent(t: &PosetTable, assigned: &[Option<usize>], x: usize, y: usize) -> bool {
        // with pi(x) = y, check order inversion against all assigned pairs
        for (a, img) in assigned.iter().enumerate() {
            let Some(b) = img else { continue };
            if t.leq(x, a) != t.leq(*b, y) || t.leq(a, x) != t.leq(y, *b) {
                return false;
            }
        }
        true
    }

    fn search(
        t: &PosetTable,
        candidates: &[Vec<usize>],
        assigned: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        next: usize,
    ) -> u64 {
        let Some(x) = (next..assigned.len()).find(|&x| assigned[x].is_none()) else {
            return 1;
        };
        let mut count = 0;
        for &y in &candidates[x] {
            if used[y] || assigned[y].is_some() && assigned[y] != Some(x) {
                continue;
            }
            if x == y {
                continue; // fixed points never satisfy the complement laws
            }
            if !consistent(t, assigned, x, y) || !consistent(t, assigned, y, x) {
                continue;
            }
            assigned[x] = Some(y);
            assigned[y] = Some(x);
            used[x] = true;
            used[y] = true;
            count += search(t, candidates, assigned, used, x + 1);
            assigned[x] = None;
            assigned[y] = None;
            used[x] = false;
            used[y] = false;
        }
        count
    }

    let mut assigned = vec![None; n];
    let mut used = vec![false; n];
    Ok(search(t, &candidates, &mut assigned, &mut used, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::{
        cf_atoms_prime_power, cf_blocks_per_atom, cf_blocks_prime_power, cf_factor_pairs,
    };
    use num_traits::ToPrimitive;

    fn g(n: usize) -> GroundSet {
        GroundSet::new(n).unwrap()
    }

    #[test]
    fn orthocomplement_is_involution() {
        let ground = g(8);
        for (i, atom) in enumerate_atoms(ground).enumerate() {
            assert_eq!(atom.orthocomplement().orthocomplement(), atom);
            if i > 100 {
                break;
            }
        }
        let bottom = FactorPair::bottom(ground);
        assert_eq!(bottom.orthocomplement(), FactorPair::top(ground));
    }

    #[test]
    fn bounds_are_universal() {
        let ground = g(8);
        let bottom = FactorPair::bottom(ground);
        let top = FactorPair::top(ground);
        for atom in enumerate_atoms(ground).take(50) {
            assert!(bottom.leq(&atom).unwrap());
            assert!(atom.leq(&top).unwrap());
            assert!(bottom.orthogonal(&atom).unwrap());
        }
    }

    #[test]
    fn atom_counts_small_sizes() {
        assert_eq!(enumerate_atoms(g(4)).count(), 6);
        assert_eq!(enumerate_atoms(g(8)).count(), 840);
        assert_eq!(enumerate_atoms(g(9)).count(), 10_080);
        assert_eq!(enumerate_atoms(g(6)).count(), 120);
        assert_eq!(enumerate_atoms(g(5)).count(), 0);
        assert_eq!(enumerate_atoms(g(7)).count(), 0);
        assert_eq!(
            enumerate_atoms(g(9)).count() as u64,
            cf_factor_pairs(3, 3).to_u64().unwrap()
        );
    }

    #[test]
    fn block_counts_small_sizes() {
        assert_eq!(enumerate_blocks(g(4)).unwrap().count(), 3);
        assert_eq!(enumerate_blocks(g(6)).unwrap().count(), 60);
        assert_eq!(enumerate_blocks(g(8)).unwrap().count(), 840);
        assert_eq!(enumerate_blocks(g(9)).unwrap().count(), 5040);
        assert_eq!(
            enumerate_blocks(g(8)).unwrap().count() as u64,
            cf_blocks_prime_power(2, 3).unwrap().to_u64().unwrap()
        );
    }

    #[test]
    fn blocks_size_12_match_multinomial_oracle() {
        // the multinomial argument: orderings of 12 points modulo axis
        // relabelings and the swap of the two equal-count axes
        let expected = crate::counting::factorial(12)
            / (crate::counting::factorial(2).pow(2)
                * crate::counting::factorial(3)
                * crate::counting::factorial(2));
        let mut count = 0u64;
        for tuple in enumerate_blocks(g(12)).unwrap() {
            let mut counts: Vec<usize> =
                tuple.parts().iter().map(|p| p.block_count()).collect();
            counts.sort_unstable();
            assert_eq!(counts, vec![2, 2, 3]);
            count += 1;
        }
        assert_eq!(count, expected.to_u64().unwrap()); // 9 979 200
    }

    #[test]
    fn block_atoms_pairwise_orthogonal_exhaustive_8() {
        let mut total = 0;
        for tuple in enumerate_blocks(g(8)).unwrap() {
            let atoms = atoms_of_block(&tuple).unwrap();
            assert_eq!(atoms.len(), 3);
            for i in 0..atoms.len() {
                for j in i + 1..atoms.len() {
                    assert!(atoms[i].orthogonal(&atoms[j]).unwrap());
                }
            }
            total += 1;
        }
        assert_eq!(total, 840);
    }

    #[test]
    fn structure_counts_8() {
        let s = OmpStructure::build_fact_set(g(8), 100_000).unwrap();
        assert_eq!(s.n_atoms(), 840);
        assert_eq!(s.n_blocks(), 840);
        let expected = cf_blocks_per_atom(2, 3).unwrap().to_usize().unwrap();
        for a in 0..s.n_atoms() {
            assert_eq!(s.blocks_of_atom(a).len(), expected);
        }
        assert_eq!(
            s.n_atoms() as u64,
            cf_atoms_prime_power(2, 3).unwrap().to_u64().unwrap()
        );
    }

    #[test]
    fn orthogonality_equals_coblocking_exhaustive_8() {
        let s = OmpStructure::build_fact_set(g(8), 100_000).unwrap();
        let atoms = s.set_atoms().unwrap();
        for i in 0..atoms.len() {
            for j in 0..atoms.len() {
                let orth = atoms[i].orthogonal(&atoms[j]).unwrap();
                if i == j {
                    assert!(!orth, "distinct first spots cannot coincide");
                    continue;
                }
                assert_eq!(orth, s.coblocked(i, j), "pair ({i},{j})");
                // symmetry of the three-clause test
                assert_eq!(orth, atoms[j].orthogonal(&atoms[i]).unwrap());
            }
        }
    }

    #[test]
    fn same_first_spot_atoms_not_orthogonal() {
        let s = OmpStructure::build_fact_set(g(8), 100_000).unwrap();
        let atoms = s.set_atoms().unwrap();
        for i in 0..atoms.len() {
            for j in i + 1..atoms.len() {
                if atoms[i].first() == atoms[j].first() {
                    assert!(!atoms[i].orthogonal(&atoms[j]).unwrap());
                }
            }
        }
    }

    #[test]
    fn leq_is_partial_order_on_8() {
        let s = OmpStructure::build_fact_set(g(8), 100_000).unwrap();
        let t = s.poset_table();
        assert_eq!(t.n, 1682);
        for x in 0..t.n {
            assert!(t.leq(x, x));
        }
        for x in 0..t.n {
            for y in 0..t.n {
                if x != y && t.leq(x, y) {
                    assert!(!t.leq(y, x), "antisymmetry at ({x},{y})");
                }
            }
        }
        // transitivity via bit rows: up(y) within up(x) whenever x <= y
        for x in 0..t.n {
            for y in 0..t.n {
                if t.leq(x, y) {
                    for z in 0..t.n {
                        if t.leq(y, z) {
                            assert!(t.leq(x, z));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn axiom_suite_passes_small() {
        for size in [4usize, 6, 8] {
            let s = OmpStructure::build_fact_set(g(size), 100_000).unwrap();
            let report = verify_omp_axioms(&s.poset_table()).unwrap();
            assert!(report.all_ok(), "axioms at size {size}: {:?}", report.violations);
            // the alternative reading of the third axiom does not hold
            assert!(!report.alt_condition_holds, "size {size}");
        }
    }

    #[test]
    fn axiom_suite_fails_on_corrupted_table() {
        let s = OmpStructure::build_fact_set(g(4), 1000).unwrap();
        let mut t = s.poset_table();
        // drop one atom's bit below the top
        let a = t.atom_ids[0];
        t.flip_leq(a, t.top);
        let report = verify_omp_axioms(&t).unwrap();
        assert!(!report.all_ok());
        assert!(!report.violations.is_empty());

        // and separately, insert a fake order bit between two atoms of an
        // eight-point structure
        let s8 = OmpStructure::build_fact_set(g(8), 100_000).unwrap();
        let mut t8 = s8.poset_table();
        t8.flip_leq(t8.atom_ids[0], t8.atom_ids[1]);
        let report = verify_omp_axioms(&t8).unwrap();
        assert!(!report.all_ok());
    }

    #[test]
    fn blocks_per_atom_at_square_sizes() {
        // the k = 2 cases validated by direct incidence counting
        for (size, cap) in [(4usize, 1000usize), (9, 100_000)] {
            let s = OmpStructure::build_fact_set(g(size), cap).unwrap();
            for a in 0..s.n_atoms() {
                assert_eq!(s.blocks_of_atom(a).len(), 1, "size {size}, atom {a}");
            }
        }
    }

    #[test]
    fn prime_ground_gives_two_element_poset() {
        for size in [2usize, 3, 5, 7] {
            let s = OmpStructure::build_fact_set(g(size), 10).unwrap();
            assert_eq!((s.n_atoms(), s.n_blocks()), (0, 0));
            let report = verify_omp_axioms(&s.poset_table()).unwrap();
            assert!(report.all_ok(), "size {size}");
        }
    }

    #[test]
    fn mo_recognition() {
        let s4 = OmpStructure::build_fact_set(g(4), 1000).unwrap();
        assert_eq!(mo_index(&s4), Some(3));
        let s6 = OmpStructure::build_fact_set(g(6), 10_000).unwrap();
        assert_eq!(mo_index(&s6), Some(60));
        let s9 = OmpStructure::build_fact_set(g(9), 100_000).unwrap();
        assert_eq!(mo_index(&s9), Some(5040));
        assert_eq!(s9.n_atoms(), 10_080);
        let s8 = OmpStructure::build_fact_set(g(8), 100_000).unwrap();
        assert_eq!(mo_index(&s8), None);
    }

    #[test]
    fn horizontal_sum_of_8() {
        let s = OmpStructure::build_fact_set(g(8), 100_000).unwrap();
        let (components, isomorphic) = horizontal_sum_decomposition(&s);
        assert_eq!(components.len(), 30);
        assert!(isomorphic);
        for c in &components {
            assert_eq!(c.atoms.len(), 28);
            assert_eq!(c.blocks.len(), 28);
        }
    }

    #[test]
    fn horizontal_sum_of_4_and_27_style() {
        let s = OmpStructure::build_fact_set(g(4), 1000).unwrap();
        let (components, isomorphic) = horizontal_sum_decomposition(&s);
        assert_eq!(components.len(), 3);
        assert!(isomorphic);
        for c in &components {
            assert_eq!(c.atoms.len(), 2);
        }
        // the vector structure over GF(3) is connected
        let v = crate::vecfact::fact_v_structure(3, 3).unwrap();
        assert_eq!(v.components().len(), 1);
    }

    #[test]
    fn components_match_linear_subalgebra() {
        let s = OmpStructure::build_fact_set(g(8), 100_000).unwrap();
        let sub = crate::vecfact::zp_subalgebra(2, 3, crate::vecfact::standard_labeling(2, 3))
            .unwrap();
        let (components, _) = horizontal_sum_decomposition(&s);
        let sub_cert = sub.component_certificate(&sub.components()[0]);
        assert_eq!(s.component_certificate(&components[0]), sub_cert);
        // the subalgebra's atom set is exactly one component
        let atoms = s.set_atoms().unwrap();
        let sub_atoms: HashSet<&FactorPair> = sub.set_atoms().unwrap().iter().collect();
        let matching_component = components.iter().find(|c| {
            c.atoms.len() == sub_atoms.len() && c.atoms.iter().all(|&a| sub_atoms.contains(&atoms[a]))
        });
        assert!(matching_component.is_some());
    }

    #[test]
    fn orthocomplementation_counts() {
        let v = crate::vecfact::fact_v_structure(2, 3).unwrap();
        let t = v.poset_table();
        assert_eq!(t.n, 58);
        assert_eq!(enumerate_orthocomplementations(&t).unwrap(), 1);

        let s4 = OmpStructure::build_fact_set(g(4), 1000).unwrap();
        let t4 = s4.poset_table();
        // fixed-point-free involutions pairing the six middle elements
        assert_eq!(enumerate_orthocomplementations(&t4).unwrap(), 15);

        // corrupting the order leaves no valid pairing
        let mut broken = t4.clone();
        for y in 0..broken.n {
            if y != broken.top {
                broken.flip_leq(broken.atom_ids[0], y);
            }
        }
        assert_eq!(enumerate_orthocomplementations(&broken).unwrap(), 0);
    }

    #[test]
    fn blocks_through_atom_27_brute_force() {
        // the closed form gives 5040; this is the independent local count
        let blocks: Vec<Vec<u32>> = (0..9).map(|i| vec![3 * i, 3 * i + 1, 3 * i + 2]).collect();
        let a = Partition::from_point_blocks(g(27), &blocks).unwrap();
        let count = blocks_through_atom_27(&a);
        assert_eq!(count, 5040);
        assert_eq!(
            count,
            cf_blocks_per_atom(3, 3).unwrap().to_u64().unwrap()
        );
    }

    #[test]
    fn json_roundtrip_840() {
        let s = OmpStructure::build_fact_set(g(8), 100_000).unwrap();
        let json = s.to_json();
        let back = OmpStructure::from_json(&json).unwrap();
        assert_eq!(back.n_atoms(), 840);
        assert_eq!(back.to_json(), json);
    }
}

/// Brute-force count of the blocks through an atom with the given small
/// first spot on 27 points: pairs of 3-way equal coarsenings of the first
/// spot whose meet is exactly that spot.
pub fn blocks_through_atom_27(small: &Partition) -> u64 {
    let larges = equal_coarsenings(small, 3);
    let mut count = 0;
    for i in 0..larges.len() {
        for j in i + 1..larges.len() {
            if larges[i].meet(&larges[j]).expect("same ground") == *small {
                count += 1;
            }
        }
    }
    count
}

/// All partitions with `r` equal-size blocks coarsening `p`, materialized.
pub fn equal_coarsenings(p: &Partition, r: u32) -> Vec<Partition> {
    let size = p.size();
    if r == 0 || size % r != 0 {
        return Vec::new();
    }
    let target = size / r;
    let blocks = p.blocks().to_vec();
    let mut out = Vec::new();
    let mut groups: Vec<u32> = Vec::new();
    fn go(
        blocks: &[u32],
        remaining_mask: u32,
        target: u32,
        groups: &mut Vec<u32>,
        out: &mut Vec<Partition>,
        ground: GroundSet,
    ) {
        if remaining_mask == 0 {
            out.push(Partition::from_blocks(ground, groups).expect("groups partition"));
            return;
        }
        let anchor = remaining_mask.trailing_zeros() as usize;
        let rest = remaining_mask & !(1 << anchor);
        fn pick(
            blocks: &[u32],
            rest: u32,
            from: usize,
            need: u32,
            chosen: u32,
            remaining_mask: u32,
            target: u32,
            groups: &mut Vec<u32>,
            out: &mut Vec<Partition>,
            ground: GroundSet,
        ) {
            if need == 0 {
                let mut mask = 0u32;
                for i in 0..blocks.len() {
                    if chosen & (1 << i) != 0 {
                        mask |= blocks[i];
                    }
                }
                groups.push(mask);
                go(blocks, remaining_mask & !chosen, target, groups, out, ground);
                groups.pop();
                return;
            }
            for i in from..blocks.len() {
                if rest & (1 << i) == 0 || blocks[i].count_ones() > need {
                    continue;
                }
                pick(
                    blocks,
                    rest,
                    i + 1,
                    need - blocks[i].count_ones(),
                    chosen | (1 << i),
                    remaining_mask,
                    target,
                    groups,
                    out,
                    ground,
                );
            }
        }
        let anchor_size = blocks[anchor].count_ones();
        if anchor_size <= target {
            pick(
                blocks,
                rest,
                anchor + 1,
                target - anchor_size,
                1 << anchor,
                remaining_mask,
                target,
                groups,
                out,
                ground,
            );
        }
    }
    let all = if blocks.len() == 32 {
        u32::MAX
    } else {
        (1u32 << blocks.len()) - 1
    };
    go(&blocks, all, target, &mut groups, &mut out, p.ground());
    out
}
