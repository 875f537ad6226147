//! Bitset-based partitions of a ground set of at most 32 points.
//!
//! A block is one machine word (`u32`); the canonical form lists each
//! block's points ascending and orders blocks by least element. All values
//! are immutable after construction.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::matching::max_bipartite_matching;

/// Finite ground set; points are the indices `0..size`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GroundSet {
    size: u32,
}

impl GroundSet {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 || size > 32 {
            return Err(Error::BadGroundSize { size });
        }
        Ok(GroundSet { size: size as u32 })
    }

    pub fn size(&self) -> u32 {
        self.size
    }

    /// Bitmask with one bit per point.
    pub fn full_mask(&self) -> u32 {
        if self.size == 32 {
            u32::MAX
        } else {
            (1u32 << self.size) - 1
        }
    }

    pub fn points(&self) -> impl Iterator<Item = u32> {
        0..self.size
    }
}

/// Iterate the set bits of a block mask.
pub fn bits(mask: u32) -> impl Iterator<Item = u32> {
    std::iter::successors(Some(mask), |m| {
        let rest = m & (m - 1);
        (rest != 0).then_some(rest)
    })
    .map(|m| m.trailing_zeros())
    .take(mask.count_ones() as usize)
}

/// Set partition in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    ground: GroundSet,
    blocks: Vec<u32>,
}

impl Partition {
    /// Build a partition from block masks, validating disjointness and cover.
    pub fn from_blocks(ground: GroundSet, blocks: &[u32]) -> Result<Self> {
        let mut seen = 0u32;
        for &b in blocks {
            if b == 0 {
                return Err(Error::EmptyBlock);
            }
            if b & !ground.full_mask() != 0 {
                let point = (b & !ground.full_mask()).trailing_zeros();
                return Err(Error::Gap { point });
            }
            let clash = seen & b;
            if clash != 0 {
                return Err(Error::Overlap {
                    point: clash.trailing_zeros(),
                });
            }
            seen |= b;
        }
        if seen != ground.full_mask() {
            let point = (!seen & ground.full_mask()).trailing_zeros();
            return Err(Error::Gap { point });
        }
        let mut blocks = blocks.to_vec();
        blocks.sort_unstable_by_key(|b| b.trailing_zeros());
        Ok(Partition { ground, blocks })
    }

    /// Convenience constructor from explicit point lists.
    pub fn from_point_blocks(ground: GroundSet, blocks: &[Vec<u32>]) -> Result<Self> {
        let mut masks = Vec::with_capacity(blocks.len());
        for block in blocks {
            let mut mask = 0u32;
            for &p in block {
                if p >= ground.size() {
                    return Err(Error::Gap { point: p });
                }
                if mask & (1 << p) != 0 {
                    return Err(Error::Overlap { point: p });
                }
                mask |= 1 << p;
            }
            masks.push(mask);
        }
        Self::from_blocks(ground, &masks)
    }

    /// The identity partition (all singletons), the lattice bottom.
    pub fn identity(ground: GroundSet) -> Self {
        let blocks = ground.points().map(|p| 1u32 << p).collect();
        Partition { ground, blocks }
    }

    /// The single-block partition, the lattice top.
    pub fn single_block(ground: GroundSet) -> Self {
        Partition {
            ground,
            blocks: vec![ground.full_mask()],
        }
    }

    pub fn ground(&self) -> GroundSet {
        self.ground
    }

    pub fn size(&self) -> u32 {
        self.ground.size()
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[u32] {
        &self.blocks
    }

    pub fn is_identity(&self) -> bool {
        self.blocks.len() as u32 == self.ground.size()
    }

    pub fn is_single_block(&self) -> bool {
        self.blocks.len() == 1
    }

    /// Mask of the block containing `point`.
    pub fn block_containing(&self, point: u32) -> u32 {
        let bit = 1u32 << point;
        *self
            .blocks
            .iter()
            .find(|&&b| b & bit != 0)
            .expect("point is covered")
    }

    /// Per-point relation rows: `rows[i]` is the block of point `i`.
    pub fn relation_rows(&self) -> Vec<u32> {
        let mut rows = vec![0u32; self.size() as usize];
        for &b in &self.blocks {
            for p in bits(b) {
                rows[p as usize] = b;
            }
        }
        rows
    }

    fn require_same_ground(&self, other: &Partition) -> Result<()> {
        if self.ground != other.ground {
            return Err(Error::GroundMismatch {
                left: self.size() as usize,
                right: other.size() as usize,
            });
        }
        Ok(())
    }

    /// Common refinement: all nonempty pairwise block intersections.
    pub fn meet(&self, other: &Partition) -> Result<Partition> {
        self.require_same_ground(other)?;
        let mut blocks = Vec::new();
        for &a in &self.blocks {
            for &b in &other.blocks {
                let c = a & b;
                if c != 0 {
                    blocks.push(c);
                }
            }
        }
        blocks.sort_unstable_by_key(|b| b.trailing_zeros());
        Ok(Partition {
            ground: self.ground,
            blocks,
        })
    }

    /// Transitive closure of the union: the partition-lattice join.
    pub fn join(&self, other: &Partition) -> Result<Partition> {
        self.require_same_ground(other)?;
        let n = self.size() as usize;
        let mut parent: Vec<u32> = (0..n as u32).collect();
        fn find(parent: &mut [u32], x: u32) -> u32 {
            let mut r = x;
            while parent[r as usize] != r {
                r = parent[r as usize];
            }
            let mut c = x;
            while parent[c as usize] != r {
                let next = parent[c as usize];
                parent[c as usize] = r;
                c = next;
            }
            r
        }
        for &b in self.blocks.iter().chain(other.blocks.iter()) {
            let anchor = b.trailing_zeros();
            for p in bits(b) {
                let ra = find(&mut parent, anchor);
                let rp = find(&mut parent, p);
                if ra != rp {
                    parent[rp as usize] = ra;
                }
            }
        }
        let mut masks = vec![0u32; n];
        for p in 0..n as u32 {
            let r = find(&mut parent, p);
            masks[r as usize] |= 1 << p;
        }
        let mut blocks: Vec<u32> = masks.into_iter().filter(|&m| m != 0).collect();
        blocks.sort_unstable_by_key(|b| b.trailing_zeros());
        Ok(Partition {
            ground: self.ground,
            blocks,
        })
    }

    /// Does every block of `self` lie inside a block of `other`?
    pub fn refines(&self, other: &Partition) -> Result<bool> {
        self.require_same_ground(other)?;
        let rows = other.relation_rows();
        Ok(self
            .blocks
            .iter()
            .all(|&b| b & !rows[b.trailing_zeros() as usize] == 0))
    }

    fn compose_rows(&self, other: &Partition) -> Vec<u32> {
        // (x, z) related iff some y has x ~self~ y and y ~other~ z.
        let rows_q = other.relation_rows();
        let n = self.size() as usize;
        let mut out = vec![0u32; n];
        for (i, row) in self.relation_rows().iter().enumerate() {
            let mut acc = 0u32;
            for j in bits(*row) {
                acc |= rows_q[j as usize];
            }
            out[i] = acc;
        }
        out
    }

    /// Relational permutability: `self∘other == other∘self`.
    pub fn permutes(&self, other: &Partition) -> Result<bool> {
        self.require_same_ground(other)?;
        Ok(self.compose_rows(other) == other.compose_rows(self))
    }

    /// Relational composition, as a partition when it is an equivalence.
    ///
    /// Returns `Ok(None)` when the composition fails to be transitive; in the
    /// successful case the result equals `join`.
    pub fn compose(&self, other: &Partition) -> Result<Option<Partition>> {
        self.require_same_ground(other)?;
        let rows = self.compose_rows(other);
        let n = self.size() as usize;
        for i in 0..n {
            for j in bits(rows[i]) {
                if rows[j as usize] & (1 << i) == 0 {
                    return Ok(None); // not symmetric
                }
            }
            let mut closure = 0u32;
            for j in bits(rows[i]) {
                closure |= rows[j as usize];
            }
            if closure != rows[i] {
                return Ok(None); // not transitive
            }
        }
        let mut blocks = Vec::new();
        for (i, &row) in rows.iter().enumerate() {
            if row.trailing_zeros() as usize == i {
                blocks.push(row);
            }
        }
        Ok(Some(Partition {
            ground: self.ground,
            blocks,
        }))
    }

    /// All blocks the same size?
    pub fn is_regular(&self) -> bool {
        let first = self.blocks[0].count_ones();
        self.blocks.iter().all(|b| b.count_ones() == first)
    }

    pub fn shape(&self) -> ShapeSignature {
        ShapeSignature::of(self)
    }

    /// Relabel points through a permutation image array.
    pub fn apply_permutation(&self, image: &[u32]) -> Partition {
        let mut blocks: Vec<u32> = self
            .blocks
            .iter()
            .map(|&b| bits(b).fold(0u32, |acc, p| acc | (1 << image[p as usize])))
            .collect();
        blocks.sort_unstable_by_key(|b| b.trailing_zeros());
        Partition {
            ground: self.ground,
            blocks,
        }
    }

    /// Compare by block point-lists, blocks in canonical order.
    fn cmp_canonical(&self, other: &Partition) -> Ordering {
        for (a, b) in self.blocks.iter().zip(other.blocks.iter()) {
            let mut x = bits(*a);
            let mut y = bits(*b);
            loop {
                match (x.next(), y.next()) {
                    (None, None) => break,
                    (None, Some(_)) => return Ordering::Less,
                    (Some(_), None) => return Ordering::Greater,
                    (Some(p), Some(q)) => match p.cmp(&q) {
                        Ordering::Equal => continue,
                        ord => return ord,
                    },
                }
            }
        }
        self.blocks.len().cmp(&other.blocks.len())
    }
}

impl PartialOrd for Partition {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Partition {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_canonical(other)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first_block = true;
        for &b in &self.blocks {
            if !first_block {
                write!(f, " | ")?;
            }
            first_block = false;
            let mut first_point = true;
            for p in bits(b) {
                if !first_point {
                    write!(f, " ")?;
                }
                first_point = false;
                write!(f, "{p}")?;
            }
        }
        Ok(())
    }
}

/// Parse partition text over a known ground set. Blocks separated by `|`,
/// points by whitespace; arbitrary block and point order is accepted.
pub fn parse_partition(ground: GroundSet, text: &str) -> Result<Partition> {
    let mut blocks: Vec<Vec<u32>> = Vec::new();
    let mut current: Vec<u32> = Vec::new();
    let mut token_start = None;
    let mut token = String::new();
    let flush = |token: &mut String,
                 start: Option<usize>,
                 current: &mut Vec<u32>|
     -> Result<()> {
        if token.is_empty() {
            return Ok(());
        }
        let value = token.parse::<u32>().map_err(|_| Error::Parse {
            position: start.unwrap_or(0),
            detail: format!("expected point index, found {token:?}"),
        })?;
        current.push(value);
        token.clear();
        Ok(())
    };
    for (pos, ch) in text.char_indices() {
        match ch {
            '|' => {
                flush(&mut token, token_start, &mut current)?;
                token_start = None;
                if current.is_empty() {
                    return Err(Error::Parse {
                        position: pos,
                        detail: "empty block".into(),
                    });
                }
                blocks.push(std::mem::take(&mut current));
            }
            c if c.is_whitespace() => {
                flush(&mut token, token_start, &mut current)?;
                token_start = None;
            }
            c if c.is_ascii_digit() => {
                if token.is_empty() {
                    token_start = Some(pos);
                }
                token.push(c);
            }
            c => {
                return Err(Error::Parse {
                    position: pos,
                    detail: format!("unexpected character {c:?}"),
                })
            }
        }
    }
    flush(&mut token, token_start, &mut current)?;
    if !current.is_empty() {
        blocks.push(current);
    }
    if blocks.is_empty() {
        return Err(Error::Parse {
            position: 0,
            detail: "no blocks".into(),
        });
    }
    Partition::from_point_blocks(ground, &blocks)
}

impl FromStr for Partition {
    type Err = Error;

    /// Parse with the ground size inferred as (max point + 1).
    fn from_str(s: &str) -> Result<Self> {
        let max = s
            .split(|c: char| !c.is_ascii_digit())
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<u32>().unwrap_or(0))
            .max()
            .ok_or(Error::Parse {
                position: 0,
                detail: "no points".into(),
            })?;
        parse_partition(GroundSet::new(max as usize + 1)?, s)
    }
}

/// Multiset of block sizes, displayed as `(count-size, ...)` with sizes
/// descending, e.g. `(1-6,7-3)` for one block of 6 and seven blocks of 3.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ShapeSignature {
    /// `(block_size, count)` pairs, block sizes descending.
    pairs: Vec<(u32, u32)>,
}

impl ShapeSignature {
    pub fn of(p: &Partition) -> Self {
        let mut sizes: Vec<u32> = p.blocks().iter().map(|b| b.count_ones()).collect();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        let mut pairs: Vec<(u32, u32)> = Vec::new();
        for s in sizes {
            match pairs.last_mut() {
                Some((size, count)) if *size == s => *count += 1,
                _ => pairs.push((s, 1)),
            }
        }
        ShapeSignature { pairs }
    }

    pub fn from_pairs(pairs: &[(u32, u32)]) -> Self {
        let mut pairs = pairs.to_vec();
        pairs.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        ShapeSignature { pairs }
    }

    /// `(block_size, count)` pairs, sizes descending.
    pub fn pairs(&self) -> &[(u32, u32)] {
        &self.pairs
    }

    pub fn total(&self) -> u32 {
        self.pairs.iter().map(|(s, c)| s * c).sum()
    }
}

impl fmt::Display for ShapeSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, (size, count)) in self.pairs.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{count}-{size}")?;
        }
        write!(f, ")")
    }
}

impl FromStr for ShapeSignature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let inner = s
            .trim()
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .ok_or(Error::Parse {
                position: 0,
                detail: "expected (count-size,...)".into(),
            })?;
        let mut pairs = Vec::new();
        for part in inner.split(',') {
            let (count, size) = part.trim().split_once('-').ok_or(Error::Parse {
                position: 0,
                detail: format!("bad shape entry {part:?}"),
            })?;
            let count: u32 = count.trim().parse().map_err(|_| Error::Parse {
                position: 0,
                detail: format!("bad count {count:?}"),
            })?;
            let size: u32 = size.trim().parse().map_err(|_| Error::Parse {
                position: 0,
                detail: format!("bad size {size:?}"),
            })?;
            pairs.push((size, count));
        }
        Ok(ShapeSignature::from_pairs(&pairs))
    }
}

/// Ordered list of at least two partitions over a common ground set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FactorTuple {
    parts: Vec<Partition>,
}

impl FactorTuple {
    pub fn new(parts: Vec<Partition>) -> Result<Self> {
        if parts.len() < 2 {
            return Err(Error::TooFewParts);
        }
        let ground = parts[0].ground();
        for p in &parts[1..] {
            if p.ground() != ground {
                return Err(Error::GroundMismatch {
                    left: ground.size() as usize,
                    right: p.size() as usize,
                });
            }
        }
        Ok(FactorTuple { parts })
    }

    pub fn parts(&self) -> &[Partition] {
        &self.parts
    }

    pub fn ground(&self) -> GroundSet {
        self.parts[0].ground()
    }

    /// Meet of all parts is the identity and block counts multiply to the
    /// ground size; equivalent to the natural map to the product of
    /// quotients being a bijection.
    pub fn is_factor_tuple(&self) -> bool {
        let product: u64 = self.parts.iter().map(|p| p.block_count() as u64).product();
        if product != self.ground().size() as u64 {
            return false;
        }
        let mut meet = self.parts[0].clone();
        for p in &self.parts[1..] {
            meet = meet.meet(p).expect("same ground");
        }
        meet.is_identity()
    }

    /// Canonical unordered form: parts sorted.
    pub fn canonical_unordered(&self) -> FactorTuple {
        let mut parts = self.parts.clone();
        parts.sort();
        FactorTuple { parts }
    }
}

/// All regular partitions with `m` blocks of `n` elements, canonically
/// ordered, streamed lazily.
pub fn enumerate_regular(ground: GroundSet, m: u32, n: u32) -> Result<RegularPartitions> {
    if m * n != ground.size() || m == 0 || n == 0 {
        return Err(Error::ShapeMismatch {
            detail: format!("{m} blocks of {n} do not tile {} points", ground.size()),
        });
    }
    Ok(RegularPartitions {
        ground,
        m: m as usize,
        n,
        stack: Vec::new(),
        prefix: Vec::new(),
        started: false,
        done: false,
    })
}

/// Lexicographic k-subsets of a fixed candidate list.
struct Combinations {
    items: Vec<u32>,
    idx: Vec<usize>,
    fresh: bool,
    done: bool,
}

impl Combinations {
    fn new(mask: u32, k: usize) -> Self {
        let items: Vec<u32> = bits(mask).collect();
        let done = k > items.len();
        Combinations {
            idx: (0..k).collect(),
            items,
            fresh: true,
            done,
        }
    }

    fn next_mask(&mut self) -> Option<u32> {
        if self.done {
            return None;
        }
        if self.fresh {
            self.fresh = false;
        } else {
            let k = self.idx.len();
            if k == 0 {
                self.done = true;
                return None;
            }
            let n = self.items.len();
            let mut i = k;
            loop {
                if i == 0 {
                    self.done = true;
                    return None;
                }
                i -= 1;
                if self.idx[i] != i + n - k {
                    break;
                }
            }
            self.idx[i] += 1;
            for j in i + 1..k {
                self.idx[j] = self.idx[j - 1] + 1;
            }
        }
        Some(
            self.idx
                .iter()
                .fold(0u32, |acc, &i| acc | (1 << self.items[i])),
        )
    }
}

pub struct RegularPartitions {
    ground: GroundSet,
    m: usize,
    n: u32,
    stack: Vec<Combinations>,
    prefix: Vec<u32>,
    started: bool,
    done: bool,
}

impl RegularPartitions {
    fn push_frame(&mut self) {
        let used = self.prefix.iter().fold(0u32, |a, b| a | b);
        let remaining = self.ground.full_mask() & !used;
        let anchor = remaining.trailing_zeros();
        let candidates = remaining & !(1 << anchor);
        self.stack
            .push(Combinations::new(candidates, self.n as usize - 1));
        self.prefix.push(1 << anchor); // block under construction, anchor set
    }
}

impl Iterator for RegularPartitions {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            self.push_frame();
        }
        loop {
            let depth = self.stack.len();
            if depth == 0 {
                self.done = true;
                return None;
            }
            let anchor = self.prefix[depth - 1] & self.prefix[depth - 1].wrapping_neg();
            match self.stack[depth - 1].next_mask() {
                None => {
                    self.stack.pop();
                    self.prefix.pop();
                }
                Some(mask) => {
                    self.prefix[depth - 1] = anchor | mask;
                    if depth == self.m {
                        let p = Partition {
                            ground: self.ground,
                            blocks: self.prefix.clone(),
                        };
                        self.prefix[depth - 1] = anchor;
                        return Some(p);
                    }
                    self.push_frame();
                }
            }
        }
    }
}

/// All companions of a regular partition `p` with `m` blocks of size `n`:
/// the partitions `q` with `n` blocks of `m` elements such that `(p, q)` is
/// a factor pair. There are `(n!)^(m-1)` of them.
pub fn enumerate_companions(p: &Partition) -> Result<Companions> {
    if !p.is_regular() {
        return Err(Error::NotRegular);
    }
    let base: Vec<Vec<u32>> = p.blocks().iter().map(|&b| bits(b).collect()).collect();
    let n = base[0].len();
    let perms = permutations(n);
    Ok(Companions {
        ground: p.ground(),
        odo: vec![0; base.len().saturating_sub(1)],
        base,
        perms,
        done: false,
    })
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        // next lexicographic permutation
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| cur[j] > cur[i]).unwrap();
        cur.swap(i, j);
        cur[i + 1..].reverse();
    }
    out
}

pub struct Companions {
    ground: GroundSet,
    base: Vec<Vec<u32>>,
    perms: Vec<Vec<usize>>,
    odo: Vec<usize>,
    done: bool,
}

impl Iterator for Companions {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        if self.done {
            return None;
        }
        let n = self.base[0].len();
        let mut blocks = vec![0u32; n];
        for (j, block) in blocks.iter_mut().enumerate() {
            *block |= 1 << self.base[0][j];
            for (i, digit) in self.odo.iter().enumerate() {
                let perm = &self.perms[*digit];
                *block |= 1 << self.base[i + 1][perm[j]];
            }
        }
        blocks.sort_unstable_by_key(|b| b.trailing_zeros());
        let out = Partition {
            ground: self.ground,
            blocks,
        };
        // advance odometer, rightmost digit fastest
        let mut i = self.odo.len();
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            self.odo[i] += 1;
            if self.odo[i] < self.perms.len() {
                break;
            }
            self.odo[i] = 0;
        }
        if self.odo.is_empty() {
            self.done = true;
        }
        Some(out)
    }
}

/// Common companion of two regular partitions with the same number of
/// equal-size blocks, built block by block through maximum bipartite
/// matching with least-index augmenting paths. Fully deterministic.
pub fn common_companion(p: &Partition, q: &Partition) -> Result<Partition> {
    if p.ground() != q.ground() {
        return Err(Error::GroundMismatch {
            left: p.size() as usize,
            right: q.size() as usize,
        });
    }
    if !p.is_regular() || !q.is_regular() {
        return Err(Error::NotRegular);
    }
    let k = p.block_count();
    if q.block_count() != k {
        return Err(Error::ShapeMismatch {
            detail: format!("block counts differ: {} vs {}", k, q.block_count()),
        });
    }
    let n = p.blocks()[0].count_ones() as usize;
    let mut p_rem: Vec<u32> = p.blocks().to_vec();
    let mut q_rem: Vec<u32> = q.blocks().to_vec();
    let mut out_blocks = Vec::with_capacity(n);
    for _ in 0..n {
        let adj: Vec<Vec<usize>> = p_rem
            .iter()
            .map(|&pb| {
                q_rem
                    .iter()
                    .enumerate()
                    .filter(|(_, &qb)| pb & qb != 0)
                    .map(|(j, _)| j)
                    .collect()
            })
            .collect();
        let matched = max_bipartite_matching(&adj, k);
        let mut z = 0u32;
        for (i, m) in matched.iter().enumerate() {
            let j = m.ok_or_else(|| Error::ShapeMismatch {
                detail: "matching failed; inputs are not regular partitions of common shape"
                    .into(),
            })?;
            let cell = p_rem[i] & q_rem[j];
            let x = 1u32 << cell.trailing_zeros();
            z |= x;
            p_rem[i] &= !x;
            q_rem[j] &= !x;
        }
        out_blocks.push(z);
    }
    Partition::from_blocks(p.ground(), &out_blocks)
}

/// Number of partitions with `r` equal-size blocks coarsening `p`, by
/// exhaustive grouping of `p`'s blocks into groups of equal total size.
pub fn count_equal_coarsenings(p: &Partition, r: u32) -> u64 {
    let size = p.size();
    if r == 0 || size % r != 0 {
        return 0;
    }
    let target = size / r;
    let sizes: Vec<u32> = p.blocks().iter().map(|b| b.count_ones()).collect();
    fn go(sizes: &[u32], remaining: u32, target: u32) -> u64 {
        if remaining == 0 {
            return 1;
        }
        let anchor = remaining.trailing_zeros() as usize;
        let rest = remaining & !(1 << anchor);
        let mut total = 0u64;
        // choose the rest of the anchor's group among later blocks
        fn pick(
            sizes: &[u32],
            rest: u32,
            from: usize,
            need: u32,
            group: u32,
            remaining: u32,
            target: u32,
            total: &mut u64,
        ) {
            if need == 0 {
                *total += go(sizes, remaining & !group, target);
                return;
            }
            for i in from..sizes.len() {
                if rest & (1 << i) == 0 {
                    continue;
                }
                if sizes[i] > need {
                    continue;
                }
                pick(
                    sizes,
                    rest,
                    i + 1,
                    need - sizes[i],
                    group | (1 << i),
                    remaining,
                    target,
                    total,
                );
            }
        }
        let need = target - sizes[anchor].min(target);
        if sizes[anchor] <= target {
            pick(
                sizes,
                rest,
                anchor + 1,
                need,
                1 << anchor,
                remaining,
                target,
                &mut total,
            );
        }
        total
    }
    let all = if sizes.len() == 32 {
        u32::MAX
    } else {
        (1u32 << sizes.len()) - 1
    };
    go(&sizes, all, target)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(n: usize) -> GroundSet {
        GroundSet::new(n).unwrap()
    }

    fn part(n: usize, text: &str) -> Partition {
        parse_partition(g(n), text).unwrap()
    }

    /// Independent meet oracle on the pairwise point relation.
    fn meet_oracle(p: &Partition, q: &Partition) -> Partition {
        let n = p.size();
        let pr = p.relation_rows();
        let qr = q.relation_rows();
        let mut blocks: Vec<u32> = Vec::new();
        let mut seen = 0u32;
        for i in 0..n {
            if seen & (1 << i) != 0 {
                continue;
            }
            let b = pr[i as usize] & qr[i as usize];
            seen |= b;
            blocks.push(b);
        }
        Partition::from_blocks(p.ground(), &blocks).unwrap()
    }

    /// Independent join oracle: boolean-matrix transitive closure.
    fn join_oracle(p: &Partition, q: &Partition) -> Partition {
        let n = p.size() as usize;
        let pr = p.relation_rows();
        let qr = q.relation_rows();
        let mut rows: Vec<u32> = (0..n).map(|i| pr[i] | qr[i]).collect();
        loop {
            let mut changed = false;
            for i in 0..n {
                let mut acc = rows[i];
                for j in bits(rows[i]) {
                    acc |= rows[j as usize];
                }
                if acc != rows[i] {
                    rows[i] = acc;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let mut blocks = Vec::new();
        for (i, &row) in rows.iter().enumerate() {
            if row.trailing_zeros() as usize == i {
                blocks.push(row);
            }
        }
        Partition::from_blocks(p.ground(), &blocks).unwrap()
    }

    #[test]
    fn canonical_construction() {
        let a = part(4, "0 1 | 2 3");
        let b = part(4, "2 3 | 0 1");
        assert_eq!(a, b);
        assert_eq!(a.to_string(), "0 1 | 2 3");
    }

    #[test]
    fn overlap_and_gap_errors() {
        let err = Partition::from_point_blocks(g(4), &[vec![0, 1], vec![1, 2, 3]]).unwrap_err();
        assert_eq!(err, Error::Overlap { point: 1 });
        let err = Partition::from_point_blocks(g(4), &[vec![0, 1], vec![3]]).unwrap_err();
        assert_eq!(err, Error::Gap { point: 2 });
    }

    #[test]
    fn meet_examples() {
        let p = part(6, "0 1 2 | 3 4 5");
        let delta = Partition::identity(g(6));
        assert_eq!(p.meet(&delta).unwrap(), delta);
        assert_eq!(p.meet(&p).unwrap(), p);
        let q = part(6, "0 3 | 1 4 | 2 5");
        assert_eq!(p.meet(&q).unwrap(), delta);
        assert_eq!(p.meet(&q).unwrap(), meet_oracle(&p, &q));
    }

    #[test]
    fn join_examples() {
        let p = part(6, "0 1 | 2 3 | 4 5");
        let delta = Partition::identity(g(6));
        assert_eq!(p.join(&delta).unwrap(), p);
        let q = part(6, "1 2 | 3 4 | 0 5");
        let j = p.join(&q).unwrap();
        assert!(j.is_single_block());
        assert_eq!(j, join_oracle(&p, &q));
    }

    #[test]
    fn join_of_smalls_sharing_seven_blocks() {
        // two 9-blocks-of-3 partitions of 27 points agreeing outside two blocks
        let mut blocks_a: Vec<Vec<u32>> = (0..9).map(|i| vec![3 * i, 3 * i + 1, 3 * i + 2]).collect();
        let mut blocks_b = blocks_a.clone();
        blocks_b[0] = vec![0, 1, 3];
        blocks_b[1] = vec![2, 4, 5];
        blocks_a.sort();
        blocks_b.sort();
        let a = Partition::from_point_blocks(g(27), &blocks_a).unwrap();
        let b = Partition::from_point_blocks(g(27), &blocks_b).unwrap();
        let j = a.join(&b).unwrap();
        assert_eq!(j.shape().to_string(), "(1-6,7-3)");
        assert_eq!(j, join_oracle(&a, &b));
    }

    #[test]
    fn permutes_examples() {
        let p = part(6, "0 1 2 | 3 4 5");
        let delta = Partition::identity(g(6));
        assert!(p.permutes(&delta).unwrap());
        assert!(p.permutes(&p).unwrap());
    }

    /// Two small relations on 27 points with trivial meet whose block
    /// patterns bend in incompatible ways: the closure of their union has a
    /// class larger than 9 points, so they cannot permute.
    #[test]
    fn bent_smalls_do_not_permute() {
        let idx = |x: u32, y: u32, z: u32| 9 * x + 3 * y + z;
        let swap01 = |j: u32| match j {
            0 => 1,
            1 => 0,
            j => j,
        };
        // u: one block per z-plane and column index j, picking an x for each
        // y; the pick bends at y = 2.
        let mut u_blocks = Vec::new();
        for z in 0..3 {
            for j in 0..3u32 {
                u_blocks.push(vec![idx(j, 0, z), idx(j, 1, z), idx(swap01(j), 2, z)]);
            }
        }
        // v: same construction with the roles of y and z exchanged and a
        // different bend, so the two patterns cannot be aligned.
        let swap12 = |j: u32| match j {
            1 => 2,
            2 => 1,
            j => j,
        };
        let mut v_blocks = Vec::new();
        for y in 0..3 {
            for j in 0..3u32 {
                v_blocks.push(vec![idx(j, y, 0), idx(j, y, 1), idx(swap12(j), y, 2)]);
            }
        }
        let u = Partition::from_point_blocks(g(27), &u_blocks).unwrap();
        let v = Partition::from_point_blocks(g(27), &v_blocks).unwrap();
        assert_eq!(u.meet(&v).unwrap(), Partition::identity(g(27)));
        assert!(!u.permutes(&v).unwrap());
        assert_eq!(u.compose(&v).unwrap(), None);
    }

    #[test]
    fn compose_examples() {
        let q = part(6, "0 1 | 2 3 | 4 5");
        let delta = Partition::identity(g(6));
        assert_eq!(delta.compose(&q).unwrap(), Some(q.clone()));
        // permuting coordinate pair on 27 points composes to the planes
        let a_blocks: Vec<Vec<u32>> = (0..9).map(|i| vec![3 * i, 3 * i + 1, 3 * i + 2]).collect();
        let b_blocks: Vec<Vec<u32>> = (0..3)
            .flat_map(|p| (0..3).map(move |r| vec![9 * p + r, 9 * p + r + 3, 9 * p + r + 6]))
            .collect();
        let a = Partition::from_point_blocks(g(27), &a_blocks).unwrap();
        let b = Partition::from_point_blocks(g(27), &b_blocks).unwrap();
        let c = a.compose(&b).unwrap().expect("permuting pair");
        assert_eq!(c.shape().to_string(), "(3-9)");
        assert_eq!(c, a.join(&b).unwrap());
    }

    #[test]
    fn regular_examples() {
        assert!(Partition::identity(g(5)).is_regular());
        assert!(!part(5, "0 1 | 2 3 4").is_regular());
        for p in enumerate_regular(g(9), 3, 3).unwrap() {
            assert!(p.is_regular());
        }
    }

    /// Natural-map oracle: the tuple is a factor tuple iff points have
    /// pairwise distinct coordinate vectors and the coordinate space is
    /// fully covered.
    fn natural_map_bijective(parts: &[Partition]) -> bool {
        let n = parts[0].size();
        let mut seen = std::collections::HashSet::new();
        for point in 0..n {
            let coord: Vec<usize> = parts
                .iter()
                .map(|p| {
                    let b = p.block_containing(point);
                    p.blocks().iter().position(|&x| x == b).unwrap()
                })
                .collect();
            if !seen.insert(coord) {
                return false;
            }
        }
        let product: u64 = parts.iter().map(|p| p.block_count() as u64).product();
        product == n as u64
    }

    #[test]
    fn factor_tuple_examples() {
        let t = FactorTuple::new(vec![part(4, "0 1 | 2 3"), part(4, "0 2 | 1 3")]).unwrap();
        assert!(t.is_factor_tuple());
        assert!(natural_map_bijective(t.parts()));

        // coordinate planes of the 3-cube
        let planes: Vec<Partition> = (0..3)
            .map(|axis| {
                let mask: u32 = (0..8).filter(|p| p & (1 << axis) == 0).map(|p| 1 << p).sum();
                Partition::from_blocks(g(8), &[mask, !mask & 0xff]).unwrap()
            })
            .collect();
        let t = FactorTuple::new(planes).unwrap();
        assert!(t.is_factor_tuple());
        assert!(natural_map_bijective(t.parts()));

        let t = FactorTuple::new(vec![part(4, "0 1 | 2 3"), part(4, "0 1 | 2 3")]).unwrap();
        assert!(!t.is_factor_tuple());
        assert!(!natural_map_bijective(t.parts()));

        assert_eq!(
            FactorTuple::new(vec![part(4, "0 1 | 2 3")]).unwrap_err(),
            Error::TooFewParts
        );
    }

    #[test]
    fn enumerate_regular_counts() {
        let all: Vec<Partition> = enumerate_regular(g(4), 2, 2).unwrap().collect();
        let expected: Vec<Partition> = ["0 1 | 2 3", "0 2 | 1 3", "0 3 | 1 2"]
            .iter()
            .map(|s| part(4, s))
            .collect();
        assert_eq!(all, expected);
        assert_eq!(enumerate_regular(g(6), 2, 3).unwrap().count(), 10);
        assert_eq!(enumerate_regular(g(8), 2, 4).unwrap().count(), 35);
        // canonical stream order
        let mut prev: Option<Partition> = None;
        for p in enumerate_regular(g(8), 4, 2).unwrap() {
            if let Some(prev) = &prev {
                assert!(prev < &p);
            }
            prev = Some(p);
        }
    }

    #[test]
    fn companion_counts() {
        let p = part(4, "0 1 | 2 3");
        let qs: Vec<Partition> = enumerate_companions(&p).unwrap().collect();
        assert_eq!(qs, vec![part(4, "0 2 | 1 3"), part(4, "0 3 | 1 2")]);
        let p = part(6, "0 1 2 | 3 4 5");
        assert_eq!(enumerate_companions(&p).unwrap().count(), 6);
        for q in enumerate_companions(&p).unwrap() {
            let t = FactorTuple::new(vec![p.clone(), q]).unwrap();
            assert!(t.is_factor_tuple());
        }
    }

    #[test]
    fn companions_of_small_27_count() {
        let blocks: Vec<Vec<u32>> = (0..9).map(|i| vec![3 * i, 3 * i + 1, 3 * i + 2]).collect();
        let p = Partition::from_point_blocks(g(27), &blocks).unwrap();
        assert_eq!(enumerate_companions(&p).unwrap().count(), 1_679_616); // 6^8
    }

    #[test]
    fn common_companion_examples() {
        let p = part(4, "0 1 | 2 3");
        let gamma = common_companion(&p, &p).unwrap();
        assert!(FactorTuple::new(vec![p.clone(), gamma.clone()])
            .unwrap()
            .is_factor_tuple());

        // rows and columns of the 3x3 grid
        let rows = part(9, "0 1 2 | 3 4 5 | 6 7 8");
        let cols = part(9, "0 3 6 | 1 4 7 | 2 5 8");
        let gamma = common_companion(&rows, &cols).unwrap();
        for base in [&rows, &cols] {
            let t = FactorTuple::new(vec![(*base).clone(), gamma.clone()]).unwrap();
            assert!(t.is_factor_tuple(), "gamma must complement {base}");
        }
    }

    #[test]
    fn shape_examples() {
        assert_eq!(Partition::identity(g(27)).shape().to_string(), "(27-1)");
        let blocks: Vec<Vec<u32>> = (0..9).map(|i| vec![3 * i, 3 * i + 1, 3 * i + 2]).collect();
        let small = Partition::from_point_blocks(g(27), &blocks).unwrap();
        assert_eq!(small.shape().to_string(), "(9-3)");
        let parsed: ShapeSignature = "(1-6,7-3)".parse().unwrap();
        assert_eq!(parsed.to_string(), "(1-6,7-3)");
        assert_eq!(parsed.total(), 27);
    }

    #[test]
    fn coarsening_counts() {
        let blocks: Vec<Vec<u32>> = (0..9).map(|i| vec![3 * i, 3 * i + 1, 3 * i + 2]).collect();
        let small = Partition::from_point_blocks(g(27), &blocks).unwrap();
        assert_eq!(count_equal_coarsenings(&small, 3), 280);

        // shape (1-6,7-3)
        let mut blocks: Vec<Vec<u32>> = vec![vec![0, 1, 2, 3, 4, 5]];
        blocks.extend((2..9).map(|i| vec![3 * i, 3 * i + 1, 3 * i + 2]));
        let p = Partition::from_point_blocks(g(27), &blocks).unwrap();
        assert_eq!(count_equal_coarsenings(&p, 3), 70);

        // shape (4-6,1-3)
        let mut blocks: Vec<Vec<u32>> = (0..4)
            .map(|i| (6 * i..6 * i + 6).collect::<Vec<u32>>())
            .collect();
        blocks.push(vec![24, 25, 26]);
        let p = Partition::from_point_blocks(g(27), &blocks).unwrap();
        assert_eq!(count_equal_coarsenings(&p, 3), 0);
    }

    /// Coarsenings of the all-singleton partition are exactly the regular
    /// partitions, tying the counter to the closed form.
    #[test]
    fn coarsening_count_of_identity_matches_closed_form() {
        for (n, r, expected) in [(4u32, 2u32, 3u64), (6, 2, 10), (6, 3, 15), (8, 2, 35)] {
            let delta = Partition::identity(g(n as usize));
            assert_eq!(count_equal_coarsenings(&delta, r), expected);
            assert_eq!(
                enumerate_regular(g(n as usize), r, n / r).unwrap().count() as u64,
                expected
            );
        }
    }

    #[test]
    fn parse_rejects_bad_text() {
        let err = parse_partition(g(4), "0 1 | x 3").unwrap_err();
        match err {
            Error::Parse { position, .. } => assert_eq!(position, 6),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn display_roundtrip() {
        let p = part(9, "3 4 5 | 0 1 2 | 6 7 8");
        assert_eq!(p.to_string(), "0 1 2 | 3 4 5 | 6 7 8");
        let back = parse_partition(g(9), &p.to_string()).unwrap();
        assert_eq!(back, p);
    }
}
