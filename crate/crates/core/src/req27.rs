//! Recovering a point permutation from an order-automorphism of the
//! regular relations on 27 points: the upper-bound table, collapses,
//! small-block families, special permutations of 3-subsets, and the
//! end-to-end round trip.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::autom::PointPermutation;
use crate::error::{Error, Result};
use crate::partition::{bits, Partition, ShapeSignature};
use crate::slab27::{ground27, AtomOracle, ReqAutomorphism, SmallRel};

/// Shape of the join of two small relations together with the number of
/// their common large upper bounds.
pub fn large_upper_bound_count(a: &SmallRel, b: &SmallRel) -> Result<(ShapeSignature, u64)> {
    let join = a.partition().join(b.partition())?;
    let count = crate::partition::count_equal_coarsenings(&join, 3);
    Ok((join.shape(), count))
}

/// The twelve join shapes of two small relations whose blocks stay within
/// size 9, with their common large-upper-bound counts.
pub fn upper_bound_table() -> Vec<(ShapeSignature, u64)> {
    [
        ("(9-3)", 280),
        ("(1-6,7-3)", 70),
        ("(1-9,6-3)", 10),
        ("(2-6,5-3)", 20),
        ("(3-6,3-3)", 6),
        ("(4-6,1-3)", 0),
        ("(1-9,1-6,4-3)", 4),
        ("(1-9,2-6,2-3)", 2),
        ("(1-9,3-6)", 0),
        ("(2-9,3-3)", 1),
        ("(2-9,1-6,1-3)", 1),
        ("(3-9)", 1),
    ]
    .into_iter()
    .map(|(s, c)| (s.parse().expect("table shape"), c))
    .collect()
}

/// Deterministic template pair of small relations whose join has the given
/// shape. The base small relation uses consecutive triples; the partner
/// re-splits each join class so that its closure is exactly the class.
pub fn shape_template_pair(shape: &ShapeSignature) -> Result<(SmallRel, SmallRel)> {
    if shape.total() != 27 || shape.pairs().iter().any(|&(size, _)| size % 3 != 0 || size > 9) {
        return Err(Error::ShapeMismatch {
            detail: format!("not a join shape of two small relations: {shape}"),
        });
    }
    let a_blocks: Vec<Vec<u32>> = (0..9).map(|i| vec![3 * i, 3 * i + 1, 3 * i + 2]).collect();
    let mut b_blocks: Vec<Vec<u32>> = Vec::new();
    let mut next = 0u32;
    for &(size, count) in shape.pairs() {
        for _ in 0..count {
            let points: Vec<u32> = (next..next + size).collect();
            match size {
                3 => b_blocks.push(points),
                6 => {
                    b_blocks.push(vec![points[0], points[1], points[3]]);
                    b_blocks.push(vec![points[2], points[4], points[5]]);
                }
                9 => {
                    b_blocks.push(vec![points[0], points[1], points[3]]);
                    b_blocks.push(vec![points[2], points[4], points[6]]);
                    b_blocks.push(vec![points[5], points[7], points[8]]);
                }
                _ => unreachable!("sizes filtered above"),
            }
            next += size;
        }
    }
    let a = SmallRel::new(Partition::from_point_blocks(ground27(), &a_blocks)?)?;
    let b = SmallRel::new(Partition::from_point_blocks(ground27(), &b_blocks)?)?;
    debug_assert_eq!(&a.partition().join(b.partition())?.shape(), shape);
    Ok((a, b))
}

/// Ten small relations agreeing with a base relation outside two chosen
/// blocks, any two with seventy common large upper bounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Collapse {
    pub members: Vec<SmallRel>,
    /// The six points re-split by the members.
    pub fused_pair: u32,
}

/// All ways to re-split the union of blocks `i` and `j` of `a` into two
/// triples, keeping the other seven blocks.
pub fn collapse_of(a: &SmallRel, i: usize, j: usize) -> Result<Collapse> {
    let blocks = a.partition().blocks();
    if i == j || i >= blocks.len() || j >= blocks.len() {
        return Err(Error::BadBlockIndex { index: i.max(j) });
    }
    let fused = blocks[i] | blocks[j];
    let kept: Vec<u32> = blocks
        .iter()
        .enumerate()
        .filter(|(n, _)| *n != i && *n != j)
        .map(|(_, &b)| b)
        .collect();
    let points: Vec<u32> = bits(fused).collect();
    let anchor = points[0];
    let mut members = Vec::with_capacity(10);
    // anchored 3-subsets kill the complement-pair duplicates
    for x in 1..6 {
        for y in x + 1..6 {
            let half = (1u32 << anchor) | (1 << points[x]) | (1 << points[y]);
            let other = fused & !half;
            let mut all = kept.clone();
            all.push(half);
            all.push(other);
            members.push(SmallRel::new(Partition::from_blocks(ground27(), &all)?)?);
        }
    }
    members.sort();
    Ok(Collapse {
        members,
        fused_pair: fused,
    })
}

/// Validate a ten-element set of small relations as a collapse: any two
/// members have seventy common large upper bounds; the recovered fused
/// six-point set does not depend on the base member.
pub fn recognize_collapse(set: &[SmallRel]) -> Result<Collapse> {
    if set.len() != 10 {
        return Err(Error::NotACollapse {
            detail: format!("expected 10 members, got {}", set.len()),
        });
    }
    for x in 0..set.len() {
        for y in x + 1..set.len() {
            let (_, count) = large_upper_bound_count(&set[x], &set[y])?;
            if count != 70 {
                return Err(Error::NotACollapse {
                    detail: format!("members {x} and {y} have {count} common upper bounds"),
                });
            }
        }
    }
    // blocks shared by every member
    let first_blocks: Vec<u32> = set[0].partition().blocks().to_vec();
    let shared: Vec<u32> = first_blocks
        .iter()
        .copied()
        .filter(|&b| {
            set[1..]
                .iter()
                .all(|m| m.partition().blocks().contains(&b))
        })
        .collect();
    if shared.len() != 7 {
        return Err(Error::NotACollapse {
            detail: format!("{} blocks shared by all members", shared.len()),
        });
    }
    let fused = !shared.iter().fold(0u32, |acc, &b| acc | b) & ground27().full_mask();
    // rebuilding from any base member gives the same ten relations
    let base = &set[0];
    let bi = base
        .partition()
        .blocks()
        .iter()
        .position(|&b| b & fused == b)
        .expect("fused pair covers two base blocks");
    let bj = base
        .partition()
        .blocks()
        .iter()
        .rposition(|&b| b & fused == b)
        .expect("fused pair covers two base blocks");
    let rebuilt = collapse_of(base, bi, bj)?;
    let mut sorted: Vec<SmallRel> = set.to_vec();
    sorted.sort();
    if sorted != rebuilt.members {
        return Err(Error::NotACollapse {
            detail: "member set does not match its reconstruction".into(),
        });
    }
    Ok(rebuilt)
}

/// The 36 collapses through a small relation, one per unordered block pair.
pub fn collapses_containing(a: &SmallRel) -> Vec<Collapse> {
    let mut out = Vec::with_capacity(36);
    for i in 0..9 {
        for j in i + 1..9 {
            out.push(collapse_of(a, i, j).expect("valid indices"));
        }
    }
    out
}

/// Do two collapses share a block: they intersect and no pair from their
/// union has exactly twenty common large upper bounds.
pub fn collapses_share_block(x: &Collapse, y: &Collapse) -> Result<bool> {
    let intersects = x.members.iter().any(|m| y.members.contains(m));
    if !intersects {
        return Ok(false);
    }
    let union: Vec<&SmallRel> = x.members.iter().chain(y.members.iter()).collect();
    for p in 0..union.len() {
        for q in p + 1..union.len() {
            let (_, count) = large_upper_bound_count(union[p], union[q])?;
            if count == 20 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Membership of a small relation in the family of a 3-point block.
pub fn xalpha_contains(alpha: u32, a: &SmallRel) -> bool {
    a.partition().blocks().contains(&alpha)
}

/// Local verification report for the four family conditions at one member.
#[derive(Debug, Clone)]
pub struct XalphaReport {
    pub inside_count: usize,
    pub touching_count: usize,
    pub touching_pairwise_share: bool,
    pub witness_samples: usize,
    pub witness_failures: usize,
}

impl XalphaReport {
    pub fn ok(&self) -> bool {
        self.inside_count == 28
            && self.touching_count == 8
            && self.touching_pairwise_share
            && self.witness_failures == 0
            && self.witness_samples > 0
    }
}

/// Check, locally at `a`, the conditions characterizing the family of
/// small relations having `alpha` as a block: 28 of the 36 collapses stay
/// inside the family, 8 touch it only at `a`, those 8 pairwise share a
/// block, and each sampled 20-upper-bound pair inside the family has a
/// fourth-member witness.
pub fn check_xalpha_conditions(alpha: u32, a: &SmallRel, seed: u64) -> Result<XalphaReport> {
    if !xalpha_contains(alpha, a) {
        return Err(Error::ShapeMismatch {
            detail: "the 3-subset is not a block of the base relation".into(),
        });
    }
    let collapses = collapses_containing(a);
    let mut inside = Vec::new();
    let mut touching = Vec::new();
    for c in &collapses {
        if c.members.iter().all(|m| xalpha_contains(alpha, m)) {
            inside.push(c.clone());
        } else if c
            .members
            .iter()
            .all(|m| m == a || !xalpha_contains(alpha, m))
        {
            touching.push(c.clone());
        }
    }
    let mut touching_pairwise_share = true;
    for x in 0..touching.len() {
        for y in x + 1..touching.len() {
            if !collapses_share_block(&touching[x], &touching[y])? {
                touching_pairwise_share = false;
            }
        }
    }
    // witness condition: for sampled b, c in different inside collapses
    // with disjoint fused pairs, the mixed relation lies in the family and
    // is a neighbour of both
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut witness_samples = 0;
    let mut witness_failures = 0;
    let mut attempts = 0;
    while witness_samples < 5 && attempts < 200 {
        attempts += 1;
        let cb = &inside[rng.gen_range(0..inside.len())];
        let cc = &inside[rng.gen_range(0..inside.len())];
        if cb.fused_pair & cc.fused_pair != 0 {
            continue;
        }
        let b = cb
            .members
            .iter()
            .filter(|m| *m != a)
            .nth(rng.gen_range(0..9))
            .unwrap();
        let c = cc
            .members
            .iter()
            .filter(|m| *m != a)
            .nth(rng.gen_range(0..9))
            .unwrap();
        let (_, count) = large_upper_bound_count(b, c)?;
        if count != 20 {
            continue;
        }
        witness_samples += 1;
        // d behaves like b on the first fused pair, like c on the second,
        // like a elsewhere
        let mut d_blocks: Vec<u32> = Vec::new();
        for &block in a.partition().blocks() {
            if block & cb.fused_pair != 0 || block & cc.fused_pair != 0 {
                continue;
            }
            d_blocks.push(block);
        }
        for &block in b.partition().blocks() {
            if block & cb.fused_pair == block {
                d_blocks.push(block);
            }
        }
        for &block in c.partition().blocks() {
            if block & cc.fused_pair == block {
                d_blocks.push(block);
            }
        }
        let d = SmallRel::new(Partition::from_blocks(ground27(), &d_blocks)?)?;
        let ok = d != *a
            && xalpha_contains(alpha, &d)
            && large_upper_bound_count(b, &d)?.1 == 70
            && large_upper_bound_count(c, &d)?.1 == 70;
        if !ok {
            witness_failures += 1;
        }
    }
    Ok(XalphaReport {
        inside_count: inside.len(),
        touching_count: touching.len(),
        touching_pairwise_share,
        witness_samples,
        witness_failures,
    })
}

/// Canonical registry of the 2925 three-point subsets.
pub struct SmallBlocks {
    pub masks: Vec<u32>,
    index: std::collections::HashMap<u32, usize>,
}

impl SmallBlocks {
    pub fn enumerate() -> Self {
        let mut masks = Vec::with_capacity(2925);
        for x in 0..27u32 {
            for y in x + 1..27 {
                for z in y + 1..27 {
                    masks.push((1 << x) | (1 << y) | (1 << z));
                }
            }
        }
        let index = masks.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        SmallBlocks { masks, index }
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn index_of(&self, mask: u32) -> Option<usize> {
        self.index.get(&mask).copied()
    }
}

/// Permutation of the 3-point subsets preserving intersection sizes and
/// the union-containment relation.
#[derive(Debug, Clone)]
pub struct BlockPermutation {
    pub images: Vec<usize>,
}

impl BlockPermutation {
    pub fn from_point_permutation(alpha: &PointPermutation, registry: &SmallBlocks) -> Self {
        let images = registry
            .masks
            .iter()
            .map(|&m| {
                let img = bits(m).fold(0u32, |acc, p| acc | (1 << alpha.apply(p)));
                registry.index_of(img).expect("3-subsets are closed")
            })
            .collect();
        BlockPermutation { images }
    }

    pub fn compose(&self, other: &BlockPermutation) -> BlockPermutation {
        BlockPermutation {
            images: other.images.iter().map(|&i| self.images[i]).collect(),
        }
    }

    pub fn inverse(&self) -> BlockPermutation {
        let mut images = vec![0usize; self.images.len()];
        for (i, &x) in self.images.iter().enumerate() {
            images[x] = i;
        }
        BlockPermutation { images }
    }

    /// Sampled specialness: intersection cardinalities and the containment
    /// relation are preserved on random triples.
    pub fn verify_special_sampled(
        &self,
        registry: &SmallBlocks,
        seed: u64,
        samples: usize,
    ) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = registry.len();
        for i in 0..samples {
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(0..n);
            let c = rng.gen_range(0..n);
            let (ma, mb, mc) = (registry.masks[a], registry.masks[b], registry.masks[c]);
            let (fa, fb, fc) = (
                registry.masks[self.images[a]],
                registry.masks[self.images[b]],
                registry.masks[self.images[c]],
            );
            if (ma & mb).count_ones() != (fa & fb).count_ones() {
                return Err(Error::Oracle {
                    detail: format!("intersection size lost at sample {i}"),
                });
            }
            if (mc & !(ma | mb) == 0) != (fc & !(fa | fb) == 0) {
                return Err(Error::Oracle {
                    detail: format!("union containment lost at sample {i}"),
                });
            }
        }
        Ok(())
    }
}

fn member_consecutive(alpha: u32) -> SmallRel {
    let rest: Vec<u32> = (0..27u32).filter(|p| alpha & (1 << p) == 0).collect();
    let mut blocks: Vec<u32> = rest
        .chunks(3)
        .map(|c| c.iter().fold(0u32, |acc, &p| acc | (1 << p)))
        .collect();
    blocks.push(alpha);
    SmallRel::new(Partition::from_blocks(ground27(), &blocks).unwrap()).unwrap()
}

fn member_strided(alpha: u32) -> SmallRel {
    let rest: Vec<u32> = (0..27u32).filter(|p| alpha & (1 << p) == 0).collect();
    let mut blocks: Vec<u32> = (0..8)
        .map(|i| (1u32 << rest[i]) | (1 << rest[8 + i]) | (1 << rest[16 + i]))
        .collect();
    blocks.push(alpha);
    SmallRel::new(Partition::from_blocks(ground27(), &blocks).unwrap()).unwrap()
}

fn member_random<R: Rng>(alpha: u32, rng: &mut R) -> SmallRel {
    let mut rest: Vec<u32> = (0..27u32).filter(|p| alpha & (1 << p) == 0).collect();
    rest.shuffle(rng);
    let mut blocks: Vec<u32> = rest
        .chunks(3)
        .map(|c| c.iter().fold(0u32, |acc, &p| acc | (1 << p)))
        .collect();
    blocks.push(alpha);
    SmallRel::new(Partition::from_blocks(ground27(), &blocks).unwrap()).unwrap()
}

/// Extract the induced permutation of 3-point subsets from an
/// order-automorphism of the regular relations: the image of a subset is
/// the one block shared by the images of enough family members.
pub fn lambda_to_block_permutation(
    lambda: &ReqAutomorphism<'_>,
    sample_budget: usize,
) -> Result<BlockPermutation> {
    let registry = SmallBlocks::enumerate();
    let mut images = Vec::with_capacity(registry.len());
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for &alpha in &registry.masks {
        let mut members = vec![member_consecutive(alpha), member_strided(alpha)];
        let mut shared: Option<std::collections::HashSet<u32>> = None;
        let mut budget = sample_budget;
        loop {
            for m in members.drain(..) {
                let img = lambda.apply(m.partition())?;
                let blocks: std::collections::HashSet<u32> = img.blocks().iter().copied().collect();
                shared = Some(match shared.take() {
                    None => blocks,
                    Some(prev) => prev.intersection(&blocks).copied().collect(),
                });
            }
            let current = shared.as_ref().unwrap();
            if current.len() == 1 {
                break;
            }
            if current.is_empty() {
                return Err(Error::Oracle {
                    detail: "family images share no block; not an automorphism".into(),
                });
            }
            if budget == 0 {
                return Err(Error::Oracle {
                    detail: "sample budget exhausted before the shared block was unique".into(),
                });
            }
            budget -= 1;
            members.push(member_random(alpha, &mut rng));
        }
        let beta = *shared.unwrap().iter().next().unwrap();
        let idx = registry.index_of(beta).ok_or_else(|| Error::Oracle {
            detail: "shared image block is not a 3-subset".into(),
        })?;
        images.push(idx);
    }
    // bijectivity
    let mut seen = vec![false; registry.len()];
    for &i in &images {
        if seen[i] {
            return Err(Error::Oracle {
                detail: "induced block map is not a bijection".into(),
            });
        }
        seen[i] = true;
    }
    let out = BlockPermutation { images };
    out.verify_special_sampled(&registry, 0xabcd, 2000)?;
    Ok(out)
}

/// Recover the point permutation from a special permutation of 3-subsets:
/// the image of a point is the intersection of the images of two least
/// witnesses meeting exactly there, cross-checked on an alternative
/// witness pair.
pub fn block_permutation_to_point(rho: &BlockPermutation) -> Result<PointPermutation> {
    let registry = SmallBlocks::enumerate();
    let image_mask = |mask: u32| -> Result<u32> {
        let idx = registry.index_of(mask).ok_or(Error::ShapeMismatch {
            detail: "not a 3-subset".into(),
        })?;
        Ok(registry.masks[rho.images[idx]])
    };
    let mut image = Vec::with_capacity(27);
    for p in 0..27u32 {
        let others: Vec<u32> = (0..27).filter(|&q| q != p).collect();
        let alpha = (1u32 << p) | (1 << others[0]) | (1 << others[1]);
        let beta = (1u32 << p) | (1 << others[2]) | (1 << others[3]);
        let cut = image_mask(alpha)? & image_mask(beta)?;
        if cut.count_ones() != 1 {
            return Err(Error::Oracle {
                detail: format!("witness images for point {p} do not meet in one point"),
            });
        }
        // alternative witnesses must agree
        let alpha2 = (1u32 << p) | (1 << others[0]) | (1 << others[2]);
        let beta2 = (1u32 << p) | (1 << others[1]) | (1 << others[3]);
        let cut2 = image_mask(alpha2)? & image_mask(beta2)?;
        if cut2 != cut {
            return Err(Error::Oracle {
                detail: format!("witness pairs disagree at point {p}; map is not special"),
            });
        }
        image.push(cut.trailing_zeros());
    }
    PointPermutation::new(image).map_err(|_| Error::Oracle {
        detail: "recovered point map is not a bijection".into(),
    })
}

/// Full pipeline: the permutation acts on atoms, descends to the regular
/// relations, then to 3-subsets, and finally back to points. The result
/// equals the input permutation.
pub fn end_to_end_roundtrip(alpha: &PointPermutation) -> Result<PointPermutation> {
    if alpha.len() != 27 {
        return Err(Error::BadGroundSize { size: alpha.len() });
    }
    let oracle = AtomOracle::from_permutation(alpha);
    oracle.validate(0x0ddba11, crate::slab27::DEFAULT_ORACLE_PROBES)?;
    let lambda = crate::slab27::phi_req(&oracle);
    let rho = lambda_to_block_permutation(&lambda, 32)?;
    block_permutation_to_point(&rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::omp::equal_coarsenings;
    use crate::slab27::{random_permuting_smalls, random_small};

    #[test]
    fn table_matches_template_pairs() {
        for (shape, expected) in upper_bound_table() {
            let (a, b) = shape_template_pair(&shape).unwrap();
            let (observed_shape, count) = large_upper_bound_count(&a, &b).unwrap();
            assert_eq!(observed_shape, shape);
            assert_eq!(count, expected, "shape {shape}");
        }
    }

    /// Independent route to the table: materialize all equal coarsenings
    /// of one relation and filter by refinement of the other.
    #[test]
    fn table_matches_coarsening_filter_oracle() {
        for (shape, expected) in upper_bound_table() {
            let (a, b) = shape_template_pair(&shape).unwrap();
            let filtered = equal_coarsenings(a.partition(), 3)
                .into_iter()
                .filter(|big| b.partition().refines(big).unwrap())
                .count() as u64;
            assert_eq!(filtered, expected, "shape {shape}");
        }
    }

    #[test]
    fn table_stable_under_relabeling() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for (shape, expected) in upper_bound_table() {
            let (a, b) = shape_template_pair(&shape).unwrap();
            for _ in 0..10 {
                let alpha = PointPermutation::random(27, &mut rng);
                let fa = SmallRel::new(a.partition().apply_permutation(alpha.image())).unwrap();
                let fb = SmallRel::new(b.partition().apply_permutation(alpha.image())).unwrap();
                let (s, count) = large_upper_bound_count(&fa, &fb).unwrap();
                assert_eq!(s, shape);
                assert_eq!(count, expected);
            }
        }
    }

    #[test]
    fn self_join_gives_280() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let a = random_small(&mut rng);
        let (shape, count) = large_upper_bound_count(&a, &a).unwrap();
        assert_eq!(shape.to_string(), "(9-3)");
        assert_eq!(count, 280);
    }

    #[test]
    fn collapse_members_and_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let a = random_small(&mut rng);
        let c = collapse_of(&a, 2, 5).unwrap();
        assert_eq!(c.members.len(), 10);
        assert!(c.members.contains(&a));
        for x in 0..10 {
            for y in x + 1..10 {
                let (shape, count) =
                    large_upper_bound_count(&c.members[x], &c.members[y]).unwrap();
                assert_eq!(shape.to_string(), "(1-6,7-3)");
                assert_eq!(count, 70);
            }
        }
    }

    #[test]
    fn recognize_collapse_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let a = random_small(&mut rng);
        let c = collapse_of(&a, 0, 3).unwrap();
        let mut shuffled = c.members.clone();
        shuffled.shuffle(&mut rng);
        let recognized = recognize_collapse(&shuffled).unwrap();
        assert_eq!(recognized.fused_pair, c.fused_pair);
        assert_eq!(recognized.members, c.members);
    }

    #[test]
    fn random_sets_are_not_collapses() {
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        let set: Vec<SmallRel> = (0..10).map(|_| random_small(&mut rng)).collect();
        assert!(recognize_collapse(&set).is_err());
    }

    #[test]
    fn collapse_recognition_is_equivariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(46);
        let a = random_small(&mut rng);
        let c = collapse_of(&a, 1, 7).unwrap();
        let alpha = PointPermutation::random(27, &mut rng);
        let mapped: Vec<SmallRel> = c
            .members
            .iter()
            .map(|m| SmallRel::new(m.partition().apply_permutation(alpha.image())).unwrap())
            .collect();
        let recognized = recognize_collapse(&mapped).unwrap();
        let expected_fused = bits(c.fused_pair).fold(0u32, |acc, p| acc | (1 << alpha.apply(p)));
        assert_eq!(recognized.fused_pair, expected_fused);
    }

    #[test]
    fn thirty_six_collapses_and_sharing() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let a = random_small(&mut rng);
        let collapses = collapses_containing(&a);
        assert_eq!(collapses.len(), 36);
        // index pairs in the same order as generation
        let mut pairs = Vec::new();
        for i in 0..9 {
            for j in i + 1..9 {
                pairs.push((i, j));
            }
        }
        for x in 0..36 {
            for y in x + 1..36 {
                let (i, j) = pairs[x];
                let (m, n) = pairs[y];
                let overlap = i == m || i == n || j == m || j == n;
                assert_eq!(
                    collapses_share_block(&collapses[x], &collapses[y]).unwrap(),
                    overlap,
                    "pairs {:?} {:?}",
                    pairs[x],
                    pairs[y]
                );
            }
        }
    }

    #[test]
    fn disjoint_collapse_members_have_20_upper_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(48);
        let a = random_small(&mut rng);
        let c1 = collapse_of(&a, 0, 1).unwrap();
        let c2 = collapse_of(&a, 2, 3).unwrap();
        let b = c1.members.iter().find(|m| *m != &a).unwrap();
        let c = c2.members.iter().find(|m| *m != &a).unwrap();
        let (shape, count) = large_upper_bound_count(b, c).unwrap();
        assert_eq!(shape.to_string(), "(2-6,5-3)");
        assert_eq!(count, 20);
    }

    #[test]
    fn xalpha_membership_and_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(49);
        let a = random_small(&mut rng);
        let alpha = a.partition().blocks()[4];
        assert!(xalpha_contains(alpha, &a));
        let other = random_small(&mut rng);
        if !other.partition().blocks().contains(&alpha) {
            assert!(!xalpha_contains(alpha, &other));
        }
        // the family size equals the count of small relations on the other
        // 24 points, asserted symbolically and never enumerated
        let family_size = crate::counting::cf_factor_relations(8, 3);
        assert_eq!(family_size.to_string(), "9161680528000");
    }

    #[test]
    fn xalpha_conditions_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        for trial in 0..5 {
            let a = random_small(&mut rng);
            let alpha = a.partition().blocks()[rng.gen_range(0..9)];
            let report = check_xalpha_conditions(alpha, &a, 100 + trial).unwrap();
            assert!(report.ok(), "trial {trial}: {report:?}");
        }
        let a = random_small(&mut rng);
        let beta = 0b111 << 3;
        if !a.partition().blocks().contains(&beta) {
            assert!(check_xalpha_conditions(beta, &a, 0).is_err());
        }
    }

    #[test]
    fn block_permutation_roundtrip_through_points() {
        let registry = SmallBlocks::enumerate();
        assert_eq!(registry.len(), 2925);
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        for _ in 0..20 {
            let alpha = PointPermutation::random(27, &mut rng);
            let rho = BlockPermutation::from_point_permutation(&alpha, &registry);
            rho.verify_special_sampled(&registry, 7, 10_000).unwrap();
            let recovered = block_permutation_to_point(&rho).unwrap();
            assert_eq!(recovered, alpha);
        }
        // identity
        let rho = BlockPermutation::from_point_permutation(
            &PointPermutation::identity(27),
            &registry,
        );
        assert!(block_permutation_to_point(&rho)
            .unwrap()
            .is_identity());
    }

    #[test]
    fn corrupted_block_permutation_detected() {
        let registry = SmallBlocks::enumerate();
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        let alpha = PointPermutation::random(27, &mut rng);
        let mut rho = BlockPermutation::from_point_permutation(&alpha, &registry);
        rho.images.swap(17, 1045);
        let outcome = block_permutation_to_point(&rho);
        let special = rho.verify_special_sampled(&registry, 8, 5000);
        assert!(outcome.is_err() || special.is_err());
    }

    #[test]
    fn specialness_closed_under_composition_and_inverse() {
        let registry = SmallBlocks::enumerate();
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let a = BlockPermutation::from_point_permutation(
            &PointPermutation::random(27, &mut rng),
            &registry,
        );
        let b = BlockPermutation::from_point_permutation(
            &PointPermutation::random(27, &mut rng),
            &registry,
        );
        a.compose(&b)
            .verify_special_sampled(&registry, 9, 1000)
            .unwrap();
        a.inverse()
            .verify_special_sampled(&registry, 10, 1000)
            .unwrap();
    }

    #[test]
    fn roundtrip_recovers_permutations() {
        let mut rng = ChaCha8Rng::seed_from_u64(54);
        assert!(end_to_end_roundtrip(&PointPermutation::identity(27))
            .unwrap()
            .is_identity());
        for _ in 0..3 {
            let alpha = PointPermutation::random(27, &mut rng);
            assert_eq!(end_to_end_roundtrip(&alpha).unwrap(), alpha);
        }
        // a structured case: one coordinate line cycled
        let mut image: Vec<u32> = (0..27).collect();
        image[0] = 1;
        image[1] = 2;
        image[2] = 0;
        let alpha = PointPermutation::new(image).unwrap();
        assert_eq!(end_to_end_roundtrip(&alpha).unwrap(), alpha);
    }

    /// A lying oracle must surface as a diagnostic somewhere in the
    /// pipeline, never as a silently wrong permutation.
    #[test]
    fn corrupted_oracle_fails_loudly() {
        use crate::autom::gamma_apply;
        let mut rng = ChaCha8Rng::seed_from_u64(58);
        let alpha = PointPermutation::random(27, &mut rng);
        let honest = alpha.clone();
        // swap the images of atoms over two different first spots
        let s1 = random_small(&mut rng);
        let s2 = random_small(&mut rng);
        let a1 = crate::slab27::canonical_atom_for_small(&s1);
        let a2 = crate::slab27::canonical_atom_for_small(&s2);
        let (ca1, ca2) = (a1.clone(), a2.clone());
        let oracle = AtomOracle::from_fns(
            Box::new(move |x| {
                if *x == ca1 {
                    gamma_apply(&honest, &ca2)
                } else if *x == ca2 {
                    gamma_apply(&honest, &ca1)
                } else {
                    gamma_apply(&honest, x)
                }
            }),
            {
                let inv = alpha.inverse();
                Box::new(move |x| gamma_apply(&inv, x))
            },
        );
        let lambda = crate::slab27::phi_req(&oracle);
        let outcome = lambda_to_block_permutation(&lambda, 8)
            .and_then(|rho| block_permutation_to_point(&rho));
        match outcome {
            Err(_) => {}
            Ok(recovered) => assert_eq!(
                recovered, alpha,
                "a recovered permutation must still match the honest action"
            ),
        }
    }

    #[test]
    fn lambda_extraction_matches_subset_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        let alpha = PointPermutation::random(27, &mut rng);
        let oracle = AtomOracle::from_permutation(&alpha);
        let lambda = crate::slab27::phi_req(&oracle);
        let rho = lambda_to_block_permutation(&lambda, 32).unwrap();
        let registry = SmallBlocks::enumerate();
        let direct = BlockPermutation::from_point_permutation(&alpha, &registry);
        assert_eq!(rho.images, direct.images);
    }

    #[test]
    fn equivariance_of_collapse_counting() {
        // upper-bound counts commute with the point action
        let mut rng = ChaCha8Rng::seed_from_u64(56);
        for _ in 0..10 {
            let (a, b) = random_permuting_smalls(&mut rng);
            let alpha = PointPermutation::random(27, &mut rng);
            let (s1, c1) = large_upper_bound_count(&a, &b).unwrap();
            let fa = SmallRel::new(a.partition().apply_permutation(alpha.image())).unwrap();
            let fb = SmallRel::new(b.partition().apply_permutation(alpha.image())).unwrap();
            let (s2, c2) = large_upper_bound_count(&fa, &fb).unwrap();
            assert_eq!(s1, s2);
            assert_eq!(c1, c2);
        }
    }

    #[test]
    fn equal_coarsenings_materialized_matches_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(57);
        let a = random_small(&mut rng);
        let coarsenings = equal_coarsenings(a.partition(), 3);
        assert_eq!(coarsenings.len() as u64, 280);
        assert_eq!(
            coarsenings.len() as u64,
            crate::partition::count_equal_coarsenings(a.partition(), 3)
        );
    }
}
