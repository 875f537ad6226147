//! Permutations of the ground set acting on factor pairs, phase groups,
//! transitivity certificates, and automorphism-group orders.

use num_bigint::BigUint;
use num_traits::One;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::counting::{factorial, is_prime};
use crate::error::{Error, Result};
use crate::omp::{enumerate_atoms, horizontal_sum_decomposition, FactorPair, OmpStructure};
use crate::partition::{bits, FactorTuple, GroundSet};

/// Permutation of the ground set, stored as an image array.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PointPermutation {
    image: Vec<u32>,
}

impl PointPermutation {
    pub fn new(image: Vec<u32>) -> Result<Self> {
        let n = image.len();
        let mut seen = vec![false; n];
        for &x in &image {
            if x as usize >= n || seen[x as usize] {
                return Err(Error::ShapeMismatch {
                    detail: format!("image array {image:?} is not a bijection"),
                });
            }
            seen[x as usize] = true;
        }
        Ok(PointPermutation { image })
    }

    pub fn identity(n: usize) -> Self {
        PointPermutation {
            image: (0..n as u32).collect(),
        }
    }

    pub fn random<R: Rng>(n: usize, rng: &mut R) -> Self {
        let mut image: Vec<u32> = (0..n as u32).collect();
        image.shuffle(rng);
        PointPermutation { image }
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn image(&self) -> &[u32] {
        &self.image
    }

    pub fn apply(&self, point: u32) -> u32 {
        self.image[point as usize]
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &x)| i as u32 == x)
    }

    /// `self` after `other`: (self * other)(x) = self(other(x)).
    pub fn compose(&self, other: &PointPermutation) -> PointPermutation {
        PointPermutation {
            image: other.image.iter().map(|&x| self.image[x as usize]).collect(),
        }
    }

    pub fn inverse(&self) -> PointPermutation {
        let mut image = vec![0u32; self.image.len()];
        for (i, &x) in self.image.iter().enumerate() {
            image[x as usize] = i as u32;
        }
        PointPermutation { image }
    }

    /// Cycle notation, e.g. `(0 1)(2 3)`.
    pub fn cycles(&self) -> String {
        let mut seen = vec![false; self.image.len()];
        let mut out = String::new();
        for start in 0..self.image.len() {
            if seen[start] || self.image[start] as usize == start {
                seen[start] = true;
                continue;
            }
            out.push('(');
            let mut x = start;
            let mut first = true;
            while !seen[x] {
                seen[x] = true;
                if !first {
                    out.push(' ');
                }
                first = false;
                out.push_str(&x.to_string());
                x = self.image[x] as usize;
            }
            out.push(')');
        }
        if out.is_empty() {
            out.push_str("id");
        }
        out
    }
}

/// The action of a permutation on a factor pair: relabel both spots.
pub fn gamma_apply(alpha: &PointPermutation, x: &FactorPair) -> FactorPair {
    x.apply_permutation(alpha.image())
}

/// All permutations fixing every atom of the factor-pair poset.
///
/// Prime sizes have no atoms, so the whole symmetric group is returned;
/// otherwise the scan over all |X|! permutations rejects on a probe subset
/// of atoms before confirming on the full list.
pub fn phase_group(ground: GroundSet) -> Result<Vec<PointPermutation>> {
    let n = ground.size() as usize;
    if n > 9 {
        return Err(Error::SizeGuard { size: n, cap: 9 });
    }
    let atoms: Vec<FactorPair> = enumerate_atoms(ground).collect();
    if atoms.is_empty() {
        // two-element poset: everything acts trivially
        return Ok(PermutationStream::new(n).collect());
    }
    let probe: Vec<&FactorPair> = atoms.iter().take(100).collect();
    let mut kernel = Vec::new();
    for perm in PermutationStream::new(n) {
        let fixes_probe = probe.iter().all(|a| gamma_apply(&perm, a) == **a);
        if !fixes_probe {
            continue;
        }
        if atoms.iter().all(|a| gamma_apply(&perm, a) == *a) {
            kernel.push(perm);
        }
    }
    Ok(kernel)
}

/// Lexicographic stream over all permutations of `0..n`.
pub struct PermutationStream {
    current: Option<Vec<u32>>,
}

impl PermutationStream {
    pub fn new(n: usize) -> Self {
        PermutationStream {
            current: Some((0..n as u32).collect()),
        }
    }
}

impl Iterator for PermutationStream {
    type Item = PointPermutation;

    fn next(&mut self) -> Option<PointPermutation> {
        let cur = self.current.take()?;
        let out = PointPermutation { image: cur.clone() };
        let mut next = cur;
        let n = next.len();
        let advanced = (|| {
            let i = (0..n.saturating_sub(1)).rev().find(|&i| next[i] < next[i + 1])?;
            let j = (i + 1..n).rev().find(|&j| next[j] > next[i])?;
            next.swap(i, j);
            next[i + 1..].reverse();
            Some(())
        })();
        if advanced.is_some() {
            self.current = Some(next);
        }
        Some(out)
    }
}

/// A permutation whose action carries the atoms of one block onto the
/// atoms of another, following a requested alignment of parts.
///
/// `sequencing[i] = j` sends part `i` of `from` to part `j` of `to`; parts
/// can only be aligned when their block counts agree. With no sequencing,
/// parts are aligned by block count in least-index order.
pub fn block_transporter(
    from: &FactorTuple,
    to: &FactorTuple,
    sequencing: Option<&[usize]>,
) -> Result<PointPermutation> {
    let k = from.parts().len();
    if to.parts().len() != k {
        return Err(Error::ShapeMismatch {
            detail: format!("part counts differ: {k} vs {}", to.parts().len()),
        });
    }
    if from.ground() != to.ground() {
        return Err(Error::GroundMismatch {
            left: from.ground().size() as usize,
            right: to.ground().size() as usize,
        });
    }
    let seq: Vec<usize> = match sequencing {
        Some(s) => {
            if s.len() != k {
                return Err(Error::ShapeMismatch {
                    detail: "sequencing length mismatch".into(),
                });
            }
            let mut seen = vec![false; k];
            for &j in s {
                if j >= k || seen[j] {
                    return Err(Error::ShapeMismatch {
                        detail: "sequencing is not a bijection".into(),
                    });
                }
                seen[j] = true;
            }
            for (i, &j) in s.iter().enumerate() {
                if from.parts()[i].block_count() != to.parts()[j].block_count() {
                    return Err(Error::ShapeMismatch {
                        detail: format!(
                            "sequencing pairs part {i} ({} blocks) with part {j} ({} blocks)",
                            from.parts()[i].block_count(),
                            to.parts()[j].block_count()
                        ),
                    });
                }
            }
            s.to_vec()
        }
        None => {
            let mut seq = vec![usize::MAX; k];
            let mut taken = vec![false; k];
            for (i, part) in from.parts().iter().enumerate() {
                let want = part.block_count();
                let j = (0..k)
                    .find(|&j| !taken[j] && to.parts()[j].block_count() == want)
                    .ok_or_else(|| Error::ShapeMismatch {
                        detail: "irreducible factor multisets differ".into(),
                    })?;
                taken[j] = true;
                seq[i] = j;
            }
            seq
        }
    };
    let n = from.ground().size() as usize;
    // block-index coordinates of each point in every part
    let coords = |tuple: &FactorTuple, reorder: Option<&[usize]>| -> Vec<Vec<usize>> {
        let mut maps: Vec<Vec<usize>> = Vec::new();
        for part in tuple.parts() {
            let mut m = vec![0usize; n];
            for (bi, &b) in part.blocks().iter().enumerate() {
                for p in bits(b) {
                    m[p as usize] = bi;
                }
            }
            maps.push(m);
        }
        (0..n)
            .map(|p| {
                (0..maps.len())
                    .map(|i| maps[reorder.map(|r| r[i]).unwrap_or(i)][p])
                    .collect()
            })
            .collect()
    };
    let from_coords = coords(from, None);
    let to_coords = coords(to, Some(&seq));
    let mut lookup = std::collections::HashMap::new();
    for (p, c) in from_coords.iter().enumerate() {
        lookup.insert(c.clone(), p as u32);
    }
    let pullback: Vec<u32> = to_coords
        .iter()
        .map(|c| *lookup.get(c).expect("coordinates are bijective"))
        .collect();
    // pullback sends x to the `from`-point sharing x's aligned coordinates;
    // its inverse pushes blocks of `from` onto blocks of `to`
    PointPermutation::new(pullback).map(|p| p.inverse())
}

/// Exact order of the automorphism group of an enumerated structure.
///
/// A horizontal sum of isomorphic components contributes the component
/// order raised to the component count times the factorial of the count;
/// connected structures of at most 64 atoms are counted by backtracking
/// over incidence-preserving atom maps.
pub fn aut_order(s: &OmpStructure) -> Result<BigUint> {
    if s.n_atoms() == 0 {
        return Ok(BigUint::one());
    }
    let (components, isomorphic) = horizontal_sum_decomposition(s);
    if components.len() > 1 {
        if !isomorphic {
            return Err(Error::Unsupported {
                detail: "horizontal summands are not pairwise isomorphic".into(),
            });
        }
        let count = components.len() as u64;
        let local = component_aut_order(s, &components[0])?;
        return Ok(BigUint::from(local).pow(count as u32) * factorial(count));
    }
    if s.n_atoms() > 64 {
        return Err(Error::SizeGuard {
            size: s.n_atoms(),
            cap: 64,
        });
    }
    Ok(BigUint::from(count_incidence_automorphisms(
        s.n_atoms(),
        s.blocks(),
    )))
}

fn component_aut_order(s: &OmpStructure, comp: &crate::omp::Component) -> Result<u64> {
    if comp.atoms.len() > 64 {
        return Err(Error::SizeGuard {
            size: comp.atoms.len(),
            cap: 64,
        });
    }
    let pos: std::collections::HashMap<usize, usize> = comp
        .atoms
        .iter()
        .enumerate()
        .map(|(i, &a)| (a, i))
        .collect();
    let blocks: Vec<Vec<usize>> = comp
        .blocks
        .iter()
        .map(|&b| s.blocks()[b].iter().map(|a| pos[a]).collect())
        .collect();
    Ok(count_incidence_automorphisms(comp.atoms.len(), &blocks))
}

/// Count atom permutations that carry blocks onto blocks. For the
/// structures here these are exactly the poset automorphisms: the coatom
/// layer is determined through the complement by the atom map.
pub fn count_incidence_automorphisms(n_atoms: usize, blocks: &[Vec<usize>]) -> u64 {
    let block_set: std::collections::HashSet<Vec<usize>> = blocks
        .iter()
        .map(|b| {
            let mut b = b.clone();
            b.sort_unstable();
            b
        })
        .collect();
    let mut common = vec![vec![0u8; n_atoms]; n_atoms];
    for block in blocks {
        for (i, &a) in block.iter().enumerate() {
            for &b in block.iter().skip(i + 1) {
                common[a][b] += 1;
                common[b][a] += 1;
            }
        }
    }
    let mut atom_blocks: Vec<Vec<usize>> = vec![Vec::new(); n_atoms];
    for (bi, block) in blocks.iter().enumerate() {
        for &a in block {
            atom_blocks[a].push(bi);
        }
    }
    let degree: Vec<usize> = atom_blocks.iter().map(|v| v.len()).collect();

    struct Ctx<'a> {
        n_atoms: usize,
        degree: &'a [usize],
        common: &'a [Vec<u8>],
        blocks: &'a [Vec<usize>],
        atom_blocks: &'a [Vec<usize>],
        block_set: &'a std::collections::HashSet<Vec<usize>>,
    }

    fn extend(ctx: &Ctx, next: usize, image: &mut Vec<usize>, used: &mut Vec<bool>) -> u64 {
        if next == ctx.n_atoms {
            return 1;
        }
        let mut count = 0;
        'candidates: for cand in 0..ctx.n_atoms {
            if used[cand] || ctx.degree[cand] != ctx.degree[next] {
                continue;
            }
            for prev in 0..next {
                if ctx.common[next][prev] != ctx.common[cand][image[prev]] {
                    continue 'candidates;
                }
            }
            // a block whose atoms are now all assigned must land on a block
            for &bi in &ctx.atom_blocks[next] {
                let block = &ctx.blocks[bi];
                if block.iter().all(|&a| a <= next) {
                    let mut mapped: Vec<usize> = block
                        .iter()
                        .map(|&a| if a == next { cand } else { image[a] })
                        .collect();
                    mapped.sort_unstable();
                    if !ctx.block_set.contains(&mapped) {
                        continue 'candidates;
                    }
                }
            }
            image.push(cand);
            used[cand] = true;
            count += extend(ctx, next + 1, image, used);
            image.pop();
            used[cand] = false;
        }
        count
    }

    let ctx = Ctx {
        n_atoms,
        degree: &degree,
        common: &common,
        blocks,
        atom_blocks: &atom_blocks,
        block_set: &block_set,
    };
    let mut image = Vec::with_capacity(n_atoms);
    let mut used = vec![false; n_atoms];
    extend(&ctx, 0, &mut image, &mut used)
}

/// The order of the image of the permutation action: |X|! divided by the
/// phase-group order.
pub fn gamma_image_order(ground: GroundSet) -> Result<BigUint> {
    let kernel = phase_group(ground)?.len() as u64;
    Ok(factorial(ground.size() as u64) / BigUint::from(kernel))
}

/// Is the image of the permutation action a proper subgroup of the
/// automorphism group?
pub fn gamma_not_onto(ground: GroundSet, s: &OmpStructure) -> Result<bool> {
    Ok(gamma_image_order(ground)? < aut_order(s)?)
}

pub fn prime_ground(n: usize) -> bool {
    is_prime(n as u64)
}
