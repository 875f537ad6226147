//! The claim ledger: every verified statement about the structures gets a
//! stable id, an expected value, a computed value, and a status. Claims run
//! deterministically under a seed and the ledger is assembled in id order.

use std::time::Instant;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use factx_core::autom::{
    aut_order, gamma_not_onto, phase_group, PointPermutation,
};
use factx_core::counting::{
    cf_atoms_prime_power, cf_blocks_per_atom, cf_blocks_prime_power, cf_companions,
    cf_factor_pairs, cf_factor_relations, cf_zp_block_counts, factorial,
};
use factx_core::error::{Error, Result};
use factx_core::omp::{
    blocks_through_atom_27, enumerate_atoms, enumerate_blocks, horizontal_sum_decomposition,
    mo_index, verify_omp_axioms, OmpStructure,
};
use factx_core::partition::{enumerate_companions, enumerate_regular, GroundSet};
use factx_core::req27::{
    check_xalpha_conditions, collapses_containing, collapses_share_block, end_to_end_roundtrip,
    large_upper_bound_count, recognize_collapse, shape_template_pair, upper_bound_table,
};
use factx_core::slab27::{
    build_slab, build_y_slab, build_z, chain_same_first, chain_same_second, near_first,
    near_second, random_atom_with_first, random_permuting_smalls, random_small, recover_slab,
    slab_orthogonality, SmallRel,
};
use factx_core::states::{count_gfp_measures, solve_states, solve_states_27_local};
use factx_core::vecfact::fact_v_structure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClaimStatus {
    Pass,
    Fail,
    /// Reserved for documented conflicts internal to the source material:
    /// the claim reports both values and is never silently reconciled.
    Discrepancy,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClaimRecord {
    pub id: String,
    pub paper_location: String,
    pub expected: Value,
    pub computed: Value,
    pub status: ClaimStatus,
    pub runtime_ms: u128,
}

pub struct ClaimOutcome {
    pub expected: Value,
    pub computed: Value,
    pub status: ClaimStatus,
}

impl ClaimOutcome {
    fn checked(expected: Value, computed: Value) -> Self {
        let status = if expected == computed {
            ClaimStatus::Pass
        } else {
            ClaimStatus::Fail
        };
        ClaimOutcome {
            expected,
            computed,
            status,
        }
    }
}

pub struct Claim {
    pub id: &'static str,
    pub paper_location: &'static str,
    /// Acceptance criteria this claim covers.
    pub criteria: &'static [u32],
    pub run: fn(u64) -> Result<ClaimOutcome>,
}

fn claim_seed(global: u64, id: &str) -> u64 {
    // FNV-1a over the id, mixed with the global seed
    let mut h: u64 = 0xcbf29ce484222325;
    for b in id.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h ^ global
}

fn big(v: &BigUint) -> Value {
    json!(v.to_string())
}

// ---------------------------------------------------------------- claims

fn claim_counting_small(_seed: u64) -> Result<ClaimOutcome> {
    let mut computed = serde_json::Map::new();
    let mut expected = serde_json::Map::new();
    for (m, n) in [
        (1u32, 4u32),
        (2, 2),
        (4, 1),
        (1, 6),
        (2, 3),
        (3, 2),
        (6, 1),
        (1, 8),
        (2, 4),
        (4, 2),
        (8, 1),
        (1, 9),
        (3, 3),
        (9, 1),
    ] {
        let ground = GroundSet::new((m * n) as usize)?;
        let mut relations = 0u64;
        let mut pairs = 0u64;
        let mut companions_ok = true;
        let want_comp = cf_companions(m as u64, n as u64).to_u64().unwrap();
        for p in enumerate_regular(ground, m, n)? {
            relations += 1;
            let c = enumerate_companions(&p)?.count() as u64;
            companions_ok &= c == want_comp;
            pairs += c;
        }
        let key = format!("{m}x{n}");
        computed.insert(
            key.clone(),
            json!({"relations": relations, "pairs": pairs, "companions_uniform": companions_ok}),
        );
        expected.insert(
            key,
            json!({
                "relations": cf_factor_relations(m as u64, n as u64).to_u64().unwrap(),
                "pairs": cf_factor_pairs(m as u64, n as u64).to_u64().unwrap(),
                "companions_uniform": true,
            }),
        );
    }
    Ok(ClaimOutcome::checked(
        Value::Object(expected),
        Value::Object(computed),
    ))
}

fn claim_mo_small(_seed: u64) -> Result<ClaimOutcome> {
    let mut computed = serde_json::Map::new();
    for (size, cap) in [(4usize, 1000usize), (6, 10_000), (9, 100_000)] {
        let s = OmpStructure::build_fact_set(GroundSet::new(size)?, cap)?;
        computed.insert(
            size.to_string(),
            json!({"mo": mo_index(&s), "atoms": s.n_atoms()}),
        );
    }
    let expected = json!({
        "4": {"mo": 3, "atoms": 6},
        "6": {"mo": 60, "atoms": 120},
        "9": {"mo": 5040, "atoms": 10080},
    });
    Ok(ClaimOutcome::checked(expected, Value::Object(computed)))
}

fn claim_fact8(_seed: u64) -> Result<ClaimOutcome> {
    let s = OmpStructure::build_fact_set(GroundSet::new(8)?, 100_000)?;
    let per_atom_uniform = (0..s.n_atoms()).all(|a| s.blocks_of_atom(a).len() == 3);
    let report = verify_omp_axioms(&s.poset_table())?;
    let (components, isomorphic) = horizontal_sum_decomposition(&s);
    let sizes_ok = components
        .iter()
        .all(|c| c.atoms.len() == 28 && c.blocks.len() == 28);
    let computed = json!({
        "atoms": s.n_atoms(),
        "blocks": s.n_blocks(),
        "blocks_per_atom_3": per_atom_uniform,
        "axioms": report.all_ok(),
        "components": components.len(),
        "components_28_28": sizes_ok,
        "components_isomorphic": isomorphic,
    });
    let expected = json!({
        "atoms": 840, "blocks": 840, "blocks_per_atom_3": true, "axioms": true,
        "components": 30, "components_28_28": true, "components_isomorphic": true,
    });
    Ok(ClaimOutcome::checked(expected, computed))
}

fn claim_factv(_seed: u64) -> Result<ClaimOutcome> {
    let mut computed = serde_json::Map::new();
    for (q, k) in [(2u64, 3u32), (3, 3)] {
        let s = fact_v_structure(q, k)?;
        let per_atom: std::collections::HashSet<usize> =
            (0..s.n_atoms()).map(|a| s.blocks_of_atom(a).len()).collect();
        let report = verify_omp_axioms(&s.poset_table())?;
        computed.insert(
            format!("{q},{k}"),
            json!({
                "atoms": s.n_atoms(),
                "blocks": s.n_blocks(),
                "per_atom": per_atom.into_iter().collect::<Vec<_>>(),
                "axioms": report.all_ok(),
            }),
        );
    }
    let expected = json!({
        "2,3": {"atoms": 28, "blocks": 28, "per_atom": [3], "axioms": true},
        "3,3": {"atoms": 117, "blocks": 234, "per_atom": [6], "axioms": true},
    });
    Ok(ClaimOutcome::checked(expected, Value::Object(computed)))
}

fn claim_phase(_seed: u64) -> Result<ClaimOutcome> {
    let mut computed = serde_json::Map::new();
    for size in [2usize, 3, 4, 5, 6, 7, 8, 9] {
        let kernel = phase_group(GroundSet::new(size)?)?;
        computed.insert(size.to_string(), json!(kernel.len()));
    }
    let expected = json!({
        "2": 2, "3": 6, "4": 4, "5": 120, "6": 1, "7": 5040, "8": 1, "9": 1,
    });
    Ok(ClaimOutcome::checked(expected, Value::Object(computed)))
}

fn claim_autorder(_seed: u64) -> Result<ClaimOutcome> {
    let mo3 = OmpStructure::build_fact_set(GroundSet::new(4)?, 1000)?;
    let z23 = fact_v_structure(2, 3)?;
    let fact8 = OmpStructure::build_fact_set(GroundSet::new(8)?, 100_000)?;
    let fact8_order = aut_order(&fact8)?;
    let mut not_onto = serde_json::Map::new();
    for size in [4usize, 6, 8, 9] {
        let s = OmpStructure::build_fact_set(GroundSet::new(size)?, 100_000)?;
        not_onto.insert(size.to_string(), json!(gamma_not_onto(GroundSet::new(size)?, &s)?));
    }
    let computed = json!({
        "mo3": big(&aut_order(&mo3)?),
        "z23": big(&aut_order(&z23)?),
        "fact8": big(&fact8_order),
        "image_not_onto": Value::Object(not_onto),
    });
    let expected = json!({
        "mo3": "48",
        "z23": "336",
        "fact8": big(&(BigUint::from(336u32).pow(30) * factorial(30))),
        "image_not_onto": {"4": true, "6": true, "8": true, "9": true},
    });
    Ok(ClaimOutcome::checked(expected, computed))
}

fn claim_states(_seed: u64) -> Result<ClaimOutcome> {
    let mut computed = serde_json::Map::new();
    for (name, s) in [
        ("z23", fact_v_structure(2, 3)?),
        ("z33", fact_v_structure(3, 3)?),
        ("fact8", OmpStructure::build_fact_set(GroundSet::new(8)?, 100_000)?),
    ] {
        let sol = solve_states(&s);
        computed.insert(
            name.to_string(),
            json!({
                "unique": sol.unique(),
                "constant": sol.constant_value.map(|v| v.to_string()),
                "valid_state": sol.unique_solution_is_state,
            }),
        );
    }
    for (name, size) in [("mo3", 4usize), ("mo60", 6)] {
        let s = OmpStructure::build_fact_set(GroundSet::new(size)?, 100_000)?;
        let sol = solve_states(&s);
        computed.insert(
            name.to_string(),
            json!({"consistent": sol.consistent, "positive_nullity": sol.nullity > 0}),
        );
    }
    let expected = json!({
        "z23": {"unique": true, "constant": "1/3", "valid_state": true},
        "z33": {"unique": true, "constant": "1/3", "valid_state": true},
        "fact8": {"unique": true, "constant": "1/3", "valid_state": true},
        "mo3": {"consistent": true, "positive_nullity": true},
        "mo60": {"consistent": true, "positive_nullity": true},
    });
    Ok(ClaimOutcome::checked(expected, Value::Object(computed)))
}

fn claim_states_27_local(seed: u64) -> Result<ClaimOutcome> {
    let reports = solve_states_27_local(50, seed)?;
    let all_ok = reports.iter().all(|r| r.ok());
    Ok(ClaimOutcome::checked(
        json!({"samples": 50, "all_forced_to_third": true}),
        json!({"samples": reports.len(), "all_forced_to_third": all_ok}),
    ))
}

fn claim_measures(_seed: u64) -> Result<ClaimOutcome> {
    let z23 = fact_v_structure(2, 3)?;
    let z33 = fact_v_structure(3, 3)?;
    let computed = json!({
        "z23_p2": big(&count_gfp_measures(&z23, 2)?.0),
        "z23_p3": big(&count_gfp_measures(&z23, 3)?.0),
        "z33_p3": big(&count_gfp_measures(&z33, 3)?.0),
    });
    let expected = json!({
        "z23_p2": "512",
        "z23_p3": "3",
        "z33_p3": "19683",
    });
    Ok(ClaimOutcome::checked(expected, computed))
}

fn claim_measures_gf4(_seed: u64) -> Result<ClaimOutcome> {
    // three-dimensional space over the four-element field, two-valued
    // measures: p divides k, so the count is p * k^8
    let v43 = fact_v_structure(4, 3)?;
    let (count, nullity) = count_gfp_measures(&v43, 2)?;
    Ok(ClaimOutcome::checked(
        json!({"count": "131072", "nullity": 17}),
        json!({"count": count.to_string(), "nullity": nullity}),
    ))
}

fn claim_zp_blocks(_seed: u64) -> Result<ClaimOutcome> {
    let (t2, a2, b2) = cf_zp_block_counts(2)?;
    let (_, a3, b3) = cf_zp_block_counts(3)?;
    let computed = json!({
        "p2": [t2.to_string(), a2.to_string(), b2.to_string()],
        "p3_per_atom": a3.to_string(),
        "p3_per_block": b3.to_string(),
    });
    let expected = json!({
        "p2": ["30", "1", "1"],
        "p3_per_atom": "840",
        "p3_per_block": "1",
    });
    Ok(ClaimOutcome::checked(expected, computed))
}

fn claim_slabs27(seed: u64) -> Result<ClaimOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut slab_failures = 0usize;
    for _ in 0..100 {
        let (a, b) = random_permuting_smalls(&mut rng);
        let x = build_slab(&a, &b)?;
        let y = build_y_slab(&a, &b)?;
        let ok = x.atoms.len() == 36
            && y.atoms.len() == 36
            && slab_orthogonality(&x, &y)
            && recover_slab(&x.atoms).map(|(ra, rb)| ra == a && rb == b).unwrap_or(false);
        if !ok {
            slab_failures += 1;
        }
    }
    let mut chain_failures = 0usize;
    for _ in 0..100 {
        let a = random_small(&mut rng);
        let x = random_atom_with_first(&a, &mut rng);
        let y = random_atom_with_first(&a, &mut rng);
        let chain = chain_same_first(&x, &y)?;
        let ok = if x == y {
            chain.is_empty()
        } else {
            chain.first() == Some(&x)
                && chain.last() == Some(&y)
                && chain.windows(2).all(|w| near_first(&w[0], &w[1]).unwrap_or(false))
        };
        if !ok {
            chain_failures += 1;
        }
        // same-second chains through the complementary atoms
        let xc = x.orthocomplement();
        let base = factx_core::slab27::canonical_atom_for_large(
            &factx_core::slab27::LargeRel::new(xc.first().clone())?,
        );
        let other = factx_core::slab27::shifted_atom_for_large(
            &factx_core::slab27::LargeRel::new(xc.first().clone())?,
        );
        let chain = chain_same_second(&base, &other)?;
        let ok = chain.first() == Some(&base)
            && chain.last() == Some(&other)
            && chain.windows(2).all(|w| near_second(&w[0], &w[1]).unwrap_or(false));
        if !ok {
            chain_failures += 1;
        }
    }
    Ok(ClaimOutcome::checked(
        json!({"slab_failures": 0, "chain_failures": 0}),
        json!({"slab_failures": slab_failures, "chain_failures": chain_failures}),
    ))
}

fn claim_z_size(seed: u64) -> Result<ClaimOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sizes = std::collections::BTreeSet::new();
    for _ in 0..25 {
        let (a, b) = random_permuting_smalls(&mut rng);
        sizes.insert(build_z(&a, &b)?.len());
    }
    let computed: Vec<usize> = sizes.into_iter().collect();
    // the printed source value is 32*32 = 1024; the set defined by the
    // source's own construction has 36*36 = 1296 members (each pair of
    // slab second spots meets in a distinct valid first spot). Both values
    // are reported and the conflict is never silently reconciled.
    let expected = json!({"printed": 1024, "pair_bijection": 1296});
    let status = if computed == vec![36 * 36] {
        ClaimStatus::Discrepancy
    } else {
        ClaimStatus::Fail
    };
    Ok(ClaimOutcome {
        expected,
        computed: json!({ "observed_sizes": computed }),
        status,
    })
}

fn claim_table27(seed: u64) -> Result<ClaimOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    for (shape, want) in upper_bound_table() {
        let (a, b) = shape_template_pair(&shape)?;
        for _ in 0..100 {
            let alpha = PointPermutation::random(27, &mut rng);
            let fa = SmallRel::new(a.partition().apply_permutation(alpha.image()))?;
            let fb = SmallRel::new(b.partition().apply_permutation(alpha.image()))?;
            let (s, count) = large_upper_bound_count(&fa, &fb)?;
            if s != shape || count != want {
                failures.push(format!("{shape}: got {s} = {count}"));
            }
        }
    }
    Ok(ClaimOutcome::checked(
        json!({"entries": 12, "pairs_per_entry": 100, "failures": Vec::<String>::new()}),
        json!({"entries": 12, "pairs_per_entry": 100, "failures": failures}),
    ))
}

fn claim_collapses27(seed: u64) -> Result<ClaimOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // collapse structure at sampled small relations
    let mut collapse_failures = 0usize;
    for _ in 0..5 {
        let a = random_small(&mut rng);
        let collapses = collapses_containing(&a);
        if collapses.len() != 36 {
            collapse_failures += 1;
            continue;
        }
        for c in &collapses {
            if c.members.len() != 10 || recognize_collapse(&c.members).is_err() {
                collapse_failures += 1;
            }
        }
    }
    // sharing matches the index criterion at one sampled relation
    let a = random_small(&mut rng);
    let collapses = collapses_containing(&a);
    let mut pairs = Vec::new();
    for i in 0..9 {
        for j in i + 1..9 {
            pairs.push((i, j));
        }
    }
    let mut share_failures = 0usize;
    for x in 0..36 {
        for y in x + 1..36 {
            let (i, j) = pairs[x];
            let (m, n) = pairs[y];
            let overlap = i == m || i == n || j == m || j == n;
            if collapses_share_block(&collapses[x], &collapses[y])? != overlap {
                share_failures += 1;
            }
        }
    }
    // family conditions at 50 random (alpha, a)
    let mut xalpha_failures = 0usize;
    for t in 0..50 {
        let a = random_small(&mut rng);
        let alpha = a.partition().blocks()[rng.gen_range(0..9)];
        let report = check_xalpha_conditions(alpha, &a, seed ^ (t as u64))?;
        if !report.ok() {
            xalpha_failures += 1;
        }
    }
    Ok(ClaimOutcome::checked(
        json!({"collapse_failures": 0, "share_failures": 0, "xalpha_failures": 0}),
        json!({
            "collapse_failures": collapse_failures,
            "share_failures": share_failures,
            "xalpha_failures": xalpha_failures,
        }),
    ))
}

fn claim_roundtrip(seed: u64) -> Result<ClaimOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut recovered = 0usize;
    for _ in 0..20 {
        let alpha = PointPermutation::random(27, &mut rng);
        if end_to_end_roundtrip(&alpha)? == alpha {
            recovered += 1;
        }
    }
    Ok(ClaimOutcome::checked(
        json!({"trials": 20, "recovered": 20}),
        json!({"trials": 20, "recovered": recovered}),
    ))
}

fn claim_blocks_per_atom_27(_seed: u64) -> Result<ClaimOutcome> {
    let formula = cf_blocks_per_atom(3, 3)?;
    let identity = {
        // k B / A
        let b = cf_blocks_prime_power(3, 3)?;
        let a = cf_atoms_prime_power(3, 3)?;
        b * BigUint::from(3u32) / a
    };
    let blocks: Vec<Vec<u32>> = (0..9).map(|i| vec![3 * i, 3 * i + 1, 3 * i + 2]).collect();
    let small = factx_core::partition::Partition::from_point_blocks(
        GroundSet::new(27)?,
        &blocks,
    )?;
    let brute = blocks_through_atom_27(&small);
    // the printed example text says each atom is in 10080 blocks; the
    // closed form, the averaging identity, and the brute-force local count
    // all give 5040. Reported as a documented conflict.
    let computed = json!({
        "formula": formula.to_string(),
        "averaging_identity": identity.to_string(),
        "brute_force_local": brute,
    });
    let expected = json!({"printed_text": "10080", "formula": "5040"});
    let consistent =
        formula.to_string() == "5040" && identity.to_string() == "5040" && brute == 5040;
    Ok(ClaimOutcome {
        expected,
        computed,
        status: if consistent {
            ClaimStatus::Discrepancy
        } else {
            ClaimStatus::Fail
        },
    })
}

fn claim_omp_axiom3(_seed: u64) -> Result<ClaimOutcome> {
    // the standard orthomodular law passes; the alternative printed
    // reading of the third axiom fails, and both outcomes are reported
    let mut standard_ok = true;
    let mut alt_holds = true;
    let mut witness = None;
    for size in [4usize, 6, 8] {
        let s = OmpStructure::build_fact_set(GroundSet::new(size)?, 100_000)?;
        let report = verify_omp_axioms(&s.poset_table())?;
        standard_ok &= report.all_ok();
        alt_holds &= report.alt_condition_holds;
        if witness.is_none() {
            witness = report.alt_condition_witness.clone();
        }
    }
    let computed = json!({
        "standard_law": standard_ok,
        "printed_condition": alt_holds,
        "printed_condition_witness": witness,
    });
    let expected = json!({"standard_law": true, "printed_condition": true});
    let status = if standard_ok && !alt_holds {
        ClaimStatus::Discrepancy
    } else if standard_ok {
        ClaimStatus::Pass
    } else {
        ClaimStatus::Fail
    };
    Ok(ClaimOutcome {
        expected,
        computed,
        status,
    })
}

fn claim_unique_orthocomplementation(_seed: u64) -> Result<ClaimOutcome> {
    let z23 = fact_v_structure(2, 3)?;
    let count = factx_core::omp::enumerate_orthocomplementations(&z23.poset_table())?;
    // the three-block middle structure admits fifteen pairings
    let mo3 = OmpStructure::build_fact_set(GroundSet::new(4)?, 1000)?;
    let mo3_count = factx_core::omp::enumerate_orthocomplementations(&mo3.poset_table())?;
    Ok(ClaimOutcome::checked(
        json!({"z23": 1, "mo3": 15}),
        json!({"z23": count, "mo3": mo3_count}),
    ))
}

fn claim_atoms27_closed_form(_seed: u64) -> Result<ClaimOutcome> {
    Ok(ClaimOutcome::checked(
        json!("5001134190558105600000"),
        big(&cf_atoms_prime_power(3, 3)?),
    ))
}

fn claim_block_counts(_seed: u64) -> Result<ClaimOutcome> {
    let computed = json!({
        "4": enumerate_blocks(GroundSet::new(4)?)?.count(),
        "6": enumerate_blocks(GroundSet::new(6)?)?.count(),
        "8": enumerate_blocks(GroundSet::new(8)?)?.count(),
        "9": enumerate_blocks(GroundSet::new(9)?)?.count(),
        "atoms_8": enumerate_atoms(GroundSet::new(8)?).count(),
    });
    let expected = json!({"4": 3, "6": 60, "8": 840, "9": 5040, "atoms_8": 840});
    Ok(ClaimOutcome::checked(expected, computed))
}

/// The full claim registry, in ledger order.
pub fn registry() -> Vec<Claim> {
    vec![
        Claim {
            id: "sec1.omp_axiom3",
            paper_location: "sec1 definition of the poset axioms, third condition",
            criteria: &[13],
            run: claim_omp_axiom3,
        },
        Claim {
            id: "sec2.atoms27.closed_form",
            paper_location: "sec2 example: atom count for the 27-point set",
            criteria: &[14],
            run: claim_atoms27_closed_form,
        },
        Claim {
            id: "sec2.blocks",
            paper_location: "sec2 block counts at small sizes",
            criteria: &[],
            run: claim_block_counts,
        },
        Claim {
            id: "sec2.blocks_per_atom.27",
            paper_location: "sec2 example text vs the blocks-per-atom formula at 27",
            criteria: &[13],
            run: claim_blocks_per_atom_27,
        },
        Claim {
            id: "sec2.counting.small",
            paper_location: "sec2 factor relation / companion / pair formulas",
            criteria: &[1],
            run: claim_counting_small,
        },
        Claim {
            id: "sec2.fact8",
            paper_location: "sec2 example and horizontal-sum proposition at 8",
            criteria: &[3],
            run: claim_fact8,
        },
        Claim {
            id: "sec2.factv",
            paper_location: "sec2 example: subspace-pair structures at (2,3) and (3,3)",
            criteria: &[4],
            run: claim_factv,
        },
        Claim {
            id: "sec2.zpblocks",
            paper_location: "sec2 remark: linear-structure subalgebra counts",
            criteria: &[],
            run: claim_zp_blocks,
        },
        Claim {
            id: "sec3.autorder",
            paper_location: "sec3 automorphism-group orders and the image comparison",
            criteria: &[6],
            run: claim_autorder,
        },
        Claim {
            id: "sec3.mo.small",
            paper_location: "sec3 horizontal-sum classification at two prime factors",
            criteria: &[2],
            run: claim_mo_small,
        },
        Claim {
            id: "sec3.phase",
            paper_location: "sec3 phase-group propositions",
            criteria: &[5],
            run: claim_phase,
        },
        Claim {
            id: "sec4.slabs27",
            paper_location: "sec4 slab construction, recovery, nearness chains",
            criteria: &[9],
            run: claim_slabs27,
        },
        Claim {
            id: "sec4.z",
            paper_location: "sec4 completion-set size (printed 32*32)",
            criteria: &[9],
            run: claim_z_size,
        },
        Claim {
            id: "sec5.collapses27",
            paper_location: "sec5 collapse lemmas and family conditions",
            criteria: &[11],
            run: claim_collapses27,
        },
        Claim {
            id: "sec5.roundtrip",
            paper_location: "sec5 theorem: the four groups are isomorphic",
            criteria: &[12],
            run: claim_roundtrip,
        },
        Claim {
            id: "sec5.table27",
            paper_location: "sec5 upper-bound table, all twelve entries",
            criteria: &[10],
            run: claim_table27,
        },
        Claim {
            id: "sec6.measures",
            paper_location: "sec6 group-valued measure counts",
            criteria: &[8],
            run: claim_measures,
        },
        Claim {
            id: "sec6.measures.gf4",
            paper_location: "sec6 measure count over the four-element field",
            criteria: &[],
            run: claim_measures_gf4,
        },
        Claim {
            id: "sec6.unique_orthocomplementation",
            paper_location: "sec6 unique orthocomplementation on the 28-atom structure",
            criteria: &[],
            run: claim_unique_orthocomplementation,
        },
        Claim {
            id: "sec6.states",
            paper_location: "sec6 unique constant state propositions",
            criteria: &[7],
            run: claim_states,
        },
        Claim {
            id: "sec6.states27",
            paper_location: "sec6 constant state at 27 through local subalgebras",
            criteria: &[],
            run: claim_states_27_local,
        },
    ]
}

/// Simple glob: `*` matches any run of characters.
pub fn glob_match(pattern: &str, text: &str) -> bool {
    fn inner(p: &[u8], t: &[u8]) -> bool {
        match (p.first(), t.first()) {
            (None, None) => true,
            (Some(b'*'), _) => {
                inner(&p[1..], t) || (!t.is_empty() && inner(p, &t[1..]))
            }
            (Some(c), Some(d)) if c == d => inner(&p[1..], &t[1..]),
            _ => false,
        }
    }
    inner(pattern.as_bytes(), text.as_bytes())
}

/// Run all claims matching the filter under the seed, in a worker pool;
/// the ledger comes back in id order regardless of completion order.
pub fn run_claims(filter: &str, seed: u64, threads: usize) -> Result<Vec<ClaimRecord>> {
    let claims: Vec<Claim> = registry()
        .into_iter()
        .filter(|c| glob_match(filter, c.id))
        .collect();
    if claims.is_empty() {
        return Err(Error::Unsupported {
            detail: format!("no claim id matches {filter:?}"),
        });
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Unsupported {
            detail: format!("thread pool: {e}"),
        })?;
    let mut records: Vec<ClaimRecord> = pool.install(|| {
        claims
            .par_iter()
            .map(|claim| {
                let start = Instant::now();
                let outcome = (claim.run)(claim_seed(seed, claim.id));
                let runtime_ms = start.elapsed().as_millis();
                match outcome {
                    Ok(out) => ClaimRecord {
                        id: claim.id.to_string(),
                        paper_location: claim.paper_location.to_string(),
                        expected: out.expected,
                        computed: out.computed,
                        status: out.status,
                        runtime_ms,
                    },
                    Err(err) => ClaimRecord {
                        id: claim.id.to_string(),
                        paper_location: claim.paper_location.to_string(),
                        expected: json!("run to completion"),
                        computed: json!(format!("error: {err}")),
                        status: ClaimStatus::Fail,
                        runtime_ms,
                    },
                }
            })
            .collect()
    });
    records.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(records)
}

/// Map of acceptance criteria to the claims that cover them.
pub fn criterion_coverage() -> Vec<(u32, Vec<&'static str>)> {
    let mut map: std::collections::BTreeMap<u32, Vec<&'static str>> = Default::default();
    for claim in registry() {
        for &c in claim.criteria {
            map.entry(c).or_default().push(claim.id);
        }
    }
    map.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn glob_basics() {
        assert!(glob_match("sec2.*", "sec2.fact8"));
        assert!(glob_match("*", "anything"));
        assert!(glob_match("sec5.roundtrip", "sec5.roundtrip"));
        assert!(!glob_match("sec2.*", "sec3.phase"));
        assert!(glob_match("*.z", "sec4.z"));
    }

    #[test]
    fn registry_ids_unique_and_sorted_coverage() {
        let reg = registry();
        let mut ids: Vec<&str> = reg.iter().map(|c| c.id).collect();
        let n = ids.len();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), n, "claim ids must be unique");
        // every acceptance criterion is covered
        let covered: std::collections::BTreeSet<u32> = criterion_coverage()
            .into_iter()
            .map(|(c, _)| c)
            .collect();
        for criterion in 1..=14u32 {
            assert!(covered.contains(&criterion), "criterion {criterion} uncovered");
        }
    }

    #[test]
    fn quick_claims_pass() {
        for id in ["sec2.atoms27.closed_form", "sec2.zpblocks"] {
            let records = run_claims(id, 1, 2).unwrap();
            assert_eq!(records.len(), 1);
            assert_eq!(records[0].status, ClaimStatus::Pass, "{id}");
        }
    }

    #[test]
    fn ledger_reproducible_modulo_timing() {
        let mut a = run_claims("sec2.blocks", 7, 2).unwrap();
        let mut b = run_claims("sec2.blocks", 7, 4).unwrap();
        for r in a.iter_mut().chain(b.iter_mut()) {
            r.runtime_ms = 0;
        }
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }
}
