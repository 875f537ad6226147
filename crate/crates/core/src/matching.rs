//! Maximum bipartite matching via augmenting paths (Kuhn's algorithm).
//!
//! Left vertices are processed in ascending order and adjacency lists are
//! scanned as given, so the matching is deterministic.

/// Returns `matched[left] = Some(right)` for each matched left vertex.
pub fn max_bipartite_matching(adj: &[Vec<usize>], right_size: usize) -> Vec<Option<usize>> {
    let mut right_to_left: Vec<Option<usize>> = vec![None; right_size];
    let mut used = vec![false; adj.len()];

    fn try_augment(
        v: usize,
        adj: &[Vec<usize>],
        used: &mut [bool],
        right_to_left: &mut [Option<usize>],
    ) -> bool {
        if used[v] {
            return false;
        }
        used[v] = true;
        for &to in &adj[v] {
            let free = match right_to_left[to] {
                None => true,
                Some(owner) => try_augment(owner, adj, used, right_to_left),
            };
            if free {
                right_to_left[to] = Some(v);
                return true;
            }
        }
        false
    }

    for v in 0..adj.len() {
        used.iter_mut().for_each(|u| *u = false);
        try_augment(v, adj, &mut used, &mut right_to_left);
    }

    let mut matched = vec![None; adj.len()];
    for (right, owner) in right_to_left.iter().enumerate() {
        if let Some(left) = owner {
            matched[*left] = Some(right);
        }
    }
    matched
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_matching_on_cycle() {
        let adj = vec![vec![0, 1], vec![1, 2], vec![2, 0]];
        let m = max_bipartite_matching(&adj, 3);
        assert!(m.iter().all(|x| x.is_some()));
        let mut rights: Vec<usize> = m.iter().map(|x| x.unwrap()).collect();
        rights.sort_unstable();
        assert_eq!(rights, vec![0, 1, 2]);
    }

    #[test]
    fn deficient_side_leaves_vertex_unmatched() {
        let adj = vec![vec![0], vec![0]];
        let m = max_bipartite_matching(&adj, 1);
        assert_eq!(m.iter().filter(|x| x.is_some()).count(), 1);
        // least-index preference: vertex 0 wins
        assert_eq!(m[0], Some(0));
    }
}
