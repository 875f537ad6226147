//! Canonical forms of small vertex-colored graphs by iterative refinement
//! with individualization backtracking. Intended for incidence graphs of a
//! few dozen vertices.

/// Undirected graph with initial vertex colors.
#[derive(Debug, Clone)]
pub struct ColoredGraph {
    n: usize,
    adj: Vec<Vec<usize>>,
    colors: Vec<u32>,
}

impl ColoredGraph {
    pub fn new(adj: Vec<Vec<usize>>, colors: Vec<u32>) -> Self {
        let n = adj.len();
        assert_eq!(colors.len(), n);
        ColoredGraph { n, adj, colors }
    }
}

/// Refine colors by neighbor-color multisets until stable; returns dense
/// color ids.
fn refine(g: &ColoredGraph, colors: &[u32]) -> Vec<u32> {
    let mut colors = colors.to_vec();
    loop {
        let mut keys: Vec<(u32, Vec<u32>)> = Vec::with_capacity(g.n);
        for v in 0..g.n {
            let mut neigh: Vec<u32> = g.adj[v].iter().map(|&u| colors[u]).collect();
            neigh.sort_unstable();
            keys.push((colors[v], neigh));
        }
        let mut sorted: Vec<&(u32, Vec<u32>)> = keys.iter().collect();
        sorted.sort();
        sorted.dedup();
        let next: Vec<u32> = keys
            .iter()
            .map(|k| sorted.binary_search(&k).unwrap() as u32)
            .collect();
        let classes = |cs: &[u32]| {
            let mut v: Vec<u32> = cs.to_vec();
            v.sort_unstable();
            v.dedup();
            v.len()
        };
        if classes(&next) == classes(&colors) {
            return next;
        }
        colors = next;
    }
}

/// Certificate of the graph under a complete (discrete) coloring: the
/// color sequence followed by adjacency bit rows in color order.
fn certificate(g: &ColoredGraph, colors: &[u32]) -> Vec<u64> {
    let mut order: Vec<usize> = (0..g.n).collect();
    order.sort_by_key(|&v| colors[v]);
    let mut position = vec![0usize; g.n];
    for (i, &v) in order.iter().enumerate() {
        position[v] = i;
    }
    let words = g.n.div_ceil(64);
    let mut cert = Vec::with_capacity(1 + g.n + g.n * words);
    cert.push(g.n as u64);
    for &v in &order {
        cert.push(g.colors[v] as u64);
    }
    for &v in &order {
        let mut row = vec![0u64; words];
        for &u in &g.adj[v] {
            let p = position[u];
            row[p / 64] |= 1 << (p % 64);
        }
        cert.extend(row);
    }
    cert
}

fn search(g: &ColoredGraph, colors: Vec<u32>, best: &mut Option<Vec<u64>>) {
    let colors = refine(g, &colors);
    // find the smallest non-singleton color class
    let mut by_color: std::collections::BTreeMap<u32, Vec<usize>> = Default::default();
    for (v, &c) in colors.iter().enumerate() {
        by_color.entry(c).or_default().push(v);
    }
    let target = by_color.values().find(|cell| cell.len() > 1);
    match target {
        None => {
            let cert = certificate(g, &colors);
            if best.as_ref().map(|b| cert < *b).unwrap_or(true) {
                *best = Some(cert);
            }
        }
        Some(cell) => {
            let cell = cell.clone();
            for v in cell {
                let mut next = colors.clone();
                // individualize: split v off from its class
                for c in next.iter_mut() {
                    *c *= 2;
                }
                next[v] += 1;
                search(g, next, best);
            }
        }
    }
}

/// Lexicographically least certificate over all labelings respecting the
/// initial colors. Two graphs have equal certificates iff they are
/// isomorphic by a color-preserving map.
pub fn canonical_form(g: &ColoredGraph) -> Vec<u64> {
    let mut best = None;
    search(g, g.colors.clone(), &mut best);
    best.expect("search visits at least one leaf")
}
