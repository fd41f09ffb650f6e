//! Smallest set of smallest rings.
//!
//! Candidate cycles come from Horton's construction (one cycle per vertex and
//! edge, built from BFS shortest paths rooted at the vertex). Candidates are
//! sorted by size, then by sorted atom list, and accepted greedily while they
//! stay linearly independent over GF(2) in edge space, until the cycle rank
//! `E - V + C` is reached.

use std::collections::{HashSet, VecDeque};

use super::Bond;

type EdgeSet = Vec<u64>;

pub(crate) fn sssr(n: usize, bonds: &[Bond], adjacency: &[Vec<(usize, usize)>]) -> Vec<Vec<usize>> {
    // Only ring bonds can lie on a cycle; dropping bridges keeps the
    // candidate set proportional to the ring systems.
    let pairs: Vec<(usize, usize)> = bonds.iter().map(|b| (b.a, b.b)).collect();
    let ring_bond = ring_bond_flags(n, &pairs);
    let radj: Vec<Vec<(usize, usize)>> = adjacency
        .iter()
        .map(|nb| nb.iter().copied().filter(|&(_, b)| ring_bond[b]).collect())
        .collect();
    let ring_atoms = radj.iter().filter(|nb| !nb.is_empty()).count();
    let ring_bonds = ring_bond.iter().filter(|&&r| r).count();
    if ring_bonds == 0 {
        return Vec::new();
    }
    let systems = count_components(n, &radj) - (n - ring_atoms);
    let rank = ring_bonds + systems - ring_atoms;
    let words = bonds.len().div_ceil(64);

    let mut seen: HashSet<EdgeSet> = HashSet::new();
    let mut candidates: Vec<(Vec<usize>, Vec<usize>, EdgeSet)> = Vec::new();
    let mut on_path = vec![false; n];
    for root in 0..n {
        if radj[root].is_empty() {
            continue;
        }
        // BFS tree; neighbors expanded in index order so parent choice is
        // deterministic.
        let par = bfs_parents(root, &radj);
        for (bi, bond) in bonds.iter().enumerate() {
            if !ring_bond[bi] {
                continue;
            }
            let (u, v) = (bond.a, bond.b);
            if par[u] == usize::MAX || par[v] == usize::MAX {
                continue;
            }
            let pu = path_to_root(u, root, &par);
            let pv = path_to_root(v, root, &par);
            // paths must meet only at the root
            for &x in &pu {
                on_path[x] = true;
            }
            let shared = pv.iter().filter(|&&x| on_path[x]).count();
            for &x in &pu {
                on_path[x] = false;
            }
            if shared != 1 {
                continue;
            }
            // cycle: root .. u, v .. root
            let mut cycle: Vec<usize> = pu.iter().rev().copied().collect();
            cycle.extend(pv.iter().take(pv.len() - 1).copied());
            if cycle.len() < 3 {
                continue;
            }
            let Some(edges) = edge_set(&cycle, &radj, words) else {
                continue;
            };
            if seen.insert(edges.clone()) {
                let mut key = cycle.clone();
                key.sort_unstable();
                candidates.push((key, cycle, edges));
            }
        }
    }

    candidates.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));

    let mut basis: Vec<(usize, EdgeSet)> = Vec::new(); // (pivot bit, reduced vector)
    let mut rings = Vec::new();
    for (_, cycle, edges) in candidates {
        if rings.len() == rank {
            break;
        }
        let mut v = edges;
        for (pivot, row) in &basis {
            if bit(&v, *pivot) {
                xor(&mut v, row);
            }
        }
        if let Some(pivot) = first_bit(&v) {
            // keep the basis reduced so later reductions are single passes
            for (_, row) in basis.iter_mut() {
                if bit(row, pivot) {
                    xor(row, &v);
                }
            }
            basis.push((pivot, v));
            rings.push(normalize_cycle(cycle));
        }
    }
    rings
}

/// Marks bonds that lie on at least one cycle (i.e. are not bridges).
pub(crate) fn ring_bond_flags(n: usize, bonds: &[(usize, usize)]) -> Vec<bool> {
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (i, &(a, b)) in bonds.iter().enumerate() {
        adj[a].push((b, i));
        adj[b].push((a, i));
    }
    // Tarjan bridge finding, iterative
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut bridge = vec![false; bonds.len()];
    let mut time = 0;
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
        disc[root] = time;
        low[root] = time;
        time += 1;
        while let Some(frame) = stack.last_mut() {
            let (u, parent_edge) = (frame.0, frame.1);
            if frame.2 < adj[u].len() {
                let (v, e) = adj[u][frame.2];
                frame.2 += 1;
                if e == parent_edge {
                    continue;
                }
                if disc[v] == usize::MAX {
                    disc[v] = time;
                    low[v] = time;
                    time += 1;
                    stack.push((v, e, 0));
                } else {
                    low[u] = low[u].min(disc[v]);
                }
            } else {
                stack.pop();
                if let Some(&(p, _, _)) = stack.last() {
                    low[p] = low[p].min(low[u]);
                    if low[u] > disc[p] {
                        bridge[parent_edge] = true;
                    }
                }
            }
        }
    }
    bridge.iter().map(|&b| !b).collect()
}

fn count_components(n: usize, adjacency: &[Vec<(usize, usize)>]) -> usize {
    let mut seen = vec![false; n];
    let mut count = 0;
    for s in 0..n {
        if seen[s] {
            continue;
        }
        count += 1;
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(u) = stack.pop() {
            for &(v, _) in &adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
    }
    count
}

fn bfs_parents(root: usize, adjacency: &[Vec<(usize, usize)>]) -> Vec<usize> {
    let mut parent = vec![usize::MAX; adjacency.len()];
    parent[root] = root;
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        let mut nbrs: Vec<usize> = adjacency[u].iter().map(|&(v, _)| v).collect();
        nbrs.sort_unstable();
        for v in nbrs {
            if parent[v] == usize::MAX {
                parent[v] = u;
                queue.push_back(v);
            }
        }
    }
    parent
}

/// Vertices from `v` up to and including `root`.
fn path_to_root(mut v: usize, root: usize, parent: &[usize]) -> Vec<usize> {
    let mut path = vec![v];
    while v != root {
        v = parent[v];
        path.push(v);
    }
    path
}

fn edge_set(cycle: &[usize], adjacency: &[Vec<(usize, usize)>], words: usize) -> Option<EdgeSet> {
    let mut set = vec![0u64; words];
    for k in 0..cycle.len() {
        let (u, v) = (cycle[k], cycle[(k + 1) % cycle.len()]);
        let &(_, b) = adjacency[u].iter().find(|(w, _)| *w == v)?;
        set[b / 64] |= 1 << (b % 64);
    }
    Some(set)
}

fn bit(v: &[u64], i: usize) -> bool {
    v[i / 64] >> (i % 64) & 1 == 1
}

fn xor(v: &mut [u64], other: &[u64]) {
    for (a, b) in v.iter_mut().zip(other) {
        *a ^= b;
    }
}

fn first_bit(v: &[u64]) -> Option<usize> {
    v.iter()
        .enumerate()
        .find(|(_, w)| **w != 0)
        .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
}

/// Rotates a cycle to start at its smallest atom and walks toward the smaller
/// of that atom's two ring neighbors.
fn normalize_cycle(cycle: Vec<usize>) -> Vec<usize> {
    let n = cycle.len();
    let start = (0..n).min_by_key(|&i| cycle[i]).unwrap();
    let next = cycle[(start + 1) % n];
    let prev = cycle[(start + n - 1) % n];
    if next <= prev {
        (0..n).map(|k| cycle[(start + k) % n]).collect()
    } else {
        (0..n).map(|k| cycle[(start + n - k) % n]).collect()
    }
}

#[cfg(test)]
mod tests {
    use crate::molgraph::parse_smiles;

    fn ring_sizes(smiles: &str) -> Vec<usize> {
        let m = parse_smiles(smiles).unwrap();
        let mut sizes: Vec<usize> = m.rings().iter().map(|r| r.len()).collect();
        sizes.sort_unstable();
        sizes
    }

    #[test]
    fn simple_and_fused_systems() {
        assert_eq!(ring_sizes("CCO"), Vec::<usize>::new());
        assert_eq!(ring_sizes("C1CC1"), vec![3]);
        assert_eq!(ring_sizes("c1ccc2ccccc2c1"), vec![6, 6]);
        assert_eq!(ring_sizes("C1CC2CCC1C2"), vec![5, 5]); // norbornane
        assert_eq!(ring_sizes("C12C3C4C1C5C2C3C45"), vec![4, 4, 4, 4, 4]); // cubane
        assert_eq!(ring_sizes("C1CCC2(CC1)CCC2"), vec![4, 6]); // spiro
    }

    #[test]
    fn rings_are_normalized_cycles() {
        let m = parse_smiles("C1CCCCC1").unwrap();
        assert_eq!(m.rings(), &[vec![0, 1, 2, 3, 4, 5]]);
        for ring in m.rings() {
            let mut s = ring.clone();
            s.sort_unstable();
            s.dedup();
            assert_eq!(s.len(), ring.len(), "no repeated atoms");
            for k in 0..ring.len() {
                assert!(m.bond_between(ring[k], ring[(k + 1) % ring.len()]).is_some());
            }
        }
    }
}
