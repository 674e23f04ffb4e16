//! Multigraph connectivity over in-service, unmasked branches.

use super::{BranchId, NetworkCase, TopologyMask};

const UNSEEN: usize = usize::MAX;

/// Adjacency lists of `(neighbor position, branch position)` pairs.
pub(crate) fn adjacency(case: &NetworkCase, mask: &TopologyMask) -> Vec<Vec<(usize, usize)>> {
    let mut adj = vec![Vec::new(); case.bus_count()];
    for (k, br) in case.branches().iter().enumerate() {
        if !case.branch_active(br, mask) {
            continue;
        }
        let (f, t) = case.branch_ends(br);
        adj[f].push((t, k));
        adj[t].push((f, k));
    }
    adj
}

/// Component label per bus position; labels are dense and ordered by first bus.
pub fn connected_components(case: &NetworkCase, mask: &TopologyMask) -> Vec<usize> {
    let adj = adjacency(case, mask);
    let mut label = vec![UNSEEN; adj.len()];
    let mut next = 0;
    let mut stack = Vec::new();
    for start in 0..adj.len() {
        if label[start] != UNSEEN {
            continue;
        }
        label[start] = next;
        stack.push(start);
        while let Some(v) = stack.pop() {
            for &(w, _) in &adj[v] {
                if label[w] == UNSEEN {
                    label[w] = next;
                    stack.push(w);
                }
            }
        }
        next += 1;
    }
    label
}

/// True iff every bus is reachable over in-service, unmasked branches.
pub fn is_connected(case: &NetworkCase, mask: &TopologyMask) -> bool {
    connected_components(case, mask).iter().all(|&c| c == 0)
}

/// Bridges of the multigraph left after applying `mask`, ascending by id.
///
/// Lowlink search that skips only the tree edge itself, so a parallel
/// circuit between the same buses counts as a back edge and is never a bridge.
pub fn bridges(case: &NetworkCase, mask: &TopologyMask) -> Vec<BranchId> {
    let adj = adjacency(case, mask);
    let n = adj.len();
    let mut disc = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut time = 0;
    let mut found = Vec::new();
    // (vertex, edge used to reach it, next adjacency slot)
    let mut stack: Vec<(usize, usize, usize)> = Vec::new();

    for root in 0..n {
        if disc[root] != UNSEEN {
            continue;
        }
        disc[root] = time;
        low[root] = time;
        time += 1;
        stack.push((root, UNSEEN, 0));
        while let Some(&mut (v, via, ref mut slot)) = stack.last_mut() {
            if *slot < adj[v].len() {
                let (w, edge) = adj[v][*slot];
                *slot += 1;
                if edge == via {
                    continue;
                }
                if disc[w] == UNSEEN {
                    disc[w] = time;
                    low[w] = time;
                    time += 1;
                    stack.push((w, edge, 0));
                } else {
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if let Some(&(parent, _, _)) = stack.last() {
                    low[parent] = low[parent].min(low[v]);
                    if low[v] > disc[parent] {
                        found.push(BranchId::from_index(via));
                    }
                }
            }
        }
    }
    found.sort_unstable();
    found
}

/// In-service branches whose single removal splits the in-service network.
pub fn radial_branches(case: &NetworkCase) -> Vec<BranchId> {
    bridges(case, &TopologyMask::empty())
}

/// Branches that can be opened on top of `mask` without islanding anything.
pub fn switchable_branches(case: &NetworkCase, mask: &TopologyMask) -> Vec<BranchId> {
    let bridge_set = bridges(case, mask);
    case.branches()
        .iter()
        .filter(|br| case.branch_active(br, mask))
        .map(|br| br.id)
        .filter(|id| bridge_set.binary_search(id).is_err())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::testing::{ring, triangle};

    fn brute_force(case: &NetworkCase, mask: &TopologyMask) -> Vec<BranchId> {
        case.branches()
            .iter()
            .filter(|br| case.branch_active(br, mask))
            .filter(|br| {
                let before = count(case, mask);
                count(case, &mask.with_branch(br.id)) > before
            })
            .map(|br| br.id)
            .collect()
    }

    fn count(case: &NetworkCase, mask: &TopologyMask) -> usize {
        connected_components(case, mask).into_iter().max().map_or(0, |m| m + 1)
    }

    #[test]
    fn triangle_has_no_bridges() {
        let case = triangle(0.1);
        assert!(radial_branches(&case).is_empty());
        assert!(is_connected(&case, &TopologyMask::empty()));
        for id in 1..=3 {
            assert!(is_connected(&case, &TopologyMask::branches([BranchId(id)])));
        }
    }

    #[test]
    fn triangle_minus_one_edge_has_nothing_switchable() {
        let case = triangle(0.1);
        let mask = TopologyMask::branches([BranchId(1)]);
        assert!(switchable_branches(&case, &mask).is_empty());
    }

    #[test]
    fn ring_with_spur() {
        // ring of 5 plus a pendant bus hanging off bus 1
        let case = ring(5, true);
        assert_eq!(radial_branches(&case), vec![BranchId(6)]);
        assert_eq!(brute_force(&case, &TopologyMask::empty()), vec![BranchId(6)]);
        let mask = TopologyMask::branches([BranchId(6)]);
        assert!(!is_connected(&case, &mask));
    }

    #[test]
    fn duplicated_bridge_is_not_a_bridge() {
        let case = ring(5, true);
        let (name, base, buses, mut branches, gens) = case.into_parts();
        let mut twin = branches[5].clone();
        twin.id = BranchId(7);
        branches.push(twin);
        let case = NetworkCase::new(name, base, buses, branches, gens).unwrap();
        assert!(radial_branches(&case).is_empty());
    }
}
