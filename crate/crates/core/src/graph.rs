//! Small directed-graph helpers over adjacency lists `&[Vec<usize>]`.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

/// Strongly connected components (iterative Tarjan).
///
/// Returns `(component_of, count)`. Components are numbered in reverse
/// topological order of the condensation: if there is an arc from
/// component `a` to a different component `b`, then `a > b`.
pub fn strongly_connected(adj: &[Vec<usize>]) -> (Vec<usize>, usize) {
    const UNSET: usize = usize::MAX;
    let n = adj.len();
    let mut index = vec![UNSET; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNSET; n];
    let mut stack = Vec::new();
    let mut call: Vec<(usize, usize)> = Vec::new();
    let mut next_index = 0;
    let mut count = 0;

    for root in 0..n {
        if index[root] != UNSET {
            continue;
        }
        call.push((root, 0));
        while let Some(&mut (v, ref mut edge)) = call.last_mut() {
            if *edge == 0 && index[v] == UNSET {
                index[v] = next_index;
                low[v] = next_index;
                next_index += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if *edge < adj[v].len() {
                let w = adj[v][*edge];
                *edge += 1;
                if index[w] == UNSET {
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    on_stack[w] = false;
                    comp[w] = count;
                    if w == v {
                        break;
                    }
                }
                count += 1;
            }
        }
    }
    (comp, count)
}

/// Kahn's algorithm; among available vertices the one with the smallest
/// `key` comes first. `None` if the graph has a cycle.
pub fn topological_order<K: Ord + Copy>(adj: &[Vec<usize>], key: impl Fn(usize) -> K) -> Option<Vec<usize>> {
    let n = adj.len();
    let mut indeg = vec![0usize; n];
    for out in adj {
        for &w in out {
            indeg[w] += 1;
        }
    }
    let mut heap: BinaryHeap<Reverse<(K, usize)>> = (0..n)
        .filter(|&v| indeg[v] == 0)
        .map(|v| Reverse((key(v), v)))
        .collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse((_, v))) = heap.pop() {
        order.push(v);
        for &w in &adj[v] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                heap.push(Reverse((key(w), w)));
            }
        }
    }
    (order.len() == n).then_some(order)
}

pub fn is_acyclic(adj: &[Vec<usize>]) -> bool {
    topological_order(adj, |v| v).is_some()
}

/// Shortest path (fewest arcs) from any of `sources` to any of `targets`,
/// moving only through vertices with `allowed[v]`. Sources and targets
/// must themselves be allowed. Ties go to the smallest vertex ids.
pub fn shortest_path(
    adj: &[Vec<usize>],
    sources: &[usize],
    targets: &[usize],
    allowed: &[bool],
) -> Option<Vec<usize>> {
    let n = adj.len();
    let mut is_target = vec![false; n];
    for &t in targets {
        is_target[t] = true;
    }
    let mut parent = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    let mut srcs: Vec<usize> = sources.iter().copied().filter(|&s| allowed[s]).collect();
    srcs.sort_unstable();
    srcs.dedup();
    for s in srcs {
        seen[s] = true;
        queue.push_back(s);
    }
    while let Some(v) = queue.pop_front() {
        if is_target[v] {
            let mut path = vec![v];
            let mut cur = v;
            while parent[cur] != usize::MAX {
                cur = parent[cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| allowed[w] && !seen[w]).collect();
        next.sort_unstable();
        for w in next {
            if !seen[w] {
                seen[w] = true;
                parent[w] = v;
                queue.push_back(w);
            }
        }
    }
    None
}

/// Connected components of an undirected graph given by adjacency lists,
/// numbered by their smallest vertex.
pub fn connected_components(adj: &[Vec<usize>]) -> (Vec<usize>, usize) {
    let n = adj.len();
    let mut comp = vec![usize::MAX; n];
    let mut count = 0;
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        comp[s] = count;
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if comp[w] == usize::MAX {
                    comp[w] = count;
                    stack.push(w);
                }
            }
        }
        count += 1;
    }
    (comp, count)
}
