use std::collections::VecDeque;

use crate::models::Graph;

/// Hop distances from `source` to every vertex (index 0 unused).
pub fn bfs_distances(graph: &Graph, source: usize) -> Vec<Option<usize>> {
    let n = graph.n();
    let mut dist = vec![None; n + 1];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        let dv = dist[v].unwrap();
        for u in graph.neighbors(v) {
            if dist[u].is_none() {
                dist[u] = Some(dv + 1);
                queue.push_back(u);
            }
        }
    }
    dist
}

/// Lexicographically smallest minimum-hop path from `source` to `target`.
pub fn shortest_path_between(graph: &Graph, source: usize, target: usize) -> Option<Vec<usize>> {
    let dist = bfs_distances(graph, target);
    let mut remaining = dist[source]?;
    let mut path = vec![source];
    let mut v = source;
    while remaining > 0 {
        // neighbors() yields increasing labels, so the first hit is the
        // smallest continuation
        v = graph
            .neighbors(v)
            .find(|&u| dist[u] == Some(remaining - 1))
            .expect("a vertex at distance r has a neighbour at distance r - 1");
        path.push(v);
        remaining -= 1;
    }
    Some(path)
}

/// Shortest path from vertex 1 to vertex 2.
pub fn shortest_path(graph: &Graph) -> Option<Vec<usize>> {
    shortest_path_between(graph, 1, 2)
}
