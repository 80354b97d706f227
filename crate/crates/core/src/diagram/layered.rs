//! Layered (Sugiyama-style) placement of boxes connected by directed edges,
//! flowing left to right.

/// Result of [`layered_layout`]. Positions are top-left corners relative to
/// the origin of the laid-out block.
#[derive(Debug, Clone, PartialEq)]
pub struct LayeredLayout {
    pub positions: Vec<(f64, f64)>,
    pub layers: Vec<usize>,
    /// Bend points per input edge, ordered from source to target. Empty for
    /// edges between adjacent layers and for self-loops.
    pub bends: Vec<Vec<(f64, f64)>>,
    pub width: f64,
    pub height: f64,
}

const SWEEPS: usize = 4;

/// Places boxes of the given `sizes` in layers.
///
/// Cycles are broken by reversing DFS back edges, layers assigned by longest
/// path, long edges split with dummy nodes, and crossings reduced with four
/// alternating barycenter sweeps. Layers are packed left to right with
/// `layer_gap` between them and `node_gap` between boxes of one layer.
pub fn layered_layout(sizes: &[(f64, f64)], edges: &[(usize, usize)], layer_gap: f64, node_gap: f64) -> LayeredLayout {
    let n = sizes.len();
    let reversed = back_edges(n, edges);
    let dag: Vec<(usize, usize)> = edges
        .iter()
        .zip(&reversed)
        .filter(|((u, v), _)| u != v)
        .map(|(&(u, v), &rev)| if rev { (v, u) } else { (u, v) })
        .collect();
    let layers = longest_path(n, &dag);

    // dummy chains; vertex ids >= n are dummies
    let mut vertex_layer = layers.clone();
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut pred: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut chains: Vec<Vec<usize>> = Vec::with_capacity(edges.len());
    for (&(u, v), &rev) in edges.iter().zip(&reversed) {
        if u == v {
            chains.push(Vec::new());
            continue;
        }
        let (from, to) = if rev { (v, u) } else { (u, v) };
        let mut chain = Vec::new();
        let mut prev = from;
        for layer in layers[from] + 1..layers[to] {
            let d = vertex_layer.len();
            vertex_layer.push(layer);
            succ.push(Vec::new());
            pred.push(Vec::new());
            succ[prev].push(d);
            pred[d].push(prev);
            chain.push(d);
            prev = d;
        }
        succ[prev].push(to);
        pred[to].push(prev);
        if rev {
            chain.reverse();
        }
        chains.push(chain);
    }

    let layer_count = vertex_layer.iter().copied().max().map_or(0, |m| m + 1);
    let mut order: Vec<Vec<usize>> = vec![Vec::new(); layer_count];
    for (v, &l) in vertex_layer.iter().enumerate() {
        order[l].push(v);
    }
    reduce_crossings(&mut order, &succ, &pred, vertex_layer.len());

    let size = |v: usize| if v < n { sizes[v] } else { (0.0, 0.0) };
    let mut layer_x = Vec::with_capacity(layer_count);
    let mut layer_width = Vec::with_capacity(layer_count);
    let mut x = 0.0;
    for layer in &order {
        let w = layer.iter().map(|&v| size(v).0).fold(0.0, f64::max);
        layer_x.push(x);
        layer_width.push(w);
        x += w + layer_gap;
    }
    let width = if layer_count == 0 { 0.0 } else { x - layer_gap };

    let mut coords = vec![(0.0, 0.0); vertex_layer.len()];
    let mut height: f64 = 0.0;
    for (l, layer) in order.iter().enumerate() {
        let mut y = 0.0;
        for (i, &v) in layer.iter().enumerate() {
            if i > 0 {
                y += node_gap;
            }
            let (w, h) = size(v);
            coords[v] = (layer_x[l] + (layer_width[l] - w) / 2.0, y);
            y += h;
        }
        height = height.max(y);
    }

    let bends = chains
        .iter()
        .map(|chain| chain.iter().map(|&d| coords[d]).collect())
        .collect();
    LayeredLayout { positions: coords[..n].to_vec(), layers, bends, width, height }
}

/// Flags the edges closing a cycle during a DFS in index order.
fn back_edges(n: usize, edges: &[(usize, usize)]) -> Vec<bool> {
    let mut out_edges: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, &(u, _)) in edges.iter().enumerate() {
        out_edges[u].push(i);
    }
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let mut mark = vec![Mark::New; n];
    let mut reversed = vec![false; edges.len()];
    for start in 0..n {
        if mark[start] != Mark::New {
            continue;
        }
        mark[start] = Mark::Active;
        let mut stack = vec![(start, 0usize)];
        while let Some(top) = stack.last_mut() {
            let v = top.0;
            if let Some(&e) = out_edges[v].get(top.1) {
                top.1 += 1;
                let w = edges[e].1;
                match mark[w] {
                    Mark::New => {
                        mark[w] = Mark::Active;
                        stack.push((w, 0));
                    }
                    Mark::Active => reversed[e] = w != v,
                    Mark::Done => {}
                }
            } else {
                mark[v] = Mark::Done;
                stack.pop();
            }
        }
    }
    reversed
}

/// Layer of each vertex: length of the longest path reaching it.
fn longest_path(n: usize, dag: &[(usize, usize)]) -> Vec<usize> {
    let mut indegree = vec![0usize; n];
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(u, v) in dag {
        out[u].push(v);
        indegree[v] += 1;
    }
    let mut layer = vec![0usize; n];
    let mut queue: std::collections::VecDeque<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
    while let Some(u) = queue.pop_front() {
        for &v in &out[u] {
            layer[v] = layer[v].max(layer[u] + 1);
            indegree[v] -= 1;
            if indegree[v] == 0 {
                queue.push_back(v);
            }
        }
    }
    layer
}

fn reduce_crossings(order: &mut [Vec<usize>], succ: &[Vec<usize>], pred: &[Vec<usize>], vertices: usize) {
    let mut position = vec![0usize; vertices];
    let index = |order: &[Vec<usize>], position: &mut [usize]| {
        for layer in order {
            for (i, &v) in layer.iter().enumerate() {
                position[v] = i;
            }
        }
    };
    index(order, &mut position);
    for sweep in 0..SWEEPS {
        let downward = sweep % 2 == 0;
        let layers: Vec<usize> =
            if downward { (1..order.len()).collect() } else { (0..order.len().saturating_sub(1)).rev().collect() };
        for l in layers {
            let neighbours = if downward { pred } else { succ };
            let mut keyed: Vec<(f64, usize)> = order[l]
                .iter()
                .map(|&v| {
                    let adjacent = &neighbours[v];
                    let key = if adjacent.is_empty() {
                        position[v] as f64
                    } else {
                        adjacent.iter().map(|&u| position[u] as f64).sum::<f64>() / adjacent.len() as f64
                    };
                    (key, v)
                })
                .collect();
            keyed.sort_by(|a, b| a.0.total_cmp(&b.0));
            order[l] = keyed.into_iter().map(|(_, v)| v).collect();
            for (i, &v) in order[l].iter().enumerate() {
                position[v] = i;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn boxes(n: usize) -> Vec<(f64, f64)> {
        vec![(40.0, 20.0); n]
    }

    #[test]
    fn chain_gets_one_layer_per_node() {
        let out = layered_layout(&boxes(3), &[(0, 1), (1, 2)], 30.0, 10.0);
        assert_eq!(out.layers, [0, 1, 2]);
        assert!(out.positions[0].0 < out.positions[1].0 && out.positions[1].0 < out.positions[2].0);
        assert_eq!(out.width, 3.0 * 40.0 + 2.0 * 30.0);
    }

    #[test]
    fn cycles_are_broken() {
        let out = layered_layout(&boxes(3), &[(0, 1), (1, 2), (2, 0)], 30.0, 10.0);
        assert_eq!(out.layers, [0, 1, 2]);
    }

    #[test]
    fn long_edges_bend_through_dummies() {
        let out = layered_layout(&boxes(3), &[(0, 1), (1, 2), (0, 2)], 30.0, 10.0);
        assert_eq!(out.bends[2].len(), 1);
        assert!(out.bends[0].is_empty());
        let reversed = layered_layout(&boxes(3), &[(0, 1), (1, 2), (2, 0), (0, 2)], 30.0, 10.0);
        let bend = reversed.bends[2][0];
        assert_eq!(bend.0, 90.0, "dummy of the reversed edge sits mid-column in the middle layer");
    }

    #[test]
    fn disconnected_boxes_stack() {
        let out = layered_layout(&boxes(2), &[], 30.0, 10.0);
        assert_eq!(out.positions, [(0.0, 0.0), (0.0, 30.0)]);
        assert_eq!(out.height, 50.0);
    }

    #[test]
    fn barycenters_untangle_a_cross() {
        // 0 -> 3, 1 -> 2: the second layer swaps to avoid the crossing
        let out = layered_layout(&boxes(4), &[(0, 3), (1, 2)], 30.0, 10.0);
        assert!(out.positions[3].1 < out.positions[2].1);
    }

    #[test]
    fn empty_input() {
        let out = layered_layout(&[], &[], 30.0, 10.0);
        assert_eq!((out.width, out.height), (0.0, 0.0));
    }
}
