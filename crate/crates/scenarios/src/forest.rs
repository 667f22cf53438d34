//! Random distribution trees.

use rand::Rng;

/// Sequential uniform attachment with a fanout cap: node `k > 0` picks its
/// parent uniformly among earlier nodes that still have fewer than `fanout`
/// children. Node 0 is the root. Returns each node's parent and depth.
pub fn random_tree<R: Rng + ?Sized>(rng: &mut R, n: usize, fanout: usize) -> (Vec<Option<usize>>, Vec<usize>) {
    assert!(fanout >= 1, "fanout must be positive");
    let mut parent = vec![None; n];
    let mut depth = vec![0; n];
    let mut children = vec![0usize; n];
    let mut open = Vec::with_capacity(n);
    if n > 0 {
        open.push(0);
    }
    for v in 1..n {
        let slot = rng.gen_range(0..open.len());
        let p = open[slot];
        parent[v] = Some(p);
        depth[v] = depth[p] + 1;
        children[p] += 1;
        if children[p] >= fanout {
            open.swap_remove(slot);
        }
        open.push(v);
    }
    (parent, depth)
}
