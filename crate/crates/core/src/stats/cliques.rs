use crate::error::{Error, Result};
use crate::graph::Graph;

pub const DEFAULT_CLIQUE_BUDGET: usize = 1_000_000;

fn intersect(a: &[u32], b: &[u32]) -> Vec<u32> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

fn intersect_len(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Degeneracy order by repeated removal of a minimum-degree vertex.
fn degeneracy_order(g: &Graph) -> Vec<u32> {
    let n = g.vertex_count();
    let mut deg: Vec<usize> = (0..n as u32).map(|v| g.degree(v)).collect();
    let max_deg = deg.iter().copied().max().unwrap_or(0);
    let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); max_deg + 1];
    for v in 0..n {
        buckets[deg[v]].push(v as u32);
    }
    let mut removed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut low = 0;
    while order.len() < n {
        while buckets[low].is_empty() {
            low += 1;
        }
        let v = buckets[low].pop().expect("bucket is nonempty");
        if removed[v as usize] || deg[v as usize] != low {
            continue;
        }
        removed[v as usize] = true;
        order.push(v);
        for &u in g.neighbors(v) {
            let u = u as usize;
            if !removed[u] {
                deg[u] -= 1;
                buckets[deg[u]].push(u as u32);
                low = low.min(deg[u]);
            }
        }
    }
    order
}

struct Enumerator<'a, F> {
    g: &'a Graph,
    budget: usize,
    found: usize,
    visit: F,
}

impl<F: FnMut(&[u32])> Enumerator<'_, F> {
    // Bron–Kerbosch with Tomita pivot; returns false once the budget is spent
    fn expand(&mut self, r: &mut Vec<u32>, p: Vec<u32>, mut x: Vec<u32>) -> bool {
        if p.is_empty() {
            if x.is_empty() {
                if self.found == self.budget {
                    return false;
                }
                self.found += 1;
                let mut clique = r.clone();
                clique.sort_unstable();
                (self.visit)(&clique);
            }
            return true;
        }
        let pivot = p
            .iter()
            .chain(x.iter())
            .copied()
            .max_by_key(|&u| intersect_len(&p, self.g.neighbors(u)))
            .expect("p is nonempty");
        let pivot_nb = self.g.neighbors(pivot);
        let candidates: Vec<u32> = p
            .iter()
            .copied()
            .filter(|v| pivot_nb.binary_search(v).is_err())
            .collect();
        let mut p = p;
        for v in candidates {
            let nb = self.g.neighbors(v);
            r.push(v);
            let ok = self.expand(r, intersect(&p, nb), intersect(&x, nb));
            r.pop();
            if !ok {
                return false;
            }
            let pos = p.binary_search(&v).expect("candidate is in p");
            p.remove(pos);
            let pos = x.binary_search(&v).unwrap_err();
            x.insert(pos, v);
        }
        true
    }
}

/// Calls `visit` on every maximal clique (sorted vertex list). Isolated
/// vertices are maximal cliques of size one. Stops with
/// [`Error::CliqueBudget`] after `budget` cliques; the partial list in the
/// error is empty here since cliques were streamed to `visit`.
pub fn for_each_maximal_clique<F: FnMut(&[u32])>(g: &Graph, budget: usize, visit: F) -> Result<()> {
    let order = degeneracy_order(g);
    let mut position = vec![0usize; g.vertex_count()];
    for (i, &v) in order.iter().enumerate() {
        position[v as usize] = i;
    }
    let mut e = Enumerator {
        g,
        budget,
        found: 0,
        visit,
    };
    for &v in &order {
        let (later, earlier): (Vec<u32>, Vec<u32>) = g
            .neighbors(v)
            .iter()
            .partition(|&&u| position[u as usize] > position[v as usize]);
        let mut r = vec![v];
        if !e.expand(&mut r, later, earlier) {
            return Err(Error::CliqueBudget {
                budget,
                partial: Vec::new(),
            });
        }
    }
    Ok(())
}

/// All maximal cliques, each sorted, in discovery order.
pub fn maximal_cliques(g: &Graph, budget: usize) -> Result<Vec<Vec<u32>>> {
    let mut out = Vec::new();
    match for_each_maximal_clique(g, budget, |c| out.push(c.to_vec())) {
        Ok(()) => Ok(out),
        Err(Error::CliqueBudget { budget, .. }) => Err(Error::CliqueBudget { budget, partial: out }),
        Err(e) => Err(e),
    }
}

/// Size of the largest maximal clique containing each vertex.
pub fn largest_clique_per_vertex(g: &Graph, budget: usize) -> Result<Vec<usize>> {
    let mut best = vec![0usize; g.vertex_count()];
    for_each_maximal_clique(g, budget, |c| {
        for &v in c {
            best[v as usize] = best[v as usize].max(c.len());
        }
    })?;
    Ok(best)
}

pub fn average_max_clique_per_vertex(g: &Graph, budget: usize) -> Result<f64> {
    if g.vertex_count() == 0 {
        return Ok(0.0);
    }
    let best = largest_clique_per_vertex(g, budget)?;
    Ok(best.iter().sum::<usize>() as f64 / best.len() as f64)
}
