use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, HashMap};
use std::hash::BuildHasherDefault;

use serde::{Deserialize, Serialize};

use super::likelihood::pair_log_lik;
use crate::build::{row_pairs, NoisyOrParams};
use crate::clique::CliqueMatrix;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::hyper::Hyperparams;
use crate::ibp::{log_joint_stats, IbpStats, RateTable};
use crate::SeededRng;

type PairMap = HashMap<u64, u32, BuildHasherDefault<DefaultHasher>>;

pub(crate) fn pair_key(u: u32, v: u32) -> u64 {
    let (a, b) = if u < v { (u, v) } else { (v, u) };
    ((a as u64) << 32) | b as u64
}

fn unpack(key: u64) -> (u32, u32) {
    ((key >> 32) as u32, key as u32)
}

/// How the observed graph arises from the cover.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum Noise {
    /// The graph is exactly the union of the cliques.
    Full,
    /// Noisy-OR with one activation probability for all cliques.
    Shared { pi: f64 },
    /// Noisy-OR with a probability per clique, stored alongside the rows.
    PerClique,
}

/// A proposed replacement of some rows by others.
#[derive(Debug, Clone, Default)]
pub(crate) struct Change {
    pub remove: Vec<usize>,
    pub add: Vec<Vec<u32>>,
    /// Per-clique probabilities of the added rows; ignored unless per-clique.
    pub add_pi: Vec<f64>,
}

#[derive(Debug)]
pub(crate) struct Evaluated {
    stats: IbpStats,
    pub log_joint: f64,
    pub d_log_lik: f64,
    // (pair, old count, new count)
    pairs: Vec<(u64, u32, u32)>,
    columns: Vec<(u32, u32)>,
}

/// Current clique cover of an observed graph together with everything the
/// moves need: row memberships per vertex, pair cover counts, IBP sufficient
/// statistics and cached log values.
#[derive(Debug, Clone)]
pub struct McmcState {
    pub(crate) graph: Graph,
    pub(crate) edges: Vec<(u32, u32)>,
    pub(crate) rows: Vec<Vec<u32>>,
    pub(crate) row_pi: Vec<f64>,
    pub(crate) noise: Noise,
    // sorted row indices per vertex
    pub(crate) vertex_rows: Vec<Vec<u32>>,
    pairs: PairMap,
    // covered pairs by multiplicity, split by whether they are edges of the graph
    edge_hist: Vec<u64>,
    absent_hist: Vec<u64>,
    pub(crate) stats: IbpStats,
    pub(crate) hp: Hyperparams,
    pub(crate) rates: RateTable,
    pub(crate) log_joint: f64,
    pub(crate) log_lik: f64,
    pub(crate) rng: SeededRng,
    pub(crate) iteration: u64,
}

impl McmcState {
    /// `row_pi` is required in per-clique mode and must match the rows.
    pub fn new(
        graph: &Graph,
        cover: &CliqueMatrix,
        noise: Noise,
        row_pi: Option<Vec<f64>>,
        hp: Hyperparams,
        rng: SeededRng,
    ) -> Result<Self> {
        if cover.vertex_count() != graph.vertex_count() {
            return Err(Error::InvalidArgument(format!(
                "cover has {} columns but the graph has {} vertices",
                cover.vertex_count(),
                graph.vertex_count()
            )));
        }
        if !cover.has_no_empty_columns() {
            return Err(Error::InvalidArgument(
                "every vertex must belong to some clique".into(),
            ));
        }
        let n = cover.num_cliques();
        let row_pi = match (noise, row_pi) {
            (Noise::PerClique, Some(p)) if p.len() == n => p,
            (Noise::PerClique, _) => {
                return Err(Error::InvalidArgument(
                    "per-clique mode needs one probability per clique".into(),
                ))
            }
            (_, _) => vec![0.5; n],
        };
        let probs: Vec<f64> = match noise {
            Noise::Full => Vec::new(),
            Noise::Shared { pi } => vec![pi],
            Noise::PerClique => row_pi.clone(),
        };
        if probs.iter().any(|p| !(*p > 0.0 && *p < 1.0)) {
            return Err(Error::InvalidArgument(
                "activation probabilities must lie in (0, 1)".into(),
            ));
        }
        let mut state = Self {
            graph: graph.clone(),
            edges: graph.edges().collect(),
            rows: Vec::new(),
            row_pi: Vec::new(),
            noise,
            vertex_rows: vec![Vec::new(); graph.vertex_count()],
            pairs: PairMap::default(),
            edge_hist: vec![0],
            absent_hist: vec![0],
            stats: IbpStats::from_matrix(cover),
            hp,
            rates: RateTable::new(hp),
            log_joint: 0.0,
            log_lik: 0.0,
            rng,
            iteration: 0,
        };
        for (row, pi) in cover.rows().iter().zip(row_pi) {
            state.push_row(row.clone(), pi);
        }
        state.log_joint = state.fresh_log_joint();
        state.log_lik = state.fresh_log_lik();
        if state.log_lik == f64::NEG_INFINITY {
            return Err(Error::InvalidArgument(
                "initial cover is incompatible with the graph".into(),
            ));
        }
        Ok(state)
    }

    fn push_row(&mut self, row: Vec<u32>, pi: f64) {
        let idx = self.rows.len() as u32;
        for &v in &row {
            self.vertex_rows[v as usize].push(idx);
        }
        for (u, v) in row_pairs(&row) {
            let key = pair_key(u, v);
            let old = self.pairs.get(&key).copied().unwrap_or(0);
            self.set_pair(key, old, old + 1);
        }
        self.rows.push(row);
        self.row_pi.push(pi);
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn hyperparams(&self) -> &Hyperparams {
        &self.hp
    }

    pub fn noise(&self) -> Noise {
        self.noise
    }

    pub fn num_cliques(&self) -> usize {
        self.rows.len()
    }

    pub fn empty_cliques(&self) -> usize {
        self.rows.iter().filter(|r| r.is_empty()).count()
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn rng(&self) -> &SeededRng {
        &self.rng
    }

    pub fn cover(&self) -> CliqueMatrix {
        CliqueMatrix::new(self.graph.vertex_count(), self.rows.clone())
            .expect("state rows index graph vertices")
    }

    /// Current activation probabilities, `None` when fully observed.
    pub fn noisy_or(&self) -> Option<NoisyOrParams> {
        match self.noise {
            Noise::Full => None,
            Noise::Shared { pi } => Some(NoisyOrParams::Shared(pi)),
            Noise::PerClique => Some(NoisyOrParams::PerClique(self.row_pi.clone())),
        }
    }

    /// Mean activation probability (the shared value in shared mode).
    pub fn mean_pi(&self) -> Option<f64> {
        match self.noise {
            Noise::Full => None,
            Noise::Shared { pi } => Some(pi),
            Noise::PerClique if self.row_pi.is_empty() => None,
            Noise::PerClique => Some(self.row_pi.iter().sum::<f64>() / self.row_pi.len() as f64),
        }
    }

    /// Cached log joint, including the Poisson term for the number of cliques.
    pub fn log_joint(&self) -> f64 {
        self.log_joint
    }

    pub fn log_likelihood(&self) -> f64 {
        self.log_lik
    }

    pub(crate) fn pair_count(&self, u: u32, v: u32) -> u32 {
        self.pairs.get(&pair_key(u, v)).copied().unwrap_or(0)
    }

    /// `sum ln(1 - pi_n)` over the rows containing both `u` and `v`.
    pub(crate) fn log_q(&self, u: u32, v: u32, count: u32) -> f64 {
        match self.noise {
            Noise::Full => 0.0,
            Noise::Shared { pi } => count as f64 * (-pi).ln_1p(),
            Noise::PerClique => {
                let (a, b) = (&self.vertex_rows[u as usize], &self.vertex_rows[v as usize]);
                let (mut i, mut j, mut total) = (0, 0, 0.0);
                while i < a.len() && j < b.len() {
                    match a[i].cmp(&b[j]) {
                        std::cmp::Ordering::Less => i += 1,
                        std::cmp::Ordering::Greater => j += 1,
                        std::cmp::Ordering::Equal => {
                            total += (-self.row_pi[a[i] as usize]).ln_1p();
                            i += 1;
                            j += 1;
                        }
                    }
                }
                total
            }
        }
    }

    /// Log-likelihood contribution of one pair under the current mode.
    pub(crate) fn pair_ll(&self, edge: bool, count: u32, log_q: f64) -> f64 {
        match self.noise {
            Noise::Full => {
                if (count > 0) == edge {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            _ => pair_log_lik(edge, count, log_q),
        }
    }

    fn set_pair(&mut self, key: u64, old: u32, new: u32) {
        let (u, v) = unpack(key);
        let hist = if self.graph.has_edge(u, v) {
            &mut self.edge_hist
        } else {
            &mut self.absent_hist
        };
        if old > 0 {
            hist[old as usize] -= 1;
        }
        if new > 0 {
            if hist.len() <= new as usize {
                hist.resize(new as usize + 1, 0);
            }
            hist[new as usize] += 1;
        }
        if new == 0 {
            self.pairs.remove(&key);
        } else {
            self.pairs.insert(key, new);
        }
    }

    fn uncovered_edges(&self) -> u64 {
        self.edges.len() as u64 - self.edge_hist.iter().skip(1).sum::<u64>()
    }

    pub(crate) fn fresh_log_joint(&mut self) -> f64 {
        log_joint_stats(&self.stats, &self.hp, true, &mut self.rates)
    }

    /// Shared-mode log-likelihood at an arbitrary `pi`, from the pair histograms.
    pub(crate) fn shared_log_lik(&self, pi: f64) -> f64 {
        if self.uncovered_edges() > 0 {
            return f64::NEG_INFINITY;
        }
        let lq1 = (-pi).ln_1p();
        let mut total = 0.0;
        for (m, &h) in self.edge_hist.iter().enumerate().skip(1) {
            if h > 0 {
                total += h as f64 * pair_log_lik(true, m as u32, m as f64 * lq1);
            }
        }
        for (m, &h) in self.absent_hist.iter().enumerate().skip(1) {
            if h > 0 {
                total += h as f64 * m as f64 * lq1;
            }
        }
        total
    }

    /// Log-likelihood recomputed from the pair counts in a fixed order.
    pub fn fresh_log_lik(&self) -> f64 {
        match self.noise {
            Noise::Full => {
                let extra = self.absent_hist.iter().skip(1).sum::<u64>();
                if extra > 0 || self.uncovered_edges() > 0 {
                    f64::NEG_INFINITY
                } else {
                    0.0
                }
            }
            Noise::Shared { pi } => self.shared_log_lik(pi),
            Noise::PerClique => {
                if self.uncovered_edges() > 0 {
                    return f64::NEG_INFINITY;
                }
                let mut keys: Vec<(u64, u32)> = self.pairs.iter().map(|(&k, &c)| (k, c)).collect();
                keys.sort_unstable();
                keys.iter()
                    .map(|&(k, c)| {
                        let (u, v) = unpack(k);
                        pair_log_lik(self.graph.has_edge(u, v), c, self.log_q(u, v, c))
                    })
                    .sum()
            }
        }
    }

    /// Log joint and log-likelihood change of `change` without applying it.
    /// `d_log_lik` is `-inf` as soon as an impossible pair appears.
    pub(crate) fn evaluate(&mut self, change: &Change) -> Evaluated {
        let mut col: BTreeMap<u32, i64> = BTreeMap::new();
        let mut pd: BTreeMap<u64, (i64, f64)> = BTreeMap::new();
        let per_clique = matches!(self.noise, Noise::PerClique);
        for &r in &change.remove {
            let lq = if per_clique {
                (-self.row_pi[r]).ln_1p()
            } else {
                0.0
            };
            for &v in &self.rows[r] {
                *col.entry(v).or_default() -= 1;
            }
            for (u, v) in row_pairs(&self.rows[r]) {
                let e = pd.entry(pair_key(u, v)).or_default();
                e.0 -= 1;
                e.1 -= lq;
            }
        }
        for (k, row) in change.add.iter().enumerate() {
            let lq = if per_clique {
                (-change.add_pi[k]).ln_1p()
            } else {
                0.0
            };
            for &v in row {
                *col.entry(v).or_default() += 1;
            }
            for (u, v) in row_pairs(row) {
                let e = pd.entry(pair_key(u, v)).or_default();
                e.0 += 1;
                e.1 += lq;
            }
        }

        let mut stats = self.stats.clone();
        stats.n_rows = self.rows.len() + change.add.len() - change.remove.len();
        let mut columns = Vec::new();
        for (&v, &d) in &col {
            if d == 0 {
                continue;
            }
            let old = self.vertex_rows[v as usize].len() as u32;
            let new = (old as i64 + d) as u32;
            stats.shift_column(old, new);
            columns.push((v, new));
        }
        let log_joint = log_joint_stats(&stats, &self.hp, true, &mut self.rates);

        let mut d_log_lik = 0.0;
        let mut pairs = Vec::with_capacity(pd.len());
        for (&key, &(dc, dlq)) in &pd {
            if dc == 0 && dlq == 0.0 {
                continue;
            }
            let (u, v) = unpack(key);
            let edge = self.graph.has_edge(u, v);
            let old = self.pairs.get(&key).copied().unwrap_or(0);
            let new = (old as i64 + dc) as u32;
            let old_lq = self.log_q(u, v, old);
            let new_lq = match self.noise {
                Noise::PerClique if new > 0 => old_lq + dlq,
                _ => self.log_q(u, v, new),
            };
            let after = self.pair_ll(edge, new, new_lq);
            if after == f64::NEG_INFINITY {
                d_log_lik = f64::NEG_INFINITY;
                break;
            }
            d_log_lik += after - self.pair_ll(edge, old, old_lq);
            pairs.push((key, old, new));
        }
        Evaluated {
            stats,
            log_joint,
            d_log_lik,
            pairs,
            columns,
        }
    }

    /// Applies an evaluated change. Removed rows are swap-removed, added
    /// rows appended.
    pub(crate) fn commit(&mut self, change: Change, ev: Evaluated) {
        debug_assert!(ev.d_log_lik > f64::NEG_INFINITY);
        let mut remove = change.remove;
        remove.sort_unstable_by(|a, b| b.cmp(a));
        for r in remove {
            self.swap_remove_row(r);
        }
        for (row, pi) in change
            .add
            .into_iter()
            .zip(change.add_pi.into_iter().chain(std::iter::repeat(0.5)))
        {
            let idx = self.rows.len() as u32;
            for &v in &row {
                self.vertex_rows[v as usize].push(idx);
            }
            self.rows.push(row);
            self.row_pi.push(pi);
        }
        for (key, old, new) in ev.pairs {
            self.set_pair(key, old, new);
        }
        debug_assert!(ev
            .columns
            .iter()
            .all(|&(v, m)| self.vertex_rows[v as usize].len() as u32 == m));
        self.stats = ev.stats;
        self.log_joint = ev.log_joint;
        self.log_lik = match self.noise {
            Noise::PerClique => self.log_lik + ev.d_log_lik,
            _ => self.fresh_log_lik(),
        };
    }

    // pair counts are left to the caller
    fn swap_remove_row(&mut self, r: usize) {
        let last = self.rows.len() - 1;
        for &v in &self.rows[r] {
            let list = &mut self.vertex_rows[v as usize];
            let pos = list
                .binary_search(&(r as u32))
                .expect("row listed under its members");
            list.remove(pos);
        }
        if r != last {
            for &v in &self.rows[last] {
                let list = &mut self.vertex_rows[v as usize];
                let popped = list.pop();
                debug_assert_eq!(popped, Some(last as u32));
                let pos = list.binary_search(&(r as u32)).unwrap_err();
                list.insert(pos, r as u32);
            }
        }
        self.rows.swap_remove(r);
        self.row_pi.swap_remove(r);
    }

    /// Toggles vertex `v` in row `n`; the caller supplies the likelihood change.
    pub(crate) fn flip(&mut self, n: usize, v: u32, d_log_lik: f64) {
        let row = &mut self.rows[n];
        let present = match row.binary_search(&v) {
            Ok(pos) => {
                row.remove(pos);
                true
            }
            Err(pos) => {
                row.insert(pos, v);
                false
            }
        };
        let list = &mut self.vertex_rows[v as usize];
        let old_m = list.len() as u32;
        match list.binary_search(&(n as u32)) {
            Ok(pos) => {
                list.remove(pos);
            }
            Err(pos) => list.insert(pos, n as u32),
        }
        let new_m = list.len() as u32;
        self.stats.shift_column(old_m, new_m);
        for i in 0..self.rows[n].len() {
            let u = self.rows[n][i];
            if u == v {
                continue;
            }
            let key = pair_key(u, v);
            let old = self.pairs.get(&key).copied().unwrap_or(0);
            let new = if present { old - 1 } else { old + 1 };
            self.set_pair(key, old, new);
        }
        self.log_joint = self.fresh_log_joint();
        self.log_lik = match self.noise {
            Noise::PerClique => self.log_lik + d_log_lik,
            _ => self.fresh_log_lik(),
        };
    }

    pub(crate) fn set_hyperparams(&mut self, hp: Hyperparams, rates: RateTable, log_joint: f64) {
        self.hp = hp;
        self.rates = rates;
        self.log_joint = log_joint;
    }

    pub(crate) fn set_shared_pi(&mut self, pi: f64) {
        self.noise = Noise::Shared { pi };
        self.log_lik = self.fresh_log_lik();
    }

    pub(crate) fn set_row_pi(&mut self, n: usize, pi: f64, d_log_lik: f64) {
        self.row_pi[n] = pi;
        self.log_lik += d_log_lik;
    }

    /// Recomputes every derived quantity from the rows and compares.
    pub fn check_invariants(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Invariant(msg));
        let k = self.graph.vertex_count();
        let mut vertex_rows = vec![Vec::new(); k];
        let mut pairs: BTreeMap<u64, u32> = BTreeMap::new();
        for (n, row) in self.rows.iter().enumerate() {
            if row.windows(2).any(|w| w[0] >= w[1]) {
                return fail(format!("row {n} is not sorted"));
            }
            for &v in row {
                vertex_rows[v as usize].push(n as u32);
            }
            for (u, v) in row_pairs(row) {
                *pairs.entry(pair_key(u, v)).or_default() += 1;
            }
        }
        if vertex_rows != self.vertex_rows {
            return fail("vertex row lists out of date".into());
        }
        if vertex_rows.iter().any(Vec::is_empty) {
            return fail("a vertex belongs to no clique".into());
        }
        let cached: BTreeMap<u64, u32> = self.pairs.iter().map(|(&k, &c)| (k, c)).collect();
        if cached != pairs {
            return fail("pair counts out of date".into());
        }
        if self.stats != IbpStats::from_counts(self.rows.len(), vertex_rows.iter().map(|r| r.len() as u32)) {
            return fail("IBP statistics out of date".into());
        }
        let covered = |u: u32, v: u32| pairs.contains_key(&pair_key(u, v));
        if self.edges.iter().any(|&(u, v)| !covered(u, v)) {
            return fail("an observed edge is not covered".into());
        }
        if self.noise == Noise::Full
            && pairs.keys().any(|&key| {
                let (u, v) = unpack(key);
                !self.graph.has_edge(u, v)
            })
        {
            return fail("cover adds an edge absent from the graph".into());
        }
        let lj = log_joint_stats(&self.stats, &self.hp, true, &mut RateTable::new(self.hp));
        if (lj - self.log_joint).abs() > 1e-8 * lj.abs().max(1.0) {
            return fail(format!("cached log joint {} differs from {lj}", self.log_joint));
        }
        let ll = self.fresh_log_lik();
        if (ll - self.log_lik).abs() > 1e-8 * ll.abs().max(1.0) {
            return fail(format!(
                "cached log-likelihood {} differs from {ll}",
                self.log_lik
            ));
        }
        Ok(())
    }
}
