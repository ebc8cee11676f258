use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use super::state::{Change, McmcState, Noise};
use crate::build::row_pairs;

pub(crate) type Setting = (bool, bool);

pub(crate) const FIRST: [Setting; 2] = [(true, false), (true, true)];
pub(crate) const SECOND: [Setting; 2] = [(false, true), (true, true)];
pub(crate) const OTHER: [Setting; 3] = [(true, false), (false, true), (true, true)];

fn covers(s: Setting, t: Setting) -> bool {
    (s.0 && t.0) || (s.1 && t.1)
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Order in which a split assigns members: the two anchors, then the rest ascending.
fn assignment_order(row: &[u32], i: u32, j: u32) -> Vec<u32> {
    let mut order = vec![i, j];
    order.extend(row.iter().copied().filter(|&k| k != i && k != j));
    order
}

impl McmcState {
    fn accept(&mut self, log_ratio: f64) -> bool {
        if log_ratio.is_nan() {
            return false;
        }
        log_ratio >= 0.0 || self.rng.random::<f64>().ln() < log_ratio
    }

    fn fresh_pi(&mut self) -> f64 {
        if matches!(self.noise, Noise::PerClique) {
            // open interval
            loop {
                let p: f64 = self.rng.random();
                if p > 0.0 {
                    return p;
                }
            }
        } else {
            0.5
        }
    }

    /// Settings for `k` that keep every pair covered only by the split row
    /// covered by one of the children. `count(k, k')` is the pair's cover
    /// count in the state where the split row is present.
    pub(crate) fn allowed_settings(
        &self,
        k: u32,
        options: &[Setting],
        assigned: &[(u32, Setting)],
        count: impl Fn(u32, u32) -> u32,
    ) -> Vec<Setting> {
        if !matches!(self.noise, Noise::Full) {
            return options.to_vec();
        }
        options
            .iter()
            .copied()
            .filter(|&s| assigned.iter().all(|&(k2, t)| count(k, k2) != 1 || covers(s, t)))
            .collect()
    }

    /// One reversible-jump split or merge. Picks an edge uniformly, then a
    /// clique containing each endpoint; the same clique is split, different
    /// cliques are merged.
    pub fn split_merge(&mut self) -> bool {
        if self.edges.is_empty() {
            return false;
        }
        let (i, j) = self.edges[self.rng.random_range(0..self.edges.len())];
        let ci = self.vertex_rows[i as usize].len();
        let cj = self.vertex_rows[j as usize].len();
        let ni = self.vertex_rows[i as usize][self.rng.random_range(0..ci)] as usize;
        let nj = self.vertex_rows[j as usize][self.rng.random_range(0..cj)] as usize;
        if ni == nj {
            self.split(ni, i, j, ci, cj)
        } else {
            self.merge(ni, nj, i, j, ci, cj)
        }
    }

    fn split(&mut self, n: usize, i: u32, j: u32, ci: usize, cj: usize) -> bool {
        let parent = self.rows[n].clone();
        let mut assigned: Vec<(u32, Setting)> = Vec::with_capacity(parent.len());
        let mut log_choices = 0.0;
        for k in assignment_order(&parent, i, j) {
            let options: &[Setting] = if k == i {
                &FIRST
            } else if k == j {
                &SECOND
            } else {
                &OTHER
            };
            let allowed = self.allowed_settings(k, options, &assigned, |a, b| self.pair_count(a, b));
            let s = allowed[self.rng.random_range(0..allowed.len())];
            log_choices += (allowed.len() as f64).ln();
            assigned.push((k, s));
        }
        let mut a: Vec<u32> = assigned.iter().filter(|(_, s)| s.0).map(|&(k, _)| k).collect();
        let mut b: Vec<u32> = assigned.iter().filter(|(_, s)| s.1).map(|&(k, _)| k).collect();
        a.sort_unstable();
        b.sort_unstable();
        let ci_new = ci + b.binary_search(&i).is_ok() as usize;
        let cj_new = cj + a.binary_search(&j).is_ok() as usize;
        let add_pi = vec![self.fresh_pi(), self.fresh_pi()];
        let change = Change {
            remove: vec![n],
            add: vec![a, b],
            add_pi,
        };
        let ev = self.evaluate(&change);
        if ev.d_log_lik == f64::NEG_INFINITY {
            return false;
        }
        let rows = self.rows.len() as f64;
        let log_ratio =
            ev.log_joint - self.log_joint + ev.d_log_lik + (rows + 1.0).ln() + ((ci * cj) as f64).ln()
                - ((ci_new * cj_new) as f64).ln()
                + log_choices;
        if self.accept(log_ratio) {
            self.commit(change, ev);
            true
        } else {
            false
        }
    }

    fn merge(&mut self, ni: usize, nj: usize, i: u32, j: u32, ci: usize, cj: usize) -> bool {
        let a = self.rows[ni].clone();
        let b = self.rows[nj].clone();
        let mut union: Vec<u32> = a.iter().chain(b.iter()).copied().collect();
        union.sort_unstable();
        union.dedup();
        let in_a = |k: u32| a.binary_search(&k).is_ok();
        let in_b = |k: u32| b.binary_search(&k).is_ok();

        // probability of the reverse split path, evaluated after the merge
        let count_after = |x: u32, y: u32| {
            self.pair_count(x, y) + 1 - (in_a(x) && in_a(y)) as u32 - (in_b(x) && in_b(y)) as u32
        };
        let mut assigned: Vec<(u32, Setting)> = Vec::with_capacity(union.len());
        let mut log_choices = 0.0;
        for k in assignment_order(&union, i, j) {
            let options: &[Setting] = if k == i {
                &FIRST
            } else if k == j {
                &SECOND
            } else {
                &OTHER
            };
            let s = (in_a(k), in_b(k));
            let allowed = self.allowed_settings(k, options, &assigned, count_after);
            if !allowed.contains(&s) {
                return false;
            }
            log_choices += (allowed.len() as f64).ln();
            assigned.push((k, s));
        }
        let ci_new = ci - in_b(i) as usize;
        let cj_new = cj - in_a(j) as usize;
        let add_pi = vec![self.fresh_pi()];
        let change = Change {
            remove: vec![ni, nj],
            add: vec![union],
            add_pi,
        };
        let ev = self.evaluate(&change);
        if ev.d_log_lik == f64::NEG_INFINITY {
            return false;
        }
        let rows = self.rows.len() as f64;
        let log_ratio = ev.log_joint - self.log_joint + ev.d_log_lik - rows.ln() + ((ci * cj) as f64).ln()
            - ((ci_new * cj_new) as f64).ln()
            - log_choices;
        if self.accept(log_ratio) {
            self.commit(change, ev);
            true
        } else {
            false
        }
    }

    /// Resamples every membership entry whose column keeps at least one
    /// other clique, visiting cliques in random order. Returns the number of
    /// entries that changed and the number visited.
    pub fn gibbs_sweep(&mut self) -> (usize, usize) {
        let mut order: Vec<usize> = (0..self.rows.len()).collect();
        order.shuffle(&mut self.rng);
        let (mut changed, mut visited) = (0, 0);
        for n in order {
            for v in 0..self.graph.vertex_count() as u32 {
                if let Some(flipped) = self.gibbs_entry(n, v) {
                    visited += 1;
                    changed += flipped as usize;
                }
            }
        }
        (changed, visited)
    }

    /// Log-likelihoods of the pairs between `v` and the other members of row
    /// `n`, with `v` excluded from and included in the row.
    pub(crate) fn entry_log_liks(&self, n: usize, v: u32, present: bool) -> (f64, f64) {
        let lq_n = match self.noise {
            Noise::Full => 0.0,
            Noise::Shared { pi } => (-pi).ln_1p(),
            Noise::PerClique => (-self.row_pi[n]).ln_1p(),
        };
        let (mut l0, mut l1) = (0.0, 0.0);
        for &u in &self.rows[n] {
            if u == v {
                continue;
            }
            let edge = self.graph.has_edge(u, v);
            let count = self.pair_count(u, v);
            let c0 = count - present as u32;
            let lq0 = self.log_q(u, v, count) - if present { lq_n } else { 0.0 };
            l0 += self.pair_ll(edge, c0, lq0);
            l1 += self.pair_ll(edge, c0 + 1, lq0 + lq_n);
        }
        (l0, l1)
    }

    pub(crate) fn gibbs_entry(&mut self, n: usize, v: u32) -> Option<bool> {
        let present = self.rows[n].binary_search(&v).is_ok();
        let m_other = self.vertex_rows[v as usize].len() - present as usize;
        if m_other == 0 {
            return None;
        }
        let (s, c) = (self.hp.sigma(), self.hp.c());
        let rows = self.rows.len() as f64;
        let m = m_other as f64;
        let (l0, l1) = self.entry_log_liks(n, v, present);
        let a = (m - s).ln() + l1;
        let b = (rows + c - 1.0 - m + s).ln() + l0;
        let p1 = if a == f64::NEG_INFINITY {
            0.0
        } else if b == f64::NEG_INFINITY {
            1.0
        } else {
            1.0 / (1.0 + (b - a).exp())
        };
        let want = self.rng.random::<f64>() < p1;
        if want == present {
            return Some(false);
        }
        let d = if want { l1 - l0 } else { l0 - l1 };
        self.flip(n, v, d);
        Some(true)
    }

    /// Metropolis–Hastings step on the number of empty cliques: add or
    /// remove one with equal probability.
    pub fn resample_empty(&mut self) -> bool {
        let empties: Vec<usize> = (0..self.rows.len())
            .filter(|&n| self.rows[n].is_empty())
            .collect();
        let e = empties.len() as f64;
        let rows = self.rows.len() as f64;
        if self.rng.random::<bool>() {
            let pi = self.fresh_pi();
            let change = Change {
                remove: Vec::new(),
                add: vec![Vec::new()],
                add_pi: vec![pi],
            };
            let ev = self.evaluate(&change);
            let log_ratio = ev.log_joint - self.log_joint + (rows + 1.0).ln() - (e + 1.0).ln();
            if self.accept(log_ratio) {
                self.commit(change, ev);
                return true;
            }
        } else if !empties.is_empty() {
            let n = empties[self.rng.random_range(0..empties.len())];
            let change = Change {
                remove: vec![n],
                ..Change::default()
            };
            let ev = self.evaluate(&change);
            let log_ratio = ev.log_joint - self.log_joint + e.ln() - rows.ln();
            if self.accept(log_ratio) {
                self.commit(change, ev);
                return true;
            }
        }
        false
    }

    /// Random-walk update of the activation probabilities on the logit
    /// scale under uniform priors. Returns `(accepted, proposed)`; per-clique
    /// mode proposes once per clique.
    pub fn resample_pi(&mut self, step: f64) -> (usize, usize) {
        match self.noise {
            Noise::Full => (0, 0),
            Noise::Shared { pi } => {
                let z: f64 = self.rng.sample(StandardNormal);
                let proposal = sigmoid(logit(pi) + step * z);
                if !(proposal > 0.0 && proposal < 1.0) {
                    return (0, 1);
                }
                let ll = self.shared_log_lik(proposal);
                let log_ratio =
                    ll - self.log_lik + (proposal * (1.0 - proposal)).ln() - (pi * (1.0 - pi)).ln();
                if self.accept(log_ratio) {
                    self.set_shared_pi(proposal);
                    (1, 1)
                } else {
                    (0, 1)
                }
            }
            Noise::PerClique => {
                let mut accepted = 0;
                for n in 0..self.rows.len() {
                    let pi = self.row_pi[n];
                    let z: f64 = self.rng.sample(StandardNormal);
                    let proposal = sigmoid(logit(pi) + step * z);
                    if !(proposal > 0.0 && proposal < 1.0) {
                        continue;
                    }
                    let shift = (-proposal).ln_1p() - (-pi).ln_1p();
                    let mut d = 0.0;
                    for (u, v) in row_pairs(&self.rows[n]) {
                        let edge = self.graph.has_edge(u, v);
                        let count = self.pair_count(u, v);
                        let lq = self.log_q(u, v, count);
                        d += self.pair_ll(edge, count, lq + shift) - self.pair_ll(edge, count, lq);
                    }
                    let log_ratio = d + (proposal * (1.0 - proposal)).ln() - (pi * (1.0 - pi)).ln();
                    if self.accept(log_ratio) {
                        self.set_row_pi(n, proposal, d);
                        accepted += 1;
                    }
                }
                (accepted, self.rows.len())
            }
        }
    }
}
