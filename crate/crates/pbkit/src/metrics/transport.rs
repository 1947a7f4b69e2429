//! One-dimensional transport: monotone coupling, W-infinity and a flow-based threshold oracle.

use std::collections::VecDeque;

use num_rational::BigRational;
use num_traits::Signed;

use crate::error::{PbError, Result};
use crate::lattice::LatticeDist;
use crate::scalar::{Scalar, FLOAT_TOL};

/// Largest support accepted by [`winf_oracle`].
pub const ORACLE_MAX_SUPPORT: usize = 60;

/// A transference plan between two lattice distributions, stored sparsely by lattice index.
#[derive(Clone, Debug)]
pub struct Coupling<S = f64> {
    pub source: LatticeDist<S>,
    pub target: LatticeDist<S>,
    pub plan: Vec<(usize, usize, S)>,
}

impl<S: Scalar> Coupling<S> {
    /// Largest `|x - y|` carrying positive mass.
    pub fn max_displacement(&self) -> BigRational {
        self.plan
            .iter()
            .filter(|(_, _, m)| m.gt_zero())
            .map(|(i, j, _)| (self.source.value(*i) - self.target.value(*j)).abs())
            .max()
            .unwrap_or_default()
    }

    /// Row sums equal source masses and column sums equal target masses (exactly, or within `tol`).
    pub fn marginals_ok(&self, tol: f64) -> bool {
        let mut rows = vec![S::zero(); self.source.len()];
        let mut cols = vec![S::zero(); self.target.len()];
        for (i, j, m) in &self.plan {
            if m.definitely_lt(&S::zero(), tol) {
                return false;
            }
            rows[*i] = rows[*i].clone() + m.clone();
            cols[*j] = cols[*j].clone() + m.clone();
        }
        rows.iter().zip(self.source.masses()).all(|(a, b)| a.near(b, tol))
            && cols.iter().zip(self.target.masses()).all(|(a, b)| a.near(b, tol))
    }

    /// Dense `source.len() x target.len()` matrix.
    pub fn dense(&self) -> Vec<Vec<S>> {
        let mut m = vec![vec![S::zero(); self.target.len()]; self.source.len()];
        for (i, j, v) in &self.plan {
            m[*i][*j] = m[*i][*j].clone() + v.clone();
        }
        m
    }
}

fn positive_indices<S: Scalar>(d: &LatticeDist<S>) -> Vec<usize> {
    (0..d.len()).filter(|&i| d.masses()[i].gt_zero()).collect()
}

/// Northwest-corner (quantile) coupling of two distributions on the line.
pub fn monotone_coupling<S: Scalar>(a: &LatticeDist<S>, b: &LatticeDist<S>) -> Coupling<S> {
    let ia = positive_indices(a);
    let ib = positive_indices(b);
    let mut plan = Vec::new();
    let (mut x, mut y) = (0usize, 0usize);
    let mut ra = ia.first().map(|&i| a.masses()[i].clone()).unwrap_or_else(S::zero);
    let mut rb = ib.first().map(|&j| b.masses()[j].clone()).unwrap_or_else(S::zero);
    while x < ia.len() && y < ib.len() {
        let last_a = x + 1 == ia.len();
        let last_b = y + 1 == ib.len();
        let exhaust_a;
        let exhaust_b;
        let delta;
        if last_a && last_b {
            delta = if ra > rb { ra.clone() } else { rb.clone() };
            exhaust_a = true;
            exhaust_b = true;
        } else if ra.near(&rb, FLOAT_TOL * 0.01) {
            delta = ra.clone();
            exhaust_a = true;
            exhaust_b = true;
        } else if ra < rb {
            delta = ra.clone();
            exhaust_a = true;
            exhaust_b = last_a;
        } else {
            delta = rb.clone();
            exhaust_b = true;
            exhaust_a = last_b;
        }
        plan.push((ia[x], ib[y], delta.clone()));
        if exhaust_a {
            x += 1;
            ra = ia.get(x).map(|&i| a.masses()[i].clone()).unwrap_or_else(S::zero);
        } else {
            ra = ra - delta.clone();
        }
        if exhaust_b {
            y += 1;
            rb = ib.get(y).map(|&j| b.masses()[j].clone()).unwrap_or_else(S::zero);
        } else {
            rb = rb - delta;
        }
    }
    Coupling { source: a.clone(), target: b.clone(), plan }
}

/// `W_inf(a, b)` through the monotone coupling; exact on the rational lattice.
pub fn winf<S: Scalar>(a: &LatticeDist<S>, b: &LatticeDist<S>) -> BigRational {
    monotone_coupling(a, b).max_displacement()
}

struct FlowEdge<S> {
    to: usize,
    cap: S,
}

/// Dinic max-flow over a generic field.
struct Dinic<S> {
    edges: Vec<FlowEdge<S>>,
    adj: Vec<Vec<usize>>,
    level: Vec<i64>,
    iter: Vec<usize>,
}

impl<S: Scalar> Dinic<S> {
    fn new(n: usize) -> Self {
        Self { edges: Vec::new(), adj: vec![Vec::new(); n], level: vec![0; n], iter: vec![0; n] }
    }

    fn add_edge(&mut self, u: usize, v: usize, cap: S) {
        self.adj[u].push(self.edges.len());
        self.edges.push(FlowEdge { to: v, cap });
        self.adj[v].push(self.edges.len());
        self.edges.push(FlowEdge { to: u, cap: S::zero() });
    }

    fn usable(c: &S) -> bool {
        if S::EXACT {
            c.gt_zero()
        } else {
            c.to_f64() > 1e-15
        }
    }

    fn bfs(&mut self, s: usize) {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &e in &self.adj[u] {
                let v = self.edges[e].to;
                if self.level[v] < 0 && Self::usable(&self.edges[e].cap) {
                    self.level[v] = self.level[u] + 1;
                    q.push_back(v);
                }
            }
        }
    }

    fn dfs(&mut self, u: usize, t: usize, f: S) -> S {
        if u == t {
            return f;
        }
        while self.iter[u] < self.adj[u].len() {
            let e = self.adj[u][self.iter[u]];
            let v = self.edges[e].to;
            if Self::usable(&self.edges[e].cap) && self.level[v] == self.level[u] + 1 {
                let lim = if self.edges[e].cap < f { self.edges[e].cap.clone() } else { f.clone() };
                let d = self.dfs(v, t, lim);
                if Self::usable(&d) {
                    self.edges[e].cap = self.edges[e].cap.clone() - d.clone();
                    self.edges[e ^ 1].cap = self.edges[e ^ 1].cap.clone() + d.clone();
                    return d;
                }
            }
            self.iter[u] += 1;
        }
        S::zero()
    }

    fn max_flow(&mut self, s: usize, t: usize, bound: S) -> S {
        let mut flow = S::zero();
        loop {
            self.bfs(s);
            if self.level[t] < 0 {
                return flow;
            }
            self.iter.iter_mut().for_each(|i| *i = 0);
            loop {
                let f = self.dfs(s, t, bound.clone());
                if !Self::usable(&f) {
                    break;
                }
                flow = flow + f;
            }
        }
    }
}

/// Does a coupling supported on `{|x - y| <= t}` exist?  Decided by max-flow.
pub fn coupling_feasible<S: Scalar>(a: &LatticeDist<S>, b: &LatticeDist<S>, t: &BigRational) -> bool {
    let ia = positive_indices(a);
    let ib = positive_indices(b);
    let (na, nb) = (ia.len(), ib.len());
    let (src, sink) = (na + nb, na + nb + 1);
    let mut g = Dinic::new(na + nb + 2);
    let big = S::from_int(2);
    for (u, &i) in ia.iter().enumerate() {
        g.add_edge(src, u, a.masses()[i].clone());
        let xi = a.value(i);
        for (v, &j) in ib.iter().enumerate() {
            if (&xi - b.value(j)).abs() <= *t {
                g.add_edge(u, na + v, big.clone());
            }
        }
    }
    for (v, &j) in ib.iter().enumerate() {
        g.add_edge(na + v, sink, b.masses()[j].clone());
    }
    let total = a.total();
    let flow = g.max_flow(src, sink, big);
    if S::EXACT {
        flow == total
    } else {
        flow.to_f64() >= total.to_f64() - 1e-12
    }
}

/// Smallest pairwise distance admitting a feasible coupling (binary search over distances).
pub fn winf_oracle<S: Scalar>(a: &LatticeDist<S>, b: &LatticeDist<S>) -> Result<BigRational> {
    let ia = positive_indices(a);
    let ib = positive_indices(b);
    if ia.len() > ORACLE_MAX_SUPPORT || ib.len() > ORACLE_MAX_SUPPORT {
        return Err(PbError::Size(format!(
            "oracle supports at most {ORACLE_MAX_SUPPORT} atoms per side, got {} and {}",
            ia.len(),
            ib.len()
        )));
    }
    let mut cands: Vec<BigRational> = ia
        .iter()
        .flat_map(|&i| ib.iter().map(move |&j| (a.value(i) - b.value(j)).abs()))
        .collect();
    cands.sort();
    cands.dedup();
    let (mut lo, mut hi) = (0usize, cands.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if coupling_feasible(a, b, &cands[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(cands[lo].clone())
}
