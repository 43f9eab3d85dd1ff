//! Triple-expression matching over signed neighborhoods.
//!
//! The neighborhood of a focus is indexed into a bitmask. Every subexpression
//! gets the mask of triples it could possibly consume (`alpha`) together with
//! bounds on how many it consumes; `Seq` splits then only range over triples
//! both sides could take. Results are memoized per (subexpression, subset).

use std::collections::HashMap;

use crate::model::{Direction, Focus, Name};

use super::{ShexError, TripleExpr};

/// One signed triple seen from the focus.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct SignedArc {
    pub name: Name,
    pub dir: Direction,
    pub other: Focus,
}

const INF: u32 = u32::MAX;

#[derive(Debug, Clone, Copy)]
enum Kind {
    Eps,
    Leaf(usize),
    Seq(usize, usize),
    Alt(usize, usize),
    Star(usize),
}

#[derive(Debug, Clone)]
struct Node {
    kind: Kind,
    alpha: u64,
    min: u32,
    max: u32,
    /// Denotation is exactly the singletons of `alpha`.
    single: bool,
}

/// Which leaf of the expression consumed a triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum LeafRef {
    /// Triple constraint, numbered in left-to-right order.
    Constraint(usize),
    /// A wildcard of the openness suffix.
    Wildcard,
}

pub(crate) struct Compiled {
    nodes: Vec<Node>,
    leaves: Vec<LeafRef>,
    root: usize,
    full: u64,
}

pub(crate) struct Compiler<'a, F> {
    arcs: &'a [SignedArc],
    leaf_ok: F,
    nodes: Vec<Node>,
    leaves: Vec<LeafRef>,
    constraints: usize,
}

impl<'a, F> Compiler<'a, F>
where
    F: FnMut(&TripleExpr, &SignedArc) -> Result<bool, ShexError>,
{
    pub fn new(arcs: &'a [SignedArc], leaf_ok: F) -> Self {
        Compiler {
            arcs,
            leaf_ok,
            nodes: Vec::new(),
            leaves: Vec::new(),
            constraints: 0,
        }
    }

    fn push(&mut self, node: Node) -> usize {
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    fn leaf(&mut self, expr: &TripleExpr, r: LeafRef) -> Result<usize, ShexError> {
        let mut alpha = 0u64;
        for (i, arc) in self.arcs.iter().enumerate() {
            if (self.leaf_ok)(expr, arc)? {
                alpha |= 1 << i;
            }
        }
        self.leaves.push(r);
        let id = self.leaves.len() - 1;
        let max = if alpha == 0 { 0 } else { 1 };
        Ok(self.push(Node {
            kind: Kind::Leaf(id),
            alpha,
            min: 1,
            max,
            single: true,
        }))
    }

    pub fn expr(&mut self, e: &TripleExpr) -> Result<usize, ShexError> {
        match e {
            TripleExpr::Eps => Ok(self.push(Node {
                kind: Kind::Eps,
                alpha: 0,
                min: 0,
                max: 0,
                single: false,
            })),
            TripleExpr::Tc { .. } => {
                let r = LeafRef::Constraint(self.constraints);
                self.constraints += 1;
                self.leaf(e, r)
            }
            TripleExpr::WildOut { .. } | TripleExpr::WildIn { .. } => self.leaf(e, LeafRef::Wildcard),
            TripleExpr::Seq { left, right } => {
                let a = self.expr(left)?;
                let b = self.expr(right)?;
                Ok(self.seq(a, b))
            }
            TripleExpr::Alt { left, right } => {
                let a = self.expr(left)?;
                let b = self.expr(right)?;
                let (na, nb) = (&self.nodes[a], &self.nodes[b]);
                let alpha = na.alpha | nb.alpha;
                let node = Node {
                    kind: Kind::Alt(a, b),
                    alpha,
                    min: na.min.min(nb.min),
                    max: na.max.max(nb.max).min(alpha.count_ones()),
                    single: na.single && nb.single,
                };
                Ok(self.push(node))
            }
            TripleExpr::Star { expr } => {
                let a = self.expr(expr)?;
                Ok(self.star(a))
            }
        }
    }

    pub fn seq(&mut self, a: usize, b: usize) -> usize {
        let (na, nb) = (&self.nodes[a], &self.nodes[b]);
        let alpha = na.alpha | nb.alpha;
        let max = if na.max == INF || nb.max == INF {
            INF
        } else {
            na.max + nb.max
        };
        let node = Node {
            kind: Kind::Seq(a, b),
            alpha,
            min: na.min.saturating_add(nb.min),
            max: max.min(alpha.count_ones()),
            single: false,
        };
        self.push(node)
    }

    pub fn star(&mut self, a: usize) -> usize {
        let alpha = self.nodes[a].alpha;
        let node = Node {
            kind: Kind::Star(a),
            alpha,
            min: 0,
            max: alpha.count_ones(),
            single: false,
        };
        self.push(node)
    }

    /// Adds a wildcard leaf for the openness suffix.
    pub fn wildcard(&mut self, e: &TripleExpr) -> Result<usize, ShexError> {
        self.leaf(e, LeafRef::Wildcard)
    }

    pub fn finish(self, root: usize) -> Compiled {
        let n = self.arcs.len();
        let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        Compiled {
            nodes: self.nodes,
            leaves: self.leaves,
            root,
            full,
        }
    }
}

/// Enumerates the subsets of `free` whose size lies in `lo..=hi`.
struct SizedSubsets {
    positions: Vec<u8>,
    k: u32,
    hi: u32,
    cur: Option<u64>,
}

impl SizedSubsets {
    fn new(free: u64, lo: u32, hi: u32) -> Self {
        let positions: Vec<u8> = (0..64u8).filter(|i| free >> i & 1 == 1).collect();
        let n = positions.len() as u32;
        let hi = hi.min(n);
        let mut s = SizedSubsets {
            positions,
            k: lo,
            hi,
            cur: None,
        };
        if lo <= hi {
            s.cur = Some(first_of_size(lo));
        }
        s
    }

    fn spread(&self, x: u64) -> u64 {
        let mut out = 0u64;
        let mut rest = x;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            out |= 1u64 << self.positions[i];
            rest &= rest - 1;
        }
        out
    }
}

fn first_of_size(k: u32) -> u64 {
    if k == 0 {
        0
    } else {
        (1u64 << k) - 1
    }
}

impl Iterator for SizedSubsets {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        let x = self.cur?;
        let out = self.spread(x);
        let n = self.positions.len() as u32;
        // Gosper's hack for the next subset of the same size
        let next = if x == 0 {
            None
        } else {
            let c = x & x.wrapping_neg();
            let r = x + c;
            let y = (((r ^ x) >> 2) / c) | r;
            if n < 64 && y >> n != 0 {
                None
            } else {
                Some(y)
            }
        };
        self.cur = match next {
            Some(y) => Some(y),
            None if self.k < self.hi => {
                self.k += 1;
                Some(first_of_size(self.k))
            }
            None => None,
        };
        Some(out)
    }
}

pub(crate) struct Matcher<'c> {
    c: &'c Compiled,
    memo: HashMap<(usize, u64), bool>,
}

impl<'c> Matcher<'c> {
    pub fn new(c: &'c Compiled) -> Self {
        Matcher {
            c,
            memo: HashMap::new(),
        }
    }

    pub fn run(&mut self) -> bool {
        self.m(self.c.root, self.c.full)
    }

    fn seq_bounds(&self, a: usize, b: usize, s: u64) -> (u64, u64, u64, u32, u32) {
        let (na, nb) = (&self.c.nodes[a], &self.c.nodes[b]);
        let forced_a = s & !nb.alpha;
        let free = s & na.alpha & nb.alpha;
        let size = s.count_ones();
        let fa = forced_a.count_ones();
        let lo_t = na.min.max(size.saturating_sub(nb.max));
        let hi_t = na.max.min(size.saturating_sub(nb.min));
        let lo = lo_t.saturating_sub(fa);
        let hi = if hi_t < fa { 0 } else { hi_t - fa };
        let empty = hi_t < fa || lo_t > hi_t;
        (forced_a, free, if empty { 1 } else { 0 }, lo, hi)
    }

    fn m(&mut self, n: usize, s: u64) -> bool {
        let node = &self.c.nodes[n];
        if s & !node.alpha != 0 {
            return false;
        }
        let size = s.count_ones();
        if size < node.min || size > node.max {
            return false;
        }
        match node.kind {
            Kind::Eps => s == 0,
            Kind::Leaf(_) => size == 1,
            Kind::Alt(a, b) => self.m(a, s) || self.m(b, s),
            Kind::Star(_) if s == 0 => true,
            Kind::Star(a) if self.c.nodes[a].single => true,
            Kind::Seq(..) | Kind::Star(_) => {
                if let Some(&r) = self.memo.get(&(n, s)) {
                    return r;
                }
                let r = self.split(n, s).is_some();
                self.memo.insert((n, s), r);
                r
            }
        }
    }

    /// Finds how `s` splits between the two children of a `Seq` or between
    /// one piece and the rest of a `Star`.
    fn split(&mut self, n: usize, s: u64) -> Option<(u64, u64)> {
        match self.c.nodes[n].kind {
            Kind::Seq(a, b) => {
                let (forced_a, free, empty, lo, hi) = self.seq_bounds(a, b, s);
                if empty == 1 {
                    return None;
                }
                for f in SizedSubsets::new(free, lo, hi) {
                    let t = forced_a | f;
                    if self.m(a, t) && self.m(b, s ^ t) {
                        return Some((t, s ^ t));
                    }
                }
                None
            }
            Kind::Star(a) => {
                let body = &self.c.nodes[a];
                let low = s & s.wrapping_neg();
                let rest = (s ^ low) & body.alpha;
                let lo = body.min.max(1) - 1;
                let hi = body.max.saturating_sub(1);
                if body.max == 0 {
                    return None;
                }
                for f in SizedSubsets::new(rest, lo, hi) {
                    let t = low | f;
                    if self.m(a, t) && self.m(n, s ^ t) {
                        return Some((t, s ^ t));
                    }
                }
                None
            }
            _ => None,
        }
    }

    /// Reconstructs which leaf consumed each triple of a successful match.
    pub fn witness(&mut self) -> Option<Vec<(LeafRef, usize)>> {
        if !self.run() {
            return None;
        }
        let mut out = Vec::new();
        self.build(self.c.root, self.c.full, &mut out);
        out.sort_by_key(|&(_, i)| i);
        Some(out)
    }

    fn build(&mut self, n: usize, s: u64, out: &mut Vec<(LeafRef, usize)>) {
        match self.c.nodes[n].kind {
            Kind::Eps => {}
            Kind::Leaf(id) => out.push((self.c.leaves[id], s.trailing_zeros() as usize)),
            Kind::Alt(a, b) => {
                if self.m(a, s) {
                    self.build(a, s, out)
                } else {
                    self.build(b, s, out)
                }
            }
            Kind::Star(a) => {
                if s == 0 {
                    return;
                }
                if self.c.nodes[a].single {
                    let mut rest = s;
                    while rest != 0 {
                        let bit = rest & rest.wrapping_neg();
                        self.build(a, bit, out);
                        rest ^= bit;
                    }
                    return;
                }
                let (t, r) = self.split(n, s).expect("matched star has a split");
                self.build(a, t, out);
                self.build(n, r, out);
            }
            Kind::Seq(a, b) => {
                let (t, r) = self.split(n, s).expect("matched seq has a split");
                self.build(a, t, out);
                self.build(b, r, out);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sized_subsets_cover_exactly() {
        let free = 0b1011_0110u64;
        let got: Vec<u64> = SizedSubsets::new(free, 1, 2).collect();
        let mut expected: Vec<u64> = Vec::new();
        let mut sub = free;
        loop {
            let c = sub.count_ones();
            if (1..=2).contains(&c) {
                expected.push(sub);
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & free;
        }
        let mut g = got.clone();
        g.sort();
        expected.sort();
        assert_eq!(g, expected);
        assert_eq!(SizedSubsets::new(0, 0, 3).collect::<Vec<_>>(), vec![0]);
        assert!(SizedSubsets::new(0b11, 3, 5).next().is_none());
    }
}
