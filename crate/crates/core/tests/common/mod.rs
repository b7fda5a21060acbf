//! Brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet, VecDeque};

use quadnil_core::presentation::{Letter, Presentation, Word, WINDOW};
use quadnil_core::Complex;

/// Floyd–Warshall over the edge list.
pub fn floyd(c: &Complex) -> Vec<Vec<u32>> {
    let n = c.vertex_count();
    let inf = u32::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for e in c.edges() {
        d[e.tail.index()][e.head.index()] = 1;
        d[e.head.index()][e.tail.index()] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

/// Every simple path from `a` to `b` of exactly `len` edges, by plain DFS
/// over the edge list.
pub fn dfs_paths(c: &Complex, fw: &[Vec<u32>], a: usize, b: usize, len: u32) -> BTreeSet<Vec<u32>> {
    let mut adj = vec![Vec::new(); c.vertex_count()];
    for e in c.edges() {
        adj[e.tail.index()].push(e.head.index());
        adj[e.head.index()].push(e.tail.index());
    }
    let mut out = BTreeSet::new();
    let mut path = vec![a];
    fn go(
        adj: &[Vec<usize>],
        fw: &[Vec<u32>],
        b: usize,
        left: u32,
        path: &mut Vec<usize>,
        out: &mut BTreeSet<Vec<u32>>,
    ) {
        let v = *path.last().unwrap();
        if left == 0 {
            if v == b {
                out.insert(path.iter().map(|&x| x as u32).collect());
            }
            return;
        }
        for &w in &adj[v] {
            if !path.contains(&w) && fw[w][b] < left {
                path.push(w);
                go(adj, fw, b, left - 1, path, out);
                path.pop();
            }
        }
    }
    go(&adj, fw, b, len, &mut path, &mut out);
    out
}

/// Zero by definition: a forbidden factor of length ≤ 9 or a back-and-forth
/// factor.
pub fn naive_zero(p: &Presentation, w: &[Letter]) -> bool {
    (0..w.len()).any(|i| {
        (1..=WINDOW.min(w.len() - i)).any(|l| !p.allows(&w[i..i + l]))
            || (i + 7 <= w.len() && p.is_back_and_forth(&w[i..i + 7]))
    })
}

/// Every word one relation step away, by trying every relation everywhere.
pub fn naive_neighbors(p: &Presentation, w: &[Letter]) -> Vec<Word> {
    let mut out = Vec::new();
    for r in &p.equivalences {
        let (a, b) = r.sides().unwrap();
        for (x, y) in [(a, b), (b, a)] {
            for i in 0..(w.len() + 1).saturating_sub(7) {
                if &w[i..i + 7] == x.as_slice() {
                    let mut v = w.to_vec();
                    v.splice(i..i + 7, y.iter().copied());
                    out.push(v);
                }
            }
        }
    }
    out
}

/// The whole class of `w` and whether it holds a zero word.
pub fn naive_class(p: &Presentation, w: &[Letter]) -> (usize, bool) {
    let mut seen: HashSet<Word> = HashSet::from([w.to_vec()]);
    let mut queue = VecDeque::from([w.to_vec()]);
    let mut zero = false;
    while let Some(x) = queue.pop_front() {
        zero |= naive_zero(p, &x);
        for y in naive_neighbors(p, &x) {
            if seen.insert(y.clone()) {
                queue.push_back(y);
            }
        }
    }
    (seen.len(), zero)
}
