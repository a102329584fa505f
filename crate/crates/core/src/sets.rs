//! Set algebra on planar grid sets: diagonalization, hulls and maximal
//! Cartesian pieces.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::grid::{CartesianPiece, GridSet};

/// Keeps `(i, j)` only when `(i, i)` and `(j, j)` are marked too.
pub fn diagonalize_set(e: &GridSet) -> Result<GridSet> {
    if !e.is_symmetric() {
        return Err(Error::NotSymmetric("set"));
    }
    let n = e.grid().len();
    let diag: Vec<bool> = (0..n).map(|k| e.get(k, k)).collect();
    Ok(GridSet::from_fn(*e.grid(), |i, j| e.get(i, j) && diag[i] && diag[j]))
}

/// Fixed-width bitset over vertex indices.
#[derive(Clone, PartialEq, Eq)]
pub(crate) struct Bits {
    words: Vec<u64>,
}

impl Bits {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            words: vec![0; n.div_ceil(64)],
        }
    }

    pub(crate) fn insert(&mut self, k: usize) {
        self.words[k / 64] |= 1 << (k % 64);
    }

    pub(crate) fn remove(&mut self, k: usize) {
        self.words[k / 64] &= !(1 << (k % 64));
    }

    fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    fn and(&self, other: &Bits) -> Bits {
        Bits {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
        }
    }

    fn and_count(&self, other: &Bits) -> u32 {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum()
    }

    fn and_not(&self, other: &Bits) -> Bits {
        Bits {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & !b).collect(),
        }
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            })
        })
    }
}

/// Looped vertices and their (loop-free) adjacency. An edge needs both
/// `mask(i, j)` and `mask(j, i)`, so non-symmetric input is handled too.
fn clique_graph(e: &GridSet) -> (Vec<usize>, Vec<Bits>) {
    let n = e.grid().len();
    let looped: Vec<usize> = (0..n).filter(|&k| e.get(k, k)).collect();
    let m = looped.len();
    let mut adj = vec![Bits::new(m); m];
    for a in 0..m {
        for b in a + 1..m {
            let (i, j) = (looped[a], looped[b]);
            if e.get(i, j) && e.get(j, i) {
                adj[a].insert(b);
                adj[b].insert(a);
            }
        }
    }
    (looped, adj)
}

fn degeneracy_order(adj: &[Bits]) -> Vec<usize> {
    let m = adj.len();
    let mut degree: Vec<usize> = adj.iter().map(|a| a.iter().count()).collect();
    let mut removed = vec![false; m];
    let mut order = Vec::with_capacity(m);
    for _ in 0..m {
        let v = (0..m)
            .filter(|&v| !removed[v])
            .min_by_key(|&v| (degree[v], v))
            .expect("vertices remain");
        removed[v] = true;
        order.push(v);
        for u in adj[v].iter() {
            if !removed[u] {
                degree[u] -= 1;
            }
        }
    }
    order
}

fn bron_kerbosch(adj: &[Bits], r: &mut Vec<usize>, p: Bits, mut x: Bits, out: &mut Vec<Vec<usize>>) {
    if p.is_empty() {
        if x.is_empty() {
            out.push(r.clone());
        }
        return;
    }
    let pivot = p
        .iter()
        .chain(x.iter())
        .max_by_key(|&u| (p.and_count(&adj[u]), std::cmp::Reverse(u)))
        .expect("p is non-empty");
    let mut p = p;
    let candidates: Vec<usize> = p.and_not(&adj[pivot]).iter().collect();
    for v in candidates {
        r.push(v);
        bron_kerbosch(adj, r, p.and(&adj[v]), x.and(&adj[v]), out);
        r.pop();
        p.remove(v);
        x.insert(v);
    }
}

/// All maximal `A` with `A x A` inside `e`, sorted by size (descending)
/// and then lexicographically.
pub fn maximal_cartesian_subsets(e: &GridSet) -> Vec<CartesianPiece> {
    let (looped, adj) = clique_graph(e);
    let m = looped.len();
    let mut cliques = Vec::new();
    let order = degeneracy_order(&adj);
    let mut rank = vec![0; m];
    for (r, &v) in order.iter().enumerate() {
        rank[v] = r;
    }
    for &v in &order {
        let mut p = Bits::new(m);
        let mut x = Bits::new(m);
        for u in adj[v].iter() {
            if rank[u] > rank[v] {
                p.insert(u);
            } else {
                x.insert(u);
            }
        }
        bron_kerbosch(&adj, &mut vec![v], p, x, &mut cliques);
    }
    let mut pieces: Vec<CartesianPiece> = cliques
        .into_iter()
        .map(|c| {
            let mut members: Vec<usize> = c.into_iter().map(|a| looped[a]).collect();
            members.sort_unstable();
            CartesianPiece {
                members,
                maximal: true,
            }
        })
        .collect();
    pieces.sort_by(|a, b| {
        b.members
            .len()
            .cmp(&a.members.len())
            .then_with(|| a.members.cmp(&b.members))
    });
    pieces
}

/// Fills every row and column between its first and last marked cell,
/// repeating until nothing changes.
pub fn separately_convex_hull_set(e: &GridSet) -> GridSet {
    let n = e.grid().len();
    let mut mask = e.mask().clone();
    loop {
        let mut changed = false;
        for i in 0..n {
            changed |= fill_line(&mut mask, |k| (i, k), n);
        }
        for j in 0..n {
            changed |= fill_line(&mut mask, |k| (k, j), n);
        }
        if !changed {
            break;
        }
    }
    GridSet::from_mask(*e.grid(), mask).expect("shape is preserved")
}

fn fill_line(mask: &mut Array2<bool>, at: impl Fn(usize) -> (usize, usize), n: usize) -> bool {
    let Some(first) = (0..n).find(|&k| mask[at(k)]) else {
        return false;
    };
    let last = (0..n).rev().find(|&k| mask[at(k)]).expect("line has a marked cell");
    let mut changed = false;
    for k in first + 1..last {
        let c = &mut mask[at(k)];
        if !*c {
            *c = true;
            changed = true;
        }
    }
    changed
}

fn cross(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Counter-clockwise convex hull (Andrew's monotone chain) without
/// collinear vertices. Degenerate inputs give one or two vertices.
pub(crate) fn convex_hull_points(mut pts: Vec<(i64, i64)>) -> Vec<(i64, i64)> {
    pts.sort_unstable();
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut hull: Vec<(i64, i64)> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len();
    for &p in pts.iter().rev().skip(1) {
        while hull.len() > lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    if hull.len() == 1 {
        // all points collinear and the chain collapsed
        let (a, b) = (pts[0], *pts.last().expect("non-empty"));
        return vec![a, b];
    }
    hull
}

/// Grid cells inside or on the convex hull of the marked cells, in exact
/// integer index coordinates.
pub fn convex_hull_set(e: &GridSet) -> Result<GridSet> {
    let pts: Vec<(i64, i64)> = e.cells().into_iter().map(|(i, j)| (i as i64, j as i64)).collect();
    if pts.is_empty() {
        return Err(Error::Empty("set"));
    }
    let hull = convex_hull_points(pts);
    let (imin, imax) = hull.iter().fold((i64::MAX, i64::MIN), |(lo, hi), p| (lo.min(p.0), hi.max(p.0)));
    let (jmin, jmax) = hull.iter().fold((i64::MAX, i64::MIN), |(lo, hi), p| (lo.min(p.1), hi.max(p.1)));
    let edges: Vec<((i64, i64), (i64, i64))> = (0..hull.len())
        .map(|k| (hull[k], hull[(k + 1) % hull.len()]))
        .collect();
    Ok(GridSet::from_fn(*e.grid(), |i, j| {
        let c = (i as i64, j as i64);
        (imin..=imax).contains(&c.0)
            && (jmin..=jmax).contains(&c.1)
            && edges.iter().all(|&(a, b)| a == b || cross(a, b, c) >= 0)
    }))
}

/// Union of the squares `[min A, max A]^2` over all maximal pieces.
pub fn relaxed_cartesian_union(e: &GridSet) -> GridSet {
    union_of_hull_squares(e, &maximal_cartesian_subsets(e))
}

pub(crate) fn union_of_hull_squares(e: &GridSet, pieces: &[CartesianPiece]) -> GridSet {
    let n = e.grid().len();
    let mut mask = Array2::from_elem((n, n), false);
    for piece in pieces {
        let (lo, hi) = (piece.min_index(), piece.max_index());
        for i in lo..=hi {
            for j in lo..=hi {
                mask[[i, j]] = true;
            }
        }
    }
    GridSet::from_mask(*e.grid(), mask).expect("shape is preserved")
}
