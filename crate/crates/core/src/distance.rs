//! Distance-type integrands `dist_q^p((xi, zeta), K)` with exact
//! (non-grid) evaluation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{default_level_eps, level_set, sample_function, GridFunction, GridSet, ScalarGrid};
use crate::sets::convex_hull_points;

/// The `q`-norm on the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Norm {
    L1,
    L2,
    LInf,
    Lq(f64),
}

impl Norm {
    pub fn from_q(q: f64) -> Result<Self> {
        match q {
            q if q == 1.0 => Ok(Norm::L1),
            q if q == 2.0 => Ok(Norm::L2),
            q if q == f64::INFINITY => Ok(Norm::LInf),
            q if q > 1.0 && q.is_finite() => Ok(Norm::Lq(q)),
            _ => Err(Error::InvalidArgument(format!("q must lie in [1, inf], got {q}"))),
        }
    }

    pub fn eval(&self, dx: f64, dy: f64) -> f64 {
        let (ax, ay) = (dx.abs(), dy.abs());
        match *self {
            Norm::L1 => ax + ay,
            Norm::L2 => ax.hypot(ay),
            Norm::LInf => ax.max(ay),
            Norm::Lq(q) => (ax.powf(q) + ay.powf(q)).powf(1.0 / q),
        }
    }
}

type Point = (f64, f64);

/// Target set `K` of a distance integrand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TargetSet {
    /// A finite point set.
    Points(Vec<Point>),
    /// The sphere `{|xi| + |zeta| = r}` of the 1-norm.
    L1Sphere { radius: f64 },
    /// `A x A` for a finite value set `A`.
    Cartesian(Vec<f64>),
    /// A closed convex polygon, vertices counter-clockwise (one or two
    /// vertices give a point or a segment).
    ConvexPolygon(Vec<Point>),
    /// Marked nodes of a grid set.
    Mask(Vec<Point>),
    /// The square `[lo, hi]^2`.
    Square { lo: f64, hi: f64 },
}

fn segment_distance(norm: Norm, p: Point, a: Point, b: Point) -> f64 {
    let d = (b.0 - a.0, b.1 - a.1);
    let at = |t: f64| norm.eval(p.0 - a.0 - t * d.0, p.1 - a.1 - t * d.1);
    if d == (0.0, 0.0) {
        return at(0.0);
    }
    match norm {
        Norm::L2 => {
            let t = ((p.0 - a.0) * d.0 + (p.1 - a.1) * d.1) / (d.0 * d.0 + d.1 * d.1);
            at(t.clamp(0.0, 1.0))
        }
        Norm::L1 | Norm::LInf => {
            // piecewise linear in t: the minimum sits at an endpoint or a kink
            let (rx, ry) = (p.0 - a.0, p.1 - a.1);
            let mut ts = vec![0.0, 1.0];
            if d.0 != 0.0 {
                ts.push(rx / d.0);
            }
            if d.1 != 0.0 {
                ts.push(ry / d.1);
            }
            if norm == Norm::LInf {
                if d.0 != d.1 {
                    ts.push((rx - ry) / (d.0 - d.1));
                }
                if d.0 != -d.1 {
                    ts.push((rx + ry) / (d.0 + d.1));
                }
            }
            ts.into_iter()
                .filter(|t| (0.0..=1.0).contains(t))
                .map(at)
                .fold(f64::INFINITY, f64::min)
        }
        Norm::Lq(_) => {
            // convex in t; golden-section search to machine resolution
            let g = (5f64.sqrt() - 1.0) / 2.0;
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..200 {
                let m1 = hi - g * (hi - lo);
                let m2 = lo + g * (hi - lo);
                if at(m1) <= at(m2) {
                    hi = m2;
                } else {
                    lo = m1;
                }
            }
            at(0.5 * (lo + hi)).min(at(0.0)).min(at(1.0))
        }
    }
}

fn polygon_contains(poly: &[Point], p: Point) -> bool {
    if poly.len() < 3 {
        return false;
    }
    (0..poly.len()).all(|k| {
        let a = poly[k];
        let b = poly[(k + 1) % poly.len()];
        (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0) >= 0.0
    })
}

/// Distance from a point to a value interval on one axis.
pub fn interval_distance(x: f64, lo: f64, hi: f64) -> f64 {
    if x < lo {
        lo - x
    } else if x > hi {
        x - hi
    } else {
        0.0
    }
}

fn point_set_distance(norm: Norm, pts: &[Point], p: Point) -> f64 {
    pts.iter()
        .map(|&(a, b)| norm.eval(p.0 - a, p.1 - b))
        .fold(f64::INFINITY, f64::min)
}

impl TargetSet {
    pub fn is_empty(&self) -> bool {
        match self {
            TargetSet::Points(v) | TargetSet::ConvexPolygon(v) | TargetSet::Mask(v) => v.is_empty(),
            TargetSet::Cartesian(a) => a.is_empty(),
            TargetSet::L1Sphere { .. } => false,
            TargetSet::Square { lo, hi } => !(lo <= hi),
        }
    }

    pub fn distance(&self, norm: Norm, p: Point) -> f64 {
        match self {
            TargetSet::Points(pts) | TargetSet::Mask(pts) => point_set_distance(norm, pts, p),
            TargetSet::L1Sphere { radius } => {
                if norm == Norm::L1 {
                    return (p.0.abs() + p.1.abs() - radius).abs();
                }
                let r = *radius;
                let v = [(r, 0.0), (0.0, r), (-r, 0.0), (0.0, -r)];
                (0..4)
                    .map(|k| segment_distance(norm, p, v[k], v[(k + 1) % 4]))
                    .fold(f64::INFINITY, f64::min)
            }
            TargetSet::Cartesian(a) => {
                let d = |x: f64| a.iter().map(|&v| (x - v).abs()).fold(f64::INFINITY, f64::min);
                norm.eval(d(p.0), d(p.1))
            }
            TargetSet::Square { lo, hi } => norm.eval(interval_distance(p.0, *lo, *hi), interval_distance(p.1, *lo, *hi)),
            TargetSet::ConvexPolygon(poly) => match poly.len() {
                1 => norm.eval(p.0 - poly[0].0, p.1 - poly[0].1),
                2 => segment_distance(norm, p, poly[0], poly[1]),
                _ if polygon_contains(poly, p) => 0.0,
                m => (0..m)
                    .map(|k| segment_distance(norm, p, poly[k], poly[(k + 1) % m]))
                    .fold(f64::INFINITY, f64::min),
            },
        }
    }

    /// The closed convex hull as an exact target.
    pub fn convex_hull(&self) -> TargetSet {
        match self {
            TargetSet::Points(pts) | TargetSet::Mask(pts) => TargetSet::ConvexPolygon(float_hull(pts)),
            TargetSet::L1Sphere { radius } => {
                let r = *radius;
                TargetSet::ConvexPolygon(vec![(r, 0.0), (0.0, r), (-r, 0.0), (0.0, -r)])
            }
            TargetSet::Cartesian(a) => {
                let lo = a.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                TargetSet::Square { lo, hi }
            }
            TargetSet::ConvexPolygon(_) | TargetSet::Square { .. } => self.clone(),
        }
    }
}

/// Convex hull of exact coordinates: points are ranked on a common dyadic
/// lattice when possible, otherwise the float hull is taken directly.
fn float_hull(pts: &[Point]) -> Vec<Point> {
    let mut sorted: Vec<Point> = pts.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    sorted.dedup();
    // scale to integers when all coordinates are multiples of 2^-20
    let scale = (1u64 << 20) as f64;
    let exact = sorted
        .iter()
        .all(|&(x, y)| (x * scale).fract() == 0.0 && (y * scale).fract() == 0.0 && x.abs() < 1e6 && y.abs() < 1e6);
    if exact {
        let ints: Vec<(i64, i64)> = sorted
            .iter()
            .map(|&(x, y)| ((x * scale) as i64, (y * scale) as i64))
            .collect();
        return convex_hull_points(ints)
            .into_iter()
            .map(|(x, y)| (x as f64 / scale, y as f64 / scale))
            .collect();
    }
    let cross = |o: Point, a: Point, b: Point| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    if sorted.len() <= 2 {
        return sorted;
    }
    let mut hull: Vec<Point> = Vec::new();
    for &p in &sorted {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len();
    for &p in sorted.iter().rev().skip(1) {
        while hull.len() > lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    if hull.len() == 1 {
        return vec![sorted[0], *sorted.last().expect("non-empty")];
    }
    hull
}

/// `W(xi, zeta) = dist_q((xi, zeta), K)^p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceIntegrand {
    pub target: TargetSet,
    pub p: f64,
    pub norm: Norm,
}

impl DistanceIntegrand {
    pub fn new(target: TargetSet, p: f64, norm: Norm) -> Result<Self> {
        if target.is_empty() {
            return Err(Error::Empty("target set"));
        }
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::InvalidArgument(format!("p must be a finite real >= 1, got {p}")));
        }
        if let TargetSet::L1Sphere { radius } = target {
            if !(radius > 0.0 && radius.is_finite()) {
                return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
            }
        }
        Ok(Self { target, p, norm })
    }

    /// `K = {(±1, 0), (0, ±1)}`.
    pub fn four_wells(p: f64, norm: Norm) -> Result<Self> {
        Self::new(TargetSet::Points(vec![(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)]), p, norm)
    }

    /// The four wells together with `(2, 2)`.
    pub fn five_point(p: f64, norm: Norm) -> Result<Self> {
        Self::new(
            TargetSet::Points(vec![(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0), (2.0, 2.0)]),
            p,
            norm,
        )
    }

    /// `K = {|xi| + |zeta| = radius}`.
    pub fn l1_sphere(radius: f64, p: f64, norm: Norm) -> Result<Self> {
        Self::new(TargetSet::L1Sphere { radius }, p, norm)
    }

    /// `K = A x A`.
    pub fn cartesian(a: Vec<f64>, p: f64, norm: Norm) -> Result<Self> {
        Self::new(TargetSet::Cartesian(a), p, norm)
    }

    /// Distance to the marked nodes of a grid set.
    pub fn from_mask(k: &GridSet, p: f64, norm: Norm) -> Result<Self> {
        let g = k.grid();
        let pts = k.cells().into_iter().map(|(i, j)| (g.point(i), g.point(j))).collect();
        Self::new(TargetSet::Mask(pts), p, norm)
    }

    /// Exact membership of a pair in `K`.
    pub fn contains(&self, xi: f64, zeta: f64) -> bool {
        self.target.distance(self.norm, (xi, zeta)) == 0.0
    }

    pub fn eval(&self, xi: f64, zeta: f64) -> f64 {
        let d = self.target.distance(self.norm, (xi, zeta));
        if self.p == 1.0 {
            d
        } else if self.p == 2.0 {
            d * d
        } else {
            d.powf(self.p)
        }
    }

    /// `dist_q^p(., K^co)`, the exact convex envelope.
    pub fn convex_hull_rule(&self) -> DistanceIntegrand {
        DistanceIntegrand {
            target: self.target.convex_hull(),
            p: self.p,
            norm: self.norm,
        }
    }

    pub fn sample(&self, grid: &ScalarGrid) -> Result<GridFunction> {
        sample_function(grid, |x, y| self.eval(x, y))
    }

    /// Grid trace of `K`: nodes where the sampled integrand vanishes up to
    /// the default zero-level slack.
    pub fn target_mask(&self, grid: &ScalarGrid) -> Result<GridSet> {
        let w = self.sample(grid)?;
        Ok(level_set(&w, 0.0, default_level_eps(0.0)))
    }
}

/// Sample a distance integrand on a grid.
pub fn distance_integrand(grid: &ScalarGrid, k: &DistanceIntegrand) -> Result<GridFunction> {
    k.sample(grid)
}
