//! Independent reference oracles and instance builders shared by the
//! integration tests. Nothing here calls the library's tour oracles.

#![allow(dead_code)]

use online_tsp::metric::{MetricSpace, MetricSpaceSpec, PointId};
use rand::Rng;

/// Distinct points of `ids` by pairwise distance zero, first occurrence kept.
pub fn dedupe(space: &MetricSpace, ids: &[PointId]) -> Vec<PointId> {
    let mut out: Vec<PointId> = Vec::new();
    for &p in ids {
        if !out.iter().any(|&q| space.dist(p, q) == 0.0) {
            out.push(p);
        }
    }
    out
}

fn path_len(space: &MetricSpace, order: &[PointId]) -> f64 {
    order.windows(2).map(|w| space.dist(w[0], w[1])).sum()
}

/// Shortest Hamiltonian path over the distinct points, by trying every
/// permutation (Heap's algorithm). Limited to 9 distinct points.
pub fn brute_force_opt(space: &MetricSpace, ids: &[PointId]) -> f64 {
    let mut pts = dedupe(space, ids);
    let k = pts.len();
    assert!(
        (1..=9).contains(&k),
        "brute force limited to 1..=9 points, got {k}"
    );
    let mut best = path_len(space, &pts);
    let mut c = vec![0usize; k];
    let mut i = 1;
    while i < k {
        if c[i] < i {
            if i % 2 == 0 {
                pts.swap(0, i);
            } else {
                pts.swap(c[i], i);
            }
            best = best.min(path_len(space, &pts));
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best
}

/// Minimum spanning tree weight by enumerating every labelled tree through
/// its Prüfer sequence. Limited to 7 distinct points.
pub fn enumerated_mst(space: &MetricSpace, ids: &[PointId]) -> f64 {
    let pts = dedupe(space, ids);
    let k = pts.len();
    assert!((1..=7).contains(&k));
    if k == 1 {
        return 0.0;
    }
    if k == 2 {
        return space.dist(pts[0], pts[1]);
    }
    let len = k - 2;
    let total = k.pow(len as u32);
    let mut best = f64::INFINITY;
    for code in 0..total {
        let mut seq = Vec::with_capacity(len);
        let mut c = code;
        for _ in 0..len {
            seq.push(c % k);
            c /= k;
        }
        let mut degree = vec![1usize; k];
        for &s in &seq {
            degree[s] += 1;
        }
        let mut w = 0.0;
        for &s in &seq {
            let leaf = (0..k).find(|&v| degree[v] == 1).unwrap();
            w += space.dist(pts[leaf], pts[s]);
            degree[leaf] -= 1;
            degree[s] -= 1;
        }
        let rest: Vec<usize> = (0..k).filter(|&v| degree[v] == 1).collect();
        w += space.dist(pts[rest[0]], pts[rest[1]]);
        best = best.min(w);
    }
    best
}

/// Kruskal with union-find over the distinct points.
pub fn kruskal_mst(space: &MetricSpace, ids: &[PointId]) -> f64 {
    let pts = dedupe(space, ids);
    let k = pts.len();
    let mut edges = Vec::with_capacity(k * (k.saturating_sub(1)) / 2);
    for i in 0..k {
        for j in i + 1..k {
            edges.push((space.dist(pts[i], pts[j]), i, j));
        }
    }
    edges.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut parent: Vec<usize> = (0..k).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut w = 0.0;
    for (d, i, j) in edges {
        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
        if a != b {
            parent[a] = b;
            w += d;
        }
    }
    w
}

/// Maximal runs of empty cells, by a plain scan.
pub fn scan_gaps(cells: &[Option<PointId>]) -> usize {
    let mut runs = 0;
    let mut prev_empty = false;
    for c in cells {
        if c.is_none() && !prev_empty {
            runs += 1;
        }
        prev_empty = c.is_none();
    }
    runs
}

/// Sum of distances between neighbouring occupied cells.
pub fn scan_cost(cells: &[Option<PointId>], space: &MetricSpace) -> f64 {
    let mut total = 0.0;
    for w in cells.windows(2) {
        if let (Some(a), Some(b)) = (w[0], w[1]) {
            total += space.dist(a, b);
        }
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Euclidean(usize),
    Uniform,
    Matrix,
}

pub const KINDS: [Kind; 5] = [
    Kind::Euclidean(1),
    Kind::Euclidean(2),
    Kind::Euclidean(3),
    Kind::Uniform,
    Kind::Matrix,
];

/// Shortest-path closure of random positive integer weights.
pub fn metric_matrix(k: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let mut d = vec![vec![0u32; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let w = rng.gen_range(1..=12);
            d[i][j] = w;
            d[j][i] = w;
        }
    }
    for m in 0..k {
        for i in 0..k {
            for j in 0..k {
                d[i][j] = d[i][j].min(d[i][m] + d[m][j]);
            }
        }
    }
    d.into_iter()
        .map(|r| r.into_iter().map(f64::from).collect())
        .collect()
}

/// `k` points of the given kind. Euclidean points are sometimes snapped to a
/// grid so that duplicates and distance ties occur.
pub fn space_of(kind: Kind, k: usize, rng: &mut impl Rng) -> MetricSpace {
    let spec = match kind {
        Kind::Euclidean(dim) => {
            let grid = rng.gen_bool(0.3);
            MetricSpaceSpec::Euclidean {
                dim,
                points: (0..k)
                    .map(|_| {
                        (0..dim)
                            .map(|_| {
                                let x: f64 = rng.gen();
                                if grid {
                                    (x * 3.0).floor()
                                } else {
                                    x
                                }
                            })
                            .collect()
                    })
                    .collect(),
            }
        }
        Kind::Uniform => MetricSpaceSpec::Uniform {
            labels: (0..k).map(|i| format!("p{i}")).collect(),
            weights: None,
        },
        Kind::Matrix => MetricSpaceSpec::Matrix {
            matrix: metric_matrix(k, rng),
            rows: None,
            validate: true,
        },
    };
    MetricSpace::build(spec).unwrap()
}

/// A stream of `len` arrivals drawn with replacement from a space of at most
/// `max_points` points (matrix spaces are capped at 150 to keep the
/// shortest-path closure cheap).
pub fn stream_of(
    kind: Kind,
    len: usize,
    max_points: usize,
    rng: &mut impl Rng,
) -> (MetricSpace, Vec<PointId>) {
    let cap = if kind == Kind::Matrix {
        max_points.min(150)
    } else {
        max_points
    };
    let k = rng.gen_range(1..=len.clamp(1, cap.max(1)));
    let space = space_of(kind, k, rng);
    let ids = (0..len)
        .map(|_| PointId::from(rng.gen_range(0..k)))
        .collect();
    (space, ids)
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

pub fn le_rel(a: f64, b: f64, tol: f64) -> bool {
    a <= b + tol * a.abs().max(b.abs())
}

/// Points at geometrically growing distance from the origin, in a random
/// order of scales, so that nets keep overflowing and resetting. Spans about
/// 200 decades whatever the length.
pub fn expanding_stream(len: usize, rng: &mut impl Rng) -> (MetricSpace, Vec<PointId>) {
    let dim = rng.gen_range(1..=2);
    let base = 10f64.powf(200.0 / len.max(1) as f64).min(4.0);
    let mut scale = 1.0;
    let points: Vec<Vec<f64>> = (0..len)
        .map(|_| {
            scale *= base;
            (0..dim).map(|_| scale * rng.gen_range(0.5..1.0)).collect()
        })
        .collect();
    let space = MetricSpace::build(MetricSpaceSpec::Euclidean { dim, points }).unwrap();
    let mut ids: Vec<PointId> = (0..len).map(PointId::from).collect();
    // Mostly increasing, with occasional local swaps and repeats.
    for i in 1..len {
        if rng.gen_bool(0.2) {
            ids.swap(i - 1, i);
        }
        if rng.gen_bool(0.1) {
            ids[i] = ids[rng.gen_range(0..i)];
        }
    }
    (space, ids)
}
