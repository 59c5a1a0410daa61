//! Seeded property checks. Each returns `Err` with a description of the
//! first violation found.

// `!(a <= b)` is deliberate: a NaN must fail a check.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

use std::collections::BTreeMap;
use std::sync::Arc;

use medgnn::data::wan::co_appearance_counts;
use medgnn::data::{
    diffuse, generate_diffusion_dataset, split, Dataset, DiffusionGso, DiffusionParams, Sample,
    WanSpec,
};
use medgnn::graph::{
    adjacency, build_neighborhood_table, exact_hop_set, extended_neighborhood,
    normalized_adjacency, random, spectral_radius, Direction, Graph, ShiftMatrix, DEFAULT_MAX_ITER,
    DEFAULT_TOL,
};
use medgnn::nn::{
    checkpoint, cross_entropy, dynamic_median_backward, dynamic_median_forward, filter_backward,
    filter_forward, readout_backward, readout_forward, relu_backward, relu_forward, softmax,
    static_median_backward, static_median_forward, Activation, Architecture, ClassProbs,
    DynamicMedian, FilterBank, FilterCache, GraphContext, MedianCache, Model, Readout,
    ReadoutCache, ReluCache, SignalBatch,
};
use medgnn::optim::{evaluate, train, AdamConfig, AdamState, TrainConfig};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::*;

pub type Check = Result<(), String>;

macro_rules! check {
    ($cond:expr, $($arg:tt)+) => {
        if !$cond {
            return Err(format!($($arg)+));
        }
    };
}

const DIRECTIONS: [Direction; 2] = [Direction::In, Direction::Out];

fn any_graph(rng: &mut ChaCha8Rng, max_n: usize) -> Graph {
    let n = rng.random_range(1..=max_n);
    let p = rng.random_range(0.02..0.35);
    let directed = rng.random_bool(0.5);
    random_graph(rng, n, p, directed)
}

/// Weakly connected with at least one directed cycle, so the adjacency has
/// a positive spectral radius.
fn connected_graph(rng: &mut ChaCha8Rng, n: usize, directed: bool) -> Graph {
    loop {
        let g = random_graph(rng, n, 0.45, directed);
        let dist = floyd_warshall(&one_hop(&g, Direction::In));
        let cyclic = (0..n).any(|i| (0..n).any(|j| i != j && dist[i][j] < INF && dist[j][i] < INF));
        if g.is_weakly_connected() && cyclic {
            return g;
        }
    }
}

fn batch_from(rows: &[Vec<f64>], features: usize, nodes: usize) -> SignalBatch {
    let values: Vec<f64> = rows.iter().flatten().copied().collect();
    SignalBatch::from_values(rows.len() / features, features, nodes, values).unwrap()
}

fn random_signals(rng: &mut ChaCha8Rng, count: usize, n: usize, ties: bool) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| {
            (0..n)
                .map(|_| {
                    if ties {
                        rng.random_range(-3..=3) as f64
                    } else {
                        rng.random_range(-1.0..1.0)
                    }
                })
                .collect()
        })
        .collect()
}

fn dense_of(s: &ShiftMatrix) -> Dense {
    (0..s.n()).map(|i| s.row(i).to_vec()).collect()
}

// ---- graph -------------------------------------------------------------

pub fn neighborhoods_match_bfs_oracle(seed: u64) -> Check {
    let mut rng = rng(seed);
    let g = any_graph(&mut rng, 50);
    for dir in DIRECTIONS {
        let table = build_neighborhood_table(&g, 3, dir);
        let dist = floyd_warshall(&one_hop(&g, dir));
        for i in 0..g.n_nodes() {
            for r in 0..=3 {
                let want = oracle_neighborhood(&dist, i, r);
                check!(
                    table.members(i, r) == want.as_slice(),
                    "table {dir:?} node {i} hop {r}: {:?} vs oracle {want:?}",
                    table.members(i, r)
                );
                check!(
                    extended_neighborhood(&g, i, r, dir) == want,
                    "extended_neighborhood {dir:?} node {i} hop {r}"
                );
            }
        }
    }
    Ok(())
}

pub fn exact_hops_match_matrix_powers(seed: u64) -> Check {
    let mut rng = rng(seed);
    let g = any_graph(&mut rng, 20);
    for dir in DIRECTIONS {
        let powers = bool_powers(&one_hop(&g, dir), 4);
        for i in 0..g.n_nodes() {
            for r in 0..=4 {
                let want: Vec<usize> = (0..g.n_nodes())
                    .filter(|&j| powers[r][i][j] && (0..r).all(|k| !powers[k][i][j]))
                    .collect();
                check!(
                    exact_hop_set(&g, i, r, dir) == want,
                    "exact hop set {dir:?} node {i} hop {r}"
                );
            }
        }
    }
    Ok(())
}

/// Spectral radius against Jacobi eigenvalues on undirected graphs, plus
/// the scaling law and unit radius after normalization on any graph.
pub fn spectral_radius_properties(seed: u64) -> Check {
    let mut rng = rng(seed);
    let n = rng.random_range(2..=25);
    let g = connected_graph(&mut rng, n, false);
    let s = adjacency(&g);
    let rho = spectral_radius(&s, DEFAULT_TOL, DEFAULT_MAX_ITER).map_err(|e| e.to_string())?;
    let eig = jacobi_eigenvalues(&dense_adjacency(&g));
    let oracle = eig.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    check!(
        (rho - oracle).abs() <= 1e-7 * oracle,
        "spectral radius {rho} vs eigenvalue oracle {oracle}"
    );

    let c = rng.random_range(0.1..3.0) * if rng.random_bool(0.5) { -1.0 } else { 1.0 };
    let scaled = spectral_radius(&s.scaled(c), DEFAULT_TOL, DEFAULT_MAX_ITER)
        .map_err(|e| e.to_string())?;
    check!(
        (scaled - c.abs() * rho).abs() <= 1e-7 * c.abs() * rho,
        "rho(cS) = {scaled}, |c| rho(S) = {}",
        c.abs() * rho
    );

    let w = normalized_adjacency(&g, DEFAULT_TOL).map_err(|e| e.to_string())?;
    let eig = jacobi_eigenvalues(&dense_of(&w));
    let top = eig.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    check!((top - 1.0).abs() <= 1e-7, "normalized radius by eigenvalues {top}");

    let directed = connected_graph(&mut rng, n, true);
    let w = normalized_adjacency(&directed, DEFAULT_TOL).map_err(|e| e.to_string())?;
    let r = spectral_radius(&w, DEFAULT_TOL, DEFAULT_MAX_ITER).map_err(|e| e.to_string())?;
    check!((r - 1.0).abs() <= 10.0 * DEFAULT_TOL, "directed normalized radius {r}");
    Ok(())
}

pub fn table_permutation_consistency(seed: u64) -> Check {
    let mut rng = rng(seed);
    let g = any_graph(&mut rng, 30);
    let mut perm: Vec<usize> = (0..g.n_nodes()).collect();
    perm.shuffle(&mut rng);
    let h = g.permute(&perm).map_err(|e| e.to_string())?;
    for dir in DIRECTIONS {
        let a = build_neighborhood_table(&g, 3, dir);
        let b = build_neighborhood_table(&h, 3, dir);
        for i in 0..g.n_nodes() {
            for r in 0..=3 {
                let mut mapped: Vec<usize> = a.members(i, r).iter().map(|&j| perm[j]).collect();
                mapped.sort_unstable();
                check!(
                    b.members(perm[i], r) == mapped.as_slice(),
                    "relabeled neighborhood of {i} at hop {r}"
                );
            }
        }
    }
    Ok(())
}

// ---- activations -------------------------------------------------------

/// Static median values and selected ids against the full-sort oracle.
pub fn static_median_matches_oracle(seed: u64) -> Check {
    let mut rng = rng(seed);
    let g = any_graph(&mut rng, 30);
    let n = g.n_nodes();
    let dir = if rng.random_bool(0.5) { Direction::In } else { Direction::Out };
    let r = rng.random_range(0..=3);
    let table = build_neighborhood_table(&g, r, dir);
    let dist = floyd_warshall(&one_hop(&g, dir));
    let ties = rng.random_bool(0.5);
    let (batch, features) = (2, 2);
    let rows = random_signals(&mut rng, batch * features, n, ties);
    let x = batch_from(&rows, features, n);
    let mut cache = MedianCache::default();
    let y = static_median_forward(&x, &table, r, &mut cache).map_err(|e| e.to_string())?;
    for b in 0..batch {
        for f in 0..features {
            let want = oracle_static_median(&rows[b * features + f], &dist, r);
            for (i, &(value, node)) in want.iter().enumerate() {
                check!(
                    y.signal(b, f)[i] == value && cache.selected(b, f, i, 0) == node,
                    "node {i} hop {r} {dir:?}: got ({}, {}), oracle ({value}, {node})",
                    y.signal(b, f)[i],
                    cache.selected(b, f, i, 0)
                );
            }
        }
    }
    Ok(())
}

/// Dynamic median against `sum_r omega_r * oracle_median_r`, accumulated
/// from hop 0 upward. Returns the number of even-sized windows seen.
pub fn dynamic_median_matches_oracle(seed: u64) -> Result<usize, String> {
    let mut rng = rng(seed);
    let g = any_graph(&mut rng, 30);
    let n = g.n_nodes();
    let dir = if rng.random_bool(0.5) { Direction::In } else { Direction::Out };
    let reach = rng.random_range(0..=3);
    let table = build_neighborhood_table(&g, reach, dir);
    let dist = floyd_warshall(&one_hop(&g, dir));
    let ties = rng.random_bool(0.5);
    let omega: Vec<f64> = (0..=reach).map(|_| rng.random_range(-1.0..1.0)).collect();
    let rows = random_signals(&mut rng, 2, n, ties);
    let x = batch_from(&rows, 1, n);
    let dm = DynamicMedian::from_weights(omega.clone()).unwrap();
    let y = dynamic_median_forward(&x, &table, &dm, &mut MedianCache::default())
        .map_err(|e| e.to_string())?;
    let mut even = 0;
    for (b, row) in rows.iter().enumerate() {
        let mut want = vec![0.0; n];
        for (r, w) in omega.iter().enumerate() {
            for (acc, (v, _)) in want.iter_mut().zip(oracle_static_median(row, &dist, r)) {
                *acc += w * v;
            }
        }
        for (i, want) in want.iter().enumerate() {
            check!(
                y.signal(b, 0)[i] == *want,
                "node {i} reach {reach}: got {}, oracle {want}",
                y.signal(b, 0)[i]
            );
        }
    }
    for i in 0..n {
        even += (0..=reach).filter(|&r| oracle_neighborhood(&dist, i, r).len().is_multiple_of(2)).count();
    }
    Ok(even)
}

fn median_setup(rng: &mut ChaCha8Rng) -> (Graph, usize, medgnn::graph::NeighborhoodTable) {
    let g = any_graph(rng, 25);
    let r = rng.random_range(1..=3);
    let dir = if rng.random_bool(0.5) { Direction::In } else { Direction::Out };
    let table = build_neighborhood_table(&g, r, dir);
    (g, r, table)
}

fn static_med(x: &SignalBatch, table: &medgnn::graph::NeighborhoodTable, r: usize) -> SignalBatch {
    static_median_forward(x, table, r, &mut MedianCache::default()).unwrap()
}

pub fn median_monotone(seed: u64) -> Check {
    let mut rng = rng(seed);
    let (g, r, table) = median_setup(&mut rng);
    let n = g.n_nodes();
    let ties = rng.random_bool(0.5);
    let rows = random_signals(&mut rng, 3, n, ties);
    let bumped: Vec<Vec<f64>> = rows
        .iter()
        .map(|row| {
            row.iter()
                .map(|v| if rng.random_bool(0.3) { *v } else { v + rng.random_range(0.0..2.0) })
                .collect()
        })
        .collect();
    let a = static_med(&batch_from(&rows, 1, n), &table, r);
    let b = static_med(&batch_from(&bumped, 1, n), &table, r);
    for (k, (p, q)) in a.values().iter().zip(b.values()).enumerate() {
        check!(p <= q, "entry {k}: med(x) = {p} > med(y) = {q}");
    }
    Ok(())
}

pub fn median_affine_equivariance(seed: u64) -> Check {
    let mut rng = rng(seed);
    let (g, r, table) = median_setup(&mut rng);
    let n = g.n_nodes();
    let a = rng.random_range(0.1..10.0);
    let c = rng.random_range(-5.0..5.0);
    let ties = rng.random_bool(0.5);
    let rows = random_signals(&mut rng, 3, n, ties);
    let mapped: Vec<Vec<f64>> = rows
        .iter()
        .map(|row| row.iter().map(|v| a * v + c).collect())
        .collect();
    let base = static_med(&batch_from(&rows, 1, n), &table, r);
    let moved = static_med(&batch_from(&mapped, 1, n), &table, r);
    for (k, (p, q)) in base.values().iter().zip(moved.values()).enumerate() {
        check!(a * p + c == *q, "entry {k}: a*med+b = {} vs med(ax+b) = {q}", a * p + c);
    }
    Ok(())
}

pub fn median_permutation_equivariance(seed: u64) -> Check {
    let mut rng = rng(seed);
    let g = any_graph(&mut rng, 25);
    let n = g.n_nodes();
    let r = rng.random_range(1..=3);
    let dir = if rng.random_bool(0.5) { Direction::In } else { Direction::Out };
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    let h = g.permute(&perm).map_err(|e| e.to_string())?;
    let ta = build_neighborhood_table(&g, r, dir);
    let tb = build_neighborhood_table(&h, r, dir);
    let ties = rng.random_bool(0.5);
    let x = random_signals(&mut rng, 1, n, ties).remove(0);
    let mut px = vec![0.0; n];
    for i in 0..n {
        px[perm[i]] = x[i];
    }
    let omega: Vec<f64> = (0..=r).map(|_| rng.random_range(-1.0..1.0)).collect();
    let dm = DynamicMedian::from_weights(omega).unwrap();

    let ya = static_med(&batch_from(std::slice::from_ref(&x), 1, n), &ta, r);
    let yb = static_med(&batch_from(std::slice::from_ref(&px), 1, n), &tb, r);
    let da = dynamic_median_forward(&batch_from(&[x], 1, n), &ta, &dm, &mut MedianCache::default())
        .unwrap();
    let db = dynamic_median_forward(&batch_from(&[px], 1, n), &tb, &dm, &mut MedianCache::default())
        .unwrap();
    for i in 0..n {
        check!(
            ya.values()[i] == yb.values()[perm[i]],
            "static median at node {i} changes under relabeling"
        );
        check!(
            da.values()[i] == db.values()[perm[i]],
            "dynamic median at node {i} changes under relabeling"
        );
    }
    Ok(())
}

/// Dyadic weights and integer signals keep every sum exact, so linearity
/// must hold bit for bit; with arbitrary reals it holds to rounding.
pub fn dynamic_median_linear_in_omega(seed: u64) -> Check {
    let mut rng = rng(seed);
    let (g, r, table) = median_setup(&mut rng);
    let n = g.n_nodes();
    for exact in [true, false] {
        let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            (0..=r)
                .map(|_| {
                    if exact {
                        rng.random_range(-16..=16) as f64 / 8.0
                    } else {
                        rng.random_range(-1.0..1.0)
                    }
                })
                .collect()
        };
        let w1 = draw(&mut rng);
        let w2 = draw(&mut rng);
        let sum: Vec<f64> = w1.iter().zip(&w2).map(|(a, b)| a + b).collect();
        let rows = random_signals(&mut rng, 2, n, exact);
        let x = batch_from(&rows, 1, n);
        let run = |w: Vec<f64>| {
            let mut cache = MedianCache::default();
            let y = dynamic_median_forward(&x, &table, &DynamicMedian::from_weights(w).unwrap(), &mut cache)
                .unwrap();
            let sel: Vec<usize> = (0..2)
                .flat_map(|b| (0..n).flat_map(move |i| (0..=r).map(move |l| (b, i, l))))
                .map(|(b, i, l)| cache.selected(b, 0, i, l))
                .collect();
            (y, sel)
        };
        let (y1, s1) = run(w1);
        let (y2, s2) = run(w2);
        let (ys, ss) = run(sum);
        check!(s1 == s2 && s1 == ss, "selections depend on omega");
        for k in 0..ys.values().len() {
            let lhs = ys.values()[k];
            let rhs = y1.values()[k] + y2.values()[k];
            if exact {
                check!(lhs == rhs, "entry {k}: {lhs} != {rhs} with dyadic weights");
            } else {
                check!(
                    (lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()),
                    "entry {k}: {lhs} vs {rhs}"
                );
            }
        }
    }
    Ok(())
}

/// On the path 0 - 1 - 2 the 1-hop median is not additive.
pub fn median_nonlinearity_witness() -> Check {
    let table = build_neighborhood_table(&random::path(3), 1, Direction::In);
    let x = [1.0, 0.0, 0.0];
    let y = [0.0, 0.0, 1.0];
    let xy: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
    let med = |v: &[f64]| static_med(&batch_from(&[v.to_vec()], 1, 3), &table, 1).values().to_vec();
    let sum: Vec<f64> = med(&x).iter().zip(med(&y)).map(|(a, b)| a + b).collect();
    check!(med(&xy) != sum, "median behaved additively on the witness");
    check!(med(&xy)[1] == 1.0 && sum[1] == 0.0, "unexpected witness values");
    Ok(())
}

// ---- gradients ---------------------------------------------------------

const FD_STEP: f64 = 1e-6;
const FD_TOL: f64 = 1e-5;

fn weights_dot(y: &SignalBatch, c: &[f64]) -> f64 {
    y.values().iter().zip(c).map(|(a, b)| a * b).sum()
}

/// Signals whose median windows (hops 1..=r) have no two values closer
/// than `margin`.
fn separated_signals(rng: &mut ChaCha8Rng, table: &medgnn::graph::NeighborhoodTable, r: usize, count: usize, n: usize, margin: f64) -> Vec<Vec<f64>> {
    loop {
        let rows = random_signals(rng, count, n, false);
        let ok = rows.iter().all(|x| {
            (1..=r).all(|hop| {
                (0..n).all(|i| {
                    let mut v: Vec<f64> = table.members(i, hop).iter().map(|&j| x[j]).collect();
                    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
                    v.windows(2).all(|w| w[1] - w[0] > margin)
                })
            })
        });
        if ok {
            return rows;
        }
    }
}

pub fn filter_gradients(seed: u64) -> Check {
    let mut rng = rng(seed);
    let n = rng.random_range(2..=8);
    let directed = rng.random_bool(0.5);
    let g = random_graph(&mut rng, n, 0.4, directed);
    let s = adjacency(&g).scaled(0.5);
    let (f_in, f_out, taps, batch) = (2, 3, 4, 2);
    let h: Vec<f64> = (0..f_in * f_out * taps).map(|_| rng.random_range(-1.0..1.0)).collect();
    let xs: Vec<f64> = (0..batch * f_in * n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let c: Vec<f64> = (0..batch * f_out * n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let loss = |h: &[f64], x: &[f64]| {
        let bank = FilterBank::from_coefficients(f_in, f_out, taps, h.to_vec()).unwrap();
        let xb = SignalBatch::from_values(batch, f_in, n, x.to_vec()).unwrap();
        weights_dot(&filter_forward(&bank, &s, &xb, &mut FilterCache::default()).unwrap(), &c)
    };
    let bank = FilterBank::from_coefficients(f_in, f_out, taps, h.clone()).unwrap();
    let mut cache = FilterCache::default();
    filter_forward(&bank, &s, &SignalBatch::from_values(batch, f_in, n, xs.clone()).unwrap(), &mut cache)
        .unwrap();
    let grad_out = SignalBatch::from_values(batch, f_out, n, c.clone()).unwrap();
    let (gh, gx) = filter_backward(&bank, &s, &cache, &grad_out).map_err(|e| e.to_string())?;
    let fh = central_diff(|p| loss(p, &xs), &h, FD_STEP);
    let fx = central_diff(|p| loss(&h, p), &xs, FD_STEP);
    check!(rel_err(&gh, &fh) < FD_TOL, "filter dL/dh rel err {}", rel_err(&gh, &fh));
    check!(rel_err(gx.values(), &fx) < FD_TOL, "filter dL/dx rel err {}", rel_err(gx.values(), &fx));
    Ok(())
}

pub fn relu_gradients(seed: u64) -> Check {
    let mut rng = rng(seed);
    let n = 7;
    let x: Vec<f64> = (0..2 * n)
        .map(|_| {
            let v: f64 = rng.random_range(0.01..1.0);
            if rng.random_bool(0.5) { v } else { -v }
        })
        .collect();
    let c: Vec<f64> = (0..2 * n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let loss = |x: &[f64]| {
        let xb = SignalBatch::from_values(2, 1, n, x.to_vec()).unwrap();
        weights_dot(&relu_forward(&xb, &mut ReluCache::default()), &c)
    };
    let mut cache = ReluCache::default();
    relu_forward(&SignalBatch::from_values(2, 1, n, x.clone()).unwrap(), &mut cache);
    let gx = relu_backward(&cache, &SignalBatch::from_values(2, 1, n, c.clone()).unwrap())
        .map_err(|e| e.to_string())?;
    let fd = central_diff(loss, &x, FD_STEP);
    check!(rel_err(gx.values(), &fd) < FD_TOL, "relu rel err {}", rel_err(gx.values(), &fd));
    Ok(())
}

pub fn median_gradients(seed: u64) -> Check {
    let mut rng = rng(seed);
    let n = rng.random_range(3..=10);
    let directed = rng.random_bool(0.5);
    let g = connected_graph(&mut rng, n, directed);
    let r = rng.random_range(1..=2);
    let table = build_neighborhood_table(&g, r, Direction::In);
    let rows = separated_signals(&mut rng, &table, r, 2, n, 1e-3);
    let x: Vec<f64> = rows.concat();
    let c: Vec<f64> = (0..2 * n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let grad_out = SignalBatch::from_values(2, 1, n, c.clone()).unwrap();

    // static
    let loss = |x: &[f64]| {
        let xb = SignalBatch::from_values(2, 1, n, x.to_vec()).unwrap();
        weights_dot(&static_med(&xb, &table, r), &c)
    };
    let mut cache = MedianCache::default();
    static_median_forward(&SignalBatch::from_values(2, 1, n, x.clone()).unwrap(), &table, r, &mut cache)
        .unwrap();
    let gx = static_median_backward(r, &cache, &grad_out).map_err(|e| e.to_string())?;
    let fd = central_diff(loss, &x, FD_STEP);
    check!(rel_err(gx.values(), &fd) < FD_TOL, "static median rel err {}", rel_err(gx.values(), &fd));

    // dynamic
    let omega: Vec<f64> = (0..=r).map(|_| rng.random_range(-1.0..1.0)).collect();
    let loss = |w: &[f64], x: &[f64]| {
        let xb = SignalBatch::from_values(2, 1, n, x.to_vec()).unwrap();
        let dm = DynamicMedian::from_weights(w.to_vec()).unwrap();
        weights_dot(&dynamic_median_forward(&xb, &table, &dm, &mut MedianCache::default()).unwrap(), &c)
    };
    let dm = DynamicMedian::from_weights(omega.clone()).unwrap();
    let mut cache = MedianCache::default();
    dynamic_median_forward(&SignalBatch::from_values(2, 1, n, x.clone()).unwrap(), &table, &dm, &mut cache)
        .unwrap();
    let (gw, gx) = dynamic_median_backward(&dm, &cache, &grad_out).map_err(|e| e.to_string())?;
    let fw = central_diff(|w| loss(w, &x), &omega, FD_STEP);
    let fx = central_diff(|p| loss(&omega, p), &x, FD_STEP);
    check!(rel_err(&gw, &fw) < FD_TOL, "dynamic median d/omega rel err {}", rel_err(&gw, &fw));
    check!(rel_err(gx.values(), &fx) < FD_TOL, "dynamic median d/x rel err {}", rel_err(gx.values(), &fx));
    Ok(())
}

pub fn readout_gradients(seed: u64) -> Check {
    let mut rng = rng(seed);
    let (batch, features, nodes, classes) = (3, 2, 4, 3);
    let in_dim = features * nodes;
    let w: Vec<f64> = (0..classes * in_dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let b: Vec<f64> = (0..classes).map(|_| rng.random_range(-1.0..1.0)).collect();
    let x: Vec<f64> = (0..batch * in_dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let labels: Vec<usize> = (0..batch).map(|_| rng.random_range(0..classes)).collect();
    let loss = |w: &[f64], b: &[f64], x: &[f64]| {
        let p = Readout::from_parts(in_dim, classes, w.to_vec(), b.to_vec()).unwrap();
        let xb = SignalBatch::from_values(batch, features, nodes, x.to_vec()).unwrap();
        let probs = readout_forward(&p, &xb, &mut ReadoutCache::default()).unwrap();
        cross_entropy(&probs, &labels).unwrap().0
    };
    let p = Readout::from_parts(in_dim, classes, w.clone(), b.clone()).unwrap();
    let mut cache = ReadoutCache::default();
    let probs = readout_forward(&p, &SignalBatch::from_values(batch, features, nodes, x.clone()).unwrap(), &mut cache)
        .unwrap();
    let (_, gl) = cross_entropy(&probs, &labels).unwrap();
    let (gw, gb, gx) = readout_backward(&p, &cache, &gl).map_err(|e| e.to_string())?;
    let fw = central_diff(|v| loss(v, &b, &x), &w, FD_STEP);
    let fb = central_diff(|v| loss(&w, v, &x), &b, FD_STEP);
    let fx = central_diff(|v| loss(&w, &b, v), &x, FD_STEP);
    check!(rel_err(&gw, &fw) < FD_TOL, "readout weight rel err {}", rel_err(&gw, &fw));
    check!(rel_err(&gb, &fb) < FD_TOL, "readout bias rel err {}", rel_err(&gb, &fb));
    check!(rel_err(gx.values(), &fx) < FD_TOL, "readout input rel err {}", rel_err(gx.values(), &fx));
    Ok(())
}

/// Outcome of one full-model gradient comparison.
#[derive(Debug, Clone, Copy)]
pub struct FullModelCheck {
    /// Worst per-tensor relative error.
    pub max_rel_err: f64,
    /// Relative gap between the dense reference loss and the model's loss.
    pub forward_gap: f64,
    /// Configurations rejected for sitting within the margin of a kink.
    pub rejected: usize,
}

/// Whole-network gradients on a 6-node graph against central differences of
/// the dense reference network. Configurations with any median window value
/// pair (or ReLU input) within `1e-4` of a kink are redrawn.
pub fn full_model_gradient(seed: u64, activation: Activation) -> Result<FullModelCheck, String> {
    let mut rng = rng(seed);
    let n = 6;
    let (filters, taps, classes, batch) = (4, 3, 3, 4);
    let directed = rng.random_bool(0.5);
    let g = connected_graph(&mut rng, n, directed);
    let dir = Direction::In;
    let ctx = GraphContext::from_graph(&g, activation.max_hop(), dir, DEFAULT_TOL)
        .map_err(|e| e.to_string())?;
    let oracle = OracleNet {
        shift: dense_of(ctx.shift()),
        dist: floyd_warshall(&one_hop(&g, dir)),
        filters,
        taps,
        classes,
        activation: match activation {
            Activation::Relu => OracleActivation::Relu,
            Activation::StaticMedian { hops } => OracleActivation::Static(hops),
            Activation::DynamicMedian { reach } => OracleActivation::Dynamic(reach),
        },
    };
    let arch = Architecture {
        nodes: n,
        features_in: 1,
        filters,
        taps,
        classes,
        activation,
    };
    let mut model = Model::new(arch, Arc::new(ctx), seed).map_err(|e| e.to_string())?;
    check!(
        model.params().param_count() == oracle.param_len(),
        "parameter layout differs from the reference"
    );

    let mut rejected = 0;
    let (theta, xs, labels) = loop {
        let filter_len = filters * taps;
        let theta: Vec<f64> = (0..oracle.param_len())
            .map(|k| {
                if k < filter_len + activation.param_count() {
                    rng.random_range(-1.0..1.0)
                } else {
                    rng.random_range(-0.5..0.5)
                }
            })
            .collect();
        let xs = random_signals(&mut rng, batch, n, false);
        let labels: Vec<usize> = (0..batch).map(|_| rng.random_range(0..classes)).collect();
        if oracle.kink_margin(&theta, &xs) > 1e-4 {
            break (theta, xs, labels);
        }
        rejected += 1;
        check!(rejected < 10_000, "no kink-free configuration found");
    };

    let mut offset = 0;
    for (_, t) in model.params_mut().tensors_mut() {
        t.copy_from_slice(&theta[offset..offset + t.len()]);
        offset += t.len();
    }
    let x = batch_from(&xs, 1, n);
    let (loss, grads) = model.loss_and_gradients(&x, &labels).map_err(|e| e.to_string())?;
    let reference = oracle.loss(&theta, &xs, &labels);
    let forward_gap = (loss - reference).abs() / reference.abs().max(1e-12);
    check!(forward_gap < 1e-12, "model loss {loss} vs reference {reference}");

    let fd = central_diff(|t| oracle.loss(t, &xs, &labels), &theta, FD_STEP);
    let mut offset = 0;
    let mut max_rel_err = 0.0f64;
    for (name, g) in grads.tensors() {
        let e = rel_err(g, &fd[offset..offset + g.len()]);
        check!(e < FD_TOL, "{activation}: tensor `{name}` rel err {e}");
        max_rel_err = max_rel_err.max(e);
        offset += g.len();
    }
    Ok(FullModelCheck {
        max_rel_err,
        forward_gap,
        rejected,
    })
}

pub fn softmax_and_cross_entropy_sums(seed: u64) -> Check {
    let mut rng = rng(seed);
    let classes = rng.random_range(2..=12);
    let batch = rng.random_range(1..=6);
    let scale = 10f64.powi(rng.random_range(-2..=3));
    let mut values = Vec::new();
    for _ in 0..batch {
        let mut row: Vec<f64> = (0..classes).map(|_| scale * rng.random_range(-1.0..1.0)).collect();
        softmax(&mut row);
        let total: f64 = row.iter().sum();
        check!((total - 1.0).abs() <= 1e-12, "softmax row sums to {total}");
        values.extend(row);
    }
    let probs = ClassProbs::from_values(batch, classes, values).unwrap();
    let labels: Vec<usize> = (0..batch).map(|_| rng.random_range(0..classes)).collect();
    let (_, grad) = cross_entropy(&probs, &labels).unwrap();
    for (b, row) in grad.chunks(classes).enumerate() {
        let s: f64 = row.iter().sum();
        check!(s.abs() <= 1e-12, "cross-entropy gradient of sample {b} sums to {s}");
    }
    Ok(())
}

pub fn parameter_counts() -> Result<[usize; 3], String> {
    let mut out = [0; 3];
    let acts = [
        Activation::Relu,
        Activation::DynamicMedian { reach: 1 },
        Activation::DynamicMedian { reach: 2 },
    ];
    for (slot, activation) in out.iter_mut().zip(acts) {
        let arch = Architecture {
            nodes: 40,
            features_in: 1,
            filters: 32,
            taps: 5,
            classes: 5,
            activation,
        };
        let g = random::cycle(40, false);
        let ctx = GraphContext::from_graph(&g, activation.max_hop(), Direction::In, DEFAULT_TOL)
            .map_err(|e| e.to_string())?;
        let model = Model::new(arch, Arc::new(ctx), 0).map_err(|e| e.to_string())?;
        let counted = model.params().conv_param_count();
        check!(
            counted == arch.conv_param_count(),
            "model holds {counted} conv parameters, architecture says {}",
            arch.conv_param_count()
        );
        *slot = counted;
    }
    Ok(out)
}

// ---- optimizer and training -------------------------------------------

pub fn adam_without_momentum_is_sign_descent(seed: u64) -> Check {
    let mut rng = rng(seed);
    let lr = rng.random_range(1e-4..1e-1);
    let eps = 1e-8;
    let mut state = AdamState::new(AdamConfig {
        learning_rate: lr,
        beta1: 0.0,
        beta2: 0.0,
        epsilon: eps,
    })
    .map_err(|e| e.to_string())?;
    let len = rng.random_range(1..=20);
    let mut w: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
    for _ in 0..5 {
        let g: Vec<f64> = (0..len)
            .map(|_| rng.random_range(-1.0..1.0) * 10f64.powi(rng.random_range(-6..=3)))
            .collect();
        let before = w.clone();
        state.step(&mut [("w", &mut w)], &[("w", &g)]).map_err(|e| e.to_string())?;
        for k in 0..len {
            let want = -lr * g[k] / (g[k].abs() + eps);
            let got = w[k] - before[k];
            check!(
                (got - want).abs() <= 1e-12 * want.abs() + 4.0 * f64::EPSILON * before[k].abs(),
                "element {k}: step {got} vs {want}"
            );
        }
    }
    Ok(())
}

fn tiny_task(seed: u64, activation: Activation) -> (Model, Dataset) {
    let g = random::GraphGenerator::StochasticBlock {
        block_sizes: vec![5, 5],
        p_in: 0.6,
        p_out: 0.1,
        seed,
    }
    .generate_connected()
    .unwrap();
    let sources = medgnn::data::top_degree_nodes(&g, 3).unwrap();
    let ds = generate_diffusion_dataset(
        &g,
        &sources,
        &DiffusionParams {
            samples: 60,
            t_min: 0,
            t_max: 3,
            gso: DiffusionGso::Normalized,
            seed,
        },
    )
    .unwrap();
    let ctx = GraphContext::from_graph(&g, activation.max_hop(), Direction::In, DEFAULT_TOL).unwrap();
    let arch = Architecture {
        nodes: 10,
        features_in: 1,
        filters: 4,
        taps: 3,
        classes: 3,
        activation,
    };
    (Model::new(arch, Arc::new(ctx), seed).unwrap(), ds)
}

fn small_train_config(seed: u64) -> TrainConfig {
    TrainConfig {
        epochs: 3,
        batch_size: 16,
        adam: AdamConfig {
            learning_rate: 0.01,
            ..AdamConfig::default()
        },
        seed,
        validation_fraction: Some(0.1),
    }
}

pub fn training_is_deterministic(seed: u64) -> Check {
    let activation = [
        Activation::Relu,
        Activation::StaticMedian { hops: 1 },
        Activation::DynamicMedian { reach: 2 },
    ][(seed % 3) as usize];
    let (mut a, ds) = tiny_task(seed, activation);
    let (mut b, _) = tiny_task(seed, activation);
    let cfg = small_train_config(seed);
    let ra = train(&mut a, &ds, &cfg).map_err(|e| e.to_string())?;
    let rb = train(&mut b, &ds, &cfg).map_err(|e| e.to_string())?;
    check!(ra.same_trajectory(&rb), "two seeded runs of {activation} diverged");
    check!(ra.curves_csv() == rb.curves_csv(), "curve files differ");
    Ok(())
}

pub fn accuracy_invariant_to_logit_scaling(seed: u64) -> Check {
    let mut rng = rng(seed);
    let (mut model, ds) = tiny_task(seed, Activation::Relu);
    train(&mut model, &ds, &TrainConfig { epochs: 1, ..small_train_config(seed) })
        .map_err(|e| e.to_string())?;
    let before = evaluate(&model, &ds).map_err(|e| e.to_string())?;
    let c = 10f64.powf(rng.random_range(-2.0..2.0));
    let (w, b) = model.params_mut().readout.parts_mut();
    w.iter_mut().for_each(|v| *v *= c);
    b.iter_mut().for_each(|v| *v *= c);
    let after = evaluate(&model, &ds).map_err(|e| e.to_string())?;
    check!(
        before.accuracy == after.accuracy,
        "scaling logits by {c} changed accuracy {} -> {}",
        before.accuracy,
        after.accuracy
    );
    Ok(())
}

pub fn checkpoint_round_trip(seed: u64) -> Check {
    let activation = [
        Activation::Relu,
        Activation::StaticMedian { hops: 2 },
        Activation::DynamicMedian { reach: 1 },
    ][(seed % 3) as usize];
    let (mut model, ds) = tiny_task(seed, activation);
    train(&mut model, &ds, &small_train_config(seed)).map_err(|e| e.to_string())?;
    let before = evaluate(&model, &ds).map_err(|e| e.to_string())?;
    let back = checkpoint::from_str(&checkpoint::to_string(&model)).map_err(|e| e.to_string())?;
    let reloaded = Dataset::from_reader(ds.to_text().as_bytes()).map_err(|e| e.to_string())?;
    let after = evaluate(&back, &reloaded).map_err(|e| e.to_string())?;
    check!(
        (before.loss - after.loss).abs() <= 1e-9 && (before.accuracy - after.accuracy).abs() <= 1e-9,
        "{before:?} vs {after:?}"
    );
    Ok(())
}

// ---- data --------------------------------------------------------------

pub fn diffusion_generation_is_deterministic(seed: u64) -> Check {
    let mut rng = rng(seed);
    let n = rng.random_range(5..=25);
    let directed = rng.random_bool(0.5);
    let g = connected_graph(&mut rng, n, directed);
    let sources: Vec<usize> = (0..rng.random_range(1..=n.min(5))).collect();
    let params = DiffusionParams {
        samples: 40,
        t_min: 0,
        t_max: rng.random_range(0..=5),
        gso: DiffusionGso::Normalized,
        seed,
    };
    let a = generate_diffusion_dataset(&g, &sources, &params).map_err(|e| e.to_string())?;
    let b = generate_diffusion_dataset(&g, &sources, &params).map_err(|e| e.to_string())?;
    check!(a.to_text() == b.to_text(), "same seed gave different bytes");
    Ok(())
}

pub fn diffusion_recursion(seed: u64) -> Check {
    let mut rng = rng(seed);
    let n = rng.random_range(2..=20);
    let directed = rng.random_bool(0.5);
    let g = connected_graph(&mut rng, n, directed);
    let w = normalized_adjacency(&g, DEFAULT_TOL).map_err(|e| e.to_string())?;
    let dense = dense_of(&w);
    let c = rng.random_range(0..n);
    for t in 0..8 {
        let now = diffuse(&w, c, t).map_err(|e| e.to_string())?;
        let next = diffuse(&w, c, t + 1).map_err(|e| e.to_string())?;
        let want = dense_matvec(&dense, &now);
        for i in 0..n {
            check!(
                (next[i] - want[i]).abs() <= 1e-12 * (1.0 + want[i].abs()),
                "x({}) differs from W x({t}) at node {i}",
                t + 1
            );
        }
    }
    Ok(())
}

/// Symmetric normalized operators have unit spectral norm, so diffusion
/// never grows the signal beyond the normalization tolerance.
pub fn diffusion_norm_bound(seed: u64) -> Check {
    let mut rng = rng(seed);
    let n = rng.random_range(2..=25);
    let g = connected_graph(&mut rng, n, false);
    let w = normalized_adjacency(&g, DEFAULT_TOL).map_err(|e| e.to_string())?;
    let c = rng.random_range(0..n);
    for t in 0..=10 {
        let x = diffuse(&w, c, t).map_err(|e| e.to_string())?;
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let bound = (1.0 + DEFAULT_TOL).powi(t as i32) * (1.0 + 1e-12);
        check!(norm <= bound, "|x({t})| = {norm} exceeds {bound}");
    }
    Ok(())
}

fn random_tokens(rng: &mut ChaCha8Rng, vocab: &[&str], len: usize) -> Vec<String> {
    (0..len).map(|_| vocab.choose(rng).unwrap().to_string()).collect()
}

pub fn wan_additivity(seed: u64) -> Check {
    let mut rng = rng(seed);
    let words = ["the", "and", "of", "a", "to"];
    let vocab = ["the", "and", "of", "a", "to", "cat", "sea", "ran", "blue"];
    let window = rng.random_range(1..=6);
    let spec = WanSpec::new(words.iter().map(|w| w.to_string()).collect(), window, false)
        .map_err(|e| e.to_string())?;
    let len = rng.random_range(1..60);
    let a = random_tokens(&mut rng, &vocab, len);
    let len = rng.random_range(1..60);
    let b = random_tokens(&mut rng, &vocab, len);
    let (ca, _) = co_appearance_counts(std::slice::from_ref(&a), &spec);
    let (cb, _) = co_appearance_counts(std::slice::from_ref(&b), &spec);
    let (both, _) = co_appearance_counts(&[a.clone(), b.clone()], &spec);
    let mut summed: BTreeMap<(usize, usize), f64> = ca.clone();
    for (k, v) in &cb {
        *summed.entry(*k).or_insert(0.0) += v;
    }
    check!(both == summed, "separate texts are not additive");

    let joined: Vec<String> = a.iter().chain(&b).cloned().collect();
    let (cat, _) = co_appearance_counts(&[joined], &spec);
    let mut extra = 0.0;
    for (k, v) in &cat {
        let base = summed.get(k).copied().unwrap_or(0.0);
        check!(*v >= base, "concatenation lost pairs for {k:?}");
        extra += v - base;
    }
    check!(
        summed.keys().all(|k| cat.contains_key(k)),
        "concatenation dropped an arc"
    );
    let bound = (window * (window + 1) / 2) as f64;
    check!(extra <= bound, "boundary added {extra} pairs, bound {bound}");
    Ok(())
}

pub fn stratified_split_bounds(seed: u64) -> Check {
    let mut rng = rng(seed);
    let classes = rng.random_range(1..=6);
    let mut samples = Vec::new();
    for c in 0..classes {
        for _ in 0..rng.random_range(2..=60) {
            samples.push(Sample {
                signal: vec![rng.random_range(-1.0..1.0)],
                label: c,
            });
        }
    }
    samples.shuffle(&mut rng);
    let map = (0..classes).map(|c| c.to_string()).collect();
    let ds = Dataset::new(1, classes, samples, map, seed).unwrap();
    let frac = rng.random_range(0.05..0.95);
    let Ok((tr, te)) = split(&ds, frac, seed) else {
        return Ok(());
    };
    check!(tr.len() + te.len() == ds.len(), "split lost samples");
    let total = ds.label_histogram();
    for (c, (&got, &all)) in tr.label_histogram().iter().zip(&total).enumerate() {
        check!(
            (got as f64 - all as f64 * frac).abs() <= 1.0,
            "class {c}: {got} of {all} at fraction {frac}"
        );
    }
    Ok(())
}

/// Labels are uniform over the sources: with 10,000 samples and 5 classes
/// each count is Binomial(10000, 0.2), so within 3 sigma = 120 of 2,000.
pub fn label_histogram_within_three_sigma(seed: u64) -> Check {
    let g = random::GraphGenerator::RandomGeometric {
        nodes: 40,
        radius: 0.3,
        seed,
    }
    .generate_connected()
    .map_err(|e| e.to_string())?;
    let sources = medgnn::data::top_degree_nodes(&g, 5).map_err(|e| e.to_string())?;
    let params = DiffusionParams {
        samples: 10_000,
        t_min: 0,
        t_max: 4,
        gso: DiffusionGso::Normalized,
        seed,
    };
    let ds = generate_diffusion_dataset(&g, &sources, &params).map_err(|e| e.to_string())?;
    for (c, &count) in ds.label_histogram().iter().enumerate() {
        check!(count.abs_diff(2000) <= 120, "class {c} has {count} samples");
    }
    Ok(())
}
