//! Extended neighborhoods, shift operators and the spectral radius on a
//! small directed graph.
//!
//! Run with `cargo run --example neighborhoods`.

use medgnn::graph::{
    adjacency, build_neighborhood_table, load_edge_list, normalized_adjacency, spectral_radius,
    Direction, DEFAULT_MAX_ITER, DEFAULT_TOL,
};

fn main() -> medgnn::Result<()> {
    // a directed 4-cycle with one chord
    let g = load_edge_list("0 1\n1 2\n2 3\n3 0\n0 2 0.5\n".as_bytes(), true)?;

    for dir in [Direction::In, Direction::Out] {
        let table = build_neighborhood_table(&g, 2, dir);
        println!("{dir:?} neighborhoods");
        for i in 0..g.n_nodes() {
            println!("  node {i}: r=1 {:?}  r=2 {:?}", table.members(i, 1), table.members(i, 2));
        }
    }

    let w = adjacency(&g);
    // row i of W lists the arcs entering i
    for i in 0..w.n() {
        println!("W[{i}] = {:?}", w.row(i));
    }
    let rho = spectral_radius(&w, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    println!("spectral radius {rho:.6}");

    let s = normalized_adjacency(&g, DEFAULT_TOL)?;
    let unit = spectral_radius(&s, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    println!("after normalization {unit:.9}");
    Ok(())
}
