//! Static and dynamic median activations on a path graph.
//!
//! Run with `cargo run --example median_activation`.

use medgnn::graph::{build_neighborhood_table, random, Direction};
use medgnn::nn::{
    dynamic_median_forward, static_median_forward, DynamicMedian, MedianCache, SignalBatch,
};

fn main() -> medgnn::Result<()> {
    let g = random::path(6);
    let table = build_neighborhood_table(&g, 2, Direction::In);
    let x = SignalBatch::from_values(1, 1, 6, vec![4.0, -1.0, 7.0, 2.0, 2.0, 9.0])?;
    println!("input            {:?}", x.values());

    for r in 0..=2 {
        let mut cache = MedianCache::default();
        let y = static_median_forward(&x, &table, r, &mut cache)?;
        let picked: Vec<usize> = (0..6).map(|i| cache.selected(0, 0, i, 0)).collect();
        println!("{r}-hop median     {:?}  from nodes {picked:?}", y.values());
    }

    // node 0 has the even window {0, 1}: the upper median is 4.0
    let omega = DynamicMedian::from_weights(vec![0.5, 0.3, 0.2])?;
    let y = dynamic_median_forward(&x, &table, &omega, &mut MedianCache::default())?;
    println!("0.5 m0 + 0.3 m1 + 0.2 m2 = {:?}", y.values());
    Ok(())
}
