//! Order-statistic selection over neighborhood windows.

use std::cmp::Ordering;

/// Position of the neighborhood median in ascending order: the middle element
/// for odd sizes and the upper median, the `(m/2 + 1)`-th smallest, for even
/// sizes. Both cases are `floor(m / 2)` zero-based.
#[inline]
pub fn median_rank(m: usize) -> usize {
    m / 2
}

/// Selects the `rank`-th smallest `(value, node)` pair in expected linear
/// time and returns it. Among members whose value ties with the selected
/// one, the smallest node id is returned.
///
/// `window` is reordered. Panics if `rank >= window.len()`.
pub fn select_rank(window: &mut [(f64, usize)], rank: usize) -> (f64, usize) {
    let (_, &mut (value, _), _) =
        window.select_nth_unstable_by(rank, |a, b| cmp_value(a.0, b.0));
    let node = window
        .iter()
        .filter(|(v, _)| cmp_value(*v, value) == Ordering::Equal)
        .map(|&(_, id)| id)
        .min()
        .expect("the selected element itself ties");
    (value, node)
}

#[inline]
fn cmp_value(a: f64, b: f64) -> Ordering {
    // total order; -0.0 and 0.0 compare equal so that sign of zero never
    // decides which member is reported
    if a == b {
        Ordering::Equal
    } else {
        a.total_cmp(&b)
    }
}
