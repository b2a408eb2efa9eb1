//! Plane-sweep distance join for one partition block.
//!
//! Both sides are sorted by `(x, y, index)`; a window of width `theta`
//! over x bounds the candidates and the exact squared distance decides.

use alloc::vec::Vec;

use crate::geom::Point;

/// All pairs `(r_index, s_index)` with Euclidean distance <= `theta`.
///
/// Input slices carry the original dataset indices; output order follows
/// the sweep and is not canonical — callers sort the merged result.
pub fn block_join(r: &[(usize, Point)], s: &[(usize, Point)], theta: f64) -> Vec<(usize, usize)> {
    debug_assert!(theta >= 0.0);
    if r.is_empty() || s.is_empty() {
        return Vec::new();
    }
    let mut r_sorted: Vec<(usize, Point)> = r.to_vec();
    let mut s_sorted: Vec<(usize, Point)> = s.to_vec();
    let key = |t: &(usize, Point)| (t.1.x, t.1.y, t.0);
    r_sorted.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
    s_sorted.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());

    let theta_sq = theta * theta;
    let mut out = Vec::new();
    let mut lo = 0usize;
    for &(ri, rp) in &r_sorted {
        while lo < s_sorted.len() && s_sorted[lo].1.x < rp.x - theta {
            lo += 1;
        }
        for &(si, sp) in &s_sorted[lo..] {
            if sp.x > rp.x + theta {
                break;
            }
            let dx = rp.x - sp.x;
            let dy = rp.y - sp.y;
            if dx * dx + dy * dy <= theta_sq {
                out.push((ri, si));
            }
        }
    }
    out
}

/// Quadratic reference join. Test oracle; also used by the acceptance
/// suite to check the partitioned executor.
pub fn nested_loop_join(r: &[Point], s: &[Point], theta: f64) -> Vec<(usize, usize)> {
    let theta_sq = theta * theta;
    let mut out = Vec::new();
    for (ri, rp) in r.iter().enumerate() {
        for (si, sp) in s.iter().enumerate() {
            let dx = rp.x - sp.x;
            let dy = rp.y - sp.y;
            if dx * dx + dy * dy <= theta_sq {
                out.push((ri, si));
            }
        }
    }
    out
}
