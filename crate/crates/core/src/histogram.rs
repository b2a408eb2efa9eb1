//! Sparse grid histograms over a fixed global domain and the
//! Jensen-Shannon divergence between them.
//!
//! Counts are stored sparsely: the default ground-truth resolution of
//! 8192x8192 would mean 67M dense bins while real point sets occupy a
//! tiny fraction of them. A `BTreeMap` keeps iteration order canonical,
//! which makes serialization and `jsd(p, p) == 0` exact.

use alloc::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::geom::{Point, Rect};

/// W x W count grid over a shared global domain. Zero bins are not stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridHistogram {
    pub domain: Rect,
    pub resolution: u32,
    /// (row, col) -> count, row indexed along y from `domain.min_y`.
    pub bins: BTreeMap<(u32, u32), u64>,
    pub total: u64,
    /// Points that fell outside the domain and were clamped into edge bins.
    pub out_of_domain: u64,
}

impl GridHistogram {
    pub fn new(domain: Rect, resolution: u32) -> Self {
        debug_assert!(resolution >= 1);
        debug_assert!(domain.width() > 0.0 && domain.height() > 0.0);
        GridHistogram {
            domain,
            resolution,
            bins: BTreeMap::new(),
            total: 0,
            out_of_domain: 0,
        }
    }

    /// Bin index of a point. Points on the max edge fall in the last bin;
    /// points outside the domain clamp to edge bins.
    pub fn bin_of(&self, p: Point) -> (u32, u32) {
        let w = self.resolution as f64;
        let col = libm::floor((p.x - self.domain.min_x) / self.domain.width() * w);
        let row = libm::floor((p.y - self.domain.min_y) / self.domain.height() * w);
        let last = self.resolution - 1;
        let clamp = |v: f64| -> u32 {
            if v < 0.0 {
                0
            } else if v > last as f64 {
                last
            } else {
                v as u32
            }
        };
        (clamp(row), clamp(col))
    }

    pub fn add(&mut self, p: Point) {
        if !self.domain.contains(p) {
            self.out_of_domain += 1;
        }
        *self.bins.entry(self.bin_of(p)).or_insert(0) += 1;
        self.total += 1;
    }

    pub fn from_points<I: IntoIterator<Item = Point>>(
        points: I,
        domain: Rect,
        resolution: u32,
    ) -> Self {
        let mut h = GridHistogram::new(domain, resolution);
        for p in points {
            h.add(p);
        }
        h
    }

    /// Row-major flattening (row 0 first), including zero bins.
    /// Intended for small grids in tests and diagnostics.
    pub fn flatten(&self) -> alloc::vec::Vec<u64> {
        let w = self.resolution as usize;
        let mut out = alloc::vec![0u64; w * w];
        for (&(r, c), &n) in &self.bins {
            out[r as usize * w + c as usize] = n;
        }
        out
    }

    /// Normalizes counts into a probability distribution.
    pub fn normalize(&self) -> Result<ProbVector, CoreError> {
        if self.total == 0 {
            return Err(CoreError::EmptyHistogram);
        }
        let t = self.total as f64;
        ProbVector::checked(
            self.domain,
            self.resolution,
            self.bins.iter().map(|(&k, &n)| (k, n as f64 / t)).collect(),
        )
    }
}

/// Sparse probability distribution over the same grid layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbVector {
    pub domain: Rect,
    pub resolution: u32,
    pub probs: BTreeMap<(u32, u32), f64>,
}

impl ProbVector {
    fn checked(
        domain: Rect,
        resolution: u32,
        probs: BTreeMap<(u32, u32), f64>,
    ) -> Result<Self, CoreError> {
        let sum: f64 = probs.values().sum();
        debug_assert!((sum - 1.0).abs() < 1e-12);
        let _ = sum;
        Ok(ProbVector {
            domain,
            resolution,
            probs,
        })
    }

    fn same_grid(&self, other: &ProbVector) -> bool {
        self.resolution == other.resolution && self.domain == other.domain
    }
}

/// KLD(p || m) and KLD(q || m) with m the pointwise mean, plus their
/// half-sum (the Jensen-Shannon divergence), all in log base 2.
pub fn jsd_parts(p: &ProbVector, q: &ProbVector) -> Result<(f64, f64, f64), CoreError> {
    if !p.same_grid(q) {
        return Err(CoreError::DomainMismatch);
    }
    let mut kld_p = 0.0;
    let mut kld_q = 0.0;
    // union of supports; 0 * log(0/x) contributes nothing
    for (&k, &pi) in &p.probs {
        let qi = q.probs.get(&k).copied().unwrap_or(0.0);
        let m = 0.5 * (pi + qi);
        kld_p += pi * libm::log2(pi / m);
    }
    for (&k, &qi) in &q.probs {
        let pi = p.probs.get(&k).copied().unwrap_or(0.0);
        let m = 0.5 * (pi + qi);
        kld_q += qi * libm::log2(qi / m);
    }
    Ok((kld_p, kld_q, 0.5 * kld_p + 0.5 * kld_q))
}

/// Jensen-Shannon divergence in [0, 1], log base 2.
pub fn jsd(p: &ProbVector, q: &ProbVector) -> Result<f64, CoreError> {
    jsd_parts(p, q).map(|(_, _, d)| d)
}
