//! Order-independent "nearest fragment wins" scatter.
//!
//! Each destination holds a packed `u64` key: the `f32` bit pattern of the
//! fragment depth in the high word and its source index in the low word.
//! Positive finite floats order the same as their bit patterns, so an atomic
//! `fetch_min` keeps the smallest depth and, among equal depths, the smallest
//! source index. The result does not depend on thread scheduling.

use std::sync::atomic::{AtomicU64, Ordering};

const EMPTY: u64 = u64::MAX;

pub struct DepthScatter {
    slots: Vec<AtomicU64>,
}

#[inline]
pub fn pack(depth: f32, source: u32) -> u64 {
    debug_assert!(depth > 0.0 && depth.is_finite());
    ((depth.to_bits() as u64) << 32) | source as u64
}

#[inline]
pub fn unpack(key: u64) -> (f32, u32) {
    (f32::from_bits((key >> 32) as u32), key as u32)
}

impl DepthScatter {
    pub fn new(len: usize) -> Self {
        DepthScatter {
            slots: (0..len).map(|_| AtomicU64::new(EMPTY)).collect(),
        }
    }

    #[inline]
    pub fn offer(&self, dest: usize, depth: f32, source: u32) {
        self.slots[dest].fetch_min(pack(depth, source), Ordering::Relaxed);
    }

    /// Winning `(depth, source)` per destination.
    pub fn into_winners(self) -> Vec<Option<(f32, u32)>> {
        self.slots
            .into_iter()
            .map(|a| {
                let k = a.into_inner();
                (k != EMPTY).then(|| unpack(k))
            })
            .collect()
    }
}
