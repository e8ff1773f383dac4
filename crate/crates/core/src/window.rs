//! Sliding-window minimum over a slice with monotone window bounds.

use std::collections::VecDeque;

/// Minimum of `values[lo..hi]` for a sequence of windows whose `lo` and `hi`
/// never move backwards. Amortized O(1) per element.
#[derive(Debug)]
pub struct SlidingMin<'a> {
    values: &'a [f64],
    // indices with strictly increasing values
    queue: VecDeque<usize>,
    hi: usize,
}

impl<'a> SlidingMin<'a> {
    pub fn new(values: &'a [f64]) -> Self {
        Self {
            values,
            queue: VecDeque::new(),
            hi: 0,
        }
    }

    /// Minimum over `values[lo..hi]`, or `None` for an empty window.
    pub fn min(&mut self, lo: usize, hi: usize) -> Option<f64> {
        debug_assert!(hi >= self.hi, "window end moved backwards");
        while self.hi < hi {
            let v = self.values[self.hi];
            while self.queue.back().is_some_and(|&b| self.values[b] >= v) {
                self.queue.pop_back();
            }
            self.queue.push_back(self.hi);
            self.hi += 1;
        }
        while self.queue.front().is_some_and(|&f| f < lo) {
            self.queue.pop_front();
        }
        self.queue.front().map(|&f| self.values[f])
    }
}
