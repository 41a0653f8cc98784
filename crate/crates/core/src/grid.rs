use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform tensor grid on `[0, 1]²`.
///
/// With the boundary included there are `S` nodes per side at `k/(S−1)`;
/// without it there are `S−1` interior nodes at `k/S`. Grid arrays are
/// stored with `x` as the slow axis: entry `(ix, iy)` sits at `ix·n + iy`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    resolution: usize,
    includes_boundary: bool,
}

impl Grid {
    pub fn new(resolution: usize, includes_boundary: bool) -> Result<Self> {
        if resolution < 3 {
            return Err(Error::GridTooSmall(resolution));
        }
        Ok(Self {
            resolution,
            includes_boundary,
        })
    }

    pub fn with_boundary(resolution: usize) -> Result<Self> {
        Self::new(resolution, true)
    }

    pub fn interior(resolution: usize) -> Result<Self> {
        Self::new(resolution, false)
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn includes_boundary(&self) -> bool {
        self.includes_boundary
    }

    /// Nodes per side.
    pub fn len(&self) -> usize {
        if self.includes_boundary {
            self.resolution
        } else {
            self.resolution - 1
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Total number of nodes.
    pub fn num_points(&self) -> usize {
        self.len() * self.len()
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.intervals() as f64
    }

    fn intervals(&self) -> usize {
        if self.includes_boundary {
            self.resolution - 1
        } else {
            self.resolution
        }
    }

    /// Node coordinates along one axis. End nodes are exactly 0.0 and 1.0.
    pub fn coords(&self) -> Vec<f64> {
        let n = self.intervals();
        let (start, end) = if self.includes_boundary { (0, n) } else { (1, n - 1) };
        (start..=end).map(|k| k as f64 / n as f64).collect()
    }

    /// The nested grid with half the spacing.
    pub fn refined(&self) -> Grid {
        let resolution = if self.includes_boundary {
            2 * self.resolution - 1
        } else {
            2 * self.resolution
        };
        Grid {
            resolution,
            includes_boundary: self.includes_boundary,
        }
    }

    /// All nodes in storage order.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let c = self.coords();
        c.iter().flat_map(|&x| c.iter().map(move |&y| (x, y))).collect()
    }

    /// True for nodes on the outer ring of the node array.
    pub fn is_edge_node(&self, ix: usize, iy: usize) -> bool {
        let last = self.len() - 1;
        ix == 0 || iy == 0 || ix == last || iy == last
    }
}
