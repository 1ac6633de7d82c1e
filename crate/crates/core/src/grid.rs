//! Deterministic lattices on the relative interior of the probability simplex.

use crate::error::{GeomError, Result};
use crate::vector::PosVector;

/// Lattice `{k / r : k ∈ ℕⁿ, Σk = r}` pulled toward the barycenter so every
/// point keeps a margin `ε = 1/(10 r)` from the simplex boundary.
///
/// Points are `(1 - nε)·k/r + ε`, listed in lexicographic order of `k`. The
/// barycenter is fixed by the contraction, so lattice points that coincide
/// with the uniform distribution stay exactly uniform.
#[derive(Debug, Clone)]
pub struct SimplexGrid {
    dim: usize,
    resolution: usize,
    margin: f64,
    points: Vec<PosVector>,
}

impl SimplexGrid {
    pub fn new(dim: usize, resolution: usize) -> Result<Self> {
        if dim < 2 {
            return Err(GeomError::DimensionTooSmall(dim));
        }
        if resolution < 2 {
            return Err(GeomError::ResolutionTooSmall(resolution));
        }
        let margin = 1.0 / (10.0 * resolution as f64);
        let shrink = 1.0 - dim as f64 * margin;
        let points = compositions(dim, resolution)
            .into_iter()
            .map(|k| {
                let v = k
                    .iter()
                    .map(|&ki| shrink * (ki as f64 / resolution as f64) + margin)
                    .collect();
                PosVector::new(v).expect("lattice points are positive")
            })
            .collect();
        Ok(Self {
            dim,
            resolution,
            margin,
            points,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    /// Distance between neighbouring lattice points along one coordinate.
    pub fn spacing(&self) -> f64 {
        (1.0 - self.dim as f64 * self.margin) / self.resolution as f64
    }

    pub fn points(&self) -> &[PosVector] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Every `stride`-th point, used where a check is too costly for the full grid.
    pub fn subsample(&self, max_points: usize) -> Vec<PosVector> {
        if self.points.len() <= max_points || max_points == 0 {
            return self.points.clone();
        }
        let stride = self.points.len().div_ceil(max_points);
        self.points.iter().step_by(stride).cloned().collect()
    }
}

/// Convenience wrapper matching the free-function form.
pub fn simplex_grid(dim: usize, resolution: usize) -> Result<SimplexGrid> {
    SimplexGrid::new(dim, resolution)
}

/// All `k ∈ ℕ^dim` with `Σk = total`, lexicographically ordered.
pub(crate) fn compositions(dim: usize, total: usize) -> Vec<Vec<usize>> {
    fn rec(dim: usize, total: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if dim == 1 {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in 0..=total {
            prefix.push(k);
            rec(dim - 1, total - k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(dim, total, &mut Vec::with_capacity(dim), &mut out);
    out
}

/// Closed simplex lattice (boundary included), as raw vectors.
pub(crate) fn closed_lattice(dim: usize, resolution: usize) -> Vec<Vec<f64>> {
    compositions(dim, resolution)
        .into_iter()
        .map(|k| k.iter().map(|&ki| ki as f64 / resolution as f64).collect())
        .collect()
}
