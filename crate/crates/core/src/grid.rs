//! Regular node grids over a closed box.

use crate::domain::DomainSpec;

/// Regular grid over a box with nodes on every face.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxGrid {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub spacing: Vec<f64>,
    pub counts: Vec<usize>,
}

impl BoxGrid {
    /// Node count per axis is `round(extent / delta) + 1`; the spacing is
    /// adjusted so nodes land exactly on both faces.
    pub fn covering(dom: &DomainSpec, delta: f64) -> Self {
        let d = dom.dimension();
        let mut counts = Vec::with_capacity(d);
        let mut spacing = Vec::with_capacity(d);
        for a in 0..d {
            let n = (dom.extent(a) / delta).round().max(1.0) as usize;
            counts.push(n + 1);
            spacing.push(dom.extent(a) / n as f64);
        }
        BoxGrid {
            lower: dom.lower().to_vec(),
            upper: dom.upper().to_vec(),
            spacing,
            counts,
        }
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dimension(&self) -> usize {
        self.counts.len()
    }

    pub fn multi_index(&self, mut node: usize) -> Vec<usize> {
        let d = self.dimension();
        let mut idx = vec![0; d];
        for a in (0..d).rev() {
            idx[a] = node % self.counts[a];
            node /= self.counts[a];
        }
        idx
    }

    pub fn node(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.counts)
            .fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn point(&self, node: usize) -> Vec<f64> {
        self.multi_index(node)
            .iter()
            .enumerate()
            .map(|(a, &i)| self.coordinate(a, i))
            .collect()
    }

    pub fn coordinate(&self, axis: usize, i: usize) -> f64 {
        if i + 1 == self.counts[axis] {
            self.upper[axis]
        } else {
            self.lower[axis] + self.spacing[axis] * i as f64
        }
    }

    pub fn nearest(&self, x: &[f64]) -> usize {
        let idx: Vec<usize> = (0..self.dimension())
            .map(|a| {
                let s = ((x[a] - self.lower[a]) / self.spacing[a]).round();
                (s.max(0.0) as usize).min(self.counts[a] - 1)
            })
            .collect();
        self.node(&idx)
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.multi_index(node)
            .iter()
            .zip(&self.counts)
            .any(|(&i, &n)| i == 0 || i + 1 == n)
    }
}
