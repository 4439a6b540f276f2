//! Exact biclique cover number of a small support pattern.
//!
//! Cells are packed into a `u64` (`x * 8 + y`), which limits both sides to 8.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

/// Largest side handled by the exact search.
pub const BICLIQUE_MAX_SIDE: usize = 8;

/// Entries above this count as support.
pub const SUPPORT_TOL: f64 = 1e-12;

/// A combinatorial rectangle `rows × cols` contained in the support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Biclique {
    pub rows: u8,
    pub cols: u8,
}

impl Biclique {
    fn cells(self) -> u64 {
        let mut m = 0u64;
        for x in 0..8 {
            if self.rows >> x & 1 == 1 {
                m |= u64::from(self.cols) << (8 * x);
            }
        }
        m
    }
}

fn row_masks(support: &[Vec<bool>]) -> Option<Vec<u8>> {
    let cols = support.first().map_or(0, Vec::len);
    if support.len() > BICLIQUE_MAX_SIDE || cols > BICLIQUE_MAX_SIDE {
        return None;
    }
    Some(
        support
            .iter()
            .map(|r| r.iter().enumerate().fold(0u8, |m, (y, &b)| m | (u8::from(b) << y)))
            .collect(),
    )
}

/// All maximal all-ones rectangles of the support (`None` above 8×8).
pub fn maximal_bicliques(support: &[Vec<bool>]) -> Option<Vec<Biclique>> {
    let masks = row_masks(support)?;
    let m = masks.len();
    let mut found = BTreeSet::new();
    for subset in 1u16..(1 << m) {
        let cols = (0..m)
            .filter(|x| subset >> x & 1 == 1)
            .fold(u8::MAX, |acc, x| acc & masks[x]);
        if cols == 0 {
            continue;
        }
        let rows = (0..m)
            .filter(|&x| masks[x] & cols == cols)
            .fold(0u8, |acc, x| acc | (1 << x));
        found.insert(Biclique { rows, cols });
    }
    Some(found.into_iter().collect())
}

/// Minimum number of rectangles covering the support (`None` above 8×8).
///
/// Iterative deepening over covers; at each node the branching cell is the
/// uncovered one with the fewest candidate rectangles, and a node is cut when
/// `k` copies of the best remaining rectangle cannot cover what is left.
pub fn biclique_cover_number(support: &[Vec<bool>]) -> Option<usize> {
    let bicliques = maximal_bicliques(support)?;
    let target: u64 = row_masks(support)?
        .iter()
        .enumerate()
        .fold(0, |acc, (x, &m)| acc | (u64::from(m) << (8 * x)));
    if target == 0 {
        return Some(0);
    }
    let rects: Vec<u64> = bicliques.iter().map(|b| b.cells()).collect();
    let by_cell: Vec<Vec<usize>> = (0..64)
        .map(|c| (0..rects.len()).filter(|&k| rects[k] >> c & 1 == 1).collect())
        .collect();
    let upper = support.len().min(support[0].len());
    (1..=upper).find(|&k| covers(&rects, &by_cell, target, k))
}

fn covers(rects: &[u64], by_cell: &[Vec<usize>], uncovered: u64, k: usize) -> bool {
    if uncovered == 0 {
        return true;
    }
    if k == 0 {
        return false;
    }
    let best = rects.iter().map(|r| (r & uncovered).count_ones()).max().unwrap_or(0);
    if (best as usize) * k < uncovered.count_ones() as usize {
        return false;
    }
    if k == 1 {
        return rects.iter().any(|r| r & uncovered == uncovered);
    }
    let mut cell = uncovered.trailing_zeros() as usize;
    let mut rest = uncovered;
    while rest != 0 {
        let c = rest.trailing_zeros() as usize;
        if by_cell[c].len() < by_cell[cell].len() {
            cell = c;
        }
        rest &= rest - 1;
    }
    by_cell[cell]
        .iter()
        .any(|&r| covers(rects, by_cell, uncovered & !rects[r], k - 1))
}
