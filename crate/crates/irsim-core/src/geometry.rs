//! Panel geometry: reflecting-unit positions, reflecting-unit-set (RUS)
//! placement, and Euclidean distances.
//!
//! Coordinate convention: the reflecting surface lies in the y-z plane with
//! the lower-left unit at the origin. Columns advance along +y with spacing
//! `col_spacing`, rows along +z with spacing `row_spacing`. Unit numbering is
//! 1-based and column-major: starting at the origin the index increases along
//! the first column, then the second, and so on. Everything in front of the
//! panel has x > 0.

use alloc::vec::Vec;

use crate::{Error, Result};

/// 3D Cartesian point, metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ORIGIN: Point3 = Point3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Euclidean distance to `other`. Symmetric, zero iff the points coincide.
    pub fn distance(&self, other: &Point3) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        libm::sqrt(dx * dx + dy * dy + dz * dz)
    }

    pub fn norm(&self) -> f64 {
        self.distance(&Point3::ORIGIN)
    }
}

impl core::ops::Add for Point3 {
    type Output = Point3;
    fn add(self, rhs: Point3) -> Point3 {
        Point3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl core::ops::Sub for Point3 {
    type Output = Point3;
    fn sub(self, rhs: Point3) -> Point3 {
        Point3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl core::ops::Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, s: f64) -> Point3 {
        Point3::new(self.x * s, self.y * s, self.z * s)
    }
}

/// Planar array of reflecting units in the y-z plane.
#[derive(Debug, Clone, PartialEq)]
pub struct IrsLayout {
    /// Number of rows (vertical, along z).
    pub n_rows: usize,
    /// Number of columns (horizontal, along y).
    pub n_cols: usize,
    /// Row spacing in metres (vertical distance between adjacent units).
    pub row_spacing_m: f64,
    /// Column spacing in metres (horizontal distance between adjacent units).
    pub col_spacing_m: f64,
}

impl IrsLayout {
    pub fn new(n_rows: usize, n_cols: usize, row_spacing_m: f64, col_spacing_m: f64) -> Result<Self> {
        let layout = Self {
            n_rows,
            n_cols,
            row_spacing_m,
            col_spacing_m,
        };
        layout.validate()?;
        Ok(layout)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_rows == 0 {
            return Err(Error::InvalidParameter {
                name: "n_rows",
                reason: "must be a positive integer",
            });
        }
        if self.n_cols == 0 {
            return Err(Error::InvalidParameter {
                name: "n_cols",
                reason: "must be a positive integer",
            });
        }
        if !(self.row_spacing_m > 0.0 && self.row_spacing_m.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "row_spacing_m",
                reason: "must be positive and finite",
            });
        }
        if !(self.col_spacing_m > 0.0 && self.col_spacing_m.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "col_spacing_m",
                reason: "must be positive and finite",
            });
        }
        Ok(())
    }

    /// Total number of reflecting units.
    pub fn num_units(&self) -> usize {
        self.n_rows * self.n_cols
    }

    /// Position of the unit at 0-based (row, col). No bounds check.
    pub fn position_rc(&self, row: usize, col: usize) -> Point3 {
        Point3::new(
            0.0,
            self.col_spacing_m * col as f64,
            self.row_spacing_m * row as f64,
        )
    }

    /// Position of unit `n` under the 1-based column-major numbering:
    /// col = (n-1) / n_rows, row = (n-1) % n_rows.
    pub fn unit_position(&self, n: usize) -> Result<Point3> {
        let total = self.num_units();
        if n == 0 || n > total {
            return Err(Error::IndexOutOfRange {
                name: "unit",
                index: n,
                limit: total,
            });
        }
        let col = (n - 1) / self.n_rows;
        let row = (n - 1) % self.n_rows;
        Ok(self.position_rc(row, col))
    }
}

/// A reflecting unit set: a contiguous rectangular block of units activated
/// together during acquisition.
#[derive(Debug, Clone, PartialEq)]
pub struct RusSpec {
    /// 1-based unit indices of the members, column-major within the block
    /// (row index fastest), matching the panel numbering.
    pub member_indices: Vec<usize>,
    /// Arithmetic mean of the member positions; used as the anchor point
    /// for ranging and positioning.
    pub center: Point3,
    pub rus_rows: usize,
    pub rus_cols: usize,
}

impl RusSpec {
    /// Build the block anchored at 0-based (row0, col0).
    pub fn rectangular(
        layout: &IrsLayout,
        row0: usize,
        col0: usize,
        rus_rows: usize,
        rus_cols: usize,
    ) -> Result<Self> {
        if rus_rows == 0 || rus_cols == 0 {
            return Err(Error::InvalidParameter {
                name: "rus_rows/rus_cols",
                reason: "must be positive integers",
            });
        }
        if row0 + rus_rows > layout.n_rows || col0 + rus_cols > layout.n_cols {
            return Err(Error::RusPlacement("block does not fit inside the panel"));
        }
        let mut member_indices = Vec::with_capacity(rus_rows * rus_cols);
        let mut sum = Point3::ORIGIN;
        for q in 0..rus_cols {
            for r in 0..rus_rows {
                let row = row0 + r;
                let col = col0 + q;
                member_indices.push(col * layout.n_rows + row + 1);
                sum = sum + layout.position_rc(row, col);
            }
        }
        let center = sum * (1.0 / member_indices.len() as f64);
        Ok(Self {
            member_indices,
            center,
            rus_rows,
            rus_cols,
        })
    }

    pub fn num_units(&self) -> usize {
        self.member_indices.len()
    }
}

/// Anchor of the centered block for a given panel/block size.
fn centered_anchor(layout: &IrsLayout, rus_rows: usize, rus_cols: usize) -> (usize, usize) {
    ((layout.n_rows - rus_rows) / 2, (layout.n_cols - rus_cols) / 2)
}

fn blocks_overlap(a: (usize, usize), b: (usize, usize), rows: usize, cols: usize) -> bool {
    a.0.abs_diff(b.0) < rows && a.1.abs_diff(b.1) < cols
}

/// Place `count` non-overlapping rectangular RUS blocks on the panel.
///
/// Placement policy:
/// * `count == 1`: one centered block.
/// * `count == 5`: the four corner blocks plus the centered block, which
///   maximizes the anchor baseline for positioning.
/// * otherwise: deterministic greedy farthest-point selection over all
///   feasible block anchors, seeded at the lower-left corner, which spreads
///   the blocks to (approximately) maximize pairwise center distances.
///
/// Fails if the blocks cannot be placed without overlap.
pub fn place_rus(
    layout: &IrsLayout,
    count: usize,
    rus_rows: usize,
    rus_cols: usize,
) -> Result<Vec<RusSpec>> {
    if count == 0 {
        return Err(Error::InvalidParameter {
            name: "rus_count",
            reason: "must be at least 1",
        });
    }
    if rus_rows == 0 || rus_cols == 0 {
        return Err(Error::InvalidParameter {
            name: "rus_rows/rus_cols",
            reason: "must be positive integers",
        });
    }
    if rus_rows > layout.n_rows || rus_cols > layout.n_cols {
        return Err(Error::RusPlacement("block does not fit inside the panel"));
    }
    let max_row = layout.n_rows - rus_rows;
    let max_col = layout.n_cols - rus_cols;

    let anchors: Vec<(usize, usize)> = if count == 1 {
        alloc::vec![centered_anchor(layout, rus_rows, rus_cols)]
    } else if count == 5 {
        let chosen = alloc::vec![
            (0, 0),
            (max_row, 0),
            (0, max_col),
            (max_row, max_col),
            centered_anchor(layout, rus_rows, rus_cols),
        ];
        for i in 0..chosen.len() {
            for j in (i + 1)..chosen.len() {
                if blocks_overlap(chosen[i], chosen[j], rus_rows, rus_cols) {
                    return Err(Error::RusPlacement(
                        "corner-plus-center blocks overlap on this panel",
                    ));
                }
            }
        }
        chosen
    } else {
        greedy_anchors(layout, count, rus_rows, rus_cols, max_row, max_col)?
    };

    anchors
        .iter()
        .map(|&(r0, c0)| RusSpec::rectangular(layout, r0, c0, rus_rows, rus_cols))
        .collect()
}

/// Greedy max-min-distance anchor selection. Ties resolve to the first
/// candidate in row-major anchor order, so the result is deterministic.
fn greedy_anchors(
    layout: &IrsLayout,
    count: usize,
    rus_rows: usize,
    rus_cols: usize,
    max_row: usize,
    max_col: usize,
) -> Result<Vec<(usize, usize)>> {
    let anchor_center = |a: (usize, usize)| -> Point3 {
        // Center of the block anchored at `a`; offsets are constant so only
        // relative distances matter for the selection.
        Point3::new(
            0.0,
            layout.col_spacing_m * (a.1 as f64 + (rus_cols as f64 - 1.0) / 2.0),
            layout.row_spacing_m * (a.0 as f64 + (rus_rows as f64 - 1.0) / 2.0),
        )
    };

    let mut chosen: Vec<(usize, usize)> = alloc::vec![(0, 0)];
    while chosen.len() < count {
        let mut best: Option<((usize, usize), f64)> = None;
        for r0 in 0..=max_row {
            for c0 in 0..=max_col {
                let cand = (r0, c0);
                if chosen
                    .iter()
                    .any(|&c| blocks_overlap(c, cand, rus_rows, rus_cols))
                {
                    continue;
                }
                let p = anchor_center(cand);
                let min_dist = chosen
                    .iter()
                    .map(|&c| anchor_center(c).distance(&p))
                    .fold(f64::INFINITY, f64::min);
                match best {
                    Some((_, d)) if min_dist <= d => {}
                    _ => best = Some((cand, min_dist)),
                }
            }
        }
        match best {
            Some((cand, _)) => chosen.push(cand),
            None => {
                return Err(Error::RusPlacement(
                    "cannot place the requested number of non-overlapping blocks",
                ))
            }
        }
    }
    Ok(chosen)
}

/// Place blocks at explicit 0-based (row0, col0) anchors, validating fit and
/// pairwise non-overlap. Used for config-driven placement overrides.
pub fn place_rus_at(
    layout: &IrsLayout,
    anchors: &[(usize, usize)],
    rus_rows: usize,
    rus_cols: usize,
) -> Result<Vec<RusSpec>> {
    if anchors.is_empty() {
        return Err(Error::EmptyInput("rus_anchors"));
    }
    for i in 0..anchors.len() {
        for j in (i + 1)..anchors.len() {
            if blocks_overlap(anchors[i], anchors[j], rus_rows, rus_cols) {
                return Err(Error::RusPlacement("explicit anchors overlap"));
            }
        }
    }
    anchors
        .iter()
        .map(|&(r0, c0)| RusSpec::rectangular(layout, r0, c0, rus_rows, rus_cols))
        .collect()
}
