//! Closed-form optimal configurations.
//!
//! For n regions with sorted masses the minimizer alternates sides as masses
//! grow: M1, M3, M5, ... march outward on the positive side and M2, M4, ...
//! on the negative side. This is a theorem for n <= 4 and a conjecture
//! beyond, and the provenance field says which.

use crate::config::{Configuration, RegionId};
use crate::density::Density;
use crate::error::{Error, Result};
use crate::layout::{realize, Layout, MassVector};

/// How a solution is justified.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// n = 1 or 2.
    Theorem1_2,
    /// n = 3.
    Theorem3,
    /// n = 4.
    Theorem4,
    /// n >= 5: the alternating pattern is conjectured, not proved here.
    ConjecturedAlternating,
}

impl Provenance {
    pub fn tag(self) -> &'static str {
        match self {
            Provenance::Theorem1_2 => "Theorem1_2",
            Provenance::Theorem3 => "Theorem3",
            Provenance::Theorem4 => "Theorem4",
            Provenance::ConjecturedAlternating => "ConjecturedAlternating",
        }
    }

    pub fn is_theorem(self) -> bool {
        !matches!(self, Provenance::ConjecturedAlternating)
    }
}

/// An optimal (or conjectured-optimal) configuration with its layout and
/// perimeter.
#[derive(Debug, Clone)]
pub struct Solution {
    pub layout: Layout,
    pub config: Configuration,
    pub perimeter: f64,
    pub provenance: Provenance,
}

/// The alternating layout for `n` sorted masses: odd-indexed masses (1-based
/// M1, M3, ...) on the positive side, even-indexed on the negative side,
/// each side ordered outward by mass.
pub fn alternating_layout(n: usize) -> Layout {
    let right = (0..n).step_by(2).map(RegionId).collect();
    let left = (1..n).step_by(2).map(RegionId).collect();
    Layout::single_intervals(left, right)
}

/// Builds the optimal configuration for strictly positive sorted masses.
pub fn solve(d: Density, masses: &MassVector) -> Result<Solution> {
    if masses.as_slice().iter().any(|&m| m <= 0.0) {
        return Err(Error::InvalidMass(
            "solver requires strictly positive masses".into(),
        ));
    }
    let n = masses.len();
    let layout = alternating_layout(n);
    let config = realize(d, &layout, masses)?;
    let perimeter = config.total_perimeter(d);
    let provenance = match n {
        1 | 2 => Provenance::Theorem1_2,
        3 => Provenance::Theorem3,
        4 => Provenance::Theorem4,
        _ => Provenance::ConjecturedAlternating,
    };
    Ok(Solution {
        layout,
        config,
        perimeter,
        provenance,
    })
}

/// Perimeter of a split-free layout straight from prefix sums, without
/// building the configuration: each side contributes the density value at
/// every partial-mass position. Zero-mass regions contribute nothing.
pub fn closed_form_perimeter(d: Density, masses: &MassVector, layout: &Layout) -> Result<f64> {
    if layout.split.is_some() {
        return Err(Error::InvalidLayout(
            "split layouts need continuous optimization, see the oracle".into(),
        ));
    }
    let (left, right) = layout.side_masses(masses)?;
    Ok(side_perimeter(d, &left) + side_perimeter(d, &right))
}

pub(crate) fn side_perimeter(d: Density, side: &[(RegionId, f64)]) -> f64 {
    side_perimeter_masses(d, side.iter().map(|&(_, m)| m))
}

/// Perimeter contribution of one side from its cell masses, origin outward.
pub(crate) fn side_perimeter_masses(d: Density, masses: impl Iterator<Item = f64>) -> f64 {
    let mut prefix = 0.0;
    let mut p = 0.0;
    for m in masses {
        if m == 0.0 {
            continue;
        }
        prefix += m;
        p += d.value(d.inverse_cumulative(prefix));
    }
    p
}
