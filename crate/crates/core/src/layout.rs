use crate::config::{Configuration, RegionId};
use crate::density::Density;
use crate::error::{Error, Result};
use crate::MASS_CAP;

/// Target region masses, sorted ascending. The solver requires every entry
/// positive; the oracle additionally accepts zeros when deriving degenerate
/// frameworks.
#[derive(Debug, Clone, PartialEq)]
pub struct MassVector(Vec<f64>);

impl MassVector {
    /// Nonnegative sorted masses (oracle-grade input).
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::InvalidMass("empty mass vector".into()));
        }
        for &m in &masses {
            if !m.is_finite() || !(0.0..=MASS_CAP).contains(&m) {
                return Err(Error::InvalidMass(format!(
                    "mass {m} outside [0, {MASS_CAP}]"
                )));
            }
        }
        if masses.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidMass("masses must be sorted ascending".into()));
        }
        Ok(MassVector(masses))
    }

    /// Strictly positive sorted masses (solver-grade input).
    pub fn strictly_positive(masses: Vec<f64>) -> Result<Self> {
        let v = Self::new(masses)?;
        if v.0[0] <= 0.0 {
            return Err(Error::InvalidMass(
                "masses must be strictly positive".into(),
            ));
        }
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, r: RegionId) -> f64 {
        self.0[r.0]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// One side of a layout resolved to (region, mass) cells, origin outward.
pub type SideMasses = Vec<(RegionId, f64)>;

/// One region split across the origin: `left_fraction` of its mass sits on
/// the negative side, the rest on the positive side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub region: RegionId,
    pub left_fraction: f64,
}

/// Combinatorial skeleton of a condensed configuration: region order on each
/// side from the origin outward, plus an optional split region that appears
/// once per side.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub left: Vec<RegionId>,
    pub right: Vec<RegionId>,
    pub split: Option<SplitSpec>,
}

impl Layout {
    pub fn single_intervals(left: Vec<RegionId>, right: Vec<RegionId>) -> Layout {
        Layout {
            left,
            right,
            split: None,
        }
    }

    /// Checks id ranges and the once-per-side rule against `n` regions.
    pub fn validate(&self, n: usize) -> Result<()> {
        let mut left_counts = vec![0usize; n];
        let mut right_counts = vec![0usize; n];
        for r in &self.left {
            *left_counts
                .get_mut(r.0)
                .ok_or_else(|| Error::InvalidLayout(format!("{r} out of range")))? += 1;
        }
        for r in &self.right {
            *right_counts
                .get_mut(r.0)
                .ok_or_else(|| Error::InvalidLayout(format!("{r} out of range")))? += 1;
        }
        for i in 0..n {
            if left_counts[i] > 1 || right_counts[i] > 1 {
                return Err(Error::InvalidLayout(format!(
                    "region R{i} appears twice on one side"
                )));
            }
        }
        match self.split {
            None => {
                for i in 0..n {
                    if left_counts[i] + right_counts[i] != 1 {
                        return Err(Error::InvalidLayout(format!(
                            "region R{i} must appear exactly once"
                        )));
                    }
                }
            }
            Some(SplitSpec {
                region,
                left_fraction,
            }) => {
                if !(0.0..=1.0).contains(&left_fraction) {
                    return Err(Error::InvalidLayout(format!(
                        "split fraction {left_fraction} outside [0, 1]"
                    )));
                }
                if region.0 >= n {
                    return Err(Error::InvalidLayout(format!("{region} out of range")));
                }
                for i in 0..n {
                    let ok = if i == region.0 {
                        left_counts[i] == 1 && right_counts[i] == 1
                    } else {
                        left_counts[i] + right_counts[i] == 1
                    };
                    if !ok {
                        return Err(Error::InvalidLayout(format!(
                            "region R{i} has the wrong multiplicity for this split"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Reflection (left and right swapped). The split fraction flips with it.
    pub fn reflected(&self) -> Layout {
        Layout {
            left: self.right.clone(),
            right: self.left.clone(),
            split: self.split.map(|s| SplitSpec {
                region: s.region,
                left_fraction: 1.0 - s.left_fraction,
            }),
        }
    }

    /// Per-side (region, mass) sequences, origin outward, under `masses`.
    pub fn side_masses(&self, masses: &MassVector) -> Result<(SideMasses, SideMasses)> {
        self.validate(masses.len())?;
        let take = |side: &[RegionId], on_left: bool| -> Vec<(RegionId, f64)> {
            side.iter()
                .map(|&r| {
                    let m = masses.get(r);
                    match self.split {
                        Some(s) if s.region == r => {
                            let f = if on_left {
                                s.left_fraction
                            } else {
                                1.0 - s.left_fraction
                            };
                            (r, f * m)
                        }
                        _ => (r, m),
                    }
                })
                .collect()
        };
        Ok((take(&self.left, true), take(&self.right, false)))
    }

    /// Compact human-readable form, outermost-left to outermost-right,
    /// e.g. `M4 M2 . M1 M3` (names are 1-based masses).
    pub fn describe(&self) -> String {
        let mut parts: Vec<String> = self
            .left
            .iter()
            .rev()
            .map(|r| format!("M{}", r.0 + 1))
            .collect();
        parts.push(".".into());
        parts.extend(self.right.iter().map(|r| format!("M{}", r.0 + 1)));
        parts.join(" ")
    }
}

/// Builds the condensed configuration a layout describes: on each side,
/// breakpoints march outward from the origin at the positions whose
/// cumulative mass equals the running prefix sum. Zero-mass cells collapse
/// and disappear.
pub fn realize(d: Density, layout: &Layout, masses: &MassVector) -> Result<Configuration> {
    let (left, right) = layout.side_masses(masses)?;
    if left.iter().chain(&right).all(|&(_, m)| m == 0.0) {
        return Err(Error::InvalidMass("all masses are zero".into()));
    }

    let mut breakpoints = Vec::with_capacity(left.len() + right.len() + 1);
    let mut cells = Vec::with_capacity(left.len() + right.len());

    // negative side, outermost first
    let mut prefix = 0.0;
    let mut neg: Vec<(f64, RegionId)> = Vec::new();
    for &(r, m) in &left {
        if m == 0.0 {
            continue;
        }
        prefix += m;
        neg.push((-d.inverse_cumulative(prefix), r));
    }
    for &(x, r) in neg.iter().rev() {
        breakpoints.push(x);
        cells.push(Some(r));
    }
    breakpoints.push(0.0);

    // positive side
    prefix = 0.0;
    for &(r, m) in &right {
        if m == 0.0 {
            continue;
        }
        prefix += m;
        cells.push(Some(r));
        breakpoints.push(d.inverse_cumulative(prefix));
    }

    // a split region adjacent to the origin on both sides merges into one
    // straddling cell
    Configuration::from_raw_normalized(breakpoints, cells, masses.len(), 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    const D: Density = Density::AbsoluteValue;

    #[test]
    fn realize_right_side_prefix_sums() {
        // right = [0.5, 1.5]: breakpoints 0, 1, 2 (prefix sums 0.5, 2.0)
        let masses = MassVector::new(vec![0.5, 1.5]).unwrap();
        let layout = Layout::single_intervals(vec![], vec![RegionId(0), RegionId(1)]);
        let c = realize(D, &layout, &masses).unwrap();
        assert_eq!(c.breakpoints().len(), 3);
        assert!((c.breakpoints()[0] - 0.0).abs() < 1e-15);
        assert!((c.breakpoints()[1] - 1.0).abs() < 1e-14);
        assert!((c.breakpoints()[2] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn realize_left_side_reflects() {
        let masses = MassVector::new(vec![1.0]).unwrap();
        let layout = Layout::single_intervals(vec![RegionId(0)], vec![]);
        let c = realize(D, &layout, &masses).unwrap();
        assert_eq!(c.breakpoints().len(), 2);
        assert!((c.breakpoints()[0] + (2.0f64).sqrt()).abs() < 1e-14);
        assert_eq!(c.breakpoints()[1], 0.0);
    }

    #[test]
    fn realize_collapses_zero_mass_region() {
        let masses = MassVector::new(vec![0.0, 1.0]).unwrap();
        let layout = Layout::single_intervals(vec![], vec![RegionId(0), RegionId(1)]);
        let c = realize(D, &layout, &masses).unwrap();
        assert_eq!(c.cell_count(), 1);
        assert_eq!(c.cells()[0], Some(RegionId(1)));
        assert_eq!(c.region_mass(D, RegionId(0)), 0.0);
    }

    #[test]
    fn realize_preserves_target_masses() {
        let masses = MassVector::new(vec![0.3, 1.1, 2.4]).unwrap();
        let layout = Layout::single_intervals(vec![RegionId(1)], vec![RegionId(0), RegionId(2)]);
        let c = realize(D, &layout, &masses).unwrap();
        for i in 0..3 {
            let got = c.region_mass(D, RegionId(i));
            let want = masses.get(RegionId(i));
            assert!(
                (got - want).abs() <= 1e-12 * want,
                "region {i}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn realize_split_places_cell_on_each_side() {
        let masses = MassVector::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let layout = Layout {
            left: vec![RegionId(1), RegionId(3)],
            right: vec![RegionId(0), RegionId(1), RegionId(2)],
            split: Some(SplitSpec {
                region: RegionId(1),
                left_fraction: 0.25,
            }),
        };
        let c = realize(D, &layout, &masses).unwrap();
        assert_eq!(c.region_cells(RegionId(1)).len(), 2);
        assert!((c.region_mass(D, RegionId(1)) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn layout_validation_rejects_duplicates_and_bad_fraction() {
        let dup = Layout::single_intervals(vec![RegionId(0), RegionId(0)], vec![]);
        assert!(dup.validate(1).is_err());
        let bad = Layout {
            left: vec![RegionId(0)],
            right: vec![RegionId(0)],
            split: Some(SplitSpec {
                region: RegionId(0),
                left_fraction: 1.5,
            }),
        };
        assert!(bad.validate(1).is_err());
    }
}
