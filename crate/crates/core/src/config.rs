use crate::density::Density;
use crate::error::{Error, Result};
use crate::{EPS_ORIGIN, MASS_CAP};

/// A closed interval [a, b] with a <= b. Its *length* is b - a; its weighted
/// mass and perimeter come from a [`Density`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() || a > b {
            return Err(Error::InvalidInterval { a, b });
        }
        Ok(Interval { a, b })
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn mass(&self, d: Density) -> f64 {
        d.mass(self.a, self.b)
    }
}

/// Index of one of the n regions of a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RegionId(pub usize);

impl std::fmt::Display for RegionId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "R{}", self.0)
    }
}

/// Where the origin sits relative to a configuration's breakpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OriginPosition {
    /// Breakpoint index i with x_i == 0.
    Breakpoint(usize),
    /// Cell index k with x_k < 0 < x_{k+1}.
    Interior(usize),
    /// Strictly outside [x_0, x_m].
    Outside,
}

/// n labeled regions laid out as cells between strictly increasing
/// breakpoints. Cell k occupies [x_k, x_{k+1}] and carries either a region
/// label or `None` (an empty gap).
///
/// Adjacency is structural: two cells share an endpoint exactly when they are
/// consecutive in the cell list, so the counted-once perimeter rule never
/// depends on float comparisons.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    breakpoints: Vec<f64>,
    cells: Vec<Option<RegionId>>,
    n: usize,
}

impl Configuration {
    /// Validates and builds a configuration. Breakpoints within
    /// [`EPS_ORIGIN`](crate::EPS_ORIGIN) of 0 are snapped to exactly 0.
    pub fn new(breakpoints: Vec<f64>, cells: Vec<Option<RegionId>>, n: usize) -> Result<Self> {
        let mut breakpoints = breakpoints;
        for x in &mut breakpoints {
            if !x.is_finite() || x.abs() > 2.0 * (2.0 * MASS_CAP).sqrt() {
                return Err(Error::InvalidConfiguration(format!(
                    "breakpoint {x} is not a usable coordinate"
                )));
            }
            if x.abs() <= EPS_ORIGIN {
                *x = 0.0;
            }
        }
        if breakpoints.len() < 2 {
            return Err(Error::InvalidConfiguration(
                "need at least two breakpoints".into(),
            ));
        }
        if cells.len() + 1 != breakpoints.len() {
            return Err(Error::InvalidConfiguration(format!(
                "{} breakpoints require {} cells, got {}",
                breakpoints.len(),
                breakpoints.len() - 1,
                cells.len()
            )));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfiguration(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        if let Some(r) = cells.iter().flatten().find(|r| r.0 >= n) {
            return Err(Error::InvalidConfiguration(format!(
                "cell label {r} out of range for n = {n}"
            )));
        }
        if cells.first() == Some(&None) || cells.last() == Some(&None) {
            return Err(Error::InvalidConfiguration(
                "leading or trailing empty cell".into(),
            ));
        }
        if cells.windows(2).any(|w| w[0].is_none() && w[1].is_none()) {
            return Err(Error::InvalidConfiguration(
                "adjacent empty cells must be merged".into(),
            ));
        }
        // two adjacent cells of one region are really one interval; keeping
        // them separate would double-count their shared breakpoint
        if cells.windows(2).any(|w| w[0].is_some() && w[0] == w[1]) {
            return Err(Error::InvalidConfiguration(
                "adjacent cells of the same region must be merged".into(),
            ));
        }
        if cells.iter().all(|c| c.is_none()) {
            return Err(Error::InvalidConfiguration("no labeled cells".into()));
        }
        Ok(Configuration {
            breakpoints,
            cells,
            n,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn cells(&self) -> &[Option<RegionId>] {
        &self.cells
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_interval(&self, k: usize) -> Interval {
        Interval {
            a: self.breakpoints[k],
            b: self.breakpoints[k + 1],
        }
    }

    pub fn cell_mass(&self, d: Density, k: usize) -> f64 {
        self.cell_interval(k).mass(d)
    }

    /// Indices of the cells labeled `r`, in position order.
    pub fn region_cells(&self, r: RegionId) -> Vec<usize> {
        self.cells
            .iter()
            .enumerate()
            .filter_map(|(k, c)| (*c == Some(r)).then_some(k))
            .collect()
    }

    /// Total weighted mass of region `r`; 0 when the region has no cells.
    pub fn region_mass(&self, d: Density, r: RegionId) -> f64 {
        self.region_cells(r)
            .into_iter()
            .map(|k| self.cell_mass(d, k))
            .sum()
    }

    /// All region masses as a vector indexed by region.
    pub fn region_masses(&self, d: Density) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (k, c) in self.cells.iter().enumerate() {
            if let Some(r) = c {
                out[r.0] += self.cell_mass(d, k);
            }
        }
        out
    }

    /// Total weighted perimeter: the density value at each breakpoint
    /// incident to at least one labeled cell, each breakpoint counted once.
    /// A breakpoint at exactly 0 contributes nothing under |x|. Terms are
    /// summed in value order, so mirror images get bitwise-equal perimeters.
    pub fn total_perimeter(&self, d: Density) -> f64 {
        let mut terms: Vec<f64> = self
            .breakpoints
            .iter()
            .enumerate()
            .filter(|&(i, _)| self.breakpoint_is_active(i))
            .map(|(_, &x)| d.value(x))
            .collect();
        terms.sort_by(f64::total_cmp);
        terms.iter().sum()
    }

    fn breakpoint_is_active(&self, i: usize) -> bool {
        let left = i.checked_sub(1).and_then(|k| self.cells.get(k));
        let right = self.cells.get(i);
        matches!(left, Some(Some(_))) || matches!(right, Some(Some(_)))
    }

    /// Locates the origin relative to breakpoints and cells.
    pub fn origin_position(&self) -> OriginPosition {
        if let Some(i) = self.breakpoints.iter().position(|&x| x == 0.0) {
            return OriginPosition::Breakpoint(i);
        }
        for k in 0..self.cells.len() {
            let iv = self.cell_interval(k);
            if iv.a < 0.0 && 0.0 < iv.b {
                return OriginPosition::Interior(k);
            }
        }
        OriginPosition::Outside
    }

    /// A configuration is condensed when it has no empty cells, at most two
    /// cells per region, and the origin is a breakpoint or interior to a cell.
    pub fn is_condensed(&self) -> bool {
        if self.cells.iter().any(|c| c.is_none()) {
            return false;
        }
        let mut counts = vec![0usize; self.n];
        for c in self.cells.iter().flatten() {
            counts[c.0] += 1;
        }
        if counts.iter().any(|&c| c > 2) {
            return false;
        }
        self.origin_position() != OriginPosition::Outside
    }

    /// Mirror image about the origin. Exact: perimeter and region masses are
    /// bitwise unchanged under |x|.
    pub fn reflected(&self) -> Configuration {
        let breakpoints = self.breakpoints.iter().rev().map(|&x| -x).collect();
        let cells = self.cells.iter().rev().cloned().collect();
        Configuration {
            breakpoints,
            cells,
            n: self.n,
        }
    }

    /// Innermost labeled cell intersecting the positive axis, if any.
    fn innermost_positive(&self) -> Option<usize> {
        (0..self.cells.len()).find(|&k| self.cells[k].is_some() && self.breakpoints[k + 1] > 0.0)
    }

    /// Innermost labeled cell intersecting the negative axis, if any.
    fn innermost_negative(&self) -> Option<usize> {
        (0..self.cells.len())
            .rev()
            .find(|&k| self.cells[k].is_some() && self.breakpoints[k] < 0.0)
    }

    /// Reflects if needed so the origin-adjacent region of smallest mass lies
    /// on the positive side; ties go to the smaller region id, then to the
    /// smaller positive cell part. Idempotent, perimeter preserved exactly.
    pub fn canonicalize(&self, d: Density) -> Configuration {
        let pos = self.innermost_positive();
        let neg = self.innermost_negative();
        let reflect = match (pos, neg) {
            (_, None) => false,
            (None, Some(_)) => true,
            (Some(p), Some(q)) => {
                let rp = self.cells[p].unwrap();
                let rq = self.cells[q].unwrap();
                let mp = self.region_mass(d, rp);
                let mq = self.region_mass(d, rq);
                if mq != mp {
                    mq < mp
                } else if rq != rp {
                    rq < rp
                } else if p == q {
                    // one cell straddles the origin: compare its two parts
                    let iv = self.cell_interval(p);
                    d.mass(iv.a, 0.0) < d.mass(0.0, iv.b)
                } else {
                    // same region owns both innermost cells
                    self.cell_mass(d, q) < self.cell_mass(d, p)
                }
            }
        };
        if reflect {
            self.reflected()
        } else {
            self.clone()
        }
    }

    /// Drops zero-length cells and merges runs of same-region or empty
    /// neighbors into single cells. Used by moves whose closed forms collide
    /// endpoints.
    pub(crate) fn from_raw_normalized(
        breakpoints: Vec<f64>,
        cells: Vec<Option<RegionId>>,
        n: usize,
        collapse_tol: f64,
    ) -> Result<Configuration> {
        assert_eq!(breakpoints.len(), cells.len() + 1);
        let mut bps: Vec<f64> = Vec::with_capacity(breakpoints.len());
        let mut cs: Vec<Option<RegionId>> = Vec::with_capacity(cells.len());
        for (k, cell) in cells.into_iter().enumerate() {
            let (a, b) = (breakpoints[k], breakpoints[k + 1]);
            if b - a <= collapse_tol {
                continue; // vanished cell
            }
            match (bps.is_empty(), cs.last()) {
                (true, _) => {
                    bps.push(a);
                    bps.push(b);
                    cs.push(cell);
                }
                (false, Some(prev)) if *prev == cell => {
                    *bps.last_mut().unwrap() = b; // merge with previous run
                }
                _ => {
                    bps.push(b);
                    cs.push(cell);
                }
            }
        }
        // strip empty edges left over from collapses
        while cs.first() == Some(&None) {
            cs.remove(0);
            bps.remove(0);
        }
        while cs.last() == Some(&None) {
            cs.pop();
            bps.pop();
        }
        Configuration::new(bps, cs, n)
    }
}
