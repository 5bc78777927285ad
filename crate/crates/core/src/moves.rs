//! Discrete perimeter-reducing rearrangements.
//!
//! Each move is a pure transformation `Configuration -> MoveReport` that
//! preserves every region's mass and never increases total perimeter. Flows
//! that the underlying theory describes as continuous (siphoning, sliding)
//! are realized here as closed-form end states: the transferred mass is the
//! minimum of the competing interior masses and every affected breakpoint is
//! recomputed from prefix sums between stationary anchors, so conservation is
//! exact rather than integrated. The time-dependent view lives in
//! [`crate::flow`] for cross-validation.

use crate::config::{Configuration, OriginPosition, RegionId};
use crate::density::Density;
use crate::error::{Error, Result};

/// Which of the discrete moves produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveKind {
    Condense,
    TransposeAdjacent,
    MassStealOuter,
    SiphonAlternating,
    SlideNestedOrigin,
    SlideOriginToEndpoint,
}

impl MoveKind {
    pub fn tag(self) -> &'static str {
        match self {
            MoveKind::Condense => "condense",
            MoveKind::TransposeAdjacent => "transpose_adjacent",
            MoveKind::MassStealOuter => "mass_steal_outer",
            MoveKind::SiphonAlternating => "siphon_alternating",
            MoveKind::SlideNestedOrigin => "slide_nested_origin",
            MoveKind::SlideOriginToEndpoint => "slide_origin_to_endpoint",
        }
    }
}

/// Side of the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Relative ordering of two two-interval regions A, B once renamed so that
/// A's left interval is leftmost.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternKind {
    /// A- B- A+ B+
    Alternating,
    /// A- B- B+ A+
    Nested,
    /// A- A+ B- B+
    Ordered,
}

/// Outcome of one move: the configurations before and after, the signed
/// perimeter change (after minus before), and whether the move guarantees a
/// strict decrease under its preconditions.
#[derive(Debug, Clone)]
pub struct MoveReport {
    pub kind: MoveKind,
    pub before: Configuration,
    pub after: Configuration,
    pub perimeter_delta: f64,
    pub strict: bool,
}

impl MoveReport {
    fn new(
        d: Density,
        kind: MoveKind,
        before: Configuration,
        after: Configuration,
        strict: bool,
    ) -> Self {
        let p_before = before.total_perimeter(d);
        let perimeter_delta = after.total_perimeter(d) - p_before;
        if cfg!(debug_assertions) {
            for i in 0..before.n() {
                let was = before.region_mass(d, RegionId(i));
                let is = after.region_mass(d, RegionId(i));
                debug_assert!(
                    (is - was).abs() <= crate::MASS_REL_TOL * was.max(1.0),
                    "{kind:?} leaked mass of R{i}: {was} -> {is}"
                );
            }
            debug_assert!(
                perimeter_delta <= 1e-12 * p_before.max(1.0),
                "{kind:?} increased perimeter by {perimeter_delta}"
            );
        }
        MoveReport {
            kind,
            before,
            after,
            perimeter_delta,
            strict,
        }
    }
}

/// On each side of the origin independently, rebuilds every region as a
/// single interval packed against the origin, ordered by the region's
/// original outermost endpoint on that side. Cells straddling the origin
/// contribute their two halves to the two sides.
pub fn condense(d: Density, c: &Configuration) -> Result<MoveReport> {
    let n = c.n();
    // per region and side: (outermost |endpoint|, accumulated mass)
    let mut neg: Vec<Option<(f64, f64)>> = vec![None; n];
    let mut pos: Vec<Option<(f64, f64)>> = vec![None; n];
    for (k, cell) in c.cells().iter().enumerate() {
        let Some(r) = cell else { continue };
        let iv = c.cell_interval(k);
        if iv.a < 0.0 {
            let m = d.mass(iv.a, iv.b.min(0.0));
            let e = neg[r.0].get_or_insert((0.0, 0.0));
            e.0 = e.0.max(-iv.a);
            e.1 += m;
        }
        if iv.b > 0.0 {
            let m = d.mass(iv.a.max(0.0), iv.b);
            let e = pos[r.0].get_or_insert((0.0, 0.0));
            e.0 = e.0.max(iv.b);
            e.1 += m;
        }
    }

    let order = |side: &[Option<(f64, f64)>]| -> Vec<(RegionId, f64)> {
        let mut v: Vec<(f64, RegionId, f64)> = side
            .iter()
            .enumerate()
            .filter_map(|(i, e)| e.map(|(outer, m)| (outer, RegionId(i), m)))
            .collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        v.into_iter().map(|(_, r, m)| (r, m)).collect()
    };

    let after = from_side_masses(d, &order(&neg), &order(&pos), n)?;
    Ok(MoveReport::new(
        d,
        MoveKind::Condense,
        c.clone(),
        after,
        false,
    ))
}

/// Builds a configuration whose sides are adjacent intervals packed against
/// the origin with the given (region, mass) order, origin outward.
pub(crate) fn from_side_masses(
    d: Density,
    left: &[(RegionId, f64)],
    right: &[(RegionId, f64)],
    n: usize,
) -> Result<Configuration> {
    let mut breakpoints = Vec::with_capacity(left.len() + right.len() + 1);
    let mut cells = Vec::with_capacity(left.len() + right.len());
    let mut prefix = 0.0;
    let mut stack = Vec::new();
    for &(r, m) in left {
        if m == 0.0 {
            continue;
        }
        prefix += m;
        stack.push((-d.inverse_cumulative(prefix), r));
    }
    for &(x, r) in stack.iter().rev() {
        breakpoints.push(x);
        cells.push(Some(r));
    }
    breakpoints.push(0.0);
    prefix = 0.0;
    for &(r, m) in right {
        if m == 0.0 {
            continue;
        }
        prefix += m;
        cells.push(Some(r));
        breakpoints.push(d.inverse_cumulative(prefix));
    }
    // a region packed against the origin on both sides becomes one
    // straddling cell
    Configuration::from_raw_normalized(breakpoints, cells, n, 0.0)
}

/// Swaps two adjacent same-side cells so the lighter one sits nearer the
/// origin. Only the shared breakpoint moves; it moves strictly toward the
/// origin when the inner cell is strictly heavier.
pub fn transpose_adjacent(
    d: Density,
    c: &Configuration,
    shared_breakpoint_index: usize,
) -> Result<MoveReport> {
    let k = shared_breakpoint_index;
    if k == 0 || k + 1 >= c.breakpoints().len() {
        return Err(Error::Precondition(format!(
            "breakpoint {k} is not shared by two cells"
        )));
    }
    let (inner_cell, outer_cell, positive_side) = if c.breakpoints()[k - 1] >= 0.0 {
        (k - 1, k, true)
    } else if c.breakpoints()[k + 1] <= 0.0 {
        (k, k - 1, false)
    } else {
        return Err(Error::Precondition(
            "the two cells must lie on the same side of the origin".into(),
        ));
    };
    match (c.cells()[inner_cell], c.cells()[outer_cell]) {
        (Some(a), Some(b)) if a != b => {}
        (Some(_), Some(_)) => {
            return Err(Error::Precondition(
                "cells belong to the same region".into(),
            ))
        }
        _ => return Err(Error::Precondition("both cells must be labeled".into())),
    }
    // swapping must not bring a cell next to another interval of its own
    // region; that situation calls for consolidation, not transposition
    let touches_own_region = (k >= 2 && c.cells()[k - 2] == c.cells()[k])
        || (k + 1 < c.cell_count() && c.cells()[k + 1] == c.cells()[k - 1]);
    if touches_own_region {
        return Err(Error::Precondition(
            "swap would touch another interval of the same region".into(),
        ));
    }
    let m_inner = c.cell_mass(d, inner_cell);
    let m_outer = c.cell_mass(d, outer_cell);
    let tie_tol = crate::MASS_REL_TOL * m_inner.max(m_outer);
    if m_inner + tie_tol < m_outer {
        return Err(Error::Precondition(format!(
            "inner cell must not be lighter than outer ({m_inner} < {m_outer})"
        )));
    }
    let tie = (m_inner - m_outer).abs() <= tie_tol;

    let mut bps = c.breakpoints().to_vec();
    let mut cells = c.cells().to_vec();
    if !tie {
        let inner_bound = if positive_side {
            bps[k - 1]
        } else {
            bps[k + 1]
        };
        let sign = if positive_side { 1.0 } else { -1.0 };
        bps[k] = d.inverse_cumulative(d.cumulative(inner_bound) + sign * m_outer);
    }
    cells.swap(inner_cell, outer_cell);
    let after = Configuration::new(bps, cells, c.n())?;
    Ok(MoveReport::new(
        d,
        MoveKind::TransposeAdjacent,
        c.clone(),
        after,
        !tie,
    ))
}

fn entirely_on(c: &Configuration, k: usize, side: Side) -> bool {
    let iv = c.cell_interval(k);
    match side {
        Side::Left => iv.b <= 0.0,
        Side::Right => iv.a >= 0.0,
    }
}

/// Merges a region's opposite-side cell into its outermost cell on `side`,
/// sliding the cells that were outside the removed cell inward to close the
/// gap. Strictly decreases perimeter.
pub fn mass_steal_outer(d: Density, c: &Configuration, side: Side) -> Result<MoveReport> {
    match side {
        Side::Left => mass_steal_left(d, c),
        Side::Right => {
            let mirrored = mass_steal_left(d, &c.reflected())?;
            let after = mirrored.after.reflected();
            Ok(MoveReport::new(
                d,
                MoveKind::MassStealOuter,
                c.clone(),
                after,
                true,
            ))
        }
    }
}

fn mass_steal_left(d: Density, c: &Configuration) -> Result<MoveReport> {
    if !entirely_on(c, 0, Side::Left) {
        return Err(Error::Precondition(
            "no cell lies entirely on the left side".into(),
        ));
    }
    let r = c.cells()[0].expect("edge cells are labeled");
    let opposite: Vec<usize> = c
        .region_cells(r)
        .into_iter()
        .filter(|&k| entirely_on(c, k, Side::Right))
        .collect();
    let j = match opposite.as_slice() {
        [j] => *j,
        [] => {
            return Err(Error::Precondition(format!(
                "region {r} owns no cell on the opposite side"
            )))
        }
        _ => {
            return Err(Error::Precondition(format!(
                "region {r} owns several cells on the opposite side"
            )))
        }
    };

    let stolen = c.cell_mass(d, j);
    let mut bps: Vec<f64> = Vec::with_capacity(c.breakpoints().len());
    let mut cells: Vec<Option<RegionId>> = Vec::with_capacity(c.cell_count());

    // outermost left endpoint pushed outward by the stolen mass
    bps.push(d.inverse_cumulative(d.cumulative(c.breakpoints()[0]) - stolen));
    bps.extend_from_slice(&c.breakpoints()[1..=j]);
    cells.extend_from_slice(&c.cells()[..j]);

    // cells beyond the removed one slide inward as an adjacent chain
    let mut u = d.cumulative(c.breakpoints()[j]);
    for k in (j + 1)..c.cell_count() {
        let Some(rk) = c.cells()[k] else { continue };
        u += c.cell_mass(d, k);
        cells.push(Some(rk));
        bps.push(d.inverse_cumulative(u));
    }

    let after = Configuration::from_raw_normalized(bps, cells, c.n(), 0.0)?;
    Ok(MoveReport::new(
        d,
        MoveKind::MassStealOuter,
        c.clone(),
        after,
        true,
    ))
}

/// Cell indices of a region that has exactly two cells, in position order.
fn two_cells(c: &Configuration, r: RegionId) -> Result<(usize, usize)> {
    match c.region_cells(r).as_slice() {
        [a, b] => Ok((*a, *b)),
        cells => Err(Error::Precondition(format!(
            "region {r} has {} cells, expected exactly 2",
            cells.len()
        ))),
    }
}

/// Classifies the relative ordering of two two-interval regions.
pub fn detect_pattern(c: &Configuration, a: RegionId, b: RegionId) -> Result<PatternKind> {
    let (a_minus, a_plus) = two_cells(c, a)?;
    let (b_minus, b_plus) = two_cells(c, b)?;
    // rename so A- is leftmost
    let (a_plus, b_minus, b_plus) = if a_minus < b_minus {
        (a_plus, b_minus, b_plus)
    } else {
        (b_plus, a_minus, a_plus)
    };
    if a_plus < b_minus {
        Ok(PatternKind::Ordered)
    } else if a_plus < b_plus {
        Ok(PatternKind::Alternating)
    } else {
        Ok(PatternKind::Nested)
    }
}

/// Rebuilds cells `lo..=hi` against the stationary anchors `breakpoints[lo]`
/// and `breakpoints[hi+1]` with new per-cell masses. Zero-mass cells vanish.
/// The targets must sum to the corridor's original mass.
struct Corridor {
    lo: usize,
    hi: usize,
    targets: Vec<(Option<RegionId>, f64)>,
}

fn apply_corridors(
    d: Density,
    c: &Configuration,
    corridors: Vec<Corridor>,
) -> Result<Configuration> {
    let mut bps: Vec<f64> = vec![c.breakpoints()[0]];
    let mut cells: Vec<Option<RegionId>> = Vec::new();
    let mut k = 0;
    while k < c.cell_count() {
        if let Some(cor) = corridors.iter().find(|cor| cor.lo == k) {
            let anchor_right = c.breakpoints()[cor.hi + 1];
            let mut u = d.cumulative(c.breakpoints()[cor.lo]);
            let live: Vec<(Option<RegionId>, f64)> =
                cor.targets.iter().filter(|t| t.1 > 0.0).copied().collect();
            debug_assert!(!live.is_empty(), "corridor lost all its mass");
            for (idx, (region, m)) in live.iter().enumerate() {
                u += m;
                cells.push(*region);
                if idx + 1 == live.len() {
                    // land exactly on the stationary anchor; the running sum
                    // may be off by a few ulps of accumulated mass
                    debug_assert!(
                        (u - d.cumulative(anchor_right)).abs()
                            <= 1e-9 * (1.0 + d.cumulative(anchor_right).abs()),
                        "corridor mass mismatch"
                    );
                    bps.push(anchor_right);
                } else {
                    bps.push(d.inverse_cumulative(u));
                }
            }
            k = cor.hi + 1;
        } else {
            cells.push(c.cells()[k]);
            bps.push(c.breakpoints()[k + 1]);
            k += 1;
        }
    }
    Configuration::from_raw_normalized(bps, cells, c.n(), 0.0)
}

/// Cell indices A- B- A+ B+ of an alternating pair whose interior intervals
/// flank the origin. Flanking guarantees every moving endpoint of the
/// siphoning flow travels toward the origin; without it the flow can gain
/// perimeter.
pub(crate) fn alternating_indices(
    c: &Configuration,
    a: RegionId,
    b: RegionId,
) -> Result<(usize, usize, usize, usize)> {
    if detect_pattern(c, a, b)? != PatternKind::Alternating {
        return Err(Error::Precondition("regions are not alternating".into()));
    }
    let (fa, fb) = (two_cells(c, a)?, two_cells(c, b)?);
    // rename so A- is leftmost: cells p1 < p2 < p3 < p4 = A- B- A+ B+
    let (p1, p2, p3, p4) = if fa.0 < fb.0 {
        (fa.0, fb.0, fa.1, fb.1)
    } else {
        (fb.0, fa.0, fb.1, fa.1)
    };
    let b_minus_right = c.breakpoints()[p2 + 1];
    let a_plus_left = c.breakpoints()[p3];
    if b_minus_right > 0.0 || a_plus_left < 0.0 {
        return Err(Error::Precondition(
            "interior intervals of the alternating pair must flank the origin".into(),
        ));
    }
    Ok((p1, p2, p3, p4))
}

/// Eliminates one interior interval of an alternating pair by transferring
/// `min(mass(B-), mass(A+))` out of both interior intervals into the exterior
/// ones, every breakpoint between the moving fronts recomputed so that each
/// in-between region keeps its mass. Strictly decreases perimeter.
pub fn siphon_alternating(
    d: Density,
    c: &Configuration,
    a: RegionId,
    b: RegionId,
) -> Result<MoveReport> {
    let (p1, p2, p3, p4) = alternating_indices(c, a, b)?;

    let m_b_minus = c.cell_mass(d, p2);
    let m_a_plus = c.cell_mass(d, p3);
    let transfer = m_b_minus.min(m_a_plus);

    let corridor = |lo: usize, hi: usize, first_gain: f64, last_gain: f64| -> Corridor {
        // the m - min(m, m') subtraction is exactly zero when they tie
        let mut targets: Vec<(Option<RegionId>, f64)> = (lo..=hi)
            .map(|k| (c.cells()[k], c.cell_mass(d, k)))
            .collect();
        targets.first_mut().unwrap().1 += first_gain;
        targets.last_mut().unwrap().1 += last_gain;
        Corridor { lo, hi, targets }
    };
    // left corridor: A- gains, B- loses; right corridor: A+ loses, B+ gains
    let left = corridor(p1, p2, transfer, -transfer);
    let right = corridor(p3, p4, -transfer, transfer);

    let after = apply_corridors(d, c, vec![left, right])?;
    Ok(MoveReport::new(
        d,
        MoveKind::SiphonAlternating,
        c.clone(),
        after,
        true,
    ))
}

/// Indices (a_minus_cell, b_cell, a_plus_cell) of the nested-at-origin
/// topology: region `b` holds the origin in its interior (its two halves
/// B- = [-b, 0] and B+ = [0, c] form the one straddling cell) and region `a`
/// immediately surrounds it with cells [-a, -b] and [c, d].
pub(crate) fn nested_origin_indices(
    c: &Configuration,
    a: RegionId,
    b: RegionId,
) -> Result<(usize, usize)> {
    let OriginPosition::Interior(k) = c.origin_position() else {
        return Err(Error::Precondition(
            "origin is not interior to any cell".into(),
        ));
    };
    if c.cells()[k] != Some(b) {
        return Err(Error::Precondition(format!(
            "region {b} does not hold the origin"
        )));
    }
    if k == 0 || k + 1 >= c.cell_count() {
        return Err(Error::Precondition(format!(
            "region {b} is not surrounded on both sides"
        )));
    }
    if c.cells()[k - 1] != Some(a) || c.cells()[k + 1] != Some(a) {
        return Err(Error::Precondition(format!(
            "region {a} does not immediately surround region {b}"
        )));
    }
    Ok((k, k + 1))
}

/// For a pair nested directly around the origin (B = [-b,0] u [0,c] inside
/// A = [-a,-b] u [c,d]), slides the shared endpoints -b and c rightward until
/// either A+ or B- vanishes. Strictly decreases perimeter in both branches.
pub fn slide_nested_origin(
    d: Density,
    c: &Configuration,
    a: RegionId,
    b: RegionId,
) -> Result<MoveReport> {
    let (bk, ap) = nested_origin_indices(c, a, b)?;
    let m_b_minus = -d.cumulative(c.breakpoints()[bk]); // mass of [-b, 0]
    let m_a_plus = c.cell_mass(d, ap);
    let transfer = m_b_minus.min(m_a_plus);

    let mut bps = c.breakpoints().to_vec();
    // both shared endpoints sweep `transfer` of mass rightward; collisions
    // are written exactly so the vanished cell has length exactly zero
    bps[bk] = if transfer == m_b_minus {
        0.0
    } else {
        d.inverse_cumulative(d.cumulative(bps[bk]) + transfer)
    };
    bps[bk + 1] = if transfer == m_a_plus {
        bps[ap + 1]
    } else {
        d.inverse_cumulative(d.cumulative(bps[bk + 1]) + transfer)
    };
    let after = Configuration::from_raw_normalized(bps, c.cells().to_vec(), c.n(), 0.0)?;
    Ok(MoveReport::new(
        d,
        MoveKind::SlideNestedOrigin,
        c.clone(),
        after,
        true,
    ))
}

/// When the origin is interior to a cell, slides every breakpoint in the
/// perimeter-decreasing direction (right when the first-variation rate
/// `sum 1/x_i` is negative or zero, left otherwise) until the origin becomes
/// a breakpoint. Every cell keeps its mass exactly: the motion is a uniform
/// translation in mass coordinates.
pub fn slide_origin_to_endpoint(d: Density, c: &Configuration) -> Result<MoveReport> {
    let OriginPosition::Interior(k) = c.origin_position() else {
        return Err(Error::Precondition(
            "origin is not interior to any cell".into(),
        ));
    };
    let rate: f64 = c.breakpoints().iter().map(|&x| 1.0 / x).sum();
    let iv = c.cell_interval(k);
    // shift in mass coordinates: positive = rightward
    let shift = if rate <= 0.0 {
        -d.cumulative(iv.a) // drag right until the left part vanishes
    } else {
        -d.cumulative(iv.b) // drag left until the right part vanishes
    };
    let bps: Vec<f64> = c
        .breakpoints()
        .iter()
        .map(|&x| d.inverse_cumulative(d.cumulative(x) + shift))
        .collect();
    let after = Configuration::new(bps, c.cells().to_vec(), c.n())?;
    debug_assert!(matches!(
        after.origin_position(),
        OriginPosition::Breakpoint(_)
    ));
    Ok(MoveReport::new(
        d,
        MoveKind::SlideOriginToEndpoint,
        c.clone(),
        after,
        true,
    ))
}

/// Condensing is needed until no cell is empty, the origin is inside the
/// span, and every region holds at most one interval per side of the origin
/// (the spec's condensed predicate allows two same-side cells, but those
/// still consolidate).
fn needs_condense(c: &Configuration) -> bool {
    if !c.is_condensed() {
        return true;
    }
    for i in 0..c.n() {
        let cells = c.region_cells(RegionId(i));
        if let [a, b] = cells.as_slice() {
            let (ia, ib) = (c.cell_interval(*a), c.cell_interval(*b));
            let both_left = ia.b <= 0.0 && ib.b <= 0.0;
            let both_right = ia.a >= 0.0 && ib.a >= 0.0;
            if both_left || both_right {
                return true;
            }
        }
    }
    false
}

/// Whether [`mass_steal_outer`] applies on `side`.
pub fn mass_steal_applicable(d: Density, c: &Configuration, side: Side) -> bool {
    let _ = d;
    let outer = match side {
        Side::Left => 0,
        Side::Right => c.cell_count() - 1,
    };
    if !entirely_on(c, outer, side) {
        return false;
    }
    let Some(r) = c.cells()[outer] else {
        return false;
    };
    let opposite = match side {
        Side::Left => Side::Right,
        Side::Right => Side::Left,
    };
    c.region_cells(r)
        .into_iter()
        .filter(|&k| entirely_on(c, k, opposite))
        .count()
        == 1
}

/// Drives the full reduction strategy: condense, steal outer mass on each
/// side, drain alternating/nested patterns, and finally position the origin
/// at an endpoint. Returns the fixed point and every intermediate report.
pub fn reduce_to_candidate(
    d: Density,
    start: &Configuration,
) -> Result<(Configuration, Vec<MoveReport>)> {
    let mut reports = Vec::new();
    let mut current = start.clone();
    let max_passes = 4 * start.n() + 4;
    for _ in 0..max_passes {
        let mut acted = false;

        if needs_condense(&current) {
            let rep = condense(d, &current)?;
            if rep.after != current {
                current = rep.after.clone();
                reports.push(rep);
                acted = true;
            }
        }

        for _ in 0..2 * current.n() {
            let side = if mass_steal_applicable(d, &current, Side::Left) {
                Side::Left
            } else if mass_steal_applicable(d, &current, Side::Right) {
                Side::Right
            } else {
                break;
            };
            let rep = mass_steal_outer(d, &current, side)?;
            current = rep.after.clone();
            reports.push(rep);
            acted = true;
        }

        // drain alternating pairs and the origin-nested pair, one per scan
        'pairs: loop {
            let doubled: Vec<RegionId> = (0..current.n())
                .map(RegionId)
                .filter(|&r| current.region_cells(r).len() == 2)
                .collect();
            for (i, &ra) in doubled.iter().enumerate() {
                for &rb in &doubled[i + 1..] {
                    if let Ok(PatternKind::Alternating) = detect_pattern(&current, ra, rb) {
                        if let Ok(rep) = siphon_alternating(d, &current, ra, rb) {
                            current = rep.after.clone();
                            reports.push(rep);
                            acted = true;
                            continue 'pairs;
                        }
                    }
                }
            }
            if let OriginPosition::Interior(k) = current.origin_position() {
                if k >= 1
                    && k + 1 < current.cell_count()
                    && current.cells()[k - 1].is_some()
                    && current.cells()[k - 1] == current.cells()[k + 1]
                {
                    let a = current.cells()[k - 1].unwrap();
                    let b = current.cells()[k].unwrap();
                    if let Ok(rep) = slide_nested_origin(d, &current, a, b) {
                        current = rep.after.clone();
                        reports.push(rep);
                        acted = true;
                        continue 'pairs;
                    }
                }
            }
            break;
        }

        if matches!(current.origin_position(), OriginPosition::Interior(_)) {
            let rep = slide_origin_to_endpoint(d, &current)?;
            current = rep.after.clone();
            reports.push(rep);
            acted = true;
        }

        if !acted {
            break;
        }
    }
    Ok((current, reports))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::MASS_REL_TOL;

    const D: Density = Density::AbsoluteValue;

    fn r(i: usize) -> Option<RegionId> {
        Some(RegionId(i))
    }

    fn cfg(bps: Vec<f64>, cells: Vec<Option<RegionId>>, n: usize) -> Configuration {
        Configuration::new(bps, cells, n).unwrap()
    }

    fn assert_masses_preserved(rep: &MoveReport) {
        for i in 0..rep.before.n() {
            let before = rep.before.region_mass(D, RegionId(i));
            let after = rep.after.region_mass(D, RegionId(i));
            assert!(
                (after - before).abs() <= MASS_REL_TOL * before.max(1.0),
                "region {i}: {before} -> {after}"
            );
        }
    }

    #[test]
    fn condense_merges_split_region_over_gap() {
        // one region as [0,1] u [2,3]: total mass 3, single interval [0, sqrt(6)]
        let c = cfg(vec![0.0, 1.0, 2.0, 3.0], vec![r(0), None, r(0)], 1);
        assert_eq!(c.total_perimeter(D), 6.0);
        let rep = condense(D, &c).unwrap();
        assert_masses_preserved(&rep);
        assert_eq!(rep.after.cell_count(), 1);
        let want = 6.0f64.sqrt();
        assert!((rep.after.breakpoints()[1] - want).abs() < 1e-14);
        assert!((rep.perimeter_delta - (want - 6.0)).abs() < 1e-12);
    }

    #[test]
    fn condense_orders_by_outermost_endpoint() {
        // scattered cells of three regions on x >= 0; region with the k-th
        // largest rightmost endpoint lands k-th from the origin
        let c = cfg(
            vec![0.3, 0.55, 0.9, 1.45, 1.8, 2.15, 2.45, 3.0, 3.35],
            vec![r(2), None, r(0), None, r(1), None, r(1), r(2)],
            3,
        );
        let rep = condense(D, &c).unwrap();
        assert_masses_preserved(&rep);
        assert!(rep.perimeter_delta < 0.0);
        assert!(rep.after.is_condensed());
        // rightmost endpoints: R0 at 1.45, R1 at 3.0, R2 at 3.35
        assert_eq!(
            rep.after.cells(),
            &[r(0), r(1), r(2)],
            "origin-outward order follows original outermost endpoints"
        );
    }

    #[test]
    fn condense_is_idempotent_and_fixes_condensed_input() {
        let c = cfg(vec![-1.0, 0.0, 1.0, 2.0], vec![r(1), r(0), r(2)], 3);
        let rep = condense(D, &c).unwrap();
        assert!(rep.perimeter_delta.abs() <= 1e-12);
        let again = condense(D, &rep.after).unwrap();
        assert_eq!(again.after.cells(), rep.after.cells());
        for (x, y) in again
            .after
            .breakpoints()
            .iter()
            .zip(rep.after.breakpoints())
        {
            assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn transpose_moves_shared_endpoint_inward() {
        // R0 = [0.8, 1.8] (mass 1.3), R1 = [1.8, 2.3] (mass 1.025)
        let c = cfg(vec![0.8, 1.8, 2.3], vec![r(0), r(1)], 2);
        let rep = transpose_adjacent(D, &c, 1).unwrap();
        assert_masses_preserved(&rep);
        assert!(rep.strict);
        // new shared endpoint solves the prefix-mass equation:
        // sqrt(0.8^2 + 2 * 1.025) = sqrt(2.69)
        let want = 2.69f64.sqrt();
        assert!((rep.after.breakpoints()[1] - want).abs() < 1e-14);
        assert_eq!(rep.after.cells(), &[r(1), r(0)]);
        assert!(rep.perimeter_delta < 0.0);
        // only the shared breakpoint moved
        assert_eq!(rep.after.breakpoints()[0], 0.8);
        assert_eq!(rep.after.breakpoints()[2], 2.3);
    }

    #[test]
    fn transpose_equal_masses_is_degenerate() {
        // [0,1] and [1, sqrt(2)] both have mass 1/2
        let c = cfg(vec![0.0, 1.0, 2.0f64.sqrt()], vec![r(0), r(1)], 2);
        let rep = transpose_adjacent(D, &c, 1).unwrap();
        assert!(!rep.strict);
        assert_eq!(rep.perimeter_delta, 0.0);
        assert_eq!(rep.after.breakpoints()[1], 1.0);
    }

    #[test]
    fn transpose_mirrors_on_negative_side() {
        let c = cfg(vec![-2.3, -1.8, -0.8], vec![r(1), r(0)], 2);
        let rep = transpose_adjacent(D, &c, 1).unwrap();
        let want = -(2.69f64.sqrt());
        assert!((rep.after.breakpoints()[1] - want).abs() < 1e-14);
        assert_eq!(rep.after.cells(), &[r(0), r(1)]);
    }

    #[test]
    fn transpose_rejects_lighter_inner() {
        let c = cfg(vec![0.0, 1.0, 3.0], vec![r(0), r(1)], 2);
        assert!(transpose_adjacent(D, &c, 1).is_err());
        // cells on opposite sides of the origin
        let c = cfg(vec![-1.0, 0.0, 0.5], vec![r(0), r(1)], 2);
        assert!(transpose_adjacent(D, &c, 1).is_err());
    }

    #[test]
    fn mass_steal_matches_prefix_recomputation() {
        // left: A = [-2,-1] (1.5); right: A = [0,1] (0.5), B = [1,2] (1.5)
        let c = cfg(
            vec![-2.0, -1.0, 0.0, 1.0, 2.0],
            vec![r(0), None, r(0), r(1)],
            2,
        );
        assert_eq!(c.total_perimeter(D), 6.0);
        let rep = mass_steal_outer(D, &c, Side::Left).unwrap();
        assert_masses_preserved(&rep);
        assert!(rep.strict);
        // left A grows to mass 2: [-sqrt(5), -1]; B slides in: [0, sqrt(3)]
        let bp = rep.after.breakpoints();
        assert!((bp[0] + 5.0f64.sqrt()).abs() < 1e-14);
        assert!((bp[1] + 1.0).abs() < 1e-15);
        let want = 5.0f64.sqrt() + 1.0 + 3.0f64.sqrt();
        assert!((rep.after.total_perimeter(D) - want).abs() < 1e-13);
        assert!((rep.perimeter_delta - (want - 6.0)).abs() < 1e-13);
    }

    #[test]
    fn mass_steal_outermost_opposite_cell_leaves_rest_unchanged() {
        // stolen cell is outermost on its side: nothing outside it to slide
        let c = cfg(vec![-2.0, -1.0, 1.0, 2.0], vec![r(0), r(1), r(0)], 2);
        let rep = mass_steal_outer(D, &c, Side::Left).unwrap();
        assert_masses_preserved(&rep);
        let bp = rep.after.breakpoints();
        // inner breakpoints untouched
        assert_eq!(&bp[1..], &[-1.0, 1.0]);
        assert!((bp[0] + 7.0f64.sqrt()).abs() < 1e-14); // mass 1.5 + 1.5 -> F = -3.5
        assert_eq!(rep.after.cells(), &[r(0), r(1)]);
    }

    #[test]
    fn mass_steal_preconditions() {
        // outermost-left region entirely on the left: nothing to steal
        let c = cfg(vec![-1.0, 0.0, 1.0], vec![r(0), r(1)], 2);
        assert!(mass_steal_outer(D, &c, Side::Left).is_err());
        assert!(!mass_steal_applicable(D, &c, Side::Left));
        // straddling outermost cell
        let c = cfg(vec![-1.0, 1.0, 2.0], vec![r(0), r(1)], 2);
        assert!(mass_steal_outer(D, &c, Side::Left).is_err());
    }

    #[test]
    fn detect_pattern_classifies_three_orderings() {
        // alternating: A- B- A+ B+
        let alt = cfg(
            vec![-3.0, -2.0, -1.0, 0.0, 1.0, 2.0],
            vec![r(0), r(1), None, r(0), r(1)],
            2,
        );
        assert_eq!(
            detect_pattern(&alt, RegionId(0), RegionId(1)).unwrap(),
            PatternKind::Alternating
        );
        // argument order must not matter
        assert_eq!(
            detect_pattern(&alt, RegionId(1), RegionId(0)).unwrap(),
            PatternKind::Alternating
        );

        // nested: A- B- B+ A+ (B's cells on both sides but apart from 0)
        let nested = cfg(
            vec![-2.0, -1.0, -0.5, 0.5, 1.0, 2.0],
            vec![r(0), r(1), None, r(1), r(0)],
            2,
        );
        assert_eq!(
            detect_pattern(&nested, RegionId(0), RegionId(1)).unwrap(),
            PatternKind::Nested
        );

        // ordered: A- A+ B- B+
        let ordered = cfg(
            vec![-3.0, -2.0, -1.5, -1.0, 0.0, 1.0, 2.0, 3.0],
            vec![r(0), None, r(0), None, r(1), None, r(1)],
            2,
        );
        assert_eq!(
            detect_pattern(&ordered, RegionId(0), RegionId(1)).unwrap(),
            PatternKind::Ordered
        );

        let single = cfg(vec![0.0, 1.0, 2.0], vec![r(0), r(1)], 2);
        assert!(detect_pattern(&single, RegionId(0), RegionId(1)).is_err());
    }

    /// Alternating setup shaped like the siphoning figure: interior
    /// intervals flank the origin, other regions fill the corridors.
    fn siphon_fixture() -> Configuration {
        cfg(
            vec![-3.0, -2.0, -0.75, 0.0, 0.95, 1.65, 3.1, 3.6],
            vec![r(0), r(1), r(2), r(0), r(2), r(3), r(1)],
            4,
        )
    }

    #[test]
    fn siphon_eliminates_smaller_interior_interval() {
        let c = siphon_fixture();
        // mass(A+) = 0.95^2/2 = 0.45125 < mass(B-) = 1.71875: A+ vanishes
        let rep = siphon_alternating(D, &c, RegionId(0), RegionId(1)).unwrap();
        assert_masses_preserved(&rep);
        assert!(rep.strict);
        assert!(rep.perimeter_delta < 0.0);
        assert_eq!(rep.after.region_cells(RegionId(0)).len(), 1);
        assert_eq!(rep.after.region_cells(RegionId(1)).len(), 2);
        // frozen endpoints from the prefix oracle:
        // F(-b') = F(-3) + (2.5 + 0.45125)  =>  -sqrt(3.0975)
        // right corridor chain from 0: sqrt(2*0.91), then sqrt(2*4.35375);
        // the two pieces of region 2 meet at 0 and merge
        let bp = rep.after.breakpoints();
        assert!((bp[1] + 3.0975f64.sqrt()).abs() < 1e-13, "got {}", bp[1]);
        assert!((bp[3] - 1.82f64.sqrt()).abs() < 1e-13);
        assert!((bp[4] - 8.7075f64.sqrt()).abs() < 1e-13);
        assert_eq!(bp[5], 3.6);
        // adjacent same-region corridor cells merged
        assert_eq!(rep.after.cells(), &[r(0), r(1), r(2), r(3), r(1)]);
        // pattern gone: region 0 no longer has two cells
        assert!(detect_pattern(&rep.after, RegionId(0), RegionId(1)).is_err());
    }

    #[test]
    fn siphon_tie_drains_both_interior_intervals() {
        // mass(B-) = mass([-1,0]) = 0.5 equals mass(A+) = mass([0,1])
        let c = cfg(
            vec![-2.0, -1.0, 0.0, 1.0, 2.0, 3.0],
            vec![r(0), r(1), r(0), None, r(1)],
            2,
        );
        let rep = siphon_alternating(D, &c, RegionId(0), RegionId(1)).unwrap();
        assert_masses_preserved(&rep);
        assert_eq!(rep.after.region_cells(RegionId(0)).len(), 1);
        assert_eq!(rep.after.region_cells(RegionId(1)).len(), 1);
        assert!(rep.perimeter_delta < 0.0);
    }

    #[test]
    fn siphon_rejects_non_flanking_pattern() {
        // alternating but entirely on the positive side
        let c = cfg(
            vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0],
            vec![r(2), r(0), r(1), r(0), r(1)],
            3,
        );
        assert!(siphon_alternating(D, &c, RegionId(0), RegionId(1)).is_err());
    }

    #[test]
    fn slide_nested_branch_a_plus_vanishes() {
        // B = [-1, 1.0] straddles the origin, A = [-2,-1] u [1, 1.2]
        let c = cfg(vec![-2.0, -1.0, 1.0, 1.2], vec![r(0), r(1), r(0)], 2);
        // mass(A+) = 0.22 < mass(B-) = 0.5
        let rep = slide_nested_origin(D, &c, RegionId(0), RegionId(1)).unwrap();
        assert_masses_preserved(&rep);
        assert!(rep.strict);
        assert!(rep.perimeter_delta < 0.0);
        // b' = sqrt(2 * (0.5 - 0.22)) = sqrt(0.56); A+ collides with d
        let bp = rep.after.breakpoints();
        assert_eq!(rep.after.cells(), &[r(0), r(1)]);
        assert!((bp[1] + 0.56f64.sqrt()).abs() < 1e-14);
        assert_eq!(bp[2], 1.2);
    }

    #[test]
    fn slide_nested_branch_b_minus_vanishes() {
        let c = cfg(vec![-2.0, -1.0, 1.0, 2.0], vec![r(0), r(1), r(0)], 2);
        // mass(A+) = 1.5 > mass(B-) = 0.5: B's left half collides with 0
        let rep = slide_nested_origin(D, &c, RegionId(0), RegionId(1)).unwrap();
        assert_masses_preserved(&rep);
        let bp = rep.after.breakpoints();
        // endpoints {-2, 0, sqrt(2), 2}
        assert_eq!(rep.after.cells(), &[r(0), r(1), r(0)]);
        assert_eq!(bp[1], 0.0);
        assert!((bp[2] - 2.0f64.sqrt()).abs() < 1e-14);
        assert!(rep.perimeter_delta < 0.0);
    }

    #[test]
    fn slide_nested_tie_collides_both() {
        let c = cfg(
            vec![-2.0, -1.0, 1.0, 2.0f64.sqrt()],
            vec![r(0), r(1), r(0)],
            2,
        );
        // mass(A+) = mass(B-) = 0.5
        let rep = slide_nested_origin(D, &c, RegionId(0), RegionId(1)).unwrap();
        assert_masses_preserved(&rep);
        assert_eq!(rep.after.cells(), &[r(0), r(1)]);
        assert_eq!(rep.after.breakpoints()[1], 0.0);
    }

    #[test]
    fn slide_nested_rejects_wrong_topology() {
        let c = cfg(vec![-2.0, -1.0, 1.0, 2.0], vec![r(0), r(1), r(0)], 2);
        // roles swapped: region 1 does not surround region 0
        assert!(slide_nested_origin(D, &c, RegionId(1), RegionId(0)).is_err());
        // origin at a breakpoint: no straddling cell
        let c = cfg(vec![-1.0, 0.0, 1.0], vec![r(0), r(1)], 2);
        assert!(slide_nested_origin(D, &c, RegionId(0), RegionId(1)).is_err());
    }

    #[test]
    fn slide_origin_drags_left_when_rate_positive() {
        // rate = -1/2 - 1/1 + 1/1 + 1/1.5 > 0? -0.5 - 1 + 1 + 0.667 = 0.167 > 0
        let c = cfg(vec![-2.0, -1.0, 1.0, 1.5], vec![r(1), r(0), r(2)], 3);
        let rep = slide_origin_to_endpoint(D, &c).unwrap();
        assert_masses_preserved(&rep);
        assert!(rep.strict);
        assert!(rep.perimeter_delta < 0.0);
        let bp = rep.after.breakpoints();
        // mass shift = F(1) = 0.5 leftward:
        // F(-2)-0.5 = -2.5, F(-1)-0.5 = -1, F(1)-0.5 = 0, F(1.5)-0.5 = 0.625
        assert!((bp[0] + 5.0f64.sqrt()).abs() < 1e-14);
        assert!((bp[1] + 2.0f64.sqrt()).abs() < 1e-14);
        assert_eq!(bp[2], 0.0);
        assert!((bp[3] - 1.25f64.sqrt()).abs() < 1e-14);
        assert!(matches!(
            rep.after.origin_position(),
            OriginPosition::Breakpoint(_)
        ));
    }

    #[test]
    fn slide_origin_drags_right_when_rate_negative() {
        let c = cfg(vec![-1.5, -1.0, 1.0, 2.0], vec![r(2), r(0), r(1)], 3);
        // rate = -1/1.5 - 1 + 1 + 1/2 = -0.167 < 0: drag right, A- vanishes
        let rep = slide_origin_to_endpoint(D, &c).unwrap();
        assert_masses_preserved(&rep);
        assert!(rep.perimeter_delta < 0.0);
        assert_eq!(rep.after.breakpoints()[1], 0.0);
    }

    #[test]
    fn slide_origin_requires_interior_origin() {
        let c = cfg(vec![-1.0, 0.0, 1.0], vec![r(0), r(1)], 2);
        assert!(slide_origin_to_endpoint(D, &c).is_err());
    }

    #[test]
    fn reduce_reaches_small_cell_count_with_monotone_perimeter() {
        // messy 3-region start: gaps, split regions, off-origin cells
        let c = cfg(
            vec![-4.0, -3.5, -2.0, -1.0, 0.5, 1.0, 2.0, 2.5, 3.0],
            vec![r(2), None, r(0), None, r(1), r(0), None, r(2)],
            3,
        );
        let (fixed, reports) = reduce_to_candidate(D, &c).unwrap();
        assert!(
            fixed.cell_count() <= 2 * 3 - 2,
            "{} cells",
            fixed.cell_count()
        );
        let mut p = c.total_perimeter(D);
        for rep in &reports {
            assert!(rep.perimeter_delta <= 1e-12 * p.max(1.0), "{:?}", rep.kind);
            let q = rep.after.total_perimeter(D);
            assert!(q <= p + 1e-12 * p.max(1.0));
            p = q;
        }
        for i in 0..3 {
            let before = c.region_mass(D, RegionId(i));
            let after = fixed.region_mass(D, RegionId(i));
            assert!((after - before).abs() <= 1e-12 * before.max(1.0));
        }
    }
}
