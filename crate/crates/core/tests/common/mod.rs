//! Generators shared by the integration and acceptance suites.
//!
//! Configurations are built in mass coordinates: cell masses are drawn first
//! and breakpoints come from the inverse antiderivative, so every generated
//! configuration is valid by construction.
#![allow(dead_code)] // each test binary uses its own subset

use nbubble::moves::Side;
use nbubble::{Configuration, Density, OriginPosition, RegionId};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const D: Density = Density::AbsoluteValue;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Builds a configuration from a list of (label, mass) entries, axis order.
/// The origin sits `inside` mass units into entry `boundary` (0 puts it
/// exactly at that entry's left breakpoint), so generators can place it
/// bit-exactly on a breakpoint.
pub fn config_from_entries(
    entries: &[(Option<usize>, f64)],
    boundary: usize,
    inside: f64,
    n: usize,
) -> Configuration {
    let len = entries.len();
    assert!(boundary <= len);
    let mut u = vec![0.0; len + 1];
    for j in boundary..len {
        u[j + 1] = u[j] + entries[j].1;
    }
    for j in (0..boundary).rev() {
        u[j] = u[j + 1] - entries[j].1;
    }
    let bps: Vec<f64> = u
        .iter()
        .map(|&v| D.inverse_cumulative(v - inside))
        .collect();
    let cells: Vec<Option<RegionId>> = entries.iter().map(|e| e.0.map(RegionId)).collect();
    Configuration::new(bps, cells, n).expect("generator produces valid configurations")
}

/// Merges adjacent same-label runs and trims edge gaps so the entry list is
/// valid input for [`config_from_entries`].
pub fn tidy_entries(entries: &mut Vec<(Option<usize>, f64)>) {
    entries.dedup_by(|b, a| {
        if a.0 == b.0 {
            a.1 += b.1;
            true
        } else {
            false
        }
    });
    while entries.first().is_some_and(|e| e.0.is_none()) {
        entries.remove(0);
    }
    while entries.last().is_some_and(|e| e.0.is_none()) {
        entries.pop();
    }
}

/// A random valid configuration: every region owns one or two cells, gaps
/// appear with some probability, and the origin lands anywhere in the span
/// (on a breakpoint or strictly inside a cell).
pub fn random_config(rng: &mut ChaCha8Rng, n: usize) -> Configuration {
    let mut entries: Vec<(Option<usize>, f64)> = Vec::new();
    for i in 0..n {
        let cells = if rng.random_bool(0.5) { 2 } else { 1 };
        for _ in 0..cells {
            entries.push((Some(i), rng.random_range(0.1..4.0)));
        }
    }
    let gaps = rng.random_range(0..=n / 2);
    for _ in 0..gaps {
        entries.push((None, rng.random_range(0.05..1.0)));
    }
    entries.shuffle(rng);
    tidy_entries(&mut entries);
    if rng.random_bool(0.3) {
        // origin exactly on a breakpoint
        let boundary = rng.random_range(0..=entries.len());
        config_from_entries(&entries, boundary, 0.0, n)
    } else {
        let boundary = rng.random_range(0..entries.len());
        let inside = entries[boundary].1 * rng.random_range(0.05..0.95);
        config_from_entries(&entries, boundary, inside, n)
    }
}

/// A random configuration whose origin is interior to some cell.
pub fn random_config_origin_interior(rng: &mut ChaCha8Rng, n: usize) -> Configuration {
    loop {
        let c = random_config(rng, n);
        if matches!(c.origin_position(), OriginPosition::Interior(_)) {
            return c;
        }
    }
}

/// An alternating pair (regions 0 and 1) whose interior intervals flank the
/// origin, padded with single-interval regions in the corridors.
pub fn siphon_setup(rng: &mut ChaCha8Rng, extras: usize) -> (Configuration, RegionId, RegionId) {
    let n = 2 + extras;
    let mass = |rng: &mut ChaCha8Rng| rng.random_range(0.2..3.0);
    // left side, origin outward: mids, B-, mids, A- outermost
    // right side, origin outward: mids, A+, mids, B+ outermost-ish
    let mut left: Vec<(Option<usize>, f64)> = vec![(Some(0), mass(rng))]; // A- outermost
    let mut right: Vec<(Option<usize>, f64)> = Vec::new();
    let mut pool: Vec<usize> = (2..n).collect();
    pool.shuffle(rng);
    let mut pool = pool.into_iter();
    // optionally one mid between A- and B-
    if extras > 0 && rng.random_bool(0.4) {
        if let Some(r) = pool.next() {
            left.push((Some(r), mass(rng)));
        }
    }
    left.push((Some(1), mass(rng))); // B-
                                     // remaining mids sit between B- and A+ (left-inner, right-inner) or
                                     // between A+ and B+
    let mut left_inner: Vec<(Option<usize>, f64)> = Vec::new();
    let mut right_inner: Vec<(Option<usize>, f64)> = Vec::new();
    let mut between: Vec<(Option<usize>, f64)> = Vec::new();
    for r in pool {
        match rng.random_range(0..3) {
            0 => left_inner.push((Some(r), mass(rng))),
            1 => right_inner.push((Some(r), mass(rng))),
            _ => between.push((Some(r), mass(rng))),
        }
    }
    left.extend(left_inner);
    right.extend(right_inner);
    right.push((Some(0), mass(rng))); // A+
    right.extend(between);
    right.push((Some(1), mass(rng))); // B+

    // `left` is outermost-first, which is already axis order; `right` is
    // origin-outward, also axis order
    let mut entries: Vec<(Option<usize>, f64)> = left.clone();
    entries.extend(right.iter().cloned());
    let c = config_from_entries(&entries, left.len(), 0.0, n);
    (c, RegionId(0), RegionId(1))
}

/// A nested-at-origin pair: region `b` straddles the origin, region `a`
/// immediately surrounds it, extras fill the outside.
pub fn nested_setup(rng: &mut ChaCha8Rng, extras: usize) -> (Configuration, RegionId, RegionId) {
    let n = 2 + extras;
    let mass = |rng: &mut ChaCha8Rng| rng.random_range(0.2..3.0);
    let mut entries: Vec<(Option<usize>, f64)> = Vec::new();
    let mut outer_left: Vec<(Option<usize>, f64)> = Vec::new();
    let mut outer_right: Vec<(Option<usize>, f64)> = Vec::new();
    for r in 2..n {
        if rng.random_bool(0.5) {
            outer_left.push((Some(r), mass(rng)));
        } else {
            outer_right.push((Some(r), mass(rng)));
        }
    }
    entries.extend(outer_left.iter().cloned());
    entries.push((Some(0), mass(rng))); // A-
    let b_index = entries.len();
    let b_mass = mass(rng);
    entries.push((Some(1), b_mass)); // B straddling
    entries.push((Some(0), mass(rng))); // A+
    entries.extend(outer_right.iter().cloned());
    // origin strictly inside B
    let inside = b_mass * rng.random_range(0.05..0.95);
    let c = config_from_entries(&entries, b_index, inside, n);
    (c, RegionId(0), RegionId(1))
}

/// A configuration where mass stealing applies on the given side: region 0
/// owns the outermost cell there plus one cell on the opposite side.
pub fn steal_setup(rng: &mut ChaCha8Rng, n: usize) -> (Configuration, Side) {
    let mass = |rng: &mut ChaCha8Rng| rng.random_range(0.2..3.0);
    // left origin-outward: singles then region 0 outermost
    let mut left: Vec<(Option<usize>, f64)> = Vec::new();
    let mut right: Vec<(Option<usize>, f64)> = Vec::new();
    for r in 1..n {
        if rng.random_bool(0.5) {
            left.push((Some(r), mass(rng)));
        } else {
            right.push((Some(r), mass(rng)));
        }
    }
    left.push((Some(0), mass(rng))); // outermost left
                                     // keep the opposite cell away from the origin when region 0 would
                                     // otherwise touch it from both sides and merge
    let lo = if left.len() == 1 { 1 } else { 0 };
    let pos = rng.random_range(lo..=right.len());
    right.insert(pos, (Some(0), mass(rng)));
    let mut entries: Vec<(Option<usize>, f64)> = left.iter().rev().cloned().collect();
    entries.extend(right.iter().cloned());
    let c = config_from_entries(&entries, left.len(), 0.0, n);
    (c, Side::Left)
}

/// A same-side adjacent pair whose inner cell is strictly heavier (by a
/// macroscopic margin, so the strict-decrease claim applies), plus random
/// company; returns the shared breakpoint index.
pub fn transpose_setup_nondegenerate(rng: &mut ChaCha8Rng, n: usize) -> (Configuration, usize) {
    loop {
        let c = random_config(rng, n);
        let bps = c.breakpoints();
        let mut candidates = Vec::new();
        for k in 1..bps.len() - 1 {
            let same_side = bps[k - 1] >= 0.0 || bps[k + 1] <= 0.0;
            let (Some(a), Some(b)) = (c.cells()[k - 1], c.cells()[k]) else {
                continue;
            };
            if !same_side || a == b {
                continue;
            }
            // the swap must not create same-region contact with a neighbor
            if (k >= 2 && c.cells()[k - 2] == c.cells()[k])
                || (k + 1 < c.cell_count() && c.cells()[k + 1] == c.cells()[k - 1])
            {
                continue;
            }
            let (inner, outer) = if bps[k - 1] >= 0.0 {
                (k - 1, k)
            } else {
                (k, k - 1)
            };
            if c.cell_mass(D, inner) > c.cell_mass(D, outer) * (1.0 + 1e-3) {
                candidates.push(k);
            }
        }
        if let Some(&k) = candidates.choose(rng) {
            return (c, k);
        }
    }
}

/// Random sorted masses as the oracle draws them.
pub fn sorted_masses(rng: &mut ChaCha8Rng, n: usize) -> nbubble::MassVector {
    nbubble::oracle::random_sorted_masses(rng, n)
}

/// Same nonzero mass sequences per side, directly or reflected.
pub fn layouts_match(
    a: &nbubble::Layout,
    b: &nbubble::Layout,
    masses: &nbubble::MassVector,
) -> bool {
    let seq = |side: &[RegionId]| -> Vec<f64> {
        side.iter()
            .map(|&r| masses.get(r))
            .filter(|&m| m > 0.0)
            .collect()
    };
    let (al, ar) = (seq(&a.left), seq(&a.right));
    let (bl, br) = (seq(&b.left), seq(&b.right));
    (al == bl && ar == br) || (al == br && ar == bl)
}
