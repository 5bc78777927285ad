//! First-variation rates and the endpoint flow integrator.
//!
//! Dragging an endpoint at speed 1/f(x) sweeps mass at unit rate, so a set of
//! endpoints moving this way conserves every region's mass whenever each
//! region's inflow matches its outflow. Under density |x| the perimeter then
//! changes at rate `sum dir_i / x_i` and accelerates at `sum -1/|x_i|^3`.
//!
//! The integrator exists to cross-validate the closed-form end states in
//! [`crate::moves`]; those closed forms stay authoritative.

use crate::config::{Configuration, OriginPosition, RegionId};
use crate::density::Density;
use crate::error::{Error, Result};
use crate::moves::alternating_indices;
use crate::VANISH_LEN;

/// Termination condition for a flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    /// A cell shorter than this counts as vanished and stops the flow.
    pub min_gap: f64,
    /// Upper time bound; `f64::INFINITY` runs until a gap vanishes.
    pub max_time: f64,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule {
            min_gap: VANISH_LEN,
            max_time: f64::INFINITY,
        }
    }
}

/// A set of breakpoints to drag at speed 1/|x|, with a sign each.
#[derive(Debug, Clone)]
pub struct FlowSpec {
    pub config: Configuration,
    /// Breakpoint indices, strictly increasing.
    pub moving: Vec<usize>,
    /// +1.0 (right) or -1.0 (left) per moving breakpoint.
    pub directions: Vec<f64>,
    pub stop: StopRule,
}

/// Why the integration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowTermination {
    GapVanished,
    MaxTime,
    /// A breakpoint got pinned (step size underflowed); the trace is partial.
    StepUnderflow,
}

/// Time series of a flow: breakpoints, perimeter, and region masses per
/// accepted step.
#[derive(Debug, Clone)]
pub struct FlowTrace {
    pub times: Vec<f64>,
    pub breakpoint_snapshots: Vec<Vec<f64>>,
    pub perimeters: Vec<f64>,
    pub region_masses: Vec<Vec<f64>>,
    pub termination: FlowTermination,
}

impl FlowTrace {
    pub fn final_breakpoints(&self) -> &[f64] {
        self.breakpoint_snapshots
            .last()
            .expect("trace is never empty")
    }

    /// CSV with header `t,perimeter,x_0,...,x_m,mass_0,...,mass_{n-1}` and
    /// one row per accepted step, 17 significant digits.
    pub fn to_csv(&self, n: usize) -> String {
        let m = self.breakpoint_snapshots[0].len();
        let mut out = String::from("t,perimeter");
        for i in 0..m {
            out.push_str(&format!(",x_{i}"));
        }
        for r in 0..n {
            out.push_str(&format!(",mass_{r}"));
        }
        out.push('\n');
        for row in 0..self.times.len() {
            out.push_str(&crate::json::fmt_f64(self.times[row]));
            out.push(',');
            out.push_str(&crate::json::fmt_f64(self.perimeters[row]));
            for x in &self.breakpoint_snapshots[row] {
                out.push(',');
                out.push_str(&crate::json::fmt_f64(*x));
            }
            for mass in &self.region_masses[row] {
                out.push(',');
                out.push_str(&crate::json::fmt_f64(*mass));
            }
            out.push('\n');
        }
        out
    }
}

impl FlowSpec {
    pub fn new(
        config: Configuration,
        moving: Vec<usize>,
        directions: Vec<f64>,
        stop: StopRule,
    ) -> Result<FlowSpec> {
        let spec = FlowSpec {
            config,
            moving,
            directions,
            stop,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        let m = self.config.breakpoints().len();
        if self.moving.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidFlow(
                "moving indices must be strictly increasing".into(),
            ));
        }
        if self.moving.iter().any(|&i| i >= m) {
            return Err(Error::InvalidFlow("moving index out of range".into()));
        }
        if self.directions.len() != self.moving.len() {
            return Err(Error::InvalidFlow(
                "one direction per moving breakpoint".into(),
            ));
        }
        if self.directions.iter().any(|&s| s != 1.0 && s != -1.0) {
            return Err(Error::InvalidFlow("directions must be +1 or -1".into()));
        }
        for &i in &self.moving {
            if self.config.breakpoints()[i] == 0.0 {
                return Err(Error::InvalidFlow(format!(
                    "moving breakpoint {i} sits at the origin"
                )));
            }
        }
        // mass conservation: for each region, inflow rate equals outflow rate
        let dir_of = |i: usize| -> f64 {
            match self.moving.binary_search(&i) {
                Ok(pos) => self.directions[pos],
                Err(_) => 0.0,
            }
        };
        let mut rates = vec![0.0f64; self.config.n()];
        for (k, cell) in self.config.cells().iter().enumerate() {
            if let Some(r) = cell {
                rates[r.0] += dir_of(k + 1) - dir_of(k);
            }
        }
        if let Some(r) = rates.iter().position(|&v| v != 0.0) {
            return Err(Error::InvalidFlow(format!(
                "directions do not conserve the mass of region R{r}"
            )));
        }
        if self.stop.min_gap.is_nan() || self.stop.min_gap <= 0.0 || self.stop.max_time < 0.0 {
            return Err(Error::InvalidFlow("bad stop rule".into()));
        }
        Ok(())
    }

    /// The flow matching [`crate::moves::siphon_alternating`]: both corridor
    /// fronts of the alternating pair move toward the origin.
    pub fn for_siphon(c: &Configuration, a: RegionId, b: RegionId) -> Result<FlowSpec> {
        let (p1, p2, p3, p4) = alternating_indices(c, a, b)?;
        let mut moving = Vec::new();
        let mut directions = Vec::new();
        for i in (p1 + 1)..=p2 {
            moving.push(i);
            directions.push(1.0);
        }
        for i in (p3 + 1)..=p4 {
            moving.push(i);
            directions.push(-1.0);
        }
        FlowSpec::new(c.clone(), moving, directions, StopRule::default())
    }

    /// The flow matching [`crate::moves::slide_nested_origin`]: the two
    /// endpoints the nested pair shares move right.
    pub fn for_nested_slide(c: &Configuration, a: RegionId, b: RegionId) -> Result<FlowSpec> {
        let (bk, _) = crate::moves::nested_origin_indices(c, a, b)?;
        FlowSpec::new(
            c.clone(),
            vec![bk, bk + 1],
            vec![1.0, 1.0],
            StopRule::default(),
        )
    }

    /// The flow matching [`crate::moves::slide_origin_to_endpoint`]: every
    /// breakpoint moves in the perimeter-decreasing direction.
    pub fn for_origin_slide(c: &Configuration) -> Result<FlowSpec> {
        let OriginPosition::Interior(_) = c.origin_position() else {
            return Err(Error::Precondition(
                "origin is not interior to any cell".into(),
            ));
        };
        let m = c.breakpoints().len();
        let rate: f64 = c.breakpoints().iter().map(|&x| 1.0 / x).sum();
        let dir = if rate <= 0.0 { 1.0 } else { -1.0 };
        FlowSpec::new(
            c.clone(),
            (0..m).collect(),
            vec![dir; m],
            StopRule::default(),
        )
    }
}

/// Rate of perimeter change when the given breakpoints are dragged right at
/// speed 1/|x|: `sum 1/x_i`, signed by position.
pub fn first_variation_rate(c: &Configuration, moving: &[usize]) -> Result<f64> {
    rate_impl(c, moving, None)
}

/// Rate of perimeter change under per-breakpoint directions: `sum dir_i/x_i`.
pub fn signed_rate(c: &Configuration, moving: &[usize], directions: &[f64]) -> Result<f64> {
    rate_impl(c, moving, Some(directions))
}

fn rate_impl(c: &Configuration, moving: &[usize], directions: Option<&[f64]>) -> Result<f64> {
    let mut sum = 0.0;
    for (pos, &i) in moving.iter().enumerate() {
        let x = *c
            .breakpoints()
            .get(i)
            .ok_or_else(|| Error::InvalidFlow(format!("breakpoint index {i} out of range")))?;
        if x == 0.0 {
            return Err(Error::InvalidFlow(format!(
                "moving breakpoint {i} sits at the origin"
            )));
        }
        let dir = directions.map_or(1.0, |d| d[pos]);
        sum += dir / x;
    }
    Ok(sum)
}

/// Second derivative of perimeter along the flow: `sum -1/|x_i|^3`.
/// Strictly negative whenever the moving set is nonempty.
pub fn second_variation_rate(c: &Configuration, moving: &[usize]) -> Result<f64> {
    let mut sum = 0.0;
    for &i in moving {
        let x = *c
            .breakpoints()
            .get(i)
            .ok_or_else(|| Error::InvalidFlow(format!("breakpoint index {i} out of range")))?;
        if x == 0.0 {
            return Err(Error::InvalidFlow(format!(
                "moving breakpoint {i} sits at the origin"
            )));
        }
        sum -= 1.0 / (x.abs().powi(3));
    }
    Ok(sum)
}

/// Classical RK4 on `x_i' = dir_i / |x_i|` with the step capped so no
/// breakpoint crosses a neighbor or the origin within one step. Records one
/// trace row per accepted step and terminates at the stop event.
pub fn integrate_flow(d: Density, spec: &FlowSpec, dt_max: f64) -> Result<FlowTrace> {
    spec.validate()?;
    if dt_max.is_nan() || dt_max <= 0.0 {
        return Err(Error::InvalidFlow(format!(
            "dt_max must be positive, got {dt_max}"
        )));
    }
    let c = &spec.config;
    let mut x = c.breakpoints().to_vec();
    let dir_of = |i: usize| -> f64 {
        match spec.moving.binary_search(&i) {
            Ok(pos) => spec.directions[pos],
            Err(_) => 0.0,
        }
    };

    let mut trace = FlowTrace {
        times: Vec::new(),
        breakpoint_snapshots: Vec::new(),
        perimeters: Vec::new(),
        region_masses: Vec::new(),
        termination: FlowTermination::MaxTime,
    };
    let record = |trace: &mut FlowTrace, t: f64, x: &[f64]| {
        trace.times.push(t);
        trace.breakpoint_snapshots.push(x.to_vec());
        trace.perimeters.push(perimeter_of(d, c, x));
        trace.region_masses.push(masses_of(d, c, x));
    };

    let mut t = 0.0;
    record(&mut trace, t, &x);
    if spec.moving.is_empty() {
        return Ok(trace);
    }
    if gap_vanished(c, &x, spec.stop.min_gap) || origin_reached(&x, &spec.moving, spec.stop.min_gap)
    {
        trace.termination = FlowTermination::GapVanished;
        return Ok(trace);
    }

    let velocities = |x: &[f64]| -> Vec<f64> {
        spec.moving
            .iter()
            .map(|&i| dir_of(i) / x[i].abs())
            .collect()
    };

    loop {
        // adaptive cap: shrink-time of the closing gaps and origin distance
        let v = velocities(&x);
        let vel = |w: usize| -> f64 {
            let dir = dir_of(w);
            if dir == 0.0 {
                0.0
            } else {
                dir / x[w].abs()
            }
        };
        let mut dt = dt_max;
        for w in 0..x.len() - 1 {
            let dv = vel(w + 1) - vel(w);
            if dv < 0.0 {
                dt = dt.min(0.25 * (x[w + 1] - x[w]) / (-dv));
            }
        }
        let x_min = spec
            .moving
            .iter()
            .map(|&i| x[i].abs())
            .fold(f64::INFINITY, f64::min);
        dt = dt.min(0.5 * x_min * x_min);
        // accuracy cap: the fifth derivative of sqrt(x0^2 +- 2t) grows like
        // |x|^-9, so a step of 1e-3 * x^(9/5) keeps the local truncation
        // error near machine precision all the way down
        dt = dt.min(1e-3 * x_min.powf(1.8));
        let mut clamped = false;
        if t + dt >= spec.stop.max_time {
            dt = spec.stop.max_time - t;
            clamped = true;
        }

        // retry with halved steps if the proposal breaks ordering or signs
        let mut accepted: Option<Vec<f64>> = None;
        for _ in 0..64 {
            if dt <= f64::EPSILON * t.max(1.0) * 1e-3 {
                break;
            }
            let proposal = rk4_step(&x, &v, dt, &spec.moving, &dir_of);
            if let Some(p) = proposal {
                if step_is_sane(&x, &p, &spec.moving) {
                    accepted = Some(p);
                    break;
                }
            }
            dt *= 0.5;
            clamped = false;
        }
        let Some(next) = accepted else {
            trace.termination = FlowTermination::StepUnderflow;
            return Ok(trace);
        };

        x = next;
        t += dt;
        record(&mut trace, t, &x);

        if gap_vanished(c, &x, spec.stop.min_gap)
            || origin_reached(&x, &spec.moving, spec.stop.min_gap)
        {
            trace.termination = FlowTermination::GapVanished;
            return Ok(trace);
        }
        if clamped || t >= spec.stop.max_time {
            trace.termination = FlowTermination::MaxTime;
            return Ok(trace);
        }
    }
}

/// A moving breakpoint within `min_gap` of the origin means the half-interval
/// it bounds there has vanished.
fn origin_reached(x: &[f64], moving: &[usize], min_gap: f64) -> bool {
    moving.iter().any(|&i| x[i].abs() < min_gap)
}

/// Structurally collapses cells shorter than `tol` in a flow end state. The
/// raw trace keeps a vanishing cell as two nearly equal breakpoints whose
/// endpoint weights both still count; collapsing identifies them, which is
/// the configuration the closed-form moves produce.
pub fn collapsed_state(
    _d: Density,
    c: &Configuration,
    x: &[f64],
    tol: f64,
) -> Result<Configuration> {
    if x.len() != c.breakpoints().len() {
        return Err(Error::InvalidFlow("state length mismatch".into()));
    }
    Configuration::from_raw_normalized(x.to_vec(), c.cells().to_vec(), c.n(), tol)
}

fn rk4_step(
    x: &[f64],
    v0: &[f64],
    dt: f64,
    moving: &[usize],
    dir_of: &impl Fn(usize) -> f64,
) -> Option<Vec<f64>> {
    let eval = |base: &[f64], k: &[f64], scale: f64| -> Option<Vec<f64>> {
        let mut vs = Vec::with_capacity(moving.len());
        for (pos, &i) in moving.iter().enumerate() {
            let xi = base[i] + scale * k[pos];
            if xi == 0.0 || xi.signum() != base[i].signum() {
                return None; // crossed the origin mid-stage
            }
            vs.push(dir_of(i) / xi.abs());
        }
        Some(vs)
    };
    let k1 = v0.to_vec();
    let k2 = eval(x, &k1, 0.5 * dt)?;
    let k3 = eval(x, &k2, 0.5 * dt)?;
    let k4 = eval(x, &k3, dt)?;
    let mut out = x.to_vec();
    for (pos, &i) in moving.iter().enumerate() {
        out[i] += dt / 6.0 * (k1[pos] + 2.0 * k2[pos] + 2.0 * k3[pos] + k4[pos]);
    }
    Some(out)
}

fn step_is_sane(before: &[f64], after: &[f64], moving: &[usize]) -> bool {
    if after.windows(2).any(|w| w[0] >= w[1]) {
        return false;
    }
    moving
        .iter()
        .all(|&i| after[i] != 0.0 && after[i].signum() == before[i].signum())
}

fn gap_vanished(c: &Configuration, x: &[f64], min_gap: f64) -> bool {
    (0..c.cell_count()).any(|k| x[k + 1] - x[k] < min_gap)
}

fn perimeter_of(d: Density, c: &Configuration, x: &[f64]) -> f64 {
    (0..x.len())
        .filter(|&i| {
            let left = i.checked_sub(1).and_then(|k| c.cells().get(k));
            let right = c.cells().get(i);
            matches!(left, Some(Some(_))) || matches!(right, Some(Some(_)))
        })
        .map(|i| d.value(x[i]))
        .sum()
}

fn masses_of(d: Density, c: &Configuration, x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; c.n()];
    for (k, cell) in c.cells().iter().enumerate() {
        if let Some(r) = cell {
            out[r.0] += d.mass(x[k], x[k + 1]);
        }
    }
    out
}
