//! External file formats.
//!
//! Writers emit floats with 17 significant digits so every f64 round-trips
//! bit-exactly and output is byte-identical across runs; parsing accepts any
//! valid JSON number.

use crate::config::{Configuration, RegionId};
use crate::density::Density;
use crate::error::Result;
use crate::layout::{Layout, SplitSpec};
use crate::moves::MoveReport;
use crate::oracle::{ConjectureReport, FrameworkReport, OracleResult};
use crate::solver::Solution;
use serde::Deserialize;

/// 17 significant digits; lossless for f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn json_f64_array(xs: &[f64]) -> String {
    let items: Vec<String> = xs.iter().map(|&x| fmt_f64(x)).collect();
    format!("[{}]", items.join(","))
}

/// `{"density":"abs","n":3,"breakpoints":[...],"cells":[1,0,2]}` with null
/// for empty cells.
pub fn configuration_to_json(d: Density, c: &Configuration) -> String {
    let cells: Vec<String> = c
        .cells()
        .iter()
        .map(|cell| match cell {
            Some(r) => r.0.to_string(),
            None => "null".to_string(),
        })
        .collect();
    format!(
        "{{\"density\":\"{}\",\"n\":{},\"breakpoints\":{},\"cells\":[{}]}}",
        d.tag(),
        c.n(),
        json_f64_array(c.breakpoints()),
        cells.join(",")
    )
}

#[derive(Deserialize)]
struct ConfigurationJson {
    density: String,
    n: usize,
    breakpoints: Vec<f64>,
    cells: Vec<Option<usize>>,
}

/// Parses a configuration and returns it with its density.
pub fn configuration_from_json(s: &str) -> Result<(Density, Configuration)> {
    let raw: ConfigurationJson = serde_json::from_str(s)?;
    let d = Density::from_tag(&raw.density)?;
    let cells = raw.cells.into_iter().map(|c| c.map(RegionId)).collect();
    let config = Configuration::new(raw.breakpoints, cells, raw.n)?;
    Ok((d, config))
}

fn layout_to_json(layout: &Layout) -> String {
    let ids = |side: &[RegionId]| -> String {
        let v: Vec<String> = side.iter().map(|r| r.0.to_string()).collect();
        format!("[{}]", v.join(","))
    };
    let split = match layout.split {
        None => "null".to_string(),
        Some(SplitSpec {
            region,
            left_fraction,
        }) => format!(
            "{{\"region\":{},\"left_fraction\":{}}}",
            region.0,
            fmt_f64(left_fraction)
        ),
    };
    format!(
        "{{\"left\":{},\"right\":{},\"split\":{}}}",
        ids(&layout.left),
        ids(&layout.right),
        split
    )
}

/// Solution JSON: layout, configuration, perimeter, provenance string.
pub fn solution_to_json(d: Density, s: &Solution) -> String {
    format!(
        "{{\"perimeter\":{},\"provenance\":\"{}\",\"layout\":{},\"configuration\":{}}}",
        fmt_f64(s.perimeter),
        s.provenance.tag(),
        layout_to_json(&s.layout),
        configuration_to_json(d, &s.config)
    )
}

/// MoveReport JSON with before/after configurations.
pub fn move_report_to_json(d: Density, r: &MoveReport) -> String {
    format!(
        "{{\"move\":\"{}\",\"before\":{},\"after\":{},\"perimeter_delta\":{},\"strict\":{}}}",
        r.kind.tag(),
        configuration_to_json(d, &r.before),
        configuration_to_json(d, &r.after),
        fmt_f64(r.perimeter_delta),
        r.strict
    )
}

pub fn oracle_result_to_json(r: &OracleResult) -> String {
    format!(
        "{{\"best_layout\":{},\"best_perimeter\":{},\"gap_to_second\":{},\"evaluated\":{}}}",
        layout_to_json(&r.best_layout),
        fmt_f64(r.best_perimeter),
        r.gap_to_second.map_or("null".into(), fmt_f64),
        r.evaluated
    )
}

pub fn framework_report_to_json(r: &FrameworkReport) -> String {
    format!(
        "{{\"shape\":[{},{}],\"result\":{},\"alternating\":{},\"alternating_perimeter\":{},\"alternating_is_minimizer\":{},\"argmin_matches_alternating\":{}}}",
        r.shape.0,
        r.shape.1,
        oracle_result_to_json(&r.result),
        layout_to_json(&r.alternating),
        fmt_f64(r.alternating_perimeter),
        r.alternating_is_minimizer,
        r.argmin_matches_alternating
    )
}

pub fn conjecture_report_to_json(r: &ConjectureReport) -> String {
    let ces: Vec<String> = r
        .counterexamples
        .iter()
        .map(|c| {
            format!(
                "{{\"masses\":{},\"best_layout\":{},\"best_perimeter\":{},\"alternating_perimeter\":{}}}",
                json_f64_array(&c.masses),
                layout_to_json(&c.best_layout),
                fmt_f64(c.best_perimeter),
                fmt_f64(c.alternating_perimeter)
            )
        })
        .collect();
    format!(
        "{{\"n\":{},\"trials\":{},\"seed\":{},\"counterexamples\":[{}],\"max_gap\":{},\"ties\":{}}}",
        r.n,
        r.trials,
        r.seed,
        ces.join(","),
        fmt_f64(r.max_gap),
        r.ties
    )
}
