//! CSV tables and SVG bar charts from trial records.

use std::collections::BTreeMap;
use std::fmt::Write;

use super::{Algorithm, TrialRecord};
use crate::{IcaError, Result};

/// Records sharing a key are aggregated into one table row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupKey {
    pub dims: usize,
    pub samples: usize,
    pub algorithm: Algorithm,
    pub t_s: usize,
}

impl GroupKey {
    fn of(r: &TrialRecord) -> Self {
        Self {
            dims: r.dims,
            samples: r.samples,
            algorithm: r.algorithm,
            t_s: r.t_s,
        }
    }

    fn label(&self) -> String {
        format!("{} M={} T={} Ts={}", self.algorithm, self.dims, self.samples, self.t_s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupSummary {
    pub key: GroupKey,
    pub trials: usize,
    pub converged: usize,
    pub mean_amari_x100: f64,
    /// Sample variance (`n - 1` denominator); 0 for a single trial.
    pub var_amari_x100: f64,
    pub mean_wall_seconds: f64,
}

/// Aggregates sorted by key, independent of the input order.
pub fn group_records(records: &[TrialRecord]) -> Result<Vec<GroupSummary>> {
    if records.is_empty() {
        return Err(IcaError::EmptyRecords);
    }
    let mut groups: BTreeMap<GroupKey, Vec<&TrialRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(GroupKey::of(r)).or_default().push(r);
    }
    Ok(groups
        .into_iter()
        .map(|(key, mut rs)| {
            // fixed summation order whatever order the records came in
            rs.sort_by_key(|r| (r.trial_index, r.seed));
            let n = rs.len() as f64;
            let mean = rs.iter().map(|r| r.amari_x100).sum::<f64>() / n;
            let var = if rs.len() > 1 {
                rs.iter().map(|r| (r.amari_x100 - mean).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            GroupSummary {
                key,
                trials: rs.len(),
                converged: rs.iter().filter(|r| r.converged).count(),
                mean_amari_x100: mean,
                var_amari_x100: var,
                mean_wall_seconds: rs.iter().map(|r| r.wall_seconds).sum::<f64>() / n,
            }
        })
        .collect())
}

/// One CSV row per (dims, samples, algorithm, t_s) group.
///
/// Columns: `dims,samples,algorithm,t_s,trials,converged,mean_amari_x100,
/// var_amari_x100` and, with `timing`, `mean_wall_seconds`.
pub fn emit_table(records: &[TrialRecord], timing: bool) -> Result<String> {
    let groups = group_records(records)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![
        "dims",
        "samples",
        "algorithm",
        "t_s",
        "trials",
        "converged",
        "mean_amari_x100",
        "var_amari_x100",
    ];
    if timing {
        header.push("mean_wall_seconds");
    }
    w.write_record(&header)?;
    for g in &groups {
        let mut row = vec![
            g.key.dims.to_string(),
            g.key.samples.to_string(),
            g.key.algorithm.to_string(),
            g.key.t_s.to_string(),
            g.trials.to_string(),
            g.converged.to_string(),
            g.mean_amari_x100.to_string(),
            g.var_amari_x100.to_string(),
        ];
        if timing {
            row.push(g.mean_wall_seconds.to_string());
        }
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| IcaError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

const PLOT_HEIGHT: f64 = 240.0;
const BAR_WIDTH: f64 = 60.0;
const BAR_GAP: f64 = 40.0;
const MARGIN_LEFT: f64 = 60.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 80.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Bar chart of the mean Amari error (x100) of each group.
///
/// The tallest bar spans the full plot height; the others are scaled
/// linearly. Each bar carries its mean in a `data-mean` attribute.
pub fn emit_figure(records: &[TrialRecord]) -> Result<String> {
    let groups = group_records(records)?;
    let max = groups.iter().map(|g| g.mean_amari_x100).fold(0.0f64, f64::max);
    let width = MARGIN_LEFT + groups.len() as f64 * (BAR_WIDTH + BAR_GAP) + BAR_GAP;
    let height = MARGIN_TOP + PLOT_HEIGHT + MARGIN_BOTTOM;
    let base = MARGIN_TOP + PLOT_HEIGHT;

    let mut s = String::new();
    writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<rect x="0" y="0" width="{width:.0}" height="{height:.0}" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<text x="{:.2}" y="20" text-anchor="middle" font-size="14">Mean Amari error (x100)</text>"#,
        width / 2.0
    )
    .unwrap();
    writeln!(
        s,
        r#"<line x1="{MARGIN_LEFT:.2}" y1="{MARGIN_TOP:.2}" x2="{MARGIN_LEFT:.2}" y2="{base:.2}" stroke="black"/>"#
    )
    .unwrap();
    writeln!(
        s,
        r#"<line x1="{MARGIN_LEFT:.2}" y1="{base:.2}" x2="{:.2}" y2="{base:.2}" stroke="black"/>"#,
        width - BAR_GAP / 2.0
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{max:.2}</text>"#,
        MARGIN_LEFT - 6.0,
        MARGIN_TOP + 4.0
    )
    .unwrap();
    writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">0</text>"#, MARGIN_LEFT - 6.0, base + 4.0).unwrap();
    for (i, g) in groups.iter().enumerate() {
        let h = if max > 0.0 { g.mean_amari_x100 / max * PLOT_HEIGHT } else { 0.0 };
        let x = MARGIN_LEFT + BAR_GAP + i as f64 * (BAR_WIDTH + BAR_GAP);
        let cx = x + BAR_WIDTH / 2.0;
        writeln!(
            s,
            r##"<rect class="bar" x="{x:.2}" y="{:.2}" width="{BAR_WIDTH:.2}" height="{h:.2}" fill="#4878a8" data-mean="{}"/>"##,
            base - h,
            g.mean_amari_x100
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{cx:.2}" y="{:.2}" text-anchor="middle">{:.2}</text>"#,
            base - h - 4.0,
            g.mean_amari_x100
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{cx:.2}" y="{:.2}" text-anchor="end" transform="rotate(-30 {cx:.2} {:.2})">{}</text>"#,
            base + 16.0,
            base + 16.0,
            escape(&g.key.label())
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    Ok(s)
}
