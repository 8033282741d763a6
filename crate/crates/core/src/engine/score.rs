//! Scoreboards for finished runs.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::base::BaseRunResult;
use super::loops::LoopRunResult;

pub const SAVED_WEIGHT: u64 = 250;
pub const DETECTED_WEIGHT: u64 = 750;
pub const SUCCESSFUL_WEIGHT: u64 = 400;
pub const DETECTED_COLLECTORS_WEIGHT: u64 = 600;

/// Linear time bonus: the full bonus up to `full_seconds` of setup time,
/// nothing from `zero_seconds` on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TimeBonusConfig {
    pub full_seconds: f64,
    pub zero_seconds: f64,
    /// Share of the achieved base score paid as the full bonus.
    pub share: f64,
}

impl Default for TimeBonusConfig {
    fn default() -> Self {
        TimeBonusConfig { full_seconds: 30.0, zero_seconds: 120.0, share: 0.10 }
    }
}

impl TimeBonusConfig {
    pub fn time_fraction(&self, setup_seconds: f64) -> f64 {
        let span = self.zero_seconds - self.full_seconds;
        if span <= 0.0 {
            return if setup_seconds <= self.full_seconds { 1.0 } else { 0.0 };
        }
        ((self.zero_seconds - setup_seconds) / span).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "camelCase")]
pub enum RowDetail {
    Percent(u32),
    Count(u32),
    Blank,
}

impl fmt::Display for RowDetail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowDetail::Percent(p) => write!(f, "{p} %"),
            RowDetail::Count(n) => write!(f, "{n}"),
            RowDetail::Blank => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub key: String,
    pub label: String,
    pub detail: RowDetail,
    pub points: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreBreakdown {
    pub components: Vec<ScoreRow>,
    pub total: i64,
    pub stars: u8,
}

impl ScoreBreakdown {
    pub fn points(&self, key: &str) -> Option<i64> {
        self.components.iter().find(|r| r.key == key).map(|r| r.points)
    }

    /// The scoreboard as tab-separated rows followed by the total.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        for row in &self.components {
            out.push_str(&format!("{}\t{}\t{}\n", row.label, row.detail, row.points));
        }
        out.push_str(&format!("\t\t{}\n", self.total));
        out
    }
}

fn row(key: &str, label: &str, detail: RowDetail, points: i64) -> ScoreRow {
    ScoreRow { key: key.into(), label: label.into(), detail, points }
}

/// `weight * num / den` rounded half up; an empty population counts as complete.
fn weighted(weight: u64, num: usize, den: usize) -> i64 {
    if den == 0 {
        return weight as i64;
    }
    let (num, den) = (num as u64, den as u64);
    ((2 * weight * num + den) / (2 * den)) as i64
}

fn percent(num: usize, den: usize) -> RowDetail {
    RowDetail::Percent(weighted(100, num, den) as u32)
}

pub fn score_base(result: &BaseRunResult, setup_seconds: f64, cfg: &TimeBonusConfig) -> ScoreBreakdown {
    let saved = weighted(SAVED_WEIGHT, result.healthy_saved, result.healthy_total);
    let detected = weighted(DETECTED_WEIGHT, result.mutants_detected, result.mutants_total);
    let base = saved + detected;
    let tf = cfg.time_fraction(setup_seconds);
    let bonus = (base as f64 * cfg.share * tf).round() as i64;
    let components = vec![
        row("saved", "Saved Humans", percent(result.healthy_saved, result.healthy_total), saved),
        row("detected", "Detected Mutants", percent(result.mutants_detected, result.mutants_total), detected),
        row("portals", "Placed Portals", RowDetail::Count(result.portal_count as u32), 0),
        row("timeBonus", "Time Bonus", RowDetail::Percent((tf * 100.0).round() as u32), bonus),
    ];
    let total = base + bonus;
    ScoreBreakdown { components, total, stars: stars(total) }
}

pub fn score_loop(result: &LoopRunResult) -> ScoreBreakdown {
    let successful = weighted(SUCCESSFUL_WEIGHT, result.healthy_successful, result.healthy_total);
    let detected = weighted(DETECTED_COLLECTORS_WEIGHT, result.mutants_detected, result.mutants_total);
    let penalty = -result.total_penalty;
    let components = vec![
        row(
            "successful",
            "Successful collectors",
            percent(result.healthy_successful, result.healthy_total),
            successful,
        ),
        row(
            "detected",
            "Detected wrong collectors",
            percent(result.mutants_detected, result.mutants_total),
            detected,
        ),
        row("penalty", "Penalty for late detection", RowDetail::Blank, penalty),
    ];
    let total = (successful + detected + penalty).max(0);
    ScoreBreakdown { components, total, stars: stars(total) }
}

pub fn stars(total: i64) -> u8 {
    match total {
        t if t >= 1000 => 3,
        t if t >= 800 => 2,
        t if t >= 500 => 1,
        _ => 0,
    }
}
