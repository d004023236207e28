//! Detection of short Poincaré recurrence signatures in sampled energy
//! series.
//!
//! A sample is an outlier when its logarithm lies more than `kappa`
//! interquartile ranges above (peaks) or below (dips) the median of the
//! logarithms. Each contiguous run of outliers contributes one event, at
//! its extreme sample. Runs that include the first sample are the initial
//! transient and are skipped.

use serde::{Deserialize, Serialize};

use crate::diagnostics::EnergyRecord;
use crate::error::{Error, Result};

pub const MIN_SAMPLES: usize = 100;

/// Smallest excursion from the median, in natural-log units, that can count
/// as an event. Keeps round-off wobble in conserved series from qualifying.
pub const MIN_LOG_EXCURSION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Signature {
    InteractionPeaks,
    IncompressibleDips,
    EnstrophyDips,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceReport {
    pub kappa: f64,
    pub samples: usize,
    pub e_i_peaks: Vec<u64>,
    pub e_ic_dips: Vec<u64>,
    pub z_dips: Vec<u64>,
    /// Which series the period estimates were read from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<Signature>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_period: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<u64>,
}

impl RecurrenceReport {
    pub fn is_empty(&self) -> bool {
        self.e_i_peaks.is_empty() && self.e_ic_dips.is_empty() && self.z_dips.is_empty()
    }
}

/// Times of the outlier events of `values` sampled at `times`.
///
/// `sign = 1.0` finds peaks, `-1.0` finds dips. Series that are not
/// strictly positive have no logarithm and yield no events.
pub fn outlier_events(times: &[u64], values: &[f64], sign: f64, kappa: f64) -> Vec<u64> {
    if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Vec::new();
    }
    let x: Vec<f64> = values.iter().map(|v| sign * v.ln()).collect();
    let mut sorted = x.clone();
    sorted.sort_by(f64::total_cmp);
    let median = quantile(&sorted, 0.5);
    let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
    let threshold = median + (kappa * iqr).max(MIN_LOG_EXCURSION);

    let mut events = Vec::new();
    let mut i = 0;
    while i < x.len() {
        if x[i] <= threshold {
            i += 1;
            continue;
        }
        let start = i;
        let mut best = i;
        while i < x.len() && x[i] > threshold {
            if x[i] > x[best] {
                best = i;
            }
            i += 1;
        }
        if start > 0 {
            events.push(times[best]);
        }
    }
    events
}

/// Linear-interpolated quantile of sorted data.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Peaks of `E_I` and dips of `E_IC` and `Z`. The period estimates come
/// from the first of these three lists that is non-empty: its first event
/// is `T_P / 2`, its second `T_P`.
pub fn detect_recurrence(series: &[EnergyRecord], kappa: f64) -> Result<RecurrenceReport> {
    if series.len() < MIN_SAMPLES {
        return Err(Error::Undefined(format!("recurrence detection needs at least {MIN_SAMPLES} samples, got {}", series.len())));
    }
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(Error::Config(format!("kappa must be positive, got {kappa}")));
    }
    let times: Vec<u64> = series.iter().map(|r| r.t).collect();
    let column = |f: fn(&EnergyRecord) -> f64| series.iter().map(f).collect::<Vec<f64>>();
    let e_i_peaks = outlier_events(&times, &column(|r| r.e_i), 1.0, kappa);
    let e_ic_dips = outlier_events(&times, &column(|r| r.e_ic), -1.0, kappa);
    let z_dips = outlier_events(&times, &column(|r| r.z), -1.0, kappa);

    let (source, events) = [
        (Signature::InteractionPeaks, &e_i_peaks),
        (Signature::IncompressibleDips, &e_ic_dips),
        (Signature::EnstrophyDips, &z_dips),
    ]
    .into_iter()
    .find(|(_, e)| !e.is_empty())
    .map_or((None, None), |(s, e)| (Some(s), Some(e.clone())));
    let events = events.unwrap_or_default();
    Ok(RecurrenceReport {
        kappa,
        samples: series.len(),
        source,
        half_period: events.first().copied(),
        period: events.get(1).copied(),
        e_i_peaks,
        e_ic_dips,
        z_dips,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(n: u64, every: u64, f: impl Fn(u64) -> (f64, f64, f64)) -> Vec<EnergyRecord> {
        (0..n)
            .map(|s| {
                let t = s * every;
                let (e_i, e_ic, z) = f(t);
                EnergyRecord { t, e_t: 1.0, e_k: 1.0, e_i, e_q: 0.0, e_c: 0.0, e_ic, z, gamma_running: 0.0 }
            })
            .collect()
    }

    fn wobble(t: u64) -> f64 {
        1.0 + 0.05 * ((t as f64) * 0.37).sin()
    }

    #[test]
    fn injected_spikes() {
        let s = series(200, 10, |t| {
            let spike = if t == 500 || t == 1000 { 4.0 } else { 1.0 };
            (wobble(t) * spike, wobble(t + 3), wobble(t + 7))
        });
        let r = detect_recurrence(&s, 3.0).unwrap();
        assert_eq!(r.e_i_peaks, vec![500, 1000]);
        assert_eq!((r.half_period, r.period), (Some(500), Some(1000)));
        assert_eq!(r.source, Some(Signature::InteractionPeaks));
        assert!(r.e_ic_dips.is_empty() && r.z_dips.is_empty());
    }

    #[test]
    fn dips_only_and_wide_events() {
        let s = series(300, 10, |t| {
            let dip = if (1300..=1330).contains(&t) { 0.1 } else { 1.0 };
            (wobble(t), wobble(t + 1) * dip, wobble(t + 2) * if t == 2600 { 0.2 } else { 1.0 })
        });
        let r = detect_recurrence(&s, 3.0).unwrap();
        assert!(r.e_i_peaks.is_empty());
        assert_eq!(r.e_ic_dips.len(), 1);
        assert!((1300..=1330).contains(&r.e_ic_dips[0]));
        assert_eq!(r.z_dips, vec![2600]);
        assert_eq!(r.source, Some(Signature::IncompressibleDips));
        assert_eq!(r.period, None);
    }

    #[test]
    fn initial_transient_and_flat_series() {
        let s = series(150, 1, |t| (if t < 3 { 10.0 } else { 1.0 }, 1.0, 0.0));
        let r = detect_recurrence(&s, 3.0).unwrap();
        assert!(r.is_empty());
        assert_eq!((r.half_period, r.period, r.source), (None, None, None));
    }

    #[test]
    fn too_few_samples() {
        assert!(detect_recurrence(&series(99, 1, |_| (1.0, 1.0, 1.0)), 3.0).is_err());
    }
}
