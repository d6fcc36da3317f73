use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::store::QotRecord;

pub const DAY_S: f64 = 86_400.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Onset,
    Cleared,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct DegradationEvent {
    pub kind: EventKind,
    /// Index into the history of the sample the event is attributed to.
    pub index: usize,
    pub timestamp: f64,
    pub baseline_margin_db: f64,
    pub window_median_db: f64,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Onset and clear events from a sliding median over the margin history.
///
/// The baseline is the median margin over the first day of samples. An onset
/// fires when the window median sits `delta_db` or more below it and is
/// attributed to the first sample of that window already below the
/// threshold. It clears once the median is back within `delta_db / 2`.
/// Records without a margin are ignored. Windows shorter than 2 are widened
/// to 2.
pub fn detect_degradation(history: &[QotRecord], window: usize, delta_db: f64) -> Vec<DegradationEvent> {
    let window = window.max(2);
    let samples: Vec<(usize, f64, f64)> = history
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.margin_db.map(|m| (i, r.timestamp, m)))
        .collect();
    let Some(&(_, t0, _)) = samples.first() else {
        return Vec::new();
    };
    let mut first_day: Vec<f64> = samples
        .iter()
        .take_while(|s| s.1 < t0 + DAY_S)
        .map(|s| s.2)
        .collect();
    let baseline = median(&mut first_day);
    let onset_below = baseline - delta_db;
    let clear_above = baseline - delta_db / 2.0;

    let mut events = Vec::new();
    let mut degraded = false;
    for end in window - 1..samples.len() {
        let win = &samples[end + 1 - window..=end];
        let mut margins: Vec<f64> = win.iter().map(|s| s.2).collect();
        let med = median(&mut margins);
        if !degraded && med <= onset_below {
            let (index, timestamp, _) = *win.iter().find(|s| s.2 <= onset_below).expect("median below implies a sample below");
            events.push(DegradationEvent {
                kind: EventKind::Onset,
                index,
                timestamp,
                baseline_margin_db: baseline,
                window_median_db: med,
            });
            degraded = true;
        } else if degraded && med >= clear_above {
            let (index, timestamp, _) = samples[end];
            events.push(DegradationEvent {
                kind: EventKind::Cleared,
                index,
                timestamp,
                baseline_margin_db: baseline,
                window_median_db: med,
            });
            degraded = false;
        }
    }
    events
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::QotSource;

    fn history(margins: &[f64]) -> Vec<QotRecord> {
        margins
            .iter()
            .enumerate()
            .map(|(i, &m)| QotRecord {
                timestamp: i as f64 * DAY_S,
                ber: 1e-3,
                gsnr_est_db: Some(10.0 + m),
                margin_db: Some(m),
                q_db: 9.8,
                rx_power_dbm: None,
                source: QotSource::Telemetry,
                flag: None,
            })
            .collect()
    }

    #[test]
    fn flat_history_has_no_events() {
        assert!(detect_degradation(&history(&[4.0; 20]), 3, 1.0).is_empty());
    }

    #[test]
    fn three_db_step_fires_once_at_step() {
        // Baseline is sample 0 alone (one per day). Window 3 medians:
        // [5,5,5]=5, [5,5,2]=5, [5,2,2]=2 → 3 dB below at window end 6.
        let h = history(&[5.0, 5.0, 5.0, 5.0, 5.0, 2.0, 2.0, 2.0, 2.0, 2.0]);
        let ev = detect_degradation(&h, 3, 1.0);
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0].kind, EventKind::Onset);
        assert_eq!(ev[0].index, 5);
        assert_eq!(ev[0].baseline_margin_db, 5.0);
        assert_eq!(ev[0].window_median_db, 2.0);
    }

    #[test]
    fn small_oscillation_is_ignored() {
        let m: Vec<f64> = (0..40).map(|i| if i % 2 == 0 { 4.3 } else { 3.7 }).collect();
        assert!(detect_degradation(&history(&m), 4, 1.0).is_empty());
    }

    #[test]
    fn clears_only_after_half_delta_recovery() {
        let mut m = vec![5.0; 3];
        m.extend([3.8; 4]); // 1.2 below: onset
        m.extend([4.4; 4]); // 0.6 below: still degraded
        m.extend([4.6; 4]); // 0.4 below: cleared
        let ev = detect_degradation(&history(&m), 3, 1.0);
        let kinds: Vec<_> = ev.iter().map(|e| e.kind).collect();
        assert_eq!(kinds, vec![EventKind::Onset, EventKind::Cleared]);
        assert_eq!(ev[0].index, 3);
        assert_eq!(ev[1].index, 12);
    }

    #[test]
    fn records_without_margin_are_skipped() {
        let mut h = history(&[5.0, 5.0, 2.0, 2.0, 2.0]);
        h[3].margin_db = None;
        let ev = detect_degradation(&h, 2, 1.0);
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0].index, 2);
    }
}
