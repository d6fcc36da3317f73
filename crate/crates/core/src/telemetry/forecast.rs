use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::{TelemetryError, DAY_S};
use crate::store::QotRecord;

pub const MIN_FORECAST_SAMPLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct Crossing {
    /// Days after the first sample.
    pub day: f64,
    pub timestamp: f64,
    /// One standard error of `day`.
    pub se_days: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct MarginForecast {
    pub samples: usize,
    pub threshold_db: f64,
    pub slope_db_per_day: f64,
    /// Fitted margin on the first sample's day.
    pub intercept_db: f64,
    /// Absent when the fitted margin is not declining.
    pub crossing: Option<Crossing>,
}

/// Least-squares line through (days, margin) and the day it reaches
/// `threshold_db`, with a delta-method standard error.
pub fn predict_margin_crossing(history: &[QotRecord], threshold_db: f64) -> Result<MarginForecast, TelemetryError> {
    let pts: Vec<(f64, f64)> = history
        .iter()
        .filter_map(|r| r.margin_db.map(|m| (r.timestamp, m)))
        .collect();
    if pts.len() < MIN_FORECAST_SAMPLES {
        return Err(TelemetryError::InsufficientHistory {
            have: pts.len(),
            need: MIN_FORECAST_SAMPLES,
        });
    }
    let t0 = pts[0].0;
    let xs: Vec<f64> = pts.iter().map(|p| (p.0 - t0) / DAY_S).collect();
    let n = pts.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&pts).map(|(x, p)| (x - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(TelemetryError::InsufficientHistory {
            have: 1,
            need: MIN_FORECAST_SAMPLES,
        });
    }
    let b = sxy / sxx;
    let a = my - b * mx;
    let mut forecast = MarginForecast {
        samples: pts.len(),
        threshold_db,
        slope_db_per_day: b,
        intercept_db: a,
        crossing: None,
    };
    if b >= 0.0 {
        return Ok(forecast);
    }
    let ssr: f64 = xs.iter().zip(&pts).map(|(x, p)| (p.1 - a - b * x).powi(2)).sum();
    let s2 = ssr / (n - 2.0);
    let var_b = s2 / sxx;
    let var_a = s2 * (1.0 / n + mx * mx / sxx);
    let cov_ab = -mx * s2 / sxx;
    let day = (threshold_db - a) / b;
    // d(day)/da = −1/b, d(day)/db = −day/b.
    let var_day = (var_a + day * day * var_b + 2.0 * day * cov_ab) / (b * b);
    forecast.crossing = Some(Crossing {
        day,
        timestamp: t0 + day * DAY_S,
        se_days: var_day.max(0.0).sqrt(),
    });
    Ok(forecast)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::QotSource;

    fn series(days: &[f64], margin: impl Fn(f64) -> f64) -> Vec<QotRecord> {
        days.iter()
            .map(|&d| QotRecord {
                timestamp: 1.7e9 + d * DAY_S,
                ber: 1e-3,
                gsnr_est_db: None,
                margin_db: Some(margin(d)),
                q_db: 9.0,
                rx_power_dbm: None,
                source: QotSource::Telemetry,
                flag: None,
            })
            .collect()
    }

    #[test]
    fn linear_decline_crosses_on_day_forty() {
        let days: Vec<f64> = (0..20).map(f64::from).collect();
        let f = predict_margin_crossing(&series(&days, |d| 5.0 - 0.1 * d), 1.0).unwrap();
        let c = f.crossing.unwrap();
        assert!((c.day - 40.0).abs() < 1e-9, "{}", c.day);
        assert!(c.se_days < 1e-6);
        assert!((f.slope_db_per_day + 0.1).abs() < 1e-12);
        assert!((c.timestamp - (1.7e9 + 40.0 * DAY_S)).abs() < 1e-3);
    }

    #[test]
    fn flat_and_short_series() {
        let days: Vec<f64> = (0..10).map(f64::from).collect();
        assert_eq!(predict_margin_crossing(&series(&days, |_| 3.0), 1.0).unwrap().crossing, None);
        let err = predict_margin_crossing(&series(&days[..7], |d| 5.0 - d), 1.0).unwrap_err();
        assert_eq!(err, TelemetryError::InsufficientHistory { have: 7, need: 8 });
    }

    #[test]
    fn noisy_series_has_positive_standard_error() {
        // Residuals alternate ±0.05.
        let days: Vec<f64> = (0..12).map(f64::from).collect();
        let noisy = |d: f64| 4.0 - 0.05 * d + if (d as i64) % 2 == 0 { 0.05 } else { -0.05 };
        let f = predict_margin_crossing(&series(&days, noisy), 2.0).unwrap();
        let c = f.crossing.unwrap();
        assert!((c.day - (2.0 - f.intercept_db) / f.slope_db_per_day).abs() < 1e-9);
        assert!(c.se_days > 0.0 && c.se_days < 5.0, "{}", c.se_days);
    }
}
