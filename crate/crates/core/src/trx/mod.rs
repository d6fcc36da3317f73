//! Transceiver catalog and the BER ↔ SNR algebra.
//!
//! The back-to-back abscissa is treated as GSNR: a TRx curve maps line GSNR
//! (TRx noise already folded in) to pre-FEC BER.

mod catalog;
pub mod special;

pub use catalog::TrxCatalog;

use std::cmp::Ordering;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::units::{db_to_lin, lin_to_db};
use special::{erfc, erfc_inv};

/// GSNR bracket searched by the BER inversion.
pub const GSNR_BRACKET_DB: (f64, f64) = (-5.0, 40.0);
/// Bracket width at which bisection stops.
pub const GSNR_TOLERANCE_DB: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrxError {
    #[error("received power {rx_dbm:.2} dBm outside [{min_dbm}, {max_dbm}] dBm")]
    RxPowerOutOfRange {
        rx_dbm: f64,
        min_dbm: f64,
        max_dbm: f64,
    },
    #[error("BER {ber:e} does not intersect the back-to-back curve of {trx}")]
    NoIntersection { trx: String, ber: f64 },
    #[error("BER {0} outside (0, 0.5)")]
    InvalidBer(f64),
    #[error("no transceiver reaches {required_margin_db} dB margin at {gsnr_db:.2} dB GSNR")]
    NoFeasibleTrx { gsnr_db: f64, required_margin_db: f64 },
    #[error("unknown transceiver type {0}")]
    UnknownTrx(String),
    #[error("invalid transceiver {id}: {reason}")]
    InvalidTrx { id: String, reason: String },
}

impl TrxError {
    pub fn code(&self) -> &'static str {
        match self {
            TrxError::RxPowerOutOfRange { .. } => "RxPowerOutOfRange",
            TrxError::NoIntersection { .. } => "NoIntersection",
            TrxError::InvalidBer(_) => "InvalidBer",
            TrxError::NoFeasibleTrx { .. } => "NoFeasibleTrx",
            TrxError::UnknownTrx(_) => "UnknownTrx",
            TrxError::InvalidTrx { .. } => "InvalidTrx",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, JsonSchema)]
pub enum Modulation {
    #[serde(rename = "qpsk")]
    Qpsk,
    #[serde(rename = "16qam")]
    Qam16,
}

impl Modulation {
    pub fn bits_per_symbol(self) -> f64 {
        match self {
            Modulation::Qpsk => 2.0,
            Modulation::Qam16 => 4.0,
        }
    }

    /// Gray-mapped BER at linear SNR per symbol (both polarizations).
    pub fn ber(self, snr: f64) -> f64 {
        match self {
            Modulation::Qpsk => 0.5 * erfc((snr / 2.0).sqrt()),
            Modulation::Qam16 => 3.0 / 8.0 * erfc((snr / 10.0).sqrt()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum FecKind {
    ScFec,
    Ofec,
    Proprietary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct FecProfile {
    pub name: FecKind,
    pub pre_fec_ber_limit: f64,
    pub overhead_percent: f64,
}

impl FecProfile {
    pub fn sc_fec() -> Self {
        FecProfile {
            name: FecKind::ScFec,
            pre_fec_ber_limit: 4.5e-3,
            overhead_percent: 6.7,
        }
    }

    pub fn ofec() -> Self {
        FecProfile {
            name: FecKind::Ofec,
            pre_fec_ber_limit: 2.0e-2,
            overhead_percent: 15.3,
        }
    }

    pub fn proprietary() -> Self {
        FecProfile {
            name: FecKind::Proprietary,
            pre_fec_ber_limit: 2.5e-2,
            overhead_percent: 20.0,
        }
    }
}

/// One sample of a measured back-to-back characteristic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct BtbPoint {
    pub osnr_db: f64,
    pub ber: f64,
}

fn default_tx_power() -> f64 {
    0.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct TrxType {
    pub id: String,
    pub modulation: Modulation,
    pub baud_gbd: f64,
    pub bitrate_gbps: f64,
    /// Intrinsic transceiver SNR.
    pub snr_trx_db: f64,
    pub fec: FecProfile,
    pub min_rx_power_dbm: f64,
    pub max_rx_power_dbm: f64,
    /// Launch power at the transmitter output.
    #[serde(default = "default_tx_power")]
    pub tx_power_dbm: f64,
    /// Sampled curve overriding the analytic formula, ascending in OSNR.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub btb_curve: Option<Vec<BtbPoint>>,
}

impl TrxType {
    pub fn validate(&self) -> Result<(), TrxError> {
        let bad = |reason: String| {
            Err(TrxError::InvalidTrx {
                id: self.id.clone(),
                reason,
            })
        };
        if !(self.baud_gbd > 0.0 && self.bitrate_gbps > 0.0) {
            return bad("baud and bitrate must be > 0".into());
        }
        let carried = self.modulation.bits_per_symbol()
            * self.baud_gbd
            * 2.0
            * (1.0 - self.fec.overhead_percent / 100.0);
        if (carried - self.bitrate_gbps).abs() > 0.2 * self.bitrate_gbps {
            return bad(format!(
                "bitrate {} Gb/s inconsistent with {carried:.1} Gb/s carried by modulation and baud",
                self.bitrate_gbps
            ));
        }
        if !self.snr_trx_db.is_finite() && self.snr_trx_db != f64::INFINITY {
            return bad("snr_trx must be a number".into());
        }
        if !(self.fec.pre_fec_ber_limit > 0.0 && self.fec.pre_fec_ber_limit < 0.5) {
            return bad("FEC limit must lie in (0, 0.5)".into());
        }
        if !(self.min_rx_power_dbm < self.max_rx_power_dbm) {
            return bad("rx power range is empty".into());
        }
        if let Some(curve) = &self.btb_curve {
            if curve.len() < 2 {
                return bad("btb curve needs at least two samples".into());
            }
            for w in curve.windows(2) {
                if !(w[1].osnr_db > w[0].osnr_db && w[1].ber < w[0].ber) {
                    return bad("btb curve must be strictly decreasing in OSNR".into());
                }
            }
            if curve.iter().any(|p| !(p.ber > 0.0 && p.ber < 0.5)) {
                return bad("btb curve BER samples must lie in (0, 0.5)".into());
            }
        }
        Ok(())
    }

    /// Total SNR `1/(1/snr_trx + 1/gsnr)` in dB.
    pub fn total_snr_db(&self, gsnr_db: f64) -> f64 {
        lin_to_db(1.0 / (1.0 / db_to_lin(self.snr_trx_db) + 1.0 / db_to_lin(gsnr_db)))
    }

    /// BER on the back-to-back characteristic, without the rx-power check.
    pub fn curve_ber(&self, gsnr_db: f64) -> f64 {
        match &self.btb_curve {
            Some(curve) => interpolate_curve(curve, gsnr_db),
            None => self.modulation.ber(db_to_lin(self.total_snr_db(gsnr_db))),
        }
    }

    pub fn check_rx_power(&self, rx_power_dbm: f64) -> Result<(), TrxError> {
        if rx_power_dbm < self.min_rx_power_dbm || rx_power_dbm > self.max_rx_power_dbm || rx_power_dbm.is_nan() {
            return Err(TrxError::RxPowerOutOfRange {
                rx_dbm: rx_power_dbm,
                min_dbm: self.min_rx_power_dbm,
                max_dbm: self.max_rx_power_dbm,
            });
        }
        Ok(())
    }
}

// Piecewise linear in (dB, log10 BER), extended with the end segments.
fn interpolate_curve(curve: &[BtbPoint], osnr_db: f64) -> f64 {
    let seg = match curve.iter().position(|p| p.osnr_db >= osnr_db) {
        Some(0) => 0,
        Some(i) => i - 1,
        None => curve.len() - 2,
    };
    let (a, b) = (curve[seg], curve[seg + 1]);
    let t = (osnr_db - a.osnr_db) / (b.osnr_db - a.osnr_db);
    let log_ber = a.ber.log10() + t * (b.ber.log10() - a.ber.log10());
    10f64.powf(log_ber).min(0.5)
}

/// Pre-FEC BER at `gsnr_db` for a receiver seeing `rx_power_dbm`.
pub fn btb_ber(trx: &TrxType, gsnr_db: f64, rx_power_dbm: f64) -> Result<f64, TrxError> {
    trx.check_rx_power(rx_power_dbm)?;
    Ok(trx.curve_ber(gsnr_db))
}

fn check_ber(ber: f64) -> Result<(), TrxError> {
    if !(ber > 0.0 && ber < 0.5) {
        return Err(TrxError::InvalidBer(ber));
    }
    Ok(())
}

/// GSNR at which the back-to-back curve reaches `measured_ber`.
///
/// Bisection on the dB axis over [`GSNR_BRACKET_DB`].
pub fn estimate_gsnr_from_ber(trx: &TrxType, measured_ber: f64) -> Result<f64, TrxError> {
    check_ber(measured_ber)?;
    let (mut lo, mut hi) = GSNR_BRACKET_DB;
    let no_hit = || TrxError::NoIntersection {
        trx: trx.id.clone(),
        ber: measured_ber,
    };
    if measured_ber > trx.curve_ber(lo) || measured_ber < trx.curve_ber(hi) {
        return Err(no_hit());
    }
    while hi - lo > GSNR_TOLERANCE_DB {
        let mid = 0.5 * (lo + hi);
        if trx.curve_ber(mid) > measured_ber {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// GSNR at which the curve reaches the FEC limit.
pub fn gsnr_at_fec_limit(trx: &TrxType) -> Result<f64, TrxError> {
    estimate_gsnr_from_ber(trx, trx.fec.pre_fec_ber_limit)
}

/// `gsnr − gsnr_fec`; positive above the FEC threshold.
pub fn margin(trx: &TrxType, gsnr_db: f64) -> Result<f64, TrxError> {
    Ok(gsnr_db - gsnr_at_fec_limit(trx)?)
}

/// `20·log10(√2·erfc⁻¹(2·ber))`.
pub fn q_factor(ber: f64) -> Result<f64, TrxError> {
    check_ber(ber)?;
    Ok(20.0 * (std::f64::consts::SQRT_2 * erfc_inv(2.0 * ber)).log10())
}

/// Preference order among transceivers: bitrate descending, then lower baud,
/// then id.
pub fn trx_preference(a: &TrxType, b: &TrxType) -> Ordering {
    b.bitrate_gbps
        .total_cmp(&a.bitrate_gbps)
        .then(a.baud_gbd.total_cmp(&b.baud_gbd))
        .then_with(|| a.id.cmp(&b.id))
}

/// Highest-bitrate transceiver keeping at least `required_margin_db`.
pub fn select_trx(
    catalog: &[TrxType],
    gsnr_db: f64,
    required_margin_db: f64,
) -> Result<&TrxType, TrxError> {
    let mut ordered: Vec<&TrxType> = catalog.iter().collect();
    ordered.sort_by(|a, b| trx_preference(a, b));
    ordered
        .into_iter()
        .find(|t| margin(t, gsnr_db).is_ok_and(|m| m >= required_margin_db))
        .ok_or(TrxError::NoFeasibleTrx {
            gsnr_db,
            required_margin_db,
        })
}

/// Operating point of a transceiver at a given line GSNR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct QotPoint {
    pub gsnr_db: f64,
    pub total_snr_db: f64,
    pub ber: f64,
    pub q_factor_db: f64,
    pub margin_db: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rx_power_dbm: Option<f64>,
}

impl QotPoint {
    /// Evaluates the TRx at `gsnr_db`; the rx range is checked when a received
    /// power is given.
    pub fn evaluate(trx: &TrxType, gsnr_db: f64, rx_power_dbm: Option<f64>) -> Result<Self, TrxError> {
        let ber = match rx_power_dbm {
            Some(rx) => btb_ber(trx, gsnr_db, rx)?,
            None => trx.curve_ber(gsnr_db),
        };
        Ok(QotPoint {
            gsnr_db,
            total_snr_db: trx.total_snr_db(gsnr_db),
            ber,
            q_factor_db: q_factor(ber)?,
            margin_db: margin(trx, gsnr_db)?,
            rx_power_dbm,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn ideal(modulation: Modulation, fec: FecProfile) -> TrxType {
        TrxType {
            id: "ideal".into(),
            modulation,
            baud_gbd: 32.0,
            bitrate_gbps: modulation.bits_per_symbol() * 64.0 * (1.0 - fec.overhead_percent / 100.0),
            snr_trx_db: f64::INFINITY,
            fec,
            min_rx_power_dbm: -30.0,
            max_rx_power_dbm: 5.0,
            tx_power_dbm: 0.0,
            btb_curve: None,
        }
    }

    #[test]
    fn qpsk_ber_at_3db() {
        let trx = ideal(Modulation::Qpsk, FecProfile::sc_fec());
        // mpmath: ½·erfc(√(10^0.301/2)) = 0.0786567712653036
        let ber = btb_ber(&trx, 3.01, -10.0).unwrap();
        assert!((ber - 0.078_656_771_265_303_64).abs() < 1e-14);
    }

    #[test]
    fn qam16_ber_at_linear_50() {
        let trx = ideal(Modulation::Qam16, FecProfile::ofec());
        let ber = btb_ber(&trx, lin_to_db(50.0), -10.0).unwrap();
        // mpmath: (3/8)·erfc(√5)
        assert!(((ber - 5.870_258_467_509_56e-4) / ber).abs() < 1e-12);
    }

    #[test]
    fn trx_noise_floor() {
        let trx = TrxType {
            snr_trx_db: 20.0,
            ..ideal(Modulation::Qpsk, FecProfile::sc_fec())
        };
        let floor = Modulation::Qpsk.ber(db_to_lin(20.0));
        assert_eq!(trx.curve_ber(f64::INFINITY), floor);
        assert!(trx.curve_ber(60.0) > floor);
    }

    #[test]
    fn rx_power_out_of_range() {
        let trx = ideal(Modulation::Qpsk, FecProfile::sc_fec());
        assert!(matches!(
            btb_ber(&trx, 10.0, 7.0),
            Err(TrxError::RxPowerOutOfRange { .. })
        ));
    }

    #[test]
    fn estimate_roundtrips() {
        let trx = ideal(Modulation::Qpsk, FecProfile::sc_fec());
        let g = estimate_gsnr_from_ber(&trx, 0.078_656_771_265_303_64).unwrap();
        assert!((g - 3.01).abs() < 1e-4);
        let noisy = TrxType {
            snr_trx_db: 20.0,
            ..trx.clone()
        };
        let ber = noisy.curve_ber(20.0);
        assert!((estimate_gsnr_from_ber(&noisy, ber).unwrap() - 20.0).abs() < 0.01);
    }

    #[test]
    fn estimate_below_floor() {
        let trx = TrxType {
            snr_trx_db: 15.0,
            ..ideal(Modulation::Qpsk, FecProfile::sc_fec())
        };
        assert!(matches!(
            estimate_gsnr_from_ber(&trx, 1e-15),
            Err(TrxError::NoIntersection { .. })
        ));
        assert!(matches!(
            estimate_gsnr_from_ber(&trx, 0.0),
            Err(TrxError::InvalidBer(_))
        ));
    }

    #[test]
    fn margin_at_fec_limit_is_zero() {
        let trx = ideal(Modulation::Qpsk, FecProfile::ofec());
        let g = gsnr_at_fec_limit(&trx).unwrap();
        assert!(margin(&trx, g).unwrap().abs() < 1e-12);
    }

    #[test]
    fn margin_ideal_qpsk_ofec() {
        // erfc⁻¹(0.04) = 1.452219... ⇒ SNR 6.250947 dB (mpmath).
        let trx = ideal(Modulation::Qpsk, FecProfile::ofec());
        let m = margin(&trx, 10.0).unwrap();
        assert!((m - 3.749_053_078_385).abs() < 1e-4, "{m}");
    }

    #[test]
    fn q_factor_reference() {
        // 20·log10(√2·erfc⁻¹(2e-3)) = 9.7998225690 dB (mpmath).
        assert!((q_factor(1e-3).unwrap() - 9.799_822_569_043_98).abs() < 1e-10);
        assert!(matches!(q_factor(0.5), Err(TrxError::InvalidBer(_))));
        assert!(matches!(q_factor(0.0), Err(TrxError::InvalidBer(_))));
    }

    #[test]
    fn q_decreases_with_gsnr() {
        let trx = TrxType {
            snr_trx_db: 22.0,
            ..ideal(Modulation::Qam16, FecProfile::ofec())
        };
        let mut last = f64::INFINITY;
        for i in 0..50 {
            let g = 30.0 - 0.5 * i as f64;
            let q = q_factor(trx.curve_ber(g)).unwrap();
            assert!(q < last);
            last = q;
        }
    }

    #[test]
    fn select_prefers_bitrate_then_baud() {
        let catalog = TrxCatalog::default_generations();
        let best = select_trx(catalog.as_slice(), 35.0, 0.0).unwrap();
        assert_eq!(best.bitrate_gbps, 800.0);
        assert!(matches!(
            select_trx(catalog.as_slice(), 0.0, 0.0),
            Err(TrxError::NoFeasibleTrx { .. })
        ));
        let a = ideal(Modulation::Qpsk, FecProfile::sc_fec());
        let wide = TrxType {
            id: "a-wide".into(),
            baud_gbd: 34.0,
            ..a.clone()
        };
        let narrow = TrxType {
            id: "z-narrow".into(),
            ..a
        };
        let pair = [wide, narrow];
        let pick = select_trx(&pair, 20.0, 0.0).unwrap();
        assert_eq!(pick.id, "z-narrow");
    }

    #[test]
    fn sampled_curve_matches_analytic() {
        let analytic = TrxType {
            snr_trx_db: 21.0,
            ..ideal(Modulation::Qam16, FecProfile::ofec())
        };
        let samples: Vec<BtbPoint> = (0..=100)
            .map(|i| {
                let g = 5.0 + 0.25 * i as f64;
                BtbPoint {
                    osnr_db: g,
                    ber: analytic.curve_ber(g),
                }
            })
            .collect();
        let tabled = TrxType {
            btb_curve: Some(samples),
            ..analytic.clone()
        };
        tabled.validate().unwrap();
        for i in 0..200 {
            let g = 6.0 + 0.1 * i as f64;
            let ber = analytic.curve_ber(g);
            if ber < 1e-300 {
                continue;
            }
            let back = estimate_gsnr_from_ber(&tabled, ber).unwrap();
            assert!((back - g).abs() < 0.02, "g = {g}, table gives {back}");
        }
    }
}
