//! Unit conversions and physical constants.
//!
//! All internal arithmetic is linear (W, ratios, Hz); dB and dBm only appear
//! at interfaces.

/// Planck constant (J·s).
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub const SECONDS_PER_DAY: f64 = 86_400.0;

#[inline]
pub fn db_to_lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[inline]
pub fn lin_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

#[inline]
pub fn dbm_to_watt(dbm: f64) -> f64 {
    1e-3 * db_to_lin(dbm)
}

#[inline]
pub fn watt_to_dbm(w: f64) -> f64 {
    lin_to_db(w / 1e-3)
}

#[inline]
pub fn thz_to_hz(thz: f64) -> f64 {
    thz * 1e12
}

#[inline]
pub fn ghz_to_hz(ghz: f64) -> f64 {
    ghz * 1e9
}

/// Inverse-sum accumulation of linear SNR contributions.
///
/// Returns `f64::INFINITY` when there is nothing to accumulate. The fold runs
/// in iteration order, so identical inputs reproduce the result bit for bit.
pub fn inverse_sum<I>(snrs: I) -> f64
where
    I: IntoIterator<Item = f64>,
{
    let inv = snrs.into_iter().fold(0.0, |acc, s| acc + 1.0 / s);
    1.0 / inv
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dbm_roundtrip() {
        for dbm in [-30.0, -3.0, 0.0, 1.5, 20.0] {
            assert!((watt_to_dbm(dbm_to_watt(dbm)) - dbm).abs() < 1e-12);
        }
        assert_eq!(dbm_to_watt(0.0), 1e-3);
    }

    #[test]
    fn inverse_sum_of_nothing_is_infinite() {
        assert_eq!(inverse_sum(std::iter::empty()), f64::INFINITY);
        assert!((lin_to_db(inverse_sum([100.0, 100.0])) - 16.989_700_043_360_188).abs() < 1e-12);
    }
}
