//! ASE and NLI noise contributions.

use std::f64::consts::PI;

use super::{ChannelPlan, Edfa, EngineError, FiberSpan};
use crate::units::{db_to_lin, dbm_to_watt, ghz_to_hz, thz_to_hz, PLANCK};

/// ASE power `h·ν·F·(G−1)·B` in watts; zero when the amplifier has no gain.
pub fn ase_power_w(nf_db: f64, gain_db: f64, frequency_thz: f64, bandwidth_hz: f64) -> f64 {
    let g = db_to_lin(gain_db);
    if g <= 1.0 {
        return 0.0;
    }
    PLANCK * thz_to_hz(frequency_thz) * db_to_lin(nf_db) * (g - 1.0) * bandwidth_hz
}

/// Linear ASE SNR after an amplifier, `None` when it adds no ASE.
pub fn ase_snr(
    edfa: &Edfa,
    gain_db: f64,
    channel_power_out_dbm: f64,
    center_frequency_thz: f64,
    reference_bandwidth_ghz: f64,
) -> Result<Option<f64>, EngineError> {
    let nf = edfa.nf_at_gain(gain_db)?;
    let p_ase = ase_power_w(
        nf,
        gain_db,
        center_frequency_thz,
        ghz_to_hz(reference_bandwidth_ghz),
    );
    Ok(snr_or_absent(dbm_to_watt(channel_power_out_dbm), p_ase))
}

pub(crate) fn snr_or_absent(signal_w: f64, noise_w: f64) -> Option<f64> {
    (noise_w > 0.0).then(|| signal_w / noise_w)
}

/// `asinh(k·b) / b`, continuous at `b → 0`.
fn asinh_over(k: f64, b: f64) -> f64 {
    let x = k * b;
    if x.abs() < 1e-8 {
        k
    } else {
        x.asinh() / b
    }
}

/// One channel as seen by the NLI model: center (Hz), symbol rate (Hz) and
/// power at span input (W).
#[derive(Debug, Clone, Copy)]
pub struct NliChannel {
    pub center_hz: f64,
    pub symbol_rate_hz: f64,
    pub power_w: f64,
}

/// Incoherent GN closed-form NLI PSD (W/Hz) at the center of channel `cut`.
///
/// Self-channel term `asinh(π²/2·|β₂|·L_a·R²)` plus one asinh-difference
/// term per interferer, scaled by `(8/27)·γ²·L_eff²·G / (π·|β₂|·L_a)`.
pub fn nli_psd(span: &FiberSpan, channels: &[NliChannel], cut: usize) -> f64 {
    let gamma = span.gamma_per_w_m();
    if gamma == 0.0 {
        return 0.0;
    }
    let target = channels[cut];
    let leff = span.effective_length_m();
    let la = span.asymptotic_length_m();
    let b2la = span.beta2_abs(target.center_hz * 1e-12) * la;
    let ri = target.symbol_rate_hz;
    let gi = target.power_w / ri;

    let mut acc = 0.0;
    for (j, ch) in channels.iter().enumerate() {
        let gj = ch.power_w / ch.symbol_rate_hz;
        let psi = if j == cut {
            asinh_over(PI * PI / 2.0 * ri * ri, b2la)
        } else {
            let df = (ch.center_hz - target.center_hz).abs();
            let half = ch.symbol_rate_hz / 2.0;
            asinh_over(PI * PI * ri * (df + half), b2la) - asinh_over(PI * PI * ri * (df - half), b2la)
        };
        acc += gj * gj * psi;
    }
    8.0 / 27.0 * gamma * gamma * leff * leff * gi * acc / PI
}

pub(crate) fn nli_channels(plan: &ChannelPlan, powers_w: &[f64]) -> Vec<NliChannel> {
    plan.channels
        .iter()
        .zip(powers_w)
        .map(|(ch, &p)| NliChannel {
            center_hz: thz_to_hz(ch.center_thz),
            symbol_rate_hz: ghz_to_hz(ch.symbol_rate_gbd),
            power_w: p,
        })
        .collect()
}

/// Linear NLI SNR of `channel_index` for one span launched with the plan's
/// powers; `None` for a linear (γ = 0) fiber.
pub fn nli_snr(
    span: &FiberSpan,
    plan: &ChannelPlan,
    channel_index: usize,
) -> Result<Option<f64>, EngineError> {
    plan.validate()?;
    if channel_index >= plan.len() {
        return Err(EngineError::InvalidPlan(format!(
            "channel index {channel_index} out of range"
        )));
    }
    let powers: Vec<f64> = plan
        .channels
        .iter()
        .map(|c| dbm_to_watt(c.launch_power_dbm))
        .collect();
    Ok(nli_snr_at(span, &nli_channels(plan, &powers), channel_index))
}

pub(crate) fn nli_snr_at(span: &FiberSpan, channels: &[NliChannel], cut: usize) -> Option<f64> {
    let psd = nli_psd(span, channels, cut);
    let ch = channels[cut];
    snr_or_absent(ch.power_w, psd * ch.symbol_rate_hz)
}
