use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::noise::{ase_power_w, nli_channels, nli_snr_at, snr_or_absent};
use super::{propagate_power, ChannelPlan, Element, ElementKind, EngineError, LineControl, PowerProfile};
use crate::units::{ghz_to_hz, lin_to_db, inverse_sum};

/// Noise contribution of one element to one channel. `None` means the element
/// adds no noise of that kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct ElementSnr {
    pub index: usize,
    pub kind: ElementKind,
    pub snr_ase: Option<f64>,
    pub snr_nli: Option<f64>,
}

impl ElementSnr {
    pub fn terms(&self) -> impl Iterator<Item = f64> {
        self.snr_ase.into_iter().chain(self.snr_nli)
    }
}

/// Per-element SNR contributions of one channel along one line, with the
/// accumulated GSNR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct LinkSnrBreakdown {
    pub channel_index: usize,
    pub contributions: Vec<ElementSnr>,
    /// Linear GSNR in the channel's symbol-rate bandwidth.
    pub gsnr: f64,
    /// Noise bandwidth the contributions are referred to.
    pub noise_bandwidth_ghz: f64,
    /// Channel power at every element boundary.
    pub power_profile_dbm: Vec<f64>,
}

impl LinkSnrBreakdown {
    /// Inverse-sum fold of the listed contributions, in list order.
    pub fn recompute(&self) -> f64 {
        fold_contributions(&self.contributions)
    }

    pub fn gsnr_db(&self) -> f64 {
        lin_to_db(self.gsnr)
    }

    /// ASE-only SNR re-expressed in `reference_bandwidth_ghz`.
    pub fn osnr_db(&self, reference_bandwidth_ghz: f64) -> f64 {
        let ase = inverse_sum(self.contributions.iter().filter_map(|c| c.snr_ase));
        lin_to_db(ase * self.noise_bandwidth_ghz / reference_bandwidth_ghz)
    }
}

pub fn fold_contributions<'a, I>(contributions: I) -> f64
where
    I: IntoIterator<Item = &'a ElementSnr>,
{
    inverse_sum(contributions.into_iter().flat_map(ElementSnr::terms))
}

/// Power profile plus per-channel breakdowns for a whole plan.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkEvaluation {
    pub profile: PowerProfile,
    pub breakdowns: Vec<LinkSnrBreakdown>,
}

fn breakdown_for(
    elements: &[Element],
    plan: &ChannelPlan,
    profile: &PowerProfile,
    channel: usize,
) -> LinkSnrBreakdown {
    let ch = plan.channels[channel];
    let noise_bw = ghz_to_hz(ch.symbol_rate_gbd);
    let contributions: Vec<ElementSnr> = elements
        .iter()
        .enumerate()
        .map(|(k, element)| {
            let (snr_ase, snr_nli) = match element {
                Element::Fiber(span) => {
                    let launch = nli_channels(plan, profile.input_w(k));
                    (None, nli_snr_at(span, &launch, channel))
                }
                Element::Edfa(edfa) => {
                    let gain = profile
                        .applied_gain(k)
                        .expect("amplifiers record their gain")
                        .effective_db;
                    let nf = edfa.nf_clamped(gain);
                    let p_ase = ase_power_w(nf, gain, ch.center_thz, noise_bw);
                    (snr_or_absent(profile.output_w(k)[channel], p_ase), None)
                }
                Element::Roadm(_) => (None, None),
            };
            ElementSnr {
                index: k,
                kind: element.kind(),
                snr_ase,
                snr_nli,
            }
        })
        .collect();
    let gsnr = fold_contributions(&contributions);
    LinkSnrBreakdown {
        channel_index: channel,
        contributions,
        gsnr,
        noise_bandwidth_ghz: ch.symbol_rate_gbd,
        power_profile_dbm: profile.channel_trace_dbm(channel),
    }
}

/// Propagates the plan and accumulates ASE and NLI for every channel.
pub fn evaluate_link(
    elements: &[Element],
    plan: &ChannelPlan,
    control: LineControl,
) -> Result<LinkEvaluation, EngineError> {
    let profile = propagate_power(elements, plan, control)?;
    let breakdowns = (0..plan.len())
        .map(|ch| breakdown_for(elements, plan, &profile, ch))
        .collect();
    Ok(LinkEvaluation { profile, breakdowns })
}

/// GSNR breakdown of a single channel; `1/gsnr = Σ_k (1/snr_ase_k + 1/snr_nli_k)`.
pub fn link_gsnr(
    elements: &[Element],
    plan: &ChannelPlan,
    control: LineControl,
    channel_index: usize,
) -> Result<LinkSnrBreakdown, EngineError> {
    let profile = propagate_power(elements, plan, control)?;
    if channel_index >= plan.len() {
        return Err(EngineError::InvalidPlan(format!(
            "channel index {channel_index} out of range"
        )));
    }
    Ok(breakdown_for(elements, plan, &profile, channel_index))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gn::{Channel, Edfa, FiberSpan};
    use crate::units::db_to_lin;

    fn snr(kind: ElementKind, ase: Option<f64>, nli: Option<f64>) -> ElementSnr {
        ElementSnr {
            index: 0,
            kind,
            snr_ase: ase,
            snr_nli: nli,
        }
    }

    #[test]
    fn fold_identity_and_pairs() {
        let one = [snr(ElementKind::Edfa, Some(100.0), None)];
        assert!((lin_to_db(fold_contributions(&one)) - 20.0).abs() < 1e-12);
        let two = [
            snr(ElementKind::Edfa, Some(100.0), None),
            snr(ElementKind::Edfa, Some(100.0), None),
        ];
        assert!((lin_to_db(fold_contributions(&two)) - 16.989_700_043_360_19).abs() < 1e-9);
        let mixed = [
            snr(ElementKind::Edfa, Some(100.0), None),
            snr(ElementKind::Fiber, None, Some(db_to_lin(25.0))),
        ];
        assert!((lin_to_db(fold_contributions(&mixed)) - 18.806_689_519_339_05).abs() < 1e-9);
    }

    #[test]
    fn breakdown_recomputes_bitwise() {
        let elements = vec![
            Element::Fiber(FiberSpan::smf(80.0)),
            Element::Edfa(Edfa::flat(16.0, 5.0)),
            Element::Fiber(FiberSpan::smf(60.0)),
            Element::Edfa(Edfa::flat(12.0, 5.5)),
        ];
        let plan = ChannelPlan::new(vec![
            Channel::new(193.0, 32.0, 0.0),
            Channel::new(193.1, 64.0, 1.0),
        ]);
        let eval = evaluate_link(&elements, &plan, LineControl::unmanaged()).unwrap();
        for b in &eval.breakdowns {
            assert_eq!(b.recompute().to_bits(), b.gsnr.to_bits());
            assert!(b.contributions.iter().flat_map(ElementSnr::terms).all(|s| s > 0.0));
        }
        let single = link_gsnr(&elements, &plan, LineControl::unmanaged(), 1).unwrap();
        assert_eq!(single, eval.breakdowns[1]);
    }

    #[test]
    fn osnr_scales_with_reference_bandwidth() {
        let elements = vec![
            Element::Fiber(FiberSpan { gamma_per_w_km: 0.0, ..FiberSpan::smf(80.0) }),
            Element::Edfa(Edfa::flat(16.0, 5.0)),
        ];
        let plan = ChannelPlan::single(Channel::new(193.4, 25.0, 0.0));
        let b = link_gsnr(&elements, &plan, LineControl::unmanaged(), 0).unwrap();
        assert!((b.osnr_db(12.5) - b.gsnr_db() - lin_to_db(2.0)).abs() < 1e-9);
    }
}
