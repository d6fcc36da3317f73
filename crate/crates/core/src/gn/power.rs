use serde::{Deserialize, Serialize};

use super::{ChannelPlan, Edfa, Element, EngineError};
use crate::units::{db_to_lin, dbm_to_watt, lin_to_db, watt_to_dbm};

/// How amplifier gains and ROADM egress powers are chosen along a line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PowerControl {
    /// Every EDFA restores the per-channel power to `target_dbm`; ROADMs
    /// equalize each channel to their own set-point.
    Managed { target_dbm: f64 },
    /// EDFAs run at their fixed `gain_target_db`; ROADMs only attenuate.
    Unmanaged,
}

/// What to do when a managed amplifier would need a gain outside its range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum GainLimit {
    #[default]
    Reject,
    Clamp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineControl {
    pub power: PowerControl,
    pub gain_limit: GainLimit,
}

impl LineControl {
    pub fn managed(target_dbm: f64) -> Self {
        LineControl {
            power: PowerControl::Managed { target_dbm },
            gain_limit: GainLimit::Reject,
        }
    }

    pub fn unmanaged() -> Self {
        LineControl {
            power: PowerControl::Unmanaged,
            gain_limit: GainLimit::Reject,
        }
    }

    pub fn with_gain_limit(mut self, gain_limit: GainLimit) -> Self {
        self.gain_limit = gain_limit;
        self
    }
}

/// Gain an amplifier actually applied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AppliedGain {
    /// Gain selected by the control policy.
    pub set_db: f64,
    /// Gain after output-power clipping.
    pub effective_db: f64,
}

/// Per-channel power at every element boundary.
///
/// Boundary 0 is the launch; boundary `k + 1` follows element `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerProfile {
    watts: Vec<Vec<f64>>,
    gains: Vec<Option<AppliedGain>>,
}

impl PowerProfile {
    pub fn boundaries(&self) -> usize {
        self.watts.len()
    }

    pub fn input_w(&self, element: usize) -> &[f64] {
        &self.watts[element]
    }

    pub fn output_w(&self, element: usize) -> &[f64] {
        &self.watts[element + 1]
    }

    pub fn boundary_dbm(&self, boundary: usize) -> Vec<f64> {
        self.watts[boundary].iter().copied().map(watt_to_dbm).collect()
    }

    pub fn channel_dbm(&self, boundary: usize, channel: usize) -> f64 {
        watt_to_dbm(self.watts[boundary][channel])
    }

    /// Power of one channel at every boundary.
    pub fn channel_trace_dbm(&self, channel: usize) -> Vec<f64> {
        self.watts.iter().map(|b| watt_to_dbm(b[channel])).collect()
    }

    pub fn final_dbm(&self) -> Vec<f64> {
        self.boundary_dbm(self.watts.len() - 1)
    }

    pub fn applied_gain(&self, element: usize) -> Option<AppliedGain> {
        self.gains[element]
    }
}

fn mean_dbm(watts: &[f64]) -> f64 {
    watts.iter().map(|&w| watt_to_dbm(w)).sum::<f64>() / watts.len() as f64
}

fn amplify(
    edfa: &Edfa,
    input: &[f64],
    control: &LineControl,
) -> Result<(Vec<f64>, AppliedGain), EngineError> {
    let mut gain_db = match control.power {
        PowerControl::Managed { target_dbm } => target_dbm - mean_dbm(input),
        PowerControl::Unmanaged => edfa.gain_target_db,
    };
    match control.gain_limit {
        GainLimit::Reject => edfa.check_gain(gain_db)?,
        GainLimit::Clamp => gain_db = gain_db.clamp(edfa.gain_min_db, edfa.gain_max_db),
    }
    let g = db_to_lin(gain_db);
    let mut out: Vec<f64> = input.iter().map(|p| p * g).collect();
    let total: f64 = out.iter().sum();
    let limit = dbm_to_watt(edfa.p_out_max_dbm);
    let mut effective_db = gain_db;
    if total > limit {
        let scale = limit / total;
        out.iter_mut().for_each(|p| *p *= scale);
        effective_db += lin_to_db(scale);
    }
    Ok((
        out,
        AppliedGain {
            set_db: gain_db,
            effective_db,
        },
    ))
}

/// Propagates every channel of `plan` through `elements` in order.
pub fn propagate_power(
    elements: &[Element],
    plan: &ChannelPlan,
    control: LineControl,
) -> Result<PowerProfile, EngineError> {
    plan.validate()?;
    let mut watts = Vec::with_capacity(elements.len() + 1);
    let mut gains = Vec::with_capacity(elements.len());
    watts.push(
        plan.channels
            .iter()
            .map(|c| dbm_to_watt(c.launch_power_dbm))
            .collect::<Vec<_>>(),
    );
    for element in elements {
        let input = watts.last().expect("launch boundary present");
        let (out, gain) = match element {
            Element::Fiber(span) => {
                let out = input
                    .iter()
                    .zip(&plan.channels)
                    .map(|(p, ch)| p * db_to_lin(-span.loss_at_db(ch.center_thz)))
                    .collect();
                (out, None)
            }
            Element::Edfa(edfa) => {
                let (out, gain) = amplify(edfa, input, &control)?;
                (out, Some(gain))
            }
            Element::Roadm(roadm) => {
                let out = match control.power {
                    PowerControl::Managed { .. } => {
                        vec![dbm_to_watt(roadm.target_per_channel_power_dbm); input.len()]
                    }
                    PowerControl::Unmanaged => {
                        let att = db_to_lin(-roadm.insertion_loss_db);
                        input.iter().map(|p| p * att).collect()
                    }
                };
                (out, None)
            }
        };
        watts.push(out);
        gains.push(gain);
    }
    Ok(PowerProfile { watts, gains })
}
