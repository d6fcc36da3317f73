use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use super::EngineError;
use crate::units::SPEED_OF_LIGHT;

/// Frequency-dependent loss correction applied on top of the nominal span loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct LossOffset {
    pub frequency_thz: f64,
    pub delta_db: f64,
}

/// A fiber span between two amplification points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct FiberSpan {
    pub length_km: f64,
    /// Attenuation in dB/km.
    pub loss_coeff_db_per_km: f64,
    /// Chromatic dispersion in ps/(nm·km).
    pub dispersion_ps_nm_km: f64,
    /// Nonlinear coefficient in 1/(W·km).
    pub gamma_per_w_km: f64,
    /// Lumped connector and splice loss.
    #[serde(default)]
    pub extra_loss_db: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub loss_offsets: Vec<LossOffset>,
}

impl FiberSpan {
    /// Standard single-mode fiber with the given length.
    pub fn smf(length_km: f64) -> Self {
        FiberSpan {
            length_km,
            loss_coeff_db_per_km: 0.2,
            dispersion_ps_nm_km: 16.7,
            gamma_per_w_km: 1.3,
            extra_loss_db: 0.0,
            loss_offsets: Vec::new(),
        }
    }

    /// Nominal span loss: `loss_coeff · length + extra_loss`.
    pub fn loss_db(&self) -> f64 {
        self.loss_coeff_db_per_km * self.length_km + self.extra_loss_db
    }

    /// Loss seen by a channel at `frequency_thz`, using the nearest loss offset.
    pub fn loss_at_db(&self, frequency_thz: f64) -> f64 {
        let delta = self
            .loss_offsets
            .iter()
            .min_by(|a, b| {
                let da = (a.frequency_thz - frequency_thz).abs();
                let db = (b.frequency_thz - frequency_thz).abs();
                da.total_cmp(&db)
            })
            .map_or(0.0, |o| o.delta_db);
        self.loss_db() + delta
    }

    /// Power attenuation coefficient in 1/m.
    pub fn alpha_per_m(&self) -> f64 {
        self.loss_coeff_db_per_km / (10.0 * std::f64::consts::LOG10_E) / 1e3
    }

    pub fn length_m(&self) -> f64 {
        self.length_km * 1e3
    }

    /// `(1 − e^{−αL}) / α` in metres.
    pub fn effective_length_m(&self) -> f64 {
        let a = self.alpha_per_m();
        -(-a * self.length_m()).exp_m1() / a
    }

    /// `1 / α` in metres.
    pub fn asymptotic_length_m(&self) -> f64 {
        1.0 / self.alpha_per_m()
    }

    /// |β₂| in s²/m at the given optical frequency.
    pub fn beta2_abs(&self, frequency_thz: f64) -> f64 {
        let lambda = SPEED_OF_LIGHT / (frequency_thz * 1e12);
        let d = self.dispersion_ps_nm_km * 1e-6; // s/m²
        (d * lambda * lambda / (2.0 * std::f64::consts::PI * SPEED_OF_LIGHT)).abs()
    }

    /// γ in 1/(W·m).
    pub fn gamma_per_w_m(&self) -> f64 {
        self.gamma_per_w_km * 1e-3
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |what: &str| Err(EngineError::InvalidElement(what.to_string()));
        if !(self.length_km > 0.0 && self.length_km.is_finite()) {
            return bad("fiber length must be > 0");
        }
        if !(self.loss_coeff_db_per_km > 0.0 && self.loss_coeff_db_per_km.is_finite()) {
            return bad("fiber loss coefficient must be > 0");
        }
        if !(self.gamma_per_w_km >= 0.0 && self.gamma_per_w_km.is_finite()) {
            return bad("fiber gamma must be >= 0");
        }
        if !self.dispersion_ps_nm_km.is_finite() || !self.extra_loss_db.is_finite() {
            return bad("fiber dispersion and extra loss must be finite");
        }
        Ok(())
    }
}

/// Erbium-doped fiber amplifier with a cubic NF(gain) characteristic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct Edfa {
    pub gain_target_db: f64,
    pub gain_min_db: f64,
    pub gain_max_db: f64,
    /// NF(dB) = c0 + c1·g + c2·g² + c3·g³ with g the gain in dB.
    pub nf_poly: [f64; 4],
    /// Total output power limit.
    pub p_out_max_dbm: f64,
}

impl Edfa {
    /// Amplifier with a flat noise figure.
    pub fn flat(gain_target_db: f64, nf_db: f64) -> Self {
        Edfa {
            gain_target_db,
            gain_min_db: 0.0,
            gain_max_db: 35.0,
            nf_poly: [nf_db, 0.0, 0.0, 0.0],
            p_out_max_dbm: 23.0,
        }
    }

    fn nf_poly_at(&self, g: f64) -> f64 {
        let [c0, c1, c2, c3] = self.nf_poly;
        c0 + g * (c1 + g * (c2 + g * c3))
    }

    pub fn check_gain(&self, gain_db: f64) -> Result<(), EngineError> {
        if gain_db < self.gain_min_db || gain_db > self.gain_max_db || !gain_db.is_finite() {
            return Err(EngineError::GainOutOfRange {
                required_db: gain_db,
                min_db: self.gain_min_db,
                max_db: self.gain_max_db,
            });
        }
        Ok(())
    }

    /// NF at a gain inside the device range.
    pub fn nf_at_gain(&self, gain_db: f64) -> Result<f64, EngineError> {
        self.check_gain(gain_db)?;
        Ok(self.nf_poly_at(gain_db))
    }

    /// NF with the gain clamped into the device range.
    pub fn nf_clamped(&self, gain_db: f64) -> f64 {
        self.nf_poly_at(gain_db.clamp(self.gain_min_db, self.gain_max_db))
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |what: String| Err(EngineError::InvalidElement(what));
        if !(self.gain_min_db <= self.gain_target_db && self.gain_target_db <= self.gain_max_db) {
            return bad(format!(
                "edfa gain target {} outside [{}, {}]",
                self.gain_target_db, self.gain_min_db, self.gain_max_db
            ));
        }
        if !self.p_out_max_dbm.is_finite() {
            return bad("edfa p_out_max must be finite".into());
        }
        // Minimum of the cubic over the range: endpoints and interior critical points.
        let [_, c1, c2, c3] = self.nf_poly;
        let mut probes = vec![self.gain_min_db, self.gain_max_db];
        let (a, b, c) = (3.0 * c3, 2.0 * c2, c1);
        if a != 0.0 {
            let disc = b * b - 4.0 * a * c;
            if disc >= 0.0 {
                let s = disc.sqrt();
                probes.push((-b + s) / (2.0 * a));
                probes.push((-b - s) / (2.0 * a));
            }
        } else if b != 0.0 {
            probes.push(-c / b);
        }
        for g in probes
            .into_iter()
            .filter(|g| *g >= self.gain_min_db && *g <= self.gain_max_db)
        {
            let nf = self.nf_poly_at(g);
            if !nf.is_finite() || nf < 3.0 {
                return bad(format!("edfa NF {nf:.3} dB at gain {g:.3} dB is below 3 dB"));
            }
        }
        Ok(())
    }
}

/// ROADM traversal: insertion loss, or per-channel equalization in managed lines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
pub struct RoadmNode {
    pub id: String,
    pub insertion_loss_db: f64,
    /// Per-channel egress set-point used when the line is managed.
    pub target_per_channel_power_dbm: f64,
}

impl RoadmNode {
    pub fn validate(&self) -> Result<(), EngineError> {
        if !(self.insertion_loss_db >= 0.0 && self.insertion_loss_db.is_finite()) {
            return Err(EngineError::InvalidElement(format!(
                "roadm {} insertion loss must be >= 0",
                self.id
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Element {
    Fiber(FiberSpan),
    Edfa(Edfa),
    Roadm(RoadmNode),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum ElementKind {
    Fiber,
    Edfa,
    Roadm,
}

impl Element {
    pub fn kind(&self) -> ElementKind {
        match self {
            Element::Fiber(_) => ElementKind::Fiber,
            Element::Edfa(_) => ElementKind::Edfa,
            Element::Roadm(_) => ElementKind::Roadm,
        }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        match self {
            Element::Fiber(f) => f.validate(),
            Element::Edfa(e) => e.validate(),
            Element::Roadm(r) => r.validate(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nf_constant_polynomial() {
        let edfa = Edfa::flat(20.0, 5.0);
        assert_eq!(edfa.nf_at_gain(20.0).unwrap(), 5.0);
    }

    #[test]
    fn nf_linear_polynomial() {
        let edfa = Edfa {
            nf_poly: [9.0, -0.25, 0.0, 0.0],
            ..Edfa::flat(20.0, 5.0)
        };
        assert!((edfa.nf_at_gain(20.0).unwrap() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn nf_out_of_range() {
        let edfa = Edfa {
            gain_max_db: 30.0,
            ..Edfa::flat(20.0, 5.0)
        };
        assert!(matches!(
            edfa.nf_at_gain(31.0),
            Err(EngineError::GainOutOfRange { .. })
        ));
    }

    #[test]
    fn validate_rejects_sub_quantum_nf() {
        // NF dips to 2 dB at g = 10 inside the range.
        let edfa = Edfa {
            nf_poly: [7.0, -1.0, 0.05, 0.0],
            gain_min_db: 5.0,
            gain_max_db: 25.0,
            gain_target_db: 15.0,
            p_out_max_dbm: 20.0,
        };
        assert!(edfa.validate().is_err());
        assert!(Edfa::flat(20.0, 5.0).validate().is_ok());
    }

    #[test]
    fn span_loss_includes_extra_and_offsets() {
        let mut span = FiberSpan::smf(80.0);
        span.extra_loss_db = 0.5;
        span.loss_offsets = vec![
            LossOffset { frequency_thz: 192.0, delta_db: 0.3 },
            LossOffset { frequency_thz: 195.0, delta_db: -0.2 },
        ];
        assert!((span.loss_db() - 16.5).abs() < 1e-12);
        assert!((span.loss_at_db(192.4) - 16.8).abs() < 1e-12);
        assert!((span.loss_at_db(194.0) - 16.3).abs() < 1e-12);
    }

    #[test]
    fn beta2_of_standard_fiber() {
        // 16.7 ps/nm/km at 1550 nm is about 21.3 ps²/km.
        let b2 = FiberSpan::smf(1.0).beta2_abs(193.4) * 1e27;
        assert!((b2 - 21.27).abs() < 0.05, "{b2}");
    }
}
