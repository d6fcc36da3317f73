use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{with_added_span_loss, SampleSource, TelemetryError, TelemetrySample};
use crate::store::{EvalOptions, LinkId, TwinStore};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmulatorConfig {
    pub seed: u64,
    /// Standard deviation of the GSNR jitter behind each BER, in dB. Zero
    /// turns the noise off.
    pub sigma_db: f64,
    pub source: SampleSource,
}

impl Default for EmulatorConfig {
    fn default() -> Self {
        EmulatorConfig {
            seed: 0,
            sigma_db: 0.02,
            source: SampleSource::Emulated,
        }
    }
}

/// Generates pre-FEC BER samples from the twin's own model.
#[derive(Debug, Clone)]
pub struct Emulator {
    config: EmulatorConfig,
    rng: ChaCha8Rng,
    noise: Option<Normal<f64>>,
}

impl Emulator {
    pub fn new(config: EmulatorConfig) -> Self {
        let noise = (config.sigma_db > 0.0).then(|| Normal::new(0.0, config.sigma_db).expect("finite sigma"));
        Emulator {
            config,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            noise,
        }
    }

    pub fn config(&self) -> &EmulatorConfig {
        &self.config
    }

    /// One sample per in-service lightpath, in registry order. Amplifiers
    /// that run out of gain saturate rather than fail.
    pub fn sample(&mut self, store: &TwinStore, timestamp: f64) -> Result<Vec<TelemetrySample>, TelemetryError> {
        let eval = store.evaluate_with(EvalOptions::clamped())?;
        let mut out = Vec::new();
        for lp in store.lightpaths().filter(|lp| lp.state.is_in_service()) {
            let path = eval.get(lp.id.as_str()).expect("in-service lightpaths are lit");
            let jitter = match &self.noise {
                Some(n) => n.sample(&mut self.rng),
                None => 0.0,
            };
            let trx = store.trx_of(lp)?;
            out.push(TelemetrySample {
                lp_id: lp.id.clone(),
                timestamp,
                pre_fec_ber: trx.curve_ber(path.gsnr_db + jitter),
                rx_power_dbm: path.rx_power_dbm,
                source: self.config.source,
            });
        }
        Ok(out)
    }
}

/// Telemetry while `link` degrades: before sample `i`, every span of the
/// link carries `ramp_db[i]` of extra loss. Samples are `interval_s` apart.
pub fn ramp_samples(
    store: &TwinStore,
    link: &LinkId,
    ramp_db: &[f64],
    start: f64,
    interval_s: f64,
    emulator: &mut Emulator,
) -> Result<Vec<TelemetrySample>, TelemetryError> {
    let mut out = Vec::new();
    for (i, &loss) in ramp_db.iter().enumerate() {
        let lossy = with_added_span_loss(store, std::slice::from_ref(link), loss)?;
        out.extend(emulator.sample(&lossy, start + i as f64 * interval_s)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::path::{commit_provision, whatif_provision, ProvisionRequest, WhatifOptions};
    use crate::telemetry::ingest;

    fn store() -> TwinStore {
        let mut store = fixtures::ring_store();
        for (a, b) in [("T1", "T3"), ("T2", "T5"), ("T4", "T6")] {
            let r = whatif_provision(&store, &ProvisionRequest::new(a, b, 100.0, 1.0), WhatifOptions::default()).unwrap();
            commit_provision(&mut store, &r, 0.0).unwrap();
        }
        store
    }

    #[test]
    fn noiseless_samples_close_the_loop() {
        let mut store = store();
        let eval = store.evaluate().unwrap();
        let mut em = Emulator::new(EmulatorConfig { sigma_db: 0.0, ..Default::default() });
        for s in em.sample(&store.clone(), 1.0).unwrap() {
            let want = eval.get(s.lp_id.as_str()).unwrap().gsnr_db;
            let got = ingest(&mut store, &s).unwrap().gsnr_est_db.unwrap();
            assert!((got - want).abs() < 1e-3);
        }
    }

    #[test]
    fn seeded_noise_is_reproducible() {
        let store = store();
        let cfg = EmulatorConfig { seed: 42, ..Default::default() };
        let a = Emulator::new(cfg).sample(&store, 0.0).unwrap();
        let b = Emulator::new(cfg).sample(&store, 0.0).unwrap();
        assert_eq!(a, b);
        let c = Emulator::new(EmulatorConfig { seed: 43, ..cfg }).sample(&store, 0.0).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn ramp_lowers_margin_of_lightpaths_on_the_link() {
        let mut store = store();
        let mut em = Emulator::new(EmulatorConfig { sigma_db: 0.0, ..Default::default() });
        let samples = ramp_samples(&store, &"R2-R3".into(), &[0.0, 2.0, 4.0], 100.0, 60.0, &mut em).unwrap();
        assert_eq!(samples.len(), 9);
        for s in &samples {
            ingest(&mut store, s).unwrap();
        }
        let on = store.history("LP1").unwrap();
        assert!(on[1].margin_db > on[3].margin_db);
        let off = store.history("LP3").unwrap();
        assert!((off[1].margin_db.unwrap() - off[3].margin_db.unwrap()).abs() < 1e-3);
    }
}
