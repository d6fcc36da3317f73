//! Independent reference computations shared by the integration tests.
//!
//! Nothing here calls into the engine's noise code: physical constants,
//! unit conversions and the NLI integrals are re-derived from scratch.

#![allow(dead_code)]

use std::f64::consts::PI;

pub const C_M_S: f64 = 299_792_458.0;

/// Composite Simpson rule with `n` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    assert!(n % 2 == 0);
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Fiber parameters in SI units.
#[derive(Debug, Clone, Copy)]
pub struct Fiber {
    pub gamma_per_w_m: f64,
    pub beta2_abs_s2_m: f64,
    /// Power attenuation in 1/m.
    pub alpha_per_m: f64,
    pub length_m: f64,
}

impl Fiber {
    pub fn from_datasheet(gamma_per_w_km: f64, d_ps_nm_km: f64, loss_db_km: f64, length_km: f64, f_thz: f64) -> Self {
        let lambda = C_M_S / (f_thz * 1e12);
        // ps/(nm·km) → s/m².
        let d = d_ps_nm_km * 1e-6;
        Fiber {
            gamma_per_w_m: gamma_per_w_km * 1e-3,
            beta2_abs_s2_m: (d * lambda * lambda / (2.0 * PI * C_M_S)).abs(),
            alpha_per_m: loss_db_km / (10.0 * std::f64::consts::E.log10()) / 1e3,
            length_m: length_km * 1e3,
        }
    }

    pub fn l_eff(&self) -> f64 {
        (1.0 - (-self.alpha_per_m * self.length_m).exp()) / self.alpha_per_m
    }
}

/// Single-channel NLI PSD at the channel center: the GN double integral of a
/// flat spectrum over the disk of radius R/2, with the long-span link
/// function `L_eff² / (1 + (4π²|β₂| f1 f2 / α)²)`, done numerically in polar
/// coordinates.
pub fn nli_psd_disk(fiber: &Fiber, symbol_rate_hz: f64, power_w: f64, n_r: usize, n_theta: usize) -> f64 {
    let g = power_w / symbol_rate_hz;
    let c = 4.0 * PI * PI * fiber.beta2_abs_s2_m / fiber.alpha_per_m;
    let rmax = symbol_rate_hz / 2.0;
    let integral = simpson(
        |theta| {
            let (s, co) = theta.sin_cos();
            simpson(
                |r| {
                    let x = c * r * r * s * co;
                    r / (1.0 + x * x)
                },
                0.0,
                rmax,
                n_r,
            )
        },
        0.0,
        2.0 * PI,
        n_theta,
    );
    16.0 / 27.0 * fiber.gamma_per_w_m.powi(2) * g.powi(3) * fiber.l_eff().powi(2) * integral
}

/// Same integral over the exact single-channel domain (the hexagon
/// |f1|, |f2|, |f1+f2| ≤ R/2) with the exact finite-length link function.
pub fn nli_psd_exact(fiber: &Fiber, symbol_rate_hz: f64, power_w: f64, n: usize) -> f64 {
    let g = power_w / symbol_rate_hz;
    let h = symbol_rate_hz / 2.0;
    let a = fiber.alpha_per_m;
    let damp = (-a * fiber.length_m).exp();
    let k = 4.0 * PI * PI * fiber.beta2_abs_s2_m;
    let integral = simpson(
        |f1| {
            let lo = (-h).max(-h - f1);
            let hi = h.min(h - f1);
            simpson(
                |f2| {
                    let w = k * f1 * f2;
                    let phase = w * fiber.length_m;
                    let num = 1.0 - 2.0 * damp * phase.cos() + damp * damp;
                    num / (a * a + w * w)
                },
                lo,
                hi,
                n,
            )
        },
        -h,
        h,
        n,
    );
    16.0 / 27.0 * fiber.gamma_per_w_m.powi(2) * g.powi(3) * integral
}

pub fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn from_db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

pub fn dbm_to_w(p: f64) -> f64 {
    1e-3 * from_db(p)
}

pub fn w_to_dbm(p: f64) -> f64 {
    to_db(p / 1e-3)
}
