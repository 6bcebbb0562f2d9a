#![allow(dead_code)]

use edm_core::{DemandPattern, LoadSpec, Pulse};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const BILL: u8 = 4;
pub const D1: u8 = 1;
pub const D2: u8 = 2;

/// Brute-force batch reference for the event-driven meter. Recomputes the
/// accumulated deviation and segment energy from scratch at every interval
/// instead of carrying running state.
pub fn edm_oracle(powers: &[f64], tau: i64, start: i64, d1: f64, d2: f64, billing: i64) -> Vec<(i64, f64, u8)> {
    let n = powers.len();
    let tau_f = tau as f64;
    let energy = |from: usize, to: usize| (from..to).fold(0.0, |acc, i| acc + powers[i] * tau_f);
    let mut out = Vec::new();
    let mut seg = 0usize;
    let mut reference = powers[0];
    let mut acc_from = 1usize;
    for k in 0..n {
        if k > 0 {
            let mut flags = 0u8;
            if (powers[k] - powers[k - 1]).abs() > d1 {
                flags |= D1;
            }
            let acc = (acc_from..=k).fold(0.0, |acc, i| acc + (powers[i] - reference) * tau_f);
            if acc.abs() > d2 {
                flags |= D2;
            }
            if flags != 0 {
                if seg < k {
                    out.push((start + k as i64 * tau, energy(seg, k), flags));
                }
                seg = k;
                reference = powers[k];
                acc_from = k + 1;
            }
        }
        let t_end = (k as i64 + 1) * tau;
        if t_end % billing == 0 {
            out.push((start + t_end, energy(seg, k + 1), BILL));
            seg = k + 1;
            reference = powers[k];
            acc_from = k + 1;
        }
    }
    if seg < n {
        out.push((start + n as i64 * tau, energy(seg, n), BILL));
    }
    out
}

/// Piecewise-constant runs, occasional jumps, slow drifts and noise, so both
/// thresholds get exercised.
pub fn random_powers(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut level: f64 = rng.gen_range(0.0..2000.0);
    let mut slope = 0.0;
    let integer = rng.gen_bool(0.3);
    (0..n)
        .map(|_| {
            match rng.gen_range(0..10) {
                0 => level = rng.gen_range(0.0..3500.0),
                1 => slope = rng.gen_range(-30.0..30.0),
                2 => slope = 0.0,
                _ => {}
            }
            level = (level + slope).max(0.0);
            let noise = if rng.gen_bool(0.5) {
                rng.gen_range(0.0..5.0)
            } else {
                0.0
            };
            let v = level + noise;
            if integer {
                v.round()
            } else {
                v
            }
        })
        .collect()
}

pub fn random_pattern(seed: u64, n: usize) -> DemandPattern<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tau = *[1_i64, 1, 1, 2, 5].get(rng.gen_range(0..5)).unwrap();
    DemandPattern::new(tau, rng.gen_range(-1000..1000) * tau, random_powers(&mut rng, n)).unwrap()
}

/// A few hours at 1 s built from the generator with random appliance pulses.
pub fn random_day_fragment(seed: u64, hours: i64) -> DemandPattern<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let horizon = hours * 3600;
    let mut pulses = Vec::new();
    for _ in 0..rng.gen_range(5..25) {
        let dur = rng.gen_range(1..1800);
        let start = rng.gen_range(0..horizon - dur);
        let power = rng.gen_range(50.0..3500.0);
        pulses.push(if rng.gen_bool(0.2) {
            Pulse::ramp(start, dur, power)
        } else {
            Pulse::rect(start, dur, power)
        });
    }
    let spec = LoadSpec {
        horizon_s: horizon,
        tau_s: 1,
        base_w: rng.gen_range(20.0..120.0),
        pulses,
        noise_w: rng.gen_range(0.0..5.0),
        seed,
    };
    edm_core::generate(&spec).unwrap()
}

pub fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    a == b || (a - b).abs() <= rel * a.abs().max(b.abs())
}

pub fn integer_pattern(seed: u64, n: usize) -> DemandPattern<f64> {
    let p = random_pattern(seed, n);
    let powers = p.powers_w().iter().map(|v| v.round()).collect();
    DemandPattern::new(p.tau_s(), p.start_s(), powers).unwrap()
}
