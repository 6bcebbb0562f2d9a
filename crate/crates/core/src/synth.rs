//! Seeded synthetic demand patterns: a constant base load, rectangular or
//! ramped appliance pulses, and bounded uniform noise.
//!
//! Spec file format (one `key = value` per line, `#` comments, optional
//! `[section]` headers):
//!
//! ```text
//! horizon_s = 86400
//! tau_s = 1
//! [base]
//! power_w = 60
//! [noise]
//! amplitude_w = 0.5
//! [seed]
//! value = 42
//! [pulses]
//! pulse = 3600,5,3200          # start_s, duration_s, power_w
//! pulse = 7200,1800,400,ramp   # linear rise to power_w over the duration
//! ```

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{ensure, Error, Result};
use crate::model::DemandPattern;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PulseShape {
    #[default]
    Rect,
    /// Rises linearly, reaching `power_w` in the last covered interval.
    Ramp,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    pub start_s: i64,
    pub duration_s: i64,
    pub power_w: f64,
    pub shape: PulseShape,
}

impl Pulse {
    pub fn rect(start_s: i64, duration_s: i64, power_w: f64) -> Self {
        Self {
            start_s,
            duration_s,
            power_w,
            shape: PulseShape::Rect,
        }
    }

    pub fn ramp(start_s: i64, duration_s: i64, power_w: f64) -> Self {
        Self {
            shape: PulseShape::Ramp,
            ..Self::rect(start_s, duration_s, power_w)
        }
    }

    /// Sample indices whose interval start falls in `[start, start + duration)`.
    fn samples(&self, tau_s: i64) -> std::ops::Range<usize> {
        let first = (self.start_s + tau_s - 1).div_euclid(tau_s);
        let end = (self.start_s + self.duration_s + tau_s - 1).div_euclid(tau_s);
        first as usize..end as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadSpec {
    pub horizon_s: i64,
    pub tau_s: i64,
    pub base_w: f64,
    pub pulses: Vec<Pulse>,
    /// Half-amplitude of the uniform noise.
    pub noise_w: f64,
    pub seed: u64,
}

impl LoadSpec {
    pub fn validate(&self) -> Result<()> {
        ensure!(self.tau_s > 0, Domain, "tau must be positive, got {}", self.tau_s);
        ensure!(
            self.horizon_s > 0 && self.horizon_s % self.tau_s == 0,
            Domain,
            "horizon {} s must be a positive multiple of tau {} s",
            self.horizon_s,
            self.tau_s
        );
        ensure!(
            self.base_w.is_finite() && self.base_w >= 0.0,
            Domain,
            "base load must be finite and >= 0, got {}",
            self.base_w
        );
        ensure!(
            self.noise_w.is_finite() && self.noise_w >= 0.0 && self.base_w - self.noise_w >= 0.0,
            Domain,
            "noise amplitude {} W must lie in [0, base {} W]",
            self.noise_w,
            self.base_w
        );
        for (i, p) in self.pulses.iter().enumerate() {
            ensure!(
                p.start_s >= 0 && p.duration_s > 0 && p.start_s + p.duration_s <= self.horizon_s,
                Domain,
                "pulse {i} ({} s + {} s) must lie within [0, {}) s",
                p.start_s,
                p.duration_s,
                self.horizon_s
            );
            ensure!(
                p.power_w.is_finite() && p.power_w >= 0.0,
                Domain,
                "pulse {i}: power must be finite and >= 0, got {}",
                p.power_w
            );
        }
        Ok(())
    }

    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let err = |line: usize, msg: String| Error::Parse {
            path: source.to_string(),
            line: line as u64,
            msg,
        };
        let mut spec = LoadSpec {
            horizon_s: 0,
            tau_s: 1,
            base_w: 0.0,
            pulses: Vec::new(),
            noise_w: 0.0,
            seed: 0,
        };
        let mut section = String::new();
        let mut seen_horizon = false;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.trim().to_ascii_lowercase();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(line_no, format!("expected `key = value`, found `{line}`")))?;
            let key = key.trim().to_ascii_lowercase();
            let value = value.trim();
            let num = |v: &str| -> Result<f64> {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| err(line_no, format!("invalid number `{}`", v.trim())))
            };
            let int = |v: &str| -> Result<i64> {
                v.trim()
                    .parse::<i64>()
                    .map_err(|_| err(line_no, format!("invalid integer `{}`", v.trim())))
            };
            match (section.as_str(), key.as_str()) {
                (_, "pulse") => {
                    let fields: Vec<&str> = value.split(',').map(str::trim).collect();
                    let shape = match fields.get(3).copied() {
                        None | Some("rect") => PulseShape::Rect,
                        Some("ramp") => PulseShape::Ramp,
                        Some(other) => return Err(err(line_no, format!("unknown pulse kind `{other}`"))),
                    };
                    if !(3..=4).contains(&fields.len()) {
                        return Err(err(line_no, "pulse needs start,duration,power[,ramp]".into()));
                    }
                    spec.pulses.push(Pulse {
                        start_s: int(fields[0])?,
                        duration_s: int(fields[1])?,
                        power_w: num(fields[2])?,
                        shape,
                    });
                }
                ("" | "grid", "horizon_s") => {
                    spec.horizon_s = int(value)?;
                    seen_horizon = true;
                }
                ("" | "grid", "tau_s") => spec.tau_s = int(value)?,
                ("base", "power_w") | ("", "base_w") => spec.base_w = num(value)?,
                ("noise", "amplitude_w") | ("", "noise_w") => spec.noise_w = num(value)?,
                ("seed", "value") | ("", "seed") => {
                    spec.seed = value
                        .parse()
                        .map_err(|_| err(line_no, format!("invalid seed `{value}`")))?
                }
                _ => {
                    let full = if section.is_empty() {
                        key
                    } else {
                        format!("{section}.{key}")
                    };
                    return Err(err(line_no, format!("unknown key `{full}`")));
                }
            }
        }
        if !seen_horizon {
            return Err(Error::Format(format!("{source}: missing horizon_s")));
        }
        spec.validate().map_err(|e| Error::Format(format!("{source}: {e}")))?;
        Ok(spec)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Text form accepted by [`parse`](Self::parse).
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "horizon_s = {}\ntau_s = {}\n[base]\npower_w = {}\n[noise]\namplitude_w = {}\n[seed]\nvalue = {}\n[pulses]\n",
            self.horizon_s, self.tau_s, self.base_w, self.noise_w, self.seed
        );
        for p in &self.pulses {
            let kind = match p.shape {
                PulseShape::Rect => "",
                PulseShape::Ramp => ",ramp",
            };
            out.push_str(&format!("pulse = {},{},{}{kind}\n", p.start_s, p.duration_s, p.power_w));
        }
        out
    }
}

/// `base + sum of pulses + noise` per elementary interval; a pure function of
/// the load description, seed included.
pub fn generate<T: Scalar>(spec: &LoadSpec) -> Result<DemandPattern<T>> {
    spec.validate()?;
    let n = (spec.horizon_s / spec.tau_s) as usize;
    let mut pulses = vec![T::zero(); n];
    for p in &spec.pulses {
        let range = p.samples(spec.tau_s);
        let m = range.len();
        let power = T::lit(p.power_w);
        for (j, k) in range.enumerate() {
            let v = match p.shape {
                PulseShape::Rect => power,
                PulseShape::Ramp => power * T::secs(j as i64 + 1) / T::secs(m as i64),
            };
            pulses[k] = pulses[k] + v;
        }
    }
    let base = T::lit(spec.base_w);
    let amp = spec.noise_w;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut powers = Vec::with_capacity(n);
    for (k, &sum) in pulses.iter().enumerate() {
        let mut v = base + sum;
        if amp > 0.0 {
            v = v + T::lit(rng.gen_range(-amp..=amp));
        }
        ensure!(v.is_finite(), Domain, "sample {k}: superposed power is not finite");
        powers.push(v.max(T::zero()));
    }
    DemandPattern::new(spec.tau_s, 0, powers)
}

const DAY_S: i64 = 86_400;
const HOUR: i64 = 3600;
const MIN: i64 = 60;

/// Spec behind [`reference_day`]: one residential day at 1 s with a fridge
/// cycle, evening lighting, a ramped heater, several multi-minute appliances
/// in the 0.5-1.5 kW range and short kilowatt-scale inrush peaks.
pub fn reference_day_spec(seed: u64) -> LoadSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_da7a_0d15_ea5e);
    let mut pulses = Vec::new();

    // Fridge compressor.
    let period = rng.gen_range(50 * MIN..=70 * MIN);
    let on = rng.gen_range(15 * MIN..=22 * MIN);
    let mut t = rng.gen_range(0..period);
    while t + on <= DAY_S {
        pulses.push(Pulse::rect(t, on, rng.gen_range(80.0..100.0_f64).round()));
        t += period;
    }

    // Evening lighting and entertainment.
    let start = rng.gen_range(17 * HOUR..19 * HOUR);
    pulses.push(Pulse::rect(
        start,
        rng.gen_range(4 * HOUR..5 * HOUR),
        rng.gen_range(180.0..240.0_f64).round(),
    ));

    // Space heater: warm-up ramp then a plateau at the same power.
    let start = rng.gen_range(6 * HOUR..8 * HOUR);
    let ramp = rng.gen_range(20 * MIN..=40 * MIN);
    let power = rng.gen_range(350.0..450.0_f64).round();
    pulses.push(Pulse::ramp(start, ramp, power));
    pulses.push(Pulse::rect(start + ramp, rng.gen_range(HOUR..2 * HOUR), power));

    // Multi-minute appliances: (earliest start, latest start, min dur, max dur, min W, max W).
    let appliances: [(i64, i64, i64, i64, f64, f64); 10] = [
        (7 * HOUR, 8 * HOUR, 2 * MIN, 4 * MIN, 900.0, 1200.0),  // toaster
        (7 * HOUR, 9 * HOUR, 2 * MIN, 5 * MIN, 1000.0, 1300.0), // microwave
        (9 * HOUR, 11 * HOUR, 15 * MIN, 25 * MIN, 1400.0, 1500.0), // washing machine heating
        (11 * HOUR, 13 * HOUR, 20 * MIN, 40 * MIN, 1200.0, 1500.0), // hob
        (12 * HOUR, 14 * HOUR, 3 * MIN, 6 * MIN, 1000.0, 1300.0), // microwave
        (14 * HOUR, 16 * HOUR, 10 * MIN, 20 * MIN, 1000.0, 1200.0), // iron
        (18 * HOUR, 19 * HOUR, 30 * MIN, 45 * MIN, 1200.0, 1500.0), // oven
        (19 * HOUR, 20 * HOUR, 20 * MIN, 30 * MIN, 1300.0, 1500.0), // hob
        (20 * HOUR, 22 * HOUR, 25 * MIN, 35 * MIN, 1300.0, 1450.0), // dishwasher heating
        (21 * HOUR, 23 * HOUR, 5 * MIN, 10 * MIN, 500.0, 800.0), // hair dryer, low setting
    ];
    for (from, to, dmin, dmax, pmin, pmax) in appliances {
        let start = rng.gen_range(from..to);
        pulses.push(Pulse::rect(
            start,
            rng.gen_range(dmin..=dmax),
            rng.gen_range(pmin..pmax).round(),
        ));
    }

    // Short high-power peaks (kettle and motor inrush), spread over the day.
    let n_peaks = rng.gen_range(6..=9);
    for i in 0..n_peaks {
        let slot = (DAY_S - 2 * HOUR) / n_peaks;
        let start = HOUR + i * slot + rng.gen_range(0..slot - 10);
        pulses.push(Pulse::rect(
            start,
            rng.gen_range(1..=5),
            rng.gen_range(3000.0..3500.0_f64).round(),
        ));
    }

    LoadSpec {
        horizon_s: DAY_S,
        tau_s: 1,
        base_w: 60.0,
        pulses,
        noise_w: 0.5,
        seed,
    }
}

/// One synthetic residential day, 86400 samples at 1 s.
pub fn reference_day<T: Scalar>(seed: u64) -> DemandPattern<T> {
    generate(&reference_day_spec(seed)).expect("reference spec is valid")
}
