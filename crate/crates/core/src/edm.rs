//! Event-driven energy metering.
//!
//! The meter consumes one average power per elementary interval and emits an
//! event when
//!
//! * the power differs from the previous interval by more than `delta1_w`
//!   (change of value), or
//! * the signed deviation from the target power, integrated since the last
//!   event, exceeds `delta2_ws` in magnitude (accumulated variation), or
//! * the interval closes a billing period.
//!
//! Every event records the exact energy since the previous one. A
//! change-of-value or accumulated trigger seen in interval `k` closes the
//! running segment at the *start* of `k`; interval `k` then opens the next
//! segment and becomes the new target. A billing boundary closes the segment
//! at the *end* of its interval. With both thresholds at zero the segments
//! are exactly the constant runs of the input.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use arrayvec::ArrayVec;
use bitflags::bitflags;

use crate::csvio;
use crate::error::{ensure, Error, Result};
use crate::model::DemandPattern;
use crate::scalar::Scalar;

pub const EVENT_HEADER: [&str; 3] = ["t_end_s", "energy_ws", "triggers"];

bitflags! {
    /// Causes recorded on an event. Encoded as `D1`, `D2`, `BILL`.
    #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
    pub struct Triggers: u8 {
        const CHANGE_OF_VALUE = 0b001;
        const ACCUMULATED = 0b010;
        const BILLING_END = 0b100;
    }
}

const TRIGGER_TOKENS: [(Triggers, &str); 3] = [
    (Triggers::CHANGE_OF_VALUE, "D1"),
    (Triggers::ACCUMULATED, "D2"),
    (Triggers::BILLING_END, "BILL"),
];

impl fmt::Display for Triggers {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (flag, token) in TRIGGER_TOKENS {
            if self.contains(flag) {
                if !first {
                    f.write_str("+")?;
                }
                f.write_str(token)?;
                first = false;
            }
        }
        Ok(())
    }
}

impl FromStr for Triggers {
    type Err = String;

    /// Accepts only the canonical order, so encoding is a bijection.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut out = Triggers::empty();
        let mut next = 0;
        for tok in s.split('+') {
            let pos = TRIGGER_TOKENS[next..]
                .iter()
                .position(|(_, t)| *t == tok)
                .ok_or_else(|| format!("unknown or out-of-order trigger `{tok}`"))?;
            out |= TRIGGER_TOKENS[next + pos].0;
            next += pos + 1;
        }
        if out.is_empty() {
            return Err("empty trigger set".into());
        }
        Ok(out)
    }
}

/// Thresholds and time grid for one metering run. Thresholds may be
/// `+inf` to disable a trigger.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdmConfig<T> {
    pub delta1_w: T,
    pub delta2_ws: T,
    pub tau_s: i64,
    pub billing_period_s: i64,
}

impl<T: Scalar> EdmConfig<T> {
    pub fn new(delta1_w: T, delta2_ws: T, tau_s: i64, billing_period_s: i64) -> Result<Self> {
        let cfg = Self {
            delta1_w,
            delta2_ws,
            tau_s,
            billing_period_s,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(
            !self.delta1_w.is_nan() && self.delta1_w >= T::zero(),
            Config,
            "delta1 must be >= 0, got {}",
            self.delta1_w
        );
        ensure!(
            !self.delta2_ws.is_nan() && self.delta2_ws >= T::zero(),
            Config,
            "delta2 must be >= 0, got {}",
            self.delta2_ws
        );
        ensure!(self.tau_s > 0, Config, "tau must be positive, got {}", self.tau_s);
        ensure!(
            self.billing_period_s > 0 && self.billing_period_s % self.tau_s == 0,
            Config,
            "billing period {} s must be a positive multiple of tau {} s",
            self.billing_period_s,
            self.tau_s
        );
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeterEvent<T> {
    pub t_end_s: i64,
    pub energy_ws: T,
    pub triggers: Triggers,
}

/// Snapshot of the meter between two elementary intervals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdmState<T> {
    /// Power of the last consumed interval.
    pub p_prev_w: T,
    /// Target power, reset on every event.
    pub p_ref_w: T,
    /// Signed integrated deviation from the target since the last reset.
    pub acc_ws: T,
    /// Energy since the last event.
    pub seg_energy_ws: T,
    pub t_now_s: i64,
}

/// Range of next-interval powers that would not fire a change-of-value or
/// accumulated trigger. Empty when `lower_w > upper_w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope<T> {
    pub lower_w: T,
    pub upper_w: T,
}

impl<T: Scalar> Envelope<T> {
    pub fn is_empty(&self) -> bool {
        self.lower_w > self.upper_w
    }

    pub fn contains(&self, p: T) -> bool {
        self.lower_w <= p && p <= self.upper_w
    }
}

pub fn no_event_envelope<T: Scalar>(state: &EdmState<T>, config: &EdmConfig<T>) -> Envelope<T> {
    let tau = T::secs(config.tau_s);
    let lower = (state.p_prev_w - config.delta1_w).max(state.p_ref_w + (-config.delta2_ws - state.acc_ws) / tau);
    let upper = (state.p_prev_w + config.delta1_w).min(state.p_ref_w + (config.delta2_ws - state.acc_ws) / tau);
    Envelope {
        lower_w: lower,
        upper_w: upper,
    }
}

/// Up to two events can close in one interval: a trigger closing the
/// previous segment and a billing boundary closing the current one.
pub type StepEvents<T> = ArrayVec<MeterEvent<T>, 2>;

/// Streaming event-driven meter for a single supply point.
#[derive(Debug, Clone)]
pub struct EdmMeter<T> {
    config: EdmConfig<T>,
    tau: T,
    start_s: i64,
    end_s: Option<i64>,
    t_now_s: i64,
    seg_start_s: i64,
    p_prev: Option<T>,
    p_ref: T,
    acc: T,
    seg_energy: T,
}

impl<T: Scalar> EdmMeter<T> {
    pub fn new(config: EdmConfig<T>, start_s: i64) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            tau: T::secs(config.tau_s),
            config,
            start_s,
            end_s: None,
            t_now_s: start_s,
            seg_start_s: start_s,
            p_prev: None,
            p_ref: T::zero(),
            acc: T::zero(),
            seg_energy: T::zero(),
        })
    }

    /// Refuse samples beyond `start_s + horizon_s`.
    pub fn with_horizon(mut self, horizon_s: i64) -> Self {
        self.end_s = Some(self.start_s + horizon_s);
        self
    }

    pub fn config(&self) -> &EdmConfig<T> {
        &self.config
    }

    /// `None` until the first interval has been consumed.
    pub fn state(&self) -> Option<EdmState<T>> {
        self.p_prev.map(|p_prev| EdmState {
            p_prev_w: p_prev,
            p_ref_w: self.p_ref,
            acc_ws: self.acc,
            seg_energy_ws: self.seg_energy,
            t_now_s: self.t_now_s,
        })
    }

    pub fn no_event_envelope(&self) -> Option<Envelope<T>> {
        self.state().map(|s| no_event_envelope(&s, &self.config))
    }

    pub fn step(&mut self, p: T) -> Result<StepEvents<T>> {
        if let Some(end) = self.end_s {
            if self.t_now_s >= end {
                return Err(Error::State(format!("step after horizon end at {end} s")));
            }
        }
        ensure!(
            p.is_finite() && p >= T::zero(),
            Domain,
            "interval at {} s: power must be finite and non-negative, got {p}",
            self.t_now_s
        );

        let mut out = StepEvents::new();
        let t_begin = self.t_now_s;
        let t_end = t_begin + self.config.tau_s;

        match self.p_prev {
            // The first interval only sets the targets.
            None => {
                self.p_ref = p;
                self.acc = T::zero();
            }
            Some(prev) => {
                let mut fired = Triggers::empty();
                if (p - prev).abs() > self.config.delta1_w {
                    fired |= Triggers::CHANGE_OF_VALUE;
                }
                let acc = self.acc + (p - self.p_ref) * self.tau;
                if acc.abs() > self.config.delta2_ws {
                    fired |= Triggers::ACCUMULATED;
                }
                if fired.is_empty() {
                    self.acc = acc;
                } else {
                    if self.seg_start_s < t_begin {
                        out.push(MeterEvent {
                            t_end_s: t_begin,
                            energy_ws: self.seg_energy,
                            triggers: fired,
                        });
                    }
                    self.seg_energy = T::zero();
                    self.seg_start_s = t_begin;
                    self.p_ref = p;
                    self.acc = T::zero();
                }
            }
        }

        self.seg_energy = self.seg_energy + p * self.tau;
        self.p_prev = Some(p);
        self.t_now_s = t_end;

        if (t_end - self.start_s) % self.config.billing_period_s == 0 {
            out.push(self.close(Triggers::BILLING_END));
            self.p_ref = p;
            self.acc = T::zero();
        }
        Ok(out)
    }

    /// Closes the open segment at the current time, if it holds any
    /// interval. The horizon end is treated as a billing boundary.
    pub fn finish(&mut self) -> Option<MeterEvent<T>> {
        (self.seg_start_s < self.t_now_s).then(|| self.close(Triggers::BILLING_END))
    }

    fn close(&mut self, triggers: Triggers) -> MeterEvent<T> {
        let ev = MeterEvent {
            t_end_s: self.t_now_s,
            energy_ws: self.seg_energy,
            triggers,
        };
        self.seg_energy = T::zero();
        self.seg_start_s = self.t_now_s;
        ev
    }
}

/// Ordered events of one metering run.
#[derive(Debug, Clone, PartialEq)]
pub struct EventStream<T> {
    tau_s: i64,
    start_s: i64,
    events: Vec<MeterEvent<T>>,
}

impl<T: Scalar> EventStream<T> {
    pub fn new(tau_s: i64, start_s: i64, events: Vec<MeterEvent<T>>) -> Result<Self> {
        ensure!(tau_s > 0, Domain, "tau must be positive, got {tau_s}");
        ensure!(!events.is_empty(), Domain, "event stream must not be empty");
        let mut prev = start_s;
        for (i, ev) in events.iter().enumerate() {
            ensure!(
                ev.t_end_s > prev,
                Domain,
                "event {i}: timestamp {} s does not follow {prev} s",
                ev.t_end_s
            );
            ensure!(
                (ev.t_end_s - start_s) % tau_s == 0,
                Domain,
                "event {i}: timestamp {} s is off the {tau_s} s grid",
                ev.t_end_s
            );
            ensure!(
                ev.energy_ws.is_finite() && ev.energy_ws >= T::zero(),
                Domain,
                "event {i}: energy must be finite and non-negative, got {}",
                ev.energy_ws
            );
            ensure!(!ev.triggers.is_empty(), Domain, "event {i}: empty trigger set");
            prev = ev.t_end_s;
        }
        Ok(Self { tau_s, start_s, events })
    }

    pub fn tau_s(&self) -> i64 {
        self.tau_s
    }

    pub fn start_s(&self) -> i64 {
        self.start_s
    }

    pub fn events(&self) -> &[MeterEvent<T>] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn end_s(&self) -> i64 {
        self.events.last().map_or(self.start_s, |e| e.t_end_s)
    }

    pub fn horizon_s(&self) -> i64 {
        self.end_s() - self.start_s
    }

    pub fn total_energy_ws(&self) -> T {
        self.events.iter().fold(T::zero(), |acc, e| acc + e.energy_ws)
    }

    /// Number of events whose trigger set contains all of `flags`.
    pub fn count_with(&self, flags: Triggers) -> usize {
        self.events.iter().filter(|e| e.triggers.contains(flags)).count()
    }

    pub fn read_csv(path: impl AsRef<Path>, tau_s: i64, start_s: i64) -> Result<Self> {
        let path = path.as_ref();
        let rows = csvio::read_file(path, &EVENT_HEADER)?;
        let mut events = Vec::with_capacity(rows.len());
        for row in &rows {
            let triggers = row.raw(2).trim().parse::<Triggers>().map_err(|m| row.error(m))?;
            events.push(MeterEvent {
                t_end_s: row.parse(0, "t_end_s")?,
                energy_ws: row.parse(1, "energy_ws")?,
                triggers,
            });
        }
        Self::new(tau_s, start_s, events).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let rows = self
            .events
            .iter()
            .map(|e| vec![e.t_end_s.to_string(), e.energy_ws.to_string(), e.triggers.to_string()]);
        csvio::write_file(path.as_ref(), &EVENT_HEADER, rows)
    }
}

/// Meters a whole pattern. Equivalent to folding [`EdmMeter::step`] over the
/// samples and calling [`EdmMeter::finish`].
pub fn run_edm<T: Scalar>(pattern: &DemandPattern<T>, config: &EdmConfig<T>) -> Result<EventStream<T>> {
    ensure!(
        config.tau_s == pattern.tau_s(),
        Config,
        "meter tau {} s does not match pattern tau {} s",
        config.tau_s,
        pattern.tau_s()
    );
    let mut meter = EdmMeter::new(*config, pattern.start_s())?.with_horizon(pattern.horizon_s());
    let mut events = Vec::new();
    for &p in pattern.powers_w() {
        events.extend(meter.step(p)?);
    }
    events.extend(meter.finish());
    EventStream::new(pattern.tau_s(), pattern.start_s(), events)
}
