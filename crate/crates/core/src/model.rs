//! Shared time-series data model: demand patterns, interval series and
//! energy quantities, plus the pattern CSV format.
//!
//! Time is integer seconds on the elementary grid. Energies are accumulated
//! in watt-seconds and converted only at the edges.

use std::fmt;
use std::path::Path;

use crate::csvio;
use crate::error::{ensure, Error, Result};
use crate::scalar::Scalar;

pub const PATTERN_HEADER: [&str; 2] = ["t_s", "p_w"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnergyUnit {
    Ws,
    Wh,
    KWh,
}

impl EnergyUnit {
    /// Watt-seconds per one unit.
    pub fn ws_factor<T: Scalar>(self) -> T {
        match self {
            EnergyUnit::Ws => T::one(),
            EnergyUnit::Wh => T::lit(3600.0),
            EnergyUnit::KWh => T::lit(3_600_000.0),
        }
    }
}

impl fmt::Display for EnergyUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EnergyUnit::Ws => "Ws",
            EnergyUnit::Wh => "Wh",
            EnergyUnit::KWh => "kWh",
        })
    }
}

/// An energy value tagged with its unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyQuantity<T> {
    pub value: T,
    pub unit: EnergyUnit,
}

impl<T: Scalar> EnergyQuantity<T> {
    pub fn new(value: T, unit: EnergyUnit) -> Self {
        Self { value, unit }
    }

    pub fn from_ws(value: T) -> Self {
        Self::new(value, EnergyUnit::Ws)
    }

    pub fn from_wh(value: T) -> Self {
        Self::new(value, EnergyUnit::Wh)
    }

    pub fn from_kwh(value: T) -> Self {
        Self::new(value, EnergyUnit::KWh)
    }

    pub fn value_in(&self, unit: EnergyUnit) -> T {
        if unit == self.unit {
            return self.value;
        }
        self.value * self.unit.ws_factor::<T>() / unit.ws_factor::<T>()
    }

    pub fn to(&self, unit: EnergyUnit) -> Self {
        Self::new(self.value_in(unit), unit)
    }

    pub fn ws(&self) -> T {
        self.value_in(EnergyUnit::Ws)
    }

    pub fn wh(&self) -> T {
        self.value_in(EnergyUnit::Wh)
    }

    pub fn kwh(&self) -> T {
        self.value_in(EnergyUnit::KWh)
    }
}

impl<T: Scalar> fmt::Display for EnergyQuantity<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.value, self.unit)
    }
}

/// Average power per elementary interval. Sample `k` covers
/// `[start_s + k*tau_s, start_s + (k+1)*tau_s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandPattern<T> {
    tau_s: i64,
    start_s: i64,
    powers_w: Vec<T>,
}

impl<T: Scalar> DemandPattern<T> {
    pub fn new(tau_s: i64, start_s: i64, powers_w: Vec<T>) -> Result<Self> {
        ensure!(tau_s > 0, Domain, "elementary interval must be positive, got {tau_s} s");
        ensure!(!powers_w.is_empty(), Domain, "demand pattern must not be empty");
        for (k, &p) in powers_w.iter().enumerate() {
            ensure!(p.is_finite(), Domain, "sample {k}: power {p} is not finite");
            ensure!(p >= T::zero(), Domain, "sample {k}: negative power {p} W");
        }
        let pattern = Self {
            tau_s,
            start_s,
            powers_w,
        };
        ensure!(pattern.total_energy_ws().is_finite(), Domain, "total energy overflows");
        Ok(pattern)
    }

    pub fn tau_s(&self) -> i64 {
        self.tau_s
    }

    pub fn start_s(&self) -> i64 {
        self.start_s
    }

    pub fn powers_w(&self) -> &[T] {
        &self.powers_w
    }

    pub fn into_powers(self) -> Vec<T> {
        self.powers_w
    }

    pub fn len(&self) -> usize {
        self.powers_w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.powers_w.is_empty()
    }

    pub fn horizon_s(&self) -> i64 {
        self.tau_s * self.powers_w.len() as i64
    }

    pub fn end_s(&self) -> i64 {
        self.start_s + self.horizon_s()
    }

    /// Start time of sample `k`.
    pub fn time_of(&self, k: usize) -> i64 {
        self.start_s + self.tau_s * k as i64
    }

    /// Sum of `p * tau` in sample order, in watt-seconds.
    pub fn total_energy_ws(&self) -> T {
        let tau = T::secs(self.tau_s);
        self.powers_w.iter().fold(T::zero(), |acc, &p| acc + p * tau)
    }

    pub fn total_energy(&self) -> EnergyQuantity<T> {
        EnergyQuantity::from_ws(self.total_energy_ws()).to(EnergyUnit::Wh)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        read_pattern(path.as_ref(), None)
    }

    /// Like [`read_csv`](Self::read_csv) but checks the spacing against a
    /// known `tau_s`, which also admits single-row files.
    pub fn read_csv_with_tau(path: impl AsRef<Path>, tau_s: i64) -> Result<Self> {
        read_pattern(path.as_ref(), Some(tau_s))
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        csvio::write_file(path.as_ref(), &PATTERN_HEADER, self.csv_rows())
    }

    pub(crate) fn csv_rows(&self) -> impl Iterator<Item = Vec<String>> + '_ {
        self.powers_w
            .iter()
            .enumerate()
            .map(|(k, p)| vec![self.time_of(k).to_string(), p.to_string()])
    }
}

pub fn read_pattern_csv<T: Scalar>(path: impl AsRef<Path>) -> Result<DemandPattern<T>> {
    DemandPattern::read_csv(path)
}

pub fn write_pattern_csv<T: Scalar>(pattern: &DemandPattern<T>, path: impl AsRef<Path>) -> Result<()> {
    pattern.write_csv(path)
}

pub fn total_energy<T: Scalar>(pattern: &DemandPattern<T>) -> EnergyQuantity<T> {
    pattern.total_energy()
}

fn read_pattern<T: Scalar>(path: &Path, tau_hint: Option<i64>) -> Result<DemandPattern<T>> {
    let rows = csvio::read_file(path, &PATTERN_HEADER)?;
    pattern_from_rows(&rows, &path.display().to_string(), tau_hint)
}

fn pattern_from_rows<T: Scalar>(rows: &[csvio::Row], source: &str, tau_hint: Option<i64>) -> Result<DemandPattern<T>> {
    ensure!(!rows.is_empty(), Domain, "{source}: demand pattern must not be empty");
    let mut times = Vec::with_capacity(rows.len());
    let mut powers = Vec::with_capacity(rows.len());
    for row in rows {
        let t: i64 = row.parse(0, "t_s")?;
        let p: T = row.parse(1, "p_w")?;
        if !p.is_finite() || p < T::zero() {
            return Err(Error::Domain(format!(
                "{source}: line {}: power must be finite and non-negative, got {p}",
                row.line()
            )));
        }
        times.push(t);
        powers.push(p);
    }
    let tau = match (tau_hint, times.len()) {
        (Some(tau), _) => tau,
        (None, 1) => {
            return Err(Error::Format(format!(
                "{source}: cannot infer the elementary interval from a single row"
            )))
        }
        (None, _) => times[1] - times[0],
    };
    ensure!(tau > 0, Format, "{source}: timestamps must be strictly increasing");
    for (i, w) in times.windows(2).enumerate() {
        if w[1] - w[0] != tau {
            return Err(Error::Format(format!(
                "{source}: line {}: non-uniform spacing ({} s after {} s, expected {tau} s)",
                rows[i + 1].line(),
                w[1] - w[0],
                w[0]
            )));
        }
    }
    DemandPattern::new(tau, times[0], powers)
}

/// Fixed-step (timer-driven) energy readings. The last step may be shorter
/// than `step_s`; its true duration is kept in `last_step_partial`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalSeries<T> {
    step_s: i64,
    start_s: i64,
    energies_ws: Vec<T>,
    last_step_partial: Option<i64>,
}

impl<T: Scalar> IntervalSeries<T> {
    pub fn new(step_s: i64, start_s: i64, energies_ws: Vec<T>, last_step_partial: Option<i64>) -> Result<Self> {
        ensure!(step_s > 0, Domain, "step must be positive, got {step_s} s");
        ensure!(!energies_ws.is_empty(), Domain, "interval series must not be empty");
        for (k, &e) in energies_ws.iter().enumerate() {
            ensure!(
                e.is_finite() && e >= T::zero(),
                Domain,
                "step {k}: energy must be finite and non-negative, got {e}"
            );
        }
        if let Some(d) = last_step_partial {
            ensure!(
                d > 0 && d < step_s,
                Domain,
                "partial step duration {d} s must lie in (0, {step_s})"
            );
        }
        Ok(Self {
            step_s,
            start_s,
            energies_ws,
            last_step_partial,
        })
    }

    pub fn step_s(&self) -> i64 {
        self.step_s
    }

    pub fn start_s(&self) -> i64 {
        self.start_s
    }

    pub fn energies_ws(&self) -> &[T] {
        &self.energies_ws
    }

    pub fn last_step_partial(&self) -> Option<i64> {
        self.last_step_partial
    }

    pub fn len(&self) -> usize {
        self.energies_ws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies_ws.is_empty()
    }

    /// Duration of step `j`, honouring a partial trailing step.
    pub fn duration_of(&self, j: usize) -> i64 {
        match self.last_step_partial {
            Some(d) if j + 1 == self.energies_ws.len() => d,
            _ => self.step_s,
        }
    }

    pub fn is_partial(&self, j: usize) -> bool {
        self.last_step_partial.is_some() && j + 1 == self.energies_ws.len()
    }

    pub fn end_of(&self, j: usize) -> i64 {
        self.start_s + self.step_s * j as i64 + self.duration_of(j)
    }

    pub fn horizon_s(&self) -> i64 {
        self.end_of(self.energies_ws.len() - 1) - self.start_s
    }

    pub fn total_energy_ws(&self) -> T {
        self.energies_ws.iter().fold(T::zero(), |acc, &e| acc + e)
    }
}
