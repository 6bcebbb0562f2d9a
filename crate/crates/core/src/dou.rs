//! Duration-of-Use evaluation: power limits placed on the demand duration
//! curve instead of on clock time.
//!
//! Because the duration curve forgets *when* demand happened, the excess
//! energy is invariant under any reordering of the samples in the horizon.

use std::fmt::Write as _;
use std::path::Path;

use crate::csvio;
use crate::error::{ensure, Error, Result};
use crate::model::{DemandPattern, EnergyQuantity, EnergyUnit};
use crate::scalar::Scalar;

pub const LIMITS_HEADER: [&str; 2] = ["t_end_s", "p_w"];
pub const CURVE_HEADER: [&str; 2] = ["rank_s", "p_w"];
pub const EVALUATION_HEADER: [&str; 3] = ["segment_end_s", "limit_w", "excess_wh"];

/// Pattern samples sorted in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct DurationCurve<T> {
    tau_s: i64,
    powers_w: Vec<T>,
}

impl<T: Scalar> DurationCurve<T> {
    pub fn tau_s(&self) -> i64 {
        self.tau_s
    }

    pub fn powers_w(&self) -> &[T] {
        &self.powers_w
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

    pub fn total_energy_ws(&self) -> T {
        let tau = T::secs(self.tau_s);
        self.powers_w.iter().fold(T::zero(), |acc, &p| acc + p * tau)
    }

    /// Row `k` reports the duration `(k+1)*tau` for which demand was at
    /// least `p_w`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let rows = self
            .powers_w
            .iter()
            .enumerate()
            .map(|(k, p)| vec![(self.tau_s * (k as i64 + 1)).to_string(), p.to_string()]);
        csvio::write_file(path.as_ref(), &CURVE_HEADER, rows)
    }
}

/// Sorts descending; equal values keep their original order.
pub fn duration_curve<T: Scalar>(pattern: &DemandPattern<T>) -> DurationCurve<T> {
    let mut powers_w = pattern.powers_w().to_vec();
    powers_w.sort_by(|a, b| b.partial_cmp(a).expect("pattern samples are finite"));
    DurationCurve {
        tau_s: pattern.tau_s(),
        powers_w,
    }
}

/// Stepwise limits over the duration axis. Breakpoint `(t_end_s, p_w)`
/// applies on `(previous t_end_s, t_end_s]`; the last `t_end_s` is the
/// observation horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct DouLimitSchedule<T> {
    breakpoints: Vec<(i64, T)>,
}

impl<T: Scalar> DouLimitSchedule<T> {
    pub fn new(breakpoints: Vec<(i64, T)>) -> Result<Self> {
        ensure!(!breakpoints.is_empty(), Domain, "limit schedule must not be empty");
        let mut prev = 0;
        for &(t, p) in &breakpoints {
            ensure!(
                t > prev,
                Domain,
                "limit breakpoints must strictly increase from 0 s (got {t} s after {prev} s)"
            );
            ensure!(
                p.is_finite() && p >= T::zero(),
                Domain,
                "limit power must be finite and >= 0, got {p}"
            );
            prev = t;
        }
        Ok(Self { breakpoints })
    }

    pub fn breakpoints(&self) -> &[(i64, T)] {
        &self.breakpoints
    }

    pub fn horizon_s(&self) -> i64 {
        self.breakpoints.last().map_or(0, |b| b.0)
    }

    /// `(start_s, end_s, limit_w)` per segment.
    pub fn segments(&self) -> impl Iterator<Item = (i64, i64, T)> + '_ {
        let starts = std::iter::once(0).chain(self.breakpoints.iter().map(|b| b.0));
        starts.zip(&self.breakpoints).map(|(s, &(e, p))| (s, e, p))
    }

    /// Limit in force at duration offset `t` (in `[0, horizon)`).
    pub fn limit_at(&self, t: i64) -> Option<T> {
        self.breakpoints.iter().find(|b| t < b.0).map(|b| b.1)
    }

    /// Interprets the powers as per cent of `reference_w` (e.g. the contract
    /// power) and converts them to watts.
    pub fn from_percent(self, reference_w: T) -> Result<Self> {
        ensure!(
            reference_w.is_finite() && reference_w >= T::zero(),
            Domain,
            "reference power must be finite and >= 0, got {reference_w}"
        );
        let hundred = T::lit(100.0);
        Self::new(
            self.breakpoints
                .into_iter()
                .map(|(t, p)| (t, p * reference_w / hundred))
                .collect(),
        )
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let rows = csvio::read_file(path, &LIMITS_HEADER)?;
        let mut bps = Vec::with_capacity(rows.len());
        for row in &rows {
            bps.push((row.parse(0, "t_end_s")?, row.parse(1, "p_w")?));
        }
        Self::new(bps).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let rows = self.breakpoints.iter().map(|(t, p)| vec![t.to_string(), p.to_string()]);
        csvio::write_file(path.as_ref(), &LIMITS_HEADER, rows)
    }
}

/// Maximum energy the limits allow over the horizon.
pub fn area_under_limits<T: Scalar>(schedule: &DouLimitSchedule<T>) -> EnergyQuantity<T> {
    let ws = schedule
        .segments()
        .fold(T::zero(), |acc, (s, e, p)| acc + p * T::secs(e - s));
    EnergyQuantity::from_ws(ws).to(EnergyUnit::KWh)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentExcess<T> {
    pub end_s: i64,
    pub limit_w: T,
    pub excess_wh: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Penalty<T> {
    pub tolerated_wh: T,
    pub penalized_wh: T,
    pub amount: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DouEvaluation<T> {
    pub segments: Vec<SegmentExcess<T>>,
    pub total_excess_wh: T,
    pub area_under_limits_kwh: T,
    /// Set by [`apply_penalty`].
    pub penalty: Option<Penalty<T>>,
}

pub fn excess_energy<T: Scalar>(curve: &DurationCurve<T>, schedule: &DouLimitSchedule<T>) -> Result<DouEvaluation<T>> {
    ensure!(
        curve.horizon_s() == schedule.horizon_s(),
        Domain,
        "horizon mismatch: curve covers {} s, limits cover {} s",
        curve.horizon_s(),
        schedule.horizon_s()
    );
    let tau = curve.tau_s();
    for &(t, _) in schedule.breakpoints() {
        ensure!(
            t % tau == 0,
            Domain,
            "limit breakpoint {t} s is not a multiple of tau {tau} s"
        );
    }
    let tau_t = T::secs(tau);
    let wh = EnergyUnit::Wh.ws_factor::<T>();
    let mut total_ws = T::zero();
    let mut segments = Vec::with_capacity(schedule.breakpoints().len());
    for (s, e, limit) in schedule.segments() {
        let range = (s / tau) as usize..(e / tau) as usize;
        let ws = curve.powers_w()[range]
            .iter()
            .fold(T::zero(), |acc, &p| acc + (p - limit).max(T::zero()) * tau_t);
        total_ws = total_ws + ws;
        segments.push(SegmentExcess {
            end_s: e,
            limit_w: limit,
            excess_wh: ws / wh,
        });
    }
    Ok(DouEvaluation {
        segments,
        total_excess_wh: total_ws / wh,
        area_under_limits_kwh: area_under_limits(schedule).value,
        penalty: None,
    })
}

/// Tolerates `tolerance_fraction` of the area under the limits, then prices
/// the rest at `price_per_kwh`.
pub fn apply_penalty<T: Scalar>(
    eval: &DouEvaluation<T>,
    tolerance_fraction: T,
    price_per_kwh: T,
) -> Result<DouEvaluation<T>> {
    ensure!(
        tolerance_fraction >= T::zero() && tolerance_fraction <= T::one(),
        Domain,
        "tolerance must lie in [0, 1], got {tolerance_fraction}"
    );
    ensure!(
        price_per_kwh.is_finite() && price_per_kwh >= T::zero(),
        Domain,
        "price must be finite and >= 0, got {price_per_kwh}"
    );
    let kwh_in_wh = T::lit(1000.0);
    let tolerated_wh = tolerance_fraction * eval.area_under_limits_kwh * kwh_in_wh;
    let penalized_wh = (eval.total_excess_wh - tolerated_wh).max(T::zero());
    Ok(DouEvaluation {
        penalty: Some(Penalty {
            tolerated_wh,
            penalized_wh,
            amount: penalized_wh / kwh_in_wh * price_per_kwh,
        }),
        ..eval.clone()
    })
}

impl<T: Scalar> DouEvaluation<T> {
    /// Segment rows followed by
    /// `summary,area_kwh=..;tolerated_wh=..;penalized_wh=..;penalty=..,<total_excess_wh>`.
    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        let mut rows: Vec<Vec<String>> = self
            .segments
            .iter()
            .map(|s| vec![s.end_s.to_string(), s.limit_w.to_string(), s.excess_wh.to_string()])
            .collect();
        let mut summary = format!("area_kwh={}", self.area_under_limits_kwh);
        if let Some(p) = &self.penalty {
            let _ = write!(
                summary,
                ";tolerated_wh={};penalized_wh={};penalty={}",
                p.tolerated_wh, p.penalized_wh, p.amount
            );
        }
        rows.push(vec!["summary".into(), summary, self.total_excess_wh.to_string()]);
        rows
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        csvio::write_file(path.as_ref(), &EVALUATION_HEADER, self.csv_rows())
    }
}
