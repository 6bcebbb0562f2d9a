//! Piecewise-constant reconstruction of metered data and the comparison
//! metrics: point count, peak, RMS distance and resistive line losses.

use std::path::Path;

use crate::csvio;
use crate::edm::{run_edm, EdmConfig, EventStream};
use crate::error::{ensure, Error, Result};
use crate::model::{DemandPattern, EnergyQuantity, IntervalSeries};
use crate::scalar::Scalar;
use crate::tdm::sample_tdm;

pub const REPORT_HEADER: [&str; 6] = ["label", "points", "peak_w", "peak_pct", "rms_w", "loss_pct"];

/// Spreads each inter-event energy uniformly over its elementary intervals.
pub fn reconstruct_from_events<T: Scalar>(stream: &EventStream<T>) -> DemandPattern<T> {
    let tau = stream.tau_s();
    let mut powers = Vec::with_capacity((stream.horizon_s() / tau) as usize);
    let mut prev = stream.start_s();
    for ev in stream.events() {
        let dur = ev.t_end_s - prev;
        let p = ev.energy_ws / T::secs(dur);
        powers.extend(std::iter::repeat_n(p, (dur / tau) as usize));
        prev = ev.t_end_s;
    }
    DemandPattern::new(tau, stream.start_s(), powers).expect("valid stream reconstructs to a valid pattern")
}

/// Expands fixed-step readings back to `tau_s` resolution.
pub fn reconstruct_from_intervals<T: Scalar>(series: &IntervalSeries<T>, tau_s: i64) -> Result<DemandPattern<T>> {
    ensure!(
        tau_s > 0 && series.step_s() % tau_s == 0,
        Config,
        "step {} s is not a multiple of tau {tau_s} s",
        series.step_s()
    );
    if let Some(d) = series.last_step_partial() {
        ensure!(
            d % tau_s == 0,
            Config,
            "partial step {d} s is not a multiple of tau {tau_s} s"
        );
    }
    let mut powers = Vec::with_capacity((series.horizon_s() / tau_s) as usize);
    for (j, &e) in series.energies_ws().iter().enumerate() {
        let dur = series.duration_of(j);
        let p = e / T::secs(dur);
        powers.extend(std::iter::repeat_n(p, (dur / tau_s) as usize));
    }
    DemandPattern::new(tau_s, series.start_s(), powers)
}

pub fn peak<T: Scalar>(pattern: &DemandPattern<T>) -> T {
    pattern.powers_w().iter().copied().fold(T::neg_infinity(), T::max)
}

fn check_shape<T: Scalar>(a: &DemandPattern<T>, b: &DemandPattern<T>) -> Result<()> {
    ensure!(
        a.tau_s() == b.tau_s() && a.len() == b.len(),
        Domain,
        "shape mismatch: {} x {} s vs {} x {} s",
        a.len(),
        a.tau_s(),
        b.len(),
        b.tau_s()
    );
    Ok(())
}

/// Root-mean-square deviation at elementary resolution.
pub fn rms_distance<T: Scalar>(a: &DemandPattern<T>, b: &DemandPattern<T>) -> Result<T> {
    check_shape(a, b)?;
    let ss = a
        .powers_w()
        .iter()
        .zip(b.powers_w())
        .fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y));
    Ok((ss / T::secs(a.len() as i64)).sqrt())
}

/// Single-phase resistive line at constant voltage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineModel<T> {
    pub resistance_ohm: T,
    pub voltage_v: T,
}

impl<T: Scalar> LineModel<T> {
    pub fn new(resistance_ohm: T, voltage_v: T) -> Result<Self> {
        ensure!(
            resistance_ohm.is_finite() && resistance_ohm > T::zero(),
            Domain,
            "resistance must be positive, got {resistance_ohm}"
        );
        ensure!(
            voltage_v.is_finite() && voltage_v > T::zero(),
            Domain,
            "voltage must be positive, got {voltage_v}"
        );
        Ok(Self {
            resistance_ohm,
            voltage_v,
        })
    }

    /// Out-and-back cable of `length_m` with `ohm_per_m` per conductor.
    pub fn cable(length_m: T, ohm_per_m: T, voltage_v: T) -> Result<Self> {
        Self::new(T::lit(2.0) * length_m * ohm_per_m, voltage_v)
    }
}

impl<T: Scalar> Default for LineModel<T> {
    /// 50 m of 0.0058 ohm/m conductor each way at 230 V.
    fn default() -> Self {
        Self::cable(T::lit(50.0), T::lit(0.0058), T::lit(230.0)).expect("default line model")
    }
}

fn sum_squares<T: Scalar>(p: &DemandPattern<T>) -> T {
    p.powers_w().iter().fold(T::zero(), |acc, &x| acc + x * x)
}

pub fn loss_energy<T: Scalar>(pattern: &DemandPattern<T>, line: &LineModel<T>) -> EnergyQuantity<T> {
    let tau = T::secs(pattern.tau_s());
    let ws = pattern.powers_w().iter().fold(T::zero(), |acc, &p| {
        let i = p / line.voltage_v;
        acc + i * i * line.resistance_ohm * tau
    });
    EnergyQuantity::from_ws(ws).to(crate::model::EnergyUnit::Wh)
}

/// Fraction of the reference's resistive losses seen by `reconstructed`;
/// resistance and voltage cancel.
pub fn loss_ratio<T: Scalar>(reconstructed: &DemandPattern<T>, reference: &DemandPattern<T>) -> Result<T> {
    check_shape(reconstructed, reference)?;
    let den = sum_squares(reference);
    ensure!(
        den > T::zero(),
        Domain,
        "reference pattern has zero losses; ratio undefined"
    );
    Ok(sum_squares(reconstructed) / den)
}

/// One metering representation to compare against the source pattern.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Representation<T> {
    Tdm { step_s: i64 },
    Edm(EdmConfig<T>),
}

impl<T: Scalar> Representation<T> {
    pub fn label(&self) -> String {
        match self {
            Representation::Tdm { step_s } => format!("TDM-{step_s}s"),
            Representation::Edm(c) => format!("EDM-{}:{}", c.delta1_w, c.delta2_ws),
        }
    }
}

/// One row of the comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport<T> {
    pub label: String,
    pub point_count: usize,
    pub peak_w: T,
    pub peak_ratio: T,
    pub rms_distance_w: T,
    pub loss_ratio: T,
    pub loss_wh: T,
    pub reference_loss_wh: T,
    pub reconstruction: DemandPattern<T>,
}

pub fn evaluate<T: Scalar>(
    pattern: &DemandPattern<T>,
    repr: &Representation<T>,
    line: &LineModel<T>,
) -> Result<ComparisonReport<T>> {
    let (points, recon, peak_w) = match repr {
        Representation::Tdm { step_s } => {
            let series = sample_tdm(pattern, *step_s)?;
            let recon = reconstruct_from_intervals(&series, pattern.tau_s())?;
            // Partial trailing steps are left out of the peak unless nothing else exists.
            let full = series.len() - usize::from(series.last_step_partial().is_some());
            let n = if full == 0 { series.len() } else { full };
            let peak_w = (0..n)
                .map(|j| series.energies_ws()[j] / T::secs(series.duration_of(j)))
                .fold(T::neg_infinity(), T::max);
            (series.len(), recon, peak_w)
        }
        Representation::Edm(cfg) => {
            let stream = run_edm(pattern, cfg)?;
            let recon = reconstruct_from_events(&stream);
            let peak_w = peak(&recon);
            (stream.len(), recon, peak_w)
        }
    };
    let ref_peak = peak(pattern);
    let peak_ratio = if ref_peak > T::zero() {
        peak_w / ref_peak
    } else {
        T::one()
    };
    Ok(ComparisonReport {
        label: repr.label(),
        point_count: points,
        peak_w,
        peak_ratio,
        rms_distance_w: rms_distance(&recon, pattern)?,
        loss_ratio: loss_ratio(&recon, pattern)?,
        loss_wh: loss_energy(&recon, line).value,
        reference_loss_wh: loss_energy(pattern, line).value,
        reconstruction: recon,
    })
}

/// TDM rows in the order of `tdm_steps`, then EDM rows in the order of
/// `edm_configs`.
pub fn compare<T: Scalar>(
    pattern: &DemandPattern<T>,
    tdm_steps: &[i64],
    edm_configs: &[EdmConfig<T>],
    line: &LineModel<T>,
) -> Result<Vec<ComparisonReport<T>>> {
    tdm_steps
        .iter()
        .map(|&step_s| Representation::Tdm { step_s })
        .chain(edm_configs.iter().copied().map(Representation::Edm))
        .map(|r| evaluate(pattern, &r, line))
        .collect()
}

fn pct<T: Scalar>(ratio: T) -> String {
    format!("{:.1}", ratio.as_f64() * 100.0)
}

pub fn report_rows<T: Scalar>(reports: &[ComparisonReport<T>]) -> Vec<Vec<String>> {
    reports
        .iter()
        .map(|r| {
            vec![
                r.label.clone(),
                r.point_count.to_string(),
                format!("{:.1}", r.peak_w.as_f64()),
                pct(r.peak_ratio),
                format!("{:.1}", r.rms_distance_w.as_f64()),
                pct(r.loss_ratio),
            ]
        })
        .collect()
}

pub fn write_report_csv<T: Scalar>(reports: &[ComparisonReport<T>], path: impl AsRef<Path>) -> Result<()> {
    csvio::write_file(path.as_ref(), &REPORT_HEADER, report_rows(reports))
}

pub fn write_report<T: Scalar, W: std::io::Write>(reports: &[ComparisonReport<T>], out: W) -> Result<()> {
    csvio::write_to(out, &REPORT_HEADER, report_rows(reports)).map_err(|e| Error::io("<report>", e))
}
