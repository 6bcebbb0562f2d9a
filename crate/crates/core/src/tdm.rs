//! Timer-driven (interval) metering.

use std::path::Path;

use crate::csvio;
use crate::error::{ensure, Error, Result};
use crate::model::{DemandPattern, IntervalSeries};
use crate::scalar::Scalar;

pub const INTERVAL_HEADER: [&str; 3] = ["t_end_s", "energy_ws", "partial"];

/// Aggregates the pattern into `step_s` readings. A trailing step shorter
/// than `step_s` is kept and flagged.
pub fn sample_tdm<T: Scalar>(pattern: &DemandPattern<T>, step_s: i64) -> Result<IntervalSeries<T>> {
    let tau = pattern.tau_s();
    ensure!(
        step_s > 0 && step_s % tau == 0,
        Config,
        "step {step_s} s must be a positive multiple of tau {tau} s"
    );
    let per_step = (step_s / tau) as usize;
    let tau_t = T::secs(tau);
    let energies: Vec<T> = pattern
        .powers_w()
        .chunks(per_step)
        .map(|c| c.iter().fold(T::zero(), |acc, &p| acc + p * tau_t))
        .collect();
    let rem = pattern.len() % per_step;
    let partial = (rem != 0).then(|| rem as i64 * tau);
    IntervalSeries::new(step_s, pattern.start_s(), energies, partial)
}

/// Average power per step; the partial step is divided by its true duration.
pub fn average_powers<T: Scalar>(series: &IntervalSeries<T>) -> DemandPattern<T> {
    let powers = series
        .energies_ws()
        .iter()
        .enumerate()
        .map(|(j, &e)| e / T::secs(series.duration_of(j)))
        .collect();
    DemandPattern::new(series.step_s(), series.start_s(), powers).expect("series invariants imply a valid pattern")
}

impl<T: Scalar> IntervalSeries<T> {
    /// Reads the interval CSV. The step is taken from `step_s` when given,
    /// otherwise from the first row (which must then be a full step).
    pub fn read_csv(path: impl AsRef<Path>, start_s: i64, step_s: Option<i64>) -> Result<Self> {
        let path = path.as_ref();
        let src = path.display().to_string();
        let rows = csvio::read_file(path, &INTERVAL_HEADER)?;
        ensure!(!rows.is_empty(), Format, "{src}: no interval rows");
        let mut ends = Vec::with_capacity(rows.len());
        let mut energies = Vec::with_capacity(rows.len());
        let mut flags = Vec::with_capacity(rows.len());
        for row in &rows {
            ends.push(row.parse::<i64>(0, "t_end_s")?);
            energies.push(row.parse::<T>(1, "energy_ws")?);
            let flag = match row.raw(2).trim() {
                "0" => false,
                "1" => true,
                other => return Err(row.error(format!("partial must be 0 or 1, got `{other}`"))),
            };
            flags.push(flag);
        }
        let step = match step_s {
            Some(s) => s,
            None if !flags[0] => ends[0] - start_s,
            None => {
                return Err(Error::Format(format!(
                    "{src}: step cannot be inferred from a partial first row"
                )))
            }
        };
        ensure!(step > 0, Format, "{src}: first row ends at or before the start");
        let n = rows.len();
        for (j, row) in rows.iter().enumerate() {
            if flags[j] && j + 1 != n {
                return Err(row.error("only the last row may be partial"));
            }
            let expected = start_s + step * (j as i64 + 1);
            if !flags[j] && ends[j] != expected {
                return Err(row.error(format!("expected t_end_s {expected}, found {}", ends[j])));
            }
        }
        let partial = if flags[n - 1] {
            let d = ends[n - 1] - (start_s + step * (n as i64 - 1));
            Some(d)
        } else {
            None
        };
        Self::new(step, start_s, energies, partial).map_err(|e| Error::Format(format!("{src}: {e}")))
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let rows = (0..self.len()).map(|j| {
            vec![
                self.end_of(j).to_string(),
                self.energies_ws()[j].to_string(),
                if self.is_partial(j) { "1" } else { "0" }.to_string(),
            ]
        });
        csvio::write_file(path.as_ref(), &INTERVAL_HEADER, rows)
    }
}
