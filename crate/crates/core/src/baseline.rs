//! Demand-response baselines: X-of-Y initial baselines over prior non-event
//! days, and the additive calibration-window adjustment.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::csvio;
use crate::error::{ensure, Error, Result};
use crate::scalar::Scalar;

pub const HISTORY_HEADER: [&str; 4] = ["day_index", "interval_index", "p_w", "is_event_day"];
pub const PROFILE_HEADER: [&str; 2] = ["interval_index", "p_w"];

/// Per-interval average powers over one day (or any fixed window).
#[derive(Debug, Clone, PartialEq)]
pub struct Profile<T> {
    interval_s: i64,
    powers_w: Vec<T>,
}

impl<T: Scalar> Profile<T> {
    pub fn new(interval_s: i64, powers_w: Vec<T>) -> Result<Self> {
        ensure!(
            interval_s > 0,
            Domain,
            "profile interval must be positive, got {interval_s}"
        );
        ensure!(!powers_w.is_empty(), Domain, "profile must not be empty");
        for (i, &p) in powers_w.iter().enumerate() {
            ensure!(
                p.is_finite() && p >= T::zero(),
                Domain,
                "interval {i}: power must be finite and >= 0, got {p}"
            );
        }
        Ok(Self { interval_s, powers_w })
    }

    pub fn interval_s(&self) -> i64 {
        self.interval_s
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

    pub fn energy_ws(&self) -> T {
        let dt = T::secs(self.interval_s);
        self.powers_w.iter().fold(T::zero(), |acc, &p| acc + p * dt)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let rows = self
            .powers_w
            .iter()
            .enumerate()
            .map(|(i, p)| vec![i.to_string(), p.to_string()]);
        csvio::write_file(path.as_ref(), &PROFILE_HEADER, rows)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DayProfile<T> {
    pub day_index: i64,
    pub powers_w: Vec<T>,
    pub is_event_day: bool,
}

/// Daily history at a common resolution, ordered by day index.
#[derive(Debug, Clone, PartialEq)]
pub struct DailyProfileSet<T> {
    interval_s: i64,
    days: Vec<DayProfile<T>>,
}

impl<T: Scalar> DailyProfileSet<T> {
    pub fn new(interval_s: i64, mut days: Vec<DayProfile<T>>) -> Result<Self> {
        ensure!(interval_s > 0, Domain, "interval must be positive, got {interval_s}");
        ensure!(!days.is_empty(), Data, "history holds no days");
        days.sort_by_key(|d| d.day_index);
        let len = days[0].powers_w.len();
        ensure!(len > 0, Domain, "day {} has no intervals", days[0].day_index);
        for w in days.windows(2) {
            ensure!(
                w[0].day_index != w[1].day_index,
                Domain,
                "day {} appears twice",
                w[0].day_index
            );
        }
        for d in &days {
            ensure!(
                d.powers_w.len() == len,
                Domain,
                "day {} has {} intervals, expected {len}",
                d.day_index,
                d.powers_w.len()
            );
            for (i, &p) in d.powers_w.iter().enumerate() {
                ensure!(
                    p.is_finite() && p >= T::zero(),
                    Domain,
                    "day {} interval {i}: power must be finite and >= 0, got {p}",
                    d.day_index
                );
            }
        }
        Ok(Self { interval_s, days })
    }

    pub fn interval_s(&self) -> i64 {
        self.interval_s
    }

    pub fn days(&self) -> &[DayProfile<T>] {
        &self.days
    }

    pub fn day(&self, day_index: i64) -> Option<&DayProfile<T>> {
        self.days.iter().find(|d| d.day_index == day_index)
    }

    pub fn profile_of(&self, day_index: i64) -> Option<Profile<T>> {
        self.day(day_index).map(|d| Profile {
            interval_s: self.interval_s,
            powers_w: d.powers_w.clone(),
        })
    }

    /// Rows may come in any order but every day must list intervals
    /// `0..n` exactly once and carry a consistent event flag.
    pub fn read_csv(path: impl AsRef<Path>, interval_s: i64) -> Result<Self> {
        let path = path.as_ref();
        let rows = csvio::read_file(path, &HISTORY_HEADER)?;
        let mut by_day: BTreeMap<i64, (bool, BTreeMap<usize, T>)> = BTreeMap::new();
        for row in &rows {
            let day: i64 = row.parse(0, "day_index")?;
            let idx: usize = row.parse(1, "interval_index")?;
            let p: T = row.parse(2, "p_w")?;
            let flag = match row.raw(3).trim() {
                "0" | "false" => false,
                "1" | "true" => true,
                other => return Err(row.error(format!("is_event_day must be 0 or 1, got `{other}`"))),
            };
            let entry = by_day.entry(day).or_insert_with(|| (flag, BTreeMap::new()));
            if entry.0 != flag {
                return Err(row.error(format!("day {day} has inconsistent is_event_day")));
            }
            if entry.1.insert(idx, p).is_some() {
                return Err(row.error(format!("day {day} interval {idx} repeated")));
            }
        }
        let mut days = Vec::with_capacity(by_day.len());
        for (day_index, (is_event_day, intervals)) in by_day {
            let n = intervals.len();
            if intervals.keys().next_back() != Some(&(n - 1)) {
                return Err(Error::Format(format!(
                    "{}: day {day_index} intervals are not contiguous from 0",
                    path.display()
                )));
            }
            days.push(DayProfile {
                day_index,
                powers_w: intervals.into_values().collect(),
                is_event_day,
            });
        }
        Self::new(interval_s, days).map_err(|e| match e {
            Error::Domain(m) => Error::Format(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaselineMode {
    HighXofY,
    LowXofY,
    MidXofY,
}

impl fmt::Display for BaselineMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BaselineMode::HighXofY => "high",
            BaselineMode::LowXofY => "low",
            BaselineMode::MidXofY => "mid",
        })
    }
}

impl FromStr for BaselineMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "high" | "highxofy" => Ok(BaselineMode::HighXofY),
            "low" | "lowxofy" => Ok(BaselineMode::LowXofY),
            "mid" | "midxofy" => Ok(BaselineMode::MidXofY),
            _ => Err(format!("unknown baseline mode `{s}` (expected high, low or mid)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineConfig<T> {
    pub mode: BaselineMode,
    pub x: usize,
    pub y: usize,
    pub calibration_window_s: i64,
    pub adjustment_floor_w: T,
}

impl<T: Scalar> BaselineConfig<T> {
    /// Two-hour calibration window, adjustment floored at zero.
    pub fn new(mode: BaselineMode, x: usize, y: usize) -> Result<Self> {
        let cfg = Self {
            mode,
            x,
            y,
            calibration_window_s: 7200,
            adjustment_floor_w: T::zero(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(
            self.x >= 1 && self.x <= self.y,
            Config,
            "need 1 <= x <= y, got x = {}, y = {}",
            self.x,
            self.y
        );
        ensure!(
            self.calibration_window_s > 0,
            Config,
            "calibration window must be positive, got {}",
            self.calibration_window_s
        );
        Ok(())
    }
}

/// Index range (into the energy-ascending ranking of `y` days) that `mode`
/// selects. The middle window rounds toward higher energy.
fn selection(mode: BaselineMode, x: usize, y: usize) -> std::ops::Range<usize> {
    let start = match mode {
        BaselineMode::HighXofY => y - x,
        BaselineMode::LowXofY => 0,
        BaselineMode::MidXofY => (y - x).div_ceil(2),
    };
    start..start + x
}

/// Interval-wise mean over the days picked from the `y` most recent
/// non-event days before `event_day`.
pub fn initial_baseline<T: Scalar>(
    history: &DailyProfileSet<T>,
    config: &BaselineConfig<T>,
    event_day: i64,
) -> Result<Profile<T>> {
    config.validate()?;
    let mut window: Vec<&DayProfile<T>> = history
        .days()
        .iter()
        .rev()
        .filter(|d| d.day_index < event_day && !d.is_event_day)
        .take(config.y)
        .collect();
    ensure!(
        window.len() == config.y,
        Data,
        "only {} non-event days before day {event_day}, need {}",
        window.len(),
        config.y
    );
    let energy = |d: &DayProfile<T>| d.powers_w.iter().fold(T::zero(), |acc, &p| acc + p);
    // Ascending energy; on ties the more recent day ranks higher.
    window.sort_by(|a, b| {
        energy(a)
            .partial_cmp(&energy(b))
            .expect("finite energies")
            .then(a.day_index.cmp(&b.day_index))
    });
    let picked = &window[selection(config.mode, config.x, config.y)];
    let n = picked[0].powers_w.len();
    let count = T::secs(picked.len() as i64);
    let powers = (0..n)
        .map(|i| picked.iter().fold(T::zero(), |acc, d| acc + d.powers_w[i]) / count)
        .collect();
    Profile::new(history.interval_s(), powers)
}

/// Shifts `initial` up by the mean excess of `observed` over it in the
/// calibration window ending at `notification_t_s`, floored at the
/// configured minimum. Intervals before the notification are unchanged.
pub fn adjusted_baseline<T: Scalar>(
    initial: &Profile<T>,
    observed: &Profile<T>,
    notification_t_s: i64,
    config: &BaselineConfig<T>,
) -> Result<Profile<T>> {
    config.validate()?;
    let dt = initial.interval_s();
    ensure!(
        observed.interval_s() == dt && observed.len() == initial.len(),
        Data,
        "observed and initial profiles differ in shape"
    );
    ensure!(
        notification_t_s % dt == 0 && config.calibration_window_s % dt == 0,
        Data,
        "notification {notification_t_s} s and window {} s must lie on the {dt} s grid",
        config.calibration_window_s
    );
    let end = notification_t_s / dt;
    let begin = end - config.calibration_window_s / dt;
    ensure!(
        begin >= 0 && end as usize <= initial.len(),
        Data,
        "calibration window [{}, {notification_t_s}) s is outside the profile [0, {}) s",
        notification_t_s - config.calibration_window_s,
        dt * initial.len() as i64
    );
    let (begin, end) = (begin as usize, end as usize);
    let diff = (begin..end).fold(T::zero(), |acc, i| acc + observed.powers_w()[i] - initial.powers_w()[i]);
    let mean = diff / T::secs((end - begin) as i64);
    let adjustment = mean.max(config.adjustment_floor_w);
    let powers = initial
        .powers_w()
        .iter()
        .enumerate()
        .map(|(i, &p)| if i >= end { p + adjustment } else { p })
        .collect();
    Profile::new(dt, powers)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn history(levels: &[f64]) -> DailyProfileSet<f64> {
        let days = levels
            .iter()
            .enumerate()
            .map(|(i, &w)| DayProfile {
                day_index: i as i64,
                powers_w: vec![w; 24],
                is_event_day: false,
            })
            .collect();
        DailyProfileSet::new(3600, days).unwrap()
    }

    fn flat(profile: &Profile<f64>) -> f64 {
        let v = profile.powers_w()[0];
        assert!(profile.powers_w().iter().all(|&p| p == v));
        v
    }

    #[test]
    fn high_and_low_two_of_five() {
        let h = history(&[10.0, 30.0, 20.0, 50.0, 40.0]);
        let high = BaselineConfig::new(BaselineMode::HighXofY, 2, 5).unwrap();
        let low = BaselineConfig::new(BaselineMode::LowXofY, 2, 5).unwrap();
        assert_eq!(flat(&initial_baseline(&h, &high, 5).unwrap()), 45.0);
        assert_eq!(flat(&initial_baseline(&h, &low, 5).unwrap()), 15.0);
    }

    #[test]
    fn mid_rounds_toward_higher_energy() {
        let h = history(&[10.0, 30.0, 20.0, 50.0, 40.0]);
        // Ranked 10,20,30,40,50: two middle days round up to 30 and 40.
        let mid = BaselineConfig::new(BaselineMode::MidXofY, 2, 5).unwrap();
        assert_eq!(flat(&initial_baseline(&h, &mid, 5).unwrap()), 35.0);
        let mid3 = BaselineConfig::new(BaselineMode::MidXofY, 3, 5).unwrap();
        assert_eq!(flat(&initial_baseline(&h, &mid3, 5).unwrap()), 30.0);
    }

    #[test]
    fn x_equal_y_is_plain_mean() {
        let h = history(&[10.0, 30.0, 20.0, 50.0, 40.0]);
        for mode in [BaselineMode::HighXofY, BaselineMode::LowXofY, BaselineMode::MidXofY] {
            let cfg = BaselineConfig::new(mode, 5, 5).unwrap();
            assert_eq!(flat(&initial_baseline(&h, &cfg, 5).unwrap()), 30.0);
        }
    }

    #[test]
    fn uses_most_recent_non_event_days() {
        let mut h = history(&[100.0, 10.0, 999.0, 20.0, 30.0]);
        let mut days = h.days().to_vec();
        days[2].is_event_day = true;
        h = DailyProfileSet::new(3600, days).unwrap();
        let cfg = BaselineConfig::new(BaselineMode::HighXofY, 1, 3).unwrap();
        // Window is days 4, 3, 1 (day 2 is an event day, day 0 too old).
        assert_eq!(flat(&initial_baseline(&h, &cfg, 5).unwrap()), 30.0);
        // Days at or after the event date are never used.
        assert_eq!(flat(&initial_baseline(&h, &cfg, 4).unwrap()), 100.0);
    }

    #[test]
    fn insufficient_history() {
        let h = history(&[1.0, 2.0]);
        let cfg = BaselineConfig::new(BaselineMode::HighXofY, 1, 3).unwrap();
        assert!(matches!(initial_baseline(&h, &cfg, 2), Err(Error::Data(_))));
    }

    #[test]
    fn config_bounds() {
        assert!(BaselineConfig::<f64>::new(BaselineMode::HighXofY, 3, 2).is_err());
        assert!(BaselineConfig::<f64>::new(BaselineMode::HighXofY, 0, 2).is_err());
    }

    #[test]
    fn adjustment_cases() {
        let cfg = BaselineConfig::new(BaselineMode::HighXofY, 1, 1).unwrap();
        let init = Profile::new(3600, vec![100.0; 24]).unwrap();
        let same = adjusted_baseline(&init, &init, 10 * 3600, &cfg).unwrap();
        assert_eq!(same, init);

        let up = Profile::new(3600, vec![150.0; 24]).unwrap();
        let adj = adjusted_baseline(&init, &up, 10 * 3600, &cfg).unwrap();
        assert!(adj.powers_w()[..10].iter().all(|&p| p == 100.0));
        assert!(adj.powers_w()[10..].iter().all(|&p| p == 150.0));

        let down = Profile::new(3600, vec![80.0; 24]).unwrap();
        assert_eq!(adjusted_baseline(&init, &down, 10 * 3600, &cfg).unwrap(), init);
    }

    #[test]
    fn adjustment_uses_only_the_window() {
        let cfg = BaselineConfig::new(BaselineMode::HighXofY, 1, 1).unwrap();
        let init = Profile::new(1800, vec![100.0; 8]).unwrap();
        // Window for notification at 3 h covers intervals 2..6.
        let obs = Profile::new(1800, vec![0.0, 0.0, 110.0, 120.0, 130.0, 140.0, 0.0, 0.0]).unwrap();
        let adj = adjusted_baseline(&init, &obs, 3 * 3600, &cfg).unwrap();
        assert_eq!(
            adj.powers_w(),
            &[100.0, 100.0, 100.0, 100.0, 100.0, 100.0, 125.0, 125.0]
        );
    }

    #[test]
    fn window_out_of_range() {
        let cfg = BaselineConfig::new(BaselineMode::HighXofY, 1, 1).unwrap();
        let init = Profile::new(3600, vec![100.0; 24]).unwrap();
        assert!(matches!(
            adjusted_baseline(&init, &init, 3600, &cfg),
            Err(Error::Data(_))
        ));
        assert!(matches!(
            adjusted_baseline(&init, &init, 25 * 3600, &cfg),
            Err(Error::Data(_))
        ));
        assert!(matches!(
            adjusted_baseline(&init, &init, 5000, &cfg),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn history_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.csv");
        std::fs::write(
            &path,
            "day_index,interval_index,p_w,is_event_day\n0,1,2,0\n0,0,1,0\n1,0,5,1\n1,1,6,1\n",
        )
        .unwrap();
        let h = DailyProfileSet::<f64>::read_csv(&path, 1800).unwrap();
        assert_eq!(h.days()[0].powers_w, vec![1.0, 2.0]);
        assert!(h.days()[1].is_event_day);
        std::fs::write(&path, "day_index,interval_index,p_w,is_event_day\n0,0,1,0\n0,2,1,0\n").unwrap();
        assert!(DailyProfileSet::<f64>::read_csv(&path, 1800).is_err());
        std::fs::write(&path, "day_index,interval_index,p_w,is_event_day\n0,0,1,0\n0,1,1,1\n").unwrap();
        assert!(matches!(
            DailyProfileSet::<f64>::read_csv(&path, 1800),
            Err(Error::Parse { line: 3, .. })
        ));
    }
}
