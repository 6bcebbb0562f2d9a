//! Event-driven and interval energy metering, piecewise-constant
//! reconstruction metrics, demand-response baselines and duration-of-use
//! tariff evaluation.
//!
//! All numeric types are generic over [`Scalar`] (`f32` or `f64`). The
//! `*F64` / `*F32` aliases below fix the scalar for the common cases.

pub mod baseline;
mod csvio;
pub mod dou;
pub mod edm;
pub mod error;
pub mod metrics;
pub mod model;
pub mod scalar;
pub mod synth;
pub mod tdm;

pub use baseline::{
    adjusted_baseline, initial_baseline, BaselineConfig, BaselineMode, DailyProfileSet, DayProfile, Profile,
};
pub use dou::{
    apply_penalty, area_under_limits, duration_curve, excess_energy, DouEvaluation, DouLimitSchedule, DurationCurve,
    Penalty, SegmentExcess,
};
pub use edm::{no_event_envelope, run_edm, EdmConfig, EdmMeter, EdmState, Envelope, EventStream, MeterEvent, Triggers};
pub use error::{Error, Result};
pub use metrics::{
    compare, loss_energy, loss_ratio, peak, reconstruct_from_events, reconstruct_from_intervals, rms_distance,
    ComparisonReport, LineModel, Representation,
};
pub use model::{
    read_pattern_csv, total_energy, write_pattern_csv, DemandPattern, EnergyQuantity, EnergyUnit, IntervalSeries,
};
pub use scalar::Scalar;
pub use synth::{generate, reference_day, reference_day_spec, LoadSpec, Pulse, PulseShape};
pub use tdm::{average_powers, sample_tdm};

pub type DemandPatternF64 = DemandPattern<f64>;
pub type DemandPatternF32 = DemandPattern<f32>;
pub type IntervalSeriesF64 = IntervalSeries<f64>;
pub type IntervalSeriesF32 = IntervalSeries<f32>;
pub type EnergyQuantityF64 = EnergyQuantity<f64>;
pub type EdmConfigF64 = EdmConfig<f64>;
pub type EdmConfigF32 = EdmConfig<f32>;
pub type EdmMeterF64 = EdmMeter<f64>;
pub type EdmMeterF32 = EdmMeter<f32>;
pub type EventStreamF64 = EventStream<f64>;
pub type EventStreamF32 = EventStream<f32>;
pub type MeterEventF64 = MeterEvent<f64>;
pub type LineModelF64 = LineModel<f64>;
pub type ComparisonReportF64 = ComparisonReport<f64>;
pub type DurationCurveF64 = DurationCurve<f64>;
pub type DouLimitScheduleF64 = DouLimitSchedule<f64>;
pub type DouEvaluationF64 = DouEvaluation<f64>;
pub type BaselineConfigF64 = BaselineConfig<f64>;
pub type DailyProfileSetF64 = DailyProfileSet<f64>;
pub type ProfileF64 = Profile<f64>;
