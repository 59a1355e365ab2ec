#ifndef SKIPCAST_SIM_HPP
#define SKIPCAST_SIM_HPP

#include <cstdint>
#include <vector>

#include "skipcast/forecast.hpp"
#include "skipcast/protocol.hpp"
#include "skipcast/trace.hpp"

namespace skipcast {

/// Per-bit and per-round energy rates, dimensionless units. Defaults keep
/// transmission dominant, the regime the scheme targets; all overridable.
struct EnergyModel {
    double tx_per_bit = 1.0;
    double rx_per_bit = 1.0;
    double proc_per_round = 8.0;
    double sense_per_round = 4.0;
};

/// Cumulative energy, scheme vs. the classical send-everything baseline.
/// Baseline proc covers processing + sensing for every round; baseline tx
/// is one full-value transmission per round (baseline_value_bit_cost).
struct EnergyLedger {
    double sensor_tx = 0.0;
    double sensor_rx = 0.0;
    double sensor_proc = 0.0;
    double sensor_sense = 0.0;
    double baseline_tx = 0.0;
    double baseline_rx = 0.0;
    double baseline_proc = 0.0;
};

/// One simulated round as logged to the per-round CSV.
struct RoundLogEntry {
    std::int64_t t = 0;
    StoreSource source = StoreSource::silent_accepted;
    double e = 0.0;
    double m = 0.0;
    double s = 0.0;
    bool replied = false;
    int bits_tx = 0;
    int bits_rx = 0;
};

/// Full experiment configuration.
struct SimConfig {
    double alpha = 1.0;
    std::int64_t tr1 = 3;
    std::int64_t tr2 = 7;
    std::int64_t train_len = 250;
    std::int64_t horizon = 150;
    ForecastSpec forecaster;
    QuantSpec quant;
    EnergyModel energy;
    std::uint64_t seed = 1;

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Savings ratios, baseline over scheme. When the scheme side is zero the
/// ratio is reported against one contact's worth of energy and flagged.
struct ReductionSummary {
    double tx_ratio = 1.0;
    double proc_ratio = 1.0;
    bool tx_all_silent = false;
    bool proc_all_silent = false;
};

struct SimReport {
    std::int64_t rounds = 0;
    std::int64_t contacts = 0;
    std::int64_t skips = 0;
    std::int64_t replies = 0;
    std::int64_t silent_accepted = 0;
    double max_abs_error_contacted = 0.0;
    std::vector<StoredValue> stored_series;
    std::vector<RoundLogEntry> round_log;
    EnergyLedger energy;
    ReductionSummary reductions;
    ForecastReport forecast_report;
};

struct TrainingPhase {
    std::vector<double> collected;
    EnergyLedger ledger;
};

/// Classical collection rounds: every round requests with E = 0 and the
/// configured alpha, so any measurement outside [-alpha, alpha] comes back
/// in full. collected[t-1] holds the stored S_t (measurement after wire
/// quantization, or 0 on silence). Throws TraceTooShort.
TrainingPhase run_training_phase(const TraceSeries& trace, std::int64_t train_len, double alpha,
                                 const QuantSpec& quant, const EnergyModel& energy);

/// The managed phase: rounds train_len+1 .. train_len+horizon. Skipped
/// rounds are filled with closed-loop predictions at zero sensor cost;
/// contacted rounds run the request/reply exchange against the trace and
/// update the scheduler. The baseline accumulators charge a full classical
/// round every round. Throws TraceTooShort, EmptyHistory, ForecastDiverged.
SimReport run_prediction_phase(const TraceSeries& trace, const PredictFn& predict,
                               const SimConfig& cfg, std::vector<double> collected);

/// Baseline/scheme ratios; epsilon-guarded per ReductionSummary.
ReductionSummary compute_reductions(const EnergyLedger& ledger, const EnergyModel& energy,
                                    const QuantSpec& quant);

/// Training phase, forecaster fit, closed-loop quality evaluation, then the
/// managed phase. Deterministic given cfg.seed (a forecaster train seed of
/// 0 inherits cfg.seed).
SimReport run_experiment(const TraceSeries& trace, const SimConfig& cfg);

} // namespace skipcast

#endif
