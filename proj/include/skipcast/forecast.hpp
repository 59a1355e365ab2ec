#ifndef SKIPCAST_FORECAST_HPP
#define SKIPCAST_FORECAST_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace skipcast {

enum class ModelKind { persistence, seasonal_naive, ar, narx };

/// Training knobs for the delay-line network. seed = 0 means "inherit the
/// run seed" when the model is built through run_experiment.
struct TrainConfig {
    int hidden_units = 50;
    int delay_taps = 24;
    int epochs = 1000;
    double learning_rate = 0.05;
    double l2_lambda = 1e-4;
    std::uint64_t seed = 1;
};

/// One-step-ahead predictor behind a single interface.
///
/// parameters layout by kind:
///   persistence:    empty
///   seasonal_naive: empty
///   ar:             [a_1 .. a_n, intercept], prediction =
///                   intercept + sum_i a_i * history[len - i]
///   narx:           [W1 | b1 | w2 | b2 | mean | std] where the leading
///                   block matches the narx_kernels packing and mean/std
///                   are the training-target standardization constants.
struct ForecastModel {
    ModelKind kind = ModelKind::persistence;
    int window_n = 1;
    int season_len = 1;
    TrainConfig config;
    std::vector<double> parameters;

    static ForecastModel persistence();
    static ForecastModel seasonal_naive(int season_len);

    /// History depth below which predict falls back to persistence.
    int required_depth() const;

    /// One-step-ahead forecast from the most recent history values. With
    /// history shorter than required_depth the last value is returned
    /// (warm-up fallback). Throws EmptyHistory on empty input.
    double predict(std::span<const double> history) const;

    /// Multi-step forecast: each prediction is appended to a working copy
    /// of the history before the next one (feedback connection).
    std::vector<double> predict_closed_loop(std::span<const double> history, int horizon) const;
};

using PredictFn = std::function<double(std::span<const double>)>;

/// Wrap a model as a plain prediction callback (used by the simulator and
/// handy for injecting test doubles).
PredictFn as_predict_fn(const ForecastModel& model);

/// Least-squares AR(window_n) fit with intercept, minimizing one-step-ahead
/// squared error over history. A singular normal system (e.g. a constant
/// series) is re-solved with 1e-8 added to the diagonal.
/// Throws InsufficientData when len(history) < 2*window_n + 2.
ForecastModel fit_ar(std::span<const double> history, int window_n);

/// Train the delay-line network: targets are standardized, the net maps
/// each run of delay_taps values to the next one, and full-batch gradient
/// descent with L2 penalty runs for exactly config.epochs epochs.
/// Deterministic given config.seed.
/// Throws InsufficientData (len < delay_taps + 2) and DivergedTraining
/// (any parameter became non-finite).
ForecastModel train_narx(std::span<const double> targets, const TrainConfig& config);

/// Prediction-quality metrics over paired series.
struct ForecastReport {
    double mse = 0.0;
    /// Pearson correlation of prediction vs. target; unset when either
    /// side has zero variance.
    std::optional<double> regression_r;
    std::vector<double> bin_edges;        // 21 edges
    std::vector<std::int64_t> bin_counts; // 20 bins over (prediction - actual)
};

/// MSE, regression correlation and a 20-bin error histogram spanning the
/// observed error range. Throws LengthMismatch.
ForecastReport evaluate(std::span<const double> predictions, std::span<const double> actuals);

/// Which forecaster an experiment uses and how to build it.
struct ForecastSpec {
    ModelKind kind = ModelKind::narx;
    int window_n = 8;   // ar order
    int season_len = 24;
    TrainConfig train;
};

/// Construct/fit the configured forecaster from collected history.
ForecastModel build_forecaster(const ForecastSpec& spec, std::span<const double> collected);

} // namespace skipcast

#endif
