#include "skipcast/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "skipcast/errors.hpp"
#include "skipcast/narx_kernels.hpp"
#include "skipcast/rng.hpp"

namespace skipcast {

namespace {

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

/// Cholesky solve of the symmetric system A x = b. Returns false when a
/// pivot is not safely positive.
bool cholesky_solve(std::vector<double> a, std::vector<double> b, int n,
                    std::vector<double>& x) {
    double max_diag = 0.0;
    for (int i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(a[i * n + i]));
    const double floor = std::max(max_diag, 1.0) * 1e-13;

    for (int j = 0; j < n; ++j) {
        double d = a[j * n + j];
        for (int k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
        if (!(d > floor)) return false;
        const double l = std::sqrt(d);
        a[j * n + j] = l;
        for (int i = j + 1; i < n; ++i) {
            double s = a[i * n + j];
            for (int k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
            a[i * n + j] = s / l;
        }
    }
    // Forward then backward substitution with L and L^T.
    for (int i = 0; i < n; ++i) {
        double s = b[i];
        for (int k = 0; k < i; ++k) s -= a[i * n + k] * b[k];
        b[i] = s / a[i * n + i];
    }
    x.assign(n, 0.0);
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int k = i + 1; k < n; ++k) s -= a[k * n + i] * x[k];
        x[i] = s / a[i * n + i];
    }
    return true;
}

} // namespace

ForecastModel ForecastModel::persistence() {
    ForecastModel m;
    m.kind = ModelKind::persistence;
    m.window_n = 1;
    return m;
}

ForecastModel ForecastModel::seasonal_naive(int season_len) {
    if (season_len < 1) throw std::invalid_argument("season_len must be >= 1");
    ForecastModel m;
    m.kind = ModelKind::seasonal_naive;
    m.season_len = season_len;
    m.window_n = season_len;
    return m;
}

int ForecastModel::required_depth() const {
    switch (kind) {
    case ModelKind::persistence: return 1;
    case ModelKind::seasonal_naive: return season_len;
    case ModelKind::ar: return window_n;
    case ModelKind::narx: return config.delay_taps;
    }
    return 1;
}

double ForecastModel::predict(std::span<const double> history) const {
    if (history.empty()) throw EmptyHistory("predict needs at least one history value");
    const std::size_t len = history.size();
    const std::size_t depth = static_cast<std::size_t>(required_depth());
    if (len < depth) return history[len - 1]; // warm-up fallback

    switch (kind) {
    case ModelKind::persistence:
        return history[len - 1];
    case ModelKind::seasonal_naive:
        return history[len - static_cast<std::size_t>(season_len)];
    case ModelKind::ar: {
        double y = parameters[static_cast<std::size_t>(window_n)]; // intercept
        for (int i = 1; i <= window_n; ++i)
            y += parameters[static_cast<std::size_t>(i - 1)] * history[len - static_cast<std::size_t>(i)];
        return y;
    }
    case ModelKind::narx: {
        const NarxDims dims{config.delay_taps, config.hidden_units};
        const std::size_t n_params = dims.param_count();
        const double mean = parameters[n_params];
        const double stddev = parameters[n_params + 1];
        std::vector<double> input(static_cast<std::size_t>(dims.taps));
        for (int i = 0; i < dims.taps; ++i)
            input[static_cast<std::size_t>(i)] =
                (history[len - depth + static_cast<std::size_t>(i)] - mean) / stddev;
        const double y = narx_forward_one(
            dims, std::span<const double>(parameters.data(), n_params), input.data());
        return y * stddev + mean;
    }
    }
    return history[len - 1];
}

std::vector<double> ForecastModel::predict_closed_loop(std::span<const double> history,
                                                       int horizon) const {
    if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    if (history.empty()) throw EmptyHistory("predict needs at least one history value");
    std::vector<double> working(history.begin(), history.end());
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(horizon));
    for (int i = 0; i < horizon; ++i) {
        const double y = predict(working);
        out.push_back(y);
        working.push_back(y);
    }
    return out;
}

PredictFn as_predict_fn(const ForecastModel& model) {
    return [model](std::span<const double> history) { return model.predict(history); };
}

ForecastModel fit_ar(std::span<const double> history, int window_n) {
    if (window_n < 1) throw std::invalid_argument("window_n must be >= 1");
    const std::size_t len = history.size();
    if (len < 2 * static_cast<std::size_t>(window_n) + 2)
        throw InsufficientData("fit_ar needs at least 2*window_n + 2 samples");
    if (!all_finite(history)) throw std::invalid_argument("history contains non-finite values");

    const int n = window_n + 1; // coefficients + intercept
    std::vector<double> gram(static_cast<std::size_t>(n) * n, 0.0);
    std::vector<double> rhs(static_cast<std::size_t>(n), 0.0);
    std::vector<double> row(static_cast<std::size_t>(n), 0.0);

    for (std::size_t t = static_cast<std::size_t>(window_n); t < len; ++t) {
        for (int i = 0; i < window_n; ++i) row[static_cast<std::size_t>(i)] = history[t - 1 - static_cast<std::size_t>(i)];
        row[static_cast<std::size_t>(window_n)] = 1.0;
        const double target = history[t];
        for (int i = 0; i < n; ++i) {
            rhs[static_cast<std::size_t>(i)] += row[static_cast<std::size_t>(i)] * target;
            for (int j = 0; j < n; ++j)
                gram[static_cast<std::size_t>(i) * n + j] += row[static_cast<std::size_t>(i)] * row[static_cast<std::size_t>(j)];
        }
    }

    std::vector<double> coeffs;
    if (!cholesky_solve(gram, rhs, n, coeffs)) {
        // Singular normal system (constant series and the like): ridge it.
        for (int i = 0; i < n; ++i) gram[static_cast<std::size_t>(i) * n + i] += 1e-8;
        if (!cholesky_solve(gram, rhs, n, coeffs))
            throw InsufficientData("normal system unsolvable even with ridge");
    }

    ForecastModel m;
    m.kind = ModelKind::ar;
    m.window_n = window_n;
    m.parameters = std::move(coeffs);
    return m;
}

ForecastModel train_narx(std::span<const double> targets, const TrainConfig& config) {
    if (config.hidden_units < 1 || config.delay_taps < 1 || config.epochs < 1)
        throw std::invalid_argument("hidden_units, delay_taps and epochs must be >= 1");
    if (!(config.learning_rate > 0.0) || config.l2_lambda < 0.0)
        throw std::invalid_argument("learning_rate must be > 0 and l2_lambda >= 0");
    const std::size_t len = targets.size();
    const std::size_t taps = static_cast<std::size_t>(config.delay_taps);
    if (len < taps + 2) throw InsufficientData("train_narx needs at least delay_taps + 2 samples");
    if (!all_finite(targets)) throw std::invalid_argument("targets contain non-finite values");

    // Standardize on the training targets; a flat series keeps scale 1.
    double mean = 0.0;
    for (double v : targets) mean += v;
    mean /= static_cast<double>(len);
    double var = 0.0;
    for (double v : targets) var += (v - mean) * (v - mean);
    var /= static_cast<double>(len);
    double stddev = std::sqrt(var);
    if (!(stddev > 0.0)) stddev = 1.0;

    std::vector<double> z(len);
    for (std::size_t i = 0; i < len; ++i) z[i] = (targets[i] - mean) / stddev;

    const std::size_t rows = len - taps;
    std::vector<double> inputs(rows * taps);
    std::vector<double> row_targets(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t i = 0; i < taps; ++i) inputs[r * taps + i] = z[r + i];
        row_targets[r] = z[r + taps];
    }

    const NarxDims dims{config.delay_taps, config.hidden_units};
    const std::size_t n_params = dims.param_count();
    const std::size_t w1_count = static_cast<std::size_t>(config.hidden_units) * taps;
    const std::size_t b1_off = w1_count;
    const std::size_t w2_off = b1_off + static_cast<std::size_t>(config.hidden_units);
    const std::size_t b2_off = w2_off + static_cast<std::size_t>(config.hidden_units);

    // Scale-aware init: weights uniform in +-1/sqrt(fan_in), biases zero.
    std::vector<double> params(n_params, 0.0);
    Rng rng(config.seed);
    const double w1_bound = 1.0 / std::sqrt(static_cast<double>(config.delay_taps));
    const double w2_bound = 1.0 / std::sqrt(static_cast<double>(config.hidden_units));
    for (std::size_t k = 0; k < w1_count; ++k) params[k] = rng.uniform(-w1_bound, w1_bound);
    for (std::size_t k = w2_off; k < b2_off; ++k) params[k] = rng.uniform(-w2_bound, w2_bound);

    std::vector<double> grad(n_params);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        narx_grad_blocked(dims, params, inputs, row_targets, grad);
        if (config.l2_lambda > 0.0) {
            for (std::size_t k = 0; k < w1_count; ++k) grad[k] += 2.0 * config.l2_lambda * params[k];
            for (std::size_t k = w2_off; k < b2_off; ++k) grad[k] += 2.0 * config.l2_lambda * params[k];
        }
        bool finite = true;
        for (std::size_t k = 0; k < n_params; ++k) {
            params[k] -= config.learning_rate * grad[k];
            finite = finite && std::isfinite(params[k]);
        }
        if (!finite) throw DivergedTraining("non-finite weight after epoch " + std::to_string(epoch + 1));
    }

    ForecastModel m;
    m.kind = ModelKind::narx;
    m.window_n = config.delay_taps;
    m.config = config;
    m.parameters = std::move(params);
    m.parameters.push_back(mean);
    m.parameters.push_back(stddev);
    return m;
}

ForecastReport evaluate(std::span<const double> predictions, std::span<const double> actuals) {
    if (predictions.size() != actuals.size())
        throw LengthMismatch("predictions and actuals differ in length");
    if (predictions.empty()) throw LengthMismatch("nothing to evaluate");

    const std::size_t n = predictions.size();
    ForecastReport report;

    double sum_sq = 0.0;
    std::vector<double> errors(n);
    for (std::size_t i = 0; i < n; ++i) {
        errors[i] = predictions[i] - actuals[i];
        sum_sq += errors[i] * errors[i];
    }
    report.mse = sum_sq / static_cast<double>(n);

    double mean_p = 0.0, mean_a = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_p += predictions[i];
        mean_a += actuals[i];
    }
    mean_p /= static_cast<double>(n);
    mean_a /= static_cast<double>(n);
    double cov = 0.0, var_p = 0.0, var_a = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dp = predictions[i] - mean_p;
        const double da = actuals[i] - mean_a;
        cov += dp * da;
        var_p += dp * dp;
        var_a += da * da;
    }
    if (var_p > 0.0 && var_a > 0.0) report.regression_r = cov / std::sqrt(var_p * var_a);
    // else: zero-variance input, correlation left unset rather than NaN

    constexpr int n_bins = 20;
    double lo = *std::min_element(errors.begin(), errors.end());
    double hi = *std::max_element(errors.begin(), errors.end());
    if (lo == hi) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double width = (hi - lo) / n_bins;
    report.bin_edges.resize(n_bins + 1);
    for (int b = 0; b <= n_bins; ++b) report.bin_edges[static_cast<std::size_t>(b)] = lo + width * b;
    report.bin_counts.assign(n_bins, 0);
    for (double e : errors) {
        int b = static_cast<int>((e - lo) / width);
        b = std::clamp(b, 0, n_bins - 1);
        ++report.bin_counts[static_cast<std::size_t>(b)];
    }
    return report;
}

ForecastModel build_forecaster(const ForecastSpec& spec, std::span<const double> collected) {
    switch (spec.kind) {
    case ModelKind::persistence: return ForecastModel::persistence();
    case ModelKind::seasonal_naive: return ForecastModel::seasonal_naive(spec.season_len);
    case ModelKind::ar: return fit_ar(collected, spec.window_n);
    case ModelKind::narx: return train_narx(collected, spec.train);
    }
    throw std::invalid_argument("unknown forecaster kind");
}

} // namespace skipcast
