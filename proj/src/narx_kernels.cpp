#include "skipcast/narx_kernels.hpp"

#include <cassert>
#include <cmath>
#include <cstdint>

namespace skipcast {

namespace {

struct ParamView {
    const double* w1; // hidden x taps
    const double* b1; // hidden
    const double* w2; // hidden
    const double* b2; // 1

    ParamView(const NarxDims& dims, const double* p)
        : w1(p),
          b1(p + static_cast<std::size_t>(dims.hidden) * dims.taps),
          w2(b1 + dims.hidden),
          b2(w2 + dims.hidden) {}
};

// Forward one row, writing hidden activations, and accumulate the gradient
// contribution scaled by 2*(yhat - y)/n_rows into grad (same packing as
// params). Returns the squared error of the row.
double row_grad(const NarxDims& dims, const ParamView& p, const double* x, double y,
                double inv_rows, double* hidden_act, double* grad) {
    const int h = dims.hidden;
    const int d = dims.taps;

    double yhat = *p.b2;
    for (int j = 0; j < h; ++j) {
        double a = p.b1[j];
        const double* w_row = p.w1 + static_cast<std::size_t>(j) * d;
        for (int i = 0; i < d; ++i) a += w_row[i] * x[i];
        hidden_act[j] = std::tanh(a);
        yhat += p.w2[j] * hidden_act[j];
    }

    const double err = yhat - y;
    const double dy = 2.0 * err * inv_rows;

    double* g_w1 = grad;
    double* g_b1 = grad + static_cast<std::size_t>(h) * d;
    double* g_w2 = g_b1 + h;
    double* g_b2 = g_w2 + h;

    *g_b2 += dy;
    for (int j = 0; j < h; ++j) {
        const double hj = hidden_act[j];
        g_w2[j] += dy * hj;
        const double da = dy * p.w2[j] * (1.0 - hj * hj);
        g_b1[j] += da;
        double* g_row = g_w1 + static_cast<std::size_t>(j) * d;
        for (int i = 0; i < d; ++i) g_row[i] += da * x[i];
    }
    return err * err;
}

} // namespace

double narx_forward_one(const NarxDims& dims, std::span<const double> params,
                        const double* input_row) {
    assert(params.size() == dims.param_count());
    const ParamView p(dims, params.data());
    double yhat = *p.b2;
    for (int j = 0; j < dims.hidden; ++j) {
        double a = p.b1[j];
        const double* w_row = p.w1 + static_cast<std::size_t>(j) * dims.taps;
        for (int i = 0; i < dims.taps; ++i) a += w_row[i] * input_row[i];
        yhat += p.w2[j] * std::tanh(a);
    }
    return yhat;
}

double narx_mse_serial(const NarxDims& dims, std::span<const double> params,
                       std::span<const double> inputs, std::span<const double> targets) {
    const std::size_t rows = targets.size();
    assert(inputs.size() == rows * static_cast<std::size_t>(dims.taps));
    double sse = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        const double yhat = narx_forward_one(dims, params, inputs.data() + r * dims.taps);
        const double err = yhat - targets[r];
        sse += err * err;
    }
    return sse / static_cast<double>(rows);
}

double narx_grad_serial(const NarxDims& dims, std::span<const double> params,
                        std::span<const double> inputs, std::span<const double> targets,
                        std::span<double> grad_out) {
    const std::size_t rows = targets.size();
    [[maybe_unused]] const std::size_t n_params = dims.param_count();
    assert(params.size() == n_params && grad_out.size() == n_params);
    assert(inputs.size() == rows * static_cast<std::size_t>(dims.taps));

    const ParamView p(dims, params.data());
    std::fill(grad_out.begin(), grad_out.end(), 0.0);
    std::vector<double> hidden_act(static_cast<std::size_t>(dims.hidden));

    const double inv_rows = 1.0 / static_cast<double>(rows);
    double sse = 0.0;
    for (std::size_t r = 0; r < rows; ++r)
        sse += row_grad(dims, p, inputs.data() + r * dims.taps, targets[r], inv_rows,
                        hidden_act.data(), grad_out.data());
    return sse * inv_rows;
}

double narx_grad_blocked(const NarxDims& dims, std::span<const double> params,
                         std::span<const double> inputs, std::span<const double> targets,
                         std::span<double> grad_out) {
    const std::size_t rows = targets.size();
    const std::size_t n_params = dims.param_count();
    assert(params.size() == n_params && grad_out.size() == n_params);
    assert(inputs.size() == rows * static_cast<std::size_t>(dims.taps));

    const ParamView p(dims, params.data());
    const std::size_t n_blocks = (rows + kNarxGradBlock - 1) / kNarxGradBlock;
    std::vector<double> partial_grads(n_blocks * n_params, 0.0);
    std::vector<double> partial_sse(n_blocks, 0.0);
    const double inv_rows = 1.0 / static_cast<double>(rows);

#pragma omp parallel
    {
        std::vector<double> hidden_act(static_cast<std::size_t>(dims.hidden));
#pragma omp for schedule(static)
        for (std::int64_t b = 0; b < static_cast<std::int64_t>(n_blocks); ++b) {
            const std::size_t begin = static_cast<std::size_t>(b) * kNarxGradBlock;
            const std::size_t end = std::min(begin + kNarxGradBlock, rows);
            double* block_grad = partial_grads.data() + static_cast<std::size_t>(b) * n_params;
            double sse = 0.0;
            for (std::size_t r = begin; r < end; ++r)
                sse += row_grad(dims, p, inputs.data() + r * dims.taps, targets[r], inv_rows,
                                hidden_act.data(), block_grad);
            partial_sse[static_cast<std::size_t>(b)] = sse;
        }
    }

    // Combine partials in block order: bit-exact regardless of thread count.
    std::fill(grad_out.begin(), grad_out.end(), 0.0);
    double sse = 0.0;
    for (std::size_t b = 0; b < n_blocks; ++b) {
        const double* block_grad = partial_grads.data() + b * n_params;
        for (std::size_t k = 0; k < n_params; ++k) grad_out[k] += block_grad[k];
        sse += partial_sse[b];
    }
    return sse * inv_rows;
}

} // namespace skipcast
