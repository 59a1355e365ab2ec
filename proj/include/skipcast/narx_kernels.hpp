#ifndef SKIPCAST_NARX_KERNELS_HPP
#define SKIPCAST_NARX_KERNELS_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace skipcast {

/// Shape of the delay-line network: `taps` lagged inputs feed one tanh
/// hidden layer of `hidden` units and a linear output unit.
struct NarxDims {
    int taps = 24;
    int hidden = 50;

    /// Flat parameter count for the packing below.
    std::size_t param_count() const {
        return static_cast<std::size_t>(hidden) * taps + 2 * static_cast<std::size_t>(hidden) + 1;
    }
};

// Flat parameter packing used throughout:
//   [ W1 (hidden x taps, row-major) | b1 (hidden) | w2 (hidden) | b2 ]

/// Output of the network for one input row of `dims.taps` values.
double narx_forward_one(const NarxDims& dims, std::span<const double> params,
                        const double* input_row);

/// Mean squared error of params over all rows (inputs row-major R x taps,
/// targets length R). Serial reference path.
double narx_mse_serial(const NarxDims& dims, std::span<const double> params,
                       std::span<const double> inputs, std::span<const double> targets);

/// Gradient of the mean squared error w.r.t. every parameter, plus the MSE
/// itself. Serial reference implementation: plain row-by-row accumulation.
double narx_grad_serial(const NarxDims& dims, std::span<const double> params,
                        std::span<const double> inputs, std::span<const double> targets,
                        std::span<double> grad_out);

/// Same gradient computed over fixed-size row blocks. Blocks run in
/// parallel (OpenMP) into private partial buffers and are then combined in
/// block order, so the result is bit-identical for any thread count.
/// This is the production path used by training.
double narx_grad_blocked(const NarxDims& dims, std::span<const double> params,
                         std::span<const double> inputs, std::span<const double> targets,
                         std::span<double> grad_out);

/// Row-block size of narx_grad_blocked; fixed so results never depend on
/// the execution environment.
inline constexpr std::size_t kNarxGradBlock = 64;

} // namespace skipcast

#endif
