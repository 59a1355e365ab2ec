#ifndef SKIPCAST_RMA_HPP
#define SKIPCAST_RMA_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "skipcast/forecast.hpp"
#include "skipcast/protocol.hpp"

namespace skipcast {

/// Scheduler phase, named by growth behavior: classical contacts every
/// round, fast doubles the skip count, linear increments it.
enum class RmaPhase { classical, fast, linear };

/// Immutable scheduler state: c counts consecutive non-replied requests,
/// q is how many rounds to skip before the next request. The phase always
/// matches the c brackets (c < tr1, tr1 <= c < tr2, c >= tr2).
struct RmaState {
    std::int64_t c = 0;
    std::int64_t q = 0;
    RmaPhase phase = RmaPhase::classical;
    std::int64_t tr1 = 3;
    std::int64_t tr2 = 7;
};

RmaPhase rma_phase_for(std::int64_t c, std::int64_t tr1, std::int64_t tr2);

/// Validated starting state (c=0, q=0, classical).
/// Throws ConfigError unless 1 <= tr1 < tr2.
RmaState rma_initial(std::int64_t tr1, std::int64_t tr2);

/// One contact outcome.
///   silence: c+1, then q = 0 in classical, q = max(1, 2q) in fast,
///            q = q+1 in linear.
///   reply:   one backward phase - linear drops to fast (c = tr1, q = 1),
///            fast and classical drop to classical (c = 0, q = 0).
RmaState rma_update(const RmaState& state, bool replied);

/// Replay rma_update over a contact-outcome sequence (true = replied) and
/// return the 1-based round index of each contact. Contact i+1 happens
/// q rounds after contact i's update, i.e. at round r_i + q + 1.
std::vector<std::int64_t> rma_schedule(std::int64_t tr1, std::int64_t tr2,
                                       const std::vector<bool>& outcomes);

/// All-silent contact rounds within [1, horizon]; what the schedule looks
/// like under perfect prediction.
std::vector<std::int64_t> rma_contacts(std::int64_t tr1, std::int64_t tr2, std::int64_t horizon);

/// Produce `count` stored values for rounds from_t .. from_t+count-1, each
/// predicted closed-loop from the history so far (earlier fills included)
/// and tagged skipped_fill. Throws EmptyHistory when count > 0 and the
/// history is empty.
std::vector<StoredValue> fill_skips(std::span<const StoredValue> bs_history,
                                    const ForecastModel& model, std::int64_t from_t,
                                    std::int64_t count);

/// Same, over a plain value history and an arbitrary predictor.
std::vector<StoredValue> fill_skips_values(std::span<const double> history_values,
                                           const PredictFn& predict, std::int64_t from_t,
                                           std::int64_t count);

} // namespace skipcast

#endif
