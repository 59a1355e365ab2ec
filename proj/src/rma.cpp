#include "skipcast/rma.hpp"

#include <algorithm>

#include "skipcast/errors.hpp"

namespace skipcast {

RmaPhase rma_phase_for(std::int64_t c, std::int64_t tr1, std::int64_t tr2) {
    if (c < tr1) return RmaPhase::classical;
    if (c < tr2) return RmaPhase::fast;
    return RmaPhase::linear;
}

RmaState rma_initial(std::int64_t tr1, std::int64_t tr2) {
    if (tr1 < 1) throw ConfigError("tr1", "must be >= 1");
    if (tr1 >= tr2) throw ConfigError("tr1", "must be < tr2");
    return RmaState{0, 0, RmaPhase::classical, tr1, tr2};
}

RmaState rma_update(const RmaState& state, bool replied) {
    RmaState next = state;
    if (!replied) {
        next.c = state.c + 1;
        switch (rma_phase_for(next.c, state.tr1, state.tr2)) {
        case RmaPhase::classical: next.q = 0; break;
        case RmaPhase::fast: next.q = std::max<std::int64_t>(1, 2 * state.q); break;
        case RmaPhase::linear: next.q = state.q + 1; break;
        }
    } else {
        // One backward phase per received variance.
        switch (state.phase) {
        case RmaPhase::linear:
            next.c = state.tr1;
            next.q = 1;
            break;
        case RmaPhase::fast:
        case RmaPhase::classical:
            next.c = 0;
            next.q = 0;
            break;
        }
    }
    next.phase = rma_phase_for(next.c, state.tr1, state.tr2);
    return next;
}

std::vector<std::int64_t> rma_schedule(std::int64_t tr1, std::int64_t tr2,
                                       const std::vector<bool>& outcomes) {
    RmaState state = rma_initial(tr1, tr2);
    std::vector<std::int64_t> contacts;
    contacts.reserve(outcomes.size());
    std::int64_t round = 1;
    for (const bool replied : outcomes) {
        contacts.push_back(round);
        state = rma_update(state, replied);
        round += state.q + 1;
    }
    return contacts;
}

std::vector<std::int64_t> rma_contacts(std::int64_t tr1, std::int64_t tr2, std::int64_t horizon) {
    RmaState state = rma_initial(tr1, tr2);
    std::vector<std::int64_t> contacts;
    for (std::int64_t round = 1; round <= horizon;) {
        contacts.push_back(round);
        state = rma_update(state, false);
        round += state.q + 1;
    }
    return contacts;
}

std::vector<StoredValue> fill_skips_values(std::span<const double> history_values,
                                           const PredictFn& predict, std::int64_t from_t,
                                           std::int64_t count) {
    if (count < 0) throw std::invalid_argument("count must be >= 0");
    if (count > 0 && history_values.empty())
        throw EmptyHistory("fill_skips needs history to predict from");

    std::vector<double> working(history_values.begin(), history_values.end());
    std::vector<StoredValue> fills;
    fills.reserve(static_cast<std::size_t>(count));
    for (std::int64_t k = 0; k < count; ++k) {
        const double value = predict(working);
        fills.push_back(StoredValue{from_t + k, value, StoreSource::skipped_fill});
        working.push_back(value);
    }
    return fills;
}

std::vector<StoredValue> fill_skips(std::span<const StoredValue> bs_history,
                                    const ForecastModel& model, std::int64_t from_t,
                                    std::int64_t count) {
    std::vector<double> values;
    values.reserve(bs_history.size());
    for (const auto& stored : bs_history) values.push_back(stored.value_s);
    return fill_skips_values(values, as_predict_fn(model), from_t, count);
}

} // namespace skipcast
