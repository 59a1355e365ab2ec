#include "skipcast/sim.hpp"

#include <cmath>

#include "skipcast/errors.hpp"
#include "skipcast/rma.hpp"

namespace skipcast {

namespace {

void charge_baseline(EnergyLedger& ledger, const QuantSpec& quant, const EnergyModel& energy) {
    ledger.baseline_tx += baseline_value_bit_cost(quant) * energy.tx_per_bit;
    ledger.baseline_rx += request_bit_cost(quant) * energy.rx_per_bit;
    ledger.baseline_proc += energy.proc_per_round + energy.sense_per_round;
}

void check_energy_field(double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(name, "must be finite and >= 0");
}

} // namespace

void SimConfig::validate() const {
    if (!std::isfinite(alpha) || alpha < 0.0) throw ConfigError("alpha", "must be finite and >= 0");
    if (tr1 < 1) throw ConfigError("tr1", "must be >= 1");
    if (tr1 >= tr2) throw ConfigError("tr1", "must be < tr2");
    if (train_len < 0) throw ConfigError("train_len", "must be >= 0");
    if (horizon < 1) throw ConfigError("horizon", "must be >= 1");
    if (!(quant.resolution > 0.0) || !std::isfinite(quant.resolution))
        throw ConfigError("quant.resolution", "must be finite and > 0");
    if (quant.value_bits < 1 || quant.value_bits > 32)
        throw ConfigError("quant.value_bits", "must be in [1, 32]");
    if (quant.max_mag_bits < 1 || quant.max_mag_bits > 32)
        throw ConfigError("quant.max_mag_bits", "must be in [1, 32]");
    check_energy_field(energy.tx_per_bit, "energy.tx_per_bit");
    check_energy_field(energy.rx_per_bit, "energy.rx_per_bit");
    check_energy_field(energy.proc_per_round, "energy.proc_per_round");
    check_energy_field(energy.sense_per_round, "energy.sense_per_round");
    if (forecaster.kind == ModelKind::ar && forecaster.window_n < 1)
        throw ConfigError("forecaster.window_n", "must be >= 1");
    if (forecaster.kind == ModelKind::seasonal_naive && forecaster.season_len < 1)
        throw ConfigError("forecaster.season_len", "must be >= 1");
    if (forecaster.kind == ModelKind::narx) {
        if (forecaster.train.hidden_units < 1)
            throw ConfigError("forecaster.train.hidden_units", "must be >= 1");
        if (forecaster.train.delay_taps < 1)
            throw ConfigError("forecaster.train.delay_taps", "must be >= 1");
        if (forecaster.train.epochs < 1) throw ConfigError("forecaster.train.epochs", "must be >= 1");
        if (!(forecaster.train.learning_rate > 0.0))
            throw ConfigError("forecaster.train.learning_rate", "must be > 0");
        if (forecaster.train.l2_lambda < 0.0)
            throw ConfigError("forecaster.train.l2_lambda", "must be >= 0");
    }
}

TrainingPhase run_training_phase(const TraceSeries& trace, std::int64_t train_len, double alpha,
                                 const QuantSpec& quant, const EnergyModel& energy) {
    if (train_len > static_cast<std::int64_t>(trace.size()))
        throw TraceTooShort("train_len exceeds trace length");

    TrainingPhase phase;
    phase.collected.reserve(static_cast<std::size_t>(train_len));
    const SensorState sensor{trace.sensor_id, std::nullopt};

    for (std::int64_t t = 1; t <= train_len; ++t) {
        const RequestPacket req{static_cast<std::uint16_t>((t - 1) & 0xFFFF), 0.0, alpha, false};
        const BitBuffer req_bits = encode_request(req, quant);
        const RequestPacket seen = decode_request(req_bits, quant);

        phase.ledger.sensor_rx += static_cast<double>(req_bits.bit_count()) * energy.rx_per_bit;
        phase.ledger.sensor_proc += energy.proc_per_round;
        phase.ledger.sensor_sense += energy.sense_per_round;
        charge_baseline(phase.ledger, quant, energy);

        const double measured = trace.at(t);
        const auto reply = sensor_step(sensor, seen, measured);
        std::optional<ReplyPacket> received;
        if (reply) {
            const BitBuffer rep_bits = encode_reply(*reply, quant);
            phase.ledger.sensor_tx += static_cast<double>(rep_bits.bit_count()) * energy.tx_per_bit;
            received = decode_reply(rep_bits, quant);
        }
        phase.collected.push_back(bs_store(seen.predicted_e, received, t).value_s);
    }
    return phase;
}

SimReport run_prediction_phase(const TraceSeries& trace, const PredictFn& predict,
                               const SimConfig& cfg, std::vector<double> collected) {
    cfg.validate();
    if (cfg.train_len + cfg.horizon > static_cast<std::int64_t>(trace.size()))
        throw TraceTooShort("train_len + horizon exceeds trace length");
    if (collected.empty()) throw EmptyHistory("prediction phase needs collected history");

    SimReport report;
    report.rounds = cfg.horizon;
    report.stored_series.reserve(static_cast<std::size_t>(cfg.horizon));
    report.round_log.reserve(static_cast<std::size_t>(cfg.horizon));

    const SensorState sensor{trace.sensor_id, std::nullopt};
    RmaState rma = rma_initial(cfg.tr1, cfg.tr2);
    std::vector<double>& working = collected;

    std::int64_t i = 1;
    while (i <= cfg.horizon) {
        const std::int64_t t = cfg.train_len + i;

        // Contact round.
        const double e_raw = predict(working);
        if (!std::isfinite(e_raw)) throw ForecastDiverged("non-finite prediction at round " + std::to_string(t));
        const RequestPacket req{static_cast<std::uint16_t>((t - 1) & 0xFFFF), e_raw, cfg.alpha, false};
        const BitBuffer req_bits = encode_request(req, cfg.quant);
        const RequestPacket seen = decode_request(req_bits, cfg.quant);

        report.energy.sensor_rx += static_cast<double>(req_bits.bit_count()) * cfg.energy.rx_per_bit;
        report.energy.sensor_proc += cfg.energy.proc_per_round;
        report.energy.sensor_sense += cfg.energy.sense_per_round;
        charge_baseline(report.energy, cfg.quant, cfg.energy);

        const double measured = trace.at(t);
        const auto reply = sensor_step(sensor, seen, measured);
        int bits_tx = 0;
        std::optional<ReplyPacket> received;
        if (reply) {
            const BitBuffer rep_bits = encode_reply(*reply, cfg.quant);
            bits_tx = static_cast<int>(rep_bits.bit_count());
            report.energy.sensor_tx += static_cast<double>(bits_tx) * cfg.energy.tx_per_bit;
            received = decode_reply(rep_bits, cfg.quant);
        }
        const StoredValue stored = bs_store(seen.predicted_e, received, t);
        if (!std::isfinite(stored.value_s))
            throw ForecastDiverged("non-finite stored value at round " + std::to_string(t));

        ++report.contacts;
        if (reply) ++report.replies;
        else ++report.silent_accepted;
        report.max_abs_error_contacted =
            std::max(report.max_abs_error_contacted, std::abs(stored.value_s - measured));

        report.stored_series.push_back(stored);
        report.round_log.push_back(RoundLogEntry{t, stored.source, seen.predicted_e, measured,
                                                 stored.value_s, reply.has_value(), bits_tx,
                                                 static_cast<int>(req_bits.bit_count())});
        working.push_back(stored.value_s);
        rma = rma_update(rma, reply.has_value());
        ++i;

        // Skip gap granted by the scheduler: no requests, predictions fill in.
        const std::int64_t gap = std::min<std::int64_t>(rma.q, cfg.horizon - i + 1);
        if (gap > 0) {
            const auto fills = fill_skips_values(working, predict, cfg.train_len + i, gap);
            for (const StoredValue& fill : fills) {
                if (!std::isfinite(fill.value_s))
                    throw ForecastDiverged("non-finite fill at round " + std::to_string(fill.t));
                charge_baseline(report.energy, cfg.quant, cfg.energy);
                ++report.skips;
                report.stored_series.push_back(fill);
                report.round_log.push_back(RoundLogEntry{fill.t, StoreSource::skipped_fill,
                                                         fill.value_s, trace.at(fill.t),
                                                         fill.value_s, false, 0, 0});
                working.push_back(fill.value_s);
            }
            i += gap;
        }
    }

    report.reductions = compute_reductions(report.energy, cfg.energy, cfg.quant);
    return report;
}

ReductionSummary compute_reductions(const EnergyLedger& ledger, const EnergyModel& energy,
                                    const QuantSpec& quant) {
    ReductionSummary out;

    const double min_reply = reply_bit_cost(0.0, quant) * energy.tx_per_bit;
    out.tx_all_silent = ledger.sensor_tx == 0.0;
    const double tx_denom = std::max(ledger.sensor_tx, min_reply);
    out.tx_ratio = tx_denom > 0.0 ? ledger.baseline_tx / tx_denom : 1.0;

    const double scheme_proc = ledger.sensor_rx + ledger.sensor_proc + ledger.sensor_sense;
    const double one_contact = request_bit_cost(quant) * energy.rx_per_bit +
                               energy.proc_per_round + energy.sense_per_round;
    out.proc_all_silent = scheme_proc == 0.0;
    const double proc_denom = std::max(scheme_proc, one_contact);
    out.proc_ratio =
        proc_denom > 0.0 ? (ledger.baseline_rx + ledger.baseline_proc) / proc_denom : 1.0;
    return out;
}

SimReport run_experiment(const TraceSeries& trace, const SimConfig& cfg) {
    cfg.validate();
    if (cfg.train_len + cfg.horizon > static_cast<std::int64_t>(trace.size()))
        throw TraceTooShort("train_len + horizon exceeds trace length");

    TrainingPhase training =
        run_training_phase(trace, cfg.train_len, cfg.alpha, cfg.quant, cfg.energy);

    ForecastSpec spec = cfg.forecaster;
    if (spec.train.seed == 0) spec.train.seed = cfg.seed;
    const ForecastModel model = build_forecaster(spec, training.collected);

    // Forecast quality over the horizon, independent of the scheduler.
    const auto closed_loop =
        model.predict_closed_loop(training.collected, static_cast<int>(cfg.horizon));
    std::vector<double> actuals;
    actuals.reserve(static_cast<std::size_t>(cfg.horizon));
    for (std::int64_t i = 1; i <= cfg.horizon; ++i) actuals.push_back(trace.at(cfg.train_len + i));
    ForecastReport quality = evaluate(closed_loop, actuals);

    SimReport report =
        run_prediction_phase(trace, as_predict_fn(model), cfg, std::move(training.collected));
    report.forecast_report = std::move(quality);
    return report;
}

} // namespace skipcast
