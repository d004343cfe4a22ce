#include "pafp/pa.hpp"

#include "pafp/errors.hpp"
#include "pafp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace pafp {

double hinge_loss(double margin) { return std::max(0.0, 1.0 - margin); }

namespace {

double checked_sqnorm(const LinearModel& m, const LabeledExample& ex, const char* who) {
    if (ex.x.size() != m.w.size())
        throw InvalidInput(std::string(who) + ": feature length " + std::to_string(ex.x.size()) +
                           " does not match model dim " + std::to_string(m.w.size()));
    if (ex.y != -1 && ex.y != +1)
        throw InvalidInput(std::string(who) + ": label must be -1 or +1");
    return kern::dot(ex.x.data(), ex.x.data(), ex.x.size());
}

} // namespace

std::pair<LinearModel, PatchRecord> pa_update(const LinearModel& m, const LabeledExample& ex,
                                              const PaConfig& cfg) {
    const double xx = checked_sqnorm(m, ex, "pa_update");
    if (xx == 0.0)
        throw InvalidInput("pa_update: zero-norm feature vector, step size undefined");
    if (cfg.variant == PaVariant::RegularizedC && !(cfg.c > 0.0))
        throw InvalidInput("pa_update: RegularizedC requires c > 0");

    PatchRecord rec;
    rec.margin_before = ex.y * kern::dot(m.w.data(), ex.x.data(), ex.x.size());
    const double loss = hinge_loss(rec.margin_before);
    if (loss == 0.0) {
        rec.margin_after = rec.margin_before;
        rec.verdict = Verdict::Passive;
        return {m, rec};
    }

    double tau = loss / xx;
    if (cfg.variant == PaVariant::RegularizedC) tau = std::min(cfg.c, tau);
    if (!std::isfinite(tau))
        throw NumericalError("pa_update: non-finite step size");

    LinearModel out = m;
    kern::axpy(tau * ex.y, ex.x.data(), out.w.data(), out.w.size());
    rec.tau = tau;
    rec.margin_after = ex.y * kern::dot(out.w.data(), ex.x.data(), ex.x.size());
    rec.weight_delta_norm = tau * std::sqrt(xx);
    rec.verdict = Verdict::Applied;
    if (!std::isfinite(rec.margin_after))
        throw NumericalError("pa_update: non-finite margin after update");
    return {out, rec};
}

std::pair<LinearModel, PatchRecord> sgd_update(const LinearModel& m, const LabeledExample& ex,
                                               const SgdConfig& cfg) {
    const double xx = checked_sqnorm(m, ex, "sgd_update");
    if (xx == 0.0)
        throw InvalidInput("sgd_update: zero-norm feature vector");
    if (!(cfg.learning_rate > 0.0))
        throw InvalidInput("sgd_update: learning_rate must be > 0");
    if (cfg.steps_per_correction < 1)
        throw InvalidInput("sgd_update: steps_per_correction must be >= 1");

    PatchRecord rec;
    rec.margin_before = ex.y * kern::dot(m.w.data(), ex.x.data(), ex.x.size());

    LinearModel out = m;
    double margin = rec.margin_before;
    int steps = 0;
    for (; steps < cfg.steps_per_correction && hinge_loss(margin) > 0.0; ++steps) {
        kern::axpy(cfg.learning_rate * ex.y, ex.x.data(), out.w.data(), out.w.size());
        margin = ex.y * kern::dot(out.w.data(), ex.x.data(), ex.x.size());
    }
    if (!std::isfinite(margin))
        throw NumericalError("sgd_update: non-finite margin after update");

    rec.margin_after = margin;
    rec.tau = cfg.learning_rate * steps;
    rec.weight_delta_norm = rec.tau * std::sqrt(xx);
    rec.verdict = steps > 0 ? Verdict::Applied : Verdict::Passive;
    return {steps > 0 ? std::move(out) : m, rec};
}

namespace {

template <class Cfg>
LinearModel train_loop(const LinearModel& init, const Dataset& data, int epochs, const Cfg& cfg,
                       std::uint64_t rng_seed) {
    if (epochs < 0) throw InvalidInput("train_online: epochs must be >= 0");
    if (data.examples.empty()) throw InvalidInput("train_online: empty dataset");
    if (data.dim != init.w.size())
        throw InvalidInput("train_online: dataset dim " + std::to_string(data.dim) +
                           " does not match model dim " + std::to_string(init.w.size()));

    std::mt19937_64 rng(rng_seed);
    std::vector<std::size_t> order(data.examples.size());
    std::iota(order.begin(), order.end(), 0);

    LinearModel model = init;
    for (int e = 0; e < epochs; ++e) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t idx : order) {
            if constexpr (std::is_same_v<Cfg, PaConfig>)
                model = pa_update(model, data.examples[idx], cfg).first;
            else
                model = sgd_update(model, data.examples[idx], cfg).first;
        }
    }
    return model;
}

} // namespace

LinearModel train_online(const LinearModel& init, const Dataset& data, int epochs,
                         const PaConfig& cfg, std::uint64_t rng_seed) {
    return train_loop(init, data, epochs, cfg, rng_seed);
}

LinearModel train_online(const LinearModel& init, const Dataset& data, int epochs,
                         const SgdConfig& cfg, std::uint64_t rng_seed) {
    return train_loop(init, data, epochs, cfg, rng_seed);
}

} // namespace pafp
