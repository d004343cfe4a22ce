#include "pafp/model.hpp"

#include "pafp/errors.hpp"
#include "pafp/kernels.hpp"

#include <string>

namespace pafp {

double score(const LinearModel& m, const FeatureVector& x) {
    if (x.size() != m.w.size())
        throw InvalidInput("score: feature length " + std::to_string(x.size()) +
                           " does not match model dim " + std::to_string(m.w.size()));
    return kern::dot(m.w.data(), x.data(), x.size());
}

int classify(const LinearModel& m, const FeatureVector& x) {
    return score(m, x) >= m.threshold ? +1 : -1;
}

void validate(const Dataset& d) {
    for (std::size_t i = 0; i < d.examples.size(); ++i) {
        const auto& ex = d.examples[i];
        if (ex.x.size() != d.dim)
            throw InvalidInput("dataset: example " + std::to_string(i) + " has length " +
                               std::to_string(ex.x.size()) + ", expected " + std::to_string(d.dim));
        if (ex.y != -1 && ex.y != +1)
            throw InvalidInput("dataset: example " + std::to_string(i) + " has label " +
                               std::to_string(ex.y) + ", expected -1 or +1");
    }
}

} // namespace pafp
