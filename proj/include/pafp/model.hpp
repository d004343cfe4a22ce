#pragma once

#include <cstddef>
#include <vector>

namespace pafp {

// Dense embedding coordinates. Length must equal the model dimension
// wherever the two meet; entries are expected finite.
using FeatureVector = std::vector<double>;

// label: +1 = malicious, -1 = benign.
struct LabeledExample {
    FeatureVector x;
    int y = -1;
};

struct Dataset {
    std::size_t dim = 0;
    std::vector<LabeledExample> examples;

    std::size_t size() const { return examples.size(); }
};

// Deployed linear scorer: raw score w.x, alert threshold theta on the raw
// score. theta affects only alerting, never the margin used by updates.
struct LinearModel {
    FeatureVector w;
    double threshold = 0.0;

    std::size_t dim() const { return w.size(); }
};

// w.x; throws InvalidInput on dimension mismatch.
double score(const LinearModel& m, const FeatureVector& x);

// +1 iff score >= threshold (tie alerts), else -1.
int classify(const LinearModel& m, const FeatureVector& x);

// Throws InvalidInput unless every example has length dim and label in {-1,+1}.
void validate(const Dataset& d);

} // namespace pafp
