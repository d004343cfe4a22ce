#pragma once

#include "pafp/harness.hpp"
#include "pafp/impact.hpp"
#include "pafp/metrics.hpp"
#include "pafp/model.hpp"
#include "pafp/pa.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pafp {

// Parameters sufficient to regenerate the feature map a model was trained
// on; stored in the model file when present.
struct RffParams {
    double gamma = 0.0;
    std::size_t out_dim = 0;
    std::uint64_t seed = 0;
};

struct ModelFile {
    LinearModel model;
    std::optional<RffParams> rff;
};

// 17-significant-digit decimal, locale-free; round-trips binary64 exactly.
std::string fmt17(double v);

void save_model(const std::string& path, const ModelFile& mf);
ModelFile load_model(const std::string& path);

void save_summaries(const std::string& path, const SummarySet& s);
SummarySet load_summaries(const std::string& path);

void save_dataset(const std::string& path, const Dataset& d);
Dataset load_dataset(const std::string& path);

void save_scores(const std::string& path, const std::vector<double>& scores,
                 const std::vector<int>& labels);

std::string render_report(const EvalReport& r);

void save_adaptive_trajectories(const std::string& path, const AdaptiveReport& r);
void save_adaptive_errors(const std::string& path, const AdaptiveReport& r);
std::string render_adaptive_summary(const AdaptiveReport& r);

void save_flip_pairs(const std::string& path, const CalibrationReport& r);

// Per-feature min-max transform learned from a training split.
struct MinMax {
    FeatureVector lo, hi;
};
MinMax fit_minmax(const Dataset& d);
FeatureVector apply_minmax(const MinMax& mm, const FeatureVector& x);
Dataset apply_minmax(const MinMax& mm, const Dataset& d);

// Local FP database: append-only rows hash,label,timestamp,verdict,impact.
// The feature vectors behind the hashes live in the sidecar <path>.examples
// so a candidate model can be checked against every recorded FP. A lock file
// <path>.lock admits one writer at a time.
struct FpDbRow {
    std::string hash;
    int label = 0;
    std::uint64_t timestamp = 0;
    Verdict verdict = Verdict::Passive;
    double impact = 0.0;
};

std::string example_hash(const LabeledExample& ex);
void append_fp_db(const std::string& path, const FpDbRow& row, const LabeledExample& ex);
std::vector<FpDbRow> load_fp_db(const std::string& path);
std::vector<LabeledExample> load_fp_examples(const std::string& path);

const char* verdict_name(Verdict v);

} // namespace pafp
