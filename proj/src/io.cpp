#include "pafp/io.hpp"

#include "pafp/errors.hpp"

#include <charconv>
#include <cstdio>
#include <fcntl.h>
#include <fstream>
#include <sstream>
#include <system_error>
#include <unistd.h>

namespace pafp {

namespace {

std::string fmt_fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

// Strict full-token parses; any trailing garbage is a format error.
bool parse_double(std::string_view tok, double& out) {
    const char* b = tok.data();
    const char* e = b + tok.size();
    auto [p, ec] = std::from_chars(b, e, out);
    return ec == std::errc{} && p == e;
}

bool parse_u64(std::string_view tok, std::uint64_t& out) {
    const char* b = tok.data();
    const char* e = b + tok.size();
    auto [p, ec] = std::from_chars(b, e, out);
    return ec == std::errc{} && p == e;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            break;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

// Reads all lines, dropping a single trailing empty line (final newline).
std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(0, path + ": cannot open");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ParseError(0, path + ": cannot open for writing");
    return out;
}

[[noreturn]] void bad_line(std::size_t line_no, const std::string& what) {
    throw ParseError(line_no, what);
}

} // namespace

std::string fmt17(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    if (ec != std::errc{}) throw NumericalError("fmt17: value not representable");
    return std::string(buf, p);
}

const char* verdict_name(Verdict v) {
    switch (v) {
    case Verdict::Applied: return "Applied";
    case Verdict::Passive: return "Passive";
    case Verdict::Audit: return "Audit";
    }
    return "?";
}

void save_model(const std::string& path, const ModelFile& mf) {
    auto out = open_out(path);
    out << "pa-model v1\n";
    out << "dim " << mf.model.dim() << "\n";
    out << "threshold " << fmt17(mf.model.threshold) << "\n";
    if (mf.rff) {
        out << "rff " << fmt17(mf.rff->gamma) << " " << mf.rff->out_dim << " "
            << mf.rff->seed << "\n";
    }
    out << "weights";
    for (double w : mf.model.w) out << " " << fmt17(w);
    out << "\n";
    if (!out) throw ParseError(0, path + ": write failed");
}

ModelFile load_model(const std::string& path) {
    const auto lines = read_lines(path);
    if (lines.empty()) bad_line(1, "empty model file");
    if (lines[0] != "pa-model v1") {
        if (lines[0].rfind("pa-model ", 0) == 0)
            throw VersionError("unsupported model version: " + lines[0].substr(9));
        bad_line(1, "expected 'pa-model v1'");
    }
    if (lines.size() < 2) bad_line(2, "missing 'dim' line");
    auto dim_tok = split(lines[1], ' ');
    std::uint64_t dim = 0;
    if (dim_tok.size() != 2 || dim_tok[0] != "dim" || !parse_u64(dim_tok[1], dim) || dim == 0)
        bad_line(2, "expected 'dim <positive integer>'");

    if (lines.size() < 3) bad_line(3, "missing 'threshold' line");
    auto thr_tok = split(lines[2], ' ');
    double threshold = 0.0;
    if (thr_tok.size() != 2 || thr_tok[0] != "threshold" || !parse_double(thr_tok[1], threshold))
        bad_line(3, "expected 'threshold <real>'");

    ModelFile mf;
    mf.model.threshold = threshold;

    std::size_t next = 3;
    if (lines.size() > next && lines[next].rfind("rff ", 0) == 0) {
        auto toks = split(lines[next], ' ');
        RffParams rp;
        std::uint64_t od = 0;
        if (toks.size() != 4 || !parse_double(toks[1], rp.gamma) || !parse_u64(toks[2], od) ||
            !parse_u64(toks[3], rp.seed) || od == 0 || !(rp.gamma > 0.0))
            bad_line(next + 1, "expected 'rff <gamma> <out_dim> <seed>'");
        rp.out_dim = od;
        mf.rff = rp;
        ++next;
    }

    if (lines.size() <= next) bad_line(next + 1, "missing 'weights' line");
    auto wtoks = split(lines[next], ' ');
    if (wtoks.empty() || wtoks[0] != "weights") bad_line(next + 1, "expected 'weights <w0> ...'");
    if (wtoks.size() - 1 != dim)
        bad_line(next + 1, "expected " + std::to_string(dim) + " weights, got " +
                               std::to_string(wtoks.size() - 1));
    mf.model.w.resize(dim);
    for (std::size_t i = 0; i < dim; ++i)
        if (!parse_double(wtoks[i + 1], mf.model.w[i]))
            bad_line(next + 1, "weight " + std::to_string(i) + " is not a real number");

    for (std::size_t i = next + 1; i < lines.size(); ++i)
        if (!lines[i].empty()) bad_line(i + 1, "unexpected trailing content");
    return mf;
}

void save_summaries(const std::string& path, const SummarySet& s) {
    auto out = open_out(path);
    out << "pa-summaries v1 dim=" << s.dim << " k=" << s.clusters.size() << "\n";
    for (const auto& c : s.clusters) {
        out << c.size << "," << fmt17(c.malicious_fraction);
        for (double v : c.center) out << "," << fmt17(v);
        out << "\n";
    }
    if (!out) throw ParseError(0, path + ": write failed");
}

SummarySet load_summaries(const std::string& path) {
    const auto lines = read_lines(path);
    if (lines.empty()) bad_line(1, "empty summaries file");
    auto htoks = split(lines[0], ' ');
    if (htoks.size() != 4 || htoks[0] != "pa-summaries")
        bad_line(1, "expected 'pa-summaries v1 dim=<d> k=<K>'");
    if (htoks[1] != "v1")
        throw VersionError("unsupported summaries version: " + std::string(htoks[1]));
    std::uint64_t dim = 0, k = 0;
    if (htoks[2].rfind("dim=", 0) != 0 || !parse_u64(htoks[2].substr(4), dim) || dim == 0)
        bad_line(1, "bad dim field");
    if (htoks[3].rfind("k=", 0) != 0 || !parse_u64(htoks[3].substr(2), k) || k == 0)
        bad_line(1, "bad k field");

    SummarySet s;
    s.dim = dim;
    s.clusters.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t ln = i + 2;
        if (lines.size() < ln) bad_line(ln, "missing cluster row");
        auto toks = split(lines[i + 1], ',');
        if (toks.size() != dim + 2)
            bad_line(ln, "expected " + std::to_string(dim + 2) + " fields, got " +
                             std::to_string(toks.size()));
        ClusterSummary c;
        std::uint64_t size = 0;
        if (!parse_u64(toks[0], size) || size == 0) bad_line(ln, "bad cluster size");
        if (!parse_double(toks[1], c.malicious_fraction) || c.malicious_fraction < 0.0 ||
            c.malicious_fraction > 1.0)
            bad_line(ln, "bad malicious fraction");
        c.size = size;
        c.center.resize(dim);
        for (std::size_t j = 0; j < dim; ++j)
            if (!parse_double(toks[j + 2], c.center[j])) bad_line(ln, "bad center coordinate");
        s.clusters.push_back(std::move(c));
    }
    for (std::size_t i = k + 1; i < lines.size(); ++i)
        if (!lines[i].empty()) bad_line(i + 1, "unexpected trailing content");
    return s;
}

void save_dataset(const std::string& path, const Dataset& d) {
    auto out = open_out(path);
    out << "label";
    for (std::size_t j = 0; j < d.dim; ++j) out << ",f" << j;
    out << "\n";
    for (const auto& ex : d.examples) {
        out << ex.y;
        for (double v : ex.x) out << "," << fmt17(v);
        out << "\n";
    }
    if (!out) throw ParseError(0, path + ": write failed");
}

Dataset load_dataset(const std::string& path) {
    const auto lines = read_lines(path);
    if (lines.empty()) bad_line(1, "empty dataset file");
    auto header = split(lines[0], ',');
    if (header.size() < 2 || header[0] != "label") bad_line(1, "expected header 'label,f0,...'");
    const std::size_t dim = header.size() - 1;
    for (std::size_t j = 0; j < dim; ++j)
        if (header[j + 1] != "f" + std::to_string(j)) bad_line(1, "bad feature column name");

    Dataset d;
    d.dim = dim;
    d.examples.reserve(lines.size() - 1);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) bad_line(i + 1, "empty row");
        auto toks = split(lines[i], ',');
        if (toks.size() != dim + 1)
            bad_line(i + 1, "expected " + std::to_string(dim + 1) + " fields, got " +
                                std::to_string(toks.size()));
        LabeledExample ex;
        if (toks[0] == "1") ex.y = 1;
        else if (toks[0] == "-1") ex.y = -1;
        else bad_line(i + 1, "label must be '1' or '-1'");
        ex.x.resize(dim);
        for (std::size_t j = 0; j < dim; ++j)
            if (!parse_double(toks[j + 1], ex.x[j]))
                bad_line(i + 1, "feature " + std::to_string(j) + " is not a real number");
        d.examples.push_back(std::move(ex));
    }
    return d;
}

void save_scores(const std::string& path, const std::vector<double>& scores,
                 const std::vector<int>& labels) {
    if (scores.size() != labels.size()) throw InvalidInput("scores/labels size mismatch");
    auto out = open_out(path);
    out << "label,score\n";
    for (std::size_t i = 0; i < scores.size(); ++i)
        out << labels[i] << "," << fmt17(scores[i]) << "\n";
    if (!out) throw ParseError(0, path + ": write failed");
}

std::string render_report(const EvalReport& r) {
    std::ostringstream os;
    os << "accuracy=" << fmt_fixed6(r.accuracy) << "\n";
    os << "auc=" << fmt_fixed6(r.auc) << "\n";
    os << "pauc_norm=" << fmt_fixed6(r.pauc_norm) << "\n";
    os << "tpr=" << fmt_fixed6(r.tpr) << "\n";
    os << "fpr=" << fmt_fixed6(r.fpr) << "\n";
    os << "threshold=" << fmt_fixed6(r.threshold) << "\n";
    os << "fpr_limit=" << fmt_fixed6(r.fpr_limit) << "\n";
    os << "n_pos=" << r.n_pos << "\n";
    os << "n_neg=" << r.n_neg << "\n";
    return os.str();
}

void save_adaptive_trajectories(const std::string& path, const AdaptiveReport& r) {
    auto out = open_out(path);
    out << "step,accuracy_mean,accuracy_std,auc_mean,auc_std,pauc_mean,pauc_std,"
           "tpr_mean,tpr_std,fpr_mean,fpr_std,impact_mean,impact_std\n";
    for (std::size_t i = 0; i < r.mean_traj.size(); ++i) {
        const auto& m = r.mean_traj[i];
        const auto& s = r.std_traj[i];
        out << (i + 1);
        const double cols[] = {m.accuracy, s.accuracy, m.auc,        s.auc,
                               m.pauc,     s.pauc,     m.tpr,        s.tpr,
                               m.fpr,      s.fpr,      m.est_impact, s.est_impact};
        for (double v : cols) out << "," << fmt_fixed6(v);
        out << "\n";
    }
    if (!out) throw ParseError(0, path + ": write failed");
}

void save_adaptive_errors(const std::string& path, const AdaptiveReport& r) {
    auto out = open_out(path);
    out << "trial,errors\n";
    for (std::size_t i = 0; i < r.errors_per_trial.size(); ++i)
        out << i << "," << r.errors_per_trial[i] << "\n";
    if (!out) throw ParseError(0, path + ": write failed");
}

std::string render_adaptive_summary(const AdaptiveReport& r) {
    std::ostringstream os;
    os << "trials=" << r.errors_per_trial.size() << "\n";
    os << "mean_errors=" << fmt_fixed6(r.mean_errors) << "\n";
    os << "stddev_errors=" << fmt_fixed6(r.stddev_errors) << "\n";
    os << "min_errors=" << r.min_errors << "\n";
    os << "max_errors=" << r.max_errors << "\n";
    os << "pre_accuracy=" << fmt_fixed6(r.pre.accuracy) << "\n";
    os << "pre_auc=" << fmt_fixed6(r.pre.auc) << "\n";
    os << "pre_pauc=" << fmt_fixed6(r.pre.pauc) << "\n";
    os << "pre_tpr=" << fmt_fixed6(r.pre.tpr) << "\n";
    os << "pre_fpr=" << fmt_fixed6(r.pre.fpr) << "\n";
    if (!r.mean_traj.empty()) {
        const auto& last = r.mean_traj.back();
        os << "post_accuracy_mean=" << fmt_fixed6(last.accuracy) << "\n";
        os << "post_auc_mean=" << fmt_fixed6(last.auc) << "\n";
        os << "post_pauc_mean=" << fmt_fixed6(last.pauc) << "\n";
        os << "post_tpr_mean=" << fmt_fixed6(last.tpr) << "\n";
        os << "post_fpr_mean=" << fmt_fixed6(last.fpr) << "\n";
        os << "post_impact_mean=" << fmt_fixed6(last.est_impact) << "\n";
    }
    os << "uncorrectable_events=" << r.uncorrectable_events << "\n";
    os << "correction_regressions=" << r.correction_regressions << "\n";
    return os.str();
}

void save_flip_pairs(const std::string& path, const CalibrationReport& r) {
    auto out = open_out(path);
    out << "estimated,actual\n";
    for (const auto& p : r.pairs) out << fmt17(p.estimated) << "," << fmt17(p.actual) << "\n";
    if (!out) throw ParseError(0, path + ": write failed");
}

MinMax fit_minmax(const Dataset& d) {
    if (d.examples.empty()) throw InvalidInput("fit_minmax: empty dataset");
    MinMax mm;
    mm.lo = mm.hi = d.examples[0].x;
    for (const auto& ex : d.examples)
        for (std::size_t j = 0; j < d.dim; ++j) {
            mm.lo[j] = std::min(mm.lo[j], ex.x[j]);
            mm.hi[j] = std::max(mm.hi[j], ex.x[j]);
        }
    return mm;
}

FeatureVector apply_minmax(const MinMax& mm, const FeatureVector& x) {
    if (x.size() != mm.lo.size()) throw InvalidInput("apply_minmax: dimension mismatch");
    FeatureVector out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double range = mm.hi[j] - mm.lo[j];
        out[j] = range > 0.0 ? (x[j] - mm.lo[j]) / range : 0.0;
    }
    return out;
}

Dataset apply_minmax(const MinMax& mm, const Dataset& d) {
    Dataset out;
    out.dim = d.dim;
    out.examples.reserve(d.examples.size());
    for (const auto& ex : d.examples) out.examples.push_back({apply_minmax(mm, ex.x), ex.y});
    return out;
}

std::string example_hash(const LabeledExample& ex) {
    std::string row = std::to_string(ex.y);
    for (double v : ex.x) {
        row += ',';
        row += fmt17(v);
    }
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : row) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

// Exclusive-create lock file; removed on scope exit.
class DbLock {
  public:
    explicit DbLock(std::string path) : path_(std::move(path)) {
        fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
        if (fd_ < 0)
            throw ConcurrentWriteError("database is locked by another writer: " + path_);
    }
    ~DbLock() {
        if (fd_ >= 0) {
            ::close(fd_);
            ::unlink(path_.c_str());
        }
    }
    DbLock(const DbLock&) = delete;
    DbLock& operator=(const DbLock&) = delete;

  private:
    std::string path_;
    int fd_ = -1;
};

} // namespace

void append_fp_db(const std::string& path, const FpDbRow& row, const LabeledExample& ex) {
    if (example_hash(ex) != row.hash) throw InvalidInput("append_fp_db: hash/example mismatch");
    DbLock lock(path + ".lock");
    {
        std::ofstream out(path, std::ios::binary | std::ios::app);
        if (!out) throw ParseError(0, path + ": cannot open for append");
        out << row.hash << "," << row.label << "," << row.timestamp << ","
            << verdict_name(row.verdict) << "," << fmt17(row.impact) << "\n";
        if (!out) throw ParseError(0, path + ": write failed");
    }
    {
        std::ofstream out(path + ".examples", std::ios::binary | std::ios::app);
        if (!out) throw ParseError(0, path + ".examples: cannot open for append");
        out << row.hash << "," << ex.y;
        for (double v : ex.x) out << "," << fmt17(v);
        out << "\n";
        if (!out) throw ParseError(0, path + ".examples: write failed");
    }
}

std::vector<FpDbRow> load_fp_db(const std::string& path) {
    const auto lines = read_lines(path);
    std::vector<FpDbRow> rows;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        auto toks = split(lines[i], ',');
        if (toks.size() != 5) bad_line(i + 1, "expected 5 fields");
        FpDbRow r;
        r.hash = std::string(toks[0]);
        if (toks[1] == "1") r.label = 1;
        else if (toks[1] == "-1") r.label = -1;
        else bad_line(i + 1, "label must be '1' or '-1'");
        if (!parse_u64(toks[2], r.timestamp)) bad_line(i + 1, "bad timestamp");
        if (toks[3] == "Applied") r.verdict = Verdict::Applied;
        else if (toks[3] == "Passive") r.verdict = Verdict::Passive;
        else if (toks[3] == "Audit") r.verdict = Verdict::Audit;
        else bad_line(i + 1, "bad verdict");
        if (!parse_double(toks[4], r.impact)) bad_line(i + 1, "bad impact");
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<LabeledExample> load_fp_examples(const std::string& path) {
    const auto lines = read_lines(path);
    std::vector<LabeledExample> out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        auto toks = split(lines[i], ',');
        if (toks.size() < 3) bad_line(i + 1, "expected hash,label,features");
        LabeledExample ex;
        if (toks[1] == "1") ex.y = 1;
        else if (toks[1] == "-1") ex.y = -1;
        else bad_line(i + 1, "label must be '1' or '-1'");
        ex.x.resize(toks.size() - 2);
        for (std::size_t j = 0; j + 2 < toks.size(); ++j)
            if (!parse_double(toks[j + 2], ex.x[j])) bad_line(i + 1, "bad feature value");
        out.push_back(std::move(ex));
    }
    return out;
}

} // namespace pafp
