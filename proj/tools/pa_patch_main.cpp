// pa-patch: train, calibrate, patch, and evaluate linear alert models with
// cluster-summary impact gating. Every subcommand is deterministic for fixed
// flags and seeds. Exit codes: 0 success, 1 usage, 2 bad data or state,
// 3 patch rejected to audit.

#include "pafp/errors.hpp"
#include "pafp/harness.hpp"
#include "pafp/impact.hpp"
#include "pafp/io.hpp"
#include "pafp/metrics.hpp"
#include "pafp/model.hpp"
#include "pafp/pa.hpp"
#include "pafp/rff.hpp"
#include "pafp/synth.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

struct AuditExit {};

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::uint64_t default_seed() {
    if (const char* e = std::getenv("PA_PATCH_SEED")) {
        try {
            return std::stoull(e);
        } catch (const std::exception&) {
            throw pafp::InvalidInput("PA_PATCH_SEED is not an unsigned integer");
        }
    }
    return 1;
}

// Scoring path shared by every subcommand that consumes a model: optional
// min-max normalization (recomputed from a reference CSV), optional cosine
// feature map regenerated from the parameters stored in the model file, then
// the linear scorer itself.
struct Pipeline {
    pafp::ModelFile mf;
    std::optional<pafp::MinMax> mm;
    mutable std::optional<pafp::RffMap> map;

    const pafp::RffMap& map_for(std::size_t in_dim) const {
        if (!map)
            map = pafp::build_rff(in_dim, mf.rff->out_dim, mf.rff->gamma, mf.rff->seed);
        else if (map->in_dim != in_dim)
            throw pafp::InvalidInput("input dimension does not match the stored feature map");
        return *map;
    }

    pafp::FeatureVector lift(const pafp::FeatureVector& x) const {
        pafp::FeatureVector v = mm ? pafp::apply_minmax(*mm, x) : x;
        if (mf.rff) v = pafp::transform(map_for(v.size()), v);
        return v;
    }

    pafp::Dataset lift_all(const pafp::Dataset& d) const {
        if (!mm && !mf.rff) return d;
        pafp::Dataset out;
        out.examples.reserve(d.examples.size());
        for (const auto& ex : d.examples) out.examples.push_back({lift(ex.x), ex.y});
        out.dim = out.examples.empty() ? d.dim : out.examples[0].x.size();
        return out;
    }

    double score_raw(const pafp::FeatureVector& x) const {
        return pafp::score(mf.model, lift(x));
    }
};

Pipeline load_pipeline(const std::string& model_path, const std::string& normalize_from) {
    Pipeline p;
    p.mf = pafp::load_model(model_path);
    if (!normalize_from.empty()) p.mm = pafp::fit_minmax(pafp::load_dataset(normalize_from));
    return p;
}

pafp::UpdateRule make_rule(const std::string& algo, double c, double lr, int sgd_steps) {
    if (algo == "pa") return pafp::PaConfig{pafp::PaVariant::Exact, 1.0};
    if (algo == "pa1") return pafp::PaConfig{pafp::PaVariant::RegularizedC, c};
    if (algo == "sgd") return pafp::SgdConfig{lr, sgd_steps};
    throw pafp::InvalidInput("unknown algorithm: " + algo);
}

pafp::LabeledExample load_single_example(const std::string& path) {
    auto d = pafp::load_dataset(path);
    if (d.examples.size() != 1)
        throw pafp::InvalidInput(path + ": expected exactly one example row, got " +
                                 std::to_string(d.examples.size()));
    return d.examples[0];
}

// The shared estimate/gate step behind estimate-impact and patch.
struct GateResult {
    pafp::LinearModel patched;
    pafp::PatchRecord rec;
    double impact = 0.0;
    pafp::Verdict verdict = pafp::Verdict::Passive;
};

GateResult gate_example(const Pipeline& pipe, const pafp::SummarySet& summaries,
                        const pafp::LabeledExample& raw, const pafp::PaConfig& cfg,
                        double max_drop) {
    pafp::LabeledExample lifted{pipe.lift(raw.x), raw.y};
    GateResult g;
    auto [impact, rec] = pafp::estimate_impact(pipe.mf.model, lifted, cfg, summaries);
    g.impact = impact;
    g.rec = rec;
    if (rec.verdict != pafp::Verdict::Applied) {
        g.verdict = pafp::Verdict::Passive;
        g.patched = pipe.mf.model;
        return g;
    }
    g.verdict = pafp::gate_patch(impact, max_drop);
    if (g.verdict == pafp::Verdict::Applied)
        g.patched = pafp::pa_update(pipe.mf.model, lifted, cfg).first;
    else
        g.patched = pipe.mf.model;
    return g;
}

void copy_bytes(const std::string& from, const std::string& to) {
    if (from == to) return;
    std::ifstream in(from, std::ios::binary);
    if (!in) throw pafp::ParseError(0, from + ": cannot open");
    std::ofstream out(to, std::ios::binary | std::ios::trunc);
    if (!out) throw pafp::ParseError(0, to + ": cannot open for writing");
    out << in.rdbuf();
    if (!out) throw pafp::ParseError(0, to + ": write failed");
}

int run(int argc, char** argv) {
    CLI::App app{"linear alert-model trainer and false-positive patcher"};
    app.require_subcommand(1);
    const std::uint64_t env_seed = default_seed();

    // gen-data
    struct {
        std::string train, test, hard, bayes_model;
        std::size_t dim = 32, n_train = 20000, n_test = 5000, n_hard = 58;
        std::uint64_t seed;
    } gd;
    gd.seed = env_seed;
    auto* gen = app.add_subcommand("gen-data", "synthesize train/test/hard-FP datasets");
    gen->add_option("--train", gd.train, "output CSV for the training split")->required();
    gen->add_option("--test", gd.test, "output CSV for the test split")->required();
    gen->add_option("--hard", gd.hard, "output CSV for the hard false-positive set")->required();
    gen->add_option("--bayes-model", gd.bayes_model, "also write the generator's ideal linear model");
    gen->add_option("--dim", gd.dim, "feature dimension");
    gen->add_option("--n-train", gd.n_train, "training examples");
    gen->add_option("--n-test", gd.n_test, "test examples");
    gen->add_option("--n-hard", gd.n_hard, "hard false positives");
    gen->add_option("--seed", gd.seed, "generator seed (default: PA_PATCH_SEED or 1)");
    gen->callback([&] {
        pafp::SyntheticSpec spec;
        spec.dim = gd.dim;
        spec.n_train = gd.n_train;
        spec.n_test = gd.n_test;
        spec.n_hard = gd.n_hard;
        spec.seed = gd.seed;
        auto data = pafp::generate(spec);
        pafp::save_dataset(gd.train, data.train);
        pafp::save_dataset(gd.test, data.test);
        pafp::save_dataset(gd.hard, data.hard_fps);
        if (!gd.bayes_model.empty())
            pafp::save_model(gd.bayes_model, {{data.bayes_weights, 0.0}, std::nullopt});
    });

    // train
    struct {
        std::string data, out, algo = "pa", normalize_from;
        bool normalize = false;
        int epochs = 5, sgd_steps = 1;
        double c = 1.0, lr = 0.01, gamma = 0.0;
        std::size_t rff_dim = 0;
        std::uint64_t seed;
    } tr;
    tr.seed = env_seed;
    auto* train = app.add_subcommand("train", "train a linear model online");
    train->add_option("--data", tr.data, "training CSV")->required();
    train->add_option("--out", tr.out, "output model file")->required();
    train->add_option("--algo", tr.algo, "pa | pa1 | sgd")
        ->check(CLI::IsMember({"pa", "pa1", "sgd"}));
    train->add_option("--epochs", tr.epochs, "training epochs");
    train->add_option("--c", tr.c, "aggressiveness cap for pa1");
    train->add_option("--lr", tr.lr, "sgd learning rate");
    train->add_option("--sgd-steps", tr.sgd_steps, "sgd steps per correction");
    auto* orff = train->add_option("--rff-dim", tr.rff_dim, "cosine feature map output dimension");
    auto* ogam = train->add_option("--gamma", tr.gamma, "kernel bandwidth for the feature map");
    orff->needs(ogam);
    ogam->needs(orff);
    train->add_flag("--normalize", tr.normalize, "min-max normalize features from this data");
    train->add_option("--seed", tr.seed, "shuffle/map seed (default: PA_PATCH_SEED or 1)");
    train->callback([&] {
        auto data = pafp::load_dataset(tr.data);
        if (tr.normalize) data = pafp::apply_minmax(pafp::fit_minmax(data), data);
        pafp::ModelFile mf;
        if (tr.rff_dim > 0) {
            auto map = pafp::build_rff(data.dim, tr.rff_dim, tr.gamma, tr.seed);
            pafp::Dataset z;
            z.dim = tr.rff_dim;
            z.examples.reserve(data.examples.size());
            for (const auto& ex : data.examples)
                z.examples.push_back({pafp::transform(map, ex.x), ex.y});
            data = std::move(z);
            mf.rff = pafp::RffParams{tr.gamma, tr.rff_dim, tr.seed};
        }
        pafp::LinearModel init;
        init.w.assign(data.dim, 0.0);
        const auto rule = make_rule(tr.algo, tr.c, tr.lr, tr.sgd_steps);
        if (std::holds_alternative<pafp::PaConfig>(rule))
            mf.model = pafp::train_online(init, data, tr.epochs,
                                          std::get<pafp::PaConfig>(rule), tr.seed);
        else
            mf.model = pafp::train_online(init, data, tr.epochs,
                                          std::get<pafp::SgdConfig>(rule), tr.seed);
        pafp::save_model(tr.out, mf);
    });

    // calibrate
    struct {
        std::string model, data, out, normalize_from;
        double target_fpr = 0.001;
    } cal;
    auto* calb = app.add_subcommand("calibrate", "set the alert threshold from benign scores");
    calb->add_option("--model", cal.model, "model file")->required();
    calb->add_option("--data", cal.data, "calibration CSV (benign rows are used)")->required();
    calb->add_option("--out", cal.out, "output model file (default: overwrite --model)");
    calb->add_option("--target-fpr", cal.target_fpr, "false-positive-rate budget");
    calb->add_option("--normalize-from", cal.normalize_from, "recompute min-max bounds from this CSV");
    calb->callback([&] {
        auto pipe = load_pipeline(cal.model, cal.normalize_from);
        auto data = pafp::load_dataset(cal.data);
        std::vector<double> benign;
        for (const auto& ex : data.examples)
            if (ex.y == -1) benign.push_back(pipe.score_raw(ex.x));
        pipe.mf.model.threshold = pafp::calibrate_threshold(benign, cal.target_fpr);
        pafp::save_model(cal.out.empty() ? cal.model : cal.out, pipe.mf);
        std::cout << "threshold=" << fixed6(pipe.mf.model.threshold) << "\n";
    });

    // score
    struct {
        std::string model, data, out, normalize_from;
    } sc;
    auto* scor = app.add_subcommand("score", "score a dataset with a model");
    scor->add_option("--model", sc.model, "model file")->required();
    scor->add_option("--data", sc.data, "input CSV")->required();
    scor->add_option("--out", sc.out, "output scores CSV")->required();
    scor->add_option("--normalize-from", sc.normalize_from, "recompute min-max bounds from this CSV");
    scor->callback([&] {
        auto pipe = load_pipeline(sc.model, sc.normalize_from);
        auto data = pafp::load_dataset(sc.data);
        std::vector<double> scores;
        std::vector<int> labels;
        scores.reserve(data.examples.size());
        for (const auto& ex : data.examples) {
            scores.push_back(pipe.score_raw(ex.x));
            labels.push_back(ex.y);
        }
        pafp::save_scores(sc.out, scores, labels);
    });

    // build-summaries
    struct {
        std::string data, out, model, normalize_from;
        std::size_t k = 256;
        int max_iters = 50;
        std::uint64_t seed;
    } bs;
    bs.seed = env_seed;
    auto* bsum = app.add_subcommand("build-summaries", "cluster a dataset into weighted summaries");
    bsum->add_option("--data", bs.data, "input CSV")->required();
    bsum->add_option("--out", bs.out, "output summaries file")->required();
    bsum->add_option("--k", bs.k, "number of clusters");
    bsum->add_option("--max-iters", bs.max_iters, "clustering iteration cap");
    bsum->add_option("--model", bs.model, "model whose feature map the clusters must live in");
    bsum->add_option("--normalize-from", bs.normalize_from, "recompute min-max bounds from this CSV");
    bsum->add_option("--seed", bs.seed, "clustering seed (default: PA_PATCH_SEED or 1)");
    bsum->callback([&] {
        auto data = pafp::load_dataset(bs.data);
        if (!bs.model.empty()) {
            auto pipe = load_pipeline(bs.model, bs.normalize_from);
            data = pipe.lift_all(data);
        } else if (!bs.normalize_from.empty()) {
            data = pafp::apply_minmax(pafp::fit_minmax(pafp::load_dataset(bs.normalize_from)), data);
        }
        pafp::save_summaries(bs.out, pafp::build_summaries(data, bs.k, bs.seed, bs.max_iters));
    });

    // estimate-impact
    struct {
        std::string model, summaries, example, algo = "pa", normalize_from;
        double max_drop = 0.05, c = 1.0;
    } ei;
    auto* eimp = app.add_subcommand("estimate-impact",
                                    "estimate the AUC impact of patching one false positive");
    eimp->add_option("--model", ei.model, "model file")->required();
    eimp->add_option("--summaries", ei.summaries, "summaries file")->required();
    eimp->add_option("--example", ei.example, "single-row CSV with the correction")->required();
    eimp->add_option("--max-drop", ei.max_drop, "largest tolerated AUC drop");
    eimp->add_option("--algo", ei.algo, "pa | pa1")->check(CLI::IsMember({"pa", "pa1"}));
    eimp->add_option("--c", ei.c, "aggressiveness cap for pa1");
    eimp->add_option("--normalize-from", ei.normalize_from, "recompute min-max bounds from this CSV");
    eimp->callback([&] {
        auto pipe = load_pipeline(ei.model, ei.normalize_from);
        auto summaries = pafp::load_summaries(ei.summaries);
        auto ex = load_single_example(ei.example);
        const auto cfg = std::get<pafp::PaConfig>(make_rule(ei.algo, ei.c, 0.0, 0));
        auto g = gate_example(pipe, summaries, ex, cfg, ei.max_drop);
        std::cout << "impact=" << fixed6(g.impact) << "\n";
        std::cout << "verdict=" << pafp::verdict_name(g.verdict) << "\n";
        if (g.verdict == pafp::Verdict::Audit) throw AuditExit{};
    });

    // patch
    struct {
        std::string model, summaries, example, out, db, algo = "pa", normalize_from;
        double max_drop = 0.05, c = 1.0;
        std::int64_t timestamp = -1;
    } pt;
    auto* ptch = app.add_subcommand("patch", "apply one gated false-positive correction");
    ptch->add_option("--model", pt.model, "model file")->required();
    ptch->add_option("--summaries", pt.summaries, "summaries file")->required();
    ptch->add_option("--example", pt.example, "single-row CSV with the correction")->required();
    ptch->add_option("--out", pt.out, "output model file (default: overwrite --model)");
    ptch->add_option("--db", pt.db, "local FP database to append the event to");
    ptch->add_option("--max-drop", pt.max_drop, "largest tolerated AUC drop");
    ptch->add_option("--algo", pt.algo, "pa | pa1")->check(CLI::IsMember({"pa", "pa1"}));
    ptch->add_option("--c", pt.c, "aggressiveness cap for pa1");
    ptch->add_option("--timestamp", pt.timestamp, "event time, unix seconds (default: now)");
    ptch->add_option("--normalize-from", pt.normalize_from, "recompute min-max bounds from this CSV");
    ptch->callback([&] {
        auto pipe = load_pipeline(pt.model, pt.normalize_from);
        auto summaries = pafp::load_summaries(pt.summaries);
        auto ex = load_single_example(pt.example);
        const auto cfg = std::get<pafp::PaConfig>(make_rule(pt.algo, pt.c, 0.0, 0));
        auto g = gate_example(pipe, summaries, ex, cfg, pt.max_drop);
        const std::string out = pt.out.empty() ? pt.model : pt.out;
        if (g.verdict == pafp::Verdict::Applied) {
            pafp::ModelFile mf = pipe.mf;
            mf.model = g.patched;
            pafp::save_model(out, mf);
        } else {
            copy_bytes(pt.model, out);
        }
        if (!pt.db.empty()) {
            pafp::FpDbRow row;
            row.hash = pafp::example_hash(ex);
            row.label = ex.y;
            row.timestamp = pt.timestamp >= 0 ? std::uint64_t(pt.timestamp)
                                              : std::uint64_t(std::time(nullptr));
            row.verdict = g.verdict;
            row.impact = g.impact;
            pafp::append_fp_db(pt.db, row, ex);
        }
        std::cout << "impact=" << fixed6(g.impact) << "\n";
        std::cout << "tau=" << fixed6(g.rec.tau) << "\n";
        std::cout << "verdict=" << pafp::verdict_name(g.verdict) << "\n";
        if (g.verdict == pafp::Verdict::Audit) throw AuditExit{};
    });

    // eval
    struct {
        std::string model, data, fp_db, out, normalize_from;
        double fpr_limit = 0.001;
    } ev;
    auto* eval = app.add_subcommand("eval", "evaluate a model at its stored threshold");
    eval->add_option("--model", ev.model, "model file")->required();
    eval->add_option("--data", ev.data, "evaluation CSV")->required();
    eval->add_option("--fpr-limit", ev.fpr_limit, "partial-AUC false-positive-rate limit");
    eval->add_option("--fp-db", ev.fp_db, "check that every recorded local FP stays benign");
    eval->add_option("--out", ev.out, "write the report here instead of stdout");
    eval->add_option("--normalize-from", ev.normalize_from, "recompute min-max bounds from this CSV");
    eval->callback([&] {
        auto pipe = load_pipeline(ev.model, ev.normalize_from);
        auto data = pipe.lift_all(pafp::load_dataset(ev.data));
        auto report = pafp::eval_fixed(pipe.mf.model, data, ev.fpr_limit);
        std::string text = pafp::render_report(report);
        if (!ev.fp_db.empty()) {
            const auto fps = pafp::load_fp_examples(ev.fp_db + ".examples");
            std::size_t still_flagged = 0;
            for (const auto& fp : fps)
                if (pipe.score_raw(fp.x) >= pipe.mf.model.threshold) ++still_flagged;
            text += "n_local_fps=" + std::to_string(fps.size()) + "\n";
            text += std::string("covers_all_local_fps=") +
                    (still_flagged == 0 ? "true" : "false") + "\n";
        }
        if (ev.out.empty()) {
            std::cout << text;
        } else {
            std::ofstream f(ev.out, std::ios::binary | std::ios::trunc);
            if (!f) throw pafp::ParseError(0, ev.out + ": cannot open for writing");
            f << text;
        }
    });

    // eval-adaptive
    struct {
        std::string model, hard, test, summaries, out_prefix, algo = "pa", normalize_from;
        int trials = 200, sgd_steps = 1;
        double c = 1.0, lr = 0.01, fpr_limit = 0.001;
        std::uint64_t seed;
    } ea;
    ea.seed = env_seed;
    auto* eadp = app.add_subcommand("eval-adaptive",
                                    "replay the hard-FP correction stream across trials");
    eadp->add_option("--model", ea.model, "model file")->required();
    eadp->add_option("--hard", ea.hard, "hard false-positive CSV")->required();
    eadp->add_option("--test", ea.test, "held-out test CSV")->required();
    eadp->add_option("--summaries", ea.summaries, "summaries file")->required();
    eadp->add_option("--trials", ea.trials, "number of shuffled replays");
    eadp->add_option("--algo", ea.algo, "pa | pa1 | sgd")
        ->check(CLI::IsMember({"pa", "pa1", "sgd"}));
    eadp->add_option("--c", ea.c, "aggressiveness cap for pa1");
    eadp->add_option("--lr", ea.lr, "sgd learning rate");
    eadp->add_option("--sgd-steps", ea.sgd_steps, "sgd steps per correction");
    eadp->add_option("--fpr-limit", ea.fpr_limit, "partial-AUC false-positive-rate limit");
    eadp->add_option("--out-prefix", ea.out_prefix,
                     "write <prefix>.traj.csv and <prefix>.errors.csv");
    eadp->add_option("--seed", ea.seed, "trial shuffle seed (default: PA_PATCH_SEED or 1)");
    eadp->add_option("--normalize-from", ea.normalize_from, "recompute min-max bounds from this CSV");
    eadp->callback([&] {
        auto pipe = load_pipeline(ea.model, ea.normalize_from);
        auto summaries = pafp::load_summaries(ea.summaries);
        auto hard = pipe.lift_all(pafp::load_dataset(ea.hard));
        auto test = pipe.lift_all(pafp::load_dataset(ea.test));
        const auto rule = make_rule(ea.algo, ea.c, ea.lr, ea.sgd_steps);
        auto report = pafp::eval_adaptive(pipe.mf.model, hard, test, ea.trials, rule, summaries,
                                          ea.seed, ea.fpr_limit);
        if (!ea.out_prefix.empty()) {
            pafp::save_adaptive_trajectories(ea.out_prefix + ".traj.csv", report);
            pafp::save_adaptive_errors(ea.out_prefix + ".errors.csv", report);
        }
        std::cout << pafp::render_adaptive_summary(report);
    });

    // impact-calibration
    struct {
        std::string model, train, test, summaries, out, normalize_from;
        int n_flips = 200;
        std::uint64_t seed;
    } ic;
    ic.seed = env_seed;
    auto* ical = app.add_subcommand("impact-calibration",
                                    "compare estimated impact against held-out AUC change");
    ical->add_option("--model", ic.model, "model file")->required();
    ical->add_option("--train", ic.train, "pool CSV to draw label flips from")->required();
    ical->add_option("--test", ic.test, "held-out test CSV")->required();
    ical->add_option("--summaries", ic.summaries, "summaries file")->required();
    ical->add_option("--n-flips", ic.n_flips, "number of label flips");
    ical->add_option("--out", ic.out, "pairs CSV output");
    ical->add_option("--seed", ic.seed, "sampling seed (default: PA_PATCH_SEED or 1)");
    ical->add_option("--normalize-from", ic.normalize_from, "recompute min-max bounds from this CSV");
    ical->callback([&] {
        auto pipe = load_pipeline(ic.model, ic.normalize_from);
        auto summaries = pafp::load_summaries(ic.summaries);
        auto train_z = pipe.lift_all(pafp::load_dataset(ic.train));
        auto test_z = pipe.lift_all(pafp::load_dataset(ic.test));
        auto report =
            pafp::impact_calibration(pipe.mf.model, train_z, test_z, summaries, ic.n_flips, ic.seed);
        if (!ic.out.empty()) pafp::save_flip_pairs(ic.out, report);
        std::cout << "n_pairs=" << report.pairs.size() << "\n";
        if (report.correlation_defined) {
            std::cout << "pearson_r=" << fixed6(report.pearson_r) << "\n";
            std::cout << "slope=" << fixed6(report.slope) << "\n";
            std::cout << "intercept=" << fixed6(report.intercept) << "\n";
        } else {
            std::cout << "pearson_r=undefined\n";
        }
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const AuditExit&) {
        return 3;
    } catch (const pafp::VersionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
