// Batch command-line front end: synth, decompose, featurize, rank, correlate,
// classify. Errors print one line `error: <kind>: <message>` and exit 1.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>

#include "icf/analyze.hpp"
#include "icf/pipeline.hpp"
#include "icf/select.hpp"
#include "icf/synth.hpp"

namespace fs = std::filesystem;
using namespace icf;

namespace {

struct Shared {
    RunConfig cfg;
    bool emit_config = false;

    std::string header() const { return emit_config ? cfg.comment_header() : std::string(); }
};

void add_shared(CLI::App* cmd, Shared& s) {
    auto& c = s.cfg;
    cmd->add_option("--window", c.window, "Mask half-width N")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--modes", c.num_modes, "Number of mode functions m")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--subseries", c.subseries, "Number of subseries K")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--tol", c.tol, "Relative stopping tolerance of the iterated filter")->capture_default_str();
    cmd->add_option("--max-iter", c.max_iter, "Iteration cap per mode")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--c", c.C, "SVM soft-margin penalty")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--splits", c.splits, "Repeated random splits S")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--seed", c.seed, "Root seed for all randomness")->capture_default_str();
    cmd->add_option("--train-healthy", c.train_healthy, "Healthy subjects per training split")->capture_default_str();
    cmd->add_option("--train-chf", c.train_chf, "CHF subjects per training split")->capture_default_str();
    cmd->add_option("--max-drop", c.max_drop_fraction, "Max fraction of rejected lines per RR file")->capture_default_str();
    cmd->add_option("--variance-eps", c.variance_eps, "Near-constant feature threshold")->capture_default_str();
    cmd->add_option("--rfe-step", c.rfe_step, "Features eliminated per RFE round")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_flag("--emit-config", s.emit_config, "Write the resolved configuration as '#' lines atop each CSV");
}

Cohort load(const fs::path& manifest, const RunConfig& cfg) {
    return read_manifest(manifest, {.max_drop_fraction = cfg.max_drop_fraction});
}

std::string component_tag(std::size_t c, std::size_t modes) {
    return c < modes ? "F" + std::to_string(c + 1) : std::string("R");
}

std::string threshold_tag(Threshold t) {
    switch (t) {
        case Threshold::plus1: return "p1";
        case Threshold::plus2: return "p2";
        case Threshold::minus1: return "n1";
        case Threshold::minus2: return "n2";
        case Threshold::zero: break;
    }
    return "0";
}

void cmd_synth(std::size_t healthy, std::size_t chf, std::size_t length, const Shared& s, const fs::path& out) {
    write_cohort(gen_cohort(healthy, chf, s.cfg.seed, length), out, s.header());
}

void cmd_decompose(const fs::path& manifest, const Shared& s, const fs::path& out) {
    const auto cohort = load(manifest, s.cfg);
    for (const auto& ts : cohort.subjects) {
        const auto d = decompose_subject(ts, s.cfg);
        io::write_atomic(out / (ts.id + ".decomposition.csv"), format_decomposition(ts.values, d, s.header()));
    }
}

void cmd_featurize(const fs::path& manifest, const Shared& s, const fs::path& out) {
    const auto m = featurize_cohort(load(manifest, s.cfg), s.cfg);
    io::write_atomic(out, format_feature_matrix(m, s.header()));
}

void cmd_rank(const fs::path& matrix_path, const Shared& s, const fs::path& out) {
    const auto m = parse_feature_matrix(io::read_text(matrix_path), matrix_path.string());
    const auto result = stability_rank(m, s.cfg.stability_options());
    io::write_atomic(out / "ranking.csv", format_ranking(result, s.header()));
    io::write_atomic(out / "errors.csv", format_error_histogram(result, s.header()));

    // Final classifier: all labeled subjects, the consensus top features.
    std::vector<std::size_t> rows(m.rows());
    for (std::size_t r = 0; r < rows.size(); ++r) rows[r] = r;
    std::vector<std::size_t> top;
    for (std::size_t i = 0; i < std::min<std::size_t>(10, result.order.size()); ++i) top.push_back(result.order[i]);
    const auto model = fit_model(m, rows, top, s.cfg.C, s.cfg.seed);
    io::write_atomic(out / "model.txt", s.header() + format_model(model));
}

void cmd_correlate(const fs::path& manifest, const Shared& s, const fs::path& out) {
    const auto cohort = load(manifest, s.cfg);
    require_both_classes(cohort);
    io::write_atomic(out / "scatter.csv", format_scatter(mean_variance_scatter(cohort), s.header()));
    const auto subjects = decompose_cohort(cohort, s.cfg);
    const std::size_t modes = s.cfg.num_modes;
    for (std::size_t c = 0; c < std::min<std::size_t>(2, modes); ++c) {
        const auto tag = component_tag(c, modes);
        for (auto t : {Threshold::plus1, Threshold::minus1, Threshold::plus2, Threshold::minus2}) {
            const auto curves = order_stat_correlations(subjects, c, t, s.cfg.subseries);
            io::write_atomic(out / ("order_" + tag + "_" + threshold_tag(t) + "_m.csv"), format_curve(curves.means, s.header()));
            io::write_atomic(out / ("order_" + tag + "_" + threshold_tag(t) + "_sigma.csv"),
                             format_curve(curves.sigmas, s.header()));
        }
        io::write_atomic(out / ("balance_" + tag + ".csv"), format_balance(outlier_balance(subjects, c), s.header()));
        io::write_atomic(out / ("vsweep_" + tag + ".csv"),
                         format_curve(v_sweep(subjects, c, default_v_grid(), s.cfg.subseries), s.header()));
    }
}

void cmd_classify(const fs::path& model_path, const fs::path& manifest, const Shared& s, const fs::path& out) {
    const auto model = parse_model(io::read_text(model_path));
    const auto cohort = load(manifest, s.cfg);
    std::string csv = s.header() + "id,label,margin\n";
    for (const auto& ts : cohort.subjects) {
        const auto p = predict(model, featurize_series(ts, s.cfg));
        csv += ts.id + "," + (p.label > 0 ? "chf" : "healthy") + "," + io::format_double(p.margin, 12) + "\n";
    }
    io::write_atomic(out, csv);
}

std::string one_line(std::string s) {
    for (auto& c : s)
        if (c == '\n' || c == '\r') c = ' ';
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Iterative-filter decomposition, outlier features and SVM-RFE ranking for RR-interval series"};
    app.require_subcommand(1);

    Shared shared;
    fs::path in, in2, out;
    std::size_t n_healthy = 72, n_chf = 43, length = 20000;

    auto* synth = app.add_subcommand("synth", "Write a synthetic labeled cohort (RR files + manifest.csv)");
    synth->add_option("out_dir", out, "Output directory")->required();
    synth->add_option("--healthy", n_healthy, "Healthy subjects")->capture_default_str()->check(CLI::PositiveNumber);
    synth->add_option("--chf", n_chf, "CHF subjects")->capture_default_str()->check(CLI::PositiveNumber);
    synth->add_option("--length", length, "Beats per subject")->capture_default_str()->check(CLI::PositiveNumber);
    add_shared(synth, shared);

    auto* dec = app.add_subcommand("decompose", "Write t,x,F1..Fm,R per subject");
    dec->add_option("manifest", in, "Cohort manifest (id,path,label)")->required();
    dec->add_option("out_dir", out, "Output directory")->required();
    add_shared(dec, shared);

    auto* feat = app.add_subcommand("featurize", "Write the feature matrix CSV");
    feat->add_option("manifest", in, "Cohort manifest (id,path,label)")->required();
    feat->add_option("out_path", out, "Feature matrix CSV")->required();
    add_shared(feat, shared);

    auto* rank = app.add_subcommand("rank", "Stability ranking: ranking.csv, errors.csv, model.txt");
    rank->add_option("feature_matrix", in, "Feature matrix CSV from featurize")->required();
    rank->add_option("out_dir", out, "Output directory")->required();
    add_shared(rank, shared);

    auto* corr = app.add_subcommand("correlate", "Scatter, order-statistic, balance and v-sweep CSVs");
    corr->add_option("manifest", in, "Labeled cohort manifest")->required();
    corr->add_option("out_dir", out, "Output directory")->required();
    add_shared(corr, shared);

    auto* cls = app.add_subcommand("classify", "Predict labels with a model from rank");
    cls->add_option("model", in, "model.txt written by rank")->required();
    cls->add_option("manifest", in2, "Cohort manifest; labels are ignored")->required();
    cls->add_option("out_path", out, "Predictions CSV")->required();
    add_shared(cls, shared);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*synth) cmd_synth(n_healthy, n_chf, length, shared, out);
        else if (*dec) cmd_decompose(in, shared, out);
        else if (*feat) cmd_featurize(in, shared, out);
        else if (*rank) cmd_rank(in, shared, out);
        else if (*corr) cmd_correlate(in, shared, out);
        else if (*cls) cmd_classify(in, in2, shared, out);
    } catch (const Error& e) {
        std::cerr << "error: " << to_string(e.kind()) << ": " << one_line(e.what()) << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << one_line(e.what()) << "\n";
        return 1;
    }
    return 0;
}
