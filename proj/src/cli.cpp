#include "spamsift/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "spamsift/chaid.hpp"
#include "spamsift/config.hpp"
#include "spamsift/corpus.hpp"
#include "spamsift/dataset.hpp"
#include "spamsift/errors.hpp"
#include "spamsift/features.hpp"
#include "spamsift/metrics.hpp"

namespace spamsift::cli {

namespace {

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::optional<std::string> config_path(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("SPAMSIFT_CONFIG"); env != nullptr && *env != '\0') return std::string(env);
    return std::nullopt;
}

AppConfig resolve_config(const std::string& flag) {
    const auto path = config_path(flag);
    return path ? AppConfig::load(*path) : AppConfig{};
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << text;
    if (!out) throw Error("write failed for " + path);
}

std::string label_counts(const Dataset& d) {
    return "spam=" + std::to_string(d.count(Label::spam)) + ", non-spam=" + std::to_string(d.count(Label::non_spam)) +
           ", unlabeled=" + std::to_string(d.count(Label::unlabeled));
}

std::string metric_line(const ConfusionMatrix& cm) {
    return "precision=" + fixed(precision(cm).value, 4) + " recall=" + fixed(recall(cm).value, 4) +
           " f_measure=" + fixed(f_measure(cm).value, 4) + " accuracy=" + fixed(cm.accuracy(), 4);
}

struct Options {
    std::string corpus, config, out, data, model, page, url, dot, spec;
    unsigned jobs = 4;
    std::size_t folds = 10;
    std::optional<std::uint64_t> seed;
    std::optional<double> train_fraction;
    bool stratify = false;
};

int cmd_extract(const Options& o, std::ostream& out, std::ostream& err) {
    const auto path = config_path(o.config);
    if (!path) {
        err << "extract needs --config (or SPAMSIFT_CONFIG) naming the keyword lists\n";
        return kInput;
    }
    const auto config = AppConfig::load(*path);
    const auto result = extract_corpus(o.corpus, config.blacklist(), config.keywords(), config.extraction, o.jobs);
    for (const auto& w : result.warnings) err << "warning: " << w << '\n';
    save_csv(result.dataset, o.out);
    out << "extracted " << result.dataset.size() << " records (" << label_counts(result.dataset) << ") to " << o.out
        << '\n';
    return kOk;
}

int cmd_train(const Options& o, std::ostream& out, std::ostream& err) {
    const auto config = resolve_config(o.config);
    const auto all = load_csv(o.data);
    auto data = labeled_only(all);
    if (data.size() != all.size()) err << "warning: ignoring " << all.size() - data.size() << " unlabeled records\n";
    if (data.empty()) {
        err << "no labeled records in " << o.data << '\n';
        return kInput;
    }
    std::optional<Dataset> holdout;
    if (o.train_fraction) {
        auto [train, test] = split_train_test(data, SplitSpec{*o.train_fraction, o.seed.value_or(config.seed), o.stratify});
        data = std::move(train);
        holdout = std::move(test);
    }
    const auto tree = grow_tree(data, config.chaid);
    save_model(tree, o.out);
    out << "trained on " << data.size() << " records: " << tree.nodes().size() << " nodes, " << tree.leaves().size()
        << " leaves -> " << o.out << '\n';
    if (holdout && !holdout->empty()) {
        out << "holdout (" << holdout->size() << " records): " << metric_line(evaluate(tree, *holdout)) << '\n';
    }
    return kOk;
}

int cmd_predict(const Options& o, std::ostream& out, std::ostream& err) {
    const auto tree = load_model(o.model);
    if (!o.page.empty()) {
        if (o.url.empty()) {
            err << "--page needs --url\n";
            return kUsage;
        }
        const auto config = resolve_config(o.config);
        const PageDocument page{o.url, read_file(o.page), o.page};
        const auto record = extract_record(page, config.blacklist(), config.keywords(), config.extraction);
        const auto p = predict(tree, record);
        out << label_name(p.label) << ' ' << fixed(p.spam_probability, 6) << " leaf=" << p.leaf
            << (p.fallback ? " fallback" : "") << '\n';
        return kOk;
    }
    if (o.data.empty()) {
        err << "predict needs --page/--url or --data\n";
        return kUsage;
    }
    const auto data = load_csv(o.data);
    std::ostringstream csv;
    csv << "url,predicted,probability,leaf\n";
    for (const auto& r : data.records) {
        const auto p = predict(tree, r);
        csv << r.url << ',' << label_name(p.label) << ',' << fixed(p.spam_probability, 6) << ',' << p.leaf << '\n';
    }
    if (o.out.empty()) {
        out << csv.str();
    } else {
        write_text(o.out, csv.str());
    }
    return kOk;
}

int cmd_rules(const Options& o, std::ostream& out, std::ostream&) {
    const auto tree = load_model(o.model);
    const auto rules = extract_rules(tree);
    for (std::size_t i = 0; i < rules.size(); ++i) {
        const auto& r = rules[i];
        out << i + 1 << ". spam " << fixed(100.0 * r.spam_proportion, 1) << "% (" << r.spam_count << '/'
            << r.total_count << ")  node " << r.leaf << "  " << r.condition_text() << '\n';
    }
    if (!o.dot.empty()) write_text(o.dot, to_dot(tree));
    return kOk;
}

int cmd_evaluate(const Options& o, std::ostream& out, std::ostream& err) {
    const auto config = resolve_config(o.config);
    const auto all = load_csv(o.data);
    const auto data = labeled_only(all);
    if (data.size() != all.size()) err << "warning: ignoring " << all.size() - data.size() << " unlabeled records\n";
    const auto cv = cross_validate(data, config.chaid, o.folds, o.seed.value_or(config.seed));
    std::ostringstream csv;
    write_metrics_csv(cv, csv);
    const std::string summary = "k=" + std::to_string(o.folds) + " mean precision=" + fixed(cv.precision.mean, 4) +
                                " (sd " + fixed(cv.precision.stdev, 4) + ") recall=" + fixed(cv.recall.mean, 4) +
                                " (sd " + fixed(cv.recall.stdev, 4) + ") F=" + fixed(cv.f_measure.mean, 4) + " (sd " +
                                fixed(cv.f_measure.stdev, 4) + ")\n";
    if (o.out.empty()) {
        out << csv.str();
        err << summary;
    } else {
        write_text(o.out, csv.str());
        out << summary;
    }
    return kOk;
}

int cmd_synth(const Options& o, std::ostream& out, std::ostream&) {
    const auto spec = load_generator_spec(o.spec);
    const auto data = generate_synthetic(spec, o.seed.value_or(spec.seed));
    save_csv(data, o.out);
    out << "generated " << data.size() << " records (" << label_counts(data) << ") to " << o.out << '\n';
    return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Web spam feature extraction and CHAID pattern discovery", "spamsift"};
    app.require_subcommand(1);
    Options o;

    auto* extract = app.add_subcommand("extract", "Extract a dataset CSV from an HTML corpus");
    extract->add_option("--corpus", o.corpus, "Corpus directory holding manifest.csv")->required()->check(CLI::ExistingDirectory);
    extract->add_option("--config", o.config, "Config JSON (default: $SPAMSIFT_CONFIG)");
    extract->add_option("--out", o.out, "Output dataset CSV")->required();
    extract->add_option("--jobs", o.jobs, "Worker threads")->default_val(4)->check(CLI::Range(1u, 256u));

    auto* train = app.add_subcommand("train", "Grow a CHAID tree from a dataset CSV");
    train->add_option("--data", o.data, "Dataset CSV")->required();
    train->add_option("--config", o.config, "Config JSON (default: $SPAMSIFT_CONFIG)");
    train->add_option("--out", o.out, "Output model JSON")->required();
    train->add_option("--train-fraction", o.train_fraction, "Hold out the rest and report its metrics")
        ->check(CLI::Range(0.0, 1.0));
    train->add_option("--seed", o.seed, "Seed for the holdout split (default: config seed)");
    train->add_flag("--stratify", o.stratify, "Keep the class ratio in the holdout split");

    auto* predict_cmd = app.add_subcommand("predict", "Classify a page or every row of a dataset CSV");
    predict_cmd->add_option("--model", o.model, "Model JSON")->required();
    auto* page_opt = predict_cmd->add_option("--page", o.page, "HTML file to classify");
    predict_cmd->add_option("--url", o.url, "URL of --page");
    auto* data_opt = predict_cmd->add_option("--data", o.data, "Dataset CSV to classify");
    predict_cmd->add_option("--config", o.config, "Config JSON for --page (default: $SPAMSIFT_CONFIG)");
    predict_cmd->add_option("--out", o.out, "Write predictions CSV here instead of stdout");
    page_opt->excludes(data_opt);

    auto* rules = app.add_subcommand("rules", "Print the pattern rules of a model");
    rules->add_option("--model", o.model, "Model JSON")->required();
    rules->add_option("--dot", o.dot, "Also write a Graphviz rendering here");

    auto* evaluate_cmd = app.add_subcommand("evaluate", "k-fold cross-validation of CHAID on a dataset CSV");
    evaluate_cmd->add_option("--data", o.data, "Dataset CSV")->required();
    evaluate_cmd->add_option("--config", o.config, "Config JSON (default: $SPAMSIFT_CONFIG)");
    evaluate_cmd->add_option("--folds", o.folds, "Number of folds")->default_val(10)->check(CLI::Range(2, 1000000));
    evaluate_cmd->add_option("--seed", o.seed, "Fold seed (default: config seed)");
    evaluate_cmd->add_option("--out", o.out, "Write the metrics CSV here instead of stdout");

    auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset from a generator spec");
    synth->add_option("--spec", o.spec, "Generator spec JSON")->required();
    synth->add_option("--out", o.out, "Output dataset CSV")->required();
    synth->add_option("--seed", o.seed, "Override the spec seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    const std::function<int(const Options&, std::ostream&, std::ostream&)> handler =
        extract->parsed()        ? cmd_extract
        : train->parsed()        ? cmd_train
        : predict_cmd->parsed()  ? cmd_predict
        : rules->parsed()        ? cmd_rules
        : evaluate_cmd->parsed() ? cmd_evaluate
                                 : cmd_synth;
    try {
        return handler(o, out, err);
    } catch (const ModelFormatError& e) {
        err << "model error: " << e.what() << '\n';
        return kModel;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kInput;
    }
}

}  // namespace spamsift::cli
