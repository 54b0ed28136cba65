#include "spamsift/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "csv.hpp"
#include "spamsift/errors.hpp"
#include "spamsift/rng.hpp"

namespace spamsift {

namespace {

constexpr std::string_view kHeader =
    "url,black_list,feature_of_url,meta_tag,key_word_special,key_word_public,count_of_internal_link,"
    "count_external_link,count_of_post,label";
constexpr std::size_t kColumns = kAttributeCount + 2;

void write_field(std::ostream& out, std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
        out << field;
        return;
    }
    out << '"';
    for (const char c : field) {
        if (c == '"') out << '"';
        out << c;
    }
    out << '"';
}

std::vector<std::size_t> iota_indices(std::size_t n) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    return idx;
}

std::size_t round_to_size(double x) { return static_cast<std::size_t>(std::llround(x)); }

}  // namespace

std::size_t Dataset::count(Label label) const {
    return static_cast<std::size_t>(
        std::count_if(records.begin(), records.end(), [label](const SiteRecord& r) { return r.label == label; }));
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
    Dataset out;
    out.records.reserve(indices.size());
    for (const auto i : indices) out.records.push_back(records.at(i));
    return out;
}

std::string_view csv_header() { return kHeader; }

void write_csv(const Dataset& dataset, std::ostream& out) {
    out << kHeader << '\n';
    for (const auto& r : dataset.records) {
        write_field(out, r.url);
        for (const auto& info : attribute_schema()) out << ',' << category_name(info.id, r.category(info.id));
        out << ',' << label_name(r.label) << '\n';
    }
}

Dataset read_csv(std::istream& in) {
    Dataset dataset;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!header_seen) {
            if (line != kHeader) throw ParseError(line_no, "unexpected header '" + line + "'");
            header_seen = true;
            continue;
        }
        if (line.empty()) continue;
        const auto fields = detail::split_csv_line(line, line_no);
        if (fields.size() != kColumns) {
            throw ParseError(line_no, "expected " + std::to_string(kColumns) + " columns, found " +
                                          std::to_string(fields.size()));
        }
        SiteRecord record;
        record.url = fields[0];
        for (const auto& info : attribute_schema()) {
            const auto& text = fields[1 + static_cast<std::size_t>(info.id)];
            const auto code = parse_category(info.id, text);
            if (!code) throw ParseError(line_no, "illegal value '" + text + "' for " + std::string(info.name));
            record.set_category(info.id, *code);
        }
        const auto label = parse_label(fields.back());
        if (!label) throw ParseError(line_no, "illegal label '" + fields.back() + "'");
        record.label = *label;
        dataset.records.push_back(std::move(record));
    }
    if (!header_seen) throw ParseError(1, "missing header");
    return dataset;
}

void save_csv(const Dataset& dataset, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    write_csv(dataset, out);
    if (!out) throw Error("write failed for " + path.string());
}

Dataset load_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    return read_csv(in);
}

Dataset labeled_only(const Dataset& dataset) {
    Dataset out;
    std::copy_if(dataset.records.begin(), dataset.records.end(), std::back_inserter(out.records),
                 [](const SiteRecord& r) { return r.label != Label::unlabeled; });
    return out;
}

void SplitSpec::validate() const {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train fraction must lie in (0, 1)");
}

std::pair<Dataset, Dataset> split_train_test(const Dataset& dataset, const SplitSpec& spec) {
    spec.validate();
    if (dataset.empty()) throw ConfigError("cannot split an empty dataset");
    const std::size_t n = dataset.size();
    const std::size_t n_train = round_to_size(spec.train_fraction * static_cast<double>(n));
    Rng rng(spec.seed);

    std::vector<char> in_train(n, 0);
    if (!spec.stratify) {
        auto order = iota_indices(n);
        rng.shuffle(std::span(order));
        for (std::size_t i = 0; i < n_train; ++i) in_train[order[i]] = 1;
    } else {
        // Largest-remainder allocation of n_train across the label strata.
        std::array<std::vector<std::size_t>, 3> strata;
        for (std::size_t i = 0; i < n; ++i) strata[static_cast<std::size_t>(dataset.records[i].label)].push_back(i);
        std::array<std::size_t, 3> quota{};
        std::array<double, 3> remainder{};
        std::size_t assigned = 0;
        for (std::size_t s = 0; s < strata.size(); ++s) {
            const double exact = spec.train_fraction * static_cast<double>(strata[s].size());
            quota[s] = static_cast<std::size_t>(std::floor(exact));
            remainder[s] = exact - static_cast<double>(quota[s]);
            assigned += quota[s];
        }
        while (assigned < n_train) {
            std::size_t best = 0;
            double best_rem = -1.0;
            for (std::size_t s = 0; s < strata.size(); ++s) {
                if (quota[s] < strata[s].size() && remainder[s] > best_rem) {
                    best = s;
                    best_rem = remainder[s];
                }
            }
            ++quota[best];
            remainder[best] = -1.0;
            ++assigned;
        }
        for (std::size_t s = 0; s < strata.size(); ++s) {
            rng.shuffle(std::span(strata[s]));
            for (std::size_t i = 0; i < quota[s]; ++i) in_train[strata[s][i]] = 1;
        }
    }

    std::pair<Dataset, Dataset> parts;
    for (std::size_t i = 0; i < n; ++i) {
        (in_train[i] ? parts.first : parts.second).records.push_back(dataset.records[i]);
    }
    return parts;
}

std::vector<std::size_t> FoldPlan::test_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        if (assignment[i] == fold) out.push_back(i);
    }
    return out;
}

std::vector<std::size_t> FoldPlan::train_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        if (assignment[i] != fold) out.push_back(i);
    }
    return out;
}

std::vector<std::size_t> FoldPlan::fold_sizes() const {
    std::vector<std::size_t> sizes(k, 0);
    for (const auto f : assignment) ++sizes.at(f);
    return sizes;
}

FoldPlan k_fold(std::size_t n, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw ConfigError("k must be at least 2");
    if (k > n) throw ConfigError("k = " + std::to_string(k) + " exceeds the " + std::to_string(n) + " records");
    auto order = iota_indices(n);
    Rng rng(seed);
    rng.shuffle(std::span(order));
    FoldPlan plan;
    plan.k = k;
    plan.assignment.assign(n, 0);
    for (std::size_t pos = 0; pos < n; ++pos) plan.assignment[order[pos]] = pos % k;
    return plan;
}

// ---------------------------------------------------------------------------

std::size_t GeneratorSpec::rule_size(std::size_t rule) const {
    const auto& r = rules.at(rule);
    if (r.count) return *r.count;
    return round_to_size(r.weight * static_cast<double>(n));
}

void GeneratorSpec::validate() const {
    if (n == 0) throw ConfigError("generator needs n > 0");
    if (n_spam > n) throw ConfigError("n_spam exceeds n");
    std::size_t planted = 0;
    for (std::size_t r = 0; r < rules.size(); ++r) {
        const auto& rule = rules[r];
        if (!(rule.p_spam >= 0.0 && rule.p_spam <= 1.0)) throw ConfigError("rule p_spam must lie in [0, 1]");
        if (!rule.count && !(rule.weight >= 0.0 && rule.weight <= 1.0)) {
            throw ConfigError("rule weight must lie in [0, 1]");
        }
        for (const auto& [attr, code] : rule.conditions) {
            if (code < 0 || code >= attribute_info(attr).level_count) throw ConfigError("rule level out of range");
        }
        for (std::size_t e = 0; e < r; ++e) {
            const auto& earlier = rules[e].conditions;
            const bool shadowed = std::all_of(earlier.begin(), earlier.end(), [&](const auto& kv) {
                const auto it = rule.conditions.find(kv.first);
                return it != rule.conditions.end() && it->second == kv.second;
            });
            if (shadowed) throw ConfigError("rule " + std::to_string(r) + " is shadowed by rule " + std::to_string(e));
        }
        planted += rule_size(r);
    }
    if (planted > n) throw ConfigError("planted rule sizes exceed n");
    for (const auto& [attr, probs] : marginals) {
        if (probs.size() != static_cast<std::size_t>(attribute_info(attr).level_count)) {
            throw ConfigError("marginal for " + std::string(attribute_info(attr).name) + " has the wrong length");
        }
        double total = 0.0;
        for (const double p : probs) {
            if (!(p >= 0.0)) throw ConfigError("marginal probabilities must be non-negative");
            total += p;
        }
        if (!(total > 0.0)) throw ConfigError("marginal probabilities must not all be zero");
    }
}

std::optional<std::size_t> matching_rule(const GeneratorSpec& spec, const SiteRecord& record) {
    for (std::size_t r = 0; r < spec.rules.size(); ++r) {
        const auto& cond = spec.rules[r].conditions;
        if (std::all_of(cond.begin(), cond.end(),
                        [&](const auto& kv) { return record.category(kv.first) == kv.second; })) {
            return r;
        }
    }
    return std::nullopt;
}

namespace {

int draw_level(Rng& rng, const std::vector<double>* probs, int level_count) {
    if (probs == nullptr) return static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(level_count)));
    const double total = std::accumulate(probs->begin(), probs->end(), 0.0);
    const double u = rng.uniform01() * total;
    double acc = 0.0;
    int last_positive = 0;
    for (int i = 0; i < level_count; ++i) {
        const double p = (*probs)[static_cast<std::size_t>(i)];
        if (p <= 0.0) continue;
        last_positive = i;
        acc += p;
        if (u < acc) return i;
    }
    return last_positive;
}

}  // namespace

Dataset generate_synthetic(const GeneratorSpec& spec, std::uint64_t seed) {
    spec.validate();
    Rng rng(seed);
    constexpr int kMaxAttempts = 100000;

    const auto draw_record = [&](std::optional<std::size_t> rule) {
        const std::size_t limit = rule.value_or(spec.rules.size());
        for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
            SiteRecord record;
            for (const auto& info : attribute_schema()) {
                const auto it = spec.marginals.find(info.id);
                const auto* probs = it == spec.marginals.end() ? nullptr : &it->second;
                record.set_category(info.id, draw_level(rng, probs, info.level_count));
            }
            if (rule) {
                for (const auto& [attr, code] : spec.rules[*rule].conditions) record.set_category(attr, code);
            }
            const auto first = matching_rule(spec, record);
            if (!first || *first >= limit) return record;
        }
        throw ConfigError("generator cannot draw a record outside the earlier rules");
    };

    Dataset dataset;
    dataset.records.reserve(spec.n);
    std::size_t planted_spam = 0;
    for (std::size_t r = 0; r < spec.rules.size(); ++r) {
        const auto size = spec.rule_size(r);
        for (std::size_t i = 0; i < size; ++i) {
            auto record = draw_record(r);
            const bool spam = rng.bernoulli(spec.rules[r].p_spam);
            record.label = spam ? Label::spam : Label::non_spam;
            planted_spam += spam ? 1 : 0;
            dataset.records.push_back(std::move(record));
        }
    }
    const std::size_t background = spec.n - dataset.size();
    if (planted_spam > spec.n_spam || spec.n_spam - planted_spam > background) {
        throw ConfigError("infeasible spec: planted cells drew " + std::to_string(planted_spam) +
                          " spam records but n_spam is " + std::to_string(spec.n_spam) + " with " +
                          std::to_string(background) + " background records");
    }
    std::vector<char> background_spam(background, 0);
    std::fill_n(background_spam.begin(), spec.n_spam - planted_spam, 1);
    rng.shuffle(std::span(background_spam));
    for (std::size_t i = 0; i < background; ++i) {
        auto record = draw_record(std::nullopt);
        record.label = background_spam[i] ? Label::spam : Label::non_spam;
        dataset.records.push_back(std::move(record));
    }

    rng.shuffle(std::span(dataset.records));
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        dataset.records[i].url = "http://site" + std::to_string(i) + ".synthetic.example/";
    }
    return dataset;
}

GeneratorSpec parse_generator_spec(std::string_view json_text) {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("generator spec is not valid JSON: ") + e.what());
    }
    try {
        GeneratorSpec spec;
        spec.n = doc.at("n").get<std::size_t>();
        spec.n_spam = doc.at("n_spam").get<std::size_t>();
        spec.seed = doc.value("seed", std::uint64_t{0});
        for (const auto& jr : doc.value("rules", json::array())) {
            GeneratorRule rule;
            for (const auto& [name, level] : jr.at("conditions").items()) {
                const auto attr = parse_attribute(name);
                if (!attr) throw ConfigError("unknown attribute '" + name + "' in generator rule");
                const auto code = parse_category(*attr, level.get<std::string>());
                if (!code) throw ConfigError("unknown level '" + level.get<std::string>() + "' for " + name);
                rule.conditions[*attr] = *code;
            }
            rule.p_spam = jr.at("p_spam").get<double>();
            rule.weight = jr.value("weight", 0.0);
            if (jr.contains("count")) rule.count = jr.at("count").get<std::size_t>();
            spec.rules.push_back(std::move(rule));
        }
        if (doc.contains("marginals")) {
            for (const auto& [name, probs] : doc.at("marginals").items()) {
                const auto attr = parse_attribute(name);
                if (!attr) throw ConfigError("unknown attribute '" + name + "' in marginals");
                spec.marginals[*attr] = probs.get<std::vector<double>>();
            }
        }
        spec.validate();
        return spec;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed generator spec: ") + e.what());
    }
}

GeneratorSpec load_generator_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read generator spec " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_generator_spec(buffer.str());
}

}  // namespace spamsift
