#include "spamsift/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "chaid_json.hpp"
#include "spamsift/errors.hpp"

namespace spamsift {

namespace {

std::filesystem::path resolve(const nlohmann::json& doc, const char* key, const std::filesystem::path& base) {
    std::filesystem::path p = doc.at(key).get<std::string>();
    if (p.is_relative() && !base.empty()) p = base / p;
    if (!std::filesystem::exists(p)) throw ConfigError(std::string(key) + " file not found: " + p.string());
    return p;
}

}  // namespace

AppConfig AppConfig::parse(std::string_view json_text, const std::filesystem::path& base_dir) {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");

    AppConfig config;
    try {
        if (doc.contains("blacklist")) config.blacklist_path = resolve(doc, "blacklist", base_dir);
        if (doc.contains("special_keywords")) config.special_keywords_path = resolve(doc, "special_keywords", base_dir);
        if (doc.contains("public_keywords")) config.public_keywords_path = resolve(doc, "public_keywords", base_dir);
        if (doc.contains("scores")) {
            const auto& scores = doc.at("scores");
            config.special_score = scores.value("special", config.special_score);
            config.public_score = scores.value("public", config.public_score);
            if (config.special_score <= 0 || config.public_score <= 0) {
                throw ConfigError("scores must be positive");
            }
        }
        if (doc.contains("thresholds")) {
            for (const auto& [name, cuts] : doc.at("thresholds").items()) {
                const auto attr = parse_attribute(name);
                if (!attr || *attr == Attribute::black_list) {
                    throw ConfigError("no thresholds apply to '" + name + "'");
                }
                const auto values = cuts.get<std::vector<long>>();
                if (values.size() != 4) throw ConfigError("thresholds." + name + " needs exactly 4 values");
                Thresholds t;
                std::copy(values.begin(), values.end(), t.cuts.begin());
                try {
                    t.validate();
                } catch (const ConfigError&) {
                    throw ConfigError("thresholds." + name + " must be strictly ascending");
                }
                config.extraction.threshold(*attr) = t;
            }
        }
        if (doc.contains("post_markers")) {
            config.extraction.post_markers.clear();
            for (const auto& m : doc.at("post_markers")) {
                config.extraction.post_markers.push_back(PostMarker::parse(m.get<std::string>()));
            }
        }
        if (doc.contains("meta_names")) {
            config.extraction.meta_names = doc.at("meta_names").get<std::vector<std::string>>();
        }
        if (doc.contains("chaid")) config.chaid = detail::chaid_config_from_json(doc.at("chaid"));
        config.seed = doc.value("seed", config.seed);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config: ") + e.what());
    }
    return config;
}

AppConfig AppConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str(), path.parent_path());
}

KeywordSet AppConfig::keywords() const {
    if (!special_keywords_path || !public_keywords_path) {
        throw ConfigError("config must name special_keywords and public_keywords files");
    }
    return KeywordSet(load_keyword_file(*special_keywords_path), load_keyword_file(*public_keywords_path),
                      special_score, public_score);
}

Blacklist AppConfig::blacklist() const { return blacklist_path ? Blacklist::load(*blacklist_path) : Blacklist(); }

}  // namespace spamsift
