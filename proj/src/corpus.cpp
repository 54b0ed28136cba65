#include "spamsift/corpus.hpp"

#include <atomic>
#include <fstream>
#include <optional>
#include <sstream>
#include <thread>

#include "csv.hpp"
#include "spamsift/errors.hpp"

namespace spamsift {

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& corpus_dir) {
    const auto path = corpus_dir / "manifest.csv";
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read manifest " + path.string());
    std::vector<ManifestEntry> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1) {
            if (line != "file,url,label") throw ParseError(1, "manifest header must be 'file,url,label'");
            continue;
        }
        if (line.empty()) continue;
        auto fields = detail::split_csv_line(line, line_no);
        if (fields.size() != 3) throw ParseError(line_no, "manifest rows need 3 columns");
        const auto label = parse_label(fields[2]);
        if (!label) throw ParseError(line_no, "illegal label '" + fields[2] + "'");
        if (fields[0].empty()) throw ParseError(line_no, "empty file name");
        entries.push_back({std::move(fields[0]), std::move(fields[1]), *label});
    }
    if (line_no == 0) throw ParseError(1, "manifest is empty");
    return entries;
}

CorpusResult extract_corpus(const std::filesystem::path& corpus_dir, const Blacklist& blacklist,
                            const KeywordSet& keywords, const ExtractionConfig& config, unsigned jobs) {
    const auto entries = load_manifest(corpus_dir);
    std::vector<std::optional<SiteRecord>> records(entries.size());
    std::vector<std::string> warnings(entries.size());
    std::atomic<std::size_t> next{0};

    const auto worker = [&] {
        for (std::size_t i = next++; i < entries.size(); i = next++) {
            const auto& e = entries[i];
            const auto path = corpus_dir / e.file;
            std::ifstream in(path, std::ios::binary);
            std::stringstream buffer;
            if (in) buffer << in.rdbuf();
            if (!in || in.bad()) {
                warnings[i] = "skipping unreadable page " + path.string();
                continue;
            }
            PageDocument page{e.url, buffer.str(), path.string()};
            try {
                records[i] = extract_record(page, blacklist, keywords, config);
            } catch (const InvalidUrlError& err) {
                warnings[i] = e.file + ": " + err.what() + "; attributes left at very-min";
                SiteRecord fallback;
                fallback.url = e.url;
                records[i] = fallback;
            }
            records[i]->label = e.label;
        }
    };

    const unsigned threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(entries.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    CorpusResult result;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (records[i]) result.dataset.records.push_back(std::move(*records[i]));
        if (!warnings[i].empty()) result.warnings.push_back(std::move(warnings[i]));
    }
    return result;
}

}  // namespace spamsift
