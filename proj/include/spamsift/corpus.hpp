#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "spamsift/dataset.hpp"
#include "spamsift/features.hpp"

namespace spamsift {

struct ManifestEntry {
    std::string file;
    std::string url;
    Label label = Label::unlabeled;
};

/// Reads `<dir>/manifest.csv` (header `file,url,label`, labels
/// spam|nonspam|unknown). Throws ParseError or Error.
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& corpus_dir);

struct CorpusResult {
    Dataset dataset;
    std::vector<std::string> warnings;
};

/// Extracts one record per readable manifest row, in manifest order, on
/// up to `jobs` worker threads. Unreadable pages are skipped with a
/// warning; a page whose URL does not parse keeps its row with every
/// attribute at its lowest level.
CorpusResult extract_corpus(const std::filesystem::path& corpus_dir, const Blacklist& blacklist,
                            const KeywordSet& keywords, const ExtractionConfig& config, unsigned jobs = 4);

}  // namespace spamsift
