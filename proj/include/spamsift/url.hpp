#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace spamsift {

/// Minimal absolute-URL split. Host is lower-cased, userinfo and port
/// are dropped from it.
struct Url {
    std::string scheme;  // lower-cased
    std::string host;
    std::optional<int> port;
    std::string path;   // includes the leading '/', empty when absent
    std::string query;  // without '?'

    /// Throws InvalidUrlError unless `text` is scheme://host[...].
    static Url parse(std::string_view text);

    bool is_http() const { return scheme == "http" || scheme == "https"; }
};

/// Heuristic registrable domain: the last two labels, or three when the
/// second-level label is a common ccTLD registry label (co.uk, com.au...).
/// IP literals are returned unchanged.
std::string registrable_domain(std::string_view host);

/// Set of blacklisted domains. A host matches when it, or any parent
/// domain of it, is in the set.
class Blacklist {
public:
    Blacklist() = default;
    /// Throws ConfigError on entries with a scheme, path, port or spaces.
    explicit Blacklist(const std::vector<std::string>& hosts);

    static Blacklist load(const std::filesystem::path& path);

    bool matches_host(std::string_view host) const;
    const std::set<std::string, std::less<>>& hosts() const noexcept { return hosts_; }
    bool empty() const noexcept { return hosts_.empty(); }

private:
    std::set<std::string, std::less<>> hosts_;
};

/// Throws InvalidUrlError when the url does not parse.
bool check_blacklist(std::string_view url, const Blacklist& blacklist);

}  // namespace spamsift
