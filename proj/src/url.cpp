#include "spamsift/url.hpp"

#include <algorithm>
#include <array>
#include <fstream>

#include "spamsift/errors.hpp"
#include "spamsift/pattern_match.hpp"

namespace spamsift {

namespace {

bool is_scheme_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '+' || c == '-' ||
           c == '.';
}

bool is_host_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '.' || c == '_';
}

bool is_ip_literal(std::string_view host) {
    if (host.find(':') != std::string_view::npos) return true;
    return std::all_of(host.begin(), host.end(), [](char c) { return (c >= '0' && c <= '9') || c == '.'; });
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r' || s.front() == '\n'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n'))
        s.remove_suffix(1);
    return s;
}

}  // namespace

Url Url::parse(std::string_view text) {
    text = trim(text);
    const auto colon = text.find(':');
    if (colon == std::string_view::npos || colon == 0) throw InvalidUrlError("missing scheme: '" + std::string(text) + "'");
    const auto scheme = text.substr(0, colon);
    if (!std::all_of(scheme.begin(), scheme.end(), is_scheme_char) ||
        !((scheme[0] >= 'a' && scheme[0] <= 'z') || (scheme[0] >= 'A' && scheme[0] <= 'Z'))) {
        throw InvalidUrlError("bad scheme: '" + std::string(text) + "'");
    }
    if (text.substr(colon + 1, 2) != "//") throw InvalidUrlError("missing host: '" + std::string(text) + "'");

    Url url;
    url.scheme = fold_case(scheme);
    auto rest = text.substr(colon + 3);
    const auto authority_end = rest.find_first_of("/?#");
    auto authority = rest.substr(0, authority_end);
    rest = authority_end == std::string_view::npos ? std::string_view{} : rest.substr(authority_end);

    if (const auto at = authority.rfind('@'); at != std::string_view::npos) authority.remove_prefix(at + 1);
    std::string_view host = authority;
    if (!authority.empty() && authority.front() == '[') {
        const auto close = authority.find(']');
        if (close == std::string_view::npos) throw InvalidUrlError("bad IPv6 host: '" + std::string(text) + "'");
        host = authority.substr(0, close + 1);
        authority.remove_prefix(close + 1);
        if (!authority.empty() && authority.front() != ':') throw InvalidUrlError("bad host: '" + std::string(text) + "'");
    } else if (const auto pc = authority.find(':'); pc != std::string_view::npos) {
        host = authority.substr(0, pc);
        authority.remove_prefix(pc);
    } else {
        authority = {};
    }
    if (!authority.empty() && authority.front() == ':') {
        const auto digits = authority.substr(1);
        if (!digits.empty()) {
            if (digits.size() > 5 || !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; }))
                throw InvalidUrlError("bad port: '" + std::string(text) + "'");
            url.port = std::stoi(std::string(digits));
        }
    }

    url.host = fold_case(host);
    while (!url.host.empty() && url.host.back() == '.') url.host.pop_back();
    if (url.host.empty()) throw InvalidUrlError("empty host: '" + std::string(text) + "'");
    if (url.host.front() != '[' && !std::all_of(url.host.begin(), url.host.end(), is_host_char)) {
        throw InvalidUrlError("bad host: '" + std::string(text) + "'");
    }

    const auto hash = rest.find('#');
    if (hash != std::string_view::npos) rest = rest.substr(0, hash);
    const auto q = rest.find('?');
    url.path = std::string(rest.substr(0, q));
    if (q != std::string_view::npos) url.query = std::string(rest.substr(q + 1));
    return url;
}

std::string registrable_domain(std::string_view host) {
    if (host.empty() || is_ip_literal(host)) return std::string(host);
    std::vector<std::string_view> labels;
    std::size_t start = 0;
    while (start <= host.size()) {
        const auto dot = host.find('.', start);
        const auto stop = dot == std::string_view::npos ? host.size() : dot;
        labels.push_back(host.substr(start, stop - start));
        if (dot == std::string_view::npos) break;
        start = dot + 1;
    }
    if (labels.size() <= 2) return std::string(host);
    static constexpr std::array<std::string_view, 13> kSecondLevel = {"co", "com", "net", "org", "gov", "edu", "ac",
                                                                      "or", "ne",  "go",  "gob", "nic", "mil"};
    std::size_t keep = 2;
    const auto tld = labels.back();
    const auto sld = labels[labels.size() - 2];
    if (tld.size() == 2 && std::find(kSecondLevel.begin(), kSecondLevel.end(), sld) != kSecondLevel.end()) keep = 3;
    if (labels.size() <= keep) return std::string(host);
    const auto first = labels[labels.size() - keep];
    return std::string(host.substr(static_cast<std::size_t>(first.data() - host.data())));
}

Blacklist::Blacklist(const std::vector<std::string>& hosts) {
    for (const auto& raw : hosts) {
        auto entry = fold_case(trim(raw));
        while (!entry.empty() && entry.back() == '.') entry.pop_back();
        if (entry.empty()) throw ConfigError("empty blacklist entry");
        if (!std::all_of(entry.begin(), entry.end(), is_host_char)) {
            throw ConfigError("blacklist entry must be a bare domain: '" + std::string(raw) + "'");
        }
        hosts_.insert(std::move(entry));
    }
}

Blacklist Blacklist::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read blacklist " + path.string());
    std::vector<std::string> hosts;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view(line);
        if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        view = trim(view);
        if (view.empty()) continue;
        if (!std::all_of(view.begin(), view.end(), [](char c) { return is_host_char(fold_char(c)); })) {
            throw ParseError(line_no, "blacklist entry must be a bare domain: '" + std::string(view) + "'");
        }
        hosts.emplace_back(view);
    }
    return Blacklist(hosts);
}

bool Blacklist::matches_host(std::string_view host) const {
    if (hosts_.empty()) return false;
    std::string folded = fold_case(host);
    std::string_view h = folded;
    for (;;) {
        if (hosts_.contains(h)) return true;
        const auto dot = h.find('.');
        if (dot == std::string_view::npos) return false;
        h.remove_prefix(dot + 1);
    }
}

bool check_blacklist(std::string_view url, const Blacklist& blacklist) {
    return blacklist.matches_host(Url::parse(url).host);
}

}  // namespace spamsift
