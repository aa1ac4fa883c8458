// Minimal http/https URL type: parsing, normalization, relative resolution,
// query-string handling. Only what a same-domain crawler and form prober need.

#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pth {

struct Url {
    std::string scheme;   // "http" or "https", lowercased
    std::string host;     // lowercased
    int port = 0;         // 0 = default for scheme
    std::string path;     // starts with "/" (empty path becomes "/")
    std::string query;    // raw, without leading "?"
    std::string fragment; // without leading "#"

    static std::optional<Url> parse(const std::string& raw);

    bool is_http() const { return scheme == "http" || scheme == "https"; }
    int effective_port() const;

    // scheme://host[:port] with default ports omitted.
    std::string origin() const;
    std::string path_and_query() const;
    std::string str() const;

    // Canonical form for dedup: lowercased scheme/host, default port
    // stripped, fragment removed.
    std::string normalized() const;

    // Resolve an href (absolute, scheme-relative, absolute-path or relative)
    // against this URL. Returns nullopt for non-http(s) schemes such as
    // javascript: and mailto:.
    std::optional<Url> resolve(const std::string& href) const;
};

// application/x-www-form-urlencoded helpers.
std::string url_encode_component(const std::string& value);
std::string url_decode_component(const std::string& value);

// Parse "a=1&b=2" into ordered, decoded pairs. Tolerates empty segments
// and value-less keys.
std::vector<std::pair<std::string, std::string>> parse_query(const std::string& query);
std::string build_query(const std::vector<std::pair<std::string, std::string>>& params);

// Remove ".", ".." segments the way browsers do when resolving links.
std::string remove_dot_segments(const std::string& path);

} // namespace pth
