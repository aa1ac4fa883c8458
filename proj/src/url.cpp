#include "pth/url.hpp"

#include "pth/util.hpp"

#include <cstdio>

namespace pth {

namespace {

bool is_unreserved(unsigned char c) {
    return std::isalnum(c) || c == '-' || c == '.' || c == '_' || c == '~';
}

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

} // namespace

std::optional<Url> Url::parse(const std::string& raw) {
    std::string s = trim(raw);
    size_t scheme_end = s.find("://");
    if (scheme_end == std::string::npos || scheme_end == 0) return std::nullopt;

    Url u;
    u.scheme = to_lower(s.substr(0, scheme_end));
    if (!u.is_http()) return std::nullopt;

    size_t pos = scheme_end + 3;
    size_t authority_end = s.find_first_of("/?#", pos);
    std::string authority = s.substr(pos, authority_end == std::string::npos
                                              ? std::string::npos
                                              : authority_end - pos);
    if (authority.empty()) return std::nullopt;

    // Userinfo is not supported; reject rather than misparse.
    if (authority.find('@') != std::string::npos) return std::nullopt;

    size_t colon = authority.rfind(':');
    if (colon != std::string::npos) {
        std::string port_str = authority.substr(colon + 1);
        if (port_str.empty() || port_str.find_first_not_of("0123456789") != std::string::npos)
            return std::nullopt;
        long p = std::strtol(port_str.c_str(), nullptr, 10);
        if (p <= 0 || p > 65535) return std::nullopt;
        u.port = static_cast<int>(p);
        authority = authority.substr(0, colon);
    }
    if (authority.empty()) return std::nullopt;
    u.host = to_lower(authority);

    if (authority_end == std::string::npos) {
        u.path = "/";
        return u;
    }

    std::string rest = s.substr(authority_end);
    size_t hash = rest.find('#');
    if (hash != std::string::npos) {
        u.fragment = rest.substr(hash + 1);
        rest = rest.substr(0, hash);
    }
    size_t qmark = rest.find('?');
    if (qmark != std::string::npos) {
        u.query = rest.substr(qmark + 1);
        rest = rest.substr(0, qmark);
    }
    u.path = rest.empty() ? "/" : rest;
    return u;
}

int Url::effective_port() const {
    if (port != 0) return port;
    return scheme == "https" ? 443 : 80;
}

std::string Url::origin() const {
    std::string out = scheme + "://" + host;
    int def = scheme == "https" ? 443 : 80;
    if (port != 0 && port != def) out += ":" + std::to_string(port);
    return out;
}

std::string Url::path_and_query() const {
    std::string out = path.empty() ? "/" : path;
    if (!query.empty()) out += "?" + query;
    return out;
}

std::string Url::str() const {
    std::string out = origin() + path_and_query();
    if (!fragment.empty()) out += "#" + fragment;
    return out;
}

std::string Url::normalized() const {
    return origin() + path_and_query();
}

std::optional<Url> Url::resolve(const std::string& href) const {
    std::string h = trim(href);
    if (h.empty()) return std::nullopt;

    // Fragment-only references stay on the current page.
    if (h[0] == '#') return std::nullopt;

    // Absolute with scheme.
    size_t colon = h.find(':');
    size_t slash = h.find('/');
    if (colon != std::string::npos && (slash == std::string::npos || colon < slash)) {
        // Any explicit scheme: only http/https pass, the rest (javascript:,
        // mailto:, tel:, data:) are dropped.
        return Url::parse(h);
    }

    if (h.rfind("//", 0) == 0) return Url::parse(scheme + ":" + h);

    Url out = *this;
    out.fragment.clear();
    out.query.clear();

    size_t hash = h.find('#');
    if (hash != std::string::npos) h = h.substr(0, hash);
    std::string q;
    size_t qmark = h.find('?');
    if (qmark != std::string::npos) {
        q = h.substr(qmark + 1);
        h = h.substr(0, qmark);
    }

    if (h.empty()) {
        out.path = path; // query-only reference, e.g. "?a=1"
    } else if (h[0] == '/') {
        out.path = remove_dot_segments(h);
    } else {
        std::string base_dir = path.substr(0, path.rfind('/') + 1);
        out.path = remove_dot_segments(base_dir + h);
    }
    out.query = q;
    if (out.path.empty()) out.path = "/";
    return out;
}

std::string remove_dot_segments(const std::string& path) {
    std::vector<std::string> kept;
    bool trailing_slash = !path.empty() && path.back() == '/';
    for (const auto& seg : split(path, '/')) {
        if (seg.empty() || seg == ".") continue;
        if (seg == "..") {
            if (!kept.empty()) kept.pop_back();
            continue;
        }
        kept.push_back(seg);
    }
    std::string out;
    for (const auto& seg : kept) out += "/" + seg;
    if (out.empty()) return "/";
    if (trailing_slash) out += "/";
    return out;
}

std::string url_encode_component(const std::string& value) {
    std::string out;
    out.reserve(value.size());
    for (unsigned char c : value) {
        if (is_unreserved(c)) {
            out += static_cast<char>(c);
        } else {
            char buf[4];
            std::snprintf(buf, sizeof(buf), "%%%02X", c);
            out += buf;
        }
    }
    return out;
}

std::string url_decode_component(const std::string& value) {
    std::string out;
    out.reserve(value.size());
    for (size_t i = 0; i < value.size(); ++i) {
        char c = value[i];
        if (c == '+') {
            out += ' ';
        } else if (c == '%' && i + 2 < value.size()) {
            int hi = hex_value(value[i + 1]);
            int lo = hex_value(value[i + 2]);
            if (hi >= 0 && lo >= 0) {
                out += static_cast<char>(hi * 16 + lo);
                i += 2;
            } else {
                out += c;
            }
        } else {
            out += c;
        }
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> parse_query(const std::string& query) {
    std::vector<std::pair<std::string, std::string>> out;
    if (query.empty()) return out;
    for (const auto& part : split(query, '&')) {
        if (part.empty()) continue;
        size_t eq = part.find('=');
        if (eq == std::string::npos) {
            out.emplace_back(url_decode_component(part), "");
        } else {
            out.emplace_back(url_decode_component(part.substr(0, eq)),
                             url_decode_component(part.substr(eq + 1)));
        }
    }
    return out;
}

std::string build_query(const std::vector<std::pair<std::string, std::string>>& params) {
    std::string out;
    for (const auto& [k, v] : params) {
        if (!out.empty()) out += "&";
        out += url_encode_component(k) + "=" + url_encode_component(v);
    }
    return out;
}

} // namespace pth
