#include "pth/html.hpp"

#include "pth/util.hpp"

#include <cctype>

namespace pth {

namespace {

bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == ':';
}

// Parses the inside of a tag starting right after its name. Returns attrs.
std::vector<HtmlAttr> parse_attrs(const std::string& body, size_t pos, size_t end) {
    std::vector<HtmlAttr> attrs;
    while (pos < end) {
        while (pos < end && (std::isspace(static_cast<unsigned char>(body[pos])) || body[pos] == '/'))
            ++pos;
        if (pos >= end) break;
        size_t name_start = pos;
        while (pos < end && is_name_char(body[pos])) ++pos;
        if (pos == name_start) { ++pos; continue; } // stray character, skip
        HtmlAttr attr;
        attr.name = to_lower(body.substr(name_start, pos - name_start));
        while (pos < end && std::isspace(static_cast<unsigned char>(body[pos]))) ++pos;
        if (pos < end && body[pos] == '=') {
            ++pos;
            while (pos < end && std::isspace(static_cast<unsigned char>(body[pos]))) ++pos;
            if (pos < end && (body[pos] == '"' || body[pos] == '\'')) {
                char quote = body[pos++];
                size_t val_start = pos;
                while (pos < end && body[pos] != quote) ++pos;
                attr.value = html_unescape(body.substr(val_start, pos - val_start));
                if (pos < end) ++pos; // consume quote
            } else {
                size_t val_start = pos;
                while (pos < end && !std::isspace(static_cast<unsigned char>(body[pos])) &&
                       body[pos] != '/')
                    ++pos;
                attr.value = html_unescape(body.substr(val_start, pos - val_start));
            }
        }
        attrs.push_back(std::move(attr));
    }
    return attrs;
}

// Case-insensitive search for "</name" at or after pos.
size_t find_closing(const std::string& body, size_t pos, const std::string& name) {
    std::string needle = "</" + name;
    for (size_t i = pos; i + needle.size() <= body.size(); ++i) {
        if (iequals(std::string_view(body).substr(i, needle.size()), needle)) return i;
    }
    return std::string::npos;
}

} // namespace

const HtmlAttr* HtmlTag::find_attr(const std::string& name) const {
    for (const auto& a : attrs)
        if (a.name == name) return &a;
    return nullptr;
}

std::vector<HtmlTag> scan_tags(const std::string& body) {
    std::vector<HtmlTag> tags;
    size_t pos = 0;
    while (pos < body.size()) {
        size_t lt = body.find('<', pos);
        if (lt == std::string::npos) break;
        if (lt + 1 >= body.size()) break;
        char next = body[lt + 1];

        if (next == '!') {
            // Comment or doctype.
            if (body.compare(lt, 4, "<!--") == 0) {
                size_t close = body.find("-->", lt + 4);
                pos = close == std::string::npos ? body.size() : close + 3;
            } else {
                size_t close = body.find('>', lt);
                pos = close == std::string::npos ? body.size() : close + 1;
            }
            continue;
        }
        if (next != '/' && !std::isalpha(static_cast<unsigned char>(next))) {
            pos = lt + 1; // stray "<" in text
            continue;
        }

        size_t name_start = lt + 1;
        bool closing = false;
        if (next == '/') {
            closing = true;
            ++name_start;
        }
        size_t name_end = name_start;
        while (name_end < body.size() && is_name_char(body[name_end])) ++name_end;
        if (name_end == name_start) {
            pos = lt + 1;
            continue;
        }
        size_t gt = body.find('>', name_end);
        if (gt == std::string::npos) break; // truncated tag, stop

        HtmlTag tag;
        tag.name = to_lower(body.substr(name_start, name_end - name_start));
        tag.closing = closing;
        tag.begin = lt;
        tag.end = gt + 1;
        tag.self_closing = gt > lt && body[gt - 1] == '/';
        if (!closing) tag.attrs = parse_attrs(body, name_end, gt);
        pos = tag.end;

        // Raw-text elements: jump past their content so "<a href=...>"
        // inside a script string is not treated as markup.
        if (!closing && !tag.self_closing && (tag.name == "script" || tag.name == "style")) {
            size_t close = find_closing(body, pos, tag.name);
            tags.push_back(std::move(tag));
            if (close == std::string::npos) break;
            pos = close;
            continue;
        }
        tags.push_back(std::move(tag));
    }
    return tags;
}

std::string html_escape(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&#39;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string html_unescape(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    size_t pos = 0;
    while (pos < text.size()) {
        if (text[pos] != '&') {
            out += text[pos++];
            continue;
        }
        size_t semi = text.find(';', pos);
        if (semi == std::string::npos || semi - pos > 10) {
            out += text[pos++];
            continue;
        }
        std::string entity = text.substr(pos + 1, semi - pos - 1);
        std::string decoded;
        if (entity == "amp") decoded = "&";
        else if (entity == "lt") decoded = "<";
        else if (entity == "gt") decoded = ">";
        else if (entity == "quot") decoded = "\"";
        else if (entity == "apos") decoded = "'";
        else if (!entity.empty() && entity[0] == '#') {
            long code = 0;
            bool ok = false;
            if (entity.size() > 2 && (entity[1] == 'x' || entity[1] == 'X')) {
                char* end = nullptr;
                code = std::strtol(entity.c_str() + 2, &end, 16);
                ok = end && *end == '\0';
            } else if (entity.size() > 1) {
                char* end = nullptr;
                code = std::strtol(entity.c_str() + 1, &end, 10);
                ok = end && *end == '\0';
            }
            if (ok && code > 0 && code < 128) decoded = std::string(1, static_cast<char>(code));
        }
        if (decoded.empty()) {
            out += text[pos++];
        } else {
            out += decoded;
            pos = semi + 1;
        }
    }
    return out;
}

DocContext classify_position(const std::string& body, size_t pos) {
    // Single forward pass tracking coarse lexical state.
    enum class State { Text, Tag, AttrDq, AttrSq, Script, Comment };
    State state = State::Text;
    std::string raw_element; // "script" while inside one
    size_t i = 0;
    bool prev_was_eq = false;

    auto state_at = [&](State s) {
        switch (s) {
            case State::Text: return DocContext::Text;
            case State::Tag: return DocContext::TagOther;
            case State::AttrDq: return DocContext::AttrDouble;
            case State::AttrSq: return DocContext::AttrSingle;
            case State::Script: return DocContext::ScriptText;
            case State::Comment: return DocContext::Comment;
        }
        return DocContext::Text;
    };

    while (i < body.size()) {
        if (i == pos) return state_at(state);
        char c = body[i];
        switch (state) {
            case State::Text:
                if (c == '<') {
                    if (body.compare(i, 4, "<!--") == 0) {
                        state = State::Comment;
                        i += 4;
                        continue;
                    }
                    if (i + 1 < body.size() &&
                        (body[i + 1] == '/' || std::isalpha(static_cast<unsigned char>(body[i + 1])) ||
                         body[i + 1] == '!')) {
                        state = State::Tag;
                        prev_was_eq = false;
                        // Remember the element name to detect script content.
                        size_t ns = i + 1;
                        if (body[ns] == '/') ++ns;
                        size_t ne = ns;
                        while (ne < body.size() && is_name_char(body[ne])) ++ne;
                        raw_element = (body[i + 1] == '/') ? "" : to_lower(body.substr(ns, ne - ns));
                    }
                }
                ++i;
                break;
            case State::Comment:
                if (body.compare(i, 3, "-->") == 0) {
                    state = State::Text;
                    i += 3;
                    continue;
                }
                ++i;
                break;
            case State::Tag:
                if (c == '"' && prev_was_eq) {
                    state = State::AttrDq;
                } else if (c == '\'' && prev_was_eq) {
                    state = State::AttrSq;
                } else if (c == '>') {
                    state = raw_element == "script" ? State::Script : State::Text;
                }
                if (!std::isspace(static_cast<unsigned char>(c))) prev_was_eq = (c == '=');
                ++i;
                break;
            case State::AttrDq:
                if (c == '"') { state = State::Tag; prev_was_eq = false; }
                ++i;
                break;
            case State::AttrSq:
                if (c == '\'') { state = State::Tag; prev_was_eq = false; }
                ++i;
                break;
            case State::Script: {
                size_t close = find_closing(body, i, "script");
                size_t jump = close == std::string::npos ? body.size() : close;
                if (pos < jump) return DocContext::ScriptText;
                i = jump;
                state = State::Text;
                break;
            }
        }
    }
    return DocContext::Text;
}

} // namespace pth
