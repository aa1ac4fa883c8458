// Tolerant HTML scanning: tag/attribute extraction, entity handling and a
// position classifier used to decide the syntactic context of a reflected
// probe marker. Browser-grade parsing is out of scope; this recovers from
// the kind of imperfect markup vulnerable test targets emit.

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace pth {

struct HtmlAttr {
    std::string name;  // lowercased
    std::string value; // entity-decoded
};

struct HtmlTag {
    std::string name; // lowercased, without "/" prefix
    bool closing = false;
    bool self_closing = false;
    std::vector<HtmlAttr> attrs;
    size_t begin = 0; // offset of "<"
    size_t end = 0;   // offset one past ">"

    const HtmlAttr* find_attr(const std::string& name) const;
};

// All tags in document order. Comments and doctype are skipped; the raw
// content of <script> and <style> elements is not scanned for tags.
std::vector<HtmlTag> scan_tags(const std::string& body);

std::string html_escape(const std::string& text);
// Decodes the named entities for &<>"' plus numeric (decimal/hex) references.
std::string html_unescape(const std::string& text);

// Syntactic position inside a document, for reflection-context analysis.
enum class DocContext {
    Text,           // character data between tags
    AttrDouble,     // inside a double-quoted attribute value
    AttrSingle,     // inside a single-quoted attribute value
    TagOther,       // inside a tag but not in a quoted value
    ScriptText,     // raw text content of a <script> element
    Comment,
};

DocContext classify_position(const std::string& body, size_t pos);

} // namespace pth
