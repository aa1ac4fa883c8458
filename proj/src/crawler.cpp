#include "pth/crawler.hpp"

#include "pth/html.hpp"
#include "pth/util.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace pth {

std::string field_kind_name(FieldKind k) {
    switch (k) {
        case FieldKind::Text: return "text";
        case FieldKind::Hidden: return "hidden";
        case FieldKind::Password: return "password";
        case FieldKind::Select: return "select";
        case FieldKind::Textarea: return "textarea";
        case FieldKind::Checkbox: return "checkbox";
        case FieldKind::Radio: return "radio";
        case FieldKind::Other: return "other";
    }
    return "?";
}

bool is_in_scope(const Url& candidate, const Url& root) {
    if (!candidate.is_http()) return false;
    return to_lower(candidate.host) == to_lower(root.host);
}

std::vector<std::string> extract_links(const PageRecord& page) {
    std::vector<std::string> links;
    std::set<std::string> seen;
    auto base = Url::parse(page.url);
    if (!base) return links;

    for (const auto& tag : scan_tags(page.body)) {
        if (tag.closing || tag.name != "a") continue;
        const HtmlAttr* href = tag.find_attr("href");
        if (!href || trim(href->value).empty()) continue;
        auto resolved = base->resolve(href->value);
        if (!resolved || !resolved->is_http()) continue;
        std::string normalized = resolved->normalized();
        if (seen.insert(normalized).second) links.push_back(normalized);
    }
    return links;
}

namespace {

FieldKind input_kind(const std::string& type) {
    std::string t = to_lower(trim(type));
    if (t.empty() || t == "text") return FieldKind::Text;
    if (t == "hidden") return FieldKind::Hidden;
    if (t == "password") return FieldKind::Password;
    if (t == "checkbox") return FieldKind::Checkbox;
    if (t == "radio") return FieldKind::Radio;
    return FieldKind::Other;
}

bool is_button_type(const std::string& type) {
    std::string t = to_lower(trim(type));
    return t == "submit" || t == "button" || t == "reset" || t == "image";
}

// Raw inner text of an element starting at tags[i], up to its closing tag.
std::string inner_text(const std::string& body, const std::vector<HtmlTag>& tags, size_t i) {
    size_t content_start = tags[i].end;
    for (size_t j = i + 1; j < tags.size(); ++j) {
        if (tags[j].closing && tags[j].name == tags[i].name)
            return body.substr(content_start, tags[j].begin - content_start);
    }
    return "";
}

} // namespace

std::vector<Form> extract_forms(const PageRecord& page) {
    std::vector<Form> forms;
    auto base = Url::parse(page.url);
    if (!base) return forms;

    const auto tags = scan_tags(page.body);
    size_t i = 0;
    while (i < tags.size()) {
        if (tags[i].closing || tags[i].name != "form") {
            ++i;
            continue;
        }
        Form form;
        form.source_url = page.url;
        const HtmlAttr* action = tags[i].find_attr("action");
        if (action && !trim(action->value).empty()) {
            auto resolved = base->resolve(action->value);
            form.action = resolved ? resolved->str() : page.url;
        } else {
            form.action = page.url; // HTML default: submit to the page itself
        }
        const HtmlAttr* method = tags[i].find_attr("method");
        form.method = method && iequals(trim(method->value), "post") ? "POST" : "GET";

        // Walk until </form> (or the next <form>/EOF for sloppy markup).
        size_t j = i + 1;
        for (; j < tags.size(); ++j) {
            const HtmlTag& t = tags[j];
            if (t.closing && t.name == "form") break;
            if (!t.closing && t.name == "form") break;
            if (t.closing) continue;

            if (t.name == "input") {
                const HtmlAttr* type = t.find_attr("type");
                if (type && is_button_type(type->value)) continue;
                const HtmlAttr* name = t.find_attr("name");
                if (!name || trim(name->value).empty()) continue;
                FormField field;
                field.name = name->value;
                field.kind = input_kind(type ? type->value : "");
                const HtmlAttr* value = t.find_attr("value");
                if (value) field.default_value = value->value;
                form.fields.push_back(std::move(field));
            } else if (t.name == "select") {
                const HtmlAttr* name = t.find_attr("name");
                if (!name || trim(name->value).empty()) continue;
                FormField field;
                field.name = name->value;
                field.kind = FieldKind::Select;
                // First option supplies the default value.
                for (size_t k = j + 1; k < tags.size(); ++k) {
                    if (tags[k].closing && tags[k].name == "select") break;
                    if (tags[k].closing || tags[k].name != "option") continue;
                    const HtmlAttr* value = tags[k].find_attr("value");
                    field.default_value = value ? value->value
                                                : trim(inner_text(page.body, tags, k));
                    break;
                }
                form.fields.push_back(std::move(field));
            } else if (t.name == "textarea") {
                const HtmlAttr* name = t.find_attr("name");
                if (!name || trim(name->value).empty()) continue;
                FormField field;
                field.name = name->value;
                field.kind = FieldKind::Textarea;
                field.default_value = trim(html_unescape(inner_text(page.body, tags, j)));
                form.fields.push_back(std::move(field));
            }
            // <button> is always excluded from fields.
        }
        forms.push_back(std::move(form));
        i = j < tags.size() && tags[j].closing ? j + 1 : j;
    }
    return forms;
}

std::vector<PageRecord> crawl(const std::string& start, const CrawlConfig& config,
                              Fetcher& fetcher) {
    auto root = Url::parse(start);
    if (!root || !root->is_http())
        throw StartUnreachable("start URL is not a valid http(s) URL: " + start);

    struct QueueItem {
        std::string normalized;
        int depth;
    };
    std::deque<QueueItem> frontier;
    std::set<std::string> visited;
    std::vector<PageRecord> records;

    frontier.push_back({root->normalized(), 0});
    visited.insert(root->normalized());

    while (!frontier.empty() && static_cast<int>(records.size()) < config.max_pages) {
        QueueItem item = frontier.front();
        frontier.pop_front();

        HttpResponse response = fetcher.get(item.normalized);
        if (!response.ok() && records.empty())
            throw StartUnreachable("start URL fetch failed: " + response.error);

        PageRecord record;
        record.url = item.normalized;
        record.status = response.status;
        record.content_type = response.content_type;
        record.body = response.body;
        record.depth = item.depth;
        record.fetched_at = iso8601_now();
        record.fetch_error = response.error;

        bool html = record.content_type.empty() ||
                    icontains(record.content_type, "html");
        if (response.ok() && html && item.depth < config.max_depth) {
            for (const auto& link : extract_links(record)) {
                auto parsed = Url::parse(link);
                if (!parsed || !is_in_scope(*parsed, *root)) continue;
                std::string normalized = parsed->normalized();
                if (!visited.insert(normalized).second) continue;
                frontier.push_back({normalized, item.depth + 1});
            }
        }
        records.push_back(std::move(record));
    }

    std::sort(records.begin(), records.end(), [](const PageRecord& a, const PageRecord& b) {
        if (a.depth != b.depth) return a.depth < b.depth;
        return a.url < b.url;
    });
    return records;
}

} // namespace pth
