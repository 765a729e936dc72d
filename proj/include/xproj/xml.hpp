#pragma once

// Minimal streaming XML reader and writer.
//
// The reader is a push parser: it pulls fixed-size chunks from an
// std::istream and reports start/end/text/comment/PI events to a handler.
// Memory use is one chunk plus the longest single token plus the open
// element stack; it does not grow with document size.

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "xproj/error.hpp"

namespace xproj::xml {

struct Attribute {
    std::string name;
    std::string value;

    bool operator==(const Attribute&) const = default;
};

class XmlError : public SyntaxError {
public:
    using SyntaxError::SyntaxError;
};

template <class H>
concept SaxHandler = requires(H& h, std::string_view s, std::span<const Attribute> attrs) {
    h.start_element(s, attrs);
    h.end_element(s);
    h.text(s);
    h.comment(s);
    h.processing_instruction(s, s);
};

/// Handler that ignores everything; parse-only baseline.
struct NullHandler {
    void start_element(std::string_view, std::span<const Attribute>) {}
    void end_element(std::string_view) {}
    void text(std::string_view) {}
    void comment(std::string_view) {}
    void processing_instruction(std::string_view, std::string_view) {}
};

inline bool is_space(char c) noexcept
{
    return c == ' ' || c == '\t' || c == '\n' || c == '\r';
}

inline bool is_whitespace(std::string_view s) noexcept
{
    return std::all_of(s.begin(), s.end(), is_space);
}

inline void append_utf8(std::string& out, std::uint32_t cp)
{
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

/// Decodes the five predefined entities and character references.
/// Returns false on an unknown or malformed reference.
inline bool decode_entity(std::string_view ref, std::string& out)
{
    if (ref == "lt") out += '<';
    else if (ref == "gt") out += '>';
    else if (ref == "amp") out += '&';
    else if (ref == "apos") out += '\'';
    else if (ref == "quot") out += '"';
    else if (ref.size() > 1 && ref[0] == '#') {
        std::uint32_t cp = 0;
        bool hex = ref[1] == 'x';
        std::string_view digits = ref.substr(hex ? 2 : 1);
        if (digits.empty())
            return false;
        for (char c : digits) {
            std::uint32_t d;
            if (c >= '0' && c <= '9') d = static_cast<std::uint32_t>(c - '0');
            else if (hex && c >= 'a' && c <= 'f') d = static_cast<std::uint32_t>(c - 'a' + 10);
            else if (hex && c >= 'A' && c <= 'F') d = static_cast<std::uint32_t>(c - 'A' + 10);
            else return false;
            cp = cp * (hex ? 16 : 10) + d;
            if (cp > 0x10FFFF)
                return false;
        }
        append_utf8(out, cp);
    } else {
        return false;
    }
    return true;
}

template <SaxHandler Handler>
class Reader {
public:
    static constexpr std::size_t default_chunk = std::size_t{1} << 16;

    Reader(std::istream& in, Handler& handler, std::size_t chunk = default_chunk)
        : in_(&in), handler_(handler), chunk_(chunk) {}

    void run()
    {
        fill();
        while (true) {
            if (pos_ == buf_.size() && !fill())
                break;
            if (buf_[pos_] == '<')
                markup();
            else
                character_data();
        }
        if (depth_ != 0)
            fail("unexpected end of document inside <" + stack_[depth_ - 1] + ">");
        if (!root_seen_)
            fail("document has no root element");
    }

private:
    bool fill()
    {
        if (eof_)
            return false;
        // Drop everything before the current token.
        if (pos_ > 0) {
            auto consumed = std::string_view(buf_).substr(0, pos_);
            auto newlines = static_cast<std::size_t>(std::count(consumed.begin(), consumed.end(), '\n'));
            if (newlines > 0) {
                line_ += newlines;
                column_base_ = consumed.size() - consumed.rfind('\n') - 1;
            } else {
                column_base_ += consumed.size();
            }
            buf_.erase(0, pos_);
            pos_ = 0;
        }
        auto old = buf_.size();
        buf_.resize(old + chunk_);
        in_->read(buf_.data() + old, static_cast<std::streamsize>(chunk_));
        auto got = static_cast<std::size_t>(in_->gcount());
        buf_.resize(old + got);
        if (got < chunk_)
            eof_ = true;
        return got > 0;
    }

    [[noreturn]] void fail(const std::string& what) const
    {
        auto prefix = std::string_view(buf_).substr(0, std::min(pos_, buf_.size()));
        auto nl = prefix.rfind('\n');
        std::size_t line = line_ + static_cast<std::size_t>(std::count(prefix.begin(), prefix.end(), '\n'));
        std::size_t column = nl == std::string_view::npos ? column_base_ + prefix.size() + 1 : prefix.size() - nl;
        throw XmlError(what, line, column);
    }

    // Index of `term` at or after pos_ + offset, refilling as needed.
    std::size_t require(std::string_view term, std::size_t offset)
    {
        std::size_t from = pos_ + offset;
        while (true) {
            auto at = buf_.find(term, from);
            if (at != std::string::npos)
                return at;
            std::size_t scanned = buf_.size() - pos_;
            if (!fill())
                fail("unterminated markup, expected '" + std::string(term) + "'");
            from = pos_ + (scanned >= term.size() ? scanned - term.size() + 1 : 0);
        }
    }

    bool starts_with(std::string_view s)
    {
        while (buf_.size() - pos_ < s.size()) {
            if (!fill())
                return false;
        }
        return std::string_view(buf_).substr(pos_, s.size()) == s;
    }

    void flush_text()
    {
        if (!pending_.empty()) {
            handler_.text(pending_);
            pending_.clear();
        }
    }

    void decode(std::string_view raw, std::string& out, bool attribute)
    {
        std::size_t i = 0;
        while (i < raw.size()) {
            auto stop = raw.find_first_of(attribute ? "&\r\t\n" : "&\r", i);
            if (stop == std::string_view::npos) {
                out.append(raw.substr(i));
                break;
            }
            out.append(raw.substr(i, stop - i));
            char c = raw[stop];
            if (c == '&') {
                auto semi = raw.find(';', stop);
                if (semi == std::string_view::npos || !decode_entity(raw.substr(stop + 1, semi - stop - 1), out))
                    fail("unknown or malformed entity reference");
                i = semi + 1;
            } else if (c == '\r') {
                out += attribute ? ' ' : '\n';
                i = stop + 1;
                if (i < raw.size() && raw[i] == '\n')
                    ++i;
            } else {
                out += ' ';
                i = stop + 1;
            }
        }
    }

    void character_data()
    {
        std::size_t from = pos_;
        std::size_t lt;
        while (true) {
            lt = buf_.find('<', from);
            if (lt != std::string::npos)
                break;
            if (eof_) {
                lt = buf_.size();
                break;
            }
            std::size_t scanned = buf_.size() - pos_;
            if (!fill()) {
                lt = buf_.size();
                break;
            }
            from = pos_ + scanned;
        }
        auto raw = std::string_view(buf_).substr(pos_, lt - pos_);
        if (depth_ == 0) {
            if (!is_whitespace(raw))
                fail("character data outside the root element");
        } else {
            decode(raw, pending_, false);
        }
        pos_ = lt;
    }

    void markup()
    {
        if (starts_with("</")) {
            end_tag();
        } else if (starts_with("<?")) {
            auto end = require("?>", 2);
            auto body = std::string_view(buf_).substr(pos_ + 2, end - pos_ - 2);
            auto split = std::find_if(body.begin(), body.end(), is_space);
            auto target = body.substr(0, static_cast<std::size_t>(split - body.begin()));
            auto data = body.substr(target.size());
            while (!data.empty() && is_space(data.front()))
                data.remove_prefix(1);
            if (target.empty())
                fail("processing instruction without target");
            bool declaration = target.size() == 3 && (target[0] | 0x20) == 'x' && (target[1] | 0x20) == 'm' &&
                               (target[2] | 0x20) == 'l';
            if (!declaration) {
                flush_text();
                handler_.processing_instruction(target, data);
            }
            pos_ = end + 2;
        } else if (starts_with("<!--")) {
            auto end = require("-->", 4);
            flush_text();
            handler_.comment(std::string_view(buf_).substr(pos_ + 4, end - pos_ - 4));
            pos_ = end + 3;
        } else if (starts_with("<![CDATA[")) {
            auto end = require("]]>", 9);
            if (depth_ == 0)
                fail("CDATA section outside the root element");
            pending_.append(std::string_view(buf_).substr(pos_ + 9, end - pos_ - 9));
            pos_ = end + 3;
        } else if (starts_with("<!DOCTYPE")) {
            doctype();
        } else if (starts_with("<!")) {
            fail("unsupported markup declaration");
        } else {
            start_tag();
        }
    }

    void doctype()
    {
        if (root_seen_)
            fail("DOCTYPE after the root element");
        std::size_t i = pos_ + 9;
        char quote = 0;
        int bracket = 0;
        while (true) {
            if (i >= buf_.size()) {
                std::size_t rel = i - pos_;
                if (!fill())
                    fail("unterminated DOCTYPE");
                i = pos_ + rel;
                continue;
            }
            char c = buf_[i];
            if (quote) {
                if (c == quote)
                    quote = 0;
            } else if (c == '"' || c == '\'') {
                quote = c;
            } else if (c == '[') {
                ++bracket;
            } else if (c == ']') {
                --bracket;
            } else if (c == '>' && bracket == 0) {
                break;
            }
            ++i;
        }
        pos_ = i + 1;
    }

    // Index of the closing '>' of a start tag beginning at pos_.
    std::size_t tag_end()
    {
        std::size_t i = pos_ + 1;
        char quote = 0;
        while (true) {
            if (i >= buf_.size()) {
                std::size_t rel = i - pos_;
                if (!fill())
                    fail("unterminated start tag");
                i = pos_ + rel;
                continue;
            }
            char c = buf_[i];
            if (quote) {
                if (c == quote)
                    quote = 0;
            } else if (c == '"' || c == '\'') {
                quote = c;
            } else if (c == '>') {
                return i;
            } else if (c == '<') {
                fail("'<' inside a tag");
            }
            ++i;
        }
    }

    static bool name_char(char c) noexcept
    {
        return !is_space(c) && c != '/' && c != '>' && c != '=' && c != '<' && c != '"' && c != '\'';
    }

    void start_tag()
    {
        if (root_seen_ && depth_ == 0)
            fail("content after the root element");
        std::size_t end = tag_end();
        auto tag = std::string_view(buf_).substr(pos_ + 1, end - pos_ - 1);
        bool empty = !tag.empty() && tag.back() == '/';
        if (empty)
            tag.remove_suffix(1);

        std::size_t i = 0;
        while (i < tag.size() && name_char(tag[i]))
            ++i;
        auto name = tag.substr(0, i);
        if (name.empty())
            fail("missing element name");

        std::size_t count = 0;
        while (true) {
            while (i < tag.size() && is_space(tag[i]))
                ++i;
            if (i == tag.size())
                break;
            std::size_t n0 = i;
            while (i < tag.size() && name_char(tag[i]))
                ++i;
            if (i == n0)
                fail("malformed attribute");
            auto attr_name = tag.substr(n0, i - n0);
            while (i < tag.size() && is_space(tag[i]))
                ++i;
            if (i == tag.size() || tag[i] != '=')
                fail("attribute '" + std::string(attr_name) + "' without value");
            ++i;
            while (i < tag.size() && is_space(tag[i]))
                ++i;
            if (i == tag.size() || (tag[i] != '"' && tag[i] != '\''))
                fail("attribute value must be quoted");
            char q = tag[i++];
            auto close = tag.find(q, i);
            if (close == std::string_view::npos)
                fail("unterminated attribute value");
            if (count == attrs_.size())
                attrs_.emplace_back();
            auto& a = attrs_[count++];
            a.name.assign(attr_name);
            a.value.clear();
            decode(tag.substr(i, close - i), a.value, true);
            i = close + 1;
        }
        for (std::size_t x = 0; x < count; ++x)
            for (std::size_t y = x + 1; y < count; ++y)
                if (attrs_[x].name == attrs_[y].name)
                    fail("duplicate attribute '" + attrs_[x].name + "'");

        flush_text();
        root_seen_ = true;
        std::span<const Attribute> attrs(attrs_.data(), count);
        handler_.start_element(name, attrs);
        if (empty) {
            handler_.end_element(name);
        } else {
            // stack_ never shrinks so that open names reuse their storage
            if (depth_ == stack_.size())
                stack_.emplace_back();
            stack_[depth_++].assign(name);
        }
        pos_ = end + 1;
    }

    void end_tag()
    {
        auto end = require(">", 2);
        auto name = std::string_view(buf_).substr(pos_ + 2, end - pos_ - 2);
        while (!name.empty() && is_space(name.back()))
            name.remove_suffix(1);
        if (depth_ == 0)
            fail("unexpected end tag </" + std::string(name) + ">");
        const auto& open = stack_[depth_ - 1];
        if (name != open)
            fail("mismatched end tag </" + std::string(name) + ">, expected </" + open + ">");
        flush_text();
        handler_.end_element(name);
        --depth_;
        pos_ = end + 1;
    }

    std::istream* in_;
    Handler& handler_;
    std::size_t chunk_;
    std::string buf_;
    std::size_t pos_ = 0;
    bool eof_ = false;
    std::size_t line_ = 1;
    std::size_t column_base_ = 0;

    std::string pending_;
    std::vector<Attribute> attrs_;
    std::vector<std::string> stack_;
    std::size_t depth_ = 0;
    bool root_seen_ = false;
};

template <SaxHandler Handler>
void parse(std::istream& in, Handler& handler, std::size_t chunk = Reader<Handler>::default_chunk)
{
    Reader<Handler>(in, handler, chunk).run();
}

template <SaxHandler Handler>
void parse(std::string_view text, Handler& handler)
{
    std::istringstream in{std::string(text)};
    Reader<Handler>(in, handler).run();
}

inline void escape_text(std::string& out, std::string_view s)
{
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '\r': out += "&#13;"; break;
        default: out += c;
        }
    }
}

inline void escape_attribute(std::string& out, std::string_view s)
{
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '"': out += "&quot;"; break;
        case '\t': out += "&#9;"; break;
        case '\n': out += "&#10;"; break;
        case '\r': out += "&#13;"; break;
        default: out += c;
        }
    }
}

/// Serializes events. Elements are always written as start/end pairs,
/// attributes in the order given, no XML declaration and no DOCTYPE.
class Writer {
public:
    explicit Writer(std::ostream& out) : out_(&out) { buf_.reserve(flush_threshold + 1024); }
    Writer(const Writer&) = delete;
    Writer& operator=(const Writer&) = delete;
    ~Writer() { flush(); }

    void start_element(std::string_view tag, std::span<const Attribute> attrs)
    {
        buf_ += '<';
        buf_ += tag;
        for (const auto& a : attrs) {
            buf_ += ' ';
            buf_ += a.name;
            buf_ += "=\"";
            escape_attribute(buf_, a.value);
            buf_ += '"';
        }
        buf_ += '>';
        maybe_flush();
    }

    void end_element(std::string_view tag)
    {
        buf_ += "</";
        buf_ += tag;
        buf_ += '>';
        maybe_flush();
    }

    void text(std::string_view s)
    {
        escape_text(buf_, s);
        maybe_flush();
    }

    void comment(std::string_view s)
    {
        buf_ += "<!--";
        buf_ += s;
        buf_ += "-->";
        maybe_flush();
    }

    void processing_instruction(std::string_view target, std::string_view data)
    {
        buf_ += "<?";
        buf_ += target;
        if (!data.empty()) {
            buf_ += ' ';
            buf_ += data;
        }
        buf_ += "?>";
        maybe_flush();
    }

    void flush()
    {
        if (!buf_.empty()) {
            written_ += buf_.size();
            out_->write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
            buf_.clear();
        }
        out_->flush();
    }

    std::uint64_t bytes_written() const noexcept { return written_ + buf_.size(); }

private:
    static constexpr std::size_t flush_threshold = std::size_t{1} << 16;

    void maybe_flush()
    {
        if (buf_.size() >= flush_threshold) {
            written_ += buf_.size();
            out_->write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
            buf_.clear();
        }
    }

    std::ostream* out_;
    std::string buf_;
    std::uint64_t written_ = 0;
};

}  // namespace xproj::xml
