#pragma once

// Line-oriented grammar text format:
//
//   start: Doc
//   Doc -> doc [ A* ]
//   A -> a [ B, C? ]
//   TB -> String
//
// Sequence is ',', choice is '|', postfix '*', '+', '?', an empty
// content model is written "[ ]", a nested epsilon "()", and the empty
// language "#empty". `_` is the wildcard label. Projector files prefix every
// rule line with '+' (kept) or '-' (dropped). Blank lines and lines starting
// with '#' are ignored.

#include <cctype>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "xproj/grammar.hpp"

namespace xproj {

namespace detail {

inline int precedence(ContentRegex::Kind k)
{
    using K = ContentRegex::Kind;
    switch (k) {
    case K::Alt: return 0;
    case K::Seq: return 1;
    case K::Star:
    case K::Plus:
    case K::Opt: return 2;
    default: return 3;
    }
}

inline void print_regex(const Grammar& g, const ContentRegex& r, std::string& out)
{
    using K = ContentRegex::Kind;
    auto operand = [&](const ContentRegex& sub, int min_prec) {
        if (precedence(sub.kind()) < min_prec) {
            out += '(';
            print_regex(g, sub, out);
            out += ')';
        } else {
            print_regex(g, sub, out);
        }
    };
    switch (r.kind()) {
    case K::Empty: out += "#empty"; break;
    case K::Epsilon: out += "()"; break;
    case K::Atom: out += g.name(r.name()); break;
    case K::Seq:
    case K::Alt: {
        bool first = true;
        for (const auto& item : r.items()) {
            if (!first)
                out += r.kind() == K::Seq ? ", " : " | ";
            first = false;
            operand(item, precedence(r.kind()) + 1);
        }
        break;
    }
    case K::Star:
    case K::Plus:
    case K::Opt:
        operand(r.body(), 2);
        out += r.kind() == K::Star ? '*' : r.kind() == K::Plus ? '+' : '?';
        break;
    }
}

inline bool regex_name_char(char c)
{
    return !std::isspace(static_cast<unsigned char>(c)) && c != '[' && c != ']' && c != '(' && c != ')' &&
           c != '|' && c != ',' && c != '*' && c != '+' && c != '?' && c != '#';
}

class RegexParser {
public:
    RegexParser(std::string_view text, GrammarBuilder& b, std::size_t line) : s_(text), b_(b), line_(line) {}

    ContentRegex parse()
    {
        skip();
        if (pos_ == s_.size())
            return ContentRegex::epsilon();
        ContentRegex r = alternation();
        skip();
        if (pos_ != s_.size())
            fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return r;
    }

private:
    [[noreturn]] void fail(const std::string& what) const { throw SyntaxError(what, line_, 0); }

    void skip()
    {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
            ++pos_;
    }

    bool eat(char c)
    {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    ContentRegex alternation()
    {
        std::vector<ContentRegex> items{sequence()};
        while (eat('|'))
            items.push_back(sequence());
        return items.size() == 1 ? std::move(items.front()) : ContentRegex::alt(std::move(items));
    }

    ContentRegex sequence()
    {
        std::vector<ContentRegex> items{postfix()};
        while (eat(','))
            items.push_back(postfix());
        return items.size() == 1 ? std::move(items.front()) : ContentRegex::seq(std::move(items));
    }

    ContentRegex postfix()
    {
        ContentRegex r = primary();
        while (true) {
            if (eat('*')) r = ContentRegex::star(std::move(r));
            else if (eat('+')) r = ContentRegex::plus(std::move(r));
            else if (eat('?')) r = ContentRegex::opt(std::move(r));
            else return r;
        }
    }

    ContentRegex primary()
    {
        skip();
        if (eat('(')) {
            if (eat(')'))
                return ContentRegex::epsilon();
            ContentRegex r = alternation();
            if (!eat(')'))
                fail("expected ')'");
            // Keep explicit grouping of a nested Seq/Alt of the same kind.
            return r;
        }
        if (s_.substr(pos_, 6) == "#empty") {
            pos_ += 6;
            return ContentRegex::empty();
        }
        std::size_t start = pos_;
        while (pos_ < s_.size() && regex_name_char(s_[pos_]))
            ++pos_;
        if (start == pos_)
            fail(pos_ < s_.size() ? "unexpected '" + std::string(1, s_[pos_]) + "'" : "unexpected end of content model");
        return ContentRegex::atom(b_.name(s_.substr(start, pos_ - start)));
    }

    std::string_view s_;
    GrammarBuilder& b_;
    std::size_t line_;
    std::size_t pos_ = 0;
};

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

}  // namespace detail

inline std::string regex_to_string(const Grammar& g, const ContentRegex& r)
{
    std::string out;
    detail::print_regex(g, r, out);
    return out;
}

inline std::string rule_to_string(const Grammar& g, RuleId id)
{
    const Rule& r = g.rule(id);
    std::string out = g.name(r.name) + " -> ";
    if (r.is_text())
        return out + "String";
    out += r.label.to_string() + " [ ";
    if (r.content.kind() != ContentRegex::Kind::Epsilon)
        out += regex_to_string(g, r.content) + " ";
    return out + "]";
}

/// Serializes a grammar; with `kept`, every rule line is marked '+' or '-'.
inline std::string grammar_to_text(const Grammar& g, const RuleSet* kept = nullptr)
{
    std::string out = "start:";
    for (NameId s : g.start())
        out += " " + g.name(s);
    out += '\n';
    for (std::uint32_t i = 0; i < g.rule_count(); ++i) {
        if (kept)
            out += kept->count(RuleId{i}) ? "+ " : "- ";
        out += rule_to_string(g, RuleId{i});
        out += '\n';
    }
    return out;
}

struct GrammarText {
    Grammar grammar;
    std::optional<RuleSet> marked;  // present iff the rule lines carried +/- marks
};

inline GrammarText parse_grammar_text(std::string_view text)
{
    GrammarBuilder b;
    std::optional<bool> has_marks;
    RuleSet marked;
    bool saw_start = false;
    std::vector<NameId> starts;
    std::size_t line_no = 0;
    std::uint32_t rule_index = 0;

    std::size_t at = 0;
    while (at <= text.size()) {
        auto nl = text.find('\n', at);
        auto raw = text.substr(at, nl == std::string_view::npos ? std::string_view::npos : nl - at);
        at = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        auto line = detail::trim(raw);
        if (line.empty() || line.front() == '#')
            continue;
        if (line.substr(0, 6) == "start:") {
            if (saw_start)
                throw SyntaxError("duplicate start header", line_no, 1);
            saw_start = true;
            std::istringstream names{std::string(line.substr(6))};
            std::string n;
            while (names >> n)
                starts.push_back(b.name(n));
            if (starts.empty())
                throw SyntaxError("empty start header", line_no, 1);
            continue;
        }
        bool mark = false;
        bool marked_line = line.front() == '+' || line.front() == '-';
        if (has_marks && *has_marks != marked_line)
            throw SyntaxError("either every rule line is marked with +/- or none is", line_no, 1);
        has_marks = marked_line;
        if (marked_line) {
            mark = line.front() == '+';
            line = detail::trim(line.substr(1));
        }
        auto arrow = line.find("->");
        if (arrow == std::string_view::npos)
            throw SyntaxError("expected 'Name -> ...'", line_no, 1);
        auto lhs = detail::trim(line.substr(0, arrow));
        auto rhs = detail::trim(line.substr(arrow + 2));
        if (lhs.empty() || !std::all_of(lhs.begin(), lhs.end(), detail::regex_name_char))
            throw SyntaxError("malformed rule name", line_no, 1);
        NameId name = b.name(lhs);
        RuleId id;
        if (rhs == "String") {
            id = b.add_text(name);
        } else {
            auto open = rhs.find('[');
            if (open == std::string_view::npos || rhs.back() != ']')
                throw SyntaxError("expected 'label [ content ]' or 'String'", line_no, arrow + 3);
            auto label = detail::trim(rhs.substr(0, open));
            if (label.empty())
                throw SyntaxError("missing label", line_no, arrow + 3);
            auto body = rhs.substr(open + 1, rhs.size() - open - 2);
            ContentRegex content = detail::RegexParser(body, b, line_no).parse();
            id = b.add_element(name, label == "_" ? Label::wildcard() : Label::tag(std::string(label)),
                               std::move(content));
        }
        if (index(id) != rule_index)
            throw SyntaxError("duplicate rule", line_no, 1);
        ++rule_index;
        if (mark)
            marked.insert(id);
    }
    if (!saw_start)
        throw SyntaxError("missing 'start:' header", 0, 0);
    for (NameId s : starts)
        b.add_start(s);
    GrammarText out{std::move(b).build(), std::nullopt};
    if (has_marks.value_or(false))
        out.marked = std::move(marked);
    return out;
}

inline Grammar parse_grammar(std::string_view text)
{
    auto parsed = parse_grammar_text(text);
    if (parsed.marked)
        throw SyntaxError("grammar text must not carry +/- marks", 0, 0);
    return std::move(parsed.grammar);
}

}  // namespace xproj
