#pragma once

// DTD import. Each declared element becomes one name and one element rule;
// #PCDATA becomes a per-element text name T<Name> so that text can be kept
// under one element and dropped under another.

#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xproj/grammar.hpp"

namespace xproj {

namespace detail {

inline bool xml_name_start(char c)
{
    auto u = static_cast<unsigned char>(c);
    return std::isalpha(u) || c == '_' || c == ':' || u >= 0x80;
}

inline bool xml_name_char(char c)
{
    auto u = static_cast<unsigned char>(c);
    return xml_name_start(c) || std::isdigit(u) || c == '-' || c == '.';
}

class DtdParser {
public:
    explicit DtdParser(std::string_view text) : s_(text) {}

    struct ContentSpec;
    struct Particle {
        enum class Kind { Name, Seq, Choice } kind = Kind::Name;
        std::string name;
        std::vector<Particle> items;
        char occurrence = 0;  // 0, '?', '*', '+'
    };
    struct ContentSpec {
        enum class Kind { Empty, Any, Mixed, Children } kind = Kind::Empty;
        std::vector<std::string> mixed;  // element names allowed in mixed content
        Particle children;
    };
    struct Declaration {
        std::string tag;
        ContentSpec spec;
        std::size_t line = 0;
        std::size_t column = 0;
    };

    std::vector<Declaration> elements;
    std::vector<std::pair<std::string, AttributeDecl>> attributes;

    void parse()
    {
        while (true) {
            skip_space();
            if (pos_ >= s_.size())
                break;
            if (starts("%"))
                fail("parameter entity references are not supported");
            if (starts("<!--")) {
                auto end = s_.find("-->", pos_ + 4);
                if (end == std::string_view::npos)
                    fail("unterminated comment");
                advance_to(end + 3);
            } else if (starts("<?")) {
                auto end = s_.find("?>", pos_ + 2);
                if (end == std::string_view::npos)
                    fail("unterminated processing instruction");
                advance_to(end + 2);
            } else if (starts("<!ELEMENT")) {
                element_decl();
            } else if (starts("<!ATTLIST")) {
                attlist_decl();
            } else if (starts("<!ENTITY") || starts("<!NOTATION")) {
                skip_decl();
            } else if (starts("<![")) {
                fail("conditional sections are not supported");
            } else {
                fail("expected a markup declaration");
            }
        }
    }

private:
    [[noreturn]] void fail(const std::string& what) const { throw SyntaxError(what, line_, column_); }

    bool starts(std::string_view p) const { return s_.substr(pos_, p.size()) == p; }

    void advance_to(std::size_t to)
    {
        while (pos_ < to && pos_ < s_.size()) {
            if (s_[pos_] == '\n') {
                ++line_;
                column_ = 1;
            } else {
                ++column_;
            }
            ++pos_;
        }
    }

    void skip_space()
    {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
            advance_to(pos_ + 1);
    }

    void require_space()
    {
        if (pos_ >= s_.size() || !std::isspace(static_cast<unsigned char>(s_[pos_])))
            fail("expected whitespace");
        skip_space();
    }

    void expect(char c)
    {
        skip_space();
        if (pos_ >= s_.size() || s_[pos_] != c)
            fail(std::string("expected '") + c + "'");
        advance_to(pos_ + 1);
    }

    bool accept(char c)
    {
        skip_space();
        if (pos_ < s_.size() && s_[pos_] == c) {
            advance_to(pos_ + 1);
            return true;
        }
        return false;
    }

    std::string name()
    {
        skip_space();
        if (pos_ >= s_.size() || !xml_name_start(s_[pos_])) {
            if (pos_ < s_.size() && s_[pos_] == '%')
                fail("parameter entity references are not supported");
            fail("expected a name");
        }
        std::size_t start = pos_;
        while (pos_ < s_.size() && xml_name_char(s_[pos_]))
            advance_to(pos_ + 1);
        return std::string(s_.substr(start, pos_ - start));
    }

    std::string quoted()
    {
        skip_space();
        if (pos_ >= s_.size() || (s_[pos_] != '"' && s_[pos_] != '\''))
            fail("expected a quoted literal");
        char q = s_[pos_];
        auto end = s_.find(q, pos_ + 1);
        if (end == std::string_view::npos)
            fail("unterminated literal");
        std::string out(s_.substr(pos_ + 1, end - pos_ - 1));
        advance_to(end + 1);
        return out;
    }

    void skip_decl()
    {
        char quote = 0;
        while (pos_ < s_.size()) {
            char c = s_[pos_];
            advance_to(pos_ + 1);
            if (quote) {
                if (c == quote)
                    quote = 0;
            } else if (c == '"' || c == '\'') {
                quote = c;
            } else if (c == '>') {
                return;
            }
        }
        fail("unterminated declaration");
    }

    void element_decl()
    {
        Declaration d;
        d.line = line_;
        d.column = column_;
        advance_to(pos_ + 9);
        require_space();
        d.tag = name();
        require_space();
        if (starts("EMPTY")) {
            advance_to(pos_ + 5);
            d.spec.kind = ContentSpec::Kind::Empty;
        } else if (starts("ANY")) {
            advance_to(pos_ + 3);
            d.spec.kind = ContentSpec::Kind::Any;
        } else if (starts("(")) {
            std::size_t save_pos = pos_, save_line = line_, save_col = column_;
            advance_to(pos_ + 1);
            skip_space();
            if (starts("#PCDATA")) {
                advance_to(pos_ + 7);
                d.spec.kind = ContentSpec::Kind::Mixed;
                while (accept('|'))
                    d.spec.mixed.push_back(name());
                expect(')');
                bool star = pos_ < s_.size() && s_[pos_] == '*';
                if (star)
                    advance_to(pos_ + 1);
                else if (!d.spec.mixed.empty())
                    fail("mixed content with element names must end with ')*'");
            } else {
                pos_ = save_pos;
                line_ = save_line;
                column_ = save_col;
                d.spec.kind = ContentSpec::Kind::Children;
                d.spec.children = particle();
            }
        } else {
            fail("expected EMPTY, ANY or a content model");
        }
        expect('>');
        elements.push_back(std::move(d));
    }

    Particle particle()
    {
        Particle p;
        skip_space();
        if (accept('(')) {
            std::vector<Particle> items{particle()};
            char sep = 0;
            while (true) {
                skip_space();
                if (accept(')'))
                    break;
                char c = pos_ < s_.size() ? s_[pos_] : '\0';
                if (c != ',' && c != '|')
                    fail("expected ',', '|' or ')'");
                if (sep && sep != c)
                    fail("mixed ',' and '|' in one group");
                sep = c;
                advance_to(pos_ + 1);
                items.push_back(particle());
            }
            p.kind = sep == '|' ? Particle::Kind::Choice : Particle::Kind::Seq;
            p.items = std::move(items);
        } else {
            if (starts("#PCDATA"))
                fail("#PCDATA must come first in a mixed content model");
            p.name = name();
        }
        if (pos_ < s_.size() && (s_[pos_] == '?' || s_[pos_] == '*' || s_[pos_] == '+')) {
            p.occurrence = s_[pos_];
            advance_to(pos_ + 1);
        }
        return p;
    }

    void attlist_decl()
    {
        advance_to(pos_ + 9);
        require_space();
        std::string tag = name();
        while (true) {
            skip_space();
            if (accept('>'))
                return;
            AttributeDecl a;
            a.name = name();
            skip_space();
            if (starts("(")) {
                auto end = s_.find(')', pos_);
                if (end == std::string_view::npos)
                    fail("unterminated enumeration");
                a.type = std::string(s_.substr(pos_, end - pos_ + 1));
                advance_to(end + 1);
            } else {
                a.type = name();
                if (a.type == "NOTATION") {
                    skip_space();
                    auto end = s_.find(')', pos_);
                    if (!starts("(") || end == std::string_view::npos)
                        fail("malformed NOTATION type");
                    a.type += " " + std::string(s_.substr(pos_, end - pos_ + 1));
                    advance_to(end + 1);
                }
            }
            skip_space();
            if (starts("#REQUIRED") || starts("#IMPLIED")) {
                a.default_decl = starts("#REQUIRED") ? "#REQUIRED" : "#IMPLIED";
                advance_to(pos_ + a.default_decl.size());
            } else if (starts("#FIXED")) {
                advance_to(pos_ + 6);
                a.default_decl = "#FIXED \"" + quoted() + "\"";
            } else {
                a.default_decl = "\"" + quoted() + "\"";
            }
            attributes.emplace_back(tag, std::move(a));
        }
    }

    std::string_view s_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t column_ = 1;
};

}  // namespace detail

struct DtdOptions {
    std::optional<std::string> root;  // defaults to the first declared element
};

inline Grammar parse_dtd(std::string_view text, const DtdOptions& options = {})
{
    detail::DtdParser p(text);
    p.parse();
    if (p.elements.empty())
        throw GrammarError("DTD declares no elements");

    std::map<std::string, std::size_t> declared;
    for (std::size_t i = 0; i < p.elements.size(); ++i) {
        const auto& d = p.elements[i];
        if (!declared.emplace(d.tag, i).second)
            throw SyntaxError("duplicate declaration of element " + d.tag, d.line, d.column);
    }

    std::vector<std::string> undeclared;
    auto check = [&](const std::string& n) {
        if (!declared.count(n))
            undeclared.push_back(n);
    };
    auto check_particle = [&](auto& self, const detail::DtdParser::Particle& part) -> void {
        if (part.kind == detail::DtdParser::Particle::Kind::Name)
            check(part.name);
        for (const auto& item : part.items)
            self(self, item);
    };
    for (const auto& d : p.elements) {
        for (const auto& m : d.spec.mixed)
            check(m);
        if (d.spec.kind == detail::DtdParser::ContentSpec::Kind::Children)
            check_particle(check_particle, d.spec.children);
    }
    if (!undeclared.empty()) {
        std::sort(undeclared.begin(), undeclared.end());
        undeclared.erase(std::unique(undeclared.begin(), undeclared.end()), undeclared.end());
        std::string list;
        for (const auto& u : undeclared)
            list += (list.empty() ? "" : ", ") + u;
        throw GrammarError("undeclared element" + std::string(undeclared.size() > 1 ? "s " : " ") + list);
    }

    // Names: capitalised tag, with a numeric suffix on collision.
    GrammarBuilder b;
    std::map<std::string, NameId> by_tag;
    auto fresh = [&](std::string base) {
        std::string candidate = base;
        for (int k = 2; b.has_name(candidate); ++k)
            candidate = base + std::to_string(k);
        return b.name(candidate);
    };
    auto capitalise = [](std::string s) {
        if (!s.empty())
            s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
        return s;
    };
    for (const auto& d : p.elements)
        by_tag.emplace(d.tag, fresh(capitalise(d.tag)));

    using Kind = detail::DtdParser::ContentSpec::Kind;
    using PKind = detail::DtdParser::Particle::Kind;
    auto convert = [&](auto& self, const detail::DtdParser::Particle& part) -> ContentRegex {
        ContentRegex r;
        if (part.kind == PKind::Name) {
            r = ContentRegex::atom(by_tag.at(part.name));
        } else {
            std::vector<ContentRegex> items;
            for (const auto& item : part.items)
                items.push_back(self(self, item));
            r = part.kind == PKind::Seq ? ContentRegex::seq(std::move(items)) : ContentRegex::alt(std::move(items));
        }
        switch (part.occurrence) {
        case '?': return ContentRegex::opt(std::move(r));
        case '*': return ContentRegex::star(std::move(r));
        case '+': return ContentRegex::plus(std::move(r));
        default: return r;
        }
    };

    for (const auto& d : p.elements) {
        NameId n = by_tag.at(d.tag);
        switch (d.spec.kind) {
        case Kind::Empty:
            b.add_element(n, Label::tag(d.tag), ContentRegex::epsilon());
            break;
        case Kind::Children:
            b.add_element(n, Label::tag(d.tag), convert(convert, d.spec.children));
            break;
        case Kind::Mixed:
        case Kind::Any: {
            std::vector<ContentRegex> alts;
            NameId text = fresh("T" + capitalise(d.tag));
            alts.push_back(ContentRegex::atom(text));
            if (d.spec.kind == Kind::Mixed) {
                for (const auto& m : d.spec.mixed)
                    alts.push_back(ContentRegex::atom(by_tag.at(m)));
            } else {
                for (const auto& e : p.elements)
                    alts.push_back(ContentRegex::atom(by_tag.at(e.tag)));
            }
            b.add_element(n, Label::tag(d.tag), ContentRegex::star(ContentRegex::alt(std::move(alts))));
            b.add_text(text);
            break;
        }
        }
    }

    for (auto& [tag, decl] : p.attributes)
        b.add_attribute(tag, decl);

    std::string root = options.root.value_or(p.elements.front().tag);
    auto it = by_tag.find(root);
    if (it == by_tag.end())
        throw GrammarError("root element " + root + " is not declared");
    b.add_start(it->second);
    return std::move(b).build();
}

}  // namespace xproj
