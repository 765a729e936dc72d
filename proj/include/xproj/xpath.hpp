#pragma once

// XPath 1.0 abstract syntax and parser. Abbreviations are expanded while
// parsing: `//` is descendant-or-self::node()/, `.` is self::node(), `..` is
// parent::node() and `@a` is attribute::a.

#include <cctype>
#include <cstdlib>
#include <string>
#include <string_view>
#include <vector>

#include "xproj/error.hpp"

namespace xproj::xpath {

class XPathError : public SyntaxError {
public:
    XPathError(const std::string& what, std::size_t position) : SyntaxError(what, 1, position + 1) {}
};

enum class FullAxis : std::uint8_t {
    Ancestor,
    AncestorOrSelf,
    Attribute,
    Child,
    Descendant,
    DescendantOrSelf,
    Following,
    FollowingSibling,
    Namespace,
    Parent,
    Preceding,
    PrecedingSibling,
    Self,
};

inline std::string_view axis_name(FullAxis a)
{
    switch (a) {
    case FullAxis::Ancestor: return "ancestor";
    case FullAxis::AncestorOrSelf: return "ancestor-or-self";
    case FullAxis::Attribute: return "attribute";
    case FullAxis::Child: return "child";
    case FullAxis::Descendant: return "descendant";
    case FullAxis::DescendantOrSelf: return "descendant-or-self";
    case FullAxis::Following: return "following";
    case FullAxis::FollowingSibling: return "following-sibling";
    case FullAxis::Namespace: return "namespace";
    case FullAxis::Parent: return "parent";
    case FullAxis::Preceding: return "preceding";
    case FullAxis::PrecedingSibling: return "preceding-sibling";
    case FullAxis::Self: return "self";
    }
    return "";
}

inline bool is_reverse(FullAxis a)
{
    return a == FullAxis::Ancestor || a == FullAxis::AncestorOrSelf || a == FullAxis::Preceding ||
           a == FullAxis::PrecedingSibling || a == FullAxis::Parent;
}

struct FullTest {
    enum class Kind : std::uint8_t { Name, AnyName, PrefixAny, Text, Node, Comment, ProcessingInstruction };
    Kind kind = Kind::Node;
    std::string name;  // QName, prefix, or PI target literal

    bool operator==(const FullTest&) const = default;
};

enum class ExprKind : std::uint8_t {
    Path,
    Filter,
    Union,
    Or,
    And,
    Equal,
    NotEqual,
    Less,
    LessEqual,
    Greater,
    GreaterEqual,
    Add,
    Subtract,
    Multiply,
    Divide,
    Modulo,
    Negate,
    Literal,
    Number,
    Function,
};

struct Expr;

struct Step {
    FullAxis axis = FullAxis::Child;
    FullTest test;
    std::vector<Expr> predicates;

    bool operator==(const Step&) const;
};

struct LocationPath {
    bool absolute = false;
    std::vector<Step> steps;

    bool operator==(const LocationPath&) const;
};

/// One node of the expression tree. Binary operators have two operands,
/// Negate one, Union and Function any number; Filter holds its primary
/// expression as operands[0], its predicates, and a trailing relative path.
struct Expr {
    ExprKind kind = ExprKind::Literal;
    std::vector<Expr> operands;
    std::vector<Expr> predicates;
    LocationPath path;
    std::string text;  // literal value or function name
    double number = 0;

    bool operator==(const Expr&) const = default;
};

inline bool Step::operator==(const Step& o) const
{
    return axis == o.axis && test == o.test && predicates == o.predicates;
}

inline bool LocationPath::operator==(const LocationPath& o) const
{
    return absolute == o.absolute && steps == o.steps;
}

/// A parsed query together with its source text.
struct FullQuery {
    std::string source;
    Expr expr;
};

inline bool is_comparison(ExprKind k)
{
    return k == ExprKind::Equal || k == ExprKind::NotEqual || k == ExprKind::Less || k == ExprKind::LessEqual ||
           k == ExprKind::Greater || k == ExprKind::GreaterEqual;
}

inline bool is_arithmetic(ExprKind k)
{
    return k == ExprKind::Add || k == ExprKind::Subtract || k == ExprKind::Multiply || k == ExprKind::Divide ||
           k == ExprKind::Modulo;
}

namespace detail {

enum class Tok : std::uint8_t {
    LParen, RParen, LBracket, RBracket, Dot, DotDot, At, Comma, ColonColon,
    Slash, DoubleSlash, Pipe, Plus, Minus, Eq, Neq, Lt, Le, Gt, Ge,
    Multiply, And, Or, Mod, Div,
    Literal, Number, NameTest, NodeType, FunctionName, AxisName, Variable, End,
};

struct Token {
    Tok kind;
    std::string text;
    double number = 0;
    std::size_t pos = 0;
};

inline bool ncname_start(char c)
{
    auto u = static_cast<unsigned char>(c);
    return std::isalpha(u) || c == '_' || u >= 0x80;
}

inline bool ncname_char(char c)
{
    auto u = static_cast<unsigned char>(c);
    return ncname_start(c) || std::isdigit(u) || c == '-' || c == '.';
}

inline std::vector<Token> tokenize(std::string_view s)
{
    std::vector<Token> out;
    std::size_t i = 0;
    // XPath 1.0, 3.7: whether the previous token forces operator reading.
    auto operator_context = [&] {
        if (out.empty())
            return false;
        switch (out.back().kind) {
        case Tok::At: case Tok::ColonColon: case Tok::LParen: case Tok::LBracket: case Tok::Comma:
        case Tok::Slash: case Tok::DoubleSlash: case Tok::Pipe: case Tok::Plus: case Tok::Minus:
        case Tok::Eq: case Tok::Neq: case Tok::Lt: case Tok::Le: case Tok::Gt: case Tok::Ge:
        case Tok::Multiply: case Tok::And: case Tok::Or: case Tok::Mod: case Tok::Div:
            return false;
        default:
            return true;
        }
    };
    auto skip_ws = [&](std::size_t j) {
        while (j < s.size() && std::isspace(static_cast<unsigned char>(s[j])))
            ++j;
        return j;
    };
    while (true) {
        i = skip_ws(i);
        if (i >= s.size())
            break;
        std::size_t start = i;
        char c = s[i];
        auto push = [&](Tok k, std::size_t len) {
            out.push_back({k, std::string(s.substr(start, len)), 0, start});
            i = start + len;
        };
        auto two = [&](char next) { return i + 1 < s.size() && s[i + 1] == next; };
        switch (c) {
        case '(': push(Tok::LParen, 1); continue;
        case ')': push(Tok::RParen, 1); continue;
        case '[': push(Tok::LBracket, 1); continue;
        case ']': push(Tok::RBracket, 1); continue;
        case '@': push(Tok::At, 1); continue;
        case ',': push(Tok::Comma, 1); continue;
        case '|': push(Tok::Pipe, 1); continue;
        case '+': push(Tok::Plus, 1); continue;
        case '-': push(Tok::Minus, 1); continue;
        case '=': push(Tok::Eq, 1); continue;
        case '!':
            if (!two('='))
                throw XPathError("expected '!='", i);
            push(Tok::Neq, 2);
            continue;
        case '<': two('=') ? push(Tok::Le, 2) : push(Tok::Lt, 1); continue;
        case '>': two('=') ? push(Tok::Ge, 2) : push(Tok::Gt, 1); continue;
        case '/': two('/') ? push(Tok::DoubleSlash, 2) : push(Tok::Slash, 1); continue;
        case ':':
            if (!two(':'))
                throw XPathError("unexpected ':'", i);
            push(Tok::ColonColon, 2);
            continue;
        case '"':
        case '\'': {
            auto end = s.find(c, i + 1);
            if (end == std::string_view::npos)
                throw XPathError("unterminated string literal", i);
            out.push_back({Tok::Literal, std::string(s.substr(i + 1, end - i - 1)), 0, start});
            i = end + 1;
            continue;
        }
        case '$': {
            std::size_t j = i + 1;
            while (j < s.size() && (ncname_char(s[j]) || s[j] == ':'))
                ++j;
            push(Tok::Variable, j - i);
            continue;
        }
        case '*':
            push(operator_context() ? Tok::Multiply : Tok::NameTest, 1);
            continue;
        default:
            break;
        }
        if (c == '.' && !(i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
            two('.') ? push(Tok::DotDot, 2) : push(Tok::Dot, 1);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t j = i;
            while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j])))
                ++j;
            if (j < s.size() && s[j] == '.') {
                ++j;
                while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j])))
                    ++j;
            }
            Token t{Tok::Number, std::string(s.substr(i, j - i)), 0, start};
            t.number = std::strtod(t.text.c_str(), nullptr);
            out.push_back(std::move(t));
            i = j;
            continue;
        }
        if (!ncname_start(c))
            throw XPathError(std::string("unexpected character '") + c + "'", i);
        std::size_t j = i;
        while (j < s.size() && ncname_char(s[j]))
            ++j;
        std::string name(s.substr(i, j - i));
        bool prefix_any = false;
        if (j + 1 < s.size() && s[j] == ':' && s[j + 1] != ':') {
            if (s[j + 1] == '*') {
                prefix_any = true;
                j += 2;
            } else if (ncname_start(s[j + 1])) {
                std::size_t k = j + 1;
                while (k < s.size() && ncname_char(s[k]))
                    ++k;
                j = k;
            }
            name = std::string(s.substr(i, j - i));
        }
        if (operator_context()) {
            Tok k;
            if (name == "and") k = Tok::And;
            else if (name == "or") k = Tok::Or;
            else if (name == "mod") k = Tok::Mod;
            else if (name == "div") k = Tok::Div;
            else throw XPathError("expected an operator, found '" + name + "'", start);
            out.push_back({k, name, 0, start});
            i = j;
            continue;
        }
        std::size_t after = skip_ws(j);
        Tok kind = Tok::NameTest;
        if (!prefix_any && after < s.size() && s[after] == '(') {
            kind = (name == "comment" || name == "text" || name == "processing-instruction" || name == "node")
                       ? Tok::NodeType
                       : Tok::FunctionName;
        } else if (!prefix_any && after + 1 < s.size() && s[after] == ':' && s[after + 1] == ':') {
            kind = Tok::AxisName;
        }
        out.push_back({kind, name, 0, start});
        i = j;
    }
    out.push_back({Tok::End, "", 0, s.size()});
    return out;
}

class Parser {
public:
    explicit Parser(std::string_view text) : toks_(tokenize(text)) {}

    Expr parse()
    {
        Expr e = or_expr();
        if (peek().kind != Tok::End)
            fail("unexpected '" + peek().text + "'");
        return e;
    }

private:
    const Token& peek(std::size_t k = 0) const { return toks_[std::min(at_ + k, toks_.size() - 1)]; }
    const Token& next() { return toks_[at_ < toks_.size() - 1 ? at_++ : at_]; }
    bool accept(Tok k)
    {
        if (peek().kind != k)
            return false;
        ++at_;
        return true;
    }
    void expect(Tok k, const char* what)
    {
        if (!accept(k))
            fail(std::string("expected ") + what);
    }
    [[noreturn]] void fail(const std::string& what) const { throw XPathError(what, peek().pos); }

    static Expr binary(ExprKind k, Expr l, Expr r)
    {
        Expr e;
        e.kind = k;
        e.operands.push_back(std::move(l));
        e.operands.push_back(std::move(r));
        return e;
    }

    Expr or_expr()
    {
        Expr e = and_expr();
        while (accept(Tok::Or))
            e = binary(ExprKind::Or, std::move(e), and_expr());
        return e;
    }

    Expr and_expr()
    {
        Expr e = equality_expr();
        while (accept(Tok::And))
            e = binary(ExprKind::And, std::move(e), equality_expr());
        return e;
    }

    Expr equality_expr()
    {
        Expr e = relational_expr();
        while (true) {
            if (accept(Tok::Eq)) e = binary(ExprKind::Equal, std::move(e), relational_expr());
            else if (accept(Tok::Neq)) e = binary(ExprKind::NotEqual, std::move(e), relational_expr());
            else return e;
        }
    }

    Expr relational_expr()
    {
        Expr e = additive_expr();
        while (true) {
            if (accept(Tok::Lt)) e = binary(ExprKind::Less, std::move(e), additive_expr());
            else if (accept(Tok::Le)) e = binary(ExprKind::LessEqual, std::move(e), additive_expr());
            else if (accept(Tok::Gt)) e = binary(ExprKind::Greater, std::move(e), additive_expr());
            else if (accept(Tok::Ge)) e = binary(ExprKind::GreaterEqual, std::move(e), additive_expr());
            else return e;
        }
    }

    Expr additive_expr()
    {
        Expr e = multiplicative_expr();
        while (true) {
            if (accept(Tok::Plus)) e = binary(ExprKind::Add, std::move(e), multiplicative_expr());
            else if (accept(Tok::Minus)) e = binary(ExprKind::Subtract, std::move(e), multiplicative_expr());
            else return e;
        }
    }

    Expr multiplicative_expr()
    {
        Expr e = unary_expr();
        while (true) {
            if (accept(Tok::Multiply)) e = binary(ExprKind::Multiply, std::move(e), unary_expr());
            else if (accept(Tok::Div)) e = binary(ExprKind::Divide, std::move(e), unary_expr());
            else if (accept(Tok::Mod)) e = binary(ExprKind::Modulo, std::move(e), unary_expr());
            else return e;
        }
    }

    Expr unary_expr()
    {
        if (accept(Tok::Minus)) {
            Expr e;
            e.kind = ExprKind::Negate;
            e.operands.push_back(unary_expr());
            return e;
        }
        return union_expr();
    }

    Expr union_expr()
    {
        Expr e = path_expr();
        if (peek().kind != Tok::Pipe)
            return e;
        Expr u;
        u.kind = ExprKind::Union;
        u.operands.push_back(std::move(e));
        while (accept(Tok::Pipe))
            u.operands.push_back(path_expr());
        return u;
    }

    bool starts_filter() const
    {
        switch (peek().kind) {
        case Tok::LParen: case Tok::Literal: case Tok::Number: case Tok::FunctionName: case Tok::Variable:
            return true;
        default:
            return false;
        }
    }

    Expr path_expr()
    {
        if (!starts_filter()) {
            Expr e;
            e.kind = ExprKind::Path;
            e.path = location_path();
            return e;
        }
        Expr primary = primary_expr();
        std::vector<Expr> preds;
        while (peek().kind == Tok::LBracket)
            preds.push_back(predicate());
        bool has_path = peek().kind == Tok::Slash || peek().kind == Tok::DoubleSlash;
        if (preds.empty() && !has_path)
            return primary;
        Expr f;
        f.kind = ExprKind::Filter;
        f.operands.push_back(std::move(primary));
        f.predicates = std::move(preds);
        while (peek().kind == Tok::Slash || peek().kind == Tok::DoubleSlash) {
            if (next().kind == Tok::DoubleSlash)
                f.path.steps.push_back(dos_step());
            f.path.steps.push_back(step());
        }
        return f;
    }

    Expr primary_expr()
    {
        const Token& t = peek();
        switch (t.kind) {
        case Tok::Variable:
            fail("unsupported grammar production: variable reference " + t.text);
        case Tok::LParen: {
            next();
            Expr e = or_expr();
            expect(Tok::RParen, "')'");
            return e;
        }
        case Tok::Literal: {
            Expr e;
            e.kind = ExprKind::Literal;
            e.text = next().text;
            return e;
        }
        case Tok::Number: {
            Expr e;
            e.kind = ExprKind::Number;
            e.number = next().number;
            return e;
        }
        case Tok::FunctionName: {
            Expr e;
            e.kind = ExprKind::Function;
            e.text = next().text;
            expect(Tok::LParen, "'('");
            if (!accept(Tok::RParen)) {
                e.operands.push_back(or_expr());
                while (accept(Tok::Comma))
                    e.operands.push_back(or_expr());
                expect(Tok::RParen, "')'");
            }
            return e;
        }
        default:
            fail("expected a primary expression");
        }
    }

    Expr predicate()
    {
        expect(Tok::LBracket, "'['");
        Expr e = or_expr();
        expect(Tok::RBracket, "']'");
        return e;
    }

    static Step dos_step()
    {
        return Step{FullAxis::DescendantOrSelf, FullTest{FullTest::Kind::Node, {}}, {}};
    }

    LocationPath location_path()
    {
        LocationPath p;
        if (accept(Tok::Slash)) {
            p.absolute = true;
            if (!starts_step())
                return p;
        } else if (accept(Tok::DoubleSlash)) {
            p.absolute = true;
            p.steps.push_back(dos_step());
        }
        p.steps.push_back(step());
        while (peek().kind == Tok::Slash || peek().kind == Tok::DoubleSlash) {
            if (next().kind == Tok::DoubleSlash)
                p.steps.push_back(dos_step());
            p.steps.push_back(step());
        }
        return p;
    }

    bool starts_step() const
    {
        switch (peek().kind) {
        case Tok::Dot: case Tok::DotDot: case Tok::At: case Tok::AxisName: case Tok::NameTest: case Tok::NodeType:
            return true;
        default:
            return false;
        }
    }

    static FullAxis axis_from(const std::string& n, std::size_t pos)
    {
        for (int a = 0; a <= static_cast<int>(FullAxis::Self); ++a)
            if (axis_name(static_cast<FullAxis>(a)) == n)
                return static_cast<FullAxis>(a);
        throw XPathError("unknown axis '" + n + "'", pos);
    }

    Step step()
    {
        if (accept(Tok::Dot))
            return Step{FullAxis::Self, FullTest{FullTest::Kind::Node, {}}, {}};
        if (accept(Tok::DotDot))
            return Step{FullAxis::Parent, FullTest{FullTest::Kind::Node, {}}, {}};
        Step s;
        if (accept(Tok::At)) {
            s.axis = FullAxis::Attribute;
        } else if (peek().kind == Tok::AxisName) {
            const Token& t = next();
            s.axis = axis_from(t.text, t.pos);
            expect(Tok::ColonColon, "'::'");
        }
        s.test = node_test();
        while (peek().kind == Tok::LBracket)
            s.predicates.push_back(predicate());
        return s;
    }

    FullTest node_test()
    {
        const Token& t = peek();
        if (t.kind == Tok::NameTest) {
            next();
            if (t.text == "*")
                return {FullTest::Kind::AnyName, {}};
            if (t.text.size() > 2 && t.text.substr(t.text.size() - 2) == ":*")
                return {FullTest::Kind::PrefixAny, t.text.substr(0, t.text.size() - 2)};
            return {FullTest::Kind::Name, t.text};
        }
        if (t.kind == Tok::NodeType) {
            std::string type = next().text;
            expect(Tok::LParen, "'('");
            FullTest out;
            if (type == "text") out.kind = FullTest::Kind::Text;
            else if (type == "node") out.kind = FullTest::Kind::Node;
            else if (type == "comment") out.kind = FullTest::Kind::Comment;
            else {
                out.kind = FullTest::Kind::ProcessingInstruction;
                if (peek().kind == Tok::Literal)
                    out.name = next().text;
            }
            expect(Tok::RParen, "')'");
            return out;
        }
        fail("expected a node test");
    }

    std::vector<Token> toks_;
    std::size_t at_ = 0;
};

}  // namespace detail

inline FullQuery parse_query(std::string_view text)
{
    return FullQuery{std::string(text), detail::Parser(text).parse()};
}

/// Query batch: one expression per line; blank lines and '#' comments skipped.
inline std::vector<FullQuery> parse_query_batch(std::string_view text)
{
    std::vector<FullQuery> out;
    std::size_t at = 0;
    std::size_t line = 0;
    while (at <= text.size()) {
        auto nl = text.find('\n', at);
        auto raw = text.substr(at, nl == std::string_view::npos ? std::string_view::npos : nl - at);
        at = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line;
        std::size_t b = 0, e = raw.size();
        while (b < e && std::isspace(static_cast<unsigned char>(raw[b])))
            ++b;
        while (e > b && std::isspace(static_cast<unsigned char>(raw[e - 1])))
            --e;
        auto q = raw.substr(b, e - b);
        if (q.empty() || q.front() == '#')
            continue;
        try {
            out.push_back(parse_query(q));
        } catch (const XPathError& err) {
            throw SyntaxError(std::string("query: ") + err.what(), line, err.column() + b);
        }
    }
    return out;
}

}  // namespace xproj::xpath
