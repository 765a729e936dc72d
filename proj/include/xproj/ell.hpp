#pragma once

// The navigational fragment: seven upward/downward axes, four node tests,
// existential predicates combined with and/or, and top-level unions.

#include <string>
#include <vector>

namespace xproj {

enum class Axis : std::uint8_t { Self, Child, Descendant, DescendantOrSelf, Parent, Ancestor, AncestorOrSelf };

inline const char* axis_name(Axis a)
{
    switch (a) {
    case Axis::Self: return "self";
    case Axis::Child: return "child";
    case Axis::Descendant: return "descendant";
    case Axis::DescendantOrSelf: return "descendant-or-self";
    case Axis::Parent: return "parent";
    case Axis::Ancestor: return "ancestor";
    case Axis::AncestorOrSelf: return "ancestor-or-self";
    }
    return "";
}

inline bool is_upward(Axis a) { return a == Axis::Parent || a == Axis::Ancestor || a == Axis::AncestorOrSelf; }

struct NodeTest {
    enum class Kind : std::uint8_t { Tag, Wildcard, Text, Node };
    Kind kind = Kind::Node;
    std::string tag;

    static NodeTest named(std::string t) { return {Kind::Tag, std::move(t)}; }
    static NodeTest wildcard() { return {Kind::Wildcard, {}}; }
    static NodeTest text() { return {Kind::Text, {}}; }
    static NodeTest node() { return {Kind::Node, {}}; }

    bool operator==(const NodeTest&) const = default;
};

struct Predicate;

struct StepEll {
    Axis axis = Axis::Child;
    NodeTest test;
    std::vector<Predicate> predicate;  // zero or one

    bool has_predicate() const noexcept { return !predicate.empty(); }
    const Predicate& pred() const { return predicate.front(); }
    bool operator==(const StepEll&) const;
};

struct PathEll {
    std::vector<StepEll> steps;
    bool operator==(const PathEll&) const;
};

struct Predicate {
    enum class Kind : std::uint8_t { Exists, And, Or };
    Kind kind = Kind::Exists;
    PathEll path;                    // Exists
    std::vector<Predicate> operands;  // And / Or, two or more

    static Predicate exists(PathEll p)
    {
        Predicate out;
        out.path = std::move(p);
        return out;
    }
    /// n-ary conjunction/disjunction; nested operands of the same kind are
    /// flattened and a single operand is returned as is.
    static Predicate combine(Kind k, std::vector<Predicate> items)
    {
        Predicate out;
        out.kind = k;
        for (auto& it : items) {
            if (it.kind == k)
                for (auto& sub : it.operands)
                    out.operands.push_back(std::move(sub));
            else
                out.operands.push_back(std::move(it));
        }
        if (out.operands.size() == 1)
            return std::move(out.operands.front());
        return out;
    }

    bool operator==(const Predicate&) const = default;
};

inline bool StepEll::operator==(const StepEll& o) const
{
    return axis == o.axis && test == o.test && predicate == o.predicate;
}

inline bool PathEll::operator==(const PathEll& o) const { return steps == o.steps; }

/// Union of absolute paths, each evaluated from the document node.
struct QueryEll {
    std::vector<PathEll> branches;
    bool operator==(const QueryEll&) const = default;
};

inline StepEll make_step(Axis a, NodeTest t) { return StepEll{a, std::move(t), {}}; }

namespace detail {

inline void print_path(const PathEll& p, std::string& out);

inline void print_predicate(const Predicate& p, std::string& out)
{
    if (p.kind == Predicate::Kind::Exists) {
        print_path(p.path, out);
        return;
    }
    const char* op = p.kind == Predicate::Kind::And ? " and " : " or ";
    bool first = true;
    for (const auto& sub : p.operands) {
        if (!first)
            out += op;
        first = false;
        bool paren = sub.kind != Predicate::Kind::Exists;
        if (paren)
            out += '(';
        print_predicate(sub, out);
        if (paren)
            out += ')';
    }
}

inline void print_step(const StepEll& s, std::string& out)
{
    out += axis_name(s.axis);
    out += "::";
    switch (s.test.kind) {
    case NodeTest::Kind::Tag: out += s.test.tag; break;
    case NodeTest::Kind::Wildcard: out += '*'; break;
    case NodeTest::Kind::Text: out += "text()"; break;
    case NodeTest::Kind::Node: out += "node()"; break;
    }
    if (s.has_predicate()) {
        out += '[';
        print_predicate(s.pred(), out);
        out += ']';
    }
}

inline void print_path(const PathEll& p, std::string& out)
{
    bool first = true;
    for (const auto& s : p.steps) {
        if (!first)
            out += '/';
        first = false;
        print_step(s, out);
    }
}

}  // namespace detail

/// Relative form of a path, e.g. "child::c/descendant-or-self::node()".
inline std::string path_to_text(const PathEll& p)
{
    std::string out;
    detail::print_path(p, out);
    return out;
}

/// Canonical unabbreviated text: "/child::doc/child::a[child::c]/child::b".
/// Branches are joined with " | "; the document node alone prints as "/".
inline std::string ell_to_text(const QueryEll& q)
{
    std::string out;
    for (std::size_t i = 0; i < q.branches.size(); ++i) {
        if (i)
            out += " | ";
        out += '/';
        detail::print_path(q.branches[i], out);
    }
    return out;
}

}  // namespace xproj
