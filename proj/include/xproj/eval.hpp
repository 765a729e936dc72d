#pragma once

// Reference evaluators over in-memory documents. Written for clarity, not
// speed: node-sets are sorted vectors and axes are materialised.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "xproj/document.hpp"
#include "xproj/ell.hpp"
#include "xproj/error.hpp"
#include "xproj/xpath.hpp"

namespace xproj {

/// Node identifiers in document order, without duplicates.
using NodeSet = std::vector<NodeId>;

namespace detail {

inline bool ell_visible(const Node& n)
{
    return n.kind == NodeKind::Document || n.kind == NodeKind::Element || n.kind == NodeKind::Text;
}

inline bool ell_matches(const Node& n, const NodeTest& t)
{
    switch (t.kind) {
    case NodeTest::Kind::Tag: return n.kind == NodeKind::Element && n.name == t.tag;
    case NodeTest::Kind::Wildcard: return n.kind == NodeKind::Element;
    case NodeTest::Kind::Text: return n.kind == NodeKind::Text;
    case NodeTest::Kind::Node: return ell_visible(n);
    }
    return false;
}

class EllEvaluator {
public:
    explicit EllEvaluator(const Document& d) : d_(d) {}

    NodeSet path(const PathEll& p, NodeSet ctx) const
    {
        for (const auto& s : p.steps) {
            if (ctx.empty())
                break;
            NodeSet next;
            for (NodeId n : ctx)
                step(s, n, next);
            std::sort(next.begin(), next.end());
            next.erase(std::unique(next.begin(), next.end()), next.end());
            ctx = std::move(next);
        }
        return ctx;
    }

private:
    void step(const StepEll& s, NodeId n, NodeSet& out) const
    {
        auto consider = [&](NodeId m) {
            const Node& node = d_[m];
            if (ell_matches(node, s.test) && (!s.has_predicate() || holds(s.pred(), m)))
                out.push_back(m);
        };
        const Node& node = d_[n];
        switch (s.axis) {
        case Axis::Self: consider(n); break;
        case Axis::Child:
            for (NodeId c : node.children)
                consider(c);
            break;
        case Axis::DescendantOrSelf: consider(n); [[fallthrough]];
        case Axis::Descendant:
            for (NodeId m = n + 1; m < node.end; ++m)
                consider(m);
            break;
        case Axis::Parent:
            if (node.parent != no_node)
                consider(node.parent);
            break;
        case Axis::AncestorOrSelf: consider(n); [[fallthrough]];
        case Axis::Ancestor:
            for (NodeId m = node.parent; m != no_node; m = d_[m].parent)
                consider(m);
            break;
        }
    }

    bool holds(const Predicate& p, NodeId n) const
    {
        switch (p.kind) {
        case Predicate::Kind::Exists: return !path(p.path, {n}).empty();
        case Predicate::Kind::And:
            return std::all_of(p.operands.begin(), p.operands.end(), [&](const auto& o) { return holds(o, n); });
        case Predicate::Kind::Or:
            return std::any_of(p.operands.begin(), p.operands.end(), [&](const auto& o) { return holds(o, n); });
        }
        return false;
    }

    const Document& d_;
};

}  // namespace detail

/// Evaluates a fragment query from the document node. Comments and
/// processing instructions are not part of the fragment's data model.
inline NodeSet eval_ell(const QueryEll& q, const Document& d)
{
    detail::EllEvaluator ev(d);
    NodeSet out;
    for (const auto& b : q.branches) {
        auto r = ev.path(b, {Document::root()});
        out.insert(out.end(), r.begin(), r.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

/// A node of the full data model: a tree node, or attribute `attr` of an
/// element.
struct NodeRef {
    NodeId node = 0;
    std::int32_t attr = -1;

    bool is_attribute() const noexcept { return attr >= 0; }
    auto operator<=>(const NodeRef&) const = default;
};

using RefSet = std::vector<NodeRef>;

/// An XPath 1.0 value.
using Value = std::variant<RefSet, bool, double, std::string>;

class EvalError : public Error {
public:
    using Error::Error;
};

namespace xpath_functions {

inline std::string number_to_string(double v)
{
    if (std::isnan(v))
        return "NaN";
    if (std::isinf(v))
        return v > 0 ? "Infinity" : "-Infinity";
    if (v == 0)
        return "0";
    char buf[512];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
    return std::string(buf, res.ptr);
}

inline double string_to_number(std::string_view s)
{
    while (!s.empty() && xml::is_space(s.front()))
        s.remove_prefix(1);
    while (!s.empty() && xml::is_space(s.back()))
        s.remove_suffix(1);
    if (s.empty())
        return std::numeric_limits<double>::quiet_NaN();
    std::size_t i = 0;
    if (s[0] == '-')
        ++i;
    bool digits = false, dot = false;
    for (std::size_t j = i; j < s.size(); ++j) {
        if (s[j] == '.' && !dot)
            dot = true;
        else if (s[j] >= '0' && s[j] <= '9')
            digits = true;
        else
            return std::numeric_limits<double>::quiet_NaN();
    }
    if (!digits)
        return std::numeric_limits<double>::quiet_NaN();
    return std::strtod(std::string(s).c_str(), nullptr);
}

inline double round_half_up(double v)
{
    if (std::isnan(v) || std::isinf(v))
        return v;
    if (v < 0 && v >= -0.5)
        return -0.0;
    return std::floor(v + 0.5);
}

}  // namespace xpath_functions

namespace detail {

class FullEvaluator {
public:
    explicit FullEvaluator(const Document& d) : d_(d) {}

    struct Context {
        NodeRef node;
        std::size_t position = 1;
        std::size_t size = 1;
    };

    Value eval(const xpath::Expr& e, const Context& c)
    {
        using K = xpath::ExprKind;
        switch (e.kind) {
        case K::Path: return path(e.path, c.node);
        case K::Filter: return filter(e, c);
        case K::Union: {
            RefSet out;
            for (const auto& o : e.operands) {
                Value v = eval(o, c);
                auto* s = std::get_if<RefSet>(&v);
                if (!s)
                    throw EvalError("union of a non-node-set");
                out.insert(out.end(), s->begin(), s->end());
            }
            normalize(out);
            return out;
        }
        case K::Or: return boolean(eval(e.operands[0], c)) || boolean(eval(e.operands[1], c));
        case K::And: return boolean(eval(e.operands[0], c)) && boolean(eval(e.operands[1], c));
        case K::Negate: return -number(eval(e.operands[0], c));
        case K::Literal: return e.text;
        case K::Number: return e.number;
        case K::Function: return function(e, c);
        default: break;
        }
        if (xpath::is_comparison(e.kind))
            return compare(e.kind, eval(e.operands[0], c), eval(e.operands[1], c));
        double a = number(eval(e.operands[0], c));
        double b = number(eval(e.operands[1], c));
        switch (e.kind) {
        case K::Add: return a + b;
        case K::Subtract: return a - b;
        case K::Multiply: return a * b;
        case K::Divide: return a / b;
        default: return std::fmod(a, b);
        }
    }

    std::string string_value(NodeRef n) const
    {
        if (n.is_attribute())
            return d_[n.node].attributes[static_cast<std::size_t>(n.attr)].value;
        return d_.string_value(n.node);
    }

    std::string string(const Value& v) const
    {
        switch (v.index()) {
        case 0: {
            const auto& s = std::get<RefSet>(v);
            return s.empty() ? std::string() : string_value(s.front());
        }
        case 1: return std::get<bool>(v) ? "true" : "false";
        case 2: return xpath_functions::number_to_string(std::get<double>(v));
        default: return std::get<std::string>(v);
        }
    }

    double number(const Value& v) const
    {
        switch (v.index()) {
        case 1: return std::get<bool>(v) ? 1 : 0;
        case 2: return std::get<double>(v);
        default: return xpath_functions::string_to_number(string(v));
        }
    }

    static bool boolean(const Value& v)
    {
        switch (v.index()) {
        case 0: return !std::get<RefSet>(v).empty();
        case 1: return std::get<bool>(v);
        case 2: {
            double x = std::get<double>(v);
            return x != 0 && !std::isnan(x);
        }
        default: return !std::get<std::string>(v).empty();
        }
    }

private:
    static void normalize(RefSet& s)
    {
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
    }

    RefSet path(const xpath::LocationPath& p, NodeRef start)
    {
        RefSet ctx{p.absolute ? NodeRef{Document::root(), -1} : start};
        return steps(p.steps, std::move(ctx));
    }

    RefSet steps(const std::vector<xpath::Step>& ss, RefSet ctx)
    {
        for (const auto& s : ss) {
            RefSet next;
            for (NodeRef n : ctx) {
                RefSet sel = axis(s.axis, n);
                sel.erase(std::remove_if(sel.begin(), sel.end(), [&](NodeRef m) { return !test(s, m); }), sel.end());
                for (const auto& pred : s.predicates)
                    sel = apply_predicate(pred, sel);
                next.insert(next.end(), sel.begin(), sel.end());
            }
            normalize(next);
            ctx = std::move(next);
        }
        return ctx;
    }

    RefSet apply_predicate(const xpath::Expr& pred, const RefSet& in)
    {
        RefSet out;
        for (std::size_t i = 0; i < in.size(); ++i) {
            Value v = eval(pred, Context{in[i], i + 1, in.size()});
            bool keep = v.index() == 2 ? std::get<double>(v) == static_cast<double>(i + 1) : boolean(v);
            if (keep)
                out.push_back(in[i]);
        }
        return out;
    }

    Value filter(const xpath::Expr& e, const Context& c)
    {
        Value v = eval(e.operands.front(), c);
        auto* s = std::get_if<RefSet>(&v);
        if (!s)
            throw EvalError("filter applied to a non-node-set");
        RefSet sel = *s;
        for (const auto& pred : e.predicates)
            sel = apply_predicate(pred, sel);
        return steps(e.path.steps, std::move(sel));
    }

    // Nodes along `a` from `n`, in axis order (reverse axes nearest first).
    RefSet axis(xpath::FullAxis a, NodeRef n) const
    {
        using A = xpath::FullAxis;
        RefSet out;
        const Node& node = d_[n.node];
        auto up = [&](NodeId from) {
            for (NodeId m = from; m != no_node; m = d_[m].parent)
                out.push_back({m, -1});
        };
        if (n.is_attribute()) {
            switch (a) {
            case A::Self:
            case A::DescendantOrSelf: out.push_back(n); break;
            case A::AncestorOrSelf: out.push_back(n); up(n.node); break;
            case A::Parent: out.push_back({n.node, -1}); break;
            case A::Ancestor: up(n.node); break;
            case A::Following:
                for (NodeId m = n.node + 1; m < d_.size(); ++m)
                    out.push_back({m, -1});
                break;
            case A::Preceding: preceding(n.node, out); break;
            default: break;
            }
            return out;
        }
        switch (a) {
        case A::Self: out.push_back(n); break;
        case A::Child:
            for (NodeId c : node.children)
                out.push_back({c, -1});
            break;
        case A::DescendantOrSelf: out.push_back(n); [[fallthrough]];
        case A::Descendant:
            for (NodeId m = n.node + 1; m < node.end; ++m)
                out.push_back({m, -1});
            break;
        case A::Parent:
            if (node.parent != no_node)
                out.push_back({node.parent, -1});
            break;
        case A::AncestorOrSelf: out.push_back(n); [[fallthrough]];
        case A::Ancestor:
            if (node.parent != no_node)
                up(node.parent);
            break;
        case A::FollowingSibling:
        case A::PrecedingSibling: {
            if (node.parent == no_node)
                break;
            const auto& sibs = d_[node.parent].children;
            auto it = std::find(sibs.begin(), sibs.end(), n.node);
            if (a == A::FollowingSibling)
                for (auto j = it + 1; j < sibs.end(); ++j)
                    out.push_back({*j, -1});
            else
                for (auto j = it; j != sibs.begin();)
                    out.push_back({*--j, -1});
            break;
        }
        case A::Following:
            for (NodeId m = node.end; m < d_.size(); ++m)
                out.push_back({m, -1});
            break;
        case A::Preceding: preceding(n.node, out); break;
        case A::Attribute:
            for (std::size_t i = 0; i < node.attributes.size(); ++i)
                out.push_back({n.node, static_cast<std::int32_t>(i)});
            break;
        case A::Namespace: break;
        }
        return out;
    }

    void preceding(NodeId n, RefSet& out) const
    {
        // Everything before n in document order except its ancestors.
        for (NodeId m = n; m-- > 1;)
            if (d_[m].end <= n)
                out.push_back({m, -1});
    }

    bool test(const xpath::Step& s, NodeRef n) const
    {
        using T = xpath::FullTest::Kind;
        bool attribute_axis = s.axis == xpath::FullAxis::Attribute;
        if (n.is_attribute()) {
            const auto& name = d_[n.node].attributes[static_cast<std::size_t>(n.attr)].name;
            switch (s.test.kind) {
            case T::Node: return true;
            case T::Name: return attribute_axis && name == s.test.name;
            case T::AnyName: return attribute_axis;
            case T::PrefixAny: return attribute_axis && name.rfind(s.test.name + ":", 0) == 0;
            default: return false;
            }
        }
        const Node& node = d_[n.node];
        switch (s.test.kind) {
        case T::Node: return true;
        case T::Text: return node.kind == NodeKind::Text;
        case T::Comment: return node.kind == NodeKind::Comment;
        case T::ProcessingInstruction:
            return node.kind == NodeKind::ProcessingInstruction && (s.test.name.empty() || node.name == s.test.name);
        case T::Name: return !attribute_axis && node.kind == NodeKind::Element && node.name == s.test.name;
        case T::AnyName: return !attribute_axis && node.kind == NodeKind::Element;
        case T::PrefixAny:
            return !attribute_axis && node.kind == NodeKind::Element && node.name.rfind(s.test.name + ":", 0) == 0;
        }
        return false;
    }

    static bool compare_atoms(xpath::ExprKind op, const Value& a, const Value& b, const FullEvaluator& ev)
    {
        using K = xpath::ExprKind;
        if (op == K::Equal || op == K::NotEqual) {
            bool eq;
            if (a.index() == 1 || b.index() == 1)
                eq = boolean(a) == boolean(b);
            else if (a.index() == 2 || b.index() == 2)
                eq = ev.number(a) == ev.number(b);
            else
                eq = ev.string(a) == ev.string(b);
            return op == K::Equal ? eq : !eq;
        }
        double x = ev.number(a), y = ev.number(b);
        switch (op) {
        case K::Less: return x < y;
        case K::LessEqual: return x <= y;
        case K::Greater: return x > y;
        default: return x >= y;
        }
    }

    bool compare(xpath::ExprKind op, const Value& a, const Value& b) const
    {
        auto* sa = std::get_if<RefSet>(&a);
        auto* sb = std::get_if<RefSet>(&b);
        if (sa && b.index() == 1)
            return compare_atoms(op, Value(boolean(a)), b, *this);
        if (sb && a.index() == 1)
            return compare_atoms(op, a, Value(boolean(b)), *this);
        std::vector<Value> left, right;
        if (sa)
            for (NodeRef n : *sa)
                left.emplace_back(string_value(n));
        else
            left.push_back(a);
        if (sb)
            for (NodeRef n : *sb)
                right.emplace_back(string_value(n));
        else
            right.push_back(b);
        for (const auto& x : left)
            for (const auto& y : right)
                if (compare_atoms(op, x, y, *this))
                    return true;
        return false;
    }

    Value function(const xpath::Expr& e, const Context& c)
    {
        const std::string& f = e.text;
        const auto& args = e.operands;
        auto arity = [&](std::size_t lo, std::size_t hi) {
            if (args.size() < lo || args.size() > hi)
                throw EvalError("wrong number of arguments to " + f + "()");
        };
        auto arg_or_context = [&](std::size_t i) -> Value {
            if (args.size() > i)
                return eval(args[i], c);
            return RefSet{c.node};
        };
        auto node_set = [&](std::size_t i) {
            Value v = eval(args[i], c);
            auto* s = std::get_if<RefSet>(&v);
            if (!s)
                throw EvalError(f + "() expects a node-set");
            return *s;
        };
        if (f == "last") { arity(0, 0); return static_cast<double>(c.size); }
        if (f == "position") { arity(0, 0); return static_cast<double>(c.position); }
        if (f == "count") { arity(1, 1); return static_cast<double>(node_set(0).size()); }
        if (f == "not") { arity(1, 1); return !boolean(eval(args[0], c)); }
        if (f == "true") { arity(0, 0); return true; }
        if (f == "false") { arity(0, 0); return false; }
        if (f == "boolean") { arity(1, 1); return boolean(eval(args[0], c)); }
        if (f == "number") { arity(0, 1); return number(arg_or_context(0)); }
        if (f == "string") { arity(0, 1); return string(arg_or_context(0)); }
        if (f == "concat") {
            if (args.size() < 2)
                throw EvalError("concat() needs at least two arguments");
            std::string out;
            for (const auto& a : args)
                out += string(eval(a, c));
            return out;
        }
        if (f == "contains" || f == "starts-with" || f == "substring-before" || f == "substring-after") {
            arity(2, 2);
            std::string a = string(eval(args[0], c)), b = string(eval(args[1], c));
            if (f == "contains")
                return a.find(b) != std::string::npos;
            if (f == "starts-with")
                return a.rfind(b, 0) == 0;
            auto at = a.find(b);
            if (at == std::string::npos)
                return std::string();
            return f == "substring-before" ? a.substr(0, at) : a.substr(at + b.size());
        }
        if (f == "substring") {
            arity(2, 3);
            std::string s = string(eval(args[0], c));
            double start = xpath_functions::round_half_up(number(eval(args[1], c)));
            double len = args.size() == 3 ? xpath_functions::round_half_up(number(eval(args[2], c)))
                                          : std::numeric_limits<double>::infinity();
            std::string out;
            for (std::size_t i = 0; i < s.size(); ++i) {
                double p = static_cast<double>(i + 1);
                if (p >= start && p < start + len)
                    out += s[i];
            }
            return out;
        }
        if (f == "string-length") {
            arity(0, 1);
            std::string s = string(arg_or_context(0));
            return static_cast<double>(
                std::count_if(s.begin(), s.end(), [](char ch) { return (static_cast<unsigned char>(ch) & 0xC0) != 0x80; }));
        }
        if (f == "normalize-space") {
            arity(0, 1);
            std::string s = string(arg_or_context(0)), out;
            bool space = false;
            for (char ch : s) {
                if (xml::is_space(ch)) {
                    space = !out.empty();
                } else {
                    if (space)
                        out += ' ';
                    space = false;
                    out += ch;
                }
            }
            return out;
        }
        if (f == "translate") {
            arity(3, 3);
            std::string s = string(eval(args[0], c)), from = string(eval(args[1], c)), to = string(eval(args[2], c));
            std::string out;
            for (char ch : s) {
                auto at = from.find(ch);
                if (at == std::string::npos)
                    out += ch;
                else if (at < to.size())
                    out += to[at];
            }
            return out;
        }
        if (f == "name" || f == "local-name") {
            arity(0, 1);
            RefSet s = args.empty() ? RefSet{c.node} : node_set(0);
            if (s.empty())
                return std::string();
            NodeRef n = s.front();
            std::string name;
            if (n.is_attribute())
                name = d_[n.node].attributes[static_cast<std::size_t>(n.attr)].name;
            else if (d_[n.node].kind == NodeKind::Element || d_[n.node].kind == NodeKind::ProcessingInstruction)
                name = d_[n.node].name;
            if (f == "local-name") {
                auto colon = name.find(':');
                if (colon != std::string::npos && d_[n.node].kind != NodeKind::ProcessingInstruction)
                    name = name.substr(colon + 1);
            }
            return name;
        }
        if (f == "sum") {
            arity(1, 1);
            double total = 0;
            for (NodeRef n : node_set(0))
                total += xpath_functions::string_to_number(string_value(n));
            return total;
        }
        if (f == "floor") { arity(1, 1); return std::floor(number(eval(args[0], c))); }
        if (f == "ceiling") { arity(1, 1); return std::ceil(number(eval(args[0], c))); }
        if (f == "round") { arity(1, 1); return xpath_functions::round_half_up(number(eval(args[0], c))); }
        throw EvalError("unsupported function " + f + "()");
    }

    const Document& d_;
};

}  // namespace detail

/// Full XPath 1.0 evaluation with the document node as context.
inline Value eval_full(const xpath::Expr& e, const Document& d)
{
    detail::FullEvaluator ev(d);
    return ev.eval(e, {NodeRef{Document::root(), -1}, 1, 1});
}

inline Value eval_full(const xpath::FullQuery& q, const Document& d) { return eval_full(q.expr, d); }

/// String-value of a node of the full data model.
inline std::string string_value(const Document& d, NodeRef n) { return detail::FullEvaluator(d).string_value(n); }

}  // namespace xproj
