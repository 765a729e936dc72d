#pragma once

// Sound approximation of XPath 1.0 into the navigational fragment.
//
// Every predicate is replaced by a necessary condition whose paths reach all
// the data the original predicate inspects; value-inspecting uses of a path
// extend it with descendant-or-self::node() so that whole subtrees survive.
// Axes outside the fragment are rewritten to fragment paths that reach a
// superset of their nodes, and absolute paths found inside predicates or
// functions become extra top-level branches.

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "xproj/ell.hpp"
#include "xproj/xpath.hpp"

namespace xproj {

namespace detail {

using xpath::Expr;
using xpath::ExprKind;
using xpath::FullAxis;
using xpath::FullTest;

enum class StaticType { NodeSet, Boolean, Number, String, Unknown };

inline StaticType function_type(const std::string& f)
{
    static const char* booleans[] = {"not", "true", "false", "boolean", "contains", "starts-with", "lang"};
    static const char* numbers[] = {"last", "position", "count", "sum", "floor", "ceiling", "round", "number",
                                    "string-length"};
    static const char* strings[] = {"string", "concat", "substring", "substring-before", "substring-after",
                                    "normalize-space", "translate", "name", "local-name", "namespace-uri"};
    for (const char* b : booleans)
        if (f == b)
            return StaticType::Boolean;
    for (const char* n : numbers)
        if (f == n)
            return StaticType::Number;
    for (const char* s : strings)
        if (f == s)
            return StaticType::String;
    if (f == "id")
        return StaticType::NodeSet;
    return StaticType::Unknown;
}

inline StaticType static_type(const Expr& e)
{
    switch (e.kind) {
    case ExprKind::Path:
    case ExprKind::Filter:
    case ExprKind::Union: return StaticType::NodeSet;
    case ExprKind::Or:
    case ExprKind::And: return StaticType::Boolean;
    case ExprKind::Literal: return StaticType::String;
    case ExprKind::Number:
    case ExprKind::Negate: return StaticType::Number;
    case ExprKind::Function: return function_type(e.text);
    default:
        if (xpath::is_comparison(e.kind))
            return StaticType::Boolean;
        return StaticType::Number;
    }
}

// Whether position() or last() is evaluated in the predicate's own context;
// predicates of nested steps and filters have their own context.
inline bool uses_position(const Expr& e)
{
    if (e.kind == ExprKind::Function && (e.text == "position" || e.text == "last"))
        return true;
    if (e.kind == ExprKind::Path)
        return false;
    if (e.kind == ExprKind::Filter)
        return uses_position(e.operands.front());
    return std::any_of(e.operands.begin(), e.operands.end(), [](const Expr& o) { return uses_position(o); });
}

inline bool position_sensitive(const Expr& e)
{
    auto t = static_type(e);
    return t == StaticType::Number || t == StaticType::Unknown || uses_position(e);
}

// Zero-argument functions reading the context node's string value.
inline bool reads_context_value(const Expr& e)
{
    if (e.kind != ExprKind::Function || !e.operands.empty())
        return false;
    const auto& f = e.text;
    if (f == "string" || f == "number" || f == "normalize-space" || f == "string-length")
        return true;
    return function_type(f) == StaticType::Unknown;
}

inline NodeTest convert_test(const FullTest& t)
{
    switch (t.kind) {
    case FullTest::Kind::Name: return NodeTest::named(t.name);
    case FullTest::Kind::AnyName:
    case FullTest::Kind::PrefixAny: return NodeTest::wildcard();
    case FullTest::Kind::Text: return NodeTest::text();
    default: return NodeTest::node();
    }
}

inline StepEll dos_node() { return make_step(Axis::DescendantOrSelf, NodeTest::node()); }
inline Predicate always() { return Predicate::exists(PathEll{{make_step(Axis::Self, NodeTest::node())}}); }

using Cond = std::optional<Predicate>;  // nullopt: no condition

inline Cond conj(std::vector<Cond> items)
{
    std::vector<Predicate> out;
    for (auto& c : items)
        if (c)
            out.push_back(std::move(*c));
    if (out.empty())
        return std::nullopt;
    return Predicate::combine(Predicate::Kind::And, std::move(out));
}

// A condition that always holds but whose paths must still be navigated.
inline Cond navigate_only(std::vector<Predicate> deps)
{
    if (deps.empty())
        return std::nullopt;
    deps.insert(deps.begin(), always());
    return Predicate::combine(Predicate::Kind::Or, std::move(deps));
}

class Approximator {
public:
    QueryEll run(const Expr& e)
    {
        top(e);
        QueryEll q;
        for (auto& b : branches_)
            if (std::find(q.branches.begin(), q.branches.end(), b) == q.branches.end())
                q.branches.push_back(std::move(b));
        return q;
    }

private:
    struct Walk {
        PathEll path;
        bool attr = false;      // context is an attribute (or namespace) of the last element reached
        bool absolute = false;  // starts at the document node rather than the candidate
    };

    void add_branch(PathEll p) { branches_.push_back(std::move(p)); }

    static PathEll value_path(Walk w)
    {
        if (!w.attr)
            w.path.steps.push_back(dos_node());
        return std::move(w.path);
    }

    // Top level: node-set expressions contribute their result branches; any
    // other expression contributes the data of every path it reads.
    void top(const Expr& e)
    {
        switch (e.kind) {
        case ExprKind::Path: {
            Walk w;
            steps(e.path.steps, w);
            add_branch(std::move(w.path));
            return;
        }
        case ExprKind::Union:
            for (const auto& o : e.operands)
                top(o);
            return;
        case ExprKind::Filter:
            for (auto& w : filter(e))
                add_branch(std::move(w.path));
            for (auto& w : extra_walks_)
                add_branch(std::move(w.path));
            extra_walks_.clear();
            return;
        default:
            break;
        }
        if (static_type(e) == StaticType::NodeSet) {
            // Node-set of unknown provenance, e.g. id(): keep everything.
            add_branch(PathEll{{dos_node()}});
            return;
        }
        for (auto& d : dependencies(e))
            add_branch(std::move(d.path));
    }

    // Walks of a filter expression. At top level every walk is a branch from
    // the root; inside a predicate absolute parts are returned flagged.
    std::vector<Walk> filter(const Expr& e, bool attr = false)
    {
        const Expr& primary = e.operands.front();
        std::vector<Walk> walks;
        std::vector<const Expr*> parts;
        if (primary.kind == ExprKind::Union)
            for (const auto& o : primary.operands)
                parts.push_back(&o);
        else
            parts.push_back(&primary);
        for (const Expr* part : parts) {
            if (part->kind == ExprKind::Filter) {
                auto sub = filter(*part, attr);
                walks.insert(walks.end(), sub.begin(), sub.end());
            } else if (part->kind == ExprKind::Path) {
                walks.push_back(walk(part->path, attr));
            } else {
                for (auto& d : dependencies(*part, attr))
                    add_branch(std::move(d.path));
                walks.push_back(Walk{PathEll{{dos_node()}}, false, true});
            }
        }
        // Predicates filter the whole node-set in document order. The set
        // itself is preserved by its branches, so positions only need the
        // unfiltered walk carrying the earlier predicates.
        for (auto& w : walks) {
            std::vector<Cond> earlier;
            for (const auto& p : e.predicates) {
                if (position_sensitive(p)) {
                    Walk unfiltered = w;
                    attach(unfiltered.path, conj(earlier));
                    if (unfiltered.absolute)
                        add_branch(value_path(std::move(unfiltered)));
                    else
                        extra_walks_.push_back(std::move(unfiltered));
                }
                Cond c = predicate(p, w.attr);
                earlier.push_back(c);
                attach(w.path, std::move(c));
            }
            steps(e.path.steps, w);
        }
        return walks;
    }

    Walk walk(const xpath::LocationPath& lp, bool attr)
    {
        Walk w;
        w.absolute = lp.absolute;
        w.attr = lp.absolute ? false : attr;
        steps(lp.steps, w);
        return w;
    }

    static void attach(PathEll& p, Cond c)
    {
        if (!c)
            return;
        if (p.steps.empty())
            p.steps.push_back(make_step(Axis::Self, NodeTest::node()));
        StepEll& last = p.steps.back();
        if (last.has_predicate()) {
            Predicate merged = Predicate::combine(Predicate::Kind::And, {std::move(last.predicate.front()), std::move(*c)});
            last.predicate.front() = std::move(merged);
        } else {
            last.predicate.push_back(std::move(*c));
        }
    }

    void steps(const std::vector<xpath::Step>& ss, Walk& w)
    {
        for (const auto& s : ss)
            step(s, w);
    }

    void step(const xpath::Step& s, Walk& w)
    {
        NodeTest t = convert_test(s.test);
        auto& out = w.path.steps;
        if (w.attr) {
            switch (s.axis) {
            case FullAxis::Parent: out.push_back(make_step(Axis::Self, t)); w.attr = false; break;
            case FullAxis::Ancestor:
            case FullAxis::AncestorOrSelf: out.push_back(make_step(Axis::AncestorOrSelf, t)); w.attr = false; break;
            case FullAxis::Child:
            case FullAxis::Descendant: out.push_back(make_step(to_ell(s.axis), t)); w.attr = false; break;
            case FullAxis::Following:
            case FullAxis::Preceding: widen_document_order(out, t); w.attr = false; break;
            default: break;  // stays on the attribute (or selects nothing)
            }
        } else {
            switch (s.axis) {
            case FullAxis::Attribute:
            case FullAxis::Namespace: w.attr = true; break;
            case FullAxis::FollowingSibling:
            case FullAxis::PrecedingSibling:
                out.push_back(make_step(Axis::Parent, NodeTest::node()));
                out.push_back(make_step(Axis::Child, t));
                break;
            case FullAxis::Following:
            case FullAxis::Preceding: widen_document_order(out, t); break;
            default: out.push_back(make_step(to_ell(s.axis), t)); break;
            }
        }
        bool candidate_is_attr = w.attr;

        std::vector<Cond> earlier;
        for (const auto& p : s.predicates) {
            bool positional = position_sensitive(p);
            Cond c = predicate(p, candidate_is_attr);
            if (positional && !candidate_is_attr) {
                Cond keep_peers = peers(s.axis, t, conj(earlier));
                c = conj({std::move(c), std::move(keep_peers)});
            }
            earlier.push_back(c);
            attach(w.path, std::move(c));
        }
    }

    static Axis to_ell(FullAxis a)
    {
        switch (a) {
        case FullAxis::Self: return Axis::Self;
        case FullAxis::Child: return Axis::Child;
        case FullAxis::Descendant: return Axis::Descendant;
        case FullAxis::DescendantOrSelf: return Axis::DescendantOrSelf;
        case FullAxis::Parent: return Axis::Parent;
        case FullAxis::Ancestor: return Axis::Ancestor;
        default: return Axis::AncestorOrSelf;
        }
    }

    static void widen_document_order(std::vector<StepEll>& out, const NodeTest& t)
    {
        out.push_back(make_step(Axis::AncestorOrSelf, NodeTest::node()));
        out.push_back(make_step(Axis::Parent, NodeTest::node()));
        out.push_back(make_step(Axis::Child, NodeTest::node()));
        out.push_back(make_step(Axis::DescendantOrSelf, t));
    }

    // Condition keeping every node that competes with the candidate for a
    // position: all nodes of the step's node-set satisfying the earlier
    // predicates `d`.
    static Cond peers(FullAxis axis, const NodeTest& t, Cond d)
    {
        auto with_d = [&](StepEll s) {
            if (d)
                s.predicate.push_back(*d);
            return s;
        };
        switch (axis) {
        case FullAxis::Child:
        case FullAxis::FollowingSibling:
        case FullAxis::PrecedingSibling:
            return Predicate::exists(PathEll{{make_step(Axis::Parent, NodeTest::node()), with_d(make_step(Axis::Child, t))}});
        case FullAxis::Descendant:
        case FullAxis::DescendantOrSelf:
        case FullAxis::Following:
        case FullAxis::Preceding:
            return Predicate::exists(
                PathEll{{make_step(Axis::AncestorOrSelf, NodeTest::node()), with_d(make_step(Axis::DescendantOrSelf, t))}});
        case FullAxis::Ancestor:
        case FullAxis::AncestorOrSelf:
            if (!d)
                return std::nullopt;
            return Predicate::combine(Predicate::Kind::Or,
                                      {Predicate::exists(PathEll{{with_d(make_step(Axis::AncestorOrSelf, t))}}),
                                       Predicate::exists(PathEll{{with_d(make_step(Axis::DescendantOrSelf, t))}})});
        default:
            return std::nullopt;
        }
    }

    // Data read from a path's nodes (string values): whole subtrees. Absolute
    // paths become branches and impose no local condition.
    Cond value_of_path(const Expr& path_expr, bool attr)
    {
        Walk w = walk(path_expr.path, attr);
        return value_of_walk(std::move(w));
    }

    Cond value_of_walk(Walk w)
    {
        if (w.absolute) {
            add_branch(value_path(std::move(w)));
            return std::nullopt;
        }
        if (w.attr && w.path.steps.empty())
            return std::nullopt;
        return Predicate::exists(value_path(std::move(w)));
    }

    // Existence of a path's nodes.
    Cond exists_path(const Expr& path_expr, bool attr)
    {
        Walk w = walk(path_expr.path, attr);
        if (w.absolute) {
            add_branch(std::move(w.path));
            return std::nullopt;
        }
        if (w.path.steps.empty())
            return std::nullopt;
        return Predicate::exists(std::move(w.path));
    }

    // Every piece of data `e` may read, as paths relative to the context
    // node; at top level the context is the document node, so they double
    // as branches.
    std::vector<Predicate> dependencies(const Expr& e, bool attr = false)
    {
        std::vector<Predicate> out;
        collect(e, attr, out);
        return out;
    }

    void collect(const Expr& e, bool attr, std::vector<Predicate>& out)
    {
        switch (e.kind) {
        case ExprKind::Path:
            if (auto c = value_of_path(e, attr))
                out.push_back(std::move(*c));
            return;
        case ExprKind::Filter: {
            auto walks = filter(e, attr);
            for (auto& w : extra_walks_)
                walks.push_back(std::move(w));
            extra_walks_.clear();
            for (auto& w : walks)
                if (auto c = value_of_walk(std::move(w)))
                    out.push_back(std::move(*c));
            return;
        }
        case ExprKind::Function:
            if (reads_context_value(e) && !attr)
                out.push_back(Predicate::exists(PathEll{{dos_node()}}));
            if (e.text == "id")
                add_branch(PathEll{{dos_node()}});
            break;
        default:
            break;
        }
        for (const auto& o : e.operands)
            collect(o, attr, out);
    }

    Cond fallback(const Expr& e, bool attr) { return navigate_only(dependencies(e, attr)); }

    // Necessary condition for predicate `e` at a candidate node.
    Cond predicate(const Expr& e, bool attr)
    {
        switch (e.kind) {
        case ExprKind::Path:
            return exists_path(e, attr);
        case ExprKind::And:
            return conj({predicate(e.operands[0], attr), predicate(e.operands[1], attr)});
        case ExprKind::Or: {
            Cond a = predicate(e.operands[0], attr);
            Cond b = predicate(e.operands[1], attr);
            if (a && b)
                return Predicate::combine(Predicate::Kind::Or, {std::move(*a), std::move(*b)});
            std::vector<Predicate> deps;
            if (a)
                deps.push_back(std::move(*a));
            if (b)
                deps.push_back(std::move(*b));
            return navigate_only(std::move(deps));
        }
        case ExprKind::Union: {
            std::vector<Predicate> alts;
            bool unconditional = false;
            for (const auto& o : e.operands) {
                Cond c = predicate(o, attr);
                if (c)
                    alts.push_back(std::move(*c));
                else
                    unconditional = true;
            }
            if (alts.empty())
                return std::nullopt;
            if (unconditional)
                return navigate_only(std::move(alts));
            return Predicate::combine(Predicate::Kind::Or, std::move(alts));
        }
        case ExprKind::Function:
            if (e.text == "boolean" && e.operands.size() == 1)
                return predicate(e.operands[0], attr);
            if ((e.text == "contains" || e.text == "starts-with") && e.operands.size() == 2 &&
                e.operands[1].kind == ExprKind::Literal && !e.operands[1].text.empty()) {
                // A match requires a non-empty string value of the first argument.
                std::vector<Cond> conds;
                std::vector<Predicate> deps;
                if (e.operands[0].kind == ExprKind::Path)
                    conds.push_back(value_of_path(e.operands[0], attr));
                else
                    deps = dependencies(e.operands[0], attr);
                conds.push_back(navigate_only(std::move(deps)));
                return conj(std::move(conds));
            }
            return fallback(e, attr);
        default:
            break;
        }
        if (xpath::is_comparison(e.kind)) {
            const Expr& l = e.operands[0];
            const Expr& r = e.operands[1];
            auto lt = static_type(l), rt = static_type(r);
            bool boolean = lt == StaticType::Boolean || rt == StaticType::Boolean || lt == StaticType::Unknown ||
                           rt == StaticType::Unknown;
            if (boolean)
                return fallback(e, attr);
            // Comparisons involving a node-set hold only if the node-set is
            // non-empty.
            std::vector<Cond> conds;
            std::vector<Predicate> deps;
            for (const Expr* o : {&l, &r}) {
                if (o->kind == ExprKind::Path)
                    conds.push_back(value_of_path(*o, attr));
                else {
                    auto d = dependencies(*o, attr);
                    deps.insert(deps.end(), d.begin(), d.end());
                }
            }
            conds.push_back(navigate_only(std::move(deps)));
            return conj(std::move(conds));
        }
        return fallback(e, attr);
    }

    std::vector<PathEll> branches_;
    std::vector<Walk> extra_walks_;
};

}  // namespace detail

/// Approximates a full XPath query by a fragment query whose inferred
/// projector is also sound for the original. Total: constructs without a
/// finer rule fall back to keeping whole subtrees.
inline QueryEll approximate_to_ell(const xpath::FullQuery& q) { return detail::Approximator().run(q.expr); }

inline QueryEll approximate_to_ell(std::string_view text) { return approximate_to_ell(xpath::parse_query(text)); }

}  // namespace xproj
