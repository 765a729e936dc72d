#pragma once

// Static analysis over grammars: types of fragment steps and inference of
// the set of rules a query batch needs.

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xproj/ell.hpp"
#include "xproj/grammar.hpp"
#include "xproj/grammar_io.hpp"

namespace xproj {

/// Rules plus the document node, which has no rule of its own.
struct TypeSet {
    bool document = false;
    RuleSet rules;

    bool empty() const noexcept { return !document && rules.empty(); }
    bool operator==(const TypeSet&) const = default;

    static TypeSet of_document() { return TypeSet{true, {}}; }
    static TypeSet of(RuleSet r) { return TypeSet{false, std::move(r)}; }
};

namespace detail {

inline RuleSet root_rules(const Grammar& g)
{
    RuleSet out;
    for (RuleId r : g.start_rules())
        if (g.rule(r).is_element())
            out.insert(r);
    return out;
}

inline bool intersects(const TypeSet& a, const TypeSet& b)
{
    if (a.document && b.document)
        return true;
    const auto& small = a.rules.size() < b.rules.size() ? a.rules : b.rules;
    const auto& large = a.rules.size() < b.rules.size() ? b.rules : a.rules;
    for (RuleId r : small)
        if (large.count(r))
            return true;
    return false;
}

inline void merge(TypeSet& into, const TypeSet& from)
{
    into.document = into.document || from.document;
    into.rules.insert(from.rules.begin(), from.rules.end());
}

inline TypeSet children(const Grammar& g, const TypeSet& s)
{
    TypeSet out;
    if (s.document)
        out.rules = root_rules(g);
    for (RuleId r : s.rules)
        for (RuleId c : g.child_rules(r))
            out.rules.insert(c);
    return out;
}

inline TypeSet parents(const Grammar& g, const TypeSet& s)
{
    TypeSet out;
    const RuleSet& live = g.reachable_from_start();
    for (RuleId r : s.rules) {
        if (g.rule(r).is_element() && g.start_rules().count(r))
            out.document = true;
        for (RuleId p : g.parent_rules(r))
            if (live.count(p))
                out.rules.insert(p);
    }
    return out;
}

// Transitive (one or more steps) closure of `next`.
template <class Next>
TypeSet closure(const Grammar& g, const TypeSet& s, Next next)
{
    TypeSet out;
    TypeSet frontier = next(g, s);
    while (!frontier.empty()) {
        TypeSet fresh;
        if (frontier.document && !out.document)
            fresh.document = out.document = true;
        for (RuleId r : frontier.rules)
            if (out.rules.insert(r).second)
                fresh.rules.insert(r);
        frontier = fresh.empty() ? TypeSet{} : next(g, fresh);
    }
    return out;
}

inline TypeSet descendants(const Grammar& g, const TypeSet& s) { return closure(g, s, children); }
inline TypeSet ancestors(const Grammar& g, const TypeSet& s) { return closure(g, s, parents); }

inline TypeSet apply_test(const Grammar& g, const TypeSet& s, const NodeTest& t)
{
    TypeSet out;
    out.document = s.document && t.kind == NodeTest::Kind::Node;
    for (RuleId r : s.rules) {
        const Rule& rule = g.rule(r);
        bool keep = false;
        switch (t.kind) {
        case NodeTest::Kind::Tag: keep = rule.is_element() && rule.label.matches(t.tag); break;
        case NodeTest::Kind::Wildcard: keep = rule.is_element(); break;
        case NodeTest::Kind::Text: keep = rule.is_text(); break;
        case NodeTest::Kind::Node: keep = true; break;
        }
        if (keep)
            out.rules.insert(r);
    }
    return out;
}

}  // namespace detail

/// Types reachable by one step from `ctx`, before predicates.
inline TypeSet step_types(const TypeSet& ctx, Axis axis, const NodeTest& test, const Grammar& g)
{
    TypeSet moved;
    switch (axis) {
    case Axis::Self: moved = ctx; break;
    case Axis::Child: moved = detail::children(g, ctx); break;
    case Axis::Descendant: moved = detail::descendants(g, ctx); break;
    case Axis::DescendantOrSelf:
        moved = detail::descendants(g, ctx);
        detail::merge(moved, ctx);
        break;
    case Axis::Parent: moved = detail::parents(g, ctx); break;
    case Axis::Ancestor: moved = detail::ancestors(g, ctx); break;
    case Axis::AncestorOrSelf:
        moved = detail::ancestors(g, ctx);
        detail::merge(moved, ctx);
        break;
    }
    return detail::apply_test(g, moved, test);
}

/// Rules that can generate a node one `axis` step away from a node
/// generated by a rule of `ctx`, matching `test`.
inline RuleSet step_transition(const RuleSet& ctx, Axis axis, const NodeTest& test, const Grammar& g)
{
    return step_types(TypeSet::of(ctx), axis, test, g).rules;
}

namespace detail {

inline TypeSet fold(const PathEll& p, TypeSet ctx, const Grammar& g);

inline bool satisfiable(const Predicate& p, const TypeSet& at, const Grammar& g)
{
    switch (p.kind) {
    case Predicate::Kind::Exists: return !fold(p.path, at, g).empty();
    case Predicate::Kind::And:
        for (const auto& o : p.operands)
            if (!satisfiable(o, at, g))
                return false;
        return true;
    case Predicate::Kind::Or:
        for (const auto& o : p.operands)
            if (satisfiable(o, at, g))
                return true;
        return false;
    }
    return false;
}

// Keeps the members of `s` for which the predicate can hold.
inline TypeSet refine(const TypeSet& s, const Predicate& p, const Grammar& g)
{
    TypeSet out;
    out.document = s.document && satisfiable(p, TypeSet::of_document(), g);
    for (RuleId r : s.rules)
        if (satisfiable(p, TypeSet::of({r}), g))
            out.rules.insert(r);
    return out;
}

inline TypeSet apply_step(const StepEll& s, const TypeSet& ctx, const Grammar& g)
{
    TypeSet out = step_types(ctx, s.axis, s.test, g);
    if (s.has_predicate())
        out = refine(out, s.pred(), g);
    return out;
}

inline TypeSet fold(const PathEll& p, TypeSet ctx, const Grammar& g)
{
    for (const auto& s : p.steps) {
        if (ctx.empty())
            break;
        ctx = apply_step(s, ctx, g);
    }
    return ctx;
}

}  // namespace detail

/// Types of a query's results (over all branches), as rules; a result that
/// is the document node itself has no rule and is not represented.
inline TypeSet infer_result_types(const QueryEll& q, const Grammar& g)
{
    TypeSet out;
    for (const auto& b : q.branches)
        detail::merge(out, detail::fold(b, TypeSet::of_document(), g));
    return out;
}

inline RuleSet infer_types(const QueryEll& q, const Grammar& g) { return infer_result_types(q, g).rules; }

/// A grammar together with the subset of its rules kept by pruning.
struct Projector {
    Grammar grammar;
    RuleSet kept;

    bool keeps(RuleId r) const { return kept.count(r) != 0; }
};

namespace detail {

class ProjectorInference {
public:
    explicit ProjectorInference(const Grammar& g) : g_(g) {}

    // Navigation of `p` from `start`: keeps the rules of every node lying on
    // a path from `start` to a result, plus the data of predicates; with
    // `whole_results` also every rule below the results.
    void navigate(const PathEll& p, const TypeSet& start, bool whole_results)
    {
        const std::size_t n = p.steps.size();
        std::vector<TypeSet> ctx{start};
        for (const auto& s : p.steps) {
            ctx.push_back(apply_step(s, ctx.back(), g_));
            if (ctx.back().empty())
                return;  // statically unsatisfiable
        }
        // Backwards: the members of each context that lead to a result.
        std::vector<TypeSet> need(n + 1);
        need[n] = ctx[n];
        for (std::size_t i = n; i-- > 0;) {
            const StepEll& s = p.steps[i];
            if (ctx[i].document && intersects(step_types(TypeSet::of_document(), s.axis, s.test, g_), need[i + 1]))
                need[i].document = true;
            for (RuleId r : ctx[i].rules)
                if (intersects(step_types(TypeSet::of({r}), s.axis, s.test, g_), need[i + 1]))
                    need[i].rules.insert(r);
        }
        for (std::size_t i = 1; i <= n; ++i) {
            const StepEll& s = p.steps[i - 1];
            kept_.insert(need[i].rules.begin(), need[i].rules.end());
            if (s.axis == Axis::Descendant || s.axis == Axis::DescendantOrSelf)
                keep_between(need[i - 1], need[i]);
            if (s.has_predicate())
                navigate_predicate(s.pred(), need[i]);
        }
        if (whole_results) {
            RuleSet roots = need[n].rules;
            if (need[n].document)
                roots.insert(g_.start_rules().begin(), g_.start_rules().end());
            RuleSet closed = reachable_rules(g_, roots);
            kept_.insert(closed.begin(), closed.end());
        }
    }

    RuleSet take() && { return std::move(kept_); }

private:
    void navigate_predicate(const Predicate& p, const TypeSet& at)
    {
        switch (p.kind) {
        case Predicate::Kind::Exists:
            navigate(p.path, at, false);
            return;
        case Predicate::Kind::And:
            for (const auto& o : p.operands)
                navigate_predicate(o, at);
            return;
        case Predicate::Kind::Or:
            // Each disjunct is evaluated wherever it can hold.
            for (const auto& o : p.operands) {
                TypeSet where = refine(at, o, g_);
                if (!where.empty())
                    navigate_predicate(o, where);
            }
            return;
        }
    }

    // Rules of nodes strictly between an upper context and the lower one.
    void keep_between(const TypeSet& upper, const TypeSet& lower)
    {
        TypeSet below = descendants(g_, upper);
        TypeSet above = ancestors(g_, TypeSet::of(lower.rules));
        for (RuleId r : below.rules)
            if (above.rules.count(r))
                kept_.insert(r);
    }

    const Grammar& g_;
    RuleSet kept_;
};

}  // namespace detail

/// Infers the rules needed to evaluate every query of the batch: rules on
/// the navigation paths to the results, rules touched by predicates, and
/// everything below the results.
inline Projector infer_projector(std::span<const QueryEll> qs, const Grammar& g)
{
    detail::ProjectorInference inf(g);
    for (const auto& q : qs)
        for (const auto& b : q.branches)
            inf.navigate(b, TypeSet::of_document(), true);
    return Projector{g, std::move(inf).take()};
}

inline Projector infer_projector(const QueryEll& q, const Grammar& g)
{
    return infer_projector(std::span<const QueryEll>(&q, 1), g);
}

/// Projector file: the grammar text with every rule marked '+' (kept) or
/// '-' (dropped).
inline std::string projector_to_text(const Projector& p) { return grammar_to_text(p.grammar, &p.kept); }

inline Projector parse_projector(std::string_view text)
{
    auto parsed = parse_grammar_text(text);
    if (!parsed.marked)
        throw SyntaxError("projector rules must be marked with '+' or '-'", 0, 0);
    return Projector{std::move(parsed.grammar), std::move(*parsed.marked)};
}

}  // namespace xproj
