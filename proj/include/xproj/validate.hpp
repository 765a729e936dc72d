#pragma once

#include <optional>
#include <string>
#include <vector>

#include "xproj/document.hpp"
#include "xproj/grammar.hpp"
#include "xproj/grammar_io.hpp"

namespace xproj {

/// Assignment of a generating rule to every element and text node.
/// Whitespace-only text in element-only content, comments and processing
/// instructions carry no rule.
class Interpretation {
public:
    explicit Interpretation(std::size_t nodes = 0) : rules_(nodes) {}

    std::optional<RuleId> operator[](NodeId n) const { return rules_[n]; }
    void assign(NodeId n, RuleId r) { rules_[n] = r; }
    std::size_t size() const noexcept { return rules_.size(); }

private:
    std::vector<std::optional<RuleId>> rules_;
};

struct Validation {
    std::optional<Interpretation> interpretation;
    NodeId offending = no_node;
    std::string path;
    std::string reason;

    bool valid() const noexcept { return interpretation.has_value(); }
    explicit operator bool() const noexcept { return valid(); }
};

namespace detail {

inline bool ignorable(const Document& d, NodeId c, const Grammar& g, RuleId parent)
{
    const Node& n = d[c];
    if (n.kind == NodeKind::Comment || n.kind == NodeKind::ProcessingInstruction)
        return true;
    return n.kind == NodeKind::Text && !g.admits_text(parent) && xml::is_whitespace(n.value);
}

using StateSet = std::vector<ContentAutomaton::State>;

// Runs the content automaton of `r` over the children of `node`, where each
// child contributes any of the names of its candidate rules. Returns the
// state set after each child (front is the start set); empty on rejection.
inline std::vector<StateSet> run_children(const Document& d, NodeId node, const Grammar& g, RuleId r,
                                          const std::vector<std::vector<RuleId>>& cand,
                                          std::vector<NodeId>* word = nullptr)
{
    const ContentAutomaton& a = g.automaton(r);
    std::vector<StateSet> sets{{a.start()}};
    for (NodeId c : d[node].children) {
        if (ignorable(d, c, g, r))
            continue;
        StateSet next;
        for (auto s : sets.back())
            for (RuleId cr : cand[c]) {
                auto t = a.step(s, g.rule(cr).name);
                if (t != ContentAutomaton::reject)
                    next.push_back(t);
            }
        std::sort(next.begin(), next.end());
        next.erase(std::unique(next.begin(), next.end()), next.end());
        if (next.empty())
            return {};
        sets.push_back(std::move(next));
        if (word)
            word->push_back(c);
    }
    return sets;
}

}  // namespace detail

/// Checks membership of `doc` in the language of `g`. On success returns one
/// witnessing interpretation (for ambiguous grammars the one preferring the
/// lowest automaton states and rule ids); otherwise the offending node.
inline Validation validate_tree(const Document& doc, const Grammar& g)
{
    Validation out;
    const NodeId root = doc.root_element();
    if (root == no_node) {
        out.offending = Document::root();
        out.path = "/";
        out.reason = "document has no root element";
        return out;
    }

    std::vector<RuleId> text_rules;
    for (std::uint32_t i = 0; i < g.rule_count(); ++i)
        if (g.rule(RuleId{i}).is_text())
            text_rules.push_back(RuleId{i});

    // Bottom-up: rules able to generate each subtree.
    std::vector<std::vector<RuleId>> cand(doc.size());
    for (NodeId id = static_cast<NodeId>(doc.size()); id-- > 1;) {
        const Node& n = doc[id];
        if (n.kind == NodeKind::Text) {
            cand[id] = text_rules;
        } else if (n.kind == NodeKind::Element) {
            for (std::uint32_t i = 0; i < g.rule_count(); ++i) {
                RuleId r{i};
                const Rule& rule = g.rule(r);
                if (!rule.is_element() || !rule.label.matches(n.name))
                    continue;
                auto sets = detail::run_children(doc, id, g, r, cand);
                const auto& a = g.automaton(r);
                if (!sets.empty() &&
                    std::any_of(sets.back().begin(), sets.back().end(), [&](auto s) { return a.is_accepting(s); }))
                    cand[id].push_back(r);
            }
        }
    }

    std::vector<RuleId> roots;
    for (RuleId r : cand[root])
        if (g.is_start(g.rule(r).name))
            roots.push_back(r);

    if (roots.empty()) {
        // Descend to the topmost node that fails on its own.
        NodeId cur = root;
        while (true) {
            NodeId bad = no_node;
            for (NodeId c : doc[cur].children)
                if (doc[c].kind == NodeKind::Element && cand[c].empty()) {
                    bad = c;
                    break;
                }
            if (bad == no_node)
                break;
            cur = bad;
        }
        out.offending = cur;
        out.path = doc.path(cur);
        bool labelled = false;
        for (const Rule& r : g.rules())
            labelled = labelled || (r.is_element() && r.label.matches(doc[cur].name));
        if (!labelled)
            out.reason = "no rule for tag '" + doc[cur].name + "'";
        else if (cur == root && !cand[root].empty())
            out.reason = "root element <" + doc[cur].name + "> is not generated by a start name";
        else
            out.reason = "children of <" + doc[cur].name + "> match no content model";
        return out;
    }

    // Top-down witness.
    Interpretation interp(doc.size());
    std::vector<std::pair<NodeId, RuleId>> work{{root, roots.front()}};
    while (!work.empty()) {
        auto [id, r] = work.back();
        work.pop_back();
        interp.assign(id, r);
        if (!g.rule(r).is_element())
            continue;
        std::vector<NodeId> word;
        auto sets = detail::run_children(doc, id, g, r, cand, &word);
        const auto& a = g.automaton(r);
        ContentAutomaton::State target = ContentAutomaton::reject;
        for (auto s : sets.back())
            if (a.is_accepting(s)) {
                target = s;
                break;
            }
        for (std::size_t i = word.size(); i-- > 0;) {
            bool found = false;
            for (auto s : sets[i]) {
                for (RuleId cr : cand[word[i]]) {
                    if (a.step(s, g.rule(cr).name) == target) {
                        work.emplace_back(word[i], cr);
                        target = s;
                        found = true;
                        break;
                    }
                }
                if (found)
                    break;
            }
        }
    }
    out.interpretation = std::move(interp);
    return out;
}

}  // namespace xproj
