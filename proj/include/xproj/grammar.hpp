#pragma once

// Regular tree grammars: start names plus productions
//   Name -> label[ regex over names ]   or   Name -> String.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "xproj/content_model.hpp"
#include "xproj/error.hpp"

namespace xproj {

class GrammarError : public Error {
public:
    using Error::Error;
};

/// Element label: a concrete tag, or the wildcard `_` matching every tag.
class Label {
public:
    Label() = default;
    static Label wildcard() { return Label(); }
    static Label tag(std::string t) { return Label(std::move(t)); }

    bool is_wildcard() const noexcept { return !tag_.has_value(); }
    const std::string& tag_name() const { return *tag_; }
    bool matches(std::string_view t) const noexcept { return !tag_ || *tag_ == t; }
    std::string to_string() const { return tag_ ? *tag_ : std::string("_"); }

    bool operator==(const Label&) const = default;
    auto operator<=>(const Label&) const = default;

private:
    explicit Label(std::string t) : tag_(std::move(t)) {}
    std::optional<std::string> tag_;
};

enum class RuleKind : std::uint8_t { Element, Text };

struct Rule {
    NameId name{};
    RuleKind kind = RuleKind::Text;
    Label label;              // Element rules only
    ContentRegex content;     // Element rules only

    bool is_text() const noexcept { return kind == RuleKind::Text; }
    bool is_element() const noexcept { return kind == RuleKind::Element; }
    bool operator==(const Rule&) const = default;
};

using RuleSet = std::set<RuleId>;

/// Attribute declaration imported from a DTD; metadata only.
struct AttributeDecl {
    std::string name;
    std::string type;
    std::string default_decl;

    bool operator==(const AttributeDecl&) const = default;
};

class GrammarBuilder;

class Grammar {
public:
    std::size_t name_count() const noexcept { return names_.size(); }
    const std::string& name(NameId n) const { return names_[index(n)]; }

    std::optional<NameId> find_name(std::string_view s) const
    {
        auto it = name_ids_.find(std::string(s));
        if (it == name_ids_.end())
            return std::nullopt;
        return it->second;
    }

    std::size_t rule_count() const noexcept { return rules_.size(); }
    const Rule& rule(RuleId r) const { return rules_[index(r)]; }
    std::span<const Rule> rules() const noexcept { return rules_; }

    std::span<const NameId> start() const noexcept { return start_; }
    bool is_start(NameId n) const { return std::find(start_.begin(), start_.end(), n) != start_.end(); }
    const RuleSet& start_rules() const noexcept { return start_rules_; }

    std::span<const RuleId> rules_of(NameId n) const { return rules_of_[index(n)]; }
    std::optional<RuleId> text_rule_of(NameId n) const
    {
        for (RuleId r : rules_of(n))
            if (rule(r).is_text())
                return r;
        return std::nullopt;
    }

    /// Distinct names occurring in an element rule's content.
    std::span<const NameId> content_names(RuleId r) const { return content_names_[index(r)]; }
    /// Rules that can generate a child of a node generated by `r`.
    std::span<const RuleId> child_rules(RuleId r) const { return children_[index(r)]; }
    /// Element rules that can generate the parent of a node generated by `r`
    /// (ignoring reachability from the start names).
    std::span<const RuleId> parent_rules(RuleId r) const { return parents_[index(r)]; }
    /// Whether some text-capable name occurs in the content of `r`.
    bool admits_text(RuleId r) const { return admits_text_[index(r)]; }

    const ContentAutomaton& automaton(RuleId r) const { return automata_[index(r)]; }

    /// Rules reachable from the start names through content models.
    const RuleSet& reachable_from_start() const noexcept { return reachable_; }

    RuleSet all_rules() const
    {
        RuleSet out;
        for (std::uint32_t i = 0; i < rules_.size(); ++i)
            out.insert(RuleId{i});
        return out;
    }

    /// Attribute declarations per tag (DTD import metadata).
    const std::map<std::string, std::vector<AttributeDecl>>& attributes() const noexcept { return attributes_; }

private:
    friend class GrammarBuilder;

    std::vector<std::string> names_;
    std::unordered_map<std::string, NameId> name_ids_;
    std::vector<Rule> rules_;
    std::vector<NameId> start_;
    std::map<std::string, std::vector<AttributeDecl>> attributes_;

    RuleSet start_rules_;
    RuleSet reachable_;
    std::vector<std::vector<RuleId>> rules_of_;
    std::vector<std::vector<NameId>> content_names_;
    std::vector<std::vector<RuleId>> children_;
    std::vector<std::vector<RuleId>> parents_;
    std::vector<bool> admits_text_;
    std::vector<ContentAutomaton> automata_;
};

class GrammarBuilder {
public:
    /// Returns the id of `name`, creating it on first use.
    NameId name(std::string_view s)
    {
        std::string key(s);
        if (key.empty())
            throw GrammarError("empty grammar name");
        auto it = g_.name_ids_.find(key);
        if (it != g_.name_ids_.end())
            return it->second;
        NameId id{static_cast<std::uint32_t>(g_.names_.size())};
        g_.names_.push_back(key);
        g_.name_ids_.emplace(std::move(key), id);
        return id;
    }

    bool has_name(std::string_view s) const { return g_.name_ids_.count(std::string(s)) != 0; }

    void add_start(NameId n)
    {
        if (std::find(g_.start_.begin(), g_.start_.end(), n) == g_.start_.end())
            g_.start_.push_back(n);
    }

    RuleId add_element(NameId n, Label label, ContentRegex content)
    {
        return add(Rule{n, RuleKind::Element, std::move(label), std::move(content)});
    }

    RuleId add_text(NameId n) { return add(Rule{n, RuleKind::Text, {}, ContentRegex::epsilon()}); }

    void add_attribute(const std::string& tag, AttributeDecl decl) { g_.attributes_[tag].push_back(std::move(decl)); }

    /// Checks the grammar invariants and computes the derived tables.
    Grammar build() &&
    {
        Grammar& g = g_;
        if (g.start_.empty())
            throw GrammarError("grammar has no start name");
        const std::size_t nn = g.names_.size();
        const std::size_t nr = g.rules_.size();
        g.rules_of_.assign(nn, {});
        for (std::uint32_t i = 0; i < nr; ++i)
            g.rules_of_[index(g.rules_[i].name)].push_back(RuleId{i});

        std::vector<std::string> missing;
        for (NameId s : g.start_)
            if (g.rules_of_[index(s)].empty())
                missing.push_back(g.names_[index(s)]);
        g.content_names_.assign(nr, {});
        for (std::uint32_t i = 0; i < nr; ++i) {
            const Rule& r = g.rules_[i];
            if (!r.is_element())
                continue;
            g.content_names_[i] = r.content.names();
            for (NameId n : g.content_names_[i])
                if (g.rules_of_[index(n)].empty())
                    missing.push_back(g.names_[index(n)]);
        }
        if (!missing.empty()) {
            std::sort(missing.begin(), missing.end());
            missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
            std::string list;
            for (const auto& m : missing)
                list += (list.empty() ? "" : ", ") + m;
            throw GrammarError("names without rules: " + list);
        }

        g.children_.assign(nr, {});
        g.parents_.assign(nr, {});
        g.admits_text_.assign(nr, false);
        g.automata_.clear();
        g.automata_.reserve(nr);
        for (std::uint32_t i = 0; i < nr; ++i) {
            const Rule& r = g.rules_[i];
            g.automata_.emplace_back(r.is_element() ? r.content : ContentRegex::epsilon());
            if (!r.is_element())
                continue;
            for (NameId n : g.content_names_[i]) {
                for (RuleId c : g.rules_of_[index(n)]) {
                    g.children_[i].push_back(c);
                    g.parents_[index(c)].push_back(RuleId{i});
                    if (g.rules_[index(c)].is_text())
                        g.admits_text_[i] = true;
                }
            }
        }
        for (auto& v : g.children_) {
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end()), v.end());
        }
        for (auto& v : g.parents_) {
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end()), v.end());
        }

        for (NameId s : g.start_)
            for (RuleId r : g.rules_of_[index(s)])
                g.start_rules_.insert(r);
        std::vector<RuleId> work(g.start_rules_.begin(), g.start_rules_.end());
        g.reachable_ = g.start_rules_;
        while (!work.empty()) {
            RuleId r = work.back();
            work.pop_back();
            for (RuleId c : g.children_[index(r)])
                if (g.reachable_.insert(c).second)
                    work.push_back(c);
        }
        return std::move(g_);
    }

private:
    RuleId add(Rule rule)
    {
        for (std::uint32_t i = 0; i < g_.rules_.size(); ++i)
            if (g_.rules_[i] == rule)
                return RuleId{i};
        g_.rules_.push_back(std::move(rule));
        return RuleId{static_cast<std::uint32_t>(g_.rules_.size() - 1)};
    }

    Grammar g_;
};

/// The grammar of all XML trees: ({X}, {X -> String, X -> _[X*]}).
inline Grammar any_grammar()
{
    GrammarBuilder b;
    NameId x = b.name("X");
    b.add_text(x);
    b.add_element(x, Label::wildcard(), ContentRegex::star(ContentRegex::atom(x)));
    b.add_start(x);
    return std::move(b).build();
}

/// Least fixpoint: `from`, plus every rule of a name occurring in the
/// content of a reachable element rule.
inline RuleSet reachable_rules(const Grammar& g, const RuleSet& from)
{
    RuleSet out = from;
    std::vector<RuleId> work(from.begin(), from.end());
    while (!work.empty()) {
        RuleId r = work.back();
        work.pop_back();
        for (RuleId c : g.child_rules(r))
            if (out.insert(c).second)
                work.push_back(c);
    }
    return out;
}

namespace detail {

// True when, among `names`, every tag resolves to at most one name with a
// single element rule, and at most one name is text-capable.
inline bool resolves_uniquely(const Grammar& g, std::span<const NameId> names)
{
    std::map<std::string, NameId> by_tag;
    std::optional<NameId> wildcard;
    std::size_t element_names = 0;
    std::size_t text_names = 0;
    for (NameId n : names) {
        std::size_t element_rules = 0;
        for (RuleId r : g.rules_of(n)) {
            const Rule& rule = g.rule(r);
            if (rule.is_text()) {
                ++text_names;
                continue;
            }
            ++element_rules;
            if (rule.label.is_wildcard()) {
                wildcard = n;
            } else {
                auto [it, fresh] = by_tag.emplace(rule.label.tag_name(), n);
                if (!fresh && it->second != n)
                    return false;
            }
        }
        if (element_rules > 1)
            return false;
        element_names += element_rules;
    }
    if (wildcard && element_names > 1)
        return false;
    return text_names <= 1;
}

}  // namespace detail

/// Whether names can be assigned top-down from tags alone, which is what the
/// one-pass streaming pruner needs.
inline bool is_streamable(const Grammar& g)
{
    if (!detail::resolves_uniquely(g, g.start()))
        return false;
    for (std::uint32_t i = 0; i < g.rule_count(); ++i) {
        RuleId r{i};
        if (g.rule(r).is_element() && !detail::resolves_uniquely(g, g.content_names(r)))
            return false;
    }
    return true;
}

}  // namespace xproj
