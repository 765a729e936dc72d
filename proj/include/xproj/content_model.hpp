#pragma once

// Regular expressions over grammar names and their deterministic automata.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <utility>
#include <vector>

namespace xproj {

enum class NameId : std::uint32_t {};
enum class RuleId : std::uint32_t {};

constexpr std::uint32_t index(NameId n) noexcept { return static_cast<std::uint32_t>(n); }
constexpr std::uint32_t index(RuleId r) noexcept { return static_cast<std::uint32_t>(r); }

/// Content model of an element production. Seq and Alt are n-ary and kept
/// flat: a Seq never has a Seq operand and an Alt never has an Alt operand.
class ContentRegex {
public:
    enum class Kind : std::uint8_t { Empty, Epsilon, Atom, Seq, Alt, Star, Plus, Opt };

    ContentRegex() = default;

    static ContentRegex empty() { return ContentRegex(Kind::Empty); }
    static ContentRegex epsilon() { return ContentRegex(Kind::Epsilon); }

    static ContentRegex atom(NameId n)
    {
        ContentRegex r(Kind::Atom);
        r.atom_ = n;
        return r;
    }

    static ContentRegex seq(std::vector<ContentRegex> items) { return nary(Kind::Seq, std::move(items)); }
    static ContentRegex alt(std::vector<ContentRegex> items) { return nary(Kind::Alt, std::move(items)); }
    static ContentRegex star(ContentRegex r) { return unary(Kind::Star, std::move(r)); }
    static ContentRegex plus(ContentRegex r) { return unary(Kind::Plus, std::move(r)); }
    static ContentRegex opt(ContentRegex r) { return unary(Kind::Opt, std::move(r)); }

    Kind kind() const noexcept { return kind_; }
    NameId name() const noexcept { return atom_; }
    std::span<const ContentRegex> items() const noexcept { return items_; }
    const ContentRegex& body() const { return items_.front(); }

    bool operator==(const ContentRegex&) const = default;

    /// Distinct names occurring in the expression, ascending.
    std::vector<NameId> names() const
    {
        std::set<NameId> out;
        collect(out);
        return {out.begin(), out.end()};
    }

    bool nullable() const
    {
        switch (kind_) {
        case Kind::Empty: return false;
        case Kind::Epsilon: return true;
        case Kind::Atom: return false;
        case Kind::Seq:
            return std::all_of(items_.begin(), items_.end(), [](const auto& r) { return r.nullable(); });
        case Kind::Alt:
            return std::any_of(items_.begin(), items_.end(), [](const auto& r) { return r.nullable(); });
        case Kind::Star:
        case Kind::Opt: return true;
        case Kind::Plus: return body().nullable();
        }
        return false;
    }

private:
    explicit ContentRegex(Kind k) : kind_(k) {}

    static ContentRegex unary(Kind k, ContentRegex r)
    {
        ContentRegex out(k);
        out.items_.push_back(std::move(r));
        return out;
    }

    static ContentRegex nary(Kind k, std::vector<ContentRegex> items)
    {
        if (items.empty())
            return k == Kind::Seq ? epsilon() : empty();
        if (items.size() == 1)
            return std::move(items.front());
        ContentRegex out(k);
        for (auto& item : items) {
            if (item.kind_ == k) {
                for (auto& inner : item.items_)
                    out.items_.push_back(std::move(inner));
            } else {
                out.items_.push_back(std::move(item));
            }
        }
        return out;
    }

    void collect(std::set<NameId>& out) const
    {
        if (kind_ == Kind::Atom)
            out.insert(atom_);
        for (const auto& r : items_)
            r.collect(out);
    }

    Kind kind_ = Kind::Epsilon;
    NameId atom_{};
    std::vector<ContentRegex> items_;
};

/// Deterministic automaton over names accepting exactly the language of a
/// ContentRegex. Built with the Glushkov position construction followed by
/// subset construction.
class ContentAutomaton {
public:
    using State = std::uint32_t;
    static constexpr State reject = ~State{0};

    ContentAutomaton() : ContentAutomaton(ContentRegex::epsilon()) {}

    explicit ContentAutomaton(const ContentRegex& r)
    {
        Glushkov g;
        auto info = g.analyse(r);
        // Position 0 is the initial state.
        std::vector<std::set<std::uint32_t>> follow = std::move(g.follow);
        follow[0] = info.first;
        std::set<std::uint32_t> last = info.last;
        if (info.nullable)
            last.insert(0);

        std::map<std::vector<std::uint32_t>, State> ids;
        std::vector<std::vector<std::uint32_t>> subsets;
        auto intern = [&](std::vector<std::uint32_t> subset) {
            auto [it, fresh] = ids.emplace(subset, static_cast<State>(subsets.size()));
            if (fresh) {
                subsets.push_back(std::move(subset));
                transitions_.emplace_back();
                bool acc = std::any_of(subsets.back().begin(), subsets.back().end(),
                                       [&](std::uint32_t p) { return last.count(p) != 0; });
                accepting_.push_back(acc);
            }
            return it->second;
        };
        intern({0});
        for (State s = 0; s < subsets.size(); ++s) {
            std::map<NameId, std::set<std::uint32_t>> moves;
            for (std::uint32_t p : subsets[s])
                for (std::uint32_t q : follow[p])
                    moves[g.symbol[q]].insert(q);
            for (auto& [name, targets] : moves) {
                State t = intern({targets.begin(), targets.end()});
                transitions_[s].emplace_back(name, t);
            }
        }
    }

    State start() const noexcept { return 0; }

    State step(State s, NameId n) const
    {
        if (s == reject)
            return reject;
        const auto& row = transitions_[s];
        auto it = std::lower_bound(row.begin(), row.end(), n,
                                   [](const auto& edge, NameId key) { return edge.first < key; });
        if (it == row.end() || it->first != n)
            return reject;
        return it->second;
    }

    bool is_accepting(State s) const noexcept { return s != reject && accepting_[s]; }

    bool accepts(std::span<const NameId> word) const
    {
        State s = start();
        for (NameId n : word)
            s = step(s, n);
        return is_accepting(s);
    }

    std::size_t state_count() const noexcept { return transitions_.size(); }

    /// Outgoing (name, target) edges of a state, sorted by name.
    std::span<const std::pair<NameId, State>> edges(State s) const { return transitions_[s]; }

private:
    struct Info {
        bool nullable = false;
        std::set<std::uint32_t> first;
        std::set<std::uint32_t> last;
    };

    struct Glushkov {
        std::vector<NameId> symbol{NameId{}};
        std::vector<std::set<std::uint32_t>> follow{{}};

        Info analyse(const ContentRegex& r)
        {
            using K = ContentRegex::Kind;
            Info out;
            switch (r.kind()) {
            case K::Empty:
                break;
            case K::Epsilon:
                out.nullable = true;
                break;
            case K::Atom: {
                auto p = static_cast<std::uint32_t>(symbol.size());
                symbol.push_back(r.name());
                follow.emplace_back();
                out.first = {p};
                out.last = {p};
                break;
            }
            case K::Seq: {
                out.nullable = true;
                for (const auto& item : r.items()) {
                    Info i = analyse(item);
                    for (std::uint32_t l : out.last)
                        follow[l].insert(i.first.begin(), i.first.end());
                    if (out.nullable)
                        out.first.insert(i.first.begin(), i.first.end());
                    if (i.nullable)
                        out.last.insert(i.last.begin(), i.last.end());
                    else
                        out.last = i.last;
                    out.nullable = out.nullable && i.nullable;
                }
                break;
            }
            case K::Alt:
                for (const auto& item : r.items()) {
                    Info i = analyse(item);
                    out.nullable = out.nullable || i.nullable;
                    out.first.insert(i.first.begin(), i.first.end());
                    out.last.insert(i.last.begin(), i.last.end());
                }
                break;
            case K::Star:
            case K::Plus:
            case K::Opt: {
                out = analyse(r.body());
                if (r.kind() != K::Opt)
                    for (std::uint32_t l : out.last)
                        follow[l].insert(out.first.begin(), out.first.end());
                if (r.kind() != K::Plus)
                    out.nullable = true;
                break;
            }
            }
            return out;
        }
    };

    std::vector<std::vector<std::pair<NameId, State>>> transitions_;
    std::vector<bool> accepting_;
};

inline ContentAutomaton compile_content_model(const ContentRegex& r)
{
    return ContentAutomaton(r);
}

}  // namespace xproj
