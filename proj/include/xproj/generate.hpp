#pragma once

// Grammar-driven document synthesis: seeded random derivations,
// bounded-exhaustive enumeration for tiny grammars, and the flat synthetic
// benchmark document.

#include <cstdint>
#include <limits>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "xproj/document.hpp"
#include "xproj/grammar.hpp"
#include "xproj/xml.hpp"

namespace xproj {

struct GenConfig {
    std::uint64_t seed = 0;
    std::size_t max_star_repeat = 3;
    std::size_t max_depth = 12;  // element levels; a text node counts as one level
    std::vector<std::string> text_alphabet{"x", "y", "lorem ipsum", "42"};
    /// Soft cap on generated nodes; once reached every choice takes the
    /// shortest derivation. Zero means no cap.
    std::size_t max_nodes = 0;
    /// Tags used for wildcard labels.
    std::vector<std::string> wildcard_tags{"a", "b", "c"};
};

class GenerationError : public Error {
public:
    using Error::Error;
};

namespace detail {

inline constexpr std::size_t unbounded = std::numeric_limits<std::size_t>::max() / 4;

/// Least height of a tree derivable from each rule and name.
class MinHeights {
public:
    explicit MinHeights(const Grammar& g) : g_(g), rule_(g.rule_count(), unbounded), name_(g.name_count(), unbounded)
    {
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::uint32_t i = 0; i < g.rule_count(); ++i) {
                const Rule& r = g.rule(RuleId{i});
                std::size_t h = r.is_text() ? 1 : add1(of(r.content));
                if (h < rule_[i]) {
                    rule_[i] = h;
                    changed = true;
                }
                if (h < name_[index(r.name)])
                    name_[index(r.name)] = h;
            }
        }
    }

    std::size_t rule(RuleId r) const { return rule_[index(r)]; }
    std::size_t name(NameId n) const { return name_[index(n)]; }

    /// Least height of the forest spelled by a word of `r` (0 for epsilon).
    std::size_t of(const ContentRegex& r) const
    {
        using K = ContentRegex::Kind;
        switch (r.kind()) {
        case K::Empty: return unbounded;
        case K::Epsilon:
        case K::Star:
        case K::Opt: return 0;
        case K::Atom: return name_[index(r.name())];
        case K::Plus: return of(r.body());
        case K::Seq: {
            std::size_t h = 0;
            for (const auto& it : r.items())
                h = std::max(h, of(it));
            return h;
        }
        case K::Alt: {
            std::size_t h = unbounded;
            for (const auto& it : r.items())
                h = std::min(h, of(it));
            return h;
        }
        }
        return unbounded;
    }

private:
    static std::size_t add1(std::size_t h) { return h >= unbounded ? unbounded : h + 1; }

    const Grammar& g_;
    std::vector<std::size_t> rule_;
    std::vector<std::size_t> name_;
};

template <xml::SaxHandler Sink>
class Generator {
public:
    Generator(const Grammar& g, const GenConfig& cfg, Sink& sink)
        : g_(g), cfg_(cfg), sink_(sink), heights_(g), rng_(cfg.seed)
    {
        if (cfg.max_depth < 1)
            throw GenerationError("max_depth must be at least 1");
        if (cfg.text_alphabet.empty() || cfg.wildcard_tags.empty())
            throw GenerationError("text alphabet and wildcard tags must not be empty");
    }

    void run()
    {
        std::vector<RuleId> roots;
        std::size_t best = unbounded;
        for (RuleId r : g_.start_rules()) {
            if (!g_.rule(r).is_element())
                continue;
            best = std::min(best, heights_.rule(r));
            if (heights_.rule(r) <= cfg_.max_depth)
                roots.push_back(r);
        }
        if (roots.empty())
            throw GenerationError(blocking_report(best));
        element(pick(roots), cfg_.max_depth);
    }

private:
    std::string blocking_report(std::size_t best) const
    {
        std::string names;
        for (std::uint32_t i = 0; i < g_.name_count(); ++i)
            if (heights_.name(NameId{i}) >= unbounded)
                names += (names.empty() ? "" : ", ") + g_.name(NameId{i});
        if (best >= unbounded)
            return "no finite derivation; blocking names: " + names;
        return "no derivation within depth " + std::to_string(cfg_.max_depth) + " (needs " + std::to_string(best) +
               ")";
    }

    std::size_t uniform(std::size_t n) { return n <= 1 ? 0 : static_cast<std::size_t>(rng_() % n); }

    template <class T>
    const T& pick(const std::vector<T>& v)
    {
        return v[uniform(v.size())];
    }

    bool shortest() const { return cfg_.max_nodes && nodes_ >= cfg_.max_nodes; }

    void rule(RuleId r, std::size_t budget)
    {
        if (g_.rule(r).is_text()) {
            ++nodes_;
            sink_.text(pick(cfg_.text_alphabet));
        } else {
            element(r, budget);
        }
    }

    void element(RuleId r, std::size_t budget)
    {
        const Rule& rule = g_.rule(r);
        std::string tag = rule.label.is_wildcard() ? pick(cfg_.wildcard_tags) : rule.label.tag_name();
        attrs_.clear();
        auto it = g_.attributes().find(tag);
        if (it != g_.attributes().end()) {
            for (const auto& decl : it->second) {
                bool required = decl.default_decl.rfind("#REQUIRED", 0) == 0;
                if (required || uniform(2))
                    attrs_.push_back({decl.name, pick(cfg_.text_alphabet)});
            }
        }
        ++nodes_;
        sink_.start_element(tag, attrs_);
        content(rule.content, budget - 1);
        sink_.end_element(tag);
    }

    void content(const ContentRegex& r, std::size_t budget)
    {
        using K = ContentRegex::Kind;
        switch (r.kind()) {
        case K::Empty:
        case K::Epsilon: return;
        case K::Atom: {
            std::vector<RuleId> fit;
            RuleId lowest{};
            std::size_t low = unbounded;
            for (RuleId c : g_.rules_of(r.name())) {
                std::size_t h = heights_.rule(c);
                if (h <= budget)
                    fit.push_back(c);
                if (h < low) {
                    low = h;
                    lowest = c;
                }
            }
            rule(shortest() || fit.empty() ? lowest : pick(fit), budget);
            return;
        }
        case K::Seq:
            for (const auto& it : r.items())
                content(it, budget);
            return;
        case K::Alt: {
            std::vector<const ContentRegex*> fit;
            const ContentRegex* lowest = nullptr;
            std::size_t low = unbounded + 1;
            for (const auto& it : r.items()) {
                std::size_t h = heights_.of(it);
                if (h <= budget)
                    fit.push_back(&it);
                if (h < low) {
                    low = h;
                    lowest = &it;
                }
            }
            content(shortest() || fit.empty() ? *lowest : *pick(fit), budget);
            return;
        }
        case K::Star:
        case K::Plus:
        case K::Opt: {
            bool fits = heights_.of(r.body()) <= budget;
            std::size_t n;
            if (r.kind() == K::Plus)
                n = shortest() || !fits ? 1 : 1 + uniform(std::max<std::size_t>(cfg_.max_star_repeat, 1));
            else if (shortest() || !fits)
                n = 0;
            else
                n = uniform((r.kind() == K::Star ? cfg_.max_star_repeat : 1) + 1);
            for (std::size_t i = 0; i < n; ++i)
                content(r.body(), budget);
            return;
        }
        }
    }

    const Grammar& g_;
    const GenConfig& cfg_;
    Sink& sink_;
    MinHeights heights_;
    std::mt19937_64 rng_;
    std::vector<xml::Attribute> attrs_;
    std::size_t nodes_ = 0;
};

}  // namespace detail

/// Emits the events of one random document of `g`, deterministic per
/// (grammar, config).
template <xml::SaxHandler Sink>
void generate_events(const Grammar& g, const GenConfig& cfg, Sink& sink)
{
    detail::Generator<Sink>(g, cfg, sink).run();
}

inline Document generate_document(const Grammar& g, const GenConfig& cfg)
{
    DocumentBuilder b;
    generate_events(g, cfg, b);
    return b.finish();
}

namespace detail {

struct EnumTree {
    RuleId rule{};
    std::vector<EnumTree> children;
};

// All trees of an exact size for each rule, smallest first; adjacent text
// siblings are excluded since they cannot be told apart once parsed.
class Enumerator {
public:
    Enumerator(const Grammar& g, std::size_t cap) : g_(g), cap_(cap) {}

    const std::vector<EnumTree>& trees(RuleId r, std::size_t size)
    {
        auto key = std::make_pair(index(r), size);
        if (auto it = memo_.find(key); it != memo_.end())
            return it->second;
        std::vector<EnumTree> out;
        const Rule& rule = g_.rule(r);
        if (rule.is_text()) {
            if (size == 1)
                out.push_back(EnumTree{r, {}});
        } else if (size >= 1) {
            std::vector<EnumTree> word;
            forests(r, g_.automaton(r).start(), size - 1, false, word, out);
        }
        return memo_.emplace(key, std::move(out)).first->second;
    }

private:
    void forests(RuleId r, ContentAutomaton::State s, std::size_t left, bool after_text, std::vector<EnumTree>& word,
                 std::vector<EnumTree>& out)
    {
        if (out.size() >= cap_)
            return;
        const ContentAutomaton& a = g_.automaton(r);
        if (left == 0) {
            if (a.is_accepting(s))
                out.push_back(EnumTree{r, word});
            return;
        }
        for (const auto& [name, next] : a.edges(s)) {
            for (RuleId c : g_.rules_of(name)) {
                bool text = g_.rule(c).is_text();
                if (text && after_text)
                    continue;
                for (std::size_t k = 1; k <= left; ++k) {
                    const auto& sub = trees(c, k);
                    for (const auto& t : sub) {
                        word.push_back(t);
                        forests(r, next, left - k, text, word, out);
                        word.pop_back();
                        if (out.size() >= cap_)
                            return;
                    }
                }
            }
        }
    }

    const Grammar& g_;
    std::size_t cap_;
    std::map<std::pair<std::uint32_t, std::size_t>, std::vector<EnumTree>> memo_;
};

template <xml::SaxHandler Sink>
void emit_tree(const Grammar& g, const EnumTree& t, const GenConfig& cfg, Sink& sink)
{
    const Rule& r = g.rule(t.rule);
    if (r.is_text()) {
        sink.text(cfg.text_alphabet.front());
        return;
    }
    std::string tag = r.label.is_wildcard() ? cfg.wildcard_tags.front() : r.label.tag_name();
    sink.start_element(tag, {});
    for (const auto& c : t.children)
        emit_tree(g, c, cfg, sink);
    sink.end_element(tag);
}

}  // namespace detail

/// Up to `count` distinct documents of `g` in order of increasing node
/// count (at most `max_size` nodes each), every text node holding the first
/// alphabet entry and every wildcard label the first wildcard tag.
inline std::vector<Document> enumerate_documents(const Grammar& g, std::size_t count, std::size_t max_size,
                                                 const GenConfig& cfg = {})
{
    std::vector<Document> out;
    detail::Enumerator en(g, count);
    for (std::size_t size = 1; size <= max_size && out.size() < count; ++size) {
        for (RuleId r : g.start_rules()) {
            if (!g.rule(r).is_element())
                continue;
            for (const auto& t : en.trees(r, size)) {
                if (out.size() >= count)
                    break;
                DocumentBuilder b;
                detail::emit_tree(g, t, cfg, b);
                out.push_back(b.finish());
            }
        }
    }
    return out;
}

/// DTD of the synthetic benchmark document: seven nested levels and two
/// leaf element families.
inline const char* synthetic_dtd()
{
    return "<!ELEMENT l1 (l2*)>\n"
           "<!ELEMENT l2 (l3*)>\n"
           "<!ELEMENT l3 (l4*)>\n"
           "<!ELEMENT l4 (l5*)>\n"
           "<!ELEMENT l5 (l6*)>\n"
           "<!ELEMENT l6 (l7*)>\n"
           "<!ELEMENT l7 (leaf|info)*>\n"
           "<!ELEMENT leaf (#PCDATA)>\n"
           "<!ELEMENT info (#PCDATA)>\n"
           "<!ATTLIST leaf id CDATA #IMPLIED>\n";
}

/// Writes a synthetic document of at least `bytes` bytes whose element
/// depth is exactly 8, growing in width only. Returns the bytes written.
inline std::uint64_t write_synthetic(std::ostream& out, std::uint64_t bytes)
{
    xml::Writer w(out);
    std::vector<xml::Attribute> none;
    std::vector<xml::Attribute> id(1);
    id[0].name = "id";
    w.start_element("l1", none);
    std::uint64_t n = 0;
    do {
        w.start_element("l2", none);
        w.start_element("l3", none);
        w.start_element("l4", none);
        w.start_element("l5", none);
        for (int i = 0; i < 2; ++i) {
            w.start_element("l6", none);
            w.start_element("l7", none);
            for (int j = 0; j < 4; ++j) {
                id[0].value = std::to_string(n++);
                w.start_element("leaf", id);
                w.text("leaf value " + id[0].value);
                w.end_element("leaf");
                w.start_element("info", none);
                w.text("some descriptive text that the selective query does not need");
                w.end_element("info");
            }
            w.end_element("l7");
            w.end_element("l6");
        }
        w.end_element("l5");
        w.end_element("l4");
        w.end_element("l3");
        w.end_element("l2");
    } while (w.bytes_written() + 5 < bytes);
    w.end_element("l1");
    w.flush();
    return w.bytes_written();
}

}  // namespace xproj
