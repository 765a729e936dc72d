#pragma once

// Applying a projector to documents. The streaming pruner needs a grammar
// whose names are determined top-down by tags; the tree pruner works for any
// grammar by validating first.

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "xproj/document.hpp"
#include "xproj/inference.hpp"
#include "xproj/validate.hpp"
#include "xproj/xml.hpp"

namespace xproj {

/// What the streaming pruner does with a tag or text the grammar cannot
/// generate at that point.
enum class InvalidPolicy : std::uint8_t { Strict, Drop };

struct PruneStats {
    std::uint64_t elements_in = 0;
    std::uint64_t elements_out = 0;
    std::uint64_t text_bytes_in = 0;
    std::uint64_t text_bytes_out = 0;
    std::uint64_t max_depth = 0;
    std::uint64_t dropped = 0;  // invalid subtrees/text removed under the drop policy

    std::string to_line() const
    {
        return "elements_in=" + std::to_string(elements_in) + " elements_out=" + std::to_string(elements_out) +
               " text_bytes_in=" + std::to_string(text_bytes_in) + " text_bytes_out=" +
               std::to_string(text_bytes_out) + " max_depth=" + std::to_string(max_depth) +
               " dropped=" + std::to_string(dropped);
    }
};

/// Per element rule: the rule generating each child tag and the text rule of
/// the content, precomputed from a streamable grammar.
class PruneTable {
public:
    struct Entry {
        std::vector<std::pair<std::string, RuleId>> tags;
        std::optional<RuleId> wildcard;
        std::optional<RuleId> text;
        bool keep_text = false;

        std::optional<RuleId> resolve(std::string_view tag) const
        {
            for (const auto& [t, r] : tags)
                if (t == tag)
                    return r;
            return wildcard;
        }
    };

    explicit PruneTable(const Projector& p)
    {
        const Grammar& g = p.grammar;
        if (!is_streamable(g))
            throw Error("grammar is not streamable: tags do not determine names top-down");
        kept_.assign(g.rule_count(), false);
        for (RuleId r : p.kept)
            kept_[index(r)] = true;
        entries_.resize(g.rule_count() + 1);
        for (std::uint32_t i = 0; i < g.rule_count(); ++i)
            if (g.rule(RuleId{i}).is_element())
                fill(entries_[i], g, g.content_names(RuleId{i}));
        fill(entries_.back(), g, g.start());
        entries_.back().text.reset();  // no text outside the root element
        entries_.back().keep_text = false;
    }

    const Entry& document() const { return entries_.back(); }
    const Entry& entry(RuleId r) const { return entries_[index(r)]; }
    bool kept(RuleId r) const { return kept_[index(r)]; }

private:
    void fill(Entry& e, const Grammar& g, std::span<const NameId> names)
    {
        for (NameId n : names) {
            for (RuleId r : g.rules_of(n)) {
                const Rule& rule = g.rule(r);
                if (rule.is_text())
                    e.text = r;
                else if (rule.label.is_wildcard())
                    e.wildcard = r;
                else
                    e.tags.emplace_back(rule.label.tag_name(), r);
            }
        }
        e.keep_text = e.text && kept_[index(*e.text)];
    }

    std::vector<Entry> entries_;
    std::vector<bool> kept_;
};

/// One-pass pruner: a SAX handler forwarding the kept events to `Sink`.
/// Holds one frame per kept open element and a counter for the depth inside
/// a pruned subtree; nothing is buffered.
template <xml::SaxHandler Sink>
class StreamPruner {
public:
    StreamPruner(const PruneTable& table, Sink& sink, InvalidPolicy policy = InvalidPolicy::Strict)
        : table_(table), sink_(sink), policy_(policy) {}

    void start_element(std::string_view tag, std::span<const xml::Attribute> attrs)
    {
        ++stats_.elements_in;
        std::uint64_t depth = open_ + skip_ + 1;
        if (depth > stats_.max_depth)
            stats_.max_depth = depth;
        if (skip_) {
            ++skip_;
            return;
        }
        const auto& entry = open_ ? table_.entry(frames_[open_ - 1].rule) : table_.document();
        auto r = entry.resolve(tag);
        if (!r) {
            invalid("no rule for <" + std::string(tag) + ">", tag);
            skip_ = 1;
            return;
        }
        if (!table_.kept(*r)) {
            skip_ = 1;
            return;
        }
        if (open_ == frames_.size())
            frames_.emplace_back();
        frames_[open_].rule = *r;
        frames_[open_].tag.assign(tag);
        ++open_;
        ++stats_.elements_out;
        sink_.start_element(tag, attrs);
    }

    void end_element(std::string_view tag)
    {
        if (skip_) {
            --skip_;
            return;
        }
        --open_;
        sink_.end_element(tag);
    }

    void text(std::string_view s)
    {
        stats_.text_bytes_in += s.size();
        if (skip_ || !open_)
            return;
        const auto& entry = table_.entry(frames_[open_ - 1].rule);
        if (entry.keep_text) {
            stats_.text_bytes_out += s.size();
            sink_.text(s);
        } else if (!entry.text && !xml::is_whitespace(s)) {
            invalid("unexpected text", {});
        }
    }

    void comment(std::string_view s)
    {
        if (!skip_ && open_)
            sink_.comment(s);
    }

    void processing_instruction(std::string_view target, std::string_view data)
    {
        if (!skip_ && open_)
            sink_.processing_instruction(target, data);
    }

    const PruneStats& stats() const noexcept { return stats_; }

private:
    struct Frame {
        RuleId rule{};
        std::string tag;
    };

    void invalid(const std::string& what, std::string_view tag)
    {
        if (policy_ == InvalidPolicy::Drop) {
            ++stats_.dropped;
            return;
        }
        std::string path;
        for (std::size_t i = 0; i < open_; ++i)
            path += "/" + frames_[i].tag;
        if (!tag.empty())
            path += "/" + std::string(tag);
        throw Error("document does not match the grammar at " + (path.empty() ? std::string("/") : path) + ": " +
                    what);
    }

    const PruneTable& table_;
    Sink& sink_;
    InvalidPolicy policy_;
    std::vector<Frame> frames_;
    std::size_t open_ = 0;
    std::uint64_t skip_ = 0;
    PruneStats stats_;
};

/// Parses `in` and writes the pruned document to `out` in one pass.
inline PruneStats prune_stream(std::istream& in, std::ostream& out, const Projector& p,
                               InvalidPolicy policy = InvalidPolicy::Strict)
{
    PruneTable table(p);
    xml::Writer w(out);
    StreamPruner pruner(table, w, policy);
    xml::parse(in, pruner);
    w.flush();
    return pruner.stats();
}

/// A pruned tree and, for each of its nodes, the node of the source
/// document it was copied from (origin[0] is the document node).
struct PrunedDocument {
    Document doc;
    std::vector<NodeId> origin;
};

namespace detail {

// Sink building the pruned tree while recording where each node came from.
class OriginTracker {
public:
    OriginTracker() : builder_(false) { origin_.push_back(Document::root()); }

    NodeId current = no_node;

    void start_element(std::string_view tag, std::span<const xml::Attribute> attrs)
    {
        origin_.push_back(current);
        builder_.start_element(tag, attrs);
    }
    void end_element(std::string_view tag) { builder_.end_element(tag); }
    void text(std::string_view s)
    {
        origin_.push_back(current);
        builder_.text(s);
    }
    void comment(std::string_view s)
    {
        origin_.push_back(current);
        builder_.comment(s);
    }
    void processing_instruction(std::string_view target, std::string_view data)
    {
        origin_.push_back(current);
        builder_.processing_instruction(target, data);
    }

    PrunedDocument finish() { return PrunedDocument{builder_.finish(), std::move(origin_)}; }

private:
    DocumentBuilder builder_;
    std::vector<NodeId> origin_;
};

}  // namespace detail

/// In-memory pruning for any grammar: validates to obtain an interpretation
/// and removes every node whose rule is not kept, with its subtree.
inline PrunedDocument prune_tree(const Document& doc, const Projector& p)
{
    Validation v = validate_tree(doc, p.grammar);
    if (!v)
        throw Error("document is not valid at " + v.path + ": " + v.reason);
    const Interpretation& in = *v.interpretation;
    detail::OriginTracker out;
    std::vector<bool> keep(doc.size(), false);
    keep[Document::root()] = true;
    std::vector<NodeId> open;
    auto emit_close = [&](NodeId upto) {
        while (!open.empty() && doc[open.back()].end <= upto) {
            out.end_element(doc[open.back()].name);
            open.pop_back();
        }
    };
    for (NodeId id = 1; id < doc.size(); ++id) {
        const Node& n = doc[id];
        emit_close(id);
        bool parent_kept = keep[n.parent];
        bool under_element = n.parent != Document::root();
        switch (n.kind) {
        case NodeKind::Element:
        case NodeKind::Text: {
            auto r = in[id];
            keep[id] = parent_kept && r && p.keeps(*r);
            break;
        }
        default:
            keep[id] = parent_kept && under_element;
            break;
        }
        if (!keep[id])
            continue;
        out.current = id;
        switch (n.kind) {
        case NodeKind::Element:
            out.start_element(n.name, n.attributes);
            open.push_back(id);
            break;
        case NodeKind::Text: out.text(n.value); break;
        case NodeKind::Comment: out.comment(n.value); break;
        case NodeKind::ProcessingInstruction: out.processing_instruction(n.name, n.value); break;
        case NodeKind::Document: break;
        }
    }
    emit_close(static_cast<NodeId>(doc.size()));
    return out.finish();
}

/// Prunes an in-memory document, streaming when the grammar allows it.
inline PrunedDocument prune_document(const Document& doc, const Projector& p)
{
    if (!is_streamable(p.grammar))
        return prune_tree(doc, p);
    PruneTable table(p);
    detail::OriginTracker out;
    StreamPruner pruner(table, out, InvalidPolicy::Strict);
    replay(doc, Document::root(), pruner, [&](NodeId id) { out.current = id; });
    return out.finish();
}

}  // namespace xproj
