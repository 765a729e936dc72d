#pragma once

// In-memory XML tree. Nodes are stored in pre-order, so a node's
// descendants occupy the contiguous id range (id, end).

#include <cstdint>
#include <istream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "xproj/xml.hpp"

namespace xproj {

using NodeId = std::uint32_t;
inline constexpr NodeId no_node = ~NodeId{0};

enum class NodeKind : std::uint8_t { Document, Element, Text, Comment, ProcessingInstruction };

struct Node {
    NodeKind kind = NodeKind::Document;
    NodeId parent = no_node;
    NodeId end = 0;            // one past the last descendant
    std::string name;          // tag, or PI target
    std::string value;         // text, comment or PI data
    std::vector<xml::Attribute> attributes;
    std::vector<NodeId> children;
};

class Document {
public:
    Document() { nodes_.push_back(Node{NodeKind::Document, no_node, 1, {}, {}, {}, {}}); }

    static constexpr NodeId root() noexcept { return 0; }

    const Node& operator[](NodeId id) const { return nodes_[id]; }
    std::size_t size() const noexcept { return nodes_.size(); }
    std::span<const Node> nodes() const noexcept { return nodes_; }

    /// The single element child of the document node, or no_node for an
    /// empty document (what pruning with an empty projector yields).
    NodeId root_element() const
    {
        for (NodeId c : nodes_[0].children)
            if (nodes_[c].kind == NodeKind::Element)
                return c;
        return no_node;
    }

    std::size_t element_count() const
    {
        std::size_t n = 0;
        for (const auto& node : nodes_)
            n += node.kind == NodeKind::Element;
        return n;
    }

    /// Element nesting depth of the deepest element (root element is 1).
    std::size_t depth() const
    {
        std::vector<std::size_t> d(nodes_.size(), 0);
        std::size_t best = 0;
        for (NodeId i = 1; i < nodes_.size(); ++i) {
            d[i] = d[nodes_[i].parent] + (nodes_[i].kind == NodeKind::Element ? 1 : 0);
            best = std::max(best, d[i]);
        }
        return best;
    }

    /// Concatenated descendant text (the XPath string-value).
    std::string string_value(NodeId id) const
    {
        const Node& n = nodes_[id];
        if (n.kind == NodeKind::Text || n.kind == NodeKind::Comment || n.kind == NodeKind::ProcessingInstruction)
            return n.value;
        std::string out;
        for (NodeId i = id + 1; i < n.end; ++i)
            if (nodes_[i].kind == NodeKind::Text)
                out += nodes_[i].value;
        return out;
    }

    /// "/doc/a[2]/text()" style location of a node, for diagnostics.
    std::string path(NodeId id) const
    {
        if (id == root())
            return "/";
        std::vector<std::string> parts;
        for (NodeId cur = id; cur != root(); cur = nodes_[cur].parent) {
            const Node& n = nodes_[cur];
            std::string step;
            switch (n.kind) {
            case NodeKind::Element: step = n.name; break;
            case NodeKind::Text: step = "text()"; break;
            case NodeKind::Comment: step = "comment()"; break;
            default: step = "processing-instruction()"; break;
            }
            std::size_t index = 0, same = 0;
            for (NodeId s : nodes_[n.parent].children) {
                const Node& sib = nodes_[s];
                if (sib.kind == n.kind && sib.name == n.name) {
                    ++same;
                    if (s == cur)
                        index = same;
                }
            }
            if (same > 1)
                step += "[" + std::to_string(index) + "]";
            parts.push_back(std::move(step));
        }
        std::string out;
        for (auto it = parts.rbegin(); it != parts.rend(); ++it)
            out += "/" + *it;
        return out;
    }

private:
    friend class DocumentBuilder;
    std::vector<Node> nodes_;
};

/// SAX handler assembling a Document. Adjacent text events are merged into
/// one text node unless `merge_text` is false (pruned output keeps the node
/// boundaries of its source).
class DocumentBuilder {
public:
    explicit DocumentBuilder(bool merge_text = true) : merge_text_(merge_text) { open_.push_back(Document::root()); }

    void start_element(std::string_view tag, std::span<const xml::Attribute> attrs)
    {
        NodeId id = add(NodeKind::Element);
        Node& n = doc_.nodes_[id];
        n.name.assign(tag);
        n.attributes.assign(attrs.begin(), attrs.end());
        open_.push_back(id);
    }

    void end_element(std::string_view)
    {
        NodeId id = open_.back();
        open_.pop_back();
        doc_.nodes_[id].end = static_cast<NodeId>(doc_.nodes_.size());
        last_text_ = no_node;
    }

    void text(std::string_view s)
    {
        if (merge_text_ && last_text_ != no_node && doc_.nodes_[open_.back()].children.back() == last_text_) {
            doc_.nodes_[last_text_].value.append(s);
            return;
        }
        NodeId id = add(NodeKind::Text);
        doc_.nodes_[id].value.assign(s);
        doc_.nodes_[id].end = id + 1;
        last_text_ = id;
    }

    void comment(std::string_view s)
    {
        if (open_.size() == 1)
            return;  // only content inside the root element is kept
        NodeId id = add(NodeKind::Comment);
        doc_.nodes_[id].value.assign(s);
        doc_.nodes_[id].end = id + 1;
    }

    void processing_instruction(std::string_view target, std::string_view data)
    {
        if (open_.size() == 1)
            return;
        NodeId id = add(NodeKind::ProcessingInstruction);
        doc_.nodes_[id].name.assign(target);
        doc_.nodes_[id].value.assign(data);
        doc_.nodes_[id].end = id + 1;
    }

    Document finish()
    {
        doc_.nodes_[0].end = static_cast<NodeId>(doc_.nodes_.size());
        return std::move(doc_);
    }

private:
    NodeId add(NodeKind kind)
    {
        auto id = static_cast<NodeId>(doc_.nodes_.size());
        Node n;
        n.kind = kind;
        n.parent = open_.back();
        doc_.nodes_.push_back(std::move(n));
        doc_.nodes_[open_.back()].children.push_back(id);
        if (kind != NodeKind::Text)
            last_text_ = no_node;
        return id;
    }

    Document doc_;
    std::vector<NodeId> open_;
    NodeId last_text_ = no_node;
    bool merge_text_;
};

inline Document parse_document(std::istream& in)
{
    DocumentBuilder b;
    xml::parse(in, b);
    return b.finish();
}

inline Document parse_document(std::string_view text)
{
    DocumentBuilder b;
    xml::parse(text, b);
    return b.finish();
}

/// Replays the subtree of `id` (or the whole document) as SAX events.
/// `on_node(NodeId)` is invoked right before each node's event is emitted.
template <xml::SaxHandler Handler, class OnNode>
void replay(const Document& doc, NodeId id, Handler& h, OnNode&& on_node)
{
    const Node& n = doc[id];
    switch (n.kind) {
    case NodeKind::Document:
        for (NodeId c : n.children)
            replay(doc, c, h, on_node);
        return;
    case NodeKind::Element:
        on_node(id);
        h.start_element(n.name, n.attributes);
        for (NodeId c : n.children)
            replay(doc, c, h, on_node);
        h.end_element(n.name);
        return;
    case NodeKind::Text:
        on_node(id);
        h.text(n.value);
        return;
    case NodeKind::Comment:
        on_node(id);
        h.comment(n.value);
        return;
    case NodeKind::ProcessingInstruction:
        on_node(id);
        h.processing_instruction(n.name, n.value);
        return;
    }
}

template <xml::SaxHandler Handler>
void replay(const Document& doc, Handler& h)
{
    replay(doc, Document::root(), h, [](NodeId) {});
}

inline std::string serialize(const Document& doc, NodeId id = Document::root())
{
    std::ostringstream out;
    {
        xml::Writer w(out);
        replay(doc, id, w, [](NodeId) {});
    }
    return out.str();
}

}  // namespace xproj
