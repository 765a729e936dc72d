#pragma once

// End-to-end checks: pruning must not change query results (soundness), and
// no kept rule should be droppable without changing them (minimality).

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "xproj/approximate.hpp"
#include "xproj/eval.hpp"
#include "xproj/generate.hpp"
#include "xproj/inference.hpp"
#include "xproj/pruner.hpp"

namespace xproj {

namespace detail {

inline std::string node_image(const Document& d, NodeRef n)
{
    if (n.is_attribute())
        return d[n.node].attributes[static_cast<std::size_t>(n.attr)].name + "=" + string_value(d, n);
    return serialize(d, n.node);
}

// Compares node-sets by mapped identity, then the serialization of every
// result subtree. Returns a description of the first difference.
inline std::optional<std::string> compare_refs(const Document& d, const RefSet& a, const PrunedDocument& p,
                                               const RefSet& b)
{
    RefSet mapped;
    mapped.reserve(b.size());
    for (NodeRef n : b)
        mapped.push_back({p.origin[n.node], n.attr});
    if (mapped != a) {
        return "result sets differ: " + std::to_string(a.size()) + " node(s) on the original, " +
               std::to_string(b.size()) + " on the pruned document";
    }
    for (std::size_t i = 0; i < a.size(); ++i)
        if (node_image(d, a[i]) != node_image(p.doc, b[i]))
            return "content of result " + d.path(a[i].node) + " differs after pruning";
    return std::nullopt;
}

inline std::optional<std::string> compare_values(const Document& d, const Value& a, const PrunedDocument& p,
                                                 const Value& b)
{
    if (a.index() != b.index())
        return std::string("result types differ");
    switch (a.index()) {
    case 0: return compare_refs(d, std::get<RefSet>(a), p, std::get<RefSet>(b));
    case 1:
        if (std::get<bool>(a) != std::get<bool>(b))
            return std::string("boolean results differ");
        return std::nullopt;
    case 2: {
        double x = std::get<double>(a), y = std::get<double>(b);
        if (x != y && !(std::isnan(x) && std::isnan(y)))
            return "numeric results differ: " + xpath_functions::number_to_string(x) + " vs " +
                   xpath_functions::number_to_string(y);
        return std::nullopt;
    }
    default:
        if (std::get<std::string>(a) != std::get<std::string>(b))
            return "string results differ: '" + std::get<std::string>(a) + "' vs '" + std::get<std::string>(b) + "'";
        return std::nullopt;
    }
}

inline RefSet to_refs(const NodeSet& s)
{
    RefSet out;
    out.reserve(s.size());
    for (NodeId n : s)
        out.push_back({n, -1});
    return out;
}

inline std::string dump_counterexample(const Document& d, std::uint64_t seed)
{
    auto path = std::filesystem::temp_directory_path() / ("xproj-counterexample-" + std::to_string(seed) + ".xml");
    std::ofstream out(path, std::ios::binary);
    out << serialize(d) << '\n';
    return path.string();
}

}  // namespace detail

struct SoundnessReport {
    bool pass = true;
    std::size_t documents = 0;
    std::uint64_t bytes_in = 0;   // serialized size of the generated documents
    std::uint64_t bytes_out = 0;  // ... and of their pruned versions
    // First failure only.
    std::uint64_t seed = 0;
    std::string query;
    std::string document_path;
    std::string reason;

    /// `PASS n=…` or `FAIL seed=… query=… doc=…`.
    std::string line() const
    {
        if (pass)
            return "PASS n=" + std::to_string(documents);
        return "FAIL seed=" + std::to_string(seed) + " query=" + query + " doc=" + document_path;
    }
};

/// Generates `n` documents (document i uses seed cfg.seed + i), prunes each
/// with `p` and compares every query's result against the original.
inline SoundnessReport check_projector(const Projector& p, const std::vector<xpath::FullQuery>& qs, std::size_t n,
                                       const GenConfig& cfg)
{
    SoundnessReport report;
    for (std::size_t i = 0; i < n; ++i) {
        GenConfig c = cfg;
        c.seed = cfg.seed + i;
        Document d = generate_document(p.grammar, c);
        PrunedDocument pruned = prune_document(d, p);
        report.bytes_in += serialize(d).size();
        report.bytes_out += serialize(pruned.doc).size();
        ++report.documents;
        for (const auto& q : qs) {
            auto diff = detail::compare_values(d, eval_full(q, d), pruned, eval_full(q, pruned.doc));
            if (diff) {
                report.pass = false;
                report.seed = c.seed;
                report.query = q.source;
                report.reason = *diff;
                report.document_path = detail::dump_counterexample(d, c.seed);
                return report;
            }
        }
    }
    return report;
}

/// Infers the projector of the approximated batch and checks it.
inline SoundnessReport check_soundness(const Grammar& g, const std::vector<xpath::FullQuery>& qs, std::size_t n,
                                       const GenConfig& cfg)
{
    std::vector<QueryEll> approx;
    for (const auto& q : qs)
        approx.push_back(approximate_to_ell(q));
    return check_projector(infer_projector(approx, g), qs, n, cfg);
}

struct MinimalityResult {
    enum class Outcome { Minimal, Witness, BudgetExhausted };
    Outcome outcome = Outcome::Minimal;
    std::optional<RuleId> witness;  // a kept rule whose removal changed no result
    std::size_t documents = 0;

    bool minimal() const noexcept { return outcome == Outcome::Minimal; }
};

namespace detail {

inline bool same_results(const std::vector<QueryEll>& qs, const Document& d, const Projector& p)
{
    PrunedDocument pruned = prune_document(d, p);
    for (const auto& q : qs)
        if (compare_refs(d, to_refs(eval_ell(q, d)), pruned, to_refs(eval_ell(q, pruned.doc))))
            return false;
    return true;
}

}  // namespace detail

/// Searches for a kept rule that can be dropped without changing any
/// query's result on up to `budget` documents: all documents in order of
/// size for grammars of at most six rules, random ones otherwise.
inline MinimalityResult minimality_check(const Projector& p, const std::vector<QueryEll>& qs, std::size_t budget,
                                         const GenConfig& cfg = {})
{
    MinimalityResult out;
    if (p.kept.empty())
        return out;
    std::vector<Document> docs;
    if (p.grammar.rule_count() <= 6) {
        docs = enumerate_documents(p.grammar, budget, 64, cfg);
    } else {
        for (std::size_t i = 0; i < budget; ++i) {
            GenConfig c = cfg;
            c.seed = cfg.seed + i;
            docs.push_back(generate_document(p.grammar, c));
        }
    }
    out.documents = docs.size();
    if (docs.empty()) {
        out.outcome = MinimalityResult::Outcome::BudgetExhausted;
        return out;
    }
    for (RuleId r : p.kept) {
        Projector smaller{p.grammar, p.kept};
        smaller.kept.erase(r);
        bool droppable = std::all_of(docs.begin(), docs.end(),
                                     [&](const Document& d) { return detail::same_results(qs, d, smaller); });
        if (droppable) {
            out.outcome = MinimalityResult::Outcome::Witness;
            out.witness = r;
            return out;
        }
    }
    return out;
}

}  // namespace xproj
