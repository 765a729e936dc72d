#pragma once

// Timing of streaming pruning against a parse-only pass over the same bytes.

#include <algorithm>
#include <chrono>
#include <istream>
#include <ostream>
#include <streambuf>
#include <string>
#include <string_view>

#include "xproj/pruner.hpp"
#include "xproj/xml.hpp"

namespace xproj {

namespace detail {

// Read-only stream over bytes already in memory, so that both timed passes
// see identical input without file-system noise.
class ViewBuf : public std::streambuf {
public:
    explicit ViewBuf(std::string_view s)
    {
        char* p = const_cast<char*>(s.data());
        setg(p, p, p + s.size());
    }
};

// Output sink that counts and discards.
class CountingBuf : public std::streambuf {
public:
    std::uint64_t count = 0;

protected:
    std::streamsize xsputn(const char*, std::streamsize n) override
    {
        count += static_cast<std::uint64_t>(n);
        return n;
    }
    int_type overflow(int_type c) override
    {
        if (!traits_type::eq_int_type(c, traits_type::eof()))
            ++count;
        return traits_type::not_eof(c);
    }
};

}  // namespace detail

struct BenchResult {
    double parse_seconds = 0;  // best of the repetitions
    double prune_seconds = 0;  // best of the repetitions, output serialized and discarded
    std::uint64_t bytes_in = 0;
    std::uint64_t bytes_out = 0;
    PruneStats stats;

    double ratio() const { return parse_seconds > 0 ? prune_seconds / parse_seconds : 0; }

    std::string to_line() const
    {
        return "bytes_in=" + std::to_string(bytes_in) + " bytes_out=" + std::to_string(bytes_out) +
               " parse_s=" + std::to_string(parse_seconds) + " prune_s=" + std::to_string(prune_seconds) +
               " ratio=" + std::to_string(ratio()) + " " + stats.to_line();
    }
};

/// Alternates parse-only and prune passes `repeat` times over `doc` and
/// keeps the fastest of each.
inline BenchResult bench_prune(std::string_view doc, const Projector& p, int repeat = 3,
                               InvalidPolicy policy = InvalidPolicy::Strict)
{
    using clock = std::chrono::steady_clock;
    PruneTable table(p);
    BenchResult out;
    out.bytes_in = doc.size();
    out.parse_seconds = out.prune_seconds = 1e300;
    for (int i = 0; i < std::max(repeat, 1); ++i) {
        {
            detail::ViewBuf buf(doc);
            std::istream in(&buf);
            xml::NullHandler h;
            auto t0 = clock::now();
            xml::parse(in, h);
            out.parse_seconds = std::min(out.parse_seconds, std::chrono::duration<double>(clock::now() - t0).count());
        }
        {
            detail::ViewBuf buf(doc);
            std::istream in(&buf);
            detail::CountingBuf sink;
            std::ostream os(&sink);
            auto t0 = clock::now();
            xml::Writer w(os);
            StreamPruner pruner(table, w, policy);
            xml::parse(in, pruner);
            w.flush();
            out.prune_seconds = std::min(out.prune_seconds, std::chrono::duration<double>(clock::now() - t0).count());
            out.bytes_out = sink.count;
            out.stats = pruner.stats();
        }
    }
    return out;
}

}  // namespace xproj
