#include "casc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <queue>
#include <tuple>

#include "casc/errors.hpp"
#include "casc/rng.hpp"

namespace casc {

void validate(const SynthConfig& cfg) {
    if (cfg.communities < 2) throw param_error("need at least two communities");
    if (cfg.nodes_per_community == 0) throw param_error("communities cannot be empty");
    const std::uint64_t n =
        static_cast<std::uint64_t>(cfg.communities) * cfg.nodes_per_community;
    if (n >= kNoNode) throw param_error("graph too large for 32-bit node ids");
    auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!prob(cfg.p_in) || !prob(cfg.p_out)) throw param_error("edge probabilities must be in [0,1]");
    if (!prob(cfg.viral_fraction)) throw param_error("viral fraction must be in [0,1]");
    if (!(cfg.beta >= 0.0 && cfg.beta <= 1.0)) throw param_error("beta must be in [0,1]");
    if (!(cfg.gamma >= 0.0)) throw param_error("gamma must be non-negative");
    if (!(cfg.tau > 0.0)) throw param_error("tau must be positive");
    if (cfg.cascades == 0) throw param_error("cascade count must be positive");
}

namespace {

// advance through a virtual range of `len` slots, keeping each with
// probability p; returns indices via geometric skips
struct SkipSampler {
    Rng& rng;
    double log1mp; // log(1-p); p==1 handled separately
    bool all;      // p == 1
    bool none;     // p == 0

    SkipSampler(Rng& r, double p)
        : rng(r), log1mp(p > 0 && p < 1 ? std::log1p(-p) : 0.0), all(p >= 1.0), none(p <= 0.0) {}

    // first kept index at or after `from`, or len when none
    std::uint64_t next(std::uint64_t from, std::uint64_t len) {
        if (none || from >= len) return len;
        if (all) return from;
        double u = rng.uniform01();
        double skip = std::floor(std::log1p(-u) / log1mp);
        if (skip >= static_cast<double>(len - from)) return len;
        return from + static_cast<std::uint64_t>(skip);
    }
};

} // namespace

SbmResult gen_sbm(const SynthConfig& cfg) {
    validate(cfg);
    const std::uint64_t per = cfg.nodes_per_community;
    const std::uint64_t n = static_cast<std::uint64_t>(cfg.communities) * per;

    std::vector<std::string> uids(n);
    std::vector<std::uint32_t> comm(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        uids[i] = "u" + std::to_string(i);
        comm[i] = static_cast<std::uint32_t>(i / per);
    }

    std::vector<std::vector<NodeId>> row_targets(n);
#pragma omp parallel for schedule(dynamic, 256)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
        const std::uint64_t u = static_cast<std::uint64_t>(i);
        Rng rng(derive_seed(cfg.seed, SeedStream::sbm_row, u));
        auto& out = row_targets[u];
        const std::uint64_t c_lo = (u / per) * per;

        // within the community: virtual range skips the node itself
        SkipSampler in_s(rng, cfg.p_in);
        for (std::uint64_t v = in_s.next(0, per - 1); v < per - 1; v = in_s.next(v + 1, per - 1)) {
            std::uint64_t real = c_lo + v + (c_lo + v >= u ? 1 : 0);
            out.push_back(static_cast<NodeId>(real));
        }
        // across: one virtual range covering everything outside the community
        SkipSampler out_s(rng, cfg.p_out);
        const std::uint64_t cross_len = n - per;
        for (std::uint64_t v = out_s.next(0, cross_len); v < cross_len;
             v = out_s.next(v + 1, cross_len)) {
            std::uint64_t real = v < c_lo ? v : v + per;
            out.push_back(static_cast<NodeId>(real));
        }
    }

    std::vector<std::pair<NodeId, NodeId>> edges;
    std::size_t total = 0;
    for (const auto& t : row_targets) total += t.size();
    edges.reserve(total);
    for (std::uint64_t u = 0; u < n; ++u)
        for (NodeId v : row_targets[u]) edges.emplace_back(static_cast<NodeId>(u), v);

    SbmResult result{InfluenceGraph(uids, edges), std::move(comm)};
    return result;
}

namespace {

struct Arrival {
    double t;
    NodeId node;
    NodeId parent;
    bool operator>(const Arrival& o) const {
        return std::tie(t, node, parent) > std::tie(o.t, o.node, o.parent);
    }
};

std::string make_mid(std::uint64_t i) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "c%06llu", static_cast<unsigned long long>(i));
    return buf;
}

} // namespace

SimResult simulate_cascades(const InfluenceGraph& g, std::span<const std::uint32_t> communities,
                            const SynthConfig& cfg) {
    validate(cfg);
    const std::size_t n = g.node_count();
    if (n == 0) throw data_error("empty graph");
    if (communities.size() != n) throw param_error("community labels do not match the graph");

    const std::uint64_t planted_count =
        static_cast<std::uint64_t>(std::llround(cfg.viral_fraction * static_cast<double>(cfg.cascades)));
    std::vector<std::uint8_t> planted(cfg.cascades, 0);
    std::fill(planted.begin(), planted.begin() + static_cast<std::ptrdiff_t>(planted_count), 1);
    {
        Rng plan_rng(derive_seed(cfg.seed, SeedStream::synth_plan, 0));
        plan_rng.shuffle(planted);
    }

    SimResult result;
    result.truth.resize(cfg.cascades);
    result.adopters.resize(cfg.cascades);

#pragma omp parallel
    {
        std::vector<std::uint32_t> adopted_epoch(n, 0);
        std::uint32_t epoch = 0;
        std::priority_queue<Arrival, std::vector<Arrival>, std::greater<Arrival>> heap;

#pragma omp for schedule(dynamic, 32)
        for (std::int64_t ci = 0; ci < static_cast<std::int64_t>(cfg.cascades); ++ci) {
            const std::uint64_t c = static_cast<std::uint64_t>(ci);
            Rng rng(derive_seed(cfg.seed, SeedStream::sim_cascade, c));
            if (epoch == std::numeric_limits<std::uint32_t>::max()) {
                std::fill(adopted_epoch.begin(), adopted_epoch.end(), 0u);
                epoch = 0;
            }
            ++epoch;

            const bool is_planted = planted[c] != 0;
            const std::int64_t base = 1'600'000'000LL + static_cast<std::int64_t>(c) * 7200;

            // planted cascades get an individual cross-community boost drawn
            // from [1, gamma]; a fixed boost makes every surviving planted
            // cascade saturate to the same reach, a spread keeps final sizes
            // on a continuum
            double cross_p = cfg.beta;
            if (is_planted) {
                const double boost = 1.0 + rng.uniform01() * (cfg.gamma - 1.0);
                cross_p = std::min(1.0, cfg.beta * boost);
            }

            auto& record = result.adopters[c];
            record.clear();

            auto attempt_all = [&](NodeId u, double t_u) {
                const std::uint32_t cu = communities[u];
                for (NodeId v : g.out_neighbors(u)) {
                    const double p = communities[v] != cu ? cross_p : cfg.beta;
                    if (p <= 0.0 || !rng.bernoulli(p)) continue;
                    heap.push({t_u + rng.exponential(cfg.tau), v, u});
                }
            };

            const NodeId seed_node = static_cast<NodeId>(rng.below(n));
            adopted_epoch[seed_node] = epoch;
            record.push_back({seed_node, base, kNoNode});
            attempt_all(seed_node, 0.0);

            while (!heap.empty()) {
                Arrival a = heap.top();
                heap.pop();
                if (adopted_epoch[a.node] == epoch) continue;
                adopted_epoch[a.node] = epoch;
                // reposts land strictly after the original post
                const std::int64_t ts = base + std::max<std::int64_t>(1, std::llround(a.t));
                record.push_back({a.node, ts, a.parent});
                attempt_all(a.node, a.t);
            }

            // order the record the way grouping will: by timestamp, then by
            // uid string; the original post stays first by construction
            std::sort(record.begin() + 1, record.end(), [&](const SimAdopter& x, const SimAdopter& y) {
                if (x.ts != y.ts) return x.ts < y.ts;
                return g.uid_of(x.node) < g.uid_of(y.node);
            });

            result.truth[c] = {make_mid(c), is_planted, record.size()};
        }
    }

    std::size_t total_events = 0;
    for (const auto& record : result.adopters) total_events += record.size();
    result.events.reserve(total_events);
    for (std::uint64_t c = 0; c < cfg.cascades; ++c) {
        for (const auto& a : result.adopters[c]) {
            RepostEvent ev;
            ev.mid = result.truth[c].mid;
            ev.uid = g.uid_of(a.node);
            ev.ts = a.ts;
            if (a.parent != kNoNode) {
                ev.parent_uid = g.uid_of(a.parent);
                ev.has_parent = true;
            }
            result.events.push_back(std::move(ev));
        }
    }
    std::sort(result.events.begin(), result.events.end(),
              [](const RepostEvent& a, const RepostEvent& b) {
                  return std::tie(a.ts, a.mid, a.uid) < std::tie(b.ts, b.mid, b.uid);
              });
    return result;
}

} // namespace casc
