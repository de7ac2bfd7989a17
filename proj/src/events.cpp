#include "casc/events.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "casc/errors.hpp"

namespace casc {

namespace {

bool parse_ts(std::string_view field, std::int64_t& out) {
    if (field.empty()) return false;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
    return ec == std::errc{} && ptr == field.data() + field.size();
}

} // namespace

ParseResult parse_events(std::istream& in, const ParseOptions& opts) {
    if (!in) throw io_error("cannot read event stream");
    ParseResult res;
    std::string line;
    std::uint64_t lineno = 0;
    auto diag = [&](const char* reason) {
        ++res.malformed_lines;
        if (res.diagnostics.size() < opts.max_diagnostics)
            res.diagnostics.push_back("line " + std::to_string(lineno) + ": " + reason);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue; // blank lines are not events
        ++res.total_lines;

        std::string_view fields[4];
        std::size_t nfields = 0;
        std::string_view rest = line;
        while (true) {
            if (nfields == 3) { // 4th field takes the remainder, tabs included
                fields[nfields++] = rest;
                break;
            }
            std::size_t tab = rest.find('\t');
            if (tab == std::string_view::npos) {
                fields[nfields++] = rest;
                break;
            }
            fields[nfields++] = rest.substr(0, tab);
            rest = rest.substr(tab + 1);
        }
        if (nfields < 3) { diag("expected 3 or 4 tab-separated fields"); continue; }
        if (nfields == 4 && fields[3].find('\t') != std::string_view::npos) {
            diag("too many fields");
            continue;
        }
        if (fields[0].empty()) { diag("empty mid"); continue; }
        if (fields[1].empty()) { diag("empty uid"); continue; }
        std::int64_t ts;
        if (!parse_ts(fields[2], ts)) { diag("timestamp is not an integer"); continue; }
        if (ts < 0) { diag("negative timestamp"); continue; }

        RepostEvent ev;
        ev.mid = std::string(fields[0]);
        ev.uid = std::string(fields[1]);
        ev.ts = ts;
        if (nfields == 4 && !fields[3].empty()) {
            ev.parent_uid = std::string(fields[3]);
            ev.has_parent = true;
        }
        res.events.push_back(std::move(ev));
    }
    if (in.bad()) throw io_error("stream failure while reading events");
    if (res.total_lines > 0) {
        double rate = static_cast<double>(res.malformed_lines) / static_cast<double>(res.total_lines);
        if (rate > opts.max_error_rate)
            throw data_error("malformed line rate " + std::to_string(rate) + " exceeds threshold " +
                             std::to_string(opts.max_error_rate) + " (" +
                             std::to_string(res.malformed_lines) + "/" + std::to_string(res.total_lines) +
                             " lines)");
    }
    return res;
}

ParseResult parse_events_file(const std::string& path, const ParseOptions& opts) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path);
    return parse_events(in, opts);
}

void serialize_events(std::ostream& out, std::span<const RepostEvent> events) {
    for (const auto& ev : events) {
        out << ev.mid << '\t' << ev.uid << '\t' << ev.ts << '\t';
        if (ev.has_parent) out << ev.parent_uid;
        out << '\n';
    }
    if (!out) throw io_error("failed writing event stream");
}

void serialize_events_file(const std::string& path, std::span<const RepostEvent> events) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open " + path + " for writing");
    serialize_events(out, events);
}

std::vector<RepostEvent> filter_window(std::span<const RepostEvent> events, const Window& w) {
    if (w.start_ts >= w.end_ts) throw param_error("window start must be < end");
    std::vector<RepostEvent> out;
    for (const auto& ev : events)
        if (ev.ts >= w.start_ts && ev.ts < w.end_ts) out.push_back(ev);
    return out;
}

GroupResult group_cascades(std::span<const RepostEvent> events, const GroupOptions& opts) {
    GroupResult res;
    std::unordered_map<std::string, std::size_t> index; // mid -> slot, first-seen order
    std::vector<std::vector<RepostEvent>> buckets;
    std::vector<std::string> mids;
    for (const auto& ev : events) {
        auto [it, inserted] = index.try_emplace(ev.mid, buckets.size());
        if (inserted) {
            buckets.emplace_back();
            mids.push_back(ev.mid);
        }
        buckets[it->second].push_back(ev);
    }

    for (std::size_t b = 0; b < buckets.size(); ++b) {
        auto& evs = buckets[b];
        // Original post sorts before a same-(ts,uid) repost so dedup keeps it.
        // Stable so equal keys keep input order; grouping stays deterministic.
        std::stable_sort(evs.begin(), evs.end(), [](const RepostEvent& a, const RepostEvent& c) {
            if (a.ts != c.ts) return a.ts < c.ts;
            if (a.uid != c.uid) return a.uid < c.uid;
            return a.has_parent < c.has_parent;
        });
        std::vector<RepostEvent> dedup;
        dedup.reserve(evs.size()); // no reallocation, views below stay valid
        std::unordered_set<std::string_view> seen;
        for (auto& ev : evs) {
            if (seen.contains(ev.uid)) {
                ++res.stats.duplicate_adopters_dropped;
                continue;
            }
            dedup.push_back(std::move(ev));
            seen.insert(dedup.back().uid);
        }

        std::size_t root_pos = dedup.size();
        for (std::size_t i = 0; i < dedup.size(); ++i) {
            if (!dedup[i].has_parent) {
                if (root_pos == dedup.size()) root_pos = i;
                else ++res.stats.extra_roots;
            }
        }

        CascadeGroup group;
        group.mid = mids[b];
        if (root_pos == dedup.size()) {
            if (!opts.allow_rootless) {
                ++res.stats.rootless_excluded;
                continue;
            }
            ++res.stats.rootless_kept;
            group.rooted = false;
            group.events = std::move(dedup);
        } else {
            // Reposts timestamped before the original post cannot get a valid
            // adoption offset; drop them.
            res.stats.pre_root_dropped += root_pos;
            group.events.assign(std::make_move_iterator(dedup.begin() + static_cast<std::ptrdiff_t>(root_pos)),
                                std::make_move_iterator(dedup.end()));
        }
        res.groups.push_back(std::move(group));
    }
    return res;
}

} // namespace casc
