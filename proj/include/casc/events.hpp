#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace casc {

// One post/repost record. An absent parent marks the original post.
struct RepostEvent {
    std::string mid;
    std::string uid;
    std::int64_t ts = 0;
    std::string parent_uid; // meaningful only when has_parent
    bool has_parent = false;

    bool operator==(const RepostEvent&) const = default;
};

// Inclusive-exclusive timestamp bounds [start_ts, end_ts).
struct Window {
    std::int64_t start_ts = 0;
    std::int64_t end_ts = 0;
};

struct ParseOptions {
    // Abort when malformed_lines / total_lines exceeds this fraction.
    double max_error_rate = 0.01;
    // Cap on per-line diagnostics kept in the result (all are counted).
    std::size_t max_diagnostics = 50;
};

struct ParseResult {
    std::vector<RepostEvent> events;
    std::uint64_t total_lines = 0;
    std::uint64_t malformed_lines = 0;
    std::vector<std::string> diagnostics; // "line N: reason", capped
};

// Parses tab-separated lines `mid<TAB>uid<TAB>ts<TAB>parent_uid` (parent may
// be empty; a 3-column line is treated the same as an empty 4th column).
// Malformed lines are counted with a line-numbered diagnostic and skipped;
// an error rate above opts.max_error_rate raises data_error.
ParseResult parse_events(std::istream& in, const ParseOptions& opts = {});
ParseResult parse_events_file(const std::string& path, const ParseOptions& opts = {});

// Canonical 4-column TSV, one line per event. parse(serialize(x)) == x.
void serialize_events(std::ostream& out, std::span<const RepostEvent> events);
void serialize_events_file(const std::string& path, std::span<const RepostEvent> events);

// Keeps events with w.start_ts <= ts < w.end_ts, order preserved.
std::vector<RepostEvent> filter_window(std::span<const RepostEvent> events, const Window& w);

struct CascadeGroup {
    std::string mid;
    // Sorted by (ts, uid, repost-after-original), deduplicated by uid,
    // events[0] is the root (original post, or earliest event if !rooted).
    std::vector<RepostEvent> events;
    bool rooted = true;
};

struct GroupOptions {
    // Keep cascades without an original-post event, treating the earliest
    // event as the root. When false such cascades are dropped and counted.
    bool allow_rootless = false;
};

struct GroupStats {
    std::uint64_t duplicate_adopters_dropped = 0; // repeat (mid,uid) events
    std::uint64_t rootless_excluded = 0;
    std::uint64_t rootless_kept = 0;
    std::uint64_t pre_root_dropped = 0;  // reposts timestamped before the root
    std::uint64_t extra_roots = 0;       // additional parentless events per mid
};

struct GroupResult {
    std::vector<CascadeGroup> groups; // in first-seen mid order
    GroupStats stats;
};

GroupResult group_cascades(std::span<const RepostEvent> events, const GroupOptions& opts = {});

} // namespace casc
