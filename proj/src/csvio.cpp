#include "casc/csvio.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include "casc/errors.hpp"

namespace casc {

std::string format_double(double v) {
    std::array<char, 40> buf;
    auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), p);
}

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
    std::string out;
    out.reserve(s.size() + 2);
    out.push_back('"');
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open " + path + " for writing");
    return out;
}

void finish(std::ostream& out, const std::string& path) {
    out.flush();
    if (!out) throw io_error("write failed: " + path);
}

std::string blank_if_nan(double v) {
    return std::isnan(v) ? std::string() : format_double(v);
}

// One CSV record, quotes honored. Returns false on a malformed quote.
bool split_csv(const std::string& line, std::vector<std::string>& fields) {
    fields.clear();
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            if (!cur.empty()) return false;
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (quoted) return false;
    fields.push_back(std::move(cur));
    return true;
}

double parse_double(const std::string& s, std::size_t line_no) {
    const char* b = s.c_str();
    char* end = nullptr;
    double v = std::strtod(b, &end);
    if (end != b + s.size() || s.empty())
        throw format_error("line " + std::to_string(line_no) + ": bad numeric field '" + s + "'");
    return v;
}

} // namespace

void write_features_csv(std::ostream& out, const FeatureMatrix& fm, std::uint64_t viral_threshold) {
    out << "mid,final_size,label";
    for (const auto& name : fm.names) out << ',' << csv_field(name);
    out << '\n';
    const std::size_t cols = fm.names.size();
    for (std::size_t r = 0; r < fm.rows(); ++r) {
        out << csv_field(fm.mids[r]) << ',' << fm.final_sizes[r] << ','
            << (fm.final_sizes[r] >= viral_threshold ? 1 : 0);
        for (std::size_t c = 0; c < cols; ++c) out << ',' << format_double(fm.values[r * cols + c]);
        out << '\n';
    }
}

FeatureMatrix read_features_csv(std::istream& in) {
    FeatureMatrix fm;
    std::string line;
    std::vector<std::string> fields;
    if (!std::getline(in, line)) throw format_error("features csv is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!split_csv(line, fields) || fields.size() < 3 || fields[0] != "mid" ||
        fields[1] != "final_size" || fields[2] != "label")
        throw format_error("features csv header must start with mid,final_size,label");
    fm.names.assign(fields.begin() + 3, fields.end());
    const std::size_t cols = fm.names.size();

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!split_csv(line, fields))
            throw format_error("line " + std::to_string(line_no) + ": unbalanced quotes");
        if (fields.size() != cols + 3)
            throw format_error("line " + std::to_string(line_no) + ": expected " +
                               std::to_string(cols + 3) + " fields, got " +
                               std::to_string(fields.size()));
        fm.mids.push_back(fields[0]);
        std::uint64_t fs = 0;
        auto [p, ec] = std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), fs);
        if (ec != std::errc() || p != fields[1].data() + fields[1].size())
            throw format_error("line " + std::to_string(line_no) + ": bad final_size '" +
                               fields[1] + "'");
        fm.final_sizes.push_back(fs);
        for (std::size_t c = 0; c < cols; ++c)
            fm.values.push_back(parse_double(fields[3 + c], line_no));
    }
    return fm;
}

void write_report_csv(std::ostream& out, std::span<const ReportRow> rows) {
    out << "measure,m,class,min,q1,median,q3,max,mean\n";
    for (const auto& r : rows) {
        out << csv_field(r.measure) << ',' << r.m << ',' << r.klass << ',' << format_double(r.min)
            << ',' << format_double(r.q1) << ',' << format_double(r.median) << ','
            << format_double(r.q3) << ',' << format_double(r.max) << ',' << format_double(r.mean)
            << '\n';
    }
}

void write_metrics_csv(std::ostream& out, std::span<const MetricsReport> reports) {
    out << "th_tr,th_ts,fold,repeat,precision,recall,f1,tp,fp,fn,"
           "recalled_avg_size,nonrecalled_avg_size\n";
    for (const auto& rep : reports) {
        for (const auto& f : rep.folds) {
            out << rep.th_tr << ',' << rep.th_ts << ',' << f.fold << ',' << f.repeat << ','
                << format_double(f.precision) << ',' << format_double(f.recall) << ','
                << format_double(f.f1) << ',' << f.tp << ',' << f.fp << ',' << f.fn << ','
                << blank_if_nan(f.recalled_avg_size) << ',' << blank_if_nan(f.nonrecalled_avg_size)
                << '\n';
        }
    }
}

void write_weights_csv(std::ostream& out, const WeightReport& w) {
    out << "feature,weight,selected\n";
    for (std::size_t i = 0; i < w.names.size(); ++i) {
        out << csv_field(w.names[i]) << ',' << format_double(w.weights[i]) << ','
            << (w.selected[i] ? 1 : 0) << '\n';
    }
}

void write_truth_csv(std::ostream& out, std::span<const CascadeTruth> truth) {
    out << "mid,planted_viral,final_size\n";
    for (const auto& t : truth)
        out << csv_field(t.mid) << ',' << (t.planted ? 1 : 0) << ',' << t.final_size << '\n';
}

void write_stats_report(std::ostream& out, const GraphStatsReport& r) {
    out << "nodes=" << r.nodes << '\n';
    out << "edges=" << r.edges << '\n';
    out << "wcc_count=" << r.wcc_count << '\n';
    out << "avg_clustering=" << format_double(r.avg_clustering) << '\n';
    out << "avg_clustering_all_nodes=" << format_double(r.avg_clustering_all_nodes) << '\n';
    out << "clustering_eligible_nodes=" << r.clustering_eligible_nodes << '\n';
}

void write_degree_hist_csv(std::ostream& out, const GraphStatsReport& r) {
    out << "degree,in_count,out_count\n";
    const std::size_t n = std::max(r.in_degree_hist.size(), r.out_degree_hist.size());
    for (std::size_t d = 0; d < n; ++d) {
        const std::uint64_t ic = d < r.in_degree_hist.size() ? r.in_degree_hist[d] : 0;
        const std::uint64_t oc = d < r.out_degree_hist.size() ? r.out_degree_hist[d] : 0;
        out << d << ',' << ic << ',' << oc << '\n';
    }
}

void write_features_csv_file(const std::string& path, const FeatureMatrix& fm,
                             std::uint64_t viral_threshold) {
    auto out = open_out(path);
    write_features_csv(out, fm, viral_threshold);
    finish(out, path);
}

FeatureMatrix read_features_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open " + path);
    return read_features_csv(in);
}

void write_report_csv_file(const std::string& path, std::span<const ReportRow> rows) {
    auto out = open_out(path);
    write_report_csv(out, rows);
    finish(out, path);
}

void write_metrics_csv_file(const std::string& path, std::span<const MetricsReport> reports) {
    auto out = open_out(path);
    write_metrics_csv(out, reports);
    finish(out, path);
}

void write_weights_csv_file(const std::string& path, const WeightReport& w) {
    auto out = open_out(path);
    write_weights_csv(out, w);
    finish(out, path);
}

void write_truth_csv_file(const std::string& path, std::span<const CascadeTruth> truth) {
    auto out = open_out(path);
    write_truth_csv(out, truth);
    finish(out, path);
}

void write_stats_report_file(const std::string& path, const GraphStatsReport& r) {
    auto out = open_out(path);
    write_stats_report(out, r);
    finish(out, path);
}

void write_degree_hist_csv_file(const std::string& path, const GraphStatsReport& r) {
    auto out = open_out(path);
    write_degree_hist_csv(out, r);
    finish(out, path);
}

} // namespace casc
