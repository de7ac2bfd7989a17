#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "doctest.h"

#include "casc/csvio.hpp"
#include "casc/errors.hpp"
#include "casc/manifest.hpp"
#include "casc/rng.hpp"

using namespace casc;

namespace {

std::string tmp_file(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

FeatureMatrix tiny_matrix() {
    FeatureMatrix fm;
    fm.names = {"f1", "f2", "f3"};
    fm.mids = {"plain", "odd,mid\"x"};
    fm.final_sizes = {10, 600};
    fm.values = {1.0, 0.5, -3.25, 1e-9, 0.3333333333333333, 2e300};
    return fm;
}

} // namespace

TEST_SUITE("csvio") {

TEST_CASE("format_double is shortest round-trip") {
    CHECK(format_double(0.0) == "0");
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(-2.0) == "-2");
    CHECK(format_double(1.0 / 3.0) == "0.3333333333333333");
    CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");

    Rng rng(42);
    for (int i = 0; i < 2000; ++i) {
        double mag = std::exp(rng.uniform(-300.0, 300.0) * std::log(10.0) / 10.0);
        double v = (rng.bernoulli(0.5) ? 1 : -1) * mag * rng.uniform01();
        std::string s = format_double(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
    CHECK(std::strtod(format_double(5e-324).c_str(), nullptr) == 5e-324);
    CHECK(std::strtod(format_double(1.7976931348623157e308).c_str(), nullptr) ==
          1.7976931348623157e308);
}

TEST_CASE("csv_field quotes only when needed") {
    CHECK(csv_field("plain_name") == "plain_name");
    CHECK(csv_field("a,b") == "\"a,b\"");
    CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(csv_field("two\nlines") == "\"two\nlines\"");
}

TEST_CASE("features csv round-trips exactly") {
    FeatureMatrix fm = tiny_matrix();
    std::stringstream buf;
    write_features_csv(buf, fm, 500);

    std::string header;
    std::getline(buf, header);
    CHECK(header == "mid,final_size,label,f1,f2,f3");
    std::string row1, row2;
    std::getline(buf, row1);
    std::getline(buf, row2);
    CHECK(row1.substr(0, 11) == "plain,10,0,");
    CHECK(row2.substr(0, 18) == "\"odd,mid\"\"x\",600,1");

    buf.clear();
    buf.seekg(0);
    FeatureMatrix back = read_features_csv(buf);
    CHECK(back.names == fm.names);
    CHECK(back.mids == fm.mids);
    CHECK(back.final_sizes == fm.final_sizes);
    REQUIRE(back.values.size() == fm.values.size());
    for (std::size_t i = 0; i < fm.values.size(); ++i) CHECK(back.values[i] == fm.values[i]);
}

TEST_CASE("features csv reader rejects malformed input") {
    auto read = [](const char* text) {
        std::stringstream in(text);
        return read_features_csv(in);
    };
    CHECK_THROWS_AS(read(""), format_error);
    CHECK_THROWS_AS(read("wrong,header,here\n"), format_error);
    CHECK_THROWS_AS(read("mid,final_size,label,f1\nm,5,0\n"), format_error);
    CHECK_THROWS_AS(read("mid,final_size,label,f1\nm,5,0,notanumber\n"), format_error);
    CHECK_THROWS_AS(read("mid,final_size,label,f1\nm,-5,0,1.0\n"), format_error);
    CHECK(read("mid,final_size,label,f1\n\nm,5,0,2\n").rows() == 1); // blank line skipped
}

TEST_CASE("metrics csv writes blank cells for nan sizes") {
    MetricsReport rep;
    rep.th_tr = 300;
    rep.th_ts = 500;
    FoldMetrics f;
    f.repeat = 1;
    f.fold = 2;
    f.tp = 3;
    f.fp = 1;
    f.fn = 2;
    f.precision = 0.75;
    f.recall = 0.6;
    f.f1 = 2 * 0.75 * 0.6 / 1.35;
    f.recalled_avg_size = std::numeric_limits<double>::quiet_NaN();
    f.nonrecalled_avg_size = 812.5;
    rep.folds = {f};

    std::stringstream buf;
    write_metrics_csv(buf, {&rep, 1});
    std::string header, row;
    std::getline(buf, header);
    std::getline(buf, row);
    CHECK(header ==
          "th_tr,th_ts,fold,repeat,precision,recall,f1,tp,fp,fn,"
          "recalled_avg_size,nonrecalled_avg_size");
    CHECK(row == "300,500,2,1,0.75,0.6," + format_double(f.f1) + ",3,1,2,,812.5");
}

TEST_CASE("weights and truth and report csv shapes") {
    WeightReport w;
    w.names = {"a", "b"};
    w.weights = {0.42, 0.0};
    w.selected = {1, 0};
    std::stringstream wb;
    write_weights_csv(wb, w);
    CHECK(wb.str() == "feature,weight,selected\na,0.42,1\nb,0,0\n");

    std::vector<CascadeTruth> truth = {{"m1", true, 900}, {"m2", false, 3}};
    std::stringstream tb;
    write_truth_csv(tb, truth);
    CHECK(tb.str() == "mid,planted_viral,final_size\nm1,1,900\nm2,0,3\n");

    ReportRow r{"k_adopter", 30, "viral", 1, 2, 3, 4.5, 9, 3.9};
    std::stringstream rb;
    write_report_csv(rb, {&r, 1});
    CHECK(rb.str() ==
          "measure,m,class,min,q1,median,q3,max,mean\nk_adopter,30,viral,1,2,3,4.5,9,3.9\n");
}

TEST_CASE("graph stats report and histogram") {
    GraphStatsReport r;
    r.nodes = 5;
    r.edges = 4;
    r.wcc_count = 2;
    r.avg_clustering = 0.25;
    r.avg_clustering_all_nodes = 0.1;
    r.clustering_eligible_nodes = 2;
    r.in_degree_hist = {1, 3, 1};
    r.out_degree_hist = {2, 3};

    std::stringstream sb;
    write_stats_report(sb, r);
    CHECK(sb.str() == "nodes=5\nedges=4\nwcc_count=2\navg_clustering=0.25\n"
                      "avg_clustering_all_nodes=0.1\nclustering_eligible_nodes=2\n");

    std::stringstream hb;
    write_degree_hist_csv(hb, r);
    CHECK(hb.str() == "degree,in_count,out_count\n0,1,2\n1,3,3\n2,1,0\n");
}

TEST_CASE("fnv1a64 matches published vectors") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
    CHECK(hex64(255) == "00000000000000ff");

    const std::string path = tmp_file("fnv_check.bin");
    std::ofstream(path, std::ios::binary) << "foobar";
    CHECK(fnv1a64_file(path) == fnv1a64("foobar"));
    std::filesystem::remove(path);
    CHECK_THROWS_AS(fnv1a64_file(path), io_error);
}

TEST_CASE("manifest has stable key order and real digests") {
    ordered_json m = manifest_skeleton("graph build", 7, 4);
    CHECK(m.dump().rfind("{\"tool\":\"casc\",\"version\":\"0.1.0\",\"subcommand\":\"graph build\","
                         "\"seed\":7,\"threads\":4,",
                         0) == 0);

    const std::string data = tmp_file("manifest_input.txt");
    std::ofstream(data, std::ios::binary) << "payload";
    manifest_add_file(m, "inputs", data);
    CHECK(m["inputs"][0]["path"] == data);
    CHECK(m["inputs"][0]["bytes"] == 7);
    CHECK(m["inputs"][0]["fnv1a64"] == hex64(fnv1a64("payload")));

    const std::string out = tmp_file("manifest_out.json");
    write_manifest_file(out, m);
    std::ifstream in(out);
    auto parsed = ordered_json::parse(in);
    CHECK(parsed == m);
    std::filesystem::remove(data);
    std::filesystem::remove(out);
}

} // TEST_SUITE
