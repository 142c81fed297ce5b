#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

#include "dialectkit/report.hpp"

using namespace dialectkit;

TEST_CASE("fmt renders fixed-point with the requested decimals") {
    CHECK(report::fmt(0.5, 4) == "0.5000");
    CHECK(report::fmt(2.0, 0) == "2");
    CHECK(report::fmt(-0.672, 4) == "-0.6720");
    CHECK(report::fmt(1.0 / 3.0, 2) == "0.33");
    CHECK(report::fmt(52.538197888483, 2) == "52.54");
    CHECK(report::fmt(0.0, 2) == "0.00");
}

TEST_CASE("markdown_table pads every column to its widest cell") {
    const std::string table = report::markdown_table({"A", "Bee"}, {{"x", "y"}, {"longer", "z"}});
    CHECK(table ==
          "| A      | Bee |\n"
          "|--------|-----|\n"
          "| x      | y   |\n"
          "| longer | z   |\n");
}

TEST_CASE("markdown_table fills missing trailing cells with the header text") {
    const std::string table = report::markdown_table({"A", "Bee"}, {{"only"}});
    CHECK(table ==
          "| A    | Bee |\n"
          "|------|-----|\n"
          "| only | Bee |\n");
}

TEST_CASE("csv_escape quotes only when needed and doubles inner quotes") {
    CHECK(report::csv_escape("plain") == "plain");
    CHECK(report::csv_escape("") == "");
    CHECK(report::csv_escape("a,b") == "\"a,b\"");
    CHECK(report::csv_escape("he said \"hi\"") == "\"he said \"\"hi\"\"\"");
    CHECK(report::csv_escape("two\nlines") == "\"two\nlines\"");
    CHECK(report::csv_escape("both,\"mixed\"") == "\"both,\"\"mixed\"\"\"");
}

TEST_CASE("csv_table emits one escaped line per row") {
    const std::string csv = report::csv_table({"a", "b"}, {{"x", "y,z"}, {"", "q"}});
    CHECK(csv == "a,b\nx,\"y,z\"\n,q\n");
}

TEST_CASE("metric_row fixes field order and per-column decimals") {
    metrics::MetricReport r;
    r.method = "ZS+M";
    r.dialect = "jeju";
    r.chrf_pp = 67.814683709207;
    r.bleu = 52.538197888483;
    r.dfs_mean = -0.672;
    r.tdr = 0.95;
    r.mean_attempts = 2.25;
    const report::Row row = report::metric_row(r);
    const report::Row expected = {"ZS+M", "jeju", "67.81", "52.54", "-0.6720", "0.9500", "2.25"};
    CHECK(row == expected);
    CHECK(report::kMetricHeaders ==
          report::Row{"Method", "Dialect", "chrF++", "BLEU", "DFS", "TDR", "Mean attempts"});
}

namespace {

metrics::MetricReport make_report(const std::string& method, const std::string& dialect,
                                  double tdr) {
    metrics::MetricReport r;
    r.method = method;
    r.dialect = dialect;
    r.tdr = tdr;
    return r;
}

} // namespace

TEST_CASE("method_metric_table and csv share the header row") {
    metrics::MetricReport r = make_report("ZS", "jeju", 0.5);
    r.chrf_pp = 10.0;
    r.bleu = 20.0;
    r.dfs_mean = 0.25;
    r.mean_attempts = 1.5;
    const std::string md = report::method_metric_table({r});
    CHECK(md.rfind("| Method |", 0) == 0);
    CHECK(md.find("| ZS") != std::string::npos);
    CHECK(md.find(" 0.2500 ") != std::string::npos);
    const std::string csv = report::method_metric_csv({r});
    CHECK(csv ==
          "Method,Dialect,chrF++,BLEU,DFS,TDR,Mean attempts\n"
          "ZS,jeju,10.00,20.00,0.2500,0.5000,1.50\n");
}

TEST_CASE("tdr_matrix pivots methods by dialect with a mean column") {
    const std::vector<metrics::MetricReport> reports = {
        make_report("ZS", "jeju", 0.5),
        make_report("ZS", "west", 0.7),
        make_report("ICL", "jeju", 0.9),
    };
    CHECK(report::tdr_matrix(reports) ==
          "| Method | jeju   | west   | Avg    |\n"
          "|--------|--------|--------|--------|\n"
          "| ZS     | 0.5000 | 0.7000 | 0.6000 |\n"
          "| ICL    | 0.9000 | -      | 0.9000 |\n");
}

TEST_CASE("tdr_matrix keeps first-seen ordering and handles all-missing rows") {
    // "west" appears before "jeju" here, so columns flip relative to the
    // previous case; ordering is insertion order, not lexicographic.
    const std::vector<metrics::MetricReport> reports = {
        make_report("ICL", "west", 1.0),
        make_report("ZS", "jeju", 0.25),
    };
    const std::string table = report::tdr_matrix(reports);
    CHECK(table.find("| Method | west   | jeju   | Avg    |") != std::string::npos);
    CHECK(table.find("| ICL    | 1.0000 | -      | 1.0000 |") != std::string::npos);
    CHECK(table.find("| ZS     | -      | 0.2500 | 0.2500 |") != std::string::npos);
}

TEST_CASE("metadata_footer lists entries in order") {
    const std::string footer =
        report::metadata_footer({{"seed", "1337"}, {"backend", "scripted"}});
    CHECK(footer == "### Run metadata\n\n- seed: 1337\n- backend: scripted\n");
    CHECK(report::metadata_footer({}) == "### Run metadata\n\n");
}

namespace {

engine::RefineTrace make_trace(const std::string& id, const std::string& final_output,
                               const std::string& reference, const std::string& predicted,
                               double dfs, int attempts_used) {
    engine::RefineTrace tr;
    tr.item_id = id;
    tr.source = "src " + id;
    tr.reference = reference;
    tr.target = "jeju";
    tr.method = "ZS+S";
    engine::Attempt a;
    a.index = attempts_used;
    a.selected = final_output;
    a.predicted = predicted;
    a.verified = predicted == tr.target;
    tr.attempts.assign(static_cast<std::size_t>(attempts_used), a);
    tr.final_output = final_output;
    tr.success = a.verified;
    tr.attempts_used = attempts_used;
    tr.dfs = dfs;
    return tr;
}

} // namespace

TEST_CASE("report_from_traces matches the aggregate over the same traces") {
    const std::vector<engine::RefineTrace> traces = {
        make_trace("i1", "a b", "a b", "jeju", 0.8, 1),
        make_trace("i2", "c", "d", "Standard", 0.2, 3),
    };
    const metrics::MetricReport rep = report::report_from_traces(traces);
    const metrics::MetricReport direct = engine::aggregate_traces(traces, "jeju");
    CHECK(rep.method == direct.method);
    CHECK(rep.dialect == "jeju");
    CHECK(rep.chrf_pp == direct.chrf_pp);
    CHECK(rep.bleu == direct.bleu);
    CHECK(rep.bleu == metrics::bleu({"a b", "c"}, {"a b", "d"}));
    CHECK(rep.tdr == 0.5);
    CHECK(rep.dfs_mean == 0.5);
    CHECK(rep.mean_attempts == 2.0);
    CHECK_THROWS_AS(report::report_from_traces({}), DataError);
}

TEST_CASE("write_text writes the exact bytes and rejects unopenable paths") {
    const std::string path = "report_write_test.md";
    report::write_text(path, "| a |\nline2\n");
    std::ifstream in(path, std::ios::binary);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    std::remove(path.c_str());
    CHECK(content == "| a |\nline2\n");
    CHECK_THROWS_AS(report::write_text("no_such_dir_xyz/out.md", "x"), DataError);
}
