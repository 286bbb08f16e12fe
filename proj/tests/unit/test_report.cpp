#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <limits>
#include <string>

#include "mvfbm/errors.hpp"
#include "mvfbm/report.hpp"
#include "mvfbm/rng.hpp"

using namespace mvfbm;

namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_SUITE("report") {
  TEST_CASE("floats round-trip through the CSV bit-exactly") {
    const rng::NormalStream s(1, 0, rng::Domain::kTest);
    report::CsvTable t{{"x"}, {}};
    std::vector<double> values{0.1, 1.0 / 3.0, -2.5e-300, 1e308, std::numeric_limits<double>::denorm_min()};
    for (std::uint64_t i = 0; i < 200; ++i) values.push_back(std::ldexp(s.normal(i), static_cast<int>(i % 50) - 25));
    for (double v : values) t.rows.push_back({report::format_double(v)});
    const report::CsvTable back = report::parse_csv(report::to_csv(t));
    REQUIRE(back.rows.size() == values.size());
    for (std::size_t i = 0; i < values.size(); ++i) CHECK(same_bits(std::strtod(back.rows[i][0].c_str(), nullptr), values[i]));
  }

  TEST_CASE("empty table is header only with LF endings") {
    const report::CsvTable t{{"a", "b"}, {}};
    CHECK(report::to_csv(t) == "a,b\n");
    CHECK(report::to_csv(report::chaos_table(ChaosTable{})) == "N,gap,std_error,repeats\n");
  }

  TEST_CASE("error table rows are sorted by step descending") {
    ErrorTable e;
    e.hurst = 0.6;
    for (double step : {1.0 / 1024, 1.0 / 128, 1.0 / 512, 1.0 / 256}) e.rows.push_back({step, step, 8, 0.0, false});
    const report::CsvTable t = report::error_table({e});
    REQUIRE(t.rows.size() == 4);
    CHECK(t.rows[0][1] == report::format_double(1.0 / 128));
    CHECK(t.rows[3][1] == report::format_double(1.0 / 1024));
    CHECK(t.rows[0][2] == "-7");
  }

  TEST_CASE("fbm table starts at the origin") {
    const NoiseBlock b{{0.5, 0.25}, 0.5, Hurst(0.7), 3, 0};
    const report::CsvTable t = report::fbm_table({b});
    CHECK(t.header == std::vector<std::string>{"stream_id", "k", "t_k", "increment", "cumulative"});
    REQUIRE(t.rows.size() == 3);
    CHECK(t.rows[0] == std::vector<std::string>{"3", "0", "0", "0", "0"});
    CHECK(t.rows[2] == std::vector<std::string>{"3", "2", "1", "0.25", "0.75"});
  }

  TEST_CASE("writing and reading files") {
    const auto dir = std::filesystem::temp_directory_path();
    const report::CsvTable t{{"a"}, {{"1"}, {"2"}}};
    report::write_csv(t, dir / "mvfbm_report_test.csv");
    CHECK(report::read_csv(dir / "mvfbm_report_test.csv").rows == t.rows);
    CHECK(report::file_digest(dir / "mvfbm_report_test.csv") == report::fnv1a_hex("a\n1\n2\n"));
    std::filesystem::remove(dir / "mvfbm_report_test.csv");
    CHECK_THROWS_AS(report::write_csv(t, "/nonexistent-dir/x.csv"), IoError);
  }

  TEST_CASE("fnv1a digest") {
    CHECK(report::fnv1a_hex("") == "cbf29ce484222325");
    CHECK(report::fnv1a_hex("a") == "af63dc4c8601ec8c");
  }

  TEST_CASE("svg output") {
    report::PlotSeries s{"H = 0.6", {-7, -8, -9}, {-3, -3.6, -4.2}, true, 0.6, 1.2, true, 0.6};
    const std::string svg = report::render_svg("t<1>", "x", "y", {s});
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("t&lt;1&gt;") != std::string::npos);
    CHECK(svg.find("stroke-dasharray") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
  }
}
