#include "doctest.h"

#include <cstdlib>
#include <random>

#include "impactosc/csv.hpp"
#include "impactosc/error.hpp"
#include "impactosc/svg.hpp"
#include "temp_dir.hpp"

using namespace impactosc;
using impactosc::testing::slurp;
using impactosc::testing::TempDir;

TEST_CASE("format_double round-trips and is shortest")
{
    CHECK(io::format_double(0.1) == "0.1");
    CHECK(io::format_double(1.0) == "1");
    CHECK(io::format_double(-2.5e-300) == "-2.5e-300");
    CHECK(io::format_double(std::nan("")) == "nan");
    CHECK(io::format_double(-HUGE_VAL) == "-inf");
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
        const auto s = io::format_double(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
}

TEST_CASE("csv writer: header, quoting, column count")
{
    TempDir dir("csv");
    {
        io::CsvWriter w(dir / "a.csv", {"name", "value", "count"});
        w.row({std::string("plain"), 0.5, std::int64_t{3}});
        w.row({std::string("with, comma"), -1e-20, std::int64_t{-4}});
        w.row({std::string("say \"hi\""), 2.0, std::int64_t{0}});
        CHECK_THROWS_AS(w.row({1.0}), Error);
        CHECK(w.rows() == 3);
        w.close();
    }
    CHECK(slurp(dir / "a.csv") ==
          "name,value,count\nplain,0.5,3\n\"with, comma\",-1e-20,-4\n\"say \"\"hi\"\"\",2,0\n");
    CHECK_THROWS_AS(io::CsvWriter(dir / "missing" / "b.csv", {"x"}), Error);
}

TEST_CASE("svg: one document with series, legend and escaped text")
{
    io::Plot p{"a < b & c", "x", "y", false, false, {}};
    p.series.push_back({"line", {0, 1, 2}, {0, 1, 4}, io::Series::Style::Line});
    p.series.push_back({"dots", {0.5, 1.5}, {2, 3}, io::Series::Style::Points});
    const auto s = io::render_svg(p);
    CHECK(s.rfind("<svg", 0) == 0);
    CHECK(s.find("</svg>") != std::string::npos);
    CHECK(s.find("a &lt; b &amp; c") != std::string::npos);
    CHECK(s.find("<polyline") != std::string::npos);
    CHECK(s.find("<circle") != std::string::npos);
    CHECK(s.find(">dots</text>") != std::string::npos);
}

TEST_CASE("svg: log axes drop non-positive and non-finite points")
{
    io::Plot p{"log", "x", "y", true, true, {}};
    p.series.push_back({"s", {1e-3, 0.0, 1e-1, 1.0}, {1.0, 2.0, -1.0, std::nan("")}, io::Series::Style::Points});
    const auto s = io::render_svg(p);
    std::size_t circles = 0;
    for (auto pos = s.find("<circle"); pos != std::string::npos; pos = s.find("<circle", pos + 1)) ++circles;
    CHECK(circles == 1);
    CHECK(s.find(">0.001</text>") != std::string::npos);

    io::Plot empty{"empty", "x", "y", true, false, {}};
    CHECK(io::render_svg(empty).find("</svg>") != std::string::npos);
}
