#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "gggp/data.hpp"
#include "gggp/errors.hpp"
#include "support.hpp"

using namespace gggp;
using test_support::source_path;

namespace {

std::vector<std::string> const body{"BMXWT", "BMXHT", "BMXWAIST", "BMXHIP"};

auto mixed10() -> Dataset
{
    return load_csv(source_path("tests/fixtures/mixed10.csv"), "DXDTOPF", body, {"SEQN", "RIAGENDR", "RIDAGEYR", "RIDEXPRG"});
}

auto ids(Dataset const& d) -> std::vector<double> { return d.column("SEQN"); }

} // namespace

TEST_CASE("CSV records")
{
    auto const rows = parse_csv("a,b,c\n1,\"x, y\",3\r\n\"he said \"\"hi\"\"\",,\n");
    REQUIRE(rows.size() == 3);
    CHECK(rows[1] == std::vector<std::string>{"1", "x, y", "3"});
    CHECK(rows[2] == std::vector<std::string>{"he said \"hi\"", "", ""});
    CHECK(parse_csv("a\n\"multi\nline\"\n")[1][0] == "multi\nline");
}

TEST_CASE("loading a small CSV")
{
    auto const d = load_csv(source_path("tests/fixtures/three_rows.csv"), "DXDTOPF", {"BMXWT", "BMXHT", "BMXHIP"});
    CHECK(d.rows() == 3);
    CHECK(d.columns == std::vector<std::string>{"BMXWT", "BMXHT", "BMXHIP", "DXDTOPF"});
    CHECK(d.features().size() == 3);
    CHECK(d.column("BMXWT")[1] == 65.5);
    CHECK(d.column("BMXWT")[2] == 90.25);
    CHECK(d.target() == std::vector<double>{30.5, 35.0, 22.0});

    // Blank cell flagged, row kept until filtering.
    auto const hip = *d.find("BMXHIP");
    CHECK(d.missing[hip][1] == 1);
    CHECK(d.has_missing(1));
    CHECK_FALSE(d.has_missing(0));
    CHECK(nhanes_filter(d, NhanesFilter{std::nullopt, "RIDAGEYR", std::nullopt}).rows() == 2);
}

TEST_CASE("loading errors name the problem")
{
    try {
        (void)load_csv(source_path("tests/fixtures/three_rows.csv"), "DXDTOPF", {"BMXWT", "BMXTHIGH"});
        FAIL("expected a data error");
    } catch (DataError const& e) {
        CHECK(std::string(e.what()).find("BMXTHIGH") != std::string::npos);
    }
    try {
        (void)load_csv(source_path("tests/fixtures/three_rows.csv"), "BMXLEG", {"BMXWT"});
        FAIL("expected a data error");
    } catch (DataError const& e) {
        CHECK(std::string(e.what()).find("BMXLEG") != std::string::npos);
    }
    CHECK_THROWS_AS((void)load_csv(source_path("tests/fixtures/nope.csv"), "DXDTOPF", {"BMXWT"}), DataError);
    CHECK_THROWS_AS((void)load_csv(source_path("tests/fixtures/three_rows.csv"), "DXDTOPF", {"DXDTOPF"}), DataError);
}

TEST_CASE("NHANES row filter")
{
    auto const d = mixed10();
    CHECK(d.rows() == 10);
    auto const kept = nhanes_filter(d, NhanesFilter{18.0, "RIDAGEYR", std::string("RIDEXPRG")});
    CHECK(kept.rows() == 6);
    CHECK(ids(kept) == std::vector<double>{1, 4, 7, 8, 9, 10});

    // Filtering a clean adult set changes nothing.
    CHECK(nhanes_filter(kept, NhanesFilter{18.0, "RIDAGEYR", std::string("RIDEXPRG")}).values == kept.values);

    // Age threshold is inclusive of 18 and excludes 17.9.
    std::vector<std::size_t> const first{7};
    auto one = select_rows(d, first);
    one.values[*one.find("RIDAGEYR")][0] = 17.9;
    CHECK(nhanes_filter(one, NhanesFilter{18.0, "RIDAGEYR", std::nullopt}).rows() == 0);
    one.values[*one.find("RIDAGEYR")][0] = 18.0;
    CHECK(nhanes_filter(one, NhanesFilter{18.0, "RIDAGEYR", std::nullopt}).rows() == 1);

    CHECK_THROWS_AS((void)nhanes_filter(load_csv(source_path("tests/fixtures/three_rows.csv"), "DXDTOPF", {"BMXWT"})),
                    DataError);
}

TEST_CASE("seeded split")
{
    auto const d = mixed10();
    SplitSpec const spec{0.8, 17, GenderFilter::All, "RIAGENDR"};
    auto const [train, test] = split(d, spec);
    CHECK(train.rows() == 8);
    CHECK(test.rows() == 2);

    std::multiset<double> all;
    for (double v : ids(train)) { all.insert(v); }
    for (double v : ids(test)) { all.insert(v); }
    CHECK(all == std::multiset<double>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10});

    auto const [train2, test2] = split(d, spec);
    CHECK(ids(train2) == ids(train));
    CHECK(ids(test2) == ids(test));

    bool differs = false;
    for (std::uint64_t seed = 0; seed < 20 && !differs; ++seed) {
        differs = ids(split(d, SplitSpec{0.8, seed}).first) != ids(train);
    }
    CHECK(differs);
}

TEST_CASE("split sizes round up")
{
    auto const d = mixed10();
    CHECK(split(d, SplitSpec{0.75, 1}).first.rows() == 8);
    CHECK(split(d, SplitSpec{0.7, 1}).first.rows() == 7);
    CHECK(split(d, SplitSpec{0.5, 1}).first.rows() == 5);
    CHECK_THROWS_AS((void)split(d, SplitSpec{1.0, 1}), DataError);
    CHECK_THROWS_AS((void)split(d, SplitSpec{0.0, 1}), DataError);
}

TEST_CASE("gender-filtered split")
{
    auto const d = mixed10();
    auto const [train, test] = split(d, SplitSpec{0.5, 3, GenderFilter::Male, "RIAGENDR"});
    CHECK(train.rows() + test.rows() == 4);
    for (auto const* side : {&train, &test}) {
        auto const& g = side->column("RIAGENDR");
        CHECK(std::all_of(g.begin(), g.end(), [](double v) { return v == 1.0; }));
    }
    auto const [ftrain, ftest] = split(d, SplitSpec{0.5, 3, GenderFilter::Female, "RIAGENDR"});
    CHECK(ftrain.rows() + ftest.rows() == 6);

    CHECK(parse_gender_filter("male") == GenderFilter::Male);
    CHECK(to_string(GenderFilter::Female) == "female");
    CHECK_THROWS((void)parse_gender_filter("M"));
}

TEST_CASE("synthetic fixture shape")
{
    std::vector<std::string> const features{"RIAGENDR", "RIDAGEYR", "BMXWT", "BMXHT", "BMXLEG",
                                            "BMXARML", "BMXARMC", "BMXWAIST", "BMXHIP"};
    auto const d = load_csv(source_path("data/synthetic_nhanes.csv"), "DXDTOPF", features, {"RIDEXPRG"});
    CHECK(d.rows() == 200);
    CHECK(nhanes_filter(d, NhanesFilter{18.0, "RIDAGEYR", std::string("RIDEXPRG")}).rows() == 200);
    auto const& fat = d.target();
    CHECK(*std::min_element(fat.begin(), fat.end()) >= 12.0);
    CHECK(*std::max_element(fat.begin(), fat.end()) <= 57.0);
}
