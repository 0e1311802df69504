#include "doctest.h"
#include "hqas/errors.hpp"
#include "hqas/table_io.hpp"
#include "hqas/wgl.hpp"

using namespace hqas;

namespace {

bool same_table(const FTable& a, const FTable& b) {
    bool support_equal = a.support.has_value() == b.support.has_value() &&
                         (!a.support || a.support->weights == b.support->weights);
    return a.entries == b.entries && a.chi_max == b.chi_max && a.q_max == b.q_max &&
           a.crosscapped == b.crosscapped && support_equal;
}

}  // namespace

TEST_CASE("JSON round trip of an integer-genus table") {
    Engine e(build_coxeter(3, 4));
    FTable t = e.compute_all(2, 8);
    json doc = table_to_json(t);
    CHECK(same_table(table_from_json(doc), t));
    CHECK(same_table(table_from_json(json::parse(doc.dump())), t));
    CHECK(same_table(table_from_json(json::parse(table_to_json_text(t))), t));
    CHECK(table_to_json_text(t).find("\n{\"g\":\"0\",\"idx\":[1,1,2],") != std::string::npos);
    CHECK(doc["entries"][0]["g"] == "0");
    CHECK(doc["entries"][0]["idx"].is_array());
    CHECK(doc["entries"][0]["idx"][0].is_number_integer());
}

TEST_CASE("the (2,3) table serializes values as exact strings") {
    Engine e(build_coxeter(2, 3));
    json doc = table_to_json(e.compute_all(1, 3));
    json expected_f03{{"g", "0"}, {"idx", {1, 1, 1}}, {"value", "1"}};
    json expected_f11{{"g", "1"}, {"idx", {3}}, {"value", "1/8"}};
    bool has03 = false, has11 = false;
    for (const auto& entry : doc["entries"]) {
        if (entry == expected_f03) has03 = true;
        if (entry == expected_f11) has11 = true;
    }
    CHECK(has03);
    CHECK(has11);
}

TEST_CASE("crosscapped tables serialize half-integer genera") {
    Engine e(build_cycle_rm1(3, 3, rat(2, 3)));
    FTable t = e.compute_all(2, 3);
    json doc = table_to_json(t);
    bool half = false;
    for (const auto& entry : doc["entries"])
        if (entry["g"].get<std::string>().find("/2") != std::string::npos) half = true;
    CHECK(half);
    CHECK(doc["entries"][0]["idx"][0].is_string());
    CHECK(same_table(table_from_json(doc), t));
    CHECK(table_from_csv(table_to_csv(t)).entries == t.entries);
}

TEST_CASE("entries are ordered by (2g, n, labels)") {
    Engine e(build_coxeter(2, 3));
    auto entries = ordered_entries(e.compute_all(2, 6));
    for (size_t i = 1; i < entries.size(); ++i) {
        const auto& a = entries[i - 1].first;
        const auto& b = entries[i].first;
        bool ordered = a.g2 < b.g2 || (a.g2 == b.g2 && a.idx.size() < b.idx.size()) ||
                       (a.g2 == b.g2 && a.idx.size() == b.idx.size() && a.idx < b.idx);
        CHECK(ordered);
    }
}

TEST_CASE("CSV round trip and layout") {
    Engine e(build_coxeter(2, 3));
    FTable t = e.compute_all(1, 3);
    std::string csv = table_to_csv(t);
    CHECK(csv.rfind("g,n,idx,value\n0,3,1:1;1:1;1:1,1\n", 0) == 0);
    CHECK(csv.find("1,1,1:3,1/8\n") != std::string::npos);
    CHECK(table_from_csv(csv).entries == t.entries);
}

TEST_CASE("malformed tables are rejected") {
    CHECK_THROWS_WITH_AS(table_from_json(json{{"q_max", 2}}), doctest::Contains("BadInput"), Error);
    json bad = table_to_json(FTable{});
    bad["entries"] = json::array({json{{"g", "0"}, {"n", 2}, {"idx", {1, 1, 1}}, {"value", "1"}}});
    CHECK_THROWS_WITH_AS(table_from_json(bad), doctest::Contains("BadInput"), Error);
    CHECK_THROWS_WITH_AS(table_from_csv("g,idx\n"), doctest::Contains("BadInput"), Error);
    CHECK_THROWS_WITH_AS(table_from_csv("g,n,idx,value\n0,3,1:1;1:1\n"), doctest::Contains("BadInput"), Error);
}

TEST_CASE("curve JSON round trip") {
    json doc = json::parse(R"({"components":[{"r":2,"tau":{"3":"-1","5":"1/2"}},{"r":3,"tau":{"4":"-1"}}],
                               "phi":[{"a":[1,1],"b":[2,1],"value":"1/2"},{"a":[1,3],"b":[1,3],"value":"2"}]})");
    LocalCurve c = curve_from_json(doc);
    REQUIRE(c.size() == 2);
    CHECK(c.component(1).tau.at(5) == rat(1, 2));
    CHECK(c.phi.at({1, 1}, {2, 1}) == rat(1, 2));
    CHECK(c.phi.at({2, 1}, {1, 1}) == rat(1, 2));
    LocalCurve back = curve_from_json(curve_to_json(c));
    CHECK(back.phi.entries() == c.phi.entries());
    CHECK(back.component(2).tau == c.component(2).tau);
    CHECK(back.component(2).r == 3);
    CHECK(curve_to_json(c)["phi"].size() == 2);
}

TEST_CASE("malformed curves are rejected") {
    CHECK_THROWS_WITH_AS(curve_from_json(json::parse(R"({"phi":[]})")), doctest::Contains("BadInput"), Error);
    CHECK_THROWS_WITH_AS(curve_from_json(json::parse(R"({"components":[{"r":2,"tau":{"x":"1"}}]})")),
                         doctest::Contains("BadInput"), Error);
    CHECK_THROWS_WITH_AS(curve_from_json(json::parse(R"({"components":[{"r":1,"tau":{"1":"1"}}]})")),
                         doctest::Contains("BadParameters"), Error);
    CHECK_THROWS_WITH_AS(
        curve_from_json(json::parse(R"({"components":[{"r":2,"tau":{"3":"-1"}}],"phi":[{"a":[2,1],"b":[1,1],"value":"1"}]})")),
        doctest::Contains("BadParameters"), Error);
}
