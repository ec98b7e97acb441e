#include <nlohmann/json.hpp>
#include <queue>
#include <random>
#include <set>

#include "doctest.h"
#include "expect_error.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "ontorules/ontology.hpp"

using namespace ontorules;
using json = nlohmann::json;

namespace {

std::vector<std::string> rendered(const Dataset& ds, const Itemset& items) {
  std::vector<std::string> out;
  for (auto i : items) out.push_back(ds.render(i));
  return out;
}

std::string doc(const json& concepts) { return json{{"version", 1}, {"concepts", concepts}}.dump(); }

}  // namespace

TEST_CASE("leaf mapping of Q1 holds its six answer codes") {
  auto cs = fixtures::case_study();
  ExtensionIndex idx(*cs.ontology, *cs.dataset);
  CHECK(rendered(*cs.dataset, idx.of_concept("Q1")) ==
        std::vector<std::string>{"q1=1", "q1=2", "q1=3", "q1=4", "q1=95", "q1=99"});
}

TEST_CASE("defined satisfaction concept selects answers 1 and 2 of Q44..Q48") {
  auto cs = fixtures::case_study();
  auto ext = item_extension(*cs.ontology, ConceptExpr::ref("SatisfComfortApartment"), *cs.dataset);
  CHECK(rendered(*cs.dataset, ext) ==
        std::vector<std::string>{"q44=1", "q44=2", "q45=1", "q45=2", "q46=1", "q46=2", "q47=1", "q47=2",
                                 "q48=1", "q48=2"});
  CHECK(item_extension(*cs.ontology, ConceptExpr::ref("SatComfortApartment"), *cs.dataset) == ext);
}

TEST_CASE("District generalizes Q1..Q14") {
  auto cs = fixtures::case_study();
  auto leaves = cs.ontology->leaves_under("District");
  std::set<std::string> expected;
  for (int i = 1; i <= 14; ++i) expected.insert("Q" + std::to_string(i));
  CHECK(std::set<std::string>(leaves.begin(), leaves.end()) == expected);
  CHECK(cs.ontology->leaves_under("Q3") == std::vector<std::string>{"Q3"});
  ExtensionIndex idx(*cs.ontology, *cs.dataset);
  CHECK(idx.of_concept("District").size() == 14 * 6);
}

TEST_CASE("multi-parent concepts contribute to both parents") {
  auto cs = fixtures::case_study();
  ExtensionIndex idx(*cs.ontology, *cs.dataset);
  CHECK(contains_all(idx.of_concept("District"), idx.of_concept("Q10")));
  CHECK(contains_all(idx.of_concept("CalmDistrict"), idx.of_concept("Q10")));
  CHECK(idx.of_concept("CalmDistrict").size() == 12);
}

TEST_CASE("structural errors") {
  CHECK(error_code_of([] {
          Ontology::parse(doc({{{"name", "A"}, {"parents", {"B"}}}, {{"name", "B"}, {"parents", {"A"}}}}));
        }) == errc::kCycle);
  auto cycle = error_of([] {
    Ontology::parse(doc({{{"name", "A"}, {"parents", {"B"}}}, {{"name", "B"}, {"parents", {"A"}}}}));
  });
  CHECK((std::string(cycle.what()).find('A') != std::string::npos ||
         std::string(cycle.what()).find('B') != std::string::npos));
  CHECK(error_code_of([] { Ontology::parse(doc({{{"name", "A"}}, {{"name", "A"}}})); }) == errc::kSchema);
  CHECK(error_code_of([] { Ontology::parse(doc({{{"name", "A"}, {"parents", {"Z"}}}})); }) == errc::kResolution);
  CHECK(error_code_of([] {
          Ontology::parse(doc({{{"name", "A"}, {"define", {{"concept", "Nope"}}}}}));
        }) == errc::kResolution);
  CHECK(error_code_of([] { Ontology::parse("{not json"); }) == errc::kParse);
  CHECK(error_code_of([] { Ontology::parse(doc({{{"name", "A"}, {"colour", "red"}}})); }) == errc::kSchema);
  CHECK(error_code_of([] {
          Ontology::parse(doc({{{"name", "A"}, {"items", {"q1=1"}}, {"define", {{"answerIn", {1}}}}}}));
        }) == errc::kSchema);
  // A defined concept referring to itself through its definition.
  CHECK(error_code_of([] {
          Ontology::parse(doc({{{"name", "A"}, {"define", {{"concept", "B"}}}},
                               {{"name", "B"}, {"define", {{"concept", "A"}}}}}));
        }) == errc::kCycle);
}

TEST_CASE("unknown concepts are resolution errors at lookup") {
  auto cs = fixtures::case_study();
  ExtensionIndex idx(*cs.ontology, *cs.dataset);
  CHECK(error_code_of([&] { idx.of_concept("NoSuchConcept"); }) == errc::kResolution);
  CHECK(error_code_of([&] { cs.ontology->concept_named("NoSuchConcept"); }) == errc::kLookup);
}

TEST_CASE("concept expression json round trip") {
  auto e = ConceptExpr::any_of({ConceptExpr::all_of({ConceptExpr::ref("A"), ConceptExpr::answer_in({4, 3, 3})}),
                                ConceptExpr::ref("B")});
  CHECK(e.operands[0].operands[1].values == std::vector<std::int32_t>{3, 4});
  CHECK(parse_concept_expr(format_concept_expr(e)) == e);
  CHECK(parse_concept_expr("\"Q1\"") == ConceptExpr::ref("Q1"));
  CHECK(error_code_of([] { parse_concept_expr("{\"or\": [], \"and\": []}"); }) == errc::kSchema);
  CHECK(error_code_of([] { parse_concept_expr("{\"or\""); }) == errc::kParse);
}

TEST_CASE("or, and and answerIn follow set algebra") {
  auto cs = fixtures::case_study();
  ExtensionIndex idx(*cs.ontology, *cs.dataset);
  std::vector<std::string> names;
  for (const auto& c : cs.ontology->concepts()) names.push_back(c.name);
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> pick(0, names.size() - 1);
  for (int round = 0; round < 300; ++round) {
    auto a = ConceptExpr::ref(names[pick(rng)]), b = ConceptExpr::ref(names[pick(rng)]);
    const auto& ea = idx.of_concept(a.concept_name);
    const auto& eb = idx.of_concept(b.concept_name);
    CHECK(idx.evaluate(ConceptExpr::any_of({a, b})) == set_union(ea, eb));
    CHECK(idx.evaluate(ConceptExpr::all_of({a, b})) == set_intersection(ea, eb));
    Itemset ones;
    for (auto i : ea) {
      if (i.value == 1 || i.value == 99) ones.push_back(i);
    }
    CHECK(idx.evaluate(ConceptExpr::all_of({a, ConceptExpr::answer_in({1, 99})})) == ones);
  }
}

TEST_CASE("random DAG: leaves and extensions match a reachability oracle") {
  std::mt19937_64 rng(99);
  for (int round = 0; round < 60; ++round) {
    const int n = 2 + static_cast<int>(rng() % 25);
    std::vector<std::set<int>> parents(n);
    for (int c = 1; c < n; ++c) {
      for (int p = 0; p < c; ++p) {
        if (rng() % 4 == 0) parents[c].insert(p);
      }
    }
    std::vector<std::vector<int>> children(n);
    for (int c = 0; c < n; ++c) {
      for (int p : parents[c]) children[p].push_back(c);
    }
    std::vector<std::string> header;
    for (int c = 0; c < n; ++c) header.push_back("x" + std::to_string(c));
    json concepts = json::array();
    for (int c = 0; c < n; ++c) {
      json entry{{"name", "C" + std::to_string(c)}};
      if (!parents[c].empty()) {
        json ps = json::array();
        for (int p : parents[c]) ps.push_back("C" + std::to_string(p));
        entry["parents"] = ps;
      }
      if (children[c].empty()) entry["items"] = {"x" + std::to_string(c) + "=1", "x" + std::to_string(c) + "=2"};
      concepts.push_back(entry);
    }
    auto onto = Ontology::parse(doc(concepts));
    Dataset ds(header, {Itemset{}});
    ExtensionIndex idx(onto, ds);
    for (int c = 0; c < n; ++c) {
      std::set<int> seen{c};
      std::queue<int> q;
      q.push(c);
      while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (int v : children[u]) {
          if (seen.insert(v).second) q.push(v);
        }
      }
      std::set<std::string> leaves;
      std::set<Item> items;
      for (int v : seen) {
        if (!children[v].empty()) continue;
        leaves.insert("C" + std::to_string(v));
        items.insert({static_cast<std::uint32_t>(v), 1});
        items.insert({static_cast<std::uint32_t>(v), 2});
      }
      auto got = onto.leaves_under("C" + std::to_string(c));
      CHECK(std::set<std::string>(got.begin(), got.end()) == leaves);
      CHECK(idx.of_concept("C" + std::to_string(c)) == Itemset(items.begin(), items.end()));
      for (int p : parents[c]) {
        CHECK(contains_all(idx.of_concept("C" + std::to_string(p)), idx.of_concept("C" + std::to_string(c))));
      }
    }
  }
}

TEST_CASE("validation against a dataset") {
  auto cs = fixtures::case_study();
  auto report = validate_against(*cs.ontology, *cs.dataset);
  CHECK_FALSE(report.fatal);

  auto onto = Ontology::parse(doc({{{"name", "A"}, {"items", {"q1=1", "q1=7", "zz=1"}}}}));
  auto ds = Dataset::load_csv("q1,q2\n1,5\n");
  auto r = validate_against(onto, ds);
  CHECK_FALSE(r.fatal);
  CHECK(std::find(r.unmapped.begin(), r.unmapped.end(), "q2=5") != r.unmapped.end());
  CHECK(std::find(r.phantom.begin(), r.phantom.end(), "q1=7") != r.phantom.end());

  auto disjoint = Ontology::parse(doc({{{"name", "A"}, {"items", {"zz=1"}}}}));
  CHECK(validate_against(disjoint, ds).fatal);
}

TEST_CASE("digest depends on the source text") {
  auto a = Ontology::parse(doc({{{"name", "A"}}}));
  auto b = Ontology::parse(doc({{{"name", "B"}}}));
  CHECK(a.digest() != b.digest());
  CHECK(a.digest() == Ontology::parse(a.source()).digest());
}
