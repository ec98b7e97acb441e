#include <httplib.h>
#include <nlohmann/json.hpp>
#include <atomic>
#include <thread>

#include "doctest.h"
#include "fixtures.hpp"
#include "ontorules/server.hpp"

using namespace ontorules;
using json = nlohmann::json;

namespace {

struct Client {
  Workbench wb;

  json call(const std::string& method, const std::string& path, const std::string& body = {},
            std::map<std::string, std::string> query = {}, const std::string& content_type = "application/json",
            int expect = 0) {
    ApiRequest req{method, path, std::move(query), body, content_type};
    last = wb.handle(req);
    if (expect != 0) CHECK_MESSAGE(last.status == expect, method << " " << path << " -> " << last.body);
    return last.content_type == "application/json" ? json::parse(last.body) : json(last.body);
  }
  json post(const std::string& path, const json& body, int expect = 0) { return call("POST", path, body.dump(), {}, "application/json", expect); }

  ApiResponse last;
};

struct CaseStudySetup {
  std::string dataset, ontology, ruleset, session;
};

CaseStudySetup setup(Client& c) {
  CaseStudySetup s;
  s.dataset = c.call("POST", "/datasets", fixtures::read("case_study/survey.csv"), {}, "text/csv", 201)["id"];
  s.ontology = c.call("POST", "/ontologies", fixtures::read("case_study/ontology.json"), {{"dataset", s.dataset}},
                      "application/json", 201)["id"];
  s.ruleset = c.call("POST", "/rulesets", fixtures::read("case_study/rules.tsv"), {{"dataset", s.dataset}},
                     "text/plain", 201)["ruleset"];
  s.session = c.post("/sessions", {{"ruleset", s.ruleset}, {"ontology", s.ontology}}, 201)["session"];
  return s;
}

}  // namespace

TEST_CASE("health and unknown routes") {
  Client c;
  CHECK(c.call("GET", "/healthz", {}, {}, "", 200)["status"] == "ok");
  auto err = c.call("GET", "/nowhere", {}, {}, "", 404);
  CHECK(err["error"]["code"] == "not_found");
  c.call("GET", "/sessions/s99", {}, {}, "", 404);
}

TEST_CASE("dataset upload and stats") {
  Client c;
  auto r = c.call("POST", "/datasets", fixtures::kExtractCsv, {}, "text/csv", 201);
  CHECK(r["stats"]["transactions"] == 3);
  CHECK(r["stats"]["attributes"] == 10);
  auto again = c.post("/datasets", {{"csv", fixtures::kExtractCsv}}, 201);
  CHECK(again["id"] == r["id"]);
  auto bad = c.call("POST", "/datasets", "a,b\n1,x\n", {}, "text/csv", 400);
  CHECK(bad["error"]["code"] == "parse_error");
  CHECK(bad["error"]["location"]["line"] == 2);
  CHECK(c.call("POST", "/datasets", "a,b\n", {}, "text/csv", 400)["error"]["code"] == "empty_dataset");
}

TEST_CASE("ontology upload, concepts and extensions") {
  Client c;
  auto s = setup(c);
  auto concepts = c.call("GET", "/ontologies/" + s.ontology + "/concepts", {}, {}, "", 200);
  CHECK(concepts["roots"] == json::array({"Attributes", "Topic"}));
  auto q1 = c.call("GET", "/ontologies/" + s.ontology + "/extension", {}, {{"expr", "Q1"}, {"dataset", s.dataset}},
                   "", 200);
  CHECK(q1["count"] == 6);
  CHECK(q1["items"] == json::array({"q1=1", "q1=2", "q1=3", "q1=4", "q1=95", "q1=99"}));
  auto sat = c.call("GET", "/ontologies/" + s.ontology + "/extension", {},
                    {{"expr", R"({"concept": "SatisfComfortApartment"})"}}, "", 200);
  CHECK(sat["count"] == 10);
  auto cyc = c.call("POST", "/ontologies",
                    R"({"version": 1, "concepts": [{"name": "A", "parents": ["B"]}, {"name": "B", "parents": ["A"]}]})",
                    {}, "application/json", 400);
  CHECK(cyc["error"]["code"] == "cycle_error");
  c.call("GET", "/ontologies/" + s.ontology + "/extension", {}, {{"expr", "Nope"}}, "", 400);
}

TEST_CASE("mining through the API") {
  Client c;
  auto ds = c.call("POST", "/datasets", fixtures::kExtractCsv, {}, "text/csv", 201)["id"];
  auto r = c.post("/mine", {{"dataset", ds}, {"params", {{"min_sup", 0.6}, {"min_conf", 0.9}}}}, 201);
  auto again = c.post("/mine", {{"dataset", ds}, {"params", {{"min_sup", 0.6}, {"min_conf", 0.9}}}}, 201);
  CHECK(r["ruleset"] == again["ruleset"]);
  auto page = c.call("GET", "/rulesets/" + r["ruleset"].get<std::string>(), {}, {{"limit", "2"}}, "", 200);
  CHECK(page["total"] == r["count"]);
  CHECK(page["rules"].size() <= 2);
  auto bad = c.post("/mine", {{"dataset", ds}, {"params", {{"min_sup", 0.6}, {"max_sup", 0.5}}}}, 400);
  CHECK(bad["error"]["code"] == "config_error");
}

TEST_CASE("session workflow over the dispatcher") {
  Client c;
  auto s = setup(c);
  const std::string base = "/sessions/" + s.session;
  auto added = c.call("POST", base + "/schemas", fixtures::read("case_study/operators.rsl"), {}, "text/plain", 201);
  CHECK(added["schemas"].size() == 5);
  CHECK(added["operators"].size() == 5);

  c.post(base + "/apply", {{"op", "prune"}, {"schema", "RS1"}}, 200);
  c.post(base + "/apply", {{"op", "prune"}, {"schema", "RS2"}}, 200);
  c.post(base + "/apply", {{"op", "conform"}, {"schema", "RS3"}}, 200);
  c.post(base + "/apply", {{"op", "conform"}, {"schema", "RS4"}}, 200);
  auto u = c.post(base + "/apply", {{"op", "unexpected"}, {"scope", "condition"}, {"schema", "RS5"}}, 200);
  CHECK(u["entry"]["after_count"] == 4);
  CHECK(u["working_count"] == 17);

  auto result = c.call("GET", "/results/" + u["result"].get<std::string>(), {}, {{"sort", "confidence"}}, "", 200);
  REQUIRE(result["rules"].size() == 4);
  CHECK(result["rules"][0]["confidence_text"] == "0.852");

  auto log = c.call("GET", base + "/log", {}, {}, "", 200);
  std::vector<int> counts;
  for (const auto& e : log["log"]) counts.push_back(e["after_count"]);
  CHECK(counts == std::vector<int>{19, 17, 3, 2, 4});

  auto bad = c.post(base + "/apply", {{"op", "exception"}, {"schema", "RS3"}}, 400);
  CHECK(bad["error"]["code"] == "validity_error");
  CHECK(c.call("GET", base + "/log", {}, {}, "", 200)["log"].size() == 5);

  auto report = c.call("GET", base + "/report", {}, {}, "", 200);
  CHECK(report["results"].size() == 3);
  auto csv = c.call("GET", base + "/report", {}, {{"format", "csv"}}, "", 200);
  CHECK(c.last.content_type == "text/csv");
  auto persisted = c.call("GET", base + "/persist", {}, {}, "", 200);
  CHECK(persisted["log"].size() == 5);

  for (int i = 0; i < 5; ++i) c.call("POST", base + "/undo", {}, {}, "", 200);
  auto empty = c.call("POST", base + "/undo", {}, {}, "", 400);
  CHECK(empty["error"]["code"] == "nothing_to_undo");
  CHECK(c.call("GET", base, {}, {}, "", 200)["working_count"] == 22);
}

TEST_CASE("structured schema upload and errors") {
  Client c;
  auto s = setup(c);
  const std::string base = "/sessions/" + s.session;
  json body = {{"schemas",
                {{{"name", "X"}, {"implicative", true},
                  {"antecedent", {{{"concept", "SatAccess"}, {"negated", false}}}},
                  {"consequent", {{{"concept", "SatDocuments"}, {"negated", false}}}}}}}};
  auto r = c.post(base + "/schemas", body, 201);
  CHECK(r["schemas"][0]["text"] == "<SatAccess -> SatDocuments>");
  auto e = c.post(base + "/apply", {{"op", "exception"}, {"schema", "X"}}, 200);
  CHECK(e["entry"]["after_count"] == 1);

  auto syntax = c.call("POST", base + "/schemas", "schema Y: <A,, B>\n", {}, "text/plain", 400);
  CHECK(syntax["error"]["code"] == "parse_error");
  CHECK(syntax["error"]["location"]["line"] == 1);
  auto unknown = c.call("POST", base + "/schemas", "schema Y: <Nope>\n", {}, "text/plain", 400);
  CHECK(unknown["error"]["code"] == "resolution_error");
  c.post(base + "/apply", {{"op", "conform"}, {"schema", "Missing"}}, 400);
  c.call("POST", base + "/apply", "{not json", {}, "application/json", 400);
}

TEST_CASE("concurrent mutations stay consistent") {
  Client c;
  auto s = setup(c);
  const std::string base = "/sessions/" + s.session;
  c.call("POST", base + "/schemas", fixtures::read("case_study/operators.rsl"), {}, "text/plain", 201);
  std::atomic<int> ok{0}, conflict{0}, other{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&] {
      for (int i = 0; i < 25; ++i) {
        ApiRequest req{"POST", base + "/apply", {}, json{{"op", "conform"}, {"schema", "RS4"}}.dump(), "application/json"};
        auto resp = c.wb.handle(req);
        (resp.status == 200 ? ok : resp.status == 409 ? conflict : other)++;
        ApiRequest read{"GET", base + "/log", {}, {}, ""};
        if (c.wb.handle(read).status != 200) other++;
      }
    });
  }
  for (auto& t : threads) t.join();
  CHECK(other == 0);
  CHECK(ok + conflict == 200);
  CHECK(c.call("GET", base + "/log", {}, {}, "", 200)["log"].size() == static_cast<std::size_t>(ok.load()));
}

TEST_CASE("loopback HTTP server") {
  Workbench wb;
  HttpServer server(wb, ServeOptions{"127.0.0.1", 0, "*", ""});
  REQUIRE(server.bind());
  const int port = server.port();
  REQUIRE(port > 0);
  std::thread serving([&] { server.serve(); });

  httplib::Client http("127.0.0.1", port);
  auto health = http.Get("/healthz");
  REQUIRE(health);
  CHECK(health->status == 200);
  CHECK(health->get_header_value("Access-Control-Allow-Origin") == "*");

  auto ds = http.Post("/datasets", fixtures::read("case_study/survey.csv"), "text/csv");
  REQUIRE(ds);
  CHECK(ds->status == 201);
  const std::string ds_id = json::parse(ds->body)["id"];
  auto onto = http.Post("/ontologies", fixtures::read("case_study/ontology.json"), "application/json");
  REQUIRE(onto);
  const std::string onto_id = json::parse(onto->body)["id"];
  auto ext = http.Get("/ontologies/" + onto_id + "/extension?expr=Q1&dataset=" + ds_id);
  REQUIRE(ext);
  CHECK(json::parse(ext->body)["count"] == 6);
  auto missing = http.Get("/sessions/nope/log");
  REQUIRE(missing);
  CHECK(missing->status == 404);

  // A second server on the same port must fail to bind.
  HttpServer second(wb, ServeOptions{"127.0.0.1", port, "*", ""});
  CHECK_FALSE(second.bind());

  server.stop();
  serving.join();
}

TEST_CASE("pages concatenate to the full canonical rule set") {
  Client c;
  auto ds = c.call("POST", "/datasets", fixtures::kExtractCsv, {}, "text/csv", 201)["id"];
  auto mined = c.post("/mine", {{"dataset", ds}, {"params", {{"min_sup", 0.6}, {"min_conf", 0.5}, {"max_consequent", 2}}}}, 201);
  const std::string id = mined["ruleset"];
  const std::size_t total = mined["count"];
  REQUIRE(total > 10);
  auto full = c.call("GET", "/rulesets/" + id, {}, {{"limit", std::to_string(total)}}, "", 200)["rules"];
  json joined = json::array();
  for (std::size_t offset = 0; offset < total; offset += 7) {
    auto page = c.call("GET", "/rulesets/" + id, {}, {{"offset", std::to_string(offset)}, {"limit", "7"}}, "", 200);
    for (const auto& r : page["rules"]) joined.push_back(r);
  }
  CHECK(joined == full);
  auto beyond = c.call("GET", "/rulesets/" + id, {}, {{"offset", std::to_string(total + 5)}}, "", 200);
  CHECK(beyond["rules"].empty());
  c.call("GET", "/rulesets/" + id, {}, {{"limit", "x"}}, "", 400);
  c.call("GET", "/rulesets/r0000", {}, {}, "", 404);
}
