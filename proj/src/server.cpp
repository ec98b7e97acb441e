#include "ontorules/server.hpp"

#include <sys/socket.h>

#include <algorithm>
#include <charconv>
#include <set>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "ontorules/digest.hpp"
#include "ontorules/error.hpp"
#include "ontorules/miner.hpp"
#include "ontorules/operators.hpp"
#include "ontorules/report.hpp"
#include "ontorules/schema.hpp"

namespace ontorules {

using json = nlohmann::json;

namespace {

// Thrown inside handlers to produce a non-2xx response.
struct ApiFailure {
  int status;
  std::string code;
  std::string message;
  std::optional<SourceLocation> location;
};

[[noreturn]] void not_found(const std::string& what) { throw ApiFailure{404, "not_found", what + " not found", {}}; }
[[noreturn]] void bad_request(const std::string& message) { throw ApiFailure{400, "bad_request", message, {}}; }

ApiResponse json_response(int status, const json& body) { return {status, body.dump(), "application/json"}; }

ApiResponse error_response(const ApiFailure& f) {
  json err = {{"code", f.code}, {"message", f.message}, {"location", nullptr}};
  if (f.location) err["location"] = {{"line", f.location->line}, {"column", f.location->column}};
  return json_response(f.status, {{"error", err}});
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < path.size()) {
    std::size_t slash = path.find('/', start);
    if (slash == std::string::npos) slash = path.size();
    if (slash > start) out.push_back(path.substr(start, slash - start));
    start = slash + 1;
  }
  return out;
}

json parse_body(const ApiRequest& req) {
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    bad_request(std::string("request body is not valid JSON: ") + e.what());
  }
}

std::size_t query_size(const ApiRequest& req, const std::string& key, std::size_t fallback) {
  auto it = req.query.find(key);
  if (it == req.query.end() || it->second.empty()) return fallback;
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
  if (ec != std::errc() || ptr != it->second.data() + it->second.size()) {
    bad_request("query parameter '" + key + "' must be a non-negative integer");
  }
  return v;
}

json items_json(const Dataset& ds, const Itemset& items) {
  json out = json::array();
  for (const auto& i : items) out.push_back(ds.render(i));
  return out;
}

json rule_json(const Dataset& ds, const AssociationRule& r) {
  return {{"antecedent", items_json(ds, r.antecedent)},
          {"consequent", items_json(ds, r.consequent)},
          {"count_xy", r.count_xy},
          {"count_x", r.count_x},
          {"n", r.n},
          {"support", r.support().value()},
          {"confidence", r.confidence().value()},
          {"support_text", format_decimal(r.support())},
          {"confidence_text", format_decimal(r.confidence())}};
}

json entry_json(const LogEntry& e) {
  return {{"seq", e.seq},
          {"op", to_string(e.op.kind)},
          {"scope", e.op.kind == OperatorKind::kUnexpected ? json(to_string(e.op.scope)) : json(nullptr)},
          {"schema", e.op.schema},
          {"mode", to_string(e.mode)},
          {"before_count", e.before_count},
          {"after_count", e.after_count},
          {"result_name", e.result_name ? json(*e.result_name) : json(nullptr)}};
}

json schema_json(const RuleSchema& s) {
  auto terms = [](const std::vector<SchemaTerm>& ts) {
    json out = json::array();
    for (const auto& t : ts) out.push_back({{"concept", t.concept_name}, {"negated", t.negated}});
    return out;
  };
  return {{"name", s.name},
          {"text", format_schema(s)},
          {"implicative", s.implicative},
          {"antecedent", terms(s.antecedent)},
          {"consequent", terms(s.consequent)}};
}

RuleSchema schema_from_json(const json& j) {
  RuleSchema s;
  s.name = j.at("name").get<std::string>();
  s.implicative = j.value("implicative", j.contains("consequent") && !j["consequent"].empty());
  auto terms = [](const json& arr) {
    std::vector<SchemaTerm> out;
    for (const auto& t : arr) {
      if (t.is_string()) {
        out.push_back({t.get<std::string>(), false});
      } else {
        out.push_back({t.at("concept").get<std::string>(), t.value("negated", false)});
      }
    }
    return out;
  };
  s.antecedent = terms(j.at("antecedent"));
  if (j.contains("consequent")) s.consequent = terms(j["consequent"]);
  return s;
}

}  // namespace

struct Workbench::Impl {
  struct StoredRules {
    std::shared_ptr<const RuleSet> rules;
    std::string dataset_id;
    RuleOrigin origin;
  };
  struct SessionSlot {
    std::shared_mutex mutex;
    std::unique_ptr<Session> session;
    std::string dataset_id;
  };

  std::shared_mutex mutex;
  std::map<std::string, std::shared_ptr<const Dataset>> datasets;
  std::map<std::string, std::shared_ptr<const Ontology>> ontologies;
  std::map<std::string, StoredRules> rulesets;
  std::map<std::string, std::shared_ptr<SessionSlot>> sessions;
  std::size_t next_session = 1;

  std::shared_ptr<const Dataset> dataset(const std::string& id) {
    std::shared_lock lock(mutex);
    auto it = datasets.find(id);
    if (it == datasets.end()) not_found("dataset '" + id + "'");
    return it->second;
  }

  std::shared_ptr<const Ontology> ontology(const std::string& id) {
    std::shared_lock lock(mutex);
    auto it = ontologies.find(id);
    if (it == ontologies.end()) not_found("ontology '" + id + "'");
    return it->second;
  }

  StoredRules ruleset(const std::string& id) {
    std::shared_lock lock(mutex);
    auto it = rulesets.find(id);
    if (it == rulesets.end()) not_found("rule set '" + id + "'");
    return it->second;
  }

  std::shared_ptr<SessionSlot> slot(const std::string& id) {
    std::shared_lock lock(mutex);
    auto it = sessions.find(id);
    if (it == sessions.end()) not_found("session '" + id + "'");
    return it->second;
  }

  std::string add_dataset(Dataset ds) {
    const std::string id = content_id("d", ds.to_csv());
    std::unique_lock lock(mutex);
    datasets.try_emplace(id, std::make_shared<const Dataset>(std::move(ds)));
    return id;
  }

  // Content-addressed: identical rules over the same dataset share an id.
  std::string add_rules(const RuleSet& rules, const std::string& dataset_id, const Dataset& ds, RuleOrigin origin) {
    const std::string id = content_id("r", dataset_id + "\n" + write_rules(RuleSet{rules.rules, {}}, ds));
    std::unique_lock lock(mutex);
    rulesets.try_emplace(id, StoredRules{std::make_shared<const RuleSet>(rules), dataset_id, std::move(origin)});
    return id;
  }

  ApiResponse paged_rules(const std::string& id, const ApiRequest& req) {
    StoredRules stored = ruleset(id);
    auto ds = dataset(stored.dataset_id);
    const std::size_t total = stored.rules->size();
    const std::size_t offset = std::min(query_size(req, "offset", 0), total);
    const std::size_t limit = query_size(req, "limit", 100);
    std::string sort = req.query.count("sort") ? req.query.at("sort") : "canonical";
    std::vector<const AssociationRule*> order;
    order.reserve(total);
    for (const auto& r : stored.rules->rules) order.push_back(&r);
    if (sort == "confidence") {
      std::stable_sort(order.begin(), order.end(),
                       [](const AssociationRule* a, const AssociationRule* b) { return display_less(*a, *b); });
    } else if (sort != "canonical") {
      bad_request("sort must be 'canonical' or 'confidence'");
    }
    json rules = json::array();
    for (std::size_t i = offset; i < total && i - offset < limit; ++i) rules.push_back(rule_json(*ds, *order[i]));
    return json_response(200, {{"id", id},
                               {"total", total},
                               {"offset", offset},
                               {"limit", limit},
                               {"sort", sort},
                               {"provenance", stored.rules->provenance},
                               {"rules", rules}});
  }

  ApiResponse route(const ApiRequest& req);
  ApiResponse session_route(const ApiRequest& req, const std::vector<std::string>& seg);
};

ApiResponse Workbench::Impl::route(const ApiRequest& req) {
  const auto seg = split_path(req.path);
  const std::string& m = req.method;
  if (seg.empty()) not_found("route '" + req.path + "'");

  if (seg[0] == "healthz" && seg.size() == 1 && m == "GET") return json_response(200, {{"status", "ok"}});

  if (seg[0] == "datasets") {
    if (seg.size() == 1 && m == "POST") {
      std::string csv = req.body;
      if (req.content_type.find("json") != std::string::npos) csv = parse_body(req).at("csv").get<std::string>();
      Dataset ds = Dataset::load_csv(csv);
      const DatasetStats s = stats(ds);
      const std::string id = add_dataset(std::move(ds));
      json values = json::object();
      for (const auto& [attr, vals] : s.values) values[attr] = vals;
      return json_response(201, {{"id", id},
                                 {"stats",
                                  {{"transactions", s.transactions},
                                   {"attributes", s.attributes},
                                   {"distinct_items", s.distinct_items},
                                   {"values", values}}}});
    }
    if (seg.size() == 2 && m == "GET") {
      auto ds = dataset(seg[1]);
      const DatasetStats s = stats(*ds);
      return json_response(200, {{"id", seg[1]}, {"transactions", s.transactions}, {"attributes", s.attributes},
                                 {"distinct_items", s.distinct_items}});
    }
  }

  if (seg[0] == "ontologies") {
    if (seg.size() == 1 && m == "POST") {
      auto onto = std::make_shared<const Ontology>(Ontology::parse(req.body));
      const std::string id = content_id("o", onto->source());
      json body = {{"id", id}, {"concepts", onto->concepts().size()}, {"roots", onto->roots()}};
      if (auto it = req.query.find("dataset"); it != req.query.end()) {
        const MappingReport report = validate_against(*onto, *dataset(it->second));
        body["validation"] = {{"unmapped", report.unmapped}, {"phantom", report.phantom}, {"fatal", report.fatal}};
      }
      {
        std::unique_lock lock(mutex);
        ontologies.try_emplace(id, std::move(onto));
      }
      return json_response(201, body);
    }
    if (seg.size() == 3 && seg[2] == "concepts" && m == "GET") {
      auto onto = ontology(seg[1]);
      json concepts = json::array();
      for (const auto& c : onto->concepts()) {
        json items = json::array();
        for (const auto& i : c.items) items.push_back(i.str());
        json entry = {{"name", c.name}, {"kind", to_string(c.kind)}, {"parents", c.parents},
                      {"children", c.children}, {"items", items}};
        entry["define"] = c.definition ? json::parse(format_concept_expr(*c.definition)) : json(nullptr);
        concepts.push_back(std::move(entry));
      }
      return json_response(200, {{"id", seg[1]}, {"roots", onto->roots()}, {"concepts", concepts}});
    }
    if (seg.size() == 3 && seg[2] == "extension" && m == "GET") {
      auto onto = ontology(seg[1]);
      auto it = req.query.find("expr");
      if (it == req.query.end() || it->second.empty()) bad_request("missing 'expr' query parameter");
      const std::string& text = it->second;
      ConceptExpr expr = (text.front() == '{' || text.front() == '"') ? parse_concept_expr(text) : ConceptExpr::ref(text);
      std::shared_ptr<const Dataset> ds;
      if (auto d = req.query.find("dataset"); d != req.query.end()) {
        ds = dataset(d->second);
      } else {
        // Without a dataset the vocabulary is the ontology's own mapping.
        std::vector<std::string> attrs;
        std::set<std::string> seen;
        for (const auto& mi : onto->mapped_items()) {
          if (seen.insert(mi.attribute).second) attrs.push_back(mi.attribute);
        }
        ds = std::make_shared<const Dataset>(std::move(attrs), std::vector<Itemset>{});
      }
      const Itemset ext = ExtensionIndex(*onto, *ds).evaluate(expr);
      return json_response(200, {{"expr", json::parse(format_concept_expr(expr))},
                                 {"count", ext.size()},
                                 {"items", items_json(*ds, ext)}});
    }
  }

  if (seg[0] == "mine" && seg.size() == 1 && m == "POST") {
    const json body = parse_body(req);
    const std::string dataset_id = body.at("dataset").get<std::string>();
    auto ds = dataset(dataset_id);
    MiningParams p;
    if (body.contains("params")) {
      const json& jp = body["params"];
      p.min_sup = jp.value("min_sup", p.min_sup);
      p.max_sup = jp.value("max_sup", p.max_sup);
      p.min_conf = jp.value("min_conf", p.min_conf);
      p.max_consequent_len = jp.value("max_consequent", p.max_consequent_len);
    }
    RuleSet rules = mine_rules(*ds, p);
    RuleOrigin origin;
    origin.kind = RuleOrigin::Kind::kMined;
    origin.params = p;
    const std::string id = add_rules(rules, dataset_id, *ds, origin);
    return json_response(201, {{"ruleset", id}, {"count", rules.size()}});
  }

  if ((seg[0] == "rulesets" || seg[0] == "results") && seg.size() == 2 && m == "GET") {
    return paged_rules(seg[1], req);
  }

  if (seg[0] == "rulesets" && seg.size() == 1 && m == "POST") {
    // Upload of a rules file against a registered dataset.
    auto it = req.query.find("dataset");
    if (it == req.query.end()) bad_request("missing 'dataset' query parameter");
    auto ds = dataset(it->second);
    RuleSet rules = read_rules(req.body, *ds);
    const std::string id = add_rules(rules, it->second, *ds, RuleOrigin{});
    return json_response(201, {{"ruleset", id}, {"count", rules.size()}});
  }

  if (seg[0] == "sessions") return session_route(req, seg);

  not_found("route '" + m + " " + req.path + "'");
}

ApiResponse Workbench::Impl::session_route(const ApiRequest& req, const std::vector<std::string>& seg) {
  const std::string& m = req.method;
  if (seg.size() == 1 && m == "POST") {
    const json body = parse_body(req);
    StoredRules stored = ruleset(body.at("ruleset").get<std::string>());
    const std::string dataset_id = body.value("dataset", stored.dataset_id);
    if (dataset_id != stored.dataset_id) bad_request("rule set was built over dataset '" + stored.dataset_id + "'");
    auto ds = dataset(dataset_id);
    auto onto = ontology(body.at("ontology").get<std::string>());
    SessionInputs inputs;
    inputs.rules = stored.origin;
    std::string id;
    {
      std::unique_lock lock(mutex);
      id = "s" + std::to_string(next_session++);
    }
    auto slot = std::make_shared<SessionSlot>();
    slot->session = std::make_unique<Session>(ds, onto, *stored.rules, inputs, id);
    slot->dataset_id = dataset_id;
    const std::size_t count = slot->session->working_set().size();
    {
      std::unique_lock lock(mutex);
      sessions.emplace(id, slot);
    }
    return json_response(201, {{"session", id}, {"working_count", count}});
  }
  if (seg.size() < 2) not_found("route '" + req.path + "'");
  auto target = slot(seg[1]);
  const std::string action = seg.size() >= 3 ? seg[2] : "";

  auto exclusive = [&]() {
    std::unique_lock<std::shared_mutex> lock(target->mutex, std::try_to_lock);
    if (!lock.owns_lock()) {
      throw ApiFailure{409, "conflict", "session '" + seg[1] + "' is being modified by another request", {}};
    }
    return lock;
  };
  auto working_id = [&](const Session& s) {
    return add_rules(s.working_set(), target->dataset_id, s.dataset(), RuleOrigin{});
  };

  if (seg.size() == 2 && m == "GET") {
    std::shared_lock lock(target->mutex);
    const Session& s = *target->session;
    json schemas = json::array();
    for (const auto& sc : s.schemas()) schemas.push_back(schema_json(sc));
    return json_response(200, {{"session", s.id()},
                               {"initial_count", s.original().size()},
                               {"working_count", s.working_set().size()},
                               {"log_length", s.log().size()},
                               {"schemas", schemas}});
  }

  if (seg.size() == 3 && action == "schemas" && m == "POST") {
    auto lock = exclusive();
    Session& s = *target->session;
    std::vector<RuleSchema> schemas;
    std::vector<OperatorSpec> operators;
    if (req.content_type.find("json") != std::string::npos) {
      const json body = parse_body(req);
      if (body.contains("text")) {
        Script script = parse_script(body["text"].get<std::string>());
        schemas = std::move(script.schemas);
        operators = std::move(script.operators);
      } else {
        for (const auto& j : body.at("schemas")) schemas.push_back(schema_from_json(j));
      }
    } else {
      Script script = parse_script(req.body);
      schemas = std::move(script.schemas);
      operators = std::move(script.operators);
    }
    s.add_schemas(schemas);
    json out = json::array();
    for (const auto& sc : schemas) {
      json j = schema_json(sc);
      j["diagnostics"] = s.resolved(sc.name).diagnostics;
      out.push_back(std::move(j));
    }
    json ops = json::array();
    for (const auto& op : operators) ops.push_back(format_operator(op));
    return json_response(201, {{"schemas", out}, {"operators", ops}});
  }

  if (seg.size() == 3 && action == "apply" && m == "POST") {
    const json body = parse_body(req);
    OperatorSpec spec;
    spec.kind = parse_operator_kind(body.at("op").get<std::string>());
    if (body.contains("scope") && !body["scope"].is_null()) {
      if (spec.kind != OperatorKind::kUnexpected) bad_request("only 'unexpected' takes a scope");
      spec.scope = parse_scope(body["scope"].get<std::string>());
    }
    spec.schema = body.at("schema").get<std::string>();
    const MatchMode mode = parse_match_mode(body.value("mode", "any"));
    std::optional<std::string> name;
    if (body.contains("name") && !body["name"].is_null()) name = body["name"].get<std::string>();

    auto lock = exclusive();
    Session& s = *target->session;
    const LogEntry entry = s.execute(spec, mode, name);
    json result = nullptr;
    if (entry.result_name) result = add_rules(s.result(*entry.result_name), target->dataset_id, s.dataset(), RuleOrigin{});
    return json_response(200, {{"entry", entry_json(entry)},
                               {"result", result},
                               {"working_count", s.working_set().size()},
                               {"working_set", working_id(s)}});
  }

  if (seg.size() == 3 && action == "undo" && m == "POST") {
    auto lock = exclusive();
    Session& s = *target->session;
    s.undo();
    return json_response(200, {{"working_count", s.working_set().size()},
                               {"log_length", s.log().size()},
                               {"working_set", working_id(s)}});
  }

  if (seg.size() == 3 && action == "log" && m == "GET") {
    std::shared_lock lock(target->mutex);
    const Session& s = *target->session;
    json log = json::array();
    for (const auto& e : s.log()) {
      json j = entry_json(e);
      j["result"] = e.result_name ? json(add_rules(s.result(*e.result_name), target->dataset_id, s.dataset(), RuleOrigin{}))
                                  : json(nullptr);
      log.push_back(std::move(j));
    }
    return json_response(200, {{"session", s.id()},
                               {"initial_count", s.original().size()},
                               {"working_count", s.working_set().size()},
                               {"log", log}});
  }

  if (seg.size() == 3 && action == "report" && m == "GET") {
    std::shared_lock lock(target->mutex);
    auto it = req.query.find("format");
    const ReportFormat format = parse_report_format(it == req.query.end() ? "json" : it->second);
    return {200, export_report(*target->session, format),
            format == ReportFormat::kJson ? "application/json" : "text/csv"};
  }

  if (seg.size() == 3 && action == "persist" && m == "GET") {
    std::shared_lock lock(target->mutex);
    return {200, target->session->persist(), "application/json"};
  }

  not_found("route '" + m + " " + req.path + "'");
}

Workbench::Workbench() : impl_(std::make_unique<Impl>()) {}
Workbench::~Workbench() = default;

ApiResponse Workbench::handle(const ApiRequest& request) {
  try {
    return impl_->route(request);
  } catch (const ApiFailure& f) {
    return error_response(f);
  } catch (const Error& e) {
    return error_response({400, e.code(), e.what(), e.location()});
  } catch (const json::exception& e) {
    return error_response({400, "bad_request", std::string("malformed request: ") + e.what(), {}});
  } catch (const std::exception& e) {
    return error_response({500, "internal", e.what(), {}});
  }
}

std::string Workbench::preload_dataset(const std::string& path) {
  return impl_->add_dataset(Dataset::load_csv_file(path));
}

struct HttpServer::Impl {
  Workbench& workbench;
  ServeOptions options;
  httplib::Server server;
  int port = -1;

  Impl(Workbench& wb, ServeOptions opts) : workbench(wb), options(std::move(opts)) {}
};

HttpServer::HttpServer(Workbench& workbench, ServeOptions options)
    : impl_(std::make_unique<Impl>(workbench, std::move(options))) {
  auto& svr = impl_->server;
  // Exclusive binding: a second server on the same port must fail.
  svr.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  const std::string origin = impl_->options.cors_origin;
  svr.set_default_headers({{"Access-Control-Allow-Origin", origin},
                           {"Access-Control-Allow-Headers", "Content-Type"},
                           {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  if (!impl_->options.assets_dir.empty()) svr.set_mount_point("/ui", impl_->options.assets_dir);

  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    ApiRequest api;
    api.method = req.method;
    api.path = req.path;
    for (const auto& [k, v] : req.params) api.query[k] = v;
    api.body = req.body;
    api.content_type = req.get_header_value("Content-Type");
    ApiResponse out = impl_->workbench.handle(api);
    res.status = out.status;
    res.set_content(out.body, out.content_type);
  };
  svr.Get(".*", handler);
  svr.Post(".*", handler);
  svr.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
}

HttpServer::~HttpServer() { stop(); }

bool HttpServer::bind() {
  if (impl_->options.port == 0) {
    impl_->port = impl_->server.bind_to_any_port(impl_->options.host);
    return impl_->port > 0;
  }
  if (!impl_->server.bind_to_port(impl_->options.host, impl_->options.port)) return false;
  impl_->port = impl_->options.port;
  return true;
}

int HttpServer::port() const { return impl_->port; }

void HttpServer::serve() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace ontorules
