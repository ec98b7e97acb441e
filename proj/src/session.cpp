#include "ontorules/session.hpp"

#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>

#include <nlohmann/json.hpp>

#include "ontorules/digest.hpp"
#include "ontorules/error.hpp"

namespace ontorules {

using json = nlohmann::json;

namespace {

constexpr const char* kSessionFormat = "ontorules-session";

const char* origin_name(RuleOrigin::Kind kind) {
  switch (kind) {
    case RuleOrigin::Kind::kMined:
      return "mined";
    case RuleOrigin::Kind::kFile:
      return "file";
    case RuleOrigin::Kind::kInline:
      return "inline";
  }
  return "inline";
}

RuleOrigin::Kind parse_origin(const std::string& s) {
  if (s == "mined") return RuleOrigin::Kind::kMined;
  if (s == "file") return RuleOrigin::Kind::kFile;
  if (s == "inline") return RuleOrigin::Kind::kInline;
  throw Error(errc::kSchema, "unknown rule origin '" + s + "'");
}

json params_to_json(const MiningParams& p) {
  return {{"min_sup", p.min_sup}, {"max_sup", p.max_sup}, {"min_conf", p.min_conf},
          {"max_consequent", p.max_consequent_len}};
}

MiningParams params_from_json(const json& j) {
  MiningParams p;
  p.min_sup = j.at("min_sup").get<double>();
  p.max_sup = j.at("max_sup").get<double>();
  p.min_conf = j.at("min_conf").get<double>();
  p.max_consequent_len = j.at("max_consequent").get<std::size_t>();
  return p;
}

std::string rules_digest(const RuleSet& rules, const Dataset& dataset) {
  RuleSet bare{rules.rules, {}};
  return sha256_hex(write_rules(bare, dataset));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(errc::kIo, "cannot read '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

Session::Session(std::shared_ptr<const Dataset> dataset, std::shared_ptr<const Ontology> ontology, RuleSet rules,
                 SessionInputs inputs, std::string id)
    : id_(std::move(id)),
      dataset_(std::move(dataset)),
      ontology_(std::move(ontology)),
      inputs_(std::move(inputs)),
      original_(std::move(rules)) {
  if (!dataset_ || !ontology_) throw Error(errc::kOpen, "a session needs a dataset and an ontology");
  const MappingReport report = validate_against(*ontology_, *dataset_);
  if (report.fatal) {
    throw Error(errc::kOpen, "none of the ontology's mapped attributes exist in the dataset");
  }
  extensions_ = std::make_shared<const ExtensionIndex>(*ontology_, *dataset_);
  canonicalize(original_);
  working_ = original_;
}

void Session::add_schemas(const std::vector<RuleSchema>& schemas) {
  std::set<std::string> names;
  for (const auto& s : schemas_) names.insert(s.name);
  for (const auto& s : schemas) {
    s.validate();
    if (!names.insert(s.name).second) throw Error(errc::kSchema, "schema '" + s.name + "' is already defined");
    for (const auto* side : {&s.antecedent, &s.consequent}) {
      for (const auto& t : *side) {
        if (!ontology_->contains(t.concept_name)) {
          throw Error(errc::kResolution,
                      "schema '" + s.name + "' references unknown concept '" + t.concept_name + "'");
        }
      }
    }
  }
  schemas_.insert(schemas_.end(), schemas.begin(), schemas.end());
}

const RuleSchema& Session::schema(std::string_view name) const {
  for (const auto& s : schemas_) {
    if (s.name == name) return s;
  }
  throw Error(errc::kLookup, "unknown schema '" + std::string(name) + "'");
}

ResolvedSchema Session::resolved(std::string_view name) const { return resolve(schema(name), *extensions_); }

Session::State Session::apply_to(State state, const OperatorSpec& spec, MatchMode mode,
                                 std::optional<std::string> result_name) const {
  const ResolvedSchema rs = resolved(spec.schema);
  check_applicable(spec, rs.schema);

  LogEntry entry;
  entry.seq = state.log.empty() ? 1 : state.log.back().seq + 1;
  entry.op = spec;
  entry.mode = mode;
  entry.before_count = state.working.size();

  if (spec.kind == OperatorKind::kPrune) {
    if (result_name) throw Error(errc::kValidity, "prune replaces the working set and takes no result name");
    state.working = apply_prune(state.working, rs, mode);
    entry.after_count = state.working.size();
  } else {
    std::string name = result_name ? *result_name
                                   : std::string(to_string(spec.kind)) + "-" + spec.schema + "-" +
                                         std::to_string(entry.seq);
    if (name.empty()) throw Error(errc::kValidity, "result name must not be empty");
    if (state.results.count(name)) throw Error(errc::kValidity, "result name '" + name + "' is already used");
    RuleSet result = apply_operator(spec, state.working, rs, mode);
    entry.after_count = result.size();
    entry.result_name = name;
    state.results.emplace(std::move(name), std::move(result));
  }
  state.log.push_back(std::move(entry));
  return state;
}

LogEntry Session::execute(const OperatorSpec& spec, MatchMode mode, std::optional<std::string> result_name) {
  State next = apply_to(State{working_, results_, log_}, spec, mode, std::move(result_name));
  working_ = std::move(next.working);
  results_ = std::move(next.results);
  log_ = std::move(next.log);
  return log_.back();
}

void Session::undo() {
  if (log_.empty()) throw Error(errc::kNothingToUndo, "nothing to undo");
  State state{original_, {}, {}};
  for (std::size_t i = 0; i + 1 < log_.size(); ++i) {
    const LogEntry& e = log_[i];
    state = apply_to(std::move(state), e.op, e.mode,
                     e.op.kind == OperatorKind::kPrune ? std::nullopt : e.result_name);
  }
  working_ = std::move(state.working);
  results_ = std::move(state.results);
  log_ = std::move(state.log);
}

const RuleSet& Session::result(std::string_view name) const {
  auto it = results_.find(std::string(name));
  if (it == results_.end()) throw Error(errc::kLookup, "unknown result '" + std::string(name) + "'");
  return it->second;
}

std::string Session::persist() const {
  json doc;
  doc["format"] = kSessionFormat;
  doc["version"] = 1;
  doc["id"] = id_;
  doc["dataset"] = {{"path", inputs_.dataset_path}, {"digest", dataset_->digest()}};
  doc["ontology"] = {{"path", inputs_.ontology_path}, {"digest", ontology_->digest()}};
  json rules = {{"origin", origin_name(inputs_.rules.kind)},
                {"digest", rules_digest(original_, *dataset_)},
                {"count", original_.size()}};
  if (inputs_.rules.kind == RuleOrigin::Kind::kMined) rules["params"] = params_to_json(inputs_.rules.params);
  if (inputs_.rules.kind == RuleOrigin::Kind::kFile) rules["path"] = inputs_.rules.path;
  doc["rules"] = rules;
  doc["schemas"] = format_script(Script{schemas_, {}});
  json log = json::array();
  for (const auto& e : log_) {
    log.push_back({{"seq", e.seq},
                   {"op", to_string(e.op.kind)},
                   {"scope", e.op.kind == OperatorKind::kUnexpected ? json(to_string(e.op.scope)) : json(nullptr)},
                   {"schema", e.op.schema},
                   {"mode", to_string(e.mode)},
                   {"before", e.before_count},
                   {"after", e.after_count},
                   {"result", e.result_name ? json(*e.result_name) : json(nullptr)}});
  }
  doc["log"] = log;
  return doc.dump(2) + "\n";
}

Session Session::restore(std::string_view document, std::shared_ptr<const Dataset> dataset,
                         std::shared_ptr<const Ontology> ontology, RuleSet rules) {
  json doc;
  try {
    doc = json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    throw Error(errc::kParse, std::string("malformed session document: ") + e.what());
  }
  try {
    if (doc.at("format") != kSessionFormat || doc.at("version") != 1) {
      throw Error(errc::kSchema, "not a version 1 session document");
    }
    if (doc.at("dataset").at("digest") != dataset->digest()) {
      throw Error(errc::kDigestMismatch, "dataset differs from the one the session was saved with");
    }
    if (doc.at("ontology").at("digest") != ontology->digest()) {
      throw Error(errc::kDigestMismatch, "ontology differs from the one the session was saved with");
    }
    SessionInputs inputs;
    inputs.dataset_path = doc["dataset"].value("path", "");
    inputs.ontology_path = doc["ontology"].value("path", "");
    const json& r = doc.at("rules");
    inputs.rules.kind = parse_origin(r.at("origin").get<std::string>());
    if (inputs.rules.kind == RuleOrigin::Kind::kMined) inputs.rules.params = params_from_json(r.at("params"));
    if (inputs.rules.kind == RuleOrigin::Kind::kFile) inputs.rules.path = r.at("path").get<std::string>();

    Session s(std::move(dataset), std::move(ontology), std::move(rules), std::move(inputs),
              doc.value("id", ""));
    if (r.at("digest") != rules_digest(s.original_, *s.dataset_)) {
      throw Error(errc::kDigestMismatch, "recomputed rule set differs from the saved one");
    }
    s.add_schemas(parse_script(doc.at("schemas").get<std::string>()).schemas);
    for (const auto& e : doc.at("log")) {
      OperatorSpec spec;
      spec.kind = parse_operator_kind(e.at("op").get<std::string>());
      if (!e.at("scope").is_null()) spec.scope = parse_scope(e["scope"].get<std::string>());
      spec.schema = e.at("schema").get<std::string>();
      std::optional<std::string> name;
      if (!e.at("result").is_null() && spec.kind != OperatorKind::kPrune) name = e["result"].get<std::string>();
      LogEntry got = s.execute(spec, parse_match_mode(e.at("mode").get<std::string>()), name);
      if (got.before_count != e.at("before").get<std::size_t>() || got.after_count != e.at("after").get<std::size_t>()) {
        throw Error(errc::kDigestMismatch, "replay of log entry " + std::to_string(got.seq) +
                                               " does not reproduce the saved counts");
      }
    }
    return s;
  } catch (const json::exception& e) {
    throw Error(errc::kSchema, std::string("invalid session document: ") + e.what());
  }
}

Session load_session_file(const std::string& path) {
  namespace fs = std::filesystem;
  const std::string text = read_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(errc::kParse, std::string("malformed session document: ") + e.what());
  }
  const fs::path base = fs::path(path).parent_path();
  auto locate = [&](const std::string& p) {
    fs::path candidate(p);
    return (candidate.is_absolute() ? candidate : base / candidate).string();
  };
  try {
    auto dataset = std::make_shared<const Dataset>(Dataset::load_csv_file(locate(doc.at("dataset").at("path"))));
    auto ontology = std::make_shared<const Ontology>(Ontology::parse_file(locate(doc.at("ontology").at("path"))));
    const json& r = doc.at("rules");
    RuleSet rules;
    const auto origin = parse_origin(r.at("origin").get<std::string>());
    if (origin == RuleOrigin::Kind::kMined) {
      rules = mine_rules(*dataset, params_from_json(r.at("params")));
    } else if (origin == RuleOrigin::Kind::kFile) {
      rules = read_rules_file(locate(r.at("path").get<std::string>()), *dataset);
    } else {
      throw Error(errc::kOpen, "session rules were supplied inline and cannot be recomputed");
    }
    return Session::restore(text, std::move(dataset), std::move(ontology), std::move(rules));
  } catch (const json::exception& e) {
    throw Error(errc::kSchema, std::string("invalid session document: ") + e.what());
  }
}

}  // namespace ontorules
