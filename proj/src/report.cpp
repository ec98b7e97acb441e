#include "ontorules/report.hpp"

#include <algorithm>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ontorules/error.hpp"

namespace ontorules {

using json = nlohmann::json;

namespace {

std::vector<AssociationRule> display_order(const RuleSet& rules) {
  std::vector<AssociationRule> out = rules.rules;
  std::sort(out.begin(), out.end(), display_less);
  return out;
}


std::string percent(double fraction) {
  std::ostringstream os;
  os << fraction * 100.0 << '%';
  return os.str();
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_row(std::initializer_list<std::string> cells) {
  std::string out;
  bool first = true;
  for (const auto& c : cells) {
    if (!first) out += ',';
    out += csv_cell(c);
    first = false;
  }
  return out + "\n";
}

const char* origin_label(RuleOrigin::Kind kind) {
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

}  // namespace

ReportFormat parse_report_format(std::string_view text) {
  if (text == "json") return ReportFormat::kJson;
  if (text == "csv" || text == "csv-bundle") return ReportFormat::kCsv;
  throw Error(errc::kConfig, "unknown report format '" + std::string(text) + "' (expected json or csv)");
}

std::string export_report(const Session& session, ReportFormat format) {
  const Dataset& ds = session.dataset();
  const SessionInputs& in = session.inputs();
  const bool mined = in.rules.kind == RuleOrigin::Kind::kMined;

  if (format == ReportFormat::kJson) {
    json doc;
    doc["format"] = "ontorules-report";
    doc["version"] = 1;
    doc["session"] = session.id();
    doc["dataset_digest"] = ds.digest();
    doc["ontology_digest"] = session.ontology().digest();
    doc["rules_origin"] = origin_label(in.rules.kind);
    if (mined) {
      const auto& p = in.rules.params;
      doc["mining_params"] = {{"min_sup", percent(p.min_sup)},
                              {"max_sup", percent(p.max_sup)},
                              {"min_conf", percent(p.min_conf)},
                              {"max_consequent", p.max_consequent_len}};
    } else {
      doc["mining_params"] = nullptr;
    }
    doc["initial_count"] = session.original().size();
    doc["working_count"] = session.working_set().size();
    json log = json::array();
    json results = json::array();
    for (const auto& e : session.log()) {
      log.push_back({{"seq", e.seq},
                     {"operator", to_string(e.op.kind)},
                     {"scope", e.op.kind == OperatorKind::kUnexpected ? json(to_string(e.op.scope)) : json(nullptr)},
                     {"schema", e.op.schema},
                     {"mode", to_string(e.mode)},
                     {"before_count", e.before_count},
                     {"after_count", e.after_count},
                     {"result", e.result_name ? json(*e.result_name) : json(nullptr)}});
      if (!e.result_name) continue;
      json rows = json::array();
      for (const auto& r : display_order(session.result(*e.result_name))) {
        rows.push_back({{"antecedent", ds.render(r.antecedent, ",")},
                        {"consequent", ds.render(r.consequent, ",")},
                        {"confidence", format_decimal(r.confidence())},
                        {"support", format_decimal(r.support())},
                        {"count_xy", r.count_xy},
                        {"count_x", r.count_x},
                        {"n", r.n}});
      }
      results.push_back({{"name", *e.result_name},
                         {"seq", e.seq},
                         {"operator", format_operator(e.op)},
                         {"count", rows.size()},
                         {"columns", {"Antecedent", "Consequent", "Confidence", "Support"}},
                         {"rows", rows}});
    }
    doc["log"] = log;
    doc["results"] = results;
    return doc.dump(2) + "\n";
  }

  std::string out = "## params\n";
  out += csv_row({"key", "value"});
  out += csv_row({"session", session.id()});
  out += csv_row({"dataset_digest", ds.digest()});
  out += csv_row({"ontology_digest", session.ontology().digest()});
  out += csv_row({"rules_origin", origin_label(in.rules.kind)});
  if (mined) {
    const auto& p = in.rules.params;
    out += csv_row({"min_sup", percent(p.min_sup)});
    out += csv_row({"max_sup", percent(p.max_sup)});
    out += csv_row({"min_conf", percent(p.min_conf)});
    out += csv_row({"max_consequent", std::to_string(p.max_consequent_len)});
  }
  out += csv_row({"initial_count", std::to_string(session.original().size())});
  out += csv_row({"working_count", std::to_string(session.working_set().size())});
  out += "\n## log\n";
  out += csv_row({"seq", "operator", "scope", "schema", "mode", "before_count", "after_count", "result"});
  for (const auto& e : session.log()) {
    out += csv_row({std::to_string(e.seq), to_string(e.op.kind),
                    e.op.kind == OperatorKind::kUnexpected ? to_string(e.op.scope) : "", e.op.schema,
                    to_string(e.mode), std::to_string(e.before_count), std::to_string(e.after_count),
                    e.result_name.value_or("")});
  }
  for (const auto& e : session.log()) {
    if (!e.result_name) continue;
    out += "\n## result " + *e.result_name + "\n";
    out += csv_row({"Antecedent", "Consequent", "Confidence", "Support"});
    for (const auto& r : display_order(session.result(*e.result_name))) {
      out += csv_row({ds.render(r.antecedent, ","), ds.render(r.consequent, ","), format_decimal(r.confidence()),
                      format_decimal(r.support())});
    }
  }
  return out;
}

}  // namespace ontorules
