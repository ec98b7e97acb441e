#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "ontorules/dataset.hpp"
#include "ontorules/error.hpp"
#include "ontorules/miner.hpp"
#include "ontorules/ontology.hpp"
#include "ontorules/operators.hpp"
#include "ontorules/report.hpp"
#include "ontorules/rules.hpp"
#include "ontorules/schema.hpp"
#include "ontorules/session.hpp"

namespace py = pybind11;
using namespace ontorules;

namespace {

// Rules only carry item ids, so Python-facing rule sets keep their dataset
// alongside for rendering.
struct PyRuleSet {
  std::shared_ptr<const Dataset> dataset;
  RuleSet rules;
};

struct PyRule {
  std::vector<std::string> antecedent;
  std::vector<std::string> consequent;
  std::uint64_t count_xy = 0;
  std::uint64_t count_x = 0;
  std::uint64_t n = 0;
};

std::vector<std::string> render_items(const Dataset& ds, const Itemset& items) {
  std::vector<std::string> out;
  for (auto i : items) out.push_back(ds.render(i));
  return out;
}

PyRule to_py(const Dataset& ds, const AssociationRule& r) {
  return {render_items(ds, r.antecedent), render_items(ds, r.consequent), r.count_xy, r.count_x, r.n};
}

py::dict entry_dict(const LogEntry& e) {
  py::dict d;
  d["seq"] = e.seq;
  d["op"] = format_operator(e.op);
  d["mode"] = to_string(e.mode);
  d["before"] = e.before_count;
  d["after"] = e.after_count;
  d["result"] = e.result_name ? py::object(py::str(*e.result_name)) : py::object(py::none());
  return d;
}

ConceptExpr expr_from(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && (text[first] == '{' || text[first] == '"')) return parse_concept_expr(text);
  return ConceptExpr::ref(text);
}

struct PySession {
  std::shared_ptr<const Dataset> dataset;
  std::shared_ptr<Session> session;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Association rule mining with ontology-guided post-processing";

  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
  error_type.call_once_and_store_result(
      [&]() { return py::object(py::exception<Error>(m, "Error", PyExc_ValueError)); });
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object type = error_type.get_stored();
      py::object err = type(e.what());
      err.attr("code") = e.code();
      if (e.location()) {
        err.attr("line") = e.location()->line;
        err.attr("column") = e.location()->column;
      } else {
        err.attr("line") = py::none();
        err.attr("column") = py::none();
      }
      PyErr_SetObject(type.ptr(), err.ptr());
    }
  });

  py::class_<Dataset, std::shared_ptr<Dataset>>(m, "Dataset")
      .def_static("load_csv", [](const std::string& text) { return std::make_shared<Dataset>(Dataset::load_csv(text)); },
                  py::arg("text"))
      .def_static("load_csv_file",
                  [](const std::string& path) { return std::make_shared<Dataset>(Dataset::load_csv_file(path)); },
                  py::arg("path"))
      .def("__len__", &Dataset::size)
      .def_property_readonly("attributes",
                             [](const Dataset& ds) {
                               std::vector<std::string> ids;
                               for (const auto& a : ds.attributes()) ids.push_back(a.id);
                               return ids;
                             })
      .def_property_readonly("transactions",
                             [](const Dataset& ds) {
                               std::vector<std::vector<std::string>> out;
                               for (const auto& t : ds.transactions()) out.push_back(render_items(ds, t));
                               return out;
                             })
      .def("support",
           [](const Dataset& ds, const std::vector<std::string>& items) {
             Itemset set;
             for (const auto& i : items) set.push_back(ds.parse_item(i));
             canonicalize(set);
             const Fraction f = support(ds, set);
             return std::make_pair(f.num, f.den);
           },
           py::arg("items"), "Exact support as (count, transactions).")
      .def("to_csv", &Dataset::to_csv)
      .def("digest", &Dataset::digest);

  py::class_<PyRule>(m, "Rule")
      .def_readonly("antecedent", &PyRule::antecedent)
      .def_readonly("consequent", &PyRule::consequent)
      .def_readonly("count_xy", &PyRule::count_xy)
      .def_readonly("count_x", &PyRule::count_x)
      .def_readonly("n", &PyRule::n)
      .def_property_readonly("support", [](const PyRule& r) { return static_cast<double>(r.count_xy) / r.n; })
      .def_property_readonly("confidence", [](const PyRule& r) { return static_cast<double>(r.count_xy) / r.count_x; })
      .def("__repr__", [](const PyRule& r) {
        auto join = [](const std::vector<std::string>& v) {
          std::string s;
          for (const auto& x : v) s += (s.empty() ? "" : " ") + x;
          return s;
        };
        return "<Rule " + join(r.antecedent) + " -> " + join(r.consequent) + ">";
      });

  py::class_<PyRuleSet>(m, "RuleSet")
      .def("__len__", [](const PyRuleSet& rs) { return rs.rules.size(); })
      .def_property_readonly("provenance", [](const PyRuleSet& rs) { return rs.rules.provenance; })
      .def_property_readonly("rules",
                             [](const PyRuleSet& rs) {
                               std::vector<PyRule> out;
                               for (const auto& r : rs.rules.rules) out.push_back(to_py(*rs.dataset, r));
                               return out;
                             })
      .def("__iter__", [](const PyRuleSet& rs) {
        py::list out;
        for (const auto& r : rs.rules.rules) out.append(py::cast(to_py(*rs.dataset, r)));
        return out.attr("__iter__")();
      });

  m.def(
      "mine",
      [](std::shared_ptr<Dataset> ds, double min_sup, double max_sup, double min_conf, std::size_t max_consequent) {
        MiningParams p;
        p.min_sup = min_sup;
        p.max_sup = max_sup;
        p.min_conf = min_conf;
        p.max_consequent_len = max_consequent;
        RuleSet rules;
        {
          py::gil_scoped_release release;
          rules = mine_rules(*ds, p);
        }
        return PyRuleSet{ds, std::move(rules)};
      },
      py::arg("dataset"), py::arg("min_sup") = 0.02, py::arg("max_sup") = 1.0, py::arg("min_conf") = 0.8,
      py::arg("max_consequent") = 1);

  m.def(
      "write_rules", [](const PyRuleSet& rs) { return write_rules(rs.rules, *rs.dataset); }, py::arg("rules"));
  m.def(
      "read_rules",
      [](const std::string& text, std::shared_ptr<Dataset> ds) { return PyRuleSet{ds, read_rules(text, *ds)}; },
      py::arg("text"), py::arg("dataset"));

  py::class_<Ontology, std::shared_ptr<Ontology>>(m, "Ontology")
      .def_static("parse", [](const std::string& text) { return std::make_shared<Ontology>(Ontology::parse(text)); },
                  py::arg("text"))
      .def_static("parse_file",
                  [](const std::string& path) { return std::make_shared<Ontology>(Ontology::parse_file(path)); },
                  py::arg("path"))
      .def_property_readonly("concepts",
                             [](const Ontology& o) {
                               std::vector<std::string> names;
                               for (const auto& c : o.concepts()) names.push_back(c.name);
                               return names;
                             })
      .def("roots", &Ontology::roots)
      .def("leaves_under", &Ontology::leaves_under, py::arg("name"))
      .def("digest", &Ontology::digest);

  m.def(
      "item_extension",
      [](const Ontology& onto, const std::string& expr, const Dataset& ds) {
        return render_items(ds, item_extension(onto, expr_from(expr), ds));
      },
      py::arg("ontology"), py::arg("expr"), py::arg("dataset"),
      "Items denoted by a concept name or a JSON concept expression.");

  py::class_<Script>(m, "Script")
      .def_property_readonly("schemas",
                             [](const Script& s) {
                               std::vector<std::pair<std::string, std::string>> out;
                               for (const auto& sc : s.schemas) out.emplace_back(sc.name, format_schema(sc));
                               return out;
                             })
      .def_property_readonly("operators", [](const Script& s) {
        std::vector<std::string> out;
        for (const auto& op : s.operators) out.push_back(format_operator(op));
        return out;
      });

  m.def("parse_script", [](const std::string& text) { return parse_script(text); }, py::arg("text"));
  m.def("format_script", &format_script, py::arg("script"));
  m.def(
      "format_schema",
      [](const Script& s, const std::string& name) {
        for (const auto& sc : s.schemas) {
          if (sc.name == name) return format_schema(sc);
        }
        throw Error(errc::kLookup, "unknown schema '" + name + "'");
      },
      py::arg("script"), py::arg("name"));

  py::class_<PySession>(m, "Session")
      .def(py::init([](std::shared_ptr<Dataset> ds, std::shared_ptr<Ontology> onto, const PyRuleSet& rules) {
             return PySession{ds, std::make_shared<Session>(ds, onto, rules.rules)};
           }),
           py::arg("dataset"), py::arg("ontology"), py::arg("rules"))
      .def(
          "add_script",
          [](PySession& s, const std::string& text) {
            Script script = parse_script(text);
            s.session->add_schemas(script.schemas);
            return script;
          },
          py::arg("text"), "Registers the script's schemas; its apply lines are returned, not run.")
      .def(
          "run_script",
          [](PySession& s, const std::string& text, const std::string& mode) {
            Script script = parse_script(text);
            s.session->add_schemas(script.schemas);
            py::list entries;
            for (const auto& op : script.operators) entries.append(entry_dict(s.session->execute(op, parse_match_mode(mode))));
            return entries;
          },
          py::arg("text"), py::arg("mode") = "any")
      .def(
          "execute",
          [](PySession& s, const std::string& op, const std::string& schema, const std::string& scope,
             const std::string& mode, std::optional<std::string> name) {
            OperatorSpec spec{parse_operator_kind(op), parse_scope(scope), schema};
            return entry_dict(s.session->execute(spec, parse_match_mode(mode), std::move(name)));
          },
          py::arg("op"), py::arg("schema"), py::arg("scope") = "condition", py::arg("mode") = "any",
          py::arg("name") = py::none())
      .def("undo", [](PySession& s) { s.session->undo(); })
      .def_property_readonly("working_set", [](const PySession& s) { return PyRuleSet{s.dataset, s.session->working_set()}; })
      .def_property_readonly("results",
                             [](const PySession& s) {
                               std::map<std::string, PyRuleSet> out;
                               for (const auto& [name, rs] : s.session->results()) out[name] = PyRuleSet{s.dataset, rs};
                               return out;
                             })
      .def_property_readonly("log",
                             [](const PySession& s) {
                               py::list out;
                               for (const auto& e : s.session->log()) out.append(entry_dict(e));
                               return out;
                             })
      .def(
          "report",
          [](const PySession& s, const std::string& format) {
            return export_report(*s.session, parse_report_format(format));
          },
          py::arg("format") = "json")
      .def("persist", [](const PySession& s) { return s.session->persist(); })
      .def_static(
          "restore",
          [](const std::string& doc, std::shared_ptr<Dataset> ds, std::shared_ptr<Ontology> onto,
             const PyRuleSet& rules) {
            return PySession{ds, std::make_shared<Session>(Session::restore(doc, ds, onto, rules.rules))};
          },
          py::arg("document"), py::arg("dataset"), py::arg("ontology"), py::arg("rules"));
}
