#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ontorules/dataset.hpp"
#include "ontorules/miner.hpp"
#include "ontorules/ontology.hpp"
#include "ontorules/operators.hpp"
#include "ontorules/rules.hpp"
#include "ontorules/schema.hpp"

namespace ontorules {

struct LogEntry {
  std::size_t seq = 0;
  OperatorSpec op;
  MatchMode mode = MatchMode::kAny;
  std::size_t before_count = 0;
  std::size_t after_count = 0;
  std::optional<std::string> result_name;  // unset for prune

  bool operator==(const LogEntry&) const = default;
};

// Where the session's original rule set came from; persisted so a saved
// session can recompute it.
struct RuleOrigin {
  enum class Kind { kMined, kFile, kInline };
  Kind kind = Kind::kInline;
  MiningParams params;  // kMined
  std::string path;     // kFile
};

struct SessionInputs {
  std::string dataset_path;
  std::string ontology_path;
  RuleOrigin rules;
};

// Working rule set, named filter results and an operator log. Prune replaces
// the working set; the other operators store a result and leave it alone.
// Not internally synchronized: callers serialize mutations per session.
class Session {
 public:
  // Throws Error(open_error) if the ontology's mapping is fatally
  // inconsistent with the dataset.
  Session(std::shared_ptr<const Dataset> dataset, std::shared_ptr<const Ontology> ontology,
          RuleSet rules, SessionInputs inputs = {}, std::string id = {});

  const std::string& id() const { return id_; }
  const Dataset& dataset() const { return *dataset_; }
  const Ontology& ontology() const { return *ontology_; }
  const ExtensionIndex& extensions() const { return *extensions_; }
  const SessionInputs& inputs() const { return inputs_; }

  // Registers schemas; names must be new. All-or-nothing.
  void add_schemas(const std::vector<RuleSchema>& schemas);
  const std::vector<RuleSchema>& schemas() const { return schemas_; }
  const RuleSchema& schema(std::string_view name) const;
  ResolvedSchema resolved(std::string_view name) const;

  // Applies one operator. Leaves the session untouched on error.
  LogEntry execute(const OperatorSpec& spec, MatchMode mode = MatchMode::kAny,
                   std::optional<std::string> result_name = std::nullopt);
  // Reverts the last log entry by replaying the rest from the original rules.
  // Throws Error(nothing_to_undo) on an empty log.
  void undo();

  const RuleSet& original() const { return original_; }
  const RuleSet& working_set() const { return working_; }
  const std::map<std::string, RuleSet>& results() const { return results_; }
  const RuleSet& result(std::string_view name) const;
  const std::vector<LogEntry>& log() const { return log_; }

  // Structured text holding input digests, schemas and the log.
  std::string persist() const;
  // Rebuilds a session from persist() output and the same inputs; digests
  // must match and replayed counts must equal the logged ones.
  static Session restore(std::string_view document, std::shared_ptr<const Dataset> dataset,
                         std::shared_ptr<const Ontology> ontology, RuleSet rules);

 private:
  struct State {
    RuleSet working;
    std::map<std::string, RuleSet> results;
    std::vector<LogEntry> log;
  };
  State apply_to(State state, const OperatorSpec& spec, MatchMode mode,
                 std::optional<std::string> result_name) const;

  std::string id_;
  std::shared_ptr<const Dataset> dataset_;
  std::shared_ptr<const Ontology> ontology_;
  std::shared_ptr<const ExtensionIndex> extensions_;
  SessionInputs inputs_;
  std::vector<RuleSchema> schemas_;
  RuleSet original_;
  RuleSet working_;
  std::map<std::string, RuleSet> results_;
  std::vector<LogEntry> log_;
};

// Reads the document's dataset/ontology/rules paths (relative to
// `base_dir` when not absolute), recomputes the rules and restores.
Session load_session_file(const std::string& path);

}  // namespace ontorules
