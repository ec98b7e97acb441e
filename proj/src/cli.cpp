#include "ontorules/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>

#include <CLI11.hpp>

#include "ontorules/dataset.hpp"
#include "ontorules/error.hpp"
#include "ontorules/miner.hpp"
#include "ontorules/ontology.hpp"
#include "ontorules/report.hpp"
#include "ontorules/rules.hpp"
#include "ontorules/schema.hpp"
#include "ontorules/server.hpp"
#include "ontorules/session.hpp"

namespace ontorules {

namespace {

namespace fs = std::filesystem;

enum class Verbosity { kQuiet, kInfo, kDebug };

struct CliConfig {
  std::string data;
  std::string rules;
  std::string ontology;
  std::string script;
  std::string out;
  std::string format = "json";
  std::string mode = "any";
  std::string save_session;
  std::string host = "127.0.0.1";
  std::string assets;
  int port = 8080;
  MiningParams params;
  std::string log_level = "info";
};

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(errc::kIo, "cannot read '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Writes through a temporary file so a failed run never leaves a partial output.
void write_atomically(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(errc::kIo, "cannot write '" + path + "'");
    out << content;
    out.flush();
    if (!out) throw Error(errc::kIo, "write to '" + path + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(errc::kIo, "cannot move output into place at '" + path + "'");
  }
}

std::string describe(const Error& e) {
  std::string msg = e.code() + ": " + e.what();
  if (e.location()) {
    msg += " [" + std::to_string(e.location()->line) + ":" + std::to_string(e.location()->column) + "]";
  }
  return msg;
}

Verbosity parse_verbosity(const std::string& s) {
  if (s == "quiet") return Verbosity::kQuiet;
  if (s == "debug") return Verbosity::kDebug;
  return Verbosity::kInfo;
}

int run_mine(const CliConfig& cfg, std::ostream& out) {
  cfg.params.validate();
  const auto start = std::chrono::steady_clock::now();
  const Dataset ds = Dataset::load_csv_file(cfg.data);
  const RuleSet rules = mine_rules(ds, cfg.params);
  write_atomically(cfg.out, write_rules(rules, ds));
  const auto ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
  if (parse_verbosity(cfg.log_level) != Verbosity::kQuiet) {
    out << "mined " << rules.size() << " rules from " << ds.size() << " transactions (" << cfg.params.describe()
        << ") in " << ms << " ms\n";
  }
  return 0;
}

int run_post(const CliConfig& cfg, std::ostream& out) {
  const ReportFormat format = parse_report_format(cfg.format);
  const MatchMode mode = parse_match_mode(cfg.mode);
  auto ds = std::make_shared<const Dataset>(Dataset::load_csv_file(cfg.data));
  auto onto = std::make_shared<const Ontology>(Ontology::parse_file(cfg.ontology));
  RuleSet rules = read_rules_file(cfg.rules, *ds);
  const Script script = parse_script(read_text(cfg.script));

  SessionInputs inputs;
  inputs.dataset_path = fs::absolute(cfg.data).string();
  inputs.ontology_path = fs::absolute(cfg.ontology).string();
  inputs.rules.kind = RuleOrigin::Kind::kFile;
  inputs.rules.path = fs::absolute(cfg.rules).string();

  Session session(ds, onto, std::move(rules), inputs, "post");
  session.add_schemas(script.schemas);
  const Verbosity v = parse_verbosity(cfg.log_level);
  for (const auto& s : script.schemas) {
    for (const auto& d : session.resolved(s.name).diagnostics) {
      if (v != Verbosity::kQuiet) out << d << "\n";
    }
  }
  for (const auto& op : script.operators) {
    const LogEntry e = session.execute(op, mode);
    if (v != Verbosity::kQuiet) {
      out << e.seq << " " << format_operator(op) << ": " << e.before_count << " -> " << e.after_count << "\n";
    }
  }
  write_atomically(cfg.out, export_report(session, format));
  if (!cfg.save_session.empty()) write_atomically(cfg.save_session, session.persist());
  return 0;
}

int run_serve(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  Workbench workbench;
  if (!cfg.data.empty()) {
    const std::string id = workbench.preload_dataset(cfg.data);
    out << "preloaded dataset " << id << " from " << cfg.data << "\n";
  }
  ServeOptions options;
  options.host = cfg.host;
  options.port = cfg.port;
  options.assets_dir = cfg.assets;
  HttpServer server(workbench, options);
  if (!server.bind()) {
    err << "error: cannot bind " << cfg.host << ":" << cfg.port << "\n";
    return 1;
  }
  out << "listening on http://" << cfg.host << ":" << server.port() << std::endl;
  server.serve();
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CliConfig cfg;
  CLI::App app{"Association rule mining and ontology-guided post-processing", "ontorules"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--log-level", cfg.log_level, "quiet, info or debug")
      ->envname("ONTORULES_LOG")
      ->check(CLI::IsMember({"quiet", "info", "debug"}));

  auto* mine = app.add_subcommand("mine", "Mine association rules from a CSV transaction table");
  mine->add_option("--data", cfg.data, "CSV dataset")->required()->check(CLI::ExistingFile);
  mine->add_option("--min-sup", cfg.params.min_sup, "minimum support (fraction)")->capture_default_str();
  mine->add_option("--max-sup", cfg.params.max_sup, "maximum support (fraction)")->capture_default_str();
  mine->add_option("--min-conf", cfg.params.min_conf, "minimum confidence (fraction)")->capture_default_str();
  mine->add_option("--max-consequent", cfg.params.max_consequent_len, "maximum consequent length")
      ->capture_default_str();
  mine->add_option("--out", cfg.out, "rules file to write")->required();

  auto* post = app.add_subcommand("post", "Run a rule schema script over a rules file");
  post->add_option("--data", cfg.data, "CSV dataset the rules were mined from")->required()->check(CLI::ExistingFile);
  post->add_option("--rules", cfg.rules, "rules file")->required()->check(CLI::ExistingFile);
  post->add_option("--ontology", cfg.ontology, "ontology document")->required()->check(CLI::ExistingFile);
  post->add_option("--script", cfg.script, "rule schema script (.rsl)")->required()->check(CLI::ExistingFile);
  post->add_option("--out", cfg.out, "report file to write")->required();
  post->add_option("--format", cfg.format, "json or csv")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
  post->add_option("--mode", cfg.mode, "non-implicative matching: any or all")
      ->check(CLI::IsMember({"any", "all"}))
      ->capture_default_str();
  post->add_option("--save-session", cfg.save_session, "also write the session document here");

  auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
  serve->add_option("--port", cfg.port, "TCP port")->envname("ONTORULES_PORT")->capture_default_str();
  serve->add_option("--host", cfg.host, "bind address")->capture_default_str();
  serve->add_option("--data", cfg.data, "dataset to preload")->check(CLI::ExistingFile);
  serve->add_option("--assets", cfg.assets, "directory of static UI files served under /ui");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (mine->parsed()) return run_mine(cfg, out);
    if (post->parsed()) return run_post(cfg, out);
    if (serve->parsed()) return run_serve(cfg, out, err);
  } catch (const Error& e) {
    err << "error: " << describe(e) << "\n";
    return e.code() == errc::kConfig ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace ontorules
