#include "fixtures.hpp"

#include <fstream>
#include <iterator>
#include <stdexcept>

#ifndef ONTORULES_FIXTURE_DIR
#error "ONTORULES_FIXTURE_DIR must be defined"
#endif

namespace fixtures {

std::string path(const std::string& relative) { return std::string(ONTORULES_FIXTURE_DIR) + "/" + relative; }

std::string read(const std::string& relative) {
  std::ifstream in(path(relative), std::ios::binary);
  if (!in) throw std::runtime_error("missing fixture " + relative);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

CaseStudy case_study() {
  CaseStudy cs;
  cs.dataset = std::make_shared<const ontorules::Dataset>(ontorules::Dataset::load_csv(read("case_study/survey.csv")));
  cs.ontology = std::make_shared<const ontorules::Ontology>(ontorules::Ontology::parse(read("case_study/ontology.json")));
  cs.rules = ontorules::read_rules(read("case_study/rules.tsv"), *cs.dataset);
  cs.script = ontorules::parse_script(read("case_study/operators.rsl"));
  return cs;
}

}  // namespace fixtures
