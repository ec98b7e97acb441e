#pragma once

#include <memory>
#include <string>

#include "ontorules/dataset.hpp"
#include "ontorules/ontology.hpp"
#include "ontorules/rules.hpp"
#include "ontorules/schema.hpp"

namespace fixtures {

std::string path(const std::string& relative);
std::string read(const std::string& relative);

// The attribute/value extract of the case-study questionnaire (three
// respondents, ten questions).
inline constexpr const char* kExtractCsv =
    "q1,q2,q3,q4,q5,q6,q7,q8,q9,q10\n"
    "4,99,2,1,3,1,2,2,1,1\n"
    "2,1,1,1,3,4,2,1,1,1\n"
    "1,1,1,1,1,1,3,4,2,2\n";

struct CaseStudy {
  std::shared_ptr<const ontorules::Dataset> dataset;
  std::shared_ptr<const ontorules::Ontology> ontology;
  ontorules::RuleSet rules;
  ontorules::Script script;
};

CaseStudy case_study();

}  // namespace fixtures
