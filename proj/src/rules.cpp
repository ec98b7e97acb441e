#include "ontorules/rules.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iterator>
#include <sstream>

#include "ontorules/error.hpp"

namespace ontorules {

namespace {

constexpr std::string_view kRulesMagic = "#ontorules-rules v1";

// Sign of a.num/a.den - b.num/b.den.
int compare_fractions(const Fraction& a, const Fraction& b) {
  auto lhs = static_cast<unsigned __int128>(a.num) * b.den;
  auto rhs = static_cast<unsigned __int128>(b.num) * a.den;
  return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
}

std::uint64_t parse_count(std::string_view s, std::size_t line) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(errc::kParse, "bad count '" + std::string(s) + "' on line " + std::to_string(line),
                SourceLocation{line, 0});
  }
  return v;
}

}  // namespace

bool canonical_less(const AssociationRule& a, const AssociationRule& b) {
  if (a.antecedent != b.antecedent) return a.antecedent < b.antecedent;
  return a.consequent < b.consequent;
}

bool display_less(const AssociationRule& a, const AssociationRule& b) {
  if (int c = compare_fractions(a.confidence(), b.confidence())) return c > 0;
  if (int s = compare_fractions(a.support(), b.support())) return s > 0;
  return canonical_less(a, b);
}

void canonicalize(RuleSet& rules) {
  std::stable_sort(rules.rules.begin(), rules.rules.end(), canonical_less);
  rules.rules.erase(std::unique(rules.rules.begin(), rules.rules.end(),
                                [](const AssociationRule& a, const AssociationRule& b) { return a.same_rule(b); }),
                    rules.rules.end());
}

std::string write_rules(const RuleSet& rules, const Dataset& vocabulary) {
  std::string out(kRulesMagic);
  out += '\n';
  if (!rules.provenance.empty()) {
    std::string prov = rules.provenance;
    std::replace(prov.begin(), prov.end(), '\n', ' ');
    out += "#provenance " + prov + '\n';
  }
  for (const auto& r : rules.rules) {
    out += vocabulary.render(r.antecedent);
    out += '\t';
    out += vocabulary.render(r.consequent);
    out += '\t' + std::to_string(r.count_xy) + '\t' + std::to_string(r.count_x) + '\t' + std::to_string(r.n) + '\n';
  }
  return out;
}

RuleSet read_rules(std::string_view text, const Dataset& vocabulary) {
  RuleSet out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool saw_magic = false;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() : eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line_no == 1) {
      if (line != kRulesMagic) {
        throw Error(errc::kParse, "not a rules file (expected '" + std::string(kRulesMagic) + "')",
                    SourceLocation{1, 1});
      }
      saw_magic = true;
      continue;
    }
    if (line.empty()) continue;
    if (line.front() == '#') {
      constexpr std::string_view kProv = "#provenance ";
      if (line.substr(0, kProv.size()) == kProv) out.provenance = std::string(line.substr(kProv.size()));
      continue;
    }
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
      std::size_t tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 5) {
      throw Error(errc::kParse, "line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                                    " fields, expected 5",
                  SourceLocation{line_no, 0});
    }
    AssociationRule r;
    try {
      r.antecedent = vocabulary.parse_itemset(fields[0]);
      r.consequent = vocabulary.parse_itemset(fields[1]);
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.what(), SourceLocation{line_no, 0});
    }
    r.count_xy = parse_count(fields[2], line_no);
    r.count_x = parse_count(fields[3], line_no);
    r.n = parse_count(fields[4], line_no);
    if (r.antecedent.empty() || r.consequent.empty() || intersects(r.antecedent, r.consequent)) {
      throw Error(errc::kParse, "line " + std::to_string(line_no) + ": sides must be nonempty and disjoint",
                  SourceLocation{line_no, 0});
    }
    if (r.count_xy == 0 || r.count_xy > r.count_x || r.count_x > r.n) {
      throw Error(errc::kParse, "line " + std::to_string(line_no) + ": counts must satisfy 0 < xy <= x <= n",
                  SourceLocation{line_no, 0});
    }
    out.rules.push_back(std::move(r));
  }
  if (!saw_magic) throw Error(errc::kParse, "empty rules file");
  canonicalize(out);
  return out;
}

RuleSet read_rules_file(const std::string& path, const Dataset& vocabulary) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(errc::kIo, "cannot read rules file '" + path + "'");
  std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return read_rules(text, vocabulary);
}

std::string format_decimal(const Fraction& f, int digits) {
  if (f.den == 0) return "nan";
  // Round half up on exact integers.
  unsigned __int128 scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  unsigned __int128 scaled = (static_cast<unsigned __int128>(f.num) * scale * 2 + f.den) / (2 * static_cast<unsigned __int128>(f.den));
  auto whole = static_cast<std::uint64_t>(scaled / scale);
  auto frac = static_cast<std::uint64_t>(scaled % scale);
  std::string out = std::to_string(whole);
  if (digits > 0) {
    std::string fs = std::to_string(frac);
    out += '.' + std::string(static_cast<std::size_t>(digits) - fs.size(), '0') + fs;
  }
  return out;
}

std::string format_percent(const Fraction& f, int digits) {
  return format_decimal({f.num * 100, f.den}, digits) + "%";
}

}  // namespace ontorules
