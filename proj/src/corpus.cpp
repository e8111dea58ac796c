#include "wsqa/corpus.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "wsqa/answer_match.hpp"

namespace wsqa {

namespace {

bool token_ok(const Token& t) {
  if (t.empty()) return false;
  for (char c : t)
    if (std::isspace(static_cast<unsigned char>(c))) return false;
  return true;
}

}  // namespace

std::vector<std::string> validate_instance(const Instance& inst) {
  std::vector<std::string> out;
  if (inst.id.empty()) out.push_back("empty id");
  if (inst.question.empty()) out.push_back("empty question");
  for (const auto& t : inst.question)
    if (!token_ok(t)) out.push_back("question token empty or contains whitespace");

  if (const auto* doc = as_document(inst.reference)) {
    for (const auto& t : doc->tokens)
      if (!token_ok(t)) out.push_back("document token empty or contains whitespace");
    int prev = -1;
    for (const auto& n : doc->numbers) {
      if (n.token_index <= prev) out.push_back("number mention indices not strictly increasing");
      prev = n.token_index;
      if (n.token_index < 0 || n.token_index >= static_cast<int>(doc->tokens.size())) {
        out.push_back("number mention index out of range");
        continue;
      }
      auto parsed = Decimal::parse(doc->tokens[n.token_index]);
      if (!parsed || !(*parsed == n.value))
        out.push_back("number mention value does not match its token");
    }
    if (inst.family == Family::kSql) out.push_back("sql instance with document reference");
  } else if (const auto* table = as_table(inst.reference)) {
    if (table->header.empty()) out.push_back("table with no columns");
    for (const auto& row : table->rows)
      if (row.size() != table->header.size())
        out.push_back("table row width differs from header");
    if (inst.family != Family::kSql) out.push_back("table reference outside sql family");
  }

  if (const auto* t = std::get_if<TextValue>(&inst.answer)) {
    if (t->tokens.empty()) out.push_back("empty text answer");
  } else if (const auto* l = std::get_if<TextListValue>(&inst.answer)) {
    if (l->items.empty()) out.push_back("empty answer list");
    for (const auto& item : l->items)
      if (item.empty()) out.push_back("empty item in answer list");
  }

  for (const auto& kv : inst.kv_candidates) {
    Solution probe = KvSortSol{KvOp::kArgmax, {KvPair{kv.span, kv.mention_index},
                                               KvPair{kv.span, kv.mention_index}}};
    // Range-check the candidate through the solution checker on a synthetic
    // two-pair sort; ignore the distinctness complaint it also raises.
    for (const auto& v : solution_violations(probe, inst.reference, inst.question))
      if (v.find("distinct") == std::string::npos) out.push_back("kv candidate: " + v);
  }
  for (const auto& s : inst.mention_candidates) {
    Solution probe = CountSol{{s}};
    for (const auto& v : solution_violations(probe, inst.reference, inst.question))
      out.push_back("mention candidate: " + v);
  }

  if (inst.gold_solution) {
    auto bad = solution_violations(*inst.gold_solution, inst.reference, inst.question);
    for (auto& v : bad) out.push_back("gold solution: " + v);
    auto result = execute_solution(*inst.gold_solution, inst.reference, inst.question);
    if (!result || !answer_equal(*result, inst.answer))
      out.push_back("gold does not execute to answer");
  }
  return out;
}

ojson instance_to_json(const Instance& inst) {
  ojson j;
  j["id"] = inst.id;
  j["family"] = family_name(inst.family);
  j["reference"] = refinfo_to_json(inst.reference);
  j["question"] = inst.question;
  j["answer"] = answer_to_json(inst.answer);
  if (inst.gold_solution) j["gold_solution"] = solution_to_json(*inst.gold_solution);
  if (!inst.kv_candidates.empty()) {
    ojson arr = ojson::array();
    for (const auto& kv : inst.kv_candidates) {
      ojson jk;
      jk["span"] = span_to_json(kv.span);
      jk["mention_index"] = kv.mention_index;
      arr.push_back(std::move(jk));
    }
    j["kv_candidates"] = std::move(arr);
  }
  if (!inst.mention_candidates.empty()) {
    ojson arr = ojson::array();
    for (const auto& s : inst.mention_candidates) arr.push_back(span_to_json(s));
    j["mention_candidates"] = std::move(arr);
  }
  return j;
}

Instance instance_from_json(const ojson& j) {
  Instance inst;
  inst.id = jstr(j, "id");
  auto fam = family_from_name(jstr(j, "family"));
  if (!fam) throw SchemaError("unknown family");
  inst.family = *fam;
  inst.reference = refinfo_from_json(jreq(j, "reference"));
  inst.question = jreq(j, "question").get<TokenSeq>();
  inst.answer = answer_from_json(jreq(j, "answer"));
  if (j.contains("gold_solution")) inst.gold_solution = solution_from_json(j["gold_solution"]);
  if (j.contains("kv_candidates")) {
    for (const auto& jk : j["kv_candidates"]) {
      KvCandidate kv;
      kv.span = span_from_json(jreq(jk, "span"));
      kv.mention_index = jreq(jk, "mention_index").get<int>();
      inst.kv_candidates.push_back(kv);
    }
  }
  if (j.contains("mention_candidates"))
    for (const auto& js : j["mention_candidates"])
      inst.mention_candidates.push_back(span_from_json(js));
  return inst;
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file: " + path);
  Dataset d;
  std::size_t slash = path.find_last_of('/');
  std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
  std::size_t dot = base.find_last_of('.');
  d.name = dot == std::string::npos ? base : base.substr(0, dot);

  std::set<std::string> seen_ids;
  std::string line;
  int line_no = 0;
  bool family_set = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) throw DataError("line " + std::to_string(line_no) + ": empty line");
    Instance inst;
    try {
      ojson j = ojson::parse(line);
      inst = instance_from_json(j);
    } catch (const std::exception& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!seen_ids.insert(inst.id).second)
      throw DataError("line " + std::to_string(line_no) + ": duplicate id \"" + inst.id + "\"");
    if (!family_set) {
      d.family = inst.family;
      family_set = true;
    } else if (inst.family != d.family) {
      throw DataError("line " + std::to_string(line_no) + ": family mismatch (expected " +
                      family_name(d.family) + ")");
    }
    auto violations = validate_instance(inst);
    if (!violations.empty())
      throw DataError("line " + std::to_string(line_no) + ": invalid instance: " + violations[0]);
    d.instances.push_back(std::move(inst));
  }
  return d;
}

void save_dataset(const Dataset& d, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open for writing: " + path);
  for (const auto& inst : d.instances) {
    out << instance_to_json(inst).dump() << '\n';
    if (!out) throw DataError("write failure: " + path);
  }
  out.flush();
  if (!out) throw DataError("write failure: " + path);
}

}  // namespace wsqa
