#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "wsqa/solutions.hpp"
#include "wsqa/types.hpp"

namespace wsqa {

// Field order is fixed everywhere so that saved files are byte-stable.
using ojson = nlohmann::ordered_json;

struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ojson span_to_json(const Span& s);
Span span_from_json(const ojson& j);

ojson answer_to_json(const Answer& a);
Answer answer_from_json(const ojson& j);

ojson refinfo_to_json(const RefInfo& r);
RefInfo refinfo_from_json(const ojson& j);

ojson solution_to_json(const Solution& z);
Solution solution_from_json(const ojson& j);

// Helpers shared by the readers.
const ojson& jreq(const ojson& j, const char* key);
std::string jstr(const ojson& j, const char* key);
Decimal jdecimal(const ojson& v, const char* what);

}  // namespace wsqa
