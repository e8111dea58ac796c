#pragma once

#include <compare>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "wsqa/decimal.hpp"

namespace wsqa {

using Token = std::string;
using TokenSeq = std::vector<Token>;

enum class Family { kSpan, kDiscrete, kSql };

const char* family_name(Family f);
std::optional<Family> family_from_name(std::string_view name);

// A number occurring in a document: token position plus its parsed value.
struct NumberMention {
  int token_index = 0;
  Decimal value;
  friend bool operator==(const NumberMention&, const NumberMention&) = default;
};

struct DocumentRef {
  TokenSeq tokens;
  std::vector<NumberMention> numbers;
  friend bool operator==(const DocumentRef&, const DocumentRef&) = default;
};

// Table cells are either raw strings or decimal numbers.
struct Cell {
  std::variant<std::string, Decimal> v;
  bool is_number() const { return v.index() == 1; }
  const std::string* text() const { return std::get_if<std::string>(&v); }
  const Decimal* number() const { return std::get_if<Decimal>(&v); }
  // Numeric view: a number cell, or a string cell that parses as a decimal.
  std::optional<Decimal> as_number() const {
    if (auto* d = number()) return *d;
    return Decimal::parse(*text());
  }
  std::string display() const { return is_number() ? number()->str() : *text(); }
  friend bool operator==(const Cell&, const Cell&) = default;
};

struct TableRef {
  std::vector<TokenSeq> header;  // one token sequence per column
  std::vector<std::vector<Cell>> rows;
  friend bool operator==(const TableRef&, const TableRef&) = default;
};

using RefInfo = std::variant<DocumentRef, TableRef>;

inline const DocumentRef* as_document(const RefInfo& r) { return std::get_if<DocumentRef>(&r); }
inline const TableRef* as_table(const RefInfo& r) { return std::get_if<TableRef>(&r); }

// Answers and execution results share the same value space.
struct TextValue {
  TokenSeq tokens;
  friend bool operator==(const TextValue&, const TextValue&) = default;
};
struct NumberValue {
  Decimal value;
  friend bool operator==(const NumberValue&, const NumberValue&) = default;
};
struct TextListValue {
  std::vector<TokenSeq> items;
  friend bool operator==(const TextListValue&, const TextListValue&) = default;
};

using Answer = std::variant<TextValue, NumberValue, TextListValue>;
// Produced only by solution execution; mirrors Answer member for member.
using AnswerValue = Answer;

enum class SpanSource { kReference, kQuestion };

// Inclusive token span over the reference or the question.
struct Span {
  SpanSource source = SpanSource::kReference;
  int start = 0;
  int end = 0;
  int length() const { return end - start + 1; }
  friend auto operator<=>(const Span&, const Span&) = default;
};

}  // namespace wsqa
