#include <doctest.h>

#include "wsqa/decimal.hpp"

using namespace wsqa;

TEST_CASE("decimal parse and canonical form") {
  CHECK(Decimal::parse("5")->micros() == 5'000'000);
  CHECK(Decimal::parse("5.0")->micros() == 5'000'000);
  CHECK(Decimal::parse("-0")->str() == "0");
  CHECK(Decimal::parse("2.5")->str() == "2.5");
  CHECK(Decimal::parse("0.000001")->micros() == 1);
  CHECK(Decimal::parse("1e3")->str() == "1000");
  CHECK(Decimal::parse("1.5e-2")->str() == "0.015");
  CHECK(!Decimal::parse("0.0000001"));  // seven fraction digits
  CHECK(!Decimal::parse("abc"));
  CHECK(!Decimal::parse(""));
  CHECK(!Decimal::parse("1.2.3"));
}

TEST_CASE("decimal equality is exact") {
  CHECK(*Decimal::parse("5.0") == *Decimal::parse("5"));
  CHECK(*Decimal::parse("0.1") + *Decimal::parse("0.2") == *Decimal::parse("0.3"));
  CHECK(Decimal::from_int(7) - Decimal::from_int(9) == -Decimal::from_int(2));
}

TEST_CASE("decimal mean rounds half away from zero") {
  CHECK(Decimal::mean_of_sum(Decimal::from_int(3), 2).str() == "1.5");
  CHECK(Decimal::mean_of_sum(Decimal::from_int(1), 3).str() == "0.333333");
  CHECK(Decimal::mean_of_sum(-Decimal::from_int(1), 3).str() == "-0.333333");
}

TEST_CASE("double round trip") {
  CHECK(Decimal::from_double(2.5)->str() == "2.5");
  CHECK(Decimal::from_double(17.0)->str() == "17");
}
