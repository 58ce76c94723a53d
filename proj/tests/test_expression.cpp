#include "nilarea/expression.hpp"

#include <gtest/gtest.h>

using namespace nilarea;
using namespace nilarea::expr;

namespace {

const std::vector<std::string> kVars = {"y1", "y2"};

double eval(const std::string & src, double y1, double y2)
{
  const double v[2] = {y1, y2};
  return Program(parse(src, kVars))(v);
}

}  // namespace

TEST(Parser, PrecedenceAndAssociativity)
{
  EXPECT_DOUBLE_EQ(eval("1 + 2 * 3", 0, 0), 7.0);
  EXPECT_DOUBLE_EQ(eval("2^3^2", 0, 0), 512.0);
  EXPECT_DOUBLE_EQ(eval("-y1^2", 3, 0), -9.0);
  EXPECT_DOUBLE_EQ(eval("2^-1", 0, 0), 0.5);
  EXPECT_DOUBLE_EQ(eval("(y1 - y2) / 4", 3, 1), 0.5);
  EXPECT_DOUBLE_EQ(eval("8 - 3 - 2", 0, 0), 3.0);
  EXPECT_DOUBLE_EQ(eval("1.5e2 + .5", 0, 0), 150.5);
  EXPECT_DOUBLE_EQ(eval("max(y1, y2, 7)", 3, 1), 7.0);
  EXPECT_DOUBLE_EQ(eval("min(y1, y2)", 3, 1), 1.0);
  EXPECT_DOUBLE_EQ(eval("pow(y1, 3)", 2, 0), 8.0);
  EXPECT_NEAR(eval("cos(pi) + log(e) + sqrt(4) + abs(-2) + exp(0) + tan(0) + sin(0)", 0, 0), 5.0, 1e-15);
}

TEST(Parser, ErrorsCarryPositions)
{
  try {
    parse_list("y1; y2; +", kVars);
    FAIL() << "expected ParseError";
  } catch (const ParseError & e) {
    EXPECT_EQ(e.position, 8U);
  }
  try {
    parse_list("y1 + y3", kVars);
    FAIL();
  } catch (const ParseError & e) {
    EXPECT_EQ(e.position, 5U);
  }
  EXPECT_THROW(parse("sin(y1, y2)", kVars), ParseError);
  EXPECT_THROW(parse("foo(y1)", kVars), ParseError);
  EXPECT_THROW(parse("(y1", kVars), ParseError);
  EXPECT_THROW(parse("", kVars), ParseError);
  EXPECT_THROW(parse("y1 y2", kVars), ParseError);
  EXPECT_EQ(parse_list("y1; y2; y1^2 + y2^2", kVars).size(), 3U);
}

TEST(Derivative, MatchesCentralDifferences)
{
  const std::vector<std::string> cases = {"y1^2 * sin(y2)",   "exp(y1 * y2) / (1 + y2^2)", "sqrt(1 + y1^2) - log(2 + y2)",
                                          "y1^y2",            "cos(y1)^3 + tan(y2 / 3)",   "abs(y1 - 0.3) * y2",
                                          "max(y1, y2) * y1", "-y1^3 / 3 + 2 * y1 * y2"};
  const double pts[][2] = {{0.7, 0.4}, {1.3, -0.2}, {0.9, 1.1}};
  for (const auto & src : cases) {
    const NodePtr n = parse(src, kVars);
    for (int i = 0; i < 2; ++i) {
      const Program d(derivative(n, i));
      for (const auto & p : pts) {
        const double h = 1e-6;
        double lo[2] = {p[0], p[1]};
        double hi[2] = {p[0], p[1]};
        lo[i] -= h;
        hi[i] += h;
        const double fd = (evaluate(n, hi) - evaluate(n, lo)) / (2 * h);
        EXPECT_NEAR(d(p), fd, 1e-6 * std::max(1.0, std::abs(fd))) << src << " d/dy" << i + 1;
      }
    }
  }
}

TEST(Derivative, SimplifiesToConstants)
{
  const NodePtr n = parse("3 * y1 + 2 * y2 - 5", kVars);
  EXPECT_TRUE(Program(derivative(n, 0)).is_constant());
  EXPECT_DOUBLE_EQ(Program(derivative(n, 0)).constant_value(), 3.0);
  EXPECT_DOUBLE_EQ(Program(derivative(n, 1)).constant_value(), 2.0);
}

TEST(Substitute, ReplacesVariables)
{
  const NodePtr n = parse("y1 * y2 + y1", kVars);
  const NodePtr s = substitute(n, {parse("y2 + 1", kVars), nullptr});
  const double v[2] = {0.0, 2.0};
  EXPECT_DOUBLE_EQ(evaluate(s, v), 3.0 * 2.0 + 3.0);
  EXPECT_TRUE(uses_variable(n, 0));
  EXPECT_FALSE(uses_variable(parse("y2 + 4", kVars), 0));
}

TEST(Monotone, SafeConstructs)
{
  const auto r = numbered("r", 2);
  EXPECT_TRUE(monotone_safe(parse("max(r1, r2^0.5)", r)));
  EXPECT_TRUE(monotone_safe(parse("(r1^4 + 16 * r2^2)^0.25", r)));
  EXPECT_TRUE(monotone_safe(parse("r1 / 2 + sqrt(r2)", r)));
  EXPECT_FALSE(monotone_safe(parse("r1 - r2", r)));
  EXPECT_FALSE(monotone_safe(parse("cos(r1)", r)));
  EXPECT_FALSE(monotone_safe(parse("r1^-1", r)));
  EXPECT_FALSE(monotone_safe(parse("r1 / r2", r)));
}
