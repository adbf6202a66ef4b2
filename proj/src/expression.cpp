// Copyright 2026 The BoundaryFlow Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "boundaryflow/expression.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>
#include <utility>

namespace boundaryflow {

struct Expression::Node {
  enum class Kind { Number, Time, Add, Sub, Mul, Div, Pow, Neg, Call } kind = Kind::Number;
  double value = 0.0;
  double (*fn)(double) = nullptr;
  std::shared_ptr<const Node> lhs, rhs;

  double eval(double t) const {
    switch (kind) {
      case Kind::Number: return value;
      case Kind::Time: return t;
      case Kind::Add: return lhs->eval(t) + rhs->eval(t);
      case Kind::Sub: return lhs->eval(t) - rhs->eval(t);
      case Kind::Mul: return lhs->eval(t) * rhs->eval(t);
      case Kind::Div: return lhs->eval(t) / rhs->eval(t);
      case Kind::Pow: return std::pow(lhs->eval(t), rhs->eval(t));
      case Kind::Neg: return -lhs->eval(t);
      case Kind::Call: return fn(lhs->eval(t));
    }
    return 0.0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

NodePtr make(Kind kind, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
  auto n = std::make_shared<Expression::Node>();
  n->kind = kind;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

double (*lookup(const std::string& name))(double) {
  if (name == "sin") return [](double x) { return std::sin(x); };
  if (name == "cos") return [](double x) { return std::cos(x); };
  if (name == "tan") return [](double x) { return std::tan(x); };
  if (name == "atan") return [](double x) { return std::atan(x); };
  if (name == "exp") return [](double x) { return std::exp(x); };
  if (name == "log") return [](double x) { return std::log(x); };
  if (name == "sqrt") return [](double x) { return std::sqrt(x); };
  if (name == "abs") return [](double x) { return std::abs(x); };
  if (name == "tanh") return [](double x) { return std::tanh(x); };
  return nullptr;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  NodePtr parse() {
    auto e = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected character");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    std::ostringstream os;
    os << "expression \"" << s_ << "\": " << what << " at position " << pos_;
    throw ConfigError(os.str());
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    auto lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make(Kind::Add, lhs, term());
      } else if (accept('-')) {
        lhs = make(Kind::Sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    auto lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = make(Kind::Mul, lhs, unary());
      } else if (accept('/')) {
        lhs = make(Kind::Div, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Kind::Neg, unary());
    if (accept('+')) return unary();
    auto base = primary();
    if (accept('^')) return make(Kind::Pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (accept('(')) {
      auto e = expr();
      if (!accept(')')) fail("missing ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const std::string rest(s_.substr(pos_));
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(rest, &used);
      } catch (const std::exception&) {
        fail("malformed number");
      }
      pos_ += used;
      auto n = make(Kind::Number);
      std::const_pointer_cast<Expression::Node>(n)->value = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      const std::string name(s_.substr(start, pos_ - start));
      if (name == "t") return make(Kind::Time);
      if (name == "pi") {
        auto n = make(Kind::Number);
        std::const_pointer_cast<Expression::Node>(n)->value = std::numbers::pi;
        return n;
      }
      const auto fn = lookup(name);
      if (!fn) {
        pos_ = start;
        fail("unknown identifier '" + name + "'");
      }
      if (!accept('(')) fail("expected '(' after function name");
      auto arg = expr();
      if (!accept(')')) fail("missing ')'");
      auto n = make(Kind::Call, arg);
      std::const_pointer_cast<Expression::Node>(n)->fn = fn;
      return n;
    }
    fail("unexpected character");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(std::string_view text) {
  Expression e;
  e.text_ = std::string(text);
  e.root_ = Parser(e.text_).parse();
  return e;
}

double Expression::operator()(double t) const { return root_->eval(t); }

LinearField expression_field(const std::vector<std::vector<std::string>>& entries) {
  const auto d = entries.size();
  if (d == 0) throw ConfigError("custom field needs at least one row");
  std::vector<Expression> parsed;
  parsed.reserve(d * d);
  for (const auto& row : entries) {
    if (row.size() != d) throw ConfigError("custom field must be square");
    for (const auto& cell : row) parsed.push_back(Expression::parse(cell));
  }
  const auto dim = static_cast<int>(d);
  return LinearField::custom(dim, [parsed = std::move(parsed), dim](double t) {
    Matrix m(dim, dim);
    for (int i = 0; i < dim; ++i) {
      for (int j = 0; j < dim; ++j) m(i, j) = parsed[static_cast<std::size_t>(i * dim + j)](t);
    }
    return m;
  });
}

}  // namespace boundaryflow
