#include "slabdsa/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <vector>

#include "slabdsa/errors.hpp"

namespace slabdsa {

struct Expression::Node {
  enum Kind { Num, VarX, VarMu, VarEps, Neg, Add, Sub, Mul, Div, Pow, Call } kind = Num;
  double value = 0.0;
  double (*fn)(double) = nullptr;
  std::shared_ptr<const Node> a, b;

  double eval(double x, double mu, double eps) const {
    switch (kind) {
      case Num: return value;
      case VarX: return x;
      case VarMu: return mu;
      case VarEps: return eps;
      case Neg: return -a->eval(x, mu, eps);
      case Add: return a->eval(x, mu, eps) + b->eval(x, mu, eps);
      case Sub: return a->eval(x, mu, eps) - b->eval(x, mu, eps);
      case Mul: return a->eval(x, mu, eps) * b->eval(x, mu, eps);
      case Div: return a->eval(x, mu, eps) / b->eval(x, mu, eps);
      case Pow: return std::pow(a->eval(x, mu, eps), b->eval(x, mu, eps));
      case Call: return fn(a->eval(x, mu, eps));
    }
    return 0.0;
  }

  bool uses(Kind v) const {
    if (kind == v) return true;
    return (a && a->uses(v)) || (b && b->uses(v));
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using N = Expression::Node;

NodePtr make(N::Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<N>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

struct Function {
  const char* name;
  double (*fn)(double);
};

const Function kFunctions[] = {
    {"sin", [](double v) { return std::sin(v); }},   {"cos", [](double v) { return std::cos(v); }},
    {"tan", [](double v) { return std::tan(v); }},   {"exp", [](double v) { return std::exp(v); }},
    {"log", [](double v) { return std::log(v); }},   {"sqrt", [](double v) { return std::sqrt(v); }},
    {"abs", [](double v) { return std::abs(v); }},
};

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse() {
    NodePtr n = sum();
    skip();
    if (pos_ != s_.size()) error("unexpected '" + std::string(1, s_[pos_]) + "'");
    return n;
  }

 private:
  const std::string& s_;
  std::size_t pos_ = 0;

  [[noreturn]] void error(const std::string& msg) const {
    fail(ErrorCode::Config, "expression '" + s_ + "': " + msg + " at position " + std::to_string(pos_));
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr sum() {
    NodePtr n = product();
    for (;;) {
      if (eat('+')) n = make(N::Add, n, product());
      else if (eat('-')) n = make(N::Sub, n, product());
      else return n;
    }
  }
  NodePtr product() {
    NodePtr n = unary();
    for (;;) {
      if (eat('*')) n = make(N::Mul, n, unary());
      else if (eat('/')) n = make(N::Div, n, unary());
      else return n;
    }
  }
  NodePtr unary() {
    if (eat('-')) return make(N::Neg, unary());
    if (eat('+')) return unary();
    return power();
  }
  NodePtr power() {
    NodePtr base = atom();
    if (eat('^')) return make(N::Pow, base, unary());
    return base;
  }
  NodePtr atom() {
    skip();
    if (pos_ >= s_.size()) error("unexpected end");
    if (eat('(')) {
      NodePtr n = sum();
      if (!eat(')')) error("expected ')'");
      return n;
    }
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) error("bad number");
      pos_ += static_cast<std::size_t>(end - begin);
      auto n = std::make_shared<N>();
      n->value = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      const std::string id = s_.substr(start, pos_ - start);
      if (id == "x") return make(N::VarX);
      if (id == "mu") return make(N::VarMu);
      if (id == "eps") return make(N::VarEps);
      if (id == "pi") {
        auto n = std::make_shared<N>();
        n->value = std::numbers::pi;
        return n;
      }
      for (const auto& f : kFunctions) {
        if (id == f.name) {
          if (!eat('(')) error("expected '(' after " + id);
          auto n = std::make_shared<N>();
          n->kind = N::Call;
          n->fn = f.fn;
          n->a = sum();
          if (!eat(')')) error("expected ')'");
          return n;
        }
      }
      pos_ = start;
      error("unknown identifier '" + id + "'");
    }
    error("unexpected '" + std::string(1, c) + "'");
  }
};

}  // namespace

Expression::Expression() : text_("0"), root_(make(N::Num)) {}

Expression Expression::parse(const std::string& text) {
  Expression e;
  e.text_ = text;
  e.root_ = Parser(text).parse();
  return e;
}

double Expression::operator()(double x, double mu, double eps) const { return root_->eval(x, mu, eps); }
bool Expression::depends_on_x() const { return root_->uses(N::VarX); }
bool Expression::depends_on_mu() const { return root_->uses(N::VarMu); }
bool Expression::depends_on_eps() const { return root_->uses(N::VarEps); }

}  // namespace slabdsa
