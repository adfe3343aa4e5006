#pragma once

#include <memory>
#include <string>

namespace slabdsa {

// Arithmetic expressions in x, mu and eps, used for config-supplied
// coefficients and sources. Grammar: + - * / ^ (right associative), unary
// minus, parentheses, numbers, the constant pi and the functions
// sin cos tan exp log sqrt abs.
class Expression {
 public:
  Expression();
  // Throws Error(Config) with the offending position on bad input.
  static Expression parse(const std::string& text);

  double operator()(double x, double mu = 0.0, double eps = 1.0) const;
  const std::string& text() const { return text_; }
  bool depends_on_x() const;
  bool depends_on_mu() const;
  bool depends_on_eps() const;

  struct Node;

 private:
  std::string text_;
  std::shared_ptr<const Node> root_;
};

}  // namespace slabdsa
