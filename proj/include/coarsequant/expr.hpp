#pragma once
//
// Tiny expression sublanguage for user-defined scalar symbols:
// identifiers (x, y, xi, eta), complex literals (i), standard functions,
// and the usual arithmetic with ^ for powers.
//

#include "coarsequant/common.hpp"

#include <map>
#include <memory>
#include <string>

namespace cq::expr {

using Env = std::map<std::string, cplx>;

class Expression {
 public:
  // Throws ConfigInvalid on parse errors.
  static Expression parse(const std::string& text);

  cplx eval(const Env& env) const;

  const std::string& text() const { return text_; }

  struct Node;  // exposed for the parser implementation

 private:
  std::shared_ptr<const Node> root_;
  std::string text_;
};

}  // namespace cq::expr
