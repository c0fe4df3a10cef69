#include "coarsequant/expr.hpp"

#include <cctype>
#include <cmath>
#include <functional>
#include <vector>

namespace cq::expr {

struct Expression::Node {
  enum class Kind { Constant, Variable, Unary, Binary, Call };
  Kind kind;
  cplx value{};
  std::string name;
  char op = 0;
  std::shared_ptr<const Node> lhs, rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Node = Expression::Node;

struct Token {
  enum class Kind { Number, Ident, Op, LParen, RParen, Comma, End };
  Kind kind;
  double number = 0.0;
  std::string text;
  char op = 0;
};

std::vector<Token> tokenize(const std::string& s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t end = i;
      while (end < s.size() &&
             (std::isdigit(static_cast<unsigned char>(s[end])) ||
              s[end] == '.' || s[end] == 'e' || s[end] == 'E' ||
              ((s[end] == '+' || s[end] == '-') && end > i &&
               (s[end - 1] == 'e' || s[end - 1] == 'E'))))
        ++end;
      Token t;
      t.kind = Token::Kind::Number;
      try {
        t.number = std::stod(s.substr(i, end - i));
      } catch (const std::exception&) {
        throw ConfigInvalid("bad numeric literal in expression");
      }
      out.push_back(t);
      i = end;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t end = i;
      while (end < s.size() &&
             (std::isalnum(static_cast<unsigned char>(s[end])) ||
              s[end] == '_'))
        ++end;
      Token t;
      t.kind = Token::Kind::Ident;
      t.text = s.substr(i, end - i);
      out.push_back(t);
      i = end;
      continue;
    }
    Token t;
    switch (c) {
      case '+': case '-': case '*': case '/': case '^':
        t.kind = Token::Kind::Op;
        t.op = c;
        break;
      case '(': t.kind = Token::Kind::LParen; break;
      case ')': t.kind = Token::Kind::RParen; break;
      case ',': t.kind = Token::Kind::Comma; break;
      default:
        throw ConfigInvalid(std::string("unexpected character '") + c +
                            "' in expression");
    }
    out.push_back(t);
    ++i;
  }
  Token end;
  end.kind = Token::Kind::End;
  out.push_back(end);
  return out;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  NodePtr parse() {
    NodePtr e = expression();
    if (peek().kind != Token::Kind::End)
      throw ConfigInvalid("trailing input in expression");
    return e;
  }

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;

  const Token& peek() const { return tokens_[pos_]; }
  Token take() { return tokens_[pos_++]; }

  static NodePtr make_binary(char op, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Binary;
    n->op = op;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
  }

  NodePtr expression() {
    NodePtr lhs = term();
    while (peek().kind == Token::Kind::Op &&
           (peek().op == '+' || peek().op == '-')) {
      char op = take().op;
      lhs = make_binary(op, lhs, term());
    }
    return lhs;
  }

  NodePtr term() {
    NodePtr lhs = power();
    while (peek().kind == Token::Kind::Op &&
           (peek().op == '*' || peek().op == '/')) {
      char op = take().op;
      lhs = make_binary(op, lhs, power());
    }
    return lhs;
  }

  NodePtr power() {  // right associative
    NodePtr base = unary();
    if (peek().kind == Token::Kind::Op && peek().op == '^') {
      take();
      return make_binary('^', base, power());
    }
    return base;
  }

  NodePtr unary() {
    if (peek().kind == Token::Kind::Op &&
        (peek().op == '-' || peek().op == '+')) {
      char op = take().op;
      NodePtr operand = unary();
      if (op == '+') return operand;
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::Unary;
      n->op = '-';
      n->lhs = operand;
      return n;
    }
    return primary();
  }

  NodePtr primary() {
    Token t = take();
    if (t.kind == Token::Kind::Number) {
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::Constant;
      n->value = t.number;
      return n;
    }
    if (t.kind == Token::Kind::LParen) {
      NodePtr e = expression();
      if (take().kind != Token::Kind::RParen)
        throw ConfigInvalid("missing ')' in expression");
      return e;
    }
    if (t.kind == Token::Kind::Ident) {
      if (peek().kind == Token::Kind::LParen) {
        take();
        NodePtr arg = expression();
        if (take().kind != Token::Kind::RParen)
          throw ConfigInvalid("missing ')' after call in expression");
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Call;
        n->name = t.text;
        n->lhs = arg;
        return n;
      }
      auto n = std::make_shared<Node>();
      if (t.text == "i") {
        n->kind = Node::Kind::Constant;
        n->value = cplx(0.0, 1.0);
      } else if (t.text == "pi") {
        n->kind = Node::Kind::Constant;
        n->value = kPi;
      } else {
        n->kind = Node::Kind::Variable;
        n->name = t.text;
      }
      return n;
    }
    throw ConfigInvalid("unexpected token in expression");
  }
};

cplx eval_node(const Node& n, const Env& env) {
  switch (n.kind) {
    case Node::Kind::Constant:
      return n.value;
    case Node::Kind::Variable: {
      auto it = env.find(n.name);
      if (it == env.end())
        throw ConfigInvalid("unknown identifier '" + n.name +
                            "' in expression");
      return it->second;
    }
    case Node::Kind::Unary:
      return -eval_node(*n.lhs, env);
    case Node::Kind::Binary: {
      cplx a = eval_node(*n.lhs, env);
      cplx b = eval_node(*n.rhs, env);
      switch (n.op) {
        case '+': return a + b;
        case '-': return a - b;
        case '*': return a * b;
        case '/': return a / b;
        default:  return std::pow(a, b);
      }
    }
    case Node::Kind::Call: {
      cplx a = eval_node(*n.lhs, env);
      if (n.name == "sin") return std::sin(a);
      if (n.name == "cos") return std::cos(a);
      if (n.name == "tan") return std::tan(a);
      if (n.name == "exp") return std::exp(a);
      if (n.name == "log") return std::log(a);
      if (n.name == "sqrt") return std::sqrt(a);
      if (n.name == "abs") return cplx(std::abs(a));
      if (n.name == "conj") return std::conj(a);
      if (n.name == "re") return cplx(a.real());
      if (n.name == "im") return cplx(a.imag());
      throw ConfigInvalid("unknown function '" + n.name + "' in expression");
    }
  }
  return {};
}

}  // namespace

Expression Expression::parse(const std::string& text) {
  Expression e;
  e.text_ = text;
  e.root_ = Parser(tokenize(text)).parse();
  return e;
}

cplx Expression::eval(const Env& env) const {
  return eval_node(*root_, env);
}

}  // namespace cq::expr
