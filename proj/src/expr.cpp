#include "loopdom/expr.hpp"

#include <charconv>
#include <cmath>
#include <string_view>

namespace loopdom {

Expr Expr::literal(double value, SourceLoc loc) {
  Expr e;
  e.op = Op::Number;
  e.number = value;
  e.loc = loc;
  return e;
}

Expr Expr::variable(std::string name, SourceLoc loc) {
  Expr e;
  e.op = Op::Variable;
  e.name = std::move(name);
  e.loc = loc;
  return e;
}

Expr Expr::builtin(Op op, SourceLoc loc) {
  Expr e;
  e.op = op;
  e.loc = loc;
  return e;
}

Expr Expr::node(Op op, std::vector<Expr> args, SourceLoc loc) {
  Expr e;
  e.op = op;
  e.args = std::move(args);
  e.loc = loc;
  return e;
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.op != b.op) return false;
  switch (a.op) {
    case Op::Number:
      return a.number == b.number;
    case Op::Variable:
      return a.name == b.name;
    default:
      return a.args == b.args;
  }
}

namespace {

int precedence(Op op) {
  switch (op) {
    case Op::If:
      return 0;
    case Op::Or:
      return 1;
    case Op::And:
      return 2;
    case Op::Less:
    case Op::Greater:
    case Op::LessEq:
    case Op::GreaterEq:
    case Op::Equal:
    case Op::NotEqual:
      return 3;
    case Op::Add:
    case Op::Sub:
      return 4;
    case Op::Mul:
    case Op::Div:
      return 5;
    case Op::Negate:
    case Op::Not:
      return 6;
    default:
      return 7;
  }
}

std::string_view symbol(Op op) {
  switch (op) {
    case Op::Add: return "+";
    case Op::Sub: return "-";
    case Op::Mul: return "*";
    case Op::Div: return "/";
    case Op::Less: return "<";
    case Op::Greater: return ">";
    case Op::LessEq: return "<=";
    case Op::GreaterEq: return ">=";
    case Op::Equal: return "=";
    case Op::NotEqual: return "<>";
    case Op::And: return "AND";
    case Op::Or: return "OR";
    case Op::Min: return "MIN";
    case Op::Max: return "MAX";
    case Op::Abs: return "ABS";
    default: return "?";
  }
}

void format_number(double v, std::string& out) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, end);
}

void print(const Expr& e, std::string& out);

void print_child(const Expr& child, bool parens, std::string& out) {
  if (parens) out += '(';
  print(child, out);
  if (parens) out += ')';
}

void print(const Expr& e, std::string& out) {
  const int p = precedence(e.op);
  switch (e.op) {
    case Op::Number:
      format_number(e.number, out);
      return;
    case Op::Variable:
      out += e.name;
      return;
    case Op::Dt:
      out += "DT";
      return;
    case Op::Time:
      out += "TIME";
      return;
    case Op::Negate:
      out += '-';
      print_child(e.args[0], precedence(e.args[0].op) < p, out);
      return;
    case Op::Not:
      out += "NOT ";
      print_child(e.args[0], precedence(e.args[0].op) < p, out);
      return;
    case Op::If:
      out += "IF ";
      print_child(e.args[0], e.args[0].op == Op::If, out);
      out += " THEN ";
      print_child(e.args[1], e.args[1].op == Op::If, out);
      out += " ELSE ";
      print(e.args[2], out);
      return;
    case Op::Min:
    case Op::Max:
    case Op::Abs:
      out += symbol(e.op);
      out += '(';
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) out += ", ";
        print(e.args[i], out);
      }
      out += ')';
      return;
    default: {
      // Comparisons do not chain, so both sides need parens at equal level.
      const bool comparison = p == 3;
      const int lp = precedence(e.args[0].op);
      const int rp = precedence(e.args[1].op);
      print_child(e.args[0], comparison ? lp <= p : lp < p, out);
      out += ' ';
      out += symbol(e.op);
      out += ' ';
      print_child(e.args[1], rp <= p, out);
      return;
    }
  }
}

void collect(const Expr& e, std::vector<std::string>& out) {
  if (e.op == Op::Variable) {
    for (const auto& n : out)
      if (n == e.name) return;
    out.push_back(e.name);
    return;
  }
  for (const auto& a : e.args) collect(a, out);
}

void number_ifs(Expr& e, int& next) {
  if (e.op == Op::If) e.branch_slot = next++;
  for (auto& a : e.args) number_ifs(a, next);
}

}  // namespace

std::string to_string(const Expr& e) {
  std::string out;
  print(e, out);
  return out;
}

std::vector<std::string> referenced_names(const Expr& e) {
  std::vector<std::string> out;
  collect(e, out);
  return out;
}

bool references(const Expr& e, int var) {
  if (e.op == Op::Variable) return e.var == var;
  for (const auto& a : e.args)
    if (references(a, var)) return true;
  return false;
}

int assign_branch_slots(Expr& e) {
  int next = 0;
  number_ifs(e, next);
  return next;
}

Expr gate(const Expr& e, std::span<const Branch> branches) {
  if (e.op == Op::If && e.branch_slot >= 0 &&
      static_cast<std::size_t>(e.branch_slot) < branches.size()) {
    const Branch b = branches[e.branch_slot];
    if (b == Branch::Then) return gate(e.args[1], branches);
    if (b == Branch::Else) return gate(e.args[2], branches);
  }
  Expr copy = e;
  for (auto& a : copy.args) a = gate(a, branches);
  return copy;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

inline double value_of(double v) { return v; }
inline double value_of(const Dual& d) { return d.value; }

inline Dual make(double v, Dual) { return {v, 0.0}; }
inline double make(double v, double) { return v; }

inline Dual operator+(Dual a, Dual b) { return {a.value + b.value, a.deriv + b.deriv}; }
inline Dual operator-(Dual a, Dual b) { return {a.value - b.value, a.deriv - b.deriv}; }
inline Dual operator-(Dual a) { return {-a.value, -a.deriv}; }
inline Dual operator*(Dual a, Dual b) {
  return {a.value * b.value, a.deriv * b.value + a.value * b.deriv};
}
inline Dual operator/(Dual a, Dual b) {
  return {a.value / b.value, (a.deriv * b.value - a.value * b.deriv) / (b.value * b.value)};
}
inline Dual abs_of(Dual a) { return a.value < 0 ? -a : a; }
inline double abs_of(double a) { return std::fabs(a); }

template <class T>
T eval(const Expr& e, const EvalEnv<T>& env) {
  const T zero = make(0.0, T{});
  const T one = make(1.0, T{});
  auto truth = [&](bool b) { return b ? one : zero; };
  switch (e.op) {
    case Op::Number:
      return make(e.number, T{});
    case Op::Variable:
      if (e.var < 0 || static_cast<std::size_t>(e.var) >= env.values.size())
        throw EvalError("unresolved reference " + e.name, e.loc);
      return env.values[e.var];
    case Op::Dt:
      return make(env.dt, T{});
    case Op::Time:
      return make(env.time, T{});
    case Op::Negate:
      return -eval(e.args[0], env);
    case Op::Not:
      return truth(value_of(eval(e.args[0], env)) == 0.0);
    case Op::Add:
      return eval(e.args[0], env) + eval(e.args[1], env);
    case Op::Sub:
      return eval(e.args[0], env) - eval(e.args[1], env);
    case Op::Mul:
      return eval(e.args[0], env) * eval(e.args[1], env);
    case Op::Div: {
      const T num = eval(e.args[0], env);
      const T den = eval(e.args[1], env);
      if (value_of(den) == 0.0) throw EvalError("division by zero", e.loc);
      return num / den;
    }
    case Op::Less:
      return truth(value_of(eval(e.args[0], env)) < value_of(eval(e.args[1], env)));
    case Op::Greater:
      return truth(value_of(eval(e.args[0], env)) > value_of(eval(e.args[1], env)));
    case Op::LessEq:
      return truth(value_of(eval(e.args[0], env)) <= value_of(eval(e.args[1], env)));
    case Op::GreaterEq:
      return truth(value_of(eval(e.args[0], env)) >= value_of(eval(e.args[1], env)));
    case Op::Equal:
      return truth(value_of(eval(e.args[0], env)) == value_of(eval(e.args[1], env)));
    case Op::NotEqual:
      return truth(value_of(eval(e.args[0], env)) != value_of(eval(e.args[1], env)));
    case Op::And: {
      const bool a = value_of(eval(e.args[0], env)) != 0.0;
      const bool b = value_of(eval(e.args[1], env)) != 0.0;
      return truth(a && b);
    }
    case Op::Or: {
      const bool a = value_of(eval(e.args[0], env)) != 0.0;
      const bool b = value_of(eval(e.args[1], env)) != 0.0;
      return truth(a || b);
    }
    case Op::If: {
      const bool taken = value_of(eval(e.args[0], env)) != 0.0;
      if (e.branch_slot >= 0 && static_cast<std::size_t>(e.branch_slot) < env.branches.size())
        env.branches[e.branch_slot] = taken ? Branch::Then : Branch::Else;
      return eval(e.args[taken ? 1 : 2], env);
    }
    case Op::Min:
    case Op::Max: {
      T best = eval(e.args[0], env);
      for (std::size_t i = 1; i < e.args.size(); ++i) {
        T v = eval(e.args[i], env);
        const bool better =
            e.op == Op::Min ? value_of(v) < value_of(best) : value_of(v) > value_of(best);
        if (better) best = v;
      }
      return best;
    }
    case Op::Abs:
      return abs_of(eval(e.args[0], env));
  }
  throw EvalError("unknown expression node", e.loc);
}

}  // namespace

template <class T>
T evaluate(const Expr& e, const EvalEnv<T>& env) {
  return eval(e, env);
}

template double evaluate<double>(const Expr&, const EvalEnv<double>&);
template Dual evaluate<Dual>(const Expr&, const EvalEnv<Dual>&);

}  // namespace loopdom
