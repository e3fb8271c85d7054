#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace loopdom {

struct SourceLoc {
  int line = 0;
  int column = 0;
};

enum class Op : std::uint8_t {
  Number,
  Variable,
  Dt,
  Time,
  Negate,
  Not,
  Add,
  Sub,
  Mul,
  Div,
  Less,
  Greater,
  LessEq,
  GreaterEq,
  Equal,
  NotEqual,
  And,
  Or,
  If,  // args: condition, then, else
  Min,
  Max,
  Abs,
};

/// Branch taken by one IF node at one evaluation step.
enum class Branch : std::uint8_t { Unreached = 0, Then = 1, Else = 2 };

/// Expression tree node. Equality is structural: source locations and
/// resolved slots are ignored.
struct Expr {
  Op op = Op::Number;
  double number = 0.0;
  std::string name;      // Op::Variable
  int var = -1;          // Op::Variable, index into the owning model
  int branch_slot = -1;  // Op::If, pre-order index within the equation
  std::vector<Expr> args;
  SourceLoc loc;

  static Expr literal(double value, SourceLoc loc = {});
  static Expr variable(std::string name, SourceLoc loc = {});
  static Expr builtin(Op op, SourceLoc loc = {});
  static Expr node(Op op, std::vector<Expr> args, SourceLoc loc = {});

  friend bool operator==(const Expr& a, const Expr& b);
};

/// Renders with the minimal parentheses needed to re-parse to the same tree.
std::string to_string(const Expr& e);

/// Distinct variable names in first-occurrence (pre-order) order.
std::vector<std::string> referenced_names(const Expr& e);

bool references(const Expr& e, int var);

/// Numbers IF nodes in pre-order starting at 0 and returns the count.
int assign_branch_slots(Expr& e);

/// Replaces every IF node by the branch recorded for its slot. IF nodes
/// whose branch is Unreached are kept as-is.
Expr gate(const Expr& e, std::span<const Branch> branches);

class EvalError : public std::runtime_error {
 public:
  EvalError(const std::string& what, SourceLoc loc)
      : std::runtime_error(what), loc_(loc) {}
  SourceLoc loc() const { return loc_; }

 private:
  SourceLoc loc_;
};

/// Forward-mode dual number for exact first derivatives.
struct Dual {
  double value = 0.0;
  double deriv = 0.0;
};

template <class T>
struct EvalEnv {
  std::span<const T> values;  // indexed by Expr::var
  double dt = 1.0;
  double time = 0.0;
  std::span<Branch> branches = {};  // optional IF recorder, indexed by slot
};

/// Evaluates with 0/1 booleans. Throws EvalError on division by zero or an
/// unresolved variable.
template <class T>
T evaluate(const Expr& e, const EvalEnv<T>& env);

extern template double evaluate<double>(const Expr&, const EvalEnv<double>&);
extern template Dual evaluate<Dual>(const Expr&, const EvalEnv<Dual>&);

}  // namespace loopdom
