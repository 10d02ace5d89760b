#pragma once

// Scalar expression graphs with symbolic reverse-mode differentiation.
//
// A Graph is an append-only arena of nodes; every operand of a node has a
// smaller id than the node itself, so node ids are a topological order.
// Differentiation emits new nodes into the same graph, which is what lets a
// loss built from u_t and u_xx be differentiated again with respect to the
// network parameters.

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace fisher_pinn::autodiff {

enum class Op : std::uint8_t { Constant, Variable, Add, Sub, Mul, Div, Neg, Tanh, Exp, Pow };

using NodeId = std::int32_t;

struct Node {
  Op op = Op::Constant;
  NodeId lhs = -1;  // first operand, or variable slot for Op::Variable
  NodeId rhs = -1;
  double constant = 0.0;  // literal for Constant, exponent for Pow
};

class Graph;

/// Lightweight handle to a node. Valid as long as its Graph is alive.
class Expr {
 public:
  Expr() = default;

  [[nodiscard]] Graph* graph() const noexcept { return graph_; }
  [[nodiscard]] NodeId id() const noexcept { return id_; }
  [[nodiscard]] bool valid() const noexcept { return graph_ != nullptr && id_ >= 0; }

 private:
  friend class Graph;
  Expr(Graph* graph, NodeId id) : graph_(graph), id_(id) {}

  Graph* graph_ = nullptr;
  NodeId id_ = -1;
};

class UnboundVariable : public std::runtime_error {
 public:
  explicit UnboundVariable(const std::string& name)
      : std::runtime_error("unbound variable '" + name + "'"), name_(name) {}
  [[nodiscard]] const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class Graph {
 public:
  Graph();
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;
  Graph(Graph&&) = delete;
  Graph& operator=(Graph&&) = delete;

  Expr constant(double value);
  Expr variable(std::string name);

  Expr add(Expr a, Expr b);
  Expr sub(Expr a, Expr b);
  Expr mul(Expr a, Expr b);
  Expr div(Expr a, Expr b);
  Expr neg(Expr a);
  Expr tanh(Expr a);
  Expr exp(Expr a);
  Expr pow(Expr a, double exponent);

  /// Handle for an existing node id.
  [[nodiscard]] Expr handle(NodeId id);

  [[nodiscard]] const Node& node(NodeId id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }
  [[nodiscard]] std::size_t variable_count() const noexcept { return variable_names_.size(); }
  [[nodiscard]] const std::string& variable_name(Expr var) const;
  [[nodiscard]] const std::string& slot_name(NodeId slot) const { return variable_names_.at(static_cast<std::size_t>(slot)); }
  [[nodiscard]] bool is_constant(Expr e, double value) const;
  [[nodiscard]] bool is_variable(Expr e) const;

 private:
  Expr push(Node node);
  void check_owned(Expr e) const;

  std::vector<Node> nodes_;
  std::vector<std::string> variable_names_;
  Expr zero_;
  Expr one_;
};

/// Values for the variables of one graph, indexed by variable slot.
class Bindings {
 public:
  Bindings() = default;
  explicit Bindings(const Graph& graph) { reserve(graph); }

  void reserve(const Graph& graph);
  void set(Expr var, double value);
  [[nodiscard]] bool bound(NodeId slot) const noexcept;
  [[nodiscard]] double value(NodeId slot) const { return values_.at(static_cast<std::size_t>(slot)); }

 private:
  std::vector<double> values_;
  std::vector<bool> bound_;
};

/// First derivatives keyed by variable; holds an entry for every requested
/// variable, zero when the expression does not depend on it.
class Gradient {
 public:
  void insert(Expr var, double value) { values_[var.id()] = value; }
  [[nodiscard]] double at(Expr var) const;
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] bool contains(Expr var) const { return values_.contains(var.id()); }

 private:
  std::unordered_map<NodeId, double> values_;
};

[[nodiscard]] double evaluate(Expr expr, const Bindings& bindings);

/// Values of every node reachable from `expr`; unreachable entries are 0.
[[nodiscard]] std::vector<double> evaluate_nodes(Expr expr, const Bindings& bindings);

/// Numeric reverse sweep.
[[nodiscard]] Gradient grad(Expr expr, std::span<const Expr> wrt, const Bindings& bindings);

/// Numeric reverse sweep into a dense vector ordered like `wrt`.
void grad_into(Expr expr, std::span<const Expr> wrt, const Bindings& bindings, std::span<double> out);

/// Symbolic reverse sweep: returns d expr / d var as a new expression in the
/// same graph, so it can be differentiated again.
[[nodiscard]] Expr derivative(Expr expr, Expr var);
[[nodiscard]] std::vector<Expr> derivatives(Expr expr, std::span<const Expr> vars);

/// d^2 expr / d var^2 at `bindings`. Builds the derivative graph on the way.
[[nodiscard]] double second_derivative(Expr expr, Expr var, const Bindings& bindings);

Expr operator+(Expr a, Expr b);
Expr operator-(Expr a, Expr b);
Expr operator*(Expr a, Expr b);
Expr operator/(Expr a, Expr b);
Expr operator-(Expr a);
Expr operator+(Expr a, double b);
Expr operator+(double a, Expr b);
Expr operator-(Expr a, double b);
Expr operator-(double a, Expr b);
Expr operator*(Expr a, double b);
Expr operator*(double a, Expr b);
Expr operator/(Expr a, double b);
Expr operator/(double a, Expr b);

Expr tanh(Expr a);
Expr exp(Expr a);
Expr pow(Expr a, double exponent);
Expr sqrt(Expr a);

}  // namespace fisher_pinn::autodiff
