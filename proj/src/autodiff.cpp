#include "fisher_pinn/autodiff.hpp"

#include <cmath>
#include <utility>

namespace fisher_pinn::autodiff {

namespace {

Graph& owner(Expr a, Expr b) {
  if (a.graph() == nullptr || a.graph() != b.graph()) {
    throw std::invalid_argument("operands belong to different expression graphs");
  }
  return *a.graph();
}

Graph& owner(Expr a) {
  if (a.graph() == nullptr) throw std::invalid_argument("invalid expression handle");
  return *a.graph();
}

// Marks every node reachable from root. Operands precede their users, so one
// descending sweep suffices.
std::vector<bool> reachable_from(const Graph& g, NodeId root) {
  std::vector<bool> live(static_cast<std::size_t>(root) + 1, false);
  live[static_cast<std::size_t>(root)] = true;
  for (NodeId i = root; i >= 0; --i) {
    if (!live[static_cast<std::size_t>(i)]) continue;
    const Node& n = g.node(i);
    if (n.op == Op::Constant || n.op == Op::Variable) continue;
    live[static_cast<std::size_t>(n.lhs)] = true;
    if (n.rhs >= 0) live[static_cast<std::size_t>(n.rhs)] = true;
  }
  return live;
}

}  // namespace

Graph::Graph() {
  nodes_.reserve(64);
  zero_ = push({Op::Constant, -1, -1, 0.0});
  one_ = push({Op::Constant, -1, -1, 1.0});
}

Expr Graph::push(Node node) {
  nodes_.push_back(node);
  return Expr(this, static_cast<NodeId>(nodes_.size() - 1));
}

void Graph::check_owned(Expr e) const {
  if (e.graph() != this || e.id() < 0 || static_cast<std::size_t>(e.id()) >= nodes_.size()) {
    throw std::invalid_argument("expression does not belong to this graph");
  }
}

Expr Graph::handle(NodeId id) {
  if (id < 0) return Expr();
  return Expr(this, id);
}

bool Graph::is_constant(Expr e, double value) const {
  const Node& n = node(e.id());
  return n.op == Op::Constant && n.constant == value;
}

bool Graph::is_variable(Expr e) const { return node(e.id()).op == Op::Variable; }

const std::string& Graph::variable_name(Expr var) const {
  check_owned(var);
  const Node& n = node(var.id());
  if (n.op != Op::Variable) throw std::invalid_argument("expression is not a variable");
  return variable_names_[static_cast<std::size_t>(n.lhs)];
}

Expr Graph::constant(double value) {
  if (value == 0.0 && !std::signbit(value)) return zero_;
  if (value == 1.0) return one_;
  return push({Op::Constant, -1, -1, value});
}

Expr Graph::variable(std::string name) {
  variable_names_.push_back(std::move(name));
  return push({Op::Variable, static_cast<NodeId>(variable_names_.size() - 1), -1, 0.0});
}

Expr Graph::add(Expr a, Expr b) {
  check_owned(a);
  check_owned(b);
  const Node& na = node(a.id());
  const Node& nb = node(b.id());
  if (na.op == Op::Constant && nb.op == Op::Constant) return constant(na.constant + nb.constant);
  if (is_constant(a, 0.0)) return b;
  if (is_constant(b, 0.0)) return a;
  return push({Op::Add, a.id(), b.id(), 0.0});
}

Expr Graph::sub(Expr a, Expr b) {
  check_owned(a);
  check_owned(b);
  const Node& na = node(a.id());
  const Node& nb = node(b.id());
  if (na.op == Op::Constant && nb.op == Op::Constant) return constant(na.constant - nb.constant);
  if (is_constant(b, 0.0)) return a;
  if (is_constant(a, 0.0)) return neg(b);
  return push({Op::Sub, a.id(), b.id(), 0.0});
}

Expr Graph::mul(Expr a, Expr b) {
  check_owned(a);
  check_owned(b);
  const Node& na = node(a.id());
  const Node& nb = node(b.id());
  if (na.op == Op::Constant && nb.op == Op::Constant) return constant(na.constant * nb.constant);
  if (is_constant(a, 0.0) || is_constant(b, 0.0)) return zero_;
  if (is_constant(a, 1.0)) return b;
  if (is_constant(b, 1.0)) return a;
  return push({Op::Mul, a.id(), b.id(), 0.0});
}

Expr Graph::div(Expr a, Expr b) {
  check_owned(a);
  check_owned(b);
  const Node& na = node(a.id());
  const Node& nb = node(b.id());
  if (na.op == Op::Constant && nb.op == Op::Constant) return constant(na.constant / nb.constant);
  if (is_constant(b, 1.0)) return a;
  if (is_constant(a, 0.0)) return zero_;
  return push({Op::Div, a.id(), b.id(), 0.0});
}

Expr Graph::neg(Expr a) {
  check_owned(a);
  const Node& na = node(a.id());
  if (na.op == Op::Constant) return constant(-na.constant);
  if (na.op == Op::Neg) return Expr(this, na.lhs);
  return push({Op::Neg, a.id(), -1, 0.0});
}

Expr Graph::tanh(Expr a) {
  check_owned(a);
  const Node& na = node(a.id());
  if (na.op == Op::Constant) return constant(std::tanh(na.constant));
  return push({Op::Tanh, a.id(), -1, 0.0});
}

Expr Graph::exp(Expr a) {
  check_owned(a);
  const Node& na = node(a.id());
  if (na.op == Op::Constant) return constant(std::exp(na.constant));
  return push({Op::Exp, a.id(), -1, 0.0});
}

Expr Graph::pow(Expr a, double exponent) {
  check_owned(a);
  const Node& na = node(a.id());
  if (na.op == Op::Constant) return constant(std::pow(na.constant, exponent));
  if (exponent == 0.0) return one_;
  if (exponent == 1.0) return a;
  return push({Op::Pow, a.id(), -1, exponent});
}

void Bindings::reserve(const Graph& graph) {
  if (values_.size() < graph.variable_count()) {
    values_.resize(graph.variable_count(), 0.0);
    bound_.resize(graph.variable_count(), false);
  }
}

void Bindings::set(Expr var, double value) {
  const Node& n = var.graph()->node(var.id());
  if (n.op != Op::Variable) throw std::invalid_argument("only variables can be bound");
  const auto slot = static_cast<std::size_t>(n.lhs);
  if (slot >= values_.size()) {
    values_.resize(slot + 1, 0.0);
    bound_.resize(slot + 1, false);
  }
  values_[slot] = value;
  bound_[slot] = true;
}

bool Bindings::bound(NodeId slot) const noexcept {
  return slot >= 0 && static_cast<std::size_t>(slot) < bound_.size() && bound_[static_cast<std::size_t>(slot)];
}

double Gradient::at(Expr var) const {
  auto it = values_.find(var.id());
  if (it == values_.end()) throw std::out_of_range("variable not in gradient");
  return it->second;
}

std::vector<double> evaluate_nodes(Expr expr, const Bindings& bindings) {
  const Graph& g = owner(expr);
  const NodeId root = expr.id();
  const std::vector<bool> live = reachable_from(g, root);
  std::vector<double> val(static_cast<std::size_t>(root) + 1, 0.0);
  for (NodeId i = 0; i <= root; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (!live[k]) continue;
    const Node& n = g.node(i);
    const auto a = static_cast<std::size_t>(n.lhs);
    const auto b = static_cast<std::size_t>(n.rhs);
    switch (n.op) {
      case Op::Constant: val[k] = n.constant; break;
      case Op::Variable:
        if (!bindings.bound(n.lhs)) throw UnboundVariable(g.slot_name(n.lhs));
        val[k] = bindings.value(n.lhs);
        break;
      case Op::Add: val[k] = val[a] + val[b]; break;
      case Op::Sub: val[k] = val[a] - val[b]; break;
      case Op::Mul: val[k] = val[a] * val[b]; break;
      case Op::Div: val[k] = val[a] / val[b]; break;
      case Op::Neg: val[k] = -val[a]; break;
      case Op::Tanh: val[k] = std::tanh(val[a]); break;
      case Op::Exp: val[k] = std::exp(val[a]); break;
      case Op::Pow: val[k] = std::pow(val[a], n.constant); break;
    }
  }
  return val;
}

double evaluate(Expr expr, const Bindings& bindings) {
  return evaluate_nodes(expr, bindings)[static_cast<std::size_t>(expr.id())];
}

namespace {

std::vector<double> adjoints(Expr expr, const std::vector<double>& val) {
  const Graph& g = *expr.graph();
  const NodeId root = expr.id();
  std::vector<double> adj(static_cast<std::size_t>(root) + 1, 0.0);
  adj[static_cast<std::size_t>(root)] = 1.0;
  for (NodeId i = root; i >= 0; --i) {
    const auto k = static_cast<std::size_t>(i);
    const double w = adj[k];
    if (w == 0.0) continue;
    const Node& n = g.node(i);
    const auto a = static_cast<std::size_t>(n.lhs);
    const auto b = static_cast<std::size_t>(n.rhs);
    switch (n.op) {
      case Op::Constant:
      case Op::Variable: break;
      case Op::Add: adj[a] += w; adj[b] += w; break;
      case Op::Sub: adj[a] += w; adj[b] -= w; break;
      case Op::Mul: adj[a] += w * val[b]; adj[b] += w * val[a]; break;
      case Op::Div:
        adj[a] += w / val[b];
        adj[b] -= w * val[k] / val[b];
        break;
      case Op::Neg: adj[a] -= w; break;
      case Op::Tanh: adj[a] += w * (1.0 - val[k] * val[k]); break;
      case Op::Exp: adj[a] += w * val[k]; break;
      case Op::Pow: adj[a] += w * n.constant * std::pow(val[a], n.constant - 1.0); break;
    }
  }
  return adj;
}

}  // namespace

void grad_into(Expr expr, std::span<const Expr> wrt, const Bindings& bindings, std::span<double> out) {
  if (out.size() != wrt.size()) throw std::invalid_argument("gradient output size mismatch");
  const std::vector<double> val = evaluate_nodes(expr, bindings);
  const std::vector<double> adj = adjoints(expr, val);
  for (std::size_t i = 0; i < wrt.size(); ++i) {
    const NodeId id = wrt[i].id();
    out[i] = id <= expr.id() ? adj[static_cast<std::size_t>(id)] : 0.0;
  }
}

Gradient grad(Expr expr, std::span<const Expr> wrt, const Bindings& bindings) {
  std::vector<double> dense(wrt.size());
  grad_into(expr, wrt, bindings, dense);
  Gradient out;
  for (std::size_t i = 0; i < wrt.size(); ++i) out.insert(wrt[i], dense[i]);
  return out;
}

std::vector<Expr> derivatives(Expr expr, std::span<const Expr> vars) {
  Graph& g = owner(expr);
  const NodeId root = expr.id();
  // Invalid handle stands for a zero adjoint.
  std::vector<Expr> adj(static_cast<std::size_t>(root) + 1);
  auto accumulate = [&](NodeId target, Expr contribution) {
    Expr& slot = adj[static_cast<std::size_t>(target)];
    slot = slot.valid() ? g.add(slot, contribution) : contribution;
  };
  adj[static_cast<std::size_t>(root)] = g.constant(1.0);
  for (NodeId i = root; i >= 0; --i) {
    const Expr w = adj[static_cast<std::size_t>(i)];
    if (!w.valid() || g.is_constant(w, 0.0)) continue;
    // Copy: emitting nodes may reallocate the arena.
    const Node n = g.node(i);
    const Expr self = g.handle(i);
    const Expr a = g.handle(n.lhs);
    const Expr b = g.handle(n.rhs);
    switch (n.op) {
      case Op::Constant:
      case Op::Variable: break;
      case Op::Add:
        accumulate(n.lhs, w);
        accumulate(n.rhs, w);
        break;
      case Op::Sub:
        accumulate(n.lhs, w);
        accumulate(n.rhs, g.neg(w));
        break;
      case Op::Mul:
        accumulate(n.lhs, g.mul(w, b));
        accumulate(n.rhs, g.mul(w, a));
        break;
      case Op::Div:
        accumulate(n.lhs, g.div(w, b));
        accumulate(n.rhs, g.neg(g.div(g.mul(w, self), b)));
        break;
      case Op::Neg: accumulate(n.lhs, g.neg(w)); break;
      case Op::Tanh: accumulate(n.lhs, g.mul(w, g.sub(g.constant(1.0), g.mul(self, self)))); break;
      case Op::Exp: accumulate(n.lhs, g.mul(w, self)); break;
      case Op::Pow:
        accumulate(n.lhs, g.mul(w, g.mul(g.constant(n.constant), g.pow(a, n.constant - 1.0))));
        break;
    }
  }
  std::vector<Expr> out;
  out.reserve(vars.size());
  for (const Expr& v : vars) {
    const bool reached = v.id() <= root && adj[static_cast<std::size_t>(v.id())].valid();
    out.push_back(reached ? adj[static_cast<std::size_t>(v.id())] : g.constant(0.0));
  }
  return out;
}

Expr derivative(Expr expr, Expr var) {
  const Expr vars[] = {var};
  return derivatives(expr, vars).front();
}

double second_derivative(Expr expr, Expr var, const Bindings& bindings) {
  return evaluate(derivative(derivative(expr, var), var), bindings);
}

Expr operator+(Expr a, Expr b) { return owner(a, b).add(a, b); }
Expr operator-(Expr a, Expr b) { return owner(a, b).sub(a, b); }
Expr operator*(Expr a, Expr b) { return owner(a, b).mul(a, b); }
Expr operator/(Expr a, Expr b) { return owner(a, b).div(a, b); }
Expr operator-(Expr a) { return owner(a).neg(a); }
Expr operator+(Expr a, double b) { return a + owner(a).constant(b); }
Expr operator+(double a, Expr b) { return owner(b).constant(a) + b; }
Expr operator-(Expr a, double b) { return a - owner(a).constant(b); }
Expr operator-(double a, Expr b) { return owner(b).constant(a) - b; }
Expr operator*(Expr a, double b) { return a * owner(a).constant(b); }
Expr operator*(double a, Expr b) { return owner(b).constant(a) * b; }
Expr operator/(Expr a, double b) { return a / owner(a).constant(b); }
Expr operator/(double a, Expr b) { return owner(b).constant(a) / b; }

Expr tanh(Expr a) { return owner(a).tanh(a); }
Expr exp(Expr a) { return owner(a).exp(a); }
Expr pow(Expr a, double exponent) { return owner(a).pow(a, exponent); }
Expr sqrt(Expr a) { return owner(a).pow(a, 0.5); }

}  // namespace fisher_pinn::autodiff
