#include "fisher_pinn/experiment.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include "fisher_pinn/errors.hpp"
#include "json.hpp"

namespace fisher_pinn::io {

using json = nlohmann::ordered_json;

namespace {

// Reads one JSON object, rejecting unknown keys and mistyped values.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be a JSON object");
  }

  void read(const char* key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw ConfigError(where(key) + " must be a number");
      out = v->get<double>();
    }
  }

  void read(const char* key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) throw ConfigError(where(key) + " must be true or false");
      out = v->get<bool>();
    }
  }

  void read(const char* key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) throw ConfigError(where(key) + " must be a string");
      out = v->get<std::string>();
    }
  }

  template <typename Int>
  void read_int(const char* key, Int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) throw ConfigError(where(key) + " must be an integer");
      if constexpr (std::is_unsigned_v<Int>) {
        if (v->is_number_unsigned()) {
          out = static_cast<Int>(v->get<std::uint64_t>());
          return;
        }
        throw ConfigError(where(key) + " must be non-negative");
      } else {
        out = static_cast<Int>(v->get<std::int64_t>());
      }
    }
  }

  Section child(const char* key) {
    const json* v = find(key);
    static const json empty = json::object();
    return Section(v ? *v : empty, path_.empty() ? key : path_ + "." + key);
  }

  // Marks a key handled by the caller.
  void mark(const char* key) { seen_.insert(key); }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) throw ConfigError("unknown key '" + (path_.empty() ? key : path_ + "." + key) + "'");
    }
  }

 private:
  const json* find(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  std::string where() const { return path_.empty() ? "config" : "'" + path_ + "'"; }
  std::string where(const char* key) const { return "'" + (path_.empty() ? key : path_ + "." + key) + "'"; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

json architecture_json(const Architecture& a) {
  return {{"input_dim", a.input_dim},
          {"hidden_layers", a.hidden_layers},
          {"hidden_width", a.hidden_width},
          {"output_dim", a.output_dim},
          {"activation", std::string(to_string(a.activation))}};
}

Architecture read_architecture(Section s) {
  Architecture a;
  s.read_int("input_dim", a.input_dim);
  s.read_int("hidden_layers", a.hidden_layers);
  s.read_int("hidden_width", a.hidden_width);
  s.read_int("output_dim", a.output_dim);
  std::string act(to_string(a.activation));
  s.read("activation", act);
  a.activation = activation_from_string(act);
  s.finish();
  a.validate();
  return a;
}

json vector_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Vector read_vector(const json& j, const std::string& name, std::size_t expected) {
  if (!j.is_array()) throw ConfigError("checkpoint '" + name + "' must be an array");
  if (j.size() != expected) {
    throw ConfigError("checkpoint '" + name + "' has " + std::to_string(j.size()) + " entries, architecture needs " +
                      std::to_string(expected));
  }
  Vector v(static_cast<Eigen::Index>(expected));
  for (std::size_t i = 0; i < expected; ++i) {
    if (!j[i].is_number()) throw ConfigError("checkpoint '" + name + "[" + std::to_string(i) + "]' is not a number");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

json parse(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed ") + what + ": " + e.what());
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  problem.pde.validate();
  problem.domain.validate();
  architecture.validate();
  sampling.validate();
  schedule.validate();
  if (fdm_nx < 3) throw ConfigError("fdm.nx must be >= 3");
  if (fdm_nt < 1) throw ConfigError("fdm.nt must be >= 1");
  if (iterations < 0) throw ConfigError("training.iterations must be >= 0");
  if (!(weight_ceiling >= 1.0)) throw ConfigError("training.weight_ceiling must be >= 1");
  if (!(retrain_lr > 0.0)) throw ConfigError("retraining.lr must be > 0");
  if (retrain_iterations < 0) throw ConfigError("retraining.iterations must be >= 0");
  if (retrain_phases < 1) throw ConfigError("retraining.phases must be >= 1");
  if (eval_nt < 2 || eval_nx < 2) throw ConfigError("evaluation grid needs at least 2 nodes per axis");
}

fdm::Grid ExperimentConfig::fdm_grid() const { return fdm::Grid::uniform(problem.domain, fdm_nx, fdm_nt); }

pinn::LossWeights ExperimentConfig::initial_weights() const {
  pinn::LossWeights w;
  w.mode = weight_mode;
  w.ceiling = weight_ceiling;
  return w;
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["pde"] = {{"diffusion", c.problem.pde.diffusion}, {"reaction", c.problem.pde.reaction}};
  j["domain"] = {{"x_min", c.problem.domain.x_min},
                 {"x_max", c.problem.domain.x_max},
                 {"t_min", c.problem.domain.t_min},
                 {"t_max", c.problem.domain.t_max}};
  j["architecture"] = architecture_json(c.architecture);
  j["sampling"] = {{"n_collocation", c.sampling.n_collocation},
                   {"n_ic", c.sampling.n_ic},
                   {"n_bc_per_side", c.sampling.n_bc_per_side},
                   {"seed", c.sampling.seed},
                   {"resample_collocation", c.sampling.resample_collocation}};
  j["schedule"] = {{"initial_lr", c.schedule.initial_lr},
                   {"decay_factor", c.schedule.decay_factor},
                   {"decay_every", c.schedule.decay_every}};
  j["fdm"] = {{"nx", c.fdm_nx}, {"nt", c.fdm_nt}};
  j["training"] = {{"iterations", c.iterations},
                   {"weight_mode", std::string(pinn::to_string(c.weight_mode))},
                   {"weight_ceiling", c.weight_ceiling}};
  j["retraining"] = {{"lr", c.retrain_lr}, {"iterations", c.retrain_iterations}, {"phases", c.retrain_phases}};
  j["evaluation"] = {{"nt", c.eval_nt}, {"nx", c.eval_nx}};
  j["out_dir"] = c.out_dir;
  return j.dump(2) + "\n";
}

ExperimentConfig config_from_json(const std::string& text) {
  const json j = parse(text, "config");
  ExperimentConfig c;
  Section root(j, "");
  {
    Section s = root.child("pde");
    s.read("diffusion", c.problem.pde.diffusion);
    s.read("reaction", c.problem.pde.reaction);
    s.finish();
  }
  {
    Section s = root.child("domain");
    s.read("x_min", c.problem.domain.x_min);
    s.read("x_max", c.problem.domain.x_max);
    s.read("t_min", c.problem.domain.t_min);
    s.read("t_max", c.problem.domain.t_max);
    s.finish();
  }
  c.architecture = read_architecture(root.child("architecture"));
  {
    Section s = root.child("sampling");
    s.read_int("n_collocation", c.sampling.n_collocation);
    s.read_int("n_ic", c.sampling.n_ic);
    s.read_int("n_bc_per_side", c.sampling.n_bc_per_side);
    s.read_int("seed", c.sampling.seed);
    s.read("resample_collocation", c.sampling.resample_collocation);
    s.finish();
  }
  {
    Section s = root.child("schedule");
    s.read("initial_lr", c.schedule.initial_lr);
    s.read("decay_factor", c.schedule.decay_factor);
    s.read_int("decay_every", c.schedule.decay_every);
    s.finish();
  }
  {
    Section s = root.child("fdm");
    s.read_int("nx", c.fdm_nx);
    s.read_int("nt", c.fdm_nt);
    s.finish();
  }
  {
    Section s = root.child("training");
    s.read_int("iterations", c.iterations);
    std::string mode(pinn::to_string(c.weight_mode));
    s.read("weight_mode", mode);
    c.weight_mode = pinn::weight_mode_from_string(mode);
    s.read("weight_ceiling", c.weight_ceiling);
    s.finish();
  }
  {
    Section s = root.child("retraining");
    s.read("lr", c.retrain_lr);
    s.read_int("iterations", c.retrain_iterations);
    s.read_int("phases", c.retrain_phases);
    s.finish();
  }
  {
    Section s = root.child("evaluation");
    s.read_int("nt", c.eval_nt);
    s.read_int("nx", c.eval_nx);
    s.finish();
  }
  root.read("out_dir", c.out_dir);
  root.finish();
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) { return config_from_json(read_text(path)); }

Checkpoint Checkpoint::from_state(const pinn::TrainState& state, std::uint64_t seed) {
  Checkpoint c;
  c.params = state.params;
  c.adam = state.adam;
  c.iteration = state.iteration;
  c.weights = state.weights;
  c.seed = seed;
  c.created = utc_timestamp();
  c.seconds = state.seconds;
  return c;
}

pinn::TrainState Checkpoint::to_state() const {
  pinn::TrainState s = pinn::TrainState::fresh(params, weights);
  if (adam) s.adam = *adam;
  s.iteration = iteration;
  s.seconds = seconds;
  return s;
}

std::string checkpoint_to_json(const Checkpoint& c) {
  json j;
  j["format_version"] = c.format_version;
  j["architecture"] = architecture_json(c.params.architecture());
  j["parameters"] = vector_json(c.params.values());
  if (c.adam) {
    j["adam"] = {{"step_count", c.adam->step_count},
                 {"beta1", c.adam->beta1},
                 {"beta2", c.adam->beta2},
                 {"epsilon", c.adam->epsilon},
                 {"m", vector_json(c.adam->m)},
                 {"v", vector_json(c.adam->v)}};
  } else {
    j["adam"] = nullptr;
  }
  j["iteration"] = c.iteration;
  j["weights"] = {{"w_ic", c.weights.w_ic},
                  {"w_bc", c.weights.w_bc},
                  {"w_res", c.weights.w_res},
                  {"mode", std::string(pinn::to_string(c.weights.mode))},
                  {"ceiling", c.weights.ceiling},
                  {"smoothing", c.weights.smoothing}};
  j["seed"] = c.seed;
  j["metadata"] = {{"created", c.created}, {"seconds", c.seconds}};
  return j.dump(2) + "\n";
}

Checkpoint checkpoint_from_json(const std::string& text) {
  const json j = parse(text, "checkpoint");
  if (!j.is_object()) throw ConfigError("checkpoint must be a JSON object");
  if (!j.contains("format_version") || !j["format_version"].is_number_integer()) {
    throw ConfigError("checkpoint has no integer format_version");
  }
  const auto version = j["format_version"].get<std::int64_t>();
  if (version != kCheckpointVersion) {
    throw ConfigError("unsupported checkpoint format_version " + std::to_string(version) + " (expected " +
                      std::to_string(kCheckpointVersion) + ")");
  }
  for (const char* key : {"architecture", "parameters", "adam", "iteration", "weights", "seed", "metadata"}) {
    if (!j.contains(key)) throw ConfigError(std::string("checkpoint is missing '") + key + "'");
  }

  Checkpoint c;
  Section root(j, "");
  int format_version = 0;
  root.read_int("format_version", format_version);
  const Architecture arch = read_architecture(root.child("architecture"));
  root.read_int("iteration", c.iteration);
  root.read_int("seed", c.seed);
  const std::size_t n = arch.parameter_count();
  c.params = Parameters(arch, read_vector(j["parameters"], "parameters", n));
  root.mark("parameters");

  if (!j["adam"].is_null()) {
    Section s = root.child("adam");
    optimize::AdamState adam;
    s.read_int("step_count", adam.step_count);
    s.read("beta1", adam.beta1);
    s.read("beta2", adam.beta2);
    s.read("epsilon", adam.epsilon);
    if (!j["adam"].contains("m") || !j["adam"].contains("v")) throw ConfigError("checkpoint 'adam' needs m and v");
    adam.m = read_vector(j["adam"]["m"], "adam.m", n);
    adam.v = read_vector(j["adam"]["v"], "adam.v", n);
    s.mark("m");
    s.mark("v");
    s.finish();
    c.adam = std::move(adam);
  } else {
    root.mark("adam");
  }
  {
    Section s = root.child("weights");
    s.read("w_ic", c.weights.w_ic);
    s.read("w_bc", c.weights.w_bc);
    s.read("w_res", c.weights.w_res);
    std::string mode(pinn::to_string(c.weights.mode));
    s.read("mode", mode);
    c.weights.mode = pinn::weight_mode_from_string(mode);
    s.read("ceiling", c.weights.ceiling);
    s.read("smoothing", c.weights.smoothing);
    s.finish();
  }
  {
    Section s = root.child("metadata");
    s.read("created", c.created);
    s.read("seconds", c.seconds);
    s.finish();
  }
  root.finish();
  c.format_version = format_version;
  return c;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  write_text(path, checkpoint_to_json(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return checkpoint_from_json(read_text(path)); }

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string grid_csv(const Matrix& values, std::span<const double> times, std::span<const double> positions) {
  if (static_cast<std::size_t>(values.rows()) != times.size() ||
      static_cast<std::size_t>(values.cols()) != positions.size()) {
    throw ConfigError("grid labels do not match the value matrix shape");
  }
  std::string out = "t";
  for (double x : positions) out += "," + format_double(x);
  out += "\n";
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    out += format_double(times[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      out += ',';
      out += format_double(values(i, j));
    }
    out += '\n';
  }
  return out;
}

std::string history_csv(const std::vector<pinn::HistoryEntry>& history, std::size_t stride) {
  if (stride == 0) throw ConfigError("history stride must be >= 1");
  std::string out = "iteration,lr,L,L_IC,L_BC,L_Res,w_ic,w_bc\n";
  for (std::size_t i = 0; i < history.size(); ++i) {
    const auto& h = history[i];
    if (h.iteration % static_cast<std::int64_t>(stride) != 0 && i + 1 != history.size()) continue;
    out += std::to_string(h.iteration);
    for (double v : {h.lr, h.total, h.ic, h.bc, h.res, h.w_ic, h.w_bc}) out += "," + format_double(v);
    out += '\n';
  }
  return out;
}

std::string report_to_json(const metrics::ErrorReport& r) {
  const json j = {{"relative_l2", r.relative_l2},
                  {"max_abs_error", r.max_abs_error},
                  {"argmax_t", r.argmax_t},
                  {"argmax_x", r.argmax_x},
                  {"n_points", r.n_points}};
  return j.dump(2) + "\n";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw ConfigError("failed writing '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) out[0] = lo;
  if (n < 2) return out;
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) out[i] = lo + static_cast<double>(i) * step;
  out[n - 1] = hi;
  return out;
}

Matrix exact_grid(const PdeParams& p, std::span<const double> times, std::span<const double> positions) {
  Matrix out(static_cast<Eigen::Index>(times.size()), static_cast<Eigen::Index>(positions.size()));
  for (std::size_t i = 0; i < times.size(); ++i) {
    for (std::size_t j = 0; j < positions.size(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = exact_solution(p, positions[j], times[i]);
    }
  }
  return out;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace fisher_pinn::io
