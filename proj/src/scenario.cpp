#include "scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace covsteer {

namespace {

class Reader {
 public:
  explicit Reader(std::string origin) : origin_(std::move(origin)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& what) const {
    std::ostringstream msg;
    msg << origin_;
    if (node.Mark().line >= 0) msg << ":" << node.Mark().line + 1;
    msg << ": " << what;
    throw Error(ErrorCode::kSchemaError, msg.str());
  }

  void require_map(const YAML::Node& node, const std::string& path) const {
    if (!node.IsMap()) fail(node, path + " must be a mapping");
  }

  void allow_keys(const YAML::Node& node, const std::string& path,
                  std::initializer_list<const char*> keys) const {
    require_map(node, path);
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) fail(kv.first, "unknown key '" + join(path, key) + "'");
    }
  }

  YAML::Node need(const YAML::Node& node, const std::string& path, const char* key) const {
    const YAML::Node child = node[key];
    if (!child) fail(node, "missing key '" + join(path, key) + "'");
    return child;
  }

  double number(const YAML::Node& node, const std::string& path) const {
    if (!node.IsScalar()) fail(node, path + " must be a number");
    try {
      return node.as<double>();
    } catch (const YAML::Exception&) {
      fail(node, path + " must be a number, got '" + node.Scalar() + "'");
    }
  }

  long long integer(const YAML::Node& node, const std::string& path) const {
    if (!node.IsScalar()) fail(node, path + " must be an integer");
    try {
      return node.as<long long>();
    } catch (const YAML::Exception&) {
      fail(node, path + " must be an integer, got '" + node.Scalar() + "'");
    }
  }

  std::uint64_t unsigned_integer(const YAML::Node& node, const std::string& path) const {
    if (!node.IsScalar()) fail(node, path + " must be a non-negative integer");
    try {
      return node.as<std::uint64_t>();
    } catch (const YAML::Exception&) {
      fail(node, path + " must be a non-negative integer, got '" + node.Scalar() + "'");
    }
  }

  std::string text(const YAML::Node& node, const std::string& path) const {
    if (!node.IsScalar()) fail(node, path + " must be a string");
    return node.Scalar();
  }

  bool boolean(const YAML::Node& node, const std::string& path) const {
    if (!node.IsScalar()) fail(node, path + " must be true or false");
    try {
      return node.as<bool>();
    } catch (const YAML::Exception&) {
      fail(node, path + " must be true or false");
    }
  }

  Vector vector(const YAML::Node& node, const std::string& path) const {
    if (!node.IsSequence()) fail(node, path + " must be a list of numbers");
    Vector v(static_cast<Eigen::Index>(node.size()));
    for (std::size_t i = 0; i < node.size(); ++i) {
      v(static_cast<Eigen::Index>(i)) = number(node[i], path + "[" + std::to_string(i) + "]");
    }
    return v;
  }

  // A list of rows, {diag: [...]}, {identity: n, scale: s} or {zeros: [r, c]}.
  Matrix matrix(const YAML::Node& node, const std::string& path) const {
    if (node.IsMap()) {
      if (node["diag"]) {
        allow_keys(node, path, {"diag"});
        return vector(node["diag"], join(path, "diag")).asDiagonal();
      }
      if (node["identity"]) {
        allow_keys(node, path, {"identity", "scale"});
        const auto n = integer(node["identity"], join(path, "identity"));
        if (n < 1) fail(node["identity"], join(path, "identity") + " must be positive");
        const double s = node["scale"] ? number(node["scale"], join(path, "scale")) : 1.0;
        return s * Matrix::Identity(n, n);
      }
      if (node["zeros"]) {
        allow_keys(node, path, {"zeros"});
        const YAML::Node shape = node["zeros"];
        if (!shape.IsSequence() || shape.size() != 2) {
          fail(shape, join(path, "zeros") + " must be [rows, cols]");
        }
        const auto r = integer(shape[0], join(path, "zeros"));
        const auto c = integer(shape[1], join(path, "zeros"));
        if (r < 1 || c < 1) fail(shape, join(path, "zeros") + " must be positive");
        return Matrix::Zero(r, c);
      }
      fail(node, path + " must be a list of rows or one of diag / identity / zeros");
    }
    if (!node.IsSequence() || node.size() == 0) fail(node, path + " must be a non-empty list of rows");
    const std::size_t cols = node[0].IsSequence() ? node[0].size() : 0;
    if (cols == 0) fail(node, path + " rows must be non-empty lists");
    Matrix m(static_cast<Eigen::Index>(node.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < node.size(); ++i) {
      const std::string row_path = path + "[" + std::to_string(i) + "]";
      const Vector row = vector(node[i], row_path);
      if (static_cast<std::size_t>(row.size()) != cols) {
        fail(node[i], row_path + " has " + std::to_string(row.size()) + " entries, expected " +
                          std::to_string(cols));
      }
      m.row(static_cast<Eigen::Index>(i)) = row.transpose();
    }
    return m;
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

 private:
  std::string origin_;
};

std::vector<int> parse_steps(const Reader& in, const YAML::Node& node, const std::string& path,
                             int horizon) {
  std::vector<int> steps;
  if (node.IsScalar()) {
    const std::string s = node.Scalar();
    if (s == "all") {
      for (int k = 0; k <= horizon; ++k) steps.push_back(k);
      return steps;
    }
    int lo = 0;
    int hi = 0;
    char tail = 0;
    if (std::sscanf(s.c_str(), "%d..%d%c", &lo, &hi, &tail) != 2 || lo > hi) {
      in.fail(node, path + " must be 'all', 'a..b' or a list of steps");
    }
    for (int k = lo; k <= hi; ++k) steps.push_back(k);
    return steps;
  }
  if (!node.IsSequence()) in.fail(node, path + " must be 'all', 'a..b' or a list of steps");
  for (std::size_t i = 0; i < node.size(); ++i) {
    steps.push_back(static_cast<int>(in.integer(node[i], path + "[" + std::to_string(i) + "]")));
  }
  return steps;
}

StepSystem parse_system(const Reader& in, const YAML::Node& node, const std::string& path) {
  in.allow_keys(node, path, {"A", "B", "D"});
  return {in.matrix(in.need(node, path, "A"), path + ".A"),
          in.matrix(in.need(node, path, "B"), path + ".B"),
          in.matrix(in.need(node, path, "D"), path + ".D")};
}

StepCost parse_cost(const Reader& in, const YAML::Node& node, const std::string& path) {
  in.allow_keys(node, path, {"Q", "R"});
  return {in.matrix(in.need(node, path, "Q"), path + ".Q"),
          in.matrix(in.need(node, path, "R"), path + ".R")};
}

// Either one constant entry or {steps: [...]} with exactly `horizon` entries.
template <typename T, typename F>
std::vector<T> per_step(const Reader& in, const YAML::Node& node, const std::string& path,
                        int horizon, F parse_one) {
  in.require_map(node, path);
  if (node["steps"]) {
    in.allow_keys(node, path, {"steps"});
    const YAML::Node list = node["steps"];
    if (!list.IsSequence() || static_cast<int>(list.size()) != horizon) {
      in.fail(list, path + ".steps must list exactly horizon = " + std::to_string(horizon) +
                        " entries");
    }
    std::vector<T> out;
    for (std::size_t k = 0; k < list.size(); ++k) {
      out.push_back(parse_one(in, list[k], path + ".steps[" + std::to_string(k) + "]"));
    }
    return out;
  }
  return std::vector<T>(static_cast<std::size_t>(horizon), parse_one(in, node, path));
}

// Two decoupled double integrators (x, y, vx, vy) with step dt.
std::vector<StepSystem> expand_template(const Reader& in, const YAML::Node& node, int horizon) {
  in.allow_keys(node, "template", {"kind", "dt", "noise"});
  const std::string kind = in.text(in.need(node, "template", "kind"), "template.kind");
  if (kind != "planar_double_integrator") {
    in.fail(node["kind"], "unknown template kind '" + kind + "'");
  }
  const double dt = in.number(in.need(node, "template", "dt"), "template.dt");
  if (!(dt > 0.0)) in.fail(node["dt"], "template.dt must be positive");
  const double noise = in.number(in.need(node, "template", "noise"), "template.noise");
  Matrix a = Matrix::Identity(4, 4);
  a(0, 2) = dt;
  a(1, 3) = dt;
  Matrix b = Matrix::Zero(4, 2);
  b(0, 0) = dt * dt;
  b(1, 1) = dt * dt;
  b(2, 0) = dt;
  b(3, 1) = dt;
  const Matrix d = noise * Matrix::Identity(4, 4);
  return std::vector<StepSystem>(static_cast<std::size_t>(horizon), StepSystem{a, b, d});
}

GaussianMoments parse_moments(const Reader& in, const YAML::Node& node, const std::string& path) {
  in.allow_keys(node, path, {"mean", "cov"});
  return {in.vector(in.need(node, path, "mean"), path + ".mean"),
          in.matrix(in.need(node, path, "cov"), path + ".cov")};
}

void parse_chance(const Reader& in, const YAML::Node& node, ProblemSpec& spec) {
  in.allow_keys(node, "chance", {"total_risk", "halfspaces", "stacked"});
  if (node["total_risk"]) spec.total_risk = in.number(node["total_risk"], "chance.total_risk");
  if (const YAML::Node list = node["halfspaces"]) {
    if (!list.IsSequence()) in.fail(list, "chance.halfspaces must be a list");
    for (std::size_t j = 0; j < list.size(); ++j) {
      const std::string path = "chance.halfspaces[" + std::to_string(j) + "]";
      const YAML::Node h = list[j];
      in.allow_keys(h, path, {"a", "b", "steps", "p_fail"});
      HalfspaceConstraint row;
      row.a = in.vector(in.need(h, path, "a"), path + ".a");
      row.b = in.number(in.need(h, path, "b"), path + ".b");
      row.steps = parse_steps(in, in.need(h, path, "steps"), path + ".steps", spec.horizon);
      if (h["p_fail"]) row.p_fail = in.number(h["p_fail"], path + ".p_fail");
      spec.halfspaces.push_back(std::move(row));
    }
  }
  if (const YAML::Node list = node["stacked"]) {
    if (!list.IsSequence()) in.fail(list, "chance.stacked must be a list");
    for (std::size_t j = 0; j < list.size(); ++j) {
      const std::string path = "chance.stacked[" + std::to_string(j) + "]";
      const YAML::Node h = list[j];
      in.allow_keys(h, path, {"alpha", "beta", "p_fail"});
      StackedConstraint row;
      row.alpha = in.vector(in.need(h, path, "alpha"), path + ".alpha");
      row.beta = in.number(in.need(h, path, "beta"), path + ".beta");
      if (h["p_fail"]) row.p_fail = in.number(h["p_fail"], path + ".p_fail");
      spec.stacked.push_back(std::move(row));
    }
  }
}

void parse_solver(const Reader& in, const YAML::Node& node, Scenario& sc) {
  in.allow_keys(node, "solver", {"backend", "tolerance", "max_iterations", "verbose"});
  if (node["backend"]) sc.backend = in.text(node["backend"], "solver.backend");
  if (node["tolerance"]) {
    sc.solver.tolerance = in.number(node["tolerance"], "solver.tolerance");
    if (!(sc.solver.tolerance > 0.0)) in.fail(node["tolerance"], "solver.tolerance must be positive");
  }
  if (node["max_iterations"]) {
    const auto it = in.integer(node["max_iterations"], "solver.max_iterations");
    if (it < 1) in.fail(node["max_iterations"], "solver.max_iterations must be positive");
    sc.solver.max_iterations = static_cast<int>(it);
  }
  if (node["verbose"]) sc.solver.verbose = in.boolean(node["verbose"], "solver.verbose");
}

void parse_simulation(const Reader& in, const YAML::Node& node, Scenario& sc) {
  in.allow_keys(node, "simulation", {"samples", "seed", "keep_terminal", "threads"});
  if (node["samples"]) {
    sc.simulation.samples = in.integer(node["samples"], "simulation.samples");
    if (sc.simulation.samples < 1) in.fail(node["samples"], "simulation.samples must be positive");
  }
  if (node["seed"]) sc.simulation.seed = in.unsigned_integer(node["seed"], "simulation.seed");
  if (node["keep_terminal"]) {
    sc.simulation.keep_terminal = in.integer(node["keep_terminal"], "simulation.keep_terminal");
    if (sc.simulation.keep_terminal < 0) {
      in.fail(node["keep_terminal"], "simulation.keep_terminal must be non-negative");
    }
  }
  if (node["threads"]) {
    sc.simulation.threads = static_cast<int>(in.integer(node["threads"], "simulation.threads"));
    if (sc.simulation.threads < 0) in.fail(node["threads"], "simulation.threads must be non-negative");
  }
}

void parse_output(const Reader& in, const YAML::Node& node, Scenario& sc) {
  in.allow_keys(node, "output", {"dir", "ellipse_sigma"});
  if (node["dir"]) sc.output.dir = in.text(node["dir"], "output.dir");
  if (node["ellipse_sigma"]) {
    sc.output.ellipse_sigma = in.number(node["ellipse_sigma"], "output.ellipse_sigma");
    if (!(sc.output.ellipse_sigma > 0.0)) {
      in.fail(node["ellipse_sigma"], "output.ellipse_sigma must be positive");
    }
  }
}

}  // namespace

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Scenario parse_scenario_unchecked(const std::string& text, const std::string& origin) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw Error(ErrorCode::kParseError, origin + ":" + std::to_string(e.mark.line + 1) + ":" +
                                            std::to_string(e.mark.column + 1) + ": " + e.msg);
  }
  const Reader in(origin);
  if (!root || root.IsNull()) in.fail(root, "scenario is empty");
  in.allow_keys(root, "", {"name", "horizon", "system", "template", "cost", "initial", "terminal",
                           "chance", "solver", "simulation", "output"});

  Scenario sc;
  sc.hash = fnv1a_hex(text);
  sc.name = root["name"] ? in.text(root["name"], "name") : std::string("scenario");
  const auto horizon = in.integer(in.need(root, "", "horizon"), "horizon");
  if (horizon < 1 || horizon > 10000) in.fail(root["horizon"], "horizon must be in 1..10000");
  ProblemSpec& spec = sc.spec;
  spec.horizon = static_cast<int>(horizon);

  if (root["system"] && root["template"]) {
    in.fail(root["template"], "give either 'system' or 'template', not both");
  }
  if (root["template"]) {
    spec.systems = expand_template(in, root["template"], spec.horizon);
  } else if (root["system"]) {
    spec.systems = per_step<StepSystem>(in, root["system"], "system", spec.horizon, parse_system);
  } else {
    in.fail(root, "missing key 'system' (or 'template')");
  }
  spec.costs = per_step<StepCost>(in, in.need(root, "", "cost"), "cost", spec.horizon, parse_cost);
  spec.initial = parse_moments(in, in.need(root, "", "initial"), "initial");
  spec.terminal = parse_moments(in, in.need(root, "", "terminal"), "terminal");
  if (root["chance"]) parse_chance(in, root["chance"], spec);
  if (root["solver"]) parse_solver(in, root["solver"], sc);
  if (root["simulation"]) parse_simulation(in, root["simulation"], sc);
  if (root["output"]) parse_output(in, root["output"], sc);
  return sc;
}

Scenario parse_scenario(const std::string& text, const std::string& origin) {
  Scenario sc = parse_scenario_unchecked(text, origin);
  const ValidationReport report = validate(sc.spec);
  if (!report.ok()) {
    throw Error(ErrorCode::kValidationError, origin + ": " + report.to_string());
  }
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open scenario file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path);
}

}  // namespace covsteer
