#include "rse/scenario.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

#include "rse/errors.hpp"

namespace rse {

namespace {

using nlohmann::json;

Vector to_vector(const json& j, const char* what) {
  if (!j.is_array()) throw SchemaError(std::string("scenario: ") + what + " must be an array");
  Vector v(j.size());
  for (std::size_t k = 0; k < j.size(); ++k) {
    if (!j[k].is_number()) throw SchemaError(std::string("scenario: ") + what + " must be numeric");
    v[static_cast<int>(k)] = j[k].get<double>();
  }
  return v;
}

Matrix to_matrix(const json& j, const char* what) {
  if (!j.is_array() || j.empty())
    throw SchemaError(std::string("scenario: ") + what + " must be a nonempty 2-d array");
  const std::size_t cols = j[0].size();
  Matrix M(static_cast<int>(j.size()), static_cast<int>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols)
      throw SchemaError(std::string("scenario: ") + what + " has ragged rows");
    for (std::size_t c = 0; c < cols; ++c)
      M(static_cast<int>(r), static_cast<int>(c)) = j[r][c].get<double>();
  }
  return M;
}

SignalSpec parse_signal(const json& j) {
  const std::string kind = j.value("kind", "zero");
  if (kind == "zero") return SignalSpec::zero();
  if (kind == "constant") return SignalSpec::constant(j.value("value", 0.0));
  if (kind == "square")
    return SignalSpec::square(j.value("amplitude", 0.5), j.value("period", 2.0),
                              j.value("start", 0.0));
  if (kind == "ramp") return SignalSpec::ramp(j.value("slope", 1.0), j.value("start", 0.0));
  if (kind == "sine")
    return SignalSpec::sine(j.value("amplitude", 1.0), j.value("omega", 1.0),
                            j.value("phase", 0.0));
  if (kind == "table") {
    std::vector<double> times = j.at("times").get<std::vector<double>>();
    std::vector<double> values = j.at("values").get<std::vector<double>>();
    return SignalSpec::table(std::move(times), std::move(values));
  }
  throw SchemaError("scenario: unknown signal kind '" + kind + "'");
}

}  // namespace

Scenario default_sec5_scenario() {
  Scenario sc;
  const Sec5Scenario builtin = builtin_scenario_sec5();
  sc.name = "sec5";
  sc.plant_kind = Scenario::PlantKind::Sec5;
  sc.domain = builtin.domain;
  sc.input = builtin.input;
  sc.attack.sensors = {1, 2, 3, 4};
  sc.attack.kind = "square";
  sc.attack.amplitude = builtin.attack_amplitude;
  sc.attack.period = builtin.attack_period;
  sc.attack.start = builtin.attack_start;
  sc.noise_bound = builtin.noise_bound;
  sc.seed = builtin.seed;
  sc.horizon = builtin.horizon;
  sc.step = builtin.step;
  sc.grid_delta = builtin.grid_delta;
  sc.q = builtin.q;
  sc.theta_scalar = builtin.theta;
  sc.mode = InspectMode::Subspace;
  sc.groups = builtin.groups;
  return sc;
}

Scenario parse_scenario_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("scenario: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError("scenario: top level must be an object");

  const int version = j.value("version", 1);
  if (version != 1) throw SchemaError("scenario: unsupported schema version");

  Scenario sc;

  // plant selection decides the defaults
  if (j.contains("fixture")) {
    const std::string fx = j.at("fixture").get<std::string>();
    if (fx != "polar" && fx != "polar-projected")
      throw SchemaError("scenario: unknown fixture '" + fx + "'");
    sc.plant_kind = Scenario::PlantKind::Fixture;
    sc.fixture = fx;
    sc.name = fx;
    sc.grid_delta = j.value("grid_delta", 0.01);
    sc.q = j.value("q", 1);
    return sc;
  }

  const json plant = j.value("plant", json("sec5"));
  if (plant.is_string() && plant.get<std::string>() == "sec5") {
    sc = default_sec5_scenario();
  } else if (plant.is_object() && plant.contains("linear")) {
    const json& lin = plant.at("linear");
    LinearSystem sys;
    if (lin.contains("A_file"))
      sys.A = read_matrix_file(lin.at("A_file").get<std::string>());
    else
      sys.A = to_matrix(lin.at("A"), "plant.linear.A");
    if (lin.contains("C_file"))
      sys.C = read_matrix_file(lin.at("C_file").get<std::string>());
    else
      sys.C = to_matrix(lin.at("C"), "plant.linear.C");
    if (sys.A.rows() != sys.A.cols()) throw SchemaError("scenario: A must be square");
    if (sys.C.cols() != sys.A.rows()) throw SchemaError("scenario: C columns must match A");
    sc.plant_kind = Scenario::PlantKind::Linear;
    sc.linear = std::move(sys);
    sc.name = j.value("name", "linear");
    if (lin.contains("B"))
      sc.linear_B = to_vector(lin.at("B"), "plant.linear.B");
    else if (lin.contains("B_file"))
      sc.linear_B = Vector(read_matrix_file(lin.at("B_file").get<std::string>()).col(0));
    sc.mode = InspectMode::Subspace;
    // linear scenarios need an explicit domain for the grid
    const int n = static_cast<int>(sc.linear->A.rows());
    sc.domain = CompactSetSpec::ball(Vector::Zero(n), 1.0);
    sc.attack.sensors.clear();
    sc.groups.reset();  // auto via the decomposition
    sc.input = SignalSpec::zero();
  } else {
    throw SchemaError("scenario: plant must be \"sec5\" or {\"linear\": {...}}");
  }

  sc.version = version;
  if (j.contains("name")) sc.name = j.at("name").get<std::string>();

  if (j.contains("domain")) {
    const json& d = j.at("domain");
    if (d.contains("ball")) {
      sc.domain = CompactSetSpec::ball(to_vector(d.at("ball").at("center"), "domain center"),
                                       d.at("ball").at("radius").get<double>());
    } else if (d.contains("box")) {
      sc.domain = CompactSetSpec::box(to_vector(d.at("box").at("lo"), "domain lo"),
                                      to_vector(d.at("box").at("hi"), "domain hi"));
    } else {
      throw SchemaError("scenario: domain must contain ball or box");
    }
  }

  if (j.contains("x0")) sc.x0 = to_vector(j.at("x0"), "x0");
  if (j.contains("input")) sc.input = parse_signal(j.at("input"));

  sc.horizon = j.value("horizon", sc.horizon);
  sc.step = j.value("step", sc.step);
  sc.grid_delta = j.value("grid_delta", sc.grid_delta);
  sc.q = j.value("q", sc.q);
  sc.guard_factor = j.value("guard_factor", sc.guard_factor);
  sc.cluster_tol = j.value("cluster_tol", sc.cluster_tol);
  if (!(sc.horizon > 0) || !(sc.step > 0))
    throw SchemaError("scenario: horizon and step must be positive");
  if (!(sc.grid_delta > 0)) throw SchemaError("scenario: grid_delta must be positive");
  if (sc.q < 0) throw SchemaError("scenario: q must be nonnegative");

  if (j.contains("theta")) {
    const json& th = j.at("theta");
    if (th.is_number()) {
      sc.theta_scalar = th.get<double>();
      sc.thetas.clear();
    } else if (th.is_array()) {
      sc.thetas = th.get<std::vector<double>>();
    } else {
      throw SchemaError("scenario: theta must be a number or an array");
    }
  }

  if (j.contains("mode")) {
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "cloud")
      sc.mode = InspectMode::Cloud;
    else if (mode == "subspace")
      sc.mode = InspectMode::Subspace;
    else
      throw SchemaError("scenario: mode must be cloud or subspace");
  }

  if (j.contains("delta")) {
    const json& d = j.at("delta");
    if (d.contains("floor")) sc.delta.floor = d.at("floor").get<double>();
    sc.delta.transient_coeff = d.value("transient_coeff", 0.0);
    sc.delta.calibrate = d.value("calibrate", false);
  }

  if (j.contains("groups")) {
    const json& g = j.at("groups");
    if (g.is_string() && g.get<std::string>() == "auto") {
      sc.groups.reset();
    } else if (g.is_array()) {
      std::vector<IndexSet> groups;
      for (const auto& arr : g) {
        auto ids = arr.get<std::vector<int>>();
        std::sort(ids.begin(), ids.end());
        groups.emplace_back(std::move(ids));
      }
      sc.groups = std::move(groups);
    } else {
      throw SchemaError("scenario: groups must be \"auto\" or an array of arrays");
    }
  }

  if (j.contains("attack")) {
    const json& a = j.at("attack");
    sc.attack.sensors = a.value("sensors", sc.attack.sensors);
    sc.attack.kind = a.value("kind", sc.attack.kind);
    sc.attack.amplitude = a.value("amplitude", sc.attack.amplitude);
    sc.attack.period = a.value("period", sc.attack.period);
    sc.attack.start = a.value("start", sc.attack.start);
    sc.attack.constant = a.value("constant", 0.0);
    sc.attack.slope = a.value("slope", 0.0);
  }

  if (j.contains("noise")) {
    const json& n = j.at("noise");
    sc.noise_bound = n.value("bound", sc.noise_bound);
    sc.seed = n.value("seed", sc.seed);
    if (sc.noise_bound < 0) throw SchemaError("scenario: noise bound must be nonnegative");
  }

  if (j.contains("out")) sc.out_dir = j.at("out").get<std::string>();
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("scenario: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario_json(ss.str());
}

}  // namespace rse
