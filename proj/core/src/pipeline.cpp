#include "rse/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "rse/errors.hpp"
#include "rse/sec5.hpp"

namespace rse {

namespace {

using nlohmann::json;

SignalSpec attack_signal(const AttackConfig& cfg) {
  if (cfg.kind == "square") return SignalSpec::square(cfg.amplitude, cfg.period, cfg.start);
  if (cfg.kind == "constant") return SignalSpec::constant(cfg.constant);
  if (cfg.kind == "ramp") return SignalSpec::ramp(cfg.slope, cfg.start);
  if (cfg.kind == "zero") return SignalSpec::zero();
  throw SchemaError("scenario: unknown attack kind '" + cfg.kind + "'");
}

std::vector<SignalSpec> expand_attack(const AttackConfig& cfg, int p, int q) {
  std::vector<SignalSpec> out(static_cast<std::size_t>(p), SignalSpec::zero());
  if (static_cast<int>(cfg.sensors.size()) > q)
    throw SchemaError("scenario: attack touches more than q sensors");
  for (int i : cfg.sensors) {
    if (i < 1 || i > p) throw SchemaError("scenario: attacked sensor out of range");
    out[static_cast<std::size_t>(i - 1)] = attack_signal(cfg);
  }
  return out;
}

GroupPlan sec5_group_plan(const PlantModel& plant, const std::vector<IndexSet>& groups) {
  GroupPlan plan;
  plan.p = plant.p;
  int gid = 0;
  for (const auto& sensors : groups) {
    ++gid;
    SensorGroup group;
    group.sensors = sensors;
    for (int k = 0; k < sensors.size(); ++k)
      group.projections.push_back(GroupProjection::identity(1));

    const VectorMap& phi = plant.phi;
    const IndexSet ids = sensors;
    group.psi = VectorMap(
        "sec5_psi_" + std::to_string(gid), plant.n, BlockLayout::uniform(sensors.size(), 1),
        [phi, ids](const Vector& x) -> Vector {
          return project(phi.out_layout(), phi.evaluate_raw(x), ids);
        },
        [phi, ids](const Vector& x) -> Matrix {
          const Matrix J = phi.jacobian(x);
          Matrix out(ids.size(), J.cols());
          for (int r = 0; r < ids.size(); ++r) out.row(r) = J.row(ids.at(r) - 1);
          return out;
        });
    group.linear_basis = sec5_group_basis(sensors);
    plan.groups.push_back(std::move(group));
  }
  return plan;
}

AnalyticInverse linear_analytic_inverse(const GroupPlan& plan) {
  // stacked least squares over the chosen rows of every group's linear map
  std::vector<Matrix> psi_mats;
  std::vector<BlockLayout> layouts;
  std::vector<IndexSet> sensors;
  int n = 0;
  for (const auto& g : plan.groups) {
    const Matrix M = g.psi.jacobian(Vector::Zero(g.psi.dim_in()));
    n = static_cast<int>(M.cols());
    psi_mats.push_back(M);
    layouts.push_back(g.psi.out_layout());
    sensors.push_back(g.sensors);
  }
  return [psi_mats, layouts, sensors, n](
             const std::vector<std::pair<IndexSet, Vector>>& identified) -> Vector {
    if (identified.size() != psi_mats.size())
      throw NumericError("linear inverse: one identified subset per group required");
    int rows = 0;
    for (const auto& [ids, xi] : identified) rows += static_cast<int>(xi.size());
    Matrix O(rows, n);
    Vector rhs(rows);
    int at = 0;
    for (std::size_t j = 0; j < identified.size(); ++j) {
      const auto& [globals, xi] = identified[j];
      // map global sensor ids back to local block positions
      int local_at = at;
      for (int g : globals.indices()) {
        int pos = 0;
        while (sensors[j].at(pos) != g) ++pos;
        const int sz = layouts[j].size(pos + 1);
        O.middleRows(local_at, sz) = psi_mats[j].middleRows(layouts[j].offset(pos + 1), sz);
        local_at += sz;
      }
      rhs.segment(at, xi.size()) = xi;
      at += static_cast<int>(xi.size());
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(O);
    if (qr.rank() < n)
      throw NumericError("linear inverse: identified rows do not determine the state");
    return qr.solve(rhs);
  };
}

}  // namespace

PreparedScenario prepare_scenario(const Scenario& sc) {
  PreparedScenario prep;

  if (sc.plant_kind == Scenario::PlantKind::Sec5) {
    const Sec5Scenario builtin = builtin_scenario_sec5();
    prep.plant = builtin.plant;
    const std::vector<IndexSet> groups = sc.groups.value_or(builtin.groups);
    prep.plan = std::make_shared<const GroupPlan>(sec5_group_plan(prep.plant, groups));
    prep.analytic = AnalyticInverse(
        [](const std::vector<std::pair<IndexSet, Vector>>& identified) {
          return sec5_analytic_inverse(identified);
        });
  } else if (sc.plant_kind == Scenario::PlantKind::Linear) {
    if (!sc.linear) throw SchemaError("scenario: linear plant matrices missing");
    LinearPlan lplan = plan_from_linear(*sc.linear, sc.q, sc.cluster_tol);
    Vector B = sc.linear_B.value_or(Vector::Zero(sc.linear->A.rows()));
    prep.plant = plant_from_linear(*sc.linear, B, lplan);
    if (sc.groups) {
      // explicit groups on a linear plant: identity projections over Phi_i
      GroupPlan plan;
      plan.p = prep.plant.p;
      int gid = 0;
      for (const auto& sensors : *sc.groups) {
        ++gid;
        SensorGroup group;
        group.sensors = sensors;
        std::vector<int> sizes;
        const Matrix phi_matrix = prep.plant.phi.jacobian(Vector::Zero(prep.plant.n));
        int rows = 0;
        for (int i : sensors.indices()) {
          const int sz = prep.plant.layout.size(i);
          sizes.push_back(sz);
          rows += sz;
          group.projections.push_back(GroupProjection::identity(sz));
        }
        Matrix M(rows, prep.plant.n);
        int at = 0;
        for (int i : sensors.indices()) {
          const int sz = prep.plant.layout.size(i);
          M.middleRows(at, sz) = phi_matrix.middleRows(prep.plant.layout.offset(i), sz);
          at += sz;
        }
        group.psi = VectorMap::linear("explicit_psi_" + std::to_string(gid), M,
                                      BlockLayout(sizes));
        group.linear_basis = M;  // image of Psi^j(x) = M x
        plan.groups.push_back(std::move(group));
      }
      prep.plan = std::make_shared<const GroupPlan>(std::move(plan));
    } else {
      prep.plan = std::make_shared<const GroupPlan>(lplan.plan);
    }
    prep.analytic = linear_analytic_inverse(*prep.plan);
  } else {
    throw SchemaError("scenario: fixtures cannot be simulated, use the redundancy command");
  }

  prep.attack = expand_attack(sc.attack, prep.plant.p, sc.q);
  prep.thetas = sc.thetas.empty()
                    ? std::vector<double>(static_cast<std::size_t>(prep.plant.p), sc.theta_scalar)
                    : sc.thetas;
  if (static_cast<int>(prep.thetas.size()) != prep.plant.p)
    throw SchemaError("scenario: theta array must have one entry per sensor");
  prep.x0 = sc.x0.value_or(Vector::Zero(prep.plant.n));
  if (prep.x0.size() != prep.plant.n) throw SchemaError("scenario: x0 dimension mismatch");
  return prep;
}

ComplexityReport count_cases(const Scenario& sc) {
  if (sc.plant_kind == Scenario::PlantKind::Linear && !sc.groups) {
    LinearPlan lplan = plan_from_linear(*sc.linear, sc.q, sc.cluster_tol);
    return lplan.complexity;
  }
  PreparedScenario prep = prepare_scenario(sc);
  return complexity_report(prep.plant.p, sc.q, prep.plan->group_index_sets());
}

PipelineResult run_pipeline(const Scenario& sc) {
  PipelineResult result;
  result.scenario_name = sc.name;
  result.mode = sc.mode;

  PreparedScenario prep = prepare_scenario(sc);
  const PlantModel& plant = prep.plant;
  const int p = plant.p;

  for (const auto& g : prep.plan->groups) {
    if (2 * sc.q >= g.sensors.size())
      throw SchemaError("scenario: group " + g.sensors.to_string() +
                        " is too small for 2q-redundancy with q=" + std::to_string(sc.q));
  }

  result.counts = complexity_report(p, sc.q, prep.plan->group_index_sets());

  auto grid = std::make_shared<const SampleGrid>(SampleGrid::build(sc.domain, sc.grid_delta));
  result.grid = grid;
  result.grid_delta = sc.grid_delta;
  result.grid_points = grid->size();

  // simulate
  const NoiseSpec noise = NoiseSpec::uniform_bound(p, sc.noise_bound, sc.seed);
  const GuardSpec guard = GuardSpec::from_domain(sc.domain, sc.guard_factor);
  result.trajectory =
      simulate(plant, sc.input, prep.attack, noise, sc.horizon, sc.step, guard, prep.x0);

  // observe
  result.bank = run_bank(plant, result.trajectory, prep.thetas, sc.domain.center());

  // error-bound profiles
  Vector floors(p);
  for (int i = 0; i < p; ++i) floors[i] = sc.delta.floor.value_or(sc.noise_bound);
  std::vector<ErrorBoundProfile> profiles(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) {
    profiles[static_cast<std::size_t>(i)] = ErrorBoundProfile{
        sc.delta.transient_coeff, prep.thetas[static_cast<std::size_t>(i)] / 8.0, floors[i]};
  }
  if (sc.delta.calibrate) {
    const std::vector<SignalSpec> no_attack(static_cast<std::size_t>(p), SignalSpec::zero());
    const Trajectory calib_traj =
        simulate(plant, sc.input, no_attack, noise, sc.horizon, sc.step, guard, prep.x0);
    const BankRun calib_bank = run_bank(plant, calib_traj, prep.thetas, sc.domain.center());
    profiles = calibrate_error_profiles(plant, calib_traj, calib_bank, prep.thetas, floors);
  }
  result.delta_floor.resize(static_cast<std::size_t>(p));
  result.delta_coeff.resize(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) {
    result.delta_floor[static_cast<std::size_t>(i)] = profiles[static_cast<std::size_t>(i)].floor;
    result.delta_coeff[static_cast<std::size_t>(i)] =
        profiles[static_cast<std::size_t>(i)].transient_coeff;
  }

  // group profiles delta^j(t) = max_i L(T_i^j) delta_i(t)
  InspectionConfig cfg;
  cfg.q = sc.q;
  cfg.mode = sc.mode;
  cfg.grid = grid;
  for (const auto& group : prep.plan->groups) {
    std::vector<std::pair<double, ErrorBoundProfile>> parts;
    for (int pos = 0; pos < group.sensors.size(); ++pos) {
      const int i = group.sensors.at(pos);
      parts.emplace_back(group.projections[static_cast<std::size_t>(pos)].lipschitz,
                         profiles[static_cast<std::size_t>(i - 1)]);
    }
    cfg.group_delta.push_back([parts](double t) {
      double d = 0.0;
      for (const auto& [L, prof] : parts) d = std::max(d, L * prof(t));
      return d;
    });
  }

  Inspector inspector(*prep.plan, cfg);
  const int workers = worker_count_from_env();

  // identify
  result.monitor = monitor_run(result.bank, inspector, workers);
  result.plan = prep.plan;

  // redundancy constants (verification at level 2q + reporting)
  for (const auto& group : prep.plan->groups) {
    result.group_M.push_back(estimate_M(group.psi, *grid, 2 * sc.q));
  }

  // reconstruct
  ReconstructionPlan recon(prep.plan, grid, result.group_M, prep.analytic);
  const int samples = result.trajectory.samples();
  result.xhat.reserve(static_cast<std::size_t>(samples));
  result.err_inf.reserve(static_cast<std::size_t>(samples));
  const std::size_t n_groups = prep.plan->groups.size();
  for (int k = 0; k < samples; ++k) {
    const double t = result.trajectory.times[static_cast<std::size_t>(k)];
    std::vector<std::pair<IndexSet, Vector>> identified;
    identified.reserve(n_groups);
    for (std::size_t j = 0; j < n_groups; ++j) {
      identified.emplace_back(
          prep.plan->groups[j].to_global(
              result.monitor.chosen_local[static_cast<std::size_t>(k)][j]),
          result.monitor.identified[static_cast<std::size_t>(k)][j]);
    }
    Vector x_hat;
    if (prep.analytic) {
      x_hat = recon.recover_state(identified, {});
    } else {
      std::vector<Vector> psi_estimates;
      psi_estimates.reserve(n_groups);
      for (std::size_t j = 0; j < n_groups; ++j) {
        const double delta_t = cfg.group_delta[j](t);
        psi_estimates.push_back(
            recon.recover_group(static_cast<int>(j),
                                result.monitor.chosen_local[static_cast<std::size_t>(k)][j],
                                result.monitor.identified[static_cast<std::size_t>(k)][j],
                                delta_t)
                .psi_estimate);
      }
      x_hat = recon.recover_state(psi_estimates);
    }
    result.err_inf.push_back(
        (x_hat - result.trajectory.states[static_cast<std::size_t>(k)]).lpNorm<Eigen::Infinity>());
    result.xhat.push_back(std::move(x_hat));
  }

  result.exit_code = result.monitor.any_exhausted ? 4 : 0;

  // summary
  json summary;
  summary["scenario"] = sc.name;
  summary["mode"] = sc.mode == InspectMode::Subspace ? "subspace" : "cloud";
  summary["counts"] = {{"global", result.counts.global.str()},
                       {"local", result.counts.local.str()}};
  summary["grid"] = {{"delta", sc.grid_delta}, {"points", grid->size()}};
  summary["constants"] = json::object();
  summary["constants"]["M_hat"] = result.group_M;
  summary["constants"]["delta_floor"] = result.delta_floor;
  summary["constants"]["delta_transient_coeff"] = result.delta_coeff;
  summary["constants"]["L_hat"] = inspector.lipschitz_report();
  summary["constants"]["theta"] = prep.thetas;

  json detection;
  json first_fail = json::array(), first_switch = json::array(), switches = json::array();
  double detection_time = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t j = 0; j < n_groups; ++j) {
    const auto ff = result.monitor.first_fail_time(static_cast<int>(j) + 1);
    const auto fs = result.monitor.first_switch_time(static_cast<int>(j) + 1);
    first_fail.push_back(ff ? json(*ff) : json(nullptr));
    first_switch.push_back(fs ? json(*fs) : json(nullptr));
    switches.push_back(result.monitor.switch_count(static_cast<int>(j) + 1));
    if (ff && (std::isnan(detection_time) || *ff < detection_time)) detection_time = *ff;
  }
  detection["first_fail_time"] = first_fail;
  detection["first_switch_time"] = first_switch;
  detection["switch_count"] = switches;
  detection["detection_time"] = std::isnan(detection_time) ? json(nullptr) : json(detection_time);
  detection["max_epoch_scanned"] = result.monitor.max_epoch_scanned;
  int exhausted = 0;
  for (bool f : result.monitor.flagged) exhausted += f ? 1 : 0;
  detection["exhausted_samples"] = exhausted;
  summary["detection"] = detection;

  // error windows: pre = [1, first fail), post = (last switch + 0.5, T]
  double max_pre = 0.0, max_post = 0.0;
  double pre_end = std::isnan(detection_time) ? sc.horizon + 1.0 : detection_time;
  double post_start = 1.0;
  for (const auto& e : result.monitor.events)
    if (e.kind == MonitorEvent::Kind::Switch) post_start = std::max(post_start, e.t + 0.5);
  for (int k = 0; k < samples; ++k) {
    const double t = result.trajectory.times[static_cast<std::size_t>(k)];
    const double err = result.err_inf[static_cast<std::size_t>(k)];
    if (t >= 1.0 && t < pre_end) max_pre = std::max(max_pre, err);
    if (t > post_start) max_post = std::max(max_post, err);
  }
  summary["errors"] = {{"max_err_pre", max_pre}, {"max_err_post", max_post}};
  summary["exit_code"] = result.exit_code;
  result.summary_json = summary.dump(2);
  return result;
}

namespace {

void write_xhat_csv(const PipelineResult& result, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("write_artifacts: cannot open " + path);
  const int n = result.xhat.empty() ? 0 : static_cast<int>(result.xhat[0].size());
  std::fprintf(f, "t");
  for (int k = 0; k < n; ++k) std::fprintf(f, ",xhat_%d", k + 1);
  std::fprintf(f, ",err_inf\n");
  for (std::size_t r = 0; r < result.xhat.size(); ++r) {
    std::fprintf(f, "%.17g", result.trajectory.times[r]);
    for (int k = 0; k < n; ++k) std::fprintf(f, ",%.17g", result.xhat[r][k]);
    std::fprintf(f, ",%.17g\n", result.err_inf[r]);
  }
  std::fclose(f);
}

void write_svg_series(const std::string& path, const std::string& title,
                      const std::vector<double>& t,
                      const std::vector<std::pair<std::string, const std::vector<double>*>>& series) {
  const int W = 900, H = 300, ML = 60, MR = 20, MT = 30, MB = 40;
  double ymin = 0.0, ymax = 1e-12, tmin = t.front(), tmax = t.back();
  for (const auto& [label, values] : series)
    for (double v : *values) {
      ymax = std::max(ymax, v);
      ymin = std::min(ymin, v);
    }
  auto sx = [&](double x) { return ML + (x - tmin) / (tmax - tmin) * (W - ML - MR); };
  auto sy = [&](double y) { return H - MB - (y - ymin) / (ymax - ymin) * (H - MT - MB); };

  std::ofstream out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\">\n";
  out << "<text x=\"" << ML << "\" y=\"20\" font-size=\"14\">" << title << "</text>\n";
  out << "<line x1=\"" << ML << "\" y1=\"" << H - MB << "\" x2=\"" << W - MR << "\" y2=\""
      << H - MB << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ML << "\" y1=\"" << MT << "\" x2=\"" << ML << "\" y2=\"" << H - MB
      << "\" stroke=\"black\"/>\n";
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  int c = 0;
  for (const auto& [label, values] : series) {
    out << "<polyline fill=\"none\" stroke=\"" << colors[c % 4] << "\" stroke-width=\"1\" points=\"";
    for (std::size_t k = 0; k < t.size(); ++k)
      out << sx(t[k]) << "," << sy((*values)[k]) << " ";
    out << "\"/>\n";
    out << "<text x=\"" << W - MR - 150 << "\" y=\"" << MT + 15 * (c + 1) << "\" fill=\""
        << colors[c % 4] << "\" font-size=\"12\">" << label << "</text>\n";
    ++c;
  }
  out << "<text x=\"" << (W / 2) << "\" y=\"" << H - 10 << "\" font-size=\"12\">t [s]</text>\n";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", ymax);
  out << "<text x=\"5\" y=\"" << MT + 5 << "\" font-size=\"11\">" << buf << "</text>\n";
  std::snprintf(buf, sizeof(buf), "%.3g", ymin);
  out << "<text x=\"5\" y=\"" << H - MB << "\" font-size=\"11\">" << buf << "</text>\n";
  out << "</svg>\n";
}

}  // namespace

void write_artifacts(const PipelineResult& result, const std::string& out_dir, bool svg) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);

  export_trajectory_csv(result.trajectory, (dir / "trajectory.csv").string());
  export_bank_csv(result.bank, (dir / "estimates.csv").string());
  write_xhat_csv(result, (dir / "xhat.csv").string());

  std::ofstream det(dir / "detections.jsonl");
  for (const auto& e : result.monitor.events) det << e.to_json() << "\n";
  det.close();

  std::ofstream summary(dir / "summary.json");
  summary << result.summary_json << "\n";
  summary.close();

  if (svg) {
    const std::size_t n_groups = result.plan->groups.size();
    for (std::size_t j = 0; j < n_groups; ++j) {
      std::vector<double> dist(result.monitor.times.size()), thr(result.monitor.times.size());
      for (std::size_t k = 0; k < result.monitor.times.size(); ++k) {
        dist[k] = result.monitor.distance[k][j];
        thr[k] = result.monitor.threshold[k][j];
      }
      write_svg_series((dir / ("residual_group" + std::to_string(j + 1) + ".svg")).string(),
                       "group " + std::to_string(j + 1) + " residual vs threshold",
                       result.monitor.times,
                       {{"residual", &dist}, {"threshold", &thr}});
    }
    write_svg_series((dir / "error.svg").string(), "state estimation error (inf norm)",
                     result.trajectory.times, {{"err_inf", &result.err_inf}});
  }
}

}  // namespace rse
