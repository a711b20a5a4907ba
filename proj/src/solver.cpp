#include "odeco/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "json.hpp"
#include "odeco/kernels.hpp"

namespace odeco {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

const char* stage_name(TrialStage s) {
  switch (s) {
    case TrialStage::ThetaWarm: return "theta_warm";
    case TrialStage::Joint: return "joint";
    case TrialStage::Final: return "final";
  }
  return "?";
}

/// Shared trial loop: L-BFGS at trial tolerance, keep the best state,
/// perturb from it, stop on stagnation or the trial cap.
struct TrialLoop {
  EnergyModel& model;
  const SolverConfig& config;
  TrialStage stage;
  std::uint64_t rng_stream;
  int trial_cap;
  SolverReport& report;

  std::vector<double> run(std::vector<double> x) {
    const CounterRng rng(config.rng_seed);
    LbfgsOptions opt;
    opt.memory = config.lbfgs_memory;
    opt.rel_tol = config.trial_tol;
    opt.max_iters = config.max_trial_iters;
    const LbfgsProjection project = [this](std::vector<double>& p) {
      model.project_lambda(p, config.lambda_floor);
    };
    const LbfgsObjective objective = [this](std::span<const double> p,
                                            std::vector<double>* grad) {
      return model.evaluate(p, grad).total;
    };

    std::vector<double> best_x = x;
    EnergyBreakdown best = model.evaluate(best_x, nullptr);
    int stagnant = 0;
    for (int trial = 0; trial < trial_cap; ++trial) {
      const auto t0 = std::chrono::steady_clock::now();
      TrialRecord rec;
      rec.index = static_cast<int>(report.trials.size());
      rec.stage = stage;
      rec.perturbed = trial > 0;

      std::vector<double> x_start = best_x;
      if (trial > 0) {
        // Perturb the best state; the vertex energies of that state drive
        // the adaptive noise amplitude.
        model.unpack(best_x);
        apply_perturbation(model.field(), model.layout(),
                           best.per_vertex_smoothness, rng, rng_stream, trial,
                           config.epsilon, config.lambda_floor);
        x_start = model.pack();
      }
      rec.energy_before = model.evaluate(x_start, nullptr).total;

      LbfgsResult res = lbfgs_minimize(objective, x_start, opt, &project);
      rec.iterations = res.iterations;
      rec.energy_after = res.f;
      rec.seconds = seconds_since(t0);

      const bool improved =
          res.f < best.total - config.trial_tol * std::abs(best.total);
      if (res.f < best.total) {
        best_x = res.x;
        best = model.evaluate(best_x, nullptr);
      }
      stagnant = improved ? 0 : stagnant + 1;
      report.trials.push_back(rec);
      if (stagnant >= config.stagnation_trials) break;
    }
    model.unpack(best_x);
    return best_x;
  }
};

void randomize_theta(FrameField& field, const ParamLayout& layout,
                     const CounterRng& rng) {
  for (int v = 0; v < field.vertex_count(); ++v) {
    const int td = layout.theta_dof[v];
    if (td == 0) continue;
    VertexFrame& fr = field.frames[v];
    if (td == 3) {
      fr.theta.x() = rng.symmetric(rng_stream::kColdStart,
                                   pack_counter(0, v, 0), kPi);
      fr.theta.y() = rng.symmetric(rng_stream::kColdStart,
                                   pack_counter(0, v, 1), kPi);
    }
    fr.theta.z() =
        rng.symmetric(rng_stream::kColdStart, pack_counter(0, v, 2), kPi);
  }
}

/// Largest diffused ratio moves onto the aligned (z) axis for vertices
/// whose axis rotation pins the z-lobe to a feature tangent.
void reorder_locked_lambda(FrameField& field) {
  for (int v = 0; v < field.vertex_count(); ++v) {
    VertexFrame& fr = field.frames[v];
    if (fr.lambda_fixed) continue;
    if (fr.cls != VertexClass::FeatureEdge && fr.cls != VertexClass::Corner)
      continue;
    int arg = 0;
    fr.lambda.maxCoeff(&arg);
    if (arg != 2) std::swap(fr.lambda[arg], fr.lambda[2]);
  }
}

std::map<int, Vec3> collect_lambda_targets(const ConstraintSet& constraints) {
  std::map<int, Vec3> targets;
  for (const auto& [v, soft] : constraints.soft_lambda)
    targets.emplace(v, soft.target);
  for (const auto& [v, lambda] : constraints.hard_lambda)
    targets.emplace(v, lambda);
  for (const auto& [v, tl] : constraints.hard_tensor)
    targets.emplace(v, tl.second);
  return targets;
}

std::array<std::vector<char>, 3> component_masks(
    const ConstraintSet& constraints, int vertex_count) {
  std::array<std::vector<char>, 3> active;
  bool any_masked = false;
  for (const auto& [v, soft] : constraints.soft_lambda) {
    (void)v;
    if (!soft.active[0] || !soft.active[1] || !soft.active[2])
      any_masked = true;
  }
  if (!any_masked) return active;  // empty = everything pins
  for (int k = 0; k < 3; ++k) active[k].assign(vertex_count, 1);
  for (const auto& [v, soft] : constraints.soft_lambda) {
    for (int k = 0; k < 3; ++k) active[k][v] = soft.active[k] ? 1 : 0;
  }
  return active;
}

}  // namespace

void SolverConfig::validate() const {
  if (!(psi > 0) || !(kappa > 0))
    throw ValidationError("solver config: psi and kappa must be > 0");
  if (!(trial_tol > 0) || !(final_tol > 0))
    throw ValidationError("solver config: tolerances must be > 0");
  if (stagnation_trials < 1)
    throw ValidationError("solver config: stagnation_trials must be >= 1");
  if (epsilon < 0)
    throw ValidationError("solver config: epsilon must be >= 0");
}

void apply_perturbation(FrameField& field, const ParamLayout& layout,
                        const std::vector<double>& vertex_smoothness,
                        const CounterRng& rng, std::uint64_t stream, int trial,
                        double epsilon, double lambda_floor) {
  double max_e = 0.0;
  for (double e : vertex_smoothness) max_e = std::max(max_e, e);
  for (int v = 0; v < field.vertex_count(); ++v) {
    const int td = layout.theta_dof[v];
    const int ld = layout.lambda_dof[v];
    if (td + ld == 0) continue;
    const double ratio = (max_e > 0.0) ? vertex_smoothness[v] / max_e : 0.0;
    const double factor = (ratio + 1.0) * (ratio + 1.0);
    VertexFrame& fr = field.frames[v];
    auto draw = [&](int slot) {
      return factor * rng.symmetric(stream,
                                    pack_counter(static_cast<std::uint64_t>(trial),
                                                 static_cast<std::uint64_t>(v),
                                                 static_cast<std::uint64_t>(slot)),
                                    epsilon);
    };
    if (td == 3) {
      fr.theta.x() += draw(0);
      fr.theta.y() += draw(1);
    }
    if (td >= 1) fr.theta.z() += draw(2);
    if (ld == 3) {
      for (int k = 0; k < 3; ++k) {
        fr.lambda[k] = std::max(fr.lambda[k] + draw(3 + k), lambda_floor);
      }
    }
  }
}

OptimizeResult optimize(const TetMesh& mesh, const BoundaryData& boundary,
                        const ConstraintSet& constraints,
                        const SolverConfig& config) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();

  OptimizeResult out;
  out.field = make_frame_field(mesh, boundary, constraints);
  out.report.seed = config.rng_seed;
  out.report.kernel_backend =
      kernels::backend_name(kernels::active_backend());
  FrameField& field = out.field;

  // -- stage 1: lambda warm start by diffusion ------------------------------
  const std::map<int, Vec3> targets = collect_lambda_targets(constraints);
  if (!targets.empty()) {
    const auto lambda_warm = diffuse_lambda(
        mesh, targets, component_masks(constraints, mesh.vertex_count()),
        config);
    for (int v = 0; v < mesh.vertex_count(); ++v) {
      if (!field.frames[v].lambda_fixed) field.frames[v].lambda = lambda_warm[v];
    }
  }
  reorder_locked_lambda(field);

  ConstraintSet effective = constraints;
  if (config.guidance_domain_all) {
    for (int v = 0; v < mesh.vertex_count(); ++v) {
      if (effective.soft_lambda.count(v) || effective.hard_lambda.count(v) ||
          effective.hard_tensor.count(v))
        continue;
      ConstraintSet::SoftLambda s;
      s.target = field.frames[v].lambda;
      effective.soft_lambda.emplace(v, s);
    }
  }

  const CounterRng rng(config.rng_seed);

  // -- stage 2: theta warm start (skipped on cold starts) -------------------
  if (config.cold_start) {
    const ParamLayout full = ParamLayout::build(field, DofScope::All);
    randomize_theta(field, full, rng);
  } else {
    EnergyModel theta_model(mesh, field, effective, Mode::Design, config.psi,
                            DofScope::ThetaOnly);
    TrialLoop loop{theta_model, config, TrialStage::ThetaWarm, 0x7477ull,
                   config.theta_warm_trial_cap, out.report};
    loop.run(theta_model.pack());
    out.report.theta_warm_trials = static_cast<int>(out.report.trials.size());
  }

  // -- stage 3: joint trials + final polish ---------------------------------
  EnergyModel model(mesh, field, effective, Mode::Design, config.psi,
                    DofScope::All);
  out.report.energy_after_warm_start = model.evaluate_current(nullptr).total;

  TrialLoop joint{model, config, TrialStage::Joint, 0x6a6full,
                  config.joint_trial_cap, out.report};
  std::vector<double> best_x = joint.run(model.pack());
  out.report.joint_trials =
      static_cast<int>(out.report.trials.size()) - out.report.theta_warm_trials;

  {
    const auto tf = std::chrono::steady_clock::now();
    LbfgsOptions opt;
    opt.memory = config.lbfgs_memory;
    opt.rel_tol = config.final_tol;
    opt.max_iters = config.max_trial_iters;
    const LbfgsProjection project = [&](std::vector<double>& p) {
      model.project_lambda(p, config.lambda_floor);
    };
    const LbfgsObjective objective = [&](std::span<const double> p,
                                         std::vector<double>* grad) {
      return model.evaluate(p, grad).total;
    };
    TrialRecord rec;
    rec.index = static_cast<int>(out.report.trials.size());
    rec.stage = TrialStage::Final;
    rec.energy_before = model.evaluate(best_x, nullptr).total;
    LbfgsResult res = lbfgs_minimize(objective, best_x, opt, &project);
    if (res.f <= rec.energy_before) best_x = res.x;
    rec.energy_after = std::min(res.f, rec.energy_before);
    rec.iterations = res.iterations;
    rec.seconds = seconds_since(tf);
    out.report.trials.push_back(rec);
  }

  out.report.final_energy = model.evaluate(best_x, nullptr);
  out.report.normalized_smoothness =
      out.report.final_energy.smoothness / mesh.vertex_count();
  out.report.total_seconds = seconds_since(t0);
  return out;
}

OptimizeResult smooth_field(const TetMesh& mesh, const BoundaryData& boundary,
                            const FieldGuidance& guidance,
                            const ConstraintSet& constraints,
                            const SolverConfig& config) {
  config.validate();
  if (static_cast<int>(guidance.reference.size()) != mesh.vertex_count())
    throw ValidationError("smoothing: reference field size mismatch");
  const auto t0 = std::chrono::steady_clock::now();

  OptimizeResult out;
  out.field = make_frame_field(mesh, boundary, constraints);
  out.report.seed = config.rng_seed;
  out.report.kernel_backend =
      kernels::backend_name(kernels::active_backend());
  FrameField& field = out.field;
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    VertexFrame& fr = field.frames[v];
    if (fr.cls == VertexClass::HardFixed) continue;
    if (!fr.lambda_fixed)
      fr.lambda = guidance.lambda[v].cwiseMax(config.lambda_floor);
    if (fr.cls == VertexClass::Interior) {
      fr.theta = guidance.theta[v];
    } else {
      fr.theta.z() = 0.0;
    }
  }

  EnergyModel model(mesh, field, constraints, Mode::Smooth, config.kappa,
                    DofScope::All, &guidance.reference);
  {
    const EnergyBreakdown input = model.evaluate_current(nullptr);
    out.report.input_smoothness = input.smoothness;
    out.report.input_distortion = input.penalty;
  }

  // Single trial at the final tolerance, initialized from the input field.
  LbfgsOptions opt;
  opt.memory = config.lbfgs_memory;
  opt.rel_tol = config.final_tol;
  opt.max_iters = config.max_trial_iters;
  const LbfgsProjection project = [&](std::vector<double>& p) {
    model.project_lambda(p, config.lambda_floor);
  };
  const LbfgsObjective objective = [&](std::span<const double> p,
                                       std::vector<double>* grad) {
    return model.evaluate(p, grad).total;
  };
  std::vector<double> x0 = model.pack();
  TrialRecord rec;
  rec.index = 0;
  rec.stage = TrialStage::Final;
  rec.energy_before = model.evaluate(x0, nullptr).total;
  LbfgsResult res = lbfgs_minimize(objective, x0, opt, &project);
  std::vector<double> best = (res.f <= rec.energy_before) ? res.x : x0;
  rec.energy_after = std::min(res.f, rec.energy_before);
  rec.iterations = res.iterations;
  rec.seconds = seconds_since(t0);
  out.report.trials.push_back(rec);

  out.report.final_energy = model.evaluate(best, nullptr);
  out.report.normalized_smoothness =
      out.report.final_energy.smoothness / mesh.vertex_count();
  out.report.joint_trials = 1;
  out.report.total_seconds = seconds_since(t0);
  return out;
}

std::string report_to_json(const SolverReport& report,
                           const SolverConfig& config, bool include_timings) {
  nlohmann::ordered_json j;
  j["seed"] = report.seed;
  j["kernel_backend"] = report.kernel_backend;
  j["config"] = {{"psi", config.psi},
                 {"kappa", config.kappa},
                 {"epsilon", config.epsilon},
                 {"trial_tol", config.trial_tol},
                 {"final_tol", config.final_tol},
                 {"stagnation_trials", config.stagnation_trials},
                 {"lbfgs_memory", config.lbfgs_memory},
                 {"max_trial_iters", config.max_trial_iters},
                 {"diffusion_time", config.diffusion_time},
                 {"clamp", {config.clamp_lo, config.clamp_hi}},
                 {"lambda_floor", config.lambda_floor},
                 {"cold_start", config.cold_start},
                 {"guidance_domain_all", config.guidance_domain_all}};
  j["energy"] = {{"total", report.final_energy.total},
                 {"smoothness", report.final_energy.smoothness},
                 {"penalty", report.final_energy.penalty},
                 {"weight", report.final_energy.weight},
                 {"mode", report.final_energy.mode == Mode::Design
                              ? "design"
                              : "smooth"},
                 {"normalized_smoothness", report.normalized_smoothness}};
  if (report.final_energy.mode == Mode::Smooth) {
    j["energy"]["input_smoothness"] = report.input_smoothness;
    j["energy"]["input_distortion"] = report.input_distortion;
  }
  j["stages"] = {{"theta_warm_trials", report.theta_warm_trials},
                 {"joint_trials", report.joint_trials},
                 {"energy_after_warm_start", report.energy_after_warm_start}};
  j["trials"] = nlohmann::ordered_json::array();
  for (const auto& t : report.trials) {
    nlohmann::ordered_json rec = {{"index", t.index},
                                  {"stage", stage_name(t.stage)},
                                  {"energy_before", t.energy_before},
                                  {"energy_after", t.energy_after},
                                  {"iterations", t.iterations},
                                  {"perturbed", t.perturbed}};
    j["trials"].push_back(rec);
  }
  if (include_timings) {
    nlohmann::ordered_json times = nlohmann::ordered_json::array();
    for (const auto& t : report.trials) times.push_back(t.seconds);
    j["timings"] = {{"total_seconds", report.total_seconds},
                    {"trial_seconds", times}};
  }
  return j.dump(2);
}

}  // namespace odeco
