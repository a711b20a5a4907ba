#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "odeco/energy.hpp"
#include "odeco/lbfgs.hpp"
#include "odeco/rng.hpp"

namespace odeco {

struct SolverConfig {
  double psi = 50.0;        // guidance weight (design mode)
  double kappa = 2.0;       // fidelity weight (smoothing mode)
  double epsilon = 0.15;    // perturbation noise bound
  double trial_tol = 1e-3;  // relative energy tolerance per trial
  double final_tol = 1e-8;  // last-trial tolerance
  int stagnation_trials = 5;
  int lbfgs_memory = 10;
  int max_trial_iters = 500;
  std::uint64_t rng_seed = 0;
  double diffusion_time = 10.0;  // in units of (mean edge length)^2
  int diffusion_max_steps = 500;
  double clamp_lo = 1.0;   // curvature-guidance stretch clamp
  double clamp_hi = 50.0;
  double lambda_floor = 1e-3;
  int theta_warm_trial_cap = 20;
  int joint_trial_cap = 50;
  bool cold_start = false;
  bool guidance_domain_all = false;

  void validate() const;
};

enum class TrialStage { ThetaWarm, Joint, Final };

struct TrialRecord {
  int index = 0;
  TrialStage stage = TrialStage::Joint;
  double energy_before = 0.0;
  double energy_after = 0.0;
  int iterations = 0;
  double seconds = 0.0;
  bool perturbed = false;
};

struct SolverReport {
  std::vector<TrialRecord> trials;
  EnergyBreakdown final_energy;
  double normalized_smoothness = 0.0;  // E_s / |V|
  double input_smoothness = 0.0;       // smoothing mode: E_s of the input
  double input_distortion = 0.0;
  std::uint64_t seed = 0;
  int theta_warm_trials = 0;
  int joint_trials = 0;
  double energy_after_warm_start = 0.0;
  double total_seconds = 0.0;
  std::string kernel_backend;
};

/// Report serialization; timings live under a separate "timings" key so
/// reports are byte-identical across runs once that key is dropped.
std::string report_to_json(const SolverReport& report,
                           const SolverConfig& config, bool include_timings);

/// Warm start for the stretching ratios: each lambda component diffuses as
/// an independent scalar with implicit Euler steps (pinned targets),
/// iterated to stationarity. `active[k][v]` masks which vertices pin
/// component k (empty vector = all listed targets pin it).
std::vector<Vec3> diffuse_lambda(const TetMesh& mesh,
                                 const std::map<int, Vec3>& targets,
                                 const std::array<std::vector<char>, 3>& active,
                                 const SolverConfig& config);

/// Eq-style adaptive perturbation: gamma = (E_i/max(E) + 1)^2 U(-eps, eps)
/// drawn independently per free DoF slot of vertex i; lambda slots are kept
/// above the positivity floor. Frozen DoF are never touched.
void apply_perturbation(FrameField& field, const ParamLayout& layout,
                        const std::vector<double>& vertex_smoothness,
                        const CounterRng& rng, std::uint64_t stream, int trial,
                        double epsilon, double lambda_floor);

struct OptimizeResult {
  FrameField field;
  SolverReport report;
};

/// Full design pipeline: lambda diffusion -> theta warm start (coordinate
/// descent with perturbation trials) -> joint trials -> final solve.
OptimizeResult optimize(const TetMesh& mesh, const BoundaryData& boundary,
                        const ConstraintSet& constraints,
                        const SolverConfig& config);

/// Smoothing mode (single final-tolerance L-BFGS from the input field).
OptimizeResult smooth_field(const TetMesh& mesh, const BoundaryData& boundary,
                            const FieldGuidance& guidance,
                            const ConstraintSet& constraints,
                            const SolverConfig& config);

}  // namespace odeco
