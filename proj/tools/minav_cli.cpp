// minav: command-line front end for the magneto-inductive navigation toolkit.
//
// Exit codes: 0 success (detect: no fault), 1 detect rejected the model,
// 2 usage / schema / configuration error, 3 estimation failure.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "minav/baseline.hpp"
#include "minav/crb.hpp"
#include "minav/detect.hpp"
#include "minav/estimators.hpp"
#include "minav/packet_io.hpp"
#include "minav/random.hpp"
#include "minav/sim.hpp"

namespace {

using namespace minav;

constexpr int kExitReject = 1;
constexpr int kExitUsage = 2;
constexpr int kExitEstimation = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Vector3d parse_vec3(const std::string& text, const char* flag, bool angles = false) {
  std::vector<double> v;
  try {
    v = parse_number_list(text, angles);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string(flag) + ": " + e.what());
  }
  if (v.size() != 3) throw UsageError(std::string(flag) + " expects three comma-separated values");
  return {v[0], v[1], v[2]};
}

/// "mx,my,mz,s" (isotropic std) or "mx,my,mz,sx,sy,sz".
GaussianPrior parse_prior(const std::string& text, PriorTarget target, const char* flag) {
  std::vector<double> v;
  try {
    v = parse_number_list(text, target == PriorTarget::Orientation);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string(flag) + ": " + e.what());
  }
  if (v.size() != 4 && v.size() != 6) {
    throw UsageError(std::string(flag) + " expects mean,std or mean(3),std(3)");
  }
  const Vector3d mean(v[0], v[1], v[2]);
  const Vector3d sd = v.size() == 4 ? Vector3d::Constant(v[3]) : Vector3d(v[3], v[4], v[5]);
  if ((sd.array() <= 0.0).any()) throw UsageError(std::string(flag) + ": std must be positive");
  return GaussianPrior::diagonal(target, mean, sd.cwiseAbs2());
}

std::string vec_text(const Vector3d& v) {
  return format_number(v.x()) + " " + format_number(v.y()) + " " + format_number(v.z());
}

// Shared configuration flags for the simulation commands.
struct ConfigFlags {
  std::string r = "1,1,1";
  std::string psi = "0,0,0";
  double c = 1.0;
  int n = 30;
  double m = 1.0;
  double sigma = 0.1;
  int trials = 10000;
  std::uint64_t seed = 1;
  unsigned threads = 0;

  void add_to(CLI::App* app, bool with_trials = true) {
    app->add_option("--r", r, "True receiver position x,y,z [m]");
    app->add_option("--psi", psi, "True orientation roll,pitch,yaw [rad, or 'deg' suffix]");
    app->add_option("--c", c, "Scale factor");
    app->add_option("--N", n, "Samples per packet (multiple of 3)");
    app->add_option("--m", m, "Moment magnitude");
    app->add_option("--sigma", sigma, "Noise standard deviation");
    app->add_option("--seed", seed, "Master seed");
    if (with_trials) {
      app->add_option("--trials", trials, "Monte-Carlo trials");
      app->add_option("--threads", threads, "Worker threads (default: MINAV_THREADS or all cores)");
    }
  }

  ExperimentConfig build() const {
    ExperimentConfig cfg;
    cfg.truth.r = parse_vec3(r, "--r");
    cfg.truth.psi = EulerAnglesd::from_vector(parse_vec3(psi, "--psi", true));
    cfg.c = c;
    cfg.schedule = MomentSchedule::axis_cycle(m, static_cast<std::size_t>(std::max(n, 0)));
    cfg.sigma = sigma;
    cfg.trials = trials;
    cfg.seed = seed;
    cfg.threads = threads;
    return cfg;
  }
};

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  try {
    write_file_atomically(path, content);
  } catch (const std::exception& e) {
    throw UsageError(std::string("cannot write output: ") + e.what());
  }
}

// ---------------------------------------------------------------- estimate

struct EstimateFlags {
  std::string packet;
  std::string prior_pos, prior_ori, prior_accel, init, ref;
  std::optional<double> rho0;
  double r0 = 1.0;
};

int run_estimate(const EstimateFlags& f) {
  const MeasurementPacket packet = load_packet(f.packet);
  std::vector<GaussianPrior> priors;
  if (!f.prior_pos.empty()) priors.push_back(parse_prior(f.prior_pos, PriorTarget::Position, "--prior-pos"));
  if (!f.prior_ori.empty() && !f.prior_accel.empty()) {
    throw UsageError("--prior-ori and --prior-accel both set an orientation prior");
  }
  if (!f.prior_ori.empty()) {
    priors.push_back(parse_prior(f.prior_ori, PriorTarget::Orientation, "--prior-ori"));
  }
  if (!f.prior_accel.empty()) {
    if (!packet.accel) throw UsageError("--prior-accel needs 'accel' samples in the packet");
    double sigma = 0.0;
    try {
      sigma = parse_angle(f.prior_accel);
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string("--prior-accel: ") + e.what());
    }
    if (!(sigma > 0.0)) throw UsageError("--prior-accel must be positive");
    priors.push_back(orientation_prior_from_accel(*packet.accel, sigma));
  }

  NavStated init;
  if (!f.init.empty()) {
    std::vector<double> v;
    try {
      v = parse_number_list(f.init, true);
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string("--init: ") + e.what());
    }
    if (v.size() != 6) throw UsageError("--init expects x,y,z,roll,pitch,yaw");
    init.r = Vector3d(v[0], v[1], v[2]);
    init.psi = {v[3], v[4], v[5]};
  } else {
    if (!(f.r0 > 0.0)) throw UsageError("--r0 must be positive");
    init = baseline_estimate(packet, f.rho0 ? *f.rho0 : reference_rssi(packet.c, f.r0), f.r0);
  }

  const EstimateResult est = map_estimate(packet, init, priors);
  NavStated state = est.state;
  if (!f.ref.empty()) state = resolve_hemisphere(state, parse_vec3(f.ref, "--ref"));
  const double statistic = chi2_statistic(packet, state);
  const double dof = default_chi2_dof(packet);

  std::cout << "estimator: " << (priors.empty() ? "ML" : "MAP") << "\n"
            << "r: " << vec_text(state.r) << "\n"
            << "psi: " << vec_text(state.psi.vector()) << "\n"
            << "cost: " << format_number(est.cost) << "\n"
            << "iterations: " << est.iterations << "\n"
            << "converged: " << (est.converged ? "true" : "false") << "\n"
            << "chi2: " << format_number(statistic) << "\n"
            << "dof: " << format_number(dof) << "\n"
            << "p_value: " << format_number(chi2_pvalue(statistic, dof)) << "\n";
  return 0;
}

// ---------------------------------------------------------------- detect

struct DetectFlags {
  std::string packet;
  std::string detector = "chi2";
  double alpha = 0.05;
  std::optional<double> threshold;
  int calibration_draws = 2000;
  std::uint64_t seed = 1;
};

double detector_statistic(Detector detector, const MeasurementPacket& packet) {
  if (detector == Detector::Eigenvalue) return eigenvalue_criterion(estimate_channel(packet));
  const NavStated state = ml_estimate(packet).state;
  return detector == Detector::ChiSquared ? chi2_statistic(packet, state)
                                          : normalized_statistic(packet, state);
}

/// Upper (1 - alpha) quantile of the statistic under the fitted model, by
/// parametric bootstrap from the ML state.
double bootstrap_threshold(Detector detector, const MeasurementPacket& packet,
                           const NavStated& fitted, double alpha, int draws,
                           std::uint64_t seed) {
  const MeasurementPacket stabilized = static_equivalent(packet);
  std::vector<double> stats;
  stats.reserve(static_cast<std::size_t>(draws));
  for (int i = 0; i < draws; ++i) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i), 300);
    MeasurementPacket sample = simulate_packet(fitted, stabilized.schedule, stabilized.c,
                                               stabilized.noise_cov, rng.next_u64());
    try {
      stats.push_back(detector_statistic(detector, sample));
    } catch (const Error&) {
    }
  }
  if (stats.empty()) throw Error(ErrorCode::TooManyFailures, "bootstrap produced no statistics");
  std::sort(stats.begin(), stats.end());
  const auto idx = static_cast<std::size_t>(
      std::min<double>(stats.size() - 1, std::ceil((1.0 - alpha) * stats.size()) - 1));
  return stats[idx];
}

int run_detect(const DetectFlags& f) {
  Detector detector;
  if (f.detector == "chi2") detector = Detector::ChiSquared;
  else if (f.detector == "norm") detector = Detector::Normalized;
  else if (f.detector == "eig") detector = Detector::Eigenvalue;
  else throw UsageError("--detector must be chi2, norm or eig");
  if (!(f.alpha > 0.0 && f.alpha < 1.0)) throw UsageError("--alpha must be in (0, 1)");

  const MeasurementPacket packet = load_packet(f.packet);
  const EstimateResult ml = ml_estimate(packet);

  DetectionResult result;
  if (detector == Detector::ChiSquared) {
    result = chi2_test(packet, ml.state, f.alpha);
    if (f.threshold) result = [&] {
      DetectionResult r = threshold_test(detector, result.statistic, *f.threshold);
      r.p_value = result.p_value;
      return r;
    }();
  } else {
    const double statistic = detector == Detector::Normalized
                                 ? normalized_statistic(packet, ml.state)
                                 : eigenvalue_criterion(estimate_channel(static_equivalent(packet)));
    const double threshold =
        f.threshold ? *f.threshold
                    : bootstrap_threshold(detector, packet, ml.state, f.alpha,
                                          f.calibration_draws, f.seed);
    result = threshold_test(detector, statistic, threshold);
  }

  std::cout << "detector: " << to_string(result.detector) << "\n"
            << "statistic: " << format_number(result.statistic) << "\n"
            << "threshold: " << format_number(result.threshold) << "\n";
  if (result.p_value) std::cout << "p_value: " << format_number(*result.p_value) << "\n";
  std::cout << "decision: " << (result.reject ? "reject" : "accept") << "\n";
  return result.reject ? kExitReject : 0;
}

// ---------------------------------------------------------------- crb

struct CrbFlags {
  std::string r = "1,1,1";
  std::string psi = "0,0,0";
  int n = 30;
  double c = 1.0;
  double m = 1.0;
  double sigma = 0.1;
  bool full = false;
};

int run_crb(const CrbFlags& f) {
  const Vector3d r = parse_vec3(f.r, "--r");
  const FisherInfo closed = position_fim_closed(r, f.n, f.c, f.m, f.sigma);
  const double range_info = range_fisher(r, f.n, f.c, f.m, f.sigma);

  NavStated state{r, EulerAnglesd::from_vector(parse_vec3(f.psi, "--psi", true))};
  const FisherInfo fim = full_fim(state, MomentSchedule::axis_cycle(f.m, f.n), f.c,
                                  f.sigma * f.sigma * Matrix3d::Identity());

  std::cout << "I_r1: " << format_number(closed.matrix(0, 0)) << "\n"
            << "I_r2: " << format_number(closed.matrix(1, 1)) << "\n"
            << "I_r3: " << format_number(closed.matrix(2, 2)) << "\n"
            << "trace: " << format_number(closed.matrix.trace()) << "\n"
            << "I_range: " << format_number(range_info) << "\n"
            << "range_bound: " << format_number(1.0 / std::sqrt(range_info)) << "\n"
            << "position_bound_known_orientation: "
            << format_number(scalar_rmse_bound(closed, StateBlock::Position)) << "\n";
  try {
    std::cout << "position_bound_full_state: "
              << format_number(scalar_rmse_bound(fim, StateBlock::Position)) << "\n"
              << "orientation_bound_full_state: "
              << format_number(scalar_rmse_bound(fim, StateBlock::Orientation)) << "\n";
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SingularInformation) throw;
    std::cout << "position_bound_full_state: inf\norientation_bound_full_state: inf\n";
  }
  if (f.full) {
    std::cout << "fim:\n";
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) std::cout << (j ? " " : "") << format_number(fim.matrix(i, j));
      std::cout << "\n";
    }
  }
  return 0;
}

// ---------------------------------------------------------------- simulate-*

struct RmseFlags {
  ConfigFlags config;
  std::string target = "ori";
  std::string sweep;
  std::string hemisphere_ref = "truth";
  std::string out;
};

int run_simulate_rmse(const RmseFlags& f) {
  ExperimentConfig cfg = f.config.build();
  if (f.target == "ori") cfg.prior_target = PriorTarget::Orientation;
  else if (f.target == "pos") cfg.prior_target = PriorTarget::Position;
  else throw UsageError("--target must be ori or pos");
  if (f.hemisphere_ref == "truth") cfg.hemisphere_reference = HemisphereReference::Truth;
  else if (f.hemisphere_ref == "prior") cfg.hemisphere_reference = HemisphereReference::PriorMean;
  else throw UsageError("--hemisphere-ref must be truth or prior");

  std::string sweep = f.sweep;
  if (sweep.empty()) {
    sweep = cfg.prior_target == PriorTarget::Orientation
                ? "0.01deg,0.1deg,1deg,10deg,1000"
                : "0.01,0.1,1,10,1000";
  }
  try {
    cfg.prior_sweep = parse_number_list(sweep, cfg.prior_target == PriorTarget::Orientation);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--sweep: ") + e.what());
  }
  for (double v : cfg.prior_sweep) {
    if (!(v > 0.0) || !std::isfinite(v)) throw UsageError("--sweep values must be positive");
  }

  const RmseCurve curve = run_rmse_experiment(cfg);
  CsvTable table({"sweep", "ml_rmse", "map_rmse", "crb", "crb_perfect"});
  for (const auto& p : curve.points) {
    table.add_row({format_number(p.sweep), format_number(p.ml(curve.estimand).rmse),
                   format_number(p.map(curve.estimand).rmse), format_number(p.crb),
                   format_number(p.crb_perfect)});
  }
  write_output(f.out, table.str());
  std::cerr << "trials used: " << curve.trials_used << ", failed: " << curve.failed_trials << "\n";
  return 0;
}

struct RocFlags {
  ConfigFlags config;
  double scale = 2.0;
  std::string out;
};

int run_simulate_roc(const RocFlags& f) {
  ExperimentConfig cfg = f.config.build();
  if (!(f.scale > 0.0)) throw UsageError("--scale must be positive");
  const RocExperiment roc = run_roc_experiment(cfg, f.scale);
  CsvTable table({"detector", "fpr", "tpr"});
  for (const auto& d : roc.detectors) {
    for (const auto& p : d.curve.points) {
      table.add_row({to_string(d.detector), format_number(p.fpr), format_number(p.tpr)});
    }
  }
  for (const auto& d : roc.detectors) {
    table.add_row({"auc", to_string(d.detector), format_number(d.curve.auc)});
    std::cerr << "auc " << to_string(d.detector) << ": " << format_number(d.curve.auc) << "\n";
  }
  write_output(f.out, table.str());
  return 0;
}

struct FusionFlags {
  ConfigFlags config;
  double accel_noise = 0.01;
  std::string prior_sigma = "0.1deg";
  std::size_t accel_samples = 100;
  std::string out;
};

int run_simulate_fusion(const FusionFlags& f) {
  ExperimentConfig cfg = f.config.build();
  double prior_sigma = 0.0;
  try {
    prior_sigma = parse_angle(f.prior_sigma);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--prior-sigma: ") + e.what());
  }
  const FusionResult fusion =
      run_fusion_experiment(cfg, f.accel_noise, prior_sigma, f.accel_samples);
  CsvTable table({"estimator", "error", "ecdf"});
  for (const auto& [name, errors] : {std::pair{"ml", &fusion.ml_errors},
                                      std::pair{"map", &fusion.map_errors}}) {
    for (const auto& p : ecdf(*errors)) {
      table.add_row({name, format_number(p.value), format_number(p.probability)});
    }
  }
  table.add_row({"median", "ml", format_number(fusion.ml_median)});
  table.add_row({"median", "map", format_number(fusion.map_median)});
  table.add_row({"median_ratio", "map/ml", format_number(fusion.median_ratio)});
  write_output(f.out, table.str());
  std::cerr << "median ratio map/ml: " << format_number(fusion.median_ratio) << "\n";
  return 0;
}

struct PacketFlags {
  ConfigFlags config;
  bool noise_free = false;
  double noise_scale = 1.0;
  std::size_t accel_samples = 0;
  double accel_noise = 0.01;
  std::string out;
};

int run_simulate_packet(const PacketFlags& f) {
  const ExperimentConfig cfg = f.config.build();
  if (!(f.noise_scale > 0.0)) throw UsageError("--noise-scale must be positive");
  if (!(cfg.sigma > 0.0)) throw UsageError("--sigma must be positive");
  const Matrix3d model = cfg.noise_cov();
  const Matrix3d actual = f.noise_free ? Matrix3d::Zero() : Matrix3d(f.noise_scale * model);
  Rng rng = Rng::stream(cfg.seed, 0, 400);
  MeasurementPacket packet =
      simulate_packet(cfg.truth, cfg.schedule, cfg.c, actual, rng.next_u64());
  packet.noise_cov = model;
  if (f.accel_samples > 0) {
    packet.accel = simulate_accel_samples(cfg.truth.psi, f.accel_samples, f.accel_noise, rng);
  }
  write_output(f.out, packet_to_json(packet));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Magneto-inductive navigation estimation toolkit"};
  app.require_subcommand(1);

  EstimateFlags est;
  auto* cmd_est = app.add_subcommand("estimate", "ML/MAP estimate from a packet file");
  cmd_est->add_option("packet", est.packet, "Packet JSON file")->required();
  cmd_est->add_option("--prior-pos", est.prior_pos, "Position prior mx,my,mz,std[,std,std]");
  cmd_est->add_option("--prior-ori", est.prior_ori, "Orientation prior mr,mp,my,std[,std,std]");
  cmd_est->add_option("--prior-accel", est.prior_accel, "Roll/pitch prior from packet accel, std");
  cmd_est->add_option("--init", est.init, "Initial state x,y,z,roll,pitch,yaw");
  cmd_est->add_option("--ref", est.ref, "Hemisphere reference position x,y,z");
  cmd_est->add_option("--rho0", est.rho0, "Reference RSSI [dB] for the initializer (default: from c)");
  cmd_est->add_option("--r0", est.r0, "Reference range [m] for --rho0");

  DetectFlags det;
  auto* cmd_det = app.add_subcommand("detect", "Fault detection on a packet file");
  cmd_det->add_option("packet", det.packet, "Packet JSON file")->required();
  cmd_det->add_option("--detector", det.detector, "chi2, norm or eig");
  cmd_det->add_option("--alpha", det.alpha, "False alarm rate");
  cmd_det->add_option("--threshold", det.threshold, "Explicit threshold (skips calibration)");
  cmd_det->add_option("--calibration-draws", det.calibration_draws,
                      "Bootstrap draws for norm/eig thresholds");
  cmd_det->add_option("--seed", det.seed, "Bootstrap seed");

  CrbFlags crb;
  auto* cmd_crb = app.add_subcommand("crb", "Fisher information and Cramer-Rao bounds");
  cmd_crb->add_option("--r", crb.r, "Position x,y,z [m]");
  cmd_crb->add_option("--psi", crb.psi, "Orientation roll,pitch,yaw");
  cmd_crb->add_option("--N", crb.n, "Samples (multiple of 3)");
  cmd_crb->add_option("--c", crb.c, "Scale factor");
  cmd_crb->add_option("--m", crb.m, "Moment magnitude");
  cmd_crb->add_option("--sigma", crb.sigma, "Noise standard deviation");
  cmd_crb->add_flag("--full", crb.full, "Print the 6x6 full-state FIM");

  RmseFlags rmse;
  auto* cmd_rmse = app.add_subcommand("simulate-rmse", "RMSE versus prior uncertainty");
  rmse.config.add_to(cmd_rmse);
  cmd_rmse->add_option("--target", rmse.target, "Prior target: ori or pos");
  cmd_rmse->add_option("--sweep", rmse.sweep, "Prior standard deviations, comma-separated");
  cmd_rmse->add_option("--hemisphere-ref", rmse.hemisphere_ref, "truth or prior");
  cmd_rmse->add_option("--out", rmse.out, "Output CSV (default stdout)");

  RocFlags roc;
  roc.config.trials = 100000;
  auto* cmd_roc = app.add_subcommand("simulate-roc", "Detector ROC on simulated data");
  roc.config.add_to(cmd_roc);
  cmd_roc->add_option("--scale", roc.scale, "H1 noise covariance scale");
  cmd_roc->add_option("--out", roc.out, "Output CSV (default stdout)");

  FusionFlags fusion;
  auto* cmd_fusion = app.add_subcommand("simulate-fusion", "Accelerometer-prior fusion study");
  fusion.config.add_to(cmd_fusion);
  cmd_fusion->add_option("--accel-noise", fusion.accel_noise, "Accelerometer noise std [m/s^2]");
  cmd_fusion->add_option("--accel-samples", fusion.accel_samples, "Samples per transmission");
  cmd_fusion->add_option("--prior-sigma", fusion.prior_sigma, "Roll/pitch prior std");
  cmd_fusion->add_option("--out", fusion.out, "Output CSV (default stdout)");

  PacketFlags pkt;
  auto* cmd_pkt = app.add_subcommand("simulate-packet", "Write a simulated packet file");
  pkt.config.add_to(cmd_pkt, false);
  cmd_pkt->add_flag("--noise-free", pkt.noise_free, "No measurement noise");
  cmd_pkt->add_option("--noise-scale", pkt.noise_scale, "Actual noise covariance scale");
  cmd_pkt->add_option("--accel-samples", pkt.accel_samples, "Accelerometer samples to embed");
  cmd_pkt->add_option("--accel-noise", pkt.accel_noise, "Accelerometer noise std [m/s^2]");
  cmd_pkt->add_option("--out", pkt.out, "Output JSON (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (cmd_est->parsed()) return run_estimate(est);
    if (cmd_det->parsed()) return run_detect(det);
    if (cmd_crb->parsed()) return run_crb(crb);
    if (cmd_rmse->parsed()) return run_simulate_rmse(rmse);
    if (cmd_roc->parsed()) return run_simulate_roc(roc);
    if (cmd_fusion->parsed()) return run_simulate_fusion(fusion);
    if (cmd_pkt->parsed()) return run_simulate_packet(pkt);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.code()) {
      case ErrorCode::SchemaError:
      case ErrorCode::BadConfig:
      case ErrorCode::InvalidPrior:
        return kExitUsage;
      default:
        return kExitEstimation;
    }
  }
  return kExitUsage;
}
