#include "minav/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <optional>
#include <string>
#include <thread>

#include "minav/baseline.hpp"

namespace minav {

void ExperimentConfig::validate() const {
  if (trials < 1) throw Error(ErrorCode::BadConfig, "trials must be at least 1");
  if (!(sigma > 0.0)) throw Error(ErrorCode::BadConfig, "sigma must be positive");
  if (!(truth.r.norm() >= kMinRange)) throw Error(ErrorCode::BadConfig, "truth at the origin");
  if (schedule.size() == 0) throw Error(ErrorCode::BadConfig, "empty moment schedule");
  for (double v : prior_sweep) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::BadConfig, "sweep values must be positive and finite");
    }
  }
}

unsigned resolve_thread_count(unsigned requested) {
  if (requested > 0) return requested;
  const unsigned hardware = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("MINAV_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return std::min(hardware, static_cast<unsigned>(v));
    } catch (const std::exception&) {
    }
  }
  return hardware;
}

namespace {

/// Runs body(i) for i in [0, n). Output must be written by index.
template <typename Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body) {
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

void check_failures(int failed, int trials) {
  if (static_cast<double>(failed) > 0.01 * trials) {
    throw Error(ErrorCode::TooManyFailures, std::to_string(failed) + " of " +
                                                std::to_string(trials) + " trials failed");
  }
}

RmseEstimate rmse_from_squares(const std::vector<double>& sq) {
  // sq holds |e|^2 / 3 per trial.
  const double n = static_cast<double>(sq.size());
  double mean = 0.0;
  for (double v : sq) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : sq) var += (v - mean) * (v - mean);
  var /= std::max(1.0, n - 1.0);
  const double rmse = std::sqrt(mean);
  const double se = rmse > 0.0 ? std::sqrt(var / n) / (2.0 * rmse) : 0.0;
  return {rmse, se};
}

double position_sq_error(const NavStated& est, const NavStated& truth) {
  return (est.r - truth.r).squaredNorm() / 3.0;
}

double orientation_sq_error(const NavStated& est, const NavStated& truth) {
  const Vector3d a = est.psi.vector(), b = truth.psi.vector();
  double s = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double d = angle_residual(a(i), b(i));
    s += d * d;
  }
  return s / 3.0;
}

struct RmseTrial {
  double ml_pos{0.0}, ml_ori{0.0};
  std::vector<double> map_pos, map_ori;
};

}  // namespace

RmseCurve run_rmse_experiment(const ExperimentConfig& config) {
  config.validate();
  const std::size_t n_sweep = config.prior_sweep.size();
  const Matrix3d noise = config.noise_cov();
  const NavStated& truth = config.truth;

  std::vector<std::optional<RmseTrial>> trials(static_cast<std::size_t>(config.trials));
  parallel_for(trials.size(), resolve_thread_count(config.threads), [&](std::size_t i) {
    try {
      Rng rng = Rng::stream(config.seed, i, 0);
      const MeasurementPacket packet =
          simulate_packet(truth, config.schedule, config.c, noise, rng.next_u64());
      const NavStated init = baseline_estimate(packet);
      const NavStated ml = resolve_hemisphere(ml_estimate(packet, init).state, truth.r);

      RmseTrial trial;
      trial.ml_pos = position_sq_error(ml, truth);
      trial.ml_ori = orientation_sq_error(ml, truth);
      for (std::size_t j = 0; j < n_sweep; ++j) {
        const double sd = config.prior_sweep[j];
        Rng prior_rng = Rng::stream(config.seed, i, 1 + j);
        const Vector3d center =
            config.prior_target == PriorTarget::Position ? truth.r : truth.psi.vector();
        const Vector3d mean = center + sd * prior_rng.normal3();
        const GaussianPrior prior = GaussianPrior::isotropic(config.prior_target, mean, sd);
        Vector3d reference = truth.r;
        if (config.prior_target == PriorTarget::Position &&
            config.hemisphere_reference == HemisphereReference::PriorMean) {
          reference = mean;
        }
        const NavStated map =
            resolve_hemisphere(map_estimate(packet, init, {prior}).state, reference);
        trial.map_pos.push_back(position_sq_error(map, truth));
        trial.map_ori.push_back(orientation_sq_error(map, truth));
      }
      trials[i] = std::move(trial);
    } catch (const Error&) {
      trials[i].reset();
    }
  });

  RmseCurve curve;
  curve.prior_target = config.prior_target;
  curve.estimand = config.prior_target == PriorTarget::Orientation ? StateBlock::Position
                                                                   : StateBlock::Orientation;
  std::vector<double> ml_pos, ml_ori;
  std::vector<std::vector<double>> map_pos(n_sweep), map_ori(n_sweep);
  for (const auto& t : trials) {
    if (!t) {
      ++curve.failed_trials;
      continue;
    }
    ml_pos.push_back(t->ml_pos);
    ml_ori.push_back(t->ml_ori);
    for (std::size_t j = 0; j < n_sweep; ++j) {
      map_pos[j].push_back(t->map_pos[j]);
      map_ori[j].push_back(t->map_ori[j]);
    }
  }
  check_failures(curve.failed_trials, config.trials);
  curve.trials_used = static_cast<int>(ml_pos.size());

  const FisherInfo data_fim = full_fim(truth, config.schedule, config.c, noise);
  const RmseEstimate ml_position = rmse_from_squares(ml_pos);
  const RmseEstimate ml_orientation = rmse_from_squares(ml_ori);
  const double crb_perfect = known_complement_rmse_bound(data_fim, curve.estimand);
  for (std::size_t j = 0; j < n_sweep; ++j) {
    RmsePoint point;
    point.sweep = config.prior_sweep[j];
    point.ml_position = ml_position;
    point.ml_orientation = ml_orientation;
    point.map_position = rmse_from_squares(map_pos[j]);
    point.map_orientation = rmse_from_squares(map_ori[j]);
    // The prior is centred on the truth in distribution; its information does
    // not depend on the drawn mean.
    const GaussianPrior prior =
        GaussianPrior::isotropic(config.prior_target, Vector3d::Zero(), point.sweep);
    point.crb = scalar_rmse_bound(add_prior_information(data_fim, {prior}), curve.estimand);
    point.crb_perfect = crb_perfect;
    curve.points.push_back(point);
  }
  return curve;
}

const DetectorRoc& RocExperiment::get(Detector detector) const {
  for (const auto& d : detectors) {
    if (d.detector == detector) return d;
  }
  throw Error(ErrorCode::BadConfig, "detector not part of this experiment");
}

namespace {

struct DetectorScores {
  double chi2{0.0};
  double norm{0.0};
  double eig{0.0};
};

DetectorScores score_packet(const MeasurementPacket& packet) {
  const EstimateResult ml = ml_estimate(packet);
  return {chi2_statistic(packet, ml.state), normalized_statistic(packet, ml.state),
          eigenvalue_criterion(estimate_channel(packet))};
}

}  // namespace

RocExperiment run_roc_experiment(const ExperimentConfig& config, double h1_noise_scale) {
  config.validate();
  if (!(h1_noise_scale > 0.0)) throw Error(ErrorCode::BadConfig, "noise scale must be positive");
  const Matrix3d model_noise = config.noise_cov();
  const std::size_t n = static_cast<std::size_t>(config.trials);

  // Slot 2*i holds H0 trial i, slot 2*i+1 H1 trial i.
  std::vector<std::optional<DetectorScores>> scores(2 * n);
  parallel_for(2 * n, resolve_thread_count(config.threads), [&](std::size_t slot) {
    const std::size_t trial = slot / 2;
    const bool h1 = slot % 2 == 1;
    try {
      Rng rng = Rng::stream(config.seed, trial, h1 ? 101 : 100);
      MeasurementPacket packet =
          simulate_packet(config.truth, config.schedule, config.c,
                          (h1 ? h1_noise_scale : 1.0) * model_noise, rng.next_u64());
      packet.noise_cov = model_noise;
      scores[slot] = score_packet(packet);
    } catch (const Error&) {
      scores[slot].reset();
    }
  });

  RocExperiment out;
  out.h1_noise_scale = h1_noise_scale;
  DetectorRoc chi2{Detector::ChiSquared, {}, {}, {}};
  DetectorRoc norm{Detector::Normalized, {}, {}, {}};
  DetectorRoc eig{Detector::Eigenvalue, {}, {}, {}};
  for (std::size_t slot = 0; slot < scores.size(); ++slot) {
    const auto& s = scores[slot];
    if (!s) {
      ++out.failed_trials;
      continue;
    }
    const bool h1 = slot % 2 == 1;
    (h1 ? chi2.scores_h1 : chi2.scores_h0).push_back(s->chi2);
    (h1 ? norm.scores_h1 : norm.scores_h0).push_back(s->norm);
    (h1 ? eig.scores_h1 : eig.scores_h0).push_back(s->eig);
  }
  check_failures(out.failed_trials, 2 * config.trials);
  for (DetectorRoc* d : {&chi2, &norm, &eig}) {
    d->curve = roc_curve(d->scores_h0, d->scores_h1);
    out.detectors.push_back(std::move(*d));
  }
  return out;
}

Vec3List simulate_accel_samples(const EulerAnglesd& psi, std::size_t count, double noise_std,
                                Rng& rng) {
  const Vector3d specific_force = euler_to_rotation(psi) * Vector3d(0.0, 0.0, kGravity);
  Vec3List samples;
  samples.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    Vector3d a = specific_force;
    if (noise_std > 0.0) a += noise_std * rng.normal3();
    samples.push_back(a);
  }
  return samples;
}

std::vector<EcdfPoint> ecdf(std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  std::vector<EcdfPoint> points;
  const double n = static_cast<double>(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    // Ties collapse onto their last index.
    if (i + 1 < samples.size() && samples[i + 1] == samples[i]) continue;
    points.push_back({samples[i], static_cast<double>(i + 1) / n});
  }
  return points;
}

double median(std::vector<double> samples) {
  if (samples.empty()) throw Error(ErrorCode::BadConfig, "median of an empty sample");
  std::sort(samples.begin(), samples.end());
  const std::size_t mid = samples.size() / 2;
  return samples.size() % 2 ? samples[mid] : 0.5 * (samples[mid - 1] + samples[mid]);
}

FusionResult run_fusion_experiment(const ExperimentConfig& config, double accel_noise_std,
                                   double prior_sigma, std::size_t accel_samples) {
  config.validate();
  if (!(prior_sigma > 0.0) || accel_noise_std < 0.0 || accel_samples == 0) {
    throw Error(ErrorCode::BadConfig, "invalid accelerometer settings");
  }
  const Matrix3d noise = config.noise_cov();
  const NavStated& truth = config.truth;
  struct Errors {
    double ml, map;
  };
  std::vector<std::optional<Errors>> errors(static_cast<std::size_t>(config.trials));
  parallel_for(errors.size(), resolve_thread_count(config.threads), [&](std::size_t i) {
    try {
      Rng rng = Rng::stream(config.seed, i, 200);
      MeasurementPacket packet =
          simulate_packet(truth, config.schedule, config.c, noise, rng.next_u64());
      Rng accel_rng = Rng::stream(config.seed, i, 201);
      packet.accel = simulate_accel_samples(truth.psi, accel_samples, accel_noise_std, accel_rng);
      const GaussianPrior prior = orientation_prior_from_accel(*packet.accel, prior_sigma);
      const NavStated init = baseline_estimate(packet);
      const NavStated ml = resolve_hemisphere(ml_estimate(packet, init).state, truth.r);
      const NavStated map = resolve_hemisphere(map_estimate(packet, init, {prior}).state, truth.r);
      errors[i] = Errors{(ml.r - truth.r).norm(), (map.r - truth.r).norm()};
    } catch (const Error&) {
      errors[i].reset();
    }
  });

  FusionResult out;
  for (const auto& e : errors) {
    if (!e) {
      ++out.failed_trials;
      continue;
    }
    out.ml_errors.push_back(e->ml);
    out.map_errors.push_back(e->map);
  }
  check_failures(out.failed_trials, config.trials);
  std::sort(out.ml_errors.begin(), out.ml_errors.end());
  std::sort(out.map_errors.begin(), out.map_errors.end());
  out.ml_median = median(out.ml_errors);
  out.map_median = median(out.map_errors);
  out.median_ratio = out.map_median / out.ml_median;
  return out;
}

}  // namespace minav
