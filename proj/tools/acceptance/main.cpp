// Copyright 2026 The NRTW Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// Desk-scale acceptance run. Prints one PASS/FAIL line per criterion and
// exits nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gradcheck.hpp"
#include "json.hpp"
#include "nrtw/core/ops.hpp"
#include "nrtw/data/dataset.hpp"
#include "nrtw/data/phantom.hpp"
#include "nrtw/denoiser/denoiser.hpp"
#include "nrtw/did/curve_io.hpp"
#include "nrtw/did/did.hpp"
#include "nrtw/metrics/metrics.hpp"
#include "nrtw/util/bytes.hpp"

namespace {

namespace fs = std::filesystem;
using namespace nrtw;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Options {
  fs::path work = "acceptance";
  std::vector<std::string> only;
  std::int64_t train_iterations = 10000;
  std::int64_t ablation_iterations = 10000;
};

class Run {
 public:
  explicit Run(Options options) : opt_(std::move(options)) {}

  bool wanted(const std::string& name) const {
    return opt_.only.empty() ||
           std::find(opt_.only.begin(), opt_.only.end(), name) != opt_.only.end();
  }

  void report(const std::string& name, bool pass, const std::string& detail, json values = {}) {
    std::cout << (pass ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
    results_[name] = {{"pass", pass}, {"detail", detail}, {"values", std::move(values)}};
    failures_ += pass ? 0 : 1;
  }

  void attempt(const std::string& name, const std::function<void()>& body) {
    if (!wanted(name)) return;
    try {
      body();
    } catch (const std::exception& e) {
      report(name, false, std::string("error: ") + e.what());
    }
  }

  // Plain 8x16 net on 64 pairs, held-out pairs follow the training ones.
  const denoiser::Checkpoint& trained() {
    if (!trained_) {
      data::DatasetSpec spec;
      denoiser::TrainConfig tc;
      tc.iterations = opt_.train_iterations;
      const auto t0 = Clock::now();
      trained_ = denoiser::train(data::make_dataset(spec), denoiser::NetworkConfig{}, tc, 0);
      train_seconds_ = seconds_since(t0);
      denoiser::write_checkpoint(opt_.work / "plain8x16.nrtwckpt", *trained_);
    }
    return *trained_;
  }

  // Default phantom at 128x128 with 25 HU noise: the image every sweep uses.
  const data::PairedSample& probe() {
    if (!probe_) {
      data::NoiseSpec ns;
      ns.sigma = 25.0;
      ns.seed = 2024;
      probe_ = data::add_noise(data::generate_phantom(data::default_phantom_spec(128), 0), ns);
    }
    return *probe_;
  }

  std::vector<metrics::Roi> rois() const { return data::default_rois(128, 128); }

  metrics::Roi roi(const std::string& label) const {
    for (const auto& r : rois()) {
      if (r.label == label) return r;
    }
    throw std::runtime_error("default phantom has no '" + label + "' ROI");
  }

  // Curve with the default sweep settings in both directions, with per-direction timings.
  const did::NRTCurve& curve() {
    if (!curve_) {
      did::CurveContext context{probe().clean, rois()};
      curve_ = did::start_curve(trained(), probe().noisy, did::DIDConfig{}, context,
                                {"plain8x16", "probe"});
      for (auto d : {did::Direction::kLowNoise, did::Direction::kHighResolution}) {
        const auto t0 = Clock::now();
        did::run_direction(*curve_, trained(), d);
        const double s = seconds_since(t0);
        sweep_seconds_ += s;
        sweep_iterations_ += curve_->state(d).iterations;
        std::cout << "  sweep " << did::to_string(d) << ": "
                  << did::to_string(curve_->state(d).status) << ", "
                  << curve_->state(d).iterations << " iterations, " << fmt("%.1f s", s)
                  << std::endl;
      }
      did::write_curve(opt_.work / "curve", *curve_);
    }
    return *curve_;
  }

  double train_seconds() const { return train_seconds_; }
  double sweep_ms_per_iteration() const {
    return sweep_iterations_ > 0 ? 1000.0 * sweep_seconds_ / double(sweep_iterations_) : NAN;
  }
  const Options& options() const { return opt_; }

  int finish() {
    const auto total = results_.size();
    std::cout << "acceptance: " << total - failures_ << "/" << total << " passed" << std::endl;
    json manifest = {{"results", results_},
                     {"threads", ops::compute_threads()},
                     {"train_iterations", opt_.train_iterations},
                     {"ablation_iterations", opt_.ablation_iterations}};
    if (sweep_iterations_ > 0) manifest["ms_per_iteration"] = sweep_ms_per_iteration();
    util::write_file_atomic(opt_.work / "acceptance_manifest.json", manifest.dump(2) + "\n");
    return failures_ == 0 ? 0 : 1;
  }

 private:
  Options opt_;
  json results_ = json::object();
  std::size_t failures_ = 0;
  std::optional<denoiser::Checkpoint> trained_;
  std::optional<data::PairedSample> probe_;
  std::optional<did::NRTCurve> curve_;
  double train_seconds_ = 0.0;
  double sweep_seconds_ = 0.0;
  std::int64_t sweep_iterations_ = 0;
};

void gradient_fidelity(Run& run) {
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::string where;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    const auto net = testing::random_network(trial);
    const auto r = testing::check_gradients(net.build, net.params);
    if (r.max_relative_error > worst) {
      worst = r.max_relative_error;
      where = net.description + " / " + r.worst_parameter;
    }
  }
  const double s = seconds_since(t0);
  run.report("gradient_fidelity", worst <= 1e-3 && s <= 120.0,
             fmt("100 trials, max relative error %.3g (<= 1e-3) at %s; %.1f s (<= 120 s)", worst,
                 where.c_str(), s),
             {{"max_relative_error", worst}, {"seconds", s}});
}

void training_efficacy(Run& run) {
  const auto& ck = run.trained();
  data::DatasetSpec spec;
  std::vector<double> reductions;
  int improved = 0;
  for (std::size_t i = 0; i < 20; ++i) {
    const auto pair = data::make_sample(spec, spec.count + i);
    const double before = metrics::rmse(pair.noisy, pair.clean);
    const double after = metrics::rmse(denoiser::infer(ck, pair.noisy), pair.clean);
    improved += after < before;
    reductions.push_back(1.0 - after / before);
  }
  std::sort(reductions.begin(), reductions.end());
  const double median = 0.5 * (reductions[9] + reductions[10]);
  const double s = run.train_seconds();
  run.report("training_efficacy", improved >= 18 && median >= 0.30 && s <= 1800.0,
             fmt("%d/20 held-out improved (>= 18), median RMSE reduction %.1f%% (>= 30%%); "
                 "%lld iterations in %.0f s (<= 1800 s)",
                 improved, 100.0 * median, static_cast<long long>(run.options().train_iterations),
                 s),
             {{"improved", improved}, {"median_reduction", median}, {"train_seconds", s}});
}

void overfit(Run& run) {
  data::NoiseSpec ns;
  ns.sigma = 25.0;
  ns.seed = 3;
  const auto pair = data::add_noise(data::generate_phantom(data::default_phantom_spec(64), 0), ns);
  denoiser::TrainConfig tc;
  tc.iterations = 2000;
  const auto ck = denoiser::train({pair}, denoiser::NetworkConfig{}, tc, 7);
  const auto& h = ck.loss_history;
  const double ratio = h.back() / h.front();
  run.report("overfit_single_pair", ratio < 0.01,
             fmt("loss at iteration 2000 is %.3g%% of iteration 0 (< 1%%)", 100.0 * ratio),
             {{"ratio", ratio}});
}

void sweep_descent(Run& run) {
  const auto& ck = run.trained();
  const Image& x = run.probe().noisy;
  const did::Bounds bounds = did::make_bounds(ck, x, 3);
  did::DIDConfig slow;
  slow.learning_rate = 1e-3;
  slow.momentum = 0.0;
  slow.max_iterations = 100;
  slow.cadence = 100;
  slow.stop_threshold = 1e-12;
  double worst_rise = 0.0;
  for (auto d : {did::Direction::kLowNoise, did::Direction::kHighResolution}) {
    const Image& target = d == did::Direction::kLowNoise ? bounds.t_low : bounds.t_high;
    const auto r = did::sweep(ck, x, target, slow, d);
    const auto& dist = r.distance_trace;
    for (std::size_t i = 1; i < dist.size(); ++i) {
      worst_rise = std::max(worst_rise, (dist[i] - dist[i - 1]) / dist.front());
    }
  }
  run.report("sweep_monotone_descent", worst_rise <= 1e-7,
             fmt("eta 1e-3, mu 0, 100 iterations per direction: largest relative distance rise "
                 "%.3g (<= 1e-7)",
                 worst_rise),
             {{"max_relative_rise", worst_rise}});

  const auto& curve = run.curve();
  const auto& st = curve.low_noise;
  const auto [lo, hi] = curve.index_range();
  const double d0 = curve.candidates.at(0).distance_to_low;
  const double d1 = curve.candidates.at(hi).distance_to_low;
  const bool terminated = st.status == did::SweepStatus::kComplete && st.iterations <= 2000;
  run.report("sweep_reaches_t_low", terminated && d1 <= 0.1 * d0,
             fmt("eta 1e-2, mu 0.9, stop 1%%: %s after %lld iterations (<= 2000), final distance "
                 "%.1f%% of initial (<= 10%%)",
                 st.converged ? "converged" : "stopped at budget",
                 static_cast<long long>(st.iterations), 100.0 * d1 / d0),
             {{"iterations", st.iterations}, {"converged", st.converged},
              {"distance_ratio", d1 / d0}});
}

void bound_semantics(Run& run) {
  const auto& ck = run.trained();
  const Image& x = run.probe().noisy;
  const did::Bounds b = did::make_bounds(ck, x, 3);
  const bool identical = b.t_high.shape() == x.shape() &&
                         std::equal(b.t_high.data().begin(), b.t_high.data().end(),
                                    x.data().begin(), [](float a, float c) {
                                      return std::memcmp(&a, &c, sizeof a) == 0;
                                    });
  const auto flat = run.roi(metrics::kFlatRoi);
  const double s_low = metrics::roi_std(b.t_low, flat);
  const double s_phi = metrics::roi_std(denoiser::infer(ck, x), flat);
  const double s_x = metrics::roi_std(x, flat);
  run.report("bound_semantics", identical && s_low <= s_phi && s_phi <= s_x,
             fmt("t_high bit-equal to x: %s; flat STD t_low(K=3) %.3f <= phi(x) %.3f <= x %.3f HU",
                 identical ? "yes" : "no", s_low, s_phi, s_x),
             {{"t_high_bit_equal", identical}, {"std_t_low", s_low}, {"std_phi", s_phi},
              {"std_x", s_x}});
}

void curve_ordering(Run& run) {
  const auto& curve = run.curve();
  const auto [lo, hi] = curve.index_range();
  const auto flat = run.roi(metrics::kFlatRoi);
  const auto edge = run.roi(metrics::kEdgeRoi);
  auto stdv = [&](std::int64_t j) { return metrics::roi_std(curve.candidates.at(j).image, flat); };
  auto proxy = [&](std::int64_t j) {
    return metrics::resolution_proxy(curve.candidates.at(j).image, edge);
  };
  constexpr double kSlack = 1.02;
  const bool std_ok = stdv(hi) <= kSlack * stdv(0) && stdv(0) <= kSlack * stdv(lo);
  // Sharper images have the larger proxy, so it falls with the index.
  const bool proxy_ok = proxy(hi) <= kSlack * proxy(0) && proxy(0) <= kSlack * proxy(lo);
  double worst_rise = 0.0;
  for (std::int64_t j = 1; j <= hi; ++j) {
    const double prev = curve.candidates.at(j - 1).distance_to_low;
    worst_rise = std::max(worst_rise, (curve.candidates.at(j).distance_to_low - prev) /
                                          curve.candidates.at(0).distance_to_low);
  }
  for (std::int64_t j = -1; j >= lo; --j) {
    const double prev = curve.candidates.at(j + 1).distance_to_high;
    worst_rise = std::max(worst_rise, (curve.candidates.at(j).distance_to_high - prev) /
                                          curve.candidates.at(0).distance_to_high);
  }
  const bool dist_ok = worst_rise <= 1e-7;
  run.report(
      "curve_ordering", std_ok && proxy_ok && dist_ok,
      fmt("flat STD j=%lld %.3f / j=0 %.3f / j=%lld %.3f (2%% slack): %s; edge proxy %.2f / %.2f "
          "/ %.2f (reversed, 2%% slack): %s; snapshot distance rise %.3g (<= 1e-7)",
          static_cast<long long>(hi), stdv(hi), stdv(0), static_cast<long long>(lo), stdv(lo),
          std_ok ? "ordered" : "not ordered", proxy(hi), proxy(0), proxy(lo),
          proxy_ok ? "ordered" : "not ordered", worst_rise),
      {{"std", {stdv(hi), stdv(0), stdv(lo)}},
       {"proxy", {proxy(hi), proxy(0), proxy(lo)}},
       {"index_range", {lo, hi}},
       {"max_relative_rise", worst_rise}});
}

void twicing(Run& run) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const double x = u(rng), t = u(rng), w0 = u(rng);
    const double theta = x * x;
    const double eta = std::uniform_real_distribution<double>(0.01, 1.9)(rng) / theta;
    const auto oracle = did::linear_twicing_oracle(w0 * x, t, eta, theta, 50);
    double w = w0;
    for (int j = 0; j <= 50; ++j) {
      GraphD g;
      ParamSetD p;
      p.add("w", TensorD::scalar(w));
      const auto handles = g.parameters(p);
      const auto phi = g.scale(g.constant(TensorD::scalar(x)), handles[0]);
      const auto loss = g.mse_loss(phi, g.constant(TensorD::scalar(t)), 0.5);
      worst = std::max(worst, std::abs(g.value(phi).item() - oracle[std::size_t(j)]));
      w -= eta * g.backward(loss)[0].value.item();
    }
  }
  run.report("twicing_oracle", worst <= 1e-10,
             fmt("20 one-parameter linear models, 50 steps: max deviation %.3g (<= 1e-10)", worst),
             {{"max_abs_error", worst}});
}

void interactivity(Run& run) {
  run.curve();
  const double ms = run.sweep_ms_per_iteration();
  run.report("interactivity", ms <= 200.0,
             fmt("%.1f ms per sweep iteration at 128x128, plain 8x16 (<= 200 ms); recorded in "
                 "acceptance_manifest.json",
                 ms),
             {{"ms_per_iteration", ms}});
}

void dose_ablation(Run& run) {
  const Image& x = run.probe().noisy;
  const auto flat = run.roi(metrics::kFlatRoi);
  std::vector<double> stds;
  std::string detail;
  for (double factor : {0.5, 1.0, 2.0, 4.0}) {
    data::DatasetSpec spec;
    spec.noise_factor = factor;
    denoiser::TrainConfig tc;
    tc.iterations = run.options().ablation_iterations;
    const auto ck = denoiser::train(data::make_dataset(spec), denoiser::NetworkConfig{}, tc, 0);
    stds.push_back(metrics::roi_std(denoiser::infer(ck, x), flat));
    detail += fmt("%sx%.1f: %.3f", detail.empty() ? "" : ", ", factor, stds.back());
    std::cout << "  ablation factor " << factor << ": flat STD " << stds.back() << std::endl;
  }
  const bool ok = std::is_sorted(stds.rbegin(), stds.rend());
  run.report("dose_ablation", ok,
             "flat STD of the default output by training noise factor (nonincreasing): " + detail +
                 fmt(" HU; %lld iterations each",
                     static_cast<long long>(run.options().ablation_iterations)),
             {{"factors", {0.5, 1.0, 2.0, 4.0}}, {"flat_std", stds}});
}

void format_round_trips(Run& run) {
  const fs::path dir = run.options().work / "roundtrip";
  fs::create_directories(dir);
  const Image& x = run.probe().noisy;
  write_image(dir / "a.nrtwimg", x, {{"kind", "probe"}});
  const auto img = read_image(dir / "a.nrtwimg");
  write_image(dir / "b.nrtwimg", img.image, img.provenance);
  const bool img_ok = util::read_file(dir / "a.nrtwimg") == util::read_file(dir / "b.nrtwimg");

  denoiser::NetworkConfig unet;
  unet.kind = denoiser::Architecture::kUnet;
  unet.unet_depth = 2;
  unet.base_channels = 4;
  denoiser::TrainConfig tc;
  tc.iterations = 3;
  const auto small = denoiser::train({data::add_noise(data::generate_phantom(
                                          data::default_phantom_spec(32), 0), {})},
                                     unet, tc, 1);
  bool ckpt_ok = true;
  for (const auto* ck : {&small, &run.trained()}) {
    denoiser::write_checkpoint(dir / "a.nrtwckpt", *ck);
    denoiser::write_checkpoint(dir / "b.nrtwckpt", denoiser::read_checkpoint(dir / "a.nrtwckpt"));
    ckpt_ok = ckpt_ok && util::read_file(dir / "a.nrtwckpt") == util::read_file(dir / "b.nrtwckpt");
  }
  run.report("format_round_trips", img_ok && ckpt_ok,
             fmt("NRTW-IMG write-read-write identical: %s; NRTW-CKPT (unet, plain) identical: %s",
                 img_ok ? "yes" : "no", ckpt_ok ? "yes" : "no"),
             {{"image", img_ok}, {"checkpoint", ckpt_ok}});
}

}  // namespace

int main(int argc, char** argv) {
  Options opt;
  CLI::App app{"Acceptance criteria at desk scale"};
  app.add_option("--work", opt.work, "Directory for artifacts and the manifest");
  app.add_option("--only", opt.only, "Run only these criteria");
  app.add_option("--train-iterations", opt.train_iterations, "Training-efficacy iterations")
      ->capture_default_str();
  app.add_option("--ablation-iterations", opt.ablation_iterations,
                 "Iterations per dose-ablation checkpoint")
      ->capture_default_str();
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(opt.work);

  Run run(opt);
  run.attempt("gradient_fidelity", [&] { gradient_fidelity(run); });
  run.attempt("twicing_oracle", [&] { twicing(run); });
  run.attempt("format_round_trips", [&] { format_round_trips(run); });
  run.attempt("training_efficacy", [&] { training_efficacy(run); });
  run.attempt("overfit_single_pair", [&] { overfit(run); });
  run.attempt("bound_semantics", [&] { bound_semantics(run); });
  if (run.wanted("sweep_monotone_descent") || run.wanted("sweep_reaches_t_low")) {
    try {
      sweep_descent(run);
    } catch (const std::exception& e) {
      run.report("sweep_monotone_descent", false, std::string("error: ") + e.what());
    }
  }
  run.attempt("curve_ordering", [&] { curve_ordering(run); });
  run.attempt("interactivity", [&] { interactivity(run); });
  run.attempt("dose_ablation", [&] { dose_ablation(run); });
  return run.finish();
}
