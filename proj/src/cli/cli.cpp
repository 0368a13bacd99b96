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
#include "nrtw/cli/cli.hpp"

#include <pthread.h>
#include <signal.h>

#include <atomic>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "nrtw/core/error.hpp"
#include "nrtw/core/ops.hpp"
#include "nrtw/data/dataset.hpp"
#include "nrtw/data/image.hpp"
#include "nrtw/denoiser/denoiser.hpp"
#include "nrtw/did/curve_io.hpp"
#include "nrtw/did/did.hpp"
#include "nrtw/metrics/metrics.hpp"
#include "nrtw/service/http.hpp"
#include "nrtw/service/service.hpp"
#include "nrtw/util/bytes.hpp"

namespace nrtw::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr const char* kVersion = "1.0.0";

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string short_hash(const fs::path& path) { return util::sha256_file(path).substr(0, 16); }

fs::path sidecar(const fs::path& file) { return fs::path(file.string() + ".manifest.json"); }

std::vector<metrics::Roi> read_rois(const fs::path& path) {
  try {
    return json::parse(util::read_file(path)).get<std::vector<metrics::Roi>>();
  } catch (const json::exception& e) {
    fail(ErrorCode::kInvalidArgument, "rois file " + path.string() + ": " + e.what());
  }
}

// "row0,col0,height,width[,label]"
metrics::Roi parse_roi(const std::string& text, std::size_t ordinal) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, ',');) parts.push_back(part);
  require(parts.size() == 4 || parts.size() == 5, ErrorCode::kInvalidArgument,
          "--roi expects row0,col0,height,width[,label], got '" + text + "'");
  metrics::Roi roi;
  try {
    roi.row0 = std::stoll(parts[0]);
    roi.col0 = std::stoll(parts[1]);
    roi.height = std::stoll(parts[2]);
    roi.width = std::stoll(parts[3]);
  } catch (const std::exception&) {
    fail(ErrorCode::kInvalidArgument, "--roi has a non-integer field: '" + text + "'");
  }
  roi.label = parts.size() == 5 ? parts[4] : "roi" + std::to_string(ordinal);
  return roi;
}

// ----------------------------------------------------------------- phantom

struct PhantomArgs {
  std::string spec;
  std::int64_t size = 128;
  std::uint64_t seed = 0;
  std::size_t count = 8;
  double sigma = 25.0;
  double noise_factor = 1.0;
  std::string out;
};

int cmd_phantom(const PhantomArgs& a, RunManifest& m, std::ostream& out) {
  data::DatasetSpec spec;
  spec.size = a.size;
  spec.count = a.count;
  spec.sigma = a.sigma;
  spec.seed = a.seed;
  spec.noise_factor = a.noise_factor;
  if (!a.spec.empty()) {
    try {
      spec.phantom = json::parse(util::read_file(a.spec)).get<data::PhantomSpec>();
    } catch (const json::exception& e) {
      fail(ErrorCode::kInvalidArgument, "phantom spec " + a.spec + ": " + e.what());
    }
    spec.size = spec.phantom->height;
    m.input(a.spec);
  }
  data::validate(spec);
  m.set_config(spec);
  m.seed("dataset", spec.seed);

  const fs::path dir = a.out;
  fs::create_directories(dir);
  const auto t0 = Clock::now();
  for (std::size_t i = 0; i < spec.count; ++i) {
    const auto seeds = data::sample_seeds(spec.seed, i);
    data::write_sample(dir, i, data::make_sample(spec, i),
                       {{"phantom_seed", std::to_string(seeds.phantom)},
                        {"noise_seed", std::to_string(seeds.noise)}});
  }
  util::write_file_atomic(dir / "dataset.json", json(spec).dump(2) + "\n");
  m.timing("generate_seconds", seconds_since(t0));
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".nrtwimg" || e.path().filename() == "dataset.json") {
      m.output(e.path());
    }
  }
  m.result("samples", spec.count);
  m.write(dir / "run_manifest.json");
  out << json{{"samples", spec.count}, {"out", dir.string()}}.dump() << "\n";
  return kExitOk;
}

// ------------------------------------------------------------------- train

struct TrainArgs {
  std::string data;
  std::string arch = "plain";
  int layers = 8;
  int channels = 16;
  int depth = 5;
  int base_channels = 32;
  bool no_residual = false;
  std::int64_t iters = 10000;
  double lr = 1e-4;
  std::uint64_t seed = 0;
  int batch = 1;
  std::int64_t crop = 0;
  std::int64_t log_every = 0;
  std::string out;
};

int cmd_train(const TrainArgs& a, RunManifest& m, std::ostream& out) {
  denoiser::NetworkConfig nc;
  nc.kind = denoiser::parse_architecture(a.arch);
  nc.plain_layers = a.layers;
  nc.plain_channels = a.channels;
  nc.unet_depth = a.depth;
  nc.base_channels = a.base_channels;
  nc.residual = !a.no_residual;
  denoiser::validate(nc);
  denoiser::TrainConfig tc;
  tc.iterations = a.iters;
  tc.learning_rate = a.lr;
  tc.seed = a.seed;
  tc.batch_size = a.batch;
  tc.crop = a.crop;
  denoiser::validate(tc);
  m.set_config({{"network", nc}, {"train", tc}, {"data", a.data}});
  m.seed("init", a.seed);
  m.seed("sample_order", a.seed);

  const auto dataset = data::read_dataset(a.data);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    char name[64];
    std::snprintf(name, sizeof name, "pair_%04zu.noisy.nrtwimg", i);
    m.input(fs::path(a.data) / name);
    std::snprintf(name, sizeof name, "pair_%04zu.clean.nrtwimg", i);
    m.input(fs::path(a.data) / name);
  }

  const auto t0 = Clock::now();
  const auto ckpt = denoiser::train(dataset, nc, tc, a.seed, [&](std::int64_t it, double loss) {
    if (a.log_every > 0 && it % a.log_every == 0) {
      out << json{{"iteration", it}, {"loss", loss}}.dump() << "\n" << std::flush;
    }
  });
  const double elapsed = seconds_since(t0);
  denoiser::write_checkpoint(a.out, ckpt);

  const auto& h = ckpt.loss_history;
  const std::size_t tenth = std::max<std::size_t>(1, h.size() / 10);
  double first = 0.0, last = 0.0;
  for (std::size_t i = 0; i < tenth; ++i) {
    first += h[i];
    last += h[h.size() - 1 - i];
  }
  m.timing("train_seconds", elapsed);
  m.result("ms_per_iteration", 1000.0 * elapsed / static_cast<double>(a.iters));
  m.result("parameters", ckpt.params.parameter_count());
  m.result("initial_loss", h.front());
  m.result("final_loss", h.back());
  m.result("first_tenth_mean_loss", first / static_cast<double>(tenth));
  m.result("last_tenth_mean_loss", last / static_cast<double>(tenth));
  m.result("dataset_fingerprint", ckpt.dataset_fingerprint);
  m.output(a.out);
  m.write(sidecar(a.out));
  out << json{{"checkpoint", a.out}, {"final_loss", h.back()}, {"sha256", util::sha256_file(a.out)}}
             .dump()
      << "\n";
  return kExitOk;
}

// ----------------------------------------------------------------- denoise

struct DenoiseArgs {
  std::string ckpt;
  std::string input;
  std::string out;
  int k = 1;
};

int cmd_denoise(const DenoiseArgs& a, RunManifest& m, std::ostream& out) {
  m.set_config({{"ckpt", a.ckpt}, {"input", a.input}, {"k", a.k}});
  m.input(a.ckpt);
  m.input(a.input);
  const auto ckpt = denoiser::read_checkpoint(a.ckpt);
  const Image x = read_image(a.input).image;
  const auto t0 = Clock::now();
  const Image y = denoiser::recursive_infer(ckpt, x, a.k);
  m.timing("infer_seconds", seconds_since(t0));
  write_image(a.out, y,
              {{"kind", "denoised"}, {"checkpoint", short_hash(a.ckpt)}, {"k", std::to_string(a.k)}});
  m.output(a.out);
  m.write(sidecar(a.out));
  out << json{{"out", a.out}, {"sha256", util::sha256_file(a.out)}}.dump() << "\n";
  return kExitOk;
}

// ------------------------------------------------------------------- sweep

struct SweepArgs {
  std::string ckpt;
  std::string input;
  std::string clean;
  std::string rois;
  std::string direction = "both";
  double lr = 1e-2;
  double momentum = 0.9;
  double stop = 0.01;
  std::int64_t cadence = 10;
  std::int64_t max_iters = 2000;
  int k = 3;
  std::string stop_reference = "correction";
  std::string out;
};

int cmd_sweep(const SweepArgs& a, RunManifest& m, std::ostream& out) {
  did::DIDConfig config;
  config.learning_rate = a.lr;
  config.momentum = a.momentum;
  config.stop_threshold = a.stop;
  config.cadence = a.cadence;
  config.max_iterations = a.max_iters;
  config.k = a.k;
  config.stop_reference = did::parse_stop_reference(a.stop_reference);
  did::validate(config);
  std::vector<did::Direction> directions;
  if (a.direction == "both") {
    directions = {did::Direction::kLowNoise, did::Direction::kHighResolution};
  } else {
    directions = {did::parse_direction(a.direction)};
  }
  m.set_config({{"did", config}, {"direction", a.direction}, {"ckpt", a.ckpt}, {"input", a.input},
                {"clean", a.clean}, {"rois", a.rois}});
  m.input(a.ckpt);
  m.input(a.input);

  const auto ckpt = denoiser::read_checkpoint(a.ckpt);
  const Image x = read_image(a.input).image;
  did::CurveContext context;
  if (!a.clean.empty()) {
    context.clean = read_image(a.clean).image;
    m.input(a.clean);
  }
  if (!a.rois.empty()) {
    context.rois = read_rois(a.rois);
    m.input(a.rois);
  } else {
    context.rois = data::default_rois(x.shape().h, x.shape().w);
  }

  const auto t0 = Clock::now();
  did::NRTCurve curve = did::start_curve(ckpt, x, config, std::move(context),
                                         {short_hash(a.ckpt), short_hash(a.input)});
  m.timing("bounds_seconds", seconds_since(t0));
  double sweep_seconds = 0.0;
  std::int64_t iterations = 0;
  json per_direction = json::object();
  for (auto d : directions) {
    const auto t1 = Clock::now();
    did::run_direction(curve, ckpt, d);
    const double s = seconds_since(t1);
    sweep_seconds += s;
    const auto& st = curve.state(d);
    iterations += st.iterations;
    const auto [lo, hi] = curve.index_range();
    const std::int64_t end = d == did::Direction::kLowNoise ? hi : lo;
    const double d0 = d == did::Direction::kLowNoise ? curve.candidates.at(0).distance_to_low
                                                     : curve.candidates.at(0).distance_to_high;
    const double d1 = d == did::Direction::kLowNoise ? curve.candidates.at(end).distance_to_low
                                                     : curve.candidates.at(end).distance_to_high;
    per_direction[did::to_string(d)] = {{"status", did::to_string(st.status)},
                                        {"error", st.error},
                                        {"iterations", st.iterations},
                                        {"converged", st.converged},
                                        {"endpoint_index", end},
                                        {"distance_ratio", d0 > 0.0 ? d1 / d0 : 0.0},
                                        {"seconds", s}};
  }
  did::write_curve(a.out, curve);
  m.timing("sweep_seconds", sweep_seconds);
  m.result("directions", per_direction);
  m.result("iterations", iterations);
  m.result("ms_per_iteration",
           iterations > 0 ? json(1000.0 * sweep_seconds / static_cast<double>(iterations))
                          : json(nullptr));
  m.result("index_range", curve.index_range());
  m.output_tree(a.out);
  m.write(fs::path(a.out) / "run_manifest.json");
  out << json{{"out", a.out}, {"status", did::to_string(curve.status())},
              {"index_range", curve.index_range()}}
             .dump()
      << "\n";
  for (auto d : directions) {
    const auto& st = curve.state(d);
    require(st.status != did::SweepStatus::kFailed, ErrorCode::kNonFinite,
            did::to_string(d) + " sweep failed: " + st.error);
  }
  return kExitOk;
}

// ----------------------------------------------------------------- metrics

struct MetricsArgs {
  std::string curve;
  std::string clean;
  std::vector<std::string> roi;
  std::string rois;
  std::string format = "tsv";
  std::string manifest;
};

int cmd_metrics(const MetricsArgs& a, RunManifest& m, std::ostream& out) {
  require(a.format == "tsv" || a.format == "json", ErrorCode::kInvalidArgument,
          "--format must be tsv or json");
  m.set_config({{"curve", a.curve}, {"clean", a.clean}, {"roi", a.roi}, {"rois", a.rois},
                {"format", a.format}});
  const did::NRTCurve curve = did::read_curve(a.curve);
  m.input(fs::path(a.curve) / "manifest.json");
  std::optional<Image> clean;
  if (!a.clean.empty()) {
    clean = read_image(a.clean).image;
    m.input(a.clean);
  }
  std::vector<metrics::Roi> rois = curve.context.rois;
  if (!a.rois.empty()) {
    rois = read_rois(a.rois);
    m.input(a.rois);
  }
  if (!a.roi.empty()) {
    rois.clear();
    for (std::size_t i = 0; i < a.roi.size(); ++i) rois.push_back(parse_roi(a.roi[i], i));
  }
  const Shape shape = curve.bounds.t_high.shape();
  for (const auto& roi : rois) metrics::validate_roi(roi, shape);
  if (clean) require_same_shape(clean->shape(), shape, "metrics: clean vs curve");

  std::vector<metrics::MetricRow> rows;
  for (const auto& [index, c] : curve.candidates) {
    const auto record = metrics::measure(c.image, clean ? &*clean : nullptr, rois);
    const auto r = metrics::to_rows(index, record);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  if (a.format == "tsv") {
    out << metrics::format_rows(rows);
  } else {
    json j = json::array();
    for (const auto& r : rows) {
      j.push_back({{"index", r.index},
                   {"metric", r.metric},
                   {"value", r.value ? json(*r.value) : json("unavailable")}});
    }
    out << j.dump() << "\n";
  }
  m.result("rows", rows.size());
  m.write(a.manifest.empty() ? fs::path(a.curve) / "metrics_manifest.json" : fs::path(a.manifest));
  return kExitOk;
}

// ------------------------------------------------------------------ export

struct ExportArgs {
  std::string curve;
  std::int64_t index = 0;
  std::vector<double> window = {-160.0, 240.0};
  std::string png;
};

int cmd_export(const ExportArgs& a, RunManifest& m, std::ostream& out) {
  require(a.window.size() == 2, ErrorCode::kInvalidArgument, "--window takes LOW HIGH");
  m.set_config({{"curve", a.curve}, {"index", a.index}, {"window", a.window}, {"png", a.png}});
  const did::NRTCurve curve = did::read_curve(a.curve);
  m.input(fs::path(a.curve) / "manifest.json");
  const auto& c = did::select_candidate(curve, a.index);
  const auto pixels = window_to_bytes(c.image, a.window[0], a.window[1]);
  util::write_file_atomic(a.png, encode_png_gray8(pixels, c.image.shape().h, c.image.shape().w));
  m.output(a.png);
  m.write(sidecar(a.png));
  out << json{{"png", a.png}, {"index", a.index}, {"sha256", util::sha256_file(a.png)}}.dump()
      << "\n";
  return kExitOk;
}

// ------------------------------------------------------------------- serve

struct ServeArgs {
  std::string addr = "127.0.0.1:8080";
  std::string ckpt_dir;
  std::string state_dir;
};

int cmd_serve(const ServeArgs& a, RunManifest& m, std::ostream& out) {
  const auto [host, port] = service::parse_address(a.addr);
  m.set_config({{"addr", a.addr}, {"ckpt_dir", a.ckpt_dir}, {"state_dir", a.state_dir}});

  sigset_t signals, previous;
  sigemptyset(&signals);
  sigaddset(&signals, SIGTERM);
  sigaddset(&signals, SIGINT);
  pthread_sigmask(SIG_BLOCK, &signals, &previous);
  struct RestoreMask {
    sigset_t mask;
    ~RestoreMask() { pthread_sigmask(SIG_SETMASK, &mask, nullptr); }
  } restore{previous};

  service::Service svc({a.ckpt_dir, a.state_dir, {}});
  service::HttpServer http(svc);
  const int bound = http.bind(host, port);
  std::atomic<bool> done{false};
  std::atomic<bool> signalled{false};
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    signalled = true;
    while (!done) {
      http.stop();
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
  });
  out << json{{"event", "listening"}, {"address", host + ":" + std::to_string(bound)}}.dump()
      << "\n"
      << std::flush;
  const auto t0 = Clock::now();
  http.serve();
  done = true;
  if (!signalled) pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  svc.shutdown();
  m.timing("serve_seconds", seconds_since(t0));
  m.result("sessions", svc.session_ids().size());
  m.write(fs::path(a.state_dir) / "serve_manifest.json");
  out << json{{"event", "stopped"}}.dump() << "\n" << std::flush;
  return kExitOk;
}

void emit_error(std::ostream& err, std::string_view code, const std::string& message, int exit) {
  err << json{{"error", {{"code", code}, {"message", message}}}, {"exit_code", exit}}.dump()
      << "\n";
}

int exit_code_for(ErrorCode code) {
  return code == ErrorCode::kInvalidArgument || code == ErrorCode::kNotFound ? kExitUsage
                                                                             : kExitRuntime;
}

}  // namespace

// ---------------------------------------------------------------- manifest

RunManifest::RunManifest(std::string subcommand, std::vector<std::string> argv)
    : subcommand_(std::move(subcommand)), argv_(std::move(argv)), start_(Clock::now()) {}

void RunManifest::input(const fs::path& path) {
  inputs_[path.string()] = util::sha256_file(path);
}

void RunManifest::output(const fs::path& path) {
  outputs_[path.string()] = util::sha256_file(path);
}

void RunManifest::output_tree(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().filename() != "run_manifest.json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) output(f);
}

json RunManifest::to_json() const {
  return {{"subcommand", subcommand_},
          {"argv", argv_},
          {"config", config_},
          {"seeds", seeds_},
          {"inputs", inputs_},
          {"outputs", outputs_},
          {"timings", timings_},
          {"results", results_},
          {"threads", ops::compute_threads()},
          {"versions",
           {{"nrtw", kVersion},
            {"image_format", "NRTW-IMG v1"},
            {"checkpoint_format", "NRTW-CKPT v1"},
            {"curve_format", "NRTW-CURVE v1"}}}};
}

void RunManifest::write(const fs::path& path) {
  timings_["wall_seconds"] = seconds_since(start_);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  util::write_file_atomic(path, to_json().dump(2) + "\n");
}

// --------------------------------------------------------------------- run

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"nrtw: denoising with an adjustable noise-resolution tradeoff"};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "TOML settings; one [subcommand] table each");
  app.require_subcommand(1, 1);

  PhantomArgs pa;
  auto* phantom = app.add_subcommand("phantom", "Generate paired clean/noisy phantom samples");
  phantom->add_option("--spec", pa.spec, "Phantom spec JSON (default: random body phantoms)")
      ->check(CLI::ExistingFile);
  phantom->add_option("--size", pa.size, "Canvas edge in pixels")->capture_default_str();
  phantom->add_option("--seed", pa.seed, "Dataset seed")->capture_default_str();
  phantom->add_option("--count", pa.count, "Number of pairs")->capture_default_str();
  phantom->add_option("--sigma", pa.sigma, "Noise standard deviation in HU")->capture_default_str();
  phantom->add_option("--noise-factor", pa.noise_factor, "Noise rescale factor")
      ->capture_default_str();
  phantom->add_option("--out", pa.out, "Output directory")->required();

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Train a denoiser on a sample directory");
  train->add_option("--data", ta.data, "Sample directory")->required()->check(CLI::ExistingDirectory);
  train->add_option("--arch", ta.arch, "plain or unet")
      ->check(CLI::IsMember({"plain", "unet"}))
      ->capture_default_str();
  train->add_option("--layers", ta.layers, "Plain net depth")->capture_default_str();
  train->add_option("--channels", ta.channels, "Plain net width")->capture_default_str();
  train->add_option("--depth", ta.depth, "U-Net downsampling levels")->capture_default_str();
  train->add_option("--base-channels", ta.base_channels, "U-Net first-level width")
      ->capture_default_str();
  train->add_flag("--no-residual", ta.no_residual, "Predict the image instead of a correction");
  train->add_option("--iters", ta.iters, "Iterations")->capture_default_str();
  train->add_option("--lr", ta.lr, "Initial Adam learning rate")->capture_default_str();
  train->add_option("--seed", ta.seed, "Initialization and sample-order seed")
      ->capture_default_str();
  train->add_option("--batch", ta.batch, "Batch size")->capture_default_str();
  train->add_option("--crop", ta.crop, "Random square crop edge (0: whole images)")
      ->capture_default_str();
  train->add_option("--log-every", ta.log_every, "Print the loss every N iterations");
  train->add_option("--out", ta.out, "Checkpoint path")->required();

  DenoiseArgs da;
  auto* denoise = app.add_subcommand("denoise", "Apply a checkpoint to one image");
  denoise->add_option("--ckpt", da.ckpt, "Checkpoint")->required()->check(CLI::ExistingFile);
  denoise->add_option("--input", da.input, "NRTW-IMG input")->required()->check(CLI::ExistingFile);
  denoise->add_option("--out", da.out, "NRTW-IMG output")->required();
  denoise->add_option("--k", da.k, "Apply the denoiser k times")->capture_default_str();

  SweepArgs sa;
  auto* sweep = app.add_subcommand("sweep", "Build a noise-resolution tradeoff curve");
  sweep->add_option("--ckpt", sa.ckpt, "Checkpoint")->required()->check(CLI::ExistingFile);
  sweep->add_option("--input", sa.input, "NRTW-IMG input")->required()->check(CLI::ExistingFile);
  sweep->add_option("--clean", sa.clean, "Clean reference for RMSE")->check(CLI::ExistingFile);
  sweep->add_option("--rois", sa.rois, "ROI list JSON")->check(CLI::ExistingFile);
  sweep->add_option("--direction", sa.direction, "both, low or high")
      ->check(CLI::IsMember({"both", "low", "high", "low_noise", "high_resolution"}))
      ->capture_default_str();
  sweep->add_option("--lr", sa.lr, "SGD learning rate")->capture_default_str();
  sweep->add_option("--momentum", sa.momentum, "SGD momentum")->capture_default_str();
  sweep->add_option("--stop", sa.stop, "Relative-change stop threshold")->capture_default_str();
  sweep->add_option("--cadence", sa.cadence, "Iterations between candidates")
      ->capture_default_str();
  sweep->add_option("--max-iters", sa.max_iters, "Iteration budget per direction")
      ->capture_default_str();
  sweep->add_option("--k", sa.k, "Recursions for the low-noise bound")->capture_default_str();
  sweep->add_option("--stop-reference", sa.stop_reference, "image, correction or residual")
      ->capture_default_str();
  sweep->add_option("--out", sa.out, "Curve directory")->required();

  MetricsArgs ma;
  auto* metrics_cmd = app.add_subcommand("metrics", "Tabulate metrics of every curve candidate");
  metrics_cmd->add_option("--curve", ma.curve, "Curve directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  metrics_cmd->add_option("--clean", ma.clean, "Clean reference for RMSE")
      ->check(CLI::ExistingFile);
  metrics_cmd->add_option("--roi", ma.roi, "row0,col0,height,width[,label]; repeatable");
  metrics_cmd->add_option("--rois", ma.rois, "ROI list JSON")->check(CLI::ExistingFile);
  metrics_cmd->add_option("--format", ma.format, "tsv or json")->capture_default_str();
  metrics_cmd->add_option("--manifest", ma.manifest, "Run manifest path");

  ExportArgs ea;
  auto* export_cmd = app.add_subcommand("export", "Write one candidate as a windowed PNG");
  export_cmd->add_option("--curve", ea.curve, "Curve directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  export_cmd->add_option("--index", ea.index, "Signed candidate index")->capture_default_str();
  export_cmd->add_option("--window", ea.window, "LOW HIGH in HU")
      ->expected(2)
      ->capture_default_str();
  export_cmd->add_option("--png", ea.png, "Output PNG")->required();

  ServeArgs va;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--addr", va.addr, "HOST:PORT (port 0 picks one)")->capture_default_str();
  serve->add_option("--ckpt-dir", va.ckpt_dir, "Checkpoint registry directory")->required();
  serve->add_option("--state-dir", va.state_dir, "Session state directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    emit_error(err, "usage", e.what(), kExitUsage);
    return kExitUsage;
  }

  const CLI::App* chosen = app.get_subcommands().front();
  RunManifest manifest(chosen->get_name(), std::vector<std::string>(argv, argv + argc));
  try {
    if (chosen == phantom) return cmd_phantom(pa, manifest, out);
    if (chosen == train) return cmd_train(ta, manifest, out);
    if (chosen == denoise) return cmd_denoise(da, manifest, out);
    if (chosen == sweep) return cmd_sweep(sa, manifest, out);
    if (chosen == metrics_cmd) return cmd_metrics(ma, manifest, out);
    if (chosen == export_cmd) return cmd_export(ea, manifest, out);
    return cmd_serve(va, manifest, out);
  } catch (const Error& e) {
    const int code = exit_code_for(e.code());
    emit_error(err, to_string(e.code()), e.what(), code);
    return code;
  } catch (const std::exception& e) {
    emit_error(err, "internal", e.what(), kExitRuntime);
    return kExitRuntime;
  }
}

}  // namespace nrtw::cli
