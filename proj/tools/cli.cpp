#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <thread>

#include "rnncert/baselines.hpp"
#include "rnncert/certify.hpp"
#include "rnncert/random.hpp"
#include "rnncert/soundcheck.hpp"

namespace rnncert::cli {

namespace {

using ojson = nlohmann::ordered_json;

struct RunConfig {
  std::string model_path;
  std::vector<std::string> inputs;
  std::string p = "inf";
  std::string mode = "untargeted";
  int target = -1;
  std::string frames = "all";
  std::string strategy = "planes";
  double eps0 = 0.01;
  double tol = 1e-4;
  std::size_t max_iter = 30;
  std::string output;
  std::string csv;
  std::uint64_t seed = 0;
  std::size_t workers = 1;

  std::string method = "gradient";
  double epsilon = -1.0;
  std::size_t resolution = 21;
  std::size_t steps = 500;

  double clever_eps0 = 1.0;
  std::size_t samples = 1024;

  std::size_t sound_samples = 100000;
  std::size_t grid = 21;

  std::string kind = "rnn";
  std::size_t n = 2, s = 4, m = 2, t = 3;
  double scale = 0.0;
  std::string activation = "tanh";
  std::size_t count = 0;
  std::string input_dir = ".";
  double input_scale = 1.0;
};

struct Sample {
  std::string path;
  InputSequence seq;
  std::size_t label = 0;
};

std::size_t default_workers() {
  if (const char* env = std::getenv("RNNCERT_WORKERS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
  }
  return 1;
}

// Runs f(0..count-1) on `workers` threads; results come back in index order
// and the first failing index (by position, not by time) is rethrown.
template <class F>
auto parallel_map(std::size_t count, std::size_t workers, F f) -> std::vector<decltype(f(std::size_t{}))> {
  using R = decltype(f(std::size_t{}));
  std::vector<std::optional<R>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        slots[i] = f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(workers, count));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < n; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  std::vector<R> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    out.push_back(std::move(*slots[i]));
  }
  return out;
}

std::vector<Sample> load_samples(const RecurrentModel& model, const RunConfig& cfg) {
  if (cfg.inputs.empty()) throw std::invalid_argument("at least one --input is required");
  std::vector<Sample> out;
  for (const auto& path : cfg.inputs) {
    Sample s{path, load_sequence(path), 0};
    try {
      check_sequence(model, s.seq);
    } catch (const std::exception& e) {
      throw ShapeError(path + ": " + e.what());
    }
    s.label = s.seq.label ? *s.seq.label : argmax(forward(model, s.seq.frames));
    out.push_back(std::move(s));
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  f << text;
  if (!f) throw std::runtime_error("failed writing '" + path + "'");
}

void emit(const RunConfig& cfg, const ojson& doc, std::ostream& out) {
  const std::string text = doc.dump(1) + "\n";
  if (cfg.output.empty()) {
    out << text;
  } else {
    write_text(cfg.output, text);
  }
}

ojson header(const std::string& command, const RunConfig& cfg) {
  ojson j;
  j["command"] = command;
  j["model"] = cfg.model_path;
  j["p"] = cfg.p;
  j["seed"] = cfg.seed;
  return j;
}

std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  double sq = 0.0;
  for (double x : v) sq += (x - mean) * (x - mean);
  return {mean, std::sqrt(sq / static_cast<double>(v.size()))};
}

void print_summary(std::ostream& out, const std::string& what, const std::vector<double>& values) {
  const auto [mean, sd] = mean_std(values);
  out << std::left << std::setw(28) << what << " n=" << values.size() << std::setprecision(6)
      << "  mean=" << mean << "  std=" << sd << "\n";
}

ojson summary_json(const std::vector<double>& values) {
  const auto [mean, sd] = mean_std(values);
  return ojson{{"count", values.size()}, {"mean", mean}, {"std", sd}};
}

SearchConfig search_config(const RunConfig& cfg) {
  SearchConfig sc;
  sc.eps0 = cfg.eps0;
  sc.tol = cfg.tol;
  sc.max_iter = cfg.max_iter;
  return sc;
}

std::optional<std::size_t> parse_frame(const std::string& text, std::size_t m) {
  if (text == "all") return std::nullopt;
  std::size_t used = 0;
  long k = -1;
  try {
    k = std::stol(text, &used);
  } catch (const std::exception&) {
  }
  if (used != text.size() || k < 1 || static_cast<std::size_t>(k) > m) {
    throw std::invalid_argument("--frames must be 'all', 'sweep' or a frame index in 1.." + std::to_string(m));
  }
  return static_cast<std::size_t>(k);
}

std::string csv_path(const RunConfig& cfg, std::size_t index, std::size_t total) {
  std::filesystem::path base = !cfg.csv.empty() ? std::filesystem::path(cfg.csv)
                               : !cfg.output.empty() ? std::filesystem::path(cfg.output).replace_extension(".csv")
                                                     : std::filesystem::path("per_frame.csv");
  if (total == 1) return base.string();
  const std::string stem = base.stem().string() + "_" + std::to_string(index);
  return (base.parent_path() / (stem + base.extension().string())).string();
}

int cmd_certify(const RunConfig& cfg, std::ostream& out) {
  const RecurrentModel model = load_model(cfg.model_path);
  const auto samples = load_samples(model, cfg);
  const double p = parse_norm(cfg.p);
  const CrossStrategy strategy = parse_strategy(cfg.strategy);
  const SearchConfig sc = search_config(cfg);
  const bool sweep = cfg.frames == "sweep";
  const auto frame = sweep ? std::nullopt : parse_frame(cfg.frames, model.m);
  if (cfg.mode != "untargeted" && cfg.mode != "targeted") {
    throw std::invalid_argument("--mode must be 'untargeted' or 'targeted'");
  }
  const bool targeted = cfg.mode == "targeted";
  if (cfg.target >= 0 && !targeted) throw std::invalid_argument("--target requires --mode targeted");
  if (cfg.target >= static_cast<int>(model.t)) throw std::invalid_argument("--target out of range");
  if (sweep && targeted) throw std::invalid_argument("--frames sweep supports untargeted mode only");

  struct Outcome {
    ojson record;
    std::vector<double> headline;  // one value, or one per frame for sweeps
    std::string csv;
  };
  auto work = [&](std::size_t idx) {
    const Sample& smp = samples[idx];
    Outcome o;
    o.record["input"] = smp.path;
    o.record["label"] = smp.label;
    if (sweep) {
      const auto rs = certify_per_frame(model, smp.seq.frames, smp.label, p, strategy, sc);
      auto& arr = o.record["per_frame"] = ojson::array();
      for (const auto& r : rs) {
        arr.push_back(to_json(r));
        o.headline.push_back(r.certified_epsilon);
      }
      o.csv = per_frame_csv(rs);
    } else if (!targeted) {
      const auto r = certify_untargeted(model, smp.seq.frames, smp.label, p, frame, strategy, sc);
      o.record["result"] = to_json(r);
      o.headline.push_back(r.certified_epsilon);
    } else {
      std::vector<std::size_t> targets;
      if (cfg.target >= 0) {
        targets.push_back(static_cast<std::size_t>(cfg.target));
      } else {
        for (std::size_t i = 0; i < model.t; ++i) {
          if (i != smp.label) targets.push_back(i);
        }
      }
      auto& arr = o.record["targeted"] = ojson::array();
      double least = std::numeric_limits<double>::infinity();
      for (std::size_t i : targets) {
        if (i == smp.label) throw std::invalid_argument("--target equals the label of " + smp.path);
        const auto r = certify_targeted(model, smp.seq.frames, smp.label, i, p, frame, strategy, sc);
        arr.push_back(to_json(r));
        least = std::min(least, r.certified_epsilon);
      }
      o.record["min_epsilon"] = least;
      o.headline.push_back(least);
    }
    return o;
  };
  const auto outcomes = parallel_map(samples.size(), cfg.workers, work);

  ojson doc = header("certify", cfg);
  doc["mode"] = cfg.mode;
  doc["frames"] = cfg.frames;
  doc["strategy"] = cfg.strategy;
  doc["eps0"] = cfg.eps0;
  doc["tol"] = cfg.tol;
  doc["max_iter"] = cfg.max_iter;
  auto& results = doc["results"] = ojson::array();
  std::vector<double> headline;
  for (const auto& o : outcomes) {
    results.push_back(o.record);
    if (!sweep) headline.push_back(o.headline.front());
  }
  if (sweep) {
    auto& per = doc["summary"] = ojson::array();
    for (std::size_t k = 0; k < model.m; ++k) {
      std::vector<double> col;
      for (const auto& o : outcomes) col.push_back(o.headline[k]);
      ojson row = summary_json(col);
      row["frame"] = k + 1;
      per.push_back(row);
      print_summary(out, "frame " + std::to_string(k + 1) + " certified eps", col);
    }
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      write_text(csv_path(cfg, i, outcomes.size()), outcomes[i].csv);
    }
  } else {
    doc["summary"] = summary_json(headline);
    print_summary(out, "certified eps", headline);
  }
  emit(cfg, doc, out);
  return kExitOk;
}

int cmd_attack(const RunConfig& cfg, std::ostream& out) {
  const RecurrentModel model = load_model(cfg.model_path);
  const auto samples = load_samples(model, cfg);
  const double p = parse_norm(cfg.p);
  if (cfg.method != "gradient" && cfg.method != "grid") {
    throw std::invalid_argument("--method must be 'gradient' or 'grid'");
  }
  if (cfg.method == "grid" && !(cfg.epsilon >= 0.0)) throw std::invalid_argument("grid attack needs --eps");

  auto work = [&](std::size_t idx) {
    const Sample& smp = samples[idx];
    AttackResult r;
    if (cfg.method == "grid") {
      r = grid_attack(model, smp.seq.frames, smp.label, p, cfg.epsilon, cfg.resolution);
    } else {
      GradientAttackConfig gc;
      gc.max_steps = cfg.steps;
      gc.seed = cfg.seed + idx;
      r = gradient_attack(model, smp.seq.frames, smp.label, p, gc);
    }
    ojson rec;
    rec["input"] = smp.path;
    rec["label"] = smp.label;
    rec["result"] = to_json(r, p);
    return std::make_pair(rec, r);
  };
  const auto outcomes = parallel_map(samples.size(), cfg.workers, work);

  ojson doc = header("attack", cfg);
  doc["method"] = cfg.method;
  auto& results = doc["results"] = ojson::array();
  std::vector<double> dist;
  std::size_t failures = 0;
  for (const auto& [rec, r] : outcomes) {
    results.push_back(rec);
    if (r.success) {
      dist.push_back(r.distortion);
    } else {
      ++failures;
    }
  }
  doc["summary"] = summary_json(dist);
  doc["summary"]["failures"] = failures;
  print_summary(out, "attack distortion", dist);
  if (failures) out << "attack failed on " << failures << " input(s)\n";
  emit(cfg, doc, out);
  return kExitOk;
}

int cmd_clever(const RunConfig& cfg, std::ostream& out) {
  const RecurrentModel model = load_model(cfg.model_path);
  const auto samples = load_samples(model, cfg);
  const double p = parse_norm(cfg.p);
  if (cfg.target >= static_cast<int>(model.t)) throw std::invalid_argument("--target out of range");
  auto work = [&](std::size_t idx) {
    const Sample& smp = samples[idx];
    std::optional<std::size_t> target;
    if (cfg.target >= 0) target = static_cast<std::size_t>(cfg.target);
    const auto est = clever_rnn(model, smp.seq.frames, smp.label, target, p, cfg.clever_eps0, cfg.samples,
                                cfg.seed + idx);
    ojson rec;
    rec["input"] = smp.path;
    rec["label"] = smp.label;
    rec["result"] = to_json(est, p);
    return std::make_pair(rec, est.score);
  };
  const auto outcomes = parallel_map(samples.size(), cfg.workers, work);
  ojson doc = header("clever", cfg);
  doc["eps0"] = cfg.clever_eps0;
  doc["samples"] = cfg.samples;
  auto& results = doc["results"] = ojson::array();
  std::vector<double> scores;
  for (const auto& [rec, score] : outcomes) {
    results.push_back(rec);
    scores.push_back(score);
  }
  doc["summary"] = summary_json(scores);
  print_summary(out, "clever score", scores);
  emit(cfg, doc, out);
  return kExitOk;
}

int cmd_soundcheck(const RunConfig& cfg, std::ostream& out) {
  const RecurrentModel model = load_model(cfg.model_path);
  const auto samples = load_samples(model, cfg);
  const double p = parse_norm(cfg.p);
  if (!(cfg.epsilon >= 0.0)) throw std::invalid_argument("soundcheck needs --eps");
  const auto frame = parse_frame(cfg.frames, model.m);
  PropagationOptions opts;
  opts.strategy = parse_strategy(cfg.strategy);
  const PerturbationSpec spec =
      frame ? PerturbationSpec::single(p, cfg.epsilon, *frame) : PerturbationSpec::all_frames(p, cfg.epsilon);

  auto work = [&](std::size_t idx) {
    return soundcheck(model, samples[idx].seq.frames, spec, opts, cfg.sound_samples, cfg.grid, cfg.seed + idx);
  };
  const auto reports = parallel_map(samples.size(), cfg.workers, work);
  ojson doc = header("soundcheck", cfg);
  doc["epsilon"] = cfg.epsilon;
  doc["frames"] = cfg.frames;
  doc["strategy"] = cfg.strategy;
  auto& results = doc["results"] = ojson::array();
  std::size_t violations = 0;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    ojson rec;
    rec["input"] = samples[i].path;
    rec["report"] = to_json(reports[i]);
    results.push_back(rec);
    violations += reports[i].violations;
  }
  doc["violations"] = violations;
  out << "soundcheck: " << violations << " violation(s) over " << reports.size() << " input(s)\n";
  emit(cfg, doc, out);
  return violations == 0 ? kExitOk : kExitViolation;
}

int cmd_generate(const RunConfig& cfg, std::ostream& out) {
  if (cfg.output.empty()) throw std::invalid_argument("generate needs --output for the model file");
  Activation act;
  if (cfg.activation == "tanh") {
    act = Activation::Tanh;
  } else if (cfg.activation == "sigmoid") {
    act = Activation::Sigmoid;
  } else {
    throw std::invalid_argument("--activation must be 'tanh' or 'sigmoid'");
  }
  const RecurrentModel model =
      generate_random_model(cfg.seed, parse_cell_kind(cfg.kind), cfg.n, cfg.s, cfg.m, cfg.t, cfg.scale, act);
  save_model(model, cfg.output);
  out << "wrote " << cfg.output << "\n";
  if (cfg.count > 0) {
    std::filesystem::create_directories(cfg.input_dir);
    Rng rng(cfg.seed ^ 0x5eedf00dULL);
    for (std::size_t i = 0; i < cfg.count; ++i) {
      InputSequence seq;
      for (std::size_t k = 0; k < model.m; ++k) {
        Vector f(model.n);
        for (double& v : f) v = rng.uniform(-cfg.input_scale, cfg.input_scale);
        seq.frames.push_back(std::move(f));
      }
      seq.label = argmax(forward(model, seq.frames));
      const auto path = (std::filesystem::path(cfg.input_dir) / ("input_" + std::to_string(i) + ".json")).string();
      save_sequence(seq, path);
      out << "wrote " << path << "\n";
    }
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  cfg.workers = default_workers();

  CLI::App app{"Certified robustness bounds for recurrent classifiers"};
  app.require_subcommand(1);

  auto common = [&](CLI::App* sub) {
    sub->add_option("--model", cfg.model_path, "model JSON file")->required();
    sub->add_option("--input", cfg.inputs, "input sequence JSON file (repeatable)")->required();
    sub->add_option("--p", cfg.p, "norm: 1, 2 or inf")->capture_default_str();
    sub->add_option("--output", cfg.output, "result JSON path (stdout if omitted)");
    sub->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
    sub->add_option("--workers", cfg.workers, "worker threads (default $RNNCERT_WORKERS or 1)");
  };

  auto* certify = app.add_subcommand("certify", "certified radius by binary search");
  common(certify);
  certify->add_option("--mode", cfg.mode, "untargeted or targeted")->capture_default_str();
  certify->add_option("--target", cfg.target, "target class for targeted mode (all others if omitted)");
  certify->add_option("--frames", cfg.frames, "all, a frame index k, or sweep")->capture_default_str();
  certify->add_option("--strategy", cfg.strategy, "planes, lines or constants")->capture_default_str();
  certify->add_option("--eps0", cfg.eps0, "initial search radius")->capture_default_str();
  certify->add_option("--tol", cfg.tol, "absolute search tolerance")->capture_default_str();
  certify->add_option("--max-iter", cfg.max_iter, "maximum bisection steps")->capture_default_str();
  certify->add_option("--csv", cfg.csv, "per-frame CSV path for --frames sweep");

  auto* attack = app.add_subcommand("attack", "adversarial attack (upper bound)");
  common(attack);
  attack->add_option("--method", cfg.method, "gradient or grid")->capture_default_str();
  attack->add_option("--eps", cfg.epsilon, "grid attack radius");
  attack->add_option("--resolution", cfg.resolution, "grid points per coordinate")->capture_default_str();
  attack->add_option("--steps", cfg.steps, "gradient attack step budget")->capture_default_str();

  auto* clever = app.add_subcommand("clever", "CLEVER-RNN robustness estimate");
  common(clever);
  clever->add_option("--eps0", cfg.clever_eps0, "sampling radius and score cap")->capture_default_str();
  clever->add_option("--samples", cfg.samples, "gradient samples")->capture_default_str();
  clever->add_option("--target", cfg.target, "target class (minimum over all if omitted)");

  auto* sound = app.add_subcommand("soundcheck", "sample and grid containment check of global bounds");
  common(sound);
  sound->add_option("--eps", cfg.epsilon, "perturbation radius")->required();
  sound->add_option("--frames", cfg.frames, "all or a frame index k")->capture_default_str();
  sound->add_option("--strategy", cfg.strategy, "planes, lines or constants")->capture_default_str();
  sound->add_option("--samples", cfg.sound_samples, "random samples")->capture_default_str();
  sound->add_option("--grid", cfg.grid, "grid points per coordinate when dims <= 4 (0 disables)")
      ->capture_default_str();

  auto* gen = app.add_subcommand("generate", "write a random model and optional inputs");
  gen->add_option("--kind", cfg.kind, "rnn, lstm or gru")->capture_default_str();
  gen->add_option("--n", cfg.n, "input size")->capture_default_str();
  gen->add_option("--s", cfg.s, "hidden size")->capture_default_str();
  gen->add_option("--m", cfg.m, "steps")->capture_default_str();
  gen->add_option("--t", cfg.t, "classes")->capture_default_str();
  gen->add_option("--scale", cfg.scale, "weight scale (0 means 1/sqrt(s))")->capture_default_str();
  gen->add_option("--activation", cfg.activation, "tanh or sigmoid (rnn only)")->capture_default_str();
  gen->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
  gen->add_option("--output", cfg.output, "model JSON path")->required();
  gen->add_option("--inputs", cfg.count, "number of random inputs to write")->capture_default_str();
  gen->add_option("--input-dir", cfg.input_dir, "directory for inputs")->capture_default_str();
  gen->add_option("--input-scale", cfg.input_scale, "inputs uniform in [-scale, scale]")->capture_default_str();

  std::vector<std::string> argv_store{"rnncert"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }
  if (cfg.workers == 0) cfg.workers = 1;

  try {
    if (certify->parsed()) return cmd_certify(cfg, out);
    if (attack->parsed()) return cmd_attack(cfg, out);
    if (clever->parsed()) return cmd_clever(cfg, out);
    if (sound->parsed()) return cmd_soundcheck(cfg, out);
    return cmd_generate(cfg, out);
  } catch (const NumericalOverflow& e) {
    err << "numerical abort: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
}

}  // namespace rnncert::cli
