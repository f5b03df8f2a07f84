#include "fedsel/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "fedsel/config.hpp"
#include "fedsel/experiments.hpp"
#include "fedsel/format.hpp"
#include "fedsel/population.hpp"
#include "fedsel/spectrum.hpp"

namespace fedsel::cli {

namespace fs = std::filesystem;

namespace {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr const char* kVerbs[] = {"sweep-lmax", "sweep-n", "spectrum-train", "spectrum-eval", "gen-population",
                                  "solve-round"};

struct Command {
  std::string verb;
  fs::path config_path;
  fs::path out_dir = ".";
  bool out_given = false;
  std::optional<std::uint64_t> seed_override;
  std::string seed_source;
  int jobs = 1;
  bool emit_plots = false;
};

std::string usage() {
  std::string u = "usage: fedsel <verb> --config PATH [--out DIR] [--seed U64] [--jobs N] [--plots]\n  verbs:";
  for (const auto* v : kVerbs) u += std::string(" ") + v;
  return u;
}

std::vector<std::string> provenance(const Command& cmd) {
  std::string line = "fedsel " + cmd.verb + " overrides:";
  if (cmd.seed_override) {
    line += " seed=" + std::to_string(*cmd.seed_override);
    if (cmd.seed_source != "--seed") line += " (" + cmd.seed_source + ")";
  } else {
    line += " none";
  }
  return {line};
}

void ensure_out_dir(const Command& cmd) {
  std::error_code ec;
  fs::create_directories(cmd.out_dir, ec);
  if (ec || !fs::is_directory(cmd.out_dir)) {
    throw IoError("cannot create output directory " + cmd.out_dir.string());
  }
}

template <typename Writer>
void write_file(const fs::path& path, Writer&& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  writer(out);
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

int run_sweep(const Command& cmd, const FileConfig& cfg, std::string_view param, std::ostream& out) {
  auto exp = cfg.experiment;
  exp.sweep.parameter = std::string(param);
  exp.sweep.grid = param == kSweepLmax ? cfg.lmax_grid : cfg.devices_grid;
  if (cmd.seed_override) exp.seeds = {*cmd.seed_override};
  exp.jobs = cmd.jobs;

  const auto result = sweep(exp);
  const std::string stem = param == kSweepLmax ? "sweep_lmax" : "sweep_n";
  ensure_out_dir(cmd);
  const auto prov = provenance(cmd);
  write_file(cmd.out_dir / (stem + ".csv"), [&](std::ostream& o) { write_metrics_csv(o, result, prov); });
  if (result.rows.empty()) {
    out << "wrote " << (cmd.out_dir / (stem + ".csv")).string() << " (no rows)\n";
    return kOk;
  }
  const auto summary = summarize(result.rows);
  write_file(cmd.out_dir / (stem + "_summary.csv"), [&](std::ostream& o) { write_summary_csv(o, summary); });
  if (cmd.emit_plots) {
    const auto metric = param == kSweepLmax ? PlotMetric::Objective : PlotMetric::SensedBytes;
    const auto svg = render_plot_svg(summary, metric);
    write_file(cmd.out_dir / (stem + ".svg"), [&](std::ostream& o) { o << svg; });
  }
  out << "wrote " << result.rows.size() << " rows to " << (cmd.out_dir / (stem + ".csv")).string() << '\n';
  return kOk;
}

int run_solve_round(const Command& cmd, const FileConfig& cfg, std::ostream& out) {
  const auto seed = cmd.seed_override.value_or(cfg.experiment.seeds.front());
  const auto result = run_round(cfg.experiment, seed);
  const auto prov = provenance(cmd);
  std::ostringstream csv;
  write_metrics_csv(csv, result, prov);
  out << csv.str();
  if (cmd.out_given) {
    ensure_out_dir(cmd);
    write_file(cmd.out_dir / "solve_round.csv", [&](std::ostream& o) { o << csv.str(); });
  }
  return kOk;
}

int run_gen_population(const Command& cmd, const FileConfig& cfg, std::ostream& out) {
  auto pop = cfg.experiment.population;
  pop.seed = cmd.seed_override.value_or(cfg.experiment.seeds.front());
  const auto devices = sample_population(pop);
  ensure_out_dir(cmd);
  const auto path = cmd.out_dir / "population.csv";
  write_file(path, [&](std::ostream& o) { write_population_csv(o, devices); });
  out << "wrote " << devices.size() << " devices to " << path.string() << '\n';
  return kOk;
}

spectrum::TrainedAgent train(const Command& cmd, const SpectrumStudyConfig& s) {
  Rng rng(derive_seed(cmd.seed_override.value_or(s.seed), 0));
  return spectrum::train_agent(s.env, s.workload, s.hyper, rng);
}

int run_spectrum_train(const Command& cmd, const FileConfig& cfg, std::ostream& out) {
  const auto& s = cfg.spectrum;
  const auto agent = train(cmd, s);
  ensure_out_dir(cmd);
  const auto prov = provenance(cmd);
  write_file(cmd.out_dir / "learning_curve.csv", [&](std::ostream& o) {
    for (const auto& p : prov) o << "# " << p << '\n';
    o << "episode,mean_delay_s,violation_rate\n";
    for (const auto& e : agent.learning_curve) {
      o << e.episode << ',' << format_double(e.mean_delay_s) << ',' << format_double(e.violation_rate) << '\n';
    }
  });
  write_file(cmd.out_dir / "q_table.csv", [&](std::ostream& o) {
    o << "state,blocks,value\n";
    const auto& q = agent.policy;
    for (std::size_t st = 0; st < q.state_count(); ++st) {
      for (int a = 0; a < q.action_count(); ++a) o << st << ',' << a + 1 << ',' << format_double(q.value(st, a)) << '\n';
    }
  });
  const auto& last = agent.learning_curve.back();
  out << "trained " << agent.learning_curve.size() << " episodes; final mean delay "
      << format_fixed(last.mean_delay_s * 1e3, 3) << " ms\n";
  return kOk;
}

int run_spectrum_eval(const Command& cmd, const FileConfig& cfg, std::ostream& out) {
  const auto& s = cfg.spectrum;
  const auto agent = train(cmd, s);
  const auto eval_seed = derive_seed(cmd.seed_override.value_or(s.seed), 1);

  struct Entry {
    std::string name;
    spectrum::EvalResult result;
  };
  std::vector<Entry> entries;
  auto evaluate = [&](std::string name, const spectrum::Allocator& alloc) {
    Rng rng(eval_seed);  // every policy sees the same workloads
    entries.push_back({std::move(name), spectrum::evaluate_policy(alloc, s.env, s.workload, rng, s.eval_episodes)});
  };
  evaluate("q_learning", spectrum::make_agent_allocator(agent));
  for (auto kind : {spectrum::BaselineKind::MinQos, spectrum::BaselineKind::EqualShare,
                    spectrum::BaselineKind::GreedyMax}) {
    evaluate(std::string(spectrum::to_string(kind)), spectrum::make_baseline(kind, s.expected_concurrency));
  }

  ensure_out_dir(cmd);
  const auto prov = provenance(cmd);
  write_file(cmd.out_dir / "spectrum_eval.csv", [&](std::ostream& o) {
    for (const auto& p : prov) o << "# " << p << '\n';
    o << "policy,mean_delay_s,violation_rate\n";
    for (const auto& e : entries) {
      o << e.name << ',' << format_double(e.result.mean_delay_s) << ',' << format_double(e.result.violation_rate)
        << '\n';
    }
  });
  for (const auto& e : entries) {
    out << e.name << ": mean delay " << format_fixed(e.result.mean_delay_s * 1e3, 3) << " ms, violations "
        << format_fixed(e.result.violation_rate * 100.0, 2) << "%\n";
  }
  return kOk;
}

std::optional<std::uint64_t> parse_u64(const std::string& text) {
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) return std::nullopt;
  try {
    return std::stoull(text);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace

int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Command cmd;
  std::string seed_text;
  std::string config_text;
  std::string out_text;

  CLI::App app{"Edge-assisted federated learning participant selection and spectrum allocation"};
  app.add_option("verb", cmd.verb, "sweep-lmax | sweep-n | spectrum-train | spectrum-eval | gen-population | solve-round")
      ->required();
  app.add_option("--config", config_text, "JSON config file")->required();
  app.add_option("--out", out_text, "output directory");
  app.add_option("--seed", seed_text, "seed override (falls back to FEDSEL_SEED)");
  app.add_option("--jobs", cmd.jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--plots", cmd.emit_plots, "also write SVG plots");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "fedsel: " << e.what() << '\n' << usage() << '\n';
    return kUsage;
  }

  if (std::find(std::begin(kVerbs), std::end(kVerbs), cmd.verb) == std::end(kVerbs)) {
    err << "fedsel: unknown verb '" << cmd.verb << "'\n" << usage() << '\n';
    return kUsage;
  }
  if (!seed_text.empty()) {
    cmd.seed_override = parse_u64(seed_text);
    cmd.seed_source = "--seed";
    if (!cmd.seed_override) {
      err << "fedsel: --seed expects an unsigned 64-bit integer\n";
      return kUsage;
    }
  } else if (const char* env = std::getenv("FEDSEL_SEED"); env && *env) {
    cmd.seed_override = parse_u64(env);
    cmd.seed_source = "FEDSEL_SEED";
    if (!cmd.seed_override) {
      err << "fedsel: FEDSEL_SEED must be an unsigned 64-bit integer\n";
      return kUsage;
    }
  }
  cmd.config_path = config_text;
  if (!out_text.empty()) {
    cmd.out_dir = out_text;
    cmd.out_given = true;
  }

  try {
    if (!fs::is_regular_file(cmd.config_path)) throw ConfigError("config file not found: " + config_text);
    const auto cfg = load_config(cmd.config_path);
    if (cmd.verb == "sweep-lmax") return run_sweep(cmd, cfg, kSweepLmax, out);
    if (cmd.verb == "sweep-n") return run_sweep(cmd, cfg, kSweepDevices, out);
    if (cmd.verb == "solve-round") return run_solve_round(cmd, cfg, out);
    if (cmd.verb == "gen-population") return run_gen_population(cmd, cfg, out);
    if (cmd.verb == "spectrum-train") return run_spectrum_train(cmd, cfg, out);
    return run_spectrum_eval(cmd, cfg, out);
  } catch (const ConfigError& e) {
    err << "fedsel: config error: " << e.what() << '\n';
    return kBadConfig;
  } catch (const IoError& e) {
    err << "fedsel: i/o error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::exception& e) {
    err << "fedsel: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace fedsel::cli
