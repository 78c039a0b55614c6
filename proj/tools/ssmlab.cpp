// ssmlab: diagonal-SSM initialization analysis toolbox.
//
// Subcommands cover the library surface: `init` emits model JSON, `spectrum`
// and `stability` sweep autocorrelation spectra and output magnitudes,
// `gram`/`tradeoff` report conditioning, `recover`/`pick-nodes` run the
// deconvolution pipeline, `train` runs the desk-scale trainer, and `repro`
// regenerates every CSV in one call.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "ssmlab/ssmlab.hpp"
#include "ssmlab/version.hpp"

namespace {

using namespace ssmlab;

std::string g_command_line;

std::uint64_t env_seed_default() {
  if (const char* env = std::getenv("SSMLAB_SEED")) {
    return std::strtoull(env, nullptr, 10);
  }
  return 0;
}

std::vector<std::pair<std::string, std::string>> run_metadata(std::uint64_t seed) {
  return {{"version", std::string(kVersion) + "+" + kGitDescribe},
          {"command", g_command_line},
          {"seed", std::to_string(seed)}};
}

// "64..4096" doubles from the left endpoint; "a,b,c" is an explicit list.
std::vector<Index> parse_index_range(const std::string& text) {
  std::vector<Index> out;
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const Index lo = std::stoll(text.substr(0, dots));
    const Index hi = std::stoll(text.substr(dots + 2));
    if (lo < 1 || hi < lo) throw CLI::ValidationError("range", "invalid range " + text);
    for (Index v = lo; v <= hi; v *= 2) out.push_back(v);
    return out;
  }
  std::istringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ',')) out.push_back(std::stoll(tok));
  if (out.empty()) throw CLI::ValidationError("range", "empty list");
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ',')) out.push_back(std::stod(tok));
  if (out.empty()) throw CLI::ValidationError("list", "empty list");
  return out;
}

// Frequency pattern "<coef>*pi*j" (j = 1..m) or an explicit comma list.
Eigen::VectorXd parse_frequencies(const std::string& text, Index m) {
  const auto star = text.find("*pi*j");
  if (star != std::string::npos) {
    const double coef = std::stod(text.substr(0, star));
    Eigen::VectorXd xi(m);
    for (Index j = 0; j < m; ++j) xi[j] = coef * std::numbers::pi * double(j + 1);
    return xi;
  }
  const std::vector<double> vals = parse_double_list(text);
  if (m > 0 && static_cast<Index>(vals.size()) != m) {
    throw CLI::ValidationError("xi", "frequency list length does not match m");
  }
  return Eigen::Map<const Eigen::VectorXd>(vals.data(), vals.size());
}

Scheme parse_scheme(const std::string& name) {
  if (name == "s4d-lin") return Scheme::S4DLin;
  if (name == "s4d-real") return Scheme::S4DReal;
  throw CLI::ValidationError("scheme", "unknown scheme " + name + " (s4d-lin | s4d-real)");
}

// Deterministic parallel map over a grid: results land by index, so output
// order never depends on the thread count.
template <typename Fn>
void parallel_for(Index count, Index jobs, Fn&& fn) {
  if (jobs <= 1) {
    for (Index i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<Index> next{0};
  std::vector<std::thread> pool;
  const Index workers = std::min<Index>(jobs, count);
  for (Index t = 0; t < workers; ++t) {
    pool.emplace_back([&]() {
      for (Index i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

void emit(const csv::Table& table, const std::string& out_path) {
  if (out_path.empty() || out_path == "-") {
    std::cout << csv::serialize(table);
  } else {
    csv::write_file(out_path, table);
  }
}

void emit_json(const nlohmann::json& j, const std::string& out_path) {
  const std::string text = j.dump(2) + "\n";
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
  } else {
    write_text_file(out_path, text);
  }
}

// ---------------------------------------------------------------------------
// init

struct InitArgs {
  std::string scheme = "s4d-lin";
  Index m = 32;
  double p = 0.0;
  double real_part = -0.5;
  double imag_scale = 1.0;
  std::uint64_t seed = env_seed_default();
  double delta = 0.0;
  Index length = 0;
  double lambda_max = 1.0;
  double c0 = 1.0;
  std::string out;
};

int run_init(const InitArgs& args) {
  InitSpec spec;
  spec.scheme = parse_scheme(args.scheme);
  spec.m = args.m;
  spec.zero_real_fraction = args.p;
  spec.real_part = args.real_part;
  spec.imag_scale = args.imag_scale;
  spec.seed = args.seed;
  double delta = args.delta;
  if (delta <= 0.0) {
    delta = args.length > 0 ? timescale_from_data(args.length, args.lambda_max, args.c0) : 0.1;
  }
  const SsmModel model = make_model(spec, delta);
  nlohmann::json j = model_to_json(model);
  nlohmann::json meta;
  for (const auto& [k, v] : run_metadata(args.seed)) meta[k] = v;
  j["meta"] = meta;
  emit_json(j, args.out);
  return 0;
}

// ---------------------------------------------------------------------------
// spectrum

struct SpectrumArgs {
  std::string kinds = "iid,ou,rbf,rand";
  std::string lengths = "64..4096";
  Index n_samples = 1000;  // 0 = exact population matrix
  double ou_length = 2.0;
  double rbf_scale = std::numbers::pi;
  std::uint64_t seed = env_seed_default();
  std::string out;
};

int run_spectrum(const SpectrumArgs& args) {
  csv::Table table;
  table.metadata = run_metadata(args.seed);
  table.add_metadata("n_samples", std::to_string(args.n_samples));
  table.header = {"kind", "L", "lambda_max"};
  std::istringstream kin(args.kinds);
  std::string kind_name;
  while (std::getline(kin, kind_name, ',')) {
    const AutocovKind kind = autocov_kind_from_string(kind_name);
    for (Index length : parse_index_range(args.lengths)) {
      AutocovSpec spec;
      spec.kind = kind;
      spec.length = length;
      spec.ou_length = args.ou_length;
      spec.rbf_scale = args.rbf_scale;
      spec.seed = mix_seed(args.seed, mix_seed(std::uint64_t(kind), std::uint64_t(length)));
      const Eigen::MatrixXd k = build_autocov(spec);
      double value;
      if (args.n_samples > 0) {
        const Eigen::MatrixXd x = sample_gp(k, args.n_samples, mix_seed(spec.seed, 0x73616dULL));
        value = lambda_max_of_samples(x).lambda_max;
      } else {
        value = lambda_max(k).lambda_max;
      }
      table.rows.push_back({kind_name, std::to_string(length), format_double(value)});
    }
  }
  emit(table, args.out);
  return 0;
}

// ---------------------------------------------------------------------------
// stability

struct StabilityArgs {
  std::string kinds = "iid,ou,rbf,rand";
  std::string alphas = "1,0.75,0.5,0.25";
  std::string res = "0,-0.5";
  std::string lengths = "64..1024";
  Index m = 4;
  Index n_c = 256;
  Index n_x = 256;
  double ou_length = 2.0;
  double rbf_scale = std::numbers::pi;
  bool pooling = false;
  double imag_scale = 1.0;
  Index jobs = 1;
  std::uint64_t seed = env_seed_default();
  std::string out;
};

int run_stability(const StabilityArgs& args) {
  struct Cell {
    std::string kind;
    Index length;
    double alpha;
    double re;
    StabilityReport report;
  };
  std::vector<Cell> cells;
  std::istringstream kin(args.kinds);
  std::string kind_name;
  while (std::getline(kin, kind_name, ',')) {
    for (Index length : parse_index_range(args.lengths)) {
      for (double alpha : parse_double_list(args.alphas)) {
        for (double re : parse_double_list(args.res)) {
          cells.push_back({kind_name, length, alpha, re, {}});
        }
      }
    }
  }
  parallel_for(static_cast<Index>(cells.size()), args.jobs, [&](Index i) {
    Cell& cell = cells[i];
    AutocovSpec aspec;
    aspec.kind = autocov_kind_from_string(cell.kind);
    aspec.length = cell.length;
    aspec.ou_length = args.ou_length;
    aspec.rbf_scale = args.rbf_scale;
    aspec.seed = mix_seed(args.seed, mix_seed(std::uint64_t(aspec.kind), std::uint64_t(cell.length)));
    const Eigen::MatrixXd k = build_autocov(aspec);
    InitSpec ispec;
    ispec.m = args.m;
    ispec.real_part = cell.re;
    ispec.imag_scale = args.imag_scale;
    const StateVector w = make_state_vector(ispec);
    const double delta = std::pow(double(cell.length), -cell.alpha);
    const std::uint64_t cell_seed = mix_seed(
        args.seed,
        mix_seed(mix_seed(std::uint64_t(aspec.kind), std::uint64_t(cell.length)),
                 mix_seed(std::uint64_t(llround(cell.alpha * 1000.0)),
                          std::uint64_t(llround(cell.re * 1000.0) + 1000000))));
    cell.report = empirical_magnitude(w, delta, k, args.n_c, args.n_x, cell_seed, args.pooling);
  });

  csv::Table table;
  table.metadata = run_metadata(args.seed);
  table.add_metadata("m", std::to_string(args.m));
  table.add_metadata("n_c", std::to_string(args.n_c));
  table.add_metadata("n_x", std::to_string(args.n_x));
  table.header = {"kind", "L", "alpha", "re", "empirical", "stderr", "bound"};
  for (const auto& cell : cells) {
    table.rows.push_back({cell.kind, std::to_string(cell.length), format_double(cell.alpha),
                          format_double(cell.re), format_double(cell.report.empirical),
                          format_double(cell.report.stderr_), format_double(cell.report.bound)});
  }
  emit(table, args.out);
  return 0;
}

// ---------------------------------------------------------------------------
// gram

struct GramArgs {
  std::string scheme = "s4d-lin";
  std::string ms = "4,16,64,256";
  double imag_scale = 1.0;
  std::string out;
};

int run_gram(const GramArgs& args) {
  csv::Table table;
  table.metadata = run_metadata(0);
  table.header = {"scheme", "m", "lambda_min", "lambda_max", "cond"};
  for (Index m : parse_index_range(args.ms)) {
    InitSpec spec;
    spec.scheme = parse_scheme(args.scheme);
    spec.m = m;
    spec.imag_scale = args.imag_scale;
    const StateVector w = make_state_vector(spec);
    const GramMatrix g = spec.scheme == Scheme::S4DReal ? gram_real(w.real) : gram_complex(w.imag);
    const Eigen::VectorXd eig = spectrum(g);
    table.rows.push_back({args.scheme, std::to_string(m), format_double(eig[0]),
                          format_double(eig[m - 1]), format_double(condition_number(g))});
  }
  emit(table, args.out);
  return 0;
}

// ---------------------------------------------------------------------------
// tradeoff

struct TradeoffArgs {
  std::string xi = "0.1*pi*j";
  std::string ratios = "1..256";
  Index m = 8;
  std::string out;
};

int run_tradeoff(const TradeoffArgs& args) {
  const Eigen::VectorXd xi = parse_frequencies(args.xi, args.m);
  std::vector<double> ratios;
  for (Index r : parse_index_range(args.ratios)) ratios.push_back(double(r));
  const auto rows = tradeoff_sweep(xi, ratios);
  csv::Table table;
  table.metadata = run_metadata(0);
  table.add_metadata("xi", args.xi);
  table.add_metadata("m", std::to_string(args.m));
  table.header = {"ratio", "cond_G", "sigma_max"};
  for (const auto& row : rows) {
    table.add_row({row.ratio, row.gram_condition, row.sigma_max});
  }
  emit(table, args.out);
  return 0;
}

// ---------------------------------------------------------------------------
// recover / pick-nodes

struct RecoverArgs {
  std::string x_path, y_path;
  double ridge = 0.0;
  bool scale_sqrt_l = false;  // presentation scaling of the written memory
  std::string out;
};

int run_recover(const RecoverArgs& args) {
  RecoveryProblem problem;
  problem.x = read_matrix_csv(args.x_path);
  problem.y = read_matrix_csv(args.y_path);
  problem.ridge = args.ridge;
  const RecoveryResult res = recover_memory(problem);
  auto meta = run_metadata(0);
  meta.emplace_back("ridge", format_double(args.ridge));
  meta.emplace_back("residual", format_double(res.residual));
  Eigen::MatrixXd rho_out = res.rho.raw;
  if (args.scale_sqrt_l) {
    rho_out *= std::sqrt(double(rho_out.rows()));
    meta.emplace_back("scale", "sqrt_L");
  }
  csv::Table table = matrix_to_table(rho_out);
  table.metadata = std::move(meta);
  emit(table, args.out);
  return 0;
}

struct PickNodesArgs {
  std::string rho_path;
  Index m = 32;
  double delta_t = 1.0;
  Index k = 0;  // candidate count; defaults to 4m capped at L/2
  std::string out;
};

int run_pick_nodes(const PickNodesArgs& args) {
  const Eigen::MatrixXd rho = read_matrix_csv(args.rho_path);
  const Index half = rho.rows() / 2;
  Index k = args.k > 0 ? args.k : std::min<Index>(4 * args.m, half);
  k = std::min(k, half);
  const std::vector<double> dominant = dominant_frequencies(rho, k);
  const NodeSelection sel = greedy_select_nodes(dominant, args.m);

  nlohmann::json j;
  std::vector<double> per_sample(sel.nodes.data(), sel.nodes.data() + sel.nodes.size());
  std::vector<double> per_time(per_sample.size());
  for (std::size_t i = 0; i < per_sample.size(); ++i) per_time[i] = per_sample[i] / args.delta_t;
  j["nodes_rad_per_sample"] = per_sample;
  j["nodes_rad_per_time"] = per_time;
  j["separation_rad_per_sample"] = sel.separation;
  j["delta_t"] = args.delta_t;
  j["candidates"] = dominant;
  nlohmann::json meta;
  for (const auto& [key, value] : run_metadata(0)) meta[key] = value;
  j["meta"] = meta;
  emit_json(j, args.out);
  return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string task = "shift";
  Index length = 128;
  Index m = 32;
  Index dim = 128;  // copying only
  Index delay = 0;
  double re_init = -0.5;
  double p = 0.0;
  double imag_scale = 1.0;
  double delta = 0.0;      // fixed timescale; 0 = 1/sqrt(L)
  double delta_min = 0.0;  // per-channel sampling (copying)
  double delta_max = 0.0;
  Index steps = 2000;
  Index batch = 64;
  double lr_state = 1e-3;
  double lr_readout = 0.1;
  Index eval_interval = 100;
  Index n_train = 1000;
  Index n_test = 1000;
  std::uint64_t seed = env_seed_default();
  std::string target_csv;
  std::string out;
};

int run_train(const TrainArgs& args) {
  Task task;
  if (args.task == "shift") {
    task = Task::shift(args.length);
  } else if (args.task == "first-last") {
    task = Task::first_last(args.length);
  } else if (args.task == "copying") {
    task = Task::copying(args.length, args.dim, args.delay);
  } else if (args.task == "custom") {
    const Eigen::MatrixXd target = read_matrix_csv(args.target_csv);
    task = Task::custom(target.col(0));
  } else {
    throw CLI::ValidationError("task", "unknown task " + args.task);
  }
  task.n_train = args.n_train;
  task.n_test = args.n_test;
  task.seed = mix_seed(args.seed, 0x64617461ULL);

  InitSpec spec;
  spec.m = args.m;
  spec.real_part = args.re_init;
  spec.zero_real_fraction = args.p;
  spec.imag_scale = args.imag_scale;
  spec.seed = mix_seed(args.seed, 0x696e6974ULL);

  Eigen::VectorXd deltas;
  if (args.delta_min > 0.0 && args.delta_max > 0.0) {
    deltas = sample_timescales(TimescaleRule::uniform(args.delta_min, args.delta_max), task.dim,
                               mix_seed(args.seed, 0x646cULL));
  } else {
    const double d = args.delta > 0.0 ? args.delta : timescale_from_data(args.length, 1.0);
    deltas = Eigen::VectorXd::Constant(task.dim, d);
  }

  TrainableModel model = make_trainable(spec, deltas);
  TrainConfig config;
  config.steps = args.steps;
  config.batch = args.batch;
  config.lr_state = args.lr_state;
  config.lr_readout = args.lr_readout;
  config.eval_interval = args.eval_interval;
  config.seed = mix_seed(args.seed, 0x737465ULL);
  const TrainReport report = train(model, task, config);

  nlohmann::json j = train_report_to_json(report);
  nlohmann::json meta;
  for (const auto& [key, value] : run_metadata(args.seed)) meta[key] = value;
  meta["task"] = args.task;
  meta["L"] = args.length;
  meta["m"] = args.m;
  meta["steps"] = args.steps;
  meta["re_init"] = args.re_init;
  j["meta"] = meta;
  emit_json(j, args.out);
  return 0;
}

// ---------------------------------------------------------------------------
// repro

struct ReproArgs {
  std::string outdir = ".";
  bool quick = false;
  Index jobs = 1;
  std::uint64_t seed = env_seed_default();
};

int run_repro(const ReproArgs& args) {
  namespace fs = std::filesystem;
  fs::create_directories(args.outdir);
  const auto path = [&](const char* name) { return (fs::path(args.outdir) / name).string(); };

  SpectrumArgs spectrum_args;
  spectrum_args.lengths = args.quick ? "64..2048" : "64..4096";
  spectrum_args.seed = args.seed;
  spectrum_args.out = path("spectrum.csv");
  run_spectrum(spectrum_args);
  std::cerr << "wrote " << spectrum_args.out << "\n";

  StabilityArgs stability_args;
  stability_args.lengths = args.quick ? "64,256,1024" : "64,256,1024,4096";
  stability_args.jobs = args.jobs;
  stability_args.seed = args.seed;
  stability_args.out = path("mag.csv");
  run_stability(stability_args);
  std::cerr << "wrote " << stability_args.out << "\n";

  GramArgs gram_args;
  gram_args.out = path("cond.csv");
  run_gram(gram_args);
  GramArgs gram_real_args;
  gram_real_args.scheme = "s4d-real";
  gram_real_args.ms = "2,3,4,5,6,7,8,9,10,11,12";
  gram_real_args.out = path("cond_real.csv");
  run_gram(gram_real_args);
  std::cerr << "wrote " << gram_args.out << " and " << gram_real_args.out << "\n";

  TradeoffArgs tradeoff_args;
  tradeoff_args.out = path("tradeoff.csv");
  run_tradeoff(tradeoff_args);
  std::cerr << "wrote " << tradeoff_args.out << "\n";

  TrainArgs train_args;
  train_args.task = "shift";
  train_args.re_init = 0.0;
  train_args.lr_readout = 0.01;
  train_args.seed = args.seed;
  train_args.out = path("shift_report.json");
  run_train(train_args);
  train_args.re_init = -0.5;
  train_args.out = path("shift_report_negative.json");
  run_train(train_args);
  std::cerr << "wrote " << path("shift_report.json").c_str() << " and "
            << train_args.out << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  std::ostringstream cmd;
  for (int i = 0; i < argc; ++i) cmd << (i ? " " : "") << argv[i];
  g_command_line = cmd.str();

  CLI::App app{"ssmlab: initialization analysis for diagonal state space models"};
  app.require_subcommand(1);

  InitArgs init_args;
  auto* init_cmd = app.add_subcommand("init", "emit an initialized model as JSON");
  init_cmd->add_option("--scheme", init_args.scheme, "s4d-lin | s4d-real");
  init_cmd->add_option("--m", init_args.m, "state size");
  init_cmd->add_option("--p", init_args.p, "fraction of nodes with zero real part");
  init_cmd->add_option("--re", init_args.real_part, "real part of the nodes");
  init_cmd->add_option("--imag-scale", init_args.imag_scale, "imaginary part multiplier");
  init_cmd->add_option("--seed", init_args.seed, "random seed");
  init_cmd->add_option("--delta", init_args.delta, "timescale (overrides --L)");
  init_cmd->add_option("--L", init_args.length, "sequence length for the timescale rule");
  init_cmd->add_option("--lambda-max", init_args.lambda_max, "autocorrelation top eigenvalue");
  init_cmd->add_option("--c0", init_args.c0, "timescale rule constant");
  init_cmd->add_option("--out", init_args.out, "output path (default stdout)");

  SpectrumArgs spectrum_args;
  auto* spectrum_cmd = app.add_subcommand("spectrum", "top eigenvalue of autocorrelation matrices");
  spectrum_cmd->add_option("--kind", spectrum_args.kinds, "comma list of iid,ou,rbf,rand");
  spectrum_cmd->add_option("--L", spectrum_args.lengths, "length range a..b (doubling) or list");
  spectrum_cmd->add_option("--n-samples", spectrum_args.n_samples,
                           "sample count for the sample autocorrelation (0 = exact)");
  spectrum_cmd->add_option("--ou-length", spectrum_args.ou_length, "OU length scale");
  spectrum_cmd->add_option("--rbf-scale", spectrum_args.rbf_scale, "RBF exponent scale");
  spectrum_cmd->add_option("--seed", spectrum_args.seed, "random seed");
  spectrum_cmd->add_option("--out", spectrum_args.out, "output CSV");

  StabilityArgs stability_args;
  auto* stability_cmd =
      app.add_subcommand("stability", "Monte Carlo output magnitude vs the bound");
  stability_cmd->add_option("--kind", stability_args.kinds, "comma list of iid,ou,rbf,rand");
  stability_cmd->add_option("--alpha", stability_args.alphas, "delta = L^-alpha list");
  stability_cmd->add_option("--re", stability_args.res, "real part list");
  stability_cmd->add_option("--L", stability_args.lengths, "length range or list");
  stability_cmd->add_option("--m", stability_args.m, "state size");
  stability_cmd->add_option("--n-c", stability_args.n_c, "read-out draws");
  stability_cmd->add_option("--n-x", stability_args.n_x, "input draws");
  stability_cmd->add_option("--ou-length", stability_args.ou_length, "OU length scale");
  stability_cmd->add_option("--rbf-scale", stability_args.rbf_scale, "RBF exponent scale");
  stability_cmd->add_flag("--pooling", stability_args.pooling,
                          "average y_l^2 over positions instead of the final output");
  stability_cmd->add_option("--jobs", stability_args.jobs, "parallel grid cells");
  stability_cmd->add_option("--seed", stability_args.seed, "random seed");
  stability_cmd->add_option("--out", stability_args.out, "output CSV");

  GramArgs gram_args;
  auto* gram_cmd = app.add_subcommand("gram", "Gram matrix spectrum and conditioning");
  gram_cmd->add_option("--scheme", gram_args.scheme, "s4d-lin | s4d-real");
  gram_cmd->add_option("--m", gram_args.ms, "state size range or list");
  gram_cmd->add_option("--imag-scale", gram_args.imag_scale, "imaginary part multiplier");
  gram_cmd->add_option("--out", gram_args.out, "output CSV");

  TradeoffArgs tradeoff_args;
  auto* tradeoff_cmd =
      app.add_subcommand("tradeoff", "conditioning vs approximation across frequency ratios");
  tradeoff_cmd->add_option("--xi", tradeoff_args.xi, "target frequencies, e.g. 0.1*pi*j");
  tradeoff_cmd->add_option("--ratios", tradeoff_args.ratios, "ratio range a..b or list");
  tradeoff_cmd->add_option("--m", tradeoff_args.m, "frequency count");
  tradeoff_cmd->add_option("--out", tradeoff_args.out, "output CSV");

  RecoverArgs recover_args;
  auto* recover_cmd = app.add_subcommand("recover", "least-squares memory recovery");
  recover_cmd->add_option("--x", recover_args.x_path, "sequence matrix CSV")->required();
  recover_cmd->add_option("--y", recover_args.y_path, "label matrix CSV")->required();
  recover_cmd->add_option("--ridge", recover_args.ridge, "ridge coefficient");
  recover_cmd->add_flag("--scale-sqrt-l", recover_args.scale_sqrt_l,
                        "write sqrt(L) * rho (display scaling only)");
  recover_cmd->add_option("--out", recover_args.out, "recovered memory CSV");

  PickNodesArgs pick_args;
  auto* pick_cmd = app.add_subcommand("pick-nodes", "select imaginary-part nodes from a memory");
  pick_cmd->add_option("--rho", pick_args.rho_path, "memory CSV from `recover`")->required();
  pick_cmd->add_option("--m", pick_args.m, "node count");
  pick_cmd->add_option("--delta-t", pick_args.delta_t, "timescale for rad/time conversion");
  pick_cmd->add_option("--k", pick_args.k, "dominant-frequency candidates (default 4m)");
  pick_cmd->add_option("--out", pick_args.out, "output JSON");

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "desk-scale SSM training");
  train_cmd->add_option("--task", train_args.task, "shift | first-last | copying | custom");
  train_cmd->add_option("--L", train_args.length, "sequence length");
  train_cmd->add_option("--m", train_args.m, "state size");
  train_cmd->add_option("--d", train_args.dim, "channels (copying)");
  train_cmd->add_option("--delay", train_args.delay, "copying delay (default L/2)");
  train_cmd->add_option("--re-init", train_args.re_init, "initial real part");
  train_cmd->add_option("--p", train_args.p, "fraction of zero real parts");
  train_cmd->add_option("--imag-scale", train_args.imag_scale, "imaginary part multiplier");
  train_cmd->add_option("--delta", train_args.delta, "fixed timescale (default 1/sqrt(L))");
  train_cmd->add_option("--delta-min", train_args.delta_min, "per-channel timescale lower bound");
  train_cmd->add_option("--delta-max", train_args.delta_max, "per-channel timescale upper bound");
  train_cmd->add_option("--steps", train_args.steps, "optimizer steps");
  train_cmd->add_option("--batch", train_args.batch, "batch size");
  train_cmd->add_option("--lr-state", train_args.lr_state, "learning rate for delta, Re w, Im w");
  train_cmd->add_option("--lr-readout", train_args.lr_readout, "learning rate for c");
  train_cmd->add_option("--eval-interval", train_args.eval_interval, "steps between evaluations");
  train_cmd->add_option("--n-train", train_args.n_train, "training samples");
  train_cmd->add_option("--n-test", train_args.n_test, "test samples");
  train_cmd->add_option("--seed", train_args.seed, "random seed");
  train_cmd->add_option("--target-csv", train_args.target_csv, "custom target memory CSV");
  train_cmd->add_option("--out", train_args.out, "report JSON path");

  ReproArgs repro_args;
  auto* repro_cmd = app.add_subcommand("repro", "regenerate every figure-equivalent output");
  repro_cmd->add_option("--outdir", repro_args.outdir, "output directory");
  repro_cmd->add_flag("--quick", repro_args.quick, "smaller grids (< 10 minutes)");
  repro_cmd->add_option("--jobs", repro_args.jobs, "parallel grid cells");
  repro_cmd->add_option("--seed", repro_args.seed, "random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(init_cmd)) return run_init(init_args);
    if (app.got_subcommand(spectrum_cmd)) return run_spectrum(spectrum_args);
    if (app.got_subcommand(stability_cmd)) return run_stability(stability_args);
    if (app.got_subcommand(gram_cmd)) return run_gram(gram_args);
    if (app.got_subcommand(tradeoff_cmd)) return run_tradeoff(tradeoff_args);
    if (app.got_subcommand(recover_cmd)) return run_recover(recover_args);
    if (app.got_subcommand(pick_cmd)) return run_pick_nodes(pick_args);
    if (app.got_subcommand(train_cmd)) return run_train(train_args);
    if (app.got_subcommand(repro_cmd)) return run_repro(repro_args);
  } catch (const std::exception& e) {
    std::cerr << "ssmlab: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
