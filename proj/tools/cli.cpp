#include "cli.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "blockmix/bootstrap.hpp"
#include "blockmix/engine.hpp"
#include "blockmix/parallel.hpp"
#include "blockmix/random.hpp"
#include "blockmix/serialization.hpp"
#include "blockmix/simulator.hpp"

#ifndef BLOCKMIX_VERSION_STRING
#define BLOCKMIX_VERSION_STRING "0.0.0"
#endif

namespace blockmix::cli {
namespace fs = std::filesystem;

namespace {

struct UsageError : Error {
  using Error::Error;
};
struct InputError : Error {
  using Error::Error;
};
struct OutputError : Error {
  using Error::Error;
};

const std::set<std::string> kBooleanFlags = {"undirected", "relabel", "no-relabel"};

// Config file: key=value lines, '#' comments. Keys are long flag names.
std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError("config line " + std::to_string(line_no) + ": expected key=value");
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

bool has_flag(const std::vector<std::string>& args, const std::string& name) {
  const std::string flag = "--" + name;
  for (const auto& a : args)
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  return false;
}

// Appends config entries that the command line does not already set.
std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (!path) return args;
  for (const auto& [key, value] : read_config(*path)) {
    if (key == "config" || has_flag(args, key)) continue;
    if (kBooleanFlags.count(key)) {
      if (value == "1" || value == "true" || value == "yes" || value == "on") args.push_back("--" + key);
      continue;
    }
    args.push_back("--" + key);
    args.push_back(value);
  }
  return args;
}

int default_jobs() {
  if (const char* env = std::getenv("BLOCKMIX_JOBS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1 && v <= 1024) return static_cast<int>(v);
  }
  return 1;
}

std::string read_input(const std::string& path) {
  try {
    return read_text_file(path);
  } catch (const IoError& e) {
    throw InputError(e.what());
  }
}

void prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw OutputError("cannot create output directory " + dir);
}

// All primary outputs are rendered first and only then written, one atomic
// rename per file, so a failed command leaves no partial primary output.
void write_outputs(const std::string& dir, const std::vector<std::pair<std::string, std::string>>& files) {
  prepare_dir(dir);
  try {
    for (const auto& [name, content] : files) write_file_atomic((fs::path(dir) / name).string(), content);
  } catch (const IoError& e) {
    throw OutputError(e.what());
  }
}

EdgeAlphabet parse_alphabet(const std::string& spec) {
  if (spec == "binary") return EdgeAlphabet::binary();
  if (spec == "signed") return EdgeAlphabet::signed_ratings();
  std::vector<int> values;
  std::stringstream ss(spec);
  std::string item;
  try {
    while (std::getline(ss, item, ',')) values.push_back(std::stoi(item));
  } catch (const std::exception&) {
    throw UsageError("--alphabet must be binary, signed, or a comma-separated label list");
  }
  try {
    return EdgeAlphabet(std::move(values), 0);
  } catch (const Error& e) {
    throw UsageError(std::string("--alphabet: ") + e.what());
  }
}

DyadModel build_model(const std::string& kind, int K, const DyadAlphabet& alphabet) {
  try {
    if (kind == "tabular") return TabularBlockModel::uniform(K, alphabet);
    if (kind == "p1") return build_p1_mixture(K, alphabet);
    if (!alphabet.directed() || !alphabet.edges().is_signed())
      throw UnsupportedError("excess-trust needs a directed signed network");
    return build_excess_trust(K);
  } catch (const UnsupportedError& e) {
    throw UsageError(e.what());
  }
}

std::string jstr(const Json& j) { return j.dump(2) + "\n"; }

struct Manifest {
  std::string command;
  std::vector<std::string> argv;
  Json config = Json::object();
  Json inputs = Json::object();
  std::uint64_t seed = 0;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void add_input(const std::string& role, const std::string& path, const std::string& bytes) {
    inputs[role] = {{"path", path}, {"sha256", sha256_hex(bytes)}, {"bytes", bytes.size()}};
  }

  std::string render() const {
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    Json j = {{"schema", "blockmix.manifest/1"},
              {"command", command},
              {"argv", argv},
              {"config", config},
              {"inputs", inputs},
              {"seed", seed},
              {"version", BLOCKMIX_VERSION_STRING},
              {"wall_time_seconds", wall}};
    return jstr(j);
  }
};

struct NetworkOptions {
  std::string input;
  std::string alphabet = "auto";
  bool undirected = false;
};

SparseNetwork load_network(const NetworkOptions& opt, const std::string& model, Manifest& manifest) {
  const std::string spec = opt.alphabet == "auto" ? (model == "excess-trust" ? "signed" : "binary")
                                                  : opt.alphabet;
  const EdgeAlphabet edges = parse_alphabet(spec);
  const std::string bytes = read_input(opt.input);
  manifest.add_input("input", opt.input, bytes);
  manifest.config["alphabet"] = spec;
  manifest.config["undirected"] = opt.undirected;
  std::istringstream in(bytes);
  return load_edge_list(in, edges, opt.undirected ? std::optional<bool>(false) : std::nullopt);
}

void add_network_options(CLI::App* cmd, NetworkOptions& opt) {
  cmd->add_option("--input", opt.input, "Edge-list TSV")->required();
  cmd->add_option("--alphabet", opt.alphabet, "binary, signed, or comma-separated labels (default: by model)");
  cmd->add_flag("--undirected", opt.undirected, "Treat the edge list as undirected");
}

// ---------------------------------------------------------------------------

struct FitOptions {
  NetworkOptions net;
  std::string model = "tabular";
  int K = 0;
  std::string e_step = "mm";
  int restarts = 1;
  int max_sweeps = 6000;
  double rel_tol = 1e-10;
  int newton_max_iters = 100;
  double newton_grad_tol = 1e-10;
  std::uint64_t seed = 1;
  int jobs = 1;
  std::string out;
};

int cmd_fit(const FitOptions& o, const std::vector<std::string>& argv, std::ostream& out) {
  Manifest manifest{"fit", argv};
  manifest.seed = o.seed;
  SparseNetwork network = load_network(o.net, o.model, manifest);
  DyadModel model = build_model(o.model, o.K, network.alphabet());

  FitConfig cfg;
  cfg.max_sweeps = o.max_sweeps;
  cfg.rel_tol = o.rel_tol;
  cfg.restarts = o.restarts;
  cfg.e_step = o.e_step == "fp" ? FitConfig::EStep::FP : FitConfig::EStep::MM;
  cfg.newton_max_iters = o.newton_max_iters;
  cfg.newton_grad_tol = o.newton_grad_tol;
  cfg.seed = o.seed;
  cfg.jobs = o.jobs;
  manifest.config.update({{"model", o.model},
                          {"K", o.K},
                          {"e_step", o.e_step},
                          {"restarts", o.restarts},
                          {"max_sweeps", o.max_sweeps},
                          {"rel_tol", o.rel_tol},
                          {"newton_max_iters", o.newton_max_iters},
                          {"newton_grad_tol", o.newton_grad_tol},
                          {"seed", o.seed},
                          {"jobs", o.jobs},
                          {"out", o.out}});

  FitResult res = fit(network, model, cfg);
  write_outputs(o.out, {{"fit.json", jstr(fit_result_to_json(res))},
                        {"memberships.csv", membership_csv(res.state.alpha, res.hard_assignment)},
                        {"manifest.json", manifest.render()}});
  out << "lb " << format_double(res.lb) << " sweeps " << res.sweeps_used << " restart "
      << res.restart_index << (res.converged ? " converged" : " max-sweeps") << "\n";
  return res.converged ? kOk : kMaxSweeps;
}

// ---------------------------------------------------------------------------

struct SimulateOptions {
  std::string params;
  std::size_t n = 0;
  std::uint64_t seed = 1;
  bool relabel = false;
  std::string out;
};

ModelSpec read_model_document(const std::string& path, Manifest& manifest, const std::string& role) {
  const std::string text = read_input(path);
  manifest.add_input(role, path, text);
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    throw DomainError(path + ": " + e.what());
  }
  if (j.value("schema", "") == kFitSchema) return saved_fit_from_json(j).spec;
  return model_from_json(j);
}

int cmd_simulate(const SimulateOptions& o, const std::vector<std::string>& argv, std::ostream& out) {
  Manifest manifest{"simulate", argv};
  manifest.seed = o.seed;
  ModelSpec spec = read_model_document(o.params, manifest, "params");
  if (!spec.gamma) throw DomainError("model document has no gamma");
  manifest.config = {{"n", o.n}, {"seed", o.seed}, {"relabel", o.relabel}, {"out", o.out}};

  auto sim = sample_network(SimSpec{o.n, *spec.gamma, spec.model, o.seed, o.relabel});
  std::ostringstream edges;
  save_edge_list(sim.network, edges);
  std::string truth = "node_id,component\n";
  for (std::size_t i = 0; i < sim.assignment.size(); ++i)
    truth += std::to_string(i) + "," + std::to_string(sim.assignment[i]) + "\n";
  write_outputs(o.out, {{"network.tsv", edges.str()}, {"truth.csv", truth}, {"manifest.json", manifest.render()}});
  out << "nodes " << o.n << " nonbaseline dyads " << sim.network.nonbaseline_count() << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------

struct BootstrapOptions {
  std::string fit;
  int B = 500;
  std::uint64_t seed = 1;
  int jobs = 1;
  int max_sweeps = 1000;
  double rel_tol = 1e-10;
  double anchor_epsilon = 1e-10;
  double ci_lower = 0.025;
  double ci_upper = 0.975;
  bool no_relabel = false;
  std::string out;
};

int cmd_bootstrap(const BootstrapOptions& o, const std::vector<std::string>& argv, std::ostream& out,
                  std::ostream& err) {
  Manifest manifest{"bootstrap", argv};
  manifest.seed = o.seed;
  const std::string text = read_input(o.fit);
  manifest.add_input("fit", o.fit, text);
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::exception& e) {
    throw DomainError(o.fit + ": " + e.what());
  }
  const SavedFit saved = saved_fit_from_json(doc);

  BootstrapConfig cfg;
  cfg.B = o.B;
  cfg.refit_max_sweeps = o.max_sweeps;
  cfg.rel_tol = o.rel_tol;
  cfg.anchor_epsilon = o.anchor_epsilon;
  cfg.ci_levels = {o.ci_lower, o.ci_upper};
  cfg.seed = o.seed;
  cfg.jobs = o.jobs;
  cfg.relabel = !o.no_relabel;
  manifest.config = {{"B", o.B},
                     {"seed", o.seed},
                     {"jobs", o.jobs},
                     {"max_sweeps", o.max_sweeps},
                     {"rel_tol", o.rel_tol},
                     {"anchor_epsilon", o.anchor_epsilon},
                     {"ci_lower", o.ci_lower},
                     {"ci_upper", o.ci_upper},
                     {"relabel", cfg.relabel},
                     {"out", o.out}};

  const int K = model_components(saved.spec.model);
  VariationalState state{Membership(0, K), *saved.spec.gamma, saved.spec.model};
  BootstrapResult res = run_bootstrap(state, saved.n, cfg);
  write_outputs(o.out, {{"bootstrap.json", jstr(bootstrap_to_json(res))},
                        {"samples.csv", bootstrap_samples_csv(res)},
                        {"manifest.json", manifest.render()}});
  out << "replicates " << o.B << " failures " << res.failures.size() << "\n";
  if (res.warning) err << "warning: more than 20% of replicates failed\n";
  return kOk;
}

// ---------------------------------------------------------------------------

struct CompareOptions {
  NetworkOptions net;
  std::string model = "tabular";
  int K = 0;
  int runs = 20;
  int budget_sweeps = 200;
  double rel_tol = 0.0;
  std::uint64_t seed = 1;
  int jobs = 1;
  std::string out;
};

int cmd_compare(const CompareOptions& o, const std::vector<std::string>& argv, std::ostream& out) {
  Manifest manifest{"compare", argv};
  manifest.seed = o.seed;
  SparseNetwork network = load_network(o.net, o.model, manifest);
  DyadModel model = build_model(o.model, o.K, network.alphabet());
  manifest.config.update({{"model", o.model},
                          {"K", o.K},
                          {"runs", o.runs},
                          {"budget_sweeps", o.budget_sweeps},
                          {"rel_tol", o.rel_tol},
                          {"seed", o.seed},
                          {"jobs", o.jobs},
                          {"out", o.out}});
  if (o.runs < 0) throw UsageError("--runs must be nonnegative");

  // Both strategies start each run from the same memberships.
  const FitConfig::EStep strategies[] = {FitConfig::EStep::MM, FitConfig::EStep::FP};
  std::vector<std::vector<double>> traces(2 * static_cast<std::size_t>(o.runs));
  parallel_for(traces.size(), o.jobs, [&](std::size_t t) {
    const std::size_t run = t / 2;
    FitConfig cfg;
    cfg.max_sweeps = o.budget_sweeps;
    cfg.rel_tol = o.rel_tol;
    cfg.e_step = strategies[t % 2];
    auto alpha = init_random(network.n(), o.K, derive_seed(o.seed, 0x636d70, run));
    traces[t] = fit_from_alpha(network, model, std::move(alpha), cfg).lb_trace;
  });

  std::string csv = "strategy,run,sweep,lb\n";
  double best[2] = {-INFINITY, -INFINITY};
  for (int s = 0; s < 2; ++s)
    for (int r = 0; r < o.runs; ++r) {
      const auto& tr = traces[2 * r + s];
      for (std::size_t i = 0; i < tr.size(); ++i)
        csv += std::string(s == 0 ? "mm" : "fp") + "," + std::to_string(r) + "," + std::to_string(i + 1) +
               "," + format_double(tr[i]) + "\n";
      if (!tr.empty()) best[s] = std::max(best[s], tr.back());
    }
  write_outputs(o.out, {{"traces.csv", csv}, {"manifest.json", manifest.render()}});
  out << "best mm " << format_double(best[0]) << " best fp " << format_double(best[1]) << "\n";
  return kOk;
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 failed");
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Variational block-model fitting for discrete-valued networks", "blockmix"};
  app.set_version_flag("--version", BLOCKMIX_VERSION_STRING);
  app.require_subcommand(1);
  const int jobs = default_jobs();

  FitOptions fo;
  fo.jobs = jobs;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a block model to an edge list");
  add_network_options(fit_cmd, fo.net);
  fit_cmd->add_option("--model", fo.model)->check(CLI::IsMember({"tabular", "p1", "excess-trust"}));
  fit_cmd->add_option("--K", fo.K, "Number of components")->required()->check(CLI::PositiveNumber);
  fit_cmd->add_option("--e-step", fo.e_step)->check(CLI::IsMember({"mm", "fp"}));
  fit_cmd->add_option("--restarts", fo.restarts)->check(CLI::PositiveNumber);
  fit_cmd->add_option("--max-sweeps", fo.max_sweeps)->check(CLI::NonNegativeNumber);
  fit_cmd->add_option("--rel-tol", fo.rel_tol)->check(CLI::NonNegativeNumber);
  fit_cmd->add_option("--newton-max-iters", fo.newton_max_iters)->check(CLI::PositiveNumber);
  fit_cmd->add_option("--newton-grad-tol", fo.newton_grad_tol)->check(CLI::PositiveNumber);
  fit_cmd->add_option("--seed", fo.seed);
  fit_cmd->add_option("--jobs", fo.jobs)->check(CLI::Range(1, 1024));
  fit_cmd->add_option("--out", fo.out, "Output directory")->required();
  fit_cmd->add_option("--config", "key=value defaults file");

  SimulateOptions so;
  auto* sim_cmd = app.add_subcommand("simulate", "Sample a network from a model document");
  sim_cmd->add_option("--params", so.params, "Model or fit JSON")->required();
  sim_cmd->add_option("--n", so.n, "Node count")->required()->check(CLI::PositiveNumber);
  sim_cmd->add_option("--seed", so.seed);
  sim_cmd->add_flag("--relabel", so.relabel, "Shuffle node ids after contiguous assignment");
  sim_cmd->add_option("--out", so.out, "Output directory")->required();
  sim_cmd->add_option("--config", "key=value defaults file");

  BootstrapOptions bo;
  bo.jobs = jobs;
  auto* boot_cmd = app.add_subcommand("bootstrap", "Parametric bootstrap of a saved fit");
  boot_cmd->add_option("--fit", bo.fit, "fit.json from the fit command")->required();
  boot_cmd->add_option("--B", bo.B, "Replicate count")->check(CLI::NonNegativeNumber);
  boot_cmd->add_option("--seed", bo.seed);
  boot_cmd->add_option("--jobs", bo.jobs)->check(CLI::Range(1, 1024));
  boot_cmd->add_option("--max-sweeps", bo.max_sweeps)->check(CLI::NonNegativeNumber);
  boot_cmd->add_option("--rel-tol", bo.rel_tol)->check(CLI::NonNegativeNumber);
  boot_cmd->add_option("--anchor-epsilon", bo.anchor_epsilon)->check(CLI::NonNegativeNumber);
  boot_cmd->add_option("--ci-lower", bo.ci_lower)->check(CLI::Range(0.0, 1.0));
  boot_cmd->add_option("--ci-upper", bo.ci_upper)->check(CLI::Range(0.0, 1.0));
  boot_cmd->add_flag("--no-relabel", bo.no_relabel, "Keep contiguous node order in replicates");
  boot_cmd->add_option("--out", bo.out, "Output directory")->required();
  boot_cmd->add_option("--config", "key=value defaults file");

  CompareOptions co;
  co.jobs = jobs;
  auto* cmp_cmd = app.add_subcommand("compare", "Lower-bound traces of the MM and FP E-steps");
  add_network_options(cmp_cmd, co.net);
  cmp_cmd->add_option("--model", co.model)->check(CLI::IsMember({"tabular", "p1", "excess-trust"}));
  cmp_cmd->add_option("--K", co.K)->required()->check(CLI::PositiveNumber);
  cmp_cmd->add_option("--runs", co.runs)->check(CLI::NonNegativeNumber);
  cmp_cmd->add_option("--budget-sweeps", co.budget_sweeps)->check(CLI::NonNegativeNumber);
  cmp_cmd->add_option("--rel-tol", co.rel_tol)->check(CLI::NonNegativeNumber);
  cmp_cmd->add_option("--seed", co.seed);
  cmp_cmd->add_option("--jobs", co.jobs)->check(CLI::Range(1, 1024));
  cmp_cmd->add_option("--out", co.out, "Output directory")->required();
  cmp_cmd->add_option("--config", "key=value defaults file");

  std::vector<std::string> args;
  try {
    args = merge_config(raw_args);
    // CLI11 consumes the vector from the back.
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << BLOCKMIX_VERSION_STRING << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    if (auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front())
      err << "run '" << (sub == &app ? "blockmix" : "blockmix " + sub->get_name()) << " --help' for options\n";
    return kUsage;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kNoInput;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (fit_cmd->parsed()) return cmd_fit(fo, raw_args, out);
    if (sim_cmd->parsed()) return cmd_simulate(so, raw_args, out);
    if (boot_cmd->parsed()) return cmd_bootstrap(bo, raw_args, out, err);
    if (cmp_cmd->parsed()) return cmd_compare(co, raw_args, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kNoInput;
  } catch (const OutputError& e) {
    err << "error: " << e.what() << "\n";
    return kCantCreate;
  } catch (const ParseError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const DomainError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const UnsupportedError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}

}  // namespace blockmix::cli
