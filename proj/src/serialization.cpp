#include "blockmix/serialization.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace blockmix {
namespace {

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json doubles(const std::vector<double>& values) {
  Json arr = Json::array();
  for (double v : values) arr.push_back(number_or_null(v));
  return arr;
}

double as_double(const Json& j) {
  if (j.is_null()) return std::nan("");
  return j.get<double>();
}

}  // namespace

Json alphabet_to_json(const DyadAlphabet& alphabet) {
  Json dyads = Json::array();
  for (int d = 0; d < alphabet.size(); ++d) {
    auto [a, b] = alphabet.labels(d);
    dyads.push_back(alphabet.directed() ? Json::array({a, b}) : Json(a));
  }
  return {{"values", alphabet.edges().values()},
          {"zero", alphabet.edges().zero_label()},
          {"directed", alphabet.directed()},
          {"dyads", dyads}};
}

DyadAlphabet alphabet_from_json(const Json& j) {
  EdgeAlphabet edges(j.at("values").get<std::vector<int>>(), j.value("zero", 0));
  return DyadAlphabet(edges, j.value("directed", true));
}

Json model_to_json(const DyadModel& model, const Eigen::VectorXd* gamma) {
  Json j;
  j["schema"] = kModelSchema;
  j["K"] = model_components(model);
  j["alphabet"] = alphabet_to_json(model_alphabet(model));
  if (gamma) j["gamma"] = doubles({gamma->data(), gamma->data() + gamma->size()});
  if (const auto* tab = std::get_if<TabularBlockModel>(&model)) {
    j["kind"] = "tabular";
    Json blocks = Json::array();
    const int D = tab->alphabet().size();
    for (int k = 0; k < tab->K(); ++k)
      for (int l = k; l < tab->K(); ++l) {
        std::vector<double> p(D);
        for (int d = 0; d < D; ++d) p[d] = tab->pi(k, l, d);
        blocks.push_back({{"k", k}, {"l", l}, {"p", p}});
      }
    j["pi"] = blocks;
    return j;
  }
  const auto& ef = std::get<ExpFamBlockModel>(model);
  j["kind"] = ef.kind();
  j["theta"] = doubles({ef.theta().data(), ef.theta().data() + ef.dim()});
  j["fixed_mask"] = ef.fixed_mask();
  j["names"] = ef.names();
  if (ef.kind() != "p1" && ef.kind() != "excess-trust" && ef.kind() != "saturated") {
    j["dim"] = ef.dim();
    j["stats"] = ef.stat_table();
  }
  return j;
}

ModelSpec model_from_json(const Json& j) {
  try {
    if (j.contains("schema") && j.at("schema") != kModelSchema)
      throw DomainError("unsupported model schema " + j.at("schema").dump());
    const std::string kind = j.at("kind").get<std::string>();
    const int K = j.at("K").get<int>();
    ModelSpec spec{TabularBlockModel::uniform(1, DyadAlphabet(EdgeAlphabet::binary(), true)), {}};
    if (j.contains("gamma")) {
      auto g = j.at("gamma").get<std::vector<double>>();
      spec.gamma = Eigen::Map<Eigen::VectorXd>(g.data(), static_cast<Eigen::Index>(g.size()));
    }

    if (kind == "tabular") {
      DyadAlphabet alphabet = alphabet_from_json(j.at("alphabet"));
      const int D = alphabet.size();
      std::vector<double> canonical(static_cast<std::size_t>(K) * (K + 1) / 2 * D, std::nan(""));
      auto slot = [K](int k, int l) { return k * K - k * (k - 1) / 2 + (l - k); };
      for (const auto& block : j.at("pi")) {
        const int k = block.at("k").get<int>();
        const int l = block.at("l").get<int>();
        if (k < 0 || l < k || l >= K) throw DomainError("pi block index out of range");
        auto p = block.at("p").get<std::vector<double>>();
        if (p.size() != static_cast<std::size_t>(D)) throw DomainError("pi block has wrong length");
        std::copy(p.begin(), p.end(), canonical.begin() + slot(k, l) * D);
      }
      for (double v : canonical)
        if (std::isnan(v)) throw DomainError("pi table is missing a block pair");
      spec.model = TabularBlockModel::from_canonical(K, alphabet, canonical);
      return spec;
    }

    std::optional<ExpFamBlockModel> base;
    if (kind == "p1") {
      base = build_p1_mixture(K, alphabet_from_json(j.at("alphabet")));
    } else if (kind == "excess-trust") {
      base = build_excess_trust(K);
    } else if (kind == "saturated") {
      base = build_saturated(K, alphabet_from_json(j.at("alphabet")));
    } else {
      DyadAlphabet alphabet = alphabet_from_json(j.at("alphabet"));
      const int p = j.at("dim").get<int>();
      base = ExpFamBlockModel(kind, K, alphabet, p, j.at("stats").get<std::vector<double>>(),
                              Eigen::VectorXd::Zero(p), std::vector<bool>(p, false));
    }
    const int p = base->dim();
    Eigen::VectorXd theta = base->theta();
    if (j.contains("theta")) {
      auto t = j.at("theta").get<std::vector<double>>();
      if (t.size() != static_cast<std::size_t>(p)) throw DomainError("theta has the wrong length");
      theta = Eigen::Map<Eigen::VectorXd>(t.data(), p);
    }
    auto mask = j.contains("fixed_mask") ? j.at("fixed_mask").get<std::vector<bool>>()
                                         : base->fixed_mask();
    auto names = j.contains("names") ? j.at("names").get<std::vector<std::string>>() : base->names();
    spec.model = ExpFamBlockModel(kind, K, base->alphabet(), p, base->stat_table(), theta,
                                  std::move(mask), std::move(names));
    return spec;
  } catch (const Json::exception& e) {
    throw DomainError(std::string("malformed model document: ") + e.what());
  }
}

Json fit_result_to_json(const FitResult& fit) {
  Json j;
  j["schema"] = kFitSchema;
  j["n"] = fit.state.alpha.rows();
  j["model"] = model_to_json(fit.state.model, &fit.state.gamma);
  j["lb"] = number_or_null(fit.lb);
  j["lb_initial"] = number_or_null(fit.lb_initial);
  j["lb_trace"] = doubles(fit.lb_trace);
  j["sweeps_used"] = fit.sweeps_used;
  j["converged"] = fit.converged;
  j["restart_index"] = fit.restart_index;
  j["restart_lbs"] = doubles(fit.restart_lbs);
  j["diagnostics"] = fit.diagnostics;
  return j;
}

SavedFit saved_fit_from_json(const Json& j) {
  try {
    if (j.value("schema", "") != kFitSchema) throw DomainError("not a fit result document");
    SavedFit out{j.at("n").get<std::size_t>(), model_from_json(j.at("model")),
                 as_double(j.at("lb"))};
    if (!out.spec.gamma) throw DomainError("fit result lacks gamma");
    return out;
  } catch (const Json::exception& e) {
    throw DomainError(std::string("malformed fit document: ") + e.what());
  }
}

Json bootstrap_to_json(const BootstrapResult& r) {
  Json j;
  j["schema"] = kBootstrapSchema;
  j["B"] = r.samples.size();
  j["names"] = r.names;
  j["estimate"] = doubles(r.estimate);
  j["ci_levels"] = {r.ci_levels.first, r.ci_levels.second};
  Json intervals = Json::array();
  for (std::size_t c = 0; c < r.ci.size(); ++c)
    intervals.push_back({{"name", r.names[c]},
                         {"lower", number_or_null(r.ci[c].lower)},
                         {"upper", number_or_null(r.ci[c].upper)}});
  j["intervals"] = intervals;
  j["failures"] = r.failures;
  j["warning"] = r.warning;
  j["replicate_lb"] = doubles(r.replicate_lb);
  j["replicate_seeds"] = r.replicate_seeds;
  return j;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string membership_csv(const Membership& alpha, const std::vector<int>& assignment) {
  std::ostringstream out;
  out << "node_id";
  for (Eigen::Index k = 0; k < alpha.cols(); ++k) out << ",alpha_" << (k + 1);
  out << ",hard_assignment\n";
  for (Eigen::Index i = 0; i < alpha.rows(); ++i) {
    out << i;
    for (Eigen::Index k = 0; k < alpha.cols(); ++k) out << ',' << format_double(alpha(i, k));
    out << ',' << assignment[i] << '\n';
  }
  return out.str();
}

std::string bootstrap_samples_csv(const BootstrapResult& r) {
  std::ostringstream out;
  out << "replicate,seed,lb";
  for (const auto& name : r.names) out << ",\"" << name << '"';
  out << '\n';
  for (std::size_t b = 0; b < r.samples.size(); ++b) {
    out << b << ',' << r.replicate_seeds[b] << ',' << format_double(r.replicate_lb[b]);
    for (double v : r.samples[b]) out << ',' << format_double(v);
    out << '\n';
  }
  return out.str();
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create " + tmp);
    out << content;
    out.flush();
    if (!out) throw IoError("write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp + " to " + path + ": " + ec.message());
}

}  // namespace blockmix
