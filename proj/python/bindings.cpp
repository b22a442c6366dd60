#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "blockmix/bootstrap.hpp"
#include "blockmix/engine.hpp"
#include "blockmix/errors.hpp"
#include "blockmix/network.hpp"
#include "blockmix/serialization.hpp"
#include "blockmix/simulator.hpp"

namespace py = pybind11;
using namespace blockmix;

namespace {

EdgeAlphabet parse_alphabet(const std::variant<std::string, std::vector<int>>& spec) {
  if (auto* labels = std::get_if<std::vector<int>>(&spec)) return EdgeAlphabet(*labels, 0);
  const auto& name = std::get<std::string>(spec);
  if (name == "binary") return EdgeAlphabet::binary();
  if (name == "signed") return EdgeAlphabet::signed_ratings();
  throw DomainError("alphabet must be 'binary', 'signed', or a list of labels");
}

DyadModel build_model(const std::string& kind, int K, const DyadAlphabet& alphabet) {
  if (kind == "tabular") return TabularBlockModel::uniform(K, alphabet);
  if (kind == "p1") return build_p1_mixture(K, alphabet);
  if (kind == "excess-trust") {
    if (!alphabet.directed() || !alphabet.edges().is_signed())
      throw UnsupportedError("excess-trust needs a directed signed network");
    return build_excess_trust(K);
  }
  throw DomainError("model must be 'tabular', 'p1', or 'excess-trust'");
}

FitConfig::EStep parse_e_step(const std::string& name) {
  if (name == "mm") return FitConfig::EStep::MM;
  if (name == "fp") return FitConfig::EStep::FP;
  throw DomainError("e_step must be 'mm' or 'fp'");
}

std::string network_text(const SparseNetwork& net) {
  std::ostringstream out;
  save_edge_list(net, out);
  return out.str();
}

Json parse_document(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw DomainError(e.what());
  }
}

// Model documents and fit documents both carry a model with gamma.
ModelSpec read_spec(const std::string& text) {
  const Json j = parse_document(text);
  ModelSpec spec = j.value("schema", "") == kFitSchema ? saved_fit_from_json(j).spec : model_from_json(j);
  if (!spec.gamma) throw DomainError("model document has no gamma");
  return spec;
}

py::dict fit_to_dict(const FitResult& res) {
  py::dict d;
  d["alpha"] = Eigen::MatrixXd(res.state.alpha);
  d["gamma"] = res.state.gamma;
  d["lb"] = res.lb;
  d["lb_initial"] = res.lb_initial;
  d["lb_trace"] = res.lb_trace;
  d["hard_assignment"] = res.hard_assignment;
  d["sweeps_used"] = res.sweeps_used;
  d["converged"] = res.converged;
  d["restart_index"] = res.restart_index;
  d["restart_lbs"] = res.restart_lbs;
  d["diagnostics"] = res.diagnostics;
  d["document"] = fit_result_to_json(res).dump();
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Mixtures of dyadic block models fitted by minorize-maximize variational EM";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<UnsupportedError>(m, "UnsupportedError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  py::class_<SparseNetwork>(m, "Network")
      .def_static(
          "from_text",
          [](const std::string& text, const std::variant<std::string, std::vector<int>>& alphabet,
             std::optional<bool> directed) {
            std::istringstream in(text);
            return load_edge_list(in, parse_alphabet(alphabet), directed);
          },
          py::arg("text"), py::arg("alphabet") = "signed", py::arg("directed") = py::none())
      .def_static(
          "from_file",
          [](const std::string& path, const std::variant<std::string, std::vector<int>>& alphabet,
             std::optional<bool> directed) { return load_edge_list_file(path, parse_alphabet(alphabet), directed); },
          py::arg("path"), py::arg("alphabet") = "signed", py::arg("directed") = py::none())
      .def_property_readonly("n", &SparseNetwork::n)
      .def_property_readonly("directed", &SparseNetwork::directed)
      .def_property_readonly("nonbaseline_count", &SparseNetwork::nonbaseline_count)
      .def("edges",
           [](const SparseNetwork& net) {
             std::vector<std::tuple<NodeId, NodeId, int, int>> rows;
             for (const auto& e : net.dyads()) {
               auto [a, b] = net.alphabet().labels(e.value);
               rows.emplace_back(e.i, e.j, a, b);
             }
             return rows;
           },
           "Non-baseline dyads as (i, j, y_ij, y_ji) with i < j")
      .def("to_text", &network_text)
      .def("__repr__", [](const SparseNetwork& net) {
        return "<Network n=" + std::to_string(net.n()) + " dyads=" + std::to_string(net.nonbaseline_count()) +
               (net.directed() ? " directed>" : " undirected>");
      });

  m.def(
      "fit",
      [](const SparseNetwork& net, int K, const std::string& model, const std::string& e_step, int restarts,
         int max_sweeps, double rel_tol, std::uint64_t seed, int jobs, std::optional<Eigen::MatrixXd> alpha) {
        FitConfig cfg;
        cfg.e_step = parse_e_step(e_step);
        cfg.restarts = restarts;
        cfg.max_sweeps = max_sweeps;
        cfg.rel_tol = rel_tol;
        cfg.seed = seed;
        cfg.jobs = jobs;
        const DyadModel start = build_model(model, K, net.alphabet());
        const FitResult res = [&] {
          py::gil_scoped_release release;
          return alpha ? fit_from_alpha(net, start, Membership(*alpha), cfg) : fit(net, start, cfg);
        }();
        return fit_to_dict(res);
      },
      py::arg("network"), py::arg("K"), py::arg("model") = "tabular", py::arg("e_step") = "mm",
      py::arg("restarts") = 1, py::arg("max_sweeps") = 6000, py::arg("rel_tol") = 1e-10, py::arg("seed") = 1,
      py::arg("jobs") = 1, py::arg("alpha") = py::none(),
      "Random restarts, or a single run from the given n x K memberships");

  m.def(
      "lower_bound",
      [](const SparseNetwork& net, const Eigen::MatrixXd& alpha, const std::string& model_document) {
        const ModelSpec spec = read_spec(model_document);
        return lower_bound(net, VariationalState{Membership(alpha), *spec.gamma, spec.model});
      },
      py::arg("network"), py::arg("alpha"), py::arg("model_document"));

  m.def(
      "simulate",
      [](const std::string& model_document, std::size_t n, std::uint64_t seed, bool relabel) {
        const ModelSpec spec = read_spec(model_document);
        SimulatedNetwork sim = [&] {
          py::gil_scoped_release release;
          return sample_network(SimSpec{n, *spec.gamma, spec.model, seed, relabel});
        }();
        return py::make_tuple(std::move(sim.network), sim.assignment);
      },
      py::arg("model_document"), py::arg("n"), py::arg("seed") = 1, py::arg("relabel") = false);

  m.def(
      "bootstrap",
      [](const std::string& fit_document, int B, std::uint64_t seed, int jobs, int max_sweeps, bool relabel) {
        const SavedFit saved = saved_fit_from_json(parse_document(fit_document));
        BootstrapConfig cfg;
        cfg.B = B;
        cfg.seed = seed;
        cfg.jobs = jobs;
        cfg.refit_max_sweeps = max_sweeps;
        cfg.relabel = relabel;
        const int K = model_components(saved.spec.model);
        const BootstrapResult res = [&] {
          py::gil_scoped_release release;
          return run_bootstrap(VariationalState{Membership(0, K), *saved.spec.gamma, saved.spec.model}, saved.n,
                               cfg);
        }();
        return bootstrap_to_json(res).dump();
      },
      py::arg("fit_document"), py::arg("B") = 500, py::arg("seed") = 1, py::arg("jobs") = 1,
      py::arg("max_sweeps") = 1000, py::arg("relabel") = true);
}
