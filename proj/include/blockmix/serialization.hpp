#pragma once

#include <optional>
#include <string>

#include "json.hpp"

#include "blockmix/bootstrap.hpp"
#include "blockmix/engine.hpp"
#include "blockmix/models.hpp"

namespace blockmix {

using Json = nlohmann::json;

inline constexpr const char* kModelSchema = "blockmix.model/1";
inline constexpr const char* kFitSchema = "blockmix.fit/1";
inline constexpr const char* kBootstrapSchema = "blockmix.bootstrap/1";

// A model plus optional mixing weights, as read from a model document.
struct ModelSpec {
  DyadModel model;
  std::optional<Eigen::VectorXd> gamma;
};

Json alphabet_to_json(const DyadAlphabet& alphabet);
DyadAlphabet alphabet_from_json(const Json& j);

Json model_to_json(const DyadModel& model, const Eigen::VectorXd* gamma = nullptr);
ModelSpec model_from_json(const Json& j);

Json fit_result_to_json(const FitResult& fit);

// What a saved fit carries forward: the fitted state minus memberships.
struct SavedFit {
  std::size_t n = 0;
  ModelSpec spec;
  double lb = 0.0;
};
SavedFit saved_fit_from_json(const Json& j);

Json bootstrap_to_json(const BootstrapResult& result);

std::string format_double(double v);
std::string membership_csv(const Membership& alpha, const std::vector<int>& assignment);
std::string bootstrap_samples_csv(const BootstrapResult& result);

std::string read_text_file(const std::string& path);
// Writes to `path`.tmp and renames over `path`.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace blockmix
