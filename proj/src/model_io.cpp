#include "abq/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "abq/errors.hpp"

namespace abq {

namespace {

using nlohmann::json;

const json& field(const json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end()) throw ModelError(std::string("model document is missing \"") + key + "\"");
  return *it;
}

MatrixXd read_matrix(const json& rows, Index n_rows, Index n_cols, const char* what) {
  if (!rows.is_array() || static_cast<Index>(rows.size()) != n_rows)
    throw ModelError(std::string(what) + ": expected " + std::to_string(n_rows) + " rows");
  MatrixXd m(n_rows, n_cols);
  for (Index i = 0; i < n_rows; ++i) {
    const json& row = rows[i];
    if (!row.is_array() || static_cast<Index>(row.size()) != n_cols)
      throw ModelError(std::string(what) + ": row " + std::to_string(i) + " must have " +
                       std::to_string(n_cols) + " entries");
    for (Index j = 0; j < n_cols; ++j) m(i, j) = row[j].get<double>();
  }
  return m;
}

json write_matrix(const MatrixXd& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

void validate(const FiniteTask& task) {
  check_compatible(task.mdp, task.target);
  check_compatible(task.mdp, task.behavior);
  check_compatible(task.mdp, task.features);
  if (task.initial_weights.size() != task.features.n_features())
    throw ModelError("initial weights do not match the feature count");
}

FiniteTask parse_task(std::string_view json_text, std::string name) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ModelError(std::string("model document is not valid JSON: ") + e.what());
  }
  try {
    const Index n_states = field(doc, "n_states").get<Index>();
    const Index n_actions = field(doc, "n_actions").get<Index>();
    if (n_states <= 0 || n_actions <= 0) throw ModelError("n_states and n_actions must be positive");

    const json& kernel = field(doc, "transition");
    if (!kernel.is_array() || static_cast<Index>(kernel.size()) != n_states)
      throw ModelError("transition: expected one block per state");
    MatrixXd transition(n_states * n_actions, n_states);
    for (Index s = 0; s < n_states; ++s) {
      const MatrixXd block = read_matrix(kernel[s], n_actions, n_states, "transition");
      transition.middleRows(s * n_actions, n_actions) = block;
    }
    const MatrixXd reward_table = read_matrix(field(doc, "reward_mean"), n_states, n_actions, "reward_mean");
    VectorXd reward(n_states * n_actions);
    for (Index s = 0; s < n_states; ++s)
      for (Index a = 0; a < n_actions; ++a) reward(pair_index(s, a, n_actions)) = reward_table(s, a);

    const json& policies = field(doc, "policies");
    Policy target(read_matrix(field(policies, "target"), n_states, n_actions, "policies.target"));
    Policy behavior(read_matrix(field(policies, "behavior"), n_states, n_actions, "policies.behavior"));

    const json& feature_rows = field(doc, "features");
    if (!feature_rows.is_array() || feature_rows.empty() || !feature_rows[0].is_array())
      throw ModelError("features: expected a non-empty matrix");
    const Index n_features = static_cast<Index>(feature_rows[0].size());
    FeatureMap features(n_states, n_actions,
                        read_matrix(feature_rows, n_states * n_actions, n_features, "features"));

    VectorXd w0 = VectorXd::Zero(n_features);
    if (auto it = doc.find("initial_weights"); it != doc.end()) {
      if (!it->is_array() || static_cast<Index>(it->size()) != n_features)
        throw ModelError("initial_weights: expected one entry per feature");
      for (Index i = 0; i < n_features; ++i) w0(i) = (*it)[i].get<double>();
    }

    FiniteTask task{std::move(name),
                    Mdp(n_states, n_actions, std::move(transition), std::move(reward),
                        field(doc, "discount").get<double>()),
                    std::move(target), std::move(behavior), std::move(features), std::move(w0)};
    validate(task);
    return task;
  } catch (const json::exception& e) {
    throw ModelError(std::string("model document has a malformed field: ") + e.what());
  }
}

FiniteTask load_task(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open model file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_task(text.str(), path.stem().string());
}

std::string dump_task(const FiniteTask& task) {
  const Mdp& mdp = task.mdp;
  json doc;
  doc["n_states"] = mdp.n_states();
  doc["n_actions"] = mdp.n_actions();
  json kernel = json::array();
  for (Index s = 0; s < mdp.n_states(); ++s)
    kernel.push_back(write_matrix(mdp.transition().middleRows(s * mdp.n_actions(), mdp.n_actions())));
  doc["transition"] = std::move(kernel);
  doc["reward_mean"] = write_matrix(mdp.reward().reshaped(mdp.n_actions(), mdp.n_states()).transpose());
  doc["discount"] = mdp.discount();
  doc["policies"] = {{"target", write_matrix(task.target.probs())},
                     {"behavior", write_matrix(task.behavior.probs())}};
  doc["features"] = write_matrix(task.features.matrix());
  doc["initial_weights"] = std::vector<double>(task.initial_weights.begin(), task.initial_weights.end());
  return doc.dump(2);
}

}  // namespace abq
