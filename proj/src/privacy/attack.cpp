#include "flgnn/privacy/attack.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "flgnn/error.hpp"
#include "flgnn/gat/model.hpp"
#include "flgnn/random.hpp"

namespace flgnn::privacy {

std::string to_string(AttackMode mode) {
  return mode == AttackMode::black_box ? "black-box" : "white-box";
}

AttackMode parse_attack_mode(const std::string& name) {
  if (name == "black-box" || name == "black_box" || name == "black") return AttackMode::black_box;
  if (name == "white-box" || name == "white_box" || name == "white") return AttackMode::white_box;
  throw std::invalid_argument("unknown attack mode '" + name + "'");
}

AttackCandidates default_candidates(const graph::Graph& target, std::uint64_t seed) {
  AttackCandidates c;
  c.members = target.train_nodes();
  auto test = target.test_nodes();
  Rng rng = make_rng(seed, "attack-candidates");
  std::shuffle(test.begin(), test.end(), rng);
  test.resize(std::min(test.size(), c.members.size()));
  std::sort(test.begin(), test.end());
  c.non_members = std::move(test);
  return c;
}

double node_confidence(const gat::ModelParams& params, const graph::Graph& g,
                       const std::string& node_id) {
  const auto idx = g.find(node_id);
  if (!idx) throw MissingNodeError("node '" + node_id + "' is not in the graph");
  const auto probs = gat::model_forward(params, g);
  const auto row = probs.row(*idx);
  return *std::max_element(row.begin(), row.end());
}

std::vector<double> confidences(const numerics::Matrix& probabilities,
                                std::span<const std::size_t> nodes) {
  std::vector<double> out;
  out.reserve(nodes.size());
  for (std::size_t node : nodes) {
    if (node >= probabilities.rows()) throw MissingNodeError("candidate node index out of range");
    const auto row = probabilities.row(node);
    out.push_back(*std::max_element(row.begin(), row.end()));
  }
  return out;
}

AttackReport membership_attack(std::span<const double> member_confidences,
                               std::span<const double> non_member_confidences) {
  if (member_confidences.empty() || non_member_confidences.empty()) {
    throw IllPosedAttackError("candidate set needs both members and non-members");
  }
  struct Entry {
    double conf;
    bool member;
  };
  std::vector<Entry> all;
  for (double c : member_confidences) all.push_back({c, true});
  for (double c : non_member_confidences) all.push_back({c, false});
  std::sort(all.begin(), all.end(), [](const Entry& a, const Entry& b) { return a.conf < b.conf; });

  const double total = static_cast<double>(all.size());
  // Threshold at all[i].conf: entries before i are predicted non-members.
  std::size_t members_below = 0;
  std::size_t non_members_below = 0;
  const std::size_t members = member_confidences.size();
  double best_acc = -1.0;
  double best_threshold = 0.0;
  std::size_t i = 0;
  while (i <= all.size()) {
    const double threshold = i < all.size() ? all[i].conf : std::numeric_limits<double>::infinity();
    const double correct = static_cast<double>(members - members_below + non_members_below);
    const double acc = correct / total;
    if (acc > best_acc) {
      best_acc = acc;
      best_threshold = threshold;
    }
    if (i == all.size()) break;
    // advance past every entry equal to this threshold
    const double value = all[i].conf;
    while (i < all.size() && all[i].conf == value) {
      (all[i].member ? members_below : non_members_below) += 1;
      ++i;
    }
  }

  AttackReport report;
  report.i_acc = best_acc;
  report.i_adv = 2.0 * (best_acc - 0.5);
  report.chosen_threshold = best_threshold;
  report.member_confidences.assign(member_confidences.begin(), member_confidences.end());
  report.non_member_confidences.assign(non_member_confidences.begin(), non_member_confidences.end());
  return report;
}

AttackReport black_box_attack(const numerics::Matrix& target_outputs,
                              const AttackCandidates& candidates) {
  return membership_attack(confidences(target_outputs, candidates.members),
                           confidences(target_outputs, candidates.non_members));
}

gat::ModelParams white_box_model(const federation::ParameterRecord& upload,
                                 const gat::ModelParams& attacker_params) {
  gat::ModelParams model = attacker_params;
  federation::install_shared(model, upload);
  return model;
}

AttackReport white_box_attack(const federation::ParameterRecord& upload,
                              const gat::ModelParams& attacker_params, const graph::Graph& target,
                              const AttackCandidates& candidates) {
  const auto model = white_box_model(upload, attacker_params);
  const auto probs = gat::model_forward(model, target);
  return black_box_attack(probs, candidates);
}

}  // namespace flgnn::privacy
