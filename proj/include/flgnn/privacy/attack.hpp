#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "flgnn/federation/aggregate.hpp"
#include "flgnn/gat/params.hpp"
#include "flgnn/graph/graph.hpp"
#include "flgnn/numerics/matrix.hpp"

namespace flgnn::privacy {

enum class AttackMode { black_box, white_box };

std::string to_string(AttackMode mode);
AttackMode parse_attack_mode(const std::string& name);

// Local node indices of the target graph labelled as training members or not.
struct AttackCandidates {
  std::vector<std::size_t> members;
  std::vector<std::size_t> non_members;
};

struct AttackConfig {
  AttackMode mode = AttackMode::black_box;
  std::size_t target_client = 0;
  std::uint64_t seed = 0;
};

struct AttackReport {
  double i_acc = 0.0;
  double i_adv = 0.0;  // 2 * (i_acc - 0.5)
  double chosen_threshold = 0.0;  // member iff confidence >= threshold (may be +inf)
  std::vector<double> member_confidences;
  std::vector<double> non_member_confidences;
};

// Every training node as a member and an equal-size random sample of test
// nodes (all of them if there are fewer) as non-members.
AttackCandidates default_candidates(const graph::Graph& target, std::uint64_t seed);

// Highest class probability the model assigns to `node_id`. Throws
// MissingNodeError for an unknown id.
double node_confidence(const gat::ModelParams& params, const graph::Graph& g,
                       const std::string& node_id);

std::vector<double> confidences(const numerics::Matrix& probabilities,
                                std::span<const std::size_t> nodes);

// Exhaustive sweep over the observed confidences (and +inf); keeps the
// lowest threshold reaching the best accuracy on the candidates. Throws
// IllPosedAttackError when either group is empty.
AttackReport membership_attack(std::span<const double> member_confidences,
                               std::span<const double> non_member_confidences);

// Black box: only the target model's output probabilities are observed.
AttackReport black_box_attack(const numerics::Matrix& target_outputs,
                              const AttackCandidates& candidates);

// The attacker's reconstruction: its own parameters with every layer carried
// by `upload` swapped in.
gat::ModelParams white_box_model(const federation::ParameterRecord& upload,
                                 const gat::ModelParams& attacker_params);

// White box: confidences come from white_box_model run on the target graph.
AttackReport white_box_attack(const federation::ParameterRecord& upload,
                              const gat::ModelParams& attacker_params, const graph::Graph& target,
                              const AttackCandidates& candidates);

}  // namespace flgnn::privacy
