#ifndef SMCCHEES_PROPOSAL_HPP
#define SMCCHEES_PROPOSAL_HPP

#include <cstdint>
#include <string_view>
#include <vector>

#include "smcchees/types.hpp"

namespace smcchees {

enum class ProposalKind { kRandomWalk, kHmc, kNuts, kChees };

std::string_view flag_name(ProposalKind kind);
ProposalKind parse_proposal_kind(std::string_view name);

/// Everything the SMC weight update needs from one propagation of the
/// ensemble. Row j belongs to particle j.
struct ProposalOutcome {
  Matrix previous;
  Matrix proposed;
  Matrix initial_momentum;
  Matrix final_momentum;
  Vector previous_log_density;
  Vector proposed_log_density;
  std::vector<std::uint8_t> divergent;
  std::vector<std::uint64_t> gradient_evaluations;

  void resize(Index particles, Index dimension);
  Index particles() const { return previous.rows(); }
  std::uint64_t total_gradient_evaluations() const;
};

}  // namespace smcchees

#endif
