#ifndef AUDITLOG_SEARCH_HPP_
#define AUDITLOG_SEARCH_HPP_

// Bounded, cut-free, contraction-free proof search. Used as an independent
// oracle in tests and to discharge `term: search` proof declarations. Not
// complete beyond the depth bound; every proof it returns passes check().

#include <optional>

#include "auditlog/kernel.hpp"

namespace auditlog {

std::optional<ProofTerm> search(const Sequent& s, int max_depth, const ActionRegistry& reg,
                                const SignatureTable& sigs);

}  // namespace auditlog

#endif  // AUDITLOG_SEARCH_HPP_
