#pragma once

#include <optional>
#include <string>
#include <vector>

#include "crwrap/checkers.hpp"
#include "crwrap/cr_model.hpp"
#include "crwrap/crash_stop.hpp"

namespace crwrap {

// Witness that a wrapped run's trace embeds into a failure-free run of the
// core algorithm whose final in-flight messages mirror the final buffers.
struct SuperwordCertificate {
  CrashStopRun cs_run;
  std::vector<std::size_t> embedding;  // cs trace position of each cr letter
  bool p1 = false;   // subword with matching first and last letters
  bool p2 = false;   // no failures anywhere in the reconstruction
  bool p3 = false;   // in-flight set equals the undelivered buffered messages
  bool cs_valid = false;
  std::string failure;
  bool ok() const { return p1 && p2 && p3 && cs_valid; }
};

SuperwordCertificate reconstruct_superword(const CRRun& cr, const WrappedAlgorithm& alg);

// Maps a violation found on the wrapped trace onto the reconstruction, so a
// wrapped-level safety failure always names a concrete core-run failure.
struct ViolationLocalization {
  Violation core_violation;
  bool mapped = false;
  std::string note;
};
ViolationLocalization localize_violation(const Violation& v,
                                         const SuperwordCertificate& cert);

enum class DetourOutcome { Irreparable, PreconditionFailed, Repaired };

struct DetourResult {
  DetourOutcome outcome;
  std::string detail;
};

// For validity/integrity/agreement: given a violating u and a superword w
// with the same initial letter, w must still violate the property. A
// `Repaired` outcome would falsify the checker stack, not the claim.
DetourResult check_detour_instance(const StateTrace& u, const StateTrace& w, Property prop);

}  // namespace crwrap
