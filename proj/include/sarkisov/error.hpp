#pragma once

#include <stdexcept>
#include <string>

namespace sarkisov {

/* Error conditions. Families group into CLI exit codes; the fine-grained
   condition is carried by kind(). */
enum class errc {
  instance_error,           // malformed or inconsistent instance data
  non_contractible,         // contraction set fails validation
  rho_mismatch,             // Picard rank does not match the declared base
  not_relatively_ample,     // -(K+B) fails relative ampleness
  singularity_class,        // model outside the mode's singularity class
  missing_ray,              // CURVE-base operation without its fibre class
  not_proportional,         // POINT base: H and -(K+B) not proportional
  nonpositive_denominator,  // threshold denominator fails positivity
  nonpositive_discrepancy_denominator,  // a_k <= 0 with b_k > 0
  no_crepant_at_depth_zero,
  ray_not_found,            // bounded extremal-ray search exhausted
  iteration_cap_exceeded,
  internal_invariant_violation,
  schema_error,             // malformed instance/certificate file
};

inline const char* errc_name(errc k) {
  switch (k) {
    case errc::instance_error: return "InstanceError";
    case errc::non_contractible: return "NonContractible";
    case errc::rho_mismatch: return "RhoMismatch";
    case errc::not_relatively_ample: return "NotRelativelyAmple";
    case errc::singularity_class: return "SingularityClassViolation";
    case errc::missing_ray: return "MissingRay";
    case errc::not_proportional: return "NotProportional";
    case errc::nonpositive_denominator: return "NonpositiveDenominator";
    case errc::nonpositive_discrepancy_denominator:
      return "NonpositiveDiscrepancyDenominator";
    case errc::no_crepant_at_depth_zero: return "NoCrepantAtDepthZero";
    case errc::ray_not_found: return "RayNotFound";
    case errc::iteration_cap_exceeded: return "IterationCapExceeded";
    case errc::internal_invariant_violation: return "InternalInvariantViolation";
    case errc::schema_error: return "SchemaError";
  }
  return "UnknownError";
}

class error : public std::runtime_error {
 public:
  error(errc kind, const std::string& msg)
      : std::runtime_error(std::string(errc_name(kind)) + ": " + msg),
        kind_(kind) {}
  errc kind() const noexcept { return kind_; }

 private:
  errc kind_;
};

[[noreturn]] inline void fail(errc k, const std::string& msg) {
  throw error(k, msg);
}

inline void check(bool ok, errc k, const std::string& msg) {
  if (!ok) fail(k, msg);
}

}  // namespace sarkisov
