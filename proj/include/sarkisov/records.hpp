#pragma once

#include <optional>
#include <string>
#include <vector>

#include "degree.hpp"

namespace sarkisov {

enum class LinkType { I, II, III, IV };

inline const char* link_type_name(LinkType t) {
  switch (t) {
    case LinkType::I: return "I";
    case LinkType::II: return "II";
    case LinkType::III: return "III";
    default: return "IV";
  }
}

inline std::optional<LinkType> parse_link_type(const std::string& s) {
  if (s == "I") return LinkType::I;
  if (s == "II") return LinkType::II;
  if (s == "III") return LinkType::III;
  if (s == "IV") return LinkType::IV;
  return std::nullopt;
}

enum class Branch { lambda_gt_mu, lambda_le_mu };

inline const char* branch_name(Branch b) {
  return b == Branch::lambda_gt_mu ? "LAMBDA_GT_MU" : "LAMBDA_LE_MU";
}

inline std::optional<Branch> parse_branch(const std::string& s) {
  if (s == "LAMBDA_GT_MU") return Branch::lambda_gt_mu;
  if (s == "LAMBDA_LE_MU") return Branch::lambda_le_mu;
  return std::nullopt;
}

struct EngineConfig {
  int search_bound = 8;  // |C^2| cap for ray candidates (markings with proximities)
  long iteration_cap = 10000;  // maximum number of links in one run
  bool deterministic_ties = true;  // break crepant ties by canonical tag order
};

/* One elementary modification, recorded with enough class data that the whole
   run can be replayed and re-checked from the instance alone. */
struct LinkRecord {
  LinkType link_type = LinkType::I;
  Branch branch = Branch::lambda_gt_mu;
  std::optional<TaggedClass> extracted_class;
  std::optional<TaggedClass> contracted_class;
  BaseType base_before = BaseType::point;
  BaseType base_after = BaseType::point;
  SarkisovDegree degree_before, degree_after;
  std::vector<Rat> ray_degrees;  // -(K+B).C of each elementary contraction
  std::optional<DivisorClass> fiber_after;  // fibre class after the link

  std::string base_transition() const {
    return std::string(base_name(base_before)) + "->" + base_name(base_after);
  }
};

}  // namespace sarkisov
