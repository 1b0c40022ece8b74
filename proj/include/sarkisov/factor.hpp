#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "certificate.hpp"
#include "engine.hpp"

namespace sarkisov {

struct FactorResult {
  SarkisovCertificate certificate;
  UntwistResult run;
  BuiltInstance built;
};

/* Chain-level outcomes.  The per-model bounds (discrepancies above -epsilon,
   fibre-degree quantization, relatedness to the target) are enforced by the
   run itself, which throws on violation; the chain arithmetic is recomputed
   here from the records. */
inline CheckOutcomes summarize_checks(const std::vector<LinkRecord>& links) {
  CheckOutcomes c;
  c.degree_chain_strict = true;
  c.mu_non_increasing = true;
  c.ray_degrees_positive = true;
  for (std::size_t i = 0; i < links.size(); ++i) {
    c.degree_chain_strict =
        c.degree_chain_strict &&
        degree_compare(links[i].degree_after, links[i].degree_before) < 0 &&
        (i == 0 || links[i - 1].degree_after == links[i].degree_before);
    c.mu_non_increasing =
        c.mu_non_increasing && links[i].degree_after.mu <= links[i].degree_before.mu;
    for (const auto& x : links[i].ray_degrees)
      c.ray_degrees_positive = c.ray_degrees_positive && x > 0;
  }
  c.mu_quantized = true;
  c.epsilon_bound = true;
  c.related_chain = true;
  return c;
}

/* Run the factorization and package it as a self-contained certificate.  The
   instance digest inside the certificate is the reduced form; the run itself
   honors the declared mode. */
inline FactorResult factor_instance(const InstanceData& inst) {
  BuiltInstance built = build_instance(inst);
  UntwistResult run = untwist(built.source, built.target, inst.h, inst.config);
  SarkisovCertificate cert;
  cert.instance = normalize_instance(inst);
  cert.links = run.links;
  cert.final =
      make_final_witness(run.final_state, built.target, inst.h, run.final_degree);
  cert.checks = summarize_checks(cert.links);
  return FactorResult{std::move(cert), std::move(run), std::move(built)};
}

}  // namespace sarkisov
