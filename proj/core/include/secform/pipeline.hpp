#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "secform/formation.hpp"
#include "secform/lwe.hpp"
#include "secform/quantizer.hpp"

namespace secform::pipeline {

// Key material as held by the trusting parties (sensors and agents). The
// compute party never sees this type.
struct KeySession {
  lwe::LweParams params;
  lwe::SecretKey key;
};

// What the untrusted compute party holds: parameters only. The type owns no
// key, so the edge code path cannot decrypt by construction.
struct EdgeContext {
  lwe::LweParams params;
};

inline EdgeContext edge_context(const KeySession& session) {
  return EdgeContext{session.params};
}

// Everything a sensor ships for one edge: the two relative-position
// components in product-ready form, the distance error, and the three scale
// exponents, all encrypted under the session key.
struct SensorPacket {
  int edge_id = 0;
  lwe::CipherMat z1;   // digit integer of the first z component
  lwe::CipherMat z2;   // digit integer of the second z component
  lwe::CipherVec e;    // digit integer of the distance error (single row)
  lwe::CipherVec sz1;  // scale exponent of z1 (single row)
  lwe::CipherVec sz2;  // scale exponent of z2
  lwe::CipherVec se;   // scale exponent of e
};

// The compute party's per-edge output: encrypted digit products and encrypted
// exponent sums, still under the session key it never saw.
struct EdgeResult {
  int edge_id = 0;
  lwe::CipherVec u1;
  lwe::CipherVec u2;
  lwe::CipherVec ssum1;
  lwe::CipherVec ssum2;
};

// Quantizes z and e and encrypts the digit integers and exponents.
// Throws BudgetExceeded when the sigma pair cannot guarantee exact products
// under the session parameters.
SensorPacket sense_encrypt(int edge_id, std::array<double, 2> z, double e,
                           const mulq::MulqConfig& cfg_z, const mulq::MulqConfig& cfg_e,
                           const KeySession& session, RandomSource& rng);

// Ciphertext-only work: one product and one exponent sum per dimension.
EdgeResult edge_compute(const SensorPacket& packet, const EdgeContext& edge);

// Decrypts the agent's incident edge results, rescales each by the decrypted
// exponent sum, applies the incidence sign, and accumulates the velocity
// command. Throws MissingEdgeResult when an incident edge has no result.
std::array<double, 2> agent_decrypt_rescale(std::span<const EdgeResult> results,
                                            const graph::FormationGraph& g, int agent,
                                            const KeySession& session);

// Budget precondition shared with sense_encrypt, exposed so callers can
// validate a configuration before running.
void require_budget(const mulq::MulqConfig& cfg_z, const mulq::MulqConfig& cfg_e,
                    const lwe::LweParams& params);

// ---- record/replay ----
// A trace stores, per step, the exact state and every packet and result, so
// the pipeline-equals-quantized-law identity can be re-checked offline.

struct TraceStep {
  double t = 0.0;
  std::vector<double> positions;
  std::vector<SensorPacket> packets;  // one per edge, in edge order
  std::vector<EdgeResult> results;
};

struct Trace {
  lwe::LweParams params;
  lwe::SecretKey key;
  graph::FormationGraph graph;
  int sigma_z = 4;
  int sigma_e = 4;
  std::vector<TraceStep> steps;
};

void write_trace(std::ostream& os, const Trace& trace);
Trace read_trace(std::istream& is);

struct VerifyReport {
  int steps_checked = 0;
  std::vector<std::string> issues;

  bool ok() const { return issues.empty(); }
};

// Re-derives the quantized plaintexts from the recorded states, re-runs the
// ciphertext-only stage, decrypts, and checks every stage against the record.
VerifyReport verify_trace(const Trace& trace);

}  // namespace secform::pipeline
