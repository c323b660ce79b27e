#include "secform/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "secform/errors.hpp"

namespace secform::pipeline {

void require_budget(const mulq::MulqConfig& cfg_z, const mulq::MulqConfig& cfg_e,
                    const lwe::LweParams& params) {
  mulq::validate(cfg_z);
  mulq::validate(cfg_e);
  // z digit integers reach 10^sigma_z in magnitude; they are the scalar factor
  // in the ciphertext product, so both the rounding budget and the plaintext
  // range of the product must hold.
  const lwe::ErrorBudget budget =
      lwe::check_mult_budget(pow10_u128(cfg_z.sigma), params);
  if (!budget.pass()) {
    throw BudgetExceeded("injected-error budget fails for digit magnitude 10^" +
                         std::to_string(cfg_z.sigma) + " under these parameters");
  }
  if (cfg_z.sigma + cfg_e.sigma > 36 ||
      2 * pow10_u128(cfg_z.sigma + cfg_e.sigma) >= params.plain_modulus) {
    throw BudgetExceeded("digit product magnitude 10^" +
                         std::to_string(cfg_z.sigma + cfg_e.sigma) +
                         " does not fit the plaintext space");
  }
}

namespace {

lwe::CipherVec encrypt_scalar(std::int64_t v, const KeySession& session,
                              RandomSource& rng) {
  const std::int64_t buf[1] = {v};
  return lwe::encrypt(std::span<const std::int64_t>(buf, 1), session.key,
                      session.params, rng);
}

}  // namespace

SensorPacket sense_encrypt(int edge_id, std::array<double, 2> z, double e,
                           const mulq::MulqConfig& cfg_z, const mulq::MulqConfig& cfg_e,
                           const KeySession& session, RandomSource& rng) {
  require_budget(cfg_z, cfg_e, session.params);

  const mulq::QuantizedValue qz1 = mulq::to_plaintext(z[0], cfg_z);
  const mulq::QuantizedValue qz2 = mulq::to_plaintext(z[1], cfg_z);
  const mulq::QuantizedValue qe = mulq::to_plaintext(e, cfg_e);

  SensorPacket p;
  p.edge_id = edge_id;
  p.z1 = lwe::encrypt2(qz1.digits, session.key, session.params, rng);
  p.z2 = lwe::encrypt2(qz2.digits, session.key, session.params, rng);
  p.e = encrypt_scalar(qe.digits, session, rng);
  p.sz1 = encrypt_scalar(qz1.scale_exp, session, rng);
  p.sz2 = encrypt_scalar(qz2.scale_exp, session, rng);
  p.se = encrypt_scalar(qe.scale_exp, session, rng);
  return p;
}

EdgeResult edge_compute(const SensorPacket& packet, const EdgeContext& edge) {
  EdgeResult r;
  r.edge_id = packet.edge_id;
  r.u1 = lwe::mult(packet.z1, packet.e, edge.params);
  r.u2 = lwe::mult(packet.z2, packet.e, edge.params);
  r.ssum1 = lwe::add(packet.sz1, packet.se);
  r.ssum2 = lwe::add(packet.sz2, packet.se);
  return r;
}

std::array<double, 2> agent_decrypt_rescale(std::span<const EdgeResult> results,
                                            const graph::FormationGraph& g, int agent,
                                            const KeySession& session) {
  std::array<double, 2> u{0.0, 0.0};
  for (int k : g.incident_edges(agent)) {
    const EdgeResult* found = nullptr;
    for (const EdgeResult& r : results) {
      if (r.edge_id == k) {
        found = &r;
        break;
      }
    }
    if (found == nullptr) {
      throw MissingEdgeResult("no edge result for incident edge " + std::to_string(k) +
                              " of agent " + std::to_string(agent));
    }
    const int sign = g.incidence_sign(agent, k);
    const std::int64_t prod1 = lwe::decrypt(found->u1, session.key, session.params)[0];
    const std::int64_t prod2 = lwe::decrypt(found->u2, session.key, session.params)[0];
    const std::int64_t exp1 = lwe::decrypt(found->ssum1, session.key, session.params)[0];
    const std::int64_t exp2 = lwe::decrypt(found->ssum2, session.key, session.params)[0];
    // legal exponent sums are tiny; clamping keeps corrupted ciphertexts from
    // feeding an out-of-range cast (they still decode to a mismatching value)
    const auto clamp_exp = [](std::int64_t e) {
      return static_cast<int>(std::clamp<std::int64_t>(e, -100000, 100000));
    };
    const double term1 = mulq::decimal_value(prod1, clamp_exp(exp1));
    const double term2 = mulq::decimal_value(prod2, clamp_exp(exp2));
    if (sign > 0) {
      u[0] -= term1;
      u[1] -= term2;
    } else {
      u[0] += term1;
      u[1] += term2;
    }
  }
  return u;
}

// ---- trace I/O ----

namespace {

void write_doubles_hex(std::ostream& os, std::span<const double> v) {
  char buf[64];
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ' ';
    std::snprintf(buf, sizeof buf, "%a", v[i]);
    os << buf;
  }
  os << '\n';
}

std::vector<double> read_doubles_hex(std::istream& is, std::size_t count) {
  std::vector<double> out(count);
  std::string tok;
  for (auto& x : out) {
    if (!(is >> tok)) throw ParseError("truncated trace: expected a float");
    char* end = nullptr;
    x = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str()) throw ParseError("bad float literal in trace: " + tok);
  }
  return out;
}

void expect_word(std::istream& is, const std::string& word) {
  std::string tok;
  if (!(is >> tok) || tok != word) {
    throw ParseError("malformed trace: expected '" + word + "', got '" + tok + "'");
  }
}

}  // namespace

void write_trace(std::ostream& os, const Trace& trace) {
  os << "secform-trace 1\n";
  os << "params " << to_string(trace.params.plain_modulus) << ' '
     << to_string(trace.params.cipher_modulus) << ' ' << trace.params.error_range << ' '
     << trace.params.key_length << '\n';
  os << "key ";
  lwe::write_secret_key(os, trace.key);
  os << "graph " << trace.graph.agent_count << ' ' << trace.graph.edge_count() << '\n';
  for (const auto& [tail, head] : trace.graph.edges) {
    os << tail << ' ' << head << '\n';
  }
  os << "distances ";
  write_doubles_hex(os, trace.graph.desired_distances);
  os << "sigma " << trace.sigma_z << ' ' << trace.sigma_e << '\n';
  os << "steps " << trace.steps.size() << '\n';
  for (const TraceStep& s : trace.steps) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", s.t);
    os << "step " << buf << '\n';
    os << "positions ";
    write_doubles_hex(os, s.positions);
    for (const SensorPacket& p : s.packets) {
      os << "packet " << p.edge_id << '\n';
      lwe::write_cipher(os, p.z1);
      lwe::write_cipher(os, p.z2);
      lwe::write_cipher(os, p.e);
      lwe::write_cipher(os, p.sz1);
      lwe::write_cipher(os, p.sz2);
      lwe::write_cipher(os, p.se);
    }
    for (const EdgeResult& r : s.results) {
      os << "result " << r.edge_id << '\n';
      lwe::write_cipher(os, r.u1);
      lwe::write_cipher(os, r.u2);
      lwe::write_cipher(os, r.ssum1);
      lwe::write_cipher(os, r.ssum2);
    }
    os << "endstep\n";
  }
}

Trace read_trace(std::istream& is) {
  Trace trace;
  expect_word(is, "secform-trace");
  int version = 0;
  if (!(is >> version) || version != 1) throw ParseError("unsupported trace version");

  expect_word(is, "params");
  std::string a_text, q_text;
  std::int64_t r = 0;
  int n_key = 0;
  if (!(is >> a_text >> q_text >> r >> n_key)) throw ParseError("bad trace params");
  trace.params = lwe::LweParams::create(parse_u128(a_text), parse_u128(q_text), r, n_key);

  expect_word(is, "key");
  trace.key = lwe::read_secret_key(is, n_key);

  expect_word(is, "graph");
  int agents = 0, edge_count = 0;
  if (!(is >> agents >> edge_count)) throw ParseError("bad trace graph header");
  std::vector<std::pair<int, int>> edges(static_cast<std::size_t>(edge_count));
  for (auto& [tail, head] : edges) {
    if (!(is >> tail >> head)) throw ParseError("bad trace edge list");
  }
  expect_word(is, "distances");
  const std::vector<double> dists =
      read_doubles_hex(is, static_cast<std::size_t>(edge_count));
  trace.graph = graph::FormationGraph::create(agents, std::move(edges), dists);

  expect_word(is, "sigma");
  if (!(is >> trace.sigma_z >> trace.sigma_e)) throw ParseError("bad trace sigma line");

  expect_word(is, "steps");
  std::size_t steps = 0;
  if (!(is >> steps)) throw ParseError("bad trace step count");

  for (std::size_t si = 0; si < steps; ++si) {
    TraceStep step;
    expect_word(is, "step");
    step.t = read_doubles_hex(is, 1)[0];
    expect_word(is, "positions");
    step.positions = read_doubles_hex(is, static_cast<std::size_t>(2 * agents));
    for (int k = 0; k < edge_count; ++k) {
      expect_word(is, "packet");
      SensorPacket p;
      if (!(is >> p.edge_id)) throw ParseError("bad packet header");
      p.z1 = lwe::read_cipher_mat(is);
      p.z2 = lwe::read_cipher_mat(is);
      p.e = lwe::read_cipher_vec(is);
      p.sz1 = lwe::read_cipher_vec(is);
      p.sz2 = lwe::read_cipher_vec(is);
      p.se = lwe::read_cipher_vec(is);
      step.packets.push_back(std::move(p));
    }
    for (int k = 0; k < edge_count; ++k) {
      expect_word(is, "result");
      EdgeResult r2;
      if (!(is >> r2.edge_id)) throw ParseError("bad result header");
      r2.u1 = lwe::read_cipher_vec(is);
      r2.u2 = lwe::read_cipher_vec(is);
      r2.ssum1 = lwe::read_cipher_vec(is);
      r2.ssum2 = lwe::read_cipher_vec(is);
      step.results.push_back(std::move(r2));
    }
    expect_word(is, "endstep");
    trace.steps.push_back(std::move(step));
  }
  return trace;
}

namespace {

bool same_cipher(const lwe::CipherVec& a, const lwe::CipherVec& b) {
  return a.rows == b.rows && a.cols == b.cols && a.modulus == b.modulus &&
         a.data == b.data;
}

}  // namespace

VerifyReport verify_trace(const Trace& trace) {
  VerifyReport report;
  const KeySession session{trace.params, trace.key};
  const EdgeContext edge = edge_context(session);
  const mulq::MulqConfig cfg_z{trace.sigma_z};
  const mulq::MulqConfig cfg_e{trace.sigma_e};

  for (std::size_t si = 0; si < trace.steps.size(); ++si) {
    const TraceStep& step = trace.steps[si];
    const auto issue = [&](const std::string& what) {
      report.issues.push_back("step " + std::to_string(si) + ": " + what);
    };

    graph::FormationState state{step.positions};
    const std::vector<double> z = graph::relative_positions(state, trace.graph);
    const std::vector<double> e = graph::distance_errors(state, trace.graph);

    if (static_cast<int>(step.packets.size()) != trace.graph.edge_count() ||
        static_cast<int>(step.results.size()) != trace.graph.edge_count()) {
      issue("packet or result count does not match the edge count");
      continue;
    }

    for (int k = 0; k < trace.graph.edge_count(); ++k) {
      const SensorPacket& p = step.packets[static_cast<std::size_t>(k)];
      if (p.edge_id != k) {
        issue("packet order mismatch at edge " + std::to_string(k));
        continue;
      }
      // sensor stage: ciphertexts must open to the quantized plaintexts
      const mulq::QuantizedValue qz1 = mulq::to_plaintext(z[2 * k], cfg_z);
      const mulq::QuantizedValue qz2 = mulq::to_plaintext(z[2 * k + 1], cfg_z);
      const mulq::QuantizedValue qe = mulq::to_plaintext(e[k], cfg_e);

      // Enc2 of m opens to m via the product with a trivial encryption of 1;
      // cheaper and equivalent: multiply by the recorded e ciphertext and
      // compare against the integer product below. For the direct packet
      // check, decrypt the scalar records.
      const auto dec1 = [&](const lwe::CipherVec& c) {
        return lwe::decrypt(c, session.key, session.params)[0];
      };
      if (dec1(p.e) != qe.digits) issue("edge " + std::to_string(k) + ": error digits differ");
      if (dec1(p.sz1) != qz1.scale_exp || dec1(p.sz2) != qz2.scale_exp ||
          dec1(p.se) != qe.scale_exp) {
        issue("edge " + std::to_string(k) + ": scale exponents differ");
      }

      // compute stage: byte-identical recomputation
      const EdgeResult expected = edge_compute(p, edge);
      const EdgeResult& got = step.results[static_cast<std::size_t>(k)];
      if (got.edge_id != k) {
        issue("result order mismatch at edge " + std::to_string(k));
        continue;
      }
      if (!same_cipher(expected.u1, got.u1) || !same_cipher(expected.u2, got.u2) ||
          !same_cipher(expected.ssum1, got.ssum1) ||
          !same_cipher(expected.ssum2, got.ssum2)) {
        issue("edge " + std::to_string(k) + ": recomputed edge result differs from record");
      }

      // product plaintexts
      if (static_cast<i128>(dec1(got.u1)) != static_cast<i128>(qz1.digits) * qe.digits ||
          static_cast<i128>(dec1(got.u2)) != static_cast<i128>(qz2.digits) * qe.digits) {
        issue("edge " + std::to_string(k) + ": decrypted digit product differs");
      }
    }

    // agent stage: full command must match the quantized law bit-for-bit
    const std::vector<double> expected_u =
        graph::control_law_quantized(state, trace.graph, cfg_z, cfg_e);
    for (int agent = 0; agent < trace.graph.agent_count; ++agent) {
      const std::array<double, 2> u =
          agent_decrypt_rescale(step.results, trace.graph, agent, session);
      if (u[0] != expected_u[2 * agent] || u[1] != expected_u[2 * agent + 1]) {
        issue("agent " + std::to_string(agent) + ": pipeline command differs from the quantized law");
      }
    }
    ++report.steps_checked;
  }
  return report;
}

}  // namespace secform::pipeline
