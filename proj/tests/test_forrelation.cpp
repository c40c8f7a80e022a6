#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "qpcp/forrelation.hpp"
#include "qpcp/verifier.hpp"

namespace qpcp::forrelation {
namespace {

std::shared_ptr<const BooleanOracle> table(std::vector<std::uint8_t> t) {
  return std::make_shared<BooleanOracle>(std::move(t));
}

TEST(Forrelator, ConstantFunctionsClosedForm) {
  for (int n = 1; n <= 6; ++n) {
    const std::vector<std::uint8_t> zero(std::size_t{1} << n, 0);
    EXPECT_NEAR(forrelator(zero, zero), std::pow(2.0, -n / 2.0), 1e-15) << n;
  }
  EXPECT_NEAR(forrelator({0, 0}, {0, 0}), 0.70710678, 1e-8);
  EXPECT_NEAR(forrelator({0, 0, 0, 0}, {0, 0, 0, 0}), 0.5, 1e-15);
}

TEST(Forrelator, MatchesNaiveDoubleSum) {
  CoinSource coins(Seed128{0, 51});
  for (int trial = 0; trial < 100; ++trial) {
    const auto f1 = random_truth_table(4, coins);
    const auto f2 = random_truth_table(4, coins);
    EXPECT_NEAR(forrelator(f1, f2), oracle::forrelator(f1, f2), 1e-10);
  }
}

TEST(WalshHadamard, InvolutionUpToScale) {
  std::vector<double> v{1, -2, 3, 0.5, 0, 0, 7, -1};
  const auto orig = v;
  walsh_hadamard(v);
  walsh_hadamard(v);
  for (std::size_t k = 0; k < v.size(); ++k) EXPECT_NEAR(v[k], 8 * orig[k], 1e-12);
}

TEST(BuildCircuit, OneQubitLayout) {
  const Circuit c = build_circuit(1, table({0, 0}), table({0, 0}));
  ASSERT_EQ(c.m(), 5);
  EXPECT_TRUE(std::holds_alternative<SingleQubitGate>(c.gates[0]));
  EXPECT_EQ(std::get<OracleGate>(c.gates[1]).oracle_id, "f1");
  EXPECT_TRUE(std::holds_alternative<SingleQubitGate>(c.gates[2]));
  EXPECT_EQ(std::get<OracleGate>(c.gates[3]).oracle_id, "f2");
  EXPECT_TRUE(std::holds_alternative<SingleQubitGate>(c.gates[4]));
}

TEST(BuildCircuit, GateCountAndOraclePositions) {
  CoinSource coins(Seed128{0, 52});
  for (int n = 1; n <= 6; ++n) {
    const Circuit c = build_circuit(n, table(random_truth_table(n, coins)), table(random_truth_table(n, coins)));
    ASSERT_EQ(c.m(), 3 * n + 2);
    for (int i = 1; i <= c.m(); ++i) {
      const bool is_oracle = std::holds_alternative<OracleGate>(c.gates[static_cast<std::size_t>(i - 1)]);
      EXPECT_EQ(is_oracle, i == n + 1 || i == 2 * n + 2) << "n=" << n << " i=" << i;
    }
    EXPECT_EQ(c.acceptance.length, n);
    EXPECT_EQ(c.acceptance.prefix, 0U);
    EXPECT_DOUBLE_EQ(c.acceptance.threshold, 0.36);
  }
}

TEST(BuildCircuit, ConstantFunctionsAcceptanceProbability) {
  const std::vector<std::uint8_t> zero(8, 0);
  const Circuit c = build_circuit(3, table(zero), table(zero));
  EXPECT_NEAR(acceptance_probability(simulate(c).back(), c.acceptance), 0.125, 1e-12);
}

TEST(BuildCircuit, AmplitudeOfZeroEqualsForrelator) {
  CoinSource coins(Seed128{0, 53});
  for (int seed = 0; seed < 20; ++seed) {
    const int n = 1 + seed % 4;
    const auto f1 = random_truth_table(n, coins);
    const auto f2 = random_truth_table(n, coins);
    const StateVector out = simulate(build_circuit(n, table(f1), table(f2))).back();
    EXPECT_NEAR(std::abs(out(0) - Complex(oracle::forrelator(f1, f2))), 0.0, 1e-9);
  }
}

TEST(GenInstance, RespectsPromise) {
  CoinSource coins(Seed128{0, 54});
  const Instance yes = gen_instance(4, Label::Yes, coins);
  EXPECT_GE(yes.phi, 0.6);
  EXPECT_NEAR(yes.phi, oracle::forrelator(yes.f1->truth_table(), yes.f2->truth_table()), 1e-12);
  const Instance no = gen_instance(4, Label::No, coins);
  EXPECT_LE(std::abs(no.phi), 0.01);
  EXPECT_NEAR(no.phi, oracle::forrelator(no.f1->truth_table(), no.f2->truth_table()), 1e-12);
}

TEST(GenInstance, ReportsExhaustedAttempts) {
  CoinSource coins(Seed128{0, 55});
  // At n = 1 every |Φ| is 0 or 2^{-1/2}, so the NO promise is unreachable.
  try {
    gen_instance(1, Label::No, coins, 50);
    FAIL() << "expected GenerationFailed";
  } catch (const GenerationFailed& e) {
    EXPECT_EQ(e.attempts(), 50U);
  }
}

TEST(SignConstruction, MeanNearSqrtTwoOverPi) {
  CoinSource coins(Seed128{0, 56});
  double sum = 0.0;
  const int draws = 100;
  for (int k = 0; k < draws; ++k) sum += sign_construction_phi(6, coins);
  EXPECT_NEAR(sum / draws, std::sqrt(2.0 / std::numbers::pi), 0.1);
}

TEST(Instance, JsonRoundTrip) {
  CoinSource coins(Seed128{0, 57});
  const Instance inst = gen_instance(3, Label::Yes, coins);
  const Instance back = instance_from_json(nlohmann::json::parse(instance_to_json(inst).dump()));
  EXPECT_EQ(back.f1->truth_table(), inst.f1->truth_table());
  EXPECT_EQ(back.f2->truth_table(), inst.f2->truth_table());
  EXPECT_EQ(back.label, Label::Yes);
  EXPECT_DOUBLE_EQ(back.phi, inst.phi);
  auto doc = instance_to_json(inst);
  doc["label"] = "no";
  EXPECT_THROW(instance_from_json(doc), std::invalid_argument);
  EXPECT_THROW(label_from_string("maybe"), std::invalid_argument);
}

TEST(EndToEnd, YesAcceptedNoRejected) {
  CoinSource coins(Seed128{0, 58});
  for (int n = 2; n <= 4; ++n) {
    for (Label label : {Label::Yes, Label::No}) {
      const Instance inst = gen_instance(n, label, coins);
      const Circuit c = build_circuit(inst);
      const PcpProof proof = build_honest_proof(simulate(c), 96);
      for (std::uint64_t s = 0; s < 20; ++s) {
        VerifierConfig cfg = default_verifier_config(c, 96, Seed128{3, s});
        cfg.repetitions = 20;
        ProofAccess access(proof, false);
        const Verdict v = verify(access, c, cfg);
        EXPECT_EQ(v.accepted(), label == Label::Yes) << "n=" << n;
        if (label == Label::No) EXPECT_EQ(v.reason, RejectReason::FinalProbabilityLow);
      }
    }
  }
}

}  // namespace
}  // namespace qpcp::forrelation
