#include <doctest.h>

#include <cmath>

#include "qi/analytic.hpp"
#include "support.hpp"

using namespace qi;
using namespace qi::analytic;

namespace {

ExperimentConfig scenario(double noise, int modes, double eta) {
    ExperimentConfig cfg = make_default_config(modes);
    cfg.noise_mean_NB = noise;
    cfg.reflectivity_eta = eta;
    return cfg;
}

void check_complements(const HypothesisStats& s) {
    CHECK(std::fabs(s.p_pos_h0 + s.p_neg_h0 - 1.0) <= 1e-12);
    CHECK(std::fabs(s.p_pos_h1 + s.p_neg_h1 - 1.0) <= 1e-12);
}

}  // namespace

TEST_CASE("classical single-photon probabilities") {
    CHECK(classical_single(scenario(0.01, 10, 0.0)).p_pos_h1 == doctest::Approx(0.01).epsilon(1e-14));
    CHECK(classical_single(scenario(0.01, 10, 1.0)).p_pos_h1 == doctest::Approx(1.0).epsilon(1e-14));
    // (1 - 0.1) * 0.01 + 0.1, frozen from independent arithmetic
    CHECK(classical_single(scenario(0.01, 10, 0.1)).p_pos_h1 ==
          doctest::Approx(0.109).epsilon(1e-14));
    check_complements(classical_single(scenario(0.01, 10, 0.1)));
}

TEST_CASE("Lloyd entangled single-photon probabilities") {
    CHECK(lloyd_entangled(scenario(0.01, 100, 0.0)).p_pos_h0 == doctest::Approx(1e-4).epsilon(1e-14));
    CHECK(lloyd_entangled(scenario(0.01, 100, 0.1)).p_pos_h1 ==
          doctest::Approx(0.10009).epsilon(1e-14));
    SUBCASE("M = 1 degenerates to the classical formulas") {
        const ExperimentConfig cfg = scenario(0.037, 1, 0.42);
        const HypothesisStats lloyd = lloyd_entangled(cfg);
        const HypothesisStats classical = classical_single(cfg);
        CHECK(lloyd.p_pos_h0 == classical.p_pos_h0);
        CHECK(lloyd.p_pos_h1 == classical.p_pos_h1);
    }
}

TEST_CASE("classical two-photon probabilities square the single-photon law") {
    const ExperimentConfig cfg = scenario(0.01, 10, 0.1);
    const HypothesisStats two = classical_two_photon(cfg);
    CHECK(two.p_pos_h0 == doctest::Approx(1e-4).epsilon(1e-14));
    CHECK(two.p_pos_h1 == doctest::Approx(0.011881).epsilon(1e-14));
    SUBCASE("eta = 0 keeps both hypotheses identical") {
        const HypothesisStats h = classical_two_photon(scenario(0.01, 10, 0.0));
        CHECK(h.p_pos_h0 == doctest::Approx(1e-4).epsilon(1e-14));
        CHECK(h.p_pos_h1 == h.p_pos_h0);
    }
    SUBCASE("p0 is exactly the square of the single-photon p0") {
        SplitMix64 rng(11);
        for (int i = 0; i < 200; ++i) {
            const ExperimentConfig c = qi::test::random_config(rng);
            const HypothesisStats one = classical_single(c);
            const HypothesisStats pair = classical_two_photon(c);
            CHECK(pair.p_pos_h0 == one.p_pos_h0 * one.p_pos_h0);
            CHECK(pair.p_pos_h1 == one.p_pos_h1 * one.p_pos_h1);
        }
    }
}

TEST_CASE("entangled two-photon probabilities square Lloyd's law") {
    const ExperimentConfig cfg = scenario(0.01, 100, 0.1);
    CHECK(entangled_two_photon(scenario(0.01, 100, 0.0)).p_pos_h0 ==
          doctest::Approx(1e-8).epsilon(1e-14));
    CHECK(entangled_two_photon(cfg).p_pos_h1 == doctest::Approx(0.0100180081).epsilon(1e-14));
    SUBCASE("M = 1 equals the classical two-photon law") {
        const ExperimentConfig c = scenario(0.02, 1, 0.3);
        const HypothesisStats e = entangled_two_photon(c);
        const HypothesisStats cl = classical_two_photon(c);
        CHECK(e.p_pos_h0 == cl.p_pos_h0);
        CHECK(e.p_pos_h1 == cl.p_pos_h1);
        CHECK(e.p_neg_h0 == cl.p_neg_h0);
        CHECK(e.p_neg_h1 == cl.p_neg_h1);
    }
}

TEST_CASE("hypothesis stats invariants over random scenarios") {
    SplitMix64 rng(12);
    for (int i = 0; i < 300; ++i) {
        const ExperimentConfig cfg = qi::test::random_config(rng);
        for (Protocol p : all_protocols) {
            const HypothesisStats s = stats_for(p, cfg);
            check_complements(s);
            if (cfg.reflectivity_eta > 0.0) CHECK(s.p_pos_h1 >= s.p_pos_h0);
            CHECK(s.p_pos_h0 >= 0.0);
            CHECK(s.p_pos_h1 <= 1.0);
        }
        // Squares can only shrink probabilities.
        CHECK(classical_two_photon(cfg).p_pos_h0 <= classical_single(cfg).p_pos_h0);
        CHECK(entangled_two_photon(cfg).p_pos_h0 <= lloyd_entangled(cfg).p_pos_h0);
    }
}

TEST_CASE("detection probability increases strictly with reflectivity") {
    SplitMix64 rng(13);
    for (int i = 0; i < 200; ++i) {
        ExperimentConfig cfg = qi::test::random_config(rng);
        cfg.noise_mean_NB = 0.05;  // keep q < 1 so the slope is positive
        const double eta_lo = rng.uniform01() * 0.5;
        const double eta_hi = eta_lo + 1e-6 + rng.uniform01() * 0.4;
        for (Protocol p : all_protocols) {
            cfg.reflectivity_eta = eta_lo;
            const double lo = stats_for(p, cfg).p_pos_h1;
            cfg.reflectivity_eta = eta_hi;
            const double hi = stats_for(p, cfg).p_pos_h1;
            CHECK(hi > lo);
        }
    }
}

TEST_CASE("m_trial applies the repeated-trial power laws") {
    const ExperimentConfig cfg = scenario(0.01, 100, 0.1);
    const HypothesisStats base = entangled_two_photon(cfg);

    SUBCASE("m = 1 is the identity") {
        const HypothesisStats same = m_trial(base, 1);
        CHECK(same.p_pos_h0 == base.p_pos_h0);
        CHECK(same.p_neg_h1 == base.p_neg_h1);
    }
    SUBCASE("positives follow the power law") {
        HypothesisStats s = base;
        s.p_pos_h0 = 0.1;
        CHECK(m_trial(s, 3).p_pos_h0 == doctest::Approx(1e-3).epsilon(1e-14));
    }
    SUBCASE("entangled false-negative example, m = 2") {
        // ((1 - 1e-4) * 0.9)^2 on Lloyd's single-photon stats
        const HypothesisStats lloyd = lloyd_entangled(cfg);
        const HypothesisStats twice = m_trial(lloyd, 2);
        CHECK(twice.p_neg_h1 == doctest::Approx(0.8098380081).epsilon(1e-14));
    }
    SUBCASE("rejects m < 1") { CHECK_THROWS_AS(m_trial(base, 0), std::invalid_argument); }
}

TEST_CASE("m_trial composes multiplicatively") {
    SplitMix64 rng(14);
    for (int i = 0; i < 300; ++i) {
        const ExperimentConfig cfg = qi::test::random_config(rng);
        const HypothesisStats s = stats_for(all_protocols[i % 4], cfg);
        const long long a = 1 + static_cast<long long>(rng.uniform01() * 9.0);
        const long long b = 1 + static_cast<long long>(rng.uniform01() * 9.0);
        const HypothesisStats nested = m_trial(m_trial(s, a), b);
        const HypothesisStats direct = m_trial(s, a * b);
        CHECK(std::fabs(nested.p_pos_h0 - direct.p_pos_h0) <= 1e-12);
        CHECK(std::fabs(nested.p_pos_h1 - direct.p_pos_h1) <= 1e-12);
        CHECK(std::fabs(nested.p_neg_h0 - direct.p_neg_h0) <= 1e-12);
        CHECK(std::fabs(nested.p_neg_h1 - direct.p_neg_h1) <= 1e-12);
        CHECK(nested.trials_m == direct.trials_m);
    }
}

TEST_CASE("snr report reproduces the worked example") {
    const ExperimentConfig cfg = scenario(0.01, 100, 0.01);
    const SnrReport report = snr_report(cfg);
    CHECK(report.snr_qi == doctest::Approx(100.99).epsilon(1e-12));
    CHECK(report.snr_qi2r == doctest::Approx(10198.9801).epsilon(1e-12));
    CHECK(report.squaring_residual_entangled <=
          1e-12 * std::fmax(1.0, report.snr_qi * report.snr_qi));
}

TEST_CASE("snr is unity for every protocol at zero reflectivity") {
    const SnrReport report = snr_report(scenario(0.01, 100, 0.0));
    CHECK(report.snr_ci == 1.0);
    CHECK(report.snr_qi == 1.0);
    CHECK(report.snr_ci2p == 1.0);
    CHECK(report.snr_qi2r == 1.0);
}

TEST_CASE("snr report rejects the noiseless limit") {
    CHECK_THROWS_AS(snr_report(scenario(0.0, 100, 0.1)), DivisionByZeroNoise);
}

TEST_CASE("squaring identities hold across random scenarios") {
    SplitMix64 rng(15);
    for (int i = 0; i < 500; ++i) {
        const ExperimentConfig cfg = qi::test::random_config(rng);
        if (cfg.noise_mean_NB == 0.0) continue;
        const SnrReport r = snr_report(cfg);
        CHECK(r.squaring_residual_classical <= 1e-12 * std::fmax(1.0, r.snr_ci * r.snr_ci));
        CHECK(r.squaring_residual_entangled <= 1e-12 * std::fmax(1.0, r.snr_qi * r.snr_qi));
    }
}

TEST_CASE("Lloyd SNR increases strictly with the mode count") {
    const double nb = 0.01, eta = 0.05;
    double prev = snr_qi_for_modes(1.0, nb, eta);
    for (double m : {2.0, 5.0, 17.0, 120.0, 4096.0}) {
        const double cur = snr_qi_for_modes(m, nb, eta);
        CHECK(cur > prev);
        prev = cur;
    }
}

TEST_CASE("equivalence solver matches the closed form") {
    const ExperimentConfig cfg = scenario(0.01, 100, 0.01);
    const EquivalenceResult eq = solve_equivalent_bandwidth(cfg);
    CHECK(eq.m_prime == doctest::Approx(10197.9901).epsilon(1e-10));
    CHECK(eq.target_snr == doctest::Approx(10198.9801).epsilon(1e-12));
    CHECK(eq.asymptotic_m_prime == doctest::Approx(10000.0).epsilon(1e-12));
    CHECK(eq.in_valid_regime);  // M / NB = 1e4 >= 1e3
    // plug-back reproduces the target to 1e-10 relative
    const double back = snr_qi_for_modes(eq.m_prime, cfg.noise_mean_NB, cfg.reflectivity_eta);
    CHECK(std::fabs(back - eq.target_snr) <= 1e-10 * eq.target_snr);
    // ratio approaches eta * M / NB in the M / NB >> 1 regime (within 5%)
    const double predicted = cfg.reflectivity_eta * 100.0 / cfg.noise_mean_NB;
    CHECK(std::fabs(eq.ratio_m_prime_over_m - predicted) <= 0.05 * predicted);
}

TEST_CASE("equivalence solver agrees with the closed form over random scenarios") {
    SplitMix64 rng(16);
    int solved = 0;
    for (int i = 0; i < 200; ++i) {
        ExperimentConfig cfg = qi::test::random_config(rng, 10000);
        if (!(cfg.reflectivity_eta > 1e-6) || cfg.noise_mean_NB == 0.0) continue;
        const EquivalenceResult eq = solve_equivalent_bandwidth(cfg);
        const double oracle = qi::test::equivalence_closed_form(eq.target_snr, cfg.noise_mean_NB,
                                                                cfg.reflectivity_eta);
        CHECK(std::fabs(eq.m_prime - oracle) <= 1e-10 * std::fmax(1.0, oracle));
        const double back = snr_qi_for_modes(eq.m_prime, cfg.noise_mean_NB, cfg.reflectivity_eta);
        CHECK(std::fabs(back - eq.target_snr) <= 1e-10 * eq.target_snr);
        ++solved;
    }
    CHECK(solved > 100);
}

TEST_CASE("equivalence solver rejects zero reflectivity and flags weak regimes") {
    ExperimentConfig cfg = scenario(0.01, 100, 0.0);
    CHECK_THROWS_AS(solve_equivalent_bandwidth(cfg), std::invalid_argument);
    cfg.reflectivity_eta = 0.5;
    cfg.noise_mean_NB = 0.2;  // M / NB = 500 < 1e3
    CHECK_FALSE(solve_equivalent_bandwidth(cfg).in_valid_regime);
    CHECK(solve_equivalent_bandwidth(cfg, 100.0).in_valid_regime);
}
