#include <gtest/gtest.h>

#include <cmath>

#include "hrsal/errors.hpp"
#include "hrsal/metrics.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace hrsal;

namespace {

SaliencyMap as_map(const BinaryMask& m) {
    std::vector<double> v;
    for (auto b : m.values()) v.push_back(b ? 1.0 : 0.0);
    return SaliencyMap(m.width(), m.height(), v);
}

SaliencyMap flip(const SaliencyMap& m) {
    std::vector<double> v;
    for (int y = 0; y < m.height(); ++y)
        for (int x = m.width() - 1; x >= 0; --x) v.push_back(m.at(x, y));
    return SaliencyMap(m.width(), m.height(), v);
}

BinaryMask flip(const BinaryMask& m) {
    BinaryMask out(m.width(), m.height());
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x) out.set(m.width() - 1 - x, y, m.at(x, y));
    return out;
}

BinaryMask single(int w, int h, int x, int y) {
    BinaryMask m(w, h);
    m.set(x, y, true);
    return m;
}

// A soft prediction loosely correlated with the mask.
SaliencyMap noisy_copy(synth::Rng& rng, const BinaryMask& gt) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> v;
    for (auto b : gt.values()) v.push_back(std::clamp((b ? 0.7 : 0.2) + (u(rng) - 0.5) * 0.8, 0.0, 1.0));
    return SaliencyMap(gt.width(), gt.height(), v);
}

}  // namespace

TEST(MetricConfig, Validation) {
    MetricConfig c;
    EXPECT_NO_THROW(c.validate());
    c.beta_sq = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = MetricConfig{};
    c.pr_levels = 1;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = MetricConfig{};
    c.s_alpha = 1.5;
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Mae, SimpleCases) {
    synth::Rng rng(1);
    auto gt = synth::random_mask(rng, 10, 10, 0.5);
    EXPECT_EQ(mae(as_map(gt), gt), 0.0);
    EXPECT_EQ(mae(SaliencyMap(8, 8, 0.5), BinaryMask(8, 8)), 0.5);
}

TEST(Mae, MatchesOracle) {
    synth::Rng rng(2);
    for (int i = 0; i < 50; ++i) {
        auto p = synth::random_map(rng, 64, 64);
        auto g = synth::random_mask(rng, 64, 64, 0.3);
        const double o = oracle::mae(oracle::plane_of(p), oracle::plane_of(g));
        EXPECT_NEAR(mae(p, g), o, 1e-12 * o);
    }
}

TEST(Mae, DimensionMismatchThrows) {
    EXPECT_THROW(mae(SaliencyMap(3, 3), BinaryMask(3, 4)), std::invalid_argument);
    EXPECT_THROW(f_beta_adaptive(SaliencyMap(3, 3), BinaryMask(4, 3)), std::invalid_argument);
    EXPECT_THROW(pr_curve(SaliencyMap(3, 3), BinaryMask(4, 3)), std::invalid_argument);
    EXPECT_THROW(s_measure(SaliencyMap(3, 3), BinaryMask(4, 3)), std::invalid_argument);
    EXPECT_THROW(bde(BinaryMask(3, 3), BinaryMask(4, 3)), std::invalid_argument);
}

TEST(FBeta, FormulaByHand) {
    EXPECT_DOUBLE_EQ(f_beta_from(1.0, 1.0, 0.3), 1.0);
    EXPECT_NEAR(f_beta_from(0.8, 0.5, 0.3), 0.52 / 0.74, 1e-15);
    EXPECT_NEAR(f_beta_from(0.8, 0.5, 0.3), 0.7027, 5e-5);
    EXPECT_EQ(f_beta_from(0.0, 0.0, 0.3), 0.0);
}

TEST(FBeta, PerfectBinaryPredictionScoresOne) {
    synth::Rng rng(3);
    auto gt = synth::blob_mask(rng, 50, 40);
    EXPECT_DOUBLE_EQ(f_beta_adaptive(as_map(gt), gt).f_beta, 1.0);
    BinaryMask full(20, 20, true);
    auto r = f_beta_adaptive(SaliencyMap(20, 20, 1.0), full);
    EXPECT_NEAR(r.threshold, 1.0 - 1.0 / 510, 1e-15);
    EXPECT_DOUBLE_EQ(r.f_beta, 1.0);
}

TEST(FBeta, EmptyGroundTruthIsFlagged) {
    synth::Rng rng(4);
    auto r = f_beta_adaptive(synth::random_map(rng, 10, 10), BinaryMask(10, 10));
    EXPECT_TRUE(r.gt_degenerate);
    EXPECT_EQ(r.f_beta, 0.0);
}

TEST(FBeta, NothingPredictedGivesZeroPrecision) {
    BinaryMask gt = single(10, 10, 3, 3);
    auto r = f_beta_adaptive(SaliencyMap(10, 10, 0.0), gt);
    EXPECT_EQ(r.precision, 0.0);
    EXPECT_EQ(r.f_beta, 0.0);
    EXPECT_FALSE(r.gt_degenerate);
}

TEST(FBeta, MatchesOracle) {
    synth::Rng rng(5);
    for (int i = 0; i < 50; ++i) {
        auto g = synth::blob_mask(rng, 64, 64);
        auto p = i % 2 ? synth::random_map(rng, 64, 64) : noisy_copy(rng, g);
        auto r = f_beta_adaptive(p, g);
        auto o = oracle::f_beta_adaptive(oracle::plane_of(p), oracle::plane_of(g), 0.3);
        EXPECT_NEAR(r.f_beta, o.f, 1e-12);
        EXPECT_NEAR(r.precision, o.precision, 1e-12);
        EXPECT_NEAR(r.recall, o.recall, 1e-12);
    }
}

TEST(FBeta, AgreesWithPrPointAtSameThreshold) {
    synth::Rng rng(6);
    for (int i = 0; i < 20; ++i) {
        auto g = synth::blob_mask(rng, 40, 40);
        auto p = from_bytes(40, 40, byte_scale(noisy_copy(rng, g)));
        auto f = f_beta_adaptive(p, g);
        const int tau = static_cast<int>(std::floor(f.threshold * 255.0));
        auto curve = pr_curve(p, g);
        ASSERT_EQ(curve[tau].threshold, tau);
        if (f.precision == 0.0) continue;
        EXPECT_NEAR(curve[tau].precision, f.precision, 1e-12);
        EXPECT_NEAR(curve[tau].recall, f.recall, 1e-12);
        EXPECT_NEAR(f_beta_from(curve[tau].precision, curve[tau].recall, 0.3), f.f_beta, 1e-12);
    }
}

TEST(PrCurve, EndpointConventions) {
    synth::Rng rng(7);
    auto g = synth::blob_mask(rng, 30, 30);
    auto p = synth::random_map(rng, 30, 30);
    auto curve = pr_curve(p, g);
    ASSERT_EQ(curve.size(), 256u);
    EXPECT_EQ(curve.back().threshold, 255);
    EXPECT_EQ(curve.back().precision, 1.0);
    EXPECT_EQ(curve.back().recall, 0.0);
    std::size_t covered = 0;
    for (int y = 0; y < 30; ++y)
        for (int x = 0; x < 30; ++x)
            if (g.at(x, y) && to_byte(p.at(x, y)) > 0) ++covered;
    EXPECT_DOUBLE_EQ(curve.front().recall, static_cast<double>(covered) / g.count());
}

TEST(PrCurve, RecallNonIncreasingAndValuesInRange) {
    synth::Rng rng(8);
    for (int i = 0; i < 20; ++i) {
        auto g = synth::random_mask(rng, 32, 32, 0.4);
        auto curve = pr_curve(synth::random_map(rng, 32, 32), g);
        for (std::size_t k = 0; k < curve.size(); ++k) {
            EXPECT_GE(curve[k].precision, 0.0);
            EXPECT_LE(curve[k].precision, 1.0);
            if (k > 0) EXPECT_LE(curve[k].recall, curve[k - 1].recall);
        }
    }
}

TEST(PrCurve, MatchesOracleAtSeveralLevelCounts) {
    synth::Rng rng(9);
    for (int levels : {256, 2, 11, 100}) {
        MetricConfig cfg;
        cfg.pr_levels = levels;
        for (int i = 0; i < 10; ++i) {
            auto g = synth::random_mask(rng, 64, 64, 0.3);
            auto p = synth::random_map(rng, 64, 64);
            auto curve = pr_curve(p, g, cfg);
            auto o = oracle::pr_curve(oracle::plane_of(p), oracle::plane_of(g), levels);
            ASSERT_EQ(curve.size(), o.size());
            for (std::size_t k = 0; k < o.size(); ++k) {
                EXPECT_EQ(curve[k].threshold, o[k].threshold);
                EXPECT_NEAR(curve[k].precision, o[k].precision, 1e-12);
                EXPECT_NEAR(curve[k].recall, o[k].recall, 1e-12);
            }
        }
    }
}

TEST(PrCurve, EmptyGroundTruthHasZeroRecall) {
    for (const auto& p : pr_curve(SaliencyMap(5, 5, 0.6), BinaryMask(5, 5))) EXPECT_EQ(p.recall, 0.0);
}

TEST(SMeasure, IdenticalBinaryIsOne) {
    synth::Rng rng(10);
    for (int i = 0; i < 10; ++i) {
        auto g = synth::blob_mask(rng, 48, 36);
        EXPECT_NEAR(s_measure(as_map(g), g), 1.0, 1e-9);
    }
}

TEST(SMeasure, DegenerateGroundTruth) {
    EXPECT_EQ(s_measure(SaliencyMap(6, 6, 0.0), BinaryMask(6, 6)), 1.0);
    EXPECT_NEAR(s_measure(SaliencyMap(6, 6, 0.25), BinaryMask(6, 6)), 0.75, 1e-15);
    EXPECT_NEAR(s_measure(SaliencyMap(6, 6, 0.3), BinaryMask(6, 6, true)), 0.3, 1e-15);
}

TEST(SMeasure, MatchesReferenceTranscription) {
    synth::Rng rng(11);
    for (int i = 0; i < 100; ++i) {
        std::uniform_int_distribution<int> d(2, 64);
        const int w = d(rng), h = d(rng);
        auto g = i % 3 ? synth::blob_mask(rng, w, h) : synth::random_mask(rng, w, h, 0.3);
        auto p = i % 2 ? synth::random_map(rng, w, h) : noisy_copy(rng, g);
        const double o = oracle::s_measure(oracle::plane_of(p), oracle::plane_of(g), 0.5);
        EXPECT_NEAR(s_measure(p, g), o, 1e-10);
        EXPECT_GE(s_measure(p, g), 0.0);
        EXPECT_LE(s_measure(p, g), 1.0);
    }
}

TEST(SMeasure, AlphaSelectsComponents) {
    synth::Rng rng(12);
    auto g = synth::blob_mask(rng, 40, 40);
    auto p = noisy_copy(rng, g);
    for (double a : {0.0, 0.3, 1.0}) {
        MetricConfig cfg;
        cfg.s_alpha = a;
        EXPECT_NEAR(s_measure(p, g, cfg), oracle::s_measure(oracle::plane_of(p), oracle::plane_of(g), a), 1e-10);
    }
}

TEST(Metrics, FlipInvariance) {
    synth::Rng rng(13);
    for (int i = 0; i < 20; ++i) {
        auto g = synth::blob_mask(rng, 64, 64);
        auto p = noisy_copy(rng, g);
        EXPECT_NEAR(mae(flip(p), flip(g)), mae(p, g), 1e-12);
        EXPECT_NEAR(f_beta_adaptive(flip(p), flip(g)).f_beta, f_beta_adaptive(p, g).f_beta, 1e-12);
        // the region term splits at an integer centroid column, so a mirror
        // image can move that split by one column
        EXPECT_NEAR(s_measure(flip(p), flip(g)), s_measure(p, g), 0.02);
    }
}

TEST(Metrics, PureAcrossCalls) {
    synth::Rng rng(14);
    auto g = synth::blob_mask(rng, 50, 50);
    auto p = noisy_copy(rng, g);
    auto a = evaluate(p, g);
    auto b = evaluate(p, g);
    EXPECT_EQ(a.f_beta, b.f_beta);
    EXPECT_EQ(a.s_measure, b.s_measure);
    EXPECT_EQ(a.mae, b.mae);
    EXPECT_EQ(a.bde, b.bde);
}

TEST(Boundary, FourNeighbourRule) {
    BinaryMask full(4, 3, true);
    auto b = boundary_of(full);
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 4; ++x) EXPECT_EQ(b.at(x, y), !(y == 1 && (x == 1 || x == 2)));
    // a diagonal neighbour alone does not make a pixel boundary
    BinaryMask plus(5, 5);
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 5; ++x) plus.set(x, y, true);
    plus.set(0, 0, false);
    EXPECT_FALSE(boundary_of(plus).at(1, 1));
}

TEST(DistanceTransform, MatchesBruteForce) {
    synth::Rng rng(15);
    for (int i = 0; i < 10; ++i) {
        auto m = synth::random_mask(rng, 37, 23, 0.02);
        if (m.count() == 0) m.set(5, 5, true);
        auto d = squared_distance_to(m);
        for (int y = 0; y < 23; ++y) {
            for (int x = 0; x < 37; ++x) {
                double best = 1e300;
                for (int v = 0; v < 23; ++v)
                    for (int u = 0; u < 37; ++u)
                        if (m.at(u, v)) best = std::min(best, double((x - u) * (x - u) + (y - v) * (y - v)));
                ASSERT_EQ(d[static_cast<std::size_t>(y) * 37 + x], best);
            }
        }
    }
}

TEST(Bde, ThreeFourFive) { EXPECT_EQ(bde(single(10, 10, 0, 0), single(10, 10, 3, 4)), 5.0); }

TEST(Bde, IdenticalIsZero) {
    synth::Rng rng(16);
    auto m = synth::blob_mask(rng, 60, 60);
    EXPECT_EQ(bde(m, m), 0.0);
}

TEST(Bde, EmptyBoundaryIsUndefined) {
    EXPECT_THROW(bde(BinaryMask(5, 5), single(5, 5, 1, 1)), UndefinedMetric);
    EXPECT_THROW(bde(single(5, 5, 1, 1), BinaryMask(5, 5)), UndefinedMetric);
}

TEST(Bde, MatchesQuadraticOracleAndIsSymmetric) {
    synth::Rng rng(17);
    for (int i = 0; i < 30; ++i) {
        std::uniform_int_distribution<int> d(8, 100);
        const int w = d(rng), h = d(rng);
        auto a = synth::blob_mask(rng, w, h);
        auto b = synth::blob_mask(rng, w, h);
        const double o = oracle::bde(oracle::plane_of(a), oracle::plane_of(b));
        ASSERT_GE(o, 0.0);
        EXPECT_NEAR(bde(a, b), o, 1e-6);
        EXPECT_EQ(bde(a, b), bde(b, a));
    }
}

TEST(Binarize, ByteThresholdInclusive) {
    auto m = from_bytes(3, 1, std::vector<std::uint8_t>{127, 128, 255});
    auto b = binarize(m, 128);
    EXPECT_FALSE(b.at(0, 0));
    EXPECT_TRUE(b.at(1, 0));
    EXPECT_TRUE(b.at(2, 0));
}

TEST(Evaluate, UndefinedBdeLeftEmpty) {
    auto r = evaluate(SaliencyMap(10, 10, 0.1), single(10, 10, 4, 4));
    EXPECT_FALSE(r.bde.has_value());
    auto ok = evaluate(SaliencyMap(10, 10, 0.9), single(10, 10, 4, 4));
    ASSERT_TRUE(ok.bde.has_value());
}

TEST(Aggregate, MeansOverRows) {
    synth::Rng rng(18);
    std::vector<MetricReport> rows;
    double mae_sum = 0, bde_sum = 0;
    int bde_rows = 0;
    for (int i = 0; i < 7; ++i) {
        auto g = synth::blob_mask(rng, 30, 30);
        auto p = i == 3 ? SaliencyMap(30, 30, 0.0) : noisy_copy(rng, g);
        rows.push_back(evaluate(p, g));
        mae_sum += rows.back().mae;
        if (rows.back().bde) {
            bde_sum += *rows.back().bde;
            ++bde_rows;
        }
    }
    auto agg = aggregate(rows);
    EXPECT_NEAR(agg.mae, mae_sum / 7, 1e-12);
    ASSERT_TRUE(agg.bde.has_value());
    EXPECT_EQ(bde_rows, 6);
    EXPECT_NEAR(*agg.bde, bde_sum / bde_rows, 1e-12);
    for (std::size_t k = 0; k < agg.pr.size(); k += 17) {
        double s = 0;
        for (const auto& r : rows) s += r.pr[k].recall;
        EXPECT_NEAR(agg.pr[k].recall, s / 7, 1e-12);
    }
    EXPECT_FALSE(aggregate({}).bde.has_value());
}
