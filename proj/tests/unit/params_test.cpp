#include <gtest/gtest.h>

#include <random>

#include "capax/errors.hpp"
#include "capax/params.hpp"
#include "test_support.hpp"

namespace capax {
namespace {

using testing::reference_market;

TEST(Cbar, ReferenceMarket) {
    EXPECT_NEAR(cbar(reference_market()), 282040.6052783923, 1e-6);
}

TEST(Cbar, ZeroCosts) {
    MarketParams m = reference_market();
    m.c = 0.0;
    m.alpha = 0.0;
    EXPECT_EQ(cbar(m), 0.0);
}

TEST(Cbar, UnitCase) {
    MarketParams m{1.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
    EXPECT_DOUBLE_EQ(cbar(m), 2.0);
}

TEST(Cbar, LinearInCostArguments) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1e6);
    for (int i = 0; i < 200; ++i) {
        MarketParams a = reference_market();
        MarketParams b = a;
        MarketParams sum = a;
        a.c = u(rng) / 1e4;
        a.alpha = u(rng);
        b.c = u(rng) / 1e4;
        b.alpha = u(rng);
        sum.c = a.c + b.c;
        sum.alpha = a.alpha + b.alpha;
        EXPECT_NEAR(cbar(sum), cbar(a) + cbar(b), 1e-9 * cbar(sum));
        MarketParams scaled = a;
        scaled.c *= 3.0;
        scaled.alpha *= 3.0;
        EXPECT_NEAR(cbar(scaled), 3.0 * cbar(a), 1e-9 * cbar(scaled));
    }
}

TEST(CbarSub, Zero) {
    EXPECT_EQ(cbar_sub(reference_market(), ConstantSubsidy{}), 0.0);
}

TEST(CbarSub, Additive) {
    const MarketParams m = reference_market();
    const double alpha_sub = 33400.0 / m.rate();
    const ConstantSubsidy s{alpha_sub, 100000.0 / m.h};
    EXPECT_NEAR(cbar_sub(m, s), 133400.0, 1e-8);
}

TEST(CbarSub, AffineCountsOnlyConstantPart) {
    const MarketParams m = reference_market();
    EXPECT_EQ(cbar_sub(m, AffineSubsidy{0.0, 5.78e6, 0.0}), 0.0);
    EXPECT_NEAR(cbar_sub(m, AffineSubsidy{1000.0, 5.78e6, 2.0}), 2.0 * m.h + 1000.0 * m.rate(), 1e-9);
}

TEST(EffectiveMarket, FoldsSubsidyAndReserve) {
    const MarketParams m = reference_market();
    const EffectiveMarket e = effective_market(m, AffineSubsidy{1e5, 2e6, 3.0}, 70e3);
    EXPECT_DOUBLE_EQ(e.p, m.p + 2e6);
    EXPECT_DOUBLE_EQ(e.eps, m.eps + 70e3);
    EXPECT_DOUBLE_EQ(e.alpha, m.alpha - 1e5);
    EXPECT_DOUBLE_EQ(e.c, m.c - 3.0);
    EXPECT_NEAR(e.cbar(), cbar(m) - cbar_sub(m, AffineSubsidy{1e5, 2e6, 3.0}), 1e-8);
}

TEST(Validate, RejectsNonPositiveRates) {
    for (auto field : {&MarketParams::r, &MarketParams::delta, &MarketParams::lambda,
                       &MarketParams::eps, &MarketParams::h, &MarketParams::p}) {
        MarketParams m = reference_market();
        m.*field = 0.0;
        try {
            validate(m);
            FAIL() << "expected InvalidArgument";
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::InvalidArgument);
        }
    }
}

TEST(Validate, RejectsNegativeInstallationCost) {
    MarketParams m = reference_market();
    m.alpha = -1.0;
    EXPECT_THROW(validate(m), Error);
}

TEST(Validate, Reserves) {
    EXPECT_NO_THROW(validate(ReserveModel{FixedReserve{0.0}}));
    EXPECT_THROW(validate(ReserveModel{FixedReserve{-1.0}}), Error);
    EXPECT_NO_THROW(validate(ReserveModel{LinearReserve{1.0, 1.0, 130e3}}));
    EXPECT_THROW(validate(ReserveModel{LinearReserve{0.0, 1.0, 130e3}}), Error);
    EXPECT_THROW(validate(ReserveModel{LinearReserve{1.0, 1.0, -1.0}}), Error);
}

TEST(Admissibility, ReferenceSetupPasses) {
    const MarketParams m = reference_market();
    const auto report = check_admissibility(m, testing::annual_subsidy(m, 133400.0),
                                            FixedReserve{testing::kReferenceReserve});
    EXPECT_TRUE(report.all_passed());
    ASSERT_NE(report.find("cost_below_remuneration"), nullptr);
}

TEST(Admissibility, InstallationSubsidyAboveCostFails) {
    const MarketParams m = reference_market();
    const auto report =
        check_admissibility(m, ConstantSubsidy{m.alpha + 1.0, 0.0}, FixedReserve{70e3});
    EXPECT_FALSE(report.all_passed());
    ASSERT_NE(report.find("installation_subsidy_bound"), nullptr);
    EXPECT_FALSE(report.find("installation_subsidy_bound")->passed);
}

TEST(Admissibility, BoundaryIsStrict) {
    MarketParams m = reference_market();
    m.alpha = 0.0;
    m.c = m.p / m.eps;  // h c ε = h p exactly
    const auto report = check_admissibility(m, ConstantSubsidy{}, FixedReserve{0.0});
    EXPECT_FALSE(report.find("cost_below_remuneration")->passed);
}

TEST(Admissibility, PriceIndexedNeedsPositiveNumerator) {
    const MarketParams m = reference_market();
    const auto report = check_admissibility(m, AffineSubsidy{0.0, 0.0, 0.0}, FixedReserve{0.0});
    EXPECT_FALSE(report.find("price_indexed_subsidy_positive")->passed);
}

TEST(Admissibility, LinearReserveDomainBound) {
    const MarketParams m = reference_market();
    const LinearReserve lr{1.0, 1.0, 130e3};
    const auto subsidized =
        check_admissibility(m, testing::annual_subsidy(m, 132181.55), lr, 100e3);
    EXPECT_TRUE(subsidized.all_passed());
    // Without subsidy the bound hp/c̄ - ε is about 69 GW.
    const auto bare = check_admissibility(m, ConstantSubsidy{}, lr, 100e3);
    EXPECT_FALSE(bare.find("reserve_domain_bound")->passed);
}

TEST(Units, Conversions) {
    EXPECT_DOUBLE_EQ(70.0 * units::GW, 70000.0);
    EXPECT_DOUBLE_EQ(1400.0 * units::eur_per_kW, 1.4e6);
    EXPECT_DOUBLE_EQ(500.0 * units::kW, 0.5);
}

TEST(Errors, MessageCarriesKind) {
    const Error e(ErrorKind::NoBracket, "x");
    EXPECT_EQ(e.kind(), ErrorKind::NoBracket);
    EXPECT_NE(std::string(e.what()).find("NoBracket"), std::string::npos);
}

}  // namespace
}  // namespace capax
