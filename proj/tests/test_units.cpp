#include <gtest/gtest.h>

#include "support.hpp"

using namespace breakcurve;

TEST(Units, ConversionFactors) {
    EXPECT_DOUBLE_EQ(units::ppb_to_g_per_l(14.73), 14.73e-6);
    EXPECT_DOUBLE_EQ(units::g_per_l_to_ppb(2.065e-5), 20.65);
    EXPECT_DOUBLE_EQ(units::min_to_hr(0.75), 0.0125);
    EXPECT_DOUBLE_EQ(units::hr_to_min(0.5), 30.0);
    EXPECT_DOUBLE_EQ(units::ml_to_l(10.6), 0.0106);
    EXPECT_DOUBLE_EQ(units::l_to_ml(5.712), 5712.0);
}

TEST(Units, CanonicalizesDeclaredUnits) {
    RawConditions r;
    r.inlet_concentration = {14.73, "ug/L"};
    r.flow_rate = {0.85, "L/hr"};
    r.resin_volume = {0.0106, "L"};
    r.contact_time = Quantity{0.0125, "hr"};
    r.resin_mass = Quantity{8.0, "g"};
    const auto c = to_canonical(r);
    EXPECT_DOUBLE_EQ(c.c0_g_per_l, 14.73e-6);
    EXPECT_DOUBLE_EQ(c.v_l, 0.0106);
    EXPECT_DOUBLE_EQ(c.ct_hr, 0.0125);
    ASSERT_TRUE(c.m_kg);
    EXPECT_DOUBLE_EQ(*c.m_kg, 0.008);
}

TEST(Units, RejectsUnknownUnitAndNonPositive) {
    RawConditions r;
    r.inlet_concentration = {14.73, "mg/L"};
    r.flow_rate = {0.85, "L/hr"};
    r.resin_volume = {10.6, "mL"};
    EXPECT_THROW(to_canonical(r), Error);
    r.inlet_concentration = {-1.0, "ppb"};
    try {
        to_canonical(r);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::invalid_input);
    }
}

TEST(Units, DeclaredContactTimeWithinToleranceIsKept) {
    std::vector<std::string> warnings;
    // V/Q = 0.748 min, declared 0.75 min.
    const auto c = make_conditions(14.73, 0.85, 10.6, 0.75, "A600E", &warnings);
    EXPECT_DOUBLE_EQ(c.ct_hr, 0.0125);
    EXPECT_TRUE(warnings.empty());
}

TEST(Units, InconsistentContactTimeFallsBackToFlow) {
    std::vector<std::string> warnings;
    const auto c = reference::conditions(8, &warnings);
    EXPECT_NEAR(c.ct_min(), 7.1 / 0.85 / 1000.0 * 60.0, 1e-12);
    ASSERT_EQ(warnings.size(), 1u);
    EXPECT_NE(warnings[0].find("V/Q"), std::string::npos);
}

TEST(Units, MissingContactTimeIsComputed) {
    const auto c = make_conditions(20.65, 40.8, 510.0);
    EXPECT_DOUBLE_EQ(c.ct_hr, 0.51 / 40.8);
}

TEST(Units, GeometryCheck) {
    RawConditions r = reference::raw_conditions(reference::experiments[0]);
    r.bed_depth = Quantity{6.0, "cm"};  // pi * 0.75^2 * 6 = 10.6 mL
    EXPECT_NO_THROW(to_canonical(r));
    r.bed_depth = Quantity{8.0, "cm"};
    EXPECT_THROW(to_canonical(r), Error);
}

TEST(Units, BedDepthAndTransit) {
    const auto c = reference::conditions(1);
    const double z = 10.6 / (std::numbers::pi * 0.75 * 0.75);
    EXPECT_NEAR(bed_depth_cm(c), z, 1e-12);
    EXPECT_NEAR(bed_transit_hr(c), z / 8.0 / 60.0, 1e-15);
    EXPECT_THROW(bed_transit_hr(make_conditions(14.73, 0.85, 10.6)), Error);
}

TEST(Units, BreakthroughRatio) {
    EXPECT_NEAR(breakthrough_ratio(10, 14.73), 0.678886625, 1e-9);
    EXPECT_NEAR(breakthrough_ratio(10, 20.65), 0.484261501, 1e-9);
    EXPECT_THROW(breakthrough_ratio(10, 9.5), Error);
    EXPECT_THROW(breakthrough_ratio(10, 10), Error);
}

TEST(Units, RawRoundTrip) {
    for (int n = 1; n <= 8; ++n) {
        const auto c = reference::conditions(n);
        EXPECT_EQ(to_canonical(as_raw(c)), c) << "experiment " << n;
    }
}
