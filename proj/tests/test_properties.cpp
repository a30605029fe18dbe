#include "properties.hpp"

#include <doctest.h>

// d_S = d_E = 2, random h_S, h_E, v, τ, coupling
TEST_CASE("random models: CPTP invariants") { CHECK(props::cptp_failures() == 0); }

TEST_CASE("random models: measures and entropy production") { CHECK(props::measure_failures() == 0); }

TEST_CASE("random models: Lambda convexity and rate zero") { CHECK(props::lambda_failures() == 0); }
