#include <doctest.h>

#include "fedbht/material.hpp"

using namespace fedbht;

namespace {
const PropertyTable kLiverK({{37.0, 0.53}, {65.0, 0.57}});
}

TEST_CASE("liver conductivity table interpolates and extrapolates") {
  CHECK(evaluate(kLiverK, 37.0) == doctest::Approx(0.53).epsilon(1e-15));
  CHECK(evaluate(kLiverK, 65.0) == doctest::Approx(0.57).epsilon(1e-15));
  CHECK(evaluate(kLiverK, 51.0) == doctest::Approx(0.55).epsilon(1e-14));
  CHECK(evaluate(kLiverK, 79.0) == doctest::Approx(0.59).epsilon(1e-14));
  CHECK(evaluate(kLiverK, 23.0) == doctest::Approx(0.51).epsilon(1e-14));
}

TEST_CASE("breakpoints are reproduced exactly") {
  const PropertyTable t({{0.0, 1.0}, {10.0, 3.0}, {25.0, 2.5}, {40.0, 7.0}});
  for (const auto& [temp, value] : t.breakpoints()) CHECK(t(temp) == value);
}

TEST_CASE("single breakpoint tables are constant") {
  const PropertyTable t({{20.0, 4.2}});
  CHECK(t.is_constant());
  CHECK(t(-50.0) == 4.2);
  CHECK(t(500.0) == 4.2);
}

TEST_CASE("invalid tables are rejected") {
  CHECK_THROWS_AS(PropertyTable(std::vector<PropertyTable::Breakpoint>{}), Error);
  CHECK_THROWS_AS(PropertyTable({{37.0, 1.0}, {37.0, 2.0}}), Error);
  CHECK_THROWS_AS(PropertyTable({{40.0, 1.0}, {37.0, 2.0}}), Error);
}

TEST_CASE("evaluation is monotone on monotone tables") {
  const PropertyTable t({{0.0, 1.0}, {30.0, 1.5}, {60.0, 4.0}, {90.0, 4.1}});
  double prev = t(-20.0);
  for (double temp = -19.5; temp <= 130.0; temp += 0.5) {
    const double v = t(temp);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("isotropic conductivity matrix") {
  MaterialModel m;
  m.conductivity = IsotropicConductivity{kLiverK};
  const Mat3 d = conductivity_matrix(m, 37.0);
  CHECK((d - 0.53 * Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("diagonal anisotropic table matches the isotropic path") {
  MaterialModel iso, aniso;
  iso.conductivity = IsotropicConductivity{PropertyTable({{37.0, 0.53}})};
  AnisotropicConductivity a;
  a.components = {PropertyTable({{37.0, 0.53}}), PropertyTable({{37.0, 0.53}}), PropertyTable({{37.0, 0.53}}),
                  PropertyTable(0.0),            PropertyTable(0.0),            PropertyTable(0.0)};
  aniso.conductivity = a;
  CHECK(conductivity_matrix(iso, 50.0) == conductivity_matrix(aniso, 50.0));
}

TEST_CASE("non-SPD tensors are rejected") {
  MaterialModel m;
  AnisotropicConductivity a;
  a.components = {PropertyTable(-1.0), PropertyTable(1.0), PropertyTable(1.0),
                  PropertyTable(0.0),  PropertyTable(0.0), PropertyTable(0.0)};
  m.conductivity = a;
  CHECK_THROWS_AS(conductivity_matrix(m, 37.0), NotSpdError);
  CHECK_THROWS_AS(m.validate(), NotSpdError);

  // Positive diagonal but indefinite through the off-diagonal.
  a.components = {PropertyTable(1.0), PropertyTable(1.0), PropertyTable(1.0),
                  PropertyTable(1.5), PropertyTable(0.0), PropertyTable(0.0)};
  m.conductivity = a;
  CHECK_THROWS_AS(conductivity_matrix(m, 37.0), NotSpdError);
}

TEST_CASE("valid anisotropic models are symmetric and SPD over the operating range") {
  MaterialModel m;
  AnisotropicConductivity a;
  a.components = {PropertyTable({{37.0, 0.53}, {65.0, 0.57}}), PropertyTable({{37.0, 0.50}, {65.0, 0.55}}),
                  PropertyTable({{37.0, 0.48}, {65.0, 0.52}}), PropertyTable({{37.0, 0.02}, {65.0, 0.03}}),
                  PropertyTable({{37.0, 0.01}, {65.0, 0.015}}), PropertyTable({{37.0, 0.015}, {65.0, 0.02}})};
  m.conductivity = a;
  m.validate();
  for (double t = kOperatingMinC; t <= kOperatingMaxC; t += 5.0) {
    const Mat3 d = conductivity_matrix(m, t);
    CHECK((d - d.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(Eigen::SelfAdjointEigenSolver<Mat3>(d).eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("material validation") {
  MaterialModel m;
  m.validate();
  CHECK(m.heat_capacity(37.0) == doctest::Approx(1060.0 * 3600.0));
  CHECK_FALSE(m.capacity_depends_on_temperature());
  m.specific_heat = PropertyTable({{37.0, 3600.0}, {65.0, 3800.0}});
  CHECK(m.capacity_depends_on_temperature());
  CHECK(m.specific_heat(51.0) == doctest::Approx(3700.0));
  m.density = PropertyTable({{0.0, 10.0}, {10.0, 5.0}});  // negative before 120 C
  CHECK_THROWS_AS(m.validate(), Error);

  MaterialModel aniso;
  aniso.conductivity = AnisotropicConductivity{};
  CHECK_THROWS_AS(aniso.scalar_conductivity(37.0), Error);
}

TEST_CASE("perfusion parameter validation") {
  PerfusionParams p;
  p.validate();
  p.blood_perfusion = -1;
  CHECK_THROWS_AS(p.validate(), Error);
  p.blood_perfusion = 0.5;
  p.blood_specific_heat = 0;
  CHECK_THROWS_AS(p.validate(), Error);
  p.blood_specific_heat = 3617;
  p.metabolic_rate = -2;
  CHECK_THROWS_AS(p.validate(), Error);
}
