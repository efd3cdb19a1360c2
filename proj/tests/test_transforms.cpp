#include <doctest.h>

#include <cmath>

#include "pfmc/random.hpp"
#include "pfmc/transforms.hpp"

using namespace pfmc;

TEST_CASE("logit at the symmetry point") {
  CHECK(to_unconstrained(Transform::Logit, 0.5) == doctest::Approx(0.0));
  CHECK(log_jacobian(Transform::Logit, 0.5) == doctest::Approx(std::log(0.25)));
}

TEST_CASE("log transform is the identity at 1") {
  CHECK(to_unconstrained(Transform::Log, 1.0) == doctest::Approx(0.0));
  CHECK(log_jacobian(Transform::Log, 1.0) == doctest::Approx(0.0));
}

TEST_CASE("fisher-z") {
  CHECK(to_unconstrained(Transform::FisherZ, 0.0) == doctest::Approx(0.0));
  CHECK(from_unconstrained(Transform::FisherZ, std::atanh(0.7)) == doctest::Approx(0.7));
  CHECK(log_jacobian(Transform::FisherZ, 0.7) == doctest::Approx(std::log(1 - 0.49)));
}

TEST_CASE("boundary values raise TransformError") {
  CHECK_THROWS_AS(to_unconstrained(Transform::Logit, 0.0), TransformError);
  CHECK_THROWS_AS(to_unconstrained(Transform::Logit, 1.0), TransformError);
  CHECK_THROWS_AS(to_unconstrained(Transform::Log, 0.0), TransformError);
  CHECK_THROWS_AS(to_unconstrained(Transform::FisherZ, -1.0), TransformError);
}

TEST_CASE("roundtrip z -> theta -> z to 1e-12") {
  RandomStream rs(4, 0);
  for (const Transform t : {Transform::Identity, Transform::Log, Transform::Logit,
                            Transform::FisherZ}) {
    for (int i = 0; i < 1000; ++i) {
      const double z = 10.0 * (rs.uniform() - 0.5);
      const double back = to_unconstrained(t, from_unconstrained(t, z));
      CHECK(std::fabs(back - z) < 1e-12 * (1.0 + std::fabs(z)));
    }
  }
}

TEST_CASE("pack accumulates the jacobian") {
  const std::vector<Transform> ts = {Transform::Identity, Transform::Logit, Transform::Log};
  const std::vector<double> nat = {2.0, 0.5, 1.0};
  const auto pv = pack_natural(ts, nat);
  CHECK(pv.z[0] == doctest::Approx(2.0));
  CHECK(pv.z[1] == doctest::Approx(0.0));
  CHECK(pv.z[2] == doctest::Approx(0.0));
  CHECK(pv.log_jac == doctest::Approx(std::log(0.25)));
  const auto pv2 = pack_unconstrained(ts, pv.z);
  for (int i = 0; i < 3; ++i) CHECK(pv2.natural[i] == doctest::Approx(nat[i]).epsilon(1e-12));
  CHECK_THROWS_AS(pack_natural(ts, std::vector<double>{1.0}), ConfigError);
}
