#include <doctest.h>

#include <cmath>

#include "kernbound/errors.hpp"
#include "kernbound/kernel.hpp"
#include "kernbound/parallel.hpp"
#include "kernbound/synthetic.hpp"
#include "test_support.hpp"

using namespace kernbound;

TEST_CASE("sample validation") {
  Eigen::MatrixXd x(2, 1);
  x << 1.0, 2.0;
  CHECK_NOTHROW((Sample(x)));
  CHECK_NOTHROW(Sample(x, std::vector<int>{1, -1}));
  CHECK_THROWS_AS(Sample(x, std::vector<int>{1}), ParamError);
  CHECK_THROWS_AS(Sample(x, std::vector<int>{1, 2}), DataError);
  CHECK_THROWS_AS(Sample(Eigen::MatrixXd(0, 1)), ParamError);
  Eigen::MatrixXd bad(1, 1);
  bad(0, 0) = std::nan("");
  CHECK_THROWS_AS((Sample(bad)), DataError);
  CHECK_THROWS_AS(Sample(x).labels(), ParamError);
}

TEST_CASE("kernel spec validation") {
  CHECK_THROWS_AS(KernelSpec::polynomial(0, 0.0), ParamError);
  CHECK_THROWS_AS(KernelSpec::polynomial(2, -0.5), ParamError);
  CHECK_THROWS_AS(KernelSpec::gaussian(0.0), ParamError);
  CHECK_THROWS_AS(KernelSpec::gaussian(-1.0), ParamError);
  CHECK(KernelSpec::linear().kind_name() == "linear");
  CHECK(KernelSpec::polynomial(2, 1.0).kind_name() == "polynomial");
  CHECK(KernelSpec::gaussian(1.0).kind_name() == "gaussian");
}

TEST_CASE("compute_gram matches the kernel definitions") {
  SUBCASE("linear on orthonormal points") {
    Eigen::MatrixXd x(2, 2);
    x << 1, 0, 0, 1;
    const GramMatrix g = compute_gram(Sample(x), KernelSpec::linear());
    CHECK(g(0, 0) == 1.0);
    CHECK(g(0, 1) == 0.0);
    CHECK(g(1, 0) == 0.0);
    CHECK(g(1, 1) == 1.0);
    CHECK(g.trace() == 2.0);
  }
  SUBCASE("gaussian on a single point") {
    Eigen::MatrixXd x(1, 3);
    x << 0.3, -0.7, 2.0;
    const GramMatrix g = compute_gram(Sample(x), KernelSpec::gaussian(1.0));
    CHECK(g(0, 0) == 1.0);
  }
  SUBCASE("quadratic polynomial with offset") {
    Eigen::MatrixXd x(2, 1);
    x << 1, 2;
    const GramMatrix g = compute_gram(Sample(x), KernelSpec::polynomial(2, 1.0));
    CHECK(g(0, 0) == 4.0);
    CHECK(g(0, 1) == 9.0);
    CHECK(g(1, 0) == 9.0);
    CHECK(g(1, 1) == 25.0);
  }
}

TEST_CASE("compute_gram is exactly symmetric and thread-count independent") {
  const Sample sample = random_sample(11, 23, 4);
  const KernelSpec spec = KernelSpec::gaussian(0.7);
  set_thread_cap(1);
  const GramMatrix serial = compute_gram(sample, spec);
  set_thread_cap(8);
  const GramMatrix parallel = compute_gram(sample, spec);
  set_thread_cap(0);
  CHECK(serial.entries() == parallel.entries());
  for (int i = 0; i < serial.size(); ++i)
    for (int j = 0; j < serial.size(); ++j) CHECK(serial(i, j) == serial(j, i));
}

TEST_CASE("cross gram matches pointwise evaluation") {
  const Sample train = random_sample(5, 6, 3);
  const Sample query = random_sample(6, 4, 3);
  const KernelSpec spec = KernelSpec::polynomial(3, 0.5);
  const Eigen::MatrixXd cross = compute_cross_gram(query, train, spec);
  REQUIRE(cross.rows() == 4);
  REQUIRE(cross.cols() == 6);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 6; ++j)
      CHECK(cross(i, j) == spec.eval(query.points().row(i), train.points().row(j)));
}

TEST_CASE("from_entries rejects malformed matrices") {
  Eigen::MatrixXd rect(2, 3);
  rect.setZero();
  CHECK_THROWS_AS(GramMatrix::from_entries(rect), ParamError);
  Eigen::MatrixXd asym(2, 2);
  asym << 1, 2, 3, 1;
  CHECK_THROWS_AS(GramMatrix::from_entries(asym), DataError);
  Eigen::MatrixXd nan2(2, 2);
  nan2 << 1, 0, 0, std::nan("");
  CHECK_THROWS_AS(GramMatrix::from_entries(nan2), DataError);
}

TEST_CASE("validate_psd screens eigenvalues and symmetry") {
  SUBCASE("identity passes") {
    const auto d = validate_psd(GramMatrix::from_entries(Eigen::MatrixXd::Identity(3, 3)));
    CHECK(d.pass);
    CHECK(d.min_eig == doctest::Approx(1.0));
    CHECK(d.max_eig == doctest::Approx(1.0));
  }
  SUBCASE("indefinite matrix fails") {
    Eigen::MatrixXd a(2, 2);
    a << 1, 2, 2, 1;
    const auto d = validate_psd(GramMatrix::from_entries(a));
    CHECK_FALSE(d.pass);
    CHECK(d.min_eig == doctest::Approx(-1.0));
    CHECK(d.max_eig == doctest::Approx(3.0));
  }
  SUBCASE("rank-1 all-ones passes") {
    const auto d = validate_psd(GramMatrix::from_entries(Eigen::MatrixXd::Ones(2, 2)));
    CHECK(d.pass);
    CHECK(d.min_eig == doctest::Approx(0.0));
    CHECK(d.max_eig == doctest::Approx(2.0));
  }
  SUBCASE("non-finite entries raise") {
    Eigen::MatrixXd x(1, 1);
    x << 1e200;
    const GramMatrix g = compute_gram(Sample(x), KernelSpec::polynomial(2, 0.0));
    CHECK_THROWS_AS(validate_psd(g), DataError);
  }
}

TEST_CASE("quadratic_form values and clamping") {
  const GramMatrix id2 = GramMatrix::from_entries(Eigen::MatrixXd::Identity(2, 2));
  Eigen::VectorXd v(2);
  v << 3, 4;
  CHECK(quadratic_form(id2, v) == 25.0);

  const GramMatrix ones2 = GramMatrix::from_entries(Eigen::MatrixXd::Ones(2, 2));
  Eigen::VectorXd w(2);
  w << 1, -1;
  CHECK(quadratic_form(ones2, w) == 0.0);
  Eigen::VectorXd u(2);
  u << 1, 1;
  CHECK(quadratic_form(ones2, u) == 4.0);

  Eigen::VectorXd wrong(3);
  wrong.setOnes();
  CHECK_THROWS_AS(quadratic_form(ones2, wrong), ParamError);

  SUBCASE("tiny negative raw values clamp to zero") {
    Eigen::MatrixXd a(2, 2);
    a << 1.0, 1.0 + 1e-13, 1.0 + 1e-13, 1.0;
    CHECK(quadratic_form(GramMatrix::from_entries(a), w) == 0.0);
  }
  SUBCASE("clearly negative raw values raise") {
    Eigen::MatrixXd a(2, 2);
    a << 1.0, 1.0 + 5e-11, 1.0 + 5e-11, 1.0;
    Eigen::VectorXd big = 1e3 * w;
    CHECK_THROWS_AS(quadratic_form(GramMatrix::from_entries(a), big), DataError);
  }
}

TEST_CASE("combination weight feasibility") {
  CombinationWeights w;
  w.constraint = WeightConstraint::L1Simplex;
  w.mu = Eigen::VectorXd(2);
  w.mu << 0.25, 0.75;
  CHECK(w.feasible());
  CHECK(w.feasibility_defect() == doctest::Approx(0.0));
  w.mu << 0.6, 0.6;
  CHECK_FALSE(w.feasible());
  CHECK(w.feasibility_defect() == doctest::Approx(0.2));
  CHECK_THROWS_AS(w.require_feasible(), ParamError);

  w.constraint = WeightConstraint::L2Sphere;
  w.mu << 0.6, 0.8;
  CHECK(w.feasible());
  w.mu << -0.6, 0.8;
  CHECK_FALSE(w.feasible());

  w.constraint = WeightConstraint::L2SphereSigned;
  CHECK(w.feasible());
  w.mu << 0.5, 0.5;
  CHECK_FALSE(w.feasible());
}

TEST_CASE("build_dictionary fixes the diagonal ceiling") {
  SUBCASE("gaussian diagonal is 1") {
    const KernelDictionary dict =
        build_dictionary(random_sample(3, 5, 2), {KernelSpec::gaussian(0.4)});
    CHECK(dict.kernel_ceiling_r2() == 1.0);
  }
  SUBCASE("linear ceiling is the max squared norm") {
    Eigen::MatrixXd x(2, 2);
    x << 3, 0, 1, 1;
    const KernelDictionary dict = build_dictionary(Sample(x), {KernelSpec::linear()});
    CHECK(dict.kernel_ceiling_r2() == 9.0);
  }
  SUBCASE("user ceiling below the sample max is rejected") {
    CHECK_THROWS_AS(build_dictionary(random_sample(3, 5, 2), {KernelSpec::gaussian(0.4)},
                                     CeilingPolicy::UserValue, 0.5),
                    ParamError);
  }
  SUBCASE("user ceiling at or above the max is kept") {
    const KernelDictionary dict = build_dictionary(
        random_sample(3, 5, 2), {KernelSpec::gaussian(0.4)}, CeilingPolicy::UserValue, 2.5);
    CHECK(dict.kernel_ceiling_r2() == 2.5);
  }
  SUBCASE("duplicate kernel names are rejected") {
    CHECK_THROWS_AS(build_dictionary(random_sample(3, 5, 2),
                                     {KernelSpec::gaussian(0.4, "k"), KernelSpec::linear("k")}),
                    ParamError);
  }
}

TEST_CASE("built dictionaries satisfy the trace ceiling inequality") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const KernelDictionary dict = random_dictionary(seed, 10, 6);
    for (int k = 0; k < dict.p(); ++k)
      CHECK(dict.gram(k).trace() <=
            dict.m() * dict.kernel_ceiling_r2() * (1.0 + 1e-12));
  }
}

TEST_CASE("combine takes weighted sums with exact special cases") {
  const Sample sample = random_sample(7, 6, 2);
  const KernelDictionary dict =
      build_dictionary(sample, {KernelSpec::linear("a"), KernelSpec::gaussian(0.9, "b")});

  SUBCASE("vertex weight returns the first Gram exactly") {
    CombinationWeights w{Eigen::Vector2d(1.0, 0.0), WeightConstraint::L1Simplex};
    CHECK(combine(dict, w).entries() == dict.gram(0).entries());
  }
  SUBCASE("averaging identical grams reproduces them") {
    const KernelDictionary twin = build_dictionary(
        sample, {KernelSpec::gaussian(0.9, "a"), KernelSpec::gaussian(0.9, "b")});
    CombinationWeights w{Eigen::Vector2d(0.5, 0.5), WeightConstraint::L1Simplex};
    CHECK(combine(twin, w).entries() == twin.gram(0).entries());
  }
  SUBCASE("infeasible weights are rejected") {
    CombinationWeights w{Eigen::Vector2d(0.6, 0.6), WeightConstraint::L1Simplex};
    CHECK_THROWS_AS(combine(dict, w), ParamError);
    CHECK_NOTHROW(combine_raw(dict, w.mu));
  }
  SUBCASE("combined trace is the weighted trace sum") {
    CombinationWeights w{Eigen::Vector2d(0.3, 0.7), WeightConstraint::L1Simplex};
    const GramMatrix g = combine(dict, w);
    CHECK(g.trace() ==
          doctest::Approx(0.3 * dict.gram(0).trace() + 0.7 * dict.gram(1).trace())
              .epsilon(1e-15));
  }
}

TEST_CASE("synthetic identity and ones dictionaries are exact") {
  const KernelDictionary id = test::identity_dictionary(4);
  CHECK(id.gram(0).entries() == Eigen::MatrixXd::Identity(4, 4));
  const KernelDictionary ones = test::ones_dictionary(3);
  CHECK(ones.gram(0).entries() == Eigen::MatrixXd::Ones(3, 3));
}
