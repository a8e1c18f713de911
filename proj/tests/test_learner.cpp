#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <vector>

#include "kernbound/bounds.hpp"
#include "kernbound/errors.hpp"
#include "kernbound/io.hpp"
#include "kernbound/learner.hpp"
#include "kernbound/synthetic.hpp"
#include "test_support.hpp"

using namespace kernbound;

namespace {

KernelDictionary blob_dictionary(const Sample& sample) {
  return build_dictionary(sample, {KernelSpec::gaussian(0.1, "narrow"),
                                   KernelSpec::gaussian(1.0, "medium"),
                                   KernelSpec::gaussian(10.0, "wide")});
}

std::vector<Eigen::MatrixXd> self_cross_grams(const Sample& sample,
                                              const KernelDictionary& dict) {
  std::vector<Eigen::MatrixXd> grams;
  for (const KernelSpec& spec : dict.specs())
    grams.push_back(compute_cross_gram(sample, sample, spec));
  return grams;
}

double training_accuracy(const Model& model, const Sample& sample,
                         const KernelDictionary& dict) {
  const Eigen::VectorXd scores = predict(model, self_cross_grams(sample, dict));
  int correct = 0;
  for (int i = 0; i < sample.size(); ++i)
    if (sample.labels()[i] * scores(i) > 0.0) ++correct;
  return static_cast<double>(correct) / sample.size();
}

}  // namespace

TEST_CASE("training options validate their ranges") {
  TrainOptions options;
  CHECK_NOTHROW(options.validate());
  options.reg_c = 0.0;
  CHECK_THROWS_AS(options.validate(), ParamError);
  options.reg_c = 1.0;
  options.max_outer = 0;
  CHECK_THROWS_AS(options.validate(), ParamError);
  options.max_outer = 50;
  options.tol = 0.0;
  CHECK_THROWS_AS(options.validate(), ParamError);
  options.tol = 1e-6;
  options.max_inner = 0;
  CHECK_THROWS_AS(options.validate(), ParamError);
  options.max_inner = 500;
  options.inner_tol = -1.0;
  CHECK_THROWS_AS(options.validate(), ParamError);
}

TEST_CASE("a separable pair trains to zero margin loss") {
  Eigen::MatrixXd points(2, 1);
  points << 1.0, -1.0;
  const Sample sample(points, std::vector<int>{1, -1});
  const KernelDictionary dict = build_dictionary(sample, {KernelSpec::linear()});
  const Model model = train(sample, dict, BoundFamily::L1, TrainOptions{});

  CHECK(model.mu.mu.size() == 1);
  CHECK(model.mu.mu(0) == 1.0);
  CHECK(model.converged);
  CHECK(model.train_sample_ref == hash_hex(sample_hash(sample)));

  const Eigen::VectorXd scores =
      dict.gram(0).entries() * model.alpha;
  CHECK(scores(0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(scores(1) == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(margin_loss(scores, sample.labels(), 0.1) == 0.0);
}

TEST_CASE("blob training improves the objective and fits the sample") {
  const Sample sample = two_blobs(42, 60);
  const KernelDictionary dict = blob_dictionary(sample);
  const Model model = train(sample, dict, BoundFamily::L1, TrainOptions{});

  REQUIRE(model.objective_log.size() >= 1);
  for (size_t i = 1; i < model.objective_log.size(); ++i)
    CHECK(model.objective_log[i] <= model.objective_log[i - 1]);
  CHECK(model.mu.constraint == WeightConstraint::L1Simplex);
  CHECK(model.mu.feasible(1e-9));
  CHECK(training_accuracy(model, sample, dict) >= 0.9);

  SUBCASE("the sphere family trains too") {
    const Model l2 = train(sample, dict, BoundFamily::L2, TrainOptions{});
    CHECK(l2.mu.constraint == WeightConstraint::L2Sphere);
    CHECK(l2.mu.feasible(1e-9));
    CHECK(training_accuracy(l2, sample, dict) >= 0.9);
  }
}

TEST_CASE("prediction applies the weighted cross-Gram stack") {
  const Sample sample = two_blobs(3, 20);
  const KernelDictionary dict = blob_dictionary(sample);
  const Model model = train(sample, dict, BoundFamily::L1, TrainOptions{});

  SUBCASE("querying the training points matches the combined Gram") {
    const Eigen::VectorXd via_predict =
        predict(model, self_cross_grams(sample, dict));
    const Eigen::VectorXd via_combined =
        combine(dict, model.mu).entries() * model.alpha;
    for (int i = 0; i < sample.size(); ++i)
      CHECK(via_predict(i) == doctest::Approx(via_combined(i)).epsilon(1e-12));
  }
  SUBCASE("zero coefficients give zero scores") {
    Model zeroed = model;
    zeroed.alpha.setZero();
    const Eigen::VectorXd scores = predict(zeroed, self_cross_grams(sample, dict));
    CHECK(scores.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("a vertex weight uses a single kernel") {
    Model vertex = model;
    vertex.mu.mu.setZero();
    vertex.mu.mu(2) = 1.0;
    const Eigen::VectorXd scores = predict(vertex, self_cross_grams(sample, dict));
    const Eigen::VectorXd direct = dict.gram(2).entries() * model.alpha;
    for (int i = 0; i < sample.size(); ++i)
      CHECK(scores(i) == doctest::Approx(direct(i)).epsilon(1e-14));
  }
  SUBCASE("shape validation") {
    CHECK_THROWS_AS(predict(model, {}), ParamError);
    std::vector<Eigen::MatrixXd> wrong(3, Eigen::MatrixXd::Zero(4, 5));
    CHECK_THROWS_AS(predict(model, wrong), ParamError);
  }
}

TEST_CASE("margin loss counts boundary points as violations") {
  Eigen::VectorXd scores(3);
  scores << 1.0, 0.25, -0.5;
  const std::vector<int> labels{1, 1, 1};
  CHECK(margin_loss(scores, labels, 0.5) == doctest::Approx(2.0 / 3.0));

  Eigen::VectorXd boundary(1);
  boundary << 0.5;
  CHECK(margin_loss(boundary, {1}, 0.5) == 1.0);
  CHECK(margin_loss(boundary, {1}, 0.25) == 0.0);

  Eigen::VectorXd comfortable(4);
  comfortable << 1.0, 1.0, -1.0, -1.0;
  CHECK(margin_loss(comfortable, {1, 1, -1, -1}, 0.5) == 0.0);

  SUBCASE("loss is nondecreasing in the margin parameter") {
    Eigen::VectorXd mixed(5);
    mixed << 2.0, 0.9, 0.4, -0.1, -2.0;
    const std::vector<int> y{1, 1, 1, 1, 1};
    double previous = 0.0;
    for (double rho : {0.05, 0.3, 0.5, 1.0, 3.0}) {
      const double current = margin_loss(mixed, y, rho);
      CHECK(current >= previous);
      previous = current;
    }
  }
  SUBCASE("validation") {
    Eigen::VectorXd empty;
    CHECK_THROWS_AS(margin_loss(empty, {}, 0.5), ParamError);
    CHECK_THROWS_AS(margin_loss(scores, {1, 1}, 0.5), ParamError);
    CHECK_THROWS_AS(margin_loss(scores, labels, 0.0), ParamError);
  }
}

TEST_CASE("bound choices render stable names") {
  BoundChoice trace;
  trace.kind = BoundChoice::Kind::TraceR;
  trace.r = 4;
  CHECK(trace.render() == "traceR(4)");
  CHECK(BoundChoice{}.render() == "ceiling");
  BoundChoice exact;
  exact.kind = BoundChoice::Kind::EmpiricalExact;
  CHECK(exact.render() == "empiricalExact");
  BoundChoice mc;
  mc.kind = BoundChoice::Kind::EmpiricalMc;
  CHECK(mc.render() == "empiricalMC");
}

TEST_CASE("certificates decompose into the three terms") {
  const Sample sample = two_blobs(7, 100);
  const KernelDictionary dict = blob_dictionary(sample);
  const Model model = train(sample, dict, BoundFamily::L1, TrainOptions{});
  const double rho_max = admissible_rho_max(model, dict);
  REQUIRE(rho_max > 0.0);
  const double rho = 0.5 * rho_max;

  SUBCASE("the admissible margin inverts the hypothesis norm") {
    const double q = quadratic_form(combine(dict, model.mu), model.alpha);
    CHECK(rho_max == 1.0 / std::sqrt(q));
  }
  SUBCASE("the ceiling certificate pins every field") {
    const Certificate cert =
        certify(model, sample, dict, MarginConfig{rho, 0.01}, BoundChoice{});
    CHECK(cert.bound_choice == "ceiling");
    CHECK(cert.m == 100);
    CHECK(cert.p == 3);
    CHECK(cert.rho == rho);
    CHECK(cert.delta == 0.01);
    CHECK(cert.dictionary_hash == dictionary_hash(dict));
    CHECK_FALSE(cert.seed.has_value());
    const double ceiling =
        *ceiling_bound(dict.p(), dict.kernel_ceiling_r2(), rho, dict.m(),
                       BoundFamily::L1);
    CHECK(cert.complexity_term == 2.0 * ceiling);
    CHECK(cert.confidence_term == 0.32552472614374584);
    CHECK(cert.total ==
          cert.margin_loss + cert.complexity_term + cert.confidence_term);
  }
  SUBCASE("trace and Monte Carlo choices are wired through") {
    BoundChoice trace;
    trace.kind = BoundChoice::Kind::TraceR;
    trace.r = 4;
    const Certificate via_trace =
        certify(model, sample, dict, MarginConfig{rho, 0.05}, trace);
    CHECK(via_trace.bound_choice == "traceR(4)");
    CHECK(via_trace.complexity_term ==
          2.0 * trace_bound(dict.traces(), dict.m(), rho, 4, BoundFamily::L1));

    BoundChoice mc;
    mc.kind = BoundChoice::Kind::EmpiricalMc;
    mc.mc_trials = 5000;
    mc.mc_seed = 11;
    const Certificate via_mc =
        certify(model, sample, dict, MarginConfig{rho, 0.05}, mc);
    CHECK(via_mc.seed == 11);
    CHECK(via_mc.complexity_term ==
          2.0 * estimate_mc(dict, HypothesisFamily{FamilyTag::L1, rho}, 5000, 11)
                    .value);
  }
  SUBCASE("margins beyond the admissible maximum are rejected") {
    try {
      certify(model, sample, dict, MarginConfig{1.01 * rho_max, 0.05},
              BoundChoice{});
      FAIL("expected a margin rejection");
    } catch (const ParamError& e) {
      CHECK(std::string(e.what()).find("largest admissible rho") !=
            std::string::npos);
    }
  }
}

TEST_CASE("the exact empirical certificate undercuts the closed forms") {
  const Sample sample = two_blobs(9, 12);
  const KernelDictionary dict = build_dictionary(
      sample, {KernelSpec::gaussian(0.5, "a"), KernelSpec::gaussian(2.0, "b")});
  const Model model = train(sample, dict, BoundFamily::L1, TrainOptions{});
  const double rho = 0.5 * admissible_rho_max(model, dict);
  const MarginConfig config{rho, 0.05};

  BoundChoice exact;
  exact.kind = BoundChoice::Kind::EmpiricalExact;
  const Certificate empirical = certify(model, sample, dict, config, exact);

  BoundChoice trace;
  trace.kind = BoundChoice::Kind::TraceR;
  const Certificate via_trace = certify(model, sample, dict, config, trace);
  const Certificate via_ceiling =
      certify(model, sample, dict, config, BoundChoice{});

  CHECK(empirical.complexity_term <= via_trace.complexity_term * (1.0 + 1e-9));
  CHECK(empirical.complexity_term <= via_ceiling.complexity_term * (1.0 + 1e-9));
  CHECK(empirical.margin_loss == via_trace.margin_loss);
}

TEST_CASE("the non-loss certificate terms shrink with the sample") {
  const Sample small = two_blobs(5, 50);
  const Sample large = two_blobs(5, 200);
  const KernelDictionary small_dict = blob_dictionary(small);
  const KernelDictionary large_dict = blob_dictionary(large);
  const Model small_model = train(small, small_dict, BoundFamily::L1, TrainOptions{});
  const Model large_model = train(large, large_dict, BoundFamily::L1, TrainOptions{});
  const double rho = 0.8 * std::min(admissible_rho_max(small_model, small_dict),
                                    admissible_rho_max(large_model, large_dict));
  const Certificate c_small =
      certify(small_model, small, small_dict, MarginConfig{rho, 0.05}, BoundChoice{});
  const Certificate c_large =
      certify(large_model, large, large_dict, MarginConfig{rho, 0.05}, BoundChoice{});
  CHECK(c_large.confidence_term < c_small.confidence_term);
  CHECK(c_large.complexity_term < c_small.complexity_term);
  CHECK(c_large.complexity_term + c_large.confidence_term <
        c_small.complexity_term + c_small.confidence_term);
}

TEST_CASE("models survive a JSON round trip bit for bit") {
  const Sample sample = two_blobs(13, 30);
  const KernelDictionary dict = blob_dictionary(sample);
  const Model model = train(sample, dict, BoundFamily::L1, TrainOptions{});

  const nlohmann::json encoded = to_json(model);
  const Model decoded = model_from_json(nlohmann::json::parse(encoded.dump()));

  CHECK(decoded.family == model.family);
  CHECK(decoded.mu.constraint == model.mu.constraint);
  REQUIRE(decoded.mu.mu.size() == model.mu.mu.size());
  for (int k = 0; k < model.mu.mu.size(); ++k)
    CHECK(decoded.mu.mu(k) == model.mu.mu(k));
  REQUIRE(decoded.alpha.size() == model.alpha.size());
  for (int i = 0; i < model.alpha.size(); ++i)
    CHECK(decoded.alpha(i) == model.alpha(i));
  CHECK(decoded.train_sample_ref == model.train_sample_ref);
  REQUIRE(decoded.kernel_specs.size() == model.kernel_specs.size());
  for (size_t k = 0; k < model.kernel_specs.size(); ++k) {
    CHECK(decoded.kernel_specs[k].kind == model.kernel_specs[k].kind);
    CHECK(decoded.kernel_specs[k].gamma == model.kernel_specs[k].gamma);
  }
}

TEST_CASE("training rejects unusable samples") {
  Eigen::MatrixXd points(3, 1);
  points << 0.0, 1.0, 2.0;
  const Sample unlabeled(points);
  const KernelDictionary dict =
      build_dictionary(unlabeled, {KernelSpec::linear()});
  CHECK_THROWS_AS(train(unlabeled, dict, BoundFamily::L1, TrainOptions{}),
                  ParamError);

  const Sample one_sided(points, std::vector<int>{1, 1, 1});
  CHECK_THROWS_AS(train(one_sided, dict, BoundFamily::L1, TrainOptions{}),
                  DataError);

  const Sample mismatched = two_blobs(1, 10);
  CHECK_THROWS_AS(train(mismatched, dict, BoundFamily::L1, TrainOptions{}),
                  ParamError);
}
