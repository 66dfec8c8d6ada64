#include <cmath>

#include "doctest.h"
#include "partwise/error.hpp"
#include "partwise/rng.hpp"
#include "partwise/svm.hpp"

using namespace partwise;

namespace {

double kernel_sum(const SvmModel& m, const SvmInput& x) {
    double f = m.bias;
    for (std::size_t i = 0; i < m.support_vectors.size(); ++i) {
        const SvmInput d = x - m.support_vectors[i];
        f += m.alphas[i] * std::exp(-m.gamma * (d.x() * d.x() + d.y() * d.y() + d.z() * d.z()));
    }
    return f;
}

/// Recomputes KKT violations from the model alone: each training point either
/// is a support vector (match by value) with 0 < |alpha| <= C, or has alpha 0.
double max_kkt_violation(const SvmModel& m, const std::vector<SvmInput>& pts, const std::vector<int>& ys) {
    double worst = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        double a = 0.0;
        for (std::size_t j = 0; j < m.support_vectors.size(); ++j)
            if (m.support_vectors[j] == pts[i]) a = std::abs(m.alphas[j]);
        const double yf = ys[i] * kernel_sum(m, pts[i]);
        double v = 0.0;
        if (a <= 1e-12) {
            v = std::max(0.0, 1.0 - yf);
        } else if (a >= m.C - 1e-12) {
            v = std::max(0.0, yf - 1.0);
        } else {
            v = std::abs(yf - 1.0);
        }
        worst = std::max(worst, v);
    }
    return worst;
}

}  // namespace

TEST_CASE("two points become support vectors") {
    const std::vector<SvmInput> pts = {{0, 0, 0}, {1, 1, 1}};
    const std::vector<int> ys = {1, -1};
    const SvmTraining t = train_svm(pts, ys, {.C = 10.0, .gamma = 1.0});
    CHECK(t.model.support_vectors.size() == 2);
    CHECK(predict_svm(t.model, pts[0]).label == 1);
    CHECK(predict_svm(t.model, pts[1]).label == -1);
    for (double a : t.model.alphas) CHECK(std::abs(a) <= 10.0 + 1e-12);
}

TEST_CASE("RBF separates XOR") {
    const std::vector<SvmInput> pts = {{0, 0, 0}, {1, 1, 0}, {1, 0, 0}, {0, 1, 0}};
    const std::vector<int> ys = {1, 1, -1, -1};
    const SvmTraining t = train_svm(pts, ys, {.C = 10.0, .gamma = 1.0});
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const SvmPrediction p = predict_svm(t.model, pts[i]);
        CHECK(p.label == ys[i]);
        CHECK(p.decision * ys[i] > 0.0);
    }
}

TEST_CASE("KKT residuals at convergence") {
    Rng rng(10);
    std::vector<SvmInput> pts;
    std::vector<int> ys;
    for (int i = 0; i < 150; ++i) {
        const int y = rng.uniform() < 0.4 ? 1 : -1;
        pts.push_back(SvmInput(rng.normal(y * 0.4, 0.5), rng.normal(0, 0.5), rng.normal(0, 0.5)));
        ys.push_back(y);
    }
    for (const double C : {0.1, 1.0, 5.2}) {
        const SvmTraining t = train_svm(pts, ys, {.C = C, .gamma = 2.0, .tol = 1e-4});
        CHECK(t.max_kkt_residual <= 1e-3);
        CHECK(t.kkt_residuals.size() == pts.size());
        CHECK(max_kkt_violation(t.model, pts, ys) <= 1e-3);
        for (double a : t.model.alphas) CHECK(std::abs(a) <= C + 1e-12);
    }
}

TEST_CASE("oversampling balances the minority") {
    Rng rng(11);
    std::vector<SvmInput> pts;
    std::vector<int> ys;
    for (int i = 0; i < 60; ++i) {
        pts.push_back(SvmInput(rng.normal(0, 1), rng.normal(0, 1), 0));
        ys.push_back(-1);
    }
    for (int i = 0; i < 5; ++i) {
        pts.push_back(SvmInput(rng.normal(3, 0.2), rng.normal(0, 0.2), 0));
        ys.push_back(1);
    }
    const SvmTraining t = train_svm(pts, ys, {.C = 5.2, .gamma = 1.0, .oversample_minority = true, .seed = 3});
    CHECK(t.kkt_residuals.size() == 120);
    CHECK(predict_svm(t.model, SvmInput(3, 0, 0)).label == 1);
    CHECK(predict_svm(t.model, SvmInput(-1, 0, 0)).label == -1);
    const SvmTraining u = train_svm(pts, ys, {.C = 5.2, .gamma = 1.0, .oversample_minority = true, .seed = 3});
    CHECK(u.model == t.model);
}

TEST_CASE("predict_svm") {
    SvmModel m{{SvmInput(0, 0, 0), SvmInput(2, 0, 0)}, {3.0, -1.0}, -0.5, 72.0, 5.0};
    CHECK(predict_svm(m, SvmInput(0, 0, 0)).label == 1);
    CHECK(predict_svm(m, SvmInput(2, 0, 0)).label == -1);
    SvmModel zero{{}, {}, 0.0, 1.0, 1.0};
    CHECK(predict_svm(zero, SvmInput(1, 2, 3)).label == 1);

    Rng rng(12);
    for (int t = 0; t < 50; ++t) {
        SvmModel r;
        r.gamma = rng.uniform(0.1, 5);
        r.bias = rng.normal(0, 1);
        for (int i = 0; i < 6; ++i) {
            r.support_vectors.push_back(SvmInput(rng.normal(0, 1), rng.normal(0, 1), rng.normal(0, 1)));
            r.alphas.push_back(rng.normal(0, 1));
        }
        const SvmInput x(rng.normal(0, 1), rng.normal(0, 1), rng.normal(0, 1));
        CHECK(predict_svm(r, x).decision == doctest::Approx(kernel_sum(r, x)).epsilon(1e-12));
    }
}

TEST_CASE("large gamma predicts the training label") {
    Rng rng(13);
    std::vector<SvmInput> pts;
    std::vector<int> ys;
    for (int i = 0; i < 40; ++i) {
        pts.push_back(SvmInput(rng.uniform(), rng.uniform(), rng.uniform()));
        ys.push_back(rng.uniform() < 0.5 ? 1 : -1);
    }
    const SvmTraining t = train_svm(pts, ys, {.C = 100.0, .gamma = 1e4});
    for (std::size_t i = 0; i < pts.size(); ++i) CHECK(predict_svm(t.model, pts[i]).label == ys[i]);
}

TEST_CASE("guards and JSON") {
    const std::vector<SvmInput> pts = {{0, 0, 0}, {1, 1, 1}};
    CHECK_THROWS_AS(train_svm(pts, std::vector<int>{1, 1}, {}), TrainingError);
    CHECK_THROWS(train_svm(pts, std::vector<int>{1, 0}, {}));
    CHECK_THROWS(train_svm(pts, std::vector<int>{1}, {}));
    const SvmModel m = train_svm(pts, std::vector<int>{1, -1}, {.C = 0.1, .gamma = 72}).model;
    CHECK(svm_model_from_json(Json::parse(svm_model_to_json(m).dump())) == m);
}
