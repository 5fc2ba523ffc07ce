#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <random>

#include "echoform/classify.hpp"
#include "oracles/svm_oracle.inc"

using namespace echoform;

TEST_CASE("zero-parameter MLP outputs logistic(0) = 0.5") {
    MLPModel m = make_mlp({4, 3, 1}, 1);
    for (auto& w : m.weights) w.setZero();
    for (auto& b : m.biases) b.setZero();
    const Eigen::VectorXd x = Eigen::VectorXd::Random(4);
    CHECK(mlp_forward(m, x, ForwardMode::infer) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("inference is deterministic, training mode is seed-deterministic") {
    const MLPModel m = make_mlp({6, 4, 3, 1}, 2);
    const Eigen::VectorXd x = Eigen::VectorXd::Random(6);
    CHECK(mlp_forward(m, x, ForwardMode::infer) == mlp_forward(m, x, ForwardMode::infer));
    CHECK(mlp_forward(m, x, ForwardMode::train, 9) == mlp_forward(m, x, ForwardMode::train, 9));
}

TEST_CASE("averaged dropout forwards approximate the deterministic forward") {
    // Inverted dropout: E[train forward] ~ infer forward. With one hidden
    // layer the relation is exact in the pre-activation; through the logistic
    // nonlinearity it holds within Monte-Carlo error for a well-scaled model.
    const MLPModel m = make_mlp({5, 16, 1}, 4);
    Eigen::VectorXd x(5);
    x << 0.3, -0.2, 0.8, -0.5, 0.1;
    double mean = 0.0;
    const int trials = 10000;
    for (int t = 0; t < trials; ++t) mean += mlp_forward(m, x, ForwardMode::train, 1000 + t);
    mean /= trials;
    CHECK(std::abs(mean - mlp_forward(m, x, ForwardMode::infer)) < 0.02);
}

TEST_CASE("analytic gradients match central finite differences") {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> g(0.0, 1.0);
    const double h = 1e-6;

    for (int point = 0; point < 5; ++point) {
        MLPModel m = make_mlp({4, 3, 3, 3, 3, 1}, 100 + point);
        // Freshly initialized biases are zero, which parks dead rectifier
        // units exactly on their kink where finite differences are one-sided.
        // Random nonzero biases move the check to a generic point.
        for (auto& b : m.biases)
            for (int i = 0; i < b.size(); ++i) b(i) = 0.3 * g(rng);
        Eigen::MatrixXd X(3, 4);
        Eigen::VectorXi y(3);
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 4; ++j) X(i, j) = g(rng);
            y(i) = (i % 2);
        }
        const MLPGradients grads = mlp_loss_and_gradients(m, X, y);

        double max_rel = 0.0;
        for (std::size_t l = 0; l < m.weights.size(); ++l) {
            for (int r = 0; r < m.weights[l].rows(); ++r)
                for (int c = 0; c < m.weights[l].cols(); ++c) {
                    MLPModel mp = m, mm = m;
                    mp.weights[l](r, c) += h;
                    mm.weights[l](r, c) -= h;
                    const double fd = (mlp_loss_and_gradients(mp, X, y).loss -
                                       mlp_loss_and_gradients(mm, X, y).loss) /
                                      (2.0 * h);
                    const double scale = std::max({std::abs(fd), std::abs(grads.d_weights[l](r, c)), 1e-8});
                    max_rel = std::max(max_rel, std::abs(fd - grads.d_weights[l](r, c)) / scale);
                }
            for (int r = 0; r < m.biases[l].size(); ++r) {
                MLPModel mp = m, mm = m;
                mp.biases[l](r) += h;
                mm.biases[l](r) -= h;
                const double fd = (mlp_loss_and_gradients(mp, X, y).loss -
                                   mlp_loss_and_gradients(mm, X, y).loss) /
                                  (2.0 * h);
                const double scale = std::max({std::abs(fd), std::abs(grads.d_biases[l](r)), 1e-8});
                max_rel = std::max(max_rel, std::abs(fd - grads.d_biases[l](r)) / scale);
            }
        }
        CHECK(max_rel <= 1e-5);
    }
}

TEST_CASE("MLP separates a linearly separable toy set") {
    std::mt19937_64 rng(10);
    std::normal_distribution<double> g(0.0, 0.3);
    Eigen::MatrixXd X(20, 2);
    Eigen::VectorXi y(20);
    for (int i = 0; i < 20; ++i) {
        const int label = i % 2;
        X(i, 0) = (label ? 2.0 : -2.0) + g(rng);
        X(i, 1) = (label ? 2.0 : -2.0) + g(rng);
        y(i) = label;
    }
    MLPHyper hyper;
    hyper.hidden = {8, 4};
    hyper.epochs = 200;
    hyper.batch = 4;
    hyper.dropout_p = 0.0;
    const MLPModel m = mlp_train(X, y, X, y, hyper, 5);
    for (int i = 0; i < 20; ++i) {
        const double p = mlp_forward(m, X.row(i).transpose(), ForwardMode::infer);
        CHECK((p > 0.5) == (y(i) == 1));
    }
}

TEST_CASE("MLP training is seed-deterministic") {
    Eigen::MatrixXd X(8, 3);
    Eigen::VectorXi y(8);
    std::mt19937_64 rng(21);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 3; ++j) X(i, j) = g(rng);
        y(i) = i % 2;
    }
    MLPHyper hyper;
    hyper.hidden = {4};
    hyper.epochs = 20;
    hyper.batch = 4;
    const MLPModel a = mlp_train(X, y, X, y, hyper, 31);
    const MLPModel b = mlp_train(X, y, X, y, hyper, 31);
    for (std::size_t l = 0; l < a.weights.size(); ++l) CHECK(a.weights[l] == b.weights[l]);

    Eigen::VectorXi ones = Eigen::VectorXi::Ones(8);
    CHECK_THROWS_AS(mlp_train(X, ones, X, ones, hyper, 1), ParameterError);
}

TEST_CASE("SVM decision values match the frozen QP oracle within 1e-3") {
    const int n = 10;
    Eigen::MatrixXd X(n, 2);
    Eigen::VectorXi y(n);
    for (int i = 0; i < n; ++i) {
        X(i, 0) = kSvmX[i][0];
        X(i, 1) = kSvmX[i][1];
        y(i) = kSvmY[i];
    }
    const SVMModel m = svm_train(X, y, kSvmC, kSvmGamma, 1e-5);
    for (int i = 0; i < n; ++i)
        CHECK(std::abs(svm_decision(m, X.row(i).transpose()) - kSvmDecision[i]) <= 1e-3);
}

TEST_CASE("RBF SVM solves XOR perfectly") {
    Eigen::MatrixXd X(4, 2);
    X << 0, 0, 0, 1, 1, 0, 1, 1;
    Eigen::VectorXi y(4);
    y << -1, 1, 1, -1;
    const SVMModel m = svm_train(X, y, 10.0, 1.0);
    for (int i = 0; i < 4; ++i) {
        const FillerClass c = svm_predict(m, X.row(i).transpose());
        CHECK(c == (y(i) > 0 ? FillerClass::air : FillerClass::water));
    }
}

TEST_CASE("duplicating every training point leaves the decision function unchanged") {
    const int n = 10;
    Eigen::MatrixXd X(n, 2), X2(2 * n, 2);
    Eigen::VectorXi y(n), y2(2 * n);
    for (int i = 0; i < n; ++i) {
        X(i, 0) = kSvmX[i][0];
        X(i, 1) = kSvmX[i][1];
        y(i) = kSvmY[i];
        X2.row(i) = X.row(i);
        X2.row(n + i) = X.row(i);
        y2(i) = y2(n + i) = y(i);
    }
    const SVMModel a = svm_train(X, y, kSvmC, kSvmGamma, 1e-5);
    const SVMModel b = svm_train(X2, y2, kSvmC, kSvmGamma, 1e-5);
    for (int i = 0; i < n; ++i) {
        const Eigen::VectorXd x = X.row(i).transpose();
        CHECK(svm_decision(a, x) == doctest::Approx(svm_decision(b, x)).epsilon(5e-3));
    }
}

TEST_CASE("margin support vectors classify as their own label; KKT satisfied") {
    const int n = 10;
    Eigen::MatrixXd X(n, 2);
    Eigen::VectorXi y(n);
    for (int i = 0; i < n; ++i) {
        X(i, 0) = kSvmX[i][0];
        X(i, 1) = kSvmX[i][1];
        y(i) = kSvmY[i];
    }
    const double tol = 1e-5;
    const SVMModel m = svm_train(X, y, kSvmC, kSvmGamma, tol);
    for (int i = 0; i < n; ++i) {
        const double d = svm_decision(m, X.row(i).transpose());
        // KKT: every point satisfies y f(x) >= 1 - tol unless its alpha is at
        // the box bound C.
        bool at_bound = false;
        for (int s = 0; s < m.support_vectors.rows(); ++s)
            if ((m.support_vectors.row(s) - X.row(i)).norm() < 1e-12 &&
                std::abs(std::abs(m.dual_coeffs(s)) - m.C) < 1e-9)
                at_bound = true;
        if (!at_bound) CHECK(y(i) * d >= 1.0 - 5e-3);
        // Margin SVs (y f ~ 1) classify as their own label.
        if (y(i) * d > tol) {
            const FillerClass c = svm_predict(m, X.row(i).transpose());
            CHECK(c == (y(i) > 0 ? FillerClass::air : FillerClass::water));
        }
    }
    // Deterministic prediction.
    const Eigen::VectorXd probe = X.row(0).transpose();
    CHECK(svm_decision(m, probe) == svm_decision(m, probe));
}

namespace {

std::vector<Descriptor> toy_dataset(int n, int length, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<Descriptor> set(n);
    for (int i = 0; i < n; ++i) {
        set[i].values.resize(length);
        const int label = i % 2;
        for (double& v : set[i].values) v = g(rng) + (label ? 1.5 : -1.5);
        set[i].label = label ? FillerClass::air : FillerClass::water;
    }
    return set;
}

}  // namespace

TEST_CASE("cross-validation harness: perfect and coin-flip stubs") {
    const auto data = toy_dataset(860, 8, 42);

    // A perfect stub reads the sign of the (shifted) features.
    ClassifierFactory perfect = [](const Eigen::MatrixXd&, const Eigen::VectorXi&, std::uint64_t) {
        return TrainedClassifier([](const Eigen::VectorXd& x) {
            return x.mean() > 0 ? FillerClass::air : FillerClass::water;
        });
    };
    const CVReport p = cross_validate(data, perfect, 3, 13, "stub");
    CHECK(p.mean_pct == doctest::Approx(100.0));
    CHECK(p.std_pct == doctest::Approx(0.0));
    CHECK(p.fold_accuracy_pct.size() == 3);

    // A seeded coin flip lands near 50% on balanced data.
    ClassifierFactory coin = [](const Eigen::MatrixXd&, const Eigen::VectorXi&, std::uint64_t seed) {
        auto rng = std::make_shared<std::mt19937_64>(seed);
        return TrainedClassifier([rng](const Eigen::VectorXd&) {
            return ((*rng)() & 1) ? FillerClass::air : FillerClass::water;
        });
    };
    const CVReport c = cross_validate(data, coin, 3, 13, "coin");
    CHECK(c.mean_pct > 45.0);
    CHECK(c.mean_pct < 55.0);
}

TEST_CASE("report cell uses the two-decimal mean-plus-minus-std format") {
    CVReport r;
    r.fold_accuracy_pct = {100.0, 97.9, 97.9};
    r.mean_pct = 98.6;
    r.std_pct = 1.31;
    CHECK(r.cell() == "98.60 ± 1.31");
}

TEST_CASE("stratified folds partition the data and balance the classes") {
    const auto data = toy_dataset(90, 4, 7);
    const std::vector<int> folds = stratified_folds(data, 3, 99);
    REQUIRE(folds.size() == data.size());
    int count[3] = {0, 0, 0}, air[3] = {0, 0, 0};
    for (std::size_t i = 0; i < folds.size(); ++i) {
        REQUIRE(folds[i] >= 0);
        REQUIRE(folds[i] < 3);
        ++count[folds[i]];
        if (data[i].label == FillerClass::air) ++air[folds[i]];
    }
    for (int f = 0; f < 3; ++f) {
        CHECK(count[f] == 30);
        CHECK(air[f] == 15);
    }
    // Same seed reproduces the assignment; different seed changes it.
    CHECK(stratified_folds(data, 3, 99) == folds);
    CHECK(stratified_folds(data, 3, 100) != folds);
}
