#include "echoform/classify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numeric>
#include <random>

namespace echoform {

namespace {

double logistic(double z) {
    if (z >= 0) {
        const double e = std::exp(-z);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

void check_both_classes(const Eigen::VectorXi& y) {
    bool pos = false, neg = false;
    for (int i = 0; i < y.size(); ++i) (y[i] > 0 ? pos : neg) = true;
    if (!pos || !neg) throw ParameterError("training set must contain both classes");
}

}  // namespace

MLPModel make_mlp(const std::vector<int>& layer_sizes, std::uint64_t seed, double dropout_p) {
    if (layer_sizes.size() < 2) throw ParameterError("make_mlp: need at least two layers");
    MLPModel m;
    m.layer_sizes = layer_sizes;
    m.dropout_p = dropout_p;
    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        const int fan_in = layer_sizes[l];
        const int fan_out = layer_sizes[l + 1];
        const double bound = std::sqrt(6.0 / fan_in);
        std::uniform_real_distribution<double> u(-bound, bound);
        Eigen::MatrixXd w(fan_out, fan_in);
        for (int i = 0; i < fan_out; ++i)
            for (int j = 0; j < fan_in; ++j) w(i, j) = u(rng);
        m.weights.push_back(std::move(w));
        m.biases.push_back(Eigen::VectorXd::Zero(fan_out));
    }
    return m;
}

double mlp_forward(const MLPModel& model, const Eigen::VectorXd& x, ForwardMode mode,
                   std::uint64_t seed) {
    if (x.size() != model.layer_sizes.front())
        throw ParameterError("mlp_forward: input size mismatch");
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution keep(1.0 - model.dropout_p);

    Eigen::VectorXd a = x;
    const std::size_t n_layers = model.weights.size();
    for (std::size_t l = 0; l < n_layers; ++l) {
        Eigen::VectorXd z = model.weights[l] * a + model.biases[l];
        if (l + 1 == n_layers) return logistic(z(0));
        a = z.cwiseMax(0.0);
        if (mode == ForwardMode::train) {
            const double scale = 1.0 / (1.0 - model.dropout_p);
            for (int i = 0; i < a.size(); ++i) a(i) = keep(rng) ? a(i) * scale : 0.0;
        }
    }
    return 0.0;  // unreachable
}

namespace {

// Forward + backward over a batch; masks[l] empty means no dropout at layer l.
MLPGradients batch_gradients(const MLPModel& model, const Eigen::MatrixXd& X,
                             const Eigen::VectorXi& y,
                             const std::vector<Eigen::MatrixXd>& masks) {
    const int N = static_cast<int>(X.rows());
    const std::size_t n_layers = model.weights.size();

    std::vector<Eigen::MatrixXd> activations;  // activations[l]: (N x width_l)
    activations.push_back(X);
    Eigen::VectorXd probs(N);
    for (std::size_t l = 0; l < n_layers; ++l) {
        Eigen::MatrixXd z = activations.back() * model.weights[l].transpose();
        z.rowwise() += model.biases[l].transpose();
        if (l + 1 == n_layers) {
            for (int i = 0; i < N; ++i) probs(i) = logistic(z(i, 0));
            break;
        }
        Eigen::MatrixXd a = z.cwiseMax(0.0);
        if (!masks.empty() && masks[l].size() > 0) a = a.cwiseProduct(masks[l]);
        activations.push_back(std::move(a));
    }

    MLPGradients g;
    g.d_weights.resize(n_layers);
    g.d_biases.resize(n_layers);

    double loss = 0.0;
    Eigen::MatrixXd delta(N, 1);  // dL/dz at the output
    for (int i = 0; i < N; ++i) {
        const double p = std::clamp(probs(i), 1e-12, 1.0 - 1e-12);
        const double t = y(i) > 0 ? 1.0 : 0.0;
        loss += -(t * std::log(p) + (1.0 - t) * std::log(1.0 - p));
        delta(i, 0) = (probs(i) - t) / N;
    }
    g.loss = loss / N;

    for (int l = static_cast<int>(n_layers) - 1; l >= 0; --l) {
        g.d_weights[l] = delta.transpose() * activations[l];
        g.d_biases[l] = delta.colwise().sum().transpose();
        if (l > 0) {
            Eigen::MatrixXd da = delta * model.weights[l];  // dL/da_{l}
            if (!masks.empty() && masks[l - 1].size() > 0) da = da.cwiseProduct(masks[l - 1]);
            // rectifier gate: activations[l] > 0 iff pre-activation > 0
            delta = da.cwiseProduct(
                (activations[l].array() > 0.0).cast<double>().matrix());
        }
    }
    return g;
}

}  // namespace

MLPGradients mlp_loss_and_gradients(const MLPModel& model, const Eigen::MatrixXd& X,
                                    const Eigen::VectorXi& y) {
    if (X.cols() != model.layer_sizes.front())
        throw ParameterError("mlp_loss_and_gradients: input width mismatch");
    return batch_gradients(model, X, y, {});
}

MLPModel mlp_train(const Eigen::MatrixXd& train_X, const Eigen::VectorXi& train_y,
                   const Eigen::MatrixXd& val_X, const Eigen::VectorXi& val_y,
                   const MLPHyper& hyper, std::uint64_t seed) {
    check_both_classes(train_y);
    const int N = static_cast<int>(train_X.rows());
    const int D = static_cast<int>(train_X.cols());

    std::vector<int> sizes;
    sizes.push_back(D);
    for (int h : hyper.hidden) sizes.push_back(h);
    sizes.push_back(1);

    MLPModel model = make_mlp(sizes, seed, hyper.dropout_p);
    std::mt19937_64 rng(seed ^ 0xd1b54a32d192ed03ull);

    // Adam state
    const std::size_t n_layers = model.weights.size();
    std::vector<Eigen::MatrixXd> mW(n_layers), vW(n_layers);
    std::vector<Eigen::VectorXd> mB(n_layers), vB(n_layers);
    for (std::size_t l = 0; l < n_layers; ++l) {
        mW[l] = Eigen::MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols());
        vW[l] = mW[l];
        mB[l] = Eigen::VectorXd::Zero(model.biases[l].size());
        vB[l] = mB[l];
    }
    const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
    long step = 0;

    auto accuracy = [&](const MLPModel& m, const Eigen::MatrixXd& X, const Eigen::VectorXi& y) {
        if (X.rows() == 0) return 0.0;
        int hits = 0;
        for (int i = 0; i < X.rows(); ++i) {
            const double p = mlp_forward(m, X.row(i).transpose(), ForwardMode::infer);
            if ((p >= 0.5) == (y(i) > 0)) ++hits;
        }
        return static_cast<double>(hits) / X.rows();
    };

    MLPModel best = model;
    double best_acc = -1.0;

    std::vector<int> order(N);
    std::iota(order.begin(), order.end(), 0);
    std::bernoulli_distribution keep(1.0 - hyper.dropout_p);
    const double keep_scale = 1.0 / (1.0 - hyper.dropout_p);

    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (int begin = 0; begin < N; begin += hyper.batch) {
            const int bs = std::min(hyper.batch, N - begin);
            Eigen::MatrixXd bX(bs, D);
            Eigen::VectorXi by(bs);
            for (int i = 0; i < bs; ++i) {
                bX.row(i) = train_X.row(order[begin + i]);
                by(i) = train_y(order[begin + i]);
            }
            std::vector<Eigen::MatrixXd> masks(n_layers - 1);
            for (std::size_t l = 0; l + 1 < n_layers; ++l) {
                masks[l].resize(bs, sizes[l + 1]);
                for (int i = 0; i < bs; ++i)
                    for (int j = 0; j < sizes[l + 1]; ++j)
                        masks[l](i, j) = keep(rng) ? keep_scale : 0.0;
            }

            MLPGradients g = batch_gradients(model, bX, by, masks);
            ++step;
            const double corr1 = 1.0 - std::pow(beta1, static_cast<double>(step));
            const double corr2 = 1.0 - std::pow(beta2, static_cast<double>(step));
            for (std::size_t l = 0; l < n_layers; ++l) {
                mW[l] = beta1 * mW[l] + (1.0 - beta1) * g.d_weights[l];
                vW[l] = beta2 * vW[l] + (1.0 - beta2) * g.d_weights[l].cwiseAbs2();
                mB[l] = beta1 * mB[l] + (1.0 - beta1) * g.d_biases[l];
                vB[l] = beta2 * vB[l] + (1.0 - beta2) * g.d_biases[l].cwiseAbs2();
                model.weights[l].array() -=
                    hyper.lr * (mW[l].array() / corr1) /
                    ((vW[l].array() / corr2).sqrt() + adam_eps);
                model.biases[l].array() -=
                    hyper.lr * (mB[l].array() / corr1) /
                    ((vB[l].array() / corr2).sqrt() + adam_eps);
            }
        }
        const double acc = accuracy(model, val_X, val_y);
        if (acc > best_acc) {
            best_acc = acc;
            best = model;
        }
    }
    return (val_X.rows() > 0) ? best : model;
}

// ----------------------------------------------------------------------------
// SVM
// ----------------------------------------------------------------------------

namespace {

double rbf(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double gamma) {
    return std::exp(-gamma * (a - b).squaredNorm());
}

}  // namespace

SVMModel svm_train(const Eigen::MatrixXd& X, const Eigen::VectorXi& y, double C, double gamma,
                   double tol) {
    check_both_classes(y);
    if (!(C > 0) || !(gamma > 0)) throw ParameterError("svm_train: C and gamma must be positive");
    const int N = static_cast<int>(X.rows());

    // Precomputed kernel matrix; N is a few hundred here.
    Eigen::MatrixXd K(N, N);
    for (int i = 0; i < N; ++i) {
        K(i, i) = 1.0;
        for (int j = i + 1; j < N; ++j) K(i, j) = K(j, i) = rbf(X.row(i), X.row(j), gamma);
    }

    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(N);
    double b = 0.0;
    // f_i cache (decision values), maintained incrementally.
    Eigen::VectorXd f = Eigen::VectorXd::Constant(N, 0.0);

    auto error = [&](int i) { return f(i) + b - static_cast<double>(y(i)); };

    auto take_step = [&](int i1, int i2) -> bool {
        if (i1 == i2) return false;
        const double y1 = y(i1), y2 = y(i2);
        const double a1 = alpha(i1), a2 = alpha(i2);
        const double E1 = error(i1), E2 = error(i2);
        const double s = y1 * y2;
        double L, H;
        if (s < 0) {
            L = std::max(0.0, a2 - a1);
            H = std::min(C, C + a2 - a1);
        } else {
            L = std::max(0.0, a1 + a2 - C);
            H = std::min(C, a1 + a2);
        }
        if (L >= H) return false;
        const double eta = K(i1, i1) + K(i2, i2) - 2.0 * K(i1, i2);
        double a2_new;
        if (eta > 1e-12) {
            a2_new = a2 + y2 * (E1 - E2) / eta;
            a2_new = std::clamp(a2_new, L, H);
        } else {
            // Degenerate curvature (duplicate points under the RBF kernel):
            // no strict descent direction along this pair, let other pairs work.
            return false;
        }
        if (std::abs(a2_new - a2) < 1e-12 * (a2_new + a2 + 1e-12)) return false;
        const double a1_new = a1 + s * (a2 - a2_new);

        // Bias update (Platt): keep KKT exact for the altered pair when unbound.
        const double b1 = b - E1 - y1 * (a1_new - a1) * K(i1, i1) - y2 * (a2_new - a2) * K(i1, i2);
        const double b2 = b - E2 - y1 * (a1_new - a1) * K(i1, i2) - y2 * (a2_new - a2) * K(i2, i2);
        double b_new;
        if (a1_new > 0 && a1_new < C)
            b_new = b1;
        else if (a2_new > 0 && a2_new < C)
            b_new = b2;
        else
            b_new = 0.5 * (b1 + b2);

        for (int k = 0; k < N; ++k)
            f(k) += y1 * (a1_new - a1) * K(i1, k) + y2 * (a2_new - a2) * K(i2, k);
        alpha(i1) = a1_new;
        alpha(i2) = a2_new;
        b = b_new;
        return true;
    };

    auto examine = [&](int i2) -> bool {
        const double y2 = y(i2), a2 = alpha(i2), E2 = error(i2);
        const double r2 = E2 * y2;
        if ((r2 < -tol && a2 < C) || (r2 > tol && a2 > 0)) {
            // Second choice: maximize |E1 - E2| over unbound points.
            int best = -1;
            double best_gap = 0.0;
            for (int k = 0; k < N; ++k) {
                if (alpha(k) <= 0 || alpha(k) >= C) continue;
                const double gap = std::abs(error(k) - E2);
                if (gap > best_gap) {
                    best_gap = gap;
                    best = k;
                }
            }
            if (best >= 0 && take_step(best, i2)) return true;
            for (int k = 0; k < N; ++k) {
                if (alpha(k) <= 0 || alpha(k) >= C) continue;
                if (take_step(k, i2)) return true;
            }
            for (int k = 0; k < N; ++k)
                if (take_step(k, i2)) return true;
        }
        return false;
    };

    bool examine_all = true;
    int changed = 1;
    int sweeps = 0;
    const int max_sweeps = 20000;
    while (changed > 0 || examine_all) {
        changed = 0;
        if (examine_all) {
            for (int i = 0; i < N; ++i) changed += examine(i) ? 1 : 0;
        } else {
            for (int i = 0; i < N; ++i)
                if (alpha(i) > 0 && alpha(i) < C) changed += examine(i) ? 1 : 0;
        }
        if (examine_all)
            examine_all = false;
        else if (changed == 0)
            examine_all = true;
        if (++sweeps > max_sweeps)
            throw NumericalError("svm_train: SMO failed to converge");
    }

    SVMModel model;
    model.C = C;
    model.gamma = gamma;
    model.bias = b;
    std::vector<int> sv;
    for (int i = 0; i < N; ++i)
        if (alpha(i) > 1e-10) sv.push_back(i);
    model.support_vectors.resize(static_cast<int>(sv.size()), X.cols());
    model.dual_coeffs.resize(static_cast<int>(sv.size()));
    for (std::size_t k = 0; k < sv.size(); ++k) {
        model.support_vectors.row(static_cast<int>(k)) = X.row(sv[k]);
        model.dual_coeffs(static_cast<int>(k)) = alpha(sv[k]) * y(sv[k]);
    }
    return model;
}

double svm_decision(const SVMModel& model, const Eigen::VectorXd& x) {
    if (x.size() != model.support_vectors.cols())
        throw ParameterError("svm_decision: dimension mismatch");
    double acc = model.bias;
    for (int i = 0; i < model.support_vectors.rows(); ++i)
        acc += model.dual_coeffs(i) * rbf(model.support_vectors.row(i).transpose(), x, model.gamma);
    return acc;
}

FillerClass svm_predict(const SVMModel& model, const Eigen::VectorXd& x) {
    return svm_decision(model, x) >= 0.0 ? FillerClass::air : FillerClass::water;
}

// ----------------------------------------------------------------------------
// Cross-validation
// ----------------------------------------------------------------------------

std::string CVReport::cell() const {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f ± %.2f", mean_pct, std_pct);
    return buf;
}

std::vector<int> stratified_folds(const std::vector<Descriptor>& dataset, int k,
                                  std::uint64_t seed) {
    std::vector<int> folds(dataset.size(), -1);
    std::mt19937_64 rng(seed);
    for (int cls = 0; cls < 2; ++cls) {
        std::vector<int> idx;
        for (std::size_t i = 0; i < dataset.size(); ++i) {
            if (!dataset[i].label) throw ParameterError("stratified_folds: unlabeled example");
            if ((*dataset[i].label == FillerClass::air) == (cls == 0)) idx.push_back(static_cast<int>(i));
        }
        if (static_cast<int>(idx.size()) < k)
            throw ParameterError("stratified_folds: fewer examples than folds in a class");
        std::shuffle(idx.begin(), idx.end(), rng);
        for (std::size_t j = 0; j < idx.size(); ++j) folds[idx[j]] = static_cast<int>(j) % k;
    }
    return folds;
}

namespace {

Eigen::MatrixXd to_matrix(const std::vector<Descriptor>& set) {
    if (set.empty()) return {};
    Eigen::MatrixXd X(static_cast<int>(set.size()), static_cast<int>(set.front().values.size()));
    for (std::size_t i = 0; i < set.size(); ++i)
        for (std::size_t j = 0; j < set[i].values.size(); ++j)
            X(static_cast<int>(i), static_cast<int>(j)) = set[i].values[j];
    return X;
}

Eigen::VectorXi to_labels(const std::vector<Descriptor>& set) {
    Eigen::VectorXi y(static_cast<int>(set.size()));
    for (std::size_t i = 0; i < set.size(); ++i)
        y(static_cast<int>(i)) = (*set[i].label == FillerClass::air) ? 1 : 0;
    return y;
}

// Seeded stratified split of (X, y) into outer/inner parts for model selection.
void stratified_split(const Eigen::MatrixXd& X, const Eigen::VectorXi& y, double holdout_fraction,
                      std::uint64_t seed, Eigen::MatrixXd& X_tr, Eigen::VectorXi& y_tr,
                      Eigen::MatrixXd& X_ho, Eigen::VectorXi& y_ho) {
    std::vector<int> tr, ho;
    std::mt19937_64 rng(seed);
    for (int cls = 0; cls <= 1; ++cls) {
        std::vector<int> idx;
        for (int i = 0; i < y.size(); ++i)
            if (y(i) == cls) idx.push_back(i);
        std::shuffle(idx.begin(), idx.end(), rng);
        const int n_ho = std::max(1, static_cast<int>(std::lround(holdout_fraction * idx.size())));
        for (std::size_t j = 0; j < idx.size(); ++j)
            (static_cast<int>(j) < n_ho ? ho : tr).push_back(idx[j]);
    }
    std::sort(tr.begin(), tr.end());
    std::sort(ho.begin(), ho.end());
    auto gather = [&](const std::vector<int>& rows, Eigen::MatrixXd& M, Eigen::VectorXi& v) {
        M.resize(static_cast<int>(rows.size()), X.cols());
        v.resize(static_cast<int>(rows.size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            M.row(static_cast<int>(i)) = X.row(rows[i]);
            v(static_cast<int>(i)) = y(rows[i]);
        }
    };
    gather(tr, X_tr, y_tr);
    gather(ho, X_ho, y_ho);
}

}  // namespace

ClassifierFactory make_mlp_factory(const MLPHyper& hyper, double val_fraction) {
    return [hyper, val_fraction](const Eigen::MatrixXd& X, const Eigen::VectorXi& y,
                                 std::uint64_t seed) -> TrainedClassifier {
        Eigen::MatrixXd X_tr, X_val;
        Eigen::VectorXi y_tr, y_val;
        stratified_split(X, y, val_fraction, seed ^ 0xa5a5a5a5ull, X_tr, y_tr, X_val, y_val);
        auto model = std::make_shared<MLPModel>(mlp_train(X_tr, y_tr, X_val, y_val, hyper, seed));
        return [model](const Eigen::VectorXd& x) {
            const double p = mlp_forward(*model, x, ForwardMode::infer);
            return p >= 0.5 ? FillerClass::air : FillerClass::water;
        };
    };
}

ClassifierFactory make_svm_factory(const SVMGrid& grid) {
    return [grid](const Eigen::MatrixXd& X, const Eigen::VectorXi& y,
                  std::uint64_t seed) -> TrainedClassifier {
        // gamma scaled by the mean feature variance of this training fold.
        double var = 0.0;
        for (int j = 0; j < X.cols(); ++j) {
            const double mu = X.col(j).mean();
            var += (X.col(j).array() - mu).square().mean();
        }
        var /= X.cols();
        const double gamma_base = 1.0 / (X.cols() * std::max(var, 1e-12));

        Eigen::VectorXi y_pm(y.size());
        for (int i = 0; i < y.size(); ++i) y_pm(i) = y(i) > 0 ? 1 : -1;

        Eigen::MatrixXd X_tr, X_ho;
        Eigen::VectorXi y_tr, y_ho;
        stratified_split(X, y, 0.2, seed ^ 0x5a5a5a5aull, X_tr, y_tr, X_ho, y_ho);
        Eigen::VectorXi y_tr_pm(y_tr.size());
        for (int i = 0; i < y_tr.size(); ++i) y_tr_pm(i) = y_tr(i) > 0 ? 1 : -1;

        double best_c = grid.c_grid.front(), best_g = gamma_base;
        double best_acc = -1.0;
        for (double c : grid.c_grid)
            for (double gs : grid.gamma_scale_grid) {
                const double g = gs * gamma_base;
                const SVMModel m = svm_train(X_tr, y_tr_pm, c, g, grid.tol);
                int hits = 0;
                for (int i = 0; i < X_ho.rows(); ++i) {
                    const FillerClass pred = svm_predict(m, X_ho.row(i).transpose());
                    if ((pred == FillerClass::air) == (y_ho(i) > 0)) ++hits;
                }
                const double acc = X_ho.rows() ? static_cast<double>(hits) / X_ho.rows() : 0.0;
                if (acc > best_acc) {
                    best_acc = acc;
                    best_c = c;
                    best_g = g;
                }
            }

        auto model = std::make_shared<SVMModel>(svm_train(X, y_pm, best_c, best_g, grid.tol));
        return [model](const Eigen::VectorXd& x) { return svm_predict(*model, x); };
    };
}

CVReport cross_validate(const std::vector<Descriptor>& dataset, const ClassifierFactory& factory,
                        int k, std::uint64_t seed, const std::string& classifier_name) {
    if (k < 2) throw ParameterError("cross_validate: need k >= 2");
    const std::vector<int> folds = stratified_folds(dataset, k, seed);

    CVReport report;
    report.classifier = classifier_name;
    report.descriptor = dataset.empty() ? "" : to_string(dataset.front().kind);

    for (int fold = 0; fold < k; ++fold) {
        std::vector<Descriptor> train, test;
        for (std::size_t i = 0; i < dataset.size(); ++i)
            (folds[i] == fold ? test : train).push_back(dataset[i]);

        standardize(train, test);  // training-fold statistics only
        const Eigen::MatrixXd X_tr = to_matrix(train);
        const Eigen::VectorXi y_tr = to_labels(train);
        const TrainedClassifier clf = factory(X_tr, y_tr, seed + static_cast<std::uint64_t>(fold));

        int hits = 0;
        for (const auto& d : test) {
            Eigen::VectorXd x(static_cast<int>(d.values.size()));
            for (std::size_t j = 0; j < d.values.size(); ++j) x(static_cast<int>(j)) = d.values[j];
            if (clf(x) == *d.label) ++hits;
        }
        report.fold_accuracy_pct.push_back(100.0 * hits / static_cast<double>(test.size()));
    }

    double mean = 0.0;
    for (double a : report.fold_accuracy_pct) mean += a;
    mean /= report.fold_accuracy_pct.size();
    double var = 0.0;
    for (double a : report.fold_accuracy_pct) var += (a - mean) * (a - mean);
    var /= report.fold_accuracy_pct.size();  // population convention
    report.mean_pct = mean;
    report.std_pct = std::sqrt(var);
    return report;
}

}  // namespace echoform
