#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "echoform/features.hpp"

namespace echoform {

// ----------------------------------------------------------------------------
// Multilayer perceptron: 5 fully connected layers, rectifier hiddens, logistic
// output, inverted dropout p = 0.5 after every hidden layer during training.
// ----------------------------------------------------------------------------

struct MLPModel {
    std::vector<int> layer_sizes;            // e.g. {512, 256, 128, 64, 32, 1}
    std::vector<Eigen::MatrixXd> weights;    // weights[l]: (out x in)
    std::vector<Eigen::VectorXd> biases;
    double dropout_p = 0.5;
};

enum class ForwardMode { train, infer };

MLPModel make_mlp(const std::vector<int>& layer_sizes, std::uint64_t seed, double dropout_p = 0.5);

// Probability of the positive class. In train mode the dropout mask is drawn
// from `seed`; infer mode is deterministic.
double mlp_forward(const MLPModel& model, const Eigen::VectorXd& x, ForwardMode mode,
                   std::uint64_t seed = 0);

// Mean binary cross-entropy over a batch plus its analytic parameter gradients
// (dropout disabled). Exposed so gradients can be checked against finite
// differences independently of the trainer.
struct MLPGradients {
    double loss = 0.0;
    std::vector<Eigen::MatrixXd> d_weights;
    std::vector<Eigen::VectorXd> d_biases;
};
MLPGradients mlp_loss_and_gradients(const MLPModel& model, const Eigen::MatrixXd& X,
                                    const Eigen::VectorXi& y);

struct MLPHyper {
    int epochs = 150;
    int batch = 32;
    double lr = 1e-3;
    std::vector<int> hidden = {256, 128, 64, 32};
    double dropout_p = 0.5;
};

// Mini-batch Adam on binary cross-entropy with per-batch dropout; returns the
// epoch snapshot with the best validation accuracy. Throws ParameterError when
// the training set contains a single class.
MLPModel mlp_train(const Eigen::MatrixXd& train_X, const Eigen::VectorXi& train_y,
                   const Eigen::MatrixXd& val_X, const Eigen::VectorXi& val_y,
                   const MLPHyper& hyper, std::uint64_t seed);

// ----------------------------------------------------------------------------
// Soft-margin SVM with RBF kernel, trained by sequential (SMO-style) pairwise
// optimization of the dual.
// ----------------------------------------------------------------------------

struct SVMModel {
    Eigen::MatrixXd support_vectors;  // one per row
    Eigen::VectorXd dual_coeffs;      // alpha_i * y_i, |.| <= C
    double bias = 0.0;
    double gamma = 0.0;
    double C = 0.0;
};

// y entries must be +1/-1. Optimizes until all KKT violations <= tol.
SVMModel svm_train(const Eigen::MatrixXd& X, const Eigen::VectorXi& y, double C, double gamma,
                   double tol = 1e-3);

double svm_decision(const SVMModel& model, const Eigen::VectorXd& x);

// sign(decision) mapped to the class labels: positive = air, negative = water.
FillerClass svm_predict(const SVMModel& model, const Eigen::VectorXd& x);

// ----------------------------------------------------------------------------
// Cross-validation harness
// ----------------------------------------------------------------------------

struct CVReport {
    std::vector<double> fold_accuracy_pct;
    double mean_pct = 0.0;
    double std_pct = 0.0;  // population standard deviation over folds
    std::string descriptor;
    std::string classifier;

    // Table-style cell, e.g. "98.60 ± 1.31".
    std::string cell() const;
};

// A trained classifier maps a standardized feature vector to a class.
using TrainedClassifier = std::function<FillerClass(const Eigen::VectorXd&)>;
// Factory invoked once per fold on the standardized training matrix
// (examples x features) and labels (1 = air, 0 = water).
using ClassifierFactory = std::function<TrainedClassifier(
    const Eigen::MatrixXd& X, const Eigen::VectorXi& y, std::uint64_t seed)>;

struct SVMGrid {
    std::vector<double> c_grid = {1.0, 10.0, 100.0};
    std::vector<double> gamma_scale_grid = {0.5, 1.0, 2.0};
    double tol = 1e-3;
};

ClassifierFactory make_mlp_factory(const MLPHyper& hyper, double val_fraction = 0.15);
ClassifierFactory make_svm_factory(const SVMGrid& grid);

// Stratified k-fold CV: per fold, standardization statistics come from the
// training fold only, the factory trains on it and accuracy is measured on the
// held-out fold. Mean and population std reported in percent.
CVReport cross_validate(const std::vector<Descriptor>& dataset, const ClassifierFactory& factory,
                        int k, std::uint64_t seed, const std::string& classifier_name = "");

// Seeded stratified fold assignment; returns fold index per example.
std::vector<int> stratified_folds(const std::vector<Descriptor>& dataset, int k, std::uint64_t seed);

}  // namespace echoform
