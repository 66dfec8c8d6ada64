#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "partwise/core.hpp"
#include "partwise/io.hpp"

namespace partwise {

/// Linear map from part scores to category logits: logits = W P + b.
struct SoftmaxModel {
    Eigen::MatrixXd W;  // categories x features
    Eigen::VectorXd b;  // categories
    std::string catalog_hash;

    static SoftmaxModel zeros(std::size_t n_features, std::string catalog_hash,
                              std::size_t n_classes = kNumCategories);
    Eigen::Index n_classes() const { return W.rows(); }
    Eigen::Index n_features() const { return W.cols(); }
    bool operator==(const SoftmaxModel& o) const {
        return catalog_hash == o.catalog_hash && W.rows() == o.W.rows() && W.cols() == o.W.cols() && W == o.W &&
               b.size() == o.b.size() && b == o.b;
    }
};

struct Sample {
    Eigen::VectorXd x;
    int label;  // class index
};

struct LossGradient {
    double loss;
    Eigen::MatrixXd dW;
    Eigen::VectorXd db;
};

/// Mean cross-entropy of softmax(W x + b) plus (l2 / 2) ||W||^2; bias unregularized.
LossGradient loss_and_gradient(const SoftmaxModel& model, std::span<const Sample> batch, double l2);

/// Logit of class c accumulated in feature order: b_c + sum_k W_ck x_k.
double class_logit(const SoftmaxModel& model, const Eigen::VectorXd& x, Eigen::Index c);

struct SoftmaxPrediction {
    int category;  // argmax, lowest index on ties
    Eigen::VectorXd probabilities;
    Eigen::VectorXd logits;
};

/// Throws ModelError when `catalog_hash` differs from the model's.
SoftmaxPrediction predict_softmax(const SoftmaxModel& model, const Eigen::VectorXd& x, const std::string& catalog_hash);
SoftmaxPrediction predict_softmax(const SoftmaxModel& model, const Eigen::VectorXd& x);

struct TrainConfig {
    double lr = 0.001;
    int batch_size = 32;
    double l2 = 0.001;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    int patience = 20;
    double val_fraction = 0.2;
    int max_epochs = 500;
    std::uint64_t seed = 0;
};

Json train_config_to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const Json& j);

struct EpochLog {
    int epoch;
    double train_loss;      // mean minibatch loss over the epoch
    double train_accuracy;  // on the training split after the epoch
    double val_accuracy;
    double val_loss;
};

struct SoftmaxTraining {
    SoftmaxModel model;  // best-validation snapshot
    std::vector<EpochLog> log;
    int best_epoch = 0;
};

/// Minibatch Adam with a stratified validation hold-out and early stopping on
/// validation accuracy (ties broken by validation loss).
SoftmaxTraining train_softmax(std::span<const Sample> data, const TrainConfig& cfg, std::size_t n_classes,
                              const std::string& catalog_hash);

Json softmax_model_to_json(const SoftmaxModel& model);
SoftmaxModel softmax_model_from_json(const Json& j);

}  // namespace partwise
