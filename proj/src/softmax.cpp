#include "partwise/softmax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "partwise/error.hpp"
#include "partwise/rng.hpp"

namespace partwise {

namespace {

/// In-place stable softmax; returns log-sum-exp.
double softmax_inplace(Eigen::VectorXd& z) {
    const double peak = z.maxCoeff();
    z = (z.array() - peak).exp();
    const double sum = z.sum();
    z /= sum;
    return peak + std::log(sum);
}

struct Evaluation {
    double accuracy;
    double loss;
};

Evaluation evaluate(const SoftmaxModel& model, std::span<const Sample> data, std::span<const std::size_t> idx) {
    if (idx.empty()) return {0.0, 0.0};
    std::size_t correct = 0;
    double loss = 0.0;
    for (const std::size_t i : idx) {
        Eigen::VectorXd z = model.W * data[i].x + model.b;
        Eigen::Index arg = 0;
        z.maxCoeff(&arg);
        if (arg == data[i].label) ++correct;
        softmax_inplace(z);
        loss -= std::log(std::max(z(data[i].label), std::numeric_limits<double>::min()));
    }
    return {static_cast<double>(correct) / static_cast<double>(idx.size()), loss / static_cast<double>(idx.size())};
}

}  // namespace

SoftmaxModel SoftmaxModel::zeros(std::size_t n_features, std::string catalog_hash, std::size_t n_classes) {
    return {Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_classes), static_cast<Eigen::Index>(n_features)),
            Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_classes)), std::move(catalog_hash)};
}

LossGradient loss_and_gradient(const SoftmaxModel& model, std::span<const Sample> batch, double l2) {
    if (batch.empty()) throw ArityError("loss_and_gradient: empty batch");
    LossGradient out{0.0, Eigen::MatrixXd::Zero(model.W.rows(), model.W.cols()), Eigen::VectorXd::Zero(model.b.size())};
    for (const Sample& s : batch) {
        if (s.x.size() != model.W.cols()) throw ArityError("loss_and_gradient: feature length mismatch");
        if (s.label < 0 || s.label >= model.W.rows()) throw ArityError("loss_and_gradient: label out of range");
        Eigen::VectorXd z = model.W * s.x + model.b;
        const double lse = softmax_inplace(z);
        out.loss += lse - (model.W.row(s.label).dot(s.x) + model.b(s.label));
        z(s.label) -= 1.0;
        out.dW.noalias() += z * s.x.transpose();
        out.db += z;
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    out.loss *= inv;
    out.dW *= inv;
    out.db *= inv;
    out.loss += 0.5 * l2 * model.W.squaredNorm();
    out.dW += l2 * model.W;
    return out;
}

double class_logit(const SoftmaxModel& model, const Eigen::VectorXd& x, Eigen::Index c) {
    double z = model.b(c);
    for (Eigen::Index k = 0; k < x.size(); ++k) z += model.W(c, k) * x(k);
    return z;
}

SoftmaxPrediction predict_softmax(const SoftmaxModel& model, const Eigen::VectorXd& x) {
    if (x.size() != model.W.cols()) throw ArityError("predict_softmax: feature length mismatch");
    SoftmaxPrediction p;
    p.logits.resize(model.W.rows());
    for (Eigen::Index c = 0; c < model.W.rows(); ++c) p.logits(c) = class_logit(model, x, c);
    p.category = 0;
    for (Eigen::Index c = 1; c < p.logits.size(); ++c) {
        if (p.logits(c) > p.logits(p.category)) p.category = static_cast<int>(c);
    }
    p.probabilities = p.logits;
    softmax_inplace(p.probabilities);
    return p;
}

SoftmaxPrediction predict_softmax(const SoftmaxModel& model, const Eigen::VectorXd& x, const std::string& catalog_hash) {
    if (catalog_hash != model.catalog_hash) {
        throw ModelError("softmax model catalog hash " + model.catalog_hash + " does not match " + catalog_hash);
    }
    return predict_softmax(model, x);
}

Json train_config_to_json(const TrainConfig& cfg) {
    return {{"lr", cfg.lr},
            {"batch_size", cfg.batch_size},
            {"l2", cfg.l2},
            {"adam_beta1", cfg.adam_beta1},
            {"adam_beta2", cfg.adam_beta2},
            {"adam_eps", cfg.adam_eps},
            {"patience", cfg.patience},
            {"val_fraction", cfg.val_fraction},
            {"max_epochs", cfg.max_epochs},
            {"seed", cfg.seed}};
}

TrainConfig train_config_from_json(const Json& j) {
    if (!j.is_object()) throw SchemaError("train config must be an object");
    TrainConfig c;
    c.lr = j.value("lr", c.lr);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.l2 = j.value("l2", c.l2);
    c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
    c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
    c.adam_eps = j.value("adam_eps", c.adam_eps);
    c.patience = j.value("patience", c.patience);
    c.val_fraction = j.value("val_fraction", c.val_fraction);
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.seed = j.value("seed", c.seed);
    if (!(c.lr > 0) || c.batch_size <= 0 || !(c.l2 > 0) || !(c.adam_beta1 > 0) || !(c.adam_beta2 > 0) ||
        !(c.adam_eps > 0) || c.patience <= 0 || c.max_epochs <= 0 || !(c.val_fraction > 0 && c.val_fraction < 1)) {
        throw ValidationError("train config: all values must be positive and val_fraction in (0,1)");
    }
    return c;
}

SoftmaxTraining train_softmax(std::span<const Sample> data, const TrainConfig& cfg, std::size_t n_classes,
                              const std::string& catalog_hash) {
    if (data.empty()) throw TrainingError("train_softmax: empty dataset");
    const auto n_features = static_cast<std::size_t>(data.front().x.size());
    std::vector<std::vector<std::size_t>> by_class(n_classes);
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (static_cast<std::size_t>(data[i].x.size()) != n_features) {
            throw ArityError("train_softmax: inconsistent feature lengths");
        }
        if (data[i].label < 0 || static_cast<std::size_t>(data[i].label) >= n_classes) {
            throw ArityError("train_softmax: label out of range");
        }
        by_class[static_cast<std::size_t>(data[i].label)].push_back(i);
    }
    const auto present = std::count_if(by_class.begin(), by_class.end(), [](const auto& v) { return !v.empty(); });
    if (present < 2) throw TrainingError("train_softmax: need at least two classes");

    // Stratified hold-out; every class keeps at least one training sample.
    Rng split_rng(derive_seed(cfg.seed, 1));
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> val_idx;
    for (auto& members : by_class) {
        if (members.empty()) continue;
        split_rng.shuffle(members);
        auto n_val = static_cast<std::size_t>(std::floor(cfg.val_fraction * static_cast<double>(members.size()) + 0.5));
        n_val = std::min(n_val, members.size() - 1);
        val_idx.insert(val_idx.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_val));
        train_idx.insert(train_idx.end(), members.begin() + static_cast<std::ptrdiff_t>(n_val), members.end());
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(val_idx.begin(), val_idx.end());
    const std::vector<std::size_t>& monitor = val_idx.empty() ? train_idx : val_idx;

    SoftmaxTraining out;
    SoftmaxModel model = SoftmaxModel::zeros(n_features, catalog_hash, n_classes);
    Eigen::MatrixXd m_w = Eigen::MatrixXd::Zero(model.W.rows(), model.W.cols());
    Eigen::MatrixXd v_w = m_w;
    Eigen::VectorXd m_b = Eigen::VectorXd::Zero(model.b.size());
    Eigen::VectorXd v_b = m_b;
    long step = 0;

    Rng order_rng(derive_seed(cfg.seed, 2));
    std::vector<std::size_t> order = train_idx;
    std::vector<Sample> batch;
    batch.reserve(static_cast<std::size_t>(cfg.batch_size));

    double best_acc = -1.0;
    double best_loss = std::numeric_limits<double>::infinity();
    int since_best = 0;
    out.model = model;
    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        order_rng.shuffle(order);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            batch.clear();
            for (std::size_t t = start; t < end; ++t) batch.push_back(data[order[t]]);
            const LossGradient g = loss_and_gradient(model, batch, cfg.l2);
            loss_sum += g.loss * static_cast<double>(batch.size());
            ++step;
            const double c1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(step));
            m_w = cfg.adam_beta1 * m_w + (1.0 - cfg.adam_beta1) * g.dW;
            v_w = cfg.adam_beta2 * v_w + (1.0 - cfg.adam_beta2) * g.dW.cwiseAbs2();
            m_b = cfg.adam_beta1 * m_b + (1.0 - cfg.adam_beta1) * g.db;
            v_b = cfg.adam_beta2 * v_b + (1.0 - cfg.adam_beta2) * g.db.cwiseAbs2();
            model.W.array() -= cfg.lr * (m_w.array() / c1) / ((v_w.array() / c2).sqrt() + cfg.adam_eps);
            model.b.array() -= cfg.lr * (m_b.array() / c1) / ((v_b.array() / c2).sqrt() + cfg.adam_eps);
        }
        const Evaluation tr = evaluate(model, data, train_idx);
        const Evaluation va = evaluate(model, data, monitor);
        out.log.push_back({epoch, loss_sum / static_cast<double>(order.size()), tr.accuracy, va.accuracy, va.loss});
        if (va.accuracy > best_acc || (va.accuracy == best_acc && va.loss < best_loss)) {
            best_acc = va.accuracy;
            best_loss = va.loss;
            out.model = model;
            out.best_epoch = epoch;
            since_best = 0;
        } else if (++since_best >= cfg.patience) {
            break;
        }
    }
    return out;
}

Json softmax_model_to_json(const SoftmaxModel& model) {
    Json w = Json::array();
    for (Eigen::Index r = 0; r < model.W.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < model.W.cols(); ++c) row.push_back(model.W(r, c));
        w.push_back(std::move(row));
    }
    Json b = Json::array();
    for (Eigen::Index r = 0; r < model.b.size(); ++r) b.push_back(model.b(r));
    return {{"catalog_hash", model.catalog_hash}, {"W", std::move(w)}, {"b", std::move(b)}};
}

SoftmaxModel softmax_model_from_json(const Json& j) {
    try {
        const Json& w = j.at("W");
        const Json& b = j.at("b");
        const auto rows = static_cast<Eigen::Index>(w.size());
        if (rows == 0 || static_cast<Eigen::Index>(b.size()) != rows) throw SchemaError("softmax model: W/b shape mismatch");
        const auto cols = static_cast<Eigen::Index>(w.at(0).size());
        SoftmaxModel m{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(rows), j.at("catalog_hash").get<std::string>()};
        for (Eigen::Index r = 0; r < rows; ++r) {
            const Json& row = w.at(static_cast<std::size_t>(r));
            if (static_cast<Eigen::Index>(row.size()) != cols) throw SchemaError("softmax model: ragged W");
            for (Eigen::Index c = 0; c < cols; ++c) m.W(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
            m.b(r) = b.at(static_cast<std::size_t>(r)).get<double>();
        }
        if (!m.W.allFinite() || !m.b.allFinite()) throw SchemaError("softmax model: non-finite entries");
        return m;
    } catch (const Json::exception& e) {
        throw SchemaError(std::string("malformed softmax model: ") + e.what());
    }
}

}  // namespace partwise
