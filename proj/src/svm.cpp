#include "partwise/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "partwise/error.hpp"
#include "partwise/rng.hpp"

namespace partwise {

namespace {

constexpr double kTau = 1e-12;

// Oversampled copies refer back to their source point, so the kernel matrix
// only spans the distinct inputs.
struct Problem {
    std::vector<std::size_t> src;
    std::vector<double> y;
};

Problem build_problem(std::span<const SvmInput> points, std::span<const int> labels, const SvmParams& params) {
    if (points.size() != labels.size()) throw ArityError("train_svm: points and labels differ in length");
    Problem prob;
    std::vector<std::size_t> pos;
    std::vector<std::size_t> neg;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (labels[i] != 1 && labels[i] != -1) throw ValidationError("train_svm: labels must be +1 or -1");
        if (!points[i].allFinite()) throw ValidationError("train_svm: non-finite input");
        (labels[i] == 1 ? pos : neg).push_back(i);
        prob.src.push_back(i);
        prob.y.push_back(labels[i]);
    }
    if (pos.empty() || neg.empty()) throw TrainingError("train_svm: both classes must be present");
    if (params.oversample_minority && pos.size() != neg.size()) {
        std::vector<std::size_t> minority = pos.size() < neg.size() ? pos : neg;
        const std::size_t deficit = std::max(pos.size(), neg.size()) - minority.size();
        Rng rng(params.seed);
        rng.shuffle(minority);
        for (std::size_t r = 0; r < deficit; ++r) {
            const std::size_t src = minority[r % minority.size()];
            prob.src.push_back(src);
            prob.y.push_back(labels[src]);
        }
    }
    return prob;
}

}  // namespace

SvmTraining train_svm(std::span<const SvmInput> points, std::span<const int> labels, const SvmParams& params) {
    if (!(params.C > 0.0) || !(params.gamma > 0.0)) throw ValidationError("train_svm: C and gamma must be positive");
    const Problem prob = build_problem(points, labels, params);
    const std::size_t n = prob.src.size();
    const double c = params.C;

    const auto m = static_cast<Eigen::Index>(points.size());
    Eigen::MatrixXd k(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        k(i, i) = 1.0;
        for (Eigen::Index j = 0; j < i; ++j) {
            const double v = rbf_kernel(points[static_cast<std::size_t>(i)], points[static_cast<std::size_t>(j)], params.gamma);
            k(i, j) = v;
            k(j, i) = v;
        }
    }
    auto kk = [&](std::size_t i, std::size_t j) {
        return k(static_cast<Eigen::Index>(prob.src[i]), static_cast<Eigen::Index>(prob.src[j]));
    };
    const auto& y = prob.y;

    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0);  // gradient of 1/2 a'Qa - e'a
    auto in_up = [&](std::size_t t) { return (y[t] > 0 && alpha[t] < c) || (y[t] < 0 && alpha[t] > 0); };
    auto in_low = [&](std::size_t t) { return (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < c); };

    long iter = 0;
    const long max_iter = std::max<long>(params.max_iterations, 100L * static_cast<long>(n));
    for (; iter < max_iter; ++iter) {
        // Working set: i maximizes -y G over I_up, j minimizes the second-order gain over I_low.
        double gmax = -std::numeric_limits<double>::infinity();
        std::size_t i = n;
        for (std::size_t t = 0; t < n; ++t) {
            if (in_up(t) && -y[t] * grad[t] > gmax) {
                gmax = -y[t] * grad[t];
                i = t;
            }
        }
        double gmin = std::numeric_limits<double>::infinity();
        double best_obj = std::numeric_limits<double>::infinity();
        std::size_t j = n;
        for (std::size_t t = 0; t < n; ++t) {
            if (!in_low(t)) continue;
            const double v = -y[t] * grad[t];
            gmin = std::min(gmin, v);
            if (i == n) continue;
            const double b = gmax - v;
            if (b > 0.0) {
                double a = kk(i, i) + kk(t, t) - 2.0 * kk(i, t);
                if (a <= 0.0) a = kTau;
                const double obj = -(b * b) / a;
                if (obj < best_obj) {
                    best_obj = obj;
                    j = t;
                }
            }
        }
        if (i == n || j == n || gmax - gmin < params.tol) break;

        const double old_ai = alpha[i];
        const double old_aj = alpha[j];
        if (y[i] != y[j]) {
            double quad = kk(i, i) + kk(j, j) - 2.0 * kk(i, j);
            if (quad <= 0.0) quad = kTau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if (diff > 0.0) {
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if (alpha[j] > c) {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            double quad = kk(i, i) + kk(j, j) - 2.0 * kk(i, j);
            if (quad <= 0.0) quad = kTau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > c) {
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if (alpha[j] < 0.0) {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if (sum > c) {
                if (alpha[j] > c) {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        const double di = alpha[i] - old_ai;
        const double dj = alpha[j] - old_aj;
        for (std::size_t t = 0; t < n; ++t) {
            grad[t] += y[t] * (y[i] * kk(i, t) * di + y[j] * kk(j, t) * dj);
        }
    }

    // rho: average of y G over free variables, else midpoint of the feasible interval.
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = y[t] * grad[t];
        if (alpha[t] >= c) {
            if (y[t] < 0) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else if (alpha[t] <= 0.0) {
            if (y[t] > 0) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (ub + lb);

    SvmTraining out;
    out.iterations = iter;
    out.model.bias = -rho;
    out.model.gamma = params.gamma;
    out.model.C = c;
    for (std::size_t t = 0; t < n; ++t) {
        if (alpha[t] > 0.0) {
            out.model.support_vectors.push_back(points[prob.src[t]]);
            out.model.alphas.push_back(alpha[t] * y[t]);
        }
    }
    out.kkt_residuals.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        double f = out.model.bias;
        for (std::size_t s = 0; s < n; ++s) {
            if (alpha[s] > 0.0) f += alpha[s] * y[s] * kk(s, t);
        }
        const double margin = y[t] * f;
        double r = 0.0;
        if (alpha[t] <= 0.0) {
            r = std::max(0.0, 1.0 - margin);
        } else if (alpha[t] >= c) {
            r = std::max(0.0, margin - 1.0);
        } else {
            r = std::abs(margin - 1.0);
        }
        out.kkt_residuals[t] = r;
        out.max_kkt_residual = std::max(out.max_kkt_residual, r);
    }
    return out;
}

SvmPrediction predict_svm(const SvmModel& model, const SvmInput& x) {
    double f = model.bias;
    for (std::size_t i = 0; i < model.support_vectors.size(); ++i) {
        f += model.alphas[i] * rbf_kernel(x, model.support_vectors[i], model.gamma);
    }
    return {f >= 0.0 ? 1 : -1, f};
}

Json svm_model_to_json(const SvmModel& model) {
    Json svs = Json::array();
    for (const auto& v : model.support_vectors) svs.push_back({v.x(), v.y(), v.z()});
    return {{"support_vectors", std::move(svs)},
            {"alphas", model.alphas},
            {"bias", model.bias},
            {"gamma", model.gamma},
            {"C", model.C}};
}

SvmModel svm_model_from_json(const Json& j) {
    SvmModel m;
    try {
        for (const Json& v : j.at("support_vectors")) {
            if (!v.is_array() || v.size() != 3) throw SchemaError("support vector must be a 3-vector");
            m.support_vectors.emplace_back(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
        }
        m.alphas = j.at("alphas").get<std::vector<double>>();
        m.bias = j.at("bias").get<double>();
        m.gamma = j.at("gamma").get<double>();
        m.C = j.at("C").get<double>();
    } catch (const Json::exception& e) {
        throw SchemaError(std::string("malformed SVM model: ") + e.what());
    }
    if (m.alphas.size() != m.support_vectors.size() || m.support_vectors.empty()) {
        throw SchemaError("SVM model needs one alpha per support vector and at least one support vector");
    }
    for (const double a : m.alphas) {
        if (std::abs(a) > m.C * (1.0 + 1e-12)) throw SchemaError("SVM model alpha exceeds C");
    }
    return m;
}

}  // namespace partwise
