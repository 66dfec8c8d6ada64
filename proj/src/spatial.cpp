#include "partwise/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "partwise/error.hpp"
#include "partwise/rng.hpp"

namespace partwise {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // ln(2 pi)

double log_density(const GmmComponent& c, const Point2& x) {
    const Eigen::Vector2d d = x - c.mean;
    return -kLog2Pi - 0.5 * (std::log(c.var.x()) + std::log(c.var.y())) -
           0.5 * (d.x() * d.x() / c.var.x() + d.y() * d.y() / c.var.y());
}

/// E-step. Fills `resp` (n x m, row-stochastic) and returns the log-likelihood.
double expectation(std::span<const GmmComponent> comps, std::span<const Point2> pts, Eigen::MatrixXd& resp) {
    const auto n = static_cast<Eigen::Index>(pts.size());
    const auto m = static_cast<Eigen::Index>(comps.size());
    resp.resize(n, m);
    double ll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        double peak = -std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < m; ++j) {
            const auto& c = comps[static_cast<std::size_t>(j)];
            resp(i, j) = std::log(c.weight) + log_density(c, pts[static_cast<std::size_t>(i)]);
            peak = std::max(peak, resp(i, j));
        }
        double sum = 0.0;
        for (Eigen::Index j = 0; j < m; ++j) {
            resp(i, j) = std::exp(resp(i, j) - peak);
            sum += resp(i, j);
        }
        for (Eigen::Index j = 0; j < m; ++j) resp(i, j) /= sum;
        ll += peak + std::log(sum);
    }
    return ll;
}

/// M-step with variance flooring. Components that lose all responsibility keep
/// their previous location with a vanishing weight.
void maximization(std::span<const Point2> pts, const Eigen::MatrixXd& resp, double var_floor,
                  std::vector<GmmComponent>& comps) {
    const auto n = static_cast<Eigen::Index>(pts.size());
    constexpr double kMinMass = 1e-12;
    double total = 0.0;
    for (std::size_t j = 0; j < comps.size(); ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        double mass = 0.0;
        Eigen::Vector2d mean = Eigen::Vector2d::Zero();
        for (Eigen::Index i = 0; i < n; ++i) {
            mass += resp(i, jj);
            mean += resp(i, jj) * pts[static_cast<std::size_t>(i)];
        }
        GmmComponent& c = comps[j];
        if (mass > kMinMass) {
            mean /= mass;
            Eigen::Vector2d var = Eigen::Vector2d::Zero();
            for (Eigen::Index i = 0; i < n; ++i) {
                const Eigen::Vector2d d = pts[static_cast<std::size_t>(i)] - mean;
                var += resp(i, jj) * d.cwiseProduct(d);
            }
            var /= mass;
            c.mean = mean;
            c.var = var.cwiseMax(var_floor);
        }
        c.weight = std::max(mass, kMinMass) / static_cast<double>(n);
        total += c.weight;
    }
    for (auto& c : comps) c.weight /= total;
}

/// k-means++ seeding followed by one hard assignment pass.
std::vector<GmmComponent> initialize(std::span<const Point2> pts, int n_modes, std::uint64_t seed, double var_floor) {
    Rng rng(seed);
    const std::size_t n = pts.size();
    std::vector<Point2> centers;
    centers.push_back(pts[rng.index(n)]);
    std::vector<double> d2(n, std::numeric_limits<double>::infinity());
    while (static_cast<int>(centers.size()) < n_modes) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], (pts[i] - centers.back()).squaredNorm());
            total += d2[i];
        }
        std::size_t pick = 0;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc > target) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = rng.index(n);
        }
        centers.push_back(pts[pick]);
    }

    Eigen::Vector2d global_mean = Eigen::Vector2d::Zero();
    for (const auto& p : pts) global_mean += p;
    global_mean /= static_cast<double>(n);
    Eigen::Vector2d global_var = Eigen::Vector2d::Zero();
    for (const auto& p : pts) global_var += (p - global_mean).cwiseAbs2();
    global_var = (global_var / static_cast<double>(n)).cwiseMax(var_floor);

    const auto m = static_cast<std::size_t>(n_modes);
    std::vector<double> count(m, 0.0);
    std::vector<Eigen::Vector2d> sum(m, Eigen::Vector2d::Zero());
    std::vector<Eigen::Vector2d> sum_sq(m, Eigen::Vector2d::Zero());
    for (const auto& p : pts) {
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < m; ++j) {
            const double d = (p - centers[j]).squaredNorm();
            if (d < best_d) {
                best_d = d;
                best = j;
            }
        }
        count[best] += 1.0;
        sum[best] += p;
        sum_sq[best] += p.cwiseAbs2();
    }
    std::vector<GmmComponent> comps(m);
    for (std::size_t j = 0; j < m; ++j) {
        if (count[j] > 0.0) {
            const Eigen::Vector2d mean = sum[j] / count[j];
            const Eigen::Vector2d var = (sum_sq[j] / count[j] - mean.cwiseAbs2()).cwiseMax(var_floor);
            comps[j] = {mean, var, count[j] / static_cast<double>(n)};
        } else {
            comps[j] = {centers[j], global_var, 1.0 / static_cast<double>(n)};
        }
    }
    double total = 0.0;
    for (const auto& c : comps) total += c.weight;
    for (auto& c : comps) c.weight /= total;
    return comps;
}

}  // namespace

double mixture_log_likelihood(std::span<const GmmComponent> components, std::span<const Point2> points) {
    Eigen::MatrixXd resp;
    return expectation(components, points, resp);
}

Mixture fit_gmm(std::span<const Point2> points, int n_modes, std::uint64_t seed, const GmmOptions& opts) {
    if (n_modes < 1) throw ArityError("fit_gmm needs n_modes >= 1");
    if (points.size() < static_cast<std::size_t>(n_modes)) {
        throw ArityError("fit_gmm: " + std::to_string(points.size()) + " points for " + std::to_string(n_modes) +
                         " modes");
    }
    for (const auto& p : points) {
        if (!p.allFinite()) throw ValidationError("fit_gmm: non-finite point");
    }
    Mixture mix;
    mix.components = initialize(points, n_modes, seed, opts.var_floor);
    Eigen::MatrixXd resp;
    double ll = expectation(mix.components, points, resp);
    int it = 0;
    while (it < opts.max_iterations) {
        ++it;
        maximization(points, resp, opts.var_floor, mix.components);
        const double next = expectation(mix.components, points, resp);
        mix.log_likelihood_trace.push_back(next);
        const bool converged = std::abs(next - ll) < opts.tol;
        ll = next;
        if (converged) break;
    }
    mix.log_likelihood = ll;
    mix.iterations = it;
    return mix;
}

double bic(const Mixture& mixture, std::size_t n_points) {
    const int p = gmm_parameter_count(static_cast<int>(mixture.components.size()));
    return -2.0 * mixture.log_likelihood + p * std::log(static_cast<double>(n_points));
}

Mixture select_modes_bic(std::span<const Point2> points, int max_modes, std::uint64_t seed, const GmmOptions& opts) {
    if (points.empty()) throw ArityError("select_modes_bic needs at least one point");
    if (max_modes < 1) throw ArityError("select_modes_bic needs max_modes >= 1");
    const int upper = std::min<int>(max_modes, static_cast<int>(points.size()));
    Mixture best;
    double best_bic = std::numeric_limits<double>::infinity();
    for (int n = 1; n <= upper; ++n) {
        Mixture m = fit_gmm(points, n, derive_seed(seed, static_cast<std::uint64_t>(n)), opts);
        const double score = bic(m, points.size());
        if (score < best_bic) {
            best_bic = score;
            best = std::move(m);
        }
    }
    return best;
}

// ---------------------------------------------------------------------------

const SpatialMap* SpatialModel::find(int k) const noexcept {
    const auto it = std::lower_bound(maps.begin(), maps.end(), k,
                                     [](const SpatialMap& m, int key) { return m.feature_index < key; });
    if (it == maps.end() || it->feature_index != k) return nullptr;
    return &*it;
}

SpatialBuild build_spatial_model(const Dataset& dataset, const SpatialFitOptions& opts, std::uint64_t seed) {
    if (dataset.scenes.empty()) throw ArityError("build_spatial_model: empty dataset");
    const FeatureCatalog& catalog = dataset.catalog;
    std::vector<std::vector<Point2>> points(catalog.size());
    for (const Scene& scene : dataset.scenes) {
        if (!scene.rectified) throw ValidationError("build_spatial_model: scene '" + scene.id + "' is not rectified");
        for (const Detection& d : scene.detections) {
            if (const auto k = catalog.index_of(d.part, *scene.label)) {
                points[static_cast<std::size_t>(*k)].push_back(d.x);
            }
        }
    }
    SpatialBuild out;
    out.model.catalog_hash = catalog.hash();
    for (std::size_t k = 0; k < catalog.size(); ++k) {
        const auto& pts = points[k];
        if (pts.size() < static_cast<std::size_t>(std::max(1, opts.min_fit_points))) {
            out.omitted.emplace_back(static_cast<int>(k), pts.size());
            continue;
        }
        Mixture mix = select_modes_bic(pts, opts.max_modes, seed ^ static_cast<std::uint64_t>(k), opts.gmm);
        out.model.maps.push_back({static_cast<int>(k), std::move(mix.components)});
    }
    return out;
}

double location_score(const SpatialMap& map, const Point2& x) {
    double best = 0.0;
    for (const auto& c : map.components) best = std::max(best, gaussian_kernel<double>(x, c.mean, c.var));
    return best;
}

double location_score(const SpatialModel& model, int k, const Point2& x) {
    const SpatialMap* map = model.find(k);
    if (!map) throw LookupError("spatial model has no map for feature " + std::to_string(k));
    return location_score(*map, x);
}

Eigen::VectorXd part_scores(const SpatialModel& model, const FeatureCatalog& catalog, const Scene& scene) {
    if (model.catalog_hash != catalog.hash()) {
        throw ModelError("spatial model catalog hash " + model.catalog_hash + " does not match catalog " +
                         catalog.hash());
    }
    if (!scene.rectified) throw ValidationError("part_scores: scene '" + scene.id + "' is not rectified");
    std::vector<std::vector<double>> terms(catalog.size());
    for (const Detection& d : scene.detections) {
        for (const int k : catalog.features_of_part(d.part)) {
            if (const SpatialMap* map = model.find(k)) {
                terms[static_cast<std::size_t>(k)].push_back(d.s * location_score(*map, d.x));
            }
        }
    }
    Eigen::VectorXd scores = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(catalog.size()));
    for (std::size_t k = 0; k < catalog.size(); ++k) {
        auto& t = terms[k];
        if (t.empty()) continue;
        // Summing in sorted order makes the result independent of detection order.
        std::sort(t.begin(), t.end());
        double sum = 0.0;
        for (const double v : t) sum += v;
        scores(static_cast<Eigen::Index>(k)) = std::clamp(sum / catalog[k].n_exp, 0.0, 1.0);
    }
    return scores;
}

Json spatial_model_to_json(const SpatialModel& model) {
    Json maps = Json::array();
    for (const SpatialMap& m : model.maps) {
        Json modes = Json::array();
        for (const auto& c : m.components) {
            modes.push_back({{"mean", point_to_json(c.mean)}, {"var", point_to_json(c.var)}, {"weight", c.weight}});
        }
        maps.push_back({{"k", m.feature_index}, {"modes", std::move(modes)}});
    }
    return {{"catalog_hash", model.catalog_hash}, {"maps", std::move(maps)}};
}

SpatialModel spatial_model_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("catalog_hash") || !j.contains("maps")) {
        throw SchemaError("spatial model needs 'catalog_hash' and 'maps'");
    }
    SpatialModel model;
    model.catalog_hash = j.at("catalog_hash").get<std::string>();
    for (const Json& m : j.at("maps")) {
        SpatialMap map;
        map.feature_index = m.at("k").get<int>();
        for (const Json& c : m.at("modes")) {
            GmmComponent comp{point_from_json(c.at("mean"), "mean"), point_from_json(c.at("var"), "var"),
                              c.at("weight").get<double>()};
            if (!(comp.var.array() > 0.0).all()) throw SchemaError("spatial map variances must be positive");
            map.components.push_back(comp);
        }
        if (map.components.empty()) throw SchemaError("spatial map needs at least one mode");
        model.maps.push_back(std::move(map));
    }
    std::sort(model.maps.begin(), model.maps.end(),
              [](const SpatialMap& a, const SpatialMap& b) { return a.feature_index < b.feature_index; });
    for (std::size_t i = 1; i < model.maps.size(); ++i) {
        if (model.maps[i].feature_index == model.maps[i - 1].feature_index) {
            throw SchemaError("spatial model has duplicate feature index " + std::to_string(model.maps[i].feature_index));
        }
    }
    return model;
}

}  // namespace partwise
