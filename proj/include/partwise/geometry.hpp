#pragma once

#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "partwise/core.hpp"
#include "partwise/error.hpp"
#include "partwise/io.hpp"

namespace partwise {

/// Planar projective map, stored with H(2,2) = 1 whenever that entry is nonzero.
template <typename Scalar>
class Homography {
public:
    using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;

    Homography() : h_(Matrix3::Identity()) {}

    /// Normalizes the scale and rejects singular matrices (|det| <= 1e-12).
    explicit Homography(const Matrix3& m) : h_(m) {
        if (!h_.allFinite()) throw DegeneracyError("homography has non-finite entries");
        if (std::abs(h_(2, 2)) > Scalar(1e-12)) {
            h_ /= h_(2, 2);
        } else {
            h_ /= h_.norm();
        }
        if (!(std::abs(h_.determinant()) > Scalar(1e-12))) throw DegeneracyError("homography is singular");
    }

    static Homography identity() { return Homography(); }

    const Matrix3& matrix() const noexcept { return h_; }
    Scalar operator()(int r, int c) const { return h_(r, c); }

    Homography inverse() const { return Homography(h_.inverse()); }

    Homography operator*(const Homography& rhs) const { return Homography(h_ * rhs.h_); }

private:
    Matrix3 h_;
};

template <typename Scalar>
struct Correspondence {
    Eigen::Matrix<Scalar, 2, 1> image_pt;
    Eigen::Matrix<Scalar, 2, 1> world_pt;
};

template <typename Scalar>
struct HomographyFit {
    Homography<Scalar> h;
    /// Root-mean-square distance between mapped image points and world points.
    Scalar rmse;
};

/// Projective mapping of a point. Throws HorizonError when |w| < 1e-12.
template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, 2, 1> apply_homography(const Homography<Scalar>& h, const Eigen::MatrixBase<Derived>& p) {
    const Eigen::Matrix<Scalar, 3, 1> q = h.matrix() * p.template cast<Scalar>().homogeneous();
    if (std::abs(q.z()) < Scalar(1e-12)) throw HorizonError("point mapped to infinity");
    return q.hnormalized();
}

namespace detail {

/// Similarity that moves the centroid to the origin and the mean distance to sqrt(2).
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 3> hartley_normalizer(const std::vector<Eigen::Matrix<Scalar, 2, 1>>& pts) {
    Eigen::Matrix<Scalar, 2, 1> centroid = Eigen::Matrix<Scalar, 2, 1>::Zero();
    for (const auto& p : pts) centroid += p;
    centroid /= Scalar(pts.size());
    Scalar mean_dist = 0;
    for (const auto& p : pts) mean_dist += (p - centroid).norm();
    mean_dist /= Scalar(pts.size());
    if (!(mean_dist > Scalar(0))) throw DegeneracyError("calibration points are coincident");
    const Scalar s = std::sqrt(Scalar(2)) / mean_dist;
    Eigen::Matrix<Scalar, 3, 3> t;
    t << s, 0, -s * centroid.x(),
         0, s, -s * centroid.y(),
         0, 0, 1;
    return t;
}

}  // namespace detail

/// Normalized DLT: least-squares algebraic fit on Hartley-normalized points,
/// nullspace taken from the SVD of the 2n x 9 design matrix.
template <typename Scalar>
HomographyFit<Scalar> fit_homography(std::span<const Correspondence<Scalar>> pairs) {
    using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
    using Mat3 = Eigen::Matrix<Scalar, 3, 3>;
    if (pairs.size() < 4) {
        throw ArityError("fit_homography needs at least 4 correspondences, got " + std::to_string(pairs.size()));
    }
    std::vector<Vec2> src;
    std::vector<Vec2> dst;
    for (const auto& c : pairs) {
        if (!c.image_pt.allFinite() || !c.world_pt.allFinite()) throw ValidationError("non-finite correspondence");
        src.push_back(c.image_pt);
        dst.push_back(c.world_pt);
    }
    const Mat3 t_src = detail::hartley_normalizer(src);
    const Mat3 t_dst = detail::hartley_normalizer(dst);

    const auto n = static_cast<Eigen::Index>(pairs.size());
    Eigen::Matrix<Scalar, Eigen::Dynamic, 9> a(2 * n, 9);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Vec2 p = (t_src * src[static_cast<std::size_t>(i)].homogeneous()).hnormalized();
        const Vec2 q = (t_dst * dst[static_cast<std::size_t>(i)].homogeneous()).hnormalized();
        const Scalar x = p.x(), y = p.y(), u = q.x(), v = q.y();
        a.row(2 * i) << -x, -y, -1, 0, 0, 0, u * x, u * y, u;
        a.row(2 * i + 1) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
    }
    Eigen::JacobiSVD<Eigen::Matrix<Scalar, Eigen::Dynamic, 9>> svd(a, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    // A unique solution needs rank 8: sv(7) is the second smallest singular
    // value for n >= 5 and the smallest one for n == 4 (8 x 9 system).
    if (!(sv(7) > Scalar(1e-10) * sv(0))) {
        throw DegeneracyError("correspondences are degenerate (rank-deficient design matrix)");
    }
    const Eigen::Matrix<Scalar, 9, 1> nullvec = svd.matrixV().col(8);
    Mat3 hn;
    hn << nullvec(0), nullvec(1), nullvec(2),
          nullvec(3), nullvec(4), nullvec(5),
          nullvec(6), nullvec(7), nullvec(8);
    const Mat3 denorm = t_dst.inverse() * hn * t_src;
    Homography<Scalar> h(denorm);

    Scalar sq = 0;
    for (const auto& c : pairs) sq += (apply_homography(h, c.image_pt) - c.world_pt).squaredNorm();
    return {h, std::sqrt(sq / Scalar(pairs.size()))};
}

template <typename Scalar>
HomographyFit<Scalar> fit_homography(const std::vector<Correspondence<Scalar>>& pairs) {
    return fit_homography(std::span<const Correspondence<Scalar>>(pairs));
}

using HomographyD = Homography<double>;
using CorrespondenceD = Correspondence<double>;

/// Maps every anchor through `h`; boxes become the axis-aligned hull of their
/// mapped corners. Requires an unrectified scene; the result is rectified.
Scene rectify_scene(const HomographyD& h, const Scene& scene);

// Calibration sidecar: {"pairs": [[ix, iy, wx, wy], ...]} for a single camera,
// or {"cameras": {"<camera id>": {"pairs": [...]}, ...}} for several.
struct Calibration {
    std::optional<HomographyD> shared;
    std::map<std::string, HomographyD> per_camera;

    /// Homography for a scene: its camera's entry, else the shared one.
    const HomographyD& for_scene(const Scene& scene) const;
};

std::vector<CorrespondenceD> correspondences_from_json(const Json& j);
Calibration calibration_from_json(const Json& j);
Calibration load_calibration(const std::filesystem::path& path);

}  // namespace partwise
