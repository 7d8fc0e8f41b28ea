#pragma once

#include "resavg/complexcore.hpp"
#include "resavg/simulate.hpp"

#include <span>
#include <string>
#include <vector>

namespace resavg {

class Rng;

/// Sample sizes above this use sliced W1 instead of the exact assignment.
inline constexpr std::size_t kExactAssignmentLimit = 2000;
inline constexpr std::size_t kUpperSlicedDirections = 128;
inline constexpr std::size_t kConeCentres = 8;

/// Uniformly weighted point cloud in R^d, stored flat (point-major).
class EmpiricalMeasure {
public:
    EmpiricalMeasure(std::size_t dim, std::vector<double> flat);

    static EmpiricalMeasure from_points(const std::vector<RealVector>& points);
    static EmpiricalMeasure from_complex(const std::vector<ComplexState>& states);

    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    [[nodiscard]] std::size_t size() const noexcept { return flat_.size() / dim_; }
    [[nodiscard]] std::span<const double> point(std::size_t i) const { return {flat_.data() + i * dim_, dim_}; }
    [[nodiscard]] const std::vector<double>& flat() const noexcept { return flat_; }

    /// Coordinate k of every point.
    [[nodiscard]] RealVector coordinate(std::size_t k) const;
    /// <theta, x_i> for every point.
    [[nodiscard]] RealVector project(std::span<const double> theta) const;
    /// m points drawn with replacement.
    [[nodiscard]] EmpiricalMeasure resample(std::size_t m, Rng& rng) const;

private:
    std::size_t dim_;
    std::vector<double> flat_;
};

struct DistanceBracket {
    double lower = 0.0;
    double upper = 0.0;
    std::string lower_method;
    std::string upper_method;
    std::size_t n_samples = 0;
};

/// Monte Carlo resolution 2 / sqrt(n) of a distance between two n-sample clouds.
[[nodiscard]] double mc_floor(std::size_t n);

/// Mean |sorted(x)_i - sorted(y)_i|. Unequal sizes: the larger sample is resampled
/// with replacement (fixed seed) down to the smaller size and *resampled is set.
[[nodiscard]] double wasserstein1_1d(std::span<const double> x, std::span<const double> y,
                                     bool* resampled = nullptr);

/// Average over n_dirs uniform unit directions of the 1D W1 of the projections.
[[nodiscard]] double sliced_w1(const EmpiricalMeasure& x, const EmpiricalMeasure& y, std::size_t n_dirs, Rng& rng,
                               Execution execution = Execution::parallel);

/// Empirical W1 under the Euclidean cost via an optimal assignment. Unequal sizes
/// are resampled to the smaller one as in wasserstein1_1d.
[[nodiscard]] double exact_w1(const EmpiricalMeasure& x, const EmpiricalMeasure& y);

/// Bracket on the dual-Lipschitz distance. The lower end maximizes the mean gap over
/// cone functions at sampled centres and dict_size cosine ridges (all with
/// Lip + sup <= 1); the dictionary is generated sequentially from rng, so dictionaries
/// nest in dict_size. The upper end is min(2, W1).
[[nodiscard]] DistanceBracket dual_lipschitz_bracket(const EmpiricalMeasure& x, const EmpiricalMeasure& y,
                                                     std::size_t dict_size, Rng& rng,
                                                     Execution execution = Execution::parallel);

/// sup over pooled sample points of |ECDF_x - ECDF_y|.
[[nodiscard]] double ks_distance_1d(std::span<const double> x, std::span<const double> y);

/// States at checkpoint tau of the unflagged trajectories, flattened to R^2n.
[[nodiscard]] EmpiricalMeasure checkpoint_measure(const SdeEnsemble& e, double tau);
/// Concatenated states at several checkpoints (finite-dimensional path marginal).
[[nodiscard]] EmpiricalMeasure path_measure(const SdeEnsemble& e, std::span<const double> taus);
/// Actions of the unflagged trajectories at checkpoint tau.
[[nodiscard]] EmpiricalMeasure action_pushforward(const SdeEnsemble& e, double tau);
/// Actions stored by the action SDE at checkpoint tau.
[[nodiscard]] EmpiricalMeasure action_measure(const ActionEnsemble& e, double tau);

/// max over coordinates of the 1D W1 between coordinate marginals.
[[nodiscard]] double marginal_w1(const EmpiricalMeasure& x, const EmpiricalMeasure& y);

}  // namespace resavg
